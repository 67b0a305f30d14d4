from pathlib import Path

import pytest

from crystalgym.calculators import (QECalculator, parse_qe_output,
                                    render_qe_input, write_qe_input)
from crystalgym.calculators.espresso import band_count, kpoint_grid
from crystalgym.constants import RY_TO_EV
from crystalgym.errors import ConfigError, ParseError, ValidationError
from crystalgym.pool import load_structure

FIXTURES = Path(__file__).parent / "fixtures"
ROCKSALT = load_structure("rocksalt")
NACL = ["Na"] * 4 + ["Cl"] * 4


def test_band_count_from_z_sums():
    # ceil((sum Z div 2) * 1.2): 28 -> ceil(16.8) = 17; 20 -> ceil(12.0) = 12
    assert band_count(["Ni"]) == 17  # Z = 28
    assert band_count(["Ca"]) == 12  # Z = 20
    assert band_count(["Na"] * 4 + ["Cl"] * 4) == 68  # sum Z = 112
    # exactness at an integer boundary: 25 * 1.2 = 30, not 31
    assert band_count(["Ca", "Mg", "H", "H", "Be", "C", "C"]) == 30  # sum Z = 50


def test_kpoint_grid_rounding():
    assert kpoint_grid(ROCKSALT) == (5, 5, 5)  # 30 / 5.6402 = 5.32
    perov = load_structure("perovskite")
    assert kpoint_grid(perov) == (8, 8, 8)  # 30 / 3.905 = 7.68


def test_golden_band_gap_input():
    text = render_qe_input(ROCKSALT, NACL, "band_gap")
    golden = (FIXTURES / "golden_rocksalt_band_gap.pwi").read_text(encoding="utf-8")
    assert text == golden


def test_golden_density_input():
    perov = load_structure("perovskite")
    text = render_qe_input(perov, ["Sr", "Ca", "O", "O", "O"], "density")
    golden = (FIXTURES / "golden_perovskite_density.pwi").read_text(encoding="utf-8")
    assert text == golden


def test_required_settings_present():
    text = render_qe_input(ROCKSALT, NACL, "band_gap")
    for needle in ("calculation = 'scf'", "nstep = 1", "ecutwfc = 50",
                   "ecutrho = 400", "occupations = 'fixed'", "degauss = 0.001",
                   "nspin = 1", "electron_maxstep = 300", "mixing_mode = 'plain'",
                   "mixing_beta = 0.7", "diagonalization = 'david'",
                   "nbnd = 68", "ATOMIC_POSITIONS crystal", "K_POINTS automatic",
                   "CELL_PARAMETERS angstrom"):
        assert needle in text, needle


def test_density_job_uses_vc_relax():
    text = render_qe_input(ROCKSALT, NACL, "density")
    control = text.split("/")[0]
    assert "calculation = 'vc-relax'" in control
    assert "occupations = 'smearing'" in text


def test_bulk_modulus_job_is_scf_with_smearing():
    text = render_qe_input(ROCKSALT, NACL, "bulk_modulus")
    assert "calculation = 'scf'" in text
    assert "occupations = 'smearing'" in text


def test_write_is_pure_function(tmp_path):
    p1 = write_qe_input(ROCKSALT, NACL, "band_gap", tmp_path / "a")
    p2 = write_qe_input(ROCKSALT, NACL, "band_gap", tmp_path / "b")
    assert p1.read_bytes() == p2.read_bytes()


def test_write_rejects_unfilled_sites(tmp_path):
    with pytest.raises(ValidationError):
        write_qe_input(ROCKSALT, ["Na"] * 7 + [None], "band_gap", tmp_path)


def test_parse_total_energy():
    result = parse_qe_output(FIXTURES / "scf_energy.out")
    assert result.success
    assert result.value == pytest.approx(-100.0 * RY_TO_EV, rel=1e-12)
    assert result.value == pytest.approx(-1360.569, abs=1e-3)


def test_parse_band_gap():
    result = parse_qe_output(FIXTURES / "band_gap.out")
    assert result.success
    assert result.value == pytest.approx(9.0885 - 6.2915, rel=1e-9)


def test_parse_unconverged():
    result = parse_qe_output(FIXTURES / "unconverged.out")
    assert not result.success
    assert result.failure_reason == "convergence"


def test_parse_truncated():
    with pytest.raises(ParseError):
        parse_qe_output(FIXTURES / "truncated.out")


def test_parse_vc_relax_density():
    result = parse_qe_output(FIXTURES / "vc_relax_density.out")
    assert result.success
    # 4 Na + 4 Cl in 1210.8297 bohr^3: same cell as the rocksalt skeleton
    assert result.value == pytest.approx(2.163, abs=0.01)


def test_qe_calculator_requires_command(tmp_path):
    calc = QECalculator("band_gap", tmp_path)
    with pytest.raises(ConfigError):
        calc.compute(ROCKSALT, NACL)


def test_qe_calculator_runs_stub_command(tmp_path):
    # stand-in pw.x: writes a fixed converged band-gap output
    stub = tmp_path / "fake_pw.sh"
    stub.write_text("#!/bin/sh\ncat <<'EOF'\n"
                    + (FIXTURES / "band_gap.out").read_text(encoding="utf-8")
                    + "EOF\n", encoding="utf-8")
    stub.chmod(0o755)
    calc = QECalculator("band_gap", tmp_path / "work", command=str(stub))
    result = calc.compute(ROCKSALT, NACL)
    assert result.success
    assert result.value == pytest.approx(2.797, abs=1e-3)
    assert (tmp_path / "work" / "job000001" / "band_gap.pwi").exists()
