"""Quantum Espresso pw.x adapter: input writing, output parsing, optional execution."""

from __future__ import annotations

import math
import re
import subprocess
import time
from pathlib import Path

from ..constants import A3_TO_CM3, AVOGADRO, BOHR_TO_ANGSTROM, RY_TO_EV
from ..elements import atomic_mass, atomic_number
from ..errors import ConfigError, ParseError, ValidationError
from ..properties import BAND_GAP, BULK_MODULUS, DENSITY, check_property
from ..structure import Structure
from .base import Calculator, CalculatorResult, check_filled
from .pairpot import STRAINS, scan_bulk_modulus

DEFAULT_K_DENSITY = 30.0  # Angstrom; grid n_i = max(1, round(k_density / a_i))


def band_count(composition) -> int:
    """ceil(((sum Z) div 2) * 1.2), evaluated in exact integer arithmetic."""
    half_electrons = sum(atomic_number(sym) for sym in composition) // 2
    return (6 * half_electrons + 4) // 5


def kpoint_grid(structure: Structure, k_density: float = DEFAULT_K_DENSITY):
    return tuple(max(1, int(math.floor(k_density / length + 0.5)))
                 for length in structure.lattice.lengths)


def _species_order(composition):
    seen = []
    for sym in composition:
        if sym not in seen:
            seen.append(sym)
    return seen


def render_qe_input(structure: Structure, composition, prop: str,
                    pseudo_dir: str = "./pseudo", pseudos: dict | None = None,
                    k_density: float = DEFAULT_K_DENSITY) -> str:
    """pw.x input text for one single-point job; a pure function of its arguments."""
    check_property(prop)
    comp = check_filled(composition)
    if len(comp) != structure.n_sites:
        raise ValidationError("composition length must match site count")
    calculation = "vc-relax" if prop == DENSITY else "scf"
    occupations = "fixed" if prop == BAND_GAP else "smearing"
    species = _species_order(comp)
    pseudos = pseudos or {}

    lines = [
        "&CONTROL",
        f"  calculation = '{calculation}'",
        "  nstep = 1",
        "  prefix = 'crystal'",
        "  outdir = './out'",
        f"  pseudo_dir = '{pseudo_dir}'",
        "/",
        "&SYSTEM",
        "  ibrav = 0",
        f"  nat = {structure.n_sites}",
        f"  ntyp = {len(species)}",
        f"  nbnd = {band_count(comp)}",
        "  ecutwfc = 50",
        "  ecutrho = 400",
        f"  occupations = '{occupations}'",
        "  degauss = 0.001",
        "  nspin = 1",
        "/",
        "&ELECTRONS",
        "  electron_maxstep = 300",
        "  mixing_mode = 'plain'",
        "  mixing_beta = 0.7",
        "  diagonalization = 'david'",
        "/",
    ]
    if calculation == "vc-relax":
        lines += ["&IONS", "  ion_dynamics = 'bfgs'", "/",
                  "&CELL", "  cell_dynamics = 'bfgs'", "/"]
    lines.append("ATOMIC_SPECIES")
    for sym in species:
        lines.append(f"  {sym} {atomic_mass(sym):.10g} {pseudos.get(sym, sym + '.upf')}")
    lines.append("ATOMIC_POSITIONS crystal")
    for sym, (fx, fy, fz) in zip(comp, structure.sites):
        lines.append(f"  {sym} {fx:.10f} {fy:.10f} {fz:.10f}")
    lines.append("K_POINTS automatic")
    lines.append("  {} {} {} 0 0 0".format(*kpoint_grid(structure, k_density)))
    lines.append("CELL_PARAMETERS angstrom")
    for row in structure.lattice.matrix:
        lines.append("  {:.10f} {:.10f} {:.10f}".format(*row))
    return "\n".join(lines) + "\n"


def write_qe_input(structure: Structure, composition, prop: str, workdir,
                   pseudo_dir: str = "./pseudo", pseudos: dict | None = None,
                   k_density: float = DEFAULT_K_DENSITY) -> Path:
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    path = workdir / f"{prop}.pwi"
    path.write_text(
        render_qe_input(structure, composition, prop, pseudo_dir, pseudos, k_density),
        encoding="utf-8")
    return path


_ENERGY_RE = re.compile(r"^!\s+total energy\s*=\s*(-?[\d.]+)\s*Ry", re.M)
_HOMO_LUMO_RE = re.compile(
    r"highest occupied, lowest unoccupied level \(ev\):\s*(-?[\d.]+)\s+(-?[\d.]+)")
_HOMO_ONLY_RE = re.compile(r"highest occupied level \(ev\):\s*(-?[\d.]+)")
_VOLUME_RE = re.compile(r"(?:new )?unit-cell volume\s*=\s*([\d.]+)\s*\(?a\.u\.\)?\^3")
_SITE_RE = re.compile(r"^\s*\d+\s+([A-Z][a-z]?)\s+tau\(", re.M)


def parse_qe_output(path) -> CalculatorResult:
    """Extract the job's property from a pw.x log.

    Band-gap jobs report the HOMO/LUMO separation, vc-relax jobs the density
    of the final cell, energy jobs the total energy in eV.
    """
    start = time.perf_counter()
    try:
        text = Path(path).read_text(encoding="utf-8", errors="replace")
    except OSError as exc:
        raise ParseError(f"cannot read output: {exc}") from exc
    if "JOB DONE" not in text:
        raise ParseError("truncated output: no JOB DONE marker")
    elapsed = time.perf_counter() - start
    if "convergence has been achieved" not in text and \
            "End of BFGS Geometry Optimization" not in text:
        return CalculatorResult.fail("convergence", elapsed)

    match = _HOMO_LUMO_RE.search(text)
    if match:
        homo, lumo = float(match.group(1)), float(match.group(2))
        return CalculatorResult.ok(max(0.0, lumo - homo), elapsed)
    if _HOMO_ONLY_RE.search(text):
        return CalculatorResult.ok(0.0, elapsed)

    volumes = _VOLUME_RE.findall(text)
    if "vc-relax" in text or len(volumes) > 1:
        if not volumes:
            raise ParseError("relaxation output lacks a unit-cell volume")
        symbols = _SITE_RE.findall(text)
        if not symbols:
            raise ParseError("relaxation output lacks atomic sites")
        volume_a3 = float(volumes[-1]) * BOHR_TO_ANGSTROM ** 3
        mass = sum(atomic_mass(sym) for sym in symbols)
        return CalculatorResult.ok(mass / (AVOGADRO * volume_a3 * A3_TO_CM3), elapsed)

    match = _ENERGY_RE.search(text)
    if match:
        return CalculatorResult.ok(float(match.group(1)) * RY_TO_EV, elapsed)
    raise ParseError("no recognizable result in output")


class QECalculator(Calculator):
    """Runs pw.x through a configured shell command; disabled by default.

    `command` is invoked as `<command> -in <input file>` with stdout captured
    to `<input>.out`. Leaving it unset keeps the adapter write/parse only.
    """

    def __init__(self, prop: str, workdir, command: str | None = None,
                 pseudo_dir: str = "./pseudo", pseudos: dict | None = None,
                 k_density: float = DEFAULT_K_DENSITY, timeout: float = 600.0,
                 strains=STRAINS):
        self.property_id = check_property(prop)
        self.calculator_id = f"qe-{prop}-v1"
        self.workdir = Path(workdir)
        self.command = command
        self.pseudo_dir = pseudo_dir
        self.pseudos = pseudos
        self.k_density = k_density
        self.timeout = timeout
        self.strains = tuple(strains)
        self._job = 0

    def _run_one(self, structure, composition, prop) -> CalculatorResult:
        if self.command is None:
            raise ConfigError("qe_command is not configured; adapter is write/parse only")
        self._job += 1
        jobdir = self.workdir / f"job{self._job:06d}"
        path = write_qe_input(structure, composition, prop, jobdir,
                              self.pseudo_dir, self.pseudos, self.k_density)
        out_path = path.with_suffix(".out")
        try:
            with open(out_path, "w", encoding="utf-8") as out:
                subprocess.run(self.command.split() + ["-in", path.name],
                               cwd=jobdir, stdout=out, stderr=subprocess.STDOUT,
                               timeout=self.timeout, check=False)
        except subprocess.TimeoutExpired:
            return CalculatorResult.fail("timeout")
        try:
            return parse_qe_output(out_path)
        except ParseError:
            return CalculatorResult.fail("parse")

    def compute(self, structure, composition) -> CalculatorResult:
        comp = check_filled(composition)
        if self.property_id != BULK_MODULUS:
            return self._run_one(structure, comp, self.property_id)

        def energy_at_scale(scale):
            scaled = Structure(
                type(structure.lattice)(structure.lattice.matrix * scale),
                structure.sites, structure.space_group,
                f"{structure.name}@{scale:.4f}")
            res = self._run_one(scaled, comp, BULK_MODULUS)
            if not res.success:
                raise _ScanFailure(res)
            return res.value

        try:
            result, _ = scan_bulk_modulus(energy_at_scale, structure.lattice.volume,
                                          self.strains)
        except _ScanFailure as exc:
            return exc.result
        return result


class _ScanFailure(Exception):
    def __init__(self, result):
        self.result = result
