import pytest

from crystalgym.elements import atomic_mass, element, element_table


def test_table_has_all_118_ordered_by_z():
    table = element_table()
    assert len(table) == 118
    assert [e.Z for e in table] == list(range(1, 119))
    assert len({e.symbol for e in table}) == 118
    assert all(e.mass > 0 for e in table)


def test_standard_weights():
    assert element("H").Z == 1
    assert atomic_mass("H") == pytest.approx(1.008, abs=1e-3)
    assert element("Na").Z == 11
    assert atomic_mass("Na") == pytest.approx(22.990, abs=1e-3)
    assert atomic_mass("Cl") == pytest.approx(35.45, abs=1e-2)


def test_unknown_symbol():
    with pytest.raises(LookupError):
        element("Xx")
