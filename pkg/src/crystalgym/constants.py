"""Unit conversion constants, fixed in one place."""

# 1 eV/A^3 in GPa
EV_PER_A3_TO_GPA = 160.21766

# 1 Rydberg in eV
RY_TO_EV = 13.60569

# Avogadro constant, 1/mol
AVOGADRO = 6.02214076e23

# 1 bohr in Angstrom
BOHR_TO_ANGSTROM = 0.529177210903

# 1 A^3 in cm^3
A3_TO_CM3 = 1.0e-24
