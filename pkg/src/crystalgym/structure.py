"""Crystal skeletons: lattice math, fractional sites, structure file I/O."""

from __future__ import annotations

import hashlib
import math

import numpy as np

from .errors import ParseError, ValidationError

DEFAULT_MAX_SITES = 8


def _fmt(x: float) -> str:
    return f"{x:.10g}"


class Lattice:
    """Unit cell spanned by three row vectors (Angstrom)."""

    def __init__(self, matrix):
        m = np.array(matrix, dtype=np.float64)
        if m.shape != (3, 3):
            raise ValidationError(f"lattice matrix must be 3x3, got {m.shape}")
        m.flags.writeable = False
        self.matrix = m
        vol = abs(np.linalg.det(m))
        if not vol > 0.0:
            raise ValidationError("lattice volume must be positive")
        self.volume = float(vol)

    @classmethod
    def from_parameters(cls, a, b, c, phi1, phi2, phi3) -> "Lattice":
        """Standard crystallographic construction: l1 along x, l2 in xy.

        phi1 is the angle between l2 and l3, phi2 between l1 and l3,
        phi3 between l1 and l2 (degrees).
        """
        if min(a, b, c) <= 0:
            raise ValidationError("lattice lengths must be positive")
        al, be, ga = (math.radians(x) for x in (phi1, phi2, phi3))
        cos_al, cos_be, cos_ga = math.cos(al), math.cos(be), math.cos(ga)
        sin_ga = math.sin(ga)
        if abs(sin_ga) < 1e-12:
            raise ValidationError("degenerate lattice angle phi3")
        cx = c * cos_be
        cy = c * (cos_al - cos_be * cos_ga) / sin_ga
        cz_sq = c * c - cx * cx - cy * cy
        if cz_sq <= 0:
            raise ValidationError("lattice angles do not define a 3D cell")
        return cls([[a, 0.0, 0.0], [b * cos_ga, b * sin_ga, 0.0], [cx, cy, math.sqrt(cz_sq)]])

    @property
    def lengths(self) -> tuple[float, float, float]:
        n = np.linalg.norm(self.matrix, axis=1)
        return float(n[0]), float(n[1]), float(n[2])

    @property
    def angles(self) -> tuple[float, float, float]:
        """(phi1, phi2, phi3) in degrees; phi_k is between the other two vectors."""
        m = self.matrix
        n = np.linalg.norm(m, axis=1)
        out = []
        for i, j in ((1, 2), (0, 2), (0, 1)):
            cosang = float(np.dot(m[i], m[j]) / (n[i] * n[j]))
            out.append(math.degrees(math.acos(max(-1.0, min(1.0, cosang)))))
        return out[0], out[1], out[2]

    def cartesian(self, frac) -> np.ndarray:
        return np.asarray(frac, dtype=np.float64) @ self.matrix

    def __eq__(self, other):
        return isinstance(other, Lattice) and self.matrix.tobytes() == other.matrix.tobytes()

    def __hash__(self):
        return hash(self.matrix.tobytes())

    def __repr__(self):
        a, b, c = self.lengths
        return f"Lattice(a={a:.4f}, b={b:.4f}, c={c:.4f})"


class Structure:
    """Immutable crystal skeleton: lattice + fractional sites + space group."""

    def __init__(self, lattice: Lattice, sites, space_group: int, name: str,
                 max_sites: int = DEFAULT_MAX_SITES):
        s = np.array(sites, dtype=np.float64)
        if s.ndim != 2 or s.shape[1] != 3:
            raise ValidationError(f"sites must be (n, 3), got {s.shape}")
        if not 1 <= len(s) <= max_sites:
            raise ValidationError(f"site count {len(s)} outside [1, {max_sites}]")
        if not isinstance(space_group, int) or not 1 <= space_group <= 230:
            raise ValidationError(f"space group {space_group} outside [1, 230]")
        s = np.mod(s, 1.0)
        s[s >= 1.0] -= 1.0  # guard x % 1.0 == 1.0 for tiny negative x
        s.flags.writeable = False
        self.lattice = lattice
        self.sites = s
        self.space_group = space_group
        self.name = name

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def site_cartesian(self, u: int) -> np.ndarray:
        return self.lattice.cartesian(self.sites[u])

    def content_hash(self) -> str:
        return hashlib.sha256(serialize_structure(self).encode()).hexdigest()

    def __eq__(self, other):
        return (isinstance(other, Structure)
                and self.lattice == other.lattice
                and self.sites.tobytes() == other.sites.tobytes()
                and self.space_group == other.space_group
                and self.name == other.name)

    def __hash__(self):
        return hash((self.lattice, self.sites.tobytes(), self.space_group, self.name))

    def __repr__(self):
        return f"Structure({self.name!r}, sites={self.n_sites}, S={self.space_group})"


def periodic_distance(u: int, v: int, shift, structure: Structure) -> float:
    """Distance from site u in the reference cell to site v in the cell
    displaced by integer lattice shifts (c1, c2, c3)."""
    n = structure.n_sites
    if not (0 <= u < n and 0 <= v < n):
        raise IndexError(f"site index out of range for {n} sites")
    delta = structure.sites[v] + np.asarray(shift, dtype=np.float64) - structure.sites[u]
    return float(np.linalg.norm(delta @ structure.lattice.matrix))


def serialize_structure(structure: Structure) -> str:
    a, b, c = structure.lattice.lengths
    p1, p2, p3 = structure.lattice.angles
    lines = [
        f"lattice {_fmt(a)} {_fmt(b)} {_fmt(c)} {_fmt(p1)} {_fmt(p2)} {_fmt(p3)}",
        f"spacegroup {structure.space_group}",
        f"name {structure.name}",
    ]
    for fx, fy, fz in structure.sites:
        lines.append(f"site {_fmt(fx)} {_fmt(fy)} {_fmt(fz)}")
    return "\n".join(lines) + "\n"


def parse_structure(text: str, max_sites: int = DEFAULT_MAX_SITES) -> Structure:
    lattice_params = None
    space_group = None
    name = None
    sites = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        key = fields[0]
        if key == "lattice":
            if len(fields) != 7:
                raise ParseError("lattice line needs 6 numbers (a b c phi1 phi2 phi3)", lineno)
            try:
                lattice_params = [float(x) for x in fields[1:]]
            except ValueError:
                raise ParseError("non-numeric lattice field", lineno) from None
        elif key == "spacegroup":
            if len(fields) != 2:
                raise ParseError("spacegroup line needs one integer", lineno)
            try:
                space_group = int(fields[1])
            except ValueError:
                raise ParseError(f"non-integer space group {fields[1]!r}", lineno) from None
        elif key == "name":
            name = line[len("name"):].strip()
            if not name:
                raise ParseError("empty name", lineno)
        elif key == "site":
            if len(fields) != 4:
                raise ParseError("site line needs 3 fractional coordinates", lineno)
            try:
                sites.append([float(x) for x in fields[1:]])
            except ValueError:
                raise ParseError("non-numeric site coordinate", lineno) from None
        else:
            raise ParseError(f"unknown keyword {key!r}", lineno)
    if lattice_params is None:
        raise ParseError("missing lattice line")
    if space_group is None:
        raise ParseError("missing spacegroup line")
    if name is None:
        raise ParseError("missing name line")
    if not sites:
        raise ParseError("no site lines")
    lattice = Lattice.from_parameters(*lattice_params)
    return Structure(lattice, sites, space_group, name, max_sites=max_sites)


def parse_structure_file(path, max_sites: int = DEFAULT_MAX_SITES) -> Structure:
    with open(path, encoding="utf-8") as fh:
        return parse_structure(fh.read(), max_sites=max_sites)


def write_structure_file(structure: Structure, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_structure(structure))
