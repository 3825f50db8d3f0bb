"""Two-cell electrostatic energies and kink energies.

The pair energy is the double sum over the 4x4 dot pairs

    E = sum_n sum_m q_n * q_m / (4 pi eps0 epsr |r_n - r_m|)

with net dot charges from the two-electron model: the two occupied dots
carry -e + e/2 = -e/2 each (an e/2 neutralizing background sits on every
dot), the two empty dots +e/2, so a cell is charge-neutral overall and
pair couplings fall off quadrupole-fast.

The kink energy of a pair is E(opposite polarizations) - E(same); a
positive kink means the pair favors equal polarization.  For this charge
model flipping one cell negates every dot-pair term, so
E(opposite) = -E(same) and kink = -2 E(same) exactly.

Energies are joules internally; reports elsewhere display eV.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .layout import Cell, CellOrientation, GridPosition, Layout

E_CHARGE = 1.602176634e-19
EPSILON0 = 8.8541878128e-12
_NM = 1e-9
_SQRT2 = math.sqrt(2.0)


class PhysicsError(Exception):
    pass


class CoincidentCells(PhysicsError):
    pass


@dataclass(frozen=True)
class PhysicalParams:
    epsilon0: float = EPSILON0
    epsilon_r: float = 12.9
    radius_of_effect_nm: float = 65.0

    def __post_init__(self):
        if self.epsilon_r < 1.0:
            raise PhysicsError("epsilon_r must be >= 1")
        if self.radius_of_effect_nm <= 0:
            raise PhysicsError("radius_of_effect_nm must be positive")

    @property
    def coulomb_k(self) -> float:
        return 1.0 / (4.0 * math.pi * self.epsilon0 * self.epsilon_r)


DEFAULT_PARAMS = PhysicalParams()


def dot_positions(orientation: CellOrientation, dot_offset_nm: float) -> List[Tuple[float, float]]:
    """Four dot coordinates (nm) relative to the cell center.

    Index order: [0], [1] form the P=+1 diagonal, [2], [3] the P=-1 one.
    Rotated cells use the standard square turned 45 degrees.
    """
    d = dot_offset_nm
    if orientation is CellOrientation.STANDARD:
        return [(d, -d), (-d, d), (d, d), (-d, -d)]
    s = d * _SQRT2
    return [(s, 0.0), (-s, 0.0), (0.0, s), (0.0, -s)]


def dot_charges(polarization: float) -> List[float]:
    """Net charge (C) per dot in dot_positions order for P = +-1."""
    if polarization not in (-1.0, 1.0, -1, 1):
        raise PhysicsError("polarization must be -1 or +1, got %r" % (polarization,))
    e2 = E_CHARGE / 2.0
    if polarization > 0:
        return [-e2, -e2, +e2, +e2]
    return [+e2, +e2, -e2, -e2]


def _charge_config(cell: Cell, polarization: float, pitch_nm: float,
                   dot_offset_nm: float) -> List[Tuple[float, float, float]]:
    cx = cell.pos.col * pitch_nm
    cy = cell.pos.row * pitch_nm
    dots = dot_positions(cell.orientation, dot_offset_nm)
    qs = dot_charges(polarization)
    return [(cx + dx, cy + dy, q) for (dx, dy), q in zip(dots, qs)]


def electrostatic_energy(cell_a: Cell, pa: float, cell_b: Cell, pb: float,
                         params: PhysicalParams = DEFAULT_PARAMS,
                         pitch_nm: float = 20.0,
                         dot_offset_nm: float = 4.5) -> float:
    """Exact 16-term pair energy (J) for the given polarizations."""
    if cell_a.pos == cell_b.pos:
        raise CoincidentCells("cells %s and %s coincide" % (cell_a.id, cell_b.id))
    k = params.coulomb_k
    total = 0.0
    for xa, ya, qa in _charge_config(cell_a, pa, pitch_nm, dot_offset_nm):
        for xb, yb, qb in _charge_config(cell_b, pb, pitch_nm, dot_offset_nm):
            r = math.hypot(xa - xb, ya - yb) * _NM
            total += k * qa * qb / r
    return total


def kink_energy(cell_a: Cell, cell_b: Cell,
                params: PhysicalParams = DEFAULT_PARAMS,
                pitch_nm: float = 20.0,
                dot_offset_nm: float = 4.5) -> float:
    """E(opposite) - E(same) in joules; symmetric in the two cells."""
    e_same = electrostatic_energy(cell_a, +1.0, cell_b, +1.0, params,
                                  pitch_nm, dot_offset_nm)
    e_opp = electrostatic_energy(cell_a, +1.0, cell_b, -1.0, params,
                                 pitch_nm, dot_offset_nm)
    return e_opp - e_same


def reference_kink(layout: Layout, params: PhysicalParams = DEFAULT_PARAMS) -> float:
    """Kink energy of two side-by-side standard cells at the layout pitch.

    The natural energy unit of a layout; clock levels default relative to it.
    """
    a = Cell(id="_ra", pos=GridPosition(0, 0))
    b = Cell(id="_rb", pos=GridPosition(1, 0))
    return kink_energy(a, b, params, layout.pitch_nm, layout.dot_offset_nm)


def kink_matrix(layout: Layout, params: PhysicalParams = DEFAULT_PARAMS) -> np.ndarray:
    """Dense symmetric matrix of pairwise kink energies (J).

    Entry [i][j] follows the sorted cell order of layout.cells; pairs beyond
    params.radius_of_effect_nm are zero, the diagonal is zero.
    """
    n = len(layout.cells)
    m = np.zeros((n, n))
    cells = layout.cells
    cutoff = params.radius_of_effect_nm
    pitch = layout.pitch_nm
    for i in range(n):
        for j in range(i + 1, n):
            dx = (cells[i].pos.col - cells[j].pos.col) * pitch
            dy = (cells[i].pos.row - cells[j].pos.row) * pitch
            if math.hypot(dx, dy) > cutoff:
                continue
            k = kink_energy(cells[i], cells[j], params, pitch, layout.dot_offset_nm)
            m[i, j] = k
            m[j, i] = k
    return m
