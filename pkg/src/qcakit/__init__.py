"""qcakit: design, simulate and verify quantum-dot cellular automata layouts."""

from .layout import (
    Cell,
    CellFunction,
    CellOrientation,
    Crossing,
    GridPosition,
    Layout,
    LayoutError,
)
from .physics import DEFAULT_PARAMS, PhysicalParams, kink_energy, kink_matrix
from .simulate import (
    AmbiguousCell,
    EmptyLayout,
    InputWaveform,
    SimConfig,
    SimTrace,
    UndrivenCell,
    run_bistable,
    run_logic,
    run_truth_table,
)

__version__ = "0.1.0"
