"""Layout verification engines.

Two engines share one coupling model (the pairwise kink-energy matrix):

* run_bistable: relaxation under the 4-phase clock.  Each cell's tunneling
  barrier gamma follows its zone's phase (Switch: high->low ramp, Hold: low,
  Release: low->high, Relax: high) and within every step the cells are swept
  Jacobi-style with P <- x/sqrt(1+x^2), x = sum_j E_kink[i,j]*P[j] / (2*gamma_i)
  until the largest |dP| falls below tolerance.  Holding cells are clamped
  at their latched value: the raised barrier blocks retunneling, so the
  field is not re-evaluated while a zone holds.

* run_logic: a fast zone-wave engine.  When a zone switches, its cells take
  sign(sum_j w_ij * v_j) over already-settled neighbors (fixed drivers,
  pinned inputs, the zone currently in Hold, and same-zone cells settled
  earlier in the wave).  Couplings below a relative threshold do not drive,
  so parasitic far-field terms cannot settle a cell before its wire does.

Zone k is in Switch/Hold/Release/Relax when the global phase counter is
k, k+1, k+2, k+3 (mod 4).  Logic convention: P=+1 is 1, P=-1 is 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .layout import Cell, CellFunction, Layout
from .physics import DEFAULT_PARAMS, PhysicalParams, kink_matrix, reference_kink

PHASE_NAMES = ("switch", "hold", "release", "relax")


class SimulationError(Exception):
    pass


class EmptyLayout(SimulationError):
    pass


class BadWaveform(SimulationError):
    pass


class AmbiguousCell(SimulationError):
    """Tie in a weighted vote: the layout does not decide this cell."""

    def __init__(self, cell_id: str, phase: int):
        self.cell_id = cell_id
        self.phase = phase
        super().__init__("ambiguous vote at cell %s (phase %d)" % (cell_id, phase))


class UndrivenCell(SimulationError):
    """A clocked cell has no possible driver when its zone switches."""

    def __init__(self, cell_id: str, phase: int):
        self.cell_id = cell_id
        self.phase = phase
        super().__init__("cell %s has no driver (phase %d)" % (cell_id, phase))


@dataclass(frozen=True)
class SimConfig:
    engine: str = "bistable"  # "bistable" | "logic"
    max_iterations_per_step: int = 10000
    convergence_tol: float = 1e-6
    # Tunneling energies in joules; None picks defaults relative to the
    # layout's strongest adjacent kink energy.
    gamma_high: Optional[float] = None
    gamma_low: Optional[float] = None
    gamma_high_rel: float = 4.0
    gamma_low_rel: float = 0.001  # times gamma_high
    steps_per_phase: int = 4
    # Fraction of the phase after which the Release ramp reaches gamma_high.
    # Erasure must complete before any Switch ramp reaches latching strength,
    # otherwise stale polarization leaks across logical crossings.
    release_fraction: float = 0.25
    radius_of_effect_nm: float = 65.0
    # Couplings weaker than this fraction of the strongest adjacent kink do
    # not count as logic-engine drivers (they still enter bistable sums).
    # Must sit below the standard/rotated knight-offset link (0.018) that
    # wire interfaces rely on, and above knight/3-pitch noise between
    # standard cells (0.007).
    drive_threshold_rel: float = 0.015
    damping: float = 0.5

    def __post_init__(self):
        if self.engine not in ("bistable", "logic"):
            raise SimulationError("unknown engine %r" % (self.engine,))
        if self.steps_per_phase < 1:
            raise SimulationError("steps_per_phase must be >= 1")
        if self.convergence_tol <= 0:
            raise SimulationError("convergence_tol must be positive")
        if not 0 < self.release_fraction <= 1:
            raise SimulationError("release_fraction must be in (0, 1]")
        if self.gamma_high is not None and self.gamma_low is not None:
            if not (self.gamma_high > self.gamma_low > 0):
                raise SimulationError("need gamma_high > gamma_low > 0")


@dataclass(frozen=True)
class InputWaveform:
    """Per INPUT label, one logic value (0/1) per clock cycle."""

    values: Dict[str, Tuple[int, ...]]

    def __post_init__(self):
        lengths = {len(v) for v in self.values.values()}
        if not self.values or lengths == {0}:
            raise BadWaveform("waveform needs at least one cycle")
        if len(lengths) != 1:
            raise BadWaveform("all input sequences must have equal length")
        for label, seq in self.values.items():
            if any(b not in (0, 1) for b in seq):
                raise BadWaveform("non-binary value for input %r" % label)

    @property
    def cycles(self) -> int:
        return len(next(iter(self.values.values())))

    @classmethod
    def constant(cls, bits: Dict[str, int], cycles: int) -> "InputWaveform":
        return cls({k: tuple([v] * cycles) for k, v in bits.items()})

    def validate_against(self, layout: Layout) -> None:
        labels = {c.label for c in layout.inputs()}
        missing = labels - set(self.values)
        extra = set(self.values) - labels
        if missing:
            raise BadWaveform("no waveform for inputs: %s" % sorted(missing))
        if extra:
            raise BadWaveform("waveform for unknown inputs: %s" % sorted(extra))


@dataclass
class SimTrace:
    engine: str
    cell_order: Tuple[str, ...]
    steps_per_phase: int
    phases: int
    # One row per recorded step: bistable records every substep, logic one
    # row per phase.  Values are polarizations or {-1,0,+1} logic values.
    step_index: List[Tuple[int, int]] = field(default_factory=list)  # (phase, substep)
    values: List[np.ndarray] = field(default_factory=list)
    samples: Dict[str, Dict[int, int]] = field(default_factory=dict)
    sample_strength: Dict[str, Dict[int, float]] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    def sample_bits(self, label: str) -> List[Optional[int]]:
        got = self.samples.get(label, {})
        if not got:
            return []
        return [got.get(c) for c in range(max(got) + 1)]

    def last_sample(self, label: str) -> Optional[int]:
        got = self.samples.get(label, {})
        return got[max(got)] if got else None

    def export_lines(self) -> List[str]:
        out = ["# qca-trace v1 engine=%s phases=%d steps_per_phase=%d" %
               (self.engine, self.phases, self.steps_per_phase)]
        for (p, u), vec in zip(self.step_index, self.values):
            step = p * self.steps_per_phase + u
            for cid, v in zip(self.cell_order, vec):
                if self.engine == "bistable":
                    out.append("%d %s %.6f" % (step, cid, v))
                else:
                    out.append("%d %s %d" % (step, cid, int(v)))
        for label in sorted(self.samples):
            for c in sorted(self.samples[label]):
                out.append("sample %s %d %d" % (label, c, self.samples[label][c]))
        return out


def phase_of(zone: int, phase_counter: int) -> int:
    """0=Switch 1=Hold 2=Release 3=Relax for this zone at this counter."""
    return (phase_counter - zone) % 4


@dataclass
class _Model:
    layout: Layout
    config: SimConfig
    params: PhysicalParams
    K: np.ndarray
    zones: np.ndarray
    fixed_mask: np.ndarray
    fixed_vals: np.ndarray
    input_idx: Dict[str, int]
    output_idx: Dict[str, int]
    gamma_high: float
    gamma_low: float
    kink_ref: float


def _build_model(layout: Layout, config: SimConfig, params: PhysicalParams) -> _Model:
    if not layout.cells:
        raise EmptyLayout("cannot simulate an empty layout")
    params = replace(params, radius_of_effect_nm=config.radius_of_effect_nm)
    K = kink_matrix(layout, params)
    n = len(layout.cells)
    zones = np.array([c.clock for c in layout.cells])
    fixed_mask = np.array([c.function is CellFunction.FIXED for c in layout.cells])
    fixed_vals = np.array([c.polarization or 0.0 for c in layout.cells])
    input_idx = {c.label: i for i, c in enumerate(layout.cells)
                 if c.function is CellFunction.INPUT}
    output_idx = {c.label: i for i, c in enumerate(layout.cells)
                  if c.function is CellFunction.OUTPUT}
    # The side-by-side standard pair sets the energy scale.  It must not
    # depend on layout contents: rotated chains couple 1.47x stronger and
    # would otherwise push the knight-offset interfaces (0.018 relative)
    # under the drive threshold.
    kink_ref = abs(reference_kink(layout, params))
    gh = config.gamma_high if config.gamma_high is not None \
        else config.gamma_high_rel * kink_ref
    gl = config.gamma_low if config.gamma_low is not None \
        else config.gamma_low_rel * gh
    return _Model(layout, config, params, K, zones, fixed_mask, fixed_vals,
                  input_idx, output_idx, gh, gl, kink_ref)


def _pin_entries(model: _Model, waveform: InputWaveform, p: int,
                 hold_only: bool = False) -> List[Tuple[int, float]]:
    """(cell index, +-1) for inputs pinned at phase counter p."""
    out = []
    for label, i in sorted(model.input_idx.items()):
        z = int(model.zones[i])
        ph = phase_of(z, p)
        if ph not in (0, 1):
            continue
        if hold_only and ph != 1:
            continue
        cyc = (p - z - ph) // 4
        if cyc < 0:
            continue
        seq = waveform.values[label]
        bit = seq[min(cyc, len(seq) - 1)]
        out.append((i, 1.0 if bit else -1.0))
    return out


# A Switch ramp coarser than this latches on Jacobi transients instead of
# the relaxed state, so phases are always resolved into at least 4 stages
# even when steps_per_phase is 1; outcomes then match finer settings.
_MIN_RAMP_STAGES = 4


def _stage_gamma(model: _Model, p: int, tau: float) -> np.ndarray:
    """Per-cell gamma at fractional phase time tau in (0, 1]."""
    gh, gl = model.gamma_high, model.gamma_low
    ramp_down = gh ** (1.0 - tau) * gl ** tau
    rfrac = min(1.0, tau / model.config.release_fraction)
    ramp_up = gl ** (1.0 - rfrac) * gh ** rfrac
    table = np.array([ramp_down, gl, ramp_up, gh])
    ph = (p - model.zones) % 4
    return table[ph]


def run_bistable(layout: Layout, waveform: InputWaveform,
                 config: SimConfig = SimConfig(),
                 params: PhysicalParams = DEFAULT_PARAMS,
                 cycles: Optional[int] = None) -> SimTrace:
    model = _build_model(layout, config, params)
    waveform.validate_against(layout)
    n_cycles = cycles if cycles is not None else waveform.cycles
    S = config.steps_per_phase
    n = len(layout.cells)
    trace = SimTrace("bistable", tuple(c.id for c in layout.cells), S, 4 * n_cycles)

    P = np.zeros(n)
    P[model.fixed_mask] = model.fixed_vals[model.fixed_mask]
    half = 1.0 / 2.0

    stages = max(1, -(-_MIN_RAMP_STAGES // S))
    for p in range(4 * n_cycles):
        pins = _pin_entries(model, waveform, p)
        # Hold means held: the raised barrier blocks retunneling, so a cell
        # keeps whatever it latched even when its drivers release underneath
        # it (a biased device would otherwise flip to its bias here).
        hold_mask = ((p - model.zones) % 4 == 1) & ~model.fixed_mask
        P_held = P.copy()
        for u in range(S):
            for k in range(stages):
                tau = (u * stages + k + 1) / (S * stages)
                gamma = _stage_gamma(model, p, tau)
                converged = False
                for _ in range(config.max_iterations_per_step):
                    x = (model.K @ P) * half / gamma
                    Pn = x / np.sqrt(1.0 + x * x)
                    Pn = P + config.damping * (Pn - P)
                    Pn[hold_mask] = P_held[hold_mask]
                    Pn[model.fixed_mask] = model.fixed_vals[model.fixed_mask]
                    for i, v in pins:
                        Pn[i] = v
                    delta = float(np.max(np.abs(Pn - P)))
                    P = Pn
                    if delta < config.convergence_tol:
                        converged = True
                        break
                if not converged:
                    trace.warnings.append(
                        "non-convergence at phase %d substep %d (dP=%.2e)" % (p, u, delta))
            trace.step_index.append((p, u))
            trace.values.append(P.copy())
        # Sample outputs whose zone sits in Hold at this counter.
        for label, i in sorted(model.output_idx.items()):
            z = int(model.zones[i])
            if phase_of(z, p) != 1:
                continue
            cyc = (p - z - 1) // 4
            if cyc < 0:
                continue
            bit = 1 if P[i] > 0 else 0
            trace.samples.setdefault(label, {})[cyc] = bit
            trace.sample_strength.setdefault(label, {})[cyc] = float(abs(P[i]))
            if abs(P[i]) <= 0.5:
                trace.warnings.append(
                    "weak polarization %.3f at output %s cycle %d" % (P[i], label, cyc))
    return trace


def weak_hold_cells(layout: Layout, trace: SimTrace, threshold: float = 0.5) -> List[str]:
    """Ids of clocked non-input cells whose |P| never exceeds threshold at the
    end of any Hold phase after the first full cycle (undriven or marginal)."""
    if trace.engine != "bistable":
        raise SimulationError("hold-saturation check needs a bistable trace")
    S = trace.steps_per_phase
    good = set()
    seen = set()
    for (p, u), vec in zip(trace.step_index, trace.values):
        if u != S - 1 or p < 4:
            continue
        for i, c in enumerate(layout.cells):
            if c.function is CellFunction.FIXED:
                continue
            if phase_of(c.clock, p) != 1:
                continue
            seen.add(c.id)
            if abs(vec[i]) > threshold:
                good.add(c.id)
    return sorted(seen - good)


def run_logic(layout: Layout, waveform: InputWaveform,
              config: SimConfig = SimConfig(engine="logic"),
              params: PhysicalParams = DEFAULT_PARAMS,
              cycles: Optional[int] = None) -> SimTrace:
    model = _build_model(layout, config, params)
    waveform.validate_against(layout)
    n_cycles = cycles if cycles is not None else waveform.cycles
    n = len(layout.cells)
    trace = SimTrace("logic", tuple(c.id for c in layout.cells), 1, 4 * n_cycles)

    theta = config.drive_threshold_rel * model.kink_ref
    nbrs: List[List[Tuple[int, float]]] = []
    for i in range(n):
        row = [(j, model.K[i, j]) for j in range(n)
               if j != i and abs(model.K[i, j]) >= theta]
        nbrs.append(row)

    zones = model.zones
    v = np.zeros(n, dtype=np.int8)
    settled = np.zeros(n, dtype=bool)
    for i in range(n):
        if model.fixed_mask[i]:
            v[i] = 1 if model.fixed_vals[i] > 0 else -1
            settled[i] = True

    # Cells with no in-threshold driver in their own zone, the zone before,
    # or among fixed cells can never be driven: flag them when they switch.
    undriveable = []
    for i, c in enumerate(layout.cells):
        if model.fixed_mask[i] or c.function is CellFunction.INPUT:
            undriveable.append(False)
            continue
        ok = any(model.fixed_mask[j]
                 or zones[j] == zones[i]
                 or zones[j] == (zones[i] - 1) % 4
                 for j, _ in nbrs[i])
        undriveable.append(not ok)

    order = list(range(n))  # layout.cells is already (col,row)-sorted

    for p in range(4 * n_cycles):
        z_now = p % 4
        switching = [i for i in order
                     if zones[i] == z_now and not model.fixed_mask[i]]
        for i in switching:
            v[i] = 0
            settled[i] = False
        for i, val in _pin_entries(model, waveform, p):
            if zones[i] == z_now:
                v[i] = 1 if val > 0 else -1
                settled[i] = True
        driving = (zones == (p - 1) % 4) & settled

        def is_driver(j: int) -> bool:
            return bool(model.fixed_mask[j] or driving[j]
                        or (zones[j] == z_now and settled[j]))

        for i in switching:
            if undriveable[i] and not settled[i]:
                raise UndrivenCell(layout.cells[i].id, p)

        # Wave passes.  A cell holds its vote while an unsettled same-zone
        # neighbor outweighs every settled driver it has (the inside-corner
        # diagonal from the previous run would otherwise win the race).
        # When a pass makes no progress the deferral is dropped in two
        # steps: first only for cells seeded from outside the zone (fixed,
        # pinned, or holding neighbors), then, if the stall persists, for
        # cells riding a weak same-zone link (crossing hops).  Forcing
        # everyone at once would let a cell latch foreign same-phase noise
        # while its real driver votes in the same pass.
        force = 0
        while True:
            newly: List[Tuple[int, int]] = []
            deferred = False
            for i in switching:
                if settled[i]:
                    continue
                tot = 0.0
                wmax = 0.0
                m_settled = 0.0
                m_pending = 0.0
                found = False
                seeded = False
                incomplete = False
                for j, w in nbrs[i]:
                    if is_driver(j):
                        tot += w * v[j]
                        wmax = max(wmax, abs(w))
                        m_settled = max(m_settled, abs(w))
                        found = True
                        if model.fixed_mask[j] or driving[j] or zones[j] != z_now:
                            seeded = True
                    elif zones[j] == z_now and not settled[j] \
                            and not model.fixed_mask[j]:
                        m_pending = max(m_pending, abs(w))
                    elif zones[j] == (z_now - 1) % 4 and not settled[j]:
                        # A neighbor that should be holding right now never
                        # got its wave (pipeline still filling).
                        incomplete = True
                if not found:
                    continue
                # Strength ties (equal-pitch links whose energies differ
                # only in rounding) must not defer, or a straight chain
                # stalls halfway.
                if m_pending > m_settled * (1.0 + 1e-9):
                    if force == 0 or (force == 1 and not seeded):
                        deferred = True
                        continue
                if abs(tot) < 1e-9 * wmax:
                    # A forced vote sees weak evidence only (bias residue
                    # of some distant zone, typically), and a tie with an
                    # absent driver is just a pipeline that has not filled
                    # yet; either way no signal has arrived.  A tie with
                    # every driver present is a real defect.
                    if force or incomplete:
                        continue
                    raise AmbiguousCell(layout.cells[i].id, p)
                newly.append((i, 1 if tot > 0 else -1))
                if force:
                    # One forced vote at a time; its value may be exactly
                    # what the next deferred cell is waiting for.
                    break
            if newly:
                for i, val in newly:
                    v[i] = val
                    settled[i] = True
                force = 0
            elif deferred and force < 2:
                force += 1
            else:
                break

        trace.step_index.append((p, 0))
        trace.values.append(v.astype(float))
        for label, i in sorted(model.output_idx.items()):
            z = int(zones[i])
            if phase_of(z, p) != 1:
                continue
            cyc = (p - z - 1) // 4
            if cyc < 0 or not settled[i]:
                continue
            bit = 1 if v[i] > 0 else 0
            trace.samples.setdefault(label, {})[cyc] = bit
            trace.sample_strength.setdefault(label, {})[cyc] = 1.0
    return trace


def run_engine(layout: Layout, waveform: InputWaveform, config: SimConfig,
               params: PhysicalParams = DEFAULT_PARAMS,
               cycles: Optional[int] = None) -> SimTrace:
    fn = run_bistable if config.engine == "bistable" else run_logic
    return fn(layout, waveform, config, params, cycles)


def settle_cycles(layout: Layout) -> int:
    """Cycles guaranteed to flush a combinational pipeline of this size."""
    return (len(layout.cells) + 1 + 3) // 4 + 2


def run_truth_table(layout: Layout, inputs: Sequence[str], outputs: Sequence[str],
                    config: SimConfig = SimConfig(),
                    params: PhysicalParams = DEFAULT_PARAMS,
                    cycles: Optional[int] = None) -> List[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    """Exhaustive combinational sweep: one steady-state simulation per row.

    Returns [(input bits, output bits)] with inputs counting up in binary,
    first label most significant.
    """
    if len(inputs) > 16:
        raise SimulationError("refusing exhaustive sweep over >16 inputs")
    have_in = {c.label for c in layout.inputs()}
    have_out = {c.label for c in layout.outputs()}
    for x in inputs:
        if x not in have_in:
            raise SimulationError("unknown input label %r" % x)
    for x in outputs:
        if x not in have_out:
            raise SimulationError("unknown output label %r" % x)
    n_cycles = cycles if cycles is not None else settle_cycles(layout)
    rows = []
    for m in range(2 ** len(inputs)):
        bits = {lab: (m >> (len(inputs) - 1 - k)) & 1 for k, lab in enumerate(inputs)}
        wf = InputWaveform.constant(bits, n_cycles)
        trace = run_engine(layout, wf, config, params)
        row_out = []
        for lab in outputs:
            val = trace.last_sample(lab)
            if val is None:
                raise UndrivenCell("output %s never sampled" % lab, -1)
            row_out.append(val)
        rows.append((tuple(bits[lab] for lab in inputs), tuple(row_out)))
    return rows
