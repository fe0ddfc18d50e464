"""Adiabatic sweeps through the confinement transition.

A forward sweep starts from the closed-string condensate (the exact ``g = 0``
ground state) and raises ``g`` in steps of ``g_step``; each step evolves the
state by one symmetric Trotter step of duration ``t_step`` at the new coupling
and records the observables there. A reverse sweep starts from ``|+>`` and
raises ``lambda`` in ``H_lambda = lambda Z + X``.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import asdict, dataclass, field

from .errors import InvalidArgumentError
from .gauge_model import build_model, cumulative_error_bound, reverse_step_error_bound, trotter_step_error_bound
from .graph_core import Graph, cycle_space_basis
from .statevector import (
    GaugeSector,
    closed_string_condensate,
    ground_state_exact,
    measure_observables,
    symmetric_trotter_step,
    uniform_plus_state,
)
from .statevector.full import QUBIT_CAP

BACKENDS = ("sector", "statevector")
CSV_HEADER = ("g", "energy", "z", "x", "err_bound")


@dataclass(frozen=True)
class Schedule:
    direction: str = "forward_g"
    g_step: float = 0.001  # lambda step for reverse sweeps
    t_step: float = 0.1
    substeps: int = 100
    endpoint: float = 1.0  # g_max, or lambda_max for reverse sweeps

    def __post_init__(self):
        if self.direction not in ("forward_g", "reverse_lambda"):
            raise InvalidArgumentError(f"unknown sweep direction {self.direction!r}")
        if not (self.g_step > 0 and self.t_step > 0 and self.endpoint > 0):
            raise InvalidArgumentError("g_step, t_step and endpoint must be positive")
        if int(self.substeps) != self.substeps or self.substeps < 1:
            raise InvalidArgumentError("substeps must be an integer >= 1")
        k = round(self.endpoint / self.g_step)
        if k < 1 or abs(k * self.g_step - self.endpoint) > 1e-9 * self.endpoint:
            raise InvalidArgumentError(f"endpoint {self.endpoint} is not a multiple of step {self.g_step}")

    @property
    def n_steps(self) -> int:
        return round(self.endpoint / self.g_step)

    def grid(self) -> list[float]:
        """Parameter values of every trace row, ``k * step`` for ``k = 0..n_steps``."""
        return [k * self.g_step for k in range(self.n_steps + 1)]

    def step_parameters(self) -> list[float]:
        return self.grid()[1:]

    def descriptor(self) -> dict:
        return asdict(self)

    @property
    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.descriptor(), sort_keys=True).encode()).hexdigest()[:16]


FINE_SCHEDULE = Schedule("forward_g", 0.001, 0.1, 100, 1.0)
REDUCED_SCHEDULE = Schedule("forward_g", 0.01, 0.1, 10, 1.0)


@dataclass
class TraceRow:
    g: float
    energy: float
    z: float
    x: float
    err_bound: float
    lam: float | None = None


@dataclass
class SweepTrace:
    rows: list[TraceRow]
    schedule: Schedule
    graph_digest: str
    backend: str = "sector"
    norms: list[float] = field(default_factory=list, repr=False)

    def column(self, name: str) -> list[float]:
        return [getattr(r, name) for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        reverse = self.schedule.direction == "reverse_lambda"
        w.writerow(CSV_HEADER + (("lambda",) if reverse else ()))
        for r in self.rows:
            vals = [r.g, r.energy, r.z, r.x, r.err_bound] + ([r.lam] if reverse else [])
            w.writerow([_fmt(v) for v in vals])
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def read_trace_csv(path_or_text, schedule: Schedule | None = None, graph_digest: str = "") -> SweepTrace:
    """Load a trace CSV; the schedule is inferred from the g column when not given."""
    text = path_or_text
    if "\n" not in str(path_or_text):
        with open(path_or_text, encoding="utf-8") as fh:
            text = fh.read()
    reader = csv.reader(io.StringIO(text))
    header = tuple(next(reader))
    if header[:5] != CSV_HEADER:
        raise InvalidArgumentError(f"unexpected trace header {header}")
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        try:
            vals = [float(v) for v in rec]
        except ValueError:
            raise InvalidArgumentError(f"trace line {lineno}: non-numeric field in {rec}") from None
        rows.append(TraceRow(*vals[:5], lam=vals[5] if len(vals) > 5 else None))
    if schedule is None and len(rows) >= 2:
        step = rows[1].g - rows[0].g
        if step > 0 and math.isfinite(step):
            schedule = Schedule("forward_g", step, 1.0, 1, round((rows[-1].g - rows[0].g) / step) * step)
    return SweepTrace(rows, schedule, graph_digest)


# --- engines -------------------------------------------------------------------


class _SectorEngine:
    def __init__(self, graph: Graph):
        self.sector = GaugeSector(graph)

    def condensate(self):
        return self.sector.condensate()

    def plus(self):
        return self.sector.uniform_plus()

    def step(self, state, g, t, n, z_coeff=1.0):
        return self.sector.trotter_step(state, g, t, n, z_coeff)

    def observe(self, state, g):
        return self.sector.observables(state, g)

    def ground_state(self, g):
        return self.sector.ground_state(g)[1]


class _FullEngine:
    def __init__(self, graph: Graph, cap: int = QUBIT_CAP):
        self.graph = graph
        self.model = build_model(graph)
        self.cap = cap

    def condensate(self):
        return closed_string_condensate(self.model, cycle_space_basis(self.graph), self.cap)

    def plus(self):
        return uniform_plus_state(self.model.n_qubits, self.cap)

    def step(self, state, g, t, n, z_coeff=1.0):
        return symmetric_trotter_step(state, self.model, g, t, n, z_coeff)

    def observe(self, state, g):
        return measure_observables(state, self.model, g)

    def ground_state(self, g):
        return ground_state_exact(self.model, g)[1]


def make_engine(graph: Graph, backend: str = "sector", cap: int = QUBIT_CAP):
    if backend == "sector":
        return _SectorEngine(graph)
    if backend == "statevector":
        return _FullEngine(graph, cap)
    raise InvalidArgumentError(f"unknown backend {backend!r}; choose from {BACKENDS}")


# --- sweeps --------------------------------------------------------------------


def run_forward_sweep(graph: Graph, schedule: Schedule, backend: str = "sector", cap: int = QUBIT_CAP, on_step=None):
    """Sweep ``g`` upward from the condensate; ``on_step(k, g, state)`` sees every row's state."""
    if schedule.direction != "forward_g":
        raise InvalidArgumentError("run_forward_sweep needs a forward_g schedule")
    engine = make_engine(graph, backend, cap)
    model = build_model(graph)
    state = engine.condensate()
    grid = schedule.grid()
    obs = engine.observe(state, 0.0)
    rows = [TraceRow(0.0, obs.energy, obs.z_total, obs.x_total, 0.0)]
    norms = [state.norm_squared()]
    if on_step:
        on_step(0, 0.0, state)
    err = 0.0
    for k in range(1, len(grid)):
        g = grid[k]
        engine.step(state, g, schedule.t_step, schedule.substeps)
        err += trotter_step_error_bound(model, g, schedule.t_step, schedule.substeps)
        obs = engine.observe(state, g)
        rows.append(TraceRow(g, obs.energy, obs.z_total, obs.x_total, err))
        norms.append(state.norm_squared())
        if on_step:
            on_step(k, g, state)
    return SweepTrace(rows, schedule, graph.digest, backend, norms)


def run_reverse_sweep(graph: Graph, schedule: Schedule, backend: str = "sector", cap: int = QUBIT_CAP, on_step=None):
    """Sweep ``lambda`` upward from ``|+>``; rows carry ``g = 1/lambda`` (``inf`` at the start)."""
    if schedule.direction != "reverse_lambda":
        raise InvalidArgumentError("run_reverse_sweep needs a reverse_lambda schedule")
    engine = make_engine(graph, backend, cap)
    model = build_model(graph)
    state = engine.plus()
    grid = schedule.grid()
    rows, norms = [], []
    err = 0.0
    for k, lam in enumerate(grid):
        if k:
            engine.step(state, 1.0, schedule.t_step, schedule.substeps, z_coeff=lam)
            err += reverse_step_error_bound(model, lam, schedule.t_step, schedule.substeps)
        g = 1.0 / lam if lam > 0 else math.inf
        obs = engine.observe(state, 1.0)
        energy = obs.z_total + g * obs.x_total
        rows.append(TraceRow(g, energy, obs.z_total, obs.x_total, err, lam=lam))
        norms.append(state.norm_squared())
        if on_step:
            on_step(k, lam, state)
    return SweepTrace(rows, schedule, graph.digest, backend, norms)


def run_sweep(graph: Graph, schedule: Schedule, backend: str = "sector", cap: int = QUBIT_CAP) -> SweepTrace:
    if schedule.direction == "forward_g":
        return run_forward_sweep(graph, schedule, backend, cap)
    return run_reverse_sweep(graph, schedule, backend, cap)


def adiabatic_fidelity_probe(graph: Graph, schedule: Schedule, checkpoints, backend: str = "sector") -> list[tuple[float, float]]:
    """Squared overlap of the swept state with the exact ground state at each checkpoint.

    Checkpoints are snapped to the nearest schedule grid point. At ``g = 0`` the
    reference is the analytic condensate (the ground space is degenerate there).
    """
    if schedule.direction != "forward_g":
        raise InvalidArgumentError("fidelity probe needs a forward_g schedule")
    engine = make_engine(graph, backend)
    wanted: dict[int, list[float]] = {}
    for g in checkpoints:
        k = round(g / schedule.g_step)
        if not 0 <= k <= schedule.n_steps:
            raise InvalidArgumentError(f"checkpoint g={g} outside the schedule")
        wanted.setdefault(k, []).append(g)
    found: dict[int, float] = {}

    def probe(k, g, state):
        if k in wanted:
            ref = engine.condensate() if k == 0 else engine.ground_state(g)
            found[k] = abs(ref.overlap(state)) ** 2

    last = max(wanted)
    truncated = Schedule("forward_g", schedule.g_step, schedule.t_step, schedule.substeps, max(last, 1) * schedule.g_step)
    run_forward_sweep(graph, truncated, backend, on_step=probe)
    out = []
    for g in checkpoints:
        k = round(g / schedule.g_step)
        out.append((k * schedule.g_step, found[k]))
    return out


def sweep_error_bound(graph: Graph, schedule: Schedule) -> float:
    return cumulative_error_bound(build_model(graph), schedule)
