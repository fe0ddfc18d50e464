"""Z2 gauge Hamiltonian data ``H = Z + g X`` on the dual of a graph.

Each graph vertex is a plaquette, each edge a link/qubit. ``Z_v = -prod
sigma^z`` over the edges incident to ``v`` and ``X = -sum_l sigma^x_l``.
Basis bit 1 means ``sigma^z = -1`` (an occupied string segment).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidArgumentError, PreconditionError
from .graph_core import Graph

N_P = 2  # plaquettes sharing each link


@dataclass(frozen=True)
class GaugeModel:
    n_qubits: int
    plaquette_masks: tuple[int, ...]
    edge_pairs: tuple[int, ...]  # per edge: vertex bitset of its two endpoints

    @property
    def n_plaquettes(self) -> int:
        return len(self.plaquette_masks)

    @property
    def n_l_per_plaquette(self) -> tuple[int, ...]:
        return tuple(m.bit_count() for m in self.plaquette_masks)

    @property
    def n_p(self) -> int:
        return N_P


@dataclass(frozen=True)
class CouplingPoint:
    g: float

    def __post_init__(self):
        if self.g < 0:
            raise InvalidArgumentError("coupling g must be non-negative")

    @property
    def lam(self) -> float | None:
        return 1.0 / self.g if self.g > 0 else None


def build_model(graph: Graph) -> GaugeModel:
    if not graph.is_connected():
        raise PreconditionError("gauge model requires a connected graph")
    return GaugeModel(
        n_qubits=graph.n_edges,
        plaquette_masks=graph.incidence_masks,
        edge_pairs=tuple((1 << u) | (1 << v) for u, v in graph.edges),
    )


def diag_z_energy(model: GaugeModel, basis_state: int) -> float:
    """Eigenvalue of ``Z`` on a computational basis state."""
    return float(sum(1 if (basis_state & m).bit_count() & 1 else -1 for m in model.plaquette_masks))


def trotter_step_error_bound(model: GaugeModel, g: float, t: float, n: int, mode: str = "sum") -> float:
    """Symmetric-Trotter defect bound for one step of duration ``t`` in ``n`` substeps.

    The formula is ``(g^2 N_v n_l^2 / 12 + g N_e n_p^2 / 24) t^3 / n^2``.

    ``mode="sum"`` uses ``sum_v deg(v)**2`` in place of ``N_v * n_l**2`` (equal on
    regular graphs); ``mode="max_degree"`` uses ``N_v * max_deg**2``.
    ``mode="commutator"`` is the ``sum`` form times 4: with Pauli operators each
    nested commutator ``[sigma, [sigma, P]]`` has norm up to 4, and only this
    version bounds the operator-norm defect rigorously.
    """
    if g < 0 or t <= 0 or n < 1:
        raise InvalidArgumentError("need g >= 0, t > 0, n >= 1")
    degs = model.n_l_per_plaquette
    scale = 1.0
    if mode in ("sum", "commutator"):
        plaq = sum(d * d for d in degs)
        scale = 4.0 if mode == "commutator" else 1.0
    elif mode == "max_degree":
        plaq = len(degs) * max(degs) ** 2
    else:
        raise InvalidArgumentError(f"unknown bound mode {mode!r}")
    return scale * (g * g * plaq / 12.0 + g * model.n_qubits * N_P**2 / 24.0) * t**3 / n**2


def reverse_step_error_bound(model: GaugeModel, lam: float, t: float, n: int, mode: str = "sum") -> float:
    """Bound for one step of ``H_lambda = lambda Z + X``.

    The splitting keeps ``lambda Z`` outermost, so the step is the forward step at
    ``g = 1/lambda`` run for time ``lambda t``.
    """
    if lam < 0 or t <= 0 or n < 1:
        raise InvalidArgumentError("need lambda >= 0, t > 0, n >= 1")
    if lam == 0:
        return 0.0
    return trotter_step_error_bound(model, 1.0 / lam, lam * t, n, mode)


def cumulative_error_bound(model: GaugeModel, schedule, mode: str = "sum") -> float:
    """Sum of the per-step bounds over every step of ``schedule``."""
    total = 0.0
    for p in schedule.step_parameters():
        if schedule.direction == "forward_g":
            total += trotter_step_error_bound(model, p, schedule.t_step, schedule.substeps, mode)
        else:
            total += reverse_step_error_bound(model, p, schedule.t_step, schedule.substeps, mode)
    return total


def complexity_estimate(graph: Graph, g_c: float, epsilon: float) -> float:
    """Adiabatic cost figure ``(1/g_c^2) sqrt(N_e^1.5 (N_v^3 + N_e/g_c) / epsilon)``."""
    if g_c <= 0 or epsilon <= 0:
        raise InvalidArgumentError("g_c and epsilon must be positive")
    n_v, n_e = graph.n_vertices, graph.n_edges
    return math.sqrt(n_e**1.5 * (n_v**3 + n_e / g_c) / epsilon) / g_c**2
