"""Measurement-based Hamiltonian-cycle search on a prepared state."""

from __future__ import annotations

from dataclasses import dataclass

from ..graph_core import Graph, is_hamiltonian_cycle_config
from .full import sample_basis_states


@dataclass(frozen=True)
class HCSearchResult:
    found: bool
    witness: int | None
    hc_hit_count: int
    shots: int


def hc_search(state, graph: Graph, shots: int, seed) -> HCSearchResult:
    """Measure ``shots`` times and keep the outcomes that are Hamiltonian cycles."""
    samples = sample_basis_states(state, shots, seed)
    hits = [m for m in samples if is_hamiltonian_cycle_config(graph, m)]
    return HCSearchResult(found=bool(hits), witness=hits[0] if hits else None, hc_hit_count=len(hits), shots=shots)
