"""Statevector engines: the dense ``2**N_e`` state, the gauge-invariant sector, and exact oracles."""

from .full import (
    QUBIT_CAP,
    Observables,
    StateVector,
    apply_diag_z,
    apply_x_field,
    basis_state,
    closed_string_condensate,
    dump_state,
    load_state,
    measure_observables,
    sample_basis_states,
    symmetric_trotter_step,
    uniform_plus_state,
    z_energies,
)
from .oracle import (
    dense_hamiltonian,
    exact_evolution,
    exact_propagator,
    ground_state_exact,
    trotter_defect,
    trotter_propagator,
)
from .sector import GaugeSector, SectorState
from .search import HCSearchResult, hc_search

__all__ = [
    "QUBIT_CAP",
    "GaugeSector",
    "HCSearchResult",
    "Observables",
    "SectorState",
    "StateVector",
    "apply_diag_z",
    "apply_x_field",
    "basis_state",
    "closed_string_condensate",
    "dense_hamiltonian",
    "dump_state",
    "exact_evolution",
    "exact_propagator",
    "ground_state_exact",
    "hc_search",
    "load_state",
    "measure_observables",
    "sample_basis_states",
    "symmetric_trotter_step",
    "trotter_defect",
    "trotter_propagator",
    "uniform_plus_state",
    "z_energies",
]
