"""Dense ``2**N_e`` statevector: preparation, symmetric Trotter evolution, observables."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import PreconditionError, ResourceLimitError
from ..gauge_model import GaugeModel
from ..graph_core import CycleSpaceBasis, cycle_space_elements
from . import kernels

QUBIT_CAP = 26
TABLE_MODE_MAX = 20  # below this many qubits the odd-plaquette count per basis state is tabulated
DUMP_MAGIC = "Z2SV1"


class StateVector:
    """Amplitudes indexed by basis mask, bit ``i`` = edge ``i``.

    Evolution functions mutate ``amplitudes`` in place and return the same object.
    """

    __slots__ = ("n_qubits", "amplitudes")

    def __init__(self, n_qubits: int, amplitudes: np.ndarray):
        if amplitudes.shape != (1 << n_qubits,):
            raise PreconditionError(f"expected {1 << n_qubits} amplitudes, got shape {amplitudes.shape}")
        self.n_qubits = n_qubits
        self.amplitudes = np.ascontiguousarray(amplitudes, dtype=np.complex128)

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())

    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def probabilities(self) -> np.ndarray:
        return self.amplitudes.real**2 + self.amplitudes.imag**2

    def overlap(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def to_statevector(self) -> "StateVector":
        return self


@dataclass(frozen=True)
class Observables:
    g: float
    energy: float
    z_total: float
    x_total: float
    per_plaquette: tuple[float, ...] | None = None


def _check_cap(n_qubits: int, cap: int) -> None:
    if n_qubits > cap:
        raise ResourceLimitError(f"{n_qubits} qubits exceed the statevector cap of {cap}")


@lru_cache(maxsize=16)
def _model_arrays(model: GaugeModel) -> tuple[np.ndarray, np.ndarray | None]:
    masks = np.array(model.plaquette_masks, dtype=np.int64)
    table = kernels.odd_plaquette_table(model.n_qubits, masks) if model.n_qubits <= TABLE_MODE_MAX else None
    return masks, table


def odd_plaquette_counts(model: GaugeModel) -> np.ndarray:
    """Number of plaquettes with ``Z_v = +1`` per basis state (so ``E_Z = 2k - N_v``)."""
    masks, table = _model_arrays(model)
    if table is not None:
        return table
    return kernels.odd_plaquette_table(model.n_qubits, masks)


def z_energies(model: GaugeModel) -> np.ndarray:
    return 2.0 * odd_plaquette_counts(model).astype(np.float64) - model.n_plaquettes


def uniform_plus_state(n_qubits: int, cap: int = QUBIT_CAP) -> StateVector:
    _check_cap(n_qubits, cap)
    return StateVector(n_qubits, np.full(1 << n_qubits, 2.0 ** (-n_qubits / 2), dtype=np.complex128))


def closed_string_condensate(model: GaugeModel, basis: CycleSpaceBasis, cap: int = QUBIT_CAP) -> StateVector:
    """Equal-amplitude superposition of every closed-string configuration."""
    _check_cap(model.n_qubits, cap)
    members = cycle_space_elements(basis)
    if members.size and int(members.max()) >> model.n_qubits:
        raise PreconditionError("cycle basis does not belong to this model")
    amps = np.zeros(1 << model.n_qubits, dtype=np.complex128)
    amps[members] = 1.0 / np.sqrt(members.size)
    return StateVector(model.n_qubits, amps)


def basis_state(n_qubits: int, mask: int, cap: int = QUBIT_CAP) -> StateVector:
    _check_cap(n_qubits, cap)
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[mask] = 1.0
    return StateVector(n_qubits, amps)


def _z_phases(model: GaugeModel, angle: float) -> np.ndarray:
    k = np.arange(model.n_plaquettes + 1)
    return np.exp(-1j * angle * (2.0 * k - model.n_plaquettes))


def apply_diag_z(state: StateVector, model: GaugeModel, angle: float) -> StateVector:
    """Multiply each amplitude by ``exp(-i angle E_Z(m))``."""
    if model.n_qubits != state.n_qubits:
        raise PreconditionError(f"model has {model.n_qubits} qubits, state has {state.n_qubits}")
    masks, table = _model_arrays(model)
    phases = _z_phases(model, angle)
    if table is not None:
        kernels.phase_from_table(state.amplitudes, table, phases)
    else:
        kernels.phase_on_the_fly(state.amplitudes, masks, phases)
    return state


def apply_x_field(state: StateVector, g: float, angle_t: float) -> StateVector:
    """Apply ``exp(-i g X angle_t) = prod_l exp(+i g angle_t sigma^x_l)``."""
    theta = g * angle_t
    kernels.rotate_all_qubits(state.amplitudes, state.n_qubits, np.cos(theta), np.sin(theta))
    return state


def symmetric_trotter_step(
    state: StateVector, model: GaugeModel, g: float, t: float, n: int, z_coeff: float = 1.0
) -> StateVector:
    """Evolve by ``e^{-iA t/2n} (e^{-iB t/n} e^{-iA t/n})^{n-1} e^{-iB t/n} e^{-iA t/2n}``.

    ``A = z_coeff * Z`` and ``B = g * X``; ``z_coeff != 1`` serves ``H = lambda Z + X``.
    """
    if t <= 0 or n < 1:
        raise PreconditionError("need t > 0 and n >= 1")
    if model.n_qubits != state.n_qubits:
        raise PreconditionError(f"model has {model.n_qubits} qubits, state has {state.n_qubits}")
    dt = t / n
    apply_diag_z(state, model, z_coeff * dt / 2)
    for k in range(n):
        apply_x_field(state, g, dt)
        apply_diag_z(state, model, z_coeff * (dt if k < n - 1 else dt / 2))
    return state


def measure_observables(state: StateVector, model: GaugeModel, g: float, per_plaquette: bool = False) -> Observables:
    if model.n_qubits != state.n_qubits:
        raise PreconditionError(f"model has {model.n_qubits} qubits, state has {state.n_qubits}")
    counts = odd_plaquette_counts(model)
    probs = state.probabilities()
    # sum_m p_m (2k_m - N_v) via a histogram keeps the reduction order fixed
    hist = np.bincount(counts, weights=probs, minlength=model.n_plaquettes + 1)
    z_total = float(np.dot(hist, 2.0 * np.arange(hist.size) - model.n_plaquettes))
    x_total = -float(kernels.sigma_x_sum(state.amplitudes, state.n_qubits))
    plaq = None
    if per_plaquette:
        masks, _ = _model_arrays(model)
        plaq = tuple(float(x) for x in kernels.plaquette_expectations(state.amplitudes, masks))
    return Observables(g=g, energy=z_total + g * x_total, z_total=z_total, x_total=x_total, per_plaquette=plaq)


def sample_from_probabilities(probs: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    if shots < 1:
        raise PreconditionError("shots must be >= 1")
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    idx = np.searchsorted(cdf, rng.random(shots), side="right")
    return np.minimum(idx, probs.size - 1)


def sample_basis_states(state, shots: int, seed) -> list[int]:
    """I.i.d. measurement outcomes as edge masks; accepts full or sector states."""
    rng = np.random.default_rng(seed)
    if isinstance(state, StateVector):
        return [int(x) for x in sample_from_probabilities(state.probabilities(), shots, rng)]
    return state.sample_masks(shots, rng)


def dump_state(state: StateVector, path) -> None:
    with open(path, "wb") as fh:
        fh.write(f"{DUMP_MAGIC} {state.n_qubits}\n".encode())
        fh.write(state.amplitudes.astype("<c16").tobytes())


def load_state(path) -> StateVector:
    with open(path, "rb") as fh:
        header = fh.readline().decode().split()
        if len(header) != 2 or header[0] != DUMP_MAGIC:
            raise PreconditionError("not a Z2SV1 state dump")
        n = int(header[1])
        data = np.frombuffer(fh.read(), dtype="<c16")
    return StateVector(n, data.astype(np.complex128))

