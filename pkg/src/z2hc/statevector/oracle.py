"""Independent exact references: dense matrices and an iterative eigensolver."""

from __future__ import annotations

from functools import lru_cache, reduce

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from ..errors import NumericError, PreconditionError, ResourceLimitError
from ..gauge_model import GaugeModel, diag_z_energy
from . import kernels
from .full import StateVector, odd_plaquette_counts, uniform_plus_state

DENSE_ORACLE_CAP = 12
EIGEN_CAP = 22


def _check_dense(n_qubits: int) -> None:
    if n_qubits > DENSE_ORACLE_CAP:
        raise ResourceLimitError(f"dense oracle limited to {DENSE_ORACLE_CAP} qubits, got {n_qubits}")


@lru_cache(maxsize=32)
def _dense_z(model: GaugeModel) -> np.ndarray:
    _check_dense(model.n_qubits)
    out = np.array([diag_z_energy(model, m) for m in range(1 << model.n_qubits)])
    out.flags.writeable = False
    return out


def dense_z(model: GaugeModel) -> np.ndarray:
    """Diagonal of ``Z`` built by the direct per-plaquette formula."""
    return _dense_z(model)


def dense_x(n_qubits: int) -> np.ndarray:
    """``X = -sum_l sigma^x_l`` as a dense Kronecker sum."""
    _check_dense(n_qubits)
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    out = np.zeros((1 << n_qubits, 1 << n_qubits))
    for l in range(n_qubits):
        # qubit l is bit l of the index, i.e. the l-th factor from the right
        out -= np.kron(np.kron(np.eye(1 << (n_qubits - l - 1)), sx), np.eye(1 << l))
    return out


def dense_hamiltonian(model: GaugeModel, g: float, z_coeff: float = 1.0) -> np.ndarray:
    return np.diag(z_coeff * dense_z(model)) + g * dense_x(model.n_qubits)


@lru_cache(maxsize=32)
def _eigh_hamiltonian(model: GaugeModel, g: float, z_coeff: float):
    return scipy.linalg.eigh(dense_hamiltonian(model, g, z_coeff))


def exact_propagator(model: GaugeModel, g: float, t: float, z_coeff: float = 1.0) -> np.ndarray:
    w, v = _eigh_hamiltonian(model, float(g), float(z_coeff))
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def trotter_propagator(model: GaugeModel, g: float, t: float, n: int, z_coeff: float = 1.0) -> np.ndarray:
    """Dense ``D_half E (D_full E)^(n-1) D_half`` from exact factor exponentials.

    ``E = exp(-i g X t/n)`` is the Kronecker product of single-qubit rotations.
    """
    dz = z_coeff * dense_z(model)
    theta = g * t / n
    rot = np.array([[np.cos(theta), 1j * np.sin(theta)], [1j * np.sin(theta), np.cos(theta)]])
    ex = reduce(np.kron, [rot] * model.n_qubits, np.eye(1, dtype=complex))
    half = np.exp(-1j * dz * t / (2 * n))
    full = np.exp(-1j * dz * t / n)
    body = np.linalg.matrix_power(full[:, None] * ex, n - 1)
    return half[:, None] * (ex @ body) * half[None, :]


def trotter_defect(model: GaugeModel, g: float, t: float, n: int) -> float:
    """Operator 2-norm of ``exp(-iHt) - S_n(t)``."""
    diff = exact_propagator(model, g, t) - trotter_propagator(model, g, t, n)
    return float(np.linalg.norm(diff, 2))


def exact_evolution(state: StateVector, model: GaugeModel, g: float, t: float) -> StateVector:
    """Apply ``exp(-iHt)`` via dense eigendecomposition (in place)."""
    if model.n_qubits != state.n_qubits:
        raise PreconditionError("state and model sizes differ")
    if t == 0:
        return state
    state.amplitudes[:] = exact_propagator(model, g, t) @ state.amplitudes
    return state


def ground_state_exact(model: GaugeModel, g: float, cap: int = EIGEN_CAP, tol: float = 1e-8) -> tuple[float, StateVector]:
    """Lowest eigenpair of ``H = Z + gX`` on the full space via Lanczos.

    The start vector is the uniform ``|+>`` state, which keeps the Krylov space in
    the gauge-invariant sector; at ``g = 0`` this selects the equal-amplitude
    closed-string condensate out of the degenerate ground space.
    """
    n = model.n_qubits
    if n > cap:
        raise ResourceLimitError(f"{n} qubits exceed the eigensolver cap of {cap}")
    table = odd_plaquette_counts(model)
    z_values = 2.0 * np.arange(model.n_plaquettes + 1) - model.n_plaquettes
    size = 1 << n

    def matvec(v):
        v = np.ascontiguousarray(v, dtype=np.float64).reshape(-1)
        out = np.empty_like(v)
        kernels.hamiltonian_matvec(v, out, table, z_values, n, float(g))
        return out

    if g == 0:
        # diagonal H: the Lanczos limit from |+> is its projection onto the lowest level
        vec = np.where(table == table.min(), 1.0, 0.0)
        vec /= np.linalg.norm(vec)
        return float(z_values[table.min()]), StateVector(n, vec.astype(np.complex128))
    op = scipy.sparse.linalg.LinearOperator((size, size), matvec=matvec, dtype=np.float64)
    v0 = uniform_plus_state(n, cap).amplitudes.real.copy()
    try:
        w, v = scipy.sparse.linalg.eigsh(op, k=1, which="SA", v0=v0, tol=1e-12, ncv=min(size, 40), maxiter=5000)
    except scipy.sparse.linalg.ArpackNoConvergence as exc:
        raise NumericError(f"Lanczos did not converge: {exc}") from exc
    energy, vec = float(w[0]), v[:, 0]
    resid = float(np.linalg.norm(matvec(vec) - energy * vec))
    if resid > tol:
        raise NumericError(f"ground state residual {resid:.3e} exceeds {tol:.1e}")
    vec = vec * np.sign(vec[np.argmax(np.abs(vec))])
    vec /= np.linalg.norm(vec)
    return energy, StateVector(n, vec.astype(np.complex128))
