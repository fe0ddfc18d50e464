"""Exact evolution inside the gauge-invariant sector.

For every cycle-space element ``c`` the string operator ``prod_{l in c} sigma^x_l``
commutes with each plaquette term and with ``X``. The closed-string condensate
and the uniform ``|+>`` state are both ``+1`` eigenstates of all of them, as is
every state reached from those by the Trotter factors. Such a state is constant
on cosets of the cycle space, so it is fully described by a function ``phi(b)``
of the boundary ``b = d(m)`` (the odd-degree vertex set of mask ``m``):

    psi(m) = phi(d(m)) / sqrt(S_0)

``phi`` lives on the even-weight vertex subsets, ``2**(N_v - 1)`` amplitudes
instead of ``2**N_e``. ``Z`` acts diagonally as ``2|b| - N_v``; ``sigma^x_l``
flips both endpoint bits of edge ``l``.
"""

from __future__ import annotations

from collections import deque

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from ..errors import NumericError, PreconditionError, ResourceLimitError
from ..gauge_model import build_model
from ..graph_core import Graph, cycle_space_basis
from . import kernels
from .full import QUBIT_CAP, Observables, StateVector, sample_from_probabilities

SECTOR_VERTEX_CAP = 22
DENSE_SECTOR_MAX = 2048  # even-sector dimension up to which the ground state uses dense eigh


class SectorState:
    __slots__ = ("sector", "phi")

    def __init__(self, sector: "GaugeSector", phi: np.ndarray):
        self.sector = sector
        self.phi = np.ascontiguousarray(phi, dtype=np.complex128)

    @property
    def n_qubits(self) -> int:
        return self.sector.n_qubits

    def copy(self) -> "SectorState":
        return SectorState(self.sector, self.phi.copy())

    def norm_squared(self) -> float:
        return float(np.vdot(self.phi, self.phi).real)

    def overlap(self, other: "SectorState") -> complex:
        return complex(np.vdot(self.phi, other.phi))

    def to_statevector(self, cap: int = QUBIT_CAP) -> StateVector:
        return self.sector.lift(self, cap)

    def sample_masks(self, shots: int, rng: np.random.Generator) -> list[int]:
        return self.sector.sample_masks(self, shots, rng)


class GaugeSector:
    """Sector engine for one connected graph."""

    def __init__(self, graph: Graph, cap: int = SECTOR_VERTEX_CAP):
        if graph.n_vertices > cap:
            raise ResourceLimitError(f"N_v={graph.n_vertices} exceeds the sector cap of {cap}")
        self.graph = graph
        self.model = build_model(graph)
        self.basis = cycle_space_basis(graph)
        self.n_vertices = graph.n_vertices
        self.n_qubits = graph.n_edges
        self.pairs = np.array(self.model.edge_pairs, dtype=np.int64)
        self.lows = self.pairs & -self.pairs
        size = 1 << self.n_vertices
        self.weights = np.bitwise_count(np.arange(size, dtype=np.int64)).astype(np.int64)
        self.even = np.flatnonzero(self.weights % 2 == 0)
        self._bfs_order, self._parent, self._parent_edge = self._spanning_tree()

    def _spanning_tree(self):
        g = self.graph
        parent = [-1] * g.n_vertices
        parent_edge = [-1] * g.n_vertices
        seen = [False] * g.n_vertices
        order = [0]
        seen[0] = True
        queue = deque([0])
        while queue:
            u = queue.popleft()
            for e in g.incident_edges[u]:
                a, b = g.edges[e]
                w = b if a == u else a
                if not seen[w]:
                    seen[w] = True
                    parent[w], parent_edge[w] = u, e
                    order.append(w)
                    queue.append(w)
        return order, parent, parent_edge

    # --- states ---------------------------------------------------------------

    def condensate(self) -> SectorState:
        phi = np.zeros(1 << self.n_vertices, dtype=np.complex128)
        phi[0] = 1.0
        return SectorState(self, phi)

    def uniform_plus(self) -> SectorState:
        phi = np.zeros(1 << self.n_vertices, dtype=np.complex128)
        phi[self.even] = 2.0 ** (-(self.n_vertices - 1) / 2)
        return SectorState(self, phi)

    def from_amplitudes(self, state: StateVector, atol: float = 1e-10) -> SectorState:
        """Project a full state known to be gauge-invariant; raises if it is not."""
        bnd = self.boundaries()
        s0 = self.basis.size
        phi = np.zeros(1 << self.n_vertices, dtype=np.complex128)
        phi[bnd] = state.amplitudes  # any representative of each coset
        lifted = phi[bnd]
        if np.max(np.abs(lifted - state.amplitudes), initial=0.0) > atol:
            raise PreconditionError("state is not constant on cycle-space cosets")
        return SectorState(self, phi * np.sqrt(s0))

    def boundaries(self) -> np.ndarray:
        if self.n_qubits > QUBIT_CAP:
            raise ResourceLimitError(f"{self.n_qubits} qubits exceed the statevector cap of {QUBIT_CAP}")
        bnd = np.zeros(1 << self.n_qubits, dtype=np.int64)
        for l in range(self.n_qubits):
            bnd.reshape(-1, 2, 1 << l)[:, 1, :] ^= self.pairs[l]
        return bnd

    def lift(self, state: SectorState, cap: int = QUBIT_CAP) -> StateVector:
        if self.n_qubits > cap:
            raise ResourceLimitError(f"{self.n_qubits} qubits exceed the statevector cap of {cap}")
        amps = state.phi[self.boundaries()] / np.sqrt(self.basis.size)
        return StateVector(self.n_qubits, amps)

    # --- evolution ------------------------------------------------------------

    def _phases(self, angle: float) -> np.ndarray:
        k = np.arange(self.n_vertices + 1)
        return np.exp(-1j * angle * (2.0 * k - self.n_vertices))

    def trotter_step(self, state: SectorState, g: float, t: float, n: int, z_coeff: float = 1.0) -> SectorState:
        """Same operator string as ``symmetric_trotter_step`` on the full state."""
        if t <= 0 or n < 1:
            raise PreconditionError("need t > 0 and n >= 1")
        dt = t / n
        theta = g * dt
        kernels.sector_trotter_step(
            state.phi,
            self.weights,
            self.pairs,
            self.lows,
            self._phases(z_coeff * dt / 2),
            self._phases(z_coeff * dt),
            np.cos(theta),
            np.sin(theta),
            n,
        )
        return state

    def observables(self, state: SectorState, g: float) -> Observables:
        probs = state.phi.real**2 + state.phi.imag**2
        hist = np.bincount(self.weights, weights=probs, minlength=self.n_vertices + 1)
        z_total = float(np.dot(hist, 2.0 * np.arange(hist.size) - self.n_vertices))
        x_total = -float(kernels.sector_tau_sum(state.phi, self.pairs, self.lows))
        return Observables(g=g, energy=z_total + g * x_total, z_total=z_total, x_total=x_total)

    # --- sampling -------------------------------------------------------------

    def tree_representative(self, b: int) -> int:
        """The unique spanning-tree edge set with boundary ``b``."""
        mask = 0
        for v in reversed(self._bfs_order[1:]):
            if b >> v & 1:
                mask |= 1 << self._parent_edge[v]
                b ^= (1 << v) | (1 << self._parent[v])
        if b:
            raise PreconditionError("odd boundary has no edge-set representative")
        return mask

    def sample_masks(self, state: SectorState, shots: int, rng: np.random.Generator) -> list[int]:
        probs = state.phi.real**2 + state.phi.imag**2
        bs = sample_from_probabilities(probs, shots, rng)
        dim = self.basis.dimension
        cycles = self.basis.fundamental_cycles
        coset = rng.integers(0, 2, size=(shots, dim), dtype=np.int8) if dim else None
        out = []
        reps: dict[int, int] = {}
        for i, b in enumerate(bs.tolist()):
            if b not in reps:
                reps[b] = self.tree_representative(b)
            m = reps[b]
            if dim:
                for j in np.flatnonzero(coset[i]):
                    m ^= cycles[j]
            out.append(m)
        return out

    # --- exact eigenproblem -----------------------------------------------------

    def hamiltonian(self, g: float) -> scipy.sparse.csr_matrix:
        """``H = Z + g X`` restricted to the even-weight vertex subsets."""
        even = self.even
        pos = np.full(1 << self.n_vertices, -1, dtype=np.int64)
        pos[even] = np.arange(even.size)
        rows, cols, vals = [np.arange(even.size)], [np.arange(even.size)], [2.0 * self.weights[even] - self.n_vertices]
        for pm in self.pairs:
            rows.append(np.arange(even.size))
            cols.append(pos[even ^ pm])
            vals.append(np.full(even.size, -g))
        dim = even.size
        return scipy.sparse.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
        )

    def ground_state(self, g: float, tol: float = 1e-8) -> tuple[float, SectorState]:
        h = self.hamiltonian(g)
        dim = h.shape[0]
        if dim <= DENSE_SECTOR_MAX:
            w, v = scipy.linalg.eigh(h.toarray(), subset_by_index=[0, 0])
            energy, vec = float(w[0]), v[:, 0]
        else:
            v0 = np.full(dim, 1.0 / np.sqrt(dim))
            w, v = scipy.sparse.linalg.eigsh(h, k=1, which="SA", v0=v0, tol=1e-12, maxiter=20 * dim)
            energy, vec = float(w[0]), v[:, 0]
        resid = float(np.linalg.norm(h @ vec - energy * vec))
        if resid > tol:
            raise NumericError(f"sector ground state residual {resid:.3e} exceeds {tol:.1e}")
        # fix the sign so the (Perron) amplitudes are non-negative
        vec = vec * np.sign(vec[np.argmax(np.abs(vec))])
        phi = np.zeros(1 << self.n_vertices, dtype=np.complex128)
        phi[self.even] = vec
        return energy, SectorState(self, phi)
