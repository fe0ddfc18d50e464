"""Numba kernels over dense amplitude arrays.

Elementwise kernels run with ``prange``; reductions stay serial so observables
do not depend on the thread count.
"""

import os

import numba
import numpy as np
from numba import prange

if "NUMBA_THREADING_LAYER" not in os.environ:
    numba.config.THREADING_LAYER = "workqueue"


@numba.njit(cache=True, inline="always")
def popcount(x):
    k = 0
    while x:
        x &= x - 1
        k += 1
    return k


@numba.njit(cache=True, inline="always")
def odd_plaquettes(m, masks):
    k = 0
    for v in range(masks.shape[0]):
        k += popcount(m & masks[v]) & 1
    return k


@numba.njit(cache=True, parallel=True)
def odd_plaquette_table(n_qubits, masks):
    out = np.empty(1 << n_qubits, dtype=np.uint8)
    for m in prange(1 << n_qubits):
        out[m] = odd_plaquettes(np.int64(m), masks)
    return out


@numba.njit(cache=True, parallel=True)
def phase_from_table(amps, table, phases):
    for m in prange(amps.shape[0]):
        amps[m] *= phases[table[m]]


@numba.njit(cache=True, parallel=True)
def phase_on_the_fly(amps, masks, phases):
    for m in prange(amps.shape[0]):
        amps[m] *= phases[odd_plaquettes(np.int64(m), masks)]


@numba.njit(cache=True, parallel=True)
def rotate_all_qubits(amps, n_qubits, c, s):
    """Apply ``cos(theta) + i sin(theta) sigma^x`` to every qubit (``c, s`` = cos, sin)."""
    half = amps.shape[0] >> 1
    for l in range(n_qubits):
        st = np.int64(1) << l
        low = st - 1
        for p in prange(half):
            i0 = ((p >> l) << (l + 1)) | (p & low)
            i1 = i0 | st
            a = amps[i0]
            b = amps[i1]
            amps[i0] = c * a + 1j * s * b
            amps[i1] = 1j * s * a + c * b


@numba.njit(cache=True)
def sigma_x_sum(amps, n_qubits):
    """``sum_l <sigma^x_l>`` for a normalized state."""
    total = 0.0
    half = amps.shape[0] >> 1
    for l in range(n_qubits):
        st = np.int64(1) << l
        low = st - 1
        for p in range(half):
            i0 = ((p >> l) << (l + 1)) | (p & low)
            a = amps[i0]
            b = amps[i0 | st]
            total += 2.0 * (a.real * b.real + a.imag * b.imag)
    return total


@numba.njit(cache=True)
def plaquette_expectations(amps, masks):
    out = np.zeros(masks.shape[0])
    for m in range(amps.shape[0]):
        p = amps[m].real ** 2 + amps[m].imag ** 2
        if p == 0.0:
            continue
        for v in range(masks.shape[0]):
            if popcount(np.int64(m) & masks[v]) & 1:
                out[v] += p
            else:
                out[v] -= p
    return out


@numba.njit(cache=True, parallel=True)
def hamiltonian_matvec(vec, out, table, z_values, n_qubits, g):
    """``out = (Z + g X) vec`` with ``X = -sum sigma^x``."""
    n = vec.shape[0]
    for m in prange(n):
        acc = z_values[table[m]] * vec[m]
        for l in range(n_qubits):
            acc -= g * vec[m ^ (np.int64(1) << l)]
        out[m] = acc


# --- gauge-invariant sector (vector over vertex-parity configurations) ---------


@numba.njit(cache=True)
def sector_x_field(phi, pairs, lows, c, s):
    """Apply ``exp(i theta sum_l tau_l)``; ``tau_l`` flips both endpoints of edge ``l``."""
    n = phi.shape[0]
    for l in range(pairs.shape[0]):
        pm = pairs[l]
        lo = lows[l]
        for b in range(n):
            if b & lo:
                continue
            b2 = b ^ pm
            a = phi[b]
            d = phi[b2]
            phi[b] = c * a + 1j * s * d
            phi[b2] = 1j * s * a + c * d


@numba.njit(cache=True)
def sector_trotter_step(phi, weights, pairs, lows, half_phase, full_phase, c, s, n):
    """One symmetric step ``D_half (X D_full)^(n-1) X D_half`` in the sector."""
    for b in range(phi.shape[0]):
        phi[b] *= half_phase[weights[b]]
    for k in range(n):
        sector_x_field(phi, pairs, lows, c, s)
        ph = full_phase if k < n - 1 else half_phase
        for b in range(phi.shape[0]):
            phi[b] *= ph[weights[b]]


@numba.njit(cache=True)
def sector_tau_sum(phi, pairs, lows):
    total = 0.0
    for l in range(pairs.shape[0]):
        pm = pairs[l]
        lo = lows[l]
        for b in range(phi.shape[0]):
            if b & lo:
                continue
            a = phi[b]
            d = phi[b ^ pm]
            total += 2.0 * (a.real * d.real + a.imag * d.imag)
    return total
