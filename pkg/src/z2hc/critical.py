"""Critical couplings from sweep traces.

``g_c^H`` is where ``|d^2<H>/dg^2|`` peaks and ``g_c^Z`` where ``|d<Z>/dg|``
peaks, both after a centered moving average.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError

DEFAULT_WINDOW = 11
DEFAULT_RANGE = (0.05, 1.0)
EDGE_EXCLUSION = 5


def _check_grid(x: np.ndarray, rtol: float = 1e-6) -> float:
    if x.size < 5:
        raise InvalidArgumentError(f"need at least 5 grid points, got {x.size}")
    steps = np.diff(x)
    h = float(steps.mean())
    if h <= 0 or np.max(np.abs(steps - h)) > rtol * abs(h) + 1e-12:
        raise InvalidArgumentError("grid must be uniform and increasing")
    return h


def finite_difference(x, y, order: int) -> np.ndarray:
    """Second-order accurate first or second derivative on a uniform grid."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise InvalidArgumentError("x and y lengths differ")
    h = _check_grid(x)
    out = np.empty_like(y)
    if order == 1:
        out[1:-1] = (y[2:] - y[:-2]) / (2 * h)
        out[0] = (-3 * y[0] + 4 * y[1] - y[2]) / (2 * h)
        out[-1] = (3 * y[-1] - 4 * y[-2] + y[-3]) / (2 * h)
    elif order == 2:
        out[1:-1] = (y[2:] - 2 * y[1:-1] + y[:-2]) / h**2
        out[0] = (2 * y[0] - 5 * y[1] + 4 * y[2] - y[3]) / h**2
        out[-1] = (2 * y[-1] - 5 * y[-2] + 4 * y[-3] - y[-4]) / h**2
    else:
        raise InvalidArgumentError("order must be 1 or 2")
    return out


def smooth(y, window: int) -> np.ndarray:
    """Centered moving average; windows shrink symmetrically near the ends."""
    y = np.asarray(y, dtype=float)
    if window < 1 or window % 2 == 0 or window > y.size:
        raise InvalidArgumentError(f"window must be odd and in 1..{y.size}, got {window}")
    if window == 1:
        return y.copy()
    half = window // 2
    csum = np.concatenate([[0.0], np.cumsum(y)])
    idx = np.arange(y.size)
    reach = np.minimum(np.minimum(idx, y.size - 1 - idx), half)
    return (csum[idx + reach + 1] - csum[idx - reach]) / (2 * reach + 1)


@dataclass
class CriticalPoints:
    g_c_H: float
    g_c_Z: float
    window: int
    g_range: tuple[float, float]
    flags: list[str] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict, repr=False)

    @property
    def lambda_c_H(self) -> float:
        return 1.0 / self.g_c_H

    @property
    def lambda_c_Z(self) -> float:
        return 1.0 / self.g_c_Z

    @property
    def suspect(self) -> bool:
        return bool(self.flags)

    def report(self) -> dict:
        return {
            "g_c_H": self.g_c_H,
            "g_c_Z": self.g_c_Z,
            "lambda_c_H": self.lambda_c_H,
            "lambda_c_Z": self.lambda_c_Z,
            "window": self.window,
            "range": list(self.g_range),
            "flags": list(self.flags),
        }

    def to_json(self) -> str:
        return json.dumps(self.report(), indent=2)


def _peak(g: np.ndarray, curve: np.ndarray, allowed: np.ndarray, name: str, flags: list[str]) -> float:
    idx = np.flatnonzero(allowed)
    mag = np.abs(curve[idx])
    k = idx[int(np.argmax(mag))]  # argmax keeps the first maximum, i.e. the smaller g
    if k == idx[0] or k == idx[-1]:
        flags.append("boundary")
        flags.append(f"boundary:{name}")
    return float(g[k])


def detect_critical_arrays(
    g, energy, z, window: int = DEFAULT_WINDOW, g_range: tuple[float, float] = DEFAULT_RANGE, exclude: int = EDGE_EXCLUSION
) -> CriticalPoints:
    g = np.asarray(g, dtype=float)
    d2h = smooth(finite_difference(g, energy, 2), window)
    d1z = smooth(finite_difference(g, z, 1), window)
    allowed = (g >= g_range[0] - 1e-12) & (g <= g_range[1] + 1e-12)
    allowed[:exclude] = False
    if exclude:
        allowed[-exclude:] = False
    if not allowed.any():
        raise InvalidArgumentError(f"trace does not cover the search range {g_range}")
    flags: list[str] = []
    g_c_H = _peak(g, d2h, allowed, "H", flags)
    g_c_Z = _peak(g, d1z, allowed, "Z", flags)
    flags = list(dict.fromkeys(flags))
    if g_c_H <= 0 or g_c_Z <= 0:
        flags.append("nonpositive")
    kH = int(np.flatnonzero(g == g_c_H)[0])
    kZ = int(np.flatnonzero(g == g_c_Z)[0])
    diag = {"g": g, "d2H": d2h, "dZ": d1z, "sign_d2H": float(np.sign(d2h[kH])), "sign_dZ": float(np.sign(d1z[kZ]))}
    return CriticalPoints(g_c_H, g_c_Z, window, tuple(g_range), flags, diag)


def detect_critical(trace, window: int = DEFAULT_WINDOW, g_range: tuple[float, float] = DEFAULT_RANGE) -> CriticalPoints:
    """Critical points of a forward sweep trace."""
    g = trace.column("g")
    if not all(np.isfinite(g)):
        raise InvalidArgumentError("critical-point detection needs a forward (finite g) trace")
    return detect_critical_arrays(g, trace.column("energy"), trace.column("z"), window, g_range)
