"""Constant-modulus manifold and Riemannian conjugate gradient.

The analog precoder ``W`` (``N_t x N_RF``) is handled as the column-major
vector ``x = vec(W)``; each entry lives on a circle of radius
``1/sqrt(N_t)``. Tangent directions at ``x`` satisfy ``Re(z_i conj(x_i)) = 0``.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import DegenerateStepError

__all__ = [
    "MODULUS_TOL",
    "CgSettings",
    "TraceRecord",
    "OptTrace",
    "vec_precoder",
    "unvec",
    "project_tangent",
    "retract",
    "riemannian_cg",
]

MODULUS_TOL = 1e-12
_ZERO_ENTRY = 1e-300
_BETA_GUARD = 1e-14
_MAX_RETRACT_HALVINGS = 20
_MAX_ARMIJO_HALVINGS = 30
_ARMIJO_FACTOR = 0.5
_ARMIJO_C = 1e-4


@dataclass(frozen=True)
class CgSettings:
    """Knobs of the conjugate-gradient loop.

    ``tol`` applies to the objective normalized by its starting magnitude:
    the loop stops once ``|f(x_t) - f(x_{t-1})| <= tol * |f(x_0)|``.
    Objective magnitudes vary over many decades with path loss, so a raw
    absolute threshold would stop after one step or never trigger.
    """

    step_scale: float = 0.1
    tol: float = 1e-4
    max_iter: int = 200
    backtracking: bool = True

    def __post_init__(self):
        if self.step_scale <= 0:
            raise ValueError("step_scale must be positive")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    objective: float
    step: float
    grad_norm: float
    millis: float


@dataclass
class OptTrace:
    records: list[TraceRecord] = field(default_factory=list)
    termination: str = ""

    def __len__(self):
        return len(self.records)

    @property
    def objectives(self) -> np.ndarray:
        return np.array([r.objective for r in self.records])

    def extend(self, other: "OptTrace") -> None:
        """Append another trace, renumbering iterations to keep them increasing."""
        offset = self.records[-1].iteration + 1 if self.records else 0
        for r in other.records:
            self.records.append(
                TraceRecord(r.iteration + offset, r.objective, r.step, r.grad_norm, r.millis)
            )
        self.termination = other.termination

    def write_csv(self, path) -> None:
        path = Path(path)
        try:
            with path.open("w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["iter", "objective", "step", "grad_norm", "millis"])
                for r in self.records:
                    w.writerow(
                        [r.iteration, f"{r.objective:.12g}", f"{r.step:.12g}",
                         f"{r.grad_norm:.12g}", f"{r.millis:.6g}"]
                    )
        except OSError as exc:
            raise OSError(f"cannot write trace {path}: {exc}") from exc


def _check_modulus(x: np.ndarray, n_t: int, tol: float = MODULUS_TOL) -> None:
    dev = np.max(np.abs(np.abs(x) - 1.0 / math.sqrt(n_t))) if x.size else 0.0
    if dev >= tol:
        raise ValueError(f"entries violate the 1/sqrt({n_t}) modulus (max deviation {dev:.3e})")


def vec_precoder(W) -> np.ndarray:
    """Column-major vectorization of a constant-modulus analog precoder."""
    W = np.asarray(W, dtype=np.complex128)
    if W.ndim != 2:
        raise ValueError("W must be 2-D")
    _check_modulus(W, W.shape[0])
    return W.reshape(-1, order="F").copy()


def unvec(x, n_t: int, n_rf: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    if x.size != n_t * n_rf:
        raise ValueError(f"vector of length {x.size} cannot form a {n_t}x{n_rf} matrix")
    return x.reshape((n_t, n_rf), order="F").copy()


def project_tangent(x, d, n_t: int) -> np.ndarray:
    """Orthogonal projection of ``d`` onto the tangent space at ``x``.

    ``z = d - n_t * Re(d * conj(x)) * x``. The factor ``n_t = 1/|x_i|^2``
    removes the radial component exactly on the ``1/sqrt(n_t)`` circles.
    """
    x = np.asarray(x)
    d = np.asarray(d)
    if x.shape != d.shape:
        raise ValueError("x and d must have the same shape")
    return d - n_t * np.real(d * np.conj(x)) * x


def retract(x_raw, n_t: int) -> np.ndarray:
    """Map each entry back onto its circle: ``x_i / |x_i| / sqrt(n_t)``."""
    x_raw = np.asarray(x_raw, dtype=np.complex128)
    mag = np.abs(x_raw)
    if np.any(mag <= _ZERO_ENTRY):
        raise DegenerateStepError("retraction of a vector with a zero entry")
    return x_raw / mag / math.sqrt(n_t)


def _inner(a, b) -> float:
    """Real inner product ``Re(a^H b)``."""
    return float(np.real(np.vdot(a, b)))


def riemannian_cg(
    value: Callable[[np.ndarray], float],
    egrad: Callable[[np.ndarray], np.ndarray],
    x0,
    n_t: int,
    settings: CgSettings = CgSettings(),
    callback: Callable[[int, np.ndarray, np.ndarray], None] | None = None,
) -> tuple[np.ndarray, OptTrace]:
    """Maximize ``value`` over the constant-modulus manifold.

    Parameters
    ----------
    value : callable
        Objective ``f(x)`` of the vectorized precoder.
    egrad : callable
        Euclidean Wirtinger gradient ``df/dx*`` (same shape as ``x``).
    x0 : ndarray
        Starting point; must satisfy the modulus constraint.
    n_t : int
        Number of transmit antennas (sets the modulus ``1/sqrt(n_t)``).
    settings : CgSettings
    callback : callable, optional
        Called as ``callback(t, x_t, d_t)`` after every iterate, ``t = 0``
        included.

    Returns
    -------
    x : ndarray
        Final iterate.
    trace : OptTrace
        One record for the start point plus one per accepted iteration.

    Notes
    -----
    Search directions use the Polak-Ribiere update with the previous
    gradient and direction carried over by tangent projection. Only the
    real part of the Polak-Ribiere ratio is used so that directions stay
    tangent. When the new direction is not an ascent direction the method
    restarts from the gradient.
    """
    x = np.array(x0, dtype=np.complex128)
    _check_modulus(x, n_t)
    start = time.perf_counter()
    trace = OptTrace()

    def ms():
        return 1e3 * (time.perf_counter() - start)

    f = float(value(x))
    scale = abs(f)
    g = project_tangent(x, egrad(x), n_t)
    d = g.copy()
    trace.records.append(TraceRecord(0, f, 0.0, float(np.linalg.norm(g)), ms()))
    if callback is not None:
        callback(0, x, d)
    if np.linalg.norm(d) <= np.finfo(float).tiny:
        trace.termination = "zero_gradient"
        return x, trace

    trace.termination = "max_iter"
    for t in range(1, settings.max_iter + 1):
        # Wirtinger convention: directional derivative along d is 2 Re<g, d>
        slope = 2.0 * _inner(g, d)
        alpha = settings.step_scale / np.linalg.norm(d)
        retract_failures = 0
        accepted = False
        for _ in range(_MAX_ARMIJO_HALVINGS + _MAX_RETRACT_HALVINGS):
            try:
                x_new = retract(x + alpha * d, n_t)
            except DegenerateStepError:
                retract_failures += 1
                if retract_failures >= _MAX_RETRACT_HALVINGS:
                    raise DegenerateStepError(
                        f"retraction failed after {retract_failures} step halvings"
                    ) from None
                alpha *= 0.5
                continue
            f_new = float(value(x_new))
            if not settings.backtracking or f_new >= f + _ARMIJO_C * alpha * slope:
                accepted = True
                break
            alpha *= _ARMIJO_FACTOR
        if not accepted:
            trace.termination = "line_search_failed"
            break

        g_new = project_tangent(x_new, egrad(x_new), n_t)
        g_moved = project_tangent(x_new, g, n_t)
        denom = _inner(g_moved, g_moved)
        beta = _inner(g_new, g_new - g_moved) / denom if math.sqrt(denom) >= _BETA_GUARD else 0.0
        d_new = g_new + beta * project_tangent(x_new, d, n_t)
        if _inner(g_new, d_new) <= 0.0:
            d_new = g_new

        improvement = f_new - f
        x, f, g, d = x_new, f_new, g_new, d_new
        trace.records.append(TraceRecord(t, f, float(alpha), float(np.linalg.norm(g)), ms()))
        if callback is not None:
            callback(t, x, d)
        if abs(improvement) <= settings.tol * scale:
            trace.termination = "converged"
            break
        if np.linalg.norm(d) <= np.finfo(float).tiny:
            trace.termination = "zero_gradient"
            break
    return x, trace
