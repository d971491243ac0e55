"""Zero-forcing digital precoding and the hybrid precoder pipelines.

Three pipelines are provided:

``conventional``
    Alternate between ZF digital precoding on the effective channels and
    manifold CG on the analog precoder maximizing the ICI-aware sum rate
    (finite-difference gradient).
``reduced``
    Two stages: CG on the analog precoder minimizing the total leakage
    power with the digital precoders of an initial ZF pass held fixed
    (analytic gradient), then one ZF pass on the optimized analog
    precoder.
``no-ici``
    The conventional pipeline run as if there were no ICI.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DegenerateChannelError
from .ici import IciProfile, none_profile
from .manifold import CgSettings, OptTrace, riemannian_cg, unvec, vec_precoder
from .mathcore import RngStream, right_pseudo_inverse
from .objectives import (
    DEFAULT_FD_STEP,
    ObjectiveKind,
    as_channel_tensor,
    grad_interference,
    grad_objective_fd,
    interference_power,
    sum_rate,
)

__all__ = [
    "Method",
    "PipelineSettings",
    "HybridPrecoder",
    "init_analog",
    "effective_channel",
    "zf_digital",
    "normalize_digital",
    "digital_stage",
    "run_conventional",
    "run_reduced",
    "run_no_ici_baseline",
    "run_pipeline",
]


class Method(enum.Enum):
    CONVENTIONAL = "conventional"
    REDUCED = "reduced"
    NO_ICI = "no-ici"


@dataclass(frozen=True)
class PipelineSettings:
    num_rf_chains: int = 4
    outer_tol: float = 1e-3  # relative improvement of the sum rate
    max_outer: int = 20
    cg: CgSettings = field(default_factory=CgSettings)
    fd_step: float = DEFAULT_FD_STEP
    reduced_alternating: bool = False

    def __post_init__(self):
        if self.num_rf_chains < 1:
            raise ConfigError("num_rf_chains must be >= 1")
        if self.outer_tol <= 0:
            raise ConfigError("outer_tol must be positive")
        if self.max_outer < 1:
            raise ConfigError("max_outer must be >= 1")
        if self.fd_step <= 0:
            raise ConfigError("fd_step must be positive")


@dataclass
class HybridPrecoder:
    W: np.ndarray  # (N_t, N_RF)
    F: np.ndarray  # (K, N_RF, U)

    def check(self, modulus_tol: float = 1e-12, power_tol: float = 1e-10) -> None:
        """Raise ``AssertionError`` if the hardware or power constraints are violated."""
        n_t = self.W.shape[0]
        dev = np.max(np.abs(np.abs(self.W) - 1.0 / math.sqrt(n_t)))
        assert dev < modulus_tol, f"analog modulus deviation {dev:.3e}"
        norms = np.linalg.norm(np.einsum("nm,kmu->knu", self.W, self.F), axis=1)
        err = np.max(np.abs(norms - 1.0))
        assert err < power_tol, f"per-user power deviation {err:.3e}"


def _generator(rng) -> np.random.Generator:
    return rng.generator() if isinstance(rng, RngStream) else rng


def init_analog(n_t: int, n_rf: int, rng) -> np.ndarray:
    """Analog precoder with i.i.d. uniform phases and modulus ``1/sqrt(n_t)``."""
    theta = _generator(rng).uniform(0.0, 2.0 * np.pi, (n_t, n_rf))
    return np.exp(1j * theta) / math.sqrt(n_t)


def effective_channel(Hk, W) -> np.ndarray:
    """``He[k] = H[k] W`` (users along rows)."""
    Hk = np.asarray(Hk, dtype=np.complex128)
    W = np.asarray(W, dtype=np.complex128)
    if Hk.ndim != 2 or W.ndim != 2 or Hk.shape[1] != W.shape[0]:
        raise ValueError(f"cannot multiply H[k] {Hk.shape} by W {W.shape}")
    return Hk @ W


def zf_digital(He) -> np.ndarray:
    """Zero-forcing precoder ``He^H (He He^H)^{-1}`` so that ``He F = I``."""
    return right_pseudo_inverse(He)


def normalize_digital(W, Fk) -> np.ndarray:
    """Scale each column so that ``||W f_u|| = 1``."""
    Fk = np.asarray(Fk, dtype=np.complex128)
    norms = np.linalg.norm(np.asarray(W) @ Fk, axis=0)
    if np.any(norms <= np.finfo(float).tiny):
        raise DegenerateChannelError("digital precoder has a zero-power column")
    return Fk / norms


def digital_stage(H, W) -> np.ndarray:
    """ZF plus power normalization on every subcarrier; returns ``(K, N_RF, U)``."""
    H = as_channel_tensor(H)
    K = H.shape[2]
    F = np.empty((K, W.shape[1], H.shape[0]), dtype=np.complex128)
    for k in range(K):
        F[k] = normalize_digital(W, zf_digital(effective_channel(H[:, :, k], W)))
    return F


def _check_dims(H: np.ndarray, settings: PipelineSettings):
    U, n_t, _ = H.shape
    n_rf = settings.num_rf_chains
    if not U <= n_rf <= n_t:
        raise ConfigError(f"need U <= N_RF <= N_t, got U={U}, N_RF={n_rf}, N_t={n_t}")
    return U, n_t, n_rf


def _optimize_rate(H, W, F, ici, psi, settings) -> tuple[np.ndarray, OptTrace]:
    n_t, n_rf = W.shape
    kind = ObjectiveKind.SUM_RATE_WITH_ICI

    def value(x):
        return sum_rate(H, unvec(x, n_t, n_rf), F, ici, psi)

    def egrad(x):
        G = grad_objective_fd(kind, H, unvec(x, n_t, n_rf), F, ici, psi, settings.fd_step)
        return G.reshape(-1, order="F")

    x, trace = riemannian_cg(value, egrad, vec_precoder(W), n_t, settings.cg)
    return unvec(x, n_t, n_rf), trace


def _optimize_leakage(H, W, F, ici, settings) -> tuple[np.ndarray, OptTrace]:
    n_t, n_rf = W.shape

    def value(x):
        return -interference_power(H, unvec(x, n_t, n_rf), F, ici)

    def egrad(x):
        return -grad_interference(H, unvec(x, n_t, n_rf), F, ici).reshape(-1, order="F")

    x, trace = riemannian_cg(value, egrad, vec_precoder(W), n_t, settings.cg)
    return unvec(x, n_t, n_rf), trace


def _improved(new: float, old: float, tol: float) -> bool:
    return new - old > tol * max(abs(new), abs(old))


def run_conventional(H, ici: IciProfile, psi: float, settings: PipelineSettings, rng):
    """Alternating ZF / manifold-CG hybrid design maximizing the sum rate.

    Returns the best ``(HybridPrecoder, OptTrace)`` seen across outer
    iterations, so the result never falls below the initial ZF design.
    """
    H = as_channel_tensor(H)
    _, n_t, n_rf = _check_dims(H, settings)
    W = init_analog(n_t, n_rf, rng)
    F = digital_stage(H, W)
    rate = sum_rate(H, W, F, ici, psi)
    best = (rate, W, F)
    trace = OptTrace()
    for _ in range(settings.max_outer):
        W, inner = _optimize_rate(H, W, F, ici, psi, settings)
        trace.extend(inner)
        F = digital_stage(H, W)
        new_rate = sum_rate(H, W, F, ici, psi)
        if new_rate > best[0]:
            best = (new_rate, W, F)
        if not _improved(new_rate, rate, settings.outer_tol):
            trace.termination = "outer_converged"
            break
        rate = new_rate
    else:
        trace.termination = "outer_max_iter"
    return HybridPrecoder(best[1], best[2]), trace


def run_reduced(H, ici: IciProfile, psi: float, settings: PipelineSettings, rng):
    """Two-stage design: leakage-minimizing analog precoder, then ZF.

    ``psi`` is accepted for interface symmetry; the leakage objective does
    not depend on it.
    """
    H = as_channel_tensor(H)
    _, n_t, n_rf = _check_dims(H, settings)
    W = init_analog(n_t, n_rf, rng)
    F = digital_stage(H, W)
    W, trace = _optimize_leakage(H, W, F, ici, settings)
    F = digital_stage(H, W)
    if settings.reduced_alternating:
        leak = interference_power(H, W, F, ici)
        for _ in range(settings.max_outer - 1):
            W_next, inner = _optimize_leakage(H, W, F, ici, settings)
            trace.extend(inner)
            F_next = digital_stage(H, W_next)
            new_leak = interference_power(H, W_next, F_next, ici)
            W, F = W_next, F_next
            if not _improved(-new_leak, -leak, settings.outer_tol):
                break
            leak = new_leak
    return HybridPrecoder(W, F), trace


def run_no_ici_baseline(H, psi: float, settings: PipelineSettings, rng):
    """Conventional design that ignores ICI while optimizing."""
    H = as_channel_tensor(H)
    return run_conventional(H, none_profile(H.shape[2]), psi, settings, rng)


def run_pipeline(method: Method, H, ici: IciProfile, psi: float, settings: PipelineSettings, rng):
    method = Method(method)
    if method is Method.CONVENTIONAL:
        return run_conventional(H, ici, psi, settings, rng)
    if method is Method.REDUCED:
        return run_reduced(H, ici, psi, settings, rng)
    return run_no_ici_baseline(H, psi, settings, rng)
