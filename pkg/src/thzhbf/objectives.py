"""Achievable-rate and interference objectives of an ICI-impaired hybrid
precoder, plus their gradients with respect to the analog matrix.

Shapes used throughout:

* ``H``: ``(U, N_t, K)`` channel tensor (or a :class:`ChannelRealization`)
* ``W``: ``(N_t, N_RF)`` analog precoder
* ``F``: ``(K, N_RF, U)`` stack of digital precoders; ``F[k][:, u]`` feeds user ``u``

Everything is expressed through the link-gain tensor
``G[q, u, i] = h_q[i] W f_u[i]``. For user ``q`` on subcarrier ``k`` the
useful term is ``|S_0|^2 |G[q, q, k]|^2``; the interference collects
``|S_{i-k}|^2 |G[q, u, i]|^2`` over all ``(u, i)`` except ``(q, k)``.

Gradients follow the Wirtinger convention: for a real function ``f`` of a
complex matrix ``W`` we return ``df/dW* = (df/dRe W + j df/dIm W) / 2``,
which points in the ascent direction.
"""

from __future__ import annotations

import enum

import numpy as np

from .channel import ChannelRealization
from .ici import IciProfile, none_profile

__all__ = [
    "NoiseModel",
    "ObjectiveKind",
    "link_gains",
    "sinr",
    "rate_matrix",
    "per_user_rate",
    "sum_rate",
    "interference_power",
    "objective_value",
    "grad_interference",
    "grad_objective_fd",
    "wirtinger_fd",
    "as_channel_tensor",
    "DEFAULT_FD_STEP",
]

DEFAULT_FD_STEP = 1e-5


class NoiseModel:
    """Noise-to-power ratio ``psi = sigma_n^2 / P``."""

    def __init__(self, psi: float):
        if not psi > 0:
            raise ValueError("psi must be positive")
        self.psi = float(psi)

    @classmethod
    def from_snr_db(cls, snr_db: float) -> "NoiseModel":
        return cls(10.0 ** (-snr_db / 10.0))

    @property
    def snr_db(self) -> float:
        return -10.0 * np.log10(self.psi)

    def __repr__(self):
        return f"NoiseModel(psi={self.psi!r})"


class ObjectiveKind(enum.Enum):
    SUM_RATE_WITH_ICI = "sum_rate_with_ici"
    SUM_RATE_NO_ICI = "sum_rate_no_ici"
    NEGATIVE_INTERFERENCE = "negative_interference"


def as_channel_tensor(H) -> np.ndarray:
    if isinstance(H, ChannelRealization):
        H = H.H
    H = np.asarray(H, dtype=np.complex128)
    if H.ndim != 3:
        raise ValueError(f"channel tensor must be (U, N_t, K), got shape {H.shape}")
    return H


def _check(H, W, F, ici: IciProfile | None = None):
    H = as_channel_tensor(H)
    W = np.asarray(W, dtype=np.complex128)
    F = np.asarray(F, dtype=np.complex128)
    U, n_t, K = H.shape
    if W.ndim != 2 or W.shape[0] != n_t:
        raise ValueError(f"W must be ({n_t}, N_RF), got {W.shape}")
    if F.shape != (K, W.shape[1], U):
        raise ValueError(f"F must be ({K}, {W.shape[1]}, {U}), got {F.shape}")
    if ici is not None and ici.K != K:
        raise ValueError(f"ICI profile has K={ici.K}, channel has K={K}")
    return H, W, F


def link_gains(H, W, F) -> np.ndarray:
    """``G[q, u, i] = h_q[i] W f_u[i]``."""
    H, W, F = _check(H, W, F)
    G = (H.transpose(2, 0, 1) @ W) @ F  # (K, U, U)
    return G.transpose(1, 2, 0)


def _split_power(G: np.ndarray, A: np.ndarray):
    """Useful and interference power per ``(q, k)`` from gains ``G[..., q, u, i]``."""
    U = G.shape[-3]
    P = G.real**2 + G.imag**2
    own = np.einsum("...qqi->...qi", P)
    others = 1.0 - np.eye(U)
    cross = np.einsum("...qui,qu->...qi", P, others)
    A_off = A - np.diag(np.diag(A))
    intf = np.einsum("...qi,ik->...qk", own, A_off) + np.einsum("...qi,ik->...qk", cross, A)
    useful = own * np.diag(A)
    return useful, intf


def _sum_rate_from_gains(G, A, psi):
    useful, intf = _split_power(G, A)
    U = G.shape[-3]
    return np.log2(1.0 + useful / (intf + psi)).sum(axis=(-2, -1)) / U


def _interference_from_gains(G, A):
    return _split_power(G, A)[1].sum(axis=(-2, -1))


def sinr(H, W, F, ici: IciProfile, psi: float) -> np.ndarray:
    """Signal-to-interference-plus-noise ratio per ``(q, k)``, shape ``(U, K)``."""
    H, W, F = _check(H, W, F, ici)
    useful, intf = _split_power(link_gains(H, W, F), ici.weights())
    return useful / (intf + psi)


def rate_matrix(H, W, F, ici: IciProfile, psi: float) -> np.ndarray:
    """Per-user per-subcarrier rate ``log2(1 + sinr)`` in bps/Hz, shape ``(U, K)``."""
    return np.log2(1.0 + sinr(H, W, F, ici, psi))


def per_user_rate(H, W, F, ici: IciProfile, psi: float, q: int, k: int) -> float:
    """Rate of user ``q`` on subcarrier ``k`` (0-based)."""
    H, W, F = _check(H, W, F, ici)
    U, _, K = H.shape
    if not (0 <= q < U and 0 <= k < K):
        raise IndexError(f"(q, k) = ({q}, {k}) outside {U} users x {K} subcarriers")
    return float(rate_matrix(H, W, F, ici, psi)[q, k])


def sum_rate(H, W, F, ici: IciProfile, psi: float) -> float:
    """System rate: per-user rates summed over subcarriers, averaged over users."""
    H, W, F = _check(H, W, F, ici)
    return float(_sum_rate_from_gains(link_gains(H, W, F), ici.weights(), psi))


def interference_power(H, W, F, ici: IciProfile) -> float:
    """Total leakage power summed over every ``(q, k)`` cell."""
    H, W, F = _check(H, W, F, ici)
    return float(_interference_from_gains(link_gains(H, W, F), ici.weights()))


def _profile_for(kind: ObjectiveKind, ici: IciProfile) -> IciProfile:
    return none_profile(ici.K) if kind is ObjectiveKind.SUM_RATE_NO_ICI else ici


def _value_from_gains(kind: ObjectiveKind, G, A, psi):
    if kind is ObjectiveKind.NEGATIVE_INTERFERENCE:
        return -_interference_from_gains(G, A)
    return _sum_rate_from_gains(G, A, psi)


def objective_value(kind: ObjectiveKind, H, W, F, ici: IciProfile, psi: float) -> float:
    H, W, F = _check(H, W, F, ici)
    A = _profile_for(kind, ici).weights()
    return float(_value_from_gains(kind, link_gains(H, W, F), A, psi))


def grad_interference(H, W, F, ici: IciProfile) -> np.ndarray:
    """Analytic ``d interference_power / dW*``, shape ``(N_t, N_RF)``.

    Each term ``c |h W f|^2`` contributes ``c (h W f) h^H f^H``.
    """
    H, W, F = _check(H, W, F, ici)
    U = H.shape[0]
    A = ici.weights()
    row = A.sum(axis=1)
    row_off = row - np.diag(A)
    # C[q, u, i]: total weight of |G[q, u, i]|^2 across all k
    C = np.broadcast_to(row, (U, U, row.size)).copy()
    C[np.arange(U), np.arange(U), :] = row_off
    T = (C * link_gains(H, W, F)).transpose(2, 0, 1)
    Hh = H.transpose(2, 1, 0).conj()  # (K, N_t, U)
    return np.sum(Hh @ T @ F.conj().transpose(0, 2, 1), axis=0)


def grad_objective_fd(
    kind: ObjectiveKind,
    H,
    W,
    F,
    ici: IciProfile,
    psi: float,
    h_step: float = DEFAULT_FD_STEP,
) -> np.ndarray:
    """Central-difference Wirtinger gradient of an objective w.r.t. ``W*``.

    Every entry ``W[n, m]`` is perturbed by ``+-delta`` and ``+-j delta``
    with ``delta = h_step * |W[n, m]|`` (``h_step`` for zero entries).
    The perturbed objective values are evaluated in batches: since the
    gains are linear in ``W``, ``G(W + t E_nm) = G(W) + t H[:, n, :] F[:, m, :]``
    exactly, so no product is recomputed from scratch.
    """
    if h_step <= 0:
        raise ValueError("h_step must be positive")
    H, W, F = _check(H, W, F, ici)
    U, n_t, K = H.shape
    n_rf = W.shape[1]
    A = _profile_for(kind, ici).weights()
    G0 = link_gains(H, W, F)

    mag = np.abs(W)
    delta = np.where(mag > 0, h_step * mag, h_step)
    grad = np.empty((n_t, n_rf), dtype=np.complex128)

    per_row = n_rf * U * U * K
    chunk = max(1, int(2_000_000 // max(per_row, 1)))
    for start in range(0, n_t, chunk):
        rows = slice(start, min(start + chunk, n_t))
        # dG[r, m, q, u, i] = H[q, n, i] F[i, m, u]
        dG = np.einsum("qri,imu->rmqui", H[:, rows, :], F)
        d = delta[rows][:, :, None, None, None]
        f_re_p = _value_from_gains(kind, G0 + d * dG, A, psi)
        f_re_m = _value_from_gains(kind, G0 - d * dG, A, psi)
        f_im_p = _value_from_gains(kind, G0 + 1j * d * dG, A, psi)
        f_im_m = _value_from_gains(kind, G0 - 1j * d * dG, A, psi)
        dre = (f_re_p - f_re_m) / (2.0 * delta[rows])
        dim = (f_im_p - f_im_m) / (2.0 * delta[rows])
        grad[rows] = 0.5 * (dre + 1j * dim)
    return grad


def wirtinger_fd(func, x, h_step: float = DEFAULT_FD_STEP) -> np.ndarray:
    """Generic central-difference ``df/dx*`` of a real function of a complex array.

    Uses an absolute step, one entry at a time. Meant for probes and tests;
    :func:`grad_objective_fd` is the fast path for the precoder objectives.
    """
    x = np.array(x, dtype=np.complex128)
    grad = np.empty_like(x)
    flat = x.reshape(-1)
    out = grad.reshape(-1)
    for j in range(flat.size):
        orig = flat[j]
        parts = []
        for unit in (1.0, 1j):
            flat[j] = orig + unit * h_step
            fp = func(x)
            flat[j] = orig - unit * h_step
            fm = func(x)
            parts.append((fp - fm) / (2.0 * h_step))
        flat[j] = orig
        out[j] = 0.5 * (parts[0] + 1j * parts[1])
    return grad
