"""Dense complex linear algebra helpers, reproducible random streams and
the angular-spread sampler used by the channel generator.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RankDeficiencyError

__all__ = [
    "RngStream",
    "derive_stream",
    "GmmParams",
    "sample_gmm",
    "as_complex_matrix",
    "right_pseudo_inverse",
    "frobenius_norm",
    "COND_LIMIT",
]

#: Condition number of ``M M^H`` above which a pseudo-inverse is refused.
COND_LIMIT = 1e12


def as_complex_matrix(M, name: str = "matrix") -> np.ndarray:
    """Return ``M`` as a 2-D complex128 array, rejecting NaN/Inf entries."""
    arr = np.asarray(M, dtype=np.complex128)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


@dataclass(frozen=True)
class RngStream:
    """Immutable descriptor of a random stream.

    The draw state is built on demand from ``numpy.random.SeedSequence``
    with ``spawn_key = key``, so two descriptors with equal fields always
    produce the same sequence no matter which thread builds them.
    """

    seed: int
    key: tuple[int, ...] = ()

    @property
    def stream_id(self) -> int:
        return self.key[0] if self.key else 0

    def child(self, index: int) -> "RngStream":
        """Independent sub-stream, e.g. one per redraw attempt or per consumer."""
        return RngStream(self.seed, self.key + (int(index),))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.key)
        return np.random.Generator(np.random.PCG64(ss))


def derive_stream(seed: int, stream_id: int) -> RngStream:
    """Stream for realization ``stream_id`` of an experiment seeded with ``seed``."""
    if seed < 0 or stream_id < 0:
        raise ValueError("seed and stream_id must be non-negative")
    return RngStream(int(seed), (int(stream_id),))


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


@dataclass(frozen=True)
class GmmParams:
    """Zero-mean two-component Gaussian mixture for intra-cluster angle offsets.

    The defaults are not taken from measurements; they are placeholders
    exposed through configuration. Weights are normalized to sum to one
    when sampling.
    """

    a1: float = 0.5
    a2: float = 0.5
    sigma1: float = 0.1
    sigma2: float = 0.3

    def __post_init__(self):
        if self.sigma1 <= 0 or self.sigma2 <= 0:
            raise ValueError("GMM standard deviations must be positive")
        if self.a1 < 0 or self.a2 < 0 or self.a1 + self.a2 <= 0:
            raise ValueError("GMM weights must be non-negative with a positive sum")

    @property
    def variance(self) -> float:
        w1 = self.a1 / (self.a1 + self.a2)
        return w1 * self.sigma1**2 + (1.0 - w1) * self.sigma2**2


def sample_gmm(params: GmmParams, rng, size=None):
    """Draw angle offsets (radians) from the mixture ``params``.

    Parameters
    ----------
    params : GmmParams
    rng : RngStream or numpy.random.Generator
        A stream descriptor starts a fresh generator; pass a Generator to
        keep drawing from shared state.
    size : int or tuple, optional
        Output shape. ``None`` returns a Python float.
    """
    gen = _as_generator(rng)
    w1 = params.a1 / (params.a1 + params.a2)
    first = gen.random(size) < w1
    sigma = np.where(first, params.sigma1, params.sigma2)
    out = gen.standard_normal(size) * sigma
    return float(out) if size is None else out


def right_pseudo_inverse(M) -> np.ndarray:
    """``M^H (M M^H)^{-1}`` for a wide matrix with full row rank.

    Solves the Hermitian system ``(M M^H) X = M`` and returns ``X^H``.
    Raises :class:`RankDeficiencyError` when the Gram matrix condition
    number exceeds :data:`COND_LIMIT`.
    """
    M = as_complex_matrix(M, "M")
    rows, cols = M.shape
    if rows > cols:
        raise ValueError(f"right pseudo-inverse needs rows <= cols, got {M.shape}")
    gram = M @ M.conj().T
    eig = np.linalg.eigvalsh(gram)
    if eig[0] <= 0 or eig[-1] / eig[0] > COND_LIMIT:
        raise RankDeficiencyError(
            f"Gram matrix is singular or ill-conditioned (eigenvalues {eig[0]:.3e}..{eig[-1]:.3e})"
        )
    X = np.linalg.solve(gram, M)
    return X.conj().T


def frobenius_norm(M) -> float:
    arr = np.asarray(M, dtype=np.complex128)
    return float(np.sqrt(np.sum(arr.real**2 + arr.imag**2)))
