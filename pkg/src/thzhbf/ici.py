"""Intercarrier-interference coefficient profiles.

A profile stores ``S_i`` for subcarrier offsets ``i = 1-K .. K-1``. The
rate and interference formulas only consume ``|S_{i-k}|**2``, exposed as a
``K x K`` weight matrix by :meth:`IciProfile.weights`.

Three modes exist:

* ``cfo``: the physical leakage pattern of a normalized carrier frequency
  offset ``eps``.
* ``scalar``: ``|S_0| = 1`` and every other offset leaks with the same
  magnitude ``S``. This is the experiment knob swept in the simulations;
  it applies to *all* offsets, not just adjacent subcarriers, and does not
  shrink ``S_0`` as ``S`` grows.
* ``none``: unit impulse, no leakage.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["IciProfile", "cfo_profile", "scalar_profile", "none_profile", "SINGULAR_TOL"]

SINGULAR_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class IciProfile:
    K: int
    coefficients: np.ndarray  # length 2K-1, entry j holds S_{j-(K-1)}
    mode: str
    value: float = 0.0

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.coefficients.shape != (2 * self.K - 1,):
            raise ValueError("coefficients must have length 2K-1")
        if self.mode not in ("cfo", "scalar", "none"):
            raise ValueError(f"unknown ICI mode {self.mode!r}")

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(1 - self.K, self.K)

    def coefficient(self, i: int) -> complex:
        if not -self.K < i < self.K:
            raise IndexError(f"offset {i} outside 1-K..K-1")
        return complex(self.coefficients[i + self.K - 1])

    def weights(self) -> np.ndarray:
        """``A[i, k] = |S_{i-k}|**2`` for subcarriers ``i, k`` in ``0..K-1``."""
        idx = np.arange(self.K)
        diff = idx[:, None] - idx[None, :] + self.K - 1
        return np.abs(self.coefficients[diff]) ** 2

    def write_csv(self, path) -> None:
        """Dump ``i, re, im, abs`` rows."""
        path = Path(path)
        try:
            with path.open("w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["i", "re", "im", "abs"])
                for i, s in zip(self.offsets, self.coefficients):
                    w.writerow([int(i), f"{s.real:.12g}", f"{s.imag:.12g}", f"{abs(s):.12g}"])
        except OSError as exc:
            raise OSError(f"cannot write ICI profile {path}: {exc}") from exc


def cfo_profile(K: int, epsilon: float) -> IciProfile:
    """Leakage coefficients for a frequency offset of ``epsilon`` subcarrier spacings.

    ``S_i = sin(pi x) / (K sin(pi x / K)) * exp(j pi (1 - 1/K) x)`` with
    ``x = i + epsilon``; where ``x/K`` is an integer the ratio is replaced
    by its limit ``(-1)**(m (K-1))``, ``m = x/K``.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if not 0.0 <= epsilon < 1.0:
        raise ValueError("epsilon must lie in [0, 1)")
    x = np.arange(1 - K, K) + float(epsilon)
    den = K * np.sin(np.pi * x / K)
    singular = np.abs(np.sin(np.pi * x / K)) < SINGULAR_TOL
    ratio = np.empty_like(x)
    ratio[~singular] = np.sin(np.pi * x[~singular]) / den[~singular]
    m = np.rint(x[singular] / K)
    ratio[singular] = np.where((m * (K - 1)) % 2 == 0, 1.0, -1.0)
    S = ratio * np.exp(1j * np.pi * (1.0 - 1.0 / K) * x)
    return IciProfile(K, S, "cfo", float(epsilon))


def scalar_profile(K: int, S: float) -> IciProfile:
    """``S_0 = 1`` and ``S_i = S`` (real) for every ``i != 0``."""
    if K < 1:
        raise ValueError("K must be >= 1")
    if not 0.0 <= S < 1.0:
        raise ValueError("scalar ICI coefficient must lie in [0, 1)")
    coeffs = np.full(2 * K - 1, float(S), dtype=np.complex128)
    coeffs[K - 1] = 1.0
    return IciProfile(K, coeffs, "scalar", float(S))


def none_profile(K: int) -> IciProfile:
    coeffs = np.zeros(2 * K - 1, dtype=np.complex128)
    coeffs[K - 1] = 1.0
    return IciProfile(K, coeffs, "none", 0.0)
