"""Clustered (Saleh-Valenzuela style) multiuser THz downlink channels.

Each single-antenna user sees ``N_c`` clusters of ``N_ray`` rays leaving a
square uniform planar array at the base station. Ray power follows
spreading plus molecular-absorption loss, ray phases are uniform, and
intra-cluster angle offsets follow a zero-mean Gaussian mixture.

Antenna gains given in dBi are applied in the amplitude domain
(``10**(G/20)`` each), so received power scales with the linear power
gains.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .mathcore import GmmParams, RngStream, sample_gmm

__all__ = [
    "SPEED_OF_LIGHT",
    "ChannelConfig",
    "ClusterAngles",
    "ChannelRealization",
    "path_gain",
    "array_response",
    "sample_angles",
    "generate_channel",
    "write_channel_csv",
    "read_channel_csv",
    "CHANNEL_DUMP_VERSION",
]

SPEED_OF_LIGHT = 299_792_458.0
CHANNEL_DUMP_VERSION = 1


def _is_square(n: int) -> bool:
    r = math.isqrt(n)
    return n >= 1 and r * r == n


@dataclass(frozen=True)
class ChannelConfig:
    """Scenario parameters for channel generation.

    Defaults follow the indoor 0.35 THz scenario; ``num_clusters`` and the
    GMM parameters are placeholders since no measured values are given.
    """

    carrier_frequency: float = 0.35e12  # Hz
    link_distance: float = 5.0  # m
    absorption_coefficient: float = 0.0033  # 1/m
    num_clusters: int = 5
    rays_per_cluster: int = 10
    tx_antennas: int = 64
    antenna_spacing: float = 0.5  # d / lambda
    tx_gain_dbi: float = 20.0
    rx_gain_dbi: float = 20.0
    num_users: int = 2
    num_subcarriers: int = 64
    gmm: GmmParams = field(default_factory=GmmParams)
    per_subcarrier_frequency: bool = False
    subcarrier_spacing: float | None = None  # Hz

    def __post_init__(self):
        if self.carrier_frequency <= 0:
            raise ConfigError("carrier_frequency must be positive")
        if self.link_distance <= 0:
            raise ConfigError("link_distance must be positive")
        if self.absorption_coefficient < 0:
            raise ConfigError("absorption_coefficient must be non-negative")
        for name in ("num_clusters", "rays_per_cluster", "num_users", "num_subcarriers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if not _is_square(self.tx_antennas):
            raise ConfigError(f"tx_antennas must be a perfect square, got {self.tx_antennas}")
        if self.antenna_spacing <= 0:
            raise ConfigError("antenna_spacing must be positive")
        if self.per_subcarrier_frequency and not self.subcarrier_spacing:
            raise ConfigError("per_subcarrier_frequency needs a positive subcarrier_spacing")

    @property
    def amplitude_gain(self) -> float:
        """Product of transmit and receive antenna gains in amplitude."""
        return 10.0 ** (self.tx_gain_dbi / 20.0) * 10.0 ** (self.rx_gain_dbi / 20.0)

    def subcarrier_frequencies(self) -> np.ndarray:
        K = self.num_subcarriers
        if not self.per_subcarrier_frequency:
            return np.full(K, self.carrier_frequency)
        k = np.arange(1, K + 1)
        return self.carrier_frequency + (k - (K + 1) / 2.0) * self.subcarrier_spacing

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ClusterAngles:
    """Angles of departure, arrays shaped ``(N_c,)`` for clusters and
    ``(N_c, N_ray)`` for rays."""

    cluster_azimuth: np.ndarray
    cluster_elevation: np.ndarray
    ray_azimuth_offset: np.ndarray
    ray_elevation_offset: np.ndarray

    @property
    def azimuth(self) -> np.ndarray:
        return self.cluster_azimuth[:, None] + self.ray_azimuth_offset

    @property
    def elevation(self) -> np.ndarray:
        return self.cluster_elevation[:, None] + self.ray_elevation_offset


@dataclass(frozen=True)
class ChannelRealization:
    """Channel tensor ``H`` of shape ``(U, N_t, K)``; ``H[q, :, k]`` is user
    ``q``'s row channel on subcarrier ``k``."""

    H: np.ndarray
    config: ChannelConfig | None = None
    stream: RngStream | None = None

    @property
    def num_users(self) -> int:
        return self.H.shape[0]

    @property
    def tx_antennas(self) -> int:
        return self.H.shape[1]

    @property
    def num_subcarriers(self) -> int:
        return self.H.shape[2]

    def subcarrier(self, k: int) -> np.ndarray:
        """``U x N_t`` matrix ``H[k]``."""
        return self.H[:, :, k]


def path_gain(f: float, d_link: float, k_abs: float) -> float:
    """Linear power gain: spreading loss times molecular absorption."""
    if f <= 0 or d_link <= 0:
        raise ValueError("frequency and distance must be positive")
    if k_abs < 0:
        raise ValueError("absorption coefficient must be non-negative")
    spreading = (SPEED_OF_LIGHT / (4.0 * math.pi * f * d_link)) ** 2
    return spreading * math.exp(-k_abs * d_link)


def array_response(phi, theta, n_t: int, spacing_over_wavelength: float = 0.5) -> np.ndarray:
    """Unit-norm response of a ``sqrt(n_t) x sqrt(n_t)`` planar array.

    Entry ``(p, q)`` (row-major, ``p`` horizontal) is
    ``exp(j 2 pi d/lambda (p sin(phi) sin(theta) + q cos(theta))) / sqrt(n_t)``.
    ``phi``/``theta`` may be arrays of equal shape; the antenna axis is
    appended last.
    """
    if not _is_square(n_t):
        raise ValueError(f"n_t must be a perfect square, got {n_t}")
    side = math.isqrt(n_t)
    p, q = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
    p = p.ravel()
    q = q.ravel()
    phi = np.asarray(phi, dtype=float)[..., None]
    theta = np.asarray(theta, dtype=float)[..., None]
    phase = 2.0 * np.pi * spacing_over_wavelength * (
        p * np.sin(phi) * np.sin(theta) + q * np.cos(theta)
    )
    return np.exp(1j * phase) / math.sqrt(n_t)


def _draw_angles(cfg: ChannelConfig, gen: np.random.Generator) -> ClusterAngles:
    n_c, n_ray = cfg.num_clusters, cfg.rays_per_cluster
    # pi - U[0, 2pi) lands on (-pi, pi]
    az = np.pi - 2.0 * np.pi * gen.random(n_c)
    el = gen.uniform(-np.pi / 2.0, np.pi / 2.0, n_c)
    d_az = sample_gmm(cfg.gmm, gen, (n_c, n_ray))
    d_el = sample_gmm(cfg.gmm, gen, (n_c, n_ray))
    return ClusterAngles(az, el, d_az, d_el)


def sample_angles(cfg: ChannelConfig, rng) -> ClusterAngles:
    """Cluster and ray angles of departure for one user."""
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    return _draw_angles(cfg, gen)


def generate_channel(cfg: ChannelConfig, rng) -> ChannelRealization:
    """Draw one multiuser channel realization.

    Per user, one set of angles and ray phases is drawn and shared by all
    subcarriers. In the default mode every subcarrier uses the carrier
    frequency, so ``H[k]`` is identical across ``k``; with
    ``per_subcarrier_frequency`` the ray amplitudes follow the path gain at
    each subcarrier frequency.
    """
    stream = rng if isinstance(rng, RngStream) else None
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    U, n_t, K = cfg.num_users, cfg.tx_antennas, cfg.num_subcarriers
    n_paths = cfg.num_clusters * cfg.rays_per_cluster

    freqs = cfg.subcarrier_frequencies()
    amp = np.sqrt([path_gain(f, cfg.link_distance, cfg.absorption_coefficient) for f in freqs])
    scale = math.sqrt(n_t / n_paths) * cfg.amplitude_gain

    H = np.empty((U, n_t, K), dtype=np.complex128)
    for q in range(U):
        angles = _draw_angles(cfg, gen)
        phase = gen.uniform(0.0, 2.0 * np.pi, (cfg.num_clusters, cfg.rays_per_cluster))
        resp = array_response(angles.azimuth, angles.elevation, n_t, cfg.antenna_spacing)
        # sum over rays of unit-amplitude phasor times response, then scale per subcarrier
        row = np.einsum("ij,ijn->n", np.exp(1j * phase), resp)
        H[q] = scale * row[:, None] * amp[None, :]
    return ChannelRealization(H, cfg, stream)


def write_channel_csv(realization: ChannelRealization, path) -> None:
    """Dump ``H`` as ``user,subcarrier,antenna,re,im`` rows (0-based indices).

    The first line is a ``#`` comment carrying the format version.
    """
    path = Path(path)
    H = realization.H
    try:
        with path.open("w", newline="") as fh:
            fh.write(f"# channel-dump version={CHANNEL_DUMP_VERSION} shape={'x'.join(map(str, H.shape))}\n")
            w = csv.writer(fh)
            w.writerow(["user", "subcarrier", "antenna", "re", "im"])
            for q in range(H.shape[0]):
                for k in range(H.shape[2]):
                    for n in range(H.shape[1]):
                        z = H[q, n, k]
                        w.writerow([q, k, n, repr(float(z.real)), repr(float(z.imag))])
    except OSError as exc:
        raise OSError(f"cannot write channel dump {path}: {exc}") from exc


def read_channel_csv(path) -> np.ndarray:
    """Inverse of :func:`write_channel_csv`; returns the ``(U, N_t, K)`` tensor."""
    path = Path(path)
    with path.open() as fh:
        header = fh.readline()
        if not header.startswith("# channel-dump"):
            raise ValueError(f"{path}: not a channel dump")
        fields = dict(tok.split("=") for tok in header[1:].split()[1:])
        if int(fields["version"]) != CHANNEL_DUMP_VERSION:
            raise ValueError(f"{path}: unsupported dump version {fields['version']}")
        shape = tuple(int(s) for s in fields["shape"].split("x"))
        H = np.zeros(shape, dtype=np.complex128)
        for row in csv.DictReader(fh):
            H[int(row["user"]), int(row["antenna"]), int(row["subcarrier"])] = complex(
                float(row["re"]), float(row["im"])
            )
    return H
