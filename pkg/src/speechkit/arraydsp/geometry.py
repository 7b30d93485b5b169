"""Array geometry, far-field steering vectors and DOA search grids."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

SPEED_OF_SOUND = 343.0


@dataclass(frozen=True)
class ArrayGeometry:
    positions: np.ndarray  # [M, 3] metres
    speed_of_sound: float = SPEED_OF_SOUND

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=np.float64))
        if pos.shape[1] != 3:
            raise ValueError(f"mic positions must be 3-vectors, got shape {pos.shape}")
        if len({tuple(p) for p in pos.tolist()}) != len(pos):
            raise ValueError("mic positions must be distinct")
        if self.speed_of_sound <= 0:
            raise ValueError("speed of sound must be positive")
        object.__setattr__(self, "positions", pos)

    @property
    def n_mics(self) -> int:
        return self.positions.shape[0]

    def distance(self, p: int, q: int) -> float:
        return float(np.linalg.norm(self.positions[p] - self.positions[q]))

    @classmethod
    def circular(cls, n_mics: int, radius: float, speed_of_sound: float = SPEED_OF_SOUND):
        phi = 2 * np.pi * np.arange(n_mics) / n_mics
        pos = np.stack([radius * np.cos(phi), radius * np.sin(phi), np.zeros(n_mics)], axis=1)
        return cls(pos, speed_of_sound)

    @classmethod
    def linear(cls, n_mics: int, spacing: float, speed_of_sound: float = SPEED_OF_SOUND):
        pos = np.zeros((n_mics, 3))
        pos[:, 0] = spacing * np.arange(n_mics)
        return cls(pos, speed_of_sound)


def load_geometry(path) -> ArrayGeometry:
    """Read a geometry YAML file.

    Either ``{mics: [[x, y, z], ...], speed_of_sound: 343}`` or a bare list of
    positions.
    """
    data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    if isinstance(data, list):
        return ArrayGeometry(np.asarray(data, dtype=float))
    if not isinstance(data, dict) or "mics" not in data:
        raise ValueError(f"{path}: expected a list of positions or a mapping with 'mics'")
    return ArrayGeometry(np.asarray(data["mics"], dtype=float),
                         float(data.get("speed_of_sound", SPEED_OF_SOUND)))


def unit_vector(azimuth_deg: float, elevation_deg: float = 0.0) -> np.ndarray:
    az, el = np.deg2rad(azimuth_deg), np.deg2rad(elevation_deg)
    return np.array([np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.sin(el)])


def to_angles(u) -> tuple[float, float]:
    """(azimuth, elevation) in degrees, azimuth in [0, 360)."""
    u = np.asarray(u, dtype=float)
    az = np.rad2deg(np.arctan2(u[1], u[0])) % 360.0
    el = np.rad2deg(np.arcsin(np.clip(u[2], -1.0, 1.0)))
    return float(az), float(el)


@dataclass(frozen=True)
class DoaGrid:
    directions: np.ndarray  # [G, 3] unit vectors
    resolution_deg: float

    def __len__(self):
        return self.directions.shape[0]


def azimuth_grid(resolution_deg: float = 1.0, elevation_deg: float = 0.0) -> DoaGrid:
    az = np.arange(0.0, 360.0, resolution_deg)
    dirs = np.stack([unit_vector(a, elevation_deg) for a in az])
    return DoaGrid(dirs, resolution_deg)


def sphere_grid(n_points: int = 2562) -> DoaGrid:
    """Quasi-uniform Fibonacci lattice on the unit sphere."""
    k = np.arange(n_points) + 0.5
    z = 1 - 2 * k / n_points
    phi = np.pi * (1 + 5 ** 0.5) * k
    r = np.sqrt(1 - z * z)
    dirs = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    return DoaGrid(dirs, float(np.rad2deg(np.sqrt(4 * np.pi / n_points))))


@dataclass(frozen=True)
class SteeringField:
    A: np.ndarray  # [K, M] unit-modulus
    u: np.ndarray
    freqs: np.ndarray


def delays(geometry: ArrayGeometry, u) -> np.ndarray:
    """Per-mic plane-wave delay in seconds, tau_p = -(m_p . u) / c."""
    return -(geometry.positions @ np.asarray(u, dtype=float)) / geometry.speed_of_sound


def steering(geometry: ArrayGeometry, u, freqs, reference_mic: int | None = None) -> SteeringField:
    """Far-field steering A[k, p] = exp(-j 2 pi f_k tau_p(u)).

    A signal arriving from ``u`` is observed as X(t, k) = A(k, u) S(t, k).
    With ``reference_mic`` set, phases are taken relative to that microphone.
    """
    u = np.asarray(u, dtype=float)
    norm = np.linalg.norm(u)
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"direction must be a unit vector (norm {norm})")
    freqs = np.asarray(freqs, dtype=float)
    tau = delays(geometry, u)
    if reference_mic is not None:
        tau = tau - tau[reference_mic]
    A = np.exp(-2j * np.pi * freqs[:, None] * tau[None, :])
    return SteeringField(A, u, freqs)


def steering_grid(geometry: ArrayGeometry, grid: DoaGrid, freqs) -> np.ndarray:
    """Steering vectors for every grid direction, shape [G, K, M]."""
    tau = -(grid.directions @ geometry.positions.T) / geometry.speed_of_sound  # [G, M]
    return np.exp(-2j * np.pi * np.asarray(freqs, dtype=float)[None, :, None] * tau[:, None, :])
