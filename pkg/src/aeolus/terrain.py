"""Procedural island heightfields from fractal gradient noise with a falloff.

A square falloff ramp is subtracted from multi-octave Perlin noise so that
island interiors can rise above sea level while the grid boundary is always
submerged coastline or reef.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class TerrainConfig:
    n: int = 256
    falloff_a: float = 2.0       # falloff shape exponent
    falloff_b: float = 2.0       # falloff shape base
    noise_scale: float = 50.0    # larger -> smoother surface
    octaves: int = 4
    persistence: float = 0.5     # per-octave amplitude decay
    lacunarity: float = 2.5      # per-octave frequency growth
    falloff_mult: float = 5.0
    height_mult: float = 15.0
    rand_offset: float = 1337.0  # multiplies the scaled sample coordinates
    sea_level: float = 0.0
    seed: int = 0
    cell_size: float = 0.0       # 0 -> one 500 m environment per tile

    def __post_init__(self):
        if self.n < 16:
            raise ValueError("terrain grid must be at least 16 cells")
        if self.octaves < 1:
            raise ValueError("need at least one octave")
        if not 0.0 < self.persistence <= 1.0:
            raise ValueError("persistence must lie in (0, 1]")
        if self.lacunarity < 1.0:
            raise ValueError("lacunarity must be >= 1")

    @property
    def resolved_cell_size(self) -> float:
        return self.cell_size if self.cell_size > 0.0 else 500.0 / self.n


class PerlinNoise:
    """Classic 2-D gradient noise with a seed-permuted gradient table.

    Output of :meth:`sample01` mimics the usual engine convention of values
    in [0, 1]; raw gradient noise is rescaled by sqrt(2) so the range is used
    fully.
    """

    _GRADS = np.array(
        [
            (1.0, 0.0),
            (-1.0, 0.0),
            (0.0, 1.0),
            (0.0, -1.0),
            (math.sqrt(0.5), math.sqrt(0.5)),
            (-math.sqrt(0.5), math.sqrt(0.5)),
            (math.sqrt(0.5), -math.sqrt(0.5)),
            (-math.sqrt(0.5), -math.sqrt(0.5)),
        ]
    )

    def __init__(self, seed: int = 0):
        rng = np.random.default_rng(seed)
        perm = rng.permutation(256)
        self._perm = np.concatenate([perm, perm]).astype(np.int64)

    def _hash(self, xi: np.ndarray, zi: np.ndarray) -> np.ndarray:
        return self._perm[self._perm[xi & 255] + (zi & 255)]

    def sample01(self, x, z):
        x = np.asarray(x, dtype=float)
        z = np.asarray(z, dtype=float)
        x0 = np.floor(x).astype(np.int64)
        z0 = np.floor(z).astype(np.int64)
        fx = x - x0
        fz = z - z0

        def grad_dot(ix, iz, dx, dz):
            g = self._GRADS[self._hash(ix, iz) & 7]
            return g[..., 0] * dx + g[..., 1] * dz

        n00 = grad_dot(x0, z0, fx, fz)
        n10 = grad_dot(x0 + 1, z0, fx - 1.0, fz)
        n01 = grad_dot(x0, z0 + 1, fx, fz - 1.0)
        n11 = grad_dot(x0 + 1, z0 + 1, fx - 1.0, fz - 1.0)

        ux = fx * fx * fx * (fx * (fx * 6.0 - 15.0) + 10.0)
        uz = fz * fz * fz * (fz * (fz * 6.0 - 15.0) + 10.0)
        nx0 = n00 + ux * (n10 - n00)
        nx1 = n01 + ux * (n11 - n01)
        raw = nx0 + uz * (nx1 - nx0)
        return 0.5 + 0.5 * math.sqrt(2.0) * raw


def falloff_value(i, j, n: int):
    """Square-ring distance from the grid centre, 0 at centre, 1 at edge."""
    fi = np.abs(2.0 * np.asarray(i, dtype=float) / n - 1.0)
    fj = np.abs(2.0 * np.asarray(j, dtype=float) / n - 1.0)
    return np.maximum(fi, fj)


def falloff_strength(fv, a: float = 2.0, b: float = 2.0):
    """Smooth ramp of the falloff value; monotone from 0 to 1 on [0, 1]."""
    fv = np.clip(np.asarray(fv, dtype=float), 0.0, 1.0)
    num = fv**a
    den = num + (b - b * fv) ** a
    return np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), 1.0)


@dataclass
class TerrainField:
    heights: np.ndarray
    cell_size: float
    origin: np.ndarray = field(default_factory=lambda: np.zeros(2))
    sea_level: float = 0.0

    @property
    def n(self) -> int:
        return self.heights.shape[0]

    @property
    def extent(self) -> float:
        return (self.n - 1) * self.cell_size


def generate_island(cfg: TerrainConfig, origin=(0.0, 0.0)) -> TerrainField:
    """Fractal-noise island with falloff-submerged edges; pure in ``cfg``."""
    n = cfg.n
    noise = PerlinNoise(cfg.seed)
    idx = np.arange(n, dtype=float)
    ii, jj = np.meshgrid(idx, idx, indexing="ij")

    fs = falloff_strength(falloff_value(ii, jj, n), cfg.falloff_a, cfg.falloff_b)

    total = np.zeros((n, n))
    amplitude = 1.0
    frequency = 1.0
    for _ in range(cfg.octaves):
        si = (ii - n / 2.0) / cfg.noise_scale * frequency * cfg.rand_offset
        sj = (jj - n / 2.0) / cfg.noise_scale * frequency * cfg.rand_offset
        total += (2.0 * noise.sample01(si, sj) - 1.0) * amplitude
        amplitude *= cfg.persistence
        frequency *= cfg.lacunarity

    heights = (total - fs * cfg.falloff_mult) * cfg.height_mult
    return TerrainField(
        heights=heights,
        cell_size=cfg.resolved_cell_size,
        origin=np.asarray(origin, dtype=float),
        sea_level=cfg.sea_level,
    )


def height_at(fld: TerrainField, x, z):
    """Bilinear terrain height; -inf outside the tile (open ocean)."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    gx = (x - fld.origin[0]) / fld.cell_size
    gz = (z - fld.origin[1]) / fld.cell_size
    n = fld.n
    inside = (gx >= 0.0) & (gx <= n - 1) & (gz >= 0.0) & (gz <= n - 1)

    i0 = np.clip(np.floor(gx).astype(np.int64), 0, n - 2)
    j0 = np.clip(np.floor(gz).astype(np.int64), 0, n - 2)
    fx = np.clip(gx - i0, 0.0, 1.0)
    fz = np.clip(gz - j0, 0.0, 1.0)
    h = fld.heights
    top = h[i0, j0] * (1.0 - fx) + h[i0 + 1, j0] * fx
    bot = h[i0, j0 + 1] * (1.0 - fx) + h[i0 + 1, j0 + 1] * fx
    vals = top * (1.0 - fz) + bot * fz
    return np.where(inside, vals, -np.inf) if vals.ndim else (
        float(vals) if inside else -math.inf
    )


def surface_normal(fld: TerrainField, x: float, z: float) -> np.ndarray:
    """Upward unit normal of the heightfield from central differences."""
    d = fld.cell_size
    hx0 = height_at(fld, x - d, z)
    hx1 = height_at(fld, x + d, z)
    hz0 = height_at(fld, x, z - d)
    hz1 = height_at(fld, x, z + d)
    if not all(map(math.isfinite, (hx0, hx1, hz0, hz1))):
        return np.array([0.0, 1.0, 0.0])
    n = np.array([(hx0 - hx1) / (2.0 * d), 1.0, (hz0 - hz1) / (2.0 * d)])
    return n / np.linalg.norm(n)
