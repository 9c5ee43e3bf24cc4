"""Directional ocean-wave spectra and FFT heightfield synthesis.

The surface is modelled as a stationary Gaussian sea: a directional spectrum
(Pierson-Moskowitz, JONSWAP or TMA, times a Hasselmann spreading function) is
sampled onto a wavevector lattice, seeded with complex Gaussian amplitudes,
and evolved in time by phase rotation before an inverse FFT brings it back to
a spatial height grid.  Horizontal "choppy" displacement grids come from the
-i*k/|k| transform of the same coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi

SPECTRUM_KINDS = ("PM", "JONSWAP", "TMA")

# Hasselmann spread exponent is clamped to keep the cosine power sane for
# extreme wind inputs.
SPREAD_MIN = 1.0
SPREAD_MAX = 30.0


@dataclass(frozen=True)
class SpectrumConfig:
    """Wind-sea description driving the wave spectrum."""

    kind: str = "PM"
    u10: float = 10.0            # wind speed at 10 m [m/s]
    fetch: float = 5000.0        # developing-sea fetch [m]
    depth: float = 150.0         # uniform sea depth [m]
    wind_direction: float = 0.0  # radians from +x
    swell_alignment: float = 0.0  # xi in [0, 1]
    surface_tension: float = 0.074   # [N/m]
    gravity: float = 9.81            # [m/s^2]
    sea_density: float = 1025.0      # [kg/m^3]

    def __post_init__(self):
        if self.kind not in SPECTRUM_KINDS:
            raise ValueError(f"unknown spectrum kind {self.kind!r}")
        if self.u10 <= 0.0:
            raise ValueError("u10 must be positive")
        if self.fetch <= 0.0:
            raise ValueError("fetch must be positive")
        if self.depth <= 0.0:
            raise ValueError("depth must be positive")
        if not 0.0 <= self.swell_alignment <= 1.0:
            raise ValueError("swell_alignment must lie in [0, 1]")

    @property
    def omega_peak(self) -> float:
        if self.kind == "PM":
            return 0.855 * self.gravity / self.u10
        chi = self.gravity * self.fetch / self.u10**2
        nu = 3.5 * chi**-0.33
        return TWO_PI * self.gravity * nu / self.u10


def dispersion(k, cfg: SpectrumConfig):
    """Angular frequency of a wavenumber, finite depth with surface tension."""
    k = np.asarray(k, dtype=float)
    if np.any(k < 0.0):
        raise ValueError("wavenumber must be non-negative")
    sigma_term = cfg.surface_tension / cfg.sea_density
    w2 = (cfg.gravity * k + sigma_term * k**3) * np.tanh(k * cfg.depth)
    return np.sqrt(w2)


def dispersion_derivative(k, cfg: SpectrumConfig):
    """d(omega)/dk, used in the omega->k change of variables."""
    k = np.asarray(k, dtype=float)
    sigma_term = cfg.surface_tension / cfg.sea_density
    kd = k * cfg.depth
    tanh_kd = np.tanh(kd)
    # sech^2 decays fast; clamp the argument so cosh does not overflow.
    sech2 = 1.0 / np.cosh(np.minimum(kd, 350.0)) ** 2
    w = dispersion(k, cfg)
    num = (cfg.gravity + 3.0 * sigma_term * k**2) * tanh_kd + (
        cfg.gravity * k + sigma_term * k**3
    ) * cfg.depth * sech2
    # Shallow-water limit as k -> 0: omega ~ k*sqrt(g*D), slope sqrt(g*D).
    safe_w = np.where(w > 0.0, w, 1.0)
    out = np.where(w > 0.0, num / (2.0 * safe_w), np.sqrt(cfg.gravity * cfg.depth))
    return out


def _ramanujan_raw(s):
    poly = 8.0 * s**3 + 4.0 * s**2 + s + 1.0 / 30.0
    return np.sqrt(np.pi) * (s / np.e) ** s * poly ** (1.0 / 6.0)


def ramanujan_gamma(s):
    """Gamma(s + 1) by Ramanujan's sixth-root approximation.

    The raw formula drifts to ~1.5e-3 relative error below s = 1, so that
    range is evaluated one step up and divided back through the recurrence
    Gamma(s + 1) = Gamma(s + 2) / (s + 1).
    """
    s = np.asarray(s, dtype=float)
    shifted = _ramanujan_raw(s + 1.0) / (s + 1.0)
    return np.where(s < 1.0, shifted, _ramanujan_raw(np.maximum(s, 1.0)))


def kitaigorodskii_attenuation(omega, cfg: SpectrumConfig):
    """Finite-depth attenuation factor (0..1).

    The quadratic two-branch approximation is only valid up to omega_h = 2;
    past that it would dip below 1 again, so it is held at 1.
    """
    omega = np.asarray(omega, dtype=float)
    wh = omega * np.sqrt(cfg.depth / cfg.gravity)
    low = 0.5 * wh**2
    mid = 1.0 - 0.5 * (2.0 - wh) ** 2
    return np.where(wh <= 1.0, low, np.where(wh < 2.0, mid, 1.0))


def spectrum_value(omega, cfg: SpectrumConfig):
    """Non-directional spectral density S(omega) [m^2 s]."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0.0):
        raise ValueError("spectrum requires omega > 0")
    g = cfg.gravity
    if cfg.kind == "PM":
        a = 8.1e-3
        wp = cfg.omega_peak
        return a * g**2 / omega**5 * np.exp(-1.25 * (wp / omega) ** 4)

    chi = g * cfg.fetch / cfg.u10**2
    a = 0.076 * chi**-0.22
    wp = cfg.omega_peak
    gamma = 3.3
    sig = np.where(omega <= wp, 0.07, 0.09)
    r = np.exp(-((omega - wp) ** 2) / (2.0 * sig**2 * wp**2))
    s_j = a * g**2 / omega**5 * gamma**r * np.exp(-1.25 * (wp / omega) ** 4)
    if cfg.kind == "JONSWAP":
        return s_j
    return s_j * kitaigorodskii_attenuation(omega, cfg)


def spreading_exponent(omega, cfg: SpectrumConfig):
    """Hasselmann spreading exponent s, with optional swell elongation."""
    omega = np.asarray(omega, dtype=float)
    wp = cfg.omega_peak
    ratio = omega / wp
    mu = -2.33 - 1.45 * (cfg.u10 * wp / cfg.gravity - 1.17)
    s = np.where(ratio > 1.0, 9.77 * ratio**mu, 6.97 * ratio**4.06)
    if cfg.swell_alignment > 0.0:
        s = s + 16.0 * np.tanh(ratio) * cfg.swell_alignment**2
    return np.clip(s, SPREAD_MIN, SPREAD_MAX)


def directional_spread(omega, theta, cfg: SpectrumConfig):
    """Hasselmann directional spreading density D(omega, theta).

    Normalised so the integral over theta in (-pi, pi] is one; the gamma
    factors use the Ramanujan approximation.
    """
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0.0):
        raise ValueError("spreading requires omega > 0")
    theta = np.asarray(theta, dtype=float)
    s = spreading_exponent(omega, cfg)
    norm = 2.0 ** (2.0 * s - 1.0) / np.pi * ramanujan_gamma(s) ** 2 / ramanujan_gamma(2.0 * s)
    return norm * np.abs(np.cos(0.5 * (theta - cfg.wind_direction))) ** (2.0 * s)


def directional_spectrum(omega, theta, cfg: SpectrumConfig):
    return spectrum_value(omega, cfg) * directional_spread(omega, theta, cfg)


@dataclass
class SpectrumGrid:
    """Seeded spectral state of one ocean patch.

    ``amplitudes`` holds one independent complex Gaussian draw per lattice
    point (the one-sided coefficients).  :meth:`coefficients` folds them with
    their mirrored conjugates, which enforces Hermitian symmetry at every
    time, so the synthesized grids are real.
    """

    n: int
    patch_size: float
    kx: np.ndarray
    ky: np.ndarray
    amplitudes: np.ndarray
    omegas: np.ndarray
    config: SpectrumConfig
    seed: int
    _mirror: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        idx = (-np.arange(self.n)) % self.n
        self._mirror = np.ix_(idx, idx)

    @property
    def delta_k(self) -> float:
        return TWO_PI / self.patch_size

    def coefficients(self, t: float) -> np.ndarray:
        """Hermitian spectral field at time ``t``.

        Each conjugate lattice pair carries two counter-propagating waves,
        rotated by e^{-i w t} and e^{+i w t} respectively.
        """
        phase = np.exp(-1j * self.omegas * t)
        half = 0.5 * self.amplitudes * phase
        return half + np.conj(half[self._mirror])


@dataclass
class OceanField:
    """Synthesized surface state at one instant."""

    time: float
    height: np.ndarray
    displacement_x: np.ndarray
    displacement_z: np.ndarray
    choppiness: float
    patch_size: float

    @property
    def n(self) -> int:
        return self.height.shape[0]


def build_spectrum_grid(
    cfg: SpectrumConfig, n: int = 256, patch_size: float = 500.0, seed: int = 0
) -> SpectrumGrid:
    """Sample the directional spectrum onto an n x n wavevector lattice.

    Deterministic for a fixed ``seed``.  The DC bin and the Nyquist row and
    column (which have no conjugate partner on an even lattice) carry zero
    amplitude.
    """
    if n < 16 or (n & (n - 1)) != 0:
        raise ValueError("grid resolution must be a power of two >= 16")
    dk = TWO_PI / patch_size
    freqs = np.fft.fftfreq(n, d=1.0 / n) * dk  # lattice wavenumbers, FFT order
    kx = np.tile(freqs[:, None], (1, n))
    ky = np.tile(freqs[None, :], (n, 1))
    kmag = np.hypot(kx, ky)
    theta = np.arctan2(ky, kx)

    omegas = dispersion(kmag, cfg)
    nonzero = kmag > 0.0
    s_k = np.zeros_like(kmag)
    # S(k) = S(w, theta) * |dw/dk| / k  (change of variables to the k-plane)
    s_k[nonzero] = (
        directional_spectrum(omegas[nonzero], theta[nonzero], cfg)
        * dispersion_derivative(kmag[nonzero], cfg)
        / kmag[nonzero]
    )

    rng = np.random.default_rng(seed)
    draws = rng.standard_normal((n, n, 2))
    # E|A|^2 = 2 S dkx dky, matching A = R sqrt(2 S dkx dky) with R ~ N(0,1).
    amplitudes = (draws[..., 0] + 1j * draws[..., 1]) * np.sqrt(s_k * dk * dk)
    amplitudes[0, 0] = 0.0
    amplitudes[n // 2, :] = 0.0
    amplitudes[:, n // 2] = 0.0

    return SpectrumGrid(
        n=n,
        patch_size=patch_size,
        kx=kx,
        ky=ky,
        amplitudes=amplitudes,
        omegas=omegas,
        config=cfg,
        seed=seed,
    )


def spectral_energy(grid: SpectrumGrid) -> float:
    """Lattice estimate of the sea-surface variance, sum |A|^2 / 2."""
    return float(np.sum(np.abs(grid.amplitudes) ** 2) / 2.0)


def synthesize(grid: SpectrumGrid, t: float, choppiness: float = 0.6) -> OceanField:
    """Inverse-FFT the evolved spectrum into height and displacement grids."""
    coeff = grid.coefficients(t)
    n2 = grid.n * grid.n
    height = np.real(np.fft.ifft2(coeff)) * n2

    if choppiness != 0.0:
        kmag = np.hypot(grid.kx, grid.ky)
        safe = np.where(kmag > 0.0, kmag, 1.0)
        # both displacement coefficient fields are Hermitian, so they share
        # one inverse transform: real part is x, imaginary part is z
        packed = ((grid.ky - 1j * grid.kx) / safe) * coeff
        disp = np.fft.ifft2(packed) * n2 * choppiness
        disp_x = np.real(disp)
        disp_z = np.imag(disp)
    else:
        disp_x = np.zeros_like(height)
        disp_z = np.zeros_like(height)

    return OceanField(
        time=t,
        height=height,
        displacement_x=disp_x,
        displacement_z=disp_z,
        choppiness=choppiness,
        patch_size=grid.patch_size,
    )


def flat_field(n: int = 16, patch_size: float = 500.0) -> OceanField:
    """A zero-amplitude sea, handy for calm-water runs."""
    z = np.zeros((n, n))
    return OceanField(0.0, z, z.copy(), z.copy(), 0.0, patch_size)


def sample_surface(field: OceanField, x, z):
    """Bilinear height lookup; coordinates wrap periodically over the patch."""
    n = field.n
    cell = field.patch_size / n
    gx = np.asarray(x, dtype=float) / cell
    gz = np.asarray(z, dtype=float) / cell
    i0 = np.floor(gx).astype(np.int64)
    j0 = np.floor(gz).astype(np.int64)
    fx = gx - i0
    fz = gz - j0
    i0 %= n
    j0 %= n
    i1 = (i0 + 1) % n
    j1 = (j0 + 1) % n
    h = field.height
    top = h[i0, j0] * (1.0 - fx) + h[i1, j0] * fx
    bot = h[i0, j1] * (1.0 - fx) + h[i1, j1] * fx
    return top * (1.0 - fz) + bot * fz


def quadrature_energy(
    cfg: SpectrumConfig,
    omega_max: float,
    n_omega: int = 512,
    n_theta: int = 256,
) -> float:
    """Midpoint-rule integral of S(omega, theta); oracle for lattice energy."""
    dw = omega_max / n_omega
    dth = TWO_PI / n_theta
    w = (np.arange(n_omega) + 0.5) * dw
    th = -np.pi + (np.arange(n_theta) + 0.5) * dth
    s_w = spectrum_value(w, cfg)
    spread = directional_spread(w[:, None], th[None, :], cfg)
    return float(np.sum(s_w[:, None] * spread) * dw * dth)
