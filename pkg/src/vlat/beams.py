"""Beam and interferometer parameters, and the transverse wavefunctions.

All wavefunctions are strictly two dimensional (transverse plane); the
longitudinal factor is normalized away.  A Gaussian beam is parametrized
either by its transverse momentum spreads ``zeta`` or coherence lengths
``sigma = 1/zeta``; the anisotropic envelope is the exact Fourier dual of
the anisotropic momentum-space Gaussian, with the prefactor fixed by unit
norm of ``|psi0|^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BeamParams",
    "InterferometerConfig",
    "ComplexField",
    "eval_psi0_real",
    "eval_psi_t",
    "eval_psi1",
    "psi_t_polar",
    "prism_refraction",
    "transverse_kick",
    "lattice_period",
]


def _wrap_phase(a: float) -> float:
    """Map an angle to (-pi, pi]."""
    w = math.fmod(a + math.pi, 2.0 * math.pi)
    if w <= 0.0:
        w += 2.0 * math.pi
    return w - math.pi


@dataclass(frozen=True)
class BeamParams:
    """Transverse Gaussian beam: longitudinal wavenumber and momentum spreads.

    ``sigma_x = 1/zeta_x`` and ``sigma_y = 1/zeta_y`` hold exactly; the
    coherence lengths are derived properties so the pair can never drift
    apart.  Units are any consistent inverse-length/length pair (the image
    pipeline uses 1/mm and mm).
    """

    k_z: float
    zeta_x: float
    zeta_y: float

    def __post_init__(self):
        for name in ("k_z", "zeta_x", "zeta_y"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be strictly positive, got {v!r}")

    @property
    def sigma_x(self) -> float:
        return 1.0 / self.zeta_x

    @property
    def sigma_y(self) -> float:
        return 1.0 / self.zeta_y

    @property
    def isotropic(self) -> bool:
        return self.zeta_x == self.zeta_y

    @property
    def zeta(self) -> float:
        """Isotropic momentum spread; rejects anisotropic beams."""
        if not self.isotropic:
            raise ValueError("beam is anisotropic; use zeta_x/zeta_y")
        return self.zeta_x

    @property
    def sigma(self) -> float:
        """Isotropic coherence length; rejects anisotropic beams."""
        return 1.0 / self.zeta

    @classmethod
    def isotropic_beam(cls, k_z: float, *, zeta: float | None = None,
                       sigma: float | None = None) -> "BeamParams":
        if (zeta is None) == (sigma is None):
            raise ValueError("give exactly one of zeta or sigma")
        z = zeta if zeta is not None else 1.0 / sigma
        return cls(k_z=k_z, zeta_x=z, zeta_y=z)

    @classmethod
    def from_sigmas(cls, k_z: float, sigma_x: float, sigma_y: float) -> "BeamParams":
        return cls(k_z=k_z, zeta_x=1.0 / sigma_x, zeta_y=1.0 / sigma_y)

    @classmethod
    def from_divergence(cls, k_z: float, theta_x: float, theta_y: float) -> "BeamParams":
        """Momentum spread from small beam divergence: zeta = k_z * theta."""
        return cls(k_z=k_z, zeta_x=k_z * theta_x, zeta_y=k_z * theta_y)


@dataclass(frozen=True)
class InterferometerConfig:
    """Transverse momentum kick and the two loop phases."""

    k_perp: float
    alpha1: float
    alpha2: float

    def __post_init__(self):
        if not (np.isfinite(self.k_perp) and self.k_perp >= 0):
            raise ValueError(f"k_perp must be >= 0, got {self.k_perp!r}")
        if not (np.isfinite(self.alpha1) and np.isfinite(self.alpha2)):
            raise ValueError("loop phases must be finite")

    @property
    def delta_alpha(self) -> float:
        return self.alpha2 - self.alpha1

    def canonical(self) -> "InterferometerConfig":
        """Copy with both phases reduced to (-pi, pi]; cosines unchanged."""
        return InterferometerConfig(
            k_perp=self.k_perp,
            alpha1=_wrap_phase(self.alpha1),
            alpha2=_wrap_phase(self.alpha2),
        )


@dataclass(frozen=True)
class ComplexField:
    """Complex amplitude raster: values[i, j] at x = j*pitch, y = i*pitch."""

    values: np.ndarray
    pitch: float

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2:
            raise ValueError("values must be a 2D array")
        if not (np.isfinite(self.pitch) and self.pitch > 0):
            raise ValueError(f"pitch must be > 0, got {self.pitch!r}")
        object.__setattr__(self, "values", np.asarray(v, dtype=complex))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def coords(self):
        """Meshgrids (X, Y) of pixel-center coordinates."""
        x = np.arange(self.width) * self.pitch
        y = np.arange(self.height) * self.pitch
        return np.meshgrid(x, y, indexing="xy")


def eval_psi0_real(x, y, beam: BeamParams):
    """Transverse envelope amplitude at (x, y); real and positive.

    Isotropic form: sqrt(2/(pi sigma^2)) exp(-rho^2/sigma^2).  The
    anisotropic generalization keeps unit norm of the squared amplitude.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sx, sy = beam.sigma_x, beam.sigma_y
    pref = math.sqrt(2.0 / (math.pi * sx * sy))
    return pref * np.exp(-(x / sx) ** 2 - (y / sy) ** 2)


def eval_psi_t(x, y, beam: BeamParams, cfg: InterferometerConfig):
    """Two-arm test wavefunction (1/sqrt2) psi0 (e^{i k_perp y} + e^{i da} e^{i k_perp x})."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    kp = cfg.k_perp
    da = cfg.delta_alpha
    return (eval_psi0_real(x, y, beam) / math.sqrt(2.0)
            * (np.exp(1j * kp * y) + np.exp(1j * da) * np.exp(1j * kp * x)))


def eval_psi1(x, y, beam: BeamParams, cfg: InterferometerConfig):
    """Three-arm composite wavefunction (reference arm plus two kicked arms)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    kp = cfg.k_perp
    return (eval_psi0_real(x, y, beam) / math.sqrt(3.0)
            * (1.0
               + np.exp(1j * cfg.alpha1) * np.exp(1j * kp * y)
               + np.exp(1j * cfg.alpha2) * np.exp(1j * kp * x)))


def psi_t_polar(rho, phi, beam: BeamParams, cfg: InterferometerConfig):
    """Test wavefunction sampled on polar coordinates (phi from the +x axis)."""
    rho = np.asarray(rho, dtype=float)
    phi = np.asarray(phi, dtype=float)
    return eval_psi_t(rho * np.cos(phi), rho * np.sin(phi), beam, cfg)


def prism_refraction(wavelength: float, sld: float, wedge_angle: float) -> float:
    """Deflection angle of a thin prism of the given wedge angle.

    gamma = (lambda^2 * sld / 2 pi) * tan(wedge_angle).  ``wavelength`` and
    ``sld`` must use reciprocal length units (e.g. Angstrom and 1/Angstrom^2);
    ``wedge_angle`` is in radians and must lie in (0, pi/2).
    """
    if wavelength <= 0:
        raise ValueError("wavelength must be positive")
    if sld <= 0:
        raise ValueError("scattering-length density must be positive")
    if not (0.0 < wedge_angle < math.pi / 2):
        raise ValueError("wedge_angle must lie in (0, pi/2)")
    return wavelength**2 * sld / (2.0 * math.pi) * math.tan(wedge_angle)


def transverse_kick(k_z: float, gamma: float) -> float:
    """Transverse momentum shift k_perp = k_z * gamma."""
    return k_z * gamma


def lattice_period(k_z: float, gamma: float) -> float:
    """Fringe period 2 pi / (k_z * gamma) of a single kicked arm."""
    kp = transverse_kick(k_z, gamma)
    if kp <= 0:
        raise ValueError("k_z * gamma must be positive")
    return 2.0 * math.pi / kp
