"""Macroscopic Moire-lattice intensity and synthetic detector images.

Image convention: ``values[i, j]`` is the pixel centered at ``x = j*pitch``,
``y = i*pitch``.  Synthetic counts are Poisson with one child generator per
row spawned from the seed, so row-parallel and serial synthesis are
bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .beams import InterferometerConfig

__all__ = [
    "DetectorImage",
    "LatticeTruth",
    "intensity_ideal",
    "fringe_model",
    "expected_intensity",
    "synthesize_image",
    "flat_image",
]

RAW_COUNTS = "raw-counts"
NORMALIZED = "normalized"


@dataclass(frozen=True)
class DetectorImage:
    """2D scalar raster with pixel pitch, plus a validity mask.

    ``kind`` is "raw-counts" (non-negative integers) or "normalized".
    ``mask`` is True on pixels that downstream stages may use; treated as
    immutable after construction.
    """

    values: np.ndarray
    pitch: float
    kind: str = RAW_COUNTS
    mask: np.ndarray | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ValueError("values must be a 2D array")
        if not (np.isfinite(self.pitch) and self.pitch > 0):
            raise ValueError(f"pitch must be > 0, got {self.pitch!r}")
        if self.kind not in (RAW_COUNTS, NORMALIZED):
            raise ValueError(f"unknown image kind {self.kind!r}")
        if self.kind == RAW_COUNTS:
            if np.any(v < 0) or np.any(v != np.floor(v)):
                raise ValueError("raw-counts values must be integers >= 0")
        m = self.mask
        if m is None:
            m = np.ones(v.shape, dtype=bool)
        else:
            m = np.asarray(m, dtype=bool)
            if m.shape != v.shape:
                raise ValueError("mask shape must match values")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "mask", m)

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

    def with_values(self, values: np.ndarray, kind: str | None = None,
                    mask: np.ndarray | None = None,
                    pitch: float | None = None) -> "DetectorImage":
        return DetectorImage(
            values=values,
            pitch=self.pitch if pitch is None else pitch,
            kind=self.kind if kind is None else kind,
            mask=self.mask if mask is None else mask,
        )


@dataclass(frozen=True)
class LatticeTruth:
    """Ground-truth parameters of the fringe model.

    Two free fringe wavevectors plus the difference fringe; the intensity is
    ``mean_counts * (1 + envelope * (a1 cos(eta1.r + a1') + a2 cos(eta2.r +
    a2') + a3 cos((eta1-eta2).r + a1'-a2')))`` with a decaying Gaussian
    envelope of width ``s`` about ``mu``.
    """

    eta1: tuple[float, float]
    eta2: tuple[float, float]
    alpha1p: float
    alpha2p: float
    a1: float
    a2: float
    a3: float
    mu: tuple[float, float]
    s: float
    mean_counts: float = 1.0

    def __post_init__(self):
        for name in ("a1", "a2", "a3"):
            a = getattr(self, name)
            if not (0.0 <= a <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {a!r}")
        if self.s <= 0:
            raise ValueError("envelope width s must be positive")
        if self.mean_counts <= 0:
            raise ValueError("mean_counts must be positive")
        object.__setattr__(self, "eta1", tuple(float(c) for c in self.eta1))
        object.__setattr__(self, "eta2", tuple(float(c) for c in self.eta2))
        object.__setattr__(self, "mu", tuple(float(c) for c in self.mu))


def intensity_ideal(x, y, cfg: InterferometerConfig):
    """Ideal three-loop interference intensity at the detector.

    (1/3)[3 + 2cos(k y + a1) + 2cos(k x + a2) + 2cos(k (x-y) + da)]; equal to
    |1 + e^{i(k y + a1)} + e^{i(k x + a2)}|^2 / 3 and therefore never
    negative.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    kp = cfg.k_perp
    return (3.0
            + 2.0 * np.cos(kp * y + cfg.alpha1)
            + 2.0 * np.cos(kp * x + cfg.alpha2)
            + 2.0 * np.cos(kp * (x - y) + cfg.delta_alpha)) / 3.0


def fringe_model(x, y, eta1, eta2, alpha1p, alpha2p, a1, a2, a3, mu, s):
    """Zero-pedestal fringe model: Gaussian envelope times three cosines.

    The third fringe is constrained to the difference wavevector
    ``eta1 - eta2`` with phase ``alpha1p - alpha2p``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    e1x, e1y = eta1
    e2x, e2y = eta2
    mux, muy = mu
    envelope = np.exp(-((x - mux) ** 2 + (y - muy) ** 2) / s**2)
    return envelope * (
        a1 * np.cos(e1x * x + e1y * y + alpha1p)
        + a2 * np.cos(e2x * x + e2y * y + alpha2p)
        + a3 * np.cos((e1x - e2x) * x + (e1y - e2y) * y + (alpha1p - alpha2p)))


def _illumination_profile(illumination, height: int, pitch: float):
    """Column vector of the smooth illumination profile along y.

    ``illumination`` is a polynomial coefficient sequence (c0, c1, ...)
    evaluated in the normalized coordinate y_hat in [-1, 1]; None means flat.
    """
    if illumination is None:
        return np.ones((height, 1))
    coeffs = np.asarray(illumination, dtype=float)
    y = np.arange(height) * pitch
    half = 0.5 * (height - 1) * pitch
    y_hat = (y - half) / half if half > 0 else np.zeros_like(y)
    profile = np.polynomial.polynomial.polyval(y_hat, coeffs)
    if np.any(profile <= 0):
        raise ValueError("illumination profile must stay positive")
    return profile[:, None]


def expected_intensity(truth: LatticeTruth, width: int, height: int,
                       pitch: float, illumination=None) -> np.ndarray:
    """Per-pixel expected counts of the lattice image (pedestal of 1)."""
    x = np.arange(width) * pitch
    y = np.arange(height) * pitch
    xx, yy = np.meshgrid(x, y, indexing="xy")
    fringes = fringe_model(xx, yy, truth.eta1, truth.eta2, truth.alpha1p,
                           truth.alpha2p, truth.a1, truth.a2, truth.a3,
                           truth.mu, truth.s)
    lam = truth.mean_counts * (1.0 + fringes)
    return lam * _illumination_profile(illumination, height, pitch)


def _row_seeded_poisson(lam: np.ndarray, seed: int) -> np.ndarray:
    """Poisson counts with one spawned generator per row (order-independent)."""
    children = np.random.SeedSequence(seed).spawn(lam.shape[0])
    out = np.empty(lam.shape, dtype=np.int64)
    for i, child in enumerate(children):
        out[i] = np.random.Generator(np.random.PCG64(child)).poisson(lam[i])
    return out


def synthesize_image(truth: LatticeTruth, width: int, height: int,
                     pitch: float, seed: int,
                     illumination=None) -> DetectorImage:
    """Simulated raw-counts lattice image; same seed gives identical rasters."""
    lam = expected_intensity(truth, width, height, pitch, illumination)
    if np.any(lam < 0):
        raise ValueError("expected intensity is negative; fringe amplitudes too large")
    counts = _row_seeded_poisson(lam, seed)
    return DetectorImage(values=counts.astype(float), pitch=pitch, kind=RAW_COUNTS)


def flat_image(width: int, height: int, pitch: float, mean_counts: float,
               seed: int, illumination=None) -> DetectorImage:
    """Fringe-free reference image (beam on, no momentum kicks)."""
    if mean_counts <= 0:
        raise ValueError("mean_counts must be positive")
    lam = mean_counts * np.broadcast_to(
        _illumination_profile(illumination, height, pitch), (height, width))
    counts = _row_seeded_poisson(np.ascontiguousarray(lam), seed)
    return DetectorImage(values=counts.astype(float), pitch=pitch, kind=RAW_COUNTS)
