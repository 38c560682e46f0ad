"""Detector-image reduction pipeline.

Stage order: bin -> flat_field -> remove_vertical_drift ->
normalize_zero_mean -> fourier_denoise.  Each stage is a pure array
transform; the exclusion mask set by flat-fielding propagates through every
later stage and into the fitter's residual weighting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import DetectorImage, NORMALIZED

__all__ = [
    "ReductionConfig",
    "bin_image",
    "flat_field",
    "remove_vertical_drift",
    "normalize_zero_mean",
    "fourier_denoise",
    "reduce_pipeline",
]


@dataclass(frozen=True)
class ReductionConfig:
    bin_factor: int = 10
    poly_degree: int = 2
    noise_floor: float = 0.2

    def __post_init__(self):
        if self.bin_factor < 1:
            raise ValueError("bin_factor must be >= 1")
        if self.poly_degree < 0:
            raise ValueError("poly_degree must be >= 0")
        if not (0.0 <= self.noise_floor < 1.0):
            raise ValueError("noise_floor must lie in [0, 1)")


def bin_image(image: DetectorImage, factor: int) -> DetectorImage:
    """Sum factor x factor blocks; trailing partial blocks are cropped.

    Cropping (rather than padding) avoids biasing edge fringes.  The output
    pitch is the input pitch times the factor; a binned pixel is valid only
    if every constituent pixel was valid.
    """
    if factor < 1:
        raise ValueError("factor must be >= 1")
    h, w = image.values.shape
    if factor > h or factor > w:
        raise ValueError(f"factor {factor} exceeds image dimensions {h}x{w}")
    if factor == 1:
        return image.with_values(image.values.copy())
    hb, wb = h // factor, w // factor
    v = image.values[:hb * factor, :wb * factor]
    m = image.mask[:hb * factor, :wb * factor]
    summed = v.reshape(hb, factor, wb, factor).sum(axis=(1, 3))
    mask = m.reshape(hb, factor, wb, factor).all(axis=(1, 3))
    return DetectorImage(values=summed, pitch=image.pitch * factor,
                         kind=image.kind, mask=mask)


def flat_field(image: DetectorImage, reference: DetectorImage,
               guard_fraction: float = 0.01) -> DetectorImage:
    """Pixelwise ratio to a fringe-free reference.

    Reference pixels below ``guard_fraction`` of the reference mean are
    excluded from the output mask instead of causing a division error.
    """
    if image.values.shape != reference.values.shape:
        raise ValueError("image and reference dimensions differ")
    ref = reference.values
    guard = guard_fraction * ref[reference.mask].mean()
    ok = image.mask & reference.mask & (ref >= guard) & (ref > 0)
    out = np.zeros_like(image.values)
    np.divide(image.values, ref, out=out, where=ok)
    return DetectorImage(values=out, pitch=image.pitch, kind=NORMALIZED, mask=ok)


def remove_vertical_drift(image: DetectorImage, poly_degree: int = 2) -> DetectorImage:
    """Divide out a polynomial fitted to the row-mean intensity profile."""
    h = image.values.shape[0]
    if poly_degree >= h:
        raise ValueError("poly_degree must be smaller than the number of rows")
    rows_valid = image.mask.any(axis=1)
    if not rows_valid.any():
        raise ValueError("no valid rows to fit")
    y = np.arange(h, dtype=float)
    means = np.array([image.values[i][image.mask[i]].mean() if rows_valid[i] else np.nan
                      for i in range(h)])
    poly = np.polynomial.Polynomial.fit(y[rows_valid], means[rows_valid], poly_degree)
    profile = poly(y)
    if np.any(profile <= 0):
        raise ValueError("fitted vertical profile is not positive")
    return image.with_values(image.values / profile[:, None], kind=NORMALIZED)


def normalize_zero_mean(image: DetectorImage) -> DetectorImage:
    """Map to I/<I> - 1 over valid pixels; output mean is zero.

    Inputs that are already zero-mean (to rounding) are only re-centered,
    which makes the stage idempotent.
    """
    vals = image.values
    m = vals[image.mask].mean()
    scale = np.abs(vals[image.mask]).max() if image.mask.any() else 0.0
    if abs(m) <= 1e-9 * max(scale, 1.0):
        out = vals - m
    else:
        out = vals / m - 1.0
    return image.with_values(out, kind=NORMALIZED)


def fourier_denoise(image: DetectorImage, noise_floor: float) -> DetectorImage:
    """Zero spectral content below ``noise_floor`` times the max off-DC magnitude.

    Uses the real-input transform, so the output is exactly real and the
    zeroing is conjugate-symmetric by construction.  The DC coefficient is
    always retained.
    """
    if not (0.0 <= noise_floor < 1.0):
        raise ValueError("noise_floor must lie in [0, 1)")
    vals = np.where(image.mask, image.values, 0.0)
    spec = np.fft.rfft2(vals)
    mag = np.abs(spec)
    off_dc = mag.copy()
    off_dc[0, 0] = 0.0
    peak = off_dc.max()
    if noise_floor > 0.0 and peak > 0.0:
        keep = mag >= noise_floor * peak
        keep[0, 0] = True
        spec = np.where(keep, spec, 0.0)
    out = np.fft.irfft2(spec, s=vals.shape)
    return image.with_values(out, kind=NORMALIZED)


def reduce_pipeline(image: DetectorImage, reference: DetectorImage,
                    config: ReductionConfig):
    """Run the five reduction stages in the only supported order.

    Returns the final image and an ordered dict of per-stage outputs.
    """
    stages: dict[str, DetectorImage] = {}
    binned = bin_image(image, config.bin_factor)
    stages["binned"] = binned
    ref_binned = bin_image(reference, config.bin_factor)
    flat = flat_field(binned, ref_binned)
    stages["flat_fielded"] = flat
    drift = remove_vertical_drift(flat, config.poly_degree)
    stages["drift_removed"] = drift
    norm = normalize_zero_mean(drift)
    stages["normalized"] = norm
    final = fourier_denoise(norm, config.noise_floor)
    stages["denoised"] = final
    return final, stages
