"""Spectral initial guesses and damped least-squares fitting of the fringe model.

The model is `lattice.fringe_model`: a decaying Gaussian envelope times two
free-wavevector cosines plus the difference fringe (wavevector constrained
to eta1 - eta2).  Input images are expected reduced and zero-mean; excluded
pixels get zero residual weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np
from scipy.optimize import least_squares, minimize

from .lattice import DetectorImage, LatticeTruth, fringe_model

__all__ = ["FitResult", "model_image", "initial_guess", "fit_lattice", "contrast"]

_PARAM_NAMES = ("eta1x", "eta1y", "eta2x", "eta2y", "alpha1p", "alpha2p",
                "a1", "a2", "a3", "mux", "muy", "s")


@dataclass(frozen=True)
class FitResult:
    """Fringe-model parameters with errors and convergence metadata."""

    eta1: tuple[float, float]
    eta2: tuple[float, float]
    alpha1p: float
    alpha2p: float
    a1: float
    a2: float
    a3: float
    mu: tuple[float, float]
    s: float
    residual_norm: float
    stderr: dict
    converged: bool
    iterations: int

    def __post_init__(self):
        if any(v < 0 for v in self.stderr.values()):
            raise ValueError("standard errors must be non-negative")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["eta1"] = list(self.eta1)
        d["eta2"] = list(self.eta2)
        d["mu"] = list(self.mu)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FitResult":
        d = dict(d)
        d["eta1"] = tuple(d["eta1"])
        d["eta2"] = tuple(d["eta2"])
        d["mu"] = tuple(d["mu"])
        return cls(**d)


def _pack(truth: LatticeTruth) -> np.ndarray:
    return np.array([*truth.eta1, *truth.eta2, truth.alpha1p, truth.alpha2p,
                     truth.a1, truth.a2, truth.a3, *truth.mu, truth.s])


def _model(p: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return fringe_model(x, y, (p[0], p[1]), (p[2], p[3]), p[4], p[5],
                        p[6], p[7], p[8], (p[9], p[10]), p[11])


def model_image(params, width: int, height: int, pitch: float) -> np.ndarray:
    """Evaluate the fringe model of a LatticeTruth or FitResult on a raster."""
    x = np.arange(width) * pitch
    y = np.arange(height) * pitch
    xx, yy = np.meshgrid(x, y, indexing="xy")
    return fringe_model(xx, yy, params.eta1, params.eta2, params.alpha1p,
                        params.alpha2p, params.a1, params.a2, params.a3,
                        params.mu, params.s)


def _refine_peak(mag: np.ndarray, idx: tuple[int, int]) -> tuple[float, float]:
    """Sub-bin peak position by separable parabolic interpolation."""
    out = []
    for axis, i in enumerate(idx):
        n = mag.shape[axis]
        sel = list(idx)
        lo, hi = (i - 1) % n, (i + 1) % n
        sel[axis] = lo
        m_lo = mag[tuple(sel)]
        sel[axis] = hi
        m_hi = mag[tuple(sel)]
        m0 = mag[idx]
        denom = m_lo - 2.0 * m0 + m_hi
        shift = 0.5 * (m_lo - m_hi) / denom if denom != 0 else 0.0
        out.append(i + float(np.clip(shift, -0.5, 0.5)))
    return tuple(out)


def _freq_of_bin(frac_idx: float, n: int, pitch: float) -> float:
    """Signed angular frequency of a (fractional) FFT bin index."""
    if frac_idx > n / 2:
        frac_idx -= n
    return 2.0 * math.pi * frac_idx / (n * pitch)


def initial_guess(image: DetectorImage) -> LatticeTruth:
    """Starting parameters extracted from the spectrum and intensity moments.

    The two strongest non-conjugate off-DC peaks give the wavevectors
    (parabolic sub-bin refinement); phases and amplitudes come from
    projecting the data onto the refined frequencies; the envelope center
    and width come from first and second moments of the squared data.
    """
    vals = np.where(image.mask, image.values, 0.0)
    h, w = vals.shape
    pitch = image.pitch
    xx, yy = image.coords()

    spec = np.fft.fft2(vals)
    mag = np.abs(spec)
    mag[0, 0] = 0.0

    def take_peak(m):
        idx = np.unravel_index(np.argmax(m), m.shape)
        if m[idx] <= 0:
            raise ValueError("fewer than two spectral peaks above the noise")
        return idx

    def blank(m, idx, radius=3):
        for di in range(-radius, radius + 1):
            for dj in range(-radius, radius + 1):
                m[(idx[0] + di) % h, (idx[1] + dj) % w] = 0.0
                m[(-idx[0] + di) % h, (-idx[1] + dj) % w] = 0.0

    work = mag.copy()
    peaks = []
    for _ in range(2):
        idx = take_peak(work)
        blank(work, idx)
        fi, fj = _refine_peak(mag, idx)
        eta = (_freq_of_bin(fj, w, pitch), _freq_of_bin(fi, h, pitch))
        # canonical half plane: eta_y > 0, or eta_y == 0 and eta_x > 0
        if eta[1] < 0 or (eta[1] == 0 and eta[0] < 0):
            eta = (-eta[0], -eta[1])
        peaks.append(eta)

    # envelope moments of the squared data
    power = vals**2
    total = power.sum()
    if total <= 0:
        raise ValueError("image has no power")
    mux = float((xx * power).sum() / total)
    muy = float((yy * power).sum() / total)
    s2 = float(((xx - mux) ** 2 + (yy - muy) ** 2)[...] .ravel()
               @ power.ravel() / total)
    s_guess = math.sqrt(max(s2, pitch**2))

    env = np.exp(-((xx - mux) ** 2 + (yy - muy) ** 2) / s_guess**2)
    env_sum = env.sum()

    def project(eta):
        phase = np.exp(-1j * (eta[0] * xx + eta[1] * yy))
        c = (vals * phase).sum()
        return 2.0 * abs(c) / env_sum, float(np.angle(c))

    (a1, al1), (a2, al2) = (project(e) for e in peaks)
    eta1, eta2 = peaks
    d_eta = (eta1[0] - eta2[0], eta1[1] - eta2[1])
    a3, _ = project(d_eta)
    clip = lambda a: float(np.clip(a, 0.0, 1.0))
    return LatticeTruth(eta1=eta1, eta2=eta2, alpha1p=al1, alpha2p=al2,
                        a1=clip(a1), a2=clip(a2), a3=clip(a3),
                        mu=(mux, muy), s=s_guess, mean_counts=1.0)


def fit_lattice(image: DetectorImage, guess: LatticeTruth,
                weights: np.ndarray | None = None,
                ftol: float = 1e-10, gtol: float = 1e-8,
                max_iterations: int = 500) -> FitResult:
    """Damped least-squares fit of the fringe model to a reduced image.

    ``weights`` defaults to the image mask (1 on included pixels, 0 on
    excluded ones).  Non-convergence within the iteration budget returns the
    best parameters found with ``converged=False``.
    """
    p0 = _pack(guess)
    if not np.all(np.isfinite(p0)):
        raise ValueError("initial guess contains non-finite parameters")
    xx, yy = image.coords()
    if weights is None:
        weights = image.mask.astype(float)
    else:
        weights = np.asarray(weights, dtype=float)
        if weights.shape != image.values.shape:
            raise ValueError("weights shape must match image")
    wflat = np.sqrt(weights).ravel()
    data = image.values.ravel()
    xf, yf = xx.ravel(), yy.ravel()

    def residuals(p):
        return wflat * (_model(p, xf, yf) - data)

    scale = np.abs(p0)
    scale[scale < 1e-3] = 1.0
    res = least_squares(residuals, p0, method="lm", ftol=ftol, gtol=gtol,
                        xtol=1e-12, x_scale=scale,
                        max_nfev=max_iterations * (p0.size + 1))
    converged = res.status > 0

    # linearized standard errors from the Jacobian at the solution
    dof = max(res.fun.size - p0.size, 1)
    variance = 2.0 * res.cost / dof
    try:
        cov = variance * np.linalg.pinv(res.jac.T @ res.jac)
        errs = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    except np.linalg.LinAlgError:
        errs = np.full(p0.size, np.nan)
    stderr = {name: float(e) for name, e in zip(_PARAM_NAMES, errs)}

    p = res.x
    return FitResult(eta1=(p[0], p[1]), eta2=(p[2], p[3]), alpha1p=float(p[4]),
                     alpha2p=float(p[5]), a1=float(p[6]), a2=float(p[7]),
                     a3=float(p[8]), mu=(p[9], p[10]), s=float(p[11]),
                     residual_norm=float(np.linalg.norm(res.fun)),
                     stderr=stderr, converged=converged,
                     iterations=int(res.nfev))


def contrast(fit) -> float:
    """Fringe visibility of the fitted model at the envelope center.

    With the pedestal restored the intensity over one period spans
    [1 + m, 1 + M] where M and m are the extrema of the three-cosine sum at
    unit envelope; the visibility is (M - m) / (M + m + 2).  The maximum is
    always a1 + a2 + a3; the minimum is located on the phase torus
    numerically.
    """
    a1, a2, a3 = fit.a1, fit.a2, fit.a3
    if a1 == a2 == a3 == 0.0:
        return 0.0

    def g(t):
        t1, t2 = t
        return a1 * math.cos(t1) + a2 * math.cos(t2) + a3 * math.cos(t1 - t2)

    grid = np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False)
    t1g, t2g = np.meshgrid(grid, grid, indexing="ij")
    vals = (a1 * np.cos(t1g) + a2 * np.cos(t2g) + a3 * np.cos(t1g - t2g))
    start = np.unravel_index(np.argmin(vals), vals.shape)
    opt = minimize(g, x0=[grid[start[0]], grid[start[1]]], method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 2000})
    lo = float(opt.fun)
    hi = a1 + a2 + a3
    return (hi - lo) / (hi + lo + 2.0)
