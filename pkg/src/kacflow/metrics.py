"""Validation metrics: GMM negative log-likelihood, mode coverage,
1D empirical Wasserstein-2, and the L2 distance between the smoothed
telegraph law and the matching heat-kernel solution.
"""

from __future__ import annotations

import numpy as np

from . import kac1d
from .kac1d import KacParams

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def gmm_nll(samples, target) -> float:
    """Mean negative log density of samples under a Gaussian-mixture target."""
    samples = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    if samples.size == 0:
        raise ValueError("gmm_nll: empty sample set")
    return float(-target.log_density(samples).mean())


def mode_coverage(samples, modes, radius: float):
    """Nearest-mode assignment statistics.

    Returns (fraction of samples within radius of their nearest mode,
    number of modes receiving at least one within-radius sample,
    per-mode within-radius counts).
    """
    if radius <= 0:
        raise ValueError("mode_coverage: radius must be positive")
    modes = np.atleast_2d(np.asarray(modes, dtype=np.float64))
    if modes.size == 0:
        raise ValueError("mode_coverage: empty mode list")
    samples = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    d2 = ((samples[:, None, :] - modes[None, :, :]) ** 2).sum(axis=2)
    nearest = d2.argmin(axis=1)
    within = np.sqrt(d2[np.arange(len(samples)), nearest]) <= radius
    counts = np.bincount(nearest[within], minlength=len(modes))
    return float(within.mean()), int((counts > 0).sum()), counts


def empirical_w2_1d(samples_a, samples_b) -> float:
    """W2 between 1D empirical measures via the sorted-sample coupling."""
    a = np.sort(np.asarray(samples_a, dtype=np.float64).ravel())
    b = np.sort(np.asarray(samples_b, dtype=np.float64).ravel())
    if a.size != b.size or a.size == 0:
        raise ValueError("empirical_w2_1d: need equal, nonempty sample counts")
    return float(np.sqrt(np.mean((a - b) ** 2)))


def _gauss_pdf(x, sigma):
    return np.exp(-0.5 * (x / sigma) ** 2) / (sigma * np.sqrt(2 * np.pi))


def _panel_points(lo, hi, n_panels):
    """Composite Gauss-Legendre nodes and weights on [lo, hi]."""
    edges = np.linspace(lo, hi, n_panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    pts = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    wts = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return pts, wts


def _convolved_density(params: KacParams, t: float, sigma0: float, x,
                       n_panels: int):
    """(f0 * mu_t)(x) for f0 = N(0, sigma0^2): exact atom terms plus
    composite quadrature of the Gaussian against the continuous part.
    """
    x = np.asarray(x, dtype=np.float64)
    ct = params.c * t
    w = kac1d.atom_weight(params, t)
    out = w * (_gauss_pdf(x - ct, sigma0) + _gauss_pdf(x + ct, sigma0))
    ypts, ywts = _panel_points(-ct, ct, n_panels)
    dens = kac1d.density_cont(params, t, ypts)
    # chunk the outer points; the (x, y) kernel matrix can be large
    for lo in range(0, x.size, 2048):
        blk = x[lo:lo + 2048]
        kern = _gauss_pdf(blk[:, None] - ypts[None, :], sigma0)
        out[lo:lo + 2048] += kern @ (dens * ywts)
    return out


def kac_heat_l2(params: KacParams, sigma0: float, t: float,
                tol: float = 1e-8) -> float:
    """L2(R) distance between the Gaussian-smoothed telegraph law and the
    heat solution N(0, sigma0^2 + (c^2/a) t) it converges to.

    Both integrals (the y-convolution and the outer x-integral) are
    composite Gauss-Legendre, refined by doubling until the norm moves by
    less than tol. Non-convergence raises with the achieved tolerance.
    """
    if not sigma0 > 0:
        raise ValueError("sigma0 must be positive")
    if not t > 0:
        raise ValueError("t must be positive")
    ct = params.c * t
    var_heat = sigma0**2 + (params.c**2 / params.a) * t
    L = ct + 8.0 * max(sigma0, np.sqrt(var_heat))
    # resolution floor: several panels per sigma0 across the support
    base = max(64, int(np.ceil(2 * L / sigma0)))
    prev = None
    for level in range(5):
        n_out = base * 2**level
        n_in = base * 2**level
        xpts, xwts = _panel_points(-L, L, n_out)
        u = _convolved_density(params, t, sigma0, xpts, n_in)
        h = _gauss_pdf(xpts, np.sqrt(var_heat))
        err = float(np.sqrt(((h - u) ** 2 * xwts).sum()))
        if prev is not None and abs(err - prev) < tol:
            return err
        change = abs(err - prev) if prev is not None else np.inf
        prev = err
    raise RuntimeError(
        f"kac_heat_l2 did not converge to {tol}; last change {change}")
