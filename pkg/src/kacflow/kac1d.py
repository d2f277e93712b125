"""Exact law of the 1D telegraph (Kac) process started at the origin.

At time t the law consists of two atoms of weight e^{-at}/2 at the wave
fronts +-ct and an absolutely continuous part on (-ct, ct). This module
evaluates the continuous density, the signed (right/left-moving)
marginals, the probability flux, the analytic velocity field, and the
CDF/quantile pair needed by the inverse-transform sampler.

All densities are evaluated in the scaled form
e^{-(at - beta*r)} * [e^{-beta*r} I(beta*r)] with beta = a/c and
r = sqrt(c^2 t^2 - x^2), which is overflow-free even for very large at.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .specfun import bessel_i0e, bessel_i1e_over_z, bessel_ratio_i0_over_i1

# Quantile table resolution per (a, c, t); linear interpolation between
# knots is refined by bisection against local Gauss-Legendre quadrature.
_TABLE_KNOTS = 4096
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
# Relative tolerance for treating |x| as exactly on the support boundary.
_BOUNDARY_RTOL = 1e-12


@dataclass(frozen=True)
class KacParams:
    """Damping rate a (1/time) and propagation speed c (space/time)."""

    a: float
    c: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and self.a > 0):
            raise ValueError(f"damping a must be positive and finite, got {self.a}")
        if not (np.isfinite(self.c) and self.c > 0):
            raise ValueError(f"speed c must be positive and finite, got {self.c}")

    @property
    def beta(self) -> float:
        return self.a / self.c


def _check_time(t):
    if not (np.isfinite(t) and t > 0):
        raise ValueError(f"time must be positive and finite, got {t}")


def atom_weight(params: KacParams, t: float) -> float:
    """Weight e^{-at}/2 of each surviving wave-front atom at +-ct."""
    _check_time(t)
    return 0.5 * np.exp(-params.a * t)


def density_cont(params: KacParams, t: float, x):
    """Continuous part of the density at x; zero outside [-ct, ct].

    At |x| = ct the interior limit is returned (the atom lives there
    separately). Vectorized over x.
    """
    _check_time(t)
    a, c, b = params.a, params.c, params.beta
    x = np.asarray(x, dtype=np.float64)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    ct = c * t
    inside = np.abs(x) <= ct
    r = np.sqrt(np.maximum(ct * ct - x * x, 0.0))
    br = b * r
    # u~ = 0.5 e^{-(at-br)} [ b^2 ct (i1e(br)/br) + b i0e(br) ]
    bracket = b * b * ct * bessel_i1e_over_z(br) + b * bessel_i0e(br)
    out = np.where(inside, 0.5 * np.exp(-(a * t - br)) * bracket, 0.0)
    return out[0] if scalar else out


def log_density_cont(params: KacParams, t: float, x):
    """Log of the continuous density; -inf outside the support.

    Avoids the underflow of density_cont at large at, which matters when
    many conditional log-densities are combined (marginal velocity).
    """
    _check_time(t)
    a, c, b = params.a, params.c, params.beta
    x = np.asarray(x, dtype=np.float64)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    ct = c * t
    inside = np.abs(x) <= ct
    r = np.sqrt(np.maximum(ct * ct - x * x, 0.0))
    br = b * r
    bracket = b * b * ct * bessel_i1e_over_z(br) + b * bessel_i0e(br)
    out = np.where(inside, np.log(0.5) - (a * t - br) + np.log(bracket), -np.inf)
    return out[0] if scalar else out


def densities_signed(params: KacParams, t: float, x):
    """Densities (u+, u-) of the initially right/left-moving process.

    Requires |x| <= ct; satisfies (u+ + u-)/2 = density_cont.
    """
    _check_time(t)
    a, c, b = params.a, params.c, params.beta
    x = np.asarray(x, dtype=np.float64)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    ct = c * t
    if np.any(np.abs(x) > ct * (1 + _BOUNDARY_RTOL)):
        raise ValueError("densities_signed: |x| must be <= ct")
    r = np.sqrt(np.maximum(ct * ct - x * x, 0.0))
    br = b * r
    scale = 0.5 * np.exp(-(a * t - br))
    i1_term = b * b * bessel_i1e_over_z(br)
    i0_term = b * bessel_i0e(br)
    up = scale * ((ct + x) * i1_term + i0_term)
    um = scale * ((ct - x) * i1_term + i0_term)
    if scalar:
        return up[0], um[0]
    return up, um


def flux(params: KacParams, t: float, x):
    """Signed probability flux J(t, x) = (c/2)(u+ - u-), |x| < ct."""
    _check_time(t)
    a, c, b = params.a, params.c, params.beta
    x = np.asarray(x, dtype=np.float64)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    ct = c * t
    if np.any(np.abs(x) >= ct):
        raise ValueError("flux: |x| must be < ct")
    r = np.sqrt(ct * ct - x * x)
    br = b * r
    out = 0.5 * np.exp(-(a * t - br)) * b * b * c * x * bessel_i1e_over_z(br)
    return out[0] if scalar else out


def velocity(params: KacParams, t: float, x):
    """Analytic velocity field of the law started at 0.

    x / (t + (r/c) I0(beta r)/I1(beta r)) strictly inside the support,
    exactly +-c on the wave fronts, and extended as c*sign(x) outside
    (the outside value is a modeling choice; it keeps ODE solvers that
    overshoot the front bounded).
    """
    _check_time(t)
    c = params.c
    b = params.beta
    x = np.asarray(x, dtype=np.float64)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    ct = c * t
    out = c * np.sign(x)
    interior = np.abs(x) < ct * (1 - _BOUNDARY_RTOL)
    if np.any(interior):
        xi = x[interior]
        r = np.sqrt(ct * ct - xi * xi)
        ratio = bessel_ratio_i0_over_i1(b * r)
        out[interior] = xi / (t + (r / c) * ratio)
    return out[0] if scalar else out


class KacLaw1D:
    """The full time-t law (atoms + continuous part) with CDF/quantile.

    Immutable after construction; the quantile table for the folded
    continuous part is built once and then shared.
    """

    def __init__(self, params: KacParams, t: float):
        _check_time(t)
        self.params = params
        self.t = float(t)
        self.atom_weight = atom_weight(params, t)
        self.support_radius = params.c * t
        self._build_table()

    def _build_table(self):
        # cumulative integral of u~ on [0, ct] by per-interval 8-point
        # Gauss-Legendre; the integrand is smooth up to the boundary
        ct = self.support_radius
        knots = np.linspace(0.0, ct, _TABLE_KNOTS + 1)
        mid = 0.5 * (knots[1:] + knots[:-1])
        half = 0.5 * (knots[1:] - knots[:-1])
        pts = mid[:, None] + half[:, None] * _GL_NODES[None, :]
        vals = density_cont(self.params, self.t, pts.ravel()).reshape(pts.shape)
        increments = half * (vals * _GL_WEIGHTS[None, :]).sum(axis=1)
        cum = np.concatenate([[0.0], np.cumsum(increments)])
        self._knots = knots
        self._cum = cum
        # half of the continuous mass; should equal (1 - e^{-at})/2
        self.half_cont_mass = cum[-1]

    def cont_cdf_folded(self, x):
        """Integral of u~ over [0, x] for x in [0, ct], vectorized."""
        x = np.clip(np.asarray(x, dtype=np.float64), 0.0, self.support_radius)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        idx = np.clip(np.searchsorted(self._knots, x, side="right") - 1, 0,
                      _TABLE_KNOTS - 1)
        lo = self._knots[idx]
        mid = 0.5 * (lo + x)
        half = 0.5 * (x - lo)
        pts = mid[:, None] + half[:, None] * _GL_NODES[None, :]
        vals = density_cont(self.params, self.t, pts.ravel()).reshape(pts.shape)
        out = self._cum[idx] + half * (vals * _GL_WEIGHTS[None, :]).sum(axis=1)
        return out[0] if scalar else out

    def cdf(self, x):
        """Right-continuous CDF of the full measure including atoms."""
        x = np.asarray(x, dtype=np.float64)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        ct = self.support_radius
        w = self.atom_weight
        out = np.empty_like(x)
        below = x < -ct
        above = x >= ct
        mid = ~below & ~above
        out[below] = 0.0
        out[above] = 1.0
        if np.any(mid):
            xm = x[mid]
            folded = self.cont_cdf_folded(np.abs(xm))
            out[mid] = w + self.half_cont_mass + np.sign(xm) * folded
        return out[0] if scalar else out

    def quantile_folded(self, p):
        """Quantile of the folded, normalized continuous part, p in [0,1].

        Table lookup plus bisection against local quadrature; absolute
        probability error <= 1e-12 of the half continuous mass.
        """
        p = np.asarray(p, dtype=np.float64)
        scalar = p.ndim == 0
        p = np.atleast_1d(p)
        if np.any((p < 0) | (p > 1)):
            raise ValueError("quantile_folded: p must lie in [0, 1]")
        target = p * self.half_cont_mass
        idx = np.clip(np.searchsorted(self._cum, target, side="right") - 1, 0,
                      _TABLE_KNOTS - 1)
        lo = self._knots[idx].copy()
        hi = self._knots[idx + 1].copy()
        base = self._cum[idx]
        # bisection on F(x) = base + GL8(knot, x); 50 rounds reach the
        # spacing floor of the table cell
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            f = self.cont_cdf_folded(mid)
            too_low = f < target
            lo = np.where(too_low, mid, lo)
            hi = np.where(too_low, hi, mid)
        out = 0.5 * (lo + hi)
        return out[0] if scalar else out

    def inv_cdf(self, u):
        """Generalized inverse of cdf; atoms map from their plateaus."""
        u = np.asarray(u, dtype=np.float64)
        scalar = u.ndim == 0
        u = np.atleast_1d(u)
        if np.any((u < 0) | (u > 1)):
            raise ValueError("inv_cdf: u must lie in [0, 1]")
        ct = self.support_radius
        w = self.atom_weight
        out = np.empty_like(u)
        left = u <= w
        right = u >= 1.0 - w
        mid = ~left & ~right
        out[left] = -ct
        out[right] = ct
        if np.any(mid):
            um = u[mid]
            # signed continuous coordinate via the folded quantile
            s = um - 0.5
            frac = np.clip(np.abs(s) / max(self.half_cont_mass, 1e-300), 0.0, 1.0)
            out[mid] = np.sign(s) * self.quantile_folded(frac)
        return out[0] if scalar else out


@lru_cache(maxsize=64)
def _law_cache(a: float, c: float, t: float) -> KacLaw1D:
    return KacLaw1D(KacParams(a, c), t)


def get_law(params: KacParams, t: float) -> KacLaw1D:
    """Cached law (with its quantile table) for repeated sampling."""
    return _law_cache(params.a, params.c, float(t))


def cdf(params: KacParams, t: float, x):
    return get_law(params, t).cdf(x)


def inv_cdf(params: KacParams, t: float, u):
    return get_law(params, t).inv_cdf(u)


def cont_mass_quadrature(params: KacParams, t: float, epsabs: float = 1e-10) -> float:
    """Adaptive quadrature of the continuous density over its support.

    Independent of the table machinery; used for mass-conservation checks.
    """
    _check_time(t)
    ct = params.c * t
    val, _ = quad(lambda x: density_cont(params, t, x), -ct, ct,
                  epsabs=epsabs, epsrel=1e-12, limit=200)
    return val
