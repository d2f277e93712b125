"""Velocity fields: conditional telegraph (VE), mean-reverting (VP),
diffusion and flow-matching baselines, the exact marginal field for
finite-support targets, and Monte Carlo velocity-norm estimation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import logsumexp

from . import kac1d
from .kac1d import KacParams


class TruncationError(ValueError):
    """Raised when the diffusion reverse field is evaluated past 1 - eps."""


class OutsideSupportError(ValueError):
    """All conditional densities underflowed at the evaluation point."""


@dataclass(frozen=True)
class Schedule:
    """Time schedule (f, g) with derivatives and Lipschitz constants.

    f decays the data contribution from 1 to 0, g maps flow time to noise
    time from 0 to 1.
    """

    kind: str
    f: Callable[[float], float]
    g: Callable[[float], float]
    df: Callable[[float], float]
    dg: Callable[[float], float]
    lip_f: float
    lip_g: float

    def __post_init__(self):
        for t0, fn, val in [(0.0, self.f, 1.0), (1.0, self.f, 0.0),
                            (0.0, self.g, 0.0), (1.0, self.g, 1.0)]:
            if abs(fn(t0) - val) > 1e-12:
                raise ValueError(f"schedule endpoint violated: {self.kind}")


def schedule_linear() -> Schedule:
    """(f, g) = (1 - t, t)."""
    return Schedule("linear_t", lambda t: 1.0 - t, lambda t: t,
                    lambda t: -1.0, lambda t: 1.0, 1.0, 1.0)


def schedule_quadratic() -> Schedule:
    """(f, g) = (1 - t, t^2), the flow-matching pair."""
    return Schedule("linear_tsq", lambda t: 1.0 - t, lambda t: t * t,
                    lambda t: -1.0, lambda t: 2.0 * t, 1.0, 2.0)


def make_schedule(kind: str) -> Schedule:
    if kind == "linear_t":
        return schedule_linear()
    if kind == "linear_tsq":
        return schedule_quadratic()
    raise ValueError(f"unknown schedule kind {kind!r}")


@dataclass(frozen=True)
class TargetSpec:
    """Data distribution: isotropic Gaussian mixture or finite point set."""

    kind: str  # "gmm" | "empirical"
    dim: int
    weights: np.ndarray
    means: np.ndarray  # (K, dim) modes or support points
    sigma: float = 0.0  # shared isotropic std for gmm

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        m = np.asarray(self.means, dtype=np.float64)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", m)
        if self.kind not in ("gmm", "empirical"):
            raise ValueError(f"unknown target kind {self.kind!r}")
        if abs(w.sum() - 1.0) > 1e-9 or np.any(w < 0):
            raise ValueError("weights must be nonnegative and sum to 1")
        if m.shape != (len(w), self.dim):
            raise ValueError("means shape mismatch")
        if self.kind == "gmm" and not self.sigma > 0:
            raise ValueError("gmm requires sigma > 0")

    def sample(self, n: int, rng) -> np.ndarray:
        gen = rng.generator
        idx = gen.choice(len(self.weights), size=n, p=self.weights)
        pts = self.means[idx]
        if self.kind == "gmm":
            pts = pts + gen.normal(0.0, self.sigma, size=pts.shape)
        return pts

    def log_density(self, x: np.ndarray) -> np.ndarray:
        if self.kind != "gmm":
            raise ValueError("log_density only defined for gmm targets")
        x = np.atleast_2d(x)
        d2 = ((x[:, None, :] - self.means[None, :, :]) ** 2).sum(axis=2)
        comp = (np.log(self.weights)[None, :]
                - 0.5 * d2 / self.sigma ** 2
                - 0.5 * self.dim * np.log(2 * np.pi * self.sigma ** 2))
        return logsumexp(comp, axis=1)


def grid_gmm_target(sigma: float = 1e-4) -> TargetSpec:
    """The 3x3 grid of near-Dirac modes on {-1, 0, 1}^2, uniform weights."""
    means = np.array([(u1, u2) for u1 in (-1.0, 0.0, 1.0)
                      for u2 in (-1.0, 0.0, 1.0)])
    return TargetSpec("gmm", 2, np.full(9, 1 / 9), means, sigma)


def two_point_target(m: float = 1.0, dim: int = 1) -> TargetSpec:
    pts = np.zeros((2, dim))
    pts[0, 0] = -m
    pts[1, 0] = m
    return TargetSpec("empirical", dim, np.array([0.5, 0.5]), pts)


def kac_cond_velocity(params: KacParams, t: float, x, x0) -> np.ndarray:
    """Conditional velocity of the VE process started at x0, componentwise.

    Each component is the 1D analytic field evaluated on the shifted
    coordinate x^i - x0^i. x may carry a leading batch dimension.
    """
    x = np.asarray(x, dtype=np.float64)
    x0 = np.asarray(x0, dtype=np.float64)
    shifted = x - x0  # broadcasting catches dimension mismatch
    return kac1d.velocity(params, t, shifted)


def meanrev_cond_velocity(params: KacParams, schedule: Schedule, t: float,
                          x, x0) -> np.ndarray:
    """Conditional velocity of the mean-reverting process on t in (0, 1)."""
    gt = schedule.g(t)
    if t > 0 and gt <= 0:
        raise ValueError("degenerate schedule: g(t) = 0 at t > 0")
    x = np.asarray(x, dtype=np.float64)
    x0 = np.asarray(x0, dtype=np.float64)
    drift = schedule.df(t) * x0
    noise = schedule.dg(t) * kac_cond_velocity(params, gt, x - schedule.f(t) * x0, 0.0)
    return drift + noise


def diffusion_reverse_velocity(t: float, x, eps: float = 1e-15) -> np.ndarray:
    """Reverse field -x / (2(1-t)) of the standard diffusion flow.

    Explodes like 1/(1-t); evaluation past the truncation point 1 - eps
    is refused rather than clipped.
    """
    if not 0 <= t < 1 - eps:
        raise TruncationError(f"diffusion reverse field needs t in [0, 1-eps), got {t}")
    return -np.asarray(x, dtype=np.float64) / (2.0 * (1.0 - t))


def fm_cond_velocity(t: float, x, x0) -> np.ndarray:
    """Conditional velocity of the linear interpolant (1-t) X0 + t B1."""
    if t <= 0:
        raise ValueError("flow-matching conditional velocity needs t > 0")
    x = np.asarray(x, dtype=np.float64)
    x0 = np.asarray(x0, dtype=np.float64)
    return -x0 + (x - (1.0 - t) * x0) / t


@dataclass(frozen=True)
class VEModel:
    params: KacParams

    def cond_log_density(self, t, x, x0):
        return kac1d.log_density_cont(self.params, t, x - x0)

    def cond_velocity(self, t, x, x0):
        return kac_cond_velocity(self.params, t, x, x0)


@dataclass(frozen=True)
class VPModel:
    params: KacParams
    schedule: Schedule

    def cond_log_density(self, t, x, x0):
        return kac1d.log_density_cont(self.params, self.schedule.g(t),
                                      x - self.schedule.f(t) * x0)

    def cond_velocity(self, t, x, x0):
        return meanrev_cond_velocity(self.params, self.schedule, t, x, x0)


def marginal_velocity_exact(target: TargetSpec, model, t: float, x) -> np.ndarray:
    """Density-weighted average of conditional velocities, Eq.-exact.

    Valid for finite-support (empirical) targets at generic x off the
    atom set {some component hits x0^i +- c g(t)}: atoms carry measure
    zero there and only the continuous conditional densities enter.
    Log-sum-exp stabilized over the support points.
    """
    if target.kind != "empirical":
        raise ValueError("exact marginal velocity needs a finite-support target")
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    x = np.atleast_2d(x)  # (B, d)
    pts = target.means  # (N, d)
    logw = np.log(target.weights)
    logd = model.cond_log_density(t, x[:, None, :], pts[None, :, :]).sum(axis=2)
    logits = logw[None, :] + logd  # (B, N)
    if np.any(np.all(np.isinf(logits) & (logits < 0), axis=1)):
        raise OutsideSupportError("all conditional densities vanish at x")
    vels = model.cond_velocity(t, x[:, None, :], pts[None, :, :])  # (B, N, d)
    shift = logits.max(axis=1, keepdims=True)
    w = np.exp(logits - shift)
    out = (w[:, :, None] * vels).sum(axis=1) / w.sum(axis=1)[:, None]
    return out[0] if single else out


def velocity_norm_mc(fieldfn, sampler, t: float, n: int, rng):
    """Monte Carlo estimate of E_{x ~ mu_t} |v_t(x)|^2 with standard error.

    sampler(n, rng) must draw from mu_t; fieldfn(t, x) evaluates batched.
    """
    if n < 1000:
        raise ValueError("need at least 1000 samples for a stable estimate")
    x = sampler(n, rng)
    v = fieldfn(t, x)
    sq = (np.atleast_2d(v) ** 2).sum(axis=-1) if v.ndim > 1 else v ** 2
    est = sq.mean()
    stderr = sq.std(ddof=1) / np.sqrt(n)
    return est, stderr
