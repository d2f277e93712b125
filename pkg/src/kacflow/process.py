"""Stochastic simulation of telegraph-process noise and forward flows.

Covers the signed random time tau_t, full piecewise-linear paths,
i.i.d. componentwise d-dimensional noise, the variance-exploding (VE)
and mean-reverting (VP) forward processes, and a Brownian baseline.

All randomness flows through RngStream, a thin wrapper around a
counter-based Philox generator keyed by (seed, stream_id): identical
keys reproduce identical output, distinct stream ids give independent
streams, so parallel generation can partition work by stream_id without
changing results.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kac1d
from .kac1d import KacParams

# Extra exponential draws beyond ceil(2aT) in the presampled buffer.
# Rows that still run short are regrown, never truncated.
_TAU_BUFFER = 20


@dataclass
class RngStream:
    """Reproducible random stream; (seed, stream_id) fully determine output."""

    seed: int
    stream_id: int = 0
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def spawn(self, stream_id: int) -> "RngStream":
        return RngStream(self.seed, stream_id)


def simulate_tau(a: float, t, rng: RngStream, horizon: float | None = None):
    """Signed occupation time tau_t of the telegraph sign process.

    tau_t = sum_{k<n} (-1)^{k-1} s_k + (-1)^{n-1} (t - S_{n-1}) where the
    s_k are Exp(a) waiting times and n is the first index whose cumulative
    sum exceeds t. Accepts scalar or array t (shared waiting-time budget,
    independent draws per entry); always |tau_t| <= t.
    """
    if not (np.isfinite(a) and a > 0):
        raise ValueError(f"rate a must be positive, got {a}")
    t = np.asarray(t, dtype=np.float64)
    scalar = t.ndim == 0
    t = np.atleast_1d(t).ravel()
    if np.any(t < 0):
        raise ValueError("time must be nonnegative")
    T = float(horizon) if horizon is not None else float(t.max(initial=0.0))
    n = t.size
    kappa = int(np.ceil(2 * a * T)) + _TAU_BUFFER
    gen = rng.generator
    waits = gen.exponential(1.0 / a, size=(n, kappa))
    # regrow rows whose presample does not cover t yet
    while True:
        short = waits.sum(axis=1) <= t
        if not np.any(short):
            break
        extra = gen.exponential(1.0 / a, size=(n, kappa))
        waits = np.concatenate([waits, extra], axis=1)
        kappa = waits.shape[1]
    cum = np.cumsum(waits, axis=1)
    # first index with cumulative sum > t
    idx = (cum <= t[:, None]).sum(axis=1)
    signs = np.where(np.arange(kappa) % 2 == 0, 1.0, -1.0)
    alt = np.cumsum(waits * signs, axis=1)
    rows = np.arange(n)
    prev_alt = np.where(idx > 0, alt[rows, np.maximum(idx - 1, 0)], 0.0)
    prev_cum = np.where(idx > 0, cum[rows, np.maximum(idx - 1, 0)], 0.0)
    tau = prev_alt + np.where(idx % 2 == 0, 1.0, -1.0) * (t - prev_cum)
    return tau[0] if scalar else tau


@dataclass(frozen=True)
class KacPath:
    """One realization of the telegraph walk on [0, horizon].

    position(t) is piecewise linear with slope +-c; the path is Lipschitz
    with constant c.
    """

    params: KacParams
    initial_sign: int
    jump_times: np.ndarray
    horizon: float

    def position(self, t):
        t = np.asarray(t, dtype=np.float64)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        if np.any((t < 0) | (t > self.horizon)):
            raise ValueError("time outside [0, horizon]")
        jumps = self.jump_times
        k = len(jumps)
        signs = np.where(np.arange(k) % 2 == 0, 1.0, -1.0)
        # alternating sums of inter-jump segments, segment i = j_i - j_{i-1}
        segs = np.diff(np.concatenate([[0.0], jumps]))
        alt = np.cumsum(segs * signs) if k else np.empty(0)
        n = np.searchsorted(jumps, t, side="right")
        prev_alt = np.where(n > 0, alt[np.maximum(n - 1, 0)] if k else 0.0, 0.0)
        prev_time = np.where(n > 0, jumps[np.maximum(n - 1, 0)] if k else 0.0, 0.0)
        tau = prev_alt + np.where(n % 2 == 0, 1.0, -1.0) * (t - prev_time)
        out = self.initial_sign * self.params.c * tau
        return out[0] if scalar else out


def simulate_path(params: KacParams, horizon: float, rng: RngStream) -> KacPath:
    """Draw one telegraph path: Bernoulli initial sign, Exp(a) reversals."""
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    gen = rng.generator
    sign = 1 if gen.random() < 0.5 else -1
    jumps = []
    t = gen.exponential(1.0 / params.a)
    while t <= horizon:
        jumps.append(t)
        t += gen.exponential(1.0 / params.a)
    return KacPath(params, sign, np.asarray(jumps), float(horizon))


def sample_kac(params: KacParams, t: float, n: int, rng: RngStream,
               method: str = "icdf"):
    """n i.i.d. draws from the time-t law of the process started at 0.

    "icdf": inverse-transform with the atom branch taken when U < e^{-at}
    and the continuous quantile otherwise, each with a symmetric sign.
    "walk": simulate the signed random time directly and scale by +-c.
    """
    if n < 1:
        raise ValueError("sample count must be >= 1")
    gen = rng.generator
    if method == "icdf":
        law = kac1d.get_law(params, t)
        u = gen.random(n)
        v = gen.random(n)
        sign = np.where(gen.random(n) < 0.5, 1.0, -1.0)
        atom = u < np.exp(-params.a * t)
        x = np.where(atom, params.c * t, law.quantile_folded(v))
        return sign * x
    if method == "walk":
        tau = simulate_tau(params.a, np.full(n, float(t)), rng)
        sign = np.where(gen.random(n) < 0.5, 1.0, -1.0)
        return sign * params.c * tau
    raise ValueError(f"unknown sampling method {method!r}")


def sample_kac_nd(params: KacParams, t: float, n: int, d: int,
                  rng: RngStream, method: str = "icdf") -> np.ndarray:
    """(n, d) array of independent componentwise draws."""
    if t == 0:
        return np.zeros((n, d))
    return sample_kac(params, t, n * d, rng, method).reshape(n, d)


def sample_ve(target, params: KacParams, t: float, n: int, rng: RngStream,
              method: str = "icdf") -> np.ndarray:
    """Forward VE samples X_0 + K(t), componentwise independent noise."""
    x0 = target.sample(n, rng)
    if x0.shape != (n, target.dim):
        raise ValueError("target sampler returned wrong shape")
    if t == 0:
        return x0
    return x0 + sample_kac_nd(params, t, n, target.dim, rng, method)


def sample_vp(target, params: KacParams, schedule, t: float, n: int,
              rng: RngStream, method: str = "icdf") -> np.ndarray:
    """Mean-reverting samples f(t) X_0 + K_{g(t)} on t in [0, 1]."""
    if not 0 <= t <= 1:
        raise ValueError("VP time must lie in [0, 1]")
    x0 = target.sample(n, rng)
    gt = schedule.g(t)
    noise = sample_kac_nd(params, gt, n, target.dim, rng, method) if gt > 0 \
        else np.zeros((n, target.dim))
    return schedule.f(t) * x0 + noise


def sample_brownian(sigma: float, t: float, n: int, d: int,
                    rng: RngStream) -> np.ndarray:
    """i.i.d. N(0, sigma^2 t I_d) draws, the diffusion baseline noise."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if t < 0:
        raise ValueError("time must be nonnegative")
    return rng.generator.normal(0.0, sigma * np.sqrt(t), size=(n, d))


def tau_mean(a: float, t: float) -> float:
    """E[tau_t] = (1 - e^{-2at}) / (2a)."""
    return (1.0 - np.exp(-2 * a * t)) / (2 * a)


def tau_second_moment(a: float, t: float) -> float:
    """E[tau_t^2] = (1/a)(t - (1 - e^{-2at}) / (2a))."""
    return (t - tau_mean(a, t)) / a
