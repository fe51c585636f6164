"""Quadrature helpers for expectations against exp(-polynomial) weights and
Gaussian-smoothed lattice laws."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate


class QuadratureError(RuntimeError):
    """Raised when an integral cannot be resolved to the requested tolerance."""


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances for improper integrals of exp(-poly)-type weights.

    tail_cut is the exponent margin: integration is truncated at the X where
    the weight exponent exceeds its minimum by tail_cut (default 60, i.e. the
    discarded integrand is below e^-60 of the peak).
    """

    rel_tol: float = 1e-10
    tail_cut: float = 60.0

    def __post_init__(self):
        if self.rel_tol <= 0:
            raise ValueError("rel_tol must be > 0")
        if self.tail_cut <= 0:
            raise ValueError("tail_cut must be > 0")


def tail_cutoff(fn, margin: float, start: float = 1.0) -> float:
    """Smallest power-of-two multiple of start with fn(X) >= min fn + margin.

    fn must be even, coercive, and attain its minimum inside [0, start * 2^k]
    for some k; the minimum is located by a coarse scan that is refined as the
    doubling proceeds.
    """
    x = max(start, 1.0)
    for _ in range(200):
        grid = np.linspace(0.0, x, 4001)
        m0 = float(np.min(fn(grid)))
        if float(fn(np.asarray([x]))[0]) >= m0 + margin:
            return x
        x *= 2.0
    raise QuadratureError("tail cutoff search did not terminate")


def _quad(f, lo: float, hi: float, cfg: QuadratureConfig, points=None):
    pts = None
    if points:
        pts = sorted(p for p in points if lo < p < hi)
        pts = pts or None
    val, err = integrate.quad(f, lo, hi, epsabs=1e-14, epsrel=cfg.rel_tol,
                              limit=400, points=pts)
    if err > max(1e-12, 10 * cfg.rel_tol * abs(val)):
        raise QuadratureError(
            f"integral did not converge: value {val:.6g}, achieved abs error {err:.3g}")
    return val


def weighted_ratio(f, log_weight, cutoff: float, cfg: QuadratureConfig,
                   points=()) -> float:
    """(integral of f * e^log_weight) / (integral of e^log_weight) on [-X, X].

    log_weight must be even with maximum 0 (pre-normalized); points flags
    integrable kinks of f or interior peaks of the weight.
    """
    def wf(x):
        return f(x) * math.exp(log_weight(x))

    num = _quad(wf, -cutoff, cutoff, cfg, points)
    den = _quad(lambda x: math.exp(log_weight(x)), -cutoff, cutoff, cfg, points)
    return num / den


_GH_NODES, _GH_WEIGHTS = np.polynomial.hermite.hermgauss(64)
_GL_NODES, _GL_WEIGHTS = leggauss(24)


def gaussian_mixture_expectation(f, means, probs, sigma: float, kinks=()) -> float:
    """E[f(X)] for the mixture sum_s probs[s] * N(means[s], sigma^2).

    Smooth f uses 64-node Gauss-Hermite per mixture component. When f has
    kinks (e.g. min(|x|, j)), the component integral is instead split at each
    kink inside a +-12 sigma window and evaluated with panelled Gauss-Legendre
    (panel width <= 3 sigma keeps the Gaussian factor spectrally resolved).
    """
    means = np.asarray(means, dtype=float)
    probs = np.asarray(probs, dtype=float)
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    if not kinks:
        pts = means[:, None] + math.sqrt(2.0) * sigma * _GH_NODES[None, :]
        vals = f(pts) @ _GH_WEIGHTS / math.sqrt(math.pi)
        return float(probs @ vals)

    kinks = sorted(kinks)
    half_width = 12.0 * sigma
    norm = 1.0 / (sigma * math.sqrt(2.0 * math.pi))
    total = 0.0
    for mu, pr in zip(means, probs):
        cuts = [mu - half_width]
        cuts += [k for k in kinks if mu - half_width < k < mu + half_width]
        cuts.append(mu + half_width)
        acc = 0.0
        for a, b in zip(cuts, cuts[1:]):
            n_panels = max(1, math.ceil((b - a) / (3.0 * sigma)))
            edges = np.linspace(a, b, n_panels + 1)
            los, his = edges[:-1], edges[1:]
            mid = 0.5 * (his + los)[:, None]
            half = 0.5 * (his - los)[:, None]
            x = mid + half * _GL_NODES[None, :]
            w = half * _GL_WEIGHTS[None, :]
            dens = np.exp(-0.5 * ((x - mu) / sigma) ** 2) * norm
            acc += float(np.sum(w * f(x) * dens))
        total += pr * acc
    return total


def aitken_limit(values) -> float:
    """Aitken delta-squared extrapolation from the last three entries.

    Falls back to the final value when the second difference vanishes.
    """
    if len(values) < 3:
        raise ValueError("need at least three values to extrapolate")
    a1, a2, a3 = values[-3], values[-2], values[-1]
    den = a3 - 2.0 * a2 + a1
    if den == 0.0:
        return a3
    return a3 - (a3 - a2) ** 2 / den
