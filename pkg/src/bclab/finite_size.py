"""Exact finite-n law of the total spin, its moments and tails, the
Gaussian-smoothing identity that turns spin expectations into one-dimensional
integrals, and a Metropolis cross-estimator.

The law of the total spin S_n is enumerated over occupation pairs
(n_plus, n_minus) rather than spin configurations: the energy depends only on
the counts, so each total-spin value s collects

    sum over n_plus - n_minus = s of
        multinomial(n; n_plus, n_zero, n_minus)
        * exp(-beta (n_plus + n_minus) + beta K s^2 / n),

accumulated entirely in log space (the weights span hundreds of e-folds near
coexistence). This is exact up to n ~ 10^4 in O(n^2) time without big
integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, logsumexp

from .minimize import min_free_energy
from .model import ModelParams, free_energy
from .quadrature import QuadratureConfig, gaussian_mixture_expectation, weighted_ratio

DEFAULT_N_MAX = 20000
MIN_BATCHES = 20


class EnumerationLimitError(RuntimeError):
    """n exceeds the exact-enumeration budget; use mc_estimate instead."""


@dataclass(frozen=True)
class SpinLawExact:
    """Exact law of S_n in log space: unnormalized log weights over -n..n."""

    n: int
    log_weights: np.ndarray  # index s + n, mirrored exactly across s = 0
    log_z: float

    def support(self) -> np.ndarray:
        return np.arange(-self.n, self.n + 1)

    def probabilities(self) -> np.ndarray:
        return np.exp(self.log_weights - self.log_z)


@dataclass(frozen=True)
class McEstimate:
    """Metropolis estimate of E|S_n/n| with a batch-means standard error."""

    mean: float
    stderr: float
    sweeps: int
    seed: int


@lru_cache(maxsize=32)
def _law_cached(n: int, beta: float, kappa: float) -> SpinLawExact:
    log_fact = gammaln(np.arange(n + 1) + 1.0)
    log_weights = np.full(2 * n + 1, -np.inf)
    bk_over_n = beta * kappa / n
    for s in range(n + 1):
        n_plus = np.arange(s, (n + s) // 2 + 1)
        n_minus = n_plus - s
        n_zero = n - n_plus - n_minus
        terms = (log_fact[n] - log_fact[n_plus] - log_fact[n_minus]
                 - log_fact[n_zero]
                 - beta * (n_plus + n_minus) + bk_over_n * s * s)
        val = logsumexp(terms)
        log_weights[n + s] = val
        log_weights[n - s] = val
    log_weights.flags.writeable = False
    return SpinLawExact(n=n, log_weights=log_weights,
                        log_z=float(logsumexp(log_weights)))


def finite_size_law(n: int, params: ModelParams,
                    n_max: int = DEFAULT_N_MAX) -> SpinLawExact:
    """Exact law of the total spin S_n under the canonical ensemble at (beta, K).

    O(n^2) time and O(n) memory; raises EnumerationLimitError beyond n_max
    (default 20000), where only the Monte Carlo estimator is offered.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n > n_max:
        raise EnumerationLimitError(
            f"n = {n} exceeds the enumeration budget n_max = {n_max}; "
            "use mc_estimate for larger systems")
    return _law_cached(n, params.beta, params.kappa)


def abs_moment(law: SpinLawExact, power: float = 1.0, gamma: float = 0.0) -> float:
    """E |S_n / n^(1-gamma)|^power, summed exactly over the lattice.

    Terms are accumulated in descending magnitude with exact (fsum) rounding.
    """
    if power <= 0:
        raise ValueError(f"power must be > 0, got {power}")
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"gamma must lie in [0, 1), got {gamma}")
    scale = float(law.n) ** (1.0 - gamma)
    s = law.support()
    log_terms = law.log_weights - law.log_z
    with np.errstate(divide="ignore"):
        log_terms = log_terms + power * np.log(np.abs(s) / scale)
    terms = np.exp(log_terms[np.isfinite(log_terms)])
    return math.fsum(np.sort(terms)[::-1])


def tail_mass(law: SpinLawExact, gamma: float, a: float) -> float:
    """P{ |S_n / n^(1-gamma)| >= a }, computed in log space.

    a = 0 returns 1 (full mass); a beyond the lattice ceiling n^gamma
    returns 0.
    """
    if a < 0:
        raise ValueError(f"threshold a must be >= 0, got {a}")
    return math.exp(log_tail_mass(law, gamma, a))


def log_tail_mass(law: SpinLawExact, gamma: float, a: float) -> float:
    """log P{ |S_n / n^(1-gamma)| >= a }; -inf for an empty tail."""
    threshold = a * float(law.n) ** (1.0 - gamma)
    mask = np.abs(law.support()) >= threshold
    if not mask.any():
        return -np.inf
    return float(logsumexp(law.log_weights[mask]) - law.log_z)


def hs_lhs(n: int, params: ModelParams, gamma_bar: float, f,
           quad: QuadratureConfig | None = None, kinks=(),
           n_max: int = DEFAULT_N_MAX) -> float:
    """E f(S_n/n^(1-gb) + W_n/n^(1/2-gb)) with W_n ~ N(0, 1/(2 beta K)).

    The spin part is exact; each lattice atom is convolved with its Gaussian
    by quadrature (declare kink locations of f for the split rule). Equals
    hs_rhs by the Gaussian-smoothing identity, which the test suite uses as
    the primary correctness oracle of this module.
    """
    if not 0.0 <= gamma_bar < 1.0:
        raise ValueError(f"gamma_bar must lie in [0, 1), got {gamma_bar}")
    law = finite_size_law(n, params, n_max=n_max)
    probs = law.probabilities()
    keep = probs > 1e-22
    means = law.support()[keep] / float(n) ** (1.0 - gamma_bar)
    sigma = (2.0 * params.beta * params.kappa) ** -0.5 / float(n) ** (0.5 - gamma_bar)
    return gaussian_mixture_expectation(f, means, probs[keep], sigma, kinks=kinks)


def hs_rhs(n: int, params: ModelParams, gamma_bar: float, f,
           quad: QuadratureConfig | None = None, kinks=()) -> float:
    """Integral of f against the density proportional to e^{-n G(x/n^gb)}.

    The weight is normalized by its minimum before exponentiating, and the
    integration interval is truncated where the quadratic lower bound
    G(y) >= beta K y^2 - 2 beta K |y| - log 3 pushes the exponent tail_cut
    e-folds above the minimum.
    """
    if not 0.0 <= gamma_bar < 1.0:
        raise ValueError(f"gamma_bar must lie in [0, 1), got {gamma_bar}")
    quad = quad or QuadratureConfig()
    scale = float(n) ** gamma_bar
    g_min, arg_min = min_free_energy(params)

    def log_weight(x: float) -> float:
        return -n * (free_energy(params, x / scale) - g_min)

    bk = params.beta * params.kappa
    c = math.log(3.0) + g_min + quad.tail_cut / n
    y_star = 1.0 + math.sqrt(1.0 + max(c, 0.0) / bk)
    cutoff = scale * max(y_star, 2.0)
    peaks = (-arg_min * scale, 0.0, arg_min * scale)

    def fs(x: float) -> float:
        return float(f(np.asarray([x]))[0])

    return weighted_ratio(fs, log_weight, cutoff, quad,
                          points=tuple(kinks) + peaks)


_OTHER_SPINS = {-1: (0, 1), 0: (-1, 1), 1: (-1, 0)}


def mc_estimate(n: int, params: ModelParams, sweeps: int,
                burn_in: int | None = None, seed: int = 0) -> McEstimate:
    """Single-site Metropolis estimate of E|S_n/n|.

    Each step picks a uniform site and a uniform proposal among the two other
    spin values (a symmetric proposal, so acceptance min(1, e^{-beta dH})
    satisfies detailed balance); dH is O(1) from the running total spin.
    |S_n/n| is recorded once per sweep of n steps; the standard error comes
    from 20 batch means. Identical (n, params, sweeps, seed) reproduce the
    estimate exactly.
    """
    if sweeps < MIN_BATCHES:
        raise ValueError(f"sweeps must be >= {MIN_BATCHES} (batch-means stderr)")
    if burn_in is None:
        burn_in = sweeps // 10
    beta, kappa = params.beta, params.kappa
    coupling = kappa / n
    rng = np.random.Generator(np.random.PCG64(seed))

    spins = [0] * n
    total = 0
    exp = math.exp
    samples = np.empty(sweeps)
    for sweep in range(burn_in + sweeps):
        sites = rng.integers(0, n, size=n).tolist()
        picks = rng.integers(0, 2, size=n).tolist()
        uniforms = rng.random(size=n).tolist()
        for i, pick, u in zip(sites, picks, uniforms):
            old = spins[i]
            new = _OTHER_SPINS[old][pick]
            ds = new - old
            dh = (new * new - old * old) - coupling * (2 * total * ds + ds * ds)
            if dh <= 0.0 or u < exp(-beta * dh):
                spins[i] = new
                total += ds
        if sweep >= burn_in:
            samples[sweep - burn_in] = abs(total) / n

    batch_len = sweeps // MIN_BATCHES
    batches = samples[:batch_len * MIN_BATCHES].reshape(MIN_BATCHES, batch_len)
    means = batches.mean(axis=1)
    stderr = float(means.std(ddof=1) / math.sqrt(MIN_BATCHES))
    return McEstimate(mean=float(means.mean()), stderr=stderr,
                      sweeps=sweeps, seed=seed)
