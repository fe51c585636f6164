"""Transition curves and region classification for the mean-field model.

The continuous-bifurcation curve has the closed form

    K(beta) = 1 / (2 beta c''_beta(0)) = (e^beta + 2) / (4 beta),

valid as the second-order curve for beta <= beta_c = log 4 and as the
spinodal curve beyond. The discontinuous-bifurcation curve K1(beta), defined
only implicitly, is the smallest K at which the free energy touches zero at a
strictly positive magnetization; it is solved here by bisection in K with an
inner global minimization of G over [1e-4, 1].

Note on the tricritical interaction strength: it is sometimes written
"3/2 log4", which this module reads as 3/(2 log 4) = K(log 4); the two
expressions (e^beta+2)/(4 beta) and 1/(2 beta c''(0)) agree identically.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

from .minimize import min_free_energy
from .model import ModelParams, cumulant_deriv

BETA_C = math.log(4.0)
CURVE_TOL = 1e-12
K1_BRACKET_TOL = 1e-12
# Lower cutoff for the inner minimization: excludes the trivial minimum at 0
# while keeping every first-order magnetization reachable at desk scale.
K1_X_CUTOFF = 1e-4
MAX_CURVE_DERIV_ORDER = 12


class PhaseRegion(enum.Enum):
    SINGLE_PHASE = "single-phase"
    SECOND_ORDER_CURVE = "second-order-curve"
    FIRST_ORDER_CURVE = "first-order-curve"
    COEXISTENCE = "coexistence"
    TRICRITICAL_POINT = "tricritical-point"


def second_order_k(beta: float) -> float:
    """K(beta) = (e^beta + 2)/(4 beta); spinodal curve for beta > beta_c."""
    if not (math.isfinite(beta) and beta > 0):
        raise ValueError(f"beta must be finite and > 0, got {beta}")
    return (math.exp(beta) + 2.0) / (4.0 * beta)


def second_order_k_deriv(beta: float, order: int) -> float:
    """Exact order-th derivative of K(beta), order in 1..12.

    Writes K = e^beta/(4 beta) + 1/(2 beta) and applies the Leibniz rule to
    the first summand using d^r (1/beta) = (-1)^r r! / beta^(r+1).
    """
    if not (math.isfinite(beta) and beta > 0):
        raise ValueError(f"beta must be finite and > 0, got {beta}")
    if not isinstance(order, int) or order < 1:
        raise ValueError(f"order must be a positive integer, got {order}")
    if order > MAX_CURVE_DERIV_ORDER:
        raise ValueError(
            f"order {order} exceeds the supported cap {MAX_CURVE_DERIV_ORDER}")
    s = 0.0
    for i in range(order + 1):
        r = order - i
        s += math.comb(order, i) * (-1) ** r * math.factorial(r) / (4.0 * beta ** (r + 1))
    return math.exp(beta) * s + (-1) ** order * math.factorial(order) / (2.0 * beta ** (order + 1))


def _min_g_positive(beta: float, kappa: float) -> tuple[float, float]:
    return min_free_energy(ModelParams(beta, kappa), lo=K1_X_CUTOFF, hi=1.0)


_k1_cache: dict[float, float] = {}


def first_order_k(beta: float) -> float:
    """The first-order curve K1(beta) for beta > beta_c.

    K1 is the smallest K at which min_{x in [1e-4, 1]} G_{beta,K}(x) = 0;
    there the set of global minimizers is {0, +-m}. Bisection on K runs until
    the bracket is below 1e-12 and returns its upper end, where the positive
    wells are at least as deep as G(0) = 0. Results are memoized per beta
    (deterministic values, so concurrent fills are benign).
    """
    if not (math.isfinite(beta) and beta > BETA_C):
        raise ValueError(f"beta must be > beta_c = {BETA_C}, got {beta}")
    cached = _k1_cache.get(beta)
    if cached is not None:
        return cached

    hi = second_order_k(beta)
    if _min_g_positive(beta, hi)[0] >= 0:
        raise ArithmeticError(
            f"no coexistence at the spinodal K({beta}); cannot bracket K1")
    lo = hi / 2.0
    while _min_g_positive(beta, lo)[0] <= 0:
        lo *= 0.8
    while hi - lo > K1_BRACKET_TOL:
        mid = 0.5 * (lo + hi)
        if _min_g_positive(beta, mid)[0] <= 0:
            hi = mid
        else:
            lo = mid
    _k1_cache[beta] = hi
    return hi


def classify(params: ModelParams, tol: float = CURVE_TOL) -> PhaseRegion:
    """Phase region of a (beta, kappa) point, with curve tolerance 1e-12.

    K exactly on K(beta) for beta <= beta_c classifies as the second-order
    curve (the single-phase set is the closed interval 0 < K <= K(beta)).
    """
    beta, kappa = params.beta, params.kappa
    if beta <= BETA_C + tol:
        k_curve = second_order_k(beta)
        if abs(kappa - k_curve) <= tol:
            if abs(beta - BETA_C) <= tol:
                return PhaseRegion.TRICRITICAL_POINT
            return PhaseRegion.SECOND_ORDER_CURVE
        if kappa < k_curve:
            return PhaseRegion.SINGLE_PHASE
        return PhaseRegion.COEXISTENCE
    k1 = first_order_k(beta)
    if abs(kappa - k1) <= tol:
        return PhaseRegion.FIRST_ORDER_CURVE
    if kappa < k1:
        return PhaseRegion.SINGLE_PHASE
    return PhaseRegion.COEXISTENCE


@dataclass(frozen=True)
class CriticalConstants:
    """Tricritical location and the conjectured curvature ell_c of K1 there."""

    beta_c: float
    k_at_beta_c: float
    ell_c: float


@lru_cache(maxsize=1)
def critical_constants() -> CriticalConstants:
    return CriticalConstants(
        beta_c=BETA_C,
        k_at_beta_c=second_order_k(BETA_C),
        ell_c=second_order_k_deriv(BETA_C, 2) - 5.0 / (4.0 * BETA_C),
    )


@dataclass(frozen=True)
class ConjectureRow:
    h: float
    k1_prime_est: float
    k1_second_est: float


@dataclass(frozen=True)
class TricriticalConjectureReport:
    rows: tuple[ConjectureRow, ...]
    k_prime_ref: float
    ell_c_ref: float


def verify_tricritical_conjectures(h_grid) -> TricriticalConjectureReport:
    """One-sided finite-difference estimates of K1'(beta_c) and K1''(beta_c).

    Uses the continuous extension K1(beta_c) = K(beta_c). The caller asserts
    that |K1_prime_est - K'(beta_c)| and |K1_second_est - ell_c| shrink along
    a decreasing h grid; this routine only reports the estimates next to the
    closed-form references.
    """
    h_grid = [float(h) for h in h_grid]
    if any(h < 1e-4 for h in h_grid):
        raise ValueError("h_grid entries must be >= 1e-4 (K1 solve accuracy)")
    if any(b >= a for a, b in zip(h_grid, h_grid[1:])):
        raise ValueError("h_grid must be strictly decreasing")
    k0 = second_order_k(BETA_C)
    rows = []
    for h in h_grid:
        k1h = first_order_k(BETA_C + h)
        k12h = first_order_k(BETA_C + 2 * h)
        rows.append(ConjectureRow(
            h=h,
            k1_prime_est=(k1h - k0) / h,
            k1_second_est=(k12h - 2 * k1h + k0) / (h * h),
        ))
    cc = critical_constants()
    return TricriticalConjectureReport(
        rows=tuple(rows),
        k_prime_ref=second_order_k_deriv(BETA_C, 1),
        ell_c_ref=cc.ell_c,
    )


def _second_order_k_from_cumulant(beta: float) -> float:
    # Cross-check form 1/(2 beta c''(0)); equal to second_order_k to 1e-12.
    return 1.0 / (2.0 * beta * cumulant_deriv(beta, 0.0, 2))
