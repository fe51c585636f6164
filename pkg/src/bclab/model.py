"""Closed-form building blocks of the mean-field three-state spin model.

Spins take values in {-1, 0, +1}. The tilted single-site measure puts weight
1 on spin 0 and e^{-beta} on each of +-1, so its cumulant generating function
is

    c_beta(t) = log( (1 + e^{-beta} (e^t + e^{-t})) / (1 + 2 e^{-beta}) ),

and the free-energy functional whose global minimizers are the equilibrium
magnetization values is

    G_{beta,K}(x) = beta K x^2 - c_beta(2 beta K x).

Everything here is a pure function of its arguments. The spin/tilt argument
may be a scalar or a numpy array. All exponentials are evaluated after
factoring out max(t, -t, 0), so the functions do not overflow for any finite
argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SPIN_VALUES = (-1, 0, 1)

_CUMULANT_ORDERS = (1, 2, 3, 4)


@dataclass(frozen=True)
class ModelParams:
    """A point (beta, kappa) in the positive quadrant of the phase plane.

    beta is the inverse temperature, kappa the interaction strength.
    """

    beta: float
    kappa: float

    def __post_init__(self):
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise ValueError(f"beta must be finite and > 0, got {self.beta}")
        if not (math.isfinite(self.kappa) and self.kappa > 0):
            raise ValueError(f"kappa must be finite and > 0, got {self.kappa}")


@dataclass(frozen=True)
class SpinValue:
    """A single admissible spin value."""

    value: int

    def __post_init__(self):
        if self.value not in SPIN_VALUES:
            raise ValueError(f"spin must be one of {SPIN_VALUES}, got {self.value}")


def _check_finite(t, name="t"):
    if not np.all(np.isfinite(t)):
        raise ValueError(f"{name} must be finite")


def _stable_parts(beta: float, t):
    """Shifted numerator/denominator pieces of the tilted moment ratios.

    With D(t) = 1 + e^{-beta}(e^t + e^{-t}) and E = D - 1, returns
    (m, dhat, ehat, ephat) where m = |t| and dhat = e^{-m} D, ehat = e^{-m} E,
    ephat = e^{-m} E'. All three hatted quantities lie in (0, 1 + 2e^{-beta}],
    so ratios of them never overflow.
    """
    a = math.exp(-beta)
    t = np.asarray(t, dtype=float)
    m = np.abs(t)
    ep = np.exp(t - m)
    en = np.exp(-t - m)
    ehat = a * (ep + en)
    dhat = np.exp(-m) + ehat
    ephat = a * (ep - en)
    return m, dhat, ehat, ephat


def _maybe_scalar(x, scalar: bool):
    return float(x) if scalar else x


def cumulant(beta: float, t):
    """Cumulant generating function c_beta(t) of the tilted single-spin law.

    Even in t, c_beta(0) = 0, and stable for |t| well beyond the overflow
    threshold of exp.
    """
    if beta <= 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    _check_finite(t)
    scalar = np.isscalar(t)
    m, dhat, _, _ = _stable_parts(beta, t)
    # the same floating expression as dhat at t = 0, so c(0) is exactly 0
    out = m + np.log(dhat) - math.log(1.0 + math.exp(-beta) * 2.0)
    return _maybe_scalar(out, scalar)


def cumulant_deriv(beta: float, t, order: int):
    """Closed-form d^order/dt^order of c_beta at t, for order in {1, 2, 3, 4}.

    Derived analytically from c_beta = log D - const with D = 1 + E,
    E = e^{-beta}(e^t + e^{-t}):

        c'   = E'/D
        c''  = (E + 4 e^{-2 beta})/D^2    (E'' = E and E D - E'^2 = E + 4 e^{-2 beta})
        c''' = E'/D^2 - 2 c' c''          (D - E = 1)
        c'''' = (E D - 2 E'^2)/D^3 - 2 c''^2 - 2 c' c'''

    Finite differences are test oracles only; Newton steps elsewhere rely on
    these forms being exact.
    """
    if beta <= 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    if order not in _CUMULANT_ORDERS:
        raise ValueError(f"order must be in {_CUMULANT_ORDERS}, got {order}")
    _check_finite(t)
    scalar = np.isscalar(t)
    a = math.exp(-beta)
    m, dhat, ehat, ephat = _stable_parts(beta, t)
    c1 = ephat / dhat
    if order == 1:
        return _maybe_scalar(c1, scalar)
    # E D - E'^2 = E + 4 e^{-2 beta} exactly, which keeps c'' positive for
    # large |t| where E/D - c'^2 would cancel to zero
    c2 = (ehat + 4.0 * a * a * np.exp(-m)) * np.exp(-m) / dhat**2
    if order == 2:
        return _maybe_scalar(c2, scalar)
    # E'/D^2 = ephat e^{-m} / dhat^2; the e^{-m} factor underflows to the
    # correct limit 0 as |t| grows.
    c3 = ephat * np.exp(-m) / dhat**2 - 2 * c1 * c2
    if order == 3:
        return _maybe_scalar(c3, scalar)
    c4 = (ehat * dhat - 2 * ephat**2) * np.exp(-m) / dhat**3 - 2 * c2 * c2 - 2 * c1 * c3
    return _maybe_scalar(c4, scalar)


def free_energy(params: ModelParams, x):
    """Free-energy functional G_{beta,K}(x) = beta K x^2 - c_beta(2 beta K x)."""
    _check_finite(x, "x")
    scalar = np.isscalar(x)
    x = np.asarray(x, dtype=float)
    bk = params.beta * params.kappa
    out = bk * x * x - cumulant(params.beta, 2.0 * bk * x)
    return _maybe_scalar(out, scalar)


def free_energy_deriv(params: ModelParams, x, order: int):
    """First or second x-derivative of the free-energy functional.

    order 1: 2 beta K (x - c'(2 beta K x)); order 2: 2 beta K - (2 beta K)^2 c''.
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    _check_finite(x, "x")
    scalar = np.isscalar(x)
    x = np.asarray(x, dtype=float)
    two_bk = 2.0 * params.beta * params.kappa
    if order == 1:
        out = two_bk * (x - cumulant_deriv(params.beta, two_bk * x, 1))
    else:
        out = two_bk - two_bk**2 * cumulant_deriv(params.beta, two_bk * x, 2)
    return _maybe_scalar(out, scalar)
