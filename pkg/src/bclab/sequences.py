"""The six parameter sequences (beta_n, K_n) approaching criticality, their
scaling polynomials, exponents, and limit constants.

Each sequence drives (beta_n, K_n) into the phase-coexistence region toward a
second-order point (kinds 1, 2) or the tricritical point (kinds 3-6) at speed
n^-alpha. Along a valid sequence the scaled free energy converges,

    n^(alpha/alpha0) * G_{beta_n,K_n}(x / n^(theta alpha))  ->  g(x),

to an even coercive polynomial g of degree 4 or 6 whose positive minimizer
xbar controls the magnetization asymptotics. The threshold alpha0 and the
exponent theta are fixed per kind:

    kind   alpha0      theta        g
    seq1   1/2         1/2          beta (K'(beta) b - k) x^2 + c4(beta) x^4
    seq2   1/(2p)      p/2          (beta0/p!) (K^(p)(beta0) - ell) b^p x^2 + c4(beta0) x^4
    seq3   2/3         1/4          beta_c (K'(beta_c) b - k) x^2 + (9/40) x^6
    seq4   1/3         1/2          (beta_c/2) (K''(beta_c) - ell) x^2 - (3/4) x^4 + (9/40) x^6
    seq5   1/3         1/2          (beta_c/2) (K''(beta_c) - ell) x^2 + (3/4) x^4 + (9/40) x^6
    seq6   1/(2p-1)    (p-1)/2      (beta_c/p!) (K^(p)(beta_c) - ell) (-1)^p x^2 + (3/4) x^4

with c4(beta) = (e^beta + 2)^2 (4 - e^beta) / 192. For kinds 1-5 the
high-speed limit polynomial g~ is the leading monomial of g; kind 6 has none
(n G(x/n^(theta alpha0)) -> 0 pointwise), so every g~-based operation rejects
it.

Note on the seq4 interaction-strength formula: the quadratic term is
implemented as ell/(2 n^(2 alpha)), the exponent forced by the defining curve
K(beta_c) + K'(beta_c)(beta-beta_c) + ell (beta-beta_c)^2/2 + ... with
beta_n - beta_c = n^-alpha.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, fields
from functools import lru_cache
from fractions import Fraction

import numpy as np

from . import phase
from .model import ModelParams, free_energy
from .phase import BETA_C, classify, first_order_k, second_order_k, second_order_k_deriv
from .quadrature import QuadratureConfig, tail_cutoff, weighted_ratio

TRICRITICAL_C4 = 3.0 / 16.0
TRICRITICAL_C6 = 9.0 / 40.0
XBAR_TIE_TOL = 1e-12
# Absolute tolerance for recognizing the boundary cases ell = K''(beta_c) and
# ell = ell_c of sequence 4.
CASE_MATCH_TOL = 1e-9

KINDS = ("seq1", "seq2", "seq3", "seq4", "seq5", "seq6")

_REQUIRED_FIELDS = {
    "seq1": ("alpha", "beta", "b", "k"),
    "seq2": ("alpha", "beta", "b", "p", "ell"),
    "seq3": ("alpha", "b", "k"),
    "seq4": ("alpha", "ell", "ell_tilde", "case"),
    "seq5": ("alpha", "ell"),
    "seq6": ("alpha", "p", "ell"),
}

# seq2's anchor carries the subscripted name on the wire
_JSON_FIELD_NAMES = {"seq2": {"beta": "beta0"}}


class SpecValidationError(ValueError):
    """A sequence specification violates one of its defining inequalities."""


class UnsupportedSequenceError(ValueError):
    """The requested operation is undefined for this sequence kind."""


def c4_coefficient(beta: float) -> float:
    """Quartic scaling coefficient c4(beta) = (e^beta + 2)^2 (4 - e^beta)/192.

    Positive for beta < beta_c and zero at beta_c, where the quartic theory
    degenerates and the sextic tricritical polynomials take over.
    """
    eb = math.exp(beta)
    return (eb + 2.0) ** 2 * (4.0 - eb) / 192.0


@dataclass(frozen=True)
class EvenPolynomial:
    """Even polynomial c2 x^2 + c4 x^4 + c6 x^6 with positive leading term."""

    c2: float = 0.0
    c4: float = 0.0
    c6: float = 0.0

    def __post_init__(self):
        lead = self.c6 if self.c6 != 0 else (self.c4 if self.c4 != 0 else self.c2)
        if lead <= 0:
            raise ValueError(
                "leading coefficient must be positive (polynomial must be coercive)")

    @property
    def degree(self) -> int:
        if self.c6 != 0:
            return 6
        return 4 if self.c4 != 0 else 2

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        y = x * x
        return (self.c2 + (self.c4 + self.c6 * y) * y) * y

    def leading_term(self) -> "EvenPolynomial":
        if self.degree == 6:
            return EvenPolynomial(c6=self.c6)
        if self.degree == 4:
            return EvenPolynomial(c4=self.c4)
        return EvenPolynomial(c2=self.c2)


@dataclass(frozen=True)
class ScalingExponents:
    """Threshold speed alpha0 and magnetization exponent theta of a sequence."""

    alpha0: float
    theta: float

    @property
    def theta_alpha0(self) -> float:
        return self.theta * self.alpha0

    def kappa(self, alpha: float) -> float:
        """Conjectured fluctuation exponent (1/2)(1 - alpha/alpha0) + theta*alpha."""
        return 0.5 * (1.0 - alpha / self.alpha0) + self.theta * alpha


class MinimumSet(enum.Enum):
    PLUS_MINUS = "plus-minus"
    THREE_POINT = "three-point"


@dataclass(frozen=True)
class XbarResult:
    value: float
    minimum_set: MinimumSet


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    margin: float | None = None
    note: str = ""


def _parse_alpha(value) -> float:
    # accepts 0.25, "1/4", "0.25"
    if isinstance(value, str):
        return float(Fraction(value))
    return float(value)


@dataclass(frozen=True)
class SequenceSpec:
    """One of the six sequences, with its speed alpha and shape parameters.

    Structural constraints (field presence, admissible b and p, anchor beta
    inside (0, beta_c)) are enforced at construction; the coexistence
    inequalities are evaluated by validate().
    """

    kind: str
    alpha: float
    beta: float | None = None        # anchor point, kinds 1 and 2 only
    b: int | None = None             # +-1 or 0 where admitted
    k: float | None = None           # kinds 1 and 3
    p: int | None = None             # kinds 2 (>= 2) and 6 (>= 3)
    ell: float | None = None         # kinds 2, 4, 5, 6
    ell_tilde: float | None = None   # kind 4
    case: str | None = None          # kind 4: "a".."d"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        object.__setattr__(self, "alpha", _parse_alpha(self.alpha))
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"alpha must be finite and > 0, got {self.alpha}")
        required = _REQUIRED_FIELDS[self.kind]
        for f in fields(self):
            if f.name in ("kind", "alpha"):
                continue
            val = getattr(self, f.name)
            if f.name in required and val is None:
                raise ValueError(f"{self.kind} requires field {f.name!r}")
            if f.name not in required and val is not None:
                raise ValueError(f"{self.kind} does not take field {f.name!r}")
        if self.kind in ("seq1", "seq2"):
            if not (0.0 < self.beta < BETA_C):
                raise ValueError(
                    f"anchor beta must lie strictly inside (0, beta_c), got {self.beta}")
        if self.kind in ("seq1", "seq3") and self.b not in (-1, 0, 1):
            raise ValueError(f"b must be in {{-1, 0, 1}}, got {self.b}")
        if self.kind == "seq2" and self.b not in (-1, 1):
            raise ValueError(f"seq2 requires b in {{-1, 1}}, got {self.b}")
        if self.kind == "seq2" and (not isinstance(self.p, int) or self.p < 2):
            raise ValueError(f"seq2 requires integer p >= 2, got {self.p}")
        if self.kind == "seq6" and (not isinstance(self.p, int) or self.p < 3):
            raise ValueError(f"seq6 requires integer p >= 3, got {self.p}")
        if self.kind == "seq4" and self.case not in ("a", "b", "c", "d"):
            raise ValueError(f"seq4 case must be one of a, b, c, d, got {self.case!r}")


def scaling_exponents(spec: SequenceSpec) -> ScalingExponents:
    if spec.kind == "seq1":
        return ScalingExponents(0.5, 0.5)
    if spec.kind == "seq2":
        return ScalingExponents(1.0 / (2 * spec.p), spec.p / 2.0)
    if spec.kind == "seq3":
        return ScalingExponents(2.0 / 3.0, 0.25)
    if spec.kind in ("seq4", "seq5"):
        return ScalingExponents(1.0 / 3.0, 0.5)
    return ScalingExponents(1.0 / (2 * spec.p - 1), (spec.p - 1) / 2.0)


@lru_cache(maxsize=4)
def k1_third_deriv_estimate(h: float = 1e-3) -> float:
    """Forward-difference estimate of K1'''(beta_c) (no closed form exists)."""
    k0 = second_order_k(BETA_C)
    k1 = first_order_k(BETA_C + h)
    k2 = first_order_k(BETA_C + 2 * h)
    k3 = first_order_k(BETA_C + 3 * h)
    return (k3 - 3 * k2 + 3 * k1 - k0) / h**3


def validate(spec: SequenceSpec) -> list[CheckResult]:
    """Evaluate the coexistence inequalities of the sequence, with margins.

    Margins are signed so that positive means satisfied. Sequence-4 cases (c)
    and (d) additionally carry a note that phase-coexistence membership rests
    on the two tricritical-curve conjectures (K1' = K' and K1'' = ell_c).
    """
    checks: list[CheckResult] = []
    conj_note = ("coexistence membership for this case rests on the "
                 "tricritical-curve conjectures K1'(beta_c) = K'(beta_c) and "
                 "K1''(beta_c) = ell_c")
    if spec.kind == "seq1":
        checks.append(CheckResult("k nonzero", spec.k != 0, abs(spec.k)))
        margin = -(second_order_k_deriv(spec.beta, 1) * spec.b - spec.k)
        checks.append(CheckResult("K'(beta) b - k < 0", margin > 0, margin))
    elif spec.kind == "seq2":
        kp = second_order_k_deriv(spec.beta, spec.p)
        checks.append(CheckResult("ell differs from K^(p)(beta)",
                                  spec.ell != kp, abs(spec.ell - kp)))
        margin = -((kp - spec.ell) * spec.b**spec.p)
        checks.append(CheckResult("(K^(p)(beta) - ell) b^p < 0", margin > 0, margin))
    elif spec.kind == "seq3":
        checks.append(CheckResult("k nonzero", spec.k != 0, abs(spec.k)))
        margin = -(second_order_k_deriv(BETA_C, 1) * spec.b - spec.k)
        checks.append(CheckResult("K'(beta_c) b - k < 0", margin > 0, margin))
    elif spec.kind == "seq4":
        kpp = second_order_k_deriv(BETA_C, 2)
        kppp = second_order_k_deriv(BETA_C, 3)
        ell_c = phase.critical_constants().ell_c
        if spec.case == "a":
            margin = spec.ell - kpp
            checks.append(CheckResult("case a: ell > K''(beta_c)", margin > 0, margin))
        elif spec.case == "b":
            checks.append(CheckResult("case b: ell = K''(beta_c)",
                                      abs(spec.ell - kpp) <= CASE_MATCH_TOL,
                                      -abs(spec.ell - kpp)))
            margin = spec.ell_tilde - kppp
            checks.append(CheckResult("case b: ell_tilde > K'''(beta_c)",
                                      margin > 0, margin))
        elif spec.case == "c":
            lo = spec.ell - ell_c
            hi = kpp - spec.ell
            checks.append(CheckResult("case c: ell_c < ell < K''(beta_c)",
                                      lo > 0 and hi > 0, min(lo, hi), conj_note))
        else:
            checks.append(CheckResult("case d: ell = ell_c",
                                      abs(spec.ell - ell_c) <= CASE_MATCH_TOL,
                                      -abs(spec.ell - ell_c), conj_note))
            k1ppp = k1_third_deriv_estimate()
            margin = spec.ell_tilde - k1ppp
            checks.append(CheckResult(
                "case d: ell_tilde > K1'''(beta_c)", margin > 0, margin,
                "conjecture-dependent: K1''' has no closed form and is "
                "estimated by finite differences of the first-order curve"))
    elif spec.kind == "seq5":
        margin = spec.ell - second_order_k_deriv(BETA_C, 2)
        checks.append(CheckResult("ell > K''(beta_c)", margin > 0, margin))
    else:  # seq6
        kp = second_order_k_deriv(BETA_C, spec.p)
        checks.append(CheckResult("ell differs from K^(p)(beta_c)",
                                  spec.ell != kp, abs(spec.ell - kp)))
        margin = -((kp - spec.ell) * (-1.0) ** spec.p)
        checks.append(CheckResult("(K^(p)(beta_c) - ell) (-1)^p < 0",
                                  margin > 0, margin))
    return checks


def require_valid(spec: SequenceSpec) -> None:
    failed = [c for c in validate(spec) if not c.passed]
    if failed:
        raise SpecValidationError(
            "; ".join(f"violated: {c.name} (margin {c.margin:.6g})" for c in failed))


def params_at(spec: SequenceSpec, n: int) -> ModelParams:
    """The point (beta_n, K_n) of the sequence at index n."""
    require_valid(spec)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    na = float(n) ** spec.alpha
    if spec.kind == "seq1":
        beta_n = spec.beta + spec.b / na
        kappa_n = second_order_k(spec.beta) + spec.k / na
    elif spec.kind == "seq2":
        beta_n = spec.beta + spec.b / na
        kappa_n = second_order_k(spec.beta)
        for j in range(1, spec.p):
            kappa_n += second_order_k_deriv(spec.beta, j) * spec.b**j / (
                math.factorial(j) * na**j)
        kappa_n += spec.ell * spec.b**spec.p / (math.factorial(spec.p) * na**spec.p)
    elif spec.kind == "seq3":
        beta_n = BETA_C + spec.b / na
        kappa_n = second_order_k(BETA_C) + spec.k / na
    elif spec.kind == "seq4":
        beta_n = BETA_C + 1.0 / na
        kappa_n = (second_order_k(BETA_C)
                   + second_order_k_deriv(BETA_C, 1) / na
                   + spec.ell / (2.0 * na**2)
                   + spec.ell_tilde / (6.0 * na**3))
    elif spec.kind == "seq5":
        beta_n = BETA_C - 1.0 / na
        kappa_n = (second_order_k(BETA_C)
                   - second_order_k_deriv(BETA_C, 1) / na
                   + spec.ell / (2.0 * na**2))
    else:  # seq6
        beta_n = BETA_C - 1.0 / na
        kappa_n = second_order_k(BETA_C)
        for j in range(1, spec.p):
            kappa_n += second_order_k_deriv(BETA_C, j) * (-1.0) ** j / (
                math.factorial(j) * na**j)
        kappa_n += spec.ell * (-1.0) ** spec.p / (math.factorial(spec.p) * na**spec.p)
    return ModelParams(beta_n, kappa_n)


def coexistence_onset(spec: SequenceSpec, n_cap: int = 2**20) -> int:
    """Smallest probed n from which the sequence sits in phase coexistence.

    Probes powers of two up to n_cap and returns the first probe after the
    last excursion outside {coexistence, first-order curve}.
    """
    ok_regions = (phase.PhaseRegion.COEXISTENCE, phase.PhaseRegion.FIRST_ORDER_CURVE)
    onset = None
    n = 1
    while n <= n_cap:
        if classify(params_at(spec, n)) in ok_regions:
            if onset is None:
                onset = n
        else:
            onset = None
        n *= 2
    if onset is None:
        raise SpecValidationError(
            f"sequence never entered the coexistence region up to n = {n_cap}")
    return onset


def gl_polynomial(spec: SequenceSpec) -> tuple[EvenPolynomial, ScalingExponents]:
    """Scaling polynomial g and exponents (alpha0, theta) of the sequence."""
    require_valid(spec)
    exps = scaling_exponents(spec)
    if spec.kind == "seq1":
        g = EvenPolynomial(
            c2=spec.beta * (second_order_k_deriv(spec.beta, 1) * spec.b - spec.k),
            c4=c4_coefficient(spec.beta))
    elif spec.kind == "seq2":
        g = EvenPolynomial(
            c2=spec.beta * (second_order_k_deriv(spec.beta, spec.p) - spec.ell)
               * spec.b**spec.p / math.factorial(spec.p),
            c4=c4_coefficient(spec.beta))
    elif spec.kind == "seq3":
        g = EvenPolynomial(
            c2=BETA_C * (second_order_k_deriv(BETA_C, 1) * spec.b - spec.k),
            c6=TRICRITICAL_C6)
    elif spec.kind == "seq4":
        g = EvenPolynomial(
            c2=0.5 * BETA_C * (second_order_k_deriv(BETA_C, 2) - spec.ell),
            c4=-4.0 * TRICRITICAL_C4, c6=TRICRITICAL_C6)
    elif spec.kind == "seq5":
        g = EvenPolynomial(
            c2=0.5 * BETA_C * (second_order_k_deriv(BETA_C, 2) - spec.ell),
            c4=4.0 * TRICRITICAL_C4, c6=TRICRITICAL_C6)
    else:
        g = EvenPolynomial(
            c2=BETA_C * (second_order_k_deriv(BETA_C, spec.p) - spec.ell)
               * (-1.0) ** spec.p / math.factorial(spec.p),
            c4=4.0 * TRICRITICAL_C4)
    if g.degree not in (4, 6):
        raise AssertionError(f"scaling polynomial degenerated to degree {g.degree}")
    return g, exps


def g_tilde(spec: SequenceSpec) -> EvenPolynomial:
    """Leading monomial of g, the weight of the high-speed limit density."""
    if spec.kind == "seq6":
        raise UnsupportedSequenceError(
            "seq6 has no coercive high-order limit polynomial: the scaled free "
            "energy n G(x/n^(theta alpha0)) converges to 0 pointwise, so no "
            "above-threshold asymptotics exist for it")
    g, _ = gl_polynomial(spec)
    return g.leading_term()


def xbar(g: EvenPolynomial) -> XbarResult:
    """Positive global minimizer of g, with the shape of its minimum set.

    Degree 4 uses the closed form sqrt(-c2/(2 c4)); degree 6 solves the
    quadratic in y = x^2 from g'(x)/x = 0 and compares values. A positive
    minimizer whose depth ties g(0) = 0 within 1e-12 flags the three-point
    minimum set {0, +-xbar}; value 0 means the origin is the only minimizer.
    """
    candidates: list[float] = []
    if g.degree == 4:
        if g.c2 < 0:
            candidates.append(math.sqrt(-g.c2 / (2.0 * g.c4)))
    elif g.degree == 6:
        disc = g.c4 * g.c4 - 3.0 * g.c6 * g.c2
        if disc >= 0:
            root = math.sqrt(disc)
            for y in ((-g.c4 + root) / (3.0 * g.c6), (-g.c4 - root) / (3.0 * g.c6)):
                if y > 0:
                    candidates.append(math.sqrt(y))
    if not candidates:
        return XbarResult(0.0, MinimumSet.PLUS_MINUS)
    best = min(candidates, key=lambda x: float(g(x)))
    depth = float(g(best))
    if depth > XBAR_TIE_TOL:
        return XbarResult(0.0, MinimumSet.PLUS_MINUS)
    if abs(depth) <= XBAR_TIE_TOL:
        return XbarResult(best, MinimumSet.THREE_POINT)
    return XbarResult(best, MinimumSet.PLUS_MINUS)


def limit_constant(poly: EvenPolynomial, quad: QuadratureConfig | None = None) -> float:
    """First absolute moment of the density proportional to exp(-poly).

    Yields the constant named ybar when given the leading monomial g~ and
    zbar when given the full scaling polynomial g.
    """
    quad = quad or QuadratureConfig()
    cutoff = tail_cutoff(poly, quad.tail_cut)
    peak = xbar(poly).value
    return weighted_ratio(abs, lambda x: -float(poly(x)), cutoff, quad,
                          points=(-peak, peak) if peak else ())


def _scaled_free_energy(spec: SequenceSpec, n: int, x, speed: float, shrink: float):
    params = params_at(spec, n)
    return speed * np.asarray(free_energy(params, np.asarray(x, dtype=float) / shrink))


def check_hypothesis_iiia(spec: SequenceSpec, radius: float, n_list) -> list[tuple[int, float]]:
    """Sup-error of n^(alpha/alpha0) G(x/n^(theta alpha)) against g on [-R, R].

    Returns (n, sup_error) rows; along a geometric n list the column should
    decrease, which is the numerical content of the compact-uniform limit.
    """
    if radius <= 0:
        raise ValueError("radius must be > 0")
    g, exps = gl_polynomial(spec)
    xs = np.linspace(-radius, radius, 2001)
    gx = g(xs)
    rows = []
    for n in n_list:
        scaled = _scaled_free_energy(spec, n, xs, float(n) ** (spec.alpha / exps.alpha0),
                                     float(n) ** (exps.theta * spec.alpha))
        rows.append((n, float(np.max(np.abs(scaled - gx)))))
    return rows


def check_hypothesis_v(spec: SequenceSpec, x_grid, n_list) -> list[tuple[int, np.ndarray]]:
    """Pointwise error of n G(x/n^(theta alpha0)) against the leading monomial.

    Requires alpha > alpha0; rejects seq6 for the same reason g_tilde does.
    """
    gt = g_tilde(spec)
    exps = scaling_exponents(spec)
    if spec.alpha <= exps.alpha0:
        raise ValueError(
            f"alpha must exceed alpha0 = {exps.alpha0:.6g}, got {spec.alpha}")
    xs = np.asarray(x_grid, dtype=float)
    gx = gt(xs)
    rows = []
    for n in n_list:
        scaled = _scaled_free_energy(spec, n, xs, float(n),
                                     float(n) ** exps.theta_alpha0)
        rows.append((n, np.abs(scaled - gx)))
    return rows


def scaled_free_energy_table(spec: SequenceSpec, x_grid, n_list) -> list[tuple[int, np.ndarray]]:
    """Raw values n G(x/n^(theta alpha0)) per grid point and n.

    Diagnostic companion to check_hypothesis_v: for seq6 it exhibits the
    degenerate pointwise limit 0 instead of a coercive polynomial.
    """
    require_valid(spec)
    exps = scaling_exponents(spec)
    xs = np.asarray(x_grid, dtype=float)
    return [(n, _scaled_free_energy(spec, n, xs, float(n),
                                    float(n) ** exps.theta_alpha0))
            for n in n_list]


def spec_to_json(spec: SequenceSpec) -> str:
    renames = _JSON_FIELD_NAMES.get(spec.kind, {})
    doc = {"kind": spec.kind, "alpha": spec.alpha}
    for name in _REQUIRED_FIELDS[spec.kind]:
        doc[renames.get(name, name)] = getattr(spec, name)
    return json.dumps(doc, sort_keys=True)


def spec_from_json(source) -> SequenceSpec:
    """Parse a SequenceSpec from a JSON document or already-decoded mapping.

    Exactly the fields of the declared kind are accepted (seq2's anchor is
    spelled beta0 on the wire); unknown or missing fields are rejected by
    name. alpha may be given as a rational string ("2/3") for exact threshold
    comparisons.
    """
    doc = json.loads(source) if isinstance(source, str) else dict(source)
    if "kind" not in doc:
        raise ValueError("sequence document must carry a 'kind' field")
    kind = doc.pop("kind")
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    renames = _JSON_FIELD_NAMES.get(kind, {})
    allowed = {renames.get(f, f) for f in _REQUIRED_FIELDS[kind]} | {"alpha"}
    unknown = set(doc) - allowed
    if unknown:
        raise ValueError(
            f"unknown field(s) for {kind}: {', '.join(sorted(unknown))}")
    missing = allowed - set(doc)
    if missing:
        raise ValueError(
            f"missing field(s) for {kind}: {', '.join(sorted(missing))}")
    back = {wire: attr for attr, wire in renames.items()}
    return SequenceSpec(kind=kind, **{back.get(k, k): v for k, v in doc.items()})
