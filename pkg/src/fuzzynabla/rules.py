"""Calculus rule checkers: each one measures the identity it claims.

A RuleReport never lies about why it failed: hypothesis violations are
reported as HypothesisFailed even when the numbers happen to agree, and a
numeric mismatch under satisfied hypotheses is ResidualExceeded. The
reporting path never raises for a failed hypothesis; pass enforce=True to
get an exception instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

from .errors import (
    EndpointDerivativeMissing,
    GhNonexistent,
    LengthDirectionUndetermined,
    LimitDisagreement,
    SignHypothesisFailed,
)
from .fuzzy import FuzzyNumber, add, hausdorff, scalar_mul
from .nabla import (
    DEFAULT_CONFIG,
    DiffCase,
    FuzzyFunction,
    ProbeConfig,
    nabla_gh,
    nabla_scalar,
)
from .timescale import Side, TimeScale


class Verdict(Enum):
    VERIFIED = "Verified"
    HYPOTHESIS_FAILED = "HypothesisFailed"
    RESIDUAL_EXCEEDED = "ResidualExceeded"


class Tag(Enum):
    I = "I"
    II = "II"
    BOTH = "Both"
    NEITHER = "Neither"


@dataclass
class HypothesisCheck:
    name: str
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass
class RuleReport:
    rule: str
    hypothesis_checks: list[HypothesisCheck]
    lhs: FuzzyNumber | None
    rhs: FuzzyNumber | None
    residual: float
    verdict: Verdict
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "rule": self.rule,
            "verdict": self.verdict.value,
            "residual": self.residual,
            "hypothesis_checks": [h.to_dict() for h in self.hypothesis_checks],
            "lhs": self.lhs.to_dict() if self.lhs is not None else None,
            "rhs": self.rhs.to_dict() if self.rhs is not None else None,
            "extras": self.extras,
        }


def default_residual_tol(ts: TimeScale, t: float) -> float:
    """Exact quotients get a tight bound; probed limits a looser one."""
    return 1e-9 if ts.classify(t).left is Side.SCATTERED else 1e-5


def _tag_of(result, ts: TimeScale, t: float) -> Tag:
    if ts.classify(t).left is Side.DENSE:
        rep = result.endpoint_report
        for label, side in (("left", rep.minus), ("right", rep.plus)):
            if side.kind == "limit" and not side.settled:
                raise EndpointDerivativeMissing(
                    f"one-sided endpoint derivatives on the {label} of {t!r} "
                    f"do not settle to single limits")
    if result.case is DiffCase.CRISP:
        return Tag.BOTH
    if result.case is DiffCase.CASE_I:
        return Tag.I
    if result.case is DiffCase.CASE_II:
        return Tag.II
    return Tag.NEITHER


def tag_i_ii(f: FuzzyFunction, ts: TimeScale, t: float,
             cfg: ProbeConfig = DEFAULT_CONFIG) -> Tag:
    """Which endpoint ordering the derivative at t realizes.

    Both orderings coincide for a crisp derivative (Both). At a left-dense
    point the one-sided endpoint limits must exist; otherwise
    EndpointDerivativeMissing is raised. Switching behavior fits neither
    single ordering and comes back as Neither.
    """
    return _tag_of(nabla_gh(f, ts, t, cfg), ts, t)


def _tags_compatible(a: Tag, b: Tag) -> bool:
    if Tag.NEITHER in (a, b):
        return False
    return a == b or Tag.BOTH in (a, b)


def sum_rule(f: FuzzyFunction, g: FuzzyFunction, ts: TimeScale, t: float,
             cfg: ProbeConfig = DEFAULT_CONFIG,
             tol: float | None = None) -> RuleReport:
    """Check that the derivative of f + g is the sum of the derivatives.

    Hypothesis: both summands realize the same endpoint ordering (a crisp
    derivative is compatible with either).
    """
    if tol is None:
        tol = default_residual_tol(ts, t)
    rf = nabla_gh(f, ts, t, cfg)
    rg = nabla_gh(g, ts, t, cfg)
    tf = _tag_of(rf, ts, t)
    tg = _tag_of(rg, ts, t)
    compatible = _tags_compatible(tf, tg)
    checks = [HypothesisCheck(
        "matching-orderings", compatible,
        f"f is {tf.value}, g is {tg.value}")]
    rhs = add(rf.value, rg.value)

    h = FuzzyFunction(lambda s: add(f(s), g(s)), K=f.K)
    extras = {"tag_f": tf.value, "tag_g": tg.value, "tol": tol}
    try:
        lhs = nabla_gh(h, ts, t, cfg).value
    except (GhNonexistent, LimitDisagreement) as err:
        extras["failure"] = str(err)
        verdict = (Verdict.HYPOTHESIS_FAILED if not compatible
                   else Verdict.RESIDUAL_EXCEEDED)
        return RuleReport("sum", checks, None, rhs, float("inf"), verdict, extras)

    residual = hausdorff(lhs, rhs)
    if not compatible:
        verdict = Verdict.HYPOTHESIS_FAILED
    elif residual <= tol:
        verdict = Verdict.VERIFIED
    else:
        verdict = Verdict.RESIDUAL_EXCEEDED
    return RuleReport("sum", checks, lhs, rhs, residual, verdict, extras)


def _sigma_and_tag(fs: Callable[[float], float], g: FuzzyFunction,
                   ts: TimeScale, t: float, cfg: ProbeConfig):
    dfs = nabla_scalar(fs, ts, t, cfg)
    sigma = fs(t) * dfs
    rg = nabla_gh(g, ts, t, cfg)
    tg = _tag_of(rg, ts, t)
    return dfs, sigma, rg, tg


def product_fuzzy(fs: Callable[[float], float], g: FuzzyFunction,
                  ts: TimeScale, t: float,
                  cfg: ProbeConfig = DEFAULT_CONFIG,
                  tol: float | None = None,
                  enforce: bool = False) -> RuleReport:
    """Check the product rule for a real factor against a fuzzy one.

    Hypothesis: fs(t) * (nabla fs)(t) > 0 with g realizing ordering I, or
    < 0 with ordering II. Both arrangements of the right-hand side are
    checked; their worst deviation is the residual.
    """
    if tol is None:
        tol = default_residual_tol(ts, t)
    dfs, sigma, rg, tg = _sigma_and_tag(fs, g, ts, t, cfg)
    sign_ok = (
        (sigma > 0 and tg in (Tag.I, Tag.BOTH))
        or (sigma < 0 and tg in (Tag.II, Tag.BOTH))
    )
    checks = [HypothesisCheck(
        "sign-matches-ordering", sign_ok,
        f"fs(t)*nabla_fs(t) = {sigma:.6g}, g is {tg.value}")]
    if enforce and not sign_ok:
        raise SignHypothesisFailed(
            f"fs(t)*nabla_fs(t) = {sigma:.6g} does not match ordering {tg.value}")

    rho = ts.rho(t)
    rhs1 = add(scalar_mul(dfs, g(rho)), scalar_mul(fs(t), rg.value))
    rhs2 = add(scalar_mul(fs(rho), rg.value), scalar_mul(dfs, g(t)))
    cross = hausdorff(rhs1, rhs2)

    h = FuzzyFunction(lambda s: scalar_mul(fs(s), g(s)), K=g.K)
    extras = {
        "sigma": sigma,
        "tag_g": tg.value,
        "nabla_fs": dfs,
        "rhs_cross_gap": cross,
        "tol": tol,
    }
    try:
        lhs = nabla_gh(h, ts, t, cfg).value
    except (GhNonexistent, LimitDisagreement) as err:
        extras["failure"] = str(err)
        verdict = (Verdict.HYPOTHESIS_FAILED if not sign_ok
                   else Verdict.RESIDUAL_EXCEEDED)
        return RuleReport("product-fuzzy", checks, None, rhs1, float("inf"),
                          verdict, extras)

    residual = max(hausdorff(lhs, rhs1), hausdorff(lhs, rhs2))
    if not sign_ok:
        verdict = Verdict.HYPOTHESIS_FAILED
    elif residual <= tol:
        verdict = Verdict.VERIFIED
    else:
        verdict = Verdict.RESIDUAL_EXCEEDED
    return RuleReport("product-fuzzy", checks, lhs, rhs1, residual, verdict,
                      extras)


def len_direction(f: FuzzyFunction, ts: TimeScale, t: float,
                  cfg: ProbeConfig = DEFAULT_CONFIG) -> str:
    """How the support width of f changes at t: Increasing, Decreasing,
    Constant or Undetermined.

    At a point with a backward jump the comparison is between rho(t) and t
    only; a forward jump is never consulted. Dense sides contribute width
    slopes from their probe streams; conflicting signs come back as
    Undetermined. Never raises.
    """
    pc = ts.classify(t)
    wt = f(t).len_alpha(0.0)
    tol = cfg.agreement_tol * max(1.0, abs(wt))
    slopes: list[float] = []

    if pc.left is Side.SCATTERED:
        rho = ts.rho(t)
        slopes.append((wt - f(rho).len_alpha(0.0)) / (t - rho))
    else:
        for s in ts.approach_streams(t, "left", cfg.probe_count):
            p = s.points[-1]
            slopes.append((f(p).len_alpha(0.0) - wt) / (p - t))
    if pc.right is Side.DENSE:
        for s in ts.approach_streams(t, "right", cfg.probe_count):
            p = s.points[-1]
            slopes.append((f(p).len_alpha(0.0) - wt) / (p - t))

    if not slopes:
        return "Constant"
    if all(abs(s) <= tol for s in slopes):
        return "Constant"
    pos = any(s > tol for s in slopes)
    neg = any(s < -tol for s in slopes)
    if pos and neg:
        return "Undetermined"
    return "Increasing" if pos else "Decreasing"


def product_interval(fs: Callable[[float], float], g: FuzzyFunction,
                     ts: TimeScale, t: float,
                     cfg: ProbeConfig = DEFAULT_CONFIG,
                     tol: float | None = None,
                     enforce: bool = False) -> RuleReport:
    """Check the interval-flavored product rule.

    Hypothesis: fs(t) * (nabla fs)(t) < 0 with g realizing ordering I, or
    > 0 with ordering II. The equation to check is selected by how the
    width of the product changes at t:

        I,  widening:   d(fs*g) + (-1)*dfs*g(rho) = fs(t)*dg
        I,  narrowing:  d(fs*g) + (-1)*fs(t)*dg   = dfs*g(rho)
        II, widening:   d(fs*g) + (-1)*fs(rho)*dg = dfs*g(t)
        II, narrowing:  d(fs*g) + (-1)*dfs*g(t)   = fs(rho)*dg

    When the width is locally constant both selected forms are evaluated
    and the better one is reported.
    """
    if tol is None:
        tol = default_residual_tol(ts, t)
    dfs, sigma, rg, tg = _sigma_and_tag(fs, g, ts, t, cfg)
    sign_ok = (
        (sigma < 0 and tg in (Tag.I, Tag.BOTH))
        or (sigma > 0 and tg in (Tag.II, Tag.BOTH))
    )
    checks = [HypothesisCheck(
        "sign-matches-ordering", sign_ok,
        f"fs(t)*nabla_fs(t) = {sigma:.6g}, g is {tg.value}")]
    if enforce and not sign_ok:
        raise SignHypothesisFailed(
            f"fs(t)*nabla_fs(t) = {sigma:.6g} does not match ordering {tg.value}")

    rho = ts.rho(t)
    h = FuzzyFunction(lambda s: scalar_mul(fs(s), g(s)), K=g.K)
    direction = len_direction(h, ts, t, cfg)
    if direction == "Undetermined":
        raise LengthDirectionUndetermined(
            f"width slopes of the product disagree in sign around {t!r}")

    extras = {
        "sigma": sigma,
        "tag_g": tg.value,
        "nabla_fs": dfs,
        "len_direction": direction,
        "tol": tol,
    }
    try:
        dh = nabla_gh(h, ts, t, cfg).value
    except (GhNonexistent, LimitDisagreement) as err:
        extras["failure"] = str(err)
        verdict = (Verdict.HYPOTHESIS_FAILED if not sign_ok
                   else Verdict.RESIDUAL_EXCEEDED)
        return RuleReport("product-interval", checks, None, None, float("inf"),
                          verdict, extras)

    use_tag = tg if tg in (Tag.I, Tag.II) else (Tag.I if sigma < 0 else Tag.II)

    def widening_eq():
        if use_tag is Tag.I:
            return (add(dh, scalar_mul(-dfs, g(rho))),
                    scalar_mul(fs(t), rg.value), "widening")
        return (add(dh, scalar_mul(-fs(rho), rg.value)),
                scalar_mul(dfs, g(t)), "widening")

    def narrowing_eq():
        if use_tag is Tag.I:
            return (add(dh, scalar_mul(-fs(t), rg.value)),
                    scalar_mul(dfs, g(rho)), "narrowing")
        return (add(dh, scalar_mul(-dfs, g(t))),
                scalar_mul(fs(rho), rg.value), "narrowing")

    if direction == "Increasing":
        candidates = [widening_eq()]
    elif direction == "Decreasing":
        candidates = [narrowing_eq()]
    else:
        candidates = [widening_eq(), narrowing_eq()]

    best = min(candidates, key=lambda c: hausdorff(c[0], c[1]))
    lhs, rhs, form = best
    residual = hausdorff(lhs, rhs)
    extras["equation"] = form

    if not sign_ok:
        verdict = Verdict.HYPOTHESIS_FAILED
    elif residual <= tol:
        verdict = Verdict.VERIFIED
    else:
        verdict = Verdict.RESIDUAL_EXCEEDED
    return RuleReport("product-interval", checks, lhs, rhs, residual, verdict,
                      extras)
