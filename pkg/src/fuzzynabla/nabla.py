"""Backward (nabla) derivatives of fuzzy-valued functions on time scales.

At a point with a backward jump the derivative is the exact quotient of the
generalized difference by the graininess. At a left-dense point it is a
limit, estimated from one-sided probe streams: every local generator piece
contributes its own stream, so functions whose endpoint slopes oscillate
between generators (the reason switching cases exist) are handled honestly:
per-stream subsequence estimates are reported, disagreement beyond tolerance
is surfaced instead of averaged away, and non-existence of an endpoint
derivative is only certified when two labeled subsequences drift apart by
more than ten times the agreement tolerance.

Nothing here trusts a theorem hypothesis: classification and the checkers
measure everything they claim.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .errors import (
    GhNonexistent,
    GridMismatch,
    LimitDisagreement,
    NotInDomain,
)
from .fuzzy import FuzzyNumber, add, alpha_grid, gh_diff, h_diff, hausdorff, scalar_mul
from .timescale import PointClass, Side, Stream, TimeScale

# how much larger than the agreement tolerance a subsequence split must be
# before non-existence is certified rather than left inconclusive
NONEXISTENCE_FACTOR = 10.0


@dataclass(frozen=True)
class ProbeConfig:
    """Controls one-sided limit estimation.

    probe_count nearest points per stream are used; the estimate is the
    closest probe's quotient and the residual is the spread over the tail
    half. Richardson extrapolation (ratio-2) applies only to synthetic
    streams inside real intervals; generator streams have step ratios near 1
    where extrapolation is unstable. subsequence_split keeps generator
    streams separate; turning it off merges them (faster, but switching
    classification and certified non-existence need the split).
    """

    probe_count: int = 8
    agreement_tol: float = 1e-6
    richardson: bool = True
    subsequence_split: bool = True

    def __post_init__(self):
        if self.probe_count < 3:
            raise ValueError("probe_count must be at least 3")
        if self.agreement_tol <= 0:
            raise ValueError("agreement_tol must be positive")


DEFAULT_CONFIG = ProbeConfig()


class DiffCase(Enum):
    CASE_I = "CaseI"
    CASE_II = "CaseII"
    CRISP = "Crisp"
    SWITCHING_III = "SwitchingIII"
    SWITCHING_IV = "SwitchingIV"
    NOT_DIFFERENTIABLE = "NotDifferentiable"


class FuzzyFunction:
    """A mapping t -> FuzzyNumber on a fixed level grid, with caching."""

    def __init__(self, fn: Callable[[float], FuzzyNumber], K: int = 100,
                 domain: TimeScale | None = None, name: str = ""):
        self._fn = fn
        self.K = int(K)
        self.domain = domain
        self.name = name
        self._cache: dict[float, FuzzyNumber] = {}

    def __call__(self, t: float) -> FuzzyNumber:
        t = float(t)
        hit = self._cache.get(t)
        if hit is not None:
            return hit
        val = self._fn(t)
        if not isinstance(val, FuzzyNumber):
            raise TypeError(f"function returned {type(val).__name__}, not FuzzyNumber")
        if val.K != self.K:
            raise GridMismatch(f"function declared K={self.K} but returned K={val.K}")
        self._cache[t] = val
        return val

    @classmethod
    def constant(cls, u: FuzzyNumber, domain: TimeScale | None = None) -> "FuzzyFunction":
        return cls(lambda t: u, K=u.K, domain=domain, name="constant")


# ---------------------------------------------------------------------------
# probing


@dataclass
class _StreamData:
    """Slope data for one probe stream on one side (columns = levels)."""

    label: str
    synthetic: bool
    points: tuple[float, ...]
    lo_est: np.ndarray
    hi_est: np.ndarray
    lo_tail: np.ndarray
    hi_tail: np.ndarray
    vlo_est: np.ndarray
    vhi_est: np.ndarray
    v_tail: np.ndarray
    gh_cases: list[str]


def _tail_spread(Q: np.ndarray) -> np.ndarray:
    """Max pairwise spread per column over the trailing half (>= 2 rows)."""
    m = len(Q)
    if m < 2:
        return np.zeros(Q.shape[1])
    start = min(m - 2, m // 2)
    tail = Q[start:]
    return tail.max(axis=0) - tail.min(axis=0)


def _probe_side(f: FuzzyFunction, ts: TimeScale, t: float, side: str,
                cfg: ProbeConfig) -> list[_StreamData]:
    """Quotient data for every probe stream on a dense side of t."""
    streams = ts.approach_streams(t, side, cfg.probe_count)
    if not cfg.subsequence_split and len(streams) > 1:
        # the count nearest members of the union, ordered toward t
        pool = sorted({p for s in streams for p in s.points},
                      key=lambda p: abs(p - t))
        keep = sorted(pool[:cfg.probe_count], key=lambda p: -abs(p - t))
        streams = [Stream("merged", tuple(keep), False)]

    Ft = f(t)
    out: list[_StreamData] = []
    for s in streams:
        m = len(s.points)
        Qlo = np.empty((m, f.K + 1))
        Qhi = np.empty((m, f.K + 1))
        cases = []
        for j, p in enumerate(s.points):
            Fp = f(p)
            if side == "right":
                res = gh_diff(Fp, Ft)
            else:
                res = gh_diff(Ft, Fp)
            if res.value is None:
                raise GhNonexistent(
                    f"generalized difference does not exist at probe {p!r} "
                    f"({side} of {t!r})",
                    {"probe": p, "side": side, **res.diagnostics},
                )
            cases.append(res.case.value)
            dt = p - t
            Qlo[j] = (Fp.lower - Ft.lower) / dt
            Qhi[j] = (Fp.upper - Ft.upper) / dt

        Vlo = np.minimum(Qlo, Qhi)
        Vhi = np.maximum(Qlo, Qhi)
        if cfg.richardson and s.synthetic and m >= 2:
            Qlo = 2.0 * Qlo[1:] - Qlo[:-1]
            Qhi = 2.0 * Qhi[1:] - Qhi[:-1]
            Vlo = 2.0 * Vlo[1:] - Vlo[:-1]
            Vhi = 2.0 * Vhi[1:] - Vhi[:-1]

        out.append(
            _StreamData(
                label=s.label,
                synthetic=s.synthetic,
                points=s.points,
                lo_est=Qlo[-1].copy(),
                hi_est=Qhi[-1].copy(),
                lo_tail=_tail_spread(Qlo),
                hi_tail=_tail_spread(Qhi),
                vlo_est=Vlo[-1].copy(),
                vhi_est=Vhi[-1].copy(),
                v_tail=np.maximum(_tail_spread(Vlo), _tail_spread(Vhi)),
                gh_cases=cases,
            )
        )
    return out


# ---------------------------------------------------------------------------
# endpoint report


@dataclass
class SideData:
    """One-sided endpoint derivative data at a point.

    kind is 'scattered' (exact jump quotient), 'limit' (probed dense side)
    or 'absent' (no points on that side). exists flags per level are
    1 (limit established), 0 (certified not to exist: two labeled
    subsequences disagree beyond 10x tolerance) or -1 (inconclusive).
    """

    kind: str
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    lower_exists: np.ndarray | None = None
    upper_exists: np.ndarray | None = None
    residual: np.ndarray | None = None
    streams: dict[str, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)

    @property
    def settled(self) -> bool:
        if self.kind == "scattered":
            return True
        if self.kind != "limit":
            return False
        return bool(np.all(self.lower_exists == 1) and np.all(self.upper_exists == 1))


@dataclass
class EndpointReport:
    """Per-level one-sided endpoint derivative estimates at one point."""

    t: float
    alphas: np.ndarray
    minus: SideData
    plus: SideData

    def rows(self) -> list[dict]:
        out = []

        def entry(side: SideData, which: str, k: int):
            if side.kind == "absent":
                return {"value": None, "exists": None, "residual": None,
                        "subsequence_limits": {}}
            arr = side.lower if which == "lower" else side.upper
            ex = side.lower_exists if which == "lower" else side.upper_exists
            flag = True if side.kind == "scattered" else (
                True if ex[k] == 1 else False if ex[k] == 0 else None
            )
            res = 0.0 if side.kind == "scattered" else float(side.residual[k])
            subs = {
                label: float((lo if which == "lower" else hi)[k])
                for label, (lo, hi) in side.streams.items()
            }
            return {
                "value": float(arr[k]),
                "exists": flag,
                "residual": res,
                "subsequence_limits": subs,
            }

        for k, a in enumerate(self.alphas):
            out.append(
                {
                    "alpha": float(a),
                    "dminus_lower": entry(self.minus, "lower", k),
                    "dminus_upper": entry(self.minus, "upper", k),
                    "dplus_lower": entry(self.plus, "lower", k),
                    "dplus_upper": entry(self.plus, "upper", k),
                }
            )
        return out

    def to_dict(self) -> dict:
        return {"t": self.t, "levels": self.rows()}


def _scattered_side(f: FuzzyFunction, t: float, neighbor: float) -> SideData:
    Ft, Fn = f(t), f(neighbor)
    dt = neighbor - t
    lo = (Fn.lower - Ft.lower) / dt
    hi = (Fn.upper - Ft.upper) / dt
    n = f.K + 1
    return SideData(
        kind="scattered",
        lower=lo,
        upper=hi,
        lower_exists=np.ones(n, dtype=int),
        upper_exists=np.ones(n, dtype=int),
        residual=np.zeros(n),
    )


def _limit_side(streams: list[_StreamData], cfg: ProbeConfig) -> SideData:
    n = len(streams[0].lo_est)
    lo_mat = np.stack([s.lo_est for s in streams])
    hi_mat = np.stack([s.hi_est for s in streams])
    lo_tail = np.stack([s.lo_tail for s in streams]).max(axis=0)
    hi_tail = np.stack([s.hi_tail for s in streams]).max(axis=0)
    lo_spread = lo_mat.max(axis=0) - lo_mat.min(axis=0)
    hi_spread = hi_mat.max(axis=0) - hi_mat.min(axis=0)

    atol = cfg.agreement_tol

    def flags(spread, tail):
        ex = np.full(n, -1, dtype=int)
        ok = (spread <= atol) & (tail <= atol)
        ex[ok] = 1
        if len(streams) > 1:
            ex[spread > NONEXISTENCE_FACTOR * atol] = 0
        return ex

    return SideData(
        kind="limit",
        lower=lo_mat.mean(axis=0),
        upper=hi_mat.mean(axis=0),
        lower_exists=flags(lo_spread, lo_tail),
        upper_exists=flags(hi_spread, hi_tail),
        residual=np.maximum(
            np.maximum(lo_tail, hi_tail), np.maximum(lo_spread, hi_spread)
        ),
        streams={s.label: (s.lo_est, s.hi_est) for s in streams},
    )


def _analyze(f: FuzzyFunction, ts: TimeScale, t: float, cfg: ProbeConfig):
    """Classification data shared by the derivative and the report."""
    pc = ts.classify(t)
    probes: dict[str, list[_StreamData]] = {}

    if pc.left is Side.SCATTERED:
        minus = _scattered_side(f, t, ts.rho(t))
    else:
        streams = _probe_side(f, ts, t, "left", cfg)
        if streams:
            probes["left"] = streams
            minus = _limit_side(streams, cfg)
        else:
            minus = SideData(kind="absent")

    if pc.right is Side.SCATTERED:
        sig = ts.sigma(t)
        plus = _scattered_side(f, t, sig) if sig != t else SideData(kind="absent")
    else:
        streams = _probe_side(f, ts, t, "right", cfg)
        if streams:
            probes["right"] = streams
            plus = _limit_side(streams, cfg)
        else:
            plus = SideData(kind="absent")

    report = EndpointReport(t=t, alphas=alpha_grid(f.K), minus=minus, plus=plus)
    return pc, report, probes


def endpoint_derivatives(f: FuzzyFunction, ts: TimeScale, t: float,
                         cfg: ProbeConfig = DEFAULT_CONFIG) -> EndpointReport:
    """One-sided endpoint derivative estimates per level, with existence
    flags and per-generator subsequence limits."""
    t = float(t)
    if not ts.contains(t):
        raise NotInDomain(t, f"point {t!r} is not in the time scale")
    return _analyze(f, ts, t, cfg)[1]


# ---------------------------------------------------------------------------
# the derivative


@dataclass
class DerivativeResult:
    t: float
    value: FuzzyNumber | None
    case: DiffCase
    residual: float
    endpoint_report: EndpointReport
    evidence: dict

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "case": self.case.value,
            "residual": self.residual,
            "value": self.value.to_dict() if self.value is not None else None,
            "endpoint_report": self.endpoint_report.to_dict(),
            "evidence": _jsonable(self.evidence),
        }


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [float(v) for v in x]
    if isinstance(x, (np.floating, np.integer)):
        return float(x)
    return x


def _dense_value(probes: dict[str, list[_StreamData]],
                 cfg: ProbeConfig, t: float):
    """Limit estimate of the derivative from the probed dense sides."""
    if not probes:
        raise LimitDisagreement(
            f"no probe points available on any dense side of {t!r}")

    side_means = []
    residual = 0.0
    for side, streams in probes.items():
        vlo = np.stack([s.vlo_est for s in streams])
        vhi = np.stack([s.vhi_est for s in streams])
        spread = max(
            float(np.max(vlo.max(axis=0) - vlo.min(axis=0))),
            float(np.max(vhi.max(axis=0) - vhi.min(axis=0))),
        )
        tail = max(float(np.max(s.v_tail)) for s in streams)
        if spread > cfg.agreement_tol:
            raise LimitDisagreement(
                f"subsequence estimates on the {side} of {t!r} disagree by "
                f"{spread:.3g} (tolerance {cfg.agreement_tol:.3g})",
                {"side": side, "spread": spread},
            )
        if tail > cfg.agreement_tol:
            raise LimitDisagreement(
                f"probe quotients on the {side} of {t!r} have not settled: "
                f"tail spread {tail:.3g} (tolerance {cfg.agreement_tol:.3g})",
                {"side": side, "tail": tail},
            )
        residual = max(residual, spread, tail)
        side_means.append((vlo.mean(axis=0), vhi.mean(axis=0)))

    if len(side_means) == 2:
        gap = max(
            float(np.max(np.abs(side_means[0][0] - side_means[1][0]))),
            float(np.max(np.abs(side_means[0][1] - side_means[1][1]))),
        )
        if gap > cfg.agreement_tol:
            raise LimitDisagreement(
                f"left and right limits at {t!r} disagree by {gap:.3g} "
                f"(tolerance {cfg.agreement_tol:.3g})",
                {"gap": gap},
            )
        residual = max(residual, gap)

    lo = np.mean([m[0] for m in side_means], axis=0)
    hi = np.mean([m[1] for m in side_means], axis=0)

    # estimates carry O(residual) noise; repair to exact cut structure and
    # reject anything that is structurally broken rather than noisy
    viol = 0.0
    if len(lo) > 1:
        viol = max(viol, float(np.max(-np.diff(lo), initial=0.0)),
                   float(np.max(np.diff(hi), initial=0.0)))
    viol = max(viol, float(np.max(lo - hi, initial=0.0)))
    if viol > max(cfg.agreement_tol, 10.0 * residual):
        raise LimitDisagreement(
            f"estimated derivative at {t!r} violates cut structure by {viol:.3g}",
            {"violation": viol},
        )
    lo = np.maximum.accumulate(lo)
    hi = np.minimum.accumulate(hi)
    bad = lo > hi
    if np.any(bad):
        mid = 0.5 * (lo[bad] + hi[bad])
        lo = lo.copy()
        hi = hi.copy()
        lo[bad] = mid
        hi[bad] = mid
    return FuzzyNumber(lo, hi, validate=False), residual


def classify_case(value: FuzzyNumber | None, report: EndpointReport,
                  pclass: PointClass, cfg: ProbeConfig = DEFAULT_CONFIG,
                  residual: float = 0.0) -> DiffCase:
    """Structure of the derivative at one point.

    Crisp values short-circuit. At a left-scattered point the backward
    quotient decides between the two orderings (the forward jump quotient is
    diagnostic only). At left-dense points the one-sided estimates decide:
    matching orders on the participating sides give the plain cases; a
    correctly-ordered right side against a swapped left side is the third
    (switching) case, the mirror image the fourth. When one-sided limits
    split by generator, the aligned stream's side plays that role.
    """
    if value is None:
        return DiffCase.NOT_DIFFERENTIABLE
    ctol = max(cfg.agreement_tol, 2.0 * residual)
    vlo, vhi = value.lower, value.upper
    if float(np.max(vhi - vlo)) <= ctol:
        return DiffCase.CRISP

    def match(a: np.ndarray, b: np.ndarray) -> bool:
        return (float(np.max(np.abs(vlo - a))) <= ctol
                and float(np.max(np.abs(vhi - b))) <= ctol)

    if pclass.left is Side.SCATTERED:
        m = report.minus
        if m.kind != "scattered":
            return DiffCase.NOT_DIFFERENTIABLE
        if match(m.lower, m.upper):
            return DiffCase.CASE_I
        if match(m.upper, m.lower):
            return DiffCase.CASE_II
        return DiffCase.NOT_DIFFERENTIABLE

    sides = {}
    if report.minus.kind == "limit":
        sides["minus"] = report.minus
    if report.plus.kind == "limit":
        sides["plus"] = report.plus
    if not sides:
        return DiffCase.NOT_DIFFERENTIABLE

    if all(s.settled for s in sides.values()):
        al = {name: match(s.lower, s.upper) for name, s in sides.items()}
        sw = {name: match(s.upper, s.lower) for name, s in sides.items()}
        if all(al.values()):
            return DiffCase.CASE_I
        if all(sw.values()):
            return DiffCase.CASE_II
        if len(sides) == 2:
            if al["plus"] and sw["minus"]:
                return DiffCase.SWITCHING_III
            if al["minus"] and sw["plus"]:
                return DiffCase.SWITCHING_IV
        return DiffCase.NOT_DIFFERENTIABLE

    # one-sided limits split by generator: classify stream by stream
    aligned_sides: set[str] = set()
    swapped_sides: set[str] = set()
    for name, s in sides.items():
        for label, (slo, shi) in s.streams.items():
            if match(slo, shi):
                aligned_sides.add(name)
            elif match(shi, slo):
                swapped_sides.add(name)
            else:
                return DiffCase.NOT_DIFFERENTIABLE
    if not swapped_sides and aligned_sides:
        return DiffCase.CASE_I
    if not aligned_sides and swapped_sides:
        return DiffCase.CASE_II
    if "plus" in aligned_sides:
        return DiffCase.SWITCHING_III
    if "minus" in aligned_sides:
        return DiffCase.SWITCHING_IV
    return DiffCase.NOT_DIFFERENTIABLE


def nabla_gh(f: FuzzyFunction, ts: TimeScale, t: float,
             cfg: ProbeConfig = DEFAULT_CONFIG) -> DerivativeResult:
    """The backward derivative of f at t.

    Left-scattered t: exact quotient of the generalized difference by the
    graininess (residual 0). Left-dense t: both one-sided limits (where the
    scale has points) must settle and agree within cfg.agreement_tol.

    Raises NotInDomain outside the derivative domain, GhNonexistent when a
    required generalized difference fails at the jump or at a probe, and
    LimitDisagreement when estimates do not settle or sides disagree.
    """
    t = float(t)
    if not ts.contains(t):
        raise NotInDomain(t, f"point {t!r} is not in the time scale")
    if not ts.in_kappa(t):
        raise NotInDomain(
            t, f"point {t!r} is a right-scattered minimum: outside the "
               f"derivative domain")

    pc, report, probes = _analyze(f, ts, t, cfg)
    evidence: dict = {}

    if pc.left is Side.SCATTERED:
        rho = ts.rho(t)
        nu = t - rho
        res = gh_diff(f(t), f(rho))
        if res.value is None:
            raise GhNonexistent(
                f"generalized difference of f({t!r}) and f({rho!r}) does not "
                f"exist", res.diagnostics)
        value = scalar_mul(1.0 / nu, res.value)
        residual = 0.0
        evidence["path"] = "backward-quotient"
        evidence["gh_case"] = res.case.value
        if pc.right is Side.DENSE and "right" in probes:
            evidence["h_orientations"] = _h_orientations(f, rho, probes["right"])
    else:
        value, residual = _dense_value(probes, cfg, t)
        evidence["path"] = "one-sided-limits"
        evidence["gh_cases"] = {
            side: {s.label: s.gh_cases for s in streams}
            for side, streams in probes.items()
        }

    evidence["continuity_gaps"] = {
        side: {
            s.label: [float(hausdorff(f(p), f(t))) for p in s.points]
            for s in streams
        }
        for side, streams in probes.items()
    }

    case = classify_case(value, report, pc, cfg, residual)
    if case is DiffCase.NOT_DIFFERENTIABLE:
        raise LimitDisagreement(
            f"derivative estimate at {t!r} converged but the endpoint case "
            f"structure did not resolve", {"residual": residual})
    return DerivativeResult(t, value, case, residual, report, evidence)


def _h_orientations(f: FuzzyFunction, rho: float,
                    streams: list[_StreamData]) -> dict:
    """Which classical-difference orientations appear among right probes."""
    fwd = bwd = 0
    Fr = f(rho)
    for s in streams:
        for p in s.points:
            if h_diff(f(p), Fr) is not None:
                fwd += 1
            if h_diff(Fr, f(p)) is not None:
                bwd += 1
    return {"forward": fwd, "backward": bwd}


def derivative_report(f: FuzzyFunction, ts: TimeScale, t: float,
                      cfg: ProbeConfig = DEFAULT_CONFIG) -> DerivativeResult:
    """nabla_gh, but failures come back as a NotDifferentiable result with
    the reason in evidence instead of an exception (NotInDomain still
    raises: asking outside the domain is a caller error)."""
    try:
        return nabla_gh(f, ts, t, cfg)
    except (GhNonexistent, LimitDisagreement) as e:
        report = endpoint_derivatives(f, ts, t, cfg)
        return DerivativeResult(
            t=float(t),
            value=None,
            case=DiffCase.NOT_DIFFERENTIABLE,
            residual=math.inf,
            endpoint_report=report,
            evidence={"failure": type(e).__name__, "message": str(e),
                      "diagnostics": _jsonable(getattr(e, "diagnostics", {}))},
        )


def nabla_scalar(g: Callable[[float], float], ts: TimeScale, t: float,
                 cfg: ProbeConfig = DEFAULT_CONFIG) -> float:
    """Backward derivative of a real-valued function on the scale."""
    t = float(t)
    if not ts.contains(t):
        raise NotInDomain(t, f"point {t!r} is not in the time scale")
    if not ts.in_kappa(t):
        raise NotInDomain(
            t, f"point {t!r} is a right-scattered minimum: outside the "
               f"derivative domain")
    pc = ts.classify(t)
    if pc.left is Side.SCATTERED:
        rho = ts.rho(t)
        return (g(t) - g(rho)) / (t - rho)

    gt = g(t)
    ests = []
    worst_tail = 0.0
    for side in ("left", "right"):
        if side == "left" and pc.left is not Side.DENSE:
            continue
        if side == "right" and pc.right is not Side.DENSE:
            continue
        streams = ts.approach_streams(t, side, cfg.probe_count)
        for s in streams:
            q = np.array([(g(p) - gt) / (p - t) for p in s.points])
            if cfg.richardson and s.synthetic and len(q) >= 2:
                q = 2.0 * q[1:] - q[:-1]
            ests.append(float(q[-1]))
            worst_tail = max(worst_tail, float(_tail_spread(q[:, None])[0]))
    if not ests:
        raise LimitDisagreement(f"no probe points around {t!r}")
    spread = max(ests) - min(ests)
    if spread > cfg.agreement_tol or worst_tail > cfg.agreement_tol:
        raise LimitDisagreement(
            f"scalar derivative estimates at {t!r} disagree by "
            f"{max(spread, worst_tail):.3g}")
    return float(np.mean(ests))


# ---------------------------------------------------------------------------
# identity checkers


def check_rho_identity(f: FuzzyFunction, ts: TimeScale, t: float,
                       cfg: ProbeConfig = DEFAULT_CONFIG) -> float:
    """Residual of the backward reconstruction identity at t.

    One of the two reconstructions must hold: f(t) = f(rho(t)) + nu * value,
    or f(rho(t)) = f(t) + (-nu) * value. Returns the smaller residual."""
    r = nabla_gh(f, ts, t, cfg)
    rho = ts.rho(t)
    nu = t - rho
    Ft, Fr = f(t), f(rho)
    first = hausdorff(Ft, add(Fr, scalar_mul(nu, r.value)))
    second = hausdorff(Fr, add(Ft, scalar_mul(-nu, r.value)))
    return min(first, second)


def check_level_consistency(f: FuzzyFunction, ts: TimeScale, t: float,
                            cfg: ProbeConfig = DEFAULT_CONFIG) -> float:
    """Worst gap between the fuzzy derivative's cuts and interval-valued
    derivatives computed independently level by level.

    The per-level path works on plain floats: backward quotient of the
    interval endpoints at a left-scattered point, probed one-sided interval
    quotients at a left-dense point. No fuzzy machinery is reused."""
    r = nabla_gh(f, ts, t, cfg)
    pc = ts.classify(t)
    K = f.K
    worst = 0.0

    if pc.left is Side.SCATTERED:
        rho = ts.rho(t)
        nu = t - rho
        Ft, Fr = f(t), f(rho)
        for k in range(K + 1):
            dlo = (Ft.lower[k] - Fr.lower[k]) / nu
            dhi = (Ft.upper[k] - Fr.upper[k]) / nu
            ilo, ihi = min(dlo, dhi), max(dlo, dhi)
            cut = r.value.level(k / K if K else 0.0)
            worst = max(worst, abs(ilo - cut.lo), abs(ihi - cut.hi))
        return worst

    # dense: replicate the estimation per level with scalar arithmetic
    sides = []
    for side in ("left", "right"):
        if side == "left" and pc.left is not Side.DENSE:
            continue
        if side == "right" and pc.right is not Side.DENSE:
            continue
        streams = ts.approach_streams(t, side, cfg.probe_count)
        if streams:
            sides.append((side, streams))
    Ft = f(t)
    for k in range(K + 1):
        side_los, side_his = [], []
        for side, streams in sides:
            s_lo, s_hi = [], []
            for s in streams:
                q_lo, q_hi = [], []
                for p in s.points:
                    Fp = f(p)
                    a = (Fp.lower[k] - Ft.lower[k]) / (p - t)
                    b = (Fp.upper[k] - Ft.upper[k]) / (p - t)
                    q_lo.append(min(a, b))
                    q_hi.append(max(a, b))
                if cfg.richardson and s.synthetic and len(q_lo) >= 2:
                    q_lo = [2 * q_lo[j + 1] - q_lo[j] for j in range(len(q_lo) - 1)]
                    q_hi = [2 * q_hi[j + 1] - q_hi[j] for j in range(len(q_hi) - 1)]
                s_lo.append(q_lo[-1])
                s_hi.append(q_hi[-1])
            side_los.append(sum(s_lo) / len(s_lo))
            side_his.append(sum(s_hi) / len(s_hi))
        ilo = sum(side_los) / len(side_los)
        ihi = sum(side_his) / len(side_his)
        cut = r.value.level(k / K if K else 0.0)
        worst = max(worst, abs(ilo - cut.lo), abs(ihi - cut.hi))
    return worst
