"""Parser, printer and evaluator for the little spec language."""

import math
import random

import numpy as np
import pytest

from fuzzynabla.dsl import (
    Arm,
    BinOp,
    Const,
    EndpointsDef,
    Name,
    Neg,
    PieceRef,
    Piecewise,
    Sqrt,
    TriDef,
    _finish,
    _Parser,
    bind_function,
    eval_expr,
    eval_function,
    parse_function,
    parse_scalar,
    parse_timescale,
    print_canonical,
)
from fuzzynabla.errors import DslSyntaxError, ValidationError
from fuzzynabla.fuzzy import hausdorff, triangular
from fuzzynabla.timescale import (
    ArithmeticGrid,
    ClosedInterval,
    ExplicitPoints,
    GeometricGrid,
    ReciprocalGrid,
    TimeScale,
)

SQRT2 = math.sqrt(2.0)

EXAMPLE_SCALE = "union(recip(1,400), recip(sqrt2,400), points(0))"
EXAMPLE_FN = (
    "tri(piecewise(in recip(1) => -2, in recip(sqrt2) => t-2), "
    "(t^2+t-2)/2, "
    "piecewise(in recip(1) => t^2+t, in recip(sqrt2) => t^2))"
)


class TestTimescaleParsing:
    def test_single_piece(self):
        ts = parse_timescale("interval(0, 1)")
        assert ts == TimeScale([ClosedInterval(0.0, 1.0)])

    def test_union(self):
        ts = parse_timescale(EXAMPLE_SCALE)
        expect = TimeScale([
            ReciprocalGrid(1.0, 400),
            ReciprocalGrid(SQRT2, 400),
            ExplicitPoints((0.0,)),
        ])
        assert ts == expect

    def test_grids(self):
        assert parse_timescale("hgrid(0, 10, 0.5)") == TimeScale(
            [ArithmeticGrid(0.0, 10.0, 0.5)])
        assert parse_timescale("qgrid(2, 0, 12)") == TimeScale(
            [GeometricGrid(2.0, 0, 12)])

    def test_negative_numbers(self):
        ts = parse_timescale("points(-1, 0, 2.5)")
        assert ts.contains(-1.0) and ts.contains(2.5)

    def test_bad_interval_order(self):
        with pytest.raises(DslSyntaxError):
            parse_timescale("interval(3, 1)")

    def test_bad_qgrid_base(self):
        with pytest.raises(DslSyntaxError):
            parse_timescale("qgrid(1, 0, 4)")

    def test_trailing_junk(self):
        with pytest.raises(DslSyntaxError) as e:
            parse_timescale("interval(0, 1) extra")
        assert "end of input" in str(e.value)


class TestScalarExpressions:
    def test_precedence(self):
        assert eval_expr(parse_scalar("2 + 3 * 4 ^ 2"), 0.0) == 50.0

    def test_left_associativity(self):
        assert eval_expr(parse_scalar("8 - 3 - 2"), 0.0) == 3.0
        assert eval_expr(parse_scalar("8 / 2 / 2"), 0.0) == 2.0

    def test_unary_minus(self):
        e = parse_scalar("-3")
        assert e == Const(-3.0)
        assert eval_expr(parse_scalar("-t^2"), 3.0) == -9.0

    def test_constants(self):
        assert eval_expr(parse_scalar("sqrt2 * sqrt2"), 0.0) == pytest.approx(2.0)
        assert eval_expr(parse_scalar("pi"), 0.0) == math.pi

    def test_sqrt(self):
        assert eval_expr(parse_scalar("sqrt(t + 2)"), 2.0) == 2.0
        with pytest.raises(ValidationError):
            eval_expr(parse_scalar("sqrt(t)"), -1.0)

    def test_division_by_zero(self):
        with pytest.raises(ValidationError):
            eval_expr(parse_scalar("1 / t"), 0.0)

    def test_negative_exponent(self):
        assert eval_expr(parse_scalar("t^-2"), 2.0) == 0.25

    def test_no_implicit_multiplication(self):
        with pytest.raises(DslSyntaxError):
            parse_scalar("2 t")

    def test_alpha_rejected_outside_endpoints(self):
        with pytest.raises(DslSyntaxError):
            parse_scalar("alpha + 1")


class TestPositionedErrors:
    def test_column_of_unexpected_token(self):
        with pytest.raises(DslSyntaxError) as e:
            parse_function("tri(1, 2 3)")
        assert e.value.line == 1
        assert e.value.col == 10
        assert "','" in e.value.expected

    def test_line_tracking(self):
        with pytest.raises(DslSyntaxError) as e:
            parse_timescale("union(\n  bogus(1))")
        assert e.value.line == 2
        assert e.value.col == 3

    def test_end_of_input(self):
        src = "union(interval(0, 1)"
        with pytest.raises(DslSyntaxError) as e:
            parse_timescale(src)
        assert e.value.col == len(src) + 1

    def test_message_format(self):
        with pytest.raises(DslSyntaxError) as e:
            parse_scalar("(1 + ")
        assert "line 1, col" in str(e.value)


class TestFunctionDefs:
    def test_tri_parses(self):
        d = parse_function("tri(t, t + 1, t + 3)")
        assert isinstance(d, TriDef)
        u = eval_function(d, 2.0, K=4)
        assert hausdorff(u, triangular(2.0, 3.0, 5.0, 4)) == 0.0

    def test_endpoints_with_alpha(self):
        d = parse_function("endpoints(t + alpha; 3 * t - alpha)")
        assert isinstance(d, EndpointsDef)
        u = eval_function(d, 2.0, K=4)
        assert u.level(0.0).as_tuple() == (2.0, 6.0)
        assert u.level(1.0).as_tuple() == (3.0, 5.0)

    def test_alpha_in_tri_rejected(self):
        with pytest.raises(DslSyntaxError):
            parse_function("tri(alpha, alpha + 1, alpha + 2)")

    def test_universally_bad_def_rejected_at_parse(self):
        with pytest.raises(ValidationError):
            parse_function("tri(t, t - 1, t + 1)")

    def test_pointwise_bad_def_passes_parse_fails_bind(self):
        d = parse_function("tri(0, t, 1)")  # needs 0 <= t <= 1
        ts = TimeScale([ArithmeticGrid(0.0, 5.0, 1.0)])
        with pytest.raises(ValidationError):
            bind_function(d, ts, K=4)

    def test_endpoints_crossing_rejected_at_bind(self):
        d = parse_function("endpoints(t; 1 - t)")  # crosses at t = 1/2
        ts = TimeScale([ClosedInterval(0.0, 1.0)])
        with pytest.raises(ValidationError):
            bind_function(d, ts, K=4)


class TestExampleFunction:
    def setup_method(self):
        self.ts = parse_timescale(EXAMPLE_SCALE)
        self.d = parse_function(EXAMPLE_FN)

    def test_on_first_generator(self):
        u = eval_function(self.d, 1.0, K=4, ts=self.ts)
        assert hausdorff(u, triangular(-2.0, 0.0, 2.0, 4)) <= 1e-15

    def test_on_second_generator(self):
        t = SQRT2
        u = eval_function(self.d, t, K=4, ts=self.ts)
        expect = triangular(t - 2.0, (t * t + t - 2.0) / 2.0, t * t, 4)
        assert hausdorff(u, expect) <= 1e-15

    def test_at_accumulation_point_first_arm_wins(self):
        u = eval_function(self.d, 0.0, K=4, ts=self.ts)
        assert hausdorff(u, triangular(-2.0, -1.0, 0.0, 4)) <= 1e-15

    def test_binding_validates_and_evaluates(self):
        f = bind_function(self.d, self.ts, K=8)
        u = f(0.5)  # 1/2 lies on the first generator
        assert u.level(1.0).lo == pytest.approx((0.25 + 0.5 - 2.0) / 2.0)

    def test_arm_must_cover_scale(self):
        d = parse_function("tri(piecewise(in recip(1) => -2), 0, 2)")
        with pytest.raises(ValidationError):
            bind_function(d, self.ts, K=4)


class TestCanonicalPrinting:
    CASES = [
        "t + 1",
        "t - 1 - 2",
        "2 * (t + 1)",
        "-(t + 1)",
        "t^3",
        "(t + 1)^2",
        "t^-1",
        "sqrt(t + 2)",
        "t / (t + 1) / 2",
        "piecewise(in recip(1) => -2, in recip(sqrt2) => t - 2)",
    ]

    @pytest.mark.parametrize("src", CASES)
    def test_round_trip(self, src):
        tree = parse_scalar(src)
        printed = print_canonical(tree)
        assert parse_scalar(printed) == tree

    def test_function_round_trip(self):
        d = parse_function(EXAMPLE_FN)
        assert parse_function(print_canonical(d)) == d

    def test_timescale_round_trip(self):
        ts = parse_timescale(EXAMPLE_SCALE)
        assert parse_timescale(print_canonical(ts)) == ts

    def test_integral_floats_print_as_ints(self):
        assert print_canonical(Const(3.0)) == "3"
        assert print_canonical(Const(-2.0)) == "-2"
        assert print_canonical(parse_scalar("2.5 * t")) == "2.5 * t"


def _rand_expr(rng: random.Random, depth: int, allow_alpha: bool):
    if depth == 0:
        roll = rng.random()
        if roll < 0.45:
            if rng.random() < 0.5:
                return Const(float(rng.randint(-9, 9)))
            return Const(round(rng.uniform(-10, 10), 3))
        if roll < 0.8:
            return Name("t")
        if roll < 0.9 and allow_alpha:
            return Name("alpha")
        return Name(rng.choice(["sqrt2", "pi"]))
    roll = rng.random()
    if roll < 0.55:
        op = rng.choice("+-*/")
        return BinOp(op, _rand_expr(rng, depth - 1, allow_alpha),
                     _rand_expr(rng, depth - 1, allow_alpha))
    if roll < 0.7:
        return BinOp("^", _rand_expr(rng, 0, allow_alpha),
                     Const(float(rng.randint(-3, 5))))
    if roll < 0.8:
        arg = _rand_expr(rng, depth - 1, allow_alpha)
        return arg if isinstance(arg, Const) else Neg(arg)
    if roll < 0.9:
        return Sqrt(_rand_expr(rng, depth - 1, allow_alpha))
    kinds = [("recip", (1.0,)), ("recip", (SQRT2,)), ("interval", (0.0, 1.0)),
             ("hgrid", (0.0, 10.0)), ("points", ()), ("qgrid", (2.0,))]
    arms = tuple(
        Arm(PieceRef(k, a), _rand_expr(rng, depth - 1, allow_alpha))
        for k, a in rng.sample(kinds, rng.randint(1, 3))
    )
    return Piecewise(arms)


class TestRandomRoundTrips:
    def test_seeded_sample(self):
        rng = random.Random(20260819)
        for _ in range(500):
            allow_alpha = rng.random() < 0.3
            tree = _rand_expr(rng, rng.randint(0, 4), allow_alpha)
            printed = print_canonical(tree)
            if allow_alpha:
                p = _Parser(printed)
                reparsed = _finish(p, p.expr(True))
            else:
                reparsed = parse_scalar(printed)
            assert reparsed == tree

    def test_eval_matches_python(self):
        rng = random.Random(7)
        for _ in range(200):
            tree = _rand_expr(rng, 2, allow_alpha=False)
            printed = print_canonical(tree)
            try:
                v1 = eval_expr(tree, 1.75)
            except (ValidationError, OverflowError, ZeroDivisionError):
                continue
            v2 = eval_expr(parse_scalar(printed), 1.75)
            assert v1 == pytest.approx(v2, abs=1e-12)
