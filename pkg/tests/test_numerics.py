# tests/test_numerics.py
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from models.errors import FormatTooLarge, NotRepresentable
from models.numerics import (
    ERR, FloatFormat, FloatValue, enumerate_format, float_arith, format_decimal, format_rational, inj,
    parse_real, predecessor, proj, real_arith, rounding_boundaries, successor,
)

F = Fraction
OPS = ("+", "-", "*", "/")


def nearest_even(values, r):
    """Argmin of |f - r| over the enumeration, ties to the even last bit (zero always wins)."""
    best = min(abs(f.to_fraction() - r) for f in values)
    candidates = [f for f in values if abs(f.to_fraction() - r) == best]
    if len(candidates) == 1:
        return candidates[0]
    for f in candidates:
        if f.is_zero:
            return f
    (even,) = [f for f in candidates if f.last_bit == 0]
    return even


class TestRealArith:
    def test_examples(self):
        assert real_arith("+", ERR, F(5)) is ERR
        assert real_arith("/", F(1), F(0)) is ERR
        assert real_arith("*", F(3, 2), F(2, 3)) == 1
        assert real_arith("neg", ERR) is ERR

    @pytest.mark.parametrize("op", OPS)
    def test_err_absorbs_every_operand(self, op):
        for r in [F(0), F(1), F(-7, 3), F(5, 2)]:
            assert real_arith(op, ERR, r) is ERR
            assert real_arith(op, r, ERR) is ERR
        assert real_arith(op, ERR, ERR) is ERR

    def test_wrong_arity_is_rejected(self):
        with pytest.raises(ValueError):
            real_arith("+", F(1))
        with pytest.raises(ValueError):
            real_arith("neg", F(1), F(2))
        with pytest.raises(ValueError):
            real_arith("%", F(1), F(2))


class TestFormat:
    def test_parse_and_print(self, tiny):
        assert FloatFormat.parse("tiny:p=3,emin=-1,emax=1") == tiny
        assert str(tiny) == "tiny:p=3,emin=-1,emax=1"
        assert FloatFormat.parse("binary64") == FloatFormat.binary64()

    @pytest.mark.parametrize("text", ["tiny", "tiny:p=3", "huge:p=3,emin=0,emax=1", "tiny:p=1,emin=0,emax=0",
                                      "tiny:p=3,emin=2,emax=1", "tiny:p=x,emin=0,emax=1"])
    def test_bad_format_strings(self, text):
        with pytest.raises(ValueError):
            FloatFormat.parse(text)

    def test_extremes(self, tiny):
        assert tiny.f_max == F(7, 2)
        assert tiny.f_min == F(-7, 2)
        assert tiny.min_normal == F(1, 2)
        assert tiny.size == 25

    def test_enumerate_smallest_format(self):
        values = [v.to_fraction() for v in enumerate_format(FloatFormat.tiny(2, 0, 0))]
        assert values == [F(-3, 2), F(-1), F(0), F(1), F(3, 2)]

    def test_enumerate_tiny(self, tiny):
        values = [v.to_fraction() for v in enumerate_format(tiny)]
        positives = [F(1, 2), F(5, 8), F(3, 4), F(7, 8), F(1), F(5, 4), F(3, 2), F(7, 4),
                     F(2), F(5, 2), F(3), F(7, 2)]
        assert len(values) == 25
        assert values == sorted(values) and len(set(values)) == 25
        assert values[13:] == positives
        assert values[:12] == [-v for v in reversed(positives)]

    def test_binary64_is_not_enumerable(self):
        with pytest.raises(FormatTooLarge):
            enumerate_format(FloatFormat.binary64())

    def test_bound_is_enforced(self):
        with pytest.raises(FormatTooLarge):
            enumerate_format(FloatFormat.tiny(8, -20, 20), bound=1000)

    def test_neighbours_walk_the_enumeration(self, tiny):
        values = enumerate_format(tiny)
        for below, above in zip(values, values[1:]):
            assert successor(tiny, below) == above
            assert predecessor(tiny, above) == below
        assert successor(tiny, values[-1]) is None
        assert predecessor(tiny, values[0]) is None


class TestProj:
    def test_examples(self, tiny):
        assert proj(tiny, F(9, 8)).to_fraction() == 1
        assert proj(tiny, F(4)) is ERR
        assert proj(tiny, ERR) is ERR
        f = FloatValue.from_fraction(F(7, 4), 3)
        assert proj(tiny, inj(f)) == f

    def test_inj(self):
        assert inj(ERR) is ERR
        assert inj(FloatValue.from_fraction(F(5, 4), 3)) == F(5, 4)
        assert inj(FloatValue.zero(3)) == 0

    def test_idempotent_on_representables(self, tiny):
        for f in enumerate_format(tiny):
            assert proj(tiny, inj(f)) == f

    def test_zero_wins_the_tie_with_the_smallest_normal(self, tiny):
        assert proj(tiny, F(1, 4)).is_zero
        assert proj(tiny, F(-1, 4)).is_zero
        assert proj(tiny, F(1, 4) + F(1, 1000)).to_fraction() == F(1, 2)

    def test_range_edges(self, tiny):
        assert proj(tiny, F(7, 2)).to_fraction() == F(7, 2)
        assert proj(tiny, F(-7, 2)).to_fraction() == F(-7, 2)
        assert proj(tiny, F(7, 2) + F(1, 10 ** 6)) is ERR

    def test_matches_the_enumeration_oracle(self, tiny, rng):
        values = enumerate_format(tiny)
        samples = [F(int(n), 4096) for n in rng.integers(-14336, 14337, size=10_000)]
        midpoints = [(a.to_fraction() + b.to_fraction()) / 2 for a, b in zip(values, values[1:])]
        for r in samples + midpoints:
            assert proj(tiny, r) == nearest_even(values, r), r

    def test_oracle_on_a_second_format(self, rng):
        fmt = FloatFormat.tiny(4, -2, 2)
        values = enumerate_format(fmt)
        bound = int(fmt.f_max * 1024)
        samples = [F(int(n), 1024) for n in rng.integers(-bound, bound + 1, size=4_000)]
        midpoints = [(a.to_fraction() + b.to_fraction()) / 2 for a, b in zip(values, values[1:])]
        assert len(midpoints) == len(values) - 1
        for r in samples + midpoints:
            assert proj(fmt, r) == nearest_even(values, r), r

    @settings(max_examples=300, deadline=None)
    @given(st.fractions(min_value=F(-7, 2), max_value=F(7, 2)), st.fractions(min_value=F(-7, 2), max_value=F(7, 2)))
    def test_monotone(self, a, b):
        fmt = FloatFormat.tiny(3, -1, 1)
        low, high = sorted((a, b))
        assert proj(fmt, low).to_fraction() <= proj(fmt, high).to_fraction()

    def test_binary64_matches_hardware(self):
        fmt = FloatFormat.binary64()
        assert float(proj(fmt, F(1, 10))) == 0.1
        assert proj(fmt, F(10) ** 400) is ERR


class TestFloatArith:
    def test_tiny_rounds_exact_results(self, tiny):
        a = FloatValue.from_fraction(F(7, 4), 3)
        b = FloatValue.from_fraction(F(7, 8), 3)
        assert float_arith(tiny, "+", a, b).to_fraction() == F(5, 2)
        assert float_arith(tiny, "+", FloatValue.from_fraction(F(5, 2), 3), a) is ERR
        assert float_arith(tiny, "/", a, FloatValue.zero(3)) is ERR

    def test_binary64_collapses_non_finite_results(self):
        fmt = FloatFormat.binary64()
        big = FloatValue.from_float(1e308)
        assert float_arith(fmt, "*", big, big) is ERR
        assert float_arith(fmt, "/", big, FloatValue.zero(53)) is ERR
        assert float(float_arith(fmt, "+", FloatValue.from_float(0.1), FloatValue.from_float(0.2))) == 0.1 + 0.2

    def test_not_representable_significand(self):
        with pytest.raises(NotRepresentable):
            FloatValue.from_fraction(F(9, 8), 3)


class TestRoundingBoundaries:
    def test_interior_even_value(self, tiny):
        (interval,) = rounding_boundaries(tiny, FloatValue.from_fraction(F(1), 3)).intervals
        assert (interval.low, interval.high) == (F(15, 16), F(9, 8))
        assert interval.low_closed and interval.high_closed

    def test_interior_odd_value_is_open(self, tiny):
        (interval,) = rounding_boundaries(tiny, FloatValue.from_fraction(F(5, 4), 3)).intervals
        assert (interval.low, interval.high) == (F(9, 8), F(11, 8))
        assert not interval.low_closed and not interval.high_closed

    def test_largest_value(self, tiny):
        (interval,) = rounding_boundaries(tiny, FloatValue.from_fraction(F(7, 2), 3)).intervals
        assert (interval.low, interval.high) == (F(13, 4), F(7, 2))
        assert interval.high_closed
        assert str(interval) == "(3.25, 3.5]"

    def test_err(self, tiny):
        preimage = rounding_boundaries(tiny, ERR)
        assert ERR in preimage
        assert F(4) in preimage and F(-4) in preimage
        assert F(7, 2) not in preimage and F(0) not in preimage

    def test_preimages_partition_the_range(self, tiny, rng):
        values = enumerate_format(tiny)
        preimages = [rounding_boundaries(tiny, f) for f in values]
        midpoints = [(a.to_fraction() + b.to_fraction()) / 2 for a, b in zip(values, values[1:])]
        samples = [F(int(n), 64) for n in rng.integers(-224, 225, size=500)]
        for r in samples + midpoints:
            owners = [f for f, pre in zip(values, preimages) if r in pre]
            assert owners == [proj(tiny, r)], r

    def test_preimages_partition_a_second_format(self, rng):
        fmt = FloatFormat.tiny(4, -2, 2)
        values = enumerate_format(fmt)
        preimages = [rounding_boundaries(fmt, f) for f in values]
        midpoints = [(a.to_fraction() + b.to_fraction()) / 2 for a, b in zip(values, values[1:])]
        bound = int(fmt.f_max * 256)
        samples = [F(int(n), 256) for n in rng.integers(-bound, bound + 1, size=1_000)]
        for r in samples + midpoints + [f.to_fraction() for f in values]:
            owners = [f for f, pre in zip(values, preimages) if r in pre]
            assert owners == [proj(fmt, r)], r

    def test_binary64_has_no_table(self):
        with pytest.raises(FormatTooLarge):
            rounding_boundaries(FloatFormat.binary64(), ERR)


class TestRendering:
    @pytest.mark.parametrize("value, text", [(F(5, 2), "2.5"), (F(15, 16), "0.9375"), (F(-3, 4), "-0.75"),
                                             (F(1, 3), "1/3"), (F(4), "4"), (ERR, "err")])
    def test_format_decimal(self, value, text):
        assert format_decimal(value) == text

    def test_format_rational(self):
        assert format_rational(F(21, 8)) == "21/8"
        assert format_rational(F(-2)) == "-2"

    def test_parse_real(self):
        assert parse_real("err") is ERR
        assert parse_real("0.875") == F(7, 8)
        assert parse_real(" 3/2 ") == F(3, 2)
        with pytest.raises(ValueError):
            parse_real("x")
        with pytest.raises(ValueError):
            parse_real("1/0")
