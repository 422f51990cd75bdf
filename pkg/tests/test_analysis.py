# tests/test_analysis.py
from fractions import Fraction

import pytest

from models.analysis import Analysis, format_frame, plot_rounding_staircase
from models.answers import BOOL, EXT, ExprCont, IndicatorCont
from models.errors import DomainMismatch
from models.semantics import Env
from models.wp import WpConfig
from services.build_universe import load_universe
from services.parse_program import load_program, parse_expr, parse_program, parse_test

F = Fraction


@pytest.fixture
def counting(real, corpus):
    program = load_program(corpus / "wp" / "count_to_three.imp")
    envs = load_universe(corpus / "wp" / "u.env", real)
    return Analysis(program, WpConfig(real, BOOL, universe=envs)), envs


class TestWpFrame:
    def test_columns_and_status(self, counting, real):
        analysis, envs = counting
        frame = analysis.wp_frame(IndicatorCont(parse_test("x == 3"), real), envs)
        assert list(frame.columns) == ["env", "answer", "value", "status"]
        assert list(frame["env"]) == ["x=0", "x=1", "x=2", "x=3", "x=4"]
        assert analysis.overall_status(frame) == "stabilized(4)"

    def test_summary(self, counting, real):
        analysis, envs = counting
        kappa = IndicatorCont(parse_test("x == 3"), real)
        summary = analysis.get_summary_table(analysis.wp_frame(kappa, envs), kappa).set_index("Metric")["Value"]
        assert summary["Environments"] == 5
        assert summary["Exact answers"] == 5
        assert summary["Largest answer"] == "1"

    def test_inexact_status_wins(self, real):
        program = parse_program("while 0 < x { x = x / 2 }")
        analysis = Analysis(program, WpConfig(real, EXT, max_iter=8, closure_limit=20))
        frame = analysis.wp_frame(ExprCont(parse_expr("1"), real), [Env.of({"x": F(0)}), Env.of({"x": F(1)})])
        assert list(frame["status"]) == ["stabilized(0)", "budget_exhausted(8)"]
        assert analysis.overall_status(frame) == "budget_exhausted(8)"


class TestOracleFrame:
    def test_agreement(self, counting):
        analysis, envs = counting
        frame = analysis.oracle_frame(parse_test("x == 3"), envs)
        assert frame["agree"].all()
        assert list(frame["oracle"]) == [1, 1, 1, 1, 0]

    def test_needs_boolean_answers(self, real, corpus):
        analysis = Analysis(load_program(corpus / "wp" / "err_guard.imp"), WpConfig(real, EXT))
        with pytest.raises(DomainMismatch):
            analysis.oracle_frame(parse_test("y == 1"), [Env.of({})])


class TestKleene:
    def test_frame(self, counting, real):
        analysis, envs = counting
        frame = analysis.kleene_frame(IndicatorCont(parse_test("x == 3"), real), envs[:2], n=5)
        assert len(frame) == 12
        first = frame[frame["env"] == "x=0"]
        assert list(first["value"]) == [0, 0, 0, 0, 1, 1]

    def test_loop_selection(self, real, corpus):
        analysis = Analysis(load_program(corpus / "wp" / "err_guard.imp"), WpConfig(real, EXT))
        assert analysis.loops() == []
        with pytest.raises(ValueError):
            analysis.kleene_frame(ExprCont(parse_expr("y"), real), [Env.of({})])
        counting = Analysis(parse_program("^1 x = 0; ^2 while x < 1 { ^3 x = x + 1 }"), WpConfig(real, EXT))
        with pytest.raises(ValueError):
            counting.kleene_frame(ExprCont(parse_expr("x"), real), [Env.of({})], label=1)

    def test_figures(self, counting, real):
        analysis, envs = counting
        kappa = IndicatorCont(parse_test("x == 3"), real)
        chain = analysis.plot_kleene_chain(analysis.kleene_frame(kappa, envs, n=4))
        assert len(chain.data) == 5
        assert chain.layout.paper_bgcolor == "#000000"
        bars = analysis.plot_answers(analysis.wp_frame(kappa, envs))
        assert list(bars.data[0].x) == [1.0, 1.0, 1.0, 1.0, 0.0]


class TestFormatFrame:
    def test_tiny(self, tiny):
        frame = format_frame(tiny)
        assert len(frame) == 25
        row = frame.set_index("value").loc["1"]
        assert row["preimage"] == "[0.9375, 1.125]"
        assert (row["low"], row["high"]) == (F(15, 16), F(9, 8))

    def test_staircase(self, tiny):
        fig = plot_rounding_staircase(tiny)
        assert len(fig.data) == 25
        assert "ROUNDING IN" in fig.layout.title.text
