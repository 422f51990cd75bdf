# models/analysis.py
"""
Program Analysis Class

This module implements an Analysis class that runs the workbench operations
on one program and presents the results as pandas tables and plotly figures:
1. Per-environment wp answers with loop stabilisation status
2. Oracle (enumeration) reachability next to the Boolean wp answer
3. The Kleene chain of a loop at chosen environments
4. Enumeration and rounding intervals of a tiny float format
"""

import logging
import math
from typing import List, Optional, Sequence

import pandas as pd
import plotly.graph_objs as go

from models.answers import BOOL, Continuation, IndicatorCont, same_domain
from models.errors import DomainMismatch
from models.numerics import FloatFormat, enumerate_format, format_decimal, rounding_boundaries
from models.semantics import Env
from models.syntax import Program, While, find_instr, preorder, pretty_print
from models.wp import WpConfig, enumerate_exec, kleene_chain, wp_table

logger = logging.getLogger(__name__)

PLOT_CONFIG = {
    "template": "plotly_dark",
    "paper_bgcolor": "#000000",
    "plot_bgcolor": "#000000",
    "font": dict(family="Roboto Mono", color="#FFFFFF"),
    "title_font_color": "#FF8000",
}


def _apply_theme(fig: go.Figure) -> go.Figure:
    """Apply the terminal theme to a figure."""
    fig.update_layout(**PLOT_CONFIG, margin=dict(t=50, l=25, r=25, b=25))
    return fig


def _as_float(value) -> Optional[float]:
    """Answer as a plottable float; +inf has no bar height and becomes None."""
    if value == math.inf:
        return None
    return float(value)


class Analysis:
    """
    Runs wp, the enumeration oracle and loop iteration on a program.

    Parameters
    ----------
    program : Program
        The parsed program.
    cfg : WpConfig
        Semantics, answer domain, budgets and optional input model.
    """
    def __init__(self, program: Program, cfg: WpConfig):
        self.program = program
        self.cfg = cfg
        self.semantics = cfg.semantics
        self.domain = cfg.domain

    def wp_frame(self, kappa: Continuation, envs: Sequence[Env]) -> pd.DataFrame:
        """
        wp(program, kappa) at every environment.

        Returns
        -------
        pd.DataFrame
            Columns 'env', 'answer' (formatted), 'value' (raw) and 'status'.
        """
        rows = []
        for env, value, status in wp_table(self.program, kappa, self.cfg, envs):
            rows.append({
                "env": str(env),
                "answer": self.domain.format(value),
                "value": value,
                "status": str(status),
            })
        return pd.DataFrame(rows, columns=["env", "answer", "value", "status"])

    def overall_status(self, frame: pd.DataFrame) -> str:
        statuses = set(frame["status"])
        inexact = sorted(s for s in statuses if not s.startswith("stabilized"))
        if inexact:
            return inexact[-1]
        return max(statuses, key=lambda s: int(s[s.index("(") + 1:-1]), default="stabilized(0)")

    def oracle_frame(self, test, envs: Sequence[Env]) -> pd.DataFrame:
        """
        Enumeration oracle against Boolean wp for the may-reachability of `test`.

        Returns
        -------
        pd.DataFrame
            Columns 'env', 'finals', 'exhausted', 'oracle', 'wp', 'agree'.
        """
        if not same_domain(self.domain, BOOL):
            raise DomainMismatch("the reachability oracle compares Boolean answers")
        kappa = IndicatorCont(test, self.semantics, BOOL)
        answers = wp_table(self.program, kappa, self.cfg, envs)
        rows = []
        for env, answer, _ in answers:
            run = enumerate_exec(self.program.root, env, self.cfg.fuel, self.semantics, self.cfg.input_model)
            reachable = int(any(1 in self.semantics.eval_test(test, final) for final in run.finals))
            rows.append({
                "env": str(env),
                "finals": len(run.finals),
                "exhausted": run.exhausted,
                "oracle": reachable,
                "wp": answer,
                "agree": reachable == answer,
            })
        return pd.DataFrame(rows, columns=["env", "finals", "exhausted", "oracle", "wp", "agree"])

    def loops(self) -> List[While]:
        return [node for node in preorder(self.program.root) if isinstance(node, While)]

    def kleene_frame(self, kappa: Continuation, envs: Sequence[Env], n: int = 8,
                     label: Optional[int] = None) -> pd.DataFrame:
        """
        H^k(bottom)(kappa)(env) for k = 0..n at each env, for the loop with
        `label` (the first loop by default).
        """
        loop = self._loop(label)
        rows = []
        for env in envs:
            for k, value in enumerate(kleene_chain(loop, kappa, self.cfg, env, n)):
                rows.append({"env": str(env), "iteration": k, "value": value,
                             "answer": self.domain.format(value)})
        return pd.DataFrame(rows, columns=["env", "iteration", "value", "answer"])

    def _loop(self, label: Optional[int]) -> While:
        if label is None:
            loops = self.loops()
            if not loops:
                raise ValueError("the program has no while-loop")
            return loops[0]
        node = find_instr(self.program, label)
        if not isinstance(node, While):
            raise ValueError(f"^{label} is not a while-loop")
        return node

    def plot_kleene_chain(self, frame: pd.DataFrame) -> go.Figure:
        """
        Plot the Kleene chain values per environment.

        Parameters
        ----------
        frame : pd.DataFrame
            Output of kleene_frame.

        Returns
        -------
        plotly.graph_objects.Figure
        """
        fig = go.Figure()
        for env, group in frame.groupby("env", sort=False):
            fig.add_trace(go.Scatter(
                x=group["iteration"],
                y=[_as_float(v) for v in group["value"]],
                mode="lines+markers",
                line_shape="hv",
                name=env,
            ))
        fig.update_layout(
            title=dict(text="KLEENE CHAIN OF THE LOOP", font=dict(size=24)),
            xaxis_title="Iteration n",
            yaxis_title="H^n(bottom)(kappa)(env)",
            showlegend=True,
            legend=dict(yanchor="top", y=0.99, xanchor="left", x=0.01),
        )
        return _apply_theme(fig)

    def plot_answers(self, frame: pd.DataFrame) -> go.Figure:
        """Horizontal bars of the wp answer per environment; inexact answers are highlighted."""
        exact = frame["status"].str.startswith("stabilized")
        fig = go.Figure()
        fig.add_trace(go.Bar(
            x=[_as_float(v) for v in frame["value"]],
            y=frame["env"],
            orientation="h",
            marker_color=["#FF8000" if ok else "#404040" for ok in exact],
            text=frame["answer"],
            textposition="auto",
            name="wp answer",
        ))
        fig.update_layout(
            title=dict(text="WEAKEST PRECONDITION PER ENVIRONMENT", font=dict(size=24)),
            xaxis_title="Answer",
            yaxis_title="Environment",
            xaxis=dict(showgrid=True, gridcolor="#333333"),
            yaxis=dict(showgrid=True, gridcolor="#333333"),
        )
        return _apply_theme(fig)

    def get_summary_table(self, frame: pd.DataFrame, kappa: Continuation) -> pd.DataFrame:
        """Headline figures of a wp_frame."""
        values = [v for v in frame["value"]]
        data = {
            "Metric": ["Program", "Continuation", "Semantics", "Answers", "Environments",
                       "Exact answers", "Largest answer", "Status"],
            "Value": [
                pretty_print(self.program),
                kappa.description,
                str(self.semantics),
                self.domain.name,
                len(frame),
                int(frame["status"].str.startswith("stabilized").sum()),
                self.domain.format(max(values)) if values else "",
                self.overall_status(frame) if len(frame) else "",
            ],
        }
        return pd.DataFrame(data)


def format_frame(fmt: FloatFormat) -> pd.DataFrame:
    """
    Every representable of a tiny format with its rounding preimage.

    Returns
    -------
    pd.DataFrame
        Columns 'value', 'float', 'preimage', 'low', 'high'.
    """
    rows = []
    for f in enumerate_format(fmt):
        preimage = rounding_boundaries(fmt, f)
        (interval,) = preimage.intervals
        rows.append({
            "value": format_decimal(f.to_fraction()),
            "float": float(f),
            "preimage": str(interval),
            "low": interval.low,
            "high": interval.high,
        })
    return pd.DataFrame(rows, columns=["value", "float", "preimage", "low", "high"])


def plot_rounding_staircase(fmt: FloatFormat, frame: Optional[pd.DataFrame] = None) -> go.Figure:
    """The step function r -> proj(r) over [F_min, F_max]."""
    frame = format_frame(fmt) if frame is None else frame
    fig = go.Figure()
    for record in frame.to_dict("records"):
        fig.add_trace(go.Scatter(
            x=[float(record["low"]), float(record["high"])],
            y=[record["float"], record["float"]],
            mode="lines",
            line=dict(color="#FF8000", width=3),
            showlegend=False,
            hovertext=f"{record['value']} <- {record['preimage']}",
        ))
    fig.update_layout(
        title=dict(text=f"ROUNDING IN {fmt}".upper(), font=dict(size=24)),
        xaxis_title="Real r",
        yaxis_title="proj(r)",
        xaxis=dict(showgrid=True, gridcolor="#333333"),
        yaxis=dict(showgrid=True, gridcolor="#333333"),
    )
    return _apply_theme(fig)
