"""Parameter sweeps and figure presets with deterministic CSV output."""
from __future__ import annotations

import sys
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidParams
from .laser import LaserParams, build_covariance
from .measures import CorrelationReport, correlation_report

COLUMNS = (
    "eta", "nth", "gain_khz", "kappa_khz", "a", "b", "c",
    "E_R", "I_R", "C_left", "C_right", "D_left", "D_right",
    "nu_minus", "nu_tilde_minus",
)
ASYMMETRY_COLUMN = "D_left_minus_D_right"
FLOAT_FORMAT = "%.12g"

# swept variable -> LaserParams field
VARIABLES = {"eta": "eta", "nth": "n_th", "gain": "gain"}

DEFAULT_KAPPA = 3.85


def compute_point(p: LaserParams) -> CorrelationReport:
    """Full correlation report for one parameter set."""
    return correlation_report(build_covariance(p))


def evaluate(p: LaserParams) -> dict:
    """All CSV columns for (possibly array-valued) params, as float arrays."""
    kappa, gain, eta, n_th = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (p.kappa, p.gain, p.eta, p.n_th))
    )
    cm = build_covariance(LaserParams(kappa, gain, eta, n_th))
    rep = correlation_report(cm)
    cols = {
        "eta": eta, "nth": n_th, "gain_khz": gain, "kappa_khz": kappa,
        "a": cm.a, "b": cm.b, "c": cm.c,
        "E_R": rep.E_R, "I_R": rep.I_R,
        "C_left": rep.C_left, "C_right": rep.C_right,
        "D_left": rep.D_left, "D_right": rep.D_right,
        "nu_minus": rep.diagnostics.nu_minus,
        "nu_tilde_minus": rep.diagnostics.nu_tilde_minus,
    }
    return {k: np.atleast_1d(np.asarray(v, dtype=float)) for k, v in cols.items()}


@dataclass(frozen=True)
class SweepSpec:
    """One-parameter sweep; the swept field of ``fixed`` is ignored.

    ``extra`` holds explicit values merged into the grid (e.g. eta = 0).
    """

    variable: str
    lo: float
    hi: float
    points: int = 400
    scale: str = "linear"
    fixed: LaserParams = LaserParams(DEFAULT_KAPPA, 200.0, 0.35, 5.0)
    extra: tuple = ()
    output: str | None = None

    def __post_init__(self):
        if self.variable not in VARIABLES:
            raise InvalidParams(f"variable must be one of {sorted(VARIABLES)}, got {self.variable!r}")
        if self.scale not in ("linear", "log"):
            raise InvalidParams(f"scale must be 'linear' or 'log', got {self.scale!r}")
        if not self.lo < self.hi:
            raise InvalidParams(f"range needs lo < hi (got {self.lo}, {self.hi})")
        if self.scale == "log" and self.lo <= 0:
            raise InvalidParams("log scale needs lo > 0")
        if int(self.points) != self.points or self.points < 2:
            raise InvalidParams(f"points must be an integer >= 2, got {self.points}")

    def values(self) -> np.ndarray:
        if self.scale == "log":
            grid = np.geomspace(self.lo, self.hi, int(self.points))
        else:
            grid = np.linspace(self.lo, self.hi, int(self.points))
        return np.unique(np.concatenate([grid, np.asarray(self.extra, dtype=float)]))

    def params(self, values) -> LaserParams:
        # validates the swept values too, naming the field on failure
        return replace(self.fixed, **{VARIABLES[self.variable]: np.asarray(values, dtype=float)})


@dataclass(frozen=True)
class FigurePreset:
    """A single curve sweep, or with ``surface`` the product of two sweeps."""

    id: str
    sweeps: tuple
    surface: bool = False


def _eta_curve(gain):
    fixed = LaserParams(DEFAULT_KAPPA, gain, 0.35, 5.0)
    return (SweepSpec("eta", 1e-3, 1.0, 400, "linear", fixed, extra=(0.0,)),)


def _nth_curve(gain, lo, hi, points, scale):
    fixed = LaserParams(DEFAULT_KAPPA, gain, 0.35, 5.0)
    return (SweepSpec("nth", lo, hi, points, scale, fixed),)


_SURFACE_POINTS = 101
_GAIN_AXIS = dict(lo=100.0, hi=50000.0, points=_SURFACE_POINTS, scale="log")

PRESETS = {
    "fig2a": FigurePreset("fig2a", _eta_curve(100.0)),
    "fig2b": FigurePreset("fig2b", _eta_curve(1000.0)),
    "fig2c": FigurePreset("fig2c", _eta_curve(50000.0)),
    # 401 points put n_th = 100 exactly on the grid
    "fig3a": FigurePreset("fig3a", _nth_curve(200.0, 0.0, 200.0, 401, "linear")),
    "fig3b": FigurePreset("fig3b", _nth_curve(20000.0, 1.0, 1.0e4, 400, "log")),
    "fig4a": FigurePreset(
        "fig4a",
        (
            SweepSpec("eta", 0.0, 1.0, _SURFACE_POINTS, "linear", LaserParams(DEFAULT_KAPPA, 200.0, 0.35, 5.0)),
            SweepSpec("gain", fixed=LaserParams(DEFAULT_KAPPA, 200.0, 0.35, 5.0), **_GAIN_AXIS),
        ),
        surface=True,
    ),
    "fig4b": FigurePreset(
        "fig4b",
        (
            SweepSpec("nth", 0.0, 100.0, _SURFACE_POINTS, "linear", LaserParams(DEFAULT_KAPPA, 200.0, 0.35, 5.0)),
            SweepSpec("gain", fixed=LaserParams(DEFAULT_KAPPA, 200.0, 0.35, 5.0), **_GAIN_AXIS),
        ),
        surface=True,
    ),
}


def _format_rows(cols: dict, names) -> list[str]:
    table = np.column_stack([cols[k] for k in names])
    return [",".join(FLOAT_FORMAT % v for v in row) for row in table]


def _write(lines, output):
    text = "\n".join(lines) + "\n"
    if output is None or output == "-":
        sys.stdout.write(text)
    else:
        with open(output, "w", newline="") as fh:
            fh.write(text)


def sweep_table(spec: SweepSpec) -> dict:
    return evaluate(spec.params(spec.values()))


def surface_table(preset: FigurePreset) -> dict:
    """Long-format table over the product grid, first axis outermost."""
    outer, inner = preset.sweeps
    u, v = np.meshgrid(outer.values(), inner.values(), indexing="ij")
    p = replace(
        outer.fixed,
        **{VARIABLES[outer.variable]: u.ravel(), VARIABLES[inner.variable]: v.ravel()},
    )
    cols = evaluate(p)
    cols[ASYMMETRY_COLUMN] = cols["D_left"] - cols["D_right"]
    return cols


def run_sweep(spec: SweepSpec, output=None) -> dict:
    """Write one CSV row per grid point, ascending in the swept variable."""
    cols = sweep_table(spec)
    _write([",".join(COLUMNS)] + _format_rows(cols, COLUMNS), output if output is not None else spec.output)
    return cols


def figure_table(preset: FigurePreset) -> tuple[dict, tuple]:
    if preset.surface:
        return surface_table(preset), COLUMNS + (ASYMMETRY_COLUMN,)
    return sweep_table(preset.sweeps[0]), COLUMNS


def run_figure(preset, output=None, plot_script=None) -> dict:
    """Write the preset's CSV; optionally a companion gnuplot script."""
    if isinstance(preset, str):
        try:
            preset = PRESETS[preset]
        except KeyError:
            raise InvalidParams(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}") from None
    cols, names = figure_table(preset)
    _write([",".join(names)] + _format_rows(cols, names), output)
    if plot_script is not None:
        data = output if output not in (None, "-") else f"{preset.id}.csv"
        with open(plot_script, "w") as fh:
            fh.write(gnuplot_script(preset, data))
    return cols


def gnuplot_script(preset: FigurePreset, data: str) -> str:
    col = {name: i + 1 for i, name in enumerate(COLUMNS + (ASYMMETRY_COLUMN,))}
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set title '{preset.id}'",
    ]
    if preset.surface:
        outer, inner = preset.sweeps
        x, y = col[_COLUMN_OF[outer.variable]], col[_COLUMN_OF[inner.variable]]
        if inner.scale == "log":
            lines.append("set logscale y")
        lines += [
            "set view map",
            f"set xlabel '{outer.variable}'",
            f"set ylabel '{inner.variable}'",
            f"splot '{data}' using {x}:{y}:{col[ASYMMETRY_COLUMN]} with points palette pointtype 5 pointsize 0.5",
        ]
    else:
        spec = preset.sweeps[0]
        x = col[_COLUMN_OF[spec.variable]]
        if spec.scale == "log":
            lines.append("set logscale x")
        lines.append(f"set xlabel '{spec.variable}'")
        curves = [f"'{data}' using {x}:{col[name]} with lines" for name in ("E_R", "D_left", "D_right")]
        lines.append("plot " + ", \\\n     ".join(curves))
    return "\n".join(lines) + "\n"


_COLUMN_OF = {"eta": "eta", "nth": "nth", "gain": "gain_khz"}
