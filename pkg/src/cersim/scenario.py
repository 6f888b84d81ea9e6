"""Configuration, scenario orchestration and CSV output."""

import ast
import io
import math
import operator
from dataclasses import dataclass, field, fields, replace
from typing import Optional

import numpy as np

from .green import build_green_table, intensity_from_green, spin_decay_factor
from .intensity import (CorrelationState, IntensityBreakdown,
                        analytic_response, apply_stage2_initial_conditions,
                        intensity_from_response, output_correlations,
                        phase_offset)
from .kernels import KernelContext
from .params import Grid, PhysicalParams, Stage, stage_rates

SCENARIOS = ("srs", "cers", "sweep-phase", "sweep-seed", "validate")
VALIDATION_RTOL = 0.03
VALIDATION_T_MIN = 0.1
DEFAULT_GRID = 256
DEFAULT_SWEEP_POINTS = 64
FRINGE_SAMPLES = 16

# config key -> PhysicalParams field
_PARAM_KEYS = {
    "delta": "detuning",
    "rabi_p1": "rabi_p1",
    "rabi_p2": "rabi_p2",
    "coupling_density": "coupling_density",
    "gamma": "excited_decay",
    "gamma_s0": "coherence_decay",
    "w0": "w0",
    "cell_length": "cell_length",
    "light_speed": "light_speed",
    "t_tilde_max": "t_tilde_max",
    "delay_time": "delay_time",
    "apply_delay_decay": "apply_delay_decay",
    "phase_pump": "phase_pump",
    "phase_stokes": "phase_stokes",
}
_OTHER_KEYS = ("n_z", "n_t", "scenario", "sweep_points", "out")
CONFIG_KEYS = tuple(_PARAM_KEYS) + _OTHER_KEYS


class ConfigError(ValueError):
    pass


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    params: PhysicalParams = field(default_factory=PhysicalParams)
    n_z: int = DEFAULT_GRID
    n_t: int = DEFAULT_GRID
    scenario: str = "cers"
    sweep_points: int = DEFAULT_SWEEP_POINTS
    out: Optional[str] = None
    defaulted: tuple = ()

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario: unknown scenario {self.scenario!r}")
        if self.sweep_points < 8:
            raise ConfigError("sweep_points: need at least 8 points")
        if self.n_z < 2 or self.n_t < 2:
            raise ConfigError("n_z/n_t: need at least 2 cells")

    @property
    def grid(self):
        return Grid(self.n_z, self.n_t, self.params.t_tilde_max)


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}


def _number(text):
    """Float literal or a small arithmetic expression (``2*pi*5.746e6``)."""
    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        raise ValueError(text)
    return ev(ast.parse(text.strip(), mode="eval"))


def _boolean(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(text)


def parse_config(text):
    """Parse ``key = value`` lines (``#`` comments) into a ScenarioConfig.

    Unknown keys are errors. Missing keys take the reference defaults and
    are listed in ``ScenarioConfig.defaulted``.
    """
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            if key == "apply_delay_decay":
                values[key] = _boolean(value)
            elif key in ("n_z", "n_t", "sweep_points"):
                number = _number(value)
                if number != int(number):
                    raise ValueError(value)
                values[key] = int(number)
            elif key in ("scenario", "out"):
                values[key] = value
            else:
                values[key] = _number(value)
        except (ValueError, SyntaxError, ZeroDivisionError):
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {value!r}") from None

    kwargs = {_PARAM_KEYS[k]: v for k, v in values.items() if k in _PARAM_KEYS}
    try:
        params = PhysicalParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    other = {k: values[k] for k in _OTHER_KEYS if k in values}
    defaulted = tuple(k for k in CONFIG_KEYS if k not in values)
    return ScenarioConfig(params=params, defaulted=defaulted, **other)


# -- pipelines ---------------------------------------------------------------

@dataclass(frozen=True)
class TwoStageResult:
    state1: CorrelationState
    seeded: CorrelationState
    table2: object
    breakdown: IntensityBreakdown

    def variant(self, kind):
        """Stage-2 breakdown for a seeding variant.

        ``"seed-only"`` and ``"spin-only"`` drop the other input block and
        the cross block; ``"uncorrelated"`` drops only the cross block.
        """
        scale = {
            "correlated": (1.0, 1.0, 1.0),
            "uncorrelated": (1.0, 1.0, 0.0),
            "seed-only": (1.0, 0.0, 0.0),
            "spin-only": (0.0, 1.0, 0.0),
            "spontaneous": (0.0, 0.0, 0.0),
        }[kind]
        state = self.seeded.scaled(*scale, label=kind)
        return intensity_from_response(self.table2, state)


def _seed_stage2(params, state1):
    return apply_stage2_initial_conditions(
        state1, seed_phase=params.phase_stokes, spin_decay=spin_decay_factor(params))


def run_two_stage_analytic(params, grid):
    rates1 = stage_rates(params, Stage.SRS)
    rates2 = stage_rates(params, Stage.CERS)
    state1 = output_correlations(analytic_response(KernelContext.build(rates1, grid)))
    seeded = _seed_stage2(params, state1)
    table2 = analytic_response(KernelContext.build(rates2, grid), full=False)
    return TwoStageResult(state1, seeded, table2, intensity_from_response(table2, seeded))


def run_two_stage_green_result(params, grid):
    rates1 = stage_rates(params, Stage.SRS)
    rates2 = stage_rates(params, Stage.CERS)
    state1 = output_correlations(build_green_table(rates1, grid, full=True))
    seeded = _seed_stage2(params, state1)
    table2 = build_green_table(rates2, grid, full=False)
    return TwoStageResult(state1, seeded, table2, intensity_from_green(table2, seeded))


# -- fringes -----------------------------------------------------------------

@dataclass(frozen=True)
class FringeSummary:
    offset: float
    mean: float
    amplitude: float
    visibility: float
    i_max: float
    i_min: float
    phi_at_max: float
    phi_at_min: float
    sample_visibility: float
    residual: float
    flat: bool


def fit_fringe(samples):
    """Least-squares fit of ``C + D cos(phi + phi0)`` with ``D >= 0``.

    Parameters
    ----------
    samples : sequence of (phi, intensity) pairs
        At least 8 samples spanning one period.

    Returns
    -------
    FringeSummary
        ``residual`` is the residual norm relative to the sample norm.
        Extremes and ``sample_visibility`` are read off the samples and
        serve as a cross-check of the fitted ``visibility = D / C``.
    """
    data = np.asarray(samples, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValueError("samples must be (phi, intensity) pairs")
    phi, y = data[:, 0], data[:, 1]
    n = len(phi)
    if n < 8:
        raise ValueError("need at least 8 fringe samples")
    if np.ptp(phi) * n / (n - 1) < 2 * np.pi * (1 - 1e-9):
        raise ValueError("samples must span at least one period")
    design = np.column_stack([np.ones(n), np.cos(phi), np.sin(phi)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    c, a, b = coef
    d = math.hypot(a, b)
    resid = np.linalg.norm(design @ coef - y) / max(np.linalg.norm(y), np.finfo(float).tiny)
    flat = c == 0 or d / abs(c) < 1e-12
    i_max, i_min = float(y.max()), float(y.min())
    total = i_max + i_min
    return FringeSummary(
        offset=0.0 if flat else math.atan2(-b, a),
        mean=float(c),
        amplitude=0.0 if flat else d,
        visibility=0.0 if flat else d / c,
        i_max=i_max,
        i_min=i_min,
        phi_at_max=float(phi[np.argmax(y)]),
        phi_at_min=float(phi[np.argmin(y)]),
        sample_visibility=(i_max - i_min) / total if total else 0.0,
        residual=float(resid),
        flat=bool(flat),
    )


def phase_grid(points):
    return 2 * np.pi * np.arange(points) / points


def fringe_at(breakdown, index, phases):
    return np.array([breakdown.with_phase(p).i_total[index] for p in phases])


def seed_sweep(result, etas, index=-1):
    """i_seed, i_spin_wave and fringe visibility versus seed attenuation.

    The seed amplitude is scaled by ``eta`` (field moments by eta**2, the
    cross block by eta); the spin wave is untouched.
    """
    phases = phase_grid(FRINGE_SAMPLES)
    rows = []
    for eta in etas:
        state = result.seeded.scaled(ee=eta * eta, es=eta, label=f"eta={eta}")
        b = intensity_from_response(result.table2, state)
        fringe = fit_fringe(np.column_stack([phases, fringe_at(b, index, phases)]))
        rows.append((eta, b.i_seed[index], b.i_spin_wave[index], fringe.visibility))
    return np.array(rows)


# -- CSV ---------------------------------------------------------------------

def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _header(config, extra=()):
    lines = ["# cersim scenario output", f"# scenario = {config.scenario}"]
    p = config.params
    for key, attr in _PARAM_KEYS.items():
        flag = " (default)" if key in config.defaulted else ""
        lines.append(f"# {key} = {_fmt(getattr(p, attr))}{flag}")
    lines.append(f"# n_z = {config.n_z}")
    lines.append(f"# n_t = {config.n_t}")
    lines.append(f"# sweep_points = {config.sweep_points}")
    lines.append("# w0_stage1 = 1")
    lines.extend(f"# {item}" for item in extra)
    return lines


def _table(columns, rows):
    out = [",".join(columns)]
    for row in rows:
        out.append(",".join(_fmt(v) for v in row))
    return out


@dataclass
class ScenarioOutput:
    text: str
    passed: bool = True
    summary: dict = field(default_factory=dict)


def run_scenario(config, optimal_phase=False):
    """Run one scenario and return its CSV text (plus a pass flag)."""
    try:
        return _run(config, optimal_phase)
    except (ValueError, FloatingPointError) as exc:
        raise SolverError(f"{config.scenario}: {exc}") from exc


def _run(config, optimal_phase):
    params, grid = config.params, config.grid
    sc = config.scenario
    extra = []
    summary = {}
    passed = True

    if sc == "srs":
        ctx = KernelContext.build(stage_rates(params, Stage.SRS), grid)
        table = analytic_response(ctx, full=False)
        b = intensity_from_response(table, CorrelationState.vacuum(grid))
        body = _table(["t_tilde", "i_spon"], zip(grid.t, b.i_spon))

    elif sc == "cers":
        res = run_two_stage_analytic(params, grid)
        b = res.breakdown
        i_la = b.i_light_atom
        if optimal_phase:
            i_la = 2.0 * np.abs(b.cross_amplitude)
            extra.append("delta_phi = -phi0(t_tilde) (optimal, per row)")
        else:
            extra.append(f"delta_phi = {_fmt(params.phase_pump - params.phase_stokes)}")
        total = b.i_uncorrelated_sum + i_la
        cols = ["t_tilde", "i_spon", "i_seed", "i_spin_wave", "i_light_atom", "i_total",
                "i_uncorrelated_sum"]
        body = _table(cols, zip(grid.t, b.i_spon, b.i_seed, b.i_spin_wave, i_la, total,
                                b.i_uncorrelated_sum))

    elif sc == "sweep-phase":
        zeroed = replace(params, phase_pump=0.0, phase_stokes=0.0)
        res = run_two_stage_analytic(zeroed, grid)
        phases = phase_grid(config.sweep_points)
        b = res.breakdown
        rows = [(p, b.with_phase(p).i_total[-1], b.with_phase(p).i_light_atom[-1])
                for p in phases]
        fringe = fit_fringe([(r[0], r[1]) for r in rows])
        summary = fringe.__dict__.copy()
        body = _table(["delta_phi", "i_total", "i_light_atom"], rows)
        body += [f"# fringe {k} = {_fmt(v)}" for k, v in summary.items()]

    elif sc == "sweep-seed":
        res = run_two_stage_analytic(params, grid)
        etas = np.linspace(0.0, 2.0, config.sweep_points)
        rows = seed_sweep(res, etas)
        k_vis = int(np.argmax(rows[:, 3]))
        k_bal = int(np.argmin(np.abs(rows[:, 1] - rows[:, 2])))
        summary = {"eta_max_visibility": rows[k_vis, 0], "eta_balanced": rows[k_bal, 0],
                   "max_visibility": rows[k_vis, 3]}
        body = _table(["attenuation_eta", "i_seed", "i_spin_wave", "visibility"], rows)
        body += [f"# {k} = {_fmt(v)}" for k, v in summary.items()]

    elif sc == "validate":
        ana = run_two_stage_analytic(params, grid).breakdown
        grn = run_two_stage_green_result(params, grid).breakdown
        rel = np.abs(grn.i_total - ana.i_total) / np.abs(ana.i_total)
        checked = grid.t >= VALIDATION_T_MIN - 1e-12
        worst = float(rel[checked].max())
        passed = bool(worst <= VALIDATION_RTOL)
        summary = {"max_rel_discrepancy": worst, "tolerance": VALIDATION_RTOL,
                   "verdict": "PASS" if passed else "FAIL"}
        extra.append(f"compared quantity = i_total, t_tilde >= {VALIDATION_T_MIN}")
        body = _table(["t_tilde", "i_analytic", "i_green", "rel_discrepancy"],
                      zip(grid.t, ana.i_total, grn.i_total, rel))
        body += [f"# max_rel_discrepancy = {_fmt(worst)}",
                 f"# tolerance = {_fmt(VALIDATION_RTOL)}",
                 f"# verdict = {summary['verdict']}"]
    else:
        raise ConfigError(f"unknown scenario {sc!r}")

    lines = _header(config, extra) + body
    return ScenarioOutput("\n".join(lines) + "\n", passed, summary)


def read_csv(text):
    """Parse emitted CSV back into (metadata dict, column names, data array)."""
    meta, rows, columns = {}, [], None
    for line in io.StringIO(text):
        line = line.rstrip("\n")
        if line.startswith("#"):
            body = line[1:].strip()
            if " = " in body:
                k, v = body.split(" = ", 1)
                meta[k] = v
            continue
        if columns is None:
            columns = line.split(",")
        elif line:
            rows.append([float(v) for v in line.split(",")])
    return meta, columns, np.array(rows)
