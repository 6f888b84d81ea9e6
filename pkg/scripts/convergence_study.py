"""Grid refinement of the kernel and direct-integration routes.

For each resolution prints the maximum relative difference of the two
routes over t~ >= 0.1, for the spontaneous stage alone and for the full
two-stage total, plus the ratio to the previous resolution.
"""

import argparse
import time
from dataclasses import dataclass, field

import numpy as np

from cersim.green import build_green_table
from cersim.intensity import CorrelationState, intensity_from_response, srs_intensity
from cersim.kernels import KernelContext
from cersim.params import Grid, PhysicalParams, Stage, stage_rates
from cersim.scenario import run_two_stage_analytic, run_two_stage_green_result


@dataclass
class ConvergenceConfig:
    sizes: list = field(default_factory=lambda: [32, 64, 128, 256])
    two_stage: bool = True
    t_min: float = 0.1


def srs_gap(params, grid, t_min):
    rates = stage_rates(params, Stage.SRS)
    ana = srs_intensity(KernelContext.build(rates, grid))
    table = build_green_table(rates, grid, full=False)
    grn = intensity_from_response(table, CorrelationState.vacuum(grid)).i_spon
    mask = grid.t >= t_min - 1e-12
    return np.max(np.abs(grn[mask] / ana[mask] - 1))


def total_gap(params, grid, t_min):
    ana = run_two_stage_analytic(params, grid).breakdown.i_total
    grn = run_two_stage_green_result(params, grid).breakdown.i_total
    mask = grid.t >= t_min - 1e-12
    return np.max(np.abs(grn[mask] / ana[mask] - 1))


def run(cfg):
    params = PhysicalParams()
    rows = []
    for n in cfg.sizes:
        grid = Grid(n, n, params.t_tilde_max)
        start = time.perf_counter()
        srs = srs_gap(params, grid, cfg.t_min)
        tot = total_gap(params, grid, cfg.t_min) if cfg.two_stage else float("nan")
        rows.append((n, srs, tot, time.perf_counter() - start))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[32, 64, 128, 256])
    ap.add_argument("--srs-only", action="store_true")
    args = ap.parse_args()
    rows = run(ConvergenceConfig(sizes=args.sizes, two_stage=not args.srs_only))
    print(f"{'n':>5s} {'srs gap':>11s} {'ratio':>6s} {'total gap':>11s} {'ratio':>6s} {'time':>7s}")
    prev = None
    for n, srs, tot, secs in rows:
        r1 = f"{prev[0] / srs:6.2f}" if prev else " " * 6
        r2 = f"{prev[1] / tot:6.2f}" if prev and np.isfinite(tot) else " " * 6
        print(f"{n:5d} {srs:11.3e} {r1} {tot:11.3e} {r2} {secs:6.1f}s")
        prev = (srs, tot)


if __name__ == "__main__":
    main()
