"""Direct integration of the coupled field/spin equations.

Independent route to the stage response maps. The moving-frame equations

    d_zeta e = i r s^dag
    d_tau s^dag = -g s^dag - i conj(r) W(tau) e + f^dag

are marched in tau with the trapezoid (Crank-Nicolson) rule; at each time
level the field is the cumulative trapezoid integral of the spin wave, so
the implicit update collapses to a first-order linear recurrence along
zeta (solved with ``scipy.signal.lfilter``). Impulse responses to every
input basis element are pushed through the same linear scheme and reduced
to the quadratic forms the intensities need.

The scheme is translation invariant in zeta: an impulse at interior node j
produces the response of an impulse at node 1 shifted by j - 1 nodes. Only
the boundary node (half trapezoid cell) and node 1 need to be integrated.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.signal import lfilter

from .intensity import (ResponseTable, apply_stage2_initial_conditions,
                        intensity_from_response, output_correlations)
from .kernels import population_difference
from .params import Grid, Stage, stage_rates

log = logging.getLogger(__name__)

MAX_DECAY_STEP = 0.1
MAX_GAIN_STEP = 0.1


@dataclass(frozen=True)
class GreenTable(ResponseTable):
    """Response table built by direct integration.

    ``noise_columns`` keeps the raw field histories of the noise base
    impulses (shape ``(n_t, 2, n_t + 1, n_z + 1)``) when built with
    ``keep_noise=True``; it is ``None`` otherwise.
    """

    noise_columns: Optional[np.ndarray] = None


def check_resolution(rates, grid):
    dt = grid.dt
    if complex(rates.decay).real * dt > MAX_DECAY_STEP:
        raise ValueError(f"time step too coarse for the decay: Re(g) dt = "
                         f"{complex(rates.decay).real * dt:.3g} > {MAX_DECAY_STEP}")
    if rates.gain * dt > MAX_GAIN_STEP:
        raise ValueError(f"time step too coarse for the gain: |r|^2 dt = "
                         f"{rates.gain * dt:.3g} > {MAX_GAIN_STEP}")


def march(rates, grid, spin0, seed=None, kicks=None, on_step=None):
    """Integrate a batch of independent inputs through one stage.

    Parameters
    ----------
    rates : StageRates
    grid : Grid
    spin0 : (n_z+1, B) complex
        Initial spin wave s^dag(zeta_j, 0) per column.
    seed : (n_t+1, B) complex, optional
        Boundary field e_in(tau_n) per column.
    kicks : callable, optional
        ``kicks(n)`` returns an (n_z+1, B) increment of s^dag accumulated
        over step n -> n+1 (the time integral of the noise over the step),
        or ``None``.
    on_step : callable, optional
        Called as ``on_step(n, field)`` with the full field (n_z+1, B) at
        every time node n.

    Returns
    -------
    field_out : (n_t+1, B)
        e(1, tau_n).
    spin_end : (n_z+1, B)
        s^dag(zeta, t_max).
    """
    check_resolution(rates, grid)
    r = complex(rates.coupling)
    g = complex(rates.decay)
    gain = rates.gain
    nz, nt = grid.n_z, grid.n_t
    dz, dt = grid.dz, grid.dt
    h = 0.5 * dt
    w = population_difference(rates, grid.t)

    s = np.array(spin0, dtype=complex)
    batch = s.shape[1]
    if seed is None:
        seed = np.zeros((nt + 1, batch), complex)
    field_out = np.empty((nt + 1, batch), complex)

    p = np.zeros_like(s)
    p[1:] = np.cumsum(0.5 * dz * (s[1:] + s[:-1]), axis=0)
    e = seed[0][None, :] + 1j * r * p
    field_out[0] = e[-1]
    if on_step is not None:
        on_step(0, e)

    d = 1.0 + h * g
    for n in range(nt):
        b = s * (1.0 - h * g) - 1j * h * r.conjugate() * w[n] * e
        b -= 1j * h * r.conjugate() * w[n + 1] * seed[n + 1][None, :]
        if kicks is not None:
            kick = kicks(n)
            if kick is not None:
                b += kick
        kp = h * gain * w[n + 1]
        a = dz * kp / (2.0 * d)
        lam = (1.0 + a) / (1.0 - a)
        mu = dz / (2.0 * d * (1.0 - a))
        x = np.zeros_like(b)
        x[1:] = mu * (b[1:] + b[:-1])
        p = lfilter([1.0], [1.0, -lam], x, axis=0)
        s = (b + kp * p) / d
        e = seed[n + 1][None, :] + 1j * r * p
        if not np.all(np.isfinite(e)):
            raise FloatingPointError(f"non-finite field at step {n + 1}")
        field_out[n + 1] = e[-1]
        if on_step is not None:
            on_step(n + 1, e)
    return field_out, s


def _shifted_columns(base0, base1, n_nodes):
    """Expand boundary/interior base responses into per-node responses.

    ``base0`` answers an impulse at node 0, ``base1`` (indexed by node) one
    at node 1. Returns M[a, j] = response at node a to an impulse at node j.
    """
    out = np.zeros((n_nodes, n_nodes), complex)
    out[:, 0] = base0
    for j in range(1, n_nodes):
        out[j:, j] = base1[1:n_nodes - j + 1]
    return out


def build_green_table(rates, grid, full=True, chunk=16, keep_noise=False):
    """Impulse-response table of one stage by direct integration.

    Parameters
    ----------
    rates : StageRates
    grid : Grid
    full : bool
        Also compute the spin-wave responses at ``t_max`` and the two-time
        noise accumulators needed for the stage output moments.
    chunk : int
        Number of noise time steps integrated together in full mode (bounds
        the memory of the stored field histories).
    keep_noise : bool
        Keep raw noise field histories (debugging; O(n_t^2 n_z) memory).
    """
    nz, nt = grid.n_z, grid.n_t
    wz = grid.z_weights
    dt = grid.dt

    # boundary field: unit nodal sample at each time node
    seed_eye = np.eye(nt + 1, dtype=complex)
    f_seed, s_seed = march(rates, grid, np.zeros((nz + 1, nt + 1), complex), seed=seed_eye)

    # initial spin: impulses at node 0 and node 1, full field history kept
    spin0 = np.zeros((nz + 1, 2), complex)
    spin0[0, 0] = spin0[1, 1] = 1.0
    hist = np.empty((nt + 1, nz + 1, 2), complex)

    def keep(n, e):
        hist[n] = e

    _, s_spin = march(rates, grid, spin0, on_step=keep)
    # field at zeta = 1 from node j: node n_z of base 0, node n_z - j + 1 of base 1
    field_from_spin = np.empty((nt + 1, nz + 1), complex)
    field_from_spin[:, 0] = hist[:, nz, 0]
    field_from_spin[:, 1:] = hist[:, nz:0:-1, 1]
    spin_from_spin = _shifted_columns(s_spin[:, 0], s_spin[:, 1], nz + 1)

    # noise: per-step kick of unit integrated weight, variance dt / w_j per
    # unit noise strength; node 0 uses base 0, node j >= 1 uses base 1
    var = dt / wz
    node_weight = np.empty(nz + 1)
    node_weight[0] = 0.0
    node_weight[1:] = var[nz:0:-1]  # weight of the impulse seen at node m of base 1

    noise_diag = np.zeros(nt + 1)
    noise_ee = noise_es = None
    noise_columns = None
    if full:
        noise_ee = np.zeros((nt + 1, nt + 1), complex)
        noise_es = np.zeros((nt + 1, nz + 1), complex)
        if keep_noise:
            noise_columns = np.zeros((nt, 2, nt + 1, nz + 1), complex)

    starts = range(0, nt, chunk if full else nt)
    for start in starts:
        steps = np.arange(start, min(start + (chunk if full else nt), nt))
        ncol = 2 * len(steps)

        def kicks(n, steps=steps):
            m = n - steps[0]
            if m < 0 or m >= len(steps):
                return None
            kick = np.zeros((nz + 1, ncol), complex)
            kick[0, 2 * m] = 1.0
            kick[1, 2 * m + 1] = 1.0
            return kick

        hist_n = np.zeros((nt + 1, nz + 1, ncol), complex) if full else None

        def accumulate(n, e, hist_n=hist_n):
            # columns: even = boundary base, odd = interior base
            noise_diag[n] += var[0] * np.sum(np.abs(e[nz, 0::2]) ** 2)
            noise_diag[n] += np.sum(node_weight @ (np.abs(e[:, 1::2]) ** 2))
            if hist_n is not None:
                hist_n[n] = e

        _, s_end = march(rates, grid, np.zeros((nz + 1, ncol), complex),
                         kicks=kicks, on_step=accumulate)
        if not full:
            continue
        sw = np.sqrt(node_weight)
        for m, n in enumerate(steps):
            e0 = hist_n[:, nz, 2 * m]
            e1 = hist_n[:, :, 2 * m + 1]
            noise_ee += var[0] * np.outer(e0.conj(), e0)
            e1w = e1 * sw[None, :]
            noise_ee += e1w.conj() @ e1w.T
            # spin at T from kick at node j: shift of the node-1 base
            s_map = _shifted_columns(s_end[:, 2 * m], s_end[:, 2 * m + 1], nz + 1)
            # field from node j at zeta=1: e1[:, nz - j + 1]; j = 0: e0
            fj = np.empty((nt + 1, nz + 1), complex)
            fj[:, 0] = e0
            fj[:, 1:] = e1[:, nz:0:-1]
            noise_es += (fj.conj() * var[None, :]) @ s_map.T
            if keep_noise:
                noise_columns[n, 0] = hist_n[:, :, 2 * m]
                noise_columns[n, 1] = e1
        log.debug("noise steps %d-%d done", steps[0], steps[-1])

    if noise_ee is not None:
        noise_ee = 0.5 * (noise_ee + noise_ee.conj().T)

    return GreenTable(
        grid=grid,
        noise_strength=rates.noise_strength,
        field_from_seed=f_seed,
        field_from_spin=field_from_spin,
        noise_diag=noise_diag,
        spin_from_seed=s_seed if full else None,
        spin_from_spin=spin_from_spin if full else None,
        noise_ee=noise_ee,
        noise_es=noise_es,
        noise_columns=noise_columns,
    )


def intensity_from_green(table, input_correlations, noise_strength=None, delta_phi=0.0):
    """Intensity breakdown from a Green table and stage-input moments."""
    if noise_strength is not None and noise_strength != table.noise_strength:
        from dataclasses import replace
        table = replace(table, noise_strength=noise_strength)
    return intensity_from_response(table, input_correlations, delta_phi)


def run_two_stage_green(params, grid, delta_phis=None, chunk=16):
    """Spontaneous stage, seeding map, then the correlation-enhanced stage.

    Returns the stage-2 :class:`IntensityBreakdown` (phases from ``params``)
    and, if ``delta_phis`` is given, the total intensity at t_max for each
    extra applied phase difference.
    """
    rates1 = stage_rates(params, Stage.SRS)
    rates2 = stage_rates(params, Stage.CERS)
    table1 = build_green_table(rates1, grid, full=True, chunk=chunk)
    state1 = output_correlations(table1)
    seeded = apply_stage2_initial_conditions(
        state1, seed_phase=params.phase_stokes, spin_decay=spin_decay_factor(params))
    table2 = build_green_table(rates2, grid, full=False)
    breakdown = intensity_from_green(table2, seeded)
    fringe = None
    if delta_phis is not None:
        fringe = np.array([breakdown.with_phase(dp).i_total[-1] for dp in delta_phis])
    return breakdown, fringe


def spin_decay_factor(params):
    """Dephasing of the stored spin wave over the delay between pulses."""
    if not params.apply_delay_decay:
        return 1.0
    return float(np.exp(-params.coherence_decay * params.delay_time))
