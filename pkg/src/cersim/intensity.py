"""Stokes intensities of the spontaneous and correlation-enhanced stages.

Both stages are linear in their inputs: the boundary field ``e_in(tau)``,
the initial spin wave ``s^dag(zeta, 0)`` and the Langevin noise. A
:class:`ResponseTable` holds the discrete linear maps from nodal input
samples to the output field at ``zeta = 1`` and (for stage 1) to the spin
wave at the end of the pulse, plus second-moment accumulators for the noise.
This module fills the table from the closed-form Bessel kernels; the direct
integrator in :mod:`cersim.green` fills the same table independently.

Moment conventions (nodal densities on the grid):

* ``c_ee[i, k]   = <e^dag(tau_i) e(tau_k)>``
* ``c_ss[a, b]   = <s^dag(zeta_a) s(zeta_b)>``
* ``c_es[i, a]   = <e^dag(tau_i) s^dag(zeta_a)>`` (the ordering that enters
  the interference term; ``conj(c_es)`` is ``<s e>``)

Vacuum inputs have ``<s s^dag> = delta(zeta - zeta')``,
``<e e^dag> = delta(tau - tau')`` and ``<f f^dag> = 2 Re(g) delta delta``.
"""

from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional

import numpy as np

from .kernels import (KernelContext, causal_weights, ge_values, gs_values,
                      h_values)
from .params import Grid


@dataclass(frozen=True)
class ResponseTable:
    """Discrete input-output maps of one stage.

    field_from_seed : (n_t+1, n_t+1)
        e(1, tau_i) per unit nodal boundary field e_in(tau_k); includes the
        unit pass-through on the diagonal.
    field_from_spin : (n_t+1, n_z+1)
        e(1, tau_i) per unit nodal initial spin s^dag(zeta_j).
    noise_diag : (n_t+1,)
        sum over noise cells of |e(1, tau_i)|^2, per unit noise strength.
    spin_from_seed, spin_from_spin : (n_z+1, n_t+1), (n_z+1, n_z+1)
        s^dag(zeta_a, T) per unit nodal input; ``None`` unless built full.
    noise_ee, noise_es : (n_t+1, n_t+1), (n_t+1, n_z+1)
        noise accumulators sum conj(e_i) e_k and sum conj(e_i) s^dag_a;
        ``None`` unless built full.
    """

    grid: Grid
    noise_strength: float
    field_from_seed: np.ndarray
    field_from_spin: np.ndarray
    noise_diag: np.ndarray
    spin_from_seed: Optional[np.ndarray] = None
    spin_from_spin: Optional[np.ndarray] = None
    noise_ee: Optional[np.ndarray] = None
    noise_es: Optional[np.ndarray] = None

    @property
    def full(self):
        return self.noise_ee is not None


@dataclass(frozen=True)
class CorrelationState:
    """Second moments of a stage output (or of a stage-2 input)."""

    grid: Grid
    c_ee: np.ndarray
    c_ss: np.ndarray
    c_es: np.ndarray
    stage_label: str = "srs-output"

    def scaled(self, ee=1.0, ss=1.0, es=1.0, label=None):
        """Scale the three blocks independently (for seeding variants)."""
        return replace(self, c_ee=ee * self.c_ee, c_ss=ss * self.c_ss,
                       c_es=es * self.c_es, stage_label=label or self.stage_label)

    @classmethod
    def vacuum(cls, grid):
        nt, nz = grid.n_t + 1, grid.n_z + 1
        return cls(grid, np.zeros((nt, nt), complex), np.zeros((nz, nz), complex),
                   np.zeros((nt, nz), complex), "vacuum")

    def joint_matrix(self):
        """<O^dag O> for O = (e(tau_i), s^dag(zeta_a)), spin vacuum included.

        Positive semidefinite for any physical state; the spin vacuum term
        is the nodal delta, diag(1 / w_z).
        """
        w = self.grid.z_weights
        top = np.hstack([self.c_ee, self.c_es])
        bottom = np.hstack([self.c_es.conj().T, self.c_ss.T + np.diag(1.0 / w)])
        return np.vstack([top, bottom])


@dataclass(frozen=True)
class IntensityBreakdown:
    """Four-part output intensity on the time nodes (dimensionless units)."""

    t_tilde: np.ndarray
    i_spon: np.ndarray
    i_seed: np.ndarray
    i_spin_wave: np.ndarray
    i_light_atom: np.ndarray
    delta_phi: float = 0.0
    cross_amplitude: np.ndarray = field(default=None, repr=False)

    @property
    def i_total(self):
        return self.i_spon + self.i_seed + self.i_spin_wave + self.i_light_atom

    @property
    def i_uncorrelated_sum(self):
        return self.i_spon + self.i_seed + self.i_spin_wave

    def at(self, t_tilde):
        """Index of the grid node at ``t_tilde``."""
        i = int(np.argmin(np.abs(self.t_tilde - t_tilde)))
        if abs(self.t_tilde[i] - t_tilde) > 1e-9 * max(1.0, abs(t_tilde)):
            raise ValueError(f"t~ = {t_tilde} is not a grid node")
        return i

    def with_phase(self, delta_phi):
        """Same inputs, cross term re-evaluated at applied phase ``delta_phi``."""
        x = self.cross_amplitude
        return replace(self, i_light_atom=2.0 * np.real(np.exp(1j * delta_phi) * x),
                       delta_phi=delta_phi)


class PhaseOffset(NamedTuple):
    phi0: np.ndarray
    amplitude: np.ndarray
    interfering: np.ndarray


def analytic_response(ctx, full=True):
    """Fill a :class:`ResponseTable` from the Bessel kernels.

    All integrals use composite trapezoid weights; endpoint deltas are unit
    pass-through coefficients.
    """
    grid = ctx.grid
    r = complex(ctx.rates.coupling)
    gain = ctx.rates.gain
    nt, nz = grid.n_t, grid.n_z
    z, wz = grid.z, grid.z_weights
    wt_causal = causal_weights(nt, grid.dt)
    wz_causal = causal_weights(nz, grid.dz)
    q, gam, w = ctx.q_table, ctx.gamma_table, ctx.w_table

    dq_tt = q[:, None] - q[None, :]
    causal_tt = np.tri(nt + 1, dtype=bool)
    dq_tt = np.where(causal_tt, dq_tt, 0.0)
    decay_tt = np.where(causal_tt, np.exp(-(gam[:, None] - gam[None, :])), 0.0)

    # U_S: unit pass-through plus G_e(dz = 1) weighted by W(t'')
    u_smooth = gain * w[None, :] * decay_tt * ge_values(dq_tt, 1.0)
    field_from_seed = np.eye(nt + 1, dtype=complex) + wt_causal * u_smooth

    # V_S: H(1, z'', t', 0)
    v_kernel = 1j * r * np.exp(-gam)[:, None] * h_values(q[:, None], (1.0 - z)[None, :])
    field_from_spin = v_kernel * wz[None, :]

    noise_diag = np.zeros(nt + 1)
    noise_ee = np.zeros((nt + 1, nt + 1), complex) if full else None
    noise_es = np.zeros((nt + 1, nz + 1), complex) if full else None
    spin_from_seed = spin_from_spin = None

    if full:
        qT, gT = q[-1], gam[-1]
        dz_zz = z[:, None] - z[None, :]
        causal_zz = np.tri(nz + 1, dtype=bool)
        dz_zz = np.where(causal_zz, dz_zz, 0.0)
        # V_a at T: -i conj(r) W(t'') e^{-[Gamma(T)-Gamma(t'')]} H(z, 0, T, t'')
        va = (-1j * r.conjugate() * w[None, :] * np.exp(-(gT - gam))[None, :]
              * h_values((qT - q)[None, :], z[:, None]))
        spin_from_seed = va * wt_causal[-1][None, :]
        # U_a at T: pass-through plus G_S(z - z'', Q(T))
        gs0 = np.where(causal_zz, gs_values(qT, dz_zz), 0.0)
        spin_from_spin = np.exp(-gT) * (np.eye(nz + 1) + wz_causal * gs0)

    for k in range(nt + 1):
        idx = np.arange(k, nt + 1)
        dq = q[idx] - q[k]
        # H(1, z'', t_i, t_k) on (z'', i >= k)
        h_k = h_values(dq[None, :], (1.0 - z)[:, None])
        phase = 1j * r * np.exp(-(gam[idx] - gam[k]))
        # diagonal: row weight is the trapezoid weight of node k over [0, t_i]
        col = wt_causal[idx, k]
        noise_diag[idx] += col * np.abs(phase) ** 2 * (wz @ (h_k * h_k))
        if not full:
            continue
        gram = h_k.T @ (wz[:, None] * h_k)
        # weight of node k in the integral over [0, min(t_i1, t_i2)]
        wmin = wt_causal[np.minimum.outer(idx, idx), k]
        noise_ee[k:, k:] += wmin * np.outer(phase.conj(), phase) * gram
        # spin at T from the same noise cell: delta plus G_S(z_a - z'', Q(T) - Q(t_k))
        gs_k = np.where(causal_zz, gs_values(qT - q[k], dz_zz), 0.0)
        m_k = h_k + (wz_causal * gs_k) @ h_k
        fa_decay = np.exp(-(gT - gam[k]))
        noise_es[k:, :] += (col * phase.conj() * fa_decay)[:, None] * m_k.T

    return ResponseTable(
        grid=grid,
        noise_strength=ctx.rates.noise_strength,
        field_from_seed=field_from_seed,
        field_from_spin=field_from_spin,
        noise_diag=noise_diag,
        spin_from_seed=spin_from_seed,
        spin_from_spin=spin_from_spin,
        noise_ee=noise_ee,
        noise_es=noise_es,
    )


def output_correlations(table, label="srs-output"):
    """Stage-output second moments for vacuum inputs and ground-state atoms."""
    if not table.full:
        raise ValueError("output correlations need a full response table")
    grid = table.grid
    inv_wz = 1.0 / grid.z_weights
    inv_wt = 1.0 / grid.t_weights
    gfs = table.field_from_spin
    ns = table.noise_strength
    c_ee = gfs.conj() @ (inv_wz[:, None] * gfs.T) + ns * table.noise_ee
    # normally ordered spin population is fed by field vacuum only
    gsf = table.spin_from_seed
    c_ss = gsf @ (inv_wt[:, None] * gsf.conj().T)
    c_es = gfs.conj() @ (inv_wz[:, None] * table.spin_from_spin.T) + ns * table.noise_es
    c_ee = 0.5 * (c_ee + c_ee.conj().T)
    c_ss = 0.5 * (c_ss + c_ss.conj().T)
    return CorrelationState(grid, c_ee, c_ss, c_es, label)


def intensity_from_response(table, state, delta_phi=0.0):
    """Quadratic forms of the response maps against the input moments."""
    grid = table.grid
    if state.grid != grid:
        raise ValueError("response table and correlation state use different grids")
    a = table.field_from_seed
    v = table.field_from_spin
    inv_wz = 1.0 / grid.z_weights
    i_spon = (np.abs(v) ** 2) @ inv_wz + table.noise_strength * table.noise_diag
    i_seed = np.real(np.einsum("ik,kl,il->i", a.conj(), state.c_ee, a))
    # <s_a s_b^dag> normally ordered part is c_ss[b, a]
    i_spin = np.real(np.einsum("ia,ba,ib->i", v.conj(), state.c_ss, v))
    cross = np.einsum("ik,ka,ia->i", a.conj(), state.c_es, v)
    i_la = 2.0 * np.real(np.exp(1j * delta_phi) * cross)
    return IntensityBreakdown(
        t_tilde=grid.t,
        i_spon=np.real(i_spon),
        i_seed=i_seed,
        i_spin_wave=i_spin,
        i_light_atom=i_la,
        delta_phi=delta_phi,
        cross_amplitude=cross,
    )


def srs_intensity(ctx, t_tilde=None):
    """Spontaneous output intensity from vacuum inputs.

    Returns the whole curve on the time nodes, or the value at one node.
    """
    table = analytic_response(ctx, full=False)
    inv_wz = 1.0 / ctx.grid.z_weights
    curve = (np.abs(table.field_from_spin) ** 2) @ inv_wz + table.noise_strength * table.noise_diag
    if t_tilde is None:
        return curve
    return float(curve[_node(ctx.grid, t_tilde)])


def _node(grid, t_tilde):
    i = int(round(t_tilde / grid.dt))
    if not 0 <= i <= grid.n_t or abs(i * grid.dt - t_tilde) > 1e-9 * max(1.0, t_tilde):
        raise ValueError(f"t~ = {t_tilde} is not a grid node")
    return i


def stage1_output_correlations(ctx):
    """Output moments of the spontaneous stage at the end of the pulse."""
    return output_correlations(analytic_response(ctx, full=True))


def apply_stage2_initial_conditions(state, seed_phase=0.0, spin_decay=1.0):
    """Map stage-1 output moments onto stage-2 inputs.

    The spin coordinate is reversed (counter-propagating pumps), the seed
    field picks up ``exp(i seed_phase)`` and every spin index is multiplied
    by ``spin_decay`` (a complex factor exp(-Gamma delta_t), or 1).
    """
    flip = slice(None, None, -1)
    decay = complex(spin_decay)
    c_ss = abs(decay) ** 2 * state.c_ss[flip, flip]
    # <e^dag s^dag>: e^dag carries exp(-i phi_S), s^dag carries the decay
    c_es = np.exp(-1j * seed_phase) * decay * state.c_es[:, flip]
    return CorrelationState(state.grid, state.c_ee.copy(), c_ss, c_es, "cers-input")


def flip_spin(state):
    """Reverse the spin coordinate only (an involution)."""
    return apply_stage2_initial_conditions(state)


def cers_intensity(ctx, seeded, delta_phi=0.0, table=None):
    """Four-part output of the seeded stage on every time node.

    ``delta_phi`` is applied on top of whatever phases ``ctx`` (pump) and
    ``seeded`` (seed) already carry.
    """
    if table is None:
        table = analytic_response(ctx, full=False)
    if seeded.grid != ctx.grid:
        raise ValueError("context and seeded state use different grids")
    return intensity_from_response(table, seeded, delta_phi)


def phase_offset(breakdown, rtol=1e-14):
    """Intrinsic fringe phase phi0 with i_light_atom = 2|X| cos(dphi + phi0).

    ``dphi`` is the phase applied on top of the context and seed phases, so
    the fringe maximum sits at ``dphi = -phi0``.

    Points where the cross amplitude vanishes are flagged as not interfering
    and carry ``nan``.
    """
    x = np.asarray(breakdown.cross_amplitude)
    scale = breakdown.i_uncorrelated_sum
    amp = np.abs(x)
    interfering = amp > rtol * np.maximum(scale, np.finfo(float).tiny)
    phi0 = np.where(interfering, np.angle(x), np.nan)
    return PhaseOffset(phi0=phi0, amplitude=2.0 * amp, interfering=interfering)
