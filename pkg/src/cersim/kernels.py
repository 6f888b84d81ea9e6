"""Scalar building blocks and propagation kernels of the Raman solution.

Dimensionless conventions follow :mod:`cersim.params`. With
``Q(tau) = |r|**2 * int_0^tau W`` the propagation kernels depend on the
spatial separation ``dz = z1 - z2`` and the gain increment
``dq = Q(t1) - Q(t2)`` through the product ``x = dq * dz`` only:

    H   = I0(2 sqrt(x))
    G_S = dq * I1(2 sqrt(x)) / sqrt(x)     -> dq as dz -> 0
    G_e = dz * I1(2 sqrt(x)) / sqrt(x)     -> dz as dq -> 0
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate

from .params import Grid, StageRates
from .specfun import i0_sqrt, i1_over_sqrt

KERNELS = ("U_S", "V_S", "U_a", "V_a", "F_S", "F_a")

# tolerated negative roundoff in a kernel radicand
_RADICAND_SLACK = 1e-13


def population_difference(rates, tau):
    """W(tau) = (W(0) + 1) exp(-pumping * tau) - 1 for a constant pump."""
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("time must be >= 0")
    return (rates.w0 + 1.0) * np.exp(-rates.pumping * tau) - 1.0


def population_difference_quadrature(rates, tau):
    """W(tau) from its integral representation, evaluated by adaptive quadrature.

    W(0) exp(-Gamma_L(tau)) - int_0^tau gamma_L exp(-[Gamma_L(tau) - Gamma_L(s)]) ds
    """
    if tau < 0:
        raise ValueError("time must be >= 0")
    ell = rates.pumping
    tail, _ = integrate.quad(lambda s: ell * np.exp(-ell * (tau - s)), 0.0, tau,
                             epsabs=1e-14, epsrel=1e-13)
    return rates.w0 * np.exp(-ell * tau) - tail


def q_closed_form(rates, tau):
    """Analytic antiderivative |r|^2 int_0^tau W, for the closed-form W."""
    tau = np.asarray(tau, dtype=float)
    ell = rates.pumping
    if ell == 0:
        return rates.gain * rates.w0 * tau
    return rates.gain * ((rates.w0 + 1.0) * -np.expm1(-ell * tau) / ell - tau)


def cumulative_trapezoid(values, h):
    out = np.zeros_like(values)
    out[1:] = np.cumsum(0.5 * h * (values[1:] + values[:-1]))
    return out


_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(8)


def cumulative_gauss(fn, t):
    """int_0^t_k fn for every node t_k: composite 8-point Gauss-Legendre per cell.

    Exact to roundoff for the smooth exponential integrands used here, so
    the table does not add an O(h**2) error of its own.
    """
    t = np.asarray(t, dtype=float)
    a, b = t[:-1], t[1:]
    half = 0.5 * (b - a)
    x = 0.5 * (a + b)[:, None] + half[:, None] * _GAUSS_NODES[None, :]
    cells = half * (fn(x) @ _GAUSS_WEIGHTS)
    out = np.zeros_like(t)
    out[1:] = np.cumsum(cells)
    return out


def causal_weights(n, h):
    """Row ``i`` holds trapezoid weights for an integral over nodes 0..i."""
    w = np.tril(np.full((n + 1, n + 1), h))
    idx = np.arange(n + 1)
    w[idx, idx] = 0.5 * h
    w[:, 0] = 0.5 * h
    w[0, 0] = 0.0
    return np.tril(w)


@dataclass(frozen=True)
class KernelContext:
    """Per-stage tables on the time nodes of ``grid``."""

    rates: StageRates
    grid: Grid
    w_table: np.ndarray
    q_table: np.ndarray
    gamma_table: np.ndarray
    gamma_l_table: np.ndarray

    @classmethod
    def build(cls, rates, grid):
        t = grid.t
        w = population_difference(rates, t)
        q = rates.gain * cumulative_gauss(lambda s: population_difference(rates, s), t)
        return cls(
            rates=rates,
            grid=grid,
            w_table=w,
            q_table=q,
            gamma_table=complex(rates.decay) * t,
            gamma_l_table=rates.pumping * t,
        )

    def w_at(self, tau):
        return population_difference(self.rates, tau)

    def gamma_at(self, tau):
        return complex(self.rates.decay) * np.asarray(tau, dtype=float)


def q_of_t(ctx, tau):
    """Q(tau) = |r|^2 int_0^tau W from the context's cumulative table.

    Between nodes the last partial cell is integrated with the same
    Gauss-Legendre rule.
    """
    grid = ctx.grid
    tau = float(tau)
    if tau < -1e-12 * grid.t_max or tau > grid.t_max * (1 + 1e-12):
        raise ValueError(f"time {tau} outside grid range [0, {grid.t_max}]")
    tau = min(max(tau, 0.0), grid.t_max)
    k = min(int(np.floor(tau / grid.dt)), grid.n_t)
    t_k = k * grid.dt
    if abs(tau - t_k) <= 1e-12 * grid.dt:
        return float(ctx.q_table[k])
    part = cumulative_gauss(lambda s: population_difference(ctx.rates, s), [t_k, tau])[-1]
    return float(ctx.q_table[k] + ctx.rates.gain * part)


def _radicand(dq, dz):
    x = np.asarray(dq, dtype=float) * np.asarray(dz, dtype=float)
    if np.any(x < -_RADICAND_SLACK):
        raise ValueError(
            "negative kernel radicand (population inversion regime) is not supported")
    return np.maximum(x, 0.0)


def h_values(dq, dz):
    """H as a function of gain increment and spatial separation (vectorized)."""
    return i0_sqrt(_radicand(dq, dz))


def gs_values(dq, dz):
    x = _radicand(dq, dz)
    return np.asarray(dq, dtype=float) * i1_over_sqrt(x)


def ge_values(dq, dz):
    x = _radicand(dq, dz)
    return np.asarray(dz, dtype=float) * i1_over_sqrt(x)


def _increments(ctx, z1, z2, t1, t2):
    if z1 < z2 or t1 < t2:
        raise ValueError("kernels are defined only for z1 >= z2 and t1 >= t2")
    return q_of_t(ctx, t1) - q_of_t(ctx, t2), z1 - z2


def kernel_h(ctx, z1, z2, t1, t2):
    """H(z1, z2, t1, t2) = I0(2 sqrt([Q(t1) - Q(t2)] (z1 - z2)))."""
    dq, dz = _increments(ctx, z1, z2, t1, t2)
    return float(h_values(dq, dz))


def kernel_gs(ctx, z1, z2, t1, t2):
    """G_S = sqrt(dq/dz) I1(2 sqrt(dq dz)); finite limit dq as dz -> 0."""
    dq, dz = _increments(ctx, z1, z2, t1, t2)
    return float(gs_values(dq, dz))


def kernel_ge(ctx, z1, z2, t1, t2):
    """G_e = (dz/dq) G_S; finite limit dz as dq -> 0."""
    dq, dz = _increments(ctx, z1, z2, t1, t2)
    return float(ge_values(dq, dz))


class KernelWeight(NamedTuple):
    weight: complex
    passthrough: float


def coeff_kernel(ctx, which, output_point, input_point):
    """Integrand weight of one coefficient kernel.

    Parameters
    ----------
    ctx : KernelContext
    which : {"U_S", "V_S", "U_a", "V_a", "F_S", "F_a"}
    output_point : (z, t)
    input_point : float or (z, t)
        ``t''`` for U_S and V_a, ``z''`` for V_S and U_a, ``(z'', t'')``
        for the noise kernels.

    Returns
    -------
    KernelWeight
        The smooth integrand weight, and the unit pass-through coefficient
        that replaces the endpoint delta of U_S, U_a and F_a (1 when the
        input sits on the delta, else 0).
    """
    if which not in KERNELS:
        raise ValueError(f"unknown kernel {which!r}")
    z, t = output_point
    grid = ctx.grid
    if not (0 <= z <= 1 + 1e-12 and 0 <= t <= grid.t_max * (1 + 1e-12)):
        raise ValueError("output point outside the grid")
    r = complex(ctx.rates.coupling)
    gam_t = ctx.gamma_at(t)

    if which in ("U_S", "V_a"):
        t2 = float(input_point)
        z2 = 0.0
    elif which in ("V_S", "U_a"):
        z2 = float(input_point)
        t2 = 0.0
    else:
        z2, t2 = map(float, input_point)
    if not (0 <= z2 <= z + 1e-15 and 0 <= t2 <= t + 1e-15):
        raise ValueError("input point is not causally before the output point")
    decay = np.exp(-(gam_t - ctx.gamma_at(t2)))
    w2 = float(ctx.w_at(t2))

    if which == "U_S":
        weight = ctx.rates.gain * w2 * decay * kernel_ge(ctx, z, 0.0, t, t2)
        through = 1.0 if t2 == t else 0.0
    elif which == "V_S":
        weight = 1j * r * decay * kernel_h(ctx, z, z2, t, 0.0)
        through = 0.0
    elif which == "U_a":
        weight = decay * kernel_gs(ctx, z, z2, t, 0.0)
        through = 1.0 if z2 == z else 0.0
    elif which == "V_a":
        weight = -1j * r.conjugate() * w2 * decay * kernel_h(ctx, z, 0.0, t, t2)
        through = 0.0
    elif which == "F_S":
        weight = 1j * r * decay * kernel_h(ctx, z, z2, t, t2)
        through = 0.0
    else:
        weight = decay * kernel_gs(ctx, z, z2, t, t2)
        through = 1.0 if z2 == z else 0.0
    return KernelWeight(complex(weight), through)
