"""Physical inputs, derived pump-induced rates and the shared grid.

Everything downstream works in dimensionless units: position ``zeta = z/L``
and time ``tau = t * chi_ref**2 * L / c``, where ``chi_ref`` is the
coupling of the reference (stage-2) pump. In these units the moving-frame
equations read

    d_zeta e = i r s^dag
    d_tau s^dag = -g s^dag - i conj(r) W(tau) e + f^dag

with ``r`` the stage coupling relative to the reference pump (a complex
number carrying the pump phase), ``g = Gamma_S / kappa_ref`` the complex
coherence decay and ``W`` the population difference.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


class Stage(enum.Enum):
    SRS = 1
    CERS = 2


@dataclass(frozen=True)
class PhysicalParams:
    """User-facing physical constants. Rates in 1/s, lengths in m.

    Defaults are the reference parameter set used throughout the tests; the cell
    length is not part of it and defaults to a typical 5 cm vapor cell.
    """

    detuning: float = 1.2e9
    rabi_p1: float = 2.5e8
    rabi_p2: float = 2.5e8
    coupling_density: float = 1.0e12  # N g^2 / c, 1/(m s)
    excited_decay: float = 2.0 * math.pi * 5.746e6
    coherence_decay: float = 1.0e4
    w0: float = 0.99  # stage-2 initial population difference
    cell_length: float = 0.05
    light_speed: float = SPEED_OF_LIGHT
    t_tilde_max: float = 2.0
    delay_time: float = 0.0
    apply_delay_decay: bool = False
    phase_pump: float = 0.0
    phase_stokes: float = 0.0
    w0_stage1: float = 1.0

    def __post_init__(self):
        for name in ("detuning", "rabi_p1", "rabi_p2", "coupling_density",
                     "excited_decay", "coherence_decay", "w0", "cell_length",
                     "light_speed", "t_tilde_max", "delay_time", "phase_pump",
                     "phase_stokes", "w0_stage1"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.detuning == 0:
            raise ValueError("detuning: large-detuning model requires delta != 0")
        for name in ("excited_decay", "coupling_density", "cell_length",
                     "light_speed", "t_tilde_max"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.coherence_decay < 0:
            raise ValueError("coherence_decay must be >= 0")
        if self.rabi_p1 < 0 or self.rabi_p2 < 0:
            raise ValueError("rabi frequencies must be >= 0")
        if abs(self.w0) > 1 or abs(self.w0_stage1) > 1:
            raise ValueError("w0: population difference must lie in [-1, 1]")
        if self.delay_time < 0:
            raise ValueError("delay_time must be >= 0")

    def rabi(self, stage):
        return self.rabi_p1 if Stage(stage) is Stage.SRS else self.rabi_p2

    def initial_population(self, stage):
        return self.w0_stage1 if Stage(stage) is Stage.SRS else self.w0


@dataclass(frozen=True)
class DerivedRates:
    """Pump-induced rates of one stage, all in 1/s.

    ``gain_rate`` is the combination chi**2 L / c; the pump phase (including
    the sign of the detuning) is kept separately as ``pump_phase``.
    """

    gain_rate: float
    pump_phase: float
    optical_pumping_rate: float
    stark_shift: float
    total_coherence_decay: float
    complex_decay: complex

    @property
    def chi_phase_factor(self):
        return complex(np.exp(1j * self.pump_phase))


def derive_rates(params, stage):
    """Optical pumping rate, ac Stark shift, coherence decay and gain rate."""
    stage = Stage(stage)
    if params.detuning == 0:
        raise ValueError("detuning must be nonzero")
    omega = params.rabi(stage)
    ratio = omega / params.detuning
    gamma_l = params.excited_decay * ratio * ratio
    delta_l = omega * omega / params.detuning
    gamma_s = params.coherence_decay + gamma_l
    gain = params.coupling_density * ratio * ratio * params.cell_length
    phase = params.phase_pump if stage is Stage.CERS else 0.0
    if params.detuning < 0:
        phase += math.pi
    return DerivedRates(
        gain_rate=gain,
        pump_phase=phase,
        optical_pumping_rate=gamma_l,
        stark_shift=delta_l,
        total_coherence_decay=gamma_s,
        complex_decay=complex(gamma_s, -delta_l),
    )


def dimensionless_time(rates, t_seconds):
    """t~ = t * chi**2 L / c."""
    return np.asarray(t_seconds) * rates.gain_rate


def seconds_from_dimensionless(rates, t_tilde):
    """Inverse of :func:`dimensionless_time`."""
    if rates.gain_rate == 0:
        raise ValueError("dimensionless time is undefined for zero coupling")
    return np.asarray(t_tilde) / rates.gain_rate


def reference_rates(params):
    """Rates whose gain defines the dimensionless time axis.

    The stage-2 pump is the reference; stage 1 is used if the stage-2 pump
    is off.
    """
    rates2 = derive_rates(params, Stage.CERS)
    if rates2.gain_rate > 0:
        return rates2
    rates1 = derive_rates(params, Stage.SRS)
    if rates1.gain_rate > 0:
        return rates1
    raise ValueError("both pumps are off; no dimensionless time scale")


@dataclass(frozen=True)
class StageRates:
    """Dimensionless coefficients of one stage.

    coupling
        r = (chi_stage / |chi_ref|), complex, carries the pump phase.
    decay
        g = Gamma_S / kappa_ref (complex, Re g >= 0).
    pumping
        gamma_L / kappa_ref.
    w0
        Initial population difference.
    """

    coupling: complex = 1.0
    decay: complex = 0.0
    pumping: float = 0.0
    w0: float = 1.0

    def __post_init__(self):
        if complex(self.decay).real < 0:
            raise ValueError("decay must have nonnegative real part")
        if self.pumping < 0:
            raise ValueError("pumping rate must be >= 0")
        if abs(self.w0) > 1:
            raise ValueError("w0 must lie in [-1, 1]")

    @property
    def gain(self):
        return abs(self.coupling) ** 2

    @property
    def noise_strength(self):
        """2 Re g: weight of the delta-correlated Langevin noise."""
        return 2.0 * complex(self.decay).real


def stage_rates(params, stage):
    """Dimensionless :class:`StageRates` for a stage of ``params``."""
    stage = Stage(stage)
    ref = reference_rates(params)
    rates = derive_rates(params, stage)
    kappa = ref.gain_rate
    coupling = math.sqrt(rates.gain_rate / kappa) * rates.chi_phase_factor
    return StageRates(
        coupling=coupling,
        decay=rates.complex_decay / kappa,
        pumping=rates.optical_pumping_rate / kappa,
        w0=params.initial_population(stage),
    )


def intensity_scale(params):
    """Factor converting dimensionless <e^dag e> to <E^dag E> (= chi_ref**2 L**2 / c**2)."""
    ref = reference_rates(params)
    return ref.gain_rate * params.cell_length / params.light_speed


@dataclass(frozen=True)
class Grid:
    """Uniform nodes over zeta in [0, 1] and tau in [0, t_max].

    ``n_z`` and ``n_t`` count cells; there are ``n + 1`` nodes per axis.
    """

    n_z: int
    n_t: int
    t_max: float

    def __post_init__(self):
        if self.n_z < 2 or self.n_t < 2:
            raise ValueError("grid needs at least 2 cells per axis")
        if not self.t_max > 0:
            raise ValueError("t_max must be > 0")

    @property
    def dz(self):
        return 1.0 / self.n_z

    @property
    def dt(self):
        return self.t_max / self.n_t

    @property
    def z(self):
        return np.linspace(0.0, 1.0, self.n_z + 1)

    @property
    def t(self):
        return np.linspace(0.0, self.t_max, self.n_t + 1)

    @property
    def z_weights(self):
        return trapezoid_weights(self.n_z, self.dz)

    @property
    def t_weights(self):
        return trapezoid_weights(self.n_t, self.dt)


def trapezoid_weights(n, h):
    w = np.full(n + 1, h)
    w[0] = w[-1] = 0.5 * h
    return w
