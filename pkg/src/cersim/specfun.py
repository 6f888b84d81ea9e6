"""Modified Bessel functions of the first kind, orders 0 and 1.

Power series below ``ASYMPTOTIC_SWITCH``, Hankel large-argument expansion
above it. Both branches agree to roughly machine precision at the switch.
All functions accept scalars or numpy arrays of nonnegative reals.

The kernels mostly need I0 and I1 evaluated at ``2*sqrt(x)``; the helpers
:func:`i0_sqrt` and :func:`i1_over_sqrt` sum the corresponding series in
``x`` directly, so there is no square root singularity at ``x = 0``.
"""

import numpy as np

ASYMPTOTIC_SWITCH = 25.0
# I1(2 sqrt(x)) / sqrt(x) switches branch where 2 sqrt(x) = ASYMPTOTIC_SWITCH
SQRT_SWITCH = (ASYMPTOTIC_SWITCH / 2.0) ** 2

_EPS = np.finfo(float).eps
_MAX_TERMS = 500
_ASYMPTOTIC_TERMS = 30


def _check_argument(x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("Bessel argument must be finite")
    if np.any(x < 0):
        raise ValueError("Bessel argument must be nonnegative")
    return x


def _series_in_y(y, order):
    """sum_k y**k / (k! (k+order)!) for y >= 0, order in {0, 1}.

    All terms are positive, so the partial sums carry no cancellation.
    """
    term = np.ones_like(y)
    total = term.copy()
    for k in range(1, _MAX_TERMS):
        term = term * y / (k * (k + order))
        total = total + term
        if np.all(term <= _EPS * 0.25 * total):
            break
    return total


def _hankel_scaled(x, order):
    """sqrt(2 pi x) exp(-x) I_order(x) from the asymptotic expansion, x large."""
    mu = 4.0 * order * order
    term = np.ones_like(x)
    total = term.copy()
    for k in range(1, _ASYMPTOTIC_TERMS):
        term = -term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        total = total + term
    return total


def bessel_i0e(x):
    """Exponentially scaled ``exp(-x) * I0(x)``."""
    x = _check_argument(x)
    out = np.empty_like(x)
    small = x <= ASYMPTOTIC_SWITCH
    xs = x[small]
    out[small] = _series_in_y(0.25 * xs * xs, 0) * np.exp(-xs)
    xl = x[~small]
    out[~small] = _hankel_scaled(xl, 0) / np.sqrt(2.0 * np.pi * xl)
    return out[()] if out.ndim == 0 else out


def bessel_i1e(x):
    """Exponentially scaled ``exp(-x) * I1(x)``."""
    x = _check_argument(x)
    out = np.empty_like(x)
    small = x <= ASYMPTOTIC_SWITCH
    xs = x[small]
    out[small] = 0.5 * xs * _series_in_y(0.25 * xs * xs, 1) * np.exp(-xs)
    xl = x[~small]
    out[~small] = _hankel_scaled(xl, 1) / np.sqrt(2.0 * np.pi * xl)
    return out[()] if out.ndim == 0 else out


def bessel_i0(x):
    """Modified Bessel function I0 for real ``x >= 0``.

    Parameters
    ----------
    x : float or array_like
        Nonnegative, finite argument(s).

    Returns
    -------
    float or ndarray
        I0(x). Overflows to ``inf`` beyond x ~ 713; use :func:`bessel_i0e`
        there.
    """
    x = _check_argument(x)
    out = np.empty_like(x)
    small = x <= ASYMPTOTIC_SWITCH
    xs = x[small]
    out[small] = _series_in_y(0.25 * xs * xs, 0)
    xl = x[~small]
    with np.errstate(over="ignore"):
        out[~small] = _hankel_scaled(xl, 0) * np.exp(xl) / np.sqrt(2.0 * np.pi * xl)
    return out[()] if out.ndim == 0 else out


def bessel_i1(x):
    """Modified Bessel function I1 for real ``x >= 0``."""
    x = _check_argument(x)
    out = np.empty_like(x)
    small = x <= ASYMPTOTIC_SWITCH
    xs = x[small]
    out[small] = 0.5 * xs * _series_in_y(0.25 * xs * xs, 1)
    xl = x[~small]
    with np.errstate(over="ignore"):
        out[~small] = _hankel_scaled(xl, 1) * np.exp(xl) / np.sqrt(2.0 * np.pi * xl)
    return out[()] if out.ndim == 0 else out


def bessel_eval(x, order):
    """Scalar evaluation tagged with the branch used: ``(value, method_tag)``."""
    x = float(_check_argument(x))
    tag = "series" if x <= ASYMPTOTIC_SWITCH else "asymptotic"
    fn = bessel_i0 if order == 0 else bessel_i1
    return float(fn(x)), tag


def i0_sqrt(x):
    """I0(2 sqrt(x)) = sum_k x**k / (k!)**2, for ``x >= 0``."""
    x = _check_argument(x)
    out = np.empty_like(x)
    small = x <= SQRT_SWITCH
    out[small] = _series_in_y(x[small], 0)
    out[~small] = bessel_i0(2.0 * np.sqrt(x[~small]))
    return out[()] if out.ndim == 0 else out


def i1_over_sqrt(x):
    """I1(2 sqrt(x)) / sqrt(x), with the limit value 1 at ``x = 0``.

    Below the switch this is the series 1 + x/2 + x**2/12 + ...; above it
    the quotient is formed from :func:`bessel_i1`.
    """
    x = _check_argument(x)
    out = np.empty_like(x)
    small = x <= SQRT_SWITCH
    out[small] = _series_in_y(x[small], 1)
    xl = x[~small]
    out[~small] = bessel_i1(2.0 * np.sqrt(xl)) / np.sqrt(xl)
    return out[()] if out.ndim == 0 else out
