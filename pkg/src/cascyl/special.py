r"""Scaled modified Bessel functions and rotated associated Legendre functions.

Bessel values are carried in exponentially scaled form,

    i_scaled = exp(-z) I_nu(z),      k_scaled = exp(+z) K_nu(z),

so that products of the form K*K*(I/K) occurring in the round-trip kernel
stay representable when arguments grow to several hundred.

The rotated Legendre functions are the real-valued combinations

    pbar_l^m(t) = i^-(l+m)   P_l^m(i t),
    qbar_l^m(t) = i^-(l+m-1) (dP_l^m/dz)(i t),

i.e. associated Legendre functions on the imaginary axis with their phases
stripped (Condon-Shortley convention).  For t >= 0 and m >= 0 both are
nonnegative and satisfy all-plus three-term recurrences, which makes the
upward recurrence forward stable and allows a log-space variant for large
degrees and arguments.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp


def log_norm(l, m):
    """Logarithm of the spherical normalization sqrt((2l+1)(l-|m|)!/(l+|m|)!).

    Parameters
    ----------
    l: int
        degree, l >= 0
    m: int
        order, |m| <= l

    Returns
    -------
    float
    """
    if abs(m) > l:
        raise ValueError("require |m| <= l, got l=%s m=%s" % (l, m))
    m = abs(m)
    return 0.5 * (math.log(2 * l + 1) + math.lgamma(l - m + 1) - math.lgamma(l + m + 1))


def _check_order(nu):
    two_nu = 2.0 * float(nu)
    if nu < 0 or two_nu != round(two_nu) or not math.isfinite(two_nu):
        raise ValueError("order must be a nonnegative integer or half-integer, got %r" % (nu,))


@dataclass(frozen=True)
class ScaledBesselPair:
    """Exponentially scaled I_nu, K_nu and their derivatives at one point.

    i_scaled = exp(-z) I_nu(z), k_scaled = exp(z) K_nu(z) and the analogous
    scalings of I'_nu, K'_nu.  The scaled Wronskian reads

        i_scaled * dk_scaled - di_scaled * k_scaled = -1/z.
    """

    order: float
    argument: float
    i_scaled: float
    k_scaled: float
    di_scaled: float
    dk_scaled: float

    def wronskian(self):
        return self.i_scaled * self.dk_scaled - self.di_scaled * self.k_scaled


def bessel_ik_scaled(nu, z):
    """Scaled modified Bessel functions of integer or half-integer order.

    Derivatives are obtained from the two-term neighbour recurrences
    I' = (I_{nu-1} + I_{nu+1})/2 and K' = -(K_{nu-1} + K_{nu+1})/2 applied
    directly to the scaled values (the scaling factor is order independent).

    Parameters
    ----------
    nu: float
        order, in {0, 1, 2, ...} or {1/2, 3/2, ...}
    z: float
        argument, z > 0

    Returns
    -------
    ScaledBesselPair
    """
    _check_order(nu)
    z = float(z)
    if not (z > 0.0) or not math.isfinite(z):
        raise ValueError("argument must be positive and finite, got %r" % (z,))
    i = float(sp.ive(nu, z))
    k = float(sp.kve(nu, z))
    di = 0.5 * (float(sp.ive(nu - 1.0, z)) + float(sp.ive(nu + 1.0, z)))
    dk = -0.5 * (float(sp.kve(abs(nu - 1.0), z)) + float(sp.kve(nu + 1.0, z)))
    return ScaledBesselPair(order=float(nu), argument=z, i_scaled=i, k_scaled=k,
                            di_scaled=di, dk_scaled=dk)


def iv_scaled_table(orders, z):
    """exp(-z) I_n(z) for an array of integer orders and arguments z.

    Shape is (len(orders), len(z)).  Underflows of high orders at small
    arguments flush to zero, which is the correct limit for the ratios the
    kernel consumes.
    """
    orders = np.atleast_1d(np.asarray(orders, dtype=float))
    z = np.atleast_1d(np.asarray(z, dtype=float))
    return sp.ive(orders[:, None], z[None, :])


def kv_scaled_table(orders, z):
    """exp(z) K_n(z) for an array of integer orders and arguments z."""
    orders = np.atleast_1d(np.asarray(orders, dtype=float))
    z = np.atleast_1d(np.asarray(z, dtype=float))
    return sp.kve(orders[:, None], z[None, :])


def kv_scaled_log_table(nu_max, z, lower=None):
    """log(exp(z) K_nu(z)) for all integer orders nu = 0..nu_max.

    Uses the upward recurrence K_{n+1} = K_{n-1} + (2n/z) K_n in log space
    (forward stable; K grows with the order), seeded with scipy values at
    orders 0 and 1.  Working in logs keeps very high orders at small
    arguments representable, where K itself overflows.

    Parameters
    ----------
    nu_max: int
        highest order
    z: array_like
        positive arguments
    lower: ndarray, optional
        a previously computed table for the same z; only the missing rows
        are appended (incremental extension for the adaptive mode sum)

    Returns
    -------
    ndarray of shape (nu_max + 1, len(z))
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.empty((nu_max + 1, z.size))
    if lower is not None:
        n_have = lower.shape[0]
        out[:n_have] = lower
    else:
        n_have = min(2, nu_max + 1)
        out[0] = np.log(sp.kve(0, z))
        if nu_max >= 1:
            out[1] = np.log(sp.kve(1, z))
    for n in range(n_have, nu_max + 1):
        # log of K_{n} = K_{n-2} + (2(n-1)/z) K_{n-1}; the exp argument is <= 0
        out[n] = out[n - 1] + np.log(2.0 * (n - 1) / z + np.exp(out[n - 2] - out[n - 1]))
    return out


@dataclass(frozen=True)
class RotatedLegendreTable:
    """pbar_l^m(t) and qbar_l^m(t) for l = m..l_max at a single argument.

    Arrays are indexed by l (length l_max + 1); entries with l < m are zero.
    """

    m: int
    l_max: int
    t: float
    pbar: np.ndarray
    qbar: np.ndarray


def _log_double_factorial_odd(m):
    # log((2m-1)!!) = lgamma(2m+1) - m log 2 - lgamma(m+1)
    return math.lgamma(2 * m + 1) - m * math.log(2.0) - math.lgamma(m + 1)


def rotated_legendre(m, l_max, t):
    """Rotated associated Legendre functions by stable upward recurrence.

    Seeds pbar_m^m = (2m-1)!! (1+t^2)^(m/2) and
    pbar_{m+1}^m = (2m+1) t pbar_m^m, then recurses upward with

        (l-m+1) pbar_{l+1} = (2l+1) t pbar_l + (l+m) pbar_{l-1},

    whose coefficients are all positive.  The derivative table follows from
    the contiguous relation (1+t^2) qbar_l = l t pbar_l + (l+m) pbar_{l-1}.

    Parameters
    ----------
    m: int
        order, 0 <= m <= l_max
    l_max: int
        highest degree
    t: float
        real argument (t = sinh(theta) in the kernel)

    Returns
    -------
    RotatedLegendreTable
    """
    if m < 0 or m > l_max:
        raise ValueError("require 0 <= m <= l_max, got m=%s l_max=%s" % (m, l_max))
    t = float(t)
    if not math.isfinite(t):
        raise ValueError("argument must be finite")
    pbar = np.zeros(l_max + 1)
    qbar = np.zeros(l_max + 1)
    pbar[m] = math.exp(_log_double_factorial_odd(m) + 0.5 * m * math.log1p(t * t))
    if l_max > m:
        pbar[m + 1] = (2 * m + 1) * t * pbar[m]
    for l in range(m + 1, l_max):
        pbar[l + 1] = ((2 * l + 1) * t * pbar[l] + (l + m) * pbar[l - 1]) / (l - m + 1)
    opt2 = 1.0 + t * t
    for l in range(m, l_max + 1):
        prev = pbar[l - 1] if l - 1 >= m else 0.0
        qbar[l] = (l * t * pbar[l] + (l + m) * prev) / opt2
    return RotatedLegendreTable(m=m, l_max=l_max, t=t, pbar=pbar, qbar=qbar)


def rotated_legendre_log(m, l_max, t):
    """log pbar and log qbar for l = m..l_max, vectorized over t > 0.

    For t > 0 all recurrence terms are positive, so the upward recurrence
    can be carried in log space (one log-sum-exp per step); this stays
    representable for degrees and arguments where the plain values
    overflow.  Entries that vanish identically (qbar_0^0, and all l < m)
    come out as -inf.  t = 0 is excluded because alternating entries vanish
    there; use rotated_legendre for that point.

    Returns
    -------
    (log_pbar, log_qbar): ndarrays of shape (l_max + 1, len(t))
    """
    if m < 0 or m > l_max:
        raise ValueError("require 0 <= m <= l_max, got m=%s l_max=%s" % (m, l_max))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t <= 0.0):
        raise ValueError("log-space tables require t > 0")
    lp = np.full((l_max + 1, t.size), -np.inf)
    lq = np.full((l_max + 1, t.size), -np.inf)
    with np.errstate(divide="ignore"):
        lt = np.log(t)
        lp[m] = _log_double_factorial_odd(m) + 0.5 * m * np.log1p(t * t)
        if l_max > m:
            lp[m + 1] = math.log(2 * m + 1) + lt + lp[m]
        for l in range(m + 1, l_max):
            lp[l + 1] = lp[l] + np.log(
                ((2 * l + 1) * t + (l + m) * np.exp(lp[l - 1] - lp[l])) / (l - m + 1)
            )
        log_opt2 = np.log1p(t * t)
        for l in range(m, l_max + 1):
            if l - 1 >= m:
                lq[l] = lp[l] + np.log(l * t + (l + m) * np.exp(lp[l - 1] - lp[l])) - log_opt2
            elif l > 0 or m > 0:
                lq[l] = lp[l] + math.log(l) + lt - log_opt2 if l > 0 else -np.inf
    return lp, lq
