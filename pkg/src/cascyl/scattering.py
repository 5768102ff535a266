r"""Diagonal T-matrix elements of the sphere and of the cylinder.

At imaginary frequency all elements are real ratios of modified Bessel
functions.  Sphere elements depend on the dimensionless combination
x = R1*kappa and the degree l only; cylinder elements depend on
y = R2*sqrt(kappa^2 + kz^2) and the order |n|.

Ratios that grow like exp(2x) are produced in (sign, log magnitude) form
by the *_log functions; the kernel assembly exponentiates them only after
combining with the decaying translation factors.
"""

import math
from enum import Enum

import numpy as np
from scipy import special as sp

from .errors import SingularTMatrixError
from .special import bessel_ik_scaled

TE = 0
TM = 1

_POL_NAMES = {None: None, "scalar": None, "te": TE, "tm": TM, TE: TE, TM: TM}

# denominators smaller than this (relative to the scaled K magnitude) are
# treated as a tabulated singularity rather than returned as +-inf
_DENOM_FLOOR = 1e-300


class BoundaryCondition(Enum):
    """Boundary conditions imposed on both bodies."""

    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"
    PERFECT_CONDUCTOR = "pec"

    @property
    def is_scalar(self):
        return self is not BoundaryCondition.PERFECT_CONDUCTOR

    @property
    def l_min(self):
        """Lowest sphere degree carrying a mode (EM has no monopole)."""
        return 0 if self.is_scalar else 1

    @property
    def n_polarizations(self):
        return 1 if self.is_scalar else 2

    @classmethod
    def from_name(cls, name):
        key = str(name).strip().lower()
        for bc in cls:
            if bc.value == key:
                return bc
        raise ValueError("unknown boundary condition %r (expected dirichlet, neumann or pec)" % (name,))


def _pol_index(bc, pol):
    if pol not in _POL_NAMES and not (isinstance(pol, str) and pol.lower() in _POL_NAMES):
        raise ValueError("unknown polarization %r" % (pol,))
    idx = _POL_NAMES[pol.lower() if isinstance(pol, str) else pol]
    if bc.is_scalar:
        if idx is not None:
            raise ValueError("scalar boundary conditions carry a single channel")
        return None
    if idx is None:
        raise ValueError("perfectly conducting bodies require pol='te' or 'tm'")
    return idx


def sphere_t_log(bc, l, x, pol=None):
    """(sign, log|T|) of the sphere T-matrix element.

    Dirichlet and EM-TE:  I_{l+1/2}(x) / K_{l+1/2}(x)
    Neumann:             (-I/2 + x I') / (-K/2 + x K')
    EM-TM:               (+I/2 + x I') / (+K/2 + x K')

    Parameters
    ----------
    bc: BoundaryCondition
    l: int
        degree; l >= 0 for scalar, l >= 1 for EM
    x: float
        R1*kappa > 0
    pol: {'te', 'tm', None}
    """
    if x <= 0.0 or not math.isfinite(x):
        raise ValueError("sphere argument must be positive, got %r" % (x,))
    idx = _pol_index(bc, pol)
    if not bc.is_scalar and l < 1:
        raise ValueError("EM sphere modes start at l = 1")
    if l < 0:
        raise ValueError("degree must be nonnegative")
    pair = bessel_ik_scaled(l + 0.5, x)
    if bc is BoundaryCondition.DIRICHLET or idx == TE:
        return 1.0, math.log(pair.i_scaled) - math.log(pair.k_scaled) + 2.0 * x
    if bc is BoundaryCondition.NEUMANN:
        num = -0.5 * pair.i_scaled + x * pair.di_scaled
        den = -0.5 * pair.k_scaled + x * pair.dk_scaled
    else:  # EM TM
        num = 0.5 * pair.i_scaled + x * pair.di_scaled
        den = 0.5 * pair.k_scaled + x * pair.dk_scaled
    if abs(den) < _DENOM_FLOOR * max(1.0, pair.k_scaled):
        raise SingularTMatrixError(
            "sphere T denominator vanished at l=%d, x=%g (bc=%s, pol=%s)" % (l, x, bc.value, pol))
    sign = math.copysign(1.0, num) * math.copysign(1.0, den)
    return sign, math.log(abs(num)) - math.log(abs(den)) + 2.0 * x


def sphere_t(bc, l, x, pol=None):
    """Sphere T-matrix element as a plain float (see sphere_t_log)."""
    sign, logmag = sphere_t_log(bc, l, x, pol)
    return sign * math.exp(logmag)


def cylinder_t(bc, n, y, pol=None):
    """Cylinder T-matrix element I_n/K_n (Dirichlet, EM-TM) or I'_n/K'_n (Neumann, EM-TE).

    Symmetric under n -> -n.

    Parameters
    ----------
    bc: BoundaryCondition
    n: int
        azimuthal order (any integer)
    y: float
        R2*sqrt(kappa^2 + kz^2) > 0
    pol: {'te', 'tm', None}
    """
    if y <= 0.0 or not math.isfinite(y):
        raise ValueError("cylinder argument must be positive, got %r" % (y,))
    idx = _pol_index(bc, pol)
    n = abs(int(n))
    pair = bessel_ik_scaled(n, y)
    if bc is BoundaryCondition.DIRICHLET or idx == TM:
        return pair.i_scaled / pair.k_scaled * math.exp(2.0 * y)
    return pair.di_scaled / pair.dk_scaled * math.exp(2.0 * y)


def sphere_t_log_row(bc, ls, x):
    """Vectorized sphere T element logs for all degrees of one frequency.

    Returns
    -------
    signs, logmags: ndarrays of shape (len(ls), n_pol)
        n_pol is 1 for scalar boundary conditions, 2 (TE, TM) for EM.
    """
    ls = np.asarray(ls, dtype=int)
    nu = ls + 0.5
    i = sp.ive(nu, x)
    k = sp.kve(nu, x)
    di = 0.5 * (sp.ive(nu - 1.0, x) + sp.ive(nu + 1.0, x))
    dk = -0.5 * (sp.kve(nu - 1.0, x) + sp.kve(nu + 1.0, x))
    with np.errstate(divide="ignore"):
        log_d = np.log(i) - np.log(k) + 2.0 * x
        if bc is BoundaryCondition.DIRICHLET:
            return np.ones((ls.size, 1)), log_d[:, None]
        if bc is BoundaryCondition.NEUMANN:
            num = -0.5 * i + x * di
            den = -0.5 * k + x * dk
            sign = np.sign(num) * np.sign(den)
            return sign[:, None], (np.log(np.abs(num)) - np.log(np.abs(den)) + 2.0 * x)[:, None]
        num = 0.5 * i + x * di
        den = 0.5 * k + x * dk
        if np.any(np.abs(den) < _DENOM_FLOOR * np.maximum(1.0, k)):
            raise SingularTMatrixError("sphere TM denominator vanished at x=%g" % (x,))
        sign_tm = np.sign(num) * np.sign(den)
        log_tm = np.log(np.abs(num)) - np.log(np.abs(den)) + 2.0 * x
        return (np.stack([np.ones(ls.size), sign_tm], axis=1),
                np.stack([log_d, log_tm], axis=1))


def cylinder_t_ratio_batch(bc, orders, y):
    """Scaled cylinder T ratios i_scaled/k_scaled (no exp(2y) factor).

    The absent exp(2y) is accounted for in the kernel's shared exponential
    bookkeeping.  Returns one array per channel needed by ``bc``:
    (ratio,) for scalar, (ratio_te, ratio_tm) for EM, each of shape
    (len(orders), len(y)).

    Parameters
    ----------
    bc: BoundaryCondition
    orders: array_like of int
        nonnegative orders |n|
    y: array_like
        positive arguments
    """
    orders = np.atleast_1d(np.asarray(orders, dtype=int))
    if np.any(orders < 0):
        raise ValueError("orders must be nonnegative (use |n|)")
    y = np.atleast_1d(np.asarray(y, dtype=float))
    nu = orders.astype(float)[:, None]
    i = sp.ive(nu, y[None, :])
    k = sp.kve(nu, y[None, :])
    ratio_i = i / k
    if bc is BoundaryCondition.DIRICHLET:
        return (ratio_i,)
    di = 0.5 * (sp.ive(np.abs(nu - 1.0), y[None, :]) + sp.ive(nu + 1.0, y[None, :]))
    dk = -0.5 * (sp.kve(np.abs(nu - 1.0), y[None, :]) + sp.kve(nu + 1.0, y[None, :]))
    ratio_di = di / dk
    if bc is BoundaryCondition.NEUMANN:
        return (ratio_di,)
    return (ratio_di, ratio_i)
