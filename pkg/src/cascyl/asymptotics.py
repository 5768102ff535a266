r"""Closed-form asymptotic regimes of the sphere-cylinder interaction.

Large-separation leading terms (sphere-cylinder, plus the sphere-sphere and
cylinder-cylinder reference formulas), the proximity force approximation for
small gaps, and the derivative-expansion correction to it.  All energies are
in units hbar = c = 1; the cylinder-cylinder energies are per total length H.

far_integral_constants() re-evaluates the bare double integrals behind the
far-field coefficients by direct 2D quadrature with the same scaled-Bessel
engine used by the exact kernel, which makes it a deep end-to-end check of
the special-function layer.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .kernel import _leggauss
from .scattering import BoundaryCondition
from .special import kv_scaled_table

_PI = math.pi


class Family(Enum):
    SPHERE_CYLINDER = "sphere-cylinder"
    SPHERE_SPHERE = "sphere-sphere"
    CYLINDER_CYLINDER = "cylinder-cylinder"


def far_energy(bc, family, r1, r2, L, h=None):
    """Large-separation leading term of the interaction energy.

    Parameters
    ----------
    bc: BoundaryCondition or name
    family: Family
        body pair; r1 is the sphere radius where one body is a sphere
    r1, r2: float
        radii
    L: float
        center-center distance, L > r1 + r2
    h: float, optional
        cylinder length, required for the cylinder-cylinder family

    Returns
    -------
    float, negative
    """
    bc = BoundaryCondition(bc)
    family = Family(family)
    if L <= r1 + r2:
        raise ValueError("far-field formulas need L > r1 + r2")
    if family is Family.SPHERE_CYLINDER:
        if L <= r2:
            raise ValueError("log factor requires L > r2")
        if bc is BoundaryCondition.DIRICHLET:
            return -r1 / (4.0 * _PI * L**2 * math.log(L / r2))
        if bc is BoundaryCondition.NEUMANN:
            return -71.0 * r1**3 * r2**2 / (45.0 * _PI * L**6)
        return -r1**3 / (4.0 * _PI * L**4 * math.log(L / r2))
    if family is Family.SPHERE_SPHERE:
        if bc is BoundaryCondition.DIRICHLET:
            return -r1 * r2 / (4.0 * _PI * L**3)
        if bc is BoundaryCondition.NEUMANN:
            return -161.0 * r1**3 * r2**3 / (96.0 * _PI * L**7)
        return -143.0 * r1**3 * r2**3 / (16.0 * _PI * L**7)
    if h is None:
        raise ValueError("cylinder-cylinder energies are per length: pass h")
    if L <= r1 or L <= r2:
        raise ValueError("log factors require L > r1 and L > r2")
    if bc is BoundaryCondition.NEUMANN:
        return -7.0 * h * r1**2 * r2**2 / (5.0 * _PI * L**6)
    return -h / (8.0 * _PI * L**2 * math.log(L / r1) * math.log(L / r2))


def pfa_energy(bc, r1, r2, d):
    """Proximity force approximation of the small-gap energy.

    -(pi^3/1440 d^2) R1 sqrt(R2/(R1+R2)) for Dirichlet and Neumann; the
    perfectly conducting value is exactly twice that (two photon
    polarizations).
    """
    bc = BoundaryCondition(bc)
    if d <= 0.0:
        raise ValueError("gap must be positive")
    e = -(_PI**3 / (1440.0 * d * d)) * r1 * math.sqrt(r2 / (r1 + r2))
    return 2.0 * e if bc is BoundaryCondition.PERFECT_CONDUCTOR else e


def de_beta(bc):
    """Gradient coefficient of the derivative expansion (pure number)."""
    bc = BoundaryCondition(bc)
    if bc is BoundaryCondition.DIRICHLET:
        return 2.0 / 3.0
    if bc is BoundaryCondition.NEUMANN:
        return (2.0 / 3.0) * (1.0 - 30.0 / _PI**2)
    return (2.0 / 3.0) * (1.0 - 15.0 / _PI**2)


def de_energy(bc, r1, r2, d):
    """Derivative-expansion energy: PFA plus the next-to-leading gap correction.

    E = alpha * E_PFA_scalar * [1 - (5/8) d/(R1+R2) + (2 beta - 1) d/R1
                                  + (beta - 3/8) d/R2]
    with alpha = 1 (Dirichlet, Neumann) or 2 (perfect conductors).
    """
    bc = BoundaryCondition(bc)
    if d <= 0.0:
        raise ValueError("gap must be positive")
    beta = de_beta(bc)
    bracket = (1.0 - 0.625 * d / (r1 + r2)
               + (2.0 * beta - 1.0) * d / r1
               + (beta - 0.375) * d / r2)
    return pfa_energy(bc, r1, r2, d) * bracket


@dataclass(frozen=True)
class FarIntegralConstant:
    """One bare double integral behind a far-field coefficient."""

    name: str
    value: float
    expected: float

    @property
    def relative_error(self):
        return abs(self.value - self.expected) / abs(self.expected)


def _panel_nodes(edges, order):
    xg, wg = _leggauss(order)
    x = np.concatenate([0.5 * (e1 - e0) * xg + 0.5 * (e1 + e0)
                        for e0, e1 in zip(edges[:-1], edges[1:])])
    w = np.concatenate([0.5 * (e1 - e0) * wg for e0, e1 in zip(edges[:-1], edges[1:])])
    return x, w


def far_integral_constants(order=16):
    """Evaluate the six leading-channel double integrals numerically.

    Each integral has the form
        int_0^inf domega omega^p int_-inf^inf dtheta g(theta) prod K(omega cosh(theta))
    and is computed by direct 2D Gauss-Legendre quadrature: geometric theta
    panels out to the exponential cutoff, and per-theta omega panels scaled
    with 1/cosh(theta).  K factors come from the exp-scaled engine.

    Returns
    -------
    list of FarIntegralConstant, ordered as
    (Dirichlet l=0, Neumann l=0, Neumann l=1 m=0, Neumann l=1 |m|=1,
     conductor l=1 m=0, conductor l=1 |m|=1)
    """
    theta_edges = [0.0, 0.25, 0.5, 1.0, 1.75, 3.0, 4.5, 6.5, 9.0, 12.0, 16.0,
                   21.0, 27.0, 34.0, 42.0]
    u_edges = [0.0, 1e-4, 1e-3, 1e-2, 0.1, 0.35, 0.8, 1.6, 3.0, 5.0, 8.0,
               12.0, 17.0, 23.0, 30.0, 38.0, 47.0, 57.0]
    theta, w_theta = _panel_nodes(theta_edges, order)
    u, w_u = _panel_nodes(u_edges, order)

    ch = np.cosh(theta)
    sh = np.sinh(theta)
    # omega_{i,j} = u_i / (2 cosh(theta_j)); K arguments are then u_i / 2
    khat = kv_scaled_table([0, 1, 2], u / 2.0)
    ksq = np.exp(-u)[None, :] * khat * khat          # K_nu(u/2)^2, (3, nu)
    k00, k11, k22 = ksq[0], ksq[1], ksq[2]

    def integral(p, g_theta, kcombo):
        # sum_j w_theta 2 g(theta_j) sum_i w_u/(2 ch_j) (u_i/(2 ch_j))^p kcombo_i
        inner = np.dot(w_u, (u / 2.0) ** p * kcombo)
        return float(np.sum(w_theta * 2.0 * g_theta / (2.0 * ch ** (p + 1))) * inner)

    results = [
        FarIntegralConstant("dirichlet_l0",
                            integral(1, ch, k00), _PI / 2.0),
        FarIntegralConstant("neumann_l0",
                            integral(5, ch**3, k00 + 2.0 * k11), 32.0 * _PI / 15.0),
        FarIntegralConstant("neumann_l1_m0",
                            integral(5, ch**3 * sh**2, k00 + 2.0 * k11), 32.0 * _PI / 15.0),
        FarIntegralConstant("neumann_l1_m1",
                            integral(5, ch**5, k00 + k11 + k22), 136.0 * _PI / 15.0),
        FarIntegralConstant("conductor_l1_m0",
                            integral(3, ch**3, k00), _PI / 3.0),
        FarIntegralConstant("conductor_l1_m1",
                            integral(3, ch * (2.0 * sh**2 - 1.0), k11), _PI / 3.0),
    ]
    return results
