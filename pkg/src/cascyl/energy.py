r"""Casimir energy and force from the round-trip log determinant.

The dimensionless energy is

    E L / (hbar c) = (1/2 pi) int_0^inf domega  log det(1 - M(omega)),

evaluated on a Gauss-Legendre grid in the compactified variable
x = omega/(1+omega).  A truncation ladder raises l_max in steps of two until
the energy is stable to the requested tolerance, and the quadrature is
verified once by doubling both grids.  The force is a Richardson-extrapolated
central difference in the surface gap with frozen solver settings, so the
(smooth) discretization error cancels between the shifted evaluations.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor

from .errors import ConvergenceError, GeometryError, SpectralRadiusError
from .kernel import ModeBasis, QuadratureSpec, assemble_round_trip, _leggauss
from .scattering import BoundaryCondition

# below this Frobenius norm log det(1-M) switches to the traced power series,
# which keeps tiny far-field determinants at full relative accuracy
_SERIES_NORM = 1e-4

_LADDER_RUNGS = 8
_QUAD_REFINE_MAX = 3


@dataclass(frozen=True)
class Geometry:
    """Sphere of radius r1 and cylinder of radius r2 with surface gap d.

    The center distance is L = r1 + r2 + d; all solver arithmetic uses the
    aspect ratios a = r1/L and b = r2/L, so results depend on shape only.
    """

    r1: float
    r2: float
    d: float

    def __post_init__(self):
        if self.r1 <= 0.0 or self.r2 <= 0.0:
            raise GeometryError("radii must be positive")
        if self.d <= 0.0:
            raise GeometryError("bodies overlap: gap d = %g <= 0" % self.d)

    @property
    def center_distance(self):
        return self.r1 + self.r2 + self.d

    @property
    def a(self):
        return self.r1 / self.center_distance

    @property
    def b(self):
        return self.r2 / self.center_distance


@dataclass
class EnergyResult:
    """Dimensionless Casimir interaction energy with diagnostics."""

    e_dimensionless: float            # E * L / (hbar c)
    e_over_e0: float                  # E / E0, E0 = hbar c / (2 pi R1)
    integrand_samples: list           # (omega, log det) pairs of the final rung
    diagnostics: dict
    error_estimate: float             # relative

    @property
    def energy_hbar_c(self):
        """Physical energy in units hbar = c = 1 (requires lengths in one unit)."""
        return self.e_dimensionless / self.diagnostics["center_distance"]


@dataclass
class ForceResult:
    """Casimir force from Richardson-extrapolated central differences."""

    f_dimensionless: float            # F * L^2 / (hbar c)
    step: float                       # finite-difference step as d/L
    richardson_error: float           # relative, |F - F(h/2)| / |F|
    fd_consistency: float             # |F(h) - F(h/2)| / |F|
    diagnostics: dict


def logdet_one_minus(mat):
    """log det(1 - M) of a round-trip matrix.

    Accepts a RoundTripMatrix (the parity blocks are factorized separately)
    or a plain square array.  For very small matrices the traced power
    series replaces the factorization, which would otherwise lose all
    relative accuracy against the unit diagonal.

    Raises
    ------
    SpectralRadiusError
        if det(1 - M) <= 0, i.e. a round-trip eigenvalue reached one.
    """
    blocks = mat.class_blocks() if hasattr(mat, "class_blocks") else (np.asarray(mat),)
    total = 0.0
    for block in blocks:
        if block.size == 0:
            continue
        if block.shape[0] != block.shape[1]:
            raise ValueError("matrix must be square")
        if not np.all(np.isfinite(block)):
            raise ValueError("matrix contains non-finite entries")
        norm = np.linalg.norm(block)
        if norm < _SERIES_NORM:
            acc = 0.0
            power = block
            for s in range(1, 5):
                acc -= np.trace(power) / s
                if s < 4:
                    power = power @ block
            total += acc
            continue
        lu, piv = lu_factor(np.eye(block.shape[0]) - block, check_finite=False)
        diag = np.diag(lu)
        sign = 1.0 if np.count_nonzero(piv != np.arange(block.shape[0])) % 2 == 0 else -1.0
        sign *= np.prod(np.sign(diag))
        if sign <= 0.0 or np.any(diag == 0.0):
            raise SpectralRadiusError(
                "det(1 - M) <= 0: spectral radius reached one "
                "(overlapping geometry or broken truncation)")
        total += float(np.sum(np.log(np.abs(diag))))
    return total


def omega_grid(decay_rate, panels=8, order=12, cutoff=1e-16):
    """Gauss-Legendre nodes/weights for int_0^inf under x = omega/(1+omega).

    The grid stops where the envelope exp(-decay_rate * omega) falls below
    ``cutoff``.  Panel edges are geometric halvings of the cutoff frequency
    (mapped into x), so the exponentially decaying integrand sees a few
    e-foldings per panel wherever its mass sits; weights include the
    Jacobian domega = dx/(1-x)^2.

    Returns
    -------
    (omega, weights, omega_cut)
    """
    if decay_rate <= 0.0:
        raise ValueError("decay rate must be positive")
    omega_cut = -math.log(cutoff) / decay_rate
    om_edges = [0.0] + [omega_cut / 2.0**k for k in range(panels - 1, -1, -1)]
    edges = [om / (1.0 + om) for om in om_edges]
    xg, wg = _leggauss(order)
    x = np.concatenate([0.5 * (e1 - e0) * xg + 0.5 * (e1 + e0)
                        for e0, e1 in zip(edges[:-1], edges[1:])])
    w = np.concatenate([0.5 * (e1 - e0) * wg for e0, e1 in zip(edges[:-1], edges[1:])])
    omega = x / (1.0 - x)
    weights = w / (1.0 - x) ** 2
    return omega, weights, omega_cut


def omega_integral(f, decay_rate, panels=8, order=12, cutoff=1e-16):
    """int_0^inf f(omega) domega for integrands decaying like exp(-rate*omega).

    Returns (value, samples, tail_bound) where samples is the list of
    (omega, f(omega)) pairs and tail_bound estimates the truncated mass
    beyond the grid from the envelope.
    """
    omega, weights, omega_cut = omega_grid(decay_rate, panels, order, cutoff)
    samples = [(float(om), float(f(om))) for om in omega]
    vals = np.array([s[1] for s in samples])
    value = float(np.dot(weights, vals))
    tail = abs(vals[-1]) / decay_rate
    return value, samples, tail


@dataclass
class _SolverSettings:
    l_max: int
    quad: QuadratureSpec
    panels: int
    order: int
    mixing_sign: float = 1.0

    def refined(self):
        return _SolverSettings(self.l_max, self.quad.refined(),
                               self.panels, 2 * self.order, self.mixing_sign)


def default_l_max(geom, bc):
    """Truncation heuristic: l_max grows like 7 R/d at small gaps.

    The EM basis is twice the scalar one, so its cap is lower to keep the
    dense algebra tractable.
    """
    bc = BoundaryCondition(bc)
    raw = max(10, math.ceil(7.0 * max(geom.r1, geom.r2) / geom.d))
    cap = 64 if bc.is_scalar else 40
    return min(raw, cap)


def _energy_once(geom, bc, settings, want_samples=False, collect=None):
    """Single-rung dimensionless energy at fixed settings."""
    a, b = geom.a, geom.b
    basis = ModeBasis(bc, settings.l_max)
    diag_acc = {"n_max": 0, "theta_nodes": 0}

    def integrand(om):
        mat = assemble_round_trip(a, b, om, basis, settings.quad, form="similarity",
                                  mixing_sign=settings.mixing_sign)
        diag_acc["n_max"] = max(diag_acc["n_max"], mat.diagnostics["n_max"])
        diag_acc["theta_nodes"] = max(diag_acc["theta_nodes"], mat.diagnostics["theta_nodes"])
        if collect is not None:
            collect(mat)
        return logdet_one_minus(mat)

    value, samples, tail = omega_integral(
        integrand, 2.0 * (1.0 - a - b), settings.panels, settings.order)
    e_dim = value / (2.0 * math.pi)
    tail /= 2.0 * math.pi
    return e_dim, (samples if want_samples else None), tail, diag_acc


def casimir_energy(geom, bc, l_max=None, rel_tol=1e-4, quad=None,
                   omega_panels=8, omega_order=12, settings=None, collect=None,
                   mixing_sign=1.0):
    """Casimir interaction energy E L / (hbar c) with verified convergence.

    Parameters
    ----------
    geom: Geometry
    bc: BoundaryCondition or name
    l_max: int, optional
        starting truncation; defaults to the R/d heuristic
    rel_tol: float
        requested relative tolerance of the truncation ladder and the
        quadrature verification
    quad: QuadratureSpec, optional
    omega_panels, omega_order: int
        frequency grid (panels x Gauss-Legendre order)
    settings: _SolverSettings, optional
        frozen solver settings; skips the ladder and the quadrature check
        (used by the force differencer)
    collect: callable, optional
        invoked with every assembled RoundTripMatrix (diagnostics hook)

    Returns
    -------
    EnergyResult
    """
    bc = BoundaryCondition(bc)
    if settings is not None:
        e_dim, samples, tail, diag_acc = _energy_once(
            geom, bc, settings, want_samples=True, collect=collect)
        rel = abs(tail) / max(abs(e_dim), 1e-300)
        diags = {"l_max": settings.l_max, "ladder": [[settings.l_max, e_dim]],
                 "quad_refinements": 0, "omega_nodes": settings.panels * settings.order,
                 "omega_tail": tail, "center_distance": geom.center_distance,
                 **diag_acc}
        return EnergyResult(e_dimensionless=e_dim,
                            e_over_e0=2.0 * math.pi * geom.a * e_dim,
                            integrand_samples=samples, diagnostics=diags,
                            error_estimate=rel)

    l_start = l_max if l_max is not None else default_l_max(geom, bc)
    l_start = max(l_start, bc.l_min)
    base = _SolverSettings(l_max=l_start, quad=quad or QuadratureSpec(),
                           panels=omega_panels, order=omega_order,
                           mixing_sign=mixing_sign)

    # settle the quadrature at the first rung by doubling both grids
    e_coarse, _, tail, _ = _energy_once(geom, bc, base)
    refinements = 0
    while True:
        e_fine, _, tail, _ = _energy_once(geom, bc, base.refined())
        quad_err = abs(e_fine - e_coarse)
        if quad_err <= rel_tol * abs(e_fine):
            break
        if refinements >= _QUAD_REFINE_MAX:
            raise ConvergenceError("frequency/angle quadrature did not settle",
                                   details={"last": e_fine, "previous": e_coarse})
        base, e_coarse = base.refined(), e_fine
        refinements += 1

    ladder = [[base.l_max, e_coarse]]
    e_prev = e_coarse
    settled = base
    converged = False
    for _ in range(_LADDER_RUNGS):
        nxt = _SolverSettings(settled.l_max + 2, settled.quad, settled.panels,
                              settled.order, settled.mixing_sign)
        e_next, samples, tail, diag_acc = _energy_once(
            geom, bc, nxt, want_samples=True, collect=collect)
        ladder.append([nxt.l_max, e_next])
        ladder_err = abs(e_next - e_prev)
        settled, e_prev = nxt, e_next
        if ladder_err <= rel_tol * abs(e_next):
            converged = True
            break
    if not converged:
        raise ConvergenceError("truncation ladder did not converge",
                               details={"ladder": ladder})

    e_dim = e_prev
    err = max(ladder_err, quad_err, abs(tail)) / max(abs(e_dim), 1e-300)
    diags = {"l_max": settled.l_max, "ladder": ladder,
             "quad_refinements": refinements,
             "omega_nodes": settled.panels * settled.order,
             "omega_tail": tail, "center_distance": geom.center_distance,
             "settings": settled, **diag_acc}
    return EnergyResult(e_dimensionless=e_dim,
                        e_over_e0=2.0 * math.pi * geom.a * e_dim,
                        integrand_samples=samples, diagnostics=diags,
                        error_estimate=err)


def _energy_physical(geom, bc, settings):
    """E in hbar=c=1 units at frozen settings (force helper)."""
    e_dim, _, _, _ = _energy_once(geom, bc, settings)
    return e_dim / geom.center_distance


def casimir_force(geom, bc, l_max=None, rel_tol=1e-4, quad=None,
                  omega_panels=8, omega_order=12, mixing_sign=1.0):
    """Casimir force F L^2 / (hbar c), F = -dE/dd.

    Central differences at steps h = 1e-3 d and h/2 with Richardson
    extrapolation; all four shifted energies reuse the solver settings
    settled at the central gap, so the discretization error largely cancels
    in the differences.

    Returns
    -------
    ForceResult
    """
    bc = BoundaryCondition(bc)
    center = casimir_energy(geom, bc, l_max=l_max, rel_tol=rel_tol, quad=quad,
                            omega_panels=omega_panels, omega_order=omega_order,
                            mixing_sign=mixing_sign)
    settings = center.diagnostics["settings"]
    d = geom.d
    h = 1e-3 * d
    e_at = {}
    for shift in (h, -h, 0.5 * h, -0.5 * h):
        e_at[shift] = _energy_physical(Geometry(geom.r1, geom.r2, d + shift), bc, settings)
    dh = (e_at[h] - e_at[-h]) / (2.0 * h)
    dh2 = (e_at[0.5 * h] - e_at[-0.5 * h]) / h
    deriv = (4.0 * dh2 - dh) / 3.0
    force = -deriv
    f_scale = abs(force) if force != 0.0 else 1e-300
    fd_consistency = abs(dh - dh2) / f_scale
    richardson_error = abs(deriv - dh2) / f_scale
    L = geom.center_distance
    return ForceResult(
        f_dimensionless=force * L * L,
        step=h / L,
        richardson_error=richardson_error,
        fd_consistency=fd_consistency,
        diagnostics={"l_max": settings.l_max, "center_energy": center.e_dimensionless,
                     "center_error_estimate": center.error_estimate,
                     "center_distance": L},
    )
