r"""Assembly of the rotated, real round-trip matrix at one imaginary frequency.

Working variables are the dimensionless frequency omega = L*xi/c and the
aspect ratios a = R1/L, b = R2/L.  With the substitution kz = kappa*sinh(theta)
every matrix element is a sum over cylinder orders n of a theta integral whose
factors are

    sphere T at a*omega,   rotated Legendre functions at t = sinh(theta),
    K_{n-m} and K_{m'-n} at x = omega*cosh(theta),   cylinder T at y = b*x.

A diagonal similarity (i^-(l+m), extended by the polarization index for the
EM case) removes all phases, so the assembled matrix is real.  Entries couple
only within a parity class, (l-m) mod 2 for the scalar field and (l-m+p) mod 2
for the EM field, and the basis is ordered so the matrix is block diagonal.

Exponential bookkeeping: every row factor carries exp(-x(1-b)) together with
sqrt(|T1|) and the mode normalization in log space, while the n-sum works on
exp(x)K-scaled values anchored to K_{|m|}; products of the two sides restore
the true magnitudes without over- or underflow.
"""

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError, GeometryError
from .scattering import TE, TM, BoundaryCondition, cylinder_t_ratio_batch, sphere_t_log_row
from .special import kv_scaled_log_table, log_norm, rotated_legendre_log

_POL_LABEL = {None: "scalar", TE: "te", TM: "tm"}

# row-factor magnitude above which the assembly refuses to exponentiate
_ROW_LOG_GUARD = 690.0

CSV_HEADER = "row_l,row_m,row_pol,col_l,col_m,col_pol,value"


@dataclass(frozen=True)
class QuadratureSpec:
    """Discretization of the theta integral and the cylinder mode sum.

    theta panels start with a width tied to the Gaussian scale of the
    integrand at theta = 0 and grow geometrically out to the cutoff where
    the envelope exp(-2 omega (1-a-b) cosh(theta)) has fallen below
    theta_cutoff_epsilon relative to the peak.
    """

    theta_order: int = 20
    theta_first_width: float = 2.5
    theta_growth: float = 1.7
    theta_cutoff_epsilon: float = 1e-18
    n_tol: float = 1e-10
    n_cap: int = 256
    n_batch: int = 16

    def __post_init__(self):
        if self.theta_order < 2 or self.n_batch < 1 or self.n_cap < 1:
            raise ValueError("invalid quadrature spec")
        if not (0.0 < self.theta_cutoff_epsilon < 1.0 and 0.0 < self.n_tol < 1.0):
            raise ValueError("cutoff tolerances must lie in (0, 1)")
        if self.theta_growth <= 1.0 or self.theta_first_width <= 0.0:
            raise ValueError("invalid theta panel layout")

    def refined(self):
        """Spec with doubled theta resolution (for convergence checks)."""
        return replace(self, theta_order=2 * self.theta_order)


class ModeBasis:
    """Ordered sphere-side mode basis with its parity-class partition.

    Entries are (l, m, p) with p = None for a scalar field and p in
    {TE, TM} for the EM field; they are grouped by parity class so the
    round-trip matrix is block diagonal, and within a class by m with
    contiguous l runs.
    """

    def __init__(self, bc, l_max):
        bc = BoundaryCondition(bc)
        if l_max < bc.l_min:
            raise ValueError("l_max must be at least %d for %s" % (bc.l_min, bc.value))
        self.bc = bc
        self.l_max = int(l_max)
        entries = []
        offsets = {}
        class_start = [0, None, None]
        for parity in (0, 1):
            class_start[parity] = len(entries)
            for m in range(-l_max, l_max + 1):
                ls, ps = _block_modes(bc, l_max, parity, m)
                if ls.size == 0:
                    continue
                offsets[(parity, m)] = len(entries)
                if ps is None:
                    entries.extend((int(l), m, None) for l in ls)
                else:
                    entries.extend((int(l), m, int(p)) for l, p in zip(ls, ps))
        class_start[2] = len(entries)
        self.entries = tuple(entries)
        self.size = len(entries)
        self.class_slices = (slice(class_start[0], class_start[1]),
                             slice(class_start[1], class_start[2]))
        self._offsets = offsets
        self.parity_class = np.array(
            [(l - m + (p or 0)) % 2 for (l, m, p) in entries], dtype=int)

    def block_offset(self, parity, m):
        return self._offsets.get((parity, m))

    def index(self, l, m, p=None):
        return self.entries.index((l, m, p))


def _block_modes(bc, l_max, parity, m):
    """(l array, p array or None) of one (parity, m) block, in storage order."""
    l_start = max(bc.l_min, abs(m))
    ls = np.arange(l_start, l_max + 1)
    if bc.is_scalar:
        ls = ls[(ls - m) % 2 == parity]
        return ls, None
    ps = (parity - (ls - m)) % 2
    return ls, ps


@dataclass
class RoundTripMatrix:
    """Dense real round-trip matrix in the rotated basis at one frequency."""

    omega: float
    a: float
    b: float
    basis: ModeBasis
    values: np.ndarray
    diagnostics: dict

    def class_blocks(self):
        """Views of the two parity-class diagonal blocks."""
        return tuple(self.values[sl, sl] for sl in self.basis.class_slices)

    def spectral_radius(self):
        rad = 0.0
        for block in self.class_blocks():
            if block.size:
                rad = max(rad, np.max(np.abs(np.linalg.eigvals(block))))
        return rad

    def to_csv(self, out):
        """Debug dump of all entries; ``out`` is a writable text file object."""
        out.write(CSV_HEADER + "\n")
        entries = self.basis.entries
        for i, (l, m, p) in enumerate(entries):
            for j, (lc, mc, pc) in enumerate(entries):
                out.write("%d,%d,%s,%d,%d,%s,%.17g\n" % (
                    l, m, _POL_LABEL[p], lc, mc, _POL_LABEL[pc], self.values[i, j]))


@lru_cache(maxsize=32)
def _leggauss(order):
    return np.polynomial.legendre.leggauss(order)


def _theta_grid(omega, one_minus_ab, poly_power, quad):
    """Composite Gauss-Legendre grid on [0, theta_max].

    theta_max solves gamma*(cosh(theta)-1) = log(1/eps) + poly_power*log(cosh)
    with gamma = 2*omega*(1-a-b), i.e. the point where the exponential
    envelope has dropped below eps of the peak even against the polynomial
    growth of the Legendre factors.
    """
    gamma = 2.0 * omega * one_minus_ab
    ln_eps = -math.log(quad.theta_cutoff_epsilon)
    ch = 1.0 + ln_eps / gamma
    for _ in range(200):
        new = 1.0 + (ln_eps + poly_power * math.log(ch)) / gamma
        if abs(new - ch) <= 1e-12 * ch:
            ch = new
            break
        ch = new
    theta_max = math.acosh(ch)
    width = min(quad.theta_first_width / math.sqrt(gamma), theta_max / 3.0)
    edges = [0.0]
    while edges[-1] < theta_max:
        edges.append(min(edges[-1] + width, theta_max))
        width *= quad.theta_growth
    xg, wg = _leggauss(quad.theta_order)
    theta = np.concatenate([
        0.5 * (e1 - e0) * xg + 0.5 * (e1 + e0) for e0, e1 in zip(edges[:-1], edges[1:])])
    w = np.concatenate([
        0.5 * (e1 - e0) * wg for e0, e1 in zip(edges[:-1], edges[1:])])
    return np.sinh(theta), np.cosh(theta), w


def _mode_sum(bc, l_max, x, y, ln_anchor, envw, quad):
    """Anchored cylinder mode sum S_q[m, m', j] with adaptive shells.

    S_q = sum_n exp(lnK[|n-m|] - anchor_m) * ratio_q(|n|) * exp(lnK[|m'-n|] - anchor_m'),
    accumulated over shells |n| = 0, 1, ... until the latest batch
    contributes less than n_tol of the envelope-weighted total.
    """
    n_t = x.size
    n_m = 2 * l_max + 1
    ms = np.arange(-l_max, l_max + 1)
    n_q = bc.n_polarizations
    s_acc = np.zeros((n_q, n_m, n_m, n_t))
    ln_k = kv_scaled_log_table(l_max, x)
    shell_lo = 0
    tail = np.inf
    while True:
        shell_hi = min(shell_lo + quad.n_batch, quad.n_cap + 1)
        ns = [0] if shell_lo == 0 else []
        for k in range(max(shell_lo, 1), shell_hi):
            ns.extend((k, -k))
        ns = np.array(ns, dtype=int)
        ln_k = kv_scaled_log_table(shell_hi - 1 + l_max, x, lower=ln_k)
        ratios = cylinder_t_ratio_batch(bc, np.arange(shell_lo, shell_hi), y)
        idx = np.abs(ns[None, :] - ms[:, None])
        w_gather = np.exp(np.minimum(ln_k[idx, :] - ln_anchor[:, None, :], _ROW_LOG_GUARD))
        w_t = np.ascontiguousarray(w_gather.transpose(2, 0, 1))
        batch_peak = 0.0
        for q in range(n_q):
            ratio = ratios[q][np.abs(ns) - shell_lo, :]
            rw_t = np.ascontiguousarray((w_gather * ratio[None, :, :]).transpose(2, 1, 0))
            ds = np.matmul(w_t, rw_t).transpose(1, 2, 0)
            s_acc[q] += ds
            batch_peak = max(batch_peak, np.max(np.abs(ds) * envw[None, None, :]))
        total_peak = max(np.max(np.abs(s_acc) * envw[None, None, None, :]), 1e-300)
        tail = batch_peak / total_peak
        if batch_peak == 0.0 or tail < quad.n_tol:
            break
        if shell_hi > quad.n_cap:
            raise ConvergenceError(
                "cylinder mode sum not converged at hard cap |n| = %d" % quad.n_cap,
                details={"tail": tail, "omega": None})
        shell_lo = shell_hi
    return s_acc, shell_hi - 1, tail


def _norm_tables(bc, l_max, t):
    """Log tables of the normalized rotated Legendre functions per |m|.

    Returns dict |m| -> (log normalized pbar, log normalized qbar), each of
    shape (l_max + 1, len(t)); the EM normalization absorbs 1/sqrt(l(l+1)).
    """
    tables = {}
    em = not bc.is_scalar
    for am in range(l_max + 1):
        lp, lq = rotated_legendre_log(am, l_max, t)
        norm = np.zeros(l_max + 1)
        for l in range(am, l_max + 1):
            norm[l] = log_norm(l, am)
            if em and l >= 1:
                norm[l] -= 0.5 * math.log(l * (l + 1))
        lp = lp + norm[:, None]
        if em:
            lq = lq + norm[:, None]
        tables[am] = (lp, lq if em else None)
    return tables


def _side_factors(bc, basis, parity, m, tables, ln_t1, sgn_t1, base, c, t_exp,
                  off_sign=1.0):
    """Factor arrays of one (parity, m) block for one side of the product.

    ``t_exp`` is the exponent of |T1| carried on this side (1 for the rows
    of the plain form, 1/2 on both sides of the symmetrized form, 0 for the
    columns of the plain form); ``off_sign`` multiplies the polarization
    off-diagonal slots (used to flip the mixing sign of the column side).
    Returns (ls, factors, srow) where factors holds one array per cylinder
    channel q of shape (block length, n_theta) and srow is the per-row sign
    of the assembled matrix.
    """
    ls, ps = _block_modes(bc, basis.l_max, parity, m)
    if ls.size == 0:
        return ls, None, None
    am = abs(m)
    lp, lq = tables[am]
    l0 = bc.l_min
    if bc.is_scalar:
        rows = _exp_checked(lp[ls, :] + t_exp * ln_t1[ls - l0, 0][:, None] + base[None, :])
        return ls, (rows,), sgn_t1[ls - l0, 0].copy()
    rows_q = []
    for q in (TE, TM):
        rows = np.empty((ls.size, c.size))
        diag = ps == q
        if np.any(diag):
            lsel = ls[diag]
            rows[diag] = c[None, :] * _exp_checked(
                lq[lsel, :] + t_exp * ln_t1[lsel - l0, q][:, None] + base[None, :])
        off = ~diag
        if np.any(off):
            lsel = ls[off]
            # the TE row coupling through the TM channel carries the residual
            # minus sign left over from the diagonal similarity
            sgn_off = (-1.0 if q == TM else 1.0) * off_sign
            rows[off] = sgn_off * (m / c)[None, :] * _exp_checked(
                lp[lsel, :] + t_exp * ln_t1[lsel - l0, 1 - q][:, None] + base[None, :])
        rows_q.append(rows)
    srow = -sgn_t1[ls - l0, ps]
    return ls, tuple(rows_q), srow


def _exp_checked(log_arg):
    peak = np.max(log_arg)
    if peak > _ROW_LOG_GUARD:
        raise ConvergenceError("kernel factor exceeded the representable range "
                               "(log magnitude %.1f)" % peak)
    return np.exp(log_arg)


def assemble_round_trip(a, b, omega, basis, quad=None, form="plain", mixing_sign=1.0):
    """Assemble the rotated real round-trip matrix at frequency omega.

    Parameters
    ----------
    a, b: float
        R1/L and R2/L with a + b < 1
    omega: float
        dimensionless imaginary frequency L*xi/c, > 0
    basis: ModeBasis
    quad: QuadratureSpec, optional
    form: {'plain', 'similarity'}
        'plain' places the sphere T factor on the rows exactly as in the
        combined kernel formula; 'similarity' splits |T1|^(1/2) onto both
        sides (a diagonal similarity, so det(1-M) and the spectrum are
        unchanged) which equilibrates the matrix for the log determinant.
    mixing_sign: {+1.0, -1.0}
        relative sign between the polarization-mixing entries of the two
        translation directions (EM only).  +1 keeps both mixing blocks
        equal, the convention of the tabulated block kernel this solver
        implements by default; -1 uses the antisymmetric variant obtained
        by re-expanding the outgoing waves directly, which restores the
        proximity-force limit at small gaps.  Scalar fields ignore it.

    Returns
    -------
    RoundTripMatrix
    """
    if not (a > 0.0 and b > 0.0):
        raise GeometryError("radii must be positive")
    if a + b >= 1.0:
        raise GeometryError("bodies overlap: a + b = %g >= 1" % (a + b))
    if not (omega > 0.0 and math.isfinite(omega)):
        raise ValueError("omega must be positive and finite")
    if form not in ("plain", "similarity"):
        raise ValueError("form must be 'plain' or 'similarity'")
    if mixing_sign not in (1.0, -1.0, 1, -1):
        raise ValueError("mixing_sign must be +1 or -1")
    quad = quad or QuadratureSpec()
    bc = basis.bc
    l_max = basis.l_max
    symmetric = form == "similarity"
    mixing_sign = float(mixing_sign)

    t, c, w = _theta_grid(omega, 1.0 - a - b, 2 * l_max + 3, quad)
    x = omega * c
    y = b * x
    # shared per-sample envelope; the exp(2 a omega) growth of T1 is kept
    # inside its log and cancels against exp(-x(1-b)) at theta = 0
    envw = w * c * np.exp(-2.0 * x * (1.0 - b))

    ls_all = np.arange(bc.l_min, l_max + 1)
    sgn_t1, ln_t1 = sphere_t_log_row(bc, ls_all, a * omega)
    tables = _norm_tables(bc, l_max, t)

    ln_anchor = kv_scaled_log_table(l_max, x)[np.abs(np.arange(-l_max, l_max + 1)), :]
    try:
        s_acc, n_max_used, n_tail = _mode_sum(bc, l_max, x, y, ln_anchor, envw, quad)
    except ConvergenceError as err:
        err.details["omega"] = omega
        raise

    base_common = -x * (1.0 - b) + 0.5 * np.log(w * c)
    exp_row, exp_col = (0.5, 0.5) if symmetric else (1.0, 0.0)

    values = np.zeros((basis.size, basis.size))
    caches = {}

    def side_for(parity, m, t_exp, off_sign=1.0):
        cache = caches.setdefault((t_exp, off_sign), {})
        if m not in cache:
            base = base_common + ln_anchor[m + l_max]
            cache[m] = _side_factors(bc, basis, parity, m, tables, ln_t1, sgn_t1,
                                     base, c, t_exp, off_sign)
        return cache[m]

    em = not bc.is_scalar
    antisym = em and mixing_sign < 0.0
    for parity in (0, 1):
        caches.clear()
        done = set()
        for m in range(-l_max, l_max + 1):
            mp_start = m if symmetric else -l_max
            for mp in range(mp_start, l_max + 1):
                if (m, mp) in done:
                    continue
                ls_r, rows_r, srow_r = side_for(parity, m, exp_row)
                ls_c, cols_c, _ = side_for(parity, mp, exp_col, mixing_sign)
                done.add((m, mp))
                if rows_r is None or cols_c is None:
                    done.update([(mp, m), (-m, -mp), (-mp, -m)])
                    continue
                block = np.zeros((ls_r.size, ls_c.size))
                for q in range(len(rows_r)):
                    s_line = s_acc[q, m + l_max, mp + l_max, :]
                    block += (rows_r[q] * s_line[None, :]) @ cols_c[q].T
                sig_r = _pol_signs(bc, basis, parity, m) if em else None
                sig_c = _pol_signs(bc, basis, parity, mp) if em else None
                _write_block(values, basis, parity, m, mp, srow_r[:, None] * block)
                if symmetric and (mp, m) not in done:
                    # the T-stripped block is symmetric under transposition up
                    # to (-1)^(p+p') when the mixing blocks are antisymmetric
                    _, _, srow_c = side_for(parity, mp, exp_row)
                    block_t = block.T
                    if antisym:
                        block_t = (sig_c[:, None] * sig_r[None, :]) * block_t
                    _write_block(values, basis, parity, mp, m, srow_c[:, None] * block_t)
                    done.add((mp, m))
                if (-m, -mp) not in done:
                    # reflected block: identical (l, p) layout; EM entries pick
                    # up (-1)^(p+p') from the sign flip of the m/cosh factors
                    refl = ((sig_r[:, None] * sig_c[None, :]) * block) if em else block
                    _write_block(values, basis, parity, -m, -mp, srow_r[:, None] * refl)
                    done.add((-m, -mp))
                    if symmetric and (-mp, -m) not in done:
                        _, _, srow_c = side_for(parity, mp, exp_row)
                        refl_t = refl.T
                        if antisym:
                            refl_t = (sig_c[:, None] * sig_r[None, :]) * refl_t
                        _write_block(values, basis, parity, -mp, -m, srow_c[:, None] * refl_t)
                        done.add((-mp, -m))

    diagnostics = {
        "theta_nodes": int(t.size),
        "n_max": int(n_max_used),
        "n_tail": float(n_tail),
        "form": form,
        "mixing_sign": mixing_sign,
    }
    return RoundTripMatrix(omega=omega, a=a, b=b, basis=basis, values=values,
                           diagnostics=diagnostics)


def _write_block(values, basis, parity, m, mp, block):
    off_r = basis.block_offset(parity, m)
    off_c = basis.block_offset(parity, mp)
    values[off_r:off_r + block.shape[0], off_c:off_c + block.shape[1]] = block


def _pol_signs(bc, basis, parity, m):
    ls, ps = _block_modes(bc, basis.l_max, parity, m)
    return (-1.0) ** ps


def assemble_scalar_matrix(a, b, bc, omega, basis=None, quad=None, l_max=None, form="plain"):
    """Round-trip matrix for a scalar field (Dirichlet or Neumann).

    Either ``basis`` or ``l_max`` must be given; ``bc`` must match the basis.
    """
    bc = BoundaryCondition(bc)
    if not bc.is_scalar:
        raise ValueError("use assemble_em_matrix for perfectly conducting bodies")
    if basis is None:
        basis = ModeBasis(bc, l_max)
    if basis.bc is not bc:
        raise ValueError("basis was built for %s" % basis.bc.value)
    return assemble_round_trip(a, b, omega, basis, quad, form=form)


def assemble_em_matrix(a, b, omega, basis=None, quad=None, l_max=None, form="plain",
                       mixing_sign=1.0):
    """Round-trip matrix for the EM field (perfectly conducting bodies)."""
    if basis is None:
        basis = ModeBasis(BoundaryCondition.PERFECT_CONDUCTOR, l_max)
    if basis.bc.is_scalar:
        raise ValueError("basis was built for a scalar field")
    return assemble_round_trip(a, b, omega, basis, quad, form=form,
                               mixing_sign=mixing_sign)


@dataclass
class NSumResult:
    """Partial sums of the cylinder order sum at one (m, m', x, y) point."""

    terms: dict
    total: float
    n_max: int
    tail_estimate: float


def n_sum_terms(m, mp, x, y, bc=BoundaryCondition.DIRICHLET, pol=None,
                tol=1e-10, n_cap=256):
    """Adaptive evaluation of sum_n K_{n-m}(x) T2_n(y) K_{m'-n}(x).

    Truncates once the next |n| shell contributes less than ``tol`` of the
    accumulated sum in magnitude.

    Returns
    -------
    NSumResult
        with the per-n terms, the total, the accepted n_max and the
        relative tail estimate.
    """
    if x <= 0.0 or y <= 0.0:
        raise ValueError("arguments must be positive")
    bc = BoundaryCondition(bc)
    scale = math.exp(-2.0 * (x - y))
    terms = {}
    total = 0.0
    n_shell = 0
    while True:
        orders = [0] if n_shell == 0 else [n_shell, -n_shell]
        shell_sum = 0.0
        for n in orders:
            ratio = cylinder_t_ratio_batch(bc, [abs(n)], np.array([y]))
            idx = 0 if (pol is None or bc.is_scalar) else (TE if str(pol).lower() == "te" else TM)
            khat1 = math.exp(kv_scaled_log_table(abs(n - m), np.array([x]))[abs(n - m), 0])
            khat2 = math.exp(kv_scaled_log_table(abs(mp - n), np.array([x]))[abs(mp - n), 0])
            term = scale * khat1 * khat2 * float(ratio[idx][0, 0])
            terms[n] = term
            shell_sum += term
        total += shell_sum
        if abs(shell_sum) <= tol * abs(total) or shell_sum == 0.0:
            return NSumResult(terms=terms, total=total, n_max=n_shell,
                              tail_estimate=abs(shell_sum) / max(abs(total), 1e-300))
        if n_shell >= n_cap:
            raise ConvergenceError("mode sum not converged before |n| = %d" % n_cap)
        n_shell += 1
