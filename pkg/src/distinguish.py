"""Which pairs of orthogonal DFS states can be told apart by one fixed product measurement.

The pair is |psi> = cos(w)|phi0> + sin(w)|phi1>, |psi_perp> = sin(w)|phi0> - cos(w)|phi1>,
measured in the product basis of four x-z plane directions theta_a..theta_d.
A basis distinguishes them when no basis vector has a nonzero component in
both states.

Writing v_j = (<j|phi0>, <j|phi1>), the two components of basis vector j are
the projections of v_j on (cos w, sin w) and its normal, so a basis works iff
every nonzero v_j points along w modulo pi/2. The misalignment

    sum_j (psi_j psi_perp_j)^2 = (sum_j |v_j|^4 - Re(e^{-4iw} sum_j (X_j + iY_j)^4)) / 8

is what the grid scan and the refinement minimize. A common rotation of all
four directions maps every DFS state to itself, so theta_a = 0 is fixed
throughout without losing any basis.
"""

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.optimize import least_squares

from config import DEFAULT_GRID, DEFAULT_REFINE_TOL, DEGENERACY_TOLERANCE, SUPPORT_TOLERANCE, as_generator
from dfs_states import DfsVector, dfs_embed, make_phi0, make_phi1
from errors import ArgumentError
from localmeas import product_basis, qubit_basis

log = logging.getLogger(__name__)

CLUSTER_TOL = 1e-3


@dataclass(frozen=True)
class DistinguishInstance:
    omega: float
    thetas: tuple

    def __post_init__(self):
        if len(self.thetas) != 4:
            raise ArgumentError("need four angles theta_a..theta_d")

    def states(self):
        psi = dfs_embed(DfsVector(np.cos(self.omega), np.sin(self.omega)))
        perp = dfs_embed(DfsVector(np.sin(self.omega), -np.cos(self.omega)))
        return psi, perp

    def basis(self):
        return product_basis(self.thetas)

    def components(self):
        """(16,) components of |psi> and of |psi_perp> in the product basis."""
        return _components(self.omega, self.thetas)


def _dfs_rows():
    return np.stack([make_phi0().amplitudes.real, make_phi1().amplitudes.real])


def _components(omega, thetas):
    v = product_basis(thetas).T @ _dfs_rows().T  # (16, 2): X_j, Y_j
    c, s = np.cos(omega), np.sin(omega)
    return v @ np.array([c, s]), v @ np.array([s, -c])


def component_table(inst):
    psi, perp = inst.components()
    return pd.DataFrame(
        {
            "component": np.arange(1, 17),
            "word": [format(j, "04b") for j in range(16)],
            "psi": psi,
            "psi_perp": perp,
        }
    )


def component_symmetry_signs():
    """s_j with component(15 - j) = s_j * component(j) for every real DFS state.

    s_j = (-1)^(number of zero bits of j): reversing the list flips the sign of
    the entries with an odd number of zeros and keeps the others.
    """
    return np.array([(-1) ** format(j, "04b").count("0") for j in range(16)])


def is_distinguishing(inst, support_tol=SUPPORT_TOLERANCE):
    psi, perp = inst.components()
    return not np.any((np.abs(psi) > support_tol) & (np.abs(perp) > support_tol))


def identification_error(inst, shots, rng, support_tol=SUPPORT_TOLERANCE):
    """Fraction of sampled words that would be attributed to the wrong state.

    Words are drawn from both states; a word is attributed to whichever state
    has a nonzero component on it.
    """
    rng = as_generator(rng)
    psi, perp = inst.components()
    in_perp = np.abs(perp) > support_tol
    in_psi = np.abs(psi) > support_tol
    errors = 0
    for amps, wrong in ((psi, in_perp), (perp, in_psi)):
        probs = amps ** 2 / np.sum(amps ** 2)
        words = rng.choice(16, size=shots, p=probs)
        errors += int(np.count_nonzero(wrong[words]))
    return errors / (2 * shots)


####################################
# Necessary condition on the first component
####################################
@dataclass(frozen=True)
class CotOmega:
    value: float = None
    degenerate: bool = False

    @property
    def omega(self):
        """omega in (0, pi) with cot(omega) = value."""
        if self.degenerate:
            return None
        return float(np.arctan2(1.0, self.value) % np.pi)


def omega_from_thetas(theta_a, theta_b, theta_c, theta_d):
    """cot(omega) that zeroes the first (and last) component of |psi>."""
    sab, scd = np.sin(theta_a - theta_b), np.sin(theta_c - theta_d)
    if abs(sab) < DEGENERACY_TOLERANCE or abs(scd) < DEGENERACY_TOLERANCE:
        return CotOmega(degenerate=True)
    bracket = np.cos(theta_a + theta_b - theta_c - theta_d) - np.cos(theta_a - theta_b) * np.cos(theta_c - theta_d)
    return CotOmega(float(bracket / (np.sqrt(3) * sab * scd)))


####################################
# Grid scan
####################################
def _grid_angles(resolution):
    if resolution < 100:
        raise ArgumentError(f"grid resolution must be at least 100, got {resolution}")
    return np.arange(resolution) * np.pi / resolution


def _grid_slices(resolution):
    """Yield (i_b, X, Y) with X, Y of shape (R, R, 16) over (theta_c, theta_d) for each theta_b."""
    angles = _grid_angles(resolution)
    bases = np.stack([qubit_basis(t) for t in angles])
    phi = _dfs_rows().reshape(2, 2, 2, 2, 2)
    a1 = np.einsum("sabcd,aj->sjbcd", phi, qubit_basis(0.0))
    for ib in range(resolution):
        a2 = np.einsum("sjbcd,bk->sjkcd", a1, bases[ib])
        a3 = np.einsum("sjkcd,xcl->xsjkld", a2, bases)
        a4 = np.einsum("xsjkld,ydm->xysjklm", a3, bases).reshape(resolution, resolution, 2, 16)
        yield ib, a4[:, :, 0, :], a4[:, :, 1, :]


def _misalignment(x, y, omega=None):
    """Minimal (omega=None) or fixed-omega misalignment, and the minimizing omega mod pi/2."""
    z = (x + 1j * y) ** 4
    total = (x ** 2 + y ** 2) ** 2
    zs = z.sum(axis=-1)
    if omega is None:
        score = (total.sum(axis=-1) - np.abs(zs)) / 8
    else:
        score = (total.sum(axis=-1) - np.real(np.exp(-4j * omega) * zs)) / 8
    return score, np.mod(np.angle(zs) / 4, np.pi / 2)


def _residuals(params, omega=None):
    if omega is None:
        omega, tb, tc, td = params
    else:
        tb, tc, td = params
    psi, perp = _components(omega, (0.0, tb, tc, td))
    return psi * perp


def _refine(omega, thetas, fixed_omega=False):
    x0 = np.array(thetas[1:]) if fixed_omega else np.array([omega, *thetas[1:]])
    fit = least_squares(
        _residuals, x0, kwargs={"omega": omega if fixed_omega else None}, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15
    )
    if fixed_omega:
        return omega, (0.0, *fit.x), fit.cost
    return fit.x[0], (0.0, *fit.x[1:]), fit.cost


def _cluster(values, tol=CLUSTER_TOL):
    """Merge angles mod pi that lie within ``tol`` of each other."""
    clusters = []
    for v in sorted(np.mod(values, np.pi)):
        for c in clusters:
            d = abs(v - c[0])
            if min(d, np.pi - d) < tol:
                c.append(v)
                break
        else:
            clusters.append([v])
    reps = [float(c[0]) for c in clusters]
    # 0 and pi are the same angle
    return sorted(0.0 if np.pi - r < tol else r for r in reps)


@dataclass
class ScanResult:
    omegas: list
    candidates: pd.DataFrame
    resolution: int
    refine_tol: float
    omega_range: tuple = (0.0, np.pi)

    def matches(self, expected, tol=CLUSTER_TOL):
        """True when ``omegas`` and ``expected`` agree one to one within ``tol``."""
        expected = sorted(np.mod(expected, np.pi))
        return len(expected) == len(self.omegas) and all(abs(a - b) < tol for a, b in zip(self.omegas, expected))


def scan_distinguishable_omegas(resolution=DEFAULT_GRID, refine_tol=DEFAULT_REFINE_TOL, omega_range=None):
    """All omega (mod pi) for which some product basis distinguishes |psi> from |psi_perp>.

    Grid search over (theta_b, theta_c, theta_d) keeps the best grid point per
    omega bucket; buckets whose misalignment is within a grid step of zero are
    refined with Levenberg-Marquardt and accepted when the refined cost is
    below ``refine_tol`` and the supports are disjoint.
    """
    angles = _grid_angles(resolution)
    n_buckets = resolution
    ic, idd = np.meshgrid(np.arange(resolution), np.arange(resolution), indexing="ij")

    winners = []
    for ib, x, y in _grid_slices(resolution):
        score, omega = _misalignment(x, y)
        frame = pd.DataFrame(
            {
                "bucket": (omega.ravel() / (np.pi / 2) * n_buckets).astype(int) % n_buckets,
                "score": score.ravel(),
                "omega": omega.ravel(),
                "ib": ib,
                "ic": ic.ravel(),
                "id": idd.ravel(),
            }
        )
        winners.append(frame.loc[frame.groupby("bucket")["score"].idxmin()])
        if ib % 25 == 0:
            log.debug("scan: theta_b %d/%d, slice minimum %.3e", ib, resolution, score.min())
    winners = pd.concat(winners, ignore_index=True)
    best = winners.loc[winners.groupby("bucket")["score"].idxmin()].set_index("bucket")

    threshold = 10 * (np.pi / resolution) ** 2
    # refined residuals ~ sqrt(cost) bound how small the vanishing factor of each product is
    support_tol = max(SUPPORT_TOLERANCE, np.sqrt(refine_tol))
    rows = []
    accepted = []
    for bucket, row in best[best["score"] < threshold].iterrows():
        thetas = (0.0, angles[int(row["ib"])], angles[int(row["ic"])], angles[int(row["id"])])
        omega, refined, cost = _refine(row["omega"], thetas)
        ok = cost < refine_tol and is_distinguishing(DistinguishInstance(omega, refined), support_tol)
        rows.append(
            {
                "bucket": int(bucket),
                "grid_score": float(row["score"]),
                "omega": float(np.mod(omega, np.pi)),
                "cost": float(cost),
                "theta_b": refined[1],
                "theta_c": refined[2],
                "theta_d": refined[3],
                "accepted": bool(ok),
            }
        )
        if ok:
            # |psi(w + pi/2)> = -|psi_perp(w)>, so the partner angle works with the same basis
            accepted.extend([omega, omega + np.pi / 2])

    omegas = _cluster(accepted)
    lo, hi = omega_range if omega_range is not None else (0.0, np.pi)
    omegas = [w for w in omegas if lo - CLUSTER_TOL <= w <= hi + CLUSTER_TOL]
    log.info("scan at resolution %d: %d candidate buckets, omegas %s", resolution, len(rows), omegas)
    return ScanResult(
        omegas=omegas,
        candidates=pd.DataFrame(rows),
        resolution=resolution,
        refine_tol=refine_tol,
        omega_range=(lo, hi),
    )


@dataclass
class BasisSearch:
    omega: float
    found: bool
    thetas: tuple
    cost: float
    grid_min_score: float


def search_basis_for_omega(omega, resolution=DEFAULT_GRID, refine_tol=DEFAULT_REFINE_TOL, n_refine=8):
    """Best product basis for one fixed omega; ``found`` iff it distinguishes the pair."""
    angles = _grid_angles(resolution)
    best = []
    for ib, x, y in _grid_slices(resolution):
        score, _ = _misalignment(x, y, omega)
        flat = score.ravel()
        top = np.argpartition(flat, n_refine)[:n_refine]
        for k in top:
            best.append((float(flat[k]), ib, *np.unravel_index(k, score.shape)))
        best = sorted(best)[:n_refine]

    support_tol = max(SUPPORT_TOLERANCE, np.sqrt(refine_tol))
    result = None
    for score, ib, ic, idd in best:
        thetas = (0.0, angles[ib], angles[ic], angles[idd])
        _, refined, cost = _refine(omega, thetas, fixed_omega=True)
        if result is None or cost < result.cost:
            found = cost < refine_tol and is_distinguishing(DistinguishInstance(omega, refined), support_tol)
            result = BasisSearch(omega, bool(found), refined, float(cost), best[0][0])
    log.info("basis search at omega=%.6f: found=%s, cost %.3e", omega, result.found, result.cost)
    return result
