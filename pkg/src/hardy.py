"""The local-realist contradiction and the optimal Hardy probabilities.

Two halves:

* an exact decision procedure over the 16 deterministic local strategies
  (f_A, g_A, f_B, g_B), which shows that no local hidden-variable model meets
  the zero-probability constraints together with a positive P(g_A=1, g_B=1);
* the effective two-level model of the argument: each wing's state lives in
  span{|phi0>, |phi1>}, F measures in that basis, and the second observable
  is the DFS observable at angle alpha (alpha = pi/3 is G). Maximizing the
  Hardy probability over states gives 9/112 for the fixed observables and
  ((sqrt5 - 1)/2)^5 when both angles are free.

Only the DFS product subspace and observables of this family are searched:
those are the only observables that are both decoherence-immune and free of
null outcomes on the two wings.
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np
import pandas as pd
import sympy
from scipy.linalg import null_space
from scipy.optimize import linprog, minimize

from config import DEFAULT_STARTS, HARDY_PROBABILITY, TOLERANCE, spawn_generators
from correlations import Event, Setting, event_probability
from dfs_states import make_dfs_observable, make_F, make_phi0, make_phi1
from errors import ArgumentError, ConvergenceError, NormalizationError
from qcore import Outcome, QuantumState, Wing, tensor

log = logging.getLogger(__name__)

####################################
# Local hidden-variable models
####################################
VARIABLES = ("f_a", "g_a", "f_b", "g_b")
LHV_NOTE = "outcomes restricted to +1/-1: the null outcome of F and G has probability zero"


def _var_label(name):
    return f"{name[0]}_{name[2].upper()}"


@dataclass(frozen=True)
class Strategy:
    """A deterministic assignment of outcomes to both settings on both wings."""

    f_a: int
    g_a: int
    f_b: int
    g_b: int

    def __str__(self):
        values = ",".join(f"{v:+d}" for v in (self.f_a, self.g_a, self.f_b, self.g_b))
        return f"(f_A,g_A,f_B,g_B)=({values})"


STRATEGIES = tuple(Strategy(*values) for values in product((1, -1), repeat=4))


@dataclass(frozen=True)
class LhvConstraint:
    """P(event) = probability, the event being a conjunction of outcome assignments."""

    event: tuple
    probability: sympy.Rational

    def __post_init__(self):
        for name, value in self.event:
            if name not in VARIABLES or value not in (1, -1):
                raise ArgumentError(f"malformed event term {name}={value}")
        try:
            p = sympy.Rational(str(self.probability))
        except (TypeError, ValueError, sympy.SympifyError) as exc:
            raise ArgumentError(f"probability {self.probability!r} is not a number") from exc
        if not 0 <= p <= 1:
            raise ArgumentError(f"probability {p} outside [0, 1]")
        object.__setattr__(self, "probability", p)

    def holds(self, strategy):
        return all(getattr(strategy, name) == value for name, value in self.event)

    @property
    def label(self):
        terms = "∧".join(f"{_var_label(name)}={value:+d}" for name, value in self.event)
        return f"P({terms})={self.probability}"


def constraint(probability, **event):
    return LhvConstraint(tuple(event.items()), probability)


@dataclass(frozen=True)
class LhvScenario:
    constraints: tuple

    @property
    def strategies(self):
        return STRATEGIES


@dataclass
class Feasible:
    witness: dict

    feasible = True

    def frame(self):
        return pd.DataFrame(
            [{**{v: getattr(s, v) for v in VARIABLES}, "weight": str(w)} for s, w in self.witness.items()]
        )


@dataclass
class Infeasible:
    certificate: list
    method: str

    feasible = False

    def narrative(self):
        return "\n".join(self.certificate)


def hardy_scenario(p=sympy.Rational(9, 112)):
    """The three zero constraints of the argument plus P(g_A=1, g_B=1) = p."""
    return LhvScenario(
        (
            constraint(0, f_a=1, f_b=1),
            constraint(0, f_a=-1, g_b=1),
            constraint(0, f_b=-1, g_a=1),
            constraint(p, g_a=1, g_b=1),
        )
    )


def _elimination_chain(target, zeros):
    lines = [f"the event of {target.label} holds for {sum(target.holds(s) for s in STRATEGIES)} of 16 strategies:"]
    for s in STRATEGIES:
        if target.holds(s):
            culprit = next(c for c in zeros if c.holds(s))
            lines.append(f"  {s} is excluded by {culprit.label}")
    lines.append(f"so every local model gives the event weight 0, while {target.label} requires {target.probability} > 0")
    return lines


def _exact_solution(rows, rhs, support):
    """Nonnegative exact solution of rows * w = rhs using only the columns in ``support``, or None."""
    a = sympy.Matrix([[row[i] for i in support] for row in rows])
    try:
        sol, params = a.gauss_jordan_solve(sympy.Matrix(rhs))
    except ValueError:
        return None
    sol = sol.subs({p: 0 for p in params})
    if any(x < 0 for x in sol):
        return None
    weights = [sympy.Integer(0)] * len(rows[0])
    for i, x in zip(support, sol):
        weights[i] = x
    if sympy.Matrix(rows) * sympy.Matrix(weights) != sympy.Matrix(rhs):
        return None
    return weights


def _basic_solutions(rows, rhs):
    n = len(rows[0])
    rank = sympy.Matrix(rows).rank()
    for size in range(1, min(rank, n) + 1):
        for support in combinations(range(n), size):
            weights = _exact_solution(rows, rhs, support)
            if weights is not None:
                return weights
    return None


def lhv_feasibility(scenario):
    """Decide exactly whether some mixture of deterministic strategies meets every constraint.

    Zero-probability constraints remove the strategies their events cover; a
    positive constraint left with no strategy yields the elimination chain as
    certificate. Otherwise the HiGHS LP proposes a support, which is solved in
    rational arithmetic; if that fails every basic solution is tried exactly.
    """
    zeros = [c for c in scenario.constraints if c.probability == 0]
    positive = [c for c in scenario.constraints if c.probability > 0]
    allowed = [s for s in STRATEGIES if not any(c.holds(s) for c in zeros)]
    log.debug("%d strategies survive %d zero constraints", len(allowed), len(zeros))

    for c in positive:
        if not any(c.holds(s) for s in allowed):
            return Infeasible(_elimination_chain(c, zeros), "elimination")
    if not allowed:
        return Infeasible(["every deterministic strategy violates a zero-probability constraint"], "elimination")

    rows = [[1] * len(allowed)] + [[int(c.holds(s)) for s in allowed] for c in positive]
    rhs = [sympy.Integer(1)] + [c.probability for c in positive]
    lp = linprog(
        np.zeros(len(allowed)),
        A_eq=np.array(rows, dtype=float),
        b_eq=np.array([float(x) for x in rhs]),
        bounds=(0, None),
        method="highs",
    )
    weights = None
    if lp.status == 0:
        weights = _exact_solution(rows, rhs, [i for i, x in enumerate(lp.x) if x > 1e-9])
    if weights is None:
        log.info("LP support not exact (status %d); enumerating basic solutions", lp.status)
        weights = _basic_solutions(rows, rhs)
    if weights is None:
        return Infeasible(
            [
                f"{len(allowed)} strategies survive the zero-probability constraints",
                "no mixture of them meets " + ", ".join(c.label for c in positive),
                "(every basic solution of the constraint system checked in exact arithmetic)",
            ],
            "exhaustive",
        )
    return Feasible({s: w for s, w in zip(allowed, weights) if w != 0})


def elements_of_reality_narrative(p=HARDY_PROBABILITY):
    """The EPR reading of the three certainties and the one possibility, as plain lines."""
    return [
        f"P(G_A=+1, G_B=+1) = {p:.6g} > 0: in some runs both observers would obtain +1 for G.",
        "P(F_B=+1 | G_A=+1) = 1: in those runs Alice can predict F_B=+1 with certainty "
        "without disturbing Bob, so F_B=+1 is an element of reality.",
        "P(F_A=+1 | G_B=+1) = 1: likewise Bob can predict F_A=+1, so F_A=+1 is an element of reality.",
        "Locality makes both elements hold jointly in those runs, so P(F_A=+1, F_B=+1) >= "
        f"{p:.6g} would follow.",
        "But P(F_A=+1, F_B=+1) = 0. No local elements of reality reproduce the four predictions.",
    ]


####################################
# Effective two-level model
####################################
RESIDUAL_KEYS = ("P(F_A=1,F_B=1)", "P(F_A=-1,G_B=1)", "P(G_A=1,F_B=-1)")
F_MINUS = np.array([1.0, 0.0])
F_PLUS = np.array([0.0, 1.0])


def second_plus(alpha):
    """DFS coordinates of the +1 eigenvector of the observable at angle ``alpha``."""
    return np.array([np.sin(alpha), -np.cos(alpha)])


@dataclass(frozen=True, eq=False)
class HardyInstance:
    """Coefficients c[i, j] of |phi_i phi_j> and the two second-observable angles."""

    c: np.ndarray
    alpha_a: float = np.pi / 3
    alpha_b: float = np.pi / 3

    def __post_init__(self):
        c = np.array(self.c, dtype=complex).reshape(2, 2)
        norm = np.linalg.norm(c)
        if abs(norm - 1) > TOLERANCE:
            raise NormalizationError(f"coefficient norm is {norm!r}, expected 1")
        object.__setattr__(self, "c", c)

    @classmethod
    def normalized(cls, c, alpha_a=np.pi / 3, alpha_b=np.pi / 3):
        c = np.asarray(c, dtype=complex)
        return cls(c / np.linalg.norm(c), alpha_a, alpha_b)

    def state(self):
        """The eight-qubit state sum_ij c_ij |phi_i>|phi_j>."""
        pair = (make_phi0(), make_phi1())
        amps = sum(self.c[i, j] * tensor(pair[i], pair[j]).amplitudes for i in range(2) for j in range(2))
        return QuantumState(amps)

    def phase_fixed(self):
        """Same instance with the largest coefficient made real and positive."""
        k = np.argmax(np.abs(self.c))
        phase = np.exp(-1j * np.angle(self.c.flat[k]))
        return HardyInstance(self.c * phase, self.alpha_a, self.alpha_b)


@dataclass
class HardyProbability:
    probability: float
    residuals: dict

    def max_residual(self):
        return max(self.residuals.values())


def _amplitude(a, c, b):
    return a @ c @ b


def hardy_probability(instance):
    c = instance.c
    g_a, g_b = second_plus(instance.alpha_a), second_plus(instance.alpha_b)
    residuals = dict(
        zip(
            RESIDUAL_KEYS,
            (
                abs(_amplitude(F_PLUS, c, F_PLUS)) ** 2,
                abs(_amplitude(F_MINUS, c, g_b)) ** 2,
                abs(_amplitude(g_a, c, F_MINUS)) ** 2,
            ),
        )
    )
    return HardyProbability(float(abs(_amplitude(g_a, c, g_b)) ** 2), {k: float(v) for k, v in residuals.items()})


def full_model_probability(instance):
    """The same four numbers computed on the 256-dimensional state with the full observables."""
    state = instance.state()
    f = Setting(make_F())
    g_a = Setting(make_dfs_observable(instance.alpha_a, "G"))
    g_b = Setting(make_dfs_observable(instance.alpha_b, "G"))
    plus, minus = Outcome.PLUS, Outcome.MINUS

    def p(a, oa, b, ob):
        return event_probability(state, Event(Wing.ALICE, a, oa), Event(Wing.BOB, b, ob))

    residuals = {
        "P(F_A=1,F_B=1)": p(f, plus, f, plus),
        "P(F_A=-1,G_B=1)": p(f, minus, g_b, plus),
        "P(G_A=1,F_B=-1)": p(g_a, plus, f, minus),
    }
    return HardyProbability(p(g_a, plus, g_b, plus), residuals)


def constraint_matrix(alpha_a, alpha_b):
    """Rows r with r . vec(c) = amplitude of each forbidden event (vec is row-major)."""
    g_a, g_b = second_plus(alpha_a), second_plus(alpha_b)
    return np.stack([np.kron(F_PLUS, F_PLUS), np.kron(F_MINUS, g_b), np.kron(g_a, F_MINUS)])


def hardy_vector(alpha_a, alpha_b):
    return np.kron(second_plus(alpha_a), second_plus(alpha_b))


def best_state_for_angles(alpha_a, alpha_b):
    """Closed-form optimum over states satisfying the three constraints.

    The feasible coefficient vectors form the null space N of the constraint
    rows; the largest |w . N x|^2 over unit x is |N^T w|^2.
    """
    basis = null_space(constraint_matrix(alpha_a, alpha_b))
    projected = basis.T @ hardy_vector(alpha_a, alpha_b)
    value = float(projected @ projected)
    if value > 0:
        c = basis @ projected / np.sqrt(value)
    else:
        c = basis[:, 0]
    return HardyInstance(c.reshape(2, 2), alpha_a, alpha_b), value


def symmetric_optimum(alpha):
    """Normalized optimum for alpha_a = alpha_b = alpha: c proportional to [[1, tan a], [tan a, 0]]."""
    t = np.tan(alpha)
    return HardyInstance.normalized([[1, t], [t, 0]], alpha, alpha)


# sin^2 of the free-angle optimum is the golden ratio conjugate
GOLDEN_ANGLE = float(np.arcsin(np.sqrt((np.sqrt(5) - 1) / 2)))


@dataclass
class HardyOptimum:
    instance: HardyInstance
    probability: float
    residuals: dict
    bound: float
    n_starts: int
    n_converged: int
    starts: pd.DataFrame = field(repr=False, default=None)
    phases_matter: bool = None
    feasible_dimension: int = None


def _converged(result):
    # status 2 is BFGS precision loss, which only happens at a stationary point
    return bool(result.success or (result.status == 2 and np.isfinite(result.fun)))


def _constrained_search(basis, w, rngs, real_only):
    k = basis.shape[1]

    def negative(params):
        x = params[:k] if real_only else params[:k] + 1j * params[k:]
        return -abs(w @ (basis @ x)) ** 2 / np.vdot(x, x).real

    rows = []
    best = None
    for i, rng in enumerate(rngs):
        x0 = rng.standard_normal(k if real_only else 2 * k)
        res = minimize(negative, x0, method="BFGS", options={"gtol": 1e-12})
        ok = _converged(res)
        rows.append({"start": i, "value": -float(res.fun), "converged": ok})
        if ok and (best is None or res.fun < best.fun):
            best = res
    return best, pd.DataFrame(rows)


def optimize_constrained(alpha=np.pi / 3, starts=DEFAULT_STARTS, seed=0):
    """Maximize P(G_A=1, G_B=1) over complex coefficients with the three zero constraints exact.

    The constraints are linear in c, so the search runs over coordinates of
    their null space and each start maximizes a Rayleigh quotient. The same
    search over real coordinates tells whether complex phases change the
    optimum.
    """
    basis = null_space(constraint_matrix(alpha, alpha))
    w = hardy_vector(alpha, alpha)
    k = basis.shape[1]
    best, frame = _constrained_search(basis, w, spawn_generators(seed, starts), real_only=False)
    if best is None:
        raise ConvergenceError("no constrained start converged", float(frame["value"].max()) if len(frame) else None)
    real_best, _ = _constrained_search(basis, w, spawn_generators(seed, starts), real_only=True)

    x = best.x[:k] + 1j * best.x[k:]
    instance = HardyInstance.normalized((basis @ x).reshape(2, 2), alpha, alpha).phase_fixed()
    result = hardy_probability(instance)
    _, bound = best_state_for_angles(alpha, alpha)
    phases_matter = real_best is None or (-best.fun) - (-real_best.fun) > 1e-9
    n_converged = int(frame["converged"].sum())
    log.info(
        "constrained optimum %.12f (bound %.12f) from %d/%d converged starts",
        result.probability,
        bound,
        n_converged,
        starts,
    )
    if abs(result.probability - bound) > 1e-9:
        log.warning("multi-start optimum %.3e away from the null-space bound", abs(result.probability - bound))
    return HardyOptimum(
        instance=instance,
        probability=result.probability,
        residuals=result.residuals,
        bound=bound,
        n_starts=starts,
        n_converged=n_converged,
        starts=frame,
        phases_matter=bool(phases_matter),
        feasible_dimension=k,
    )


def optimize_unconstrained_measurements(starts=DEFAULT_STARTS, seed=0, pinned_angles=None):
    """Maximize over states and both angles; ``pinned_angles`` fixes (alpha_a, alpha_b)."""
    if pinned_angles is not None:
        instance, value = best_state_for_angles(*pinned_angles)
        result = hardy_probability(instance)
        return HardyOptimum(instance, result.probability, result.residuals, value, 0, 0)

    def negative(angles):
        return -best_state_for_angles(*angles)[1]

    rows = []
    best = None
    for i, rng in enumerate(spawn_generators(seed, starts)):
        x0 = rng.uniform(0, np.pi, size=2)
        res = minimize(negative, x0, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 4000})
        rows.append({"start": i, "value": -float(res.fun), "alpha_a": res.x[0], "alpha_b": res.x[1], "converged": bool(res.success)})
        log.debug("free-angle start %d: %.12f (success=%s)", i, -res.fun, res.success)
        if res.success and (best is None or res.fun < best.fun):
            best = res
    frame = pd.DataFrame(rows)
    if best is None:
        top = frame.loc[frame["value"].idxmax()]
        raise ConvergenceError("no free-angle start converged", float(top["value"]), (top["alpha_a"], top["alpha_b"]))

    instance, value = best_state_for_angles(*best.x)
    result = hardy_probability(instance)
    n_converged = int(frame["converged"].sum())
    if n_converged < starts:
        log.warning("%d of %d free-angle starts did not converge", starts - n_converged, starts)
    log.info("free-angle optimum %.12f at alpha=(%.9f, %.9f)", result.probability, *best.x)
    return HardyOptimum(instance, result.probability, result.residuals, value, starts, n_converged, frame)
