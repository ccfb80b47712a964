"""Equality-constrained nonlinear optimizer with nullspace projection.

The scheme alternates two phases until termination:

Phase A (constraint satisfaction): walk the constraints in order; for each,
compute its numerical gradient, append it to the collected Jacobian, project
the search direction into the null space of the previously collected
gradients, and line-search to the residual's zero crossing.  The projection
keeps already-satisfied constraints unchanged to first order; sweeps repeat
until every residual is inside tolerance, so a Phase A pass ends feasible
even when constraints are nonlinear.

Phase B (cost descent): project the cost gradient into the null space of
the full constraint Jacobian (re-collected at the current point) and take
an Armijo-backtracking step with bracket expansion.

All derivatives are central finite differences; the user supplies only
scalar cost and residual functions.  Everything is deterministic: no
randomness, fixed evaluation order.
"""

import time
from dataclasses import dataclass, field

import numpy as np


class SolverError(RuntimeError):
    """Non-finite evaluation or structurally unusable problem."""


@dataclass(frozen=True)
class ProblemFunctions:
    """Scalar cost plus an ordered list of scalar equality residuals.

    The two optional hooks are execution hints and must not change any
    value.  prefetch receives a stack of probe points and may warm
    whatever shared cache backs the scalar functions in one pass
    (the finite-difference probes of one gradient are independent).
    residual_vector(x) returns all constraint residuals at once and must
    agree bitwise with calling each scalar constraint; the solver then
    assembles finite-difference Jacobians from vector evaluations instead
    of one scalar call per constraint per probe.  residual_matrix(points)
    extends that to a (k, p) stack of points, returning a (k, n_c) matrix
    whose rows must agree bitwise with residual_vector on each point.
    """

    cost: callable
    constraints: tuple = ()
    prefetch: callable = None
    residual_vector: callable = None
    residual_matrix: callable = None

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))


@dataclass(frozen=True)
class SolverOptions:
    gradient_step: float = 1e-6
    constraint_tol: float = 1e-8
    gradient_tol: float = 1e-6
    cost_change_tol: float = 1e-10
    max_outer_iterations: int = 100
    max_line_search_evals: int = 60
    expansion_factor: float = 2.0
    max_constraint_passes: int = 30
    armijo_c1: float = 1e-4
    zero_search_span: float = 16.0
    trust_radius: float = 4.0
    cost_step_cap: float = None

    def __post_init__(self):
        for name in ("gradient_step", "constraint_tol", "gradient_tol", "cost_change_tol",
                     "trust_radius"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.cost_step_cap is not None and not self.cost_step_cap > 0:
            raise ValueError("cost_step_cap must be positive")
        for name in ("max_outer_iterations", "max_line_search_evals", "max_constraint_passes"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.expansion_factor <= 1.0:
            raise ValueError("expansion_factor must exceed 1")


@dataclass
class SolveResult:
    x_star: np.ndarray
    cost_star: float
    constraint_residuals: np.ndarray
    outer_iterations: int
    function_evaluations: int
    wall_time: float
    termination_reason: str
    feasible: bool
    projected_gradient_norm: float
    cost_history: list = field(default_factory=list)


def numerical_gradient(f, x, h: float) -> np.ndarray:
    """Central-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    g = np.empty(x.shape[0])
    probe = x.copy()
    for i in range(x.shape[0]):
        xi = x[i]
        probe[i] = xi + h
        hi = f(probe)
        probe[i] = xi - h
        lo = f(probe)
        probe[i] = xi
        if not (np.isfinite(hi) and np.isfinite(lo)):
            raise SolverError(f"non-finite evaluation while probing coordinate {i}")
        g[i] = (hi - lo) / (2.0 * h)
    return g


def nullspace_basis(J: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the null space of J^T (columns = gradients).

    Rank is detected from the singular values with threshold 1e-10 times
    the largest, so nearly parallel gradient columns collapse instead of
    producing a spurious rank.
    """
    J = np.atleast_2d(np.asarray(J, dtype=float))
    p = J.shape[0]
    U, s, _ = np.linalg.svd(J, full_matrices=True)
    if s.size == 0 or s[0] == 0.0:
        rank = 0
    else:
        rank = int(np.sum(s > 1e-10 * s[0]))
    return U[:, rank:]


def line_search_zero(f, x, d, tol: float = 1e-8, max_evals: int = 60,
                     expansion: float = 2.0, slope_hint: float = None, f0: float = None,
                     span: float = 16.0, max_step: float = None):
    """Find x + alpha*d where the scalar f crosses zero.

    Secant steps from a slope-informed first guess; once a sign change is
    bracketed, regula falsi with bisection safeguards.  The search is
    confined two ways: |alpha| <= span times the first-guess step, because
    residuals of kinematic quantities saturate with distance and chasing a
    crossing far beyond the linear prediction finds meaningless roots, and
    |alpha|*|d| <= max_step, a trust radius in variable units that keeps a
    single constraint from dragging the iterate far enough to wreck the
    others (their protection by the projection is only first order).
    Returns (x', evaluations, converged); without a crossing in range, x'
    is the probed point with the smallest |f| (restricted progress).
    """
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    evals = 0
    if f0 is None:
        f0 = f(x)
        evals += 1
    if not np.isfinite(f0):
        raise SolverError("non-finite residual at line search start")
    if abs(f0) <= tol:
        return x.copy(), evals, True

    def probe(alpha):
        nonlocal evals
        evals += 1
        val = f(x + alpha * d)
        if not np.isfinite(val):
            raise SolverError(f"non-finite residual at line search step {alpha}")
        return val

    # slope-informed first guess (exact root for affine residuals)
    if slope_hint is not None and abs(slope_hint) > 1e-300:
        alpha = -f0 / slope_hint
    else:
        alpha = 1.0
    cap = span * abs(alpha)
    if max_step is not None:
        norm_d = np.linalg.norm(d)
        if norm_d > 0.0:
            cap = min(cap, max_step / norm_d)
        alpha = min(abs(alpha), cap) * (1.0 if alpha > 0 else -1.0)
    best_alpha, best_val = 0.0, f0
    bracket = None

    def march(first):
        """Expand outward from 0 through `first`; secant-guided, span-capped.

        Returns a bracketing pair ((a, fa), (b, fb)) or None.
        """
        nonlocal best_alpha, best_val
        a, fa = 0.0, f0
        b = first
        while evals < max_evals:
            fb = probe(b)
            if abs(fb) < abs(best_val):
                best_alpha, best_val = b, fb
            if abs(fb) <= tol:
                return (b, fb), (b, fb)
            if fa * fb <= 0:
                return (a, fa), (b, fb)
            denom = fb - fa
            if abs(denom) > 1e-300:
                nxt = b - fb * (b - a) / denom
            else:
                nxt = b + (b - a) * expansion
            step = b - a
            if step == 0.0 or (nxt - b) * step <= 0 or abs(nxt - b) > expansion * abs(step):
                # secant stalled or reversed: keep marching outward
                nxt = b + (expansion * step if step != 0.0 else first)
            if abs(nxt) > cap:
                nxt = cap if nxt > 0 else -cap
                if abs(b) >= cap * (1.0 - 1e-12):
                    return None
            a, fa = b, fb
            b = nxt
        return None

    bracket = march(alpha)
    if bracket is None and abs(best_val) > tol and evals < max_evals:
        bracket = march(-alpha)
    if abs(best_val) <= tol:
        return x + best_alpha * d, evals, True
    if bracket is None:
        return x + best_alpha * d, evals, False
    (a, fa), (b, fb) = bracket

    # bracketed: regula falsi, falling back to bisection when the same
    # endpoint survives twice in a row (one-sided stagnation)
    stagnation = 0
    last_side = 0
    while evals < max_evals:
        denom = fb - fa
        mid = 0.5 * (a + b)
        if abs(denom) > 1e-300 and stagnation < 2:
            c = b - fb * (b - a) / denom
            lo, hi = (a, b) if a < b else (b, a)
            if not (lo < c < hi):
                c = mid
        else:
            c = mid
            stagnation = 0
        fc = probe(c)
        if abs(fc) < abs(best_val):
            best_alpha, best_val = c, fc
        if abs(fc) <= tol:
            return x + c * d, evals, True
        if fa * fc <= 0:
            b, fb = c, fc
            side = 1
        else:
            a, fa = c, fc
            side = -1
        stagnation = stagnation + 1 if side == last_side else 0
        last_side = side
        if abs(b - a) < 1e-300:
            break
    return x + best_alpha * d, evals, abs(best_val) <= tol


def line_search_min(f, x, d, f0: float, slope: float, init_alpha: float = 1.0,
                    c1: float = 1e-4, max_evals: int = 60, expansion: float = 2.0,
                    max_step: float = None):
    """Armijo line search along a descent direction, with bracket expansion.

    Accepts the best Armijo-satisfying point found; expands from init_alpha
    while the function keeps improving, backtracks otherwise.  max_step, if
    given, caps the displacement ``alpha * ||d||``: on constrained problems
    the direction is only tangent to the constraint surface, so an
    uncapped expansion trades its cost gain for a long feasibility repair.
    Returns (x', f', alpha, evaluations, moved); moved=False means no
    acceptable decrease existed within budget (treated upstream as
    convergence).
    """
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    if slope >= 0:
        return x.copy(), f0, 0.0, 0, False
    evals = 0

    def probe(alpha):
        nonlocal evals
        evals += 1
        val = f(x + alpha * d)
        if not np.isfinite(val):
            raise SolverError(f"non-finite cost at line search step {alpha}")
        return val

    alpha_cap = np.inf
    if max_step is not None:
        norm_d = float(np.linalg.norm(d))
        if norm_d > 0.0:
            alpha_cap = max_step / norm_d
    alpha = min(init_alpha, alpha_cap)
    fa = probe(alpha)
    if fa <= f0 + c1 * alpha * slope:
        # acceptable immediately: expand while it keeps paying off
        best_alpha, best_f = alpha, fa
        while evals < max_evals:
            trial = best_alpha * expansion
            if trial > alpha_cap:
                break
            ft = probe(trial)
            if ft <= f0 + c1 * trial * slope and ft < best_f:
                best_alpha, best_f = trial, ft
            else:
                break
        return x + best_alpha * d, best_f, best_alpha, evals, True
    # backtrack
    while evals < max_evals:
        alpha /= expansion
        fa = probe(alpha)
        if fa <= f0 + c1 * alpha * slope:
            return x + alpha * d, fa, alpha, evals, True
        if alpha < 1e-14:
            break
    return x.copy(), f0, 0.0, evals, False


def _collect_jacobian(constraints, x, h):
    """Gradient columns of every constraint at the same point."""
    cols = [numerical_gradient(c, x, h) for c in constraints]
    return np.column_stack(cols) if cols else np.zeros((x.shape[0], 0))


def solve(funcs: ProblemFunctions, x0, options: SolverOptions = None) -> SolveResult:
    """Minimize funcs.cost subject to every constraint residual being zero.

    Each outer iteration re-satisfies the constraints (Phase A), then takes
    one projected-descent step on the cost (Phase B).  Termination:
    projected gradient below gradient_tol, cost change below
    cost_change_tol, iteration cap, or a stalled line search.  The result's
    feasible flag reports whether the final residuals are inside tolerance;
    when Phase B moved last, a trailing constraint pass restores
    feasibility before returning.
    """
    opts = options or SolverOptions()
    x = np.asarray(x0, dtype=float).copy()
    p = x.shape[0]
    n_c = len(funcs.constraints)
    if n_c > p:
        raise SolverError(f"{n_c} constraints exceed {p} variables")
    t_start = time.perf_counter()
    fevals = 0

    def residuals(at):
        nonlocal fevals
        if funcs.residual_vector is not None:
            vals = np.asarray(funcs.residual_vector(at), dtype=float)
        else:
            vals = np.array([c(at) for c in funcs.constraints])
        fevals += n_c
        if not np.all(np.isfinite(vals)):
            bad = int(np.argmax(~np.isfinite(vals)))
            raise SolverError(f"non-finite residual from constraint {bad}")
        return vals

    last_warm = None

    def warm(at):
        # batch the 2p central-difference probes of the next gradient
        # collections at this point (they are independent evaluations)
        nonlocal last_warm
        if funcs.prefetch is None:
            return
        key = at.tobytes()
        if key == last_warm:
            return
        h = opts.gradient_step
        probes = np.empty((2 * p + 1, p))
        probes[:] = at
        for i in range(p):
            probes[2 * i, i] = at[i] + h
            probes[2 * i + 1, i] = at[i] - h
        funcs.prefetch(probes)
        last_warm = key

    def constraint_jacobian(at):
        """Gradient columns of every constraint at one point.

        The vector hooks, when present, yield each column from the same
        central differences as the scalar path (bitwise-equal residuals):
        residual_matrix evaluates all 2p probes in one call, falling back
        to one residual_vector call per probe, then to the scalar
        constraints.
        """
        nonlocal fevals
        h = opts.gradient_step
        if funcs.residual_matrix is not None:
            probes = np.empty((2 * p, p))
            probes[:] = at
            for i in range(p):
                probes[2 * i, i] = at[i] + h
                probes[2 * i + 1, i] = at[i] - h
            R = np.asarray(funcs.residual_matrix(probes), dtype=float)
            fevals += 2 * p * n_c
            if not np.all(np.isfinite(R)):
                raise SolverError("non-finite residual during Jacobian collection")
            return (R[0::2] - R[1::2]) / (2.0 * h)
        warm(at)
        if funcs.residual_vector is None:
            J = _collect_jacobian(funcs.constraints, at, opts.gradient_step)
            fevals += 2 * p * n_c
            return J
        vec = funcs.residual_vector
        J = np.empty((p, n_c))
        probe = at.copy()
        for i in range(p):
            xi = at[i]
            probe[i] = xi + h
            hi = vec(probe)
            probe[i] = xi - h
            lo = vec(probe)
            probe[i] = xi
            J[i] = hi - lo
        J /= 2.0 * h
        fevals += 2 * p * n_c
        if not np.all(np.isfinite(J)):
            raise SolverError("non-finite residual during Jacobian collection")
        return J

    def phase_a(at):
        """Sequential zero-crossing sweeps; returns (x, feasible)."""
        nonlocal fevals
        if n_c == 0:
            return at, True
        for _ in range(opts.max_constraint_passes):
            res = residuals(at)
            if np.max(np.abs(res)) <= opts.constraint_tol:
                return at, True
            J = None
            jkey = None
            # orthonormal basis of the span of previously collected gradients,
            # grown one column at a time; projecting out span(Q) equals
            # projecting onto the null space of those gradients
            Q = np.empty((p, min(n_c, p)))
            nq = 0
            for i, c in enumerate(funcs.constraints):
                key = at.tobytes()
                if key != jkey:
                    J = constraint_jacobian(at)
                    res = residuals(at)
                    jkey = key
                g = J[:, i]
                ri = res[i]
                if nq == 0:
                    d = -g
                else:
                    Qk = Q[:, :nq]
                    d = -(g - Qk @ (Qk.T @ g))
                norm_g = float(np.linalg.norm(g))
                if abs(ri) > opts.constraint_tol:
                    norm_d = float(np.linalg.norm(d))
                    if norm_d > 1e-8 * max(norm_g, 1e-30):
                        slope = float(g @ d)
                        at, ev, _ = line_search_zero(
                            c, at, d, tol=opts.constraint_tol,
                            max_evals=opts.max_line_search_evals,
                            expansion=opts.expansion_factor,
                            slope_hint=slope, f0=ri,
                            span=opts.zero_search_span,
                            max_step=opts.trust_radius,
                        )
                        fevals += ev
                    # else: gradient lies in the span of the previous
                    # constraints; no first-order progress without
                    # disturbing them
                # collect this gradient for the projections that follow,
                # dropping directions already spanned (rank deficiency);
                # -d is the component of g orthogonal to span(Q), and one
                # repeated projection keeps the basis orthonormal
                v = -d
                if nq > 0:
                    Qk = Q[:, :nq]
                    v = v - Qk @ (Qk.T @ v)
                nv = float(np.linalg.norm(v))
                if nq < Q.shape[1] and nv > 1e-10 * max(norm_g, 1e-30):
                    Q[:, nq] = v / nv
                    nq += 1
        res = residuals(at)
        return at, bool(np.max(np.abs(res)) <= opts.constraint_tol)

    def finish(reason, feasible, pg_norm, iters, cost_hist, resatisfy):
        nonlocal x, fevals
        if resatisfy and n_c > 0:
            x, feasible = phase_a(x)
        final_cost = funcs.cost(x)
        fevals += 1
        res = residuals(x) if n_c else np.zeros(0)
        return SolveResult(
            x_star=x,
            cost_star=float(final_cost),
            constraint_residuals=res,
            outer_iterations=iters,
            function_evaluations=fevals,
            wall_time=time.perf_counter() - t_start,
            termination_reason=reason,
            feasible=feasible,
            projected_gradient_norm=float(pg_norm),
            cost_history=cost_hist,
        )

    cost_hist = []
    prev_cost = None
    warm_alpha = 1.0
    pg_norm = np.inf
    moved_since_phase_a = False

    for outer in range(1, opts.max_outer_iterations + 1):
        x, feasible = phase_a(x)
        moved_since_phase_a = False
        if not feasible:
            return finish("line_search_stall", False, pg_norm, outer, cost_hist, False)

        warm(x)
        g_cost = numerical_gradient(funcs.cost, x, opts.gradient_step)
        fevals += 2 * p
        if n_c > 0:
            J = constraint_jacobian(x)
            B = nullspace_basis(J)
            pg = B @ (B.T @ g_cost)
        else:
            pg = g_cost
        pg_norm = float(np.linalg.norm(pg))
        if pg_norm < opts.gradient_tol:
            return finish("gradient_tol", True, pg_norm, outer, cost_hist, False)

        f_here = funcs.cost(x)
        fevals += 1
        d = -pg
        slope = float(g_cost @ d)
        x_new, f_new, alpha, ev, moved = line_search_min(
            funcs.cost, x, d, f_here, slope,
            init_alpha=warm_alpha, c1=opts.armijo_c1,
            max_evals=opts.max_line_search_evals,
            expansion=opts.expansion_factor,
            max_step=opts.trust_radius if opts.cost_step_cap is None else opts.cost_step_cap,
        )
        fevals += ev
        if not moved:
            return finish("line_search_stall", True, pg_norm, outer, cost_hist, False)
        x = x_new
        moved_since_phase_a = True
        cost_hist.append(float(f_new))
        warm_alpha = max(alpha, 1e-8)
        if prev_cost is not None and abs(prev_cost - f_new) < opts.cost_change_tol:
            return finish("cost_change_tol", True, pg_norm, outer, cost_hist, True)
        prev_cost = f_new

    return finish("max_iters", True, pg_norm, opts.max_outer_iterations, cost_hist,
                  moved_since_phase_a)
