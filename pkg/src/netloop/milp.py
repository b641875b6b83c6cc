"""Binary linear programs and an exact branch-and-bound solver.

Everything the scheduling layers optimize is a pure 0/1 linear program:
link-selection one-hots, capacity rows, tolerance rows, and auxiliary
variables standing for products of binaries (linearized, never
multiplied).  The solver is deliberately self-contained — LP relaxations
go through :mod:`netloop.simplex` — and deterministic:

* depth-first search, branching on the most fractional variable
  (lowest index on ties), 0-branch explored first;
* among equal-objective optima the *smallest assignment* is returned,
  where assignments are compared as the integer sum(x_j * 2^j) — i.e.
  later variables are zeroed first (so `min -x1-x2 s.t. x1+x2 <= 1`
  resolves to (1, 0)).  The property is certified by a refinement pass
  for components with at most ``LEX_REFINE_MAX`` variables (which covers
  everything the enumeration oracle can check); larger programs are still
  deterministic through the fixed exploration order.

Programs often decompose into independent blocks (the latency-agnostic
manager's program is separable per time step), so ``solve`` splits the
variable/constraint graph into connected components and conquers each on
its own.  Disjoint index sets make per-block lexicographic choices
compose to the global one.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, SolverError
from .simplex import solve_lp

_INT_TOL = 1e-6       # how far from 0/1 a relaxed value may sit
_ROW_TOL = 1e-5       # feasibility slack when verifying rounded candidates
_OBJ_TOL = 1e-9       # relative objective comparison tolerance
LEX_REFINE_MAX = 64   # lex-min certification limit (per component)
ENUM_MAX_VARS = 22    # enumeration oracle refuses anything larger

# A product factor is (variable index, complemented?); complemented means
# the factor reads (1 - x).
Factor = tuple[int, bool]


@dataclass(frozen=True)
class SolverOptions:
    """Shared solver knobs for the planning front-ends.

    ``exact_threshold`` is the largest coupled variable block the callers
    will hand to the exact solver; bigger blocks go through their module's
    bounded fallback instead (the solver itself never looks at it).
    """

    time_limit: float | None = None   # per-solve wall-clock budget, seconds
    exact_threshold: int = 600
    node_log: bool = False


@dataclass
class MilpProblem:
    """min cᵀx + const  s.t.  A_eq x = b_eq, A_ub x <= b_ub, x binary."""

    objective: np.ndarray
    objective_const: float
    A_eq: np.ndarray
    b_eq: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray
    names: list[str]

    @property
    def n_vars(self) -> int:
        return self.objective.size

    def validate(self) -> None:
        n = self.n_vars
        if n == 0:
            raise ConfigurationError("program has no variables")
        if self.A_eq.shape != (self.b_eq.size, n):
            raise ConfigurationError("A_eq/b_eq shape mismatch")
        if self.A_ub.shape != (self.b_ub.size, n):
            raise ConfigurationError("A_ub/b_ub shape mismatch")
        if len(self.names) != n:
            raise ConfigurationError("variable name list out of sync")
        for arr in (self.objective, self.A_eq, self.b_eq, self.A_ub, self.b_ub):
            if arr.size and not np.all(np.isfinite(arr)):
                raise ConfigurationError("program contains non-finite coefficients")


@dataclass
class MilpSolution:
    status: str                       # "optimal" | "infeasible" | "time_limit"
    assignment: np.ndarray | None     # int8 0/1 per variable
    objective: float | None           # includes the constant term
    bound: float                      # proven lower bound on the optimum
    gap: float                        # (objective - bound) / max(1, |objective|)
    nodes: int
    node_log: list = field(default_factory=list)


@dataclass(frozen=True)
class NodeRecord:
    """One explored branch-and-bound node (kept for bound-validity audits)."""

    node_id: int
    parent_id: int                    # -1 at a component root
    lp_bound: float                   # +inf when the relaxation was infeasible
    integral_objective: float | None  # set when the node yielded an integral point


class MilpBuilder:
    """Incremental construction of a MilpProblem with named variables."""

    def __init__(self):
        self._names: list[str] = []
        self._index: dict[str, int] = {}
        self._obj: dict[int, float] = {}
        self._obj_const = 0.0
        self._eq: list[tuple[dict[int, float], float]] = []
        self._le: list[tuple[dict[int, float], float]] = []

    def add_binary(self, name: str) -> int:
        if name in self._index:
            raise ConfigurationError(f"duplicate variable name {name!r}")
        idx = len(self._names)
        self._names.append(name)
        self._index[name] = idx
        return idx

    def __getitem__(self, name: str) -> int:
        return self._index[name]

    @property
    def n_vars(self) -> int:
        return len(self._names)

    def add_eq(self, coeffs: dict[int, float], rhs: float) -> None:
        self._eq.append((dict(coeffs), float(rhs)))

    def add_le(self, coeffs: dict[int, float], rhs: float) -> None:
        self._le.append((dict(coeffs), float(rhs)))

    def add_objective(self, coeffs: dict[int, float], const: float = 0.0) -> None:
        for j, v in coeffs.items():
            self._obj[j] = self._obj.get(j, 0.0) + float(v)
        self._obj_const += float(const)

    def add_product(self, name: str, factors: list[Factor]) -> int:
        """New binary equal to the product of (possibly complemented)
        binaries, enforced through linearization rows."""
        z = self.add_binary(name)
        for coeffs, rhs in linearize_binary_product(z, factors):
            self.add_le(coeffs, rhs)
        return z

    def build(self) -> MilpProblem:
        n = self.n_vars
        obj = np.zeros(n)
        for j, v in self._obj.items():
            obj[j] = v
        A_eq = np.zeros((len(self._eq), n))
        b_eq = np.zeros(len(self._eq))
        for r, (coeffs, rhs) in enumerate(self._eq):
            for j, v in coeffs.items():
                A_eq[r, j] = v
            b_eq[r] = rhs
        A_ub = np.zeros((len(self._le), n))
        b_ub = np.zeros(len(self._le))
        for r, (coeffs, rhs) in enumerate(self._le):
            for j, v in coeffs.items():
                A_ub[r, j] = v
            b_ub[r] = rhs
        prob = MilpProblem(objective=obj, objective_const=self._obj_const,
                           A_eq=A_eq, b_eq=b_eq, A_ub=A_ub, b_ub=b_ub,
                           names=list(self._names))
        prob.validate()
        return prob


def linearize_binary_product(z: int, factors: list[Factor]) -> list[tuple[dict[int, float], float]]:
    """Rows forcing binary z to equal the product of the factors.

    Emits z <= f for every factor plus z >= sum(f) - (len(factors) - 1),
    each rewritten as a <=-row.  A complemented factor (j, True) reads
    (1 - x_j).
    """
    if not factors:
        raise ConfigurationError("product needs at least one factor")
    rows: list[tuple[dict[int, float], float]] = []
    for j, neg in factors:
        if j == z:
            raise ConfigurationError("product variable cannot be its own factor")
        # z <= x_j  (plain)  /  z <= 1 - x_j  (complemented)
        rows.append(({z: 1.0, j: 1.0 if neg else -1.0}, 1.0 if neg else 0.0))
    # z >= sum f - (k-1), rewritten as  -z + sum f <= k-1
    coeffs: dict[int, float] = {z: -1.0}
    rhs = float(len(factors) - 1)
    for j, neg in factors:
        if neg:
            coeffs[j] = coeffs.get(j, 0.0) - 1.0
            rhs -= 1.0
        else:
            coeffs[j] = coeffs.get(j, 0.0) + 1.0
    rows.append((coeffs, rhs))
    return rows


def evaluate_assignment(prob: MilpProblem, x: np.ndarray,
                        tol: float = _ROW_TOL) -> tuple[bool, float]:
    """(feasible?, objective incl. constant) for a full 0/1 assignment."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (prob.n_vars,):
        raise ConfigurationError("assignment length mismatch")
    ok = True
    if prob.b_eq.size:
        ok &= bool(np.all(np.abs(prob.A_eq @ x - prob.b_eq) <= tol * (1.0 + np.abs(prob.b_eq))))
    if prob.b_ub.size:
        ok &= bool(np.all(prob.A_ub @ x - prob.b_ub <= tol * (1.0 + np.abs(prob.b_ub))))
    return ok, float(prob.objective @ x + prob.objective_const)


# ---------------------------------------------------------------------------
# presolve
# ---------------------------------------------------------------------------

def _probe_bounds(prob: MilpProblem) -> tuple[np.ndarray, np.ndarray, bool]:
    """Iterated single-row probing; returns (lb, ub, feasible).

    Classic interval argument: a variable is pinned whenever one of its
    values forces some row's minimum activity above the rhs (or, for
    equalities, its maximum activity below).  Catches window clipping and
    forced-zero selector sums without any LP work.
    """
    n = prob.n_vars
    lb = np.zeros(n)
    ub = np.ones(n)
    rows = [(prob.A_eq, prob.b_eq, True), (prob.A_ub, prob.b_ub, False)]
    for _ in range(30):
        changed = False
        for A, b, is_eq in rows:
            for r in range(b.size):
                a = A[r]
                nz = np.flatnonzero(a)
                if nz.size == 0:
                    if (is_eq and abs(b[r]) > _ROW_TOL) or (not is_eq and b[r] < -_ROW_TOL):
                        return lb, ub, False
                    continue
                lo_terms = np.minimum(a[nz] * lb[nz], a[nz] * ub[nz])
                hi_terms = np.maximum(a[nz] * lb[nz], a[nz] * ub[nz])
                min_act = lo_terms.sum()
                max_act = hi_terms.sum()
                if min_act > b[r] + _ROW_TOL:
                    return lb, ub, False
                if is_eq and max_act < b[r] - _ROW_TOL:
                    return lb, ub, False
                for pos in range(nz.size):
                    j = int(nz[pos])
                    if lb[j] >= ub[j]:
                        continue
                    aj = a[j]
                    base_min = min_act - lo_terms[pos]
                    base_max = max_act - hi_terms[pos]
                    for v in (0.0, 1.0):
                        if lb[j] >= ub[j]:
                            break
                        bad = base_min + aj * v > b[r] + _ROW_TOL
                        if is_eq:
                            bad = bad or base_max + aj * v < b[r] - _ROW_TOL
                        if bad:
                            if v == 0.0:
                                lb[j] = 1.0
                            else:
                                ub[j] = 0.0
                            changed = True
                            if lb[j] > ub[j]:
                                return lb, ub, False
                            lo_terms[pos] = min(aj * lb[j], aj * ub[j])
                            hi_terms[pos] = max(aj * lb[j], aj * ub[j])
                            min_act = lo_terms.sum()
                            max_act = hi_terms.sum()
        if not changed:
            break
    return lb, ub, True


def _components(prob: MilpProblem, free: np.ndarray) -> list[np.ndarray]:
    """Connected components of free variables linked by shared rows."""
    n = prob.n_vars
    parent = np.arange(n)

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for A in (prob.A_eq, prob.A_ub):
        for r in range(A.shape[0]):
            nz = np.flatnonzero(A[r])
            nz = nz[free[nz]]
            if nz.size > 1:
                roots = sorted(find(int(j)) for j in nz)
                for rt in roots[1:]:
                    parent[rt] = roots[0]
    groups: dict[int, list[int]] = {}
    for j in range(n):
        if free[j]:
            groups.setdefault(find(j), []).append(j)
    return [np.array(sorted(v), dtype=int) for _, v in sorted(groups.items())]


def component_sizes(prob: MilpProblem) -> list[int]:
    """Free-variable counts of the independent blocks after presolve.

    The exact/fallback dispatch keys on the largest block, not the raw
    variable count: separable programs stay exactly solvable at sizes
    where a monolithic program would not.
    """
    prob.validate()
    lb, ub, feasible = _probe_bounds(prob)
    if not feasible:
        return [0]
    free = ub - lb > 0.5
    return sorted((c.size for c in _components(prob, free)), reverse=True) or [0]


# ---------------------------------------------------------------------------
# branch and bound
# ---------------------------------------------------------------------------

class _Deadline:
    def __init__(self, seconds: float | None):
        self.t_end = None if seconds is None else time.monotonic() + float(seconds)

    def expired(self) -> bool:
        return self.t_end is not None and time.monotonic() > self.t_end


def _branch_and_bound(c, A_eq, b_eq, A_ub, b_ub, deadline: _Deadline,
                      log: list | None, id_offset: int = 0,
                      cutoff: float | None = None, first_hit: bool = False,
                      seed_x: np.ndarray | None = None):
    """Depth-first best-effort exact search over one variable block.

    Returns (status, best_x, best_obj_or_None, bound, nodes).  With
    ``first_hit`` the search returns the first integral point with
    objective <= cutoff (lex-refinement probes).  ``seed_x`` plants an
    incumbent before the search starts (warm start for pruning).
    """
    n = c.size
    inc_x = None
    inc_obj = np.inf
    if seed_x is not None:
        ok_eq = not b_eq.size or np.all(np.abs(A_eq @ seed_x - b_eq) <= _ROW_TOL * (1.0 + np.abs(b_eq)))
        ok_ub = not b_ub.size or np.all(A_ub @ seed_x - b_ub <= _ROW_TOL * (1.0 + np.abs(b_ub)))
        if ok_eq and ok_ub:
            inc_x = np.asarray(seed_x, dtype=np.int8).copy()
            inc_obj = float(c @ inc_x)
    nodes = 0
    timed_out = False

    stack = [(np.zeros(n), np.ones(n), -np.inf, -1)]   # (lb, ub, inherited, parent)
    while stack:
        if deadline.expired():
            timed_out = True
            break
        lb, ub, inherited, parent = stack.pop()
        node_id = id_offset + nodes
        nodes += 1

        limit = np.inf if not np.isfinite(inc_obj) else \
            inc_obj - _OBJ_TOL * max(1.0, abs(inc_obj))
        if cutoff is not None:
            limit = min(limit, cutoff)
        slack = _OBJ_TOL * max(1.0, abs(limit)) if np.isfinite(limit) else 0.0
        if inherited > limit + slack:
            continue

        lp = solve_lp(c, A_eq, b_eq, A_ub, b_ub, lb, ub)
        if lp.status == "infeasible":
            if log is not None:
                log.append(NodeRecord(node_id, parent, np.inf, None))
            continue
        if lp.status != "optimal":
            raise SolverError(f"relaxation returned {lp.status}")
        bound = lp.objective
        if bound > limit + slack:
            if log is not None:
                log.append(NodeRecord(node_id, parent, bound, None))
            continue

        x = lp.x
        frac = np.abs(x - np.round(x))
        frac[lb >= ub] = 0.0
        cand_idx = np.flatnonzero(frac > _INT_TOL)
        if cand_idx.size == 0:
            cand = np.round(x).astype(np.int8)
            ok_eq = not b_eq.size or np.all(np.abs(A_eq @ cand - b_eq) <= _ROW_TOL * (1.0 + np.abs(b_eq)))
            ok_ub = not b_ub.size or np.all(A_ub @ cand - b_ub <= _ROW_TOL * (1.0 + np.abs(b_ub)))
            if not (ok_eq and ok_ub):
                raise SolverError("rounded relaxation solution violates constraints")
            val = float(c @ cand)
            if log is not None:
                log.append(NodeRecord(node_id, parent, bound, val))
            if first_hit and cutoff is not None and val <= cutoff:
                return "optimal", cand, val, bound, nodes
            if val < inc_obj - _OBJ_TOL * max(1.0, abs(val)):
                inc_obj = val
                inc_x = cand
            continue

        if log is not None:
            log.append(NodeRecord(node_id, parent, bound, None))
        # most fractional variable; argmax keeps the lowest index on ties
        j = int(cand_idx[np.argmax(frac[cand_idx])])
        for val in (1.0, 0.0):               # push 1 first => 0-branch pops first
            nlb, nub = lb.copy(), ub.copy()
            nlb[j] = nub[j] = val
            stack.append((nlb, nub, bound, node_id))

    if timed_out:
        open_lo = min((entry[2] for entry in stack), default=np.inf)
        return "time_limit", inc_x, (None if inc_x is None else inc_obj), \
            min(open_lo, inc_obj), nodes
    if inc_x is None:
        return "infeasible", None, None, np.inf, nodes
    return "optimal", inc_x, inc_obj, inc_obj, nodes


def _lex_refine(c, A_eq, b_eq, A_ub, b_ub, best_x, best_obj,
                deadline: _Deadline) -> np.ndarray:
    """Walk variables from the highest index down, pinning each to 0
    whenever an equal-objective completion exists.  Ends at the optimum
    that minimizes sum(x_j * 2^j) — the declared tie-break order."""
    n = c.size
    current = np.asarray(best_x, dtype=np.int8).copy()
    tol = _OBJ_TOL * max(1.0, abs(best_obj))
    for j in range(n - 1, -1, -1):
        if current[j] == 0:
            continue
        if deadline.expired():
            break
        # fix the already-decided suffix (indices > j) and force x_j = 0
        n_extra = n - j
        extraA = np.zeros((n_extra, n))
        extrab = np.zeros(n_extra)
        for pos, k in enumerate(range(j + 1, n)):
            extraA[pos, k] = 1.0
            extrab[pos] = float(current[k])
        extraA[n_extra - 1, j] = 1.0
        extrab[n_extra - 1] = 0.0
        Aeq2 = np.vstack([A_eq, extraA]) if A_eq.size else extraA
        beq2 = np.concatenate([b_eq, extrab]) if b_eq.size else extrab
        status, x, _, _, _ = _branch_and_bound(
            c, Aeq2, beq2, A_ub, b_ub, deadline, None,
            cutoff=best_obj + tol, first_hit=True)
        if status == "optimal" and x is not None:
            current = np.asarray(x, dtype=np.int8)
    return current


def solve(prob: MilpProblem, time_limit: float | None = None,
          collect_node_log: bool = False,
          seed_x: np.ndarray | None = None) -> MilpSolution:
    """Exact deterministic solve (subject to the optional time limit).

    ``seed_x``, when given, is a candidate full assignment used purely as
    a warm-start incumbent: it is checked against the program and, where
    consistent, seeds each component's search with an early pruning
    cutoff.  It never changes which optimum is returned.
    """
    prob.validate()
    deadline = _Deadline(time_limit)
    log: list = []

    lb, ub, feasible = _probe_bounds(prob)
    if not feasible:
        return MilpSolution(status="infeasible", assignment=None, objective=None,
                            bound=np.inf, gap=np.inf, nodes=0, node_log=log)
    fixed = (ub - lb) < 0.5
    free = ~fixed

    x_full = np.zeros(prob.n_vars, dtype=np.int8)
    x_full[lb > 0.5] = 1

    if seed_x is not None:
        seed_x = np.asarray(seed_x)
        if seed_x.shape != (prob.n_vars,) or \
                not np.isin(seed_x, (0, 1)).all() or \
                (seed_x[fixed] != x_full[fixed]).any():
            seed_x = None          # unusable seed: ignore, never fail

    total_bound = prob.objective_const + float(prob.objective[fixed] @ x_full[fixed])
    total_nodes = 0
    timed_out = False
    have_all = True

    if not free.any():
        ok, obj = evaluate_assignment(prob, x_full)
        if not ok:
            return MilpSolution(status="infeasible", assignment=None, objective=None,
                                bound=np.inf, gap=np.inf, nodes=0, node_log=log)
        return MilpSolution(status="optimal", assignment=x_full, objective=obj,
                            bound=obj, gap=0.0, nodes=0, node_log=log)

    def rows_for(A, b, comp_mask):
        keep = []
        for r in range(b.size):
            nz = np.flatnonzero(A[r])
            nz_free = nz[free[nz]]
            if nz_free.size and comp_mask[nz_free[0]]:
                keep.append(r)
        return keep

    for comp in _components(prob, free):
        comp_mask = np.zeros(prob.n_vars, dtype=bool)
        comp_mask[comp] = True
        eq_rows = rows_for(prob.A_eq, prob.b_eq, comp_mask)
        ub_rows = rows_for(prob.A_ub, prob.b_ub, comp_mask)
        Aeq = prob.A_eq[eq_rows][:, comp] if eq_rows else np.zeros((0, comp.size))
        beq = (prob.b_eq[eq_rows] - prob.A_eq[eq_rows][:, fixed] @ x_full[fixed].astype(float)
               if eq_rows else np.zeros(0))
        Aub = prob.A_ub[ub_rows][:, comp] if ub_rows else np.zeros((0, comp.size))
        bub = (prob.b_ub[ub_rows] - prob.A_ub[ub_rows][:, fixed] @ x_full[fixed].astype(float)
               if ub_rows else np.zeros(0))
        c = prob.objective[comp]

        status, x, obj, bound, nodes = _branch_and_bound(
            c, Aeq, beq, Aub, bub, deadline,
            log if collect_node_log else None, id_offset=total_nodes,
            seed_x=None if seed_x is None else seed_x[comp])
        total_nodes += nodes

        if status == "infeasible":
            return MilpSolution(status="infeasible", assignment=None, objective=None,
                                bound=np.inf, gap=np.inf, nodes=total_nodes, node_log=log)
        if status == "time_limit":
            timed_out = True
            total_bound = total_bound + bound if np.isfinite(bound) else -np.inf
            if x is not None:
                x_full[comp] = x
            else:
                have_all = False
            continue
        if comp.size <= LEX_REFINE_MAX and not deadline.expired():
            x = _lex_refine(c, Aeq, beq, Aub, bub, x, obj, deadline)
        x_full[comp] = x
        total_bound += float(c @ x)

    if not have_all:
        return MilpSolution(status="time_limit", assignment=None, objective=None,
                            bound=total_bound, gap=np.inf, nodes=total_nodes,
                            node_log=log)
    ok, objective = evaluate_assignment(prob, x_full)
    if not ok:
        raise SolverError("assembled solution violates the program")
    status = "time_limit" if timed_out else "optimal"
    gap = 0.0 if not timed_out else \
        (objective - total_bound) / max(1.0, abs(objective))
    return MilpSolution(status=status, assignment=x_full, objective=objective,
                        bound=total_bound if timed_out else objective,
                        gap=max(0.0, gap), nodes=total_nodes, node_log=log)


# ---------------------------------------------------------------------------
# enumeration oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VerificationReport:
    ok: bool
    solver_status: str
    oracle_status: str
    solver_objective: float | None
    oracle_objective: float | None
    assignments_match: bool
    message: str


def enumerate_optimum(prob: MilpProblem,
                      chunk: int = 1 << 16) -> tuple[str, np.ndarray | None, float | None]:
    """Brute force over all 2^n assignments (n <= ENUM_MAX_VARS).

    Assignments are generated with variable j as bit j of the chunk
    counter, so ascending enumeration order IS the declared tie-break
    order (smallest sum(x_j * 2^j) first) and the first optimum kept is
    exactly the assignment `solve` promises.
    """
    prob.validate()
    n = prob.n_vars
    if n > ENUM_MAX_VARS:
        raise ConfigurationError(f"enumeration limited to {ENUM_MAX_VARS} variables, got {n}")
    shifts = np.arange(n, dtype=np.uint64)
    best_obj = np.inf
    best_x = None
    total = 1 << n
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.uint64)
        X = ((idx[:, None] >> shifts[None, :]) & 1).astype(float)
        feas = np.ones(idx.size, dtype=bool)
        if prob.b_eq.size:
            lhs = X @ prob.A_eq.T
            feas &= np.all(np.abs(lhs - prob.b_eq) <= 1e-7 * (1.0 + np.abs(prob.b_eq)), axis=1)
        if prob.b_ub.size:
            lhs = X @ prob.A_ub.T
            feas &= np.all(lhs - prob.b_ub <= 1e-7 * (1.0 + np.abs(prob.b_ub)), axis=1)
        if not feas.any():
            continue
        objs = X[feas] @ prob.objective
        vmin = float(objs.min())
        tol = _OBJ_TOL * max(1.0, abs(vmin))
        k = int(np.argmax(objs <= vmin + tol))   # first (lex-min) within-tol hit
        val = float(objs[k])
        if val < best_obj - _OBJ_TOL * max(1.0, abs(val)):
            best_obj = val
            best_x = X[feas][k].astype(np.int8)
    if best_x is None:
        return "infeasible", None, None
    return "optimal", best_x, best_obj + prob.objective_const


def verify_against_enumeration(prob: MilpProblem) -> VerificationReport:
    """Cross-check `solve` against exhaustive enumeration on one program."""
    sol = solve(prob)
    o_status, o_x, o_obj = enumerate_optimum(prob)
    if sol.status != o_status:
        return VerificationReport(False, sol.status, o_status, sol.objective, o_obj,
                                  False, "status mismatch")
    if o_status == "infeasible":
        return VerificationReport(True, sol.status, o_status, None, None, True, "both infeasible")
    obj_ok = abs(sol.objective - o_obj) <= 1e-9 * max(1.0, abs(o_obj))
    asg_ok = sol.assignment is not None and np.array_equal(
        sol.assignment.astype(np.int8), o_x.astype(np.int8))
    msgs = []
    if not obj_ok:
        msgs.append(f"objective mismatch: solver {sol.objective!r} oracle {o_obj!r}")
    if not asg_ok:
        msgs.append("assignment mismatch")
    return VerificationReport(obj_ok and asg_ok, sol.status, o_status,
                              sol.objective, o_obj, asg_ok,
                              "; ".join(msgs) if msgs else "match")


# ---------------------------------------------------------------------------
# textual dump
# ---------------------------------------------------------------------------

def dump_lp_text(prob: MilpProblem) -> str:
    """Human-auditable LP-format rendering of a program."""
    prob.validate()

    def term(coef: float, name: str, lead: bool) -> str:
        sign = "-" if coef < 0 else ("" if lead else "+")
        mag = abs(coef)
        coefstr = "" if np.isclose(mag, 1.0) else f"{mag:.12g} "
        return f"{sign} {coefstr}{name}".strip() if not lead or coef < 0 else f"{sign}{coefstr}{name}"

    def render(coeffs: np.ndarray) -> str:
        parts = []
        for j in np.flatnonzero(coeffs):
            parts.append(term(float(coeffs[j]), prob.names[j], lead=not parts))
        return " ".join(parts) if parts else "0 " + prob.names[0]

    lines = ["Minimize", f" obj: {render(prob.objective)}"]
    if prob.objective_const:
        lines[-1] += f" + {prob.objective_const:.12g}"
    lines.append("Subject To")
    for r in range(prob.b_eq.size):
        lines.append(f" eq{r}: {render(prob.A_eq[r])} = {prob.b_eq[r]:.12g}")
    for r in range(prob.b_ub.size):
        lines.append(f" le{r}: {render(prob.A_ub[r])} <= {prob.b_ub[r]:.12g}")
    lines.append("Binaries")
    lines.append(" " + " ".join(prob.names))
    lines.append("End")
    return "\n".join(lines) + "\n"
