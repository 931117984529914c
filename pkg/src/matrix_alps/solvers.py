"""Hard-thresholding solvers for ``min ||y - A X||^2  s.t.  rank(X) <= k``.

Available algorithms:

``alps1``           gradient step on an expanded rank-2k subspace, rank-k
                    selection, then an extra restricted gradient step (de-bias).
``alps1_nodebias``  the same without the de-bias step.
``admira``          least squares over the expanded atom set, then rank-k selection.
``alps2``           ``alps1`` without de-bias, run on a momentum point ``Q``.
``alps2_qr``        ``alps2`` with randomized power-iteration projections.
``svp``             projected gradient descent with a constant step.

Every run starts from ``X(0) = 0`` with an empty subspace and stops once
``||X(i) - X(i-1)||_F <= tol * ||X(i)||_F``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
import warnings
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .exceptions import InvalidInputError, InvalidRankError, SolverDiverged, StationaryPoint
from .linalg import (
    SubspaceBasis,
    atom_coefficients,
    atoms_to_matrix,
    ortho_union,
    project_atoms,
    project_left_only,
    project_right_only,
    project_subspace,
    raw_union,
)
from .operators import LinearOperator
from .projectors import ProjectorSpec, project

ALGORITHMS = ("alps1", "alps1_nodebias", "admira", "alps2", "alps2_qr", "svp")
MOMENTUM_KINDS = ("constant", "adaptive", "nesterov_q")
PROJECTION_MODES = ("exact_two_sided", "left_inexact")
UNION_MODES = ("ortho", "raw")

# run aborts when f(X(i)) exceeds this multiple of f(X(0)) = ||y||^2
DIVERGENCE_FACTOR = 1e6


class RestrictedLSWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class MomentumPolicy:
    kind: str = "adaptive"
    tau: float = 0.0
    q: float = 1.0
    alpha0: float = 0.5

    def __post_init__(self):
        if self.kind not in MOMENTUM_KINDS:
            raise InvalidInputError(f"unknown momentum kind {self.kind!r}")
        if self.kind == "constant" and not 0.0 <= self.tau < 1.0:
            raise InvalidInputError("constant momentum needs 0 <= tau < 1")
        if self.kind == "nesterov_q" and not (0.0 < self.q <= 1.0 and 0.0 < self.alpha0 < 1.0):
            raise InvalidInputError("nesterov momentum needs 0 < q <= 1 and 0 < alpha0 < 1")


@dataclass(frozen=True)
class SolverConfig:
    algorithm: str = "alps2"
    k: int = 1
    max_iters: int = 500
    tol: float = 5e-5
    projection_mode: str = "exact_two_sided"
    projector: ProjectorSpec = field(default_factory=ProjectorSpec)
    momentum: MomentumPolicy = field(default_factory=MomentumPolicy)
    union_mode: str = "ortho"
    cg_maxiter: int = 500
    cg_tol: float = 1e-10
    svp_mu: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise InvalidInputError(f"unknown algorithm {self.algorithm!r}")
        if self.k < 1:
            raise InvalidInputError("k must be at least 1")
        if self.max_iters < 1:
            raise InvalidInputError("max_iters must be positive")
        if not self.tol > 0 or not self.cg_tol > 0:
            raise InvalidInputError("tolerances must be positive")
        if self.projection_mode not in PROJECTION_MODES:
            raise InvalidInputError(f"unknown projection mode {self.projection_mode!r}")
        if self.union_mode not in UNION_MODES:
            raise InvalidInputError(f"unknown union mode {self.union_mode!r}")
        if not self.svp_mu > 0:
            raise InvalidInputError("svp_mu must be positive")
        proj = replace(self.projector, k=self.k)
        if self.algorithm == "alps2_qr" and proj.mode != "randomized_power":
            proj = replace(proj, mode="randomized_power")
        object.__setattr__(self, "projector", proj)


@dataclass
class IterationRecord:
    iter: int
    rel_change: float
    f_value: float
    err_vs_truth: float | None
    elapsed_ms: float


TRACE_COLUMNS = ("iter", "rel_change", "f_value", "err_vs_truth", "elapsed_ms")


@dataclass
class RunReport:
    algorithm: str
    k: int
    iterations: int
    stop_reason: str
    final_f: float
    final_error: float | None
    elapsed_s: float
    trace: list[IterationRecord] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.stop_reason in ("tol", "stationary")

    def to_dict(self, include_timing: bool = True) -> dict:
        d = asdict(self)
        if not include_timing:
            d.pop("elapsed_s")
            for rec in d["trace"]:
                rec.pop("elapsed_ms")
        return d

    def to_json(self, include_timing: bool = True) -> str:
        return json.dumps(self.to_dict(include_timing))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for rec in self.trace:
            err = "" if rec.err_vs_truth is None else repr(rec.err_vs_truth)
            w.writerow([rec.iter, repr(rec.rel_change), repr(rec.f_value), err, repr(rec.elapsed_ms)])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# building blocks


def _line_step(A: LinearOperator, G: np.ndarray) -> tuple[float, np.ndarray]:
    """Exact line-search step for the direction ``G``; also returns ``A G``."""
    num = float(np.sum(G * G))
    if num == 0.0:
        raise StationaryPoint()
    AG = A.apply(G)
    den = float(AG @ AG)
    if den == 0.0:
        raise StationaryPoint()
    return num / den, AG


def step_size_mu(A: LinearOperator, S: SubspaceBasis, grad) -> float:
    """Minimizer over mu of ``||y - A(X - mu/2 P_S grad)||^2``.

    Equals ``||P_S grad||_F^2 / ||A P_S grad||_2^2``. Raises
    :class:`StationaryPoint` when the projected gradient is zero.
    """
    return _line_step(A, project_subspace(S, grad))[0]


def momentum_tau(policy: MomentumPolicy, A, y, X_cur, X_prev, AX_cur=None, AX_prev=None, alpha=None):
    """Momentum weight for ``Q = X_cur + tau (X_cur - X_prev)``.

    Returns ``(tau, alpha_next)``; ``alpha_next`` only changes for the
    Nesterov schedule. The adaptive rule minimizes ``||y - A Q||^2`` and falls
    back to 0 when ``A X_cur == A X_prev``.
    """
    if policy.kind == "constant":
        return policy.tau, alpha
    if policy.kind == "nesterov_q":
        a = policy.alpha0 if alpha is None else alpha
        b = a * a - policy.q
        # positive root of t^2 + (a^2 - q) t - a^2 = 0
        a_next = (-b + math.sqrt(b * b + 4.0 * a * a)) / 2.0
        return a * (1.0 - a) / (a * a + a_next), a_next
    if AX_cur is None:
        AX_cur = A.apply(X_cur)
    if AX_prev is None:
        AX_prev = A.apply(X_prev)
    d = AX_cur - AX_prev
    den = float(d @ d)
    if den == 0.0:
        return 0.0, alpha
    return float((np.asarray(y) - AX_cur) @ d) / den, alpha


def _conjugate_gradient(matvec, b, x0, atol, maxiter, dot):
    x = x0
    r = b - matvec(x0)
    p = r
    rs = dot(r, r)
    status = "maxiter"
    for it in range(maxiter + 1):
        if math.sqrt(rs) <= atol:
            status = "converged"
            break
        if it == maxiter:
            break
        Mp = matvec(p)
        pMp = dot(p, Mp)
        if pMp <= 1e-30 * max(dot(p, p), 1e-300):
            status = "breakdown"
            break
        a = rs / pMp
        x = x + a * p
        r = r - a * Mp
        rs_new = dot(r, r)
        p = r + (rs_new / rs) * p
        rs = rs_new
    return x, status


def restricted_least_squares(
    A: LinearOperator,
    y,
    S: SubspaceBasis,
    cg_maxiter: int = 500,
    cg_tol: float = 1e-10,
    span: str = "tangent",
    x0=None,
) -> np.ndarray:
    """Minimize ``||y - A V||_2`` over ``V`` in the subspace described by ``S``.

    ``span="tangent"`` uses the subspace ``{U B + C V^T}`` with the usual
    projector; ``span="atoms"`` restricts to linear combinations of the atoms
    ``u_i v_i^T``. Conjugate gradients stops once the projected normal-equation
    residual drops below ``cg_tol * max(1, ||y||)``. On a rank-deficient
    restriction CG started from zero returns the least-norm iterate and a
    :class:`RestrictedLSWarning` is emitted.
    """
    if S.is_empty:
        raise InvalidInputError("restricted least squares needs a nonempty subspace")
    y = np.asarray(y, dtype=float)
    atol = cg_tol * max(1.0, float(np.linalg.norm(y)))
    if span == "tangent":
        P = lambda Z: project_subspace(S, Z)  # noqa: E731
        b = P(A.adjoint(y))
        start = np.zeros(S.shape) if x0 is None else P(x0)
        V, status = _conjugate_gradient(
            lambda Z: P(A.adjoint(A.apply(P(Z)))), b, start, atol, cg_maxiter, lambda a, c: float(np.sum(a * c))
        )
        V = P(V)
    elif span == "atoms":
        atoms = S.atoms()
        B = np.stack([A.apply(a) for a in atoms], axis=1)
        start = np.zeros(len(atoms)) if x0 is None else atom_coefficients(S, x0)
        c, status = _conjugate_gradient(lambda c: B.T @ (B @ c), B.T @ y, start, atol, cg_maxiter, np.dot)
        V = atoms_to_matrix(S, c)
        if status == "converged" and np.linalg.matrix_rank(B) < B.shape[1]:
            status = "rank-deficient"
    else:
        raise InvalidInputError(f"unknown span {span!r}")
    if status != "converged":
        warnings.warn(f"restricted least squares stopped with status {status!r}", RestrictedLSWarning, stacklevel=2)
    return V


def stopping_check(X_cur, X_prev, tol: float) -> bool:
    """``||X_cur - X_prev||_F <= tol * ||X_cur||_F`` (absolute change when X_cur = 0)."""
    diff = float(np.linalg.norm(np.asarray(X_cur) - np.asarray(X_prev)))
    scale = float(np.linalg.norm(X_cur))
    return diff <= tol * scale if scale > 0 else diff <= tol


def debias_step(A: LinearOperator, y, W_basis: SubspaceBasis, W, projection=project_subspace) -> np.ndarray:
    """One exact line-search gradient step restricted to ``W_basis`` (no truncation)."""
    gW = -2.0 * A.adjoint(np.asarray(y) - A.apply(W))
    GW = projection(W_basis, gW)
    try:
        xi, _ = _line_step(A, GW)
    except StationaryPoint:
        return np.array(W, dtype=float)
    return W - 0.5 * xi * GW


# ---------------------------------------------------------------------------
# solver loop


@dataclass
class _State:
    X: np.ndarray
    AX: np.ndarray
    basis: SubspaceBasis
    Q: np.ndarray
    AQ: np.ndarray
    Q_basis: SubspaceBasis
    alpha: float | None


class _Context:
    def __init__(self, A: LinearOperator, y: np.ndarray, config: SolverConfig):
        self.A = A
        self.y = y
        self.config = config
        self.rng = np.random.default_rng(config.seed)
        m, n = A.shape
        if config.projection_mode == "exact_two_sided":
            self._onto = project_subspace
        elif m <= n:
            self._onto = project_left_only
        else:
            self._onto = project_right_only

    def onto(self, S, X, exact=True):
        return self._onto(S, X, exact=exact)

    def off(self, S, X, exact=True):
        if S.is_empty:
            return X
        return X - self._onto(S, X, exact=exact)

    def project(self, X):
        return project(self.config.projector, X, rng=self.rng)

    def grad(self, AX):
        return -2.0 * self.A.adjoint(self.y - AX)

    def union(self, S1, S2):
        return ortho_union(S1, S2) if self.config.union_mode == "ortho" else raw_union(S1, S2)


def _alps1_step(ctx: _Context, st: _State, debias: bool = True) -> None:
    A = ctx.A
    g = ctx.grad(st.AX)
    D, _ = ctx.project(ctx.off(st.basis, g))
    S = ortho_union(D, st.basis)
    G = ctx.onto(S, g)
    mu, _ = _line_step(A, G)
    V = st.X - 0.5 * mu * G
    if debias:
        W_basis, W = ctx.project(V)
        V = debias_step(A, ctx.y, W_basis, W, projection=ctx.onto)
    st.basis, st.X = ctx.project(V)
    st.AX = A.apply(st.X)


def _admira_step(ctx: _Context, st: _State) -> None:
    g = ctx.grad(st.AX)
    D, _ = ctx.project(g - project_atoms(st.basis, g))
    S = raw_union(D, st.basis)
    cfg = ctx.config
    V = restricted_least_squares(ctx.A, ctx.y, S, cfg.cg_maxiter, cfg.cg_tol, span="atoms")
    st.basis, st.X = ctx.project(V)
    st.AX = ctx.A.apply(st.X)


def _alps2_step(ctx: _Context, st: _State) -> None:
    A, cfg = ctx.A, ctx.config
    g = ctx.grad(st.AQ)
    # a raw (unorthogonalized) memory basis is used through the cheap pseudo-projection
    D, _ = ctx.project(ctx.off(st.Q_basis, g, exact=cfg.union_mode == "ortho"))
    S = ortho_union(D, st.Q_basis)
    G = ctx.onto(S, g)
    mu, _ = _line_step(A, G)
    basis, X_new = ctx.project(st.Q - 0.5 * mu * G)
    AX_new = A.apply(X_new)
    tau, st.alpha = momentum_tau(cfg.momentum, A, ctx.y, X_new, st.X, AX_new, st.AX, st.alpha)
    st.Q = X_new + tau * (X_new - st.X)
    st.AQ = AX_new + tau * (AX_new - st.AX)
    st.Q_basis = ctx.union(st.basis, basis)
    st.X, st.AX, st.basis = X_new, AX_new, basis


def _svp_step(ctx: _Context, st: _State) -> None:
    g = ctx.grad(st.AX)
    st.basis, st.X = ctx.project(st.X - 0.5 * ctx.config.svp_mu * g)
    st.AX = ctx.A.apply(st.X)


_STEPS = {
    "alps1": _alps1_step,
    "alps1_nodebias": lambda ctx, st: _alps1_step(ctx, st, debias=False),
    "admira": _admira_step,
    "alps2": _alps2_step,
    "alps2_qr": _alps2_step,
    "svp": _svp_step,
}


def solve(A: LinearOperator, y, config: SolverConfig, X_true=None) -> tuple[np.ndarray, RunReport]:
    """Run ``config.algorithm`` from ``X(0) = 0``; return the estimate and its report.

    Raises
    ------
    SolverDiverged
        If an iterate becomes non-finite or ``f(X(i)) > 1e6 * f(X(0))``.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (A.p,):
        raise InvalidInputError(f"expected y of length {A.p}, got {y.shape}")
    m, n = A.shape
    if config.k > min(m, n):
        raise InvalidRankError(f"k={config.k} exceeds min({m}, {n})")
    if X_true is not None:
        X_true = np.asarray(X_true, dtype=float)
        if X_true.shape != (m, n):
            raise InvalidInputError("ground truth has the wrong shape")

    ctx = _Context(A, y, config)
    zero, zero_p = np.zeros((m, n)), np.zeros(A.p)
    st = _State(zero, zero_p, SubspaceBasis.empty(m, n), zero, zero_p, SubspaceBasis.empty(m, n), None)
    step = _STEPS[config.algorithm]
    f0 = float(y @ y)

    trace: list[IterationRecord] = []
    stop = "max_iters"
    t0 = time.perf_counter()
    for it in range(1, config.max_iters + 1):
        X_prev = st.X
        stationary = False
        try:
            step(ctx, st)
        except StationaryPoint:
            stationary = True
        if not np.all(np.isfinite(st.X)):
            raise SolverDiverged(it, f"non-finite iterate at iteration {it}")
        r = y - st.AX
        f = float(r @ r)
        if f0 > 0 and f > DIVERGENCE_FACTOR * f0:
            raise SolverDiverged(it, f"data error grew to {f:.3g} at iteration {it}")
        cur_norm = float(np.linalg.norm(st.X))
        change = float(np.linalg.norm(st.X - X_prev))
        trace.append(
            IterationRecord(
                iter=it,
                rel_change=change / cur_norm if cur_norm > 0 else change,
                f_value=f,
                err_vs_truth=None if X_true is None else float(np.linalg.norm(st.X - X_true)),
                elapsed_ms=1e3 * (time.perf_counter() - t0),
            )
        )
        if stationary:
            stop = "stationary"
            break
        if stopping_check(st.X, X_prev, config.tol):
            stop = "tol"
            break

    report = RunReport(
        algorithm=config.algorithm,
        k=config.k,
        iterations=len(trace),
        stop_reason=stop,
        final_f=trace[-1].f_value,
        final_error=trace[-1].err_vs_truth,
        elapsed_s=time.perf_counter() - t0,
        trace=trace,
    )
    return st.X, report
