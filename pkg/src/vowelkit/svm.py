"""Binary soft-margin SVM trained in the dual by sequential minimal optimization.

Platt-style SMO: pairs of multipliers are optimized analytically, the second
index chosen to maximize |E1 - E2|.  Indefinite kernels (sigmoid) are handled
by evaluating the clipped objective at both box ends, so training always
terminates even when no global optimum exists.
"""

from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput
from .kernels import KernelSpec, gram_matrix

FULL_GRAM_LIMIT = 4000
ROW_CACHE_SIZE = 512


@dataclass
class BinaryProblem:
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.X.ndim != 2 or self.y.ndim != 1 or self.X.shape[0] != self.y.size:
            raise InvalidInput("X must be (l, d) with one label per row")
        if self.X.shape[0] < 2:
            raise InvalidInput("need at least two training points")
        if not np.all(np.isfinite(self.X)):
            raise InvalidInput("training points must be finite")
        if set(np.unique(self.y)) != {-1.0, 1.0}:
            raise InvalidInput("labels must contain both -1 and +1")


@dataclass
class SvmParams:
    C: float
    kernel: KernelSpec
    kkt_tol: float = 1e-3
    alpha_eps: float = 1e-12
    max_passes: int = 10
    max_iter: int = 0  # 0 means 100 * l, fixed at train time

    def __post_init__(self):
        if self.C <= 0.0:
            raise InvalidInput("C must be > 0")
        if self.kkt_tol <= 0.0:
            raise InvalidInput("kkt_tol must be > 0")


@dataclass
class BinaryModel:
    support_vectors: np.ndarray
    sv_alphas: np.ndarray
    sv_labels: np.ndarray
    bias: float
    kernel: KernelSpec
    converged: bool = True
    n_iter: int = 0
    C: float = field(default=0.0)

    def __post_init__(self):
        self.support_vectors = np.asarray(self.support_vectors, dtype=float)
        self.sv_alphas = np.asarray(self.sv_alphas, dtype=float)
        self.sv_labels = np.asarray(self.sv_labels, dtype=float)


class _KernelCache:
    """Row cache over the training Gram matrix.

    Full matrix below FULL_GRAM_LIMIT rows, LRU rows above; the policy only
    trades memory for time, values are identical either way.
    """

    def __init__(self, X, kernel):
        self.X = X
        self.kernel = kernel
        self.l = X.shape[0]
        if self.l <= FULL_GRAM_LIMIT:
            self.full = gram_matrix(kernel, X)
            self.rows = None
        else:
            self.full = None
            self.rows = OrderedDict()

    def row(self, i):
        if self.full is not None:
            return self.full[i]
        if i in self.rows:
            self.rows.move_to_end(i)
            return self.rows[i]
        row = gram_matrix(self.kernel, self.X[i : i + 1], self.X)[0]
        self.rows[i] = row
        if len(self.rows) > ROW_CACHE_SIZE:
            self.rows.popitem(last=False)
        return row


def smo_train(problem: BinaryProblem, params: SvmParams) -> BinaryModel:
    """Solve the dual within params.kkt_tol; see module docstring.

    Stops after max_passes consecutive full sweeps change no multiplier by
    more than alpha_eps, or after max_iter single-point examinations
    (the model is then flagged converged=False but remains usable).
    """
    X, y = problem.X, problem.y
    l = X.shape[0]
    C = float(params.C)
    tol = params.kkt_tol
    eps = params.alpha_eps
    max_iter = params.max_iter if params.max_iter > 0 else 100 * l

    cache = _KernelCache(X, params.kernel)
    alpha = np.zeros(l)
    diag = np.array([cache.row(i)[i] for i in range(l)]) if cache.full is None else np.diag(cache.full)
    state = {"b": 0.0, "E": -y.copy(), "it": 0}  # f = 0 initially, so E = -y

    def take_step(i1, i2):
        if i1 == i2:
            return False
        a1, a2 = alpha[i1], alpha[i2]
        y1, y2 = y[i1], y[i2]
        E = state["E"]
        E1, E2 = E[i1], E[i2]
        s = y1 * y2
        if s > 0:
            L, H = max(0.0, a1 + a2 - C), min(C, a1 + a2)
        else:
            L, H = max(0.0, a2 - a1), min(C, C + a2 - a1)
        if L >= H:
            return False
        row1 = cache.row(i1)
        row2 = cache.row(i2)
        k11, k12, k22 = diag[i1], row1[i2], diag[i2]
        eta = k11 + k22 - 2.0 * k12
        if eta > 0.0:
            a2_new = a2 + y2 * (E1 - E2) / eta
            a2_new = min(max(a2_new, L), H)
        else:
            # indefinite kernel: pick the better box end of the clipped objective
            f1 = y1 * (E1 + state["b"]) - a1 * k11 - s * a2 * k12
            f2 = y2 * (E2 + state["b"]) - s * a1 * k12 - a2 * k22
            l1 = a1 + s * (a2 - L)
            h1 = a1 + s * (a2 - H)
            obj_l = l1 * f1 + L * f2 + 0.5 * l1 * l1 * k11 + 0.5 * L * L * k22 + s * L * l1 * k12
            obj_h = h1 * f1 + H * f2 + 0.5 * h1 * h1 * k11 + 0.5 * H * H * k22 + s * H * h1 * k12
            if obj_l < obj_h - 1e-12:
                a2_new = L
            elif obj_l > obj_h + 1e-12:
                a2_new = H
            else:
                a2_new = a2
        if abs(a2_new - a2) < eps * (a2_new + a2 + eps):
            return False
        a1_new = a1 + s * (a2 - a2_new)
        # snap near-boundary values so support vectors are crisp
        if a1_new < 1e-10:
            a1_new = 0.0
        elif a1_new > C - 1e-10:
            a1_new = C
        da1, da2 = a1_new - a1, a2_new - a2
        b = state["b"]
        b1 = b - E1 - y1 * da1 * k11 - y2 * da2 * k12
        b2 = b - E2 - y1 * da1 * k12 - y2 * da2 * k22
        in1 = 0.0 < a1_new < C
        in2 = 0.0 < a2_new < C
        if in1 and in2:
            b_new = 0.5 * (b1 + b2)
        elif in1:
            b_new = b1
        elif in2:
            b_new = b2
        else:
            b_new = 0.5 * (b1 + b2)
        alpha[i1], alpha[i2] = a1_new, a2_new
        state["E"] = E + y1 * da1 * row1 + y2 * da2 * row2 + (b_new - b)
        state["b"] = b_new
        return True

    def examine(i2):
        E = state["E"]
        a2 = alpha[i2]
        r2 = E[i2] * y[i2]
        if not ((r2 < -tol and a2 < C) or (r2 > tol and a2 > 0.0)):
            return False
        non_bound = np.where((alpha > 0.0) & (alpha < C))[0]
        if non_bound.size > 1:
            i1 = int(non_bound[np.argmax(np.abs(E[non_bound] - E[i2]))])
            if take_step(i1, i2):
                return True
        for i1 in non_bound:
            if take_step(int(i1), i2):
                return True
        for i1 in range(l):
            if take_step(i1, i2):
                return True
        return False

    passes_quiet = 0
    examine_all = True
    converged = False
    while state["it"] < max_iter:
        alpha_before = alpha.copy()
        indices = range(l) if examine_all else np.where((alpha > 0.0) & (alpha < C))[0]
        changed = 0
        for i2 in indices:
            changed += examine(int(i2))
            state["it"] += 1
            if state["it"] >= max_iter:
                break
        if examine_all:
            if np.abs(alpha - alpha_before).max() <= eps:
                passes_quiet += 1
                if passes_quiet >= params.max_passes:
                    converged = True
                    break
            else:
                passes_quiet = 0
                if changed:
                    examine_all = False
        elif changed == 0:
            examine_all = True

    sv = alpha > 0.0
    return BinaryModel(
        support_vectors=X[sv],
        sv_alphas=alpha[sv],
        sv_labels=y[sv],
        bias=state["b"],
        kernel=params.kernel,
        converged=converged,
        n_iter=state["it"],
        C=C,
    )


def decision_values(model: BinaryModel, X: np.ndarray) -> np.ndarray:
    """f(x) = sum_i alpha_i y_i K(sv_i, x) + b for each row of X."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise InvalidInput("X must be a matrix")
    if model.support_vectors.shape[0] == 0:
        return np.full(X.shape[0], model.bias)
    if X.shape[1] != model.support_vectors.shape[1]:
        raise InvalidInput("feature dimension mismatch")
    k = gram_matrix(model.kernel, X, model.support_vectors)
    return k @ (model.sv_alphas * model.sv_labels) + model.bias


def decision_value(model: BinaryModel, x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise InvalidInput("x must be a vector")
    return float(decision_values(model, x[None, :])[0])


def predict_binary(model: BinaryModel, x: np.ndarray) -> int:
    """sign(f(x)) with f(x) = 0 mapped to +1."""
    return 1 if decision_value(model, x) >= 0.0 else -1


def compute_slacks(model: BinaryModel, problem: BinaryProblem) -> np.ndarray:
    """xi_i = max(0, 1 - y_i f(x_i)) over the training set."""
    f = decision_values(model, problem.X)
    return np.maximum(0.0, 1.0 - problem.y * f)


def dual_objective(model: BinaryModel, problem: BinaryProblem) -> float:
    """sum(alpha) - 0.5 * sum_ij alpha_i alpha_j y_i y_j K(x_i, x_j)."""
    if model.sv_alphas.size == 0:
        return 0.0
    coef = model.sv_alphas * model.sv_labels
    k = gram_matrix(model.kernel, model.support_vectors)
    return float(model.sv_alphas.sum() - 0.5 * coef @ k @ coef)
