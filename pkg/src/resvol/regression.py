"""Epsilon-SVR on a single feature: scaling, SMO solver, CV grid search.

The dual problem solved here, in the net-coefficient form beta = alpha -
alpha*, is

    maximize  W(beta) = -1/2 sum_ij beta_i beta_j k(x_i, x_j)
                        - epsilon sum_i |beta_i| + sum_i y_i beta_i
    subject to  sum_i beta_i = 0,  |beta_i| <= C

with the RBF kernel k(a, b) = exp(-gamma (a - b)^2). The solver is
two-coefficient SMO: the first working index is the maximal KKT violator,
the second maximizes the guaranteed gain of the pair step (the standard
second-order rule; pure maximal-violating-pair selection needs orders of
magnitude more iterations on near-singular kernel matrices). Each pair
step solves its one-dimensional piecewise-quadratic subproblem exactly.
Selection and stepping are fully deterministic: identical inputs always
produce an identical model. Inputs and targets are expected pre-scaled to
[0, 1]; gamma is defined on scaled inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from pathlib import Path

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a hard dep, but stay importable
    def njit(*args, **kwargs):
        def wrap(f):
            return f
        return wrap

from .errors import DegenerateScalerError, InputError

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 1_000_000

# Search grids centered on a C=1000, epsilon=4e-4, gamma=9 optimum.
DEFAULT_C_GRID = (1.0, 10.0, 100.0, 1000.0)
DEFAULT_EPSILON_GRID = (0.0001, 0.0004, 0.001, 0.01)
DEFAULT_GAMMA_GRID = (0.5, 1.0, 3.0, 9.0, 27.0)


# ---------------------------------------------------------------------------
# Min-max scaling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalerParams:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.hi > self.lo:
            raise DegenerateScalerError(
                f"scaler needs hi > lo, got [{self.lo}, {self.hi}]"
            )


def minmax_fit(values) -> ScalerParams:
    """Fit lo/hi from data; constant input cannot be scaled."""
    v = np.asarray(values, dtype=np.float64)
    if v.size < 2:
        raise DegenerateScalerError("min-max fit needs >= 2 values")
    lo, hi = float(v.min()), float(v.max())
    if hi == lo:
        raise DegenerateScalerError(f"all {v.size} values equal {lo}")
    return ScalerParams(lo, hi)


def minmax_apply(p: ScalerParams, v):
    return (np.asarray(v, dtype=np.float64) - p.lo) / (p.hi - p.lo)


def minmax_invert(p: ScalerParams, s):
    return p.lo + np.asarray(s, dtype=np.float64) * (p.hi - p.lo)


# ---------------------------------------------------------------------------
# Kernel
# ---------------------------------------------------------------------------

def rbf_kernel(a, b, gamma: float) -> float:
    """exp(-gamma * ||a - b||^2); scalars or 1-D points."""
    if gamma <= 0:
        raise ValueError("gamma must be > 0")
    d = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    return float(math.exp(-gamma * float(np.sum(d * d))))


def _rbf_gram(x: np.ndarray, gamma: float) -> np.ndarray:
    d = x[:, None] - x[None, :]
    return np.exp(-gamma * d * d)


def _rbf_cross(xs: np.ndarray, x: float, gamma: float) -> np.ndarray:
    d = xs - x
    return np.exp(-gamma * d * d)


# ---------------------------------------------------------------------------
# Model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SvrHyperparams:
    c: float
    epsilon: float
    gamma: float

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("C must be > 0")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.gamma <= 0:
            raise ValueError("gamma must be > 0")


@dataclass(frozen=True)
class SvrModel:
    """Trained expansion: y_scaled(x) = sum_i beta_i k(x_i, x) + bias.

    support_inputs holds only the scaled inputs with beta != 0. Scalers are
    None when the model operates directly in scaled units.
    """

    support_inputs: np.ndarray
    dual_coefs: np.ndarray
    bias: float
    hyper: SvrHyperparams
    x_scaler: ScalerParams | None
    y_scaler: ScalerParams | None
    tol: float
    kkt_residual: float
    n_iter: int
    converged: bool

    def __post_init__(self):
        for name in ("support_inputs", "dual_coefs"):
            a = np.asarray(getattr(self, name), dtype=np.float64)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    def predict_scaled(self, x_scaled: float) -> float:
        if self.support_inputs.size == 0:
            return self.bias
        k = _rbf_cross(self.support_inputs, float(x_scaled), self.hyper.gamma)
        return float(np.dot(self.dual_coefs, k) + self.bias)


def dual_objective(K: np.ndarray, y: np.ndarray, epsilon: float, beta: np.ndarray) -> float:
    """Value of the dual objective W(beta) being maximized."""
    return float(
        -0.5 * beta @ (K @ beta) - epsilon * np.sum(np.abs(beta)) + y @ beta
    )


# ---------------------------------------------------------------------------
# SMO solver
# ---------------------------------------------------------------------------

def _kkt_bounds(beta: np.ndarray, F: np.ndarray, c: float, eps: float):
    """Per-point admissible bias interval [lo_i, up_i].

    KKT holds iff max(lo) <= min(up); the maximal violating pair is
    (argmax lo, argmin up).
    """
    lo = np.full(beta.shape, -np.inf)
    up = np.full(beta.shape, np.inf)
    zero = beta == 0
    pos = beta > 0
    neg = beta < 0
    lo[zero] = F[zero] - eps
    up[zero] = F[zero] + eps
    up[pos] = F[pos] - eps
    lo[pos & (beta < c)] = F[pos & (beta < c)] - eps
    lo[neg] = F[neg] + eps
    up[neg & (beta > -c)] = F[neg & (beta > -c)] + eps
    return lo, up


@njit(cache=True)
def _smo_kernel(K, y, c, eps, tol, max_iter):  # pragma: no cover - jitted
    """Inner SMO loop; returns (beta, n_iter, converged).

    Selection: i is the maximal KKT violator (largest admissible-bias lower
    bound); j maximizes the second-order gain estimate d^2/eta among
    partners with positive pair violation d. Each pair step is the exact
    maximizer of the concave piecewise-quadratic 1-D restriction, found by
    comparing breakpoint/bound/stationary candidates on exact gains.
    """
    n = y.shape[0]
    beta = np.zeros(n)
    grad = np.zeros(n)
    cand = np.empty(8)
    n_iter = 0
    converged = False
    while n_iter < max_iter:
        if n_iter > 0 and n_iter % 1000 == 0:
            for a in range(n):  # kill incremental drift in the gradient
                s = 0.0
                for b in range(n):
                    s += K[a, b] * beta[b]
                grad[a] = s
        max_lo = -np.inf
        min_up = np.inf
        i = 0
        for t in range(n):
            F_t = y[t] - grad[t]
            b_t = beta[t]
            if b_t == 0.0:
                lo_t = F_t - eps
                up_t = F_t + eps
            elif b_t > 0.0:
                up_t = F_t - eps
                lo_t = F_t - eps if b_t < c else -np.inf
            else:
                lo_t = F_t + eps
                up_t = F_t + eps if b_t > -c else np.inf
            if lo_t > max_lo:
                max_lo = lo_t
                i = t
            if up_t < min_up:
                min_up = up_t
        if max_lo - min_up < tol:
            converged = True
            break

        Fi = y[i] - grad[i]
        bi = beta[i]
        best_score = -np.inf
        j = -1
        for t in range(n):
            if t == i:
                continue
            F_t = y[t] - grad[t]
            b_t = beta[t]
            if b_t == 0.0:
                up_t = F_t + eps
            elif b_t > 0.0:
                up_t = F_t - eps
            else:
                up_t = F_t + eps if b_t > -c else np.inf
            d = max_lo - up_t
            if d > 0.0:
                eta_t = K[i, i] + K[t, t] - 2.0 * K[i, t]
                if eta_t < 1e-12:
                    eta_t = 1e-12
                score = d * d / eta_t
                if score > best_score:
                    best_score = score
                    j = t
        if j < 0:
            break
        bj = beta[j]
        Fj = y[j] - grad[j]
        eta = K[i, i] + K[j, j] - 2.0 * K[i, j]

        L = max(-c - bi, bj - c)
        H = min(c - bi, bj + c)
        cand[0] = L
        cand[1] = H
        m = 2
        if L < -bi < H:
            cand[m] = -bi
            m += 1
        if L < bj < H:
            cand[m] = bj
            m += 1
        if eta > 0.0:
            for si in (-1.0, 1.0):
                for sj in (-1.0, 1.0):
                    t_s = (Fi - Fj - eps * si + eps * sj) / eta
                    if L < t_s < H:
                        cand[m] = t_s
                        m += 1
        best_t = 0.0
        best_gain = 0.0
        for idx in range(m):
            t_c = cand[idx]
            gain = (
                t_c * (Fi - Fj)
                - 0.5 * eta * t_c * t_c
                - eps * (abs(bi + t_c) - abs(bi) + abs(bj - t_c) - abs(bj))
            )
            if gain > best_gain:
                best_gain = gain
                best_t = t_c
        if best_gain <= 0.0:
            break  # numerical floor reached; residual reported by caller
        new_i = min(max(bi + best_t, -c), c)
        new_j = min(max(bj - best_t, -c), c)
        di = new_i - bi
        dj = new_j - bj
        for a in range(n):
            grad[a] += K[a, i] * di + K[a, j] * dj
        beta[i] = new_i
        beta[j] = new_j
        n_iter += 1
    return beta, n_iter, converged


def svr_fit(
    x,
    y,
    hyper: SvrHyperparams,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    x_scaler: ScalerParams | None = None,
    y_scaler: ScalerParams | None = None,
) -> SvrModel:
    """Solve the epsilon-SVR dual by SMO on pre-scaled samples.

    Terminates when the maximal KKT violation drops below tol, or after
    max_iter pair updates (converged=False on the model then). The bias is
    the mean of the boundary-consistent estimates over unbounded support
    vectors, falling back to the midpoint of the admissible KKT interval.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.size == 0:
        raise InputError("svr_fit needs at least one sample")
    if x.shape != y.shape:
        raise InputError("x and y lengths differ")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise InputError("svr_fit requires finite samples")
    if tol <= 0:
        raise ValueError("tol must be > 0")
    c, eps = hyper.c, hyper.epsilon
    K = _rbf_gram(x, hyper.gamma)
    beta, n_iter, converged = _smo_kernel(
        K, y, float(c), float(eps), float(tol), int(max_iter)
    )

    F = y - K @ beta
    lo, up = _kkt_bounds(beta, F, c, eps)
    residual = max(0.0, float(np.max(lo) - np.min(up)))
    unbounded = (beta != 0) & (np.abs(beta) < c)
    if unbounded.any():
        bias = float(np.mean(F[unbounded] - eps * np.sign(beta[unbounded])))
    else:
        bias = float((np.max(lo) + np.min(up)) / 2.0)
    sv = beta != 0
    return SvrModel(
        support_inputs=x[sv].copy(),
        dual_coefs=beta[sv].copy(),
        bias=bias,
        hyper=hyper,
        x_scaler=x_scaler,
        y_scaler=y_scaler,
        tol=tol,
        kkt_residual=residual,
        n_iter=int(n_iter),
        converged=bool(converged),
    )


def svr_predict(model: SvrModel, x_raw: float) -> float:
    """Scale input, evaluate the kernel expansion, unscale the output."""
    xs = float(x_raw)
    if model.x_scaler is not None:
        xs = float(minmax_apply(model.x_scaler, xs))
    ys = model.predict_scaled(xs)
    if model.y_scaler is not None:
        ys = float(minmax_invert(model.y_scaler, ys))
    return ys


def extrapolates(model: SvrModel, x_raw: float) -> bool:
    """True when x_raw falls outside the training input range."""
    if model.x_scaler is not None:
        return x_raw < model.x_scaler.lo or x_raw > model.x_scaler.hi
    if model.support_inputs.size == 0:
        return False
    return bool(
        x_raw < model.support_inputs.min() or x_raw > model.support_inputs.max()
    )


# ---------------------------------------------------------------------------
# Splitting and grid search
# ---------------------------------------------------------------------------

def train_test_split(samples, train_fraction: float = 0.8, seed: int = 0):
    """Seeded uniform shuffle; first ceil(train_fraction * n) go to train."""
    items = list(samples)
    n = len(items)
    if n < 2:
        raise InputError("split needs >= 2 samples")
    if not 0.0 < train_fraction < 1.0 + 1e-15:
        raise InputError("train_fraction must lie in (0, 1)")
    n_train = math.ceil(train_fraction * n)
    if n_train >= n:
        raise InputError(
            f"train_fraction={train_fraction} leaves an empty test set for n={n}"
        )
    perm = np.random.default_rng(seed).permutation(n)
    train = [items[k] for k in perm[:n_train]]
    test = [items[k] for k in perm[n_train:]]
    return train, test


@dataclass(frozen=True)
class GridSearchSpec:
    c_grid: tuple = DEFAULT_C_GRID
    epsilon_grid: tuple = DEFAULT_EPSILON_GRID
    gamma_grid: tuple = DEFAULT_GAMMA_GRID
    folds: int = 10
    seed: int = 0

    def __post_init__(self):
        if not (self.c_grid and self.epsilon_grid and self.gamma_grid):
            raise ValueError("hyperparameter grids must be nonempty")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")


@dataclass(frozen=True)
class CvCell:
    c: float
    epsilon: float
    gamma: float
    mean_mse: float
    std_mse: float


def grid_search_cv(
    x,
    y,
    spec: GridSearchSpec,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> tuple[SvrHyperparams, list[CvCell]]:
    """K-fold CV over the hyperparameter grid on pre-scaled samples.

    Folds are contiguous blocks of a seeded shuffle. The winner minimizes
    mean validation MSE; ties break toward smaller C, then smaller gamma,
    then larger epsilon. The cv_table lists every triple in grid order
    (C outermost, then epsilon, then gamma).
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    n = x.size
    if spec.folds > n:
        raise InputError(f"folds={spec.folds} exceeds n={n}")
    perm = np.random.default_rng(spec.seed).permutation(n)
    fold_idx = np.array_split(perm, spec.folds)
    folds = []
    for va in fold_idx:
        tr = np.setdiff1d(perm, va, assume_unique=True)
        folds.append((tr, va))

    table: list[CvCell] = []
    for c, eps, gamma in product(spec.c_grid, spec.epsilon_grid, spec.gamma_grid):
        hyper = SvrHyperparams(c, eps, gamma)
        fold_mse = []
        for tr, va in folds:
            model = svr_fit(x[tr], y[tr], hyper, tol=tol, max_iter=max_iter)
            pred = np.array([model.predict_scaled(float(v)) for v in x[va]])
            fold_mse.append(float(np.mean((pred - y[va]) ** 2)))
        fold_mse = np.asarray(fold_mse)
        table.append(
            CvCell(c, eps, gamma, float(fold_mse.mean()), float(fold_mse.std()))
        )
    best = min(table, key=lambda r: (r.mean_mse, r.c, r.gamma, -r.epsilon))
    return SvrHyperparams(best.c, best.epsilon, best.gamma), table


def save_cv_table(table: list[CvCell], path: str | Path) -> None:
    lines = ["c,epsilon,gamma,mean_mse,std_mse"]
    for cell in table:
        lines.append(
            f"{cell.c!r},{cell.epsilon!r},{cell.gamma!r},"
            f"{cell.mean_mse!r},{cell.std_mse!r}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


# ---------------------------------------------------------------------------
# Persistence (text, bit-exact via repr round-trip)
# ---------------------------------------------------------------------------

_MODEL_MAGIC = "resvol-svr 1"


def save_model(model: SvrModel, path: str | Path) -> None:
    lines = [
        _MODEL_MAGIC,
        f"c {model.hyper.c!r}",
        f"epsilon {model.hyper.epsilon!r}",
        f"gamma {model.hyper.gamma!r}",
        f"tol {model.tol!r}",
        f"kkt_residual {model.kkt_residual!r}",
        f"n_iter {model.n_iter}",
        f"converged {int(model.converged)}",
        f"bias {model.bias!r}",
        _scaler_line("x_scaler", model.x_scaler),
        _scaler_line("y_scaler", model.y_scaler),
        f"support {model.support_inputs.size}",
    ]
    for xi, bi in zip(model.support_inputs, model.dual_coefs):
        lines.append(f"{float(xi)!r} {float(bi)!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _scaler_line(name: str, p: ScalerParams | None) -> str:
    if p is None:
        return f"{name} none"
    return f"{name} {p.lo!r} {p.hi!r}"


def load_model(path: str | Path) -> SvrModel:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != _MODEL_MAGIC:
        raise InputError(f"{Path(path).name}: not a {_MODEL_MAGIC!r} file")
    fields = {}
    idx = 1
    for idx in range(1, 12):
        key, _, rest = lines[idx].partition(" ")
        fields[key] = rest
    n_sv = int(fields["support"])
    xs, bs = [], []
    for line in lines[12:12 + n_sv]:
        a, b = line.split()
        xs.append(float(a))
        bs.append(float(b))
    if len(xs) != n_sv:
        raise InputError(f"{Path(path).name}: expected {n_sv} support rows")
    return SvrModel(
        support_inputs=np.asarray(xs, dtype=np.float64),
        dual_coefs=np.asarray(bs, dtype=np.float64),
        bias=float(fields["bias"]),
        hyper=SvrHyperparams(
            float(fields["c"]), float(fields["epsilon"]), float(fields["gamma"])
        ),
        x_scaler=_parse_scaler(fields["x_scaler"]),
        y_scaler=_parse_scaler(fields["y_scaler"]),
        tol=float(fields["tol"]),
        kkt_residual=float(fields["kkt_residual"]),
        n_iter=int(fields["n_iter"]),
        converged=bool(int(fields["converged"])),
    )


def _parse_scaler(text: str) -> ScalerParams | None:
    if text == "none":
        return None
    lo, hi = text.split()
    return ScalerParams(float(lo), float(hi))
