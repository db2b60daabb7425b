"""Binary soft-margin SVM trained with Platt's sequential minimal
optimization, plus C-grid tuning on validation F1.

The solver repeatedly picks a KKT-violating example and a partner (random
second choice, seeded) and solves the two-variable dual subproblem
analytically. Training stops when a full sweep finds no violating pair that
can make progress; the bias is then recomputed from the converged
multipliers so the KKT residuals are as tight as the multipliers allow.

Labels map HIGH -> +1, LOW -> -1; the classification rule is
score > 0 -> HIGH with ties breaking LOW.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, TextIO

import numpy as np

from .corpus import Severity
from .errors import ConvergenceError, DataError
from .features import FeatureVector, to_matrix

DEFAULT_C_GRID = (0.01, 0.1, 1.0, 10.0, 100.0)

_SV_EPS = 1e-12          # multipliers below this are dropped from the model
_STEP_EPS = 1e-8         # minimum relative multiplier change per step
_SNAP = 1e-13            # multipliers this close to the box edge snap onto it


class KernelKind(str, Enum):
    LINEAR = "linear"
    RBF = "rbf"


@dataclass(frozen=True)
class KernelSpec:
    """Kernel selection. gamma=None means "scale": 1 / (dim * variance of
    all training feature entries), resolved when training starts."""
    kind: KernelKind = KernelKind.RBF
    gamma: Optional[float] = None

    def validate(self) -> None:
        if self.kind == KernelKind.RBF and self.gamma is not None and self.gamma <= 0:
            raise DataError(f"gamma must be positive, got {self.gamma}")


@dataclass(frozen=True)
class SvmConfig:
    C: float = 1.0
    kernel: KernelSpec = field(default_factory=KernelSpec)
    tol: float = 1e-3
    max_passes: int = 10_000
    seed: int = 0
    # Optional per-class upper-bound multipliers: effective C for an example
    # of class y is C * class_c_scale[y]. Default is no weighting.
    class_c_scale: Optional[dict[Severity, float]] = None

    def validate(self) -> None:
        if self.C <= 0:
            raise DataError(f"C must be positive, got {self.C}")
        if self.tol <= 0:
            raise DataError(f"tol must be positive, got {self.tol}")
        self.kernel.validate()


@dataclass(frozen=True)
class SvmModel:
    support_vectors: list[FeatureVector]
    dual_coefs: np.ndarray          # alpha_i * y_i, nonzero
    bias: float
    kernel: KernelSpec              # gamma resolved to a number
    C: float
    # positions of the support vectors in the training set; in-memory only,
    # not persisted (empty after loading from file)
    sv_indices: np.ndarray = field(default_factory=lambda: np.array([], dtype=np.intp))

    @property
    def dim(self) -> int:
        return self.support_vectors[0].dim if self.support_vectors else 0


def resolve_gamma(kernel: KernelSpec, X: np.ndarray) -> float:
    if kernel.gamma is not None:
        return kernel.gamma
    var = float(X.var())
    return 1.0 / (X.shape[1] * var) if var > 0 else 1.0 / X.shape[1]


def _kernel_matrix(kind: KernelKind, gamma: float, A: np.ndarray,
                   B: Optional[np.ndarray] = None) -> np.ndarray:
    if B is None:
        B = A
    if kind == KernelKind.LINEAR:
        return A @ B.T
    sq = (np.sum(A * A, axis=1)[:, None] + np.sum(B * B, axis=1)[None, :]
          - 2.0 * (A @ B.T))
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


class _Smo:
    """State for one SMO run over a precomputed kernel matrix."""

    def __init__(self, K: np.ndarray, y: np.ndarray, caps: np.ndarray,
                 tol: float, rng: np.random.Generator):
        self.K = K
        self.y = y
        self.caps = caps
        self.tol = tol
        self.rng = rng
        n = len(y)
        self.alpha = np.zeros(n)
        self.b = 0.0
        self.E = -y.astype(float)   # decision values start at zero
        self.n = n

    def _take_step(self, i1: int, i2: int) -> bool:
        if i1 == i2:
            return False
        a1o, a2o = self.alpha[i1], self.alpha[i2]
        y1, y2 = self.y[i1], self.y[i2]
        E1, E2 = self.E[i1], self.E[i2]
        s = y1 * y2
        C1, C2 = self.caps[i1], self.caps[i2]
        if s > 0:
            L, H = max(0.0, a1o + a2o - C1), min(C2, a1o + a2o)
        else:
            L, H = max(0.0, a2o - a1o), min(C2, C1 + a2o - a1o)
        if L >= H:
            return False
        k11, k12, k22 = self.K[i1, i1], self.K[i1, i2], self.K[i2, i2]
        eta = k11 + k22 - 2.0 * k12
        if eta > 0:
            a2 = a2o + y2 * (E1 - E2) / eta
            a2 = min(max(a2, L), H)
        else:
            # Flat direction: move to whichever box end improves the dual
            # objective. Improvement is computed exactly from the current
            # decision values.
            gain_L = self._pair_gain(i1, i2, L)
            gain_H = self._pair_gain(i1, i2, H)
            if gain_L > gain_H + _STEP_EPS:
                a2 = L
            elif gain_H > gain_L + _STEP_EPS:
                a2 = H
            else:
                return False
        if abs(a2 - a2o) < _STEP_EPS * (a2 + a2o + _STEP_EPS):
            return False
        # snap float dust onto the box edges so at-bound multipliers are
        # exactly 0 or C (dusty values would later read as free violators)
        snap2 = _SNAP * max(1.0, C2)
        if a2 < snap2:
            a2 = 0.0
        elif a2 > C2 - snap2:
            a2 = C2
        a1 = a1o + s * (a2o - a2)
        snap1 = _SNAP * max(1.0, C1)
        if a1 < snap1:
            a1 = 0.0
        elif a1 > C1 - snap1:
            a1 = C1
        d1, d2 = a1 - a1o, a2 - a2o
        b1 = self.b - E1 - y1 * d1 * k11 - y2 * d2 * k12
        b2 = self.b - E2 - y1 * d1 * k12 - y2 * d2 * k22
        if 0.0 < a1 < C1:
            b_new = b1
        elif 0.0 < a2 < C2:
            b_new = b2
        else:
            b_new = 0.5 * (b1 + b2)
        self.E += y1 * d1 * self.K[i1] + y2 * d2 * self.K[i2] + (b_new - self.b)
        self.alpha[i1], self.alpha[i2] = a1, a2
        self.b = b_new
        return True

    def _pair_gain(self, i1: int, i2: int, a2: float) -> float:
        """Exact dual-objective change if alpha[i2] moves to a2 (and
        alpha[i1] follows the equality constraint)."""
        a1o, a2o = self.alpha[i1], self.alpha[i2]
        y1, y2 = self.y[i1], self.y[i2]
        s = y1 * y2
        d2 = a2 - a2o
        d1 = -s * d2
        g1 = self.E[i1] + self.y[i1] - self.b   # sum_j alpha_j y_j K_1j
        g2 = self.E[i2] + self.y[i2] - self.b
        quad = (d1 * d1 * self.K[i1, i1] + d2 * d2 * self.K[i2, i2]
                + 2.0 * s * d1 * d2 * self.K[i1, i2])
        return (d1 + d2) - (y1 * d1 * g1 + y2 * d2 * g2) - 0.5 * quad

    def _examine(self, i2: int) -> bool:
        y2, a2, E2 = self.y[i2], self.alpha[i2], self.E[i2]
        r2 = E2 * y2
        if not ((r2 < -self.tol and a2 < self.caps[i2])
                or (r2 > self.tol and a2 > 0.0)):
            return False
        # second-choice hierarchy: largest error gap among non-bound
        # examples first, then seeded-random orders over non-bound and all
        non_bound = np.flatnonzero((self.alpha > 0.0) & (self.alpha < self.caps))
        if len(non_bound) > 0:
            best = non_bound[int(np.argmax(np.abs(self.E[non_bound] - E2)))]
            if self._take_step(int(best), i2):
                return True
            for i1 in self.rng.permutation(non_bound):
                if self._take_step(int(i1), i2):
                    return True
        for i1 in self.rng.permutation(self.n):
            if self._take_step(int(i1), i2):
                return True
        return False

    def _max_violation(self) -> float:
        """Largest KKT violation, mirroring the _examine criterion."""
        r = self.E * self.y
        lower = np.where(self.alpha < self.caps, -r, -np.inf)
        upper = np.where(self.alpha > 0.0, r, -np.inf)
        return max(0.0, float(np.maximum(lower, upper).max()))

    def _gap_state(self) -> tuple[float, int, int, float]:
        """Maximal-violating-pair summary from the cached errors.

        Points whose multiplier can still grow in the +1 direction form the
        "up" set, the mirror image forms the "low" set; the spread between
        the extreme errors of the two sets bounds every per-point KKT
        violation once the bias is centered between them. Returns
        (gap, up_index, low_index, bias_shift_to_center).
        """
        up = ((self.y > 0) & (self.alpha < self.caps)) | ((self.y < 0) & (self.alpha > 0))
        low = ((self.y < 0) & (self.alpha < self.caps)) | ((self.y > 0) & (self.alpha > 0))
        neg_e = -self.E
        m = float(neg_e[up].max()) if up.any() else -np.inf
        mm = float(neg_e[low].min()) if low.any() else np.inf
        i = int(np.flatnonzero(up)[np.argmax(neg_e[up])]) if up.any() else -1
        j = int(np.flatnonzero(low)[np.argmin(neg_e[low])]) if low.any() else -1
        if not up.any():
            shift = mm
        elif not low.any():
            shift = m
        else:
            shift = 0.5 * (m + mm)
        gap = m - mm
        return gap, i, j, shift

    def solve(self, max_passes: int) -> None:
        """Iterate two-variable updates on the maximal violating pair until
        the pairwise gap certifies every KKT condition within tol.

        The budget is max_passes * n pair updates. When the extreme pair
        cannot move (degenerate geometry), the seeded random second-choice
        hierarchy takes over for that round.
        """
        budget = max_passes * max(1, self.n)
        for _ in range(budget):
            gap, i, j, shift = self._gap_state()
            if shift != 0.0 and np.isfinite(shift):
                self.b += shift
                self.E += shift
            if gap <= 2.0 * self.tol:
                # confirm against exactly recomputed errors before exiting
                self.E = self.K @ (self.alpha * self.y) + self.b - self.y
                gap, i, j, shift = self._gap_state()
                if np.isfinite(shift) and shift != 0.0:
                    self.b += shift
                    self.E += shift
                if gap <= 2.0 * self.tol:
                    return
            if i >= 0 and j >= 0 and self._take_step(i, j):
                continue
            if j >= 0 and self._examine(j):
                continue
            if i >= 0 and self._examine(i):
                continue
            raise ConvergenceError(
                "SMO stalled: no pair can improve the dual objective "
                f"(remaining KKT gap {gap:.3g}, tol {self.tol:g})")
        raise ConvergenceError(
            f"SMO exceeded its budget of {max_passes} passes (tol={self.tol})")


def _midpoint_bias(K: np.ndarray, y: np.ndarray, alpha: np.ndarray,
                   caps: np.ndarray, fallback: float) -> float:
    """Bias when no free support vector pins it exactly.

    Every example then bounds the bias from one side (alpha=0 wants margin
    >= 1, alpha=C wants margin <= 1); the midpoint of the feasible interval
    is returned, or the solver's own bias when the interval degenerates.
    """
    g = K @ (alpha * y)
    lo, hi = -np.inf, np.inf
    for i in range(len(y)):
        v = y[i] - g[i]
        at_cap = alpha[i] >= caps[i] - _SV_EPS
        if (y[i] > 0) != at_cap:    # (+1, alpha=0) or (-1, alpha=C)
            lo = max(lo, v)
        else:
            hi = min(hi, v)
    if np.isfinite(lo) and np.isfinite(hi) and lo <= hi:
        return 0.5 * (lo + hi)
    return fallback


def severity_to_sign(label: Severity) -> int:
    return 1 if label == Severity.HIGH else -1


def train_svm(train: Sequence[tuple[FeatureVector, Severity]],
              config: SvmConfig) -> SvmModel:
    """Solve the soft-margin dual with SMO and return the support-vector
    expansion. Same inputs and seed always give the same model."""
    config.validate()
    if not train:
        raise DataError("empty training set")
    X = to_matrix([fv for fv, _ in train])
    if not np.isfinite(X).all():
        raise DataError("training features contain non-finite values")
    y = np.array([severity_to_sign(label) for _, label in train], dtype=float)
    if len(set(y)) < 2:
        raise DataError("training set contains a single class")
    gamma = resolve_gamma(config.kernel, X)
    kernel = KernelSpec(config.kernel.kind, gamma)
    K = _kernel_matrix(kernel.kind, gamma, X)
    caps = np.full(len(y), config.C)
    if config.class_c_scale:
        for i, (_, label) in enumerate(train):
            caps[i] = config.C * config.class_c_scale.get(label, 1.0)
    smo = _Smo(K, y, caps, config.tol, np.random.default_rng(config.seed))
    smo.solve(config.max_passes)
    free = (smo.alpha > _SV_EPS) & (smo.alpha < caps - _SV_EPS)
    bias = smo.b if free.any() else _midpoint_bias(K, y, smo.alpha, caps, smo.b)
    keep = np.flatnonzero(smo.alpha > _SV_EPS)
    svs = [train[int(i)][0] for i in keep]
    coef = smo.alpha[keep] * y[keep]
    return SvmModel(support_vectors=svs, dual_coefs=coef, bias=bias,
                    kernel=kernel, C=config.C, sv_indices=keep.astype(np.intp))


def dual_objective(train: Sequence[tuple[FeatureVector, Severity]],
                   alpha: np.ndarray, kernel: KernelSpec) -> float:
    """Soft-margin dual objective sum(alpha) - 0.5 a^T (yy^T * K) a."""
    X = to_matrix([fv for fv, _ in train])
    y = np.array([severity_to_sign(label) for _, label in train], dtype=float)
    gamma = resolve_gamma(kernel, X)
    K = _kernel_matrix(kernel.kind, gamma, X)
    v = alpha * y
    return float(alpha.sum() - 0.5 * v @ K @ v)


def training_alphas(model: SvmModel, n_train: int) -> np.ndarray:
    """Expand a freshly trained model's multipliers onto training positions."""
    if len(model.sv_indices) != len(model.support_vectors):
        raise DataError("model has no training indices (loaded from file?)")
    alpha = np.zeros(n_train)
    alpha[model.sv_indices] = np.abs(model.dual_coefs)
    return alpha


def decision_score(model: SvmModel, x: FeatureVector) -> float:
    """sum_i dual_coef_i K(sv_i, x) + bias."""
    if model.support_vectors and x.dim != model.dim:
        raise DataError(f"dimension mismatch: model {model.dim}, input {x.dim}")
    if not model.support_vectors:
        return model.bias
    S = to_matrix(model.support_vectors)
    gamma = model.kernel.gamma if model.kernel.gamma is not None else 1.0
    k = _kernel_matrix(model.kernel.kind, gamma, S, x.to_dense()[None, :])[:, 0]
    return float(model.dual_coefs @ k + model.bias)


def decision_scores(model: SvmModel, xs: Sequence[FeatureVector]) -> np.ndarray:
    if not xs:
        return np.zeros(0)
    if not model.support_vectors:
        return np.full(len(xs), model.bias)
    S = to_matrix(model.support_vectors)
    X = to_matrix(list(xs))
    gamma = model.kernel.gamma if model.kernel.gamma is not None else 1.0
    k = _kernel_matrix(model.kernel.kind, gamma, X, S)
    return k @ model.dual_coefs + model.bias


def classify(score: float) -> Severity:
    """score > 0 -> HIGH; ties (score == 0) break LOW."""
    return Severity.HIGH if score > 0 else Severity.LOW


def _positive_f1(pred: Sequence[Severity], truth: Sequence[Severity]) -> float:
    tp = sum(1 for p, t in zip(pred, truth)
             if p == Severity.HIGH and t == Severity.HIGH)
    fp = sum(1 for p, t in zip(pred, truth)
             if p == Severity.HIGH and t == Severity.LOW)
    fn = sum(1 for p, t in zip(pred, truth)
             if p == Severity.LOW and t == Severity.HIGH)
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


@dataclass(frozen=True)
class GridPoint:
    C: float
    f1: Optional[float]
    error: str = ""


def tune_c(train: Sequence[tuple[FeatureVector, Severity]],
           val: Sequence[tuple[FeatureVector, Severity]],
           grid: Sequence[float] = DEFAULT_C_GRID,
           kernel: KernelSpec = KernelSpec(),
           tol: float = 1e-3, max_passes: int = 10_000,
           seed: int = 0) -> tuple[float, list[GridPoint]]:
    """Train one model per C and pick the best positive-class F1 on the
    validation set; ties go to the smaller C. A grid point that fails to
    train is skipped and recorded, as long as at least one succeeds."""
    if not grid:
        raise DataError("empty C grid")
    truth = [label for _, label in val]
    table: list[GridPoint] = []
    for C in grid:
        cfg = SvmConfig(C=C, kernel=kernel, tol=tol, max_passes=max_passes, seed=seed)
        try:
            model = train_svm(train, cfg)
            scores = decision_scores(model, [fv for fv, _ in val])
            f1 = _positive_f1([classify(s) for s in scores], truth)
            table.append(GridPoint(C=C, f1=f1))
        except (DataError, ConvergenceError) as exc:
            table.append(GridPoint(C=C, f1=None, error=str(exc)))
    ok = [p for p in table if p.f1 is not None]
    if not ok:
        raise ConvergenceError(
            "every C grid point failed: " + "; ".join(p.error for p in table))
    best = max(ok, key=lambda p: (p.f1, -p.C))
    return best.C, table


# --- persistence -----------------------------------------------------------

def write_svm(model: SvmModel, fh: TextIO) -> None:
    fh.write("svmv1\n")
    fh.write(f"kernel {model.kernel.kind.value}\n")
    fh.write(f"gamma {model.kernel.gamma:.17g}\n" if model.kernel.gamma is not None
             else "gamma -\n")
    fh.write(f"C {model.C:.17g}\n")
    fh.write(f"bias {model.bias:.17g}\n")
    fh.write(f"dim {model.dim}\n")
    fh.write(f"n_sv {len(model.support_vectors)}\n")
    for coef, sv in zip(model.dual_coefs, model.support_vectors):
        cells = " ".join(f"{int(i)}:{v:.17g}" for i, v in zip(sv.indices, sv.values))
        fh.write(f"sv {coef:.17g} {cells}".rstrip() + "\n")


def read_svm(fh: TextIO) -> SvmModel:
    def next_line():
        line = fh.readline()
        if not line:
            raise DataError("truncated SVM model file")
        return line.rstrip("\n")

    def field_of(line: str, key: str) -> str:
        parts = line.split(" ", 1)
        if len(parts) != 2 or parts[0] != key:
            raise DataError(f"SVM model: expected '{key} ...', got {line!r}")
        return parts[1]

    if next_line() != "svmv1":
        raise DataError("not an SVM model file (bad magic)")
    kind = KernelKind(field_of(next_line(), "kernel"))
    gamma_s = field_of(next_line(), "gamma")
    gamma = None if gamma_s == "-" else float(gamma_s)
    C = float(field_of(next_line(), "C"))
    bias = float(field_of(next_line(), "bias"))
    dim = int(field_of(next_line(), "dim"))
    n_sv = int(field_of(next_line(), "n_sv"))
    coefs = np.zeros(n_sv)
    svs: list[FeatureVector] = []
    for i in range(n_sv):
        parts = field_of(next_line(), "sv").split()
        coefs[i] = float(parts[0])
        idx, vals = [], []
        for cell in parts[1:]:
            k, _, v = cell.partition(":")
            idx.append(int(k))
            vals.append(float(v))
        svs.append(FeatureVector(np.array(idx, dtype=np.intp), np.array(vals), dim))
    return SvmModel(support_vectors=svs, dual_coefs=coefs, bias=bias,
                    kernel=KernelSpec(kind, gamma), C=C)
