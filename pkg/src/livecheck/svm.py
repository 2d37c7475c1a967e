"""Binary RBF-kernel support vector machine trained in the dual with SMO.

The solver sweeps the training set looking for Karush-Kuhn-Tucker
violations and optimizes one pair of dual variables at a time, which
keeps the equality constraint sum(alpha_i * y_i) = 0 intact by
construction.  A cache of decision values is updated incrementally
after every successful step.  The partner variable is chosen by the
largest error gap first, then by seeded random probing, so training is
fully reproducible for a given seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SvmParams",
    "SvmModel",
    "SmoDiagnostics",
    "rbf_kernel",
    "rbf_gram",
    "train_smo",
    "decision_score",
    "decision_scores",
    "predict",
]

_MAX_SWEEPS = 10_000
_STEP_EPS = 1e-7
_SV_EPS = 1e-12


@dataclass(frozen=True)
class SvmParams:
    """Training knobs: soft margin C, kernel width gamma, stopping rule."""

    C: float = 10.0
    gamma: float = 0.1
    tol: float = 1e-3
    max_passes: int = 10

    def __post_init__(self):
        if self.C <= 0.0:
            raise ValueError(f"C must be positive, got {self.C}")
        if self.gamma <= 0.0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.tol <= 0.0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_passes < 1:
            raise ValueError(f"max_passes must be positive, got {self.max_passes}")


@dataclass
class SvmModel:
    """Kernel expansion: support vectors, their signed weights, and a bias."""

    support_vectors: np.ndarray
    dual_coefs: np.ndarray  # alpha_i * y_i per support vector
    bias: float
    gamma: float


@dataclass
class SmoDiagnostics:
    """Solver internals exposed for inspection and testing."""

    alphas: np.ndarray
    dual_objectives: list[float] = field(default_factory=list)
    sweeps: int = 0


def rbf_kernel(a: np.ndarray, b: np.ndarray, gamma: float) -> float:
    """exp(-gamma * squared euclidean distance) between two vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or a.shape != b.shape:
        raise ValueError(f"expected equal-length vectors, got {a.shape} and {b.shape}")
    diff = a - b
    return float(np.exp(-gamma * (diff @ diff)))


def rbf_gram(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    """Kernel matrix between the rows of two sample matrices."""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    sq = (A**2).sum(axis=1)[:, None] + (B**2).sum(axis=1)[None, :] - 2.0 * (A @ B.T)
    return np.exp(-gamma * np.maximum(sq, 0.0))


class _SmoSolver:
    def __init__(self, X, y, params: SvmParams, seed: int):
        self.X = X
        self.y = y
        self.params = params
        self.rng = np.random.default_rng(seed)
        self.K = rbf_gram(X, X, params.gamma)
        self.n = len(y)
        self.alphas = np.zeros(self.n)
        self.bias = 0.0
        # Decision values f(x_i); with all alphas and bias at zero the
        # cache starts at zero and is kept exact incrementally.
        self.F = np.zeros(self.n)

    def _take_step(self, i: int, j: int) -> bool:
        if i == j:
            return False
        C = self.params.C
        a1, a2 = self.alphas[i], self.alphas[j]
        y1, y2 = self.y[i], self.y[j]
        E1 = self.F[i] - y1
        E2 = self.F[j] - y2

        if y1 == y2:
            low, high = max(0.0, a1 + a2 - C), min(C, a1 + a2)
        else:
            low, high = max(0.0, a2 - a1), min(C, C + a2 - a1)
        if low >= high:
            return False

        eta = self.K[i, i] + self.K[j, j] - 2.0 * self.K[i, j]
        if eta <= 0.0:
            return False  # coincident points; no curvature along this pair
        a2_new = np.clip(a2 + y2 * (E1 - E2) / eta, low, high)
        if abs(a2_new - a2) < _STEP_EPS * (a2_new + a2 + _STEP_EPS):
            return False
        a1_new = np.clip(a1 + y1 * y2 * (a2 - a2_new), 0.0, C)

        d1 = y1 * (a1_new - a1)
        d2 = y2 * (a2_new - a2)
        b1 = self.bias - E1 - d1 * self.K[i, i] - d2 * self.K[i, j]
        b2 = self.bias - E2 - d1 * self.K[i, j] - d2 * self.K[j, j]
        if 0.0 < a1_new < C:
            new_bias = b1
        elif 0.0 < a2_new < C:
            new_bias = b2
        else:
            new_bias = (b1 + b2) / 2.0

        self.F += d1 * self.K[i] + d2 * self.K[j] + (new_bias - self.bias)
        self.alphas[i], self.alphas[j] = a1_new, a2_new
        self.bias = new_bias
        return True

    def _examine(self, i: int) -> bool:
        E_i = self.F[i] - self.y[i]
        r = self.y[i] * E_i
        tol, C = self.params.tol, self.params.C
        if not ((r < -tol and self.alphas[i] < C) or (r > tol and self.alphas[i] > 0.0)):
            return False
        # Second choice: the partner with the largest error gap makes
        # the biggest unconstrained step.
        errors = self.F - self.y
        j = int(np.argmax(np.abs(errors - E_i)))
        if self._take_step(i, j):
            return True
        for j in self.rng.permutation(self.n):
            if j != i and self._take_step(i, int(j)):
                return True
        return False

    def dual_objective(self) -> float:
        ay = self.alphas * self.y
        return float(self.alphas.sum() - 0.5 * (ay @ self.K @ ay))

    def solve(self, collect_objectives: bool = False) -> SmoDiagnostics:
        diag = SmoDiagnostics(alphas=self.alphas)
        quiet_passes = 0
        while quiet_passes < self.params.max_passes and diag.sweeps < _MAX_SWEEPS:
            changed = sum(self._examine(i) for i in range(self.n))
            diag.sweeps += 1
            if collect_objectives:
                diag.dual_objectives.append(self.dual_objective())
            quiet_passes = 0 if changed else quiet_passes + 1
        self._finalize_bias()
        diag.alphas = self.alphas.copy()
        return diag

    def _finalize_bias(self):
        # Average the exact bias over unbounded support vectors; they
        # sit on the margin, so each gives an independent estimate.
        C = self.params.C
        slack = 1e-8 * max(1.0, C)
        unbounded = (self.alphas > slack) & (self.alphas < C - slack)
        if unbounded.any():
            ay = self.alphas * self.y
            residual = self.y[unbounded] - ay @ self.K[:, unbounded]
            new_bias = float(residual.mean())
            self.F += new_bias - self.bias
            self.bias = new_bias


def train_smo(
    X: np.ndarray,
    y: np.ndarray,
    params: SvmParams,
    seed: int = 0,
    collect_diagnostics: bool = False,
) -> tuple[SvmModel, SmoDiagnostics | None]:
    """Train an RBF-SVM on labels in {-1, +1}.

    Returns the fitted model and, when ``collect_diagnostics`` is set,
    the final dual variables plus the per-sweep dual objective curve.
    Training data must contain both classes and only finite values.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError(f"inconsistent training data: X {X.shape}, y {y.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("training features contain non-finite values")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be -1 or +1")
    if np.unique(y).size < 2:
        raise ValueError("training data contains a single class")

    solver = _SmoSolver(X, y, params, seed)
    diag = solver.solve(collect_objectives=collect_diagnostics)

    keep = solver.alphas > _SV_EPS
    model = SvmModel(
        support_vectors=X[keep].copy(),
        dual_coefs=(solver.alphas * y)[keep].copy(),
        bias=solver.bias,
        gamma=params.gamma,
    )
    return model, (diag if collect_diagnostics else None)


def decision_score(model: SvmModel, x: np.ndarray) -> float:
    """Real-valued margin of one sample; positive means the +1 class."""
    return float(decision_scores(model, np.asarray(x, dtype=np.float64)[None])[0])


def decision_scores(model: SvmModel, X: np.ndarray) -> np.ndarray:
    """Margins for a matrix of row samples."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.support_vectors.shape[1]:
        raise ValueError(
            f"expected {model.support_vectors.shape[1]} features, got {X.shape[1]}"
        )
    gram = rbf_gram(X, model.support_vectors, model.gamma)
    return gram @ model.dual_coefs + model.bias


def predict(model: SvmModel, x: np.ndarray) -> float:
    """Hard label in {-1, +1}; a score of exactly zero maps to +1."""
    return 1.0 if decision_score(model, x) >= 0.0 else -1.0
