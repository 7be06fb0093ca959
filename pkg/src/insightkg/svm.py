"""Binary soft-margin kernel SVM trained by sequential minimal optimization.

The dual problem is

    max  sum(alpha) - 1/2 * alpha' Q alpha,   Q_ij = y_i y_j K(x_i, x_j)
    s.t. 0 <= alpha_i <= C,  sum(alpha_i y_i) = 0.

Each iteration picks the maximal-violating pair: i with the largest violation
score among points allowed to move up, j with the smallest among points
allowed to move down, and takes the analytic step along the equality
constraint, clipped to the box. Convergence is declared when the violation
gap m - M drops to the tolerance; the gap doubles as the reported KKT
violation.

The decision function convention is f(x) = sum(alpha_i y_i K(x_i, x)) + b,
so for a free support vector b equals its violation score.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument

DEFAULT_TOL = 1e-3
DEFAULT_MAX_ITER = 100_000
_ETA_FLOOR = 1e-12
_SNAP = 1e-12


def linear_kernel(X: np.ndarray, Z: np.ndarray) -> np.ndarray:
    return X @ Z.T


def rbf_kernel(X: np.ndarray, Z: np.ndarray, gamma: float) -> np.ndarray:
    sq = (X * X).sum(axis=1)[:, None] + (Z * Z).sum(axis=1)[None, :] - 2.0 * (X @ Z.T)
    np.maximum(sq, 0.0, out=sq)  # cancellation can leave tiny negatives
    return np.exp(-gamma * sq)


@dataclass(frozen=True)
class KernelSpec:
    """Kernel selection: "linear", or "rbf" with gamma > 0."""

    name: str
    gamma: float | None = None

    def __post_init__(self):
        if self.name == "linear":
            if self.gamma is not None:
                raise InvalidArgument("linear kernel takes no gamma")
        elif self.name == "rbf":
            if self.gamma is None or self.gamma <= 0:
                raise InvalidArgument("rbf kernel requires gamma > 0")
        else:
            raise InvalidArgument(f"unknown kernel: {self.name!r}")

    def matrix(self, X: np.ndarray, Z: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        Z = np.asarray(Z, dtype=np.float64)
        if self.name == "linear":
            return linear_kernel(X, Z)
        return rbf_kernel(X, Z, float(self.gamma))

    def to_dict(self) -> dict:
        out: dict = {"name": self.name}
        if self.gamma is not None:
            out["gamma"] = self.gamma
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "KernelSpec":
        return cls(obj["name"], obj.get("gamma"))


@dataclass
class SmoResult:
    alpha: np.ndarray
    bias: float
    iterations: int
    converged: bool
    kkt_violation: float


def dual_objective(alpha: np.ndarray, y: np.ndarray, K: np.ndarray) -> float:
    """Value being maximized; solver and any reference solver must agree on it."""
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


def _violation_scores(grad: np.ndarray, y: np.ndarray) -> np.ndarray:
    return -y * grad


def _masks(alpha: np.ndarray, y: np.ndarray, C: float) -> tuple[np.ndarray, np.ndarray]:
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    low = ((y < 0) & (alpha < C)) | ((y > 0) & (alpha > 0))
    return up, low


def smo_solve(
    K: np.ndarray,
    y: np.ndarray,
    C: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> SmoResult:
    """Solve the dual on a precomputed kernel matrix.

    K must be the symmetric train-by-train Gram matrix and y a vector of
    +1/-1 labels with both classes present.
    """
    K = np.asarray(K, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = y.shape[0]
    if K.shape != (n, n):
        raise InvalidArgument(f"kernel matrix shape {K.shape} does not match {n} labels")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise InvalidArgument("labels must be +1/-1")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise InvalidArgument("training data must contain both classes")
    if C <= 0:
        raise InvalidArgument("C must be positive")

    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of the minimization form at alpha = 0
    iterations = 0

    for iterations in range(1, max_iter + 1):
        g = _violation_scores(grad, y)
        up, low = _masks(alpha, y, C)
        g_up = np.where(up, g, -np.inf)
        g_low = np.where(low, g, np.inf)
        i = int(np.argmax(g_up))
        j = int(np.argmin(g_low))
        gap = g_up[i] - g_low[j]
        if gap <= tol:
            iterations -= 1  # this pass did no update
            break

        eta = max(K[i, i] + K[j, j] - 2.0 * K[i, j], _ETA_FLOOR)
        room_i = C - alpha[i] if y[i] > 0 else alpha[i]
        room_j = alpha[j] if y[j] > 0 else C - alpha[j]
        delta = min(gap / eta, room_i, room_j)
        if delta <= 0.0:
            break  # box room exhausted to rounding; cannot make progress

        alpha[i] += y[i] * delta
        alpha[j] -= y[j] * delta
        for t in (i, j):
            if alpha[t] < _SNAP:
                alpha[t] = 0.0
            elif alpha[t] > C - _SNAP:
                alpha[t] = C
        grad += delta * y * (K[:, i] - K[:, j])

    g = _violation_scores(grad, y)
    up, low = _masks(alpha, y, C)
    free = (alpha > 0) & (alpha < C)
    if np.any(free):
        bias = float(g[free].mean())
    else:
        # No free vectors: any value between the two bounds satisfies KKT.
        m = float(g[up].max()) if np.any(up) else None
        M = float(g[low].min()) if np.any(low) else None
        if m is not None and M is not None:
            bias = (m + M) / 2.0
        else:
            bias = m if m is not None else (M if M is not None else 0.0)

    if np.any(up) and np.any(low):
        gap = float(np.max(np.where(up, g, -np.inf)) - np.min(np.where(low, g, np.inf)))
    else:
        gap = 0.0
    return SmoResult(
        alpha=alpha,
        bias=bias,
        iterations=iterations,
        converged=gap <= tol,
        kkt_violation=max(0.0, gap),
    )


class BinarySvm:
    """One trained binary machine; keeps only the support vectors."""

    def __init__(self, kernel: KernelSpec, C: float):
        if C <= 0:
            raise InvalidArgument("C must be positive")
        self.kernel = kernel
        self.C = C
        self.support_vectors = np.zeros((0, 0))
        self.dual_coef = np.zeros(0)  # alpha_i * y_i for support vectors
        self.bias = 0.0
        self.converged = True
        self.kkt_violation = 0.0
        self.iterations = 0

    def fit(
        self,
        X: np.ndarray,
        y: np.ndarray,
        tol: float = DEFAULT_TOL,
        max_iter: int = DEFAULT_MAX_ITER,
    ) -> "BinarySvm":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        result = smo_solve(self.kernel.matrix(X, X), y, self.C, tol=tol, max_iter=max_iter)
        keep = result.alpha > 0
        self.support_vectors = X[keep]
        self.dual_coef = result.alpha[keep] * y[keep]
        self.bias = result.bias
        self.converged = result.converged
        self.kkt_violation = result.kkt_violation
        self.iterations = result.iterations
        return self

    def decision(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if self.support_vectors.shape[0] == 0:
            return np.full(X.shape[0], self.bias)
        return self.kernel.matrix(X, self.support_vectors) @ self.dual_coef + self.bias

    def to_dict(self) -> dict:
        return {
            "kernel": self.kernel.to_dict(),
            "C": self.C,
            "support_vectors": self.support_vectors.tolist(),
            "dual_coef": self.dual_coef.tolist(),
            "bias": self.bias,
            "converged": self.converged,
            "kkt_violation": self.kkt_violation,
            "iterations": self.iterations,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "BinarySvm":
        machine = cls(KernelSpec.from_dict(obj["kernel"]), float(obj["C"]))
        machine.support_vectors = np.asarray(obj["support_vectors"], dtype=np.float64)
        if machine.support_vectors.ndim == 1:  # empty list round-trips as 1-D
            machine.support_vectors = machine.support_vectors.reshape(0, 0)
        machine.dual_coef = np.asarray(obj["dual_coef"], dtype=np.float64)
        machine.bias = float(obj["bias"])
        machine.converged = bool(obj["converged"])
        machine.kkt_violation = float(obj["kkt_violation"])
        machine.iterations = int(obj["iterations"])
        return machine


def kkt_report(
    alpha: np.ndarray,
    bias: float,
    y: np.ndarray,
    K: np.ndarray,
    C: float,
    tol: float = DEFAULT_TOL,
) -> dict:
    """Check the complementarity conditions on the training set.

    Margins are y_i * f(x_i) with f built from the full alpha vector:
    alpha = 0 demands margin >= 1 - tol, free vectors demand |margin - 1|
    <= tol, and alpha = C demands margin <= 1 + tol.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    f = K @ (alpha * y) + bias
    margins = y * f
    zero = alpha <= 0
    upper = alpha >= C
    free = ~zero & ~upper
    violations = np.zeros_like(alpha)
    violations[zero] = np.maximum(0.0, (1.0 - tol) - margins[zero])
    violations[free] = np.maximum(0.0, np.abs(margins[free] - 1.0) - tol)
    violations[upper] = np.maximum(0.0, margins[upper] - (1.0 + tol))
    worst = float(violations.max()) if violations.size else 0.0
    return {
        "max_violation": worst,
        "satisfied": bool(worst <= 0.0),
        "equality_residual": float(abs(np.dot(alpha, y))),
        "box_ok": bool(np.all((alpha >= 0) & (alpha <= C))),
    }
