"""Soft-margin kernel SVM trained with SMO (maximal violating pair selection)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import FittedModel, check_training_data, warn_not_converged

TAU = 1e-12


def rbf_kernel(A, B, gamma: float) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
    return np.exp(-gamma * np.maximum(sq, 0.0))


def linear_kernel(A, B, gamma: float = 0.0) -> np.ndarray:
    return np.asarray(A, dtype=np.float64) @ np.asarray(B, dtype=np.float64).T


KERNELS = {"rbf": rbf_kernel, "linear": linear_kernel}


def scale_gamma(X) -> float:
    """gamma = 1 / (n_features * variance of all entries of X)."""
    X = np.asarray(X, dtype=np.float64)
    var = X.var()
    return 1.0 / (X.shape[1] * var) if var > 0 else 1.0


@dataclass
class SMOResult:
    alpha: np.ndarray
    bias: float
    n_iter: int
    converged: bool
    gap: float


def dual_objective(alpha, K, y) -> float:
    """W(alpha) = sum(alpha) - 0.5 * sum_ij alpha_i alpha_j y_i y_j K_ij (to be maximised)."""
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


def smo_solve(K, y, C: float, tol: float = 1e-3, max_iter: int = 1_000_000) -> SMOResult:
    """Solve the SVM dual for a precomputed kernel matrix and labels in {-1, +1}.

    Each step optimises the maximal violating pair analytically; the loop stops
    once max_{I_up} -y G - min_{I_low} -y G <= tol, where G = Q alpha - 1.
    """
    K = np.asarray(K, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    alpha = np.zeros(n)
    G = -np.ones(n)
    diagK = np.diag(K).copy()
    pos = y > 0
    gap = np.inf
    it = 0
    converged = False
    while it < max_iter:
        up = np.where(pos, alpha < C, alpha > 0)
        low = np.where(pos, alpha > 0, alpha < C)
        score = -y * G
        s_up = np.where(up, score, -np.inf)
        s_low = np.where(low, score, np.inf)
        i = int(np.argmax(s_up))
        j = int(np.argmin(s_low))
        gap = s_up[i] - s_low[j]
        if gap <= tol:
            converged = True
            break
        it += 1
        yi, yj = y[i], y[j]
        Kij = K[i, j]
        ai, aj = alpha[i], alpha[j]
        quad = diagK[i] + diagK[j] - 2.0 * Kij
        if quad <= 0:
            quad = TAU
        if yi != yj:
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ni, nj = ai + delta, aj + delta
            if diff > 0:
                if nj < 0:
                    nj, ni = 0.0, diff
            elif ni < 0:
                ni, nj = 0.0, -diff
            if diff > 0:
                if ni > C:
                    ni, nj = C, C - diff
            elif nj > C:
                nj, ni = C, C + diff
        else:
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            ni, nj = ai - delta, aj + delta
            if total > C:
                if ni > C:
                    ni, nj = C, total - C
            elif nj < 0:
                nj, ni = 0.0, total
            if total > C:
                if nj > C:
                    nj, ni = C, total - C
            elif ni < 0:
                ni, nj = 0.0, total
        dai, daj = ni - ai, nj - aj
        alpha[i], alpha[j] = ni, nj
        # G_k += Q_ki dai + Q_kj daj with Q_kl = y_k y_l K_kl
        G += y * (K[:, i] * (yi * dai) + K[:, j] * (yj * daj))
    bias = _bias(alpha, G, y, C)
    return SMOResult(alpha, bias, it, converged, float(gap))


def _bias(alpha, G, y, C) -> float:
    score = -y * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        return float(score[free].mean())
    pos = y > 0
    up = np.where(pos, alpha < C, alpha > 0)
    low = np.where(pos, alpha > 0, alpha < C)
    return float((score[up].max() + score[low].min()) / 2.0)


class SVMModel(FittedModel):
    variant = "SVM"
    link = "margin"

    def __init__(self, spec, n_features, seed, support, dual_coef, bias, gamma,
                 converged=True, n_iter=0):
        super().__init__(spec, n_features, seed, converged)
        self.support_vectors = np.asarray(support, dtype=np.float64).reshape(-1, n_features)
        self.dual_coef = np.asarray(dual_coef, dtype=np.float64)
        self.bias = float(bias)
        self.gamma = float(gamma)
        self.n_iter = n_iter

    @classmethod
    def fit(cls, spec, X, y, seed=0, return_solution=False):
        X, y = check_training_data(X, y)
        gamma = scale_gamma(X) if spec.gamma == "scale" else float(spec.gamma)
        kernel = KERNELS[spec.kernel]
        K = kernel(X, X, gamma)
        s = 2.0 * y - 1.0
        sol = smo_solve(K, s, spec.C, spec.tol, spec.max_iter)
        if not sol.converged:
            warn_not_converged("SMO", spec.max_iter)
        sv = sol.alpha > 0
        model = cls(spec, X.shape[1], seed, X[sv], sol.alpha[sv] * s[sv], sol.bias, gamma,
                    sol.converged, sol.n_iter)
        if return_solution:
            return model, sol, K
        return model

    def _scores(self, X):
        """Signed margin f(x) = sum_i alpha_i y_i k(sv_i, x) + b."""
        if len(self.dual_coef) == 0:
            return np.full(len(X), self.bias)
        K = KERNELS[self.spec.kernel](X, self.support_vectors, self.gamma)
        return K @ self.dual_coef + self.bias

    def parameters(self):
        return {"support_vectors": self.support_vectors.tolist(),
                "dual_coef": self.dual_coef.tolist(), "bias": self.bias,
                "gamma": self.gamma, "n_iter": self.n_iter}

    @classmethod
    def from_parameters(cls, spec, params, n_features, seed, converged):
        return cls(spec, n_features, seed, params["support_vectors"], params["dual_coef"],
                   params["bias"], params["gamma"], converged, params.get("n_iter", 0))
