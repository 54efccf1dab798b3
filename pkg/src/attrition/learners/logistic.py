"""L2-regularised logistic regression fitted by damped Newton steps."""
import numpy as np
from scipy.special import expit

from .base import FittedModel, check_training_data, warn_not_converged


def logistic_loss_grad(w, b, X, y, C):
    """Objective 0.5*|w|^2 + C * sum(log(1 + exp(-s * f))) with s = 2y - 1, f = Xw + b.

    The bias is not penalised. Returns ``(loss, grad)`` with ``grad`` laid out
    as ``[d loss/d w..., d loss/d b]``.
    """
    w = np.asarray(w, dtype=np.float64)
    s = 2.0 * np.asarray(y, dtype=np.float64) - 1.0
    f = X @ w + b
    z = -s * f
    loss = 0.5 * np.dot(w, w) + C * np.sum(np.logaddexp(0.0, z))
    r = -C * s * expit(z)
    grad = np.empty(len(w) + 1)
    grad[:-1] = w + X.T @ r
    grad[-1] = r.sum()
    return float(loss), grad


def _hessian(w, b, X, C):
    p = expit(X @ w + b)
    d = C * p * (1.0 - p)
    Xa = np.hstack([X, np.ones((len(X), 1))])
    H = Xa.T @ (Xa * d[:, None])
    H[np.arange(len(w)), np.arange(len(w))] += 1.0
    return H


class LogisticModel(FittedModel):
    variant = "LogisticRegression"
    link = "prob"

    def __init__(self, spec, n_features, seed, coef, intercept, converged=True, n_iter=0):
        super().__init__(spec, n_features, seed, converged)
        self.coef = np.asarray(coef, dtype=np.float64)
        self.intercept = float(intercept)
        self.n_iter = n_iter

    @classmethod
    def fit(cls, spec, X, y, seed=0):
        X, y = check_training_data(X, y)
        d = X.shape[1]
        theta = np.zeros(d + 1)
        loss, grad = logistic_loss_grad(theta[:-1], theta[-1], X, y, spec.C)
        converged = False
        it = 0
        for it in range(1, spec.max_iter + 1):
            if np.max(np.abs(grad)) <= spec.tol:
                converged = True
                break
            H = _hessian(theta[:-1], theta[-1], X, spec.C)
            step = -np.linalg.solve(H, grad)
            slope = float(grad @ step)
            t = 1.0
            # Armijo backtracking keeps every accepted step monotone
            while True:
                cand = theta + t * step
                c_loss, c_grad = logistic_loss_grad(cand[:-1], cand[-1], X, y, spec.C)
                if c_loss <= loss + 1e-4 * t * slope or t < 1e-12:
                    break
                t *= 0.5
            if c_loss > loss:
                converged = np.max(np.abs(grad)) <= spec.tol * 10
                break
            theta, loss, grad = cand, c_loss, c_grad
        else:
            converged = np.max(np.abs(grad)) <= spec.tol
        if not converged:
            warn_not_converged("logistic regression", spec.max_iter)
        return cls(spec, d, seed, theta[:-1], theta[-1], converged, it)

    def _scores(self, X):
        """Probability of class 1."""
        return expit(X @ self.coef + self.intercept)

    def parameters(self):
        return {"coef": self.coef.tolist(), "intercept": self.intercept, "n_iter": self.n_iter}

    @classmethod
    def from_parameters(cls, spec, params, n_features, seed, converged):
        return cls(spec, n_features, seed, params["coef"], params["intercept"], converged,
                   params.get("n_iter", 0))
