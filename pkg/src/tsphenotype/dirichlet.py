"""Dirichlet density, mean/precision parametrisation and regression with Wald inference.

The regression models the mean composition with a reference-category
softmax (the multinomial realisation of a logit link) and a constant
precision phi = exp(log_phi):

    mu(x) = softmax(0, x b_2, ..., x b_K),   alpha(x) = phi * mu(x)
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import digamma, gammaln

from .errors import FitFailedError, InvalidInputError

SIGNIFICANCE_BANDS = ((0.001, "***"), (0.01, "**"), (0.05, "*"), (0.1, "+"))


@dataclass(frozen=True)
class DirichletParams:
    alpha: np.ndarray

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=np.float64).ravel()
        if alpha.size < 2 or np.any(~np.isfinite(alpha)) or np.any(alpha <= 0):
            raise InvalidInputError("alpha must hold at least two positive finite entries")
        object.__setattr__(self, "alpha", alpha)

    @classmethod
    def from_mean_precision(cls, mu, phi: float) -> "DirichletParams":
        mu = np.asarray(mu, dtype=np.float64)
        if phi <= 0:
            raise InvalidInputError(f"precision must be positive, got {phi}")
        if np.any(mu <= 0) or abs(mu.sum() - 1.0) > 1e-12:
            raise InvalidInputError("mean must be a strictly positive composition")
        return cls(phi * mu)

    @property
    def phi(self) -> float:
        return float(self.alpha.sum())

    @property
    def mu(self) -> np.ndarray:
        return self.alpha / self.alpha.sum()


@dataclass
class DirichletFit:
    beta: np.ndarray            # (K-1) x (q+1), column 0 is the intercept
    log_phi: float
    se: np.ndarray
    p_values: np.ndarray
    loglik: float
    converged: bool
    ref_category: int = 0
    se_log_phi: float = float("nan")
    p_log_phi: float = float("nan")
    covariate_names: list = field(default_factory=list)
    n_iter: int = 0
    grad_norm: float = float("nan")
    hessian_ok: bool = True

    @property
    def K(self) -> int:
        return self.beta.shape[0] + 1

    @property
    def q(self) -> int:
        return self.beta.shape[1] - 1

    @property
    def phi(self) -> float:
        return math.exp(self.log_phi)

    @property
    def categories(self) -> list:
        return [c for c in range(self.K) if c != self.ref_category]

    @property
    def z_values(self) -> np.ndarray:
        return self.beta / self.se


def _check_composition(y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if np.any(y <= 0):
        raise InvalidInputError("composition components must be strictly positive")
    return y


def dirichlet_log_density(y, params) -> float:
    """log f(y; alpha) = -log B(alpha) + sum (alpha_c - 1) log y_c."""
    alpha = params.alpha if isinstance(params, DirichletParams) else np.asarray(params, float)
    y = _check_composition(y)
    if y.shape != alpha.shape:
        raise InvalidInputError(f"dimension mismatch {y.shape} vs {alpha.shape}")
    log_b = np.sum(gammaln(alpha)) - gammaln(alpha.sum())
    return float(-log_b + np.sum((alpha - 1.0) * np.log(y)))


def moments(params: DirichletParams):
    """Return (mean, variance, covariance matrix)."""
    a = params.alpha
    a0 = a.sum()
    mean = a / a0
    denom = a0 * a0 * (a0 + 1.0)
    cov = -np.outer(a, a) / denom
    var = a * (a0 - a) / denom
    np.fill_diagonal(cov, var)
    return mean, var, cov


def sample(params: DirichletParams, n: int, seed=0) -> np.ndarray:
    """Draw n rows by normalising independent Gamma(alpha_c, 1) variates."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    g = rng.gamma(params.alpha, 1.0, size=(int(n), params.alpha.size))
    return g / g.sum(axis=1, keepdims=True)


def boundary_compress(Y) -> np.ndarray:
    """Pull memberships off the simplex boundary: y' = (y (n-1) + 1/K) / n."""
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim != 2:
        raise InvalidInputError("expected an n x K matrix")
    if np.any(Y < 0):
        raise InvalidInputError("compositions must be nonnegative")
    if np.any(np.abs(Y.sum(axis=1) - 1.0) > 1e-9):
        raise InvalidInputError("rows must sum to 1")
    n, K = Y.shape
    return (Y * (n - 1) + 1.0 / K) / n


def _design(X, n=None) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None] if X.size == n else X[None, :]
    if not np.all(np.isfinite(X)):
        raise InvalidInputError("covariates must be finite")
    return np.hstack([np.ones((X.shape[0], 1)), X])


def _linear_predictor(beta_free: np.ndarray, Z: np.ndarray, ref: int, K: int) -> np.ndarray:
    eta = np.zeros((Z.shape[0], K))
    cats = [c for c in range(K) if c != ref]
    eta[:, cats] = Z @ beta_free.T
    return eta


def _softmax(eta: np.ndarray) -> np.ndarray:
    e = np.exp(eta - eta.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


class _Likelihood:
    """Log-likelihood and analytic gradient in the packed parameter vector.

    Layout: beta for the non-reference categories row by row, then log_phi.
    """

    def __init__(self, Y, Z, ref):
        self.logY = np.log(Y)
        self.Z = Z
        self.ref = ref
        self.n, self.K = Y.shape
        self.p = Z.shape[1]
        self.cats = [c for c in range(self.K) if c != ref]

    def unpack(self, theta):
        return theta[:-1].reshape(self.K - 1, self.p), theta[-1]

    def means(self, theta):
        beta, _ = self.unpack(theta)
        return _softmax(_linear_predictor(beta, self.Z, self.ref, self.K))

    def value(self, theta) -> float:
        if not np.all(np.isfinite(theta)) or theta[-1] > 700.0:
            return -np.inf   # outside the usable domain; line searches back off
        mu = self.means(theta)
        phi = math.exp(theta[-1])
        alpha = phi * mu
        with np.errstate(all="ignore"):
            ll = self.n * gammaln(phi) - gammaln(alpha).sum() + ((alpha - 1.0) * self.logY).sum()
        return float(ll) if np.isfinite(ll) else -np.inf

    def gradient(self, theta) -> np.ndarray:
        mu = self.means(theta)
        phi = math.exp(theta[-1])
        alpha = phi * mu
        g = self.logY - digamma(alpha)                  # dl/dalpha minus the psi(phi) term
        # dl/d eta_k = phi mu_k (g_k - sum_c mu_c g_c)
        centred = g - np.sum(mu * g, axis=1, keepdims=True)
        d_eta = phi * mu * centred
        grad_beta = d_eta[:, self.cats].T @ self.Z      # (K-1) x p
        d_logphi = phi * np.sum(digamma(phi) + np.sum(mu * g, axis=1))
        return np.concatenate([grad_beta.ravel(), [d_logphi]])


def _bfgs_ascent(f, grad, x0, gtol=1e-6, max_iter=500):
    """Maximise ``f`` by BFGS with Armijo backtracking."""
    x = np.array(x0, dtype=np.float64)
    fx = f(x)
    g = grad(x)
    H = np.eye(x.size)  # inverse Hessian approximation of -f
    it = 0
    for it in range(1, max_iter + 1):
        if np.max(np.abs(g)) < gtol:
            return x, fx, g, it - 1, True
        d = H @ g
        if it == 1 or np.dot(d, g) <= 0:
            # steepest ascent, scaled so the first trial step moves no coordinate by more than 1
            H = np.eye(x.size)
            d = g / max(1.0, float(np.max(np.abs(g))))
        step = 1.0
        slope = float(np.dot(g, d))
        while True:
            x_new = x + step * d
            f_new = f(x_new)
            if np.isfinite(f_new) and f_new >= fx + 1e-4 * step * slope:
                break
            step *= 0.5
            if step < 1e-20:
                return x, fx, g, it, np.max(np.abs(g)) < gtol
        s = x_new - x
        if np.max(np.abs(s)) <= 1e-13 * (1.0 + np.max(np.abs(x))):
            # stalled at machine precision; the caller finishes with Newton steps
            return x, fx, g, it, np.max(np.abs(g)) < gtol
        g_new = grad(x_new)
        yv = g - g_new  # gradient change of the minimised function -f
        sy = float(np.dot(s, yv))
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(yv):
            rho = 1.0 / sy
            I = np.eye(x.size)
            H = (I - rho * np.outer(s, yv)) @ H @ (I - rho * np.outer(yv, s)) + rho * np.outer(s, s)
        x, fx, g = x_new, f_new, g_new
    return x, fx, g, it, np.max(np.abs(g)) < gtol


def _newton_polish(lik, theta, steps=20, gtol=1e-6):
    """A few Newton steps on a finite-difference Hessian to tighten convergence."""
    g = lik.gradient(theta)
    for _ in range(steps):
        if np.max(np.abs(g)) < gtol:
            break
        H = _fd_hessian(lik.gradient, theta)
        try:
            step = np.linalg.solve(H, -g)
        except np.linalg.LinAlgError:
            break
        f0 = lik.value(theta)
        t = 1.0
        while t > 1e-8:
            cand = theta + t * step
            if lik.value(cand) >= f0 - 1e-12 * abs(f0):
                break
            t *= 0.5
        else:
            break
        theta = cand
        g = lik.gradient(theta)
    return theta, g


def _fd_hessian(grad, theta, rel=1e-5) -> np.ndarray:
    p = theta.size
    H = np.empty((p, p))
    for j in range(p):
        h = rel * max(1.0, abs(theta[j]))
        e = np.zeros(p)
        e[j] = h
        H[:, j] = (grad(theta + e) - grad(theta - e)) / (2 * h)
    return 0.5 * (H + H.T)


def wald_p_value(z):
    """Two-sided normal tail probability."""
    return np.vectorize(lambda v: math.erfc(abs(v) / math.sqrt(2.0)) if np.isfinite(v) else float("nan"))(z)


def fit(Y, X, ref_category: int = 0, covariate_names=None, max_iter: int = 500,
        gtol: float = 1e-6) -> DirichletFit:
    """Maximum-likelihood Dirichlet regression with constant precision.

    ``Y`` must be strictly interior (apply :func:`boundary_compress` to raw
    memberships first). ``X`` is the n x q covariate matrix without the
    intercept column; q may be 0.
    """
    Y = _check_composition(Y)
    n, K = Y.shape
    if np.any(np.abs(Y.sum(axis=1) - 1.0) > 1e-9):
        raise InvalidInputError("response rows must sum to 1")
    X = np.asarray(X, dtype=np.float64)
    if X.size == 0:
        X = np.zeros((n, 0))
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] != n:
        raise InvalidInputError(f"covariate rows {X.shape[0]} do not match responses {n}")
    Z = _design(X)
    p = Z.shape[1]
    if not 0 <= ref_category < K:
        raise InvalidInputError(f"reference category {ref_category} outside 0..{K - 1}")
    if n <= (K - 1) * p + 1:
        raise InvalidInputError(
            f"need more than {(K - 1) * p + 1} observations for K={K} and q={p - 1}, got {n}"
        )
    lik = _Likelihood(Y, Z, ref_category)
    theta0 = np.zeros((K - 1) * p + 1)
    theta0[-1] = math.log(K)
    theta, ll, g, it, ok = _bfgs_ascent(lik.value, lik.gradient, theta0, gtol, max_iter)
    if not ok:
        theta, g = _newton_polish(lik, theta, steps=min(20, max_iter), gtol=gtol)
        ok = np.max(np.abs(g)) < gtol
    ll = lik.value(theta)
    gnorm = float(np.max(np.abs(g)))
    if not ok:
        raise FitFailedError(
            f"Dirichlet regression did not converge in {max_iter} iterations "
            f"(max |gradient| = {gnorm:.3g})",
            {"loglik": ll, "grad_max": gnorm, "theta": theta.tolist(), "n_iter": it},
        )
    H = _fd_hessian(lik.gradient, theta)
    se = np.full(theta.size, np.nan)
    hessian_ok = True
    try:
        cov = np.linalg.inv(-H)
        diag = np.diag(cov)
        if np.all(np.isfinite(diag)) and np.all(diag > 0):
            se = np.sqrt(diag)
        else:
            hessian_ok = False
    except np.linalg.LinAlgError:
        hessian_ok = False
    z = theta / se
    pv = wald_p_value(z)
    beta = theta[:-1].reshape(K - 1, p)
    names = list(covariate_names) if covariate_names is not None else [f"x{j + 1}" for j in range(p - 1)]
    return DirichletFit(
        beta=beta,
        log_phi=float(theta[-1]),
        se=se[:-1].reshape(K - 1, p),
        p_values=pv[:-1].reshape(K - 1, p),
        loglik=ll,
        converged=True,
        ref_category=ref_category,
        se_log_phi=float(se[-1]),
        p_log_phi=float(pv[-1]),
        covariate_names=names,
        n_iter=it,
        grad_norm=gnorm,
        hessian_ok=hessian_ok,
    )


def predict(fit_: DirichletFit, x) -> np.ndarray:
    """Mean composition at covariate vector ``x`` (without the intercept)."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if x.shape != (fit_.q,):
        raise InvalidInputError(f"expected {fit_.q} covariates, got shape {x.shape}")
    z = np.concatenate([[1.0], x])[None, :]
    return _softmax(_linear_predictor(fit_.beta, z, fit_.ref_category, fit_.K))[0]


def fitted_means(fit_: DirichletFit, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    return _softmax(_linear_predictor(fit_.beta, _design(X), fit_.ref_category, fit_.K))


def loglik_at(Y, X, beta, log_phi, ref_category=0) -> float:
    """Log-likelihood of given parameters (for comparing fits against truth)."""
    Y = _check_composition(Y)
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    lik = _Likelihood(Y, _design(X), ref_category)
    theta = np.concatenate([np.asarray(beta, float).ravel(), [log_phi]])
    return lik.value(theta)


def significance_marker(p: float) -> str:
    for bound, mark in SIGNIFICANCE_BANDS:
        if p < bound:
            return mark
    return ""


def write_fit_csv(path, fit_: DirichletFit) -> None:
    """One row per (category, covariate) plus a final precision row."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["category", "covariate", "estimate", "se", "z", "p", "signif"])
        names = ["(intercept)"] + list(fit_.covariate_names)
        for r, c in enumerate(fit_.categories):
            for j, name in enumerate(names):
                est, se = fit_.beta[r, j], fit_.se[r, j]
                p = fit_.p_values[r, j]
                w.writerow([c + 1, name, repr(float(est)), repr(float(se)),
                            repr(float(est / se)), repr(float(p)), significance_marker(p)])
        z = fit_.log_phi / fit_.se_log_phi
        w.writerow(["precision", "log_phi", repr(fit_.log_phi), repr(fit_.se_log_phi),
                    repr(float(z)), repr(fit_.p_log_phi), significance_marker(fit_.p_log_phi)])


def fit_to_json(fit_: DirichletFit) -> dict:
    return {
        "K": fit_.K,
        "ref_category": fit_.ref_category,
        "covariates": list(fit_.covariate_names),
        "beta": fit_.beta.tolist(),
        "log_phi": fit_.log_phi,
        "loglik": fit_.loglik,
        "converged": fit_.converged,
    }


def fit_from_json(doc: dict) -> DirichletFit:
    beta = np.asarray(doc["beta"], dtype=np.float64)
    nan = np.full(beta.shape, np.nan)
    return DirichletFit(beta=beta, log_phi=float(doc["log_phi"]), se=nan, p_values=nan,
                        loglik=float(doc.get("loglik", np.nan)), converged=bool(doc.get("converged", True)),
                        ref_category=int(doc.get("ref_category", 0)),
                        covariate_names=list(doc.get("covariates", [])))


def write_fit_json(path, fit_: DirichletFit) -> None:
    Path(path).write_text(json.dumps(fit_to_json(fit_), indent=2, sort_keys=True) + "\n")
