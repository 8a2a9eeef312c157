"""Seeded synthetic fixtures.

All randomness comes from NumPy's PCG64 generator (``numpy.random.default_rng``).
Gaussian variates are produced from its uniforms by the Box-Muller transform
so fixtures depend only on the documented uniform stream; Dirichlet draws use
the generator's Gamma sampler.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .dirichlet import _design, _linear_predictor, _softmax
from .errors import InvalidInputError
from .signal_core import TimeSeries, write_series_csv


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def normal(rng: np.random.Generator, size: int) -> np.ndarray:
    """Standard normals by Box-Muller on pairs of uniforms in (0, 1]."""
    m = (int(size) + 1) // 2
    u1 = 1.0 - rng.random(m)   # (0, 1]
    u2 = rng.random(m)
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.concatenate([r * np.cos(2 * np.pi * u2), r * np.sin(2 * np.pi * u2)])
    return z[: int(size)]


def gen_periodic(period: float, noise_sd: float, n: int, seed=0, sample_rate_hz: float = 1.0,
                 series_id: str = "periodic") -> TimeSeries:
    """cos(2 pi t / period) + N(0, noise_sd^2) at t = 0..n-1 (in samples)."""
    if n < 2:
        raise InvalidInputError("n must be at least 2")
    if period <= 0 or noise_sd < 0:
        raise InvalidInputError("period must be positive and noise_sd nonnegative")
    t = np.arange(n, dtype=np.float64)
    x = np.cos(2 * np.pi * t / period)
    if noise_sd > 0:
        x = x + noise_sd * normal(_rng(seed), n)
    return TimeSeries(x, sample_rate_hz, series_id)


def gen_white_noise(sd: float, n: int, seed=0, sample_rate_hz: float = 1.0,
                    series_id: str = "noise") -> TimeSeries:
    if sd <= 0 or n < 2:
        raise InvalidInputError("sd must be positive and n at least 2")
    return TimeSeries(sd * normal(_rng(seed), n), sample_rate_hz, series_id)


def lemniscate(t, scale: float = 1.0) -> np.ndarray:
    """Lemniscate of Bernoulli, (x^2 + y^2)^2 = a^2 (x^2 - y^2), by parameter t."""
    t = np.asarray(t, dtype=np.float64)
    s = np.sin(t)
    denom = 1.0 + s * s
    return np.column_stack([scale * np.cos(t) / denom, scale * np.sin(t) * np.cos(t) / denom])


def gen_infinity_cloud(count: int, noise_sd: float = 0.0, seed=0, scale: float = 1.0) -> np.ndarray:
    if count < 1:
        raise InvalidInputError("count must be positive")
    rng = _rng(seed)
    t = 2 * np.pi * rng.random(count)
    pts = lemniscate(t, scale)
    if noise_sd > 0:
        pts = pts + noise_sd * normal(rng, 2 * count).reshape(count, 2)
    return pts


def gen_ar(coeffs, n: int, seed=0, burn_in: int = 500, sd: float = 1.0,
           sample_rate_hz: float = 1.0, series_id: str = "ar") -> TimeSeries:
    """Gaussian AR(p): x_t = sum_k a_k x_{t-k} + e_t, first ``burn_in`` samples discarded."""
    a = np.asarray(coeffs, dtype=np.float64).ravel()
    p = a.size
    if p:
        companion = np.zeros((p, p))
        companion[0] = a
        companion[1:, :-1] = np.eye(p - 1)
        if np.max(np.abs(np.linalg.eigvals(companion))) >= 1.0:
            raise InvalidInputError(f"AR coefficients {a.tolist()} are not stationary")
    total = int(n) + int(burn_in)
    e = sd * normal(_rng(seed), total)
    x = np.zeros(total)
    for t in range(total):
        acc = e[t]
        for k in range(min(p, t)):
            acc += a[k] * x[t - 1 - k]
        x[t] = acc
    return TimeSeries(x[burn_in:], sample_rate_hz, series_id)


def gen_regression_cohort(beta, phi: float, X, seed=0, ref_category: int = 0) -> np.ndarray:
    """Draw one Dirichlet(phi * mu(x_i)) composition per covariate row."""
    if phi <= 0:
        raise InvalidInputError(f"precision must be positive, got {phi}")
    beta = np.atleast_2d(np.asarray(beta, dtype=np.float64))
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    Z = _design(X)
    if beta.shape[1] != Z.shape[1]:
        raise InvalidInputError(f"beta has {beta.shape[1]} columns, expected {Z.shape[1]}")
    K = beta.shape[0] + 1
    mu = _softmax(_linear_predictor(beta, Z, ref_category, K))
    g = _rng(seed).gamma(phi * mu, 1.0)
    return g / g.sum(axis=1, keepdims=True)


def gen_breathing(duration_s: float, sample_rate_hz: float = 32.0, rate_hz: float = 0.3,
                  regular: bool = True, seed=0, series_id: str = "subject") -> TimeSeries:
    """Airflow-like test signal: a steady oscillation plus noise, or low-passed noise.

    Regular subjects get a sinusoid at ``rate_hz`` with slow amplitude
    wander and light noise; irregular subjects get pure noise.
    """
    rng = _rng(seed)
    n = int(round(duration_s * sample_rate_hz))
    t = np.arange(n) / sample_rate_hz
    if regular:
        phase = 2 * np.pi * rng.random()
        amp = 1.0 + 0.1 * np.sin(2 * np.pi * t / 600.0 + 2 * np.pi * rng.random())
        x = amp * np.cos(2 * np.pi * rate_hz * t + phase) + 0.2 * normal(rng, n)
    else:
        x = normal(rng, n)
    return TimeSeries(x, sample_rate_hz, series_id)


def write_cohort(out_dir, n_regular: int = 3, n_irregular: int = 3, duration_s: float = 3600.0,
                 sample_rate_hz: float = 32.0, seed: int = 0) -> Path:
    """Write a synthetic cohort (signals, covariates, config.json) and return the config path."""
    out = Path(out_dir)
    sig_dir = out / "signals"
    sig_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    subjects = []
    for k in range(n_regular + n_irregular):
        regular = k < n_regular
        sid = f"S{k + 1:02d}"
        ts = gen_breathing(duration_s, sample_rate_hz, rate_hz=0.25 + 0.1 * rng.random(),
                           regular=regular, seed=int(rng.integers(2**31)), series_id=sid)
        path = sig_dir / f"{sid}.csv"
        write_series_csv(ts, path)
        severity = (1.0 + 2.0 * rng.random()) if regular else (8.0 + 6.0 * rng.random())
        subjects.append((sid, path, severity, 5.0 + 8.0 * rng.random()))
    cov_path = out / "covariates.csv"
    with cov_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "ahi", "age"])
        for sid, _, sev, age in subjects:
            w.writerow([sid, f"{sev:.4f}", f"{age:.4f}"])
    config = {
        "input": {
            "signals": [{"id": sid, "path": str(Path("signals") / p.name)} for sid, p, _, _ in subjects],
            "covariates": "covariates.csv",
        },
        "fuzzy": {"k_min": 2, "k_max": 3},
        "dirichlet": {"covariates": ["ahi"]},
        "cluster": {"severity_column": "ahi"},
        "seed": seed,
    }
    cfg_path = out / "config.json"
    cfg_path.write_text(json.dumps(config, indent=2) + "\n")
    return cfg_path
