"""ACF/PACF and Welch spectral features, and distances between them."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateInputError, InvalidInputError
from .signal_core import TimeSeries

DEFAULT_MAX_LAG = 1500


@dataclass(frozen=True)
class CorrelationVector:
    kind: str  # "ACF" or "PACF"
    values: np.ndarray  # lags 1..max_lag

    @property
    def max_lag(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class SpectralDensity:
    frequencies_hz: np.ndarray
    density: np.ndarray


def _as_array(ts) -> np.ndarray:
    if isinstance(ts, TimeSeries):
        return ts.values
    return np.asarray(ts, dtype=np.float64).ravel()


def _autocorrelation(x: np.ndarray, max_lag: int) -> np.ndarray:
    n = x.size
    if int(max_lag) != max_lag or max_lag < 1:
        raise InvalidInputError(f"max_lag must be a positive integer, got {max_lag}")
    if max_lag >= n:
        raise InvalidInputError(f"max_lag={max_lag} must be smaller than the series length {n}")
    if np.ptp(x) == 0.0:
        raise DegenerateInputError("autocorrelation undefined for a constant series")
    xc = x - x.mean()
    denom = float(np.dot(xc, xc))
    nfft = 1 << int(np.ceil(np.log2(2 * n - 1)))
    spec = np.fft.rfft(xc, nfft)
    acov = np.fft.irfft(spec * np.conj(spec), nfft)[: max_lag + 1]
    return acov / denom


def acf(ts, max_lag: int = DEFAULT_MAX_LAG) -> CorrelationVector:
    """Biased sample autocorrelation at lags 1..max_lag."""
    r = _autocorrelation(_as_array(ts), max_lag)
    return CorrelationVector("ACF", np.clip(r[1:], -1.0, 1.0))


def durbin_levinson(r: np.ndarray, max_lag: int) -> np.ndarray:
    """Partial autocorrelations from an autocorrelation sequence ``r`` (r[0] == 1)."""
    out = np.empty(max_lag)
    phi = np.zeros(max_lag + 1)
    v = r[0]
    for k in range(1, max_lag + 1):
        if abs(v) < 1e-14:
            raise DegenerateInputError(f"Durbin-Levinson divisor vanished at lag {k}")
        a = (r[k] - np.dot(phi[1:k], r[k - 1:0:-1])) / v
        prev = phi[1:k].copy()
        phi[1:k] = prev - a * prev[::-1]
        phi[k] = a
        v *= 1.0 - a * a
        out[k - 1] = a
    return out


def pacf(ts, max_lag: int = DEFAULT_MAX_LAG) -> CorrelationVector:
    r = _autocorrelation(_as_array(ts), max_lag)
    return CorrelationVector("PACF", np.clip(durbin_levinson(r, max_lag), -1.0, 1.0))


def feature_distance(a, b, omega=None) -> float:
    """sqrt((a - b)^T omega (a - b)); ``omega=None`` means the identity."""
    if isinstance(a, CorrelationVector) and isinstance(b, CorrelationVector):
        if a.kind != b.kind:
            raise InvalidInputError(f"cannot compare {a.kind} with {b.kind}")
    va = a.values if isinstance(a, CorrelationVector) else np.asarray(a, dtype=np.float64)
    vb = b.values if isinstance(b, CorrelationVector) else np.asarray(b, dtype=np.float64)
    if va.shape != vb.shape:
        raise InvalidInputError(f"length mismatch {va.shape} vs {vb.shape}")
    diff = va - vb
    if omega is None:
        return float(np.sqrt(np.dot(diff, diff)))
    omega = np.asarray(omega, dtype=np.float64)
    if omega.shape != (diff.size, diff.size):
        raise InvalidInputError(f"weight matrix shape {omega.shape} does not match r={diff.size}")
    if not np.allclose(omega, omega.T, rtol=0, atol=1e-12):
        raise InvalidInputError("weight matrix must be symmetric")
    q = float(diff @ omega @ diff)
    return float(np.sqrt(max(q, 0.0)))


def distance_matrix(vectors, omega=None) -> np.ndarray:
    """Pairwise feature distances between the rows of ``vectors``."""
    X = np.asarray([v.values if isinstance(v, CorrelationVector) else v for v in vectors],
                   dtype=np.float64)
    if omega is not None:
        omega = np.asarray(omega, dtype=np.float64)
        n = X.shape[0]
        D = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                D[i, j] = D[j, i] = feature_distance(X[i], X[j], omega)
        return D
    D = np.empty((X.shape[0], X.shape[0]))
    for i in range(X.shape[0]):
        D[i] = np.sqrt(np.sum((X - X[i]) ** 2, axis=1))
    np.fill_diagonal(D, 0.0)
    return D


def tukey_window(length: int, taper: float = 0.5) -> np.ndarray:
    """Symmetric tapered-cosine window; taper 0 is rectangular, 1 is Hann."""
    if int(length) != length or length < 2:
        raise InvalidInputError(f"window length must be an integer >= 2, got {length}")
    if not 0.0 <= taper <= 1.0:
        raise InvalidInputError(f"taper must lie in [0, 1], got {taper}")
    length = int(length)
    w = np.ones(length)
    if taper == 0.0:
        return w
    n = np.arange(length)
    width = taper * (length - 1) / 2.0
    left = n < width
    right = n > (length - 1) - width
    w[left] = 0.5 * (1 + np.cos(np.pi * (n[left] / width - 1)))
    w[right] = 0.5 * (1 + np.cos(np.pi * ((n[right] - (length - 1)) / width + 1)))
    return w


def welch_density(
    ts,
    window_len: int = 4096,
    overlap_fraction: float = 0.5,
    taper: float = 0.5,
    sample_rate_hz: float | None = None,
) -> SpectralDensity:
    """Welch-averaged one-sided power spectrum normalised to unit sum.

    Blocks are mean-removed and Tukey-windowed before the periodogram.
    Interior bins are doubled (one-sided convention) before normalisation.
    """
    x = _as_array(ts)
    fs = sample_rate_hz if sample_rate_hz is not None else (
        ts.sample_rate_hz if isinstance(ts, TimeSeries) else 1.0)
    if int(window_len) != window_len or window_len < 2 or window_len % 2:
        raise InvalidInputError(f"window length must be an even integer >= 2, got {window_len}")
    window_len = int(window_len)
    if window_len > x.size:
        raise InvalidInputError(f"window length {window_len} exceeds series length {x.size}")
    if not 0.0 <= overlap_fraction < 1.0:
        raise InvalidInputError(f"overlap must lie in [0, 1), got {overlap_fraction}")
    step = max(1, int(round(window_len * (1.0 - overlap_fraction))))
    starts = range(0, x.size - window_len + 1, step)
    window = tukey_window(window_len, taper)
    power = np.zeros(window_len // 2 + 1)
    for s in starts:
        block = x[s:s + window_len]
        spec = np.fft.rfft((block - block.mean()) * window)
        power += spec.real ** 2 + spec.imag ** 2
    power[1:-1] *= 2.0
    total = power.sum()
    if total <= 0.0:
        raise DegenerateInputError("spectral power is zero (constant signal)")
    density = power / total
    freqs = np.fft.rfftfreq(window_len, d=1.0 / fs)
    return SpectralDensity(freqs, density)


def write_feature_csv(path, ids, rows, prefix: str, start: int = 1) -> None:
    rows = [np.asarray(r) for r in rows]
    width = rows[0].size if rows else 0
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id"] + [f"{prefix}_{k + start}" for k in range(width)])
        for sid, r in zip(ids, rows):
            w.writerow([sid] + [repr(float(v)) for v in r])


def read_feature_csv(path):
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        ids, rows = [], []
        for r in reader:
            ids.append(r[0])
            rows.append([float(v) for v in r[1:]])
    return ids, np.asarray(rows)
