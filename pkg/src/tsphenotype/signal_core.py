"""Ingest, resample, low-pass filter and frame single-channel signals."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import signal as sps

from .errors import InvalidInputError


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled real signal.

    ``values`` is stored as a read-only float64 array so instances can be
    shared between workers.
    """

    values: np.ndarray
    sample_rate_hz: float = 1.0
    id: str = ""

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).ravel()
        if values.size < 2:
            raise InvalidInputError("time series needs at least 2 samples")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("time series contains non-finite values")
        if not (self.sample_rate_hz > 0 and np.isfinite(self.sample_rate_hz)):
            raise InvalidInputError(f"sample rate must be positive, got {self.sample_rate_hz}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))

    def __len__(self):
        return self.values.size

    @property
    def duration(self) -> float:
        return (self.values.size - 1) / self.sample_rate_hz

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.values.size) / self.sample_rate_hz

    def with_values(self, values, sample_rate_hz=None) -> "TimeSeries":
        rate = self.sample_rate_hz if sample_rate_hz is None else sample_rate_hz
        return TimeSeries(values, rate, self.id)


@dataclass(frozen=True)
class FilterSpec:
    order: int = 4
    cutoff_hz: float = 1.2
    kind: str = "lowpass"

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 1:
            raise InvalidInputError(f"filter order must be a positive integer, got {self.order}")
        if not self.cutoff_hz > 0:
            raise InvalidInputError(f"cutoff must be positive, got {self.cutoff_hz}")
        if self.kind != "lowpass":
            raise InvalidInputError(f"only low-pass filters are supported, got {self.kind!r}")


@dataclass(frozen=True)
class FrameSet:
    frames: list
    frame_len_samples: int
    selected_indices: list = field(default_factory=list)
    stride: int = 1

    def __len__(self):
        return len(self.frames)


def resample_linear(ts: TimeSeries, target_len: int) -> TimeSeries:
    """Linearly re-interpolate ``ts`` onto ``target_len`` equispaced samples.

    The time span is kept, so the returned sample rate becomes
    ``(target_len - 1) / ts.duration``.
    """
    if len(ts) < 2:
        raise InvalidInputError("resampling needs at least 2 input samples")
    if int(target_len) != target_len or target_len < 2:
        raise InvalidInputError(f"target length must be an integer >= 2, got {target_len}")
    target_len = int(target_len)
    n = len(ts)
    if target_len == n:
        return ts.with_values(ts.values.copy())
    # Interpolate on sample-index coordinates so both endpoints land exactly.
    grid = np.linspace(0.0, n - 1, target_len)
    out = np.interp(grid, np.arange(n, dtype=np.float64), ts.values)
    out[0], out[-1] = ts.values[0], ts.values[-1]
    rate = (target_len - 1) / ts.duration
    return ts.with_values(out, rate)


def butterworth_sos(spec: FilterSpec, sample_rate_hz: float) -> np.ndarray:
    nyquist = sample_rate_hz / 2.0
    if spec.cutoff_hz >= nyquist:
        raise InvalidInputError(
            f"cutoff {spec.cutoff_hz} Hz must be below the Nyquist frequency {nyquist} Hz"
        )
    # butter() prewarps the cutoff before the bilinear transform.
    return sps.butter(spec.order, spec.cutoff_hz, btype="lowpass", output="sos", fs=sample_rate_hz)


def edge_padding(spec: FilterSpec) -> int:
    return 3 * 2 * spec.order


def zero_phase_lowpass(ts: TimeSeries, spec: FilterSpec) -> TimeSeries:
    """Forward-backward Butterworth low-pass filter in second-order sections.

    The signal is odd-reflection padded by ``6 * order`` samples on each end,
    filtered forward and then backward, and trimmed, so the net phase is zero
    and the magnitude response is the Butterworth response squared.
    """
    sos = butterworth_sos(spec, ts.sample_rate_hz)
    pad = edge_padding(spec)
    if len(ts) <= pad:
        raise InvalidInputError(
            f"series of length {len(ts)} is too short for {pad} samples of edge padding"
        )
    out = sps.sosfiltfilt(sos, ts.values, padtype="odd", padlen=pad)
    return ts.with_values(out)


def frame_pipeline(
    ts: TimeSeries,
    n_frames: int,
    keep_odd: bool = True,
    points_per_frame: int | None = None,
) -> FrameSet:
    """Cut ``ts`` into ``n_frames`` contiguous blocks and subsample each.

    Trailing samples that do not fill a whole frame are dropped. With
    ``keep_odd`` only frames 1, 3, 5, ... (1-based) are retained. Each
    retained frame is stride-subsampled, starting at its first sample, to
    exactly ``points_per_frame`` samples; the stride is
    ``frame_len // points_per_frame``.
    """
    if int(n_frames) != n_frames or n_frames < 1:
        raise InvalidInputError(f"n_frames must be a positive integer, got {n_frames}")
    frame_len = len(ts) // int(n_frames)
    if frame_len < 1:
        raise InvalidInputError(f"series of length {len(ts)} cannot hold {n_frames} frames")
    if points_per_frame is None:
        points_per_frame = frame_len
    if points_per_frame < 1 or points_per_frame > frame_len:
        raise InvalidInputError(
            f"points_per_frame={points_per_frame} must lie in [1, frame length {frame_len}]"
        )
    stride = frame_len // points_per_frame
    indices = list(range(0, n_frames, 2)) if keep_odd else list(range(n_frames))
    frames = []
    for k in indices:
        block = ts.values[k * frame_len:(k + 1) * frame_len]
        sub = block[::stride][:points_per_frame]
        frames.append(TimeSeries(sub, ts.sample_rate_hz / stride, f"{ts.id}#frame{k + 1}"))
    return FrameSet(frames, frame_len, indices, stride)


def read_series_csv(path, sample_rate_hz: float | None = None, series_id: str | None = None) -> TimeSeries:
    """Read ``time,value`` CSV (with header) or a headerless single column.

    For the two-column form the sample rate is inferred from the median time
    step; a single column requires ``sample_rate_hz``.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise InvalidInputError(f"{path}: empty file")
    sid = series_id if series_id is not None else path.stem
    header = [c.strip().lower() for c in rows[0]]
    if header[:2] == ["time", "value"]:
        data = np.array([[float(r[0]), float(r[1])] for r in rows[1:]])
        if data.shape[0] < 2:
            raise InvalidInputError(f"{path}: need at least 2 samples")
        step = float(np.median(np.diff(data[:, 0])))
        if not step > 0:
            raise InvalidInputError(f"{path}: time column must be increasing")
        return TimeSeries(data[:, 1], 1.0 / step, sid)
    if sample_rate_hz is None:
        raise InvalidInputError(f"{path}: headerless input needs a sample rate")
    values = np.array([float(r[0]) for r in rows])
    return TimeSeries(values, sample_rate_hz, sid)


def write_series_csv(ts: TimeSeries, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time", "value"])
        for t, v in zip(ts.times, ts.values):
            w.writerow([repr(float(t)), repr(float(v))])


def write_frames_csv(frames: FrameSet, directory) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for k, frame in zip(frames.selected_indices, frames.frames):
        p = directory / f"frame_{k + 1:03d}.csv"
        write_series_csv(frame, p)
        paths.append(p)
    return paths


def preprocess(ts: TimeSeries, spec: FilterSpec, resample_len: int | None = None,
               order: Sequence[str] = ("filter", "resample")) -> TimeSeries:
    """Apply filtering and (optionally) resampling in the configured order."""
    out = ts
    for step in order:
        if step == "filter":
            out = zero_phase_lowpass(out, spec)
        elif step == "resample":
            if resample_len is not None:
                out = resample_linear(out, resample_len)
        else:
            raise InvalidInputError(f"unknown preprocessing step {step!r}")
    return out
