"""Minimal self-contained SVG figures built from pipeline artifacts.

Coordinates are formatted with fixed precision so identical inputs give
byte-identical files.
"""

from __future__ import annotations

import json
from html import escape
from pathlib import Path

import numpy as np

from .errors import PipelineError

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")
W, H = 480, 360
MARGIN = 50


def colour(k: int) -> str:
    return PALETTE[(int(k) - 1) % len(PALETTE)]


def _f(v: float) -> str:
    return f"{v:.2f}"


class Canvas:
    """Axis box mapping data coordinates to pixels."""

    def __init__(self, xlim, ylim, title="", xlabel="", ylabel="", width=W, height=H):
        self.w, self.h = width, height
        self.x0, self.x1 = _pad(xlim)
        self.y0, self.y1 = _pad(ylim)
        self.items = []
        self._axes(title, xlabel, ylabel)

    def px(self, x):
        return MARGIN + (x - self.x0) / (self.x1 - self.x0) * (self.w - 2 * MARGIN)

    def py(self, y):
        return self.h - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (self.h - 2 * MARGIN)

    def _axes(self, title, xlabel, ylabel):
        left, right, top, bottom = MARGIN, self.w - MARGIN, MARGIN, self.h - MARGIN
        self.items.append(f'<rect x="{left}" y="{top}" width="{right - left}" height="{bottom - top}" '
                          'fill="none" stroke="black"/>')
        for v in np.linspace(self.x0, self.x1, 5):
            x = self.px(v)
            self.items.append(f'<line x1="{_f(x)}" y1="{bottom}" x2="{_f(x)}" y2="{bottom + 4}" stroke="black"/>')
            self.items.append(f'<text x="{_f(x)}" y="{bottom + 16}" font-size="10" text-anchor="middle">{v:.3g}</text>')
        for v in np.linspace(self.y0, self.y1, 5):
            y = self.py(v)
            self.items.append(f'<line x1="{left - 4}" y1="{_f(y)}" x2="{left}" y2="{_f(y)}" stroke="black"/>')
            self.items.append(f'<text x="{left - 6}" y="{_f(y + 3)}" font-size="10" text-anchor="end">{v:.3g}</text>')
        self.text(self.w / 2, 20, title, size=13)
        self.text(self.w / 2, self.h - 12, xlabel)
        if ylabel:
            self.items.append(f'<text x="14" y="{self.h / 2}" font-size="11" text-anchor="middle" '
                              f'transform="rotate(-90 14 {self.h / 2})">{escape(ylabel)}</text>')

    def text(self, x, y, s, size=11, anchor="middle"):
        if s:
            self.items.append(f'<text x="{_f(x)}" y="{_f(y)}" font-size="{size}" text-anchor="{anchor}">'
                              f'{escape(str(s))}</text>')

    def line(self, x1, y1, x2, y2, stroke="black", width=1.0, dash=None):
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.items.append(f'<line x1="{_f(self.px(x1))}" y1="{_f(self.py(y1))}" x2="{_f(self.px(x2))}" '
                          f'y2="{_f(self.py(y2))}" stroke="{stroke}" stroke-width="{width}"{extra}/>')

    def circle(self, x, y, fill, r=4.0, label=None):
        tip = f"<title>{escape(label)}</title>" if label else ""
        self.items.append(f'<circle cx="{_f(self.px(x))}" cy="{_f(self.py(y))}" r="{r}" fill="{fill}" '
                          f'fill-opacity="0.8">{tip}</circle>')

    def polyline(self, xs, ys, stroke, width=1.5):
        pts = " ".join(f"{_f(self.px(x))},{_f(self.py(y))}" for x, y in zip(xs, ys))
        self.items.append(f'<polyline points="{pts}" fill="none" stroke="{stroke}" stroke-width="{width}"/>')

    def polygon(self, xs, ys, fill, opacity=0.2):
        pts = " ".join(f"{_f(self.px(x))},{_f(self.py(y))}" for x, y in zip(xs, ys))
        self.items.append(f'<polygon points="{pts}" fill="{fill}" fill-opacity="{opacity}" stroke="none"/>')

    def rect(self, x, y, w, h, fill):
        # data-space rectangle with (x, y) its lower-left corner
        X0, X1 = self.px(x), self.px(x + w)
        Y0, Y1 = self.py(y + h), self.py(y)
        self.items.append(f'<rect x="{_f(X0)}" y="{_f(Y0)}" width="{_f(X1 - X0)}" height="{_f(Y1 - Y0)}" '
                          f'fill="{fill}"/>')

    def legend(self, entries):
        for k, (label, col) in enumerate(entries):
            y = MARGIN + 14 + 14 * k
            x = self.w - MARGIN - 90
            self.items.append(f'<rect x="{x}" y="{y - 8}" width="10" height="10" fill="{col}"/>')
            self.text(x + 14, y + 1, label, size=10, anchor="start")

    def save(self, path) -> Path:
        body = "\n".join(self.items)
        Path(path).write_text(
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.w}" height="{self.h}" '
            f'viewBox="0 0 {self.w} {self.h}">\n<rect width="100%" height="100%" fill="white"/>\n{body}\n</svg>\n')
        return Path(path)


def _pad(lim):
    lo, hi = float(lim[0]), float(lim[1])
    if not np.isfinite(lo) or not np.isfinite(hi):
        lo, hi = 0.0, 1.0
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


# ---------------------------------------------------------------- figures

def plot_diagram(path, groups, title="Persistence diagram", labels=None) -> Path:
    """Scatter of (birth, death) per group with the diagonal; axes only when empty.

    ``groups`` maps a legend key to an (n, 2) array; ``labels`` maps the key
    to a cluster number used for colour.
    """
    pts = [np.asarray(p, float).reshape(-1, 2) for p in groups.values()]
    allp = np.concatenate(pts) if pts else np.empty((0, 2))
    lim = (allp.min(), allp.max()) if allp.size else (0.0, 1.0)
    cv = Canvas(lim, lim, title, "birth", "death")
    cv.line(cv.x0, cv.x0, cv.x1, cv.x1, stroke="grey", dash="4 3")
    for k, (key, P) in enumerate(zip(groups, pts)):
        col = colour(labels[key] if labels else k + 1)
        for b, d in P:
            cv.circle(b, d, col, 3.0, str(key))
    return cv.save(path)


def plot_barcode(path, groups, title="Barcode", labels=None) -> Path:
    bars = [(key, tuple(sorted(b))) for key, P in groups.items() for b in np.asarray(P, float).reshape(-1, 2)]
    if bars:
        vals = np.array([b for _, b in bars])
        lim = (vals.min(), vals.max())
    else:
        lim = (0.0, 1.0)
    cv = Canvas(lim, (0, max(1, len(bars))), title, "filtration value", "bar")
    for i, (key, (lo, hi)) in enumerate(bars):
        col = colour(labels[key] if labels else list(groups).index(key) + 1)
        cv.line(lo, i + 0.5, hi, i + 0.5, stroke=col, width=2.0)
    return cv.save(path)


def plot_mds(path, ids, coords, labels, title="MDS") -> Path:
    """One circle per subject, coloured by cluster."""
    coords = np.asarray(coords, float)
    if coords.ndim == 1 or coords.shape[1] == 1:
        coords = np.column_stack([coords.reshape(-1), np.zeros(len(ids))])
    cv = Canvas((coords[:, 0].min(), coords[:, 0].max()), (coords[:, 1].min(), coords[:, 1].max()),
                title, "dimension 1", "dimension 2")
    for sid, (x, y), lab in zip(ids, coords[:, :2], labels):
        cv.circle(x, y, colour(lab), 5.0, f"{sid} (cluster {lab})")
    cv.legend([(f"cluster {c}", colour(c)) for c in sorted(set(int(v) for v in labels))])
    return cv.save(path)


def plot_profiles(path, profiles, labels, title="Periodicity profiles") -> Path:
    """Mean periodicity score per frame, one polyline per cluster, with a +-1 SD band."""
    P = np.asarray(profiles, float)
    labels = np.asarray(labels)
    frames = np.arange(1, P.shape[1] + 1)
    cv = Canvas((1, max(2, P.shape[1])), (0, 1), title, "frame", "periodicity score")
    clusters = sorted(set(int(v) for v in labels))
    for c in clusters:
        rows = P[labels == c]
        mean = rows.mean(axis=0)
        sd = rows.std(axis=0, ddof=1) if rows.shape[0] > 1 else np.zeros_like(mean)
        cv.polygon(np.concatenate([frames, frames[::-1]]),
                   np.concatenate([np.clip(mean + sd, 0, 1), np.clip(mean - sd, 0, 1)[::-1]]), colour(c))
        cv.polyline(frames, mean, colour(c), 2.0)
    cv.legend([(f"cluster {c} (n={int(np.sum(labels == c))})", colour(c)) for c in clusters])
    return cv.save(path)


def plot_membership(path, ids, U, title="Fuzzy memberships") -> Path:
    """Stacked bars: one bar per subject, segments are cluster memberships."""
    U = np.asarray(U, float)
    n, K = U.shape
    cv = Canvas((0, n), (0, 1), title, "subject", "membership")
    for i in range(n):
        base = 0.0
        for k in range(K):
            cv.rect(i + 0.1, base, 0.8, U[i, k], colour(k + 1))
            base += U[i, k]
        cv.text(cv.px(i + 0.5), cv.h - MARGIN + 28, ids[i], size=8)
    cv.legend([(f"u_{k + 1}", colour(k + 1)) for k in range(K)])
    return cv.save(path)


# ---------------------------------------------------------------- artifact directory

def _need(out: Path, name: str) -> Path:
    p = out / name
    if not p.exists():
        raise PipelineError("cli", f"cannot plot: missing {p}")
    return p


def emit_plots(artifact_dir) -> list[Path]:
    """Render every figure the artifacts in ``artifact_dir`` support."""
    from .fuzzy import read_membership_csv
    from .pipeline import load_diagram_dicts, read_labels_csv, read_profiles_csv

    out = Path(artifact_dir)
    if not out.is_dir():
        raise PipelineError("cli", f"artifact directory not found: {out}")
    written = []

    def mds_file(name):
        import csv
        with (out / name).open(newline="") as fh:
            rows = list(csv.reader(fh))
        ids = [r[0] for r in rows[1:]]
        coords = np.array([[float(v) for v in r[1:-1]] for r in rows[1:]])
        return ids, coords, [int(r[-1]) for r in rows[1:]]

    for branch in ("pacf", "welch"):
        if (out / f"membership_{branch}.csv").exists():
            ids, U = read_membership_csv(out / f"membership_{branch}.csv")
            written.append(plot_membership(out / f"membership_{branch}.svg", ids, U,
                                           f"Fuzzy memberships ({branch.upper()})"))
        if (out / f"mds_{branch}.csv").exists():
            ids, coords, labs = mds_file(f"mds_{branch}.csv")
            written.append(plot_mds(out / f"mds_{branch}.svg", ids, coords, labs,
                                    f"MDS of {branch.upper()} distances"))

    if (out / "periodicity_profiles.csv").exists():
        ids, profiles = read_profiles_csv(out / "periodicity_profiles.csv")
        lab_ids, labels = read_labels_csv(_need(out, "clusters_tda.csv"))
        if lab_ids != ids:
            raise PipelineError("cli", "clusters_tda.csv and periodicity_profiles.csv list different subjects")
        lab = dict(zip(ids, labels.tolist()))
        written.append(plot_profiles(out / "profiles_tda.svg", profiles, labels))
        sup = load_diagram_dicts(_need(out, "superlevel_diagrams.json"))
        groups = {sid: d.pairs for sid, d in sup.items()}
        written.append(plot_diagram(out / "diagram_superlevel.svg", groups,
                                    "Super-level persistence of periodicity profiles", lab))
        written.append(plot_barcode(out / "barcode_superlevel.svg", groups, "Super-level barcodes", lab))
        if (out / "mds_tda.csv").exists():
            m_ids, coords, labs = mds_file("mds_tda.csv")
            written.append(plot_mds(out / "mds_tda.svg", m_ids, coords, labs, "MDS of bottleneck distances"))
        rips = json.loads(_need(out, "rips_diagrams.json").read_text())
        for sid in ids:
            entry = rips[sid]
            # the retained frame whose score is closest to the subject's median
            prof = dict(zip(ids, profiles))[sid]
            k = int(np.argsort(prof, kind="stable")[(len(prof) - 1) // 2])
            pairs = np.asarray(entry["diagrams"][k]["pairs"], float).reshape(-1, 2)
            frame = entry["frames"][k]
            written.append(plot_diagram(out / f"diagram_rips_{sid}.svg", {sid: pairs},
                                        f"Rips H1, {sid} frame {frame}", {sid: lab[sid]}))
            written.append(plot_barcode(out / f"barcode_rips_{sid}.svg", {sid: pairs},
                                        f"Rips H1 barcode, {sid} frame {frame}", {sid: lab[sid]}))
    if not written:
        raise PipelineError("cli", f"no plottable artifacts in {out}")
    return written
