"""Cohort pipeline: ingest, preprocess, then the three analysis branches.

A: PACF features -> fuzzy c-medoids -> Dirichlet regression
B: Welch features -> fuzzy c-medoids -> Dirichlet regression
C: frames -> periodicity scores -> super-level diagrams -> bottleneck
   distances -> complete linkage -> cut -> summaries

Frame scoring is farmed out to a process pool; results are gathered in
(subject id, frame) order so the worker count never changes the output.
Errors surface as :class:`PipelineError` naming the module that failed.
"""

from __future__ import annotations

import contextlib
import csv
import json
import logging
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dirichlet, fuzzy, hierarchy, signal_core, tsfeatures
from .config import Config
from .errors import DegenerateInputError, FitFailedError, InvalidInputError, PipelineError
from .tda import PersistenceDiagram, ScoreConfig, bottleneck_matrix, score_series, superlevel_persistence_0d

log = logging.getLogger("tsphenotype")

FEATURE_BRANCHES = ("pacf", "welch")


@contextlib.contextmanager
def stage(module: str):
    """Re-raise numerical and input failures with a module-qualified message."""
    try:
        yield
    except PipelineError:
        raise
    except (InvalidInputError, DegenerateInputError, FitFailedError, ValueError,
            np.linalg.LinAlgError, OSError) as exc:
        raise PipelineError(module, str(exc)) from exc


@dataclass
class Cohort:
    ids: list
    raw: list                      # TimeSeries at the native rate
    covariates: dict = field(default_factory=dict)   # id -> {name: text}
    covariate_names: list = field(default_factory=list)
    filtered: list | None = None


# ---------------------------------------------------------------- ingest

def read_covariates(path):
    """CSV with header ``id,<covariate>...``; values are kept as text."""
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0].strip() != "id":
            raise InvalidInputError(f"{path}: covariate table must start with an 'id' column")
        names = [h.strip() for h in header[1:]]
        table = {}
        for row in reader:
            if not row:
                continue
            if len(row) != len(header):
                raise InvalidInputError(f"{path}: row for {row[0]!r} has {len(row)} fields, expected {len(header)}")
            table[row[0].strip()] = dict(zip(names, (c.strip() for c in row[1:])))
    return names, table


def load_cohort(cfg: Config) -> Cohort:
    if not cfg.input.signals:
        raise PipelineError("signal_core", "config lists no input signals")
    entries = sorted(cfg.input.signals, key=lambda e: str(e["id"]))
    ids = [str(e["id"]) for e in entries]
    if len(set(ids)) != len(ids):
        raise PipelineError("signal_core", "duplicate subject ids in input.signals")
    raw = []
    with stage("signal_core"):
        for sid, e in zip(ids, entries):
            path = cfg.resolve(e["path"])
            if not path.exists():
                raise PipelineError("signal_core", f"missing input file {path}")
            raw.append(signal_core.read_series_csv(path, cfg.input.sample_rate_hz, sid))
    cohort = Cohort(ids, raw)
    if cfg.input.covariates is not None:
        path = cfg.resolve(cfg.input.covariates)
        if not path.exists():
            raise PipelineError("dirichlet_reg", f"missing covariate table {path}")
        with stage("dirichlet_reg"):
            names, table = read_covariates(path)
        missing = [sid for sid in ids if sid not in table]
        if missing:
            raise PipelineError("dirichlet_reg", f"no covariates for subject(s) {', '.join(missing)}")
        cohort.covariates, cohort.covariate_names = table, names
    return cohort


def filter_spec(cfg: Config) -> signal_core.FilterSpec:
    with stage("signal_core"):
        return signal_core.FilterSpec(cfg.preprocess.filter_order, cfg.preprocess.cutoff_hz)


def filtered_signals(cfg: Config, cohort: Cohort) -> list:
    """Low-passed signals at the native rate (the input to the feature branches)."""
    if cohort.filtered is None:
        spec = filter_spec(cfg)
        with stage("signal_core"):
            cohort.filtered = [signal_core.zero_phase_lowpass(ts, spec) for ts in cohort.raw]
    return cohort.filtered


# ---------------------------------------------------------------- branches A and B

def compute_features(cfg: Config, cohort: Cohort, out: Path) -> dict:
    """PACF and Welch feature vectors per subject; writes ``features_<branch>.csv``."""
    f = cfg.features
    sig = filtered_signals(cfg, cohort)
    feats = {}
    with stage("tsfeatures"):
        feats["pacf"] = [tsfeatures.pacf(ts, f.max_lag).values for ts in sig]
        dens = [tsfeatures.welch_density(ts, f.welch_window, f.welch_overlap, f.welch_taper) for ts in sig]
        feats["welch"] = [d.density for d in dens]
    tsfeatures.write_feature_csv(out / "features_pacf.csv", cohort.ids, feats["pacf"], "lag")
    tsfeatures.write_feature_csv(out / "features_welch.csv", cohort.ids, feats["welch"], "bin", start=0)
    return feats


def write_matrix_csv(path, ids, M) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id"] + list(ids))
        for sid, row in zip(ids, M):
            w.writerow([sid] + [repr(float(v)) for v in row])


def read_matrix_csv(path):
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    ids = rows[0][1:]
    return ids, np.array([[float(v) for v in r[1:]] for r in rows[1:]])


def write_mds_csv(path, ids, coords, labels) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id"] + [f"dim_{j + 1}" for j in range(coords.shape[1])] + ["cluster"])
        for sid, row, lab in zip(ids, coords, labels):
            w.writerow([sid] + [repr(float(v)) for v in row] + [int(lab)])


def mds_coords(D, dims: int, module: str) -> np.ndarray:
    dims = max(1, min(dims, D.shape[0] - 1))
    with stage(module), warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        coords, _, _ = hierarchy.classical_mds(D, dims)
    for w in rec:
        log.warning("%s: %s", module, w.message)
    return coords


def cluster_features(cfg: Config, ids, feats: dict, out: Path) -> dict:
    """Fuzzy c-medoids on each feature branch; writes memberships, model JSON and MDS."""
    fz = cfg.fuzzy
    result = {}
    for branch in FEATURE_BRANCHES:
        with stage("tsfeatures"):
            D = tsfeatures.distance_matrix(feats[branch])
        with stage("fuzzy_cluster"):
            K, scores, models = fuzzy.select_k(D, fz.k_min, fz.k_max, fz.m, fz.restarts, cfg.seed, fz.max_iter)
        model = models[K]
        log.info("%s: K=%d (silhouette %.3f)", branch, K, scores[K])
        write_matrix_csv(out / f"distance_{branch}.csv", ids, D)
        fuzzy.write_membership_csv(out / f"membership_{branch}.csv", ids, model.membership)
        fuzzy.write_model_json(out / f"fuzzy_{branch}.json", model, ids,
                               {"silhouette": {str(k): v for k, v in scores.items()}})
        labels = model.labels + 1
        write_mds_csv(out / f"mds_{branch}.csv", ids, mds_coords(D, cfg.cluster.mds_dims, "fuzzy_cluster"), labels)
        result[branch] = model
    return result


def _covariate_matrix(cfg: Config, cohort: Cohort, ids):
    names = list(cfg.dirichlet.covariates) if cfg.dirichlet.covariates is not None else cohort.covariate_names
    unknown = [n for n in names if n not in cohort.covariate_names]
    if unknown:
        raise PipelineError("dirichlet_reg", f"unknown covariate(s): {', '.join(unknown)}")
    try:
        X = np.array([[float(cohort.covariates[sid][n]) for n in names] for sid in ids]).reshape(len(ids), len(names))
    except ValueError as exc:
        raise PipelineError("dirichlet_reg", f"non-numeric covariate value ({exc})") from None
    return names, X


def regress_memberships(cfg: Config, cohort: Cohort, out: Path, branches=FEATURE_BRANCHES) -> dict:
    """Dirichlet regression of each branch's memberships on the covariates."""
    fits = {}
    for branch in branches:
        path = out / f"membership_{branch}.csv"
        if not path.exists():
            raise PipelineError("dirichlet_reg", f"missing membership file {path}")
        ids, U = fuzzy.read_membership_csv(path)
        if cohort.covariates and any(sid not in cohort.covariates for sid in ids):
            raise PipelineError("dirichlet_reg", f"{path.name}: subjects without covariates")
        names, X = _covariate_matrix(cfg, cohort, ids) if cohort.covariates else ([], np.zeros((len(ids), 0)))
        with stage("dirichlet_reg"):
            Y = dirichlet.boundary_compress(U)
            res = dirichlet.fit(Y, X, cfg.dirichlet.ref_category, names, cfg.dirichlet.max_iter)
        dirichlet.write_fit_csv(out / f"dirichlet_fit_{branch}.csv", res)
        dirichlet.write_fit_json(out / f"dirichlet_fit_{branch}.json", res)
        fits[branch] = res
    return fits


# ---------------------------------------------------------------- branch C

def score_config(cfg: Config) -> ScoreConfig:
    t = cfg.tda
    with stage("tda_core"):
        return ScoreConfig(dimension=t.dimension, max_delay=t.max_delay, delay=t.delay,
                           pca_components=t.pca_components, landmarks=t.landmarks,
                           max_scale=t.max_scale, smooth_window=t.smooth_window, seed=cfg.seed)


def _score_task(args):
    values, scfg = args
    res = score_series(values, scfg)
    return res.score, res.delay, res.diagram.to_dict(), res.degenerate


def frame_cohort(cfg: Config, cohort: Cohort, out: Path | None = None) -> list:
    """Preprocess for the TDA branch (filter and resample in the configured order) and frame."""
    spec = filter_spec(cfg)
    p, t = cfg.preprocess, cfg.tda
    framesets = []
    with stage("signal_core"):
        for sid, ts in zip(cohort.ids, cohort.raw):
            if tuple(p.order) == ("filter", "resample") and cohort.filtered is not None:
                pre = signal_core.preprocess(cohort.filtered[cohort.ids.index(sid)], spec, p.resample_len,
                                             order=("resample",))
            else:
                pre = signal_core.preprocess(ts, spec, p.resample_len, order=tuple(p.order))
            fs = signal_core.frame_pipeline(pre, t.n_frames, t.keep_odd, t.points_per_frame)
            if out is not None and cfg.output.write_frames:
                signal_core.write_frames_csv(fs, out / "frames" / sid)
            framesets.append(fs)
    return framesets


def score_frames(framesets, scfg: ScoreConfig, jobs: int = 1) -> list:
    """Per-subject lists of (score, delay, diagram dict, degenerate), in frame order."""
    tasks = [(f.values, scfg) for fs in framesets for f in fs.frames]
    with stage("tda_core"):
        if jobs > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                flat = list(pool.map(_score_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
        else:
            flat = [_score_task(t) for t in tasks]
    out, k = [], 0
    for fs in framesets:
        out.append(flat[k:k + len(fs.frames)])
        k += len(fs.frames)
    return out


def write_profiles_csv(path, ids, profiles) -> None:
    width = len(profiles[0]) if profiles else 0
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["subject_id"] + [f"frame_{k + 1}" for k in range(width)])
        for sid, prof in zip(ids, profiles):
            w.writerow([sid] + [repr(float(v)) for v in prof])


def read_profiles_csv(path):
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    return [r[0] for r in rows[1:]], [np.array([float(v) for v in r[1:]]) for r in rows[1:]]


def write_labels_csv(path, ids, labels) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "cluster"])
        for sid, lab in zip(ids, labels):
            w.writerow([sid, int(lab)])


def read_labels_csv(path):
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    return [r[0] for r in rows[1:]], np.array([int(r[1]) for r in rows[1:]])


def _dump_json(path, doc) -> None:
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def run_tda(cfg: Config, cohort: Cohort, out: Path, jobs: int = 1) -> dict:
    framesets = frame_cohort(cfg, cohort, out)
    scfg = score_config(cfg)
    log.info("tda: scoring %d frames", sum(len(fs) for fs in framesets))
    results = score_frames(framesets, scfg, jobs)
    ids = cohort.ids
    profiles = [np.array([r[0] for r in rs]) for rs in results]
    delays = [np.array([r[1] for r in rs]) for rs in results]
    frame_numbers = [k + 1 for k in framesets[0].selected_indices]
    n_degenerate = sum(r[3] for rs in results for r in rs)
    if n_degenerate:
        log.warning("tda_core: %d degenerate frame(s) scored 0", n_degenerate)

    write_profiles_csv(out / "periodicity_profiles.csv", ids, profiles)
    write_profiles_csv(out / "frame_delays.csv", ids, delays)
    _dump_json(out / "rips_diagrams.json", {
        sid: {"frames": frame_numbers, "diagrams": [r[2] for r in rs]} for sid, rs in zip(ids, results)})

    with stage("tda_core"):
        sup = [superlevel_persistence_0d(p) for p in profiles]
        B = bottleneck_matrix(sup)
    if not np.all(np.isfinite(B)):
        raise PipelineError("tda_core", "bottleneck matrix has non-finite entries")
    _dump_json(out / "superlevel_diagrams.json", {sid: d.to_dict() for sid, d in zip(ids, sup)})
    write_matrix_csv(out / "bottleneck.csv", ids, B)

    c = cfg.cluster
    with stage("cluster_downstream"):
        dendro = hierarchy.complete_linkage(B)
        if c.n_clusters is not None:
            labels = hierarchy.cut(dendro, count=c.n_clusters)
        else:
            labels = hierarchy.cut(dendro, height=c.cut_height)
    labels = labels + 1
    severity = None
    if c.severity_column is not None:
        if c.severity_column not in cohort.covariate_names:
            raise PipelineError("cluster_downstream", f"severity column {c.severity_column!r} not in covariates")
        severity = [float(cohort.covariates[sid][c.severity_column]) for sid in ids]
    with stage("cluster_downstream"):
        stats = hierarchy.summarize_clusters(labels, profiles, severity)
    hierarchy.write_dendrogram_json(out / "dendrogram_tda.json", dendro, ids)
    write_labels_csv(out / "clusters_tda.csv", ids, labels)
    hierarchy.write_summary_csv(out / "summary_tda.csv", stats)
    hierarchy.write_tidy_csv(out / "tidy_tda.csv", ids, profiles, labels, frame_numbers,
                             cohort.covariates or None)
    if len(ids) >= 2:
        write_mds_csv(out / "mds_tda.csv", ids, mds_coords(B, c.mds_dims, "cluster_downstream"), labels)
    log.info("tda: %d cluster(s) at the cut", len(stats))
    return {"profiles": profiles, "labels": labels, "bottleneck": B, "diagrams": sup}


# ---------------------------------------------------------------- entry points

def prepare(cfg: Config) -> tuple[Cohort, Path]:
    out = cfg.out_dir
    with stage("cli"):
        out.mkdir(parents=True, exist_ok=True)
    return load_cohort(cfg), out


def run_pipeline(cfg: Config, jobs: int = 1) -> Path:
    """Run every branch and emit plots; returns the artifact directory."""
    cohort, out = prepare(cfg)
    feats = compute_features(cfg, cohort, out)
    cluster_features(cfg, cohort.ids, feats, out)
    regress_memberships(cfg, cohort, out)
    run_tda(cfg, cohort, out, jobs)
    if cfg.output.svg:
        from .svg import emit_plots
        emit_plots(out)
    return out


def load_diagram_dicts(path) -> dict:
    doc = json.loads(Path(path).read_text())
    return {k: PersistenceDiagram.from_dict(v) for k, v in doc.items()}
