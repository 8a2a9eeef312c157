import json

import pytest

from tsphenotype.config import Config, config_from_dict, load_config
from tsphenotype.errors import PipelineError


def test_published_defaults():
    c = Config()
    assert c.fuzzy.m == 1.5 and (c.fuzzy.k_min, c.fuzzy.k_max) == (2, 6)
    assert c.features.max_lag == 1500 and c.features.welch_window == 4096
    assert c.tda.dimension == 14 and c.tda.points_per_frame == 1200
    assert c.tda.n_frames == 62 and c.tda.keep_odd
    assert c.cluster.cut_height == 0.3
    assert (c.preprocess.filter_order, c.preprocess.cutoff_hz) == (4, 1.2)
    assert c.preprocess.resample_len == 1_200_000
    assert c.preprocess.order == ("filter", "resample")


def test_round_trip():
    doc = {"fuzzy": {"k_max": 3}, "tda": {"landmarks": 80}, "seed": 7,
           "input": {"signals": [{"id": "a", "path": "a.csv"}]}}
    c = config_from_dict(doc)
    assert c.fuzzy.k_max == 3 and c.tda.landmarks == 80 and c.seed == 7
    again = config_from_dict(c.to_dict())
    assert again.to_dict() == c.to_dict()


@pytest.mark.parametrize("doc, fragment", [
    ({"tda": {"landmark": 3}}, "landmark"),
    ({"extra": {}}, "extra"),
    ({"fuzzy": {"m": "1.5"}}, "fuzzy.m"),
    ({"tda": {"keep_odd": 1}}, "tda.keep_odd"),
    ({"fuzzy": {"k_min": 2.0}}, "fuzzy.k_min"),
    ({"seed": -1}, "seed"),
    ({"input": {"signals": [{"id": "a"}]}}, "signals"),
    ({"output": []}, "output"),
])
def test_rejects_invalid(doc, fragment):
    with pytest.raises(PipelineError, match=fragment) as info:
        config_from_dict(doc)
    assert info.value.module == "config"


def test_load_resolves_relative_paths(tmp_path):
    (tmp_path / "c.json").write_text(json.dumps({"input": {"covariates": "cov.csv"}}))
    c = load_config(tmp_path / "c.json", seed=5, out_dir=tmp_path / "o")
    assert c.seed == 5
    assert c.resolve(c.input.covariates) == tmp_path / "cov.csv"
    assert c.out_dir == (tmp_path / "o").resolve()


def test_load_errors(tmp_path):
    with pytest.raises(PipelineError, match="not found"):
        load_config(tmp_path / "missing.json")
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(PipelineError, match="invalid JSON"):
        load_config(tmp_path / "bad.json")
