import json

import pytest

from privgraph.cuts import cut_release
from privgraph.errors import ConfigurationError
from privgraph.generators import random_graph
from privgraph.mirror_descent import MirrorDescentConfig
from privgraph.schemas import ReleaseMeta, ReleaseSettings, load_model, release_meta
from privgraph.spectral import spectral_release


def test_spectral_meta(rng):
    release = spectral_release(random_graph(8, 10, rng), 0.5, 0.1, rng, seed=42)
    meta = release_meta(release, wall_time_ms=3.5)
    assert meta.mechanism == "spectral"
    assert meta.m == 10
    assert meta.m_hat == release.m_hat
    assert meta.budget.epsilon == 2.0
    assert meta.budget.delta == 0.0
    assert [e.label for e in meta.ledger] == ["edge_count", "topology_sample(2*eps)", "edge_weights"]
    assert meta.seed == 42
    assert meta.mirror_descent is None
    dumped = meta.model_dump(mode="json", exclude_none=True)
    assert ReleaseMeta.model_validate(dumped) == meta


def test_cut_meta(rng):
    G = random_graph(6, 7, rng)
    release = cut_release(G, 1.0, 1e-6, rng, config=MirrorDescentConfig(iterations=12))
    meta = release_meta(release)
    assert meta.mechanism == "cut"
    assert meta.delta == 1e-6
    assert meta.budget.epsilon == 5.0
    assert meta.heavy_slots == release.m_hat
    assert meta.residual_edges == release.residual_edges
    assert meta.mirror_descent.iterations == 12
    assert meta.mirror_descent.mass_epsilon == 0.5


def test_load_settings(tmp_path):
    path = tmp_path / "settings.json"
    path.write_text(json.dumps({"schema_version": 1, "epsilon": 0.5, "seed": 9}), encoding="utf-8")
    settings = load_model(ReleaseSettings, path)
    assert settings.epsilon == 0.5
    assert settings.seed == 9
    assert settings.delta is None


@pytest.mark.parametrize(
    "text",
    ['{"epsilon": 1.0, "color": "red"}', '{"epsilon": -1.0}', '{"schema_version": 2}', "{not json"],
)
def test_load_settings_rejects_bad_documents(tmp_path, text):
    path = tmp_path / "settings.json"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(ConfigurationError):
        load_model(ReleaseSettings, path)


def test_load_missing_settings(tmp_path):
    with pytest.raises(ConfigurationError):
        load_model(ReleaseSettings, tmp_path / "absent.json")
