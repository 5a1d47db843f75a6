"""End-to-end smoke tests for the python bindings."""

import math

import pytest

import vprmon


def make_config(seed=3, n=120, aliasing=0.2, noise=0.05):
    cfg = vprmon.SynthConfig()
    cfg.n = n
    cfg.m = 32
    cfg.spacing = 0.3
    cfg.aliasing_rate = aliasing
    cfg.noise_sigma = noise
    cfg.seed = seed
    return cfg


def test_catalogue_shape():
    names = vprmon.catalogue_names()
    assert len(names) == 48
    assert len(set(names)) == 48
    assert vprmon.catalogue_version() == 1


def test_weighted_mse_hand_value():
    assert vprmon.weighted_mse([1, 0], [0.5, 0.5], 6.0) == pytest.approx(0.875, abs=1e-15)
    with pytest.raises(vprmon.VprError):
        vprmon.weighted_mse([], [], 1.0)


def test_generate_and_match():
    ds = vprmon.generate_synthetic(make_config(noise=0.0, aliasing=0.0))
    assert len(ds.traverse) == 120
    assert ds.traverse.features.dim == 32
    tol = vprmon.ToleranceConfig(0.5)
    matches = vprmon.compute_matches(
        ds.traverse, ds.queries, vprmon.DistanceMetric.Euclidean, tol
    )
    # Noiseless queries match their own reference exactly.
    assert all(m.best_index == k for k, m in enumerate(matches))
    assert all(m.label == 1 for m in matches)


def test_featurize_dimensions():
    stats = vprmon.extract_stats([1.0, 2.0, 3.0, 4.0])
    assert len(stats) == 48
    bundle = vprmon.FeatureBundle([0.1, 0.9, 0.8], [1.0, 0.0], [0.0, 1.0])
    assert bundle.v == [-1.0, 1.0]
    assert len(vprmon.featurize(bundle)) == 192


def test_train_and_verified_exp2():
    ds = vprmon.generate_synthetic(make_config(seed=11))
    tol = vprmon.ToleranceConfig(0.5)
    match_set = vprmon.compute_match_set(
        ds.traverse, ds.queries, vprmon.DistanceMetric.Euclidean, tol
    )

    dataset = []
    for k, m in enumerate(match_set.matches):
        bundle = vprmon.FeatureBundle(
            m.distances,
            [float(v) for v in ds.queries.features.row(k)],
            [float(v) for v in ds.traverse.features.row(m.best_index)],
        )
        dataset.append((vprmon.featurize(bundle), m.label))

    cfg = vprmon.TrainConfig()
    cfg.alpha = 6.0
    cfg.epochs = 60
    cfg.seed = 1
    cfg.hidden_layers = 2
    cfg.hidden_units = 16
    cfg.learning_rate = 1e-3
    result = vprmon.train(dataset, cfg)
    assert result.log[-1].loss < result.log[0].loss

    raw = vprmon.forward(result.model, dataset[0][0])
    assert 0.0 < raw < 1.0

    baseline = vprmon.run_exp2(ds.traverse, ds.queries, match_set, "baseline")
    verified = vprmon.run_exp2(
        ds.traverse, ds.queries, match_set, "verified", result.model
    )
    assert baseline.metrics.recall == pytest.approx(baseline.metrics.precision)
    assert 0.0 <= verified.metrics.precision <= 1.0
    assert verified.metrics.opportunities == baseline.metrics.opportunities


def test_oracle_precision_is_perfect():
    ds = vprmon.generate_synthetic(make_config(seed=42, n=200))
    tol = vprmon.ToleranceConfig(0.5)
    match_set = vprmon.compute_match_set(
        ds.traverse, ds.queries, vprmon.DistanceMetric.Euclidean, tol
    )
    oracle = vprmon.run_exp2(ds.traverse, ds.queries, match_set, "oracle")
    baseline = vprmon.run_exp2(ds.traverse, ds.queries, match_set, "baseline")
    assert oracle.metrics.precision == 1.0
    assert (
        oracle.metrics.localization_error.mean
        <= baseline.metrics.localization_error.mean
    )


def test_model_round_trip(tmp_path):
    ds = vprmon.generate_synthetic(make_config(seed=5))
    tol = vprmon.ToleranceConfig(0.5)
    match_set = vprmon.compute_match_set(
        ds.traverse, ds.queries, vprmon.DistanceMetric.Euclidean, tol
    )
    dataset = []
    for k, m in enumerate(match_set.matches):
        bundle = vprmon.FeatureBundle(
            m.distances,
            [float(v) for v in ds.queries.features.row(k)],
            [float(v) for v in ds.traverse.features.row(m.best_index)],
        )
        dataset.append((vprmon.featurize(bundle), m.label))
    cfg = vprmon.TrainConfig()
    cfg.alpha = 2.0
    cfg.epochs = 5
    cfg.seed = 2
    cfg.hidden_layers = 1
    cfg.hidden_units = 8
    model = vprmon.train(dataset, cfg).model

    path = tmp_path / "model.vprm"
    vprmon.save_model(model, path)
    loaded = vprmon.load_model(path)
    for x, _label in dataset[:50]:
        assert vprmon.forward(model, x) == vprmon.forward(loaded, x)


def test_hoq_decline_and_extrapolation():
    ds = vprmon.generate_synthetic(make_config(seed=9, aliasing=0.0, noise=0.0))
    window = vprmon.HistoryWindow(1.5)
    window = vprmon.update_history(
        window, vprmon.HistoryEntry(10, 0.2, ds.queries.odometer[10], 0)
    )
    declined, _pos = vprmon.hoq_best(window, True)
    assert declined
    result = vprmon.hoq_localize(window, ds.queries.odometer[10], ds.traverse, True)
    assert result.status == vprmon.LocalizationResult.Status.Declined

    window.entries[0].prediction = 1
    result = vprmon.hoq_localize(
        window, ds.queries.odometer[10] + 0.6, ds.traverse, True
    )
    assert result.status == vprmon.LocalizationResult.Status.Estimate
    assert result.ref_index == 12  # two 0.3 m steps ahead
    assert math.isclose(result.delta, 0.6)
