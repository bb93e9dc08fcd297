"""Smoke tests for the python bindings."""

import math

import pytest

import icupred


def preprocess_windows(cohort, observations, frame):
    by_stay = {}
    for obs in observations:
        by_stay.setdefault(obs.stay_id, []).append(obs)
    grids = [
        icupred.interpolate_linear(icupred.resample_to_grid(by_stay[e.stay_id], frame))
        for e in cohort
    ]
    stats = icupred.compute_channel_stats(grids)
    windows = []
    for entry, grid in zip(cohort, grids):
        normalized = icupred.normalize_zscore(icupred.impute_mean(grid, stats), stats)
        label = icupred.label_mortality(entry)
        windows.append(icupred.make_labeled_window(normalized, label))
    return windows, stats


def test_synthetic_generation_and_preprocessing():
    cfg = icupred.SyntheticConfig(n_stays=40, mortality_rate=0.5, seed=3)
    cohort, observations = icupred.generate_synthetic_cohort(cfg)
    assert len(cohort) == 40
    assert sum(1 for e in cohort if e.death_time_hours is not None) == 20

    windows, stats = preprocess_windows(cohort, observations, 6)
    assert len(windows) == 40
    grid = windows[0].grid
    assert grid.frame_hours == 6
    assert len(grid.values) == 6
    assert len(grid.values[0]) == icupred.NUM_CHANNELS
    assert grid.fully_observed()
    assert len(stats.mean) == icupred.NUM_CHANNELS


def test_round_trip_serialization():
    cfg = icupred.SyntheticConfig(n_stays=5, seed=11)
    cohort, observations = icupred.generate_synthetic_cohort(cfg)
    text = icupred.serialize_cohort(cohort)
    parsed = icupred.parse_cohort(text)
    assert [e.stay_id for e in parsed] == [e.stay_id for e in cohort]
    assert icupred.serialize_observations(
        icupred.parse_observations(icupred.serialize_observations(observations))
    ) == icupred.serialize_observations(observations)


def test_training_is_deterministic(tmp_path):
    cfg = icupred.SyntheticConfig(n_stays=30, mortality_rate=0.5, seed=5)
    cohort, observations = icupred.generate_synthetic_cohort(cfg)
    windows, stats = preprocess_windows(cohort, observations, 6)
    balanced = icupred.undersample_mortality(windows, seed=9)
    labels = [w.mortality_label for w in balanced]
    assert labels.count(0) == labels.count(1)

    mc = icupred.ModelConfig()
    mc.hidden_units = 8
    mc.epochs = 2
    mc.batch_size = 8
    mc.seed = 4
    model_a = icupred.train(balanced, icupred.Task.binary, mc, stats)
    model_b = icupred.train(balanced, icupred.Task.binary, mc, stats)
    assert model_a.training_log == model_b.training_log
    assert len(model_a.training_log) == 2

    grid = windows[0].grid
    assert icupred.predict(model_a, grid) == icupred.predict(model_b, grid)

    path = str(tmp_path / "model.bin")
    icupred.save_model(model_a, path)
    loaded = icupred.load_model(path)
    assert icupred.predict(loaded, grid) == icupred.predict(model_a, grid)


def test_metrics():
    f1, mcc = icupred.f1_mcc([1, 0, 1, 0], [1, 0, 1, 0])
    assert f1 == 1.0 and mcc == 1.0

    roc = icupred.roc_curve([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0])
    assert roc.auc == 1.0
    assert roc.points[0] == (0.0, 0.0)
    assert roc.points[-1] == (1.0, 1.0)

    folds = icupred.kfold_split(10, 3, seed=1)
    assert sorted(len(f) for f in folds) == [3, 3, 4]
    assert sorted(i for f in folds for i in f) == list(range(10))

    with pytest.raises(ValueError):
        icupred.roc_curve([0.5, 0.5], [1, 1])


def test_severity_scores():
    obs = [
        icupred.RawObservation("s1", icupred.VitalChannel.heart_rate, 30, 75.0),
        icupred.RawObservation("s1", icupred.VitalChannel.glasgow_coma_score, 30, 15.0),
        icupred.RawObservation("s1", icupred.VitalChannel.mean_bp, 30, 85.0),
        icupred.RawObservation("s1", icupred.VitalChannel.bilirubin, 30, 0.5),
    ]
    grid = icupred.resample_to_grid(obs, 24)
    saps = icupred.saps2_score(grid, age_years=30.0)
    assert saps.total == 0
    assert 0.0 < saps.mortality_probability < 0.05
    sofa = icupred.sofa_score(grid)
    assert sofa.total == 0

    bad = [icupred.RawObservation("s1", icupred.VitalChannel.heart_rate, 30, 500.0)]
    with pytest.raises(ValueError):
        icupred.saps2_score(icupred.resample_to_grid(bad, 6), age_years=30.0)


def test_label_los_boundaries():
    def entry(death):
        return icupred.CohortEntry("s", "p", 50.0, 40.0, death)

    assert icupred.label_los(entry(5.9)) == 0
    assert icupred.label_los(entry(6.0)) == 1
    assert icupred.label_los(entry(12.0)) == 2
    assert icupred.label_los(entry(24.0)) == 3
