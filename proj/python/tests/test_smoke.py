import json

import numpy as np
import pytest

import statsmerge as sm


def tiny_config(seed=7):
    cfg = sm.TaskSuiteConfig()
    cfg.tasks = 2
    cfg.classes_per_task = 2
    cfg.input_dim = 6
    cfg.train_per_task = 60
    cfg.val_per_task = 30
    cfg.test_per_task = 40
    cfg.cluster_separation = 6.0
    cfg.seed = seed
    cfg.hidden_dims = [16]
    cfg.pretrain_epochs = 2
    cfg.finetune_epochs = 30
    return cfg


@pytest.fixture(scope="module")
def pipeline():
    cfg = tiny_config()
    suite = sm.gen_tasks(cfg)
    base = sm.pretrain_base(cfg, suite.pretrain)
    models = []
    for k, task in enumerate(suite.tasks):
        m = sm.fine_tune(base, task.train, cfg.finetune_epochs, cfg.finetune_lr, 100 + k)
        m.task_id = task.task_id
        models.append(m)
    return cfg, suite, base, models


def test_svd_matches_numpy():
    rng = np.random.default_rng(3)
    for _ in range(20):
        a = rng.uniform(-1.0, 1.0, size=(rng.integers(2, 12), rng.integers(2, 12)))
        want = np.linalg.svd(a, compute_uv=False)[:3]
        got = sm.svd_values(a, 3)
        np.testing.assert_allclose(got[: len(want)], want, rtol=1e-8, atol=1e-10)


def test_layer_stats_identity():
    s = sm.layer_stats(np.eye(3))
    assert s.mu == pytest.approx(1.0 / 3.0)
    assert s.var == pytest.approx(2.0 / 9.0)
    assert s.norm == pytest.approx(np.sqrt(3.0))
    np.testing.assert_allclose(s.singular, [1.0, 1.0, 1.0], rtol=1e-12)


def test_weight_average_equals_uniform_stats_merge(pipeline):
    _, _, base, models = pipeline
    wa = sm.weight_average(models)
    uni = sm.uniform_table(len(models), base.arch.layer_count, sm.MergeMode.layer_wise)
    via_stats = sm.stats_merge(models, uni)
    assert sm.param_fingerprint(wa) == sm.param_fingerprint(via_stats)


def test_merged_model_evaluates(pipeline):
    cfg, suite, base, models = pipeline
    merged = sm.task_arithmetic(base, models, 0.5)
    accs = [sm.evaluate(merged, t.test) for t in suite.tasks]
    assert all(0.0 <= a <= 1.0 for a in accs)
    assert sm.merge_compatible(merged, models[0])


def test_sml_training_yields_simplex_coefficients(pipeline):
    cfg, suite, base, models = pipeline
    pseudo = sm.generate_pseudo_labels(models, [t.val.inputs for t in suite.tasks], 0.3, 11)
    sml_cfg = sm.SMLTrainConfig()
    sml_cfg.epochs = 30
    sml_cfg.hidden_dim = 8
    sml_cfg.seed = 5
    result = sm.train_sml(models, pseudo, sml_cfg, sm.StatsConfig(), sm.MergeMode.layer_wise)
    values = np.array(result.coeffs.values)
    assert values.shape == (len(models), base.arch.layer_count)
    np.testing.assert_allclose(values.sum(axis=0), 1.0, atol=1e-9)
    assert ((values > 0.0) & (values < 1.0)).all()
    merged = sm.stats_merge(models, result.coeffs)
    assert merged.role == "merged"


def test_checkpoint_roundtrip(tmp_path, pipeline):
    _, _, base, models = pipeline
    path = str(tmp_path / "model.smrg")
    sm.save_checkpoint(models[0], path)
    back = sm.load_checkpoint(path)
    assert back == models[0]
    assert sm.param_fingerprint(back) == sm.param_fingerprint(models[0])


def test_experiment_reports_are_deterministic():
    cfg = tiny_config(seed=19)
    methods = [sm.MergeRequest(), sm.MergeRequest()]
    methods[0].method = "weight_avg"
    methods[1].method = "stats"
    methods[1].mode = sm.MergeMode.layer_wise
    sml_cfg = sm.SMLTrainConfig()
    sml_cfg.epochs = 20
    sml_cfg.hidden_dim = 8
    first = sm.run_experiment(cfg, methods, sml_cfg, sm.StatsConfig())
    second = sm.run_experiment(cfg, methods, sml_cfg, sm.StatsConfig())
    assert first.to_json() == second.to_json()
    d = sm.report_dict(first)
    assert [r["method"] for r in d["rows"]][:2] == ["Pre-Trained", "Individual"]
    avg = d["rows"][0]["avg_acc"]
    assert avg == pytest.approx(np.mean(list(d["rows"][0]["per_task"].values())), abs=1e-12)


def test_errors_surface_as_python_exceptions():
    with pytest.raises(ValueError):
        sm.svd_values(np.zeros((0, 0)), 3)
    with pytest.raises(OSError):
        sm.load_checkpoint("/nonexistent/path.smrg")
    with pytest.raises(ValueError):
        bad = sm.TaskSuiteConfig()
        bad.tasks = 0
        bad.validate()
