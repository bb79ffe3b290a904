"""Model merging with learned per-layer coefficients.

Thin wrapper over the native module: task-specific checkpoints in, one
merged checkpoint out, with weight-statistics features driving a small
learned coefficient network. Baselines (weight averaging, task
arithmetic, sign-elected trimming) and the synthetic benchmark harness
ride along.
"""

import json as _json

from ._core import (
    ArchSpec,
    CoefficientTable,
    Dataset,
    DistillConfig,
    EpochLog,
    ExperimentReport,
    HeteroReport,
    LabelMode,
    MergeMode,
    MergeRequest,
    ModelCheckpoint,
    PseudoLabeledSet,
    ReportRow,
    SMLParams,
    SMLTrainConfig,
    SMLTrainResult,
    StageTiming,
    StatsConfig,
    TaskData,
    TaskSuite,
    TaskSuiteConfig,
    WeightStats,
    ce_loss,
    corrupt_gaussian,
    evaluate,
    export_heatmap,
    feature_vector,
    fine_tune,
    forward_logits,
    gen_tasks,
    generate_pseudo_labels,
    ground_truth_set,
    hetero_distill,
    init_checkpoint,
    kl_loss,
    layer_stats,
    layer_stats_table,
    load_checkpoint,
    load_dataset,
    load_pseudoset,
    load_sml,
    merge_compatible,
    normalize_scores,
    param_fingerprint,
    parse_heatmap,
    pretrain_base,
    pseudo_sample_rows,
    run_experiment,
    run_hetero_experiment,
    run_merge,
    save_checkpoint,
    save_dataset,
    save_pseudoset,
    save_sml,
    sml_forward,
    stats_merge,
    stats_merge_delta,
    svd_values,
    task_arithmetic,
    task_stats,
    task_stats_table,
    ties_merge,
    train_sml,
    train_supervised,
    uniform_table,
    weight_average,
)

__version__ = "0.1.0"


def report_dict(report):
    """ExperimentReport -> plain dict (parsed canonical JSON)."""
    return _json.loads(report.to_json())
