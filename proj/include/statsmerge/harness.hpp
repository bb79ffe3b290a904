#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "statsmerge/checkpoint.hpp"
#include "statsmerge/distill.hpp"
#include "statsmerge/learner.hpp"
#include "statsmerge/merge.hpp"
#include "statsmerge/stats.hpp"

namespace statsmerge {

struct TaskSuiteConfig {
    std::size_t tasks = 4;
    std::size_t classes_per_task = 4;
    std::size_t input_dim = 16;
    std::size_t train_per_task = 800;
    std::size_t val_per_task = 200;
    std::size_t test_per_task = 400;
    double cluster_separation = 6.0;
    std::uint64_t seed = 42;
    std::vector<std::size_t> hidden_dims = {64, 32};
    std::size_t pretrain_epochs = 1;
    std::size_t finetune_epochs = 150;
    double finetune_lr = 1e-3;

    std::size_t total_classes() const { return tasks * classes_per_task; }
    ArchSpec arch() const { return ArchSpec::mlp(input_dim, hidden_dims, total_classes()); }
    void validate() const;
};

struct TaskData {
    std::string task_id;
    Dataset train;
    Dataset val;
    Dataset test;
};

struct TaskSuite {
    std::vector<TaskData> tasks;
    Dataset pretrain;  // union of the train splits
};

// Gaussian clusters on task-specific orthonormal directions, offset by
// cluster_separation; class indices land in the shared [0, K·cpt) space,
// task k owning the contiguous range starting at k·cpt
TaskSuite gen_tasks(const TaskSuiteConfig& cfg);

// fraction of rows whose logit argmax (ties to lowest index) equals the label
double evaluate(const ModelCheckpoint& ckpt, const Dataset& test);

Dataset corrupt_gaussian(const Dataset& ds, double sigma, std::uint64_t seed);

// ground-truth counterpart of generate_pseudo_labels: same seeded subsample
// of the validation inputs, labels taken from the datasets instead of any
// teacher, soft rows one-hot
PseudoLabeledSet ground_truth_set(const std::vector<TaskData>& tasks, double fraction,
                                  std::uint64_t seed);

// pretrained base for a suite: seeded init + a short run over the union set
ModelCheckpoint pretrain_base(const TaskSuiteConfig& cfg, const Dataset& pretrain);

struct ReportRow {
    std::string method;
    std::vector<double> per_task;
    double avg_acc = 0.0;
};

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct ExperimentReport {
    TaskSuiteConfig config;
    StatsConfig stats_cfg;
    SMLTrainConfig sml_cfg;
    std::vector<std::string> task_ids;
    std::vector<ReportRow> rows;
    CoefficientTable coefficients;  // layer-wise stats run when present
    bool has_coefficients = false;
    std::vector<StageTiming> timings;

    // live objects for downstream consumers; not serialized
    ModelCheckpoint base_model;
    std::vector<ModelCheckpoint> task_models;
    PseudoLabeledSet pseudo;
    std::map<std::string, ModelCheckpoint> merged_models;  // keyed by row label
    std::map<std::string, SMLTrainResult> sml_runs;

    const ReportRow& row(const std::string& method) const;
};

std::string method_label(const MergeRequest& request);

// gen_tasks -> pretrain -> fine-tune -> pseudo labels -> per-method merge and
// evaluate; rows open with Pre-Trained and Individual references
ExperimentReport run_experiment(const TaskSuiteConfig& suite,
                                const std::vector<MergeRequest>& methods,
                                const SMLTrainConfig& sml_cfg, const StatsConfig& stats_cfg);

// canonical machine report: config echo, effective seed, accuracy rows,
// coefficient snapshot; no timing data so reruns stay byte-identical
std::string report_json(const ExperimentReport& report);
// wall-clock sidecar, one entry per pipeline stage
std::string timings_json(const ExperimentReport& report);
// aligned table for humans
std::string report_text(const ExperimentReport& report);

void export_heatmap(const CoefficientTable& coeffs, const std::string& path);
CoefficientTable parse_heatmap(const std::string& path);

struct HeteroReport {
    std::vector<std::string> task_ids;
    std::vector<double> teacher_acc;
    std::vector<double> distilled_acc;
    ReportRow stats_row;
    ReportRow arithmetic_row;
    std::vector<ModelCheckpoint> students;
    ModelCheckpoint student_base;
    CoefficientTable coefficients;
};

// teachers on one architecture, distilled into a smaller shared target, then
// merged with layer-wise coefficients vs task arithmetic
HeteroReport run_hetero_experiment(const TaskSuiteConfig& suite,
                                   const std::vector<std::size_t>& teacher_hidden,
                                   const std::vector<std::size_t>& student_hidden,
                                   const DistillConfig& distill_cfg,
                                   const SMLTrainConfig& sml_cfg, const StatsConfig& stats_cfg);

}  // namespace statsmerge
