#pragma once

#include <cstdint>
#include <vector>

#include "statsmerge/checkpoint.hpp"
#include "statsmerge/distill.hpp"
#include "statsmerge/matrix.hpp"
#include "statsmerge/stats.hpp"

namespace statsmerge {

enum class MergeMode { task_wise, layer_wise };

struct SMLParams {
    Matrix w1;  // H×(3+r)
    Matrix b1;  // 1×H
    Matrix w2;  // 1×H
    Matrix b2;  // 1×1

    void validate() const;
    std::size_t hidden_dim() const { return w1.rows; }
    std::size_t feature_dim() const { return w1.cols; }

    // zero-mean uniform fan-in scaling; raw scores start near 0 so the
    // initial coefficients sit near 1/K
    static SMLParams init(std::size_t feature_dim, std::size_t hidden, std::uint64_t seed);
};

struct CoefficientTable {
    MergeMode mode = MergeMode::layer_wise;
    std::vector<std::vector<double>> values;  // K rows; task_wise has one column

    std::size_t tasks() const { return values.size(); }
    std::size_t layers() const { return values.empty() ? 0 : values.front().size(); }
    void validate() const;  // rectangular, entries in (0,1], per-layer task sums == 1 within 1e-9
};

enum class LabelMode { kd_hard, kd_soft, ground_truth };

struct SMLTrainConfig {
    std::size_t epochs = 500;
    double base_lr = 1e-3;
    std::size_t decay_every = 100;
    double decay_factor = 0.1;
    std::size_t batch_size = 32;
    std::size_t hidden_dim = 64;
    LabelMode label_mode = LabelMode::kd_hard;
    std::uint64_t seed = 0;
    double pseudo_fraction = 0.2;  // validation share fed to the teachers; 1.0 = "++" setting
};

double sml_forward(const SMLParams& params, const std::vector<double>& feature);

// softmax across the task axis, independently per layer column
CoefficientTable normalize_scores(const std::vector<std::vector<double>>& raw_scores,
                                  MergeMode mode);

CoefficientTable uniform_table(std::size_t tasks, std::size_t layers, MergeMode mode);

// dLoss/dλ_k for layer l: inner product of layer-l merged-parameter gradients
// (weight and bias) with task k's layer-l parameters
std::vector<double> coefficient_gradient(const std::vector<ModelCheckpoint>& task_ckpts,
                                         const std::vector<Matrix>& merged_grads, std::size_t layer);

// one full differentiable pass: features -> scores -> softmax -> merge ->
// forward -> loss, with the gradient taken all the way back into the SML
// parameters (flattened w1,b1,w2,b2 order); soft_labels rows align with inputs
double sml_loss_and_grad(const std::vector<ModelCheckpoint>& task_ckpts,
                         const FeatureTable& features, const SMLParams& params, MergeMode mode,
                         const Matrix& inputs, const std::vector<std::uint32_t>& hard_labels,
                         const Matrix* soft_labels, LabelMode label_mode,
                         std::vector<double>* grad = nullptr,
                         CoefficientTable* coeffs_out = nullptr);

std::vector<double> flatten_sml(const SMLParams& params);
void unflatten_sml(SMLParams& params, const std::vector<double>& flat);

struct EpochLog {
    double lr = 0.0;
    double loss = 0.0;  // full pseudo-set loss after the epoch's updates
    CoefficientTable coeffs;
};

struct SMLTrainResult {
    SMLParams params;
    CoefficientTable coeffs;
    double initial_loss = 0.0;
    std::vector<EpochLog> trace;
};

SMLTrainResult train_sml(const std::vector<ModelCheckpoint>& task_ckpts,
                         const PseudoLabeledSet& pseudo_set, const SMLTrainConfig& cfg,
                         const StatsConfig& stats_cfg, MergeMode mode);

}  // namespace statsmerge
