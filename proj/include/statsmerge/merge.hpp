#pragma once

#include <optional>
#include <string>
#include <vector>

#include "statsmerge/checkpoint.hpp"
#include "statsmerge/learner.hpp"

namespace statsmerge {

struct MergeRequest {
    std::string method;  // stats | weight_avg | task_arithmetic | ties
    MergeMode mode = MergeMode::layer_wise;
    std::optional<CoefficientTable> coefficients;
    std::optional<double> scaling;
    double keep_fraction = 0.2;
    std::optional<ModelCheckpoint> base;

    void validate() const;
};

// θ_m = Σ_k λ_k θ_k, per layer in layer_wise mode; biases take their layer's λ
ModelCheckpoint stats_merge(const std::vector<ModelCheckpoint>& task_ckpts,
                            const CoefficientTable& coeffs);

// ablation variant: θ_pre + Σ_k λ_k (θ_k − θ_pre)
ModelCheckpoint stats_merge_delta(const ModelCheckpoint& base,
                                  const std::vector<ModelCheckpoint>& task_ckpts,
                                  const CoefficientTable& coeffs);

ModelCheckpoint weight_average(const std::vector<ModelCheckpoint>& task_ckpts);

// θ_pre + λ·Σ_k (θ_k − θ_pre)
ModelCheckpoint task_arithmetic(const ModelCheckpoint& base,
                                const std::vector<ModelCheckpoint>& task_ckpts, double lambda);

// trim to top keep_fraction by magnitude per task, elect per-coordinate sign,
// mean the survivors that agree, then θ_pre + λ·τ
ModelCheckpoint ties_merge(const ModelCheckpoint& base,
                           const std::vector<ModelCheckpoint>& task_ckpts, double lambda,
                           double keep_fraction);

ModelCheckpoint run_merge(const MergeRequest& request,
                          const std::vector<ModelCheckpoint>& task_ckpts);

}  // namespace statsmerge
