#pragma once

#include <cstdint>
#include <vector>

#include "statsmerge/checkpoint.hpp"
#include "statsmerge/matrix.hpp"
#include "statsmerge/svd.hpp"

namespace statsmerge {

struct WeightStats {
    double mu = 0.0;
    double var = 0.0;
    double norm = 0.0;
    std::vector<double> singular;  // descending, length == rank
};

struct StatsConfig {
    std::size_t rank = 3;
    bool normalize = true;
    double svd_tol = kDefaultSvdTol;
};

// mu/var over entries (population variance), Frobenius norm, top-r singular values
// zero-padded when r exceeds the smaller dimension
WeightStats layer_stats(const Matrix& layer_weight, const StatsConfig& cfg);

// elementwise mean of layer_stats over weight tensors; biases excluded
WeightStats task_stats(const ModelCheckpoint& ckpt, const StatsConfig& cfg);

using StatsTable = std::vector<std::vector<WeightStats>>;            // K×L
using FeatureTable = std::vector<std::vector<std::vector<double>>>;  // K×L×(3+r)

// K×L table of per-weight-tensor stats, one column per layer
StatsTable layer_stats_table(const std::vector<ModelCheckpoint>& task_ckpts,
                             const StatsConfig& cfg);

// K×1 table collapsing each model to its task_stats
StatsTable task_stats_table(const std::vector<ModelCheckpoint>& task_ckpts,
                            const StatsConfig& cfg);

// flatten to [mu, var, norm, sv1..svr]; z-score each channel across all K×L
// entries when cfg.normalize (zero-variance channels map to 0)
FeatureTable feature_vector(const StatsTable& stats_table, const StatsConfig& cfg);

}  // namespace statsmerge
