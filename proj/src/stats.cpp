#include "statsmerge/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "statsmerge/error.hpp"

namespace statsmerge {

WeightStats layer_stats(const Matrix& layer_weight, const StatsConfig& cfg) {
    if (layer_weight.size() == 0) throw ParamError("layer_stats on an empty matrix");
    if (cfg.rank == 0) throw ParamError("stats rank must be >= 1");

    const double n = static_cast<double>(layer_weight.size());
    WeightStats s;
    for (double v : layer_weight.values) s.mu += v;
    s.mu /= n;
    for (double v : layer_weight.values) s.var += (v - s.mu) * (v - s.mu);
    s.var /= n;
    s.norm = frobenius_norm(layer_weight);

    const std::size_t svd_rank =
        std::min(cfg.rank, std::min(layer_weight.rows, layer_weight.cols));
    s.singular = svd_values(layer_weight, svd_rank, cfg.svd_tol);
    s.singular.resize(cfg.rank, 0.0);
    return s;
}

WeightStats task_stats(const ModelCheckpoint& ckpt, const StatsConfig& cfg) {
    ckpt.validate();
    const std::size_t L = ckpt.arch.layer_count();
    WeightStats agg;
    agg.singular.assign(cfg.rank, 0.0);
    for (std::size_t l = 0; l < L; ++l) {
        const WeightStats s = layer_stats(ckpt.weight(l), cfg);
        agg.mu += s.mu;
        agg.var += s.var;
        agg.norm += s.norm;
        for (std::size_t i = 0; i < cfg.rank; ++i) agg.singular[i] += s.singular[i];
    }
    const double inv = 1.0 / static_cast<double>(L);
    agg.mu *= inv;
    agg.var *= inv;
    agg.norm *= inv;
    for (double& v : agg.singular) v *= inv;
    return agg;
}

StatsTable layer_stats_table(const std::vector<ModelCheckpoint>& task_ckpts,
                             const StatsConfig& cfg) {
    if (task_ckpts.empty()) throw ParamError("no task checkpoints");
    StatsTable table(task_ckpts.size());
    for (std::size_t k = 0; k < task_ckpts.size(); ++k) {
        task_ckpts[k].validate();
        const std::size_t L = task_ckpts[k].arch.layer_count();
        table[k].reserve(L);
        for (std::size_t l = 0; l < L; ++l) {
            table[k].push_back(layer_stats(task_ckpts[k].weight(l), cfg));
        }
    }
    return table;
}

StatsTable task_stats_table(const std::vector<ModelCheckpoint>& task_ckpts,
                            const StatsConfig& cfg) {
    if (task_ckpts.empty()) throw ParamError("no task checkpoints");
    StatsTable table(task_ckpts.size());
    for (std::size_t k = 0; k < task_ckpts.size(); ++k) {
        table[k].push_back(task_stats(task_ckpts[k], cfg));
    }
    return table;
}

FeatureTable feature_vector(const StatsTable& stats_table, const StatsConfig& cfg) {
    if (stats_table.empty()) throw ParamError("empty stats table");
    const std::size_t K = stats_table.size();
    const std::size_t L = stats_table.front().size();
    if (L == 0) throw ParamError("stats table has zero layers");
    for (const auto& row : stats_table) {
        if (row.size() != L) throw ShapeError("stats table is not rectangular");
    }

    const std::size_t width = 3 + cfg.rank;
    FeatureTable features(K, std::vector<std::vector<double>>(L));
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t l = 0; l < L; ++l) {
            const WeightStats& s = stats_table[k][l];
            if (s.singular.size() != cfg.rank) {
                throw ShapeError("stats entry carries " + std::to_string(s.singular.size()) +
                                 " singular values, config wants " + std::to_string(cfg.rank));
            }
            std::vector<double> f;
            f.reserve(width);
            f.push_back(s.mu);
            f.push_back(s.var);
            f.push_back(s.norm);
            f.insert(f.end(), s.singular.begin(), s.singular.end());
            features[k][l] = std::move(f);
        }
    }
    if (!cfg.normalize) return features;

    const double inv_n = 1.0 / static_cast<double>(K * L);
    for (std::size_t c = 0; c < width; ++c) {
        double mean = 0.0;
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t l = 0; l < L; ++l) mean += features[k][l][c];
        mean *= inv_n;
        double var = 0.0;
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t l = 0; l < L; ++l) {
                const double d = features[k][l][c] - mean;
                var += d * d;
            }
        var *= inv_n;
        const double std_dev = std::sqrt(var);
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t l = 0; l < L; ++l) {
                double& v = features[k][l][c];
                v = std_dev == 0.0 ? 0.0 : (v - mean) / std_dev;
            }
    }
    return features;
}

}  // namespace statsmerge
