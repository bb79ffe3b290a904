#include "statsmerge/learner.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "statsmerge/error.hpp"
#include "statsmerge/merge.hpp"
#include "statsmerge/optim.hpp"
#include "statsmerge/rng.hpp"

namespace statsmerge {

void SMLParams::validate() const {
    const std::size_t h = w1.rows;
    if (h == 0 || w1.cols == 0) throw ShapeError("sml w1 is empty");
    if (b1.rows != 1 || b1.cols != h) {
        throw ShapeError("sml b1 is " + std::to_string(b1.rows) + "x" + std::to_string(b1.cols) +
                         ", expected 1x" + std::to_string(h));
    }
    if (w2.rows != 1 || w2.cols != h) {
        throw ShapeError("sml w2 is " + std::to_string(w2.rows) + "x" + std::to_string(w2.cols) +
                         ", expected 1x" + std::to_string(h));
    }
    if (b2.rows != 1 || b2.cols != 1) throw ShapeError("sml b2 must be 1x1");
}

SMLParams SMLParams::init(std::size_t feature_dim, std::size_t hidden, std::uint64_t seed) {
    if (feature_dim == 0 || hidden == 0) throw ParamError("sml dims must be >= 1");
    Rng rng(seed);
    SMLParams p;
    p.w1 = Matrix(hidden, feature_dim);
    const double bound1 = std::sqrt(6.0 / static_cast<double>(feature_dim));
    for (double& v : p.w1.values) v = rng.uniform(-bound1, bound1);
    p.b1 = Matrix(1, hidden);
    p.w2 = Matrix(1, hidden);
    const double bound2 = std::sqrt(6.0 / static_cast<double>(hidden));
    for (double& v : p.w2.values) v = rng.uniform(-bound2, bound2);
    p.b2 = Matrix(1, 1);
    return p;
}

void CoefficientTable::validate() const {
    if (values.empty()) throw ParamError("coefficient table has no tasks");
    const std::size_t L = values.front().size();
    if (L == 0) throw ParamError("coefficient table has no layers");
    if (mode == MergeMode::task_wise && L != 1) {
        throw ShapeError("task_wise table must have one column, got " + std::to_string(L));
    }
    for (const auto& row : values) {
        if (row.size() != L) throw ShapeError("coefficient table is not rectangular");
    }
    for (std::size_t l = 0; l < L; ++l) {
        double sum = 0.0;
        for (std::size_t k = 0; k < values.size(); ++k) {
            const double v = values[k][l];
            if (!(v > 0.0 && v <= 1.0)) {
                throw ParamError("coefficient " + std::to_string(v) + " at task " +
                                 std::to_string(k) + ", layer " + std::to_string(l) +
                                 " outside (0,1]");
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw ParamError("layer " + std::to_string(l) + " coefficients sum to " +
                             std::to_string(sum));
        }
    }
}

namespace {

struct SmlTrace {
    std::vector<double> z1;  // pre-activation, length H
    std::vector<double> h;   // relu(z1)
    double score = 0.0;
};

SmlTrace sml_forward_trace(const SMLParams& p, const std::vector<double>& feature) {
    if (feature.size() != p.w1.cols) {
        throw ShapeError("feature has " + std::to_string(feature.size()) +
                         " channels, sml wants " + std::to_string(p.w1.cols));
    }
    const std::size_t H = p.w1.rows;
    SmlTrace t;
    t.z1.resize(H);
    t.h.resize(H);
    for (std::size_t j = 0; j < H; ++j) {
        double z = p.b1(0, j);
        for (std::size_t i = 0; i < feature.size(); ++i) z += p.w1(j, i) * feature[i];
        t.z1[j] = z;
        t.h[j] = z > 0.0 ? z : 0.0;
    }
    t.score = p.b2(0, 0);
    for (std::size_t j = 0; j < H; ++j) t.score += p.w2(0, j) * t.h[j];
    return t;
}

}  // namespace

double sml_forward(const SMLParams& params, const std::vector<double>& feature) {
    params.validate();
    return sml_forward_trace(params, feature).score;
}

CoefficientTable normalize_scores(const std::vector<std::vector<double>>& raw_scores,
                                  MergeMode mode) {
    if (raw_scores.empty()) throw ParamError("no scores to normalize");
    const std::size_t K = raw_scores.size();
    const std::size_t L = raw_scores.front().size();
    if (L == 0) throw ParamError("score table has no layers");
    for (const auto& row : raw_scores) {
        if (row.size() != L) throw ShapeError("score table is not rectangular");
    }
    CoefficientTable table;
    table.mode = mode;
    table.values.assign(K, std::vector<double>(L, 0.0));
    for (std::size_t l = 0; l < L; ++l) {
        double mx = raw_scores[0][l];
        for (std::size_t k = 1; k < K; ++k) mx = std::max(mx, raw_scores[k][l]);
        double sum = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            table.values[k][l] = std::exp(raw_scores[k][l] - mx);
            sum += table.values[k][l];
        }
        for (std::size_t k = 0; k < K; ++k) table.values[k][l] /= sum;
    }
    return table;
}

CoefficientTable uniform_table(std::size_t tasks, std::size_t layers, MergeMode mode) {
    if (tasks == 0 || layers == 0) throw ParamError("uniform table dims must be >= 1");
    CoefficientTable table;
    table.mode = mode;
    const std::size_t cols = mode == MergeMode::task_wise ? 1 : layers;
    table.values.assign(tasks, std::vector<double>(cols, 1.0 / static_cast<double>(tasks)));
    return table;
}

std::vector<double> coefficient_gradient(const std::vector<ModelCheckpoint>& task_ckpts,
                                         const std::vector<Matrix>& merged_grads,
                                         std::size_t layer) {
    if (task_ckpts.empty()) throw ParamError("no task checkpoints");
    const std::size_t L = task_ckpts.front().arch.layer_count();
    if (layer >= L) throw ShapeError("layer " + std::to_string(layer) + " >= " + std::to_string(L));
    if (merged_grads.size() != 2 * L) {
        throw ShapeError("got " + std::to_string(merged_grads.size()) + " gradient tensors for " +
                         std::to_string(2 * L) + " parameters");
    }
    std::vector<double> out(task_ckpts.size(), 0.0);
    for (std::size_t k = 0; k < task_ckpts.size(); ++k) {
        for (std::size_t p = 2 * layer; p <= 2 * layer + 1; ++p) {
            const Matrix& g = merged_grads[p];
            const Matrix& t = task_ckpts[k].params[p].tensor;
            if (!g.same_shape(t)) {
                throw ShapeError("gradient tensor " + std::to_string(p) +
                                 " does not match parameter shape");
            }
            for (std::size_t i = 0; i < g.values.size(); ++i) out[k] += g.values[i] * t.values[i];
        }
    }
    return out;
}

double sml_loss_and_grad(const std::vector<ModelCheckpoint>& task_ckpts,
                         const FeatureTable& features, const SMLParams& params, MergeMode mode,
                         const Matrix& inputs, const std::vector<std::uint32_t>& hard_labels,
                         const Matrix* soft_labels, LabelMode label_mode,
                         std::vector<double>* grad, CoefficientTable* coeffs_out) {
    params.validate();
    if (task_ckpts.empty()) throw ParamError("no task checkpoints");
    const std::size_t K = task_ckpts.size();
    const std::size_t L_model = task_ckpts.front().arch.layer_count();
    if (features.size() != K) {
        throw ShapeError("feature table has " + std::to_string(features.size()) +
                         " tasks, got " + std::to_string(K) + " checkpoints");
    }
    const std::size_t cols = features.front().size();
    const std::size_t want_cols = mode == MergeMode::layer_wise ? L_model : 1;
    if (cols != want_cols) {
        throw ShapeError("feature table has " + std::to_string(cols) + " columns, mode wants " +
                         std::to_string(want_cols));
    }

    std::vector<std::vector<SmlTrace>> traces(K, std::vector<SmlTrace>(cols));
    std::vector<std::vector<double>> raw(K, std::vector<double>(cols, 0.0));
    for (std::size_t k = 0; k < K; ++k) {
        if (features[k].size() != cols) throw ShapeError("feature table is not rectangular");
        for (std::size_t l = 0; l < cols; ++l) {
            traces[k][l] = sml_forward_trace(params, features[k][l]);
            raw[k][l] = traces[k][l].score;
        }
    }

    const CoefficientTable coeffs = normalize_scores(raw, mode);
    if (coeffs_out) *coeffs_out = coeffs;

    const ModelCheckpoint merged = stats_merge(task_ckpts, coeffs);
    const Matrix logits = forward_logits(merged, inputs);

    double loss = 0.0;
    Matrix grad_z;
    const bool want_grad = grad != nullptr;
    if (label_mode == LabelMode::kd_soft) {
        if (!soft_labels) throw ParamError("kd_soft needs soft labels");
        if (!soft_labels->same_shape(logits)) {
            throw ShapeError("soft labels are " + std::to_string(soft_labels->rows) + "x" +
                             std::to_string(soft_labels->cols) + ", logits are " +
                             std::to_string(logits.rows) + "x" + std::to_string(logits.cols));
        }
        const Matrix probs = softmax_rows(logits);
        const double inv_n = 1.0 / static_cast<double>(logits.rows);
        for (std::size_t r = 0; r < logits.rows; ++r) {
            std::vector<double> t_row(logits.cols), q_row(logits.cols);
            for (std::size_t c = 0; c < logits.cols; ++c) {
                t_row[c] = (*soft_labels)(r, c);
                q_row[c] = probs(r, c);
            }
            loss += kl_loss(t_row, q_row) * inv_n;
        }
        if (want_grad) {
            grad_z = probs;
            for (std::size_t i = 0; i < grad_z.values.size(); ++i) {
                grad_z.values[i] = (grad_z.values[i] - soft_labels->values[i]) * inv_n;
            }
        }
    } else {
        loss = cross_entropy(logits, hard_labels, want_grad ? &grad_z : nullptr);
    }
    if (!want_grad) return loss;

    const std::vector<Matrix> merged_grads = backward(merged, inputs, grad_z);

    // dLoss/dλ per (task, column)
    std::vector<std::vector<double>> dlam(K, std::vector<double>(cols, 0.0));
    for (std::size_t l = 0; l < L_model; ++l) {
        const std::vector<double> cg = coefficient_gradient(task_ckpts, merged_grads, l);
        const std::size_t col = mode == MergeMode::layer_wise ? l : 0;
        for (std::size_t k = 0; k < K; ++k) dlam[k][col] += cg[k];
    }

    // softmax jacobian: ds_k = λ_k (dλ_k − Σ_j λ_j dλ_j), per column
    std::vector<std::vector<double>> dscore(K, std::vector<double>(cols, 0.0));
    for (std::size_t l = 0; l < cols; ++l) {
        double dot = 0.0;
        for (std::size_t j = 0; j < K; ++j) dot += coeffs.values[j][l] * dlam[j][l];
        for (std::size_t k = 0; k < K; ++k) {
            dscore[k][l] = coeffs.values[k][l] * (dlam[k][l] - dot);
        }
    }

    // accumulate through the MLP
    const std::size_t H = params.hidden_dim();
    const std::size_t F = params.feature_dim();
    Matrix dw1(H, F), db1(1, H), dw2(1, H), db2(1, 1);
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t l = 0; l < cols; ++l) {
            const double ds = dscore[k][l];
            const SmlTrace& t = traces[k][l];
            const std::vector<double>& f = features[k][l];
            db2(0, 0) += ds;
            for (std::size_t j = 0; j < H; ++j) {
                dw2(0, j) += ds * t.h[j];
                if (t.z1[j] <= 0.0) continue;
                const double dz1 = ds * params.w2(0, j);
                db1(0, j) += dz1;
                for (std::size_t i = 0; i < F; ++i) dw1(j, i) += dz1 * f[i];
            }
        }
    }

    grad->clear();
    grad->reserve(dw1.size() + db1.size() + dw2.size() + db2.size());
    for (const Matrix* m : {&dw1, &db1, &dw2, &db2}) {
        grad->insert(grad->end(), m->values.begin(), m->values.end());
    }
    return loss;
}

std::vector<double> flatten_sml(const SMLParams& params) {
    std::vector<double> flat;
    for (const Matrix* m : {&params.w1, &params.b1, &params.w2, &params.b2}) {
        flat.insert(flat.end(), m->values.begin(), m->values.end());
    }
    return flat;
}

void unflatten_sml(SMLParams& params, const std::vector<double>& flat) {
    const std::size_t total =
        params.w1.size() + params.b1.size() + params.w2.size() + params.b2.size();
    if (flat.size() != total) {
        throw ShapeError("flat vector has " + std::to_string(flat.size()) +
                         " values, sml wants " + std::to_string(total));
    }
    std::size_t at = 0;
    for (Matrix* m : {&params.w1, &params.b1, &params.w2, &params.b2}) {
        std::copy_n(flat.begin() + at, m->size(), m->values.begin());
        at += m->size();
    }
}

SMLTrainResult train_sml(const std::vector<ModelCheckpoint>& task_ckpts,
                         const PseudoLabeledSet& pseudo_set, const SMLTrainConfig& cfg,
                         const StatsConfig& stats_cfg, MergeMode mode) {
    if (task_ckpts.empty()) throw ParamError("no task checkpoints");
    for (std::size_t k = 1; k < task_ckpts.size(); ++k) {
        if (!merge_compatible(task_ckpts.front(), task_ckpts[k])) {
            throw CompatError("checkpoint " + std::to_string(k) +
                              " is not merge-compatible with checkpoint 0");
        }
    }
    pseudo_set.validate();
    if (pseudo_set.num_classes != task_ckpts.front().arch.output_dim()) {
        throw ShapeError("pseudo set has " + std::to_string(pseudo_set.num_classes) +
                         " classes, models output " +
                         std::to_string(task_ckpts.front().arch.output_dim()));
    }
    if (cfg.epochs == 0) throw ParamError("epochs must be >= 1");
    if (cfg.batch_size == 0) throw ParamError("batch_size must be >= 1");

    const StatsTable table = mode == MergeMode::layer_wise ? layer_stats_table(task_ckpts, stats_cfg)
                                                           : task_stats_table(task_ckpts, stats_cfg);
    const FeatureTable features = feature_vector(table, stats_cfg);

    Rng root(cfg.seed);
    Rng init_rng = root.child(1);
    Rng shuffle_rng = root.child(2);
    SMLParams params =
        SMLParams::init(3 + stats_cfg.rank, cfg.hidden_dim, init_rng.next_u64());

    std::vector<double> flat = flatten_sml(params);
    OptimizerState opt = OptimizerState::for_size(flat.size(), cfg.base_lr);
    opt.decay_every = cfg.decay_every;
    opt.decay_factor = cfg.decay_factor;

    const auto full_loss = [&](const SMLParams& p, CoefficientTable* coeffs) {
        return sml_loss_and_grad(task_ckpts, features, p, mode, pseudo_set.inputs,
                                 pseudo_set.hard_label, &pseudo_set.soft_label, cfg.label_mode,
                                 nullptr, coeffs);
    };

    SMLTrainResult result;
    result.initial_loss = full_loss(params, nullptr);

    const std::size_t n = pseudo_set.size();
    std::vector<double> batch_grad;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const std::vector<std::size_t> order = shuffled_indices(n, shuffle_rng);
        for (std::size_t begin = 0; begin < n; begin += cfg.batch_size) {
            const std::size_t end = std::min(begin + cfg.batch_size, n);
            const std::vector<std::size_t> rows(order.begin() + begin, order.begin() + end);
            const Matrix batch_inputs = take_rows(pseudo_set.inputs, rows);
            std::vector<std::uint32_t> batch_hard(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i) {
                batch_hard[i] = pseudo_set.hard_label[rows[i]];
            }
            Matrix batch_soft;
            const Matrix* soft_ptr = nullptr;
            if (cfg.label_mode == LabelMode::kd_soft) {
                batch_soft = take_rows(pseudo_set.soft_label, rows);
                soft_ptr = &batch_soft;
            }
            sml_loss_and_grad(task_ckpts, features, params, mode, batch_inputs, batch_hard,
                              soft_ptr, cfg.label_mode, &batch_grad, nullptr);
            adam_step(flat, batch_grad, opt, epoch);
            unflatten_sml(params, flat);
        }
        EpochLog log;
        log.lr = opt.effective_lr(epoch);
        log.loss = full_loss(params, &log.coeffs);
        result.trace.push_back(std::move(log));
    }

    result.params = std::move(params);
    result.coeffs = result.trace.back().coeffs;
    return result;
}

}  // namespace statsmerge
