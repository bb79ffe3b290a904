#include "statsmerge/merge.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "statsmerge/error.hpp"

namespace statsmerge {

namespace {

void require_compatible(const std::vector<ModelCheckpoint>& task_ckpts) {
    if (task_ckpts.empty()) throw ParamError("no checkpoints to merge");
    task_ckpts.front().validate();
    for (std::size_t k = 1; k < task_ckpts.size(); ++k) {
        task_ckpts[k].validate();
        if (!merge_compatible(task_ckpts.front(), task_ckpts[k])) {
            throw CompatError("checkpoint " + std::to_string(k) +
                              " is not merge-compatible with checkpoint 0");
        }
    }
}

void require_base(const ModelCheckpoint& base, const std::vector<ModelCheckpoint>& task_ckpts) {
    require_compatible(task_ckpts);
    base.validate();
    if (!merge_compatible(base, task_ckpts.front())) {
        throw CompatError("base checkpoint does not match the task checkpoints");
    }
}

ModelCheckpoint merged_shell(const ModelCheckpoint& like) {
    ModelCheckpoint out = like;
    for (auto& p : out.params) std::fill(p.tensor.values.begin(), p.tensor.values.end(), 0.0);
    out.meta.role = "merged";
    out.meta.task_id.clear();
    return out;
}

}  // namespace

void MergeRequest::validate() const {
    if (method == "stats") {
        if (coefficients) coefficients->validate();
    } else if (method == "ties") {
        if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
            throw ParamError("keep_fraction must be in (0,1], got " +
                             std::to_string(keep_fraction));
        }
    } else if (method != "task_arithmetic" && method != "weight_avg") {
        throw ParamError("unknown merge method '" + method + "'");
    }
}

ModelCheckpoint stats_merge(const std::vector<ModelCheckpoint>& task_ckpts,
                            const CoefficientTable& coeffs) {
    require_compatible(task_ckpts);
    coeffs.validate();
    const std::size_t K = task_ckpts.size();
    const std::size_t L = task_ckpts.front().arch.layer_count();
    if (coeffs.tasks() != K) {
        throw ShapeError("coefficient table has " + std::to_string(coeffs.tasks()) +
                         " tasks, got " + std::to_string(K) + " checkpoints");
    }
    if (coeffs.mode == MergeMode::layer_wise && coeffs.layers() != L) {
        throw ShapeError("coefficient table has " + std::to_string(coeffs.layers()) +
                         " layers, checkpoints have " + std::to_string(L));
    }

    ModelCheckpoint out = merged_shell(task_ckpts.front());
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t l = 0; l < L; ++l) {
            const double lam =
                coeffs.mode == MergeMode::layer_wise ? coeffs.values[k][l] : coeffs.values[k][0];
            for (std::size_t p = 2 * l; p <= 2 * l + 1; ++p) {
                const auto& src = task_ckpts[k].params[p].tensor.values;
                auto& dst = out.params[p].tensor.values;
                for (std::size_t i = 0; i < src.size(); ++i) dst[i] += lam * src[i];
            }
        }
    }
    return out;
}

ModelCheckpoint stats_merge_delta(const ModelCheckpoint& base,
                                  const std::vector<ModelCheckpoint>& task_ckpts,
                                  const CoefficientTable& coeffs) {
    require_base(base, task_ckpts);
    coeffs.validate();
    const std::size_t K = task_ckpts.size();
    const std::size_t L = base.arch.layer_count();
    if (coeffs.tasks() != K) {
        throw ShapeError("coefficient table has " + std::to_string(coeffs.tasks()) +
                         " tasks, got " + std::to_string(K) + " checkpoints");
    }
    if (coeffs.mode == MergeMode::layer_wise && coeffs.layers() != L) {
        throw ShapeError("coefficient table has " + std::to_string(coeffs.layers()) +
                         " layers, checkpoints have " + std::to_string(L));
    }

    ModelCheckpoint out = base;
    out.meta.role = "merged";
    out.meta.task_id.clear();
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t l = 0; l < L; ++l) {
            const double lam =
                coeffs.mode == MergeMode::layer_wise ? coeffs.values[k][l] : coeffs.values[k][0];
            for (std::size_t p = 2 * l; p <= 2 * l + 1; ++p) {
                const auto& src = task_ckpts[k].params[p].tensor.values;
                const auto& pre = base.params[p].tensor.values;
                auto& dst = out.params[p].tensor.values;
                for (std::size_t i = 0; i < src.size(); ++i) dst[i] += lam * (src[i] - pre[i]);
            }
        }
    }
    return out;
}

ModelCheckpoint weight_average(const std::vector<ModelCheckpoint>& task_ckpts) {
    require_compatible(task_ckpts);
    const std::size_t K = task_ckpts.size();
    const double lam = 1.0 / static_cast<double>(K);
    ModelCheckpoint out = merged_shell(task_ckpts.front());
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t p = 0; p < out.params.size(); ++p) {
            const auto& src = task_ckpts[k].params[p].tensor.values;
            auto& dst = out.params[p].tensor.values;
            for (std::size_t i = 0; i < src.size(); ++i) dst[i] += lam * src[i];
        }
    }
    return out;
}

ModelCheckpoint task_arithmetic(const ModelCheckpoint& base,
                                const std::vector<ModelCheckpoint>& task_ckpts, double lambda) {
    require_base(base, task_ckpts);
    ModelCheckpoint out = base;
    out.meta.role = "merged";
    out.meta.task_id.clear();
    for (const auto& task : task_ckpts) {
        for (std::size_t p = 0; p < out.params.size(); ++p) {
            const auto& src = task.params[p].tensor.values;
            const auto& pre = base.params[p].tensor.values;
            auto& dst = out.params[p].tensor.values;
            for (std::size_t i = 0; i < src.size(); ++i) dst[i] += lambda * (src[i] - pre[i]);
        }
    }
    return out;
}

ModelCheckpoint ties_merge(const ModelCheckpoint& base,
                           const std::vector<ModelCheckpoint>& task_ckpts, double lambda,
                           double keep_fraction) {
    require_base(base, task_ckpts);
    if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
        throw ParamError("keep_fraction must be in (0,1], got " + std::to_string(keep_fraction));
    }

    const std::vector<double> pre = flatten_params(base);
    const std::size_t n = pre.size();
    const std::size_t K = task_ckpts.size();
    const auto keep = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::floor(keep_fraction * static_cast<double>(n) + 1e-9)), 1,
        n);

    // trimmed task vectors, zeros outside each task's top-keep support
    std::vector<std::vector<double>> tau(K, std::vector<double>(n, 0.0));
    for (std::size_t k = 0; k < K; ++k) {
        const std::vector<double> theta = flatten_params(task_ckpts[k]);
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            const double ma = std::abs(theta[a] - pre[a]);
            const double mb = std::abs(theta[b] - pre[b]);
            return ma != mb ? ma > mb : a < b;
        });
        for (std::size_t i = 0; i < keep; ++i) {
            tau[k][idx[i]] = theta[idx[i]] - pre[idx[i]];
        }
    }

    std::vector<double> merged(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double pos = 0.0, neg = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            if (tau[k][i] > 0.0) pos += tau[k][i];
            if (tau[k][i] < 0.0) neg -= tau[k][i];
        }
        const int sign = pos > neg ? 1 : (neg > pos ? -1 : 0);
        if (sign == 0) continue;
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t k = 0; k < K; ++k) {
            if ((sign > 0 && tau[k][i] > 0.0) || (sign < 0 && tau[k][i] < 0.0)) {
                sum += tau[k][i];
                ++count;
            }
        }
        merged[i] = sum / static_cast<double>(count);
    }

    std::vector<double> theta_m(n);
    for (std::size_t i = 0; i < n; ++i) theta_m[i] = pre[i] + lambda * merged[i];
    ModelCheckpoint out = base;
    out.meta.role = "merged";
    out.meta.task_id.clear();
    unflatten_params(out, theta_m);
    return out;
}

ModelCheckpoint run_merge(const MergeRequest& request,
                          const std::vector<ModelCheckpoint>& task_ckpts) {
    request.validate();
    if (request.method == "stats") {
        if (!request.coefficients) throw ParamError("stats merge needs a coefficient table");
        return stats_merge(task_ckpts, *request.coefficients);
    }
    if (request.method == "weight_avg") return weight_average(task_ckpts);
    if (!request.base) throw ParamError(request.method + " needs a base checkpoint");
    if (request.method == "task_arithmetic") {
        return task_arithmetic(*request.base, task_ckpts, request.scaling.value_or(1.0));
    }
    return ties_merge(*request.base, task_ckpts, request.scaling.value_or(1.0),
                      request.keep_fraction);
}

}  // namespace statsmerge
