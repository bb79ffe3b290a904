#include "statsmerge/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "statsmerge/error.hpp"
#include "statsmerge/optim.hpp"
#include "statsmerge/rng.hpp"

namespace statsmerge {

void ArchSpec::validate() const {
    if (layers.empty()) throw ShapeError("arch has no layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (layers[i].in_dim == 0 || layers[i].out_dim == 0) {
            throw ShapeError("layer " + std::to_string(i) + " has a zero dimension");
        }
        if (i + 1 < layers.size() && layers[i].out_dim != layers[i + 1].in_dim) {
            throw ShapeError("layer " + std::to_string(i) + " out_dim " +
                             std::to_string(layers[i].out_dim) + " != layer " +
                             std::to_string(i + 1) + " in_dim " +
                             std::to_string(layers[i + 1].in_dim));
        }
    }
}

ArchSpec ArchSpec::mlp(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
    ArchSpec arch;
    std::size_t prev = in;
    for (std::size_t h : hidden) {
        arch.layers.push_back({prev, h, Activation::relu});
        prev = h;
    }
    arch.layers.push_back({prev, out, Activation::identity});
    arch.validate();
    return arch;
}

void ModelCheckpoint::validate() const {
    arch.validate();
    if (params.size() != 2 * arch.layers.size()) {
        throw ShapeError("checkpoint has " + std::to_string(params.size()) +
                         " tensors, arch wants " + std::to_string(2 * arch.layers.size()));
    }
    for (std::size_t l = 0; l < arch.layers.size(); ++l) {
        const auto& spec = arch.layers[l];
        const auto& w = params[2 * l];
        const auto& b = params[2 * l + 1];
        const std::string stem = "layer" + std::to_string(l);
        if (w.name != stem + ".weight" || b.name != stem + ".bias") {
            throw ShapeError("tensor names out of order at layer " + std::to_string(l));
        }
        if (w.tensor.rows != spec.out_dim || w.tensor.cols != spec.in_dim) {
            throw ShapeError(w.name + " is " + std::to_string(w.tensor.rows) + "x" +
                             std::to_string(w.tensor.cols) + ", arch wants " +
                             std::to_string(spec.out_dim) + "x" + std::to_string(spec.in_dim));
        }
        if (b.tensor.rows != 1 || b.tensor.cols != spec.out_dim) {
            throw ShapeError(b.name + " is " + std::to_string(b.tensor.rows) + "x" +
                             std::to_string(b.tensor.cols) + ", arch wants 1x" +
                             std::to_string(spec.out_dim));
        }
    }
}

void Dataset::validate() const {
    if (inputs.rows == 0) throw ParamError("dataset is empty");
    if (num_classes == 0) throw ParamError("dataset has zero classes");
    if (labels.size() != inputs.rows) {
        throw ShapeError("dataset has " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(inputs.rows) + " inputs");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= num_classes) {
            throw ParamError("label " + std::to_string(labels[i]) + " at row " +
                             std::to_string(i) + " >= num_classes " +
                             std::to_string(num_classes));
        }
    }
}

bool merge_compatible(const ModelCheckpoint& a, const ModelCheckpoint& b) {
    return a.arch == b.arch && a.meta.base_fingerprint == b.meta.base_fingerprint;
}

namespace {

void fnv1a(std::uint64_t& h, const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= bytes[i];
        h *= 1099511628211ULL;
    }
}

void fnv1a_u64(std::uint64_t& h, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        h ^= static_cast<unsigned char>(v >> (8 * i));
        h *= 1099511628211ULL;
    }
}

}  // namespace

std::uint64_t param_fingerprint(const ModelCheckpoint& ckpt) {
    std::uint64_t h = 14695981039346656037ULL;
    for (const auto& p : ckpt.params) {
        fnv1a(h, p.name.data(), p.name.size());
        fnv1a_u64(h, p.tensor.rows);
        fnv1a_u64(h, p.tensor.cols);
        for (double v : p.tensor.values) fnv1a_u64(h, std::bit_cast<std::uint64_t>(v));
    }
    return h;
}

ModelCheckpoint init_checkpoint(const ArchSpec& arch, std::uint64_t seed) {
    arch.validate();
    Rng rng(seed);
    ModelCheckpoint ckpt;
    ckpt.arch = arch;
    for (std::size_t l = 0; l < arch.layers.size(); ++l) {
        const auto& spec = arch.layers[l];
        Matrix w(spec.out_dim, spec.in_dim);
        const double bound = std::sqrt(6.0 / static_cast<double>(spec.in_dim));
        for (double& v : w.values) v = rng.uniform(-bound, bound);
        Matrix b(1, spec.out_dim);
        const std::string stem = "layer" + std::to_string(l);
        ckpt.params.push_back({stem + ".weight", std::move(w)});
        ckpt.params.push_back({stem + ".bias", std::move(b)});
    }
    ckpt.meta.role = "pretrained";
    ckpt.meta.base_fingerprint = param_fingerprint(ckpt);
    return ckpt;
}

namespace {

// activations after each layer; trace[0] is the batch itself
std::vector<Matrix> forward_trace(const ModelCheckpoint& ckpt, const Matrix& batch) {
    if (batch.cols != ckpt.arch.input_dim()) {
        throw ShapeError("batch has " + std::to_string(batch.cols) + " features, arch wants " +
                         std::to_string(ckpt.arch.input_dim()));
    }
    std::vector<Matrix> trace;
    trace.reserve(ckpt.arch.layers.size() + 1);
    trace.push_back(batch);
    for (std::size_t l = 0; l < ckpt.arch.layers.size(); ++l) {
        Matrix z = matmul(trace.back(), transpose(ckpt.weight(l)));
        const Matrix& b = ckpt.bias(l);
        for (std::size_t r = 0; r < z.rows; ++r)
            for (std::size_t c = 0; c < z.cols; ++c) z(r, c) += b(0, c);
        if (ckpt.arch.layers[l].activation == Activation::relu) {
            for (double& v : z.values) v = v > 0.0 ? v : 0.0;
        }
        trace.push_back(std::move(z));
    }
    return trace;
}

}  // namespace

Matrix forward_logits(const ModelCheckpoint& ckpt, const Matrix& batch) {
    return forward_trace(ckpt, batch).back();
}

Matrix forward(const ModelCheckpoint& ckpt, const Matrix& batch) {
    return softmax_rows(forward_logits(ckpt, batch));
}

std::vector<Matrix> backward(const ModelCheckpoint& ckpt, const Matrix& batch,
                             const Matrix& loss_grad_at_logits) {
    const std::vector<Matrix> trace = forward_trace(ckpt, batch);
    const std::size_t L = ckpt.arch.layers.size();
    if (!loss_grad_at_logits.same_shape(trace.back())) {
        throw ShapeError("upstream gradient is " + std::to_string(loss_grad_at_logits.rows) +
                         "x" + std::to_string(loss_grad_at_logits.cols) + ", logits are " +
                         std::to_string(trace.back().rows) + "x" +
                         std::to_string(trace.back().cols));
    }
    std::vector<Matrix> grads(2 * L);
    Matrix dz = loss_grad_at_logits;
    for (std::size_t l = L; l-- > 0;) {
        const Matrix& x_in = trace[l];
        grads[2 * l] = matmul(transpose(dz), x_in);
        Matrix db(1, dz.cols);
        for (std::size_t r = 0; r < dz.rows; ++r)
            for (std::size_t c = 0; c < dz.cols; ++c) db(0, c) += dz(r, c);
        grads[2 * l + 1] = std::move(db);
        if (l == 0) break;
        Matrix dx = matmul(dz, ckpt.weight(l));
        if (ckpt.arch.layers[l - 1].activation == Activation::relu) {
            const Matrix& a = trace[l];  // post-ReLU output of layer l-1
            for (std::size_t i = 0; i < dx.values.size(); ++i) {
                if (a.values[i] <= 0.0) dx.values[i] = 0.0;
            }
        }
        dz = std::move(dx);
    }
    return grads;
}

double cross_entropy(const Matrix& logits, const std::vector<std::uint32_t>& labels,
                     Matrix* grad_at_logits) {
    if (labels.size() != logits.rows) {
        throw ShapeError("got " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(logits.rows) + " logit rows");
    }
    const Matrix probs = softmax_rows(logits);
    const double inv_n = 1.0 / static_cast<double>(logits.rows);
    double loss = 0.0;
    for (std::size_t r = 0; r < logits.rows; ++r) {
        if (labels[r] >= logits.cols) {
            throw ParamError("label " + std::to_string(labels[r]) + " >= " +
                             std::to_string(logits.cols) + " classes");
        }
        loss -= std::log(std::max(probs(r, labels[r]), 1e-12)) * inv_n;
    }
    if (grad_at_logits) {
        Matrix g = probs;
        for (std::size_t r = 0; r < g.rows; ++r) {
            g(r, labels[r]) -= 1.0;
            for (std::size_t c = 0; c < g.cols; ++c) g(r, c) *= inv_n;
        }
        *grad_at_logits = std::move(g);
    }
    return loss;
}

namespace {

std::vector<double> flatten_grads(const std::vector<Matrix>& grads) {
    std::vector<double> flat;
    for (const auto& g : grads) flat.insert(flat.end(), g.values.begin(), g.values.end());
    return flat;
}

}  // namespace

ModelCheckpoint train_supervised(const ModelCheckpoint& start, const Dataset& train,
                                 std::size_t epochs, double lr, std::uint64_t seed) {
    start.validate();
    train.validate();
    if (train.inputs.cols != start.arch.input_dim()) {
        throw ShapeError("dataset has " + std::to_string(train.inputs.cols) +
                         " features, arch wants " + std::to_string(start.arch.input_dim()));
    }
    if (train.num_classes != start.arch.output_dim()) {
        throw ShapeError("dataset has " + std::to_string(train.num_classes) +
                         " classes, arch outputs " + std::to_string(start.arch.output_dim()));
    }
    ModelCheckpoint model = start;
    if (epochs == 0) return model;

    std::vector<double> flat = flatten_params(model);
    OptimizerState opt = OptimizerState::for_size(flat.size(), lr);
    opt.decay_every = 0;  // constant lr
    Rng rng(seed);
    constexpr std::size_t kBatch = 32;
    const std::size_t n = train.size();

    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        const std::vector<std::size_t> order = shuffled_indices(n, rng);
        for (std::size_t begin = 0; begin < n; begin += kBatch) {
            const std::size_t end = std::min(begin + kBatch, n);
            std::vector<std::size_t> rows(order.begin() + begin, order.begin() + end);
            Matrix batch = take_rows(train.inputs, rows);
            std::vector<std::uint32_t> labels(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i) labels[i] = train.labels[rows[i]];
            Matrix grad_z;
            cross_entropy(forward_logits(model, batch), labels, &grad_z);
            const std::vector<double> grads = flatten_grads(backward(model, batch, grad_z));
            adam_step(flat, grads, opt, epoch);
            unflatten_params(model, flat);
        }
    }
    return model;
}

ModelCheckpoint fine_tune(const ModelCheckpoint& base, const Dataset& train, std::size_t epochs,
                          double lr, std::uint64_t seed) {
    if (base.meta.role != "pretrained") {
        throw ParamError("fine_tune needs a pretrained base, got role '" + base.meta.role + "'");
    }
    ModelCheckpoint tuned = train_supervised(base, train, epochs, lr, seed);
    tuned.meta.role = "task";
    tuned.meta.base_fingerprint = base.meta.base_fingerprint;
    return tuned;
}

std::vector<double> flatten_params(const ModelCheckpoint& ckpt) {
    std::vector<double> flat;
    for (const auto& p : ckpt.params)
        flat.insert(flat.end(), p.tensor.values.begin(), p.tensor.values.end());
    return flat;
}

void unflatten_params(ModelCheckpoint& ckpt, const std::vector<double>& flat) {
    std::size_t total = 0;
    for (const auto& p : ckpt.params) total += p.tensor.size();
    if (flat.size() != total) {
        throw ShapeError("flat vector has " + std::to_string(flat.size()) +
                         " values, checkpoint wants " + std::to_string(total));
    }
    std::size_t at = 0;
    for (auto& p : ckpt.params) {
        std::copy_n(flat.begin() + at, p.tensor.size(), p.tensor.values.begin());
        at += p.tensor.size();
    }
}

}  // namespace statsmerge
