#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "statsmerge/matrix.hpp"

namespace statsmerge {

enum class Activation { relu, identity };

struct LayerSpec {
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    Activation activation = Activation::identity;
    bool operator==(const LayerSpec&) const = default;
};

struct ArchSpec {
    std::vector<LayerSpec> layers;

    bool operator==(const ArchSpec&) const = default;
    void validate() const;
    std::size_t input_dim() const { return layers.front().in_dim; }
    std::size_t output_dim() const { return layers.back().out_dim; }
    std::size_t layer_count() const { return layers.size(); }

    // dense ReLU stack: in -> hidden... -> out, identity on the logit head
    static ArchSpec mlp(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out);
};

struct CheckpointMeta {
    std::string role;  // pretrained | task | merged | distilled
    std::string task_id;
    std::uint64_t base_fingerprint = 0;
    bool operator==(const CheckpointMeta&) const = default;
};

struct NamedTensor {
    std::string name;
    Matrix tensor;
    bool operator==(const NamedTensor&) const = default;
};

// params order is fixed: layer0.weight (out×in), layer0.bias (1×out), layer1.weight, ...
struct ModelCheckpoint {
    ArchSpec arch;
    std::vector<NamedTensor> params;
    CheckpointMeta meta;

    bool operator==(const ModelCheckpoint&) const = default;
    void validate() const;

    const Matrix& weight(std::size_t layer) const { return params[2 * layer].tensor; }
    const Matrix& bias(std::size_t layer) const { return params[2 * layer + 1].tensor; }
    Matrix& weight(std::size_t layer) { return params[2 * layer].tensor; }
    Matrix& bias(std::size_t layer) { return params[2 * layer + 1].tensor; }
};

struct Dataset {
    Matrix inputs;  // N×d
    std::vector<std::uint32_t> labels;
    std::size_t num_classes = 0;

    void validate() const;
    std::size_t size() const { return inputs.rows; }
};

bool merge_compatible(const ModelCheckpoint& a, const ModelCheckpoint& b);

// FNV-1a over param names, shapes, and little-endian f64 payloads, in order
std::uint64_t param_fingerprint(const ModelCheckpoint& ckpt);

// Kaiming-uniform weights, zero biases, role=pretrained, fingerprint of itself
ModelCheckpoint init_checkpoint(const ArchSpec& arch, std::uint64_t seed);

Matrix forward_logits(const ModelCheckpoint& ckpt, const Matrix& batch);
Matrix forward(const ModelCheckpoint& ckpt, const Matrix& batch);

// gradients w.r.t. every parameter tensor, in params order
std::vector<Matrix> backward(const ModelCheckpoint& ckpt, const Matrix& batch,
                             const Matrix& loss_grad_at_logits);

// mean cross-entropy over the batch; fills grad_at_logits with (softmax - onehot)/N when non-null
double cross_entropy(const Matrix& logits, const std::vector<std::uint32_t>& labels,
                     Matrix* grad_at_logits = nullptr);

// mini-batch CE + Adam, shuffled each epoch; meta untouched
ModelCheckpoint train_supervised(const ModelCheckpoint& start, const Dataset& train,
                                 std::size_t epochs, double lr, std::uint64_t seed);

ModelCheckpoint fine_tune(const ModelCheckpoint& base, const Dataset& train, std::size_t epochs,
                          double lr, std::uint64_t seed);

std::vector<double> flatten_params(const ModelCheckpoint& ckpt);
void unflatten_params(ModelCheckpoint& ckpt, const std::vector<double>& flat);

}  // namespace statsmerge
