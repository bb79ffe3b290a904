#include "statsmerge/distill.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "statsmerge/error.hpp"
#include "statsmerge/optim.hpp"
#include "statsmerge/rng.hpp"

namespace statsmerge {

namespace {

constexpr double kProbFloor = 1e-12;

std::size_t argmax_row(const Matrix& m, std::size_t row) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < m.cols; ++c) {
        if (m(row, c) > m(row, best)) best = c;
    }
    return best;
}

}  // namespace

void PseudoLabeledSet::validate() const {
    if (inputs.rows == 0) throw ParamError("pseudo set is empty");
    if (num_classes == 0) throw ParamError("pseudo set has zero classes");
    if (soft_label.rows != inputs.rows || soft_label.cols != num_classes) {
        throw ShapeError("soft labels are " + std::to_string(soft_label.rows) + "x" +
                         std::to_string(soft_label.cols) + ", expected " +
                         std::to_string(inputs.rows) + "x" + std::to_string(num_classes));
    }
    if (hard_label.size() != inputs.rows || source_task.size() != inputs.rows) {
        throw ShapeError("pseudo set row annotations do not match input count");
    }
    for (std::size_t r = 0; r < inputs.rows; ++r) {
        double sum = 0.0;
        for (std::size_t c = 0; c < num_classes; ++c) sum += soft_label(r, c);
        if (std::abs(sum - 1.0) > 1e-9) {
            throw ParamError("soft label row " + std::to_string(r) + " sums to " +
                             std::to_string(sum));
        }
        if (hard_label[r] != argmax_row(soft_label, r)) {
            throw ParamError("hard label at row " + std::to_string(r) +
                             " is not the soft-row argmax");
        }
    }
}

std::vector<std::vector<std::size_t>> pseudo_sample_rows(const std::vector<std::size_t>& sizes,
                                                         double fraction, std::uint64_t seed) {
    if (sizes.empty()) throw ParamError("no tasks to sample");
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw ParamError("fraction must be in (0,1], got " + std::to_string(fraction));
    }
    Rng rng(seed);
    std::vector<std::vector<std::size_t>> rows;
    rows.reserve(sizes.size());
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        if (sizes[k] == 0) throw ParamError("task " + std::to_string(k) + " has no inputs");
        const auto n_take = static_cast<std::size_t>(
            std::max<long long>(1, std::llround(fraction * static_cast<double>(sizes[k]))));
        Rng task_rng = rng.child(k + 1);
        std::vector<std::size_t> order = shuffled_indices(sizes[k], task_rng);
        order.resize(std::min(n_take, sizes[k]));
        std::sort(order.begin(), order.end());
        rows.push_back(std::move(order));
    }
    return rows;
}

PseudoLabeledSet generate_pseudo_labels(const std::vector<ModelCheckpoint>& task_ckpts,
                                        const std::vector<Matrix>& val_inputs, double fraction,
                                        std::uint64_t seed) {
    if (task_ckpts.empty()) throw ParamError("no teachers");
    if (val_inputs.size() != task_ckpts.size()) {
        throw ShapeError("got " + std::to_string(val_inputs.size()) + " input blocks for " +
                         std::to_string(task_ckpts.size()) + " teachers");
    }

    const std::size_t C = task_ckpts.front().arch.output_dim();
    const std::size_t d = task_ckpts.front().arch.input_dim();
    PseudoLabeledSet out;
    out.num_classes = C;

    std::vector<std::size_t> sizes;
    sizes.reserve(val_inputs.size());
    for (const Matrix& inputs : val_inputs) sizes.push_back(inputs.rows);
    const auto sampled = pseudo_sample_rows(sizes, fraction, seed);

    std::vector<Matrix> soft_blocks;
    std::vector<Matrix> input_blocks;
    std::size_t total = 0;
    for (std::size_t k = 0; k < task_ckpts.size(); ++k) {
        const Matrix& inputs = val_inputs[k];
        if (inputs.cols != d) {
            throw ShapeError("task " + std::to_string(k) + " inputs have " +
                             std::to_string(inputs.cols) + " features, teacher wants " +
                             std::to_string(d));
        }
        Matrix picked = take_rows(inputs, sampled[k]);
        Matrix soft = forward(task_ckpts[k], picked);
        for (std::size_t r = 0; r < picked.rows; ++r) {
            out.source_task.push_back(static_cast<std::uint32_t>(k));
            out.hard_label.push_back(static_cast<std::uint32_t>(argmax_row(soft, r)));
        }
        total += picked.rows;
        input_blocks.push_back(std::move(picked));
        soft_blocks.push_back(std::move(soft));
    }

    out.inputs = Matrix(total, d);
    out.soft_label = Matrix(total, C);
    std::size_t at = 0;
    for (std::size_t k = 0; k < input_blocks.size(); ++k) {
        std::copy(input_blocks[k].values.begin(), input_blocks[k].values.end(),
                  out.inputs.values.begin() + at * d);
        std::copy(soft_blocks[k].values.begin(), soft_blocks[k].values.end(),
                  out.soft_label.values.begin() + at * C);
        at += input_blocks[k].rows;
    }
    out.validate();
    return out;
}

double ce_loss(const std::vector<double>& pred, std::size_t target_class) {
    if (target_class >= pred.size()) {
        throw ParamError("target class " + std::to_string(target_class) + " >= " +
                         std::to_string(pred.size()));
    }
    return -std::log(std::clamp(pred[target_class], kProbFloor, 1.0));
}

double kl_loss(const std::vector<double>& teacher, const std::vector<double>& student) {
    if (teacher.size() != student.size()) {
        throw ShapeError("kl_loss rows have lengths " + std::to_string(teacher.size()) +
                         " and " + std::to_string(student.size()));
    }
    double kl = 0.0;
    for (std::size_t c = 0; c < teacher.size(); ++c) {
        if (teacher[c] == 0.0) continue;
        const double p = std::clamp(teacher[c], kProbFloor, 1.0);
        const double q = std::clamp(student[c], kProbFloor, 1.0);
        kl += p * std::log(p / q);
    }
    return kl;
}

double distill_loss(const Matrix& student_logits, const Matrix& teacher_logits,
                    const std::vector<std::uint32_t>& labels, double alpha, double temperature,
                    Matrix* grad_at_student_logits) {
    if (!student_logits.same_shape(teacher_logits)) {
        throw ShapeError("student and teacher logits differ in shape");
    }
    if (labels.size() != student_logits.rows) {
        throw ShapeError("got " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(student_logits.rows) + " rows");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ParamError("alpha must be in [0,1]");
    if (!(temperature > 0.0)) throw ParamError("temperature must be > 0");

    const std::size_t B = student_logits.rows;
    const std::size_t C = student_logits.cols;
    const double inv_b = 1.0 / static_cast<double>(B);
    const double t2 = temperature * temperature;

    const Matrix student_probs = softmax_rows(student_logits);
    const Matrix student_soft = softmax_rows_tempered(student_logits, temperature);
    const Matrix teacher_soft = softmax_rows_tempered(teacher_logits, temperature);

    double loss = 0.0;
    for (std::size_t r = 0; r < B; ++r) {
        if (labels[r] >= C) {
            throw ParamError("label " + std::to_string(labels[r]) + " >= " + std::to_string(C));
        }
        loss += alpha * -std::log(std::clamp(student_probs(r, labels[r]), kProbFloor, 1.0));
        double kl = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
            const double p = std::clamp(teacher_soft(r, c), kProbFloor, 1.0);
            const double q = std::clamp(student_soft(r, c), kProbFloor, 1.0);
            kl += p * std::log(p / q);
        }
        loss += (1.0 - alpha) * t2 * kl;
    }
    loss *= inv_b;

    if (grad_at_student_logits) {
        Matrix g(B, C);
        for (std::size_t r = 0; r < B; ++r) {
            for (std::size_t c = 0; c < C; ++c) {
                double v = alpha * (student_probs(r, c) - (labels[r] == c ? 1.0 : 0.0));
                v += (1.0 - alpha) * temperature * (student_soft(r, c) - teacher_soft(r, c));
                g(r, c) = v * inv_b;
            }
        }
        *grad_at_student_logits = std::move(g);
    }
    return loss;
}

ModelCheckpoint hetero_distill(const ModelCheckpoint& teacher, const ModelCheckpoint& student_init,
                               const Dataset& train, const DistillConfig& cfg) {
    teacher.validate();
    student_init.validate();
    train.validate();
    if (teacher.arch.output_dim() != student_init.arch.output_dim()) {
        throw CompatError("teacher outputs " + std::to_string(teacher.arch.output_dim()) +
                          " classes, student outputs " +
                          std::to_string(student_init.arch.output_dim()));
    }
    if (student_init.meta.role != "pretrained" && student_init.meta.role != "task") {
        throw ParamError("student_init role must be pretrained or task, got '" +
                         student_init.meta.role + "'");
    }
    if (train.num_classes != student_init.arch.output_dim()) {
        throw ShapeError("dataset has " + std::to_string(train.num_classes) +
                         " classes, student outputs " +
                         std::to_string(student_init.arch.output_dim()));
    }
    if (train.inputs.cols != teacher.arch.input_dim() ||
        train.inputs.cols != student_init.arch.input_dim()) {
        throw ShapeError("dataset feature width does not match teacher/student input dims");
    }

    ModelCheckpoint student = student_init;
    std::vector<double> flat = flatten_params(student);
    OptimizerState opt = OptimizerState::for_size(flat.size(), cfg.lr);
    Rng rng(cfg.seed);
    constexpr std::size_t kBatch = 32;
    const std::size_t n = train.size();

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const std::vector<std::size_t> order = shuffled_indices(n, rng);
        for (std::size_t begin = 0; begin < n; begin += kBatch) {
            const std::size_t end = std::min(begin + kBatch, n);
            std::vector<std::size_t> rows(order.begin() + begin, order.begin() + end);
            Matrix batch = take_rows(train.inputs, rows);
            std::vector<std::uint32_t> labels(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i) labels[i] = train.labels[rows[i]];

            const Matrix teacher_logits = forward_logits(teacher, batch);
            const Matrix student_logits = forward_logits(student, batch);
            Matrix grad_z;
            distill_loss(student_logits, teacher_logits, labels, cfg.alpha, cfg.temperature,
                         &grad_z);
            const std::vector<Matrix> grads = backward(student, batch, grad_z);
            std::vector<double> flat_grads;
            for (const auto& g : grads)
                flat_grads.insert(flat_grads.end(), g.values.begin(), g.values.end());
            adam_step(flat, flat_grads, opt, epoch);
            unflatten_params(student, flat);
        }
    }

    student.meta.role = "distilled";
    student.meta.task_id = teacher.meta.task_id;
    student.meta.base_fingerprint = student_init.meta.base_fingerprint;
    return student;
}

}  // namespace statsmerge
