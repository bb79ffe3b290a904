#pragma once

#include <cstdint>
#include <vector>

#include "statsmerge/checkpoint.hpp"
#include "statsmerge/matrix.hpp"

namespace statsmerge {

struct PseudoLabeledSet {
    Matrix inputs;                           // N×d
    std::vector<std::uint32_t> source_task;  // per-row teacher index
    std::vector<std::uint32_t> hard_label;   // argmax of soft row, ties to lowest index
    Matrix soft_label;                       // N×C_m probability rows
    std::size_t num_classes = 0;

    void validate() const;
    std::size_t size() const { return inputs.rows; }
};

struct DistillConfig {
    double alpha = 0.7;
    double temperature = 4.0;
    std::size_t epochs = 100;
    double lr = 1e-3;
    std::uint64_t seed = 0;
};

// the seeded per-task row choice behind generate_pseudo_labels: for each task,
// a shuffled prefix of round(fraction·N) rows (at least one), sorted ascending
std::vector<std::vector<std::size_t>> pseudo_sample_rows(const std::vector<std::size_t>& sizes,
                                                         double fraction, std::uint64_t seed);

// run each teacher on a seeded `fraction` subsample of its own validation
// inputs and pool the predictions; no ground-truth labels pass through here
PseudoLabeledSet generate_pseudo_labels(const std::vector<ModelCheckpoint>& task_ckpts,
                                        const std::vector<Matrix>& val_inputs, double fraction,
                                        std::uint64_t seed);

double ce_loss(const std::vector<double>& pred, std::size_t target_class);
double kl_loss(const std::vector<double>& teacher, const std::vector<double>& student);

// alpha·CE(labels, student) + (1-alpha)·T²·KL(teacher_softened, student_softened),
// trained with Adam and the step-decay schedule; student keeps its own arch and
// fingerprint so distilled siblings stay merge-compatible
ModelCheckpoint hetero_distill(const ModelCheckpoint& teacher, const ModelCheckpoint& student_init,
                               const Dataset& train, const DistillConfig& cfg);

// batched Eq-8 style objective used by hetero_distill; exposed for gradient tests
double distill_loss(const Matrix& student_logits, const Matrix& teacher_logits,
                    const std::vector<std::uint32_t>& labels, double alpha, double temperature,
                    Matrix* grad_at_student_logits = nullptr);

}  // namespace statsmerge
