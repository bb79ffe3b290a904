// Acceptance gate: nine checks over the merging stack, each printing one
// [PASS]/[FAIL] line. Exit code is nonzero if any check fails. Tolerances and
// thresholds here are pinned; the committed default suite configuration is
// what makes them attainable.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <type_traits>
#include <vector>

#include "oracles.hpp"
#include "statsmerge/checkpoint.hpp"
#include "statsmerge/container.hpp"
#include "statsmerge/distill.hpp"
#include "statsmerge/error.hpp"
#include "statsmerge/harness.hpp"
#include "statsmerge/learner.hpp"
#include "statsmerge/merge.hpp"
#include "statsmerge/rng.hpp"
#include "statsmerge/stats.hpp"
#include "statsmerge/svd.hpp"

using namespace statsmerge;
namespace fs = std::filesystem;

namespace {

int failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

void report(int criterion, bool ok, const std::string& label, const std::string& detail) {
    std::printf("[%s] %d: %s (%s)\n", ok ? "PASS" : "FAIL", criterion, label.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

void report_error(int criterion, const std::string& label, const std::exception& e) {
    report(criterion, false, label, std::string("exception: ") + e.what());
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, pattern, a, b, c);
    return buf;
}

// ---- 1: singular values against an independent Gram-matrix eigensolver ----
void criterion_svd() {
    const std::string label = "singular values match the Gram eigenvalue reference";
    try {
        Timer timer;
        Rng rng(20240801);
        double worst = 0.0;
        for (int trial = 0; trial < 200; ++trial) {
            const std::size_t r = 1 + rng.index(32);
            const std::size_t c = 1 + rng.index(32);
            Matrix m(r, c);
            for (auto& v : m.values) v = rng.uniform(-1.0, 1.0);
            const std::size_t d = std::min(r, c);
            const auto got = svd_values(m, d);
            const auto want = oracle::singular_values(m);
            for (std::size_t i = 0; i < d; ++i) {
                const double denom = std::max({std::fabs(want[i]), std::fabs(got[i]), 1e-8});
                worst = std::max(worst, std::fabs(got[i] - want[i]) / denom);
            }
        }
        const double elapsed = timer.seconds();
        const bool ok = worst <= 1e-8 && elapsed < 10.0;
        report(1, ok, label, fmt("200 matrices, max rel err %.2e, %.2fs", worst, elapsed));
    } catch (const std::exception& e) {
        report_error(1, label, e);
    }
}

// ---- 2: learner gradient against central finite differences ----
void criterion_sml_gradient() {
    const std::string label = "coefficient learner gradient matches finite differences";
    try {
        Timer timer;
        double worst = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            const std::uint64_t seed = 3000 + static_cast<std::uint64_t>(trial);
            Rng rng(seed);
            const ArchSpec arch = ArchSpec::mlp(4, {5}, 3);
            const ModelCheckpoint base = init_checkpoint(arch, seed);
            std::vector<ModelCheckpoint> models;
            for (int k = 0; k < 2; ++k) {
                ModelCheckpoint m = base;
                for (auto& p : m.params) {
                    for (auto& v : p.tensor.values) v += 0.4 * rng.normal();
                }
                m.meta.role = "task";
                models.push_back(std::move(m));
            }
            StatsConfig stats_cfg;
            const MergeMode merge_mode =
                trial % 3 ? MergeMode::layer_wise : MergeMode::task_wise;
            const FeatureTable features =
                merge_mode == MergeMode::layer_wise
                    ? feature_vector(layer_stats_table(models, stats_cfg), stats_cfg)
                    : feature_vector(task_stats_table(models, stats_cfg), stats_cfg);
            const SMLParams params = SMLParams::init(3 + stats_cfg.rank, 8, seed + 50);

            PseudoLabeledSet pseudo;
            pseudo.inputs = Matrix(6, 4);
            for (auto& v : pseudo.inputs.values) v = rng.normal();
            pseudo.num_classes = 3;
            pseudo.soft_label = Matrix(6, 3);
            for (std::size_t i = 0; i < 6; ++i) {
                const auto cls = static_cast<std::uint32_t>(rng.index(3));
                pseudo.hard_label.push_back(cls);
                pseudo.source_task.push_back(static_cast<std::uint32_t>(rng.index(2)));
                for (std::size_t j = 0; j < 3; ++j) {
                    pseudo.soft_label(i, j) = j == cls ? 0.8 : 0.1;
                }
            }

            const LabelMode mode = trial % 2 ? LabelMode::kd_soft : LabelMode::kd_hard;
            std::vector<double> grad;
            sml_loss_and_grad(models, features, params, merge_mode, pseudo.inputs,
                              pseudo.hard_label, &pseudo.soft_label, mode, &grad);
            const auto loss_at = [&](const std::vector<double>& flat) {
                SMLParams probe = params;
                unflatten_sml(probe, flat);
                return sml_loss_and_grad(models, features, probe, merge_mode, pseudo.inputs,
                                         pseudo.hard_label, &pseudo.soft_label, mode);
            };
            const auto fd = oracle::fd_gradient(loss_at, flatten_sml(params));
            worst = std::max(worst, oracle::max_rel_err(grad, fd));
        }
        const double elapsed = timer.seconds();
        const bool ok = worst <= 1e-4 && elapsed < 30.0;
        report(2, ok, label, fmt("10 instances, max rel err %.2e, %.2fs", worst, elapsed));
    } catch (const std::exception& e) {
        report_error(2, label, e);
    }
}

// ---- 3: trim-elect-merge against the step-by-step reference; uniform
//         averaging equals the coefficient path bit for bit ----
void criterion_baseline_equivalences() {
    const std::string label = "ties matches its reference exactly; uniform paths agree bitwise";
    try {
        Rng rng(555);
        std::size_t ties_mismatches = 0;
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t in = 1 + rng.index(5);
            const std::size_t out = 1 + rng.index(4);  // total params <= 50
            ArchSpec arch;
            arch.layers = {LayerSpec{in, out, Activation::identity}};
            const ModelCheckpoint base = init_checkpoint(arch, 7000 + trial);
            const std::size_t kk = 1 + rng.index(4);
            std::vector<ModelCheckpoint> models;
            for (std::size_t k = 0; k < kk; ++k) {
                ModelCheckpoint m = base;
                m.meta.role = "task";
                for (auto& p : m.params) {
                    for (auto& v : p.tensor.values) {
                        if (rng.uniform() < 0.25) continue;
                        v += rng.normal();
                    }
                }
                models.push_back(std::move(m));
            }
            const double lambda = 0.2 + rng.uniform();
            const double frac = 0.05 + 0.9 * rng.uniform();
            const auto got = flatten_params(ties_merge(base, models, lambda, frac));
            std::vector<std::vector<double>> flat;
            for (const auto& m : models) flat.push_back(flatten_params(m));
            const auto want = oracle::ties_reference(flatten_params(base), flat, lambda, frac);
            for (std::size_t i = 0; i < got.size(); ++i) {
                ties_mismatches += got[i] != want[i];
            }
        }

        std::size_t avg_mismatches = 0;
        for (int trial = 0; trial < 10; ++trial) {
            const ArchSpec arch = ArchSpec::mlp(6, {9, 7}, 5);
            const ModelCheckpoint base = init_checkpoint(arch, 8000 + trial);
            const std::size_t kk = 2 + rng.index(3);
            std::vector<ModelCheckpoint> models;
            for (std::size_t k = 0; k < kk; ++k) {
                ModelCheckpoint m = base;
                m.meta.role = "task";
                for (auto& p : m.params) {
                    for (auto& v : p.tensor.values) v += rng.normal();
                }
                models.push_back(std::move(m));
            }
            const ModelCheckpoint a = weight_average(models);
            const ModelCheckpoint b = stats_merge(
                models, uniform_table(kk, arch.layer_count(), MergeMode::layer_wise));
            for (std::size_t p = 0; p < a.params.size(); ++p) {
                for (std::size_t i = 0; i < a.params[p].tensor.values.size(); ++i) {
                    const double x = a.params[p].tensor.values[i];
                    const double y = b.params[p].tensor.values[i];
                    avg_mismatches +=
                        std::bit_cast<std::uint64_t>(x) != std::bit_cast<std::uint64_t>(y);
                }
            }
        }
        const bool ok = ties_mismatches == 0 && avg_mismatches == 0;
        report(3, ok, label,
               fmt("ties mismatches %.0f, averaging mismatches %.0f",
                   static_cast<double>(ties_mismatches), static_cast<double>(avg_mismatches)));
    } catch (const std::exception& e) {
        report_error(3, label, e);
    }
}

// shared state: the default-suite experiment feeding checks 4, 5, 7, 8, 9
std::optional<ExperimentReport> default_report;
TaskSuiteConfig default_cfg;

// ---- 4: merged accuracy on the committed default suite ----
void criterion_default_suite() {
    const std::string label = "learned layer-wise merge beats the baselines on the default suite";
    try {
        Timer timer;
        const std::vector<MergeRequest> methods = {
            MergeRequest{.method = "weight_avg"},
            MergeRequest{.method = "task_arithmetic"},
            MergeRequest{.method = "ties"},
            MergeRequest{.method = "stats", .mode = MergeMode::task_wise},
            MergeRequest{.method = "stats", .mode = MergeMode::layer_wise},
        };
        SMLTrainConfig sml_cfg;
        StatsConfig stats_cfg;
        default_report = run_experiment(default_cfg, methods, sml_cfg, stats_cfg);
        const double elapsed = timer.seconds();

        const ExperimentReport& rep = *default_report;
        const double individual = rep.row("Individual").avg_acc;
        const double wa = rep.row("Weight Averaging").avg_acc;
        const double ta = rep.row("Task Arithmetic").avg_acc;
        const double tw = rep.row("StatsMerging (task-wise)").avg_acc;
        const double lw = rep.row("StatsMerging (layer-wise)").avg_acc;

        const bool ok = individual >= 0.95 && lw >= wa + 0.05 && lw >= ta &&
                        lw >= tw - 0.01 && elapsed < 300.0;
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "individual %.4f, weight-avg %.4f, arithmetic %.4f, task-wise %.4f, "
                      "layer-wise %.4f, %.1fs",
                      individual, wa, ta, tw, lw, elapsed);
        report(4, ok, label, buf);
    } catch (const std::exception& e) {
        report_error(4, label, e);
    }
}

// ---- 5: teacher-labeled training lands near ground-truth-labeled training,
//         with the teacher path taking no labels at all ----
void criterion_label_free() {
    const std::string label = "pseudo-label training tracks ground-truth training without labels";
    // the pseudo-label constructor accepts model outputs only: checkpoints,
    // raw input matrices, a fraction, a seed; no label container exists in
    // its signature
    static_assert(std::is_same_v<PseudoLabeledSet (*)(const std::vector<ModelCheckpoint>&,
                                                      const std::vector<Matrix>&, double,
                                                      std::uint64_t),
                                 decltype(&generate_pseudo_labels)>);
    try {
        if (!default_report) throw ParamError("default experiment unavailable");
        const ExperimentReport& rep = *default_report;
        const TaskSuite suite = gen_tasks(default_cfg);

        std::vector<Matrix> val_inputs;
        std::vector<std::size_t> val_sizes;
        for (const auto& td : suite.tasks) {
            val_inputs.push_back(td.val.inputs);
            val_sizes.push_back(td.val.size());
        }
        const std::uint64_t sample_seed = 700;
        const PseudoLabeledSet pseudo =
            generate_pseudo_labels(rep.task_models, val_inputs, 0.2, sample_seed);
        const PseudoLabeledSet truth = ground_truth_set(suite.tasks, 0.2, sample_seed);

        SMLTrainConfig kd_cfg;
        kd_cfg.seed = 801;
        kd_cfg.label_mode = LabelMode::kd_hard;
        SMLTrainConfig gt_cfg = kd_cfg;
        gt_cfg.label_mode = LabelMode::ground_truth;
        StatsConfig stats_cfg;

        const SMLTrainResult kd_run =
            train_sml(rep.task_models, pseudo, kd_cfg, stats_cfg, MergeMode::layer_wise);
        const SMLTrainResult gt_run =
            train_sml(rep.task_models, truth, gt_cfg, stats_cfg, MergeMode::layer_wise);

        const auto avg_acc = [&](const CoefficientTable& coeffs) {
            const ModelCheckpoint merged = stats_merge(rep.task_models, coeffs);
            double total = 0.0;
            for (const auto& td : suite.tasks) total += evaluate(merged, td.test);
            return total / static_cast<double>(suite.tasks.size());
        };
        const double kd_acc = avg_acc(kd_run.coeffs);
        const double gt_acc = avg_acc(gt_run.coeffs);

        const bool ok = kd_acc >= gt_acc - 0.10;
        report(5, ok, label, fmt("teacher-labeled %.4f vs ground-truth %.4f", kd_acc, gt_acc));
    } catch (const std::exception& e) {
        report_error(5, label, e);
    }
}

// ---- 6: distillation across architectures, then merging the students ----
void criterion_hetero() {
    const std::string label = "cross-architecture distillation keeps accuracy and merges well";
    try {
        Timer timer;
        DistillConfig distill_cfg;
        SMLTrainConfig sml_cfg;
        StatsConfig stats_cfg;
        const HeteroReport rep = run_hetero_experiment(default_cfg, {128, 128}, {32, 32, 32},
                                                       distill_cfg, sml_cfg, stats_cfg);
        double worst_drop = -1.0;
        for (std::size_t k = 0; k < rep.task_ids.size(); ++k) {
            worst_drop = std::max(worst_drop, rep.teacher_acc[k] - rep.distilled_acc[k]);
        }
        const double elapsed = timer.seconds();
        const bool ok = worst_drop <= 0.15 &&
                        rep.stats_row.avg_acc >= rep.arithmetic_row.avg_acc && elapsed < 300.0;
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "worst distillation drop %.4f, merged stats %.4f vs arithmetic %.4f, %.1fs",
                      worst_drop, rep.stats_row.avg_acc, rep.arithmetic_row.avg_acc, elapsed);
        report(6, ok, label, buf);
    } catch (const std::exception& e) {
        report_error(6, label, e);
    }
}

// ---- 7: every training epoch yields a simplex-clean coefficient table, and
//         the exported heatmap re-parses to the same numbers ----
void criterion_coefficients() {
    const std::string label = "coefficients stay on the simplex each epoch and survive CSV";
    try {
        if (!default_report) throw ParamError("default experiment unavailable");
        const auto it = default_report->sml_runs.find("StatsMerging (layer-wise)");
        if (it == default_report->sml_runs.end()) throw ParamError("layer-wise run missing");
        const SMLTrainResult& run = it->second;

        double worst_sum_err = 0.0;
        bool in_open_interval = true;
        for (const auto& entry : run.trace) {
            const auto& table = entry.coeffs;
            for (std::size_t l = 0; l < table.layers(); ++l) {
                double sum = 0.0;
                for (std::size_t k = 0; k < table.tasks(); ++k) {
                    const double v = table.values[k][l];
                    in_open_interval = in_open_interval && v > 0.0 && v < 1.0;
                    sum += v;
                }
                worst_sum_err = std::max(worst_sum_err, std::fabs(sum - 1.0));
            }
        }

        const fs::path csv = fs::temp_directory_path() /
                             ("acc-heatmap-" + std::to_string(std::random_device{}()) + ".csv");
        export_heatmap(run.coeffs, csv.string());
        const CoefficientTable back = parse_heatmap(csv.string());
        fs::remove(csv);
        bool roundtrip = back.values == run.coeffs.values && back.mode == run.coeffs.mode;

        const bool ok =
            worst_sum_err <= 1e-9 && in_open_interval && roundtrip && !run.trace.empty();
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "%zu epochs, worst sum err %.2e, open interval %s, csv exact %s",
                      run.trace.size(), worst_sum_err, in_open_interval ? "yes" : "no",
                      roundtrip ? "yes" : "no");
        report(7, ok, label, buf);
    } catch (const std::exception& e) {
        report_error(7, label, e);
    }
}

// ---- 8: robustness of the learned merge under input noise ----
void criterion_corruption() {
    const std::string label = "learned merge stays ahead of uniform averaging under noise";
    try {
        if (!default_report) throw ParamError("default experiment unavailable");
        const ExperimentReport& rep = *default_report;
        const TaskSuite suite = gen_tasks(default_cfg);
        const ModelCheckpoint& learned = rep.merged_models.at("StatsMerging (layer-wise)");
        const ModelCheckpoint& uniform = rep.merged_models.at("Weight Averaging");

        double learned_total = 0.0, uniform_total = 0.0;
        for (std::size_t k = 0; k < suite.tasks.size(); ++k) {
            const Dataset noisy =
                corrupt_gaussian(suite.tasks[k].test, 0.1, 4200 + static_cast<std::uint64_t>(k));
            learned_total += evaluate(learned, noisy);
            uniform_total += evaluate(uniform, noisy);
        }
        const double learned_avg = learned_total / static_cast<double>(suite.tasks.size());
        const double uniform_avg = uniform_total / static_cast<double>(suite.tasks.size());
        const bool ok = learned_avg >= uniform_avg;
        report(8, ok, label,
               fmt("corrupted accuracy: learned %.4f vs uniform %.4f", learned_avg, uniform_avg));
    } catch (const std::exception& e) {
        report_error(8, label, e);
    }
}

// ---- 9: determinism, container fidelity, schedule shape ----
void criterion_reproducibility() {
    const std::string label = "reports replay byte for byte, containers are lossless, schedule steps five times";
    try {
        TaskSuiteConfig small;
        small.tasks = 2;
        small.classes_per_task = 3;
        small.input_dim = 8;
        small.train_per_task = 120;
        small.val_per_task = 60;
        small.test_per_task = 60;
        small.seed = 9001;
        small.hidden_dims = {16};
        small.pretrain_epochs = 2;
        small.finetune_epochs = 25;
        const std::vector<MergeRequest> methods = {
            MergeRequest{.method = "weight_avg"},
            MergeRequest{.method = "stats", .mode = MergeMode::layer_wise},
        };
        SMLTrainConfig sml_cfg;
        sml_cfg.epochs = 40;
        sml_cfg.decay_every = 20;
        sml_cfg.hidden_dim = 16;
        StatsConfig stats_cfg;
        const ExperimentReport a = run_experiment(small, methods, sml_cfg, stats_cfg);
        const ExperimentReport b = run_experiment(small, methods, sml_cfg, stats_cfg);
        const bool replay = report_json(a) == report_json(b) &&
                            report_text(a) == report_text(b);

        // containers: save, load, compare bit for bit
        const fs::path dir = fs::temp_directory_path() /
                             ("acc-roundtrip-" + std::to_string(std::random_device{}()));
        fs::create_directories(dir);
        bool lossless = true;
        {
            const ModelCheckpoint& ckpt = a.task_models.front();
            save_checkpoint(ckpt, (dir / "c.smrg").string());
            lossless = lossless && load_checkpoint((dir / "c.smrg").string()) == ckpt;

            const SMLTrainResult& run = a.sml_runs.at("StatsMerging (layer-wise)");
            save_sml(run.params, (dir / "s.smrg").string());
            const SMLParams back = load_sml((dir / "s.smrg").string());
            lossless = lossless && back.w1 == run.params.w1 && back.b1 == run.params.b1 &&
                       back.w2 == run.params.w2 && back.b2 == run.params.b2;

            save_pseudoset(a.pseudo, (dir / "p.smrg").string());
            const PseudoLabeledSet pback = load_pseudoset((dir / "p.smrg").string());
            lossless = lossless && pback.inputs == a.pseudo.inputs &&
                       pback.soft_label == a.pseudo.soft_label &&
                       pback.hard_label == a.pseudo.hard_label &&
                       pback.source_task == a.pseudo.source_task &&
                       pback.num_classes == a.pseudo.num_classes;
        }
        fs::remove_all(dir);

        // the default-suite learner trace walks exactly five learning rates
        bool schedule = false;
        double lr_first = 0.0, lr_last = 0.0;
        if (default_report) {
            const SMLTrainResult& run =
                default_report->sml_runs.at("StatsMerging (layer-wise)");
            std::set<double> lrs;
            for (const auto& entry : run.trace) lrs.insert(entry.lr);
            lr_first = run.trace.front().lr;
            lr_last = run.trace.back().lr;
            schedule = run.trace.size() == 500 && lrs.size() == 5 &&
                       std::fabs(lr_first - 1e-3) < 1e-15 && std::fabs(lr_last - 1e-7) < 1e-12;
        }

        const bool ok = replay && lossless && schedule;
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "replay %s, containers %s, lr %g..%g over 500 epochs %s",
                      replay ? "identical" : "diverged", lossless ? "lossless" : "lossy",
                      lr_first, lr_last, schedule ? "in 5 plateaus" : "malformed");
        report(9, ok, label, buf);
    } catch (const std::exception& e) {
        report_error(9, label, e);
    }
}

}  // namespace

int main() {
    default_cfg = TaskSuiteConfig{};  // the committed defaults, committed seed included

    criterion_svd();
    criterion_sml_gradient();
    criterion_baseline_equivalences();
    criterion_default_suite();
    criterion_label_free();
    criterion_hetero();
    criterion_coefficients();
    criterion_corruption();
    criterion_reproducibility();

    if (failures) {
        std::printf("%d of 9 checks failed\n", failures);
        return 1;
    }
    std::printf("all 9 checks passed\n");
    return 0;
}
