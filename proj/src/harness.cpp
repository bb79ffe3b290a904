#include "statsmerge/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "statsmerge/error.hpp"
#include "statsmerge/rng.hpp"
#include "json.hpp"

namespace statsmerge {

namespace {

using json = nlohmann::ordered_json;

template <typename F>
auto run_stage(const std::string& stage, F&& fn) {
    try {
        return fn();
    } catch (const ShapeError& e) {
        throw ShapeError(stage + ": " + e.what());
    } catch (const ParamError& e) {
        throw ParamError(stage + ": " + e.what());
    } catch (const CompatError& e) {
        throw CompatError(stage + ": " + e.what());
    } catch (const IoError& e) {
        throw IoError(stage + ": " + e.what());
    }
}

// rows are orthonormal; task-specific random basis for the cluster means
Matrix orthonormal_rows(std::size_t n, std::size_t d, Rng& rng) {
    Matrix q(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        while (true) {
            for (std::size_t c = 0; c < d; ++c) q(i, c) = rng.normal();
            for (std::size_t j = 0; j < i; ++j) {
                double dot = 0.0;
                for (std::size_t c = 0; c < d; ++c) dot += q(i, c) * q(j, c);
                for (std::size_t c = 0; c < d; ++c) q(i, c) -= dot * q(j, c);
            }
            double norm = 0.0;
            for (std::size_t c = 0; c < d; ++c) norm += q(i, c) * q(i, c);
            norm = std::sqrt(norm);
            if (norm > 1e-8) {
                for (std::size_t c = 0; c < d; ++c) q(i, c) /= norm;
                break;
            }
        }
    }
    return q;
}

Dataset sample_split(const TaskSuiteConfig& cfg, std::size_t task, const Matrix& directions,
                     double offset_scale, std::size_t n, Rng& rng) {
    Dataset ds;
    ds.num_classes = cfg.total_classes();
    ds.inputs = Matrix(n, cfg.input_dim);
    ds.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i % cfg.classes_per_task;
        for (std::size_t c = 0; c < cfg.input_dim; ++c) {
            ds.inputs(i, c) = offset_scale * directions(j, c) + rng.normal();
        }
        ds.labels[i] = static_cast<std::uint32_t>(task * cfg.classes_per_task + j);
    }
    return ds;
}

double accuracy_on(const ModelCheckpoint& ckpt, const Matrix& inputs,
                   const std::vector<std::uint32_t>& labels) {
    const Matrix logits = forward_logits(ckpt, inputs);
    if (labels.size() != logits.rows) {
        throw ShapeError("got " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(logits.rows) + " rows");
    }
    std::size_t hits = 0;
    for (std::size_t r = 0; r < logits.rows; ++r) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < logits.cols; ++c) {
            if (logits(r, c) > logits(r, best)) best = c;
        }
        if (best == labels[r]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(logits.rows);
}

double grid_search_lambda(const ModelCheckpoint& base,
                          const std::vector<ModelCheckpoint>& task_models,
                          const PseudoLabeledSet& pseudo) {
    double best_lambda = 0.1;
    double best_acc = -1.0;
    for (int step = 1; step <= 10; ++step) {
        const double lam = 0.1 * step;
        const ModelCheckpoint merged = task_arithmetic(base, task_models, lam);
        const double acc = accuracy_on(merged, pseudo.inputs, pseudo.hard_label);
        if (acc > best_acc) {
            best_acc = acc;
            best_lambda = lam;
        }
    }
    return best_lambda;
}

const char* merge_mode_name(MergeMode mode) {
    return mode == MergeMode::layer_wise ? "layer_wise" : "task_wise";
}

const char* label_mode_name(LabelMode mode) {
    switch (mode) {
        case LabelMode::kd_hard: return "kd_hard";
        case LabelMode::kd_soft: return "kd_soft";
        default: return "ground_truth";
    }
}

json coefficients_json(const CoefficientTable& coeffs) {
    json j;
    j["mode"] = merge_mode_name(coeffs.mode);
    j["values"] = coeffs.values;
    return j;
}

}  // namespace

void TaskSuiteConfig::validate() const {
    if (tasks == 0 || classes_per_task == 0 || input_dim == 0) {
        throw ParamError("suite counts must be >= 1");
    }
    if (train_per_task == 0 || val_per_task == 0 || test_per_task == 0) {
        throw ParamError("split sizes must be >= 1");
    }
    if (classes_per_task > input_dim) {
        throw ParamError("classes_per_task " + std::to_string(classes_per_task) +
                         " exceeds input_dim " + std::to_string(input_dim) +
                         "; cluster directions would not fit");
    }
    if (!(cluster_separation > 0.0)) throw ParamError("cluster_separation must be > 0");
    if (hidden_dims.empty()) throw ParamError("hidden_dims must name at least one layer");
}

TaskSuite gen_tasks(const TaskSuiteConfig& cfg) {
    cfg.validate();
    Rng root(cfg.seed);
    TaskSuite suite;
    suite.tasks.reserve(cfg.tasks);
    for (std::size_t k = 0; k < cfg.tasks; ++k) {
        Rng task_rng = root.child(10 + k);
        // Difficulty ladder: offset scale falls from 1.8x to 0.5x cluster_separation across
        // tasks, so the fine-tuned deltas differ in how much a merged model needs them.
        const double t = cfg.tasks > 1
                             ? static_cast<double>(k) / static_cast<double>(cfg.tasks - 1)
                             : 0.0;
        const double offset_scale = cfg.cluster_separation * (1.8 - 1.3 * t);
        const Matrix directions = orthonormal_rows(cfg.classes_per_task, cfg.input_dim, task_rng);
        Rng train_rng = task_rng.child(1);
        Rng val_rng = task_rng.child(2);
        Rng test_rng = task_rng.child(3);
        TaskData td;
        td.task_id = "task" + std::to_string(k);
        td.train = sample_split(cfg, k, directions, offset_scale, cfg.train_per_task, train_rng);
        td.val = sample_split(cfg, k, directions, offset_scale, cfg.val_per_task, val_rng);
        td.test = sample_split(cfg, k, directions, offset_scale, cfg.test_per_task, test_rng);
        suite.tasks.push_back(std::move(td));
    }

    const std::size_t total = cfg.tasks * cfg.train_per_task;
    suite.pretrain.num_classes = cfg.total_classes();
    suite.pretrain.inputs = Matrix(total, cfg.input_dim);
    suite.pretrain.labels.reserve(total);
    std::size_t at = 0;
    for (const auto& td : suite.tasks) {
        std::copy(td.train.inputs.values.begin(), td.train.inputs.values.end(),
                  suite.pretrain.inputs.values.begin() + at);
        at += td.train.inputs.values.size();
        suite.pretrain.labels.insert(suite.pretrain.labels.end(), td.train.labels.begin(),
                                     td.train.labels.end());
    }
    return suite;
}

double evaluate(const ModelCheckpoint& ckpt, const Dataset& test) {
    test.validate();
    if (test.num_classes != ckpt.arch.output_dim()) {
        throw ShapeError("dataset has " + std::to_string(test.num_classes) +
                         " classes, model outputs " + std::to_string(ckpt.arch.output_dim()));
    }
    return accuracy_on(ckpt, test.inputs, test.labels);
}

Dataset corrupt_gaussian(const Dataset& ds, double sigma, std::uint64_t seed) {
    if (sigma < 0.0) throw ParamError("sigma must be >= 0");
    Dataset out = ds;
    if (sigma == 0.0) return out;
    Rng rng(seed);
    for (double& v : out.inputs.values) v += sigma * rng.normal();
    return out;
}

PseudoLabeledSet ground_truth_set(const std::vector<TaskData>& tasks, double fraction,
                                  std::uint64_t seed) {
    if (tasks.empty()) throw ParamError("no tasks");
    std::vector<std::size_t> sizes;
    sizes.reserve(tasks.size());
    for (const auto& td : tasks) sizes.push_back(td.val.size());
    const auto rows = pseudo_sample_rows(sizes, fraction, seed);

    const std::size_t d = tasks.front().val.inputs.cols;
    const std::size_t C = tasks.front().val.num_classes;
    std::size_t total = 0;
    for (const auto& r : rows) total += r.size();

    PseudoLabeledSet out;
    out.num_classes = C;
    out.inputs = Matrix(total, d);
    out.soft_label = Matrix(total, C);
    std::size_t at = 0;
    for (std::size_t k = 0; k < tasks.size(); ++k) {
        const Dataset& val = tasks[k].val;
        if (val.num_classes != C || val.inputs.cols != d) {
            throw ShapeError("task " + std::to_string(k) + " validation split is inconsistent");
        }
        for (std::size_t r : rows[k]) {
            for (std::size_t c = 0; c < d; ++c) out.inputs(at, c) = val.inputs(r, c);
            const std::uint32_t y = val.labels[r];
            out.soft_label(at, y) = 1.0;
            out.hard_label.push_back(y);
            out.source_task.push_back(static_cast<std::uint32_t>(k));
            ++at;
        }
    }
    out.validate();
    return out;
}

ModelCheckpoint pretrain_base(const TaskSuiteConfig& cfg, const Dataset& pretrain) {
    Rng root(cfg.seed);
    Rng init_rng = root.child(500);
    Rng train_rng = root.child(501);
    ModelCheckpoint base = init_checkpoint(cfg.arch(), init_rng.next_u64());
    base = train_supervised(base, pretrain, cfg.pretrain_epochs, cfg.finetune_lr,
                            train_rng.next_u64());
    base.meta.base_fingerprint = param_fingerprint(base);
    return base;
}

const ReportRow& ExperimentReport::row(const std::string& method) const {
    for (const auto& r : rows) {
        if (r.method == method) return r;
    }
    throw ParamError("report has no row '" + method + "'");
}

std::string method_label(const MergeRequest& request) {
    if (request.method == "weight_avg") return "Weight Averaging";
    if (request.method == "task_arithmetic") return "Task Arithmetic";
    if (request.method == "ties") return "Ties-Merging";
    if (request.method == "stats") {
        return request.mode == MergeMode::layer_wise ? "StatsMerging (layer-wise)"
                                                     : "StatsMerging (task-wise)";
    }
    throw ParamError("unknown merge method '" + request.method + "'");
}

ExperimentReport run_experiment(const TaskSuiteConfig& suite,
                                const std::vector<MergeRequest>& methods,
                                const SMLTrainConfig& sml_cfg, const StatsConfig& stats_cfg) {
    suite.validate();
    for (const auto& m : methods) m.validate();

    ExperimentReport report;
    report.config = suite;
    report.stats_cfg = stats_cfg;
    report.sml_cfg = sml_cfg;

    using clock = std::chrono::steady_clock;
    const auto timed = [&report](const std::string& stage, auto&& fn) {
        const auto t0 = clock::now();
        auto value = run_stage(stage, fn);
        const std::chrono::duration<double> dt = clock::now() - t0;
        report.timings.push_back({stage, dt.count()});
        return value;
    };

    // every stage seed derives from the suite seed, so one seed pins the run
    Rng root(suite.seed);

    const TaskSuite data = timed("gen_tasks", [&] { return gen_tasks(suite); });
    for (const auto& td : data.tasks) report.task_ids.push_back(td.task_id);
    const std::size_t K = data.tasks.size();

    report.base_model =
        timed("pretrain", [&] { return pretrain_base(suite, data.pretrain); });

    report.task_models = timed("finetune", [&] {
        std::vector<ModelCheckpoint> models;
        models.reserve(K);
        for (std::size_t k = 0; k < K; ++k) {
            Rng ft = root.child(600 + k);
            ModelCheckpoint m = fine_tune(report.base_model, data.tasks[k].train,
                                          suite.finetune_epochs, suite.finetune_lr, ft.next_u64());
            m.meta.task_id = data.tasks[k].task_id;
            models.push_back(std::move(m));
        }
        return models;
    });

    report.pseudo = timed("pseudo_labels", [&] {
        std::vector<Matrix> val_inputs;
        val_inputs.reserve(K);
        for (const auto& td : data.tasks) val_inputs.push_back(td.val.inputs);
        Rng ps = root.child(700);
        return generate_pseudo_labels(report.task_models, val_inputs, sml_cfg.pseudo_fraction,
                                      ps.next_u64());
    });

    const auto eval_row = [&](const std::string& label, const ModelCheckpoint& ckpt) {
        ReportRow row;
        row.method = label;
        double sum = 0.0;
        for (const auto& td : data.tasks) {
            row.per_task.push_back(evaluate(ckpt, td.test));
            sum += row.per_task.back();
        }
        row.avg_acc = sum / static_cast<double>(K);
        return row;
    };

    report.rows.push_back(timed("eval Pre-Trained",
                                [&] { return eval_row("Pre-Trained", report.base_model); }));
    report.rows.push_back(timed("eval Individual", [&] {
        ReportRow row;
        row.method = "Individual";
        double sum = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            row.per_task.push_back(evaluate(report.task_models[k], data.tasks[k].test));
            sum += row.per_task.back();
        }
        row.avg_acc = sum / static_cast<double>(K);
        return row;
    }));

    for (std::size_t i = 0; i < methods.size(); ++i) {
        const MergeRequest& request = methods[i];
        const std::string label = method_label(request);
        const ModelCheckpoint merged = timed(label, [&]() -> ModelCheckpoint {
            if (request.method == "stats") {
                if (request.coefficients) {
                    return stats_merge(report.task_models, *request.coefficients);
                }
                SMLTrainConfig cfg = sml_cfg;
                Rng sr = root.child(800 + i);
                cfg.seed = sr.next_u64();
                SMLTrainResult run =
                    train_sml(report.task_models, report.pseudo, cfg, stats_cfg, request.mode);
                ModelCheckpoint m = stats_merge(report.task_models, run.coeffs);
                report.sml_runs[label] = std::move(run);
                return m;
            }
            if (request.method == "weight_avg") return weight_average(report.task_models);
            const ModelCheckpoint& base = request.base ? *request.base : report.base_model;
            if (request.method == "task_arithmetic") {
                const double lam = request.scaling
                                       ? *request.scaling
                                       : grid_search_lambda(base, report.task_models,
                                                            report.pseudo);
                return task_arithmetic(base, report.task_models, lam);
            }
            return ties_merge(base, report.task_models, request.scaling.value_or(1.0),
                              request.keep_fraction);
        });
        report.rows.push_back(eval_row(label, merged));
        report.merged_models[label] = merged;
    }

    const std::string lw_label = "StatsMerging (layer-wise)";
    if (auto it = report.sml_runs.find(lw_label); it != report.sml_runs.end()) {
        report.coefficients = it->second.coeffs;
        report.has_coefficients = true;
    } else if (!report.sml_runs.empty()) {
        report.coefficients = report.sml_runs.begin()->second.coeffs;
        report.has_coefficients = true;
    }
    return report;
}

std::string report_json(const ExperimentReport& report) {
    json j;
    j["config"]["suite"] = {{"tasks", report.config.tasks},
                            {"classes_per_task", report.config.classes_per_task},
                            {"input_dim", report.config.input_dim},
                            {"train_per_task", report.config.train_per_task},
                            {"val_per_task", report.config.val_per_task},
                            {"test_per_task", report.config.test_per_task},
                            {"cluster_separation", report.config.cluster_separation},
                            {"hidden_dims", report.config.hidden_dims},
                            {"pretrain_epochs", report.config.pretrain_epochs},
                            {"finetune_epochs", report.config.finetune_epochs},
                            {"finetune_lr", report.config.finetune_lr},
                            {"seed", report.config.seed}};
    j["config"]["stats"] = {{"rank", report.stats_cfg.rank},
                            {"normalize", report.stats_cfg.normalize}};
    j["config"]["sml"] = {{"epochs", report.sml_cfg.epochs},
                          {"base_lr", report.sml_cfg.base_lr},
                          {"decay_every", report.sml_cfg.decay_every},
                          {"decay_factor", report.sml_cfg.decay_factor},
                          {"batch_size", report.sml_cfg.batch_size},
                          {"hidden_dim", report.sml_cfg.hidden_dim},
                          {"label_mode", label_mode_name(report.sml_cfg.label_mode)},
                          {"pseudo_fraction", report.sml_cfg.pseudo_fraction}};
    j["seed"] = report.config.seed;
    j["rows"] = json::array();
    for (const auto& row : report.rows) {
        json per_task;
        for (std::size_t k = 0; k < row.per_task.size(); ++k) {
            per_task[report.task_ids[k]] = row.per_task[k];
        }
        j["rows"].push_back(
            {{"method", row.method}, {"per_task", per_task}, {"avg_acc", row.avg_acc}});
    }
    j["coefficients"] = report.has_coefficients ? coefficients_json(report.coefficients)
                                                : json(nullptr);
    return j.dump(2) + "\n";
}

std::string timings_json(const ExperimentReport& report) {
    json j;
    j["timings"] = json::array();
    for (const auto& t : report.timings) {
        j["timings"].push_back({{"stage", t.stage}, {"seconds", t.seconds}});
    }
    return j.dump(2) + "\n";
}

std::string report_text(const ExperimentReport& report) {
    std::size_t width = std::string("method").size();
    for (const auto& row : report.rows) width = std::max(width, row.method.size());
    std::ostringstream out;
    out << std::left;
    out.width(static_cast<std::streamsize>(width + 2));
    out << "method";
    for (const auto& id : report.task_ids) {
        out.width(9);
        out << id;
    }
    out << "Avg Acc\n";
    char cell[32];
    for (const auto& row : report.rows) {
        out.width(static_cast<std::streamsize>(width + 2));
        out << row.method;
        for (double acc : row.per_task) {
            std::snprintf(cell, sizeof cell, "%-9.4f", acc);
            out << cell;
        }
        std::snprintf(cell, sizeof cell, "%.4f", row.avg_acc);
        out << cell << "\n";
    }
    return out.str();
}

void export_heatmap(const CoefficientTable& coeffs, const std::string& path) {
    coeffs.validate();
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << "task,layer,lambda\n";
    char buf[40];
    for (std::size_t k = 0; k < coeffs.tasks(); ++k) {
        for (std::size_t l = 0; l < coeffs.layers(); ++l) {
            std::snprintf(buf, sizeof buf, "%.17g", coeffs.values[k][l]);
            f << k << ',' << l << ',' << buf << '\n';
        }
    }
    f.flush();
    if (!f) throw IoError("short write to '" + path + "'");
}

CoefficientTable parse_heatmap(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open '" + path + "' for reading");
    std::string line;
    std::size_t offset = 0;
    if (!std::getline(f, line) || line != "task,layer,lambda") {
        throw FormatError("heatmap header must be \"task,layer,lambda\"", 0);
    }
    offset += line.size() + 1;

    std::map<std::pair<std::size_t, std::size_t>, double> cells;
    std::size_t max_task = 0, max_layer = 0;
    while (std::getline(f, line)) {
        if (line.empty()) {
            offset += 1;
            continue;
        }
        const char* s = line.c_str();
        char* end = nullptr;
        const auto task = static_cast<std::size_t>(std::strtoull(s, &end, 10));
        if (end == s || *end != ',') throw FormatError("bad heatmap row", offset);
        s = end + 1;
        const auto layer = static_cast<std::size_t>(std::strtoull(s, &end, 10));
        if (end == s || *end != ',') throw FormatError("bad heatmap row", offset);
        s = end + 1;
        const double lambda = std::strtod(s, &end);
        if (end == s || *end != '\0') throw FormatError("bad heatmap row", offset);
        if (!cells.emplace(std::make_pair(task, layer), lambda).second) {
            throw FormatError("duplicate heatmap cell", offset);
        }
        max_task = std::max(max_task, task);
        max_layer = std::max(max_layer, layer);
        offset += line.size() + 1;
    }
    if (cells.empty()) throw FormatError("heatmap has no data rows", offset);
    const std::size_t K = max_task + 1;
    const std::size_t L = max_layer + 1;
    if (cells.size() != K * L) {
        throw FormatError("heatmap is missing cells for a full " + std::to_string(K) + "x" +
                              std::to_string(L) + " table",
                          offset);
    }
    CoefficientTable table;
    table.mode = L == 1 ? MergeMode::task_wise : MergeMode::layer_wise;
    table.values.assign(K, std::vector<double>(L, 0.0));
    for (const auto& [key, lambda] : cells) table.values[key.first][key.second] = lambda;
    table.validate();
    return table;
}

HeteroReport run_hetero_experiment(const TaskSuiteConfig& suite,
                                   const std::vector<std::size_t>& teacher_hidden,
                                   const std::vector<std::size_t>& student_hidden,
                                   const DistillConfig& distill_cfg,
                                   const SMLTrainConfig& sml_cfg, const StatsConfig& stats_cfg) {
    suite.validate();
    TaskSuiteConfig teacher_cfg = suite;
    teacher_cfg.hidden_dims = teacher_hidden;
    TaskSuiteConfig student_cfg = suite;
    student_cfg.hidden_dims = student_hidden;

    Rng root(suite.seed);
    const TaskSuite data = run_stage("gen_tasks", [&] { return gen_tasks(suite); });
    const std::size_t K = data.tasks.size();

    HeteroReport report;
    for (const auto& td : data.tasks) report.task_ids.push_back(td.task_id);

    const ModelCheckpoint teacher_base = run_stage(
        "pretrain teachers", [&] { return pretrain_base(teacher_cfg, data.pretrain); });
    std::vector<ModelCheckpoint> teachers = run_stage("finetune teachers", [&] {
        std::vector<ModelCheckpoint> out;
        for (std::size_t k = 0; k < K; ++k) {
            Rng ft = root.child(600 + k);
            ModelCheckpoint m = fine_tune(teacher_base, data.tasks[k].train,
                                          suite.finetune_epochs, suite.finetune_lr, ft.next_u64());
            m.meta.task_id = data.tasks[k].task_id;
            out.push_back(std::move(m));
        }
        return out;
    });

    report.student_base = run_stage(
        "pretrain target", [&] { return pretrain_base(student_cfg, data.pretrain); });

    report.students = run_stage("distill", [&] {
        std::vector<ModelCheckpoint> out;
        for (std::size_t k = 0; k < K; ++k) {
            DistillConfig cfg = distill_cfg;
            Rng dr = root.child(900 + k);
            cfg.seed = dr.next_u64();
            out.push_back(hetero_distill(teachers[k], report.student_base, data.tasks[k].train,
                                         cfg));
        }
        return out;
    });

    for (std::size_t k = 0; k < K; ++k) {
        report.teacher_acc.push_back(evaluate(teachers[k], data.tasks[k].test));
        report.distilled_acc.push_back(evaluate(report.students[k], data.tasks[k].test));
    }

    const PseudoLabeledSet pseudo = run_stage("pseudo_labels", [&] {
        std::vector<Matrix> val_inputs;
        for (const auto& td : data.tasks) val_inputs.push_back(td.val.inputs);
        Rng ps = root.child(700);
        return generate_pseudo_labels(report.students, val_inputs, sml_cfg.pseudo_fraction,
                                      ps.next_u64());
    });

    const auto eval_row = [&](const std::string& label, const ModelCheckpoint& ckpt) {
        ReportRow row;
        row.method = label;
        double sum = 0.0;
        for (const auto& td : data.tasks) {
            row.per_task.push_back(evaluate(ckpt, td.test));
            sum += row.per_task.back();
        }
        row.avg_acc = sum / static_cast<double>(K);
        return row;
    };

    const ModelCheckpoint stats_merged = run_stage("StatsMerging (layer-wise)", [&] {
        SMLTrainConfig cfg = sml_cfg;
        Rng sr = root.child(800);
        cfg.seed = sr.next_u64();
        SMLTrainResult run =
            train_sml(report.students, pseudo, cfg, stats_cfg, MergeMode::layer_wise);
        report.coefficients = run.coeffs;
        return stats_merge(report.students, run.coeffs);
    });
    report.stats_row = eval_row("StatsMerging (layer-wise)", stats_merged);

    const ModelCheckpoint ta_merged = run_stage("Task Arithmetic", [&] {
        const double lam = grid_search_lambda(report.student_base, report.students, pseudo);
        return task_arithmetic(report.student_base, report.students, lam);
    });
    report.arithmetic_row = eval_row("Task Arithmetic", ta_merged);
    return report;
}

}  // namespace statsmerge
