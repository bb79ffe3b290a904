#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "statsmerge/container.hpp"
#include "statsmerge/error.hpp"
#include "statsmerge/harness.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace statsmerge;

namespace {

json load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config '" + path + "'");
    try {
        return json::parse(f);
    } catch (const json::exception& e) {
        throw ParamError("config '" + path + "': " + e.what());
    }
}

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
    if (!obj.is_object()) throw ParamError("config section '" + where + "' must be an object");
    for (const auto& item : obj.items()) {
        if (!allowed.count(item.key())) {
            throw ParamError("config " + where + ": unknown key '" + item.key() + "'");
        }
    }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParamError(std::string("config key '") + key + "': " + e.what());
    }
}

TaskSuiteConfig parse_suite(const json& obj) {
    check_keys(obj,
               {"tasks", "classes_per_task", "input_dim", "train_per_task", "val_per_task",
                "test_per_task", "cluster_separation", "seed", "hidden_dims", "pretrain_epochs",
                "finetune_epochs", "finetune_lr"},
               "suite");
    TaskSuiteConfig cfg;
    cfg.tasks = get_or<std::size_t>(obj, "tasks", cfg.tasks);
    cfg.classes_per_task = get_or<std::size_t>(obj, "classes_per_task", cfg.classes_per_task);
    cfg.input_dim = get_or<std::size_t>(obj, "input_dim", cfg.input_dim);
    cfg.train_per_task = get_or<std::size_t>(obj, "train_per_task", cfg.train_per_task);
    cfg.val_per_task = get_or<std::size_t>(obj, "val_per_task", cfg.val_per_task);
    cfg.test_per_task = get_or<std::size_t>(obj, "test_per_task", cfg.test_per_task);
    cfg.cluster_separation = get_or<double>(obj, "cluster_separation", cfg.cluster_separation);
    cfg.seed = get_or<std::uint64_t>(obj, "seed", cfg.seed);
    cfg.hidden_dims = get_or<std::vector<std::size_t>>(obj, "hidden_dims", cfg.hidden_dims);
    cfg.pretrain_epochs = get_or<std::size_t>(obj, "pretrain_epochs", cfg.pretrain_epochs);
    cfg.finetune_epochs = get_or<std::size_t>(obj, "finetune_epochs", cfg.finetune_epochs);
    cfg.finetune_lr = get_or<double>(obj, "finetune_lr", cfg.finetune_lr);
    return cfg;
}

StatsConfig parse_stats(const json& obj) {
    check_keys(obj, {"rank", "normalize"}, "stats");
    StatsConfig cfg;
    cfg.rank = get_or<std::size_t>(obj, "rank", cfg.rank);
    cfg.normalize = get_or<bool>(obj, "normalize", cfg.normalize);
    return cfg;
}

LabelMode parse_label_mode(const std::string& name) {
    if (name == "kd_hard") return LabelMode::kd_hard;
    if (name == "kd_soft") return LabelMode::kd_soft;
    if (name == "ground_truth") return LabelMode::ground_truth;
    throw ParamError("unknown label_mode '" + name + "'");
}

MergeMode parse_merge_mode(const std::string& name) {
    if (name == "layer_wise") return MergeMode::layer_wise;
    if (name == "task_wise") return MergeMode::task_wise;
    throw ParamError("unknown mode '" + name + "'");
}

SMLTrainConfig parse_sml(const json& obj) {
    check_keys(obj,
               {"epochs", "base_lr", "decay_every", "decay_factor", "batch_size", "hidden_dim",
                "label_mode", "seed", "pseudo_fraction"},
               "sml");
    SMLTrainConfig cfg;
    cfg.epochs = get_or<std::size_t>(obj, "epochs", cfg.epochs);
    cfg.base_lr = get_or<double>(obj, "base_lr", cfg.base_lr);
    cfg.decay_every = get_or<std::size_t>(obj, "decay_every", cfg.decay_every);
    cfg.decay_factor = get_or<double>(obj, "decay_factor", cfg.decay_factor);
    cfg.batch_size = get_or<std::size_t>(obj, "batch_size", cfg.batch_size);
    cfg.hidden_dim = get_or<std::size_t>(obj, "hidden_dim", cfg.hidden_dim);
    cfg.label_mode = parse_label_mode(get_or<std::string>(obj, "label_mode", "kd_hard"));
    cfg.seed = get_or<std::uint64_t>(obj, "seed", cfg.seed);
    cfg.pseudo_fraction = get_or<double>(obj, "pseudo_fraction", cfg.pseudo_fraction);
    return cfg;
}

DistillConfig parse_distill(const json& obj) {
    check_keys(obj, {"alpha", "temperature", "epochs", "lr", "seed"}, "distill");
    DistillConfig cfg;
    cfg.alpha = get_or<double>(obj, "alpha", cfg.alpha);
    cfg.temperature = get_or<double>(obj, "temperature", cfg.temperature);
    cfg.epochs = get_or<std::size_t>(obj, "epochs", cfg.epochs);
    cfg.lr = get_or<double>(obj, "lr", cfg.lr);
    cfg.seed = get_or<std::uint64_t>(obj, "seed", cfg.seed);
    return cfg;
}

std::vector<MergeRequest> parse_methods(const json& arr) {
    if (!arr.is_array()) throw ParamError("config methods must be an array");
    std::vector<MergeRequest> methods;
    for (const auto& entry : arr) {
        check_keys(entry, {"method", "mode", "scaling", "keep_fraction"}, "methods[]");
        MergeRequest request;
        request.method = get_or<std::string>(entry, "method", "");
        if (entry.contains("mode")) {
            request.mode = parse_merge_mode(entry.at("mode").get<std::string>());
        }
        if (entry.contains("scaling")) request.scaling = entry.at("scaling").get<double>();
        request.keep_fraction = get_or<double>(entry, "keep_fraction", request.keep_fraction);
        request.validate();
        methods.push_back(std::move(request));
    }
    return methods;
}

struct ConfigBundle {
    TaskSuiteConfig suite;
    StatsConfig stats;
    SMLTrainConfig sml;
    DistillConfig distill;
    std::vector<MergeRequest> methods;
    std::string workdir = ".";
};

ConfigBundle parse_config_file(const std::string& path) {
    ConfigBundle bundle;
    bundle.methods = {
        MergeRequest{.method = "weight_avg"},
        MergeRequest{.method = "task_arithmetic"},
        MergeRequest{.method = "ties"},
        MergeRequest{.method = "stats", .mode = MergeMode::task_wise},
        MergeRequest{.method = "stats", .mode = MergeMode::layer_wise},
    };
    if (path.empty()) return bundle;
    const json doc = load_config(path);
    check_keys(doc, {"suite", "stats", "sml", "distill", "methods", "paths"}, "top level");
    if (doc.contains("suite")) bundle.suite = parse_suite(doc.at("suite"));
    if (doc.contains("stats")) bundle.stats = parse_stats(doc.at("stats"));
    if (doc.contains("sml")) bundle.sml = parse_sml(doc.at("sml"));
    if (doc.contains("distill")) bundle.distill = parse_distill(doc.at("distill"));
    if (doc.contains("methods")) bundle.methods = parse_methods(doc.at("methods"));
    if (doc.contains("paths")) {
        check_keys(doc.at("paths"), {"workdir", "checkpoint_dir"}, "paths");
        bundle.workdir = get_or<std::string>(doc.at("paths"), "workdir", bundle.workdir);
    }
    return bundle;
}

fs::path under(const std::string& workdir, const std::string& name) {
    fs::path p(name);
    if (p.is_absolute()) return p;
    return fs::path(workdir) / p;
}

void ensure_dir(const std::string& workdir) {
    std::error_code ec;
    fs::create_directories(workdir, ec);
    if (ec) throw IoError("cannot create workdir '" + workdir + "': " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
    f << text;
    f.flush();
    if (!f) throw IoError("short write to '" + path.string() + "'");
}

void write_manifest(const fs::path& path, std::uint64_t seed,
                    const std::vector<std::string>& outputs) {
    json j;
    j["seed"] = seed;
    j["outputs"] = outputs;
    write_text(path, j.dump(2) + "\n");
}

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string stats_csv(const std::string& task_id, const ModelCheckpoint& ckpt,
                      const StatsConfig& cfg, bool task_wise) {
    std::string out = "task_id,layer_name,mu,var,norm";
    for (std::size_t i = 1; i <= cfg.rank; ++i) out += ",sv" + std::to_string(i);
    out += "\n";
    const auto emit = [&](const std::string& layer_name, const WeightStats& s) {
        out += task_id + "," + layer_name + "," + format_g17(s.mu) + "," + format_g17(s.var) +
               "," + format_g17(s.norm);
        for (double v : s.singular) out += "," + format_g17(v);
        out += "\n";
    };
    if (task_wise) {
        emit("all", task_stats(ckpt, cfg));
    } else {
        for (std::size_t l = 0; l < ckpt.arch.layer_count(); ++l) {
            emit(ckpt.params[2 * l].name, layer_stats(ckpt.weight(l), cfg));
        }
    }
    return out;
}

json fingerprint_entry(const std::string& path, const ModelCheckpoint& ckpt) {
    return json{{"path", path}, {"fingerprint", std::to_string(param_fingerprint(ckpt))}};
}

int run_cli(CLI::App& app, int argc, char** argv) {
    app.require_subcommand(1);

    // shared option storage; only the parsed subcommand's callback reads it
    std::string config_path, workdir = ".", out_path, mode_name = "layer_wise";
    std::vector<std::string> ckpt_paths, val_paths;
    std::optional<std::uint64_t> seed_flag;
    std::uint64_t seed_direct = 0;

    auto* gen = app.add_subcommand("gen-data",
                                   "Generate the synthetic task suite, the pretraining split, "
                                   "and a pretrained base checkpoint");
    gen->add_option("--config", config_path, "JSON config; suite section applies");
    gen->add_option("--seed", seed_flag, "Override the config seed");
    gen->add_option("--workdir", workdir, "Output directory")->capture_default_str();
    gen->callback([&] {
        ConfigBundle bundle = parse_config_file(config_path);
        if (seed_flag) bundle.suite.seed = *seed_flag;
        ensure_dir(workdir);
        const TaskSuite suite = gen_tasks(bundle.suite);
        std::vector<std::string> outputs;
        for (const auto& td : suite.tasks) {
            for (const auto& [split, ds] :
                 {std::pair{"train", &td.train}, {"val", &td.val}, {"test", &td.test}}) {
                const std::string name = td.task_id + "." + split + ".smrg";
                save_dataset(*ds, under(workdir, name).string());
                outputs.push_back(name);
            }
        }
        save_dataset(suite.pretrain, under(workdir, "pretrain.smrg").string());
        outputs.push_back("pretrain.smrg");
        const ModelCheckpoint base = pretrain_base(bundle.suite, suite.pretrain);
        save_checkpoint(base, under(workdir, "base.smrg").string());
        outputs.push_back("base.smrg");
        write_manifest(under(workdir, "gen-data.run.json"), bundle.suite.seed, outputs);
        std::cout << "wrote " << outputs.size() << " files under " << workdir << " (seed "
                  << bundle.suite.seed << ")\n";
    });

    std::string base_path, train_path, task_id;
    std::size_t epochs_direct = 150;
    double lr_direct = 1e-3;
    auto* ft = app.add_subcommand("finetune", "Fine-tune a pretrained base on one task split");
    ft->add_option("--base", base_path, "Pretrained checkpoint")->required();
    ft->add_option("--train", train_path, "Training dataset")->required();
    ft->add_option("--epochs", epochs_direct, "Training epochs")->capture_default_str();
    ft->add_option("--lr", lr_direct, "Adam learning rate")->capture_default_str();
    ft->add_option("--seed", seed_direct, "Shuffle seed")->required();
    ft->add_option("--task-id", task_id, "Task id stamped into the checkpoint");
    ft->add_option("--out", out_path, "Output checkpoint")->required();
    ft->add_option("--workdir", workdir, "Output directory")->capture_default_str();
    ft->callback([&] {
        ensure_dir(workdir);
        const ModelCheckpoint base = load_checkpoint(base_path);
        const Dataset train = load_dataset(train_path);
        ModelCheckpoint tuned = fine_tune(base, train, epochs_direct, lr_direct, seed_direct);
        if (!task_id.empty()) tuned.meta.task_id = task_id;
        const fs::path out = under(workdir, out_path);
        save_checkpoint(tuned, out.string());
        write_manifest(fs::path(out.string() + ".run.json"), seed_direct, {out_path});
        std::cout << "wrote " << out.string() << "\n";
    });

    std::size_t rank_direct = 3;
    bool task_wise_flag = false;
    auto* st = app.add_subcommand("stats", "Weight-distribution statistics of a checkpoint");
    st->add_option("--ckpt", base_path, "Checkpoint to analyze")->required();
    st->add_option("--rank", rank_direct, "Singular values per tensor")->capture_default_str();
    st->add_flag("--task-wise", task_wise_flag, "Aggregate over layers instead of per layer");
    st->add_option("--out", out_path, "CSV output path (default stdout)");
    st->add_option("--workdir", workdir, "Output directory")->capture_default_str();
    st->callback([&] {
        const ModelCheckpoint ckpt = load_checkpoint(base_path);
        StatsConfig cfg;
        cfg.rank = rank_direct;
        const std::string task_label =
            ckpt.meta.task_id.empty() ? ckpt.meta.role : ckpt.meta.task_id;
        const std::string csv = stats_csv(task_label, ckpt, cfg, task_wise_flag);
        if (out_path.empty()) {
            std::cout << csv;
        } else {
            ensure_dir(workdir);
            write_text(under(workdir, out_path), csv);
            std::cout << "wrote " << under(workdir, out_path).string() << "\n";
        }
    });

    double fraction_direct = 0.2;
    auto* ps = app.add_subcommand("pseudo",
                                  "Teacher-predicted labels on validation subsamples");
    ps->add_option("--ckpt", ckpt_paths, "Task checkpoints, one per task, in task order")
        ->required();
    ps->add_option("--val", val_paths, "Validation datasets, aligned with --ckpt")->required();
    ps->add_option("--fraction", fraction_direct, "Subsample fraction")->capture_default_str();
    ps->add_option("--seed", seed_direct, "Subsample seed")->required();
    ps->add_option("--out", out_path, "Output pseudoset")->required();
    ps->add_option("--workdir", workdir, "Output directory")->capture_default_str();
    ps->callback([&] {
        ensure_dir(workdir);
        std::vector<ModelCheckpoint> teachers;
        for (const auto& p : ckpt_paths) teachers.push_back(load_checkpoint(p));
        std::vector<Matrix> val_inputs;
        for (const auto& p : val_paths) val_inputs.push_back(load_dataset(p).inputs);
        const PseudoLabeledSet set =
            generate_pseudo_labels(teachers, val_inputs, fraction_direct, seed_direct);
        const fs::path out = under(workdir, out_path);
        save_pseudoset(set, out.string());
        write_manifest(fs::path(out.string() + ".run.json"), seed_direct, {out_path});
        std::cout << "wrote " << out.string() << " (" << set.size() << " rows)\n";
    });

    std::string pseudo_path, heatmap_path;
    auto* ts = app.add_subcommand("train-sml",
                                  "Train the coefficient learner on a pseudo-labeled set");
    ts->add_option("--ckpt", ckpt_paths, "Task checkpoints to merge")->required();
    ts->add_option("--pseudo", pseudo_path, "Pseudo-labeled set")->required();
    ts->add_option("--config", config_path, "JSON config; sml and stats sections apply");
    ts->add_option("--seed", seed_flag, "Override the config seed");
    ts->add_option("--mode", mode_name, "task_wise or layer_wise")->capture_default_str();
    ts->add_option("--out", out_path, "Output SML container")->required();
    ts->add_option("--heatmap", heatmap_path, "Also export the coefficient CSV");
    ts->add_option("--workdir", workdir, "Output directory")->capture_default_str();
    ts->callback([&] {
        ConfigBundle bundle = parse_config_file(config_path);
        if (seed_flag) bundle.sml.seed = *seed_flag;
        ensure_dir(workdir);
        std::vector<ModelCheckpoint> models;
        for (const auto& p : ckpt_paths) models.push_back(load_checkpoint(p));
        const PseudoLabeledSet pseudo = load_pseudoset(pseudo_path);
        const SMLTrainResult run =
            train_sml(models, pseudo, bundle.sml, bundle.stats, parse_merge_mode(mode_name));
        for (std::size_t e = 0; e < run.trace.size(); ++e) {
            if (e % 50 == 0 || e + 1 == run.trace.size()) {
                std::cout << "epoch " << e << " lr " << run.trace[e].lr << " loss "
                          << run.trace[e].loss << "\n";
            }
        }
        const fs::path out = under(workdir, out_path);
        save_sml(run.params, out.string());
        std::vector<std::string> outputs = {out_path};
        if (!heatmap_path.empty()) {
            export_heatmap(run.coeffs, under(workdir, heatmap_path).string());
            outputs.push_back(heatmap_path);
        }
        write_manifest(fs::path(out.string() + ".run.json"), bundle.sml.seed, outputs);
        std::cout << "wrote " << out.string() << "\n";
    });

    std::string method_name, coeffs_path;
    std::optional<double> lambda_flag;
    double keep_fraction_direct = 0.2;
    auto* mg = app.add_subcommand("merge", "Merge task checkpoints into one");
    mg->add_option("--method", method_name, "stats | weight_avg | task_arithmetic | ties")
        ->required();
    mg->add_option("--ckpt", ckpt_paths, "Task checkpoints, in task order")->required();
    mg->add_option("--base", base_path, "Pretrained base (task_arithmetic/ties)");
    mg->add_option("--coeffs", coeffs_path, "Coefficient CSV (stats)");
    mg->add_option("--lambda", lambda_flag, "Scaling (task_arithmetic/ties)");
    mg->add_option("--keep-fraction", keep_fraction_direct, "Ties trim fraction")
        ->capture_default_str();
    mg->add_option("--out", out_path, "Output checkpoint")->required();
    mg->add_option("--workdir", workdir, "Output directory")->capture_default_str();
    mg->callback([&] {
        ensure_dir(workdir);
        MergeRequest request;
        request.method = method_name;
        std::vector<ModelCheckpoint> models;
        for (const auto& p : ckpt_paths) models.push_back(load_checkpoint(p));
        if (!coeffs_path.empty()) {
            request.coefficients = parse_heatmap(coeffs_path);
            request.mode = request.coefficients->mode;
        }
        if (lambda_flag) request.scaling = *lambda_flag;
        request.keep_fraction = keep_fraction_direct;
        if (!base_path.empty()) request.base = load_checkpoint(base_path);
        if (request.method == "stats" && !request.coefficients) {
            throw ParamError("stats merge needs --coeffs (train one with train-sml)");
        }
        if ((request.method == "task_arithmetic" || request.method == "ties") &&
            !request.scaling) {
            request.scaling = 1.0;
        }
        const ModelCheckpoint merged = run_merge(request, models);
        const fs::path out = under(workdir, out_path);
        save_checkpoint(merged, out.string());

        json sidecar;
        sidecar["method"] = method_name;
        if (request.method == "stats") {
            sidecar["mode"] = request.mode == MergeMode::layer_wise ? "layer_wise" : "task_wise";
            sidecar["coefficients"] = request.coefficients->values;
        }
        if (request.scaling) sidecar["lambda"] = *request.scaling;
        if (request.method == "ties") sidecar["keep_fraction"] = request.keep_fraction;
        json inputs = json::array();
        for (std::size_t i = 0; i < models.size(); ++i) {
            inputs.push_back(fingerprint_entry(ckpt_paths[i], models[i]));
        }
        sidecar["inputs"] = inputs;
        sidecar["base"] =
            request.base ? fingerprint_entry(base_path, *request.base) : json(nullptr);
        sidecar["output_fingerprint"] = std::to_string(param_fingerprint(merged));
        write_text(fs::path(out.string() + ".json"), sidecar.dump(2) + "\n");
        std::cout << "wrote " << out.string() << "\n";
    });

    std::string teacher_path, student_path;
    auto* ds = app.add_subcommand("distill",
                                  "Distill a teacher into a student architecture");
    ds->add_option("--teacher", teacher_path, "Teacher checkpoint")->required();
    ds->add_option("--student", student_path, "Student init checkpoint (target arch)")
        ->required();
    ds->add_option("--train", train_path, "Labeled training dataset")->required();
    ds->add_option("--config", config_path, "JSON config; distill section applies");
    ds->add_option("--seed", seed_flag, "Override the config seed");
    ds->add_option("--out", out_path, "Output checkpoint")->required();
    ds->add_option("--workdir", workdir, "Output directory")->capture_default_str();
    ds->callback([&] {
        ConfigBundle bundle = parse_config_file(config_path);
        if (seed_flag) bundle.distill.seed = *seed_flag;
        ensure_dir(workdir);
        const ModelCheckpoint teacher = load_checkpoint(teacher_path);
        const ModelCheckpoint student = load_checkpoint(student_path);
        const Dataset train = load_dataset(train_path);
        const ModelCheckpoint distilled = hetero_distill(teacher, student, train, bundle.distill);
        const fs::path out = under(workdir, out_path);
        save_checkpoint(distilled, out.string());
        write_manifest(fs::path(out.string() + ".run.json"), bundle.distill.seed, {out_path});
        std::cout << "wrote " << out.string() << "\n";
    });

    double sigma_direct = 0.0;
    auto* ev = app.add_subcommand("eval", "Accuracy of a checkpoint on a dataset");
    ev->add_option("--ckpt", base_path, "Checkpoint")->required();
    ev->add_option("--data", train_path, "Evaluation dataset")->required();
    ev->add_option("--sigma", sigma_direct, "Gaussian corruption of the inputs")
        ->capture_default_str();
    ev->add_option("--seed", seed_direct, "Corruption seed (with --sigma)");
    ev->callback([&] {
        const ModelCheckpoint ckpt = load_checkpoint(base_path);
        Dataset data = load_dataset(train_path);
        if (sigma_direct > 0.0) {
            data = corrupt_gaussian(data, sigma_direct, seed_direct);
            std::cout << "sigma " << sigma_direct << " seed " << seed_direct << "\n";
        }
        std::cout << "accuracy " << format_g17(evaluate(ckpt, data)) << "\n";
    });

    auto* ex = app.add_subcommand("experiment", "Full pipeline: generate, train, merge, report");
    ex->add_option("--config", config_path, "JSON config; all sections apply");
    ex->add_option("--seed", seed_flag, "Override the config seed");
    ex->add_option("--workdir", workdir, "Output directory")->capture_default_str();
    ex->callback([&] {
        ConfigBundle bundle = parse_config_file(config_path);
        if (seed_flag) bundle.suite.seed = *seed_flag;
        if (workdir == ".") workdir = bundle.workdir;
        ensure_dir(workdir);
        const ExperimentReport report =
            run_experiment(bundle.suite, bundle.methods, bundle.sml, bundle.stats);
        write_text(under(workdir, "report.json"), report_json(report));
        write_text(under(workdir, "report.txt"), report_text(report));
        write_text(under(workdir, "report.timings.json"), timings_json(report));
        if (report.has_coefficients) {
            export_heatmap(report.coefficients, under(workdir, "coefficients.csv").string());
        }
        std::cout << report_text(report);
        std::cout << "wrote report.json, report.txt, report.timings.json"
                  << (report.has_coefficients ? ", coefficients.csv" : "") << " under "
                  << workdir << "\n";
    });

    std::string sml_path;
    auto* hm = app.add_subcommand("heatmap",
                                  "Coefficients of a trained SML over task checkpoints, as CSV");
    hm->add_option("--ckpt", ckpt_paths, "Task checkpoints, in task order")->required();
    hm->add_option("--sml", sml_path, "Trained SML container")->required();
    hm->add_option("--mode", mode_name, "task_wise or layer_wise")->capture_default_str();
    hm->add_option("--rank", rank_direct, "Singular values per tensor")->capture_default_str();
    hm->add_option("--out", out_path, "CSV output path")->required();
    hm->add_option("--workdir", workdir, "Output directory")->capture_default_str();
    hm->callback([&] {
        ensure_dir(workdir);
        std::vector<ModelCheckpoint> models;
        for (const auto& p : ckpt_paths) models.push_back(load_checkpoint(p));
        const SMLParams params = load_sml(sml_path);
        StatsConfig cfg;
        cfg.rank = rank_direct;
        const MergeMode mode = parse_merge_mode(mode_name);
        const StatsTable table = mode == MergeMode::layer_wise ? layer_stats_table(models, cfg)
                                                               : task_stats_table(models, cfg);
        const FeatureTable features = feature_vector(table, cfg);
        std::vector<std::vector<double>> raw(features.size());
        for (std::size_t k = 0; k < features.size(); ++k) {
            for (const auto& f : features[k]) raw[k].push_back(sml_forward(params, f));
        }
        export_heatmap(normalize_scores(raw, mode), under(workdir, out_path).string());
        std::cout << "wrote " << under(workdir, out_path).string() << "\n";
    });

    app.parse(argc, argv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"statsmerge: model merging with statistics-learned coefficients"};
    try {
        return run_cli(app, argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const Error& e) {
        std::cerr << "error [" << e.category() << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
