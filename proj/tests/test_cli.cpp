// Drives the smerge binary through std::system and checks files, stdout, and
// exit codes. SMERGE_BIN is injected by the build.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "statsmerge/container.hpp"
#include "statsmerge/harness.hpp"
#include "statsmerge/learner.hpp"
#include "statsmerge/merge.hpp"

using namespace statsmerge;
namespace fs = std::filesystem;

namespace {

struct Sandbox {
    fs::path dir;
    Sandbox() {
        dir = fs::temp_directory_path() /
              ("smerge-cli-" + std::to_string(std::random_device{}()));
        fs::create_directories(dir);
    }
    ~Sandbox() { fs::remove_all(dir); }
    std::string file(const std::string& name) const { return (dir / name).string(); }
};

int run(const std::string& args, const std::string& capture = "") {
    std::string cmd = std::string(SMERGE_BIN) + " " + args;
    if (!capture.empty()) {
        cmd += " >" + capture + " 2>&1";
    } else {
        cmd += " >/dev/null 2>&1";
    }
    const int status = std::system(cmd.c_str());
    if (status < 0) return -1;
#ifdef _WIN32
    return status;
#else
    return WEXITSTATUS(status);
#endif
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    std::ostringstream out;
    out << f.rdbuf();
    return out.str();
}

std::string quick_config(const Sandbox& box) {
    const std::string path = box.file("cfg.json");
    std::ofstream f(path);
    f << R"({
  "suite": {
    "tasks": 2, "classes_per_task": 3, "input_dim": 8,
    "train_per_task": 120, "val_per_task": 60, "test_per_task": 60,
    "seed": 11, "hidden_dims": [16],
    "pretrain_epochs": 2, "finetune_epochs": 20
  },
  "sml": { "epochs": 20, "decay_every": 10, "hidden_dim": 16 }
})";
    return path;
}

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("usage problems exit 2, library errors exit 1, success exits 0") {
        Sandbox box;
        CHECK(run("definitely-not-a-subcommand") == 2);
        CHECK(run("") == 2);
        CHECK(run("--help") == 0);
        CHECK(run("gen-data --help") == 0);
        CHECK(run("finetune --base missing.smrg") == 2);  // missing required options
        CHECK(run("eval --ckpt /no/such.smrg --data /no/such.smrg") == 1);

        const std::string log = box.file("err.log");
        CHECK(run("eval --ckpt /no/such.smrg --data /no/such.smrg", log) == 1);
        CHECK(slurp(log).find("error [io]") != std::string::npos);
    }

    TEST_CASE("gen-data writes datasets, base checkpoint, and a manifest") {
        Sandbox box;
        const std::string cfg = quick_config(box);
        CHECK(run("gen-data --config " + cfg + " --workdir " + box.file("d")) == 0);
        for (const std::string name :
             {"task0.train.smrg", "task0.val.smrg", "task0.test.smrg", "task1.train.smrg",
              "pretrain.smrg", "base.smrg", "gen-data.run.json"}) {
            CHECK(fs::exists(box.dir / "d" / name));
        }
        const auto manifest = nlohmann::json::parse(slurp(box.file("d/gen-data.run.json")));
        CHECK(manifest.at("seed") == 11);

        // matches the library exactly
        TaskSuiteConfig suite_cfg;
        suite_cfg.tasks = 2;
        suite_cfg.classes_per_task = 3;
        suite_cfg.input_dim = 8;
        suite_cfg.train_per_task = 120;
        suite_cfg.val_per_task = 60;
        suite_cfg.test_per_task = 60;
        suite_cfg.seed = 11;
        suite_cfg.hidden_dims = {16};
        suite_cfg.pretrain_epochs = 2;
        suite_cfg.finetune_epochs = 20;
        const TaskSuite suite = gen_tasks(suite_cfg);
        const Dataset back = load_dataset(box.file("d/task0.train.smrg"));
        CHECK(back.inputs == suite.tasks[0].train.inputs);
        CHECK(back.labels == suite.tasks[0].train.labels);

        // --seed flag wins over the config seed
        CHECK(run("gen-data --config " + cfg + " --seed 99 --workdir " + box.file("d99")) == 0);
        const auto manifest99 = nlohmann::json::parse(slurp(box.file("d99/gen-data.run.json")));
        CHECK(manifest99.at("seed") == 99);
        const Dataset other = load_dataset(box.file("d99/task0.train.smrg"));
        CHECK(other.inputs != back.inputs);
    }

    TEST_CASE("full pipeline through the binary matches the library") {
        Sandbox box;
        const std::string cfg = quick_config(box);
        const std::string d = box.file("w");
        REQUIRE(run("gen-data --config " + cfg + " --workdir " + d) == 0);

        for (int k = 0; k < 2; ++k) {
            const std::string ks = std::to_string(k);
            REQUIRE(run("finetune --base " + d + "/base.smrg --train " + d + "/task" + ks +
                        ".train.smrg --epochs 20 --lr 0.001 --seed " + std::to_string(600 + k) +
                        " --task-id task" + ks + " --out task" + ks + ".ckpt.smrg --workdir " +
                        d) == 0);
        }
        REQUIRE(run("pseudo --ckpt " + d + "/task0.ckpt.smrg " + d + "/task1.ckpt.smrg --val " +
                    d + "/task0.val.smrg " + d + "/task1.val.smrg --fraction 0.2 --seed 700 "
                    "--out pseudo.smrg --workdir " + d) == 0);
        REQUIRE(run("train-sml --ckpt " + d + "/task0.ckpt.smrg " + d + "/task1.ckpt.smrg "
                    "--pseudo " + d + "/pseudo.smrg --config " + cfg +
                    " --seed 800 --mode layer_wise --out sml.smrg --heatmap coeffs.csv "
                    "--workdir " + d) == 0);
        REQUIRE(run("merge --method stats --ckpt " + d + "/task0.ckpt.smrg " + d +
                    "/task1.ckpt.smrg --coeffs " + d + "/coeffs.csv --out merged.smrg "
                    "--workdir " + d) == 0);

        // library-side replay of the same steps
        TaskSuiteConfig suite_cfg;
        suite_cfg.tasks = 2;
        suite_cfg.classes_per_task = 3;
        suite_cfg.input_dim = 8;
        suite_cfg.train_per_task = 120;
        suite_cfg.val_per_task = 60;
        suite_cfg.test_per_task = 60;
        suite_cfg.seed = 11;
        suite_cfg.hidden_dims = {16};
        suite_cfg.pretrain_epochs = 2;
        suite_cfg.finetune_epochs = 20;
        const TaskSuite suite = gen_tasks(suite_cfg);
        const ModelCheckpoint base = pretrain_base(suite_cfg, suite.pretrain);
        std::vector<ModelCheckpoint> tuned;
        std::vector<Matrix> vals;
        for (int k = 0; k < 2; ++k) {
            ModelCheckpoint m =
                fine_tune(base, suite.tasks[k].train, 20, 1e-3, 600 + k);
            m.meta.task_id = "task" + std::to_string(k);
            tuned.push_back(std::move(m));
            vals.push_back(suite.tasks[k].val.inputs);
        }
        const ModelCheckpoint cli_tuned0 = load_checkpoint(d + "/task0.ckpt.smrg");
        CHECK(cli_tuned0 == tuned[0]);

        const PseudoLabeledSet pseudo = generate_pseudo_labels(tuned, vals, 0.2, 700);
        const PseudoLabeledSet cli_pseudo = load_pseudoset(d + "/pseudo.smrg");
        CHECK(cli_pseudo.inputs == pseudo.inputs);
        CHECK(cli_pseudo.hard_label == pseudo.hard_label);

        SMLTrainConfig sml_cfg;
        sml_cfg.epochs = 20;
        sml_cfg.decay_every = 10;
        sml_cfg.hidden_dim = 16;
        sml_cfg.seed = 800;
        StatsConfig stats_cfg;
        const SMLTrainResult sml =
            train_sml(tuned, pseudo, sml_cfg, stats_cfg, MergeMode::layer_wise);
        const SMLParams cli_sml = load_sml(d + "/sml.smrg");
        CHECK(cli_sml.w1 == sml.params.w1);
        CHECK(cli_sml.b2 == sml.params.b2);

        const ModelCheckpoint merged = stats_merge(tuned, sml.coeffs);
        const ModelCheckpoint cli_merged = load_checkpoint(d + "/merged.smrg");
        CHECK(cli_merged == merged);

        const auto sidecar = nlohmann::json::parse(slurp(d + "/merged.smrg.json"));
        CHECK(sidecar.at("method") == "stats");
        CHECK(sidecar.at("output_fingerprint") ==
              std::to_string(param_fingerprint(merged)));
        CHECK(sidecar.at("inputs").size() == 2);

        // eval agrees with the library accuracy
        const std::string log = box.file("eval.log");
        REQUIRE(run("eval --ckpt " + d + "/merged.smrg --data " + d + "/task0.test.smrg",
                    log) == 0);
        const double lib_acc = evaluate(merged, suite.tasks[0].test);
        std::ostringstream want;
        want << "accuracy ";
        CHECK(slurp(log).find(want.str()) != std::string::npos);
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", lib_acc);
        CHECK(slurp(log).find(buf) != std::string::npos);
    }

    TEST_CASE("merge subcommand handles the simple baselines") {
        Sandbox box;
        const std::string cfg = quick_config(box);
        const std::string d = box.file("w");
        REQUIRE(run("gen-data --config " + cfg + " --workdir " + d) == 0);
        for (int k = 0; k < 2; ++k) {
            const std::string ks = std::to_string(k);
            REQUIRE(run("finetune --base " + d + "/base.smrg --train " + d + "/task" + ks +
                        ".train.smrg --epochs 10 --lr 0.001 --seed " + std::to_string(600 + k) +
                        " --out task" + ks + ".ckpt.smrg --workdir " + d) == 0);
        }
        const std::string pair = d + "/task0.ckpt.smrg " + d + "/task1.ckpt.smrg";
        CHECK(run("merge --method weight_avg --ckpt " + pair + " --out wa.smrg --workdir " +
                  d) == 0);
        CHECK(run("merge --method task_arithmetic --ckpt " + pair + " --base " + d +
                  "/base.smrg --lambda 0.4 --out ta.smrg --workdir " + d) == 0);
        CHECK(run("merge --method ties --ckpt " + pair + " --base " + d +
                  "/base.smrg --keep-fraction 0.3 --out ties.smrg --workdir " + d) == 0);
        // stats without coefficients is a parameter error -> exit 1
        CHECK(run("merge --method stats --ckpt " + pair + " --out bad.smrg --workdir " + d) ==
              1);
        // task_arithmetic without a base -> exit 1
        CHECK(run("merge --method task_arithmetic --ckpt " + pair +
                  " --out bad.smrg --workdir " + d) == 1);

        const ModelCheckpoint wa = load_checkpoint(d + "/wa.smrg");
        CHECK(wa.meta.role == "merged");
    }

    TEST_CASE("stats subcommand emits the frozen identity example") {
        Sandbox box;
        // a checkpoint whose first layer weight is the 3x3 identity
        ArchSpec arch;
        arch.layers = {LayerSpec{3, 3, Activation::identity}};
        ModelCheckpoint ckpt = init_checkpoint(arch, 1);
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 3; ++j) ckpt.weight(0)(i, j) = i == j ? 1.0 : 0.0;
        }
        save_checkpoint(ckpt, box.file("eye.smrg"));
        const std::string log = box.file("stats.log");
        REQUIRE(run("stats --ckpt " + box.file("eye.smrg"), log) == 0);
        const std::string out = slurp(log);
        CHECK(out.find("task_id,layer_name,mu,var,norm,sv1,sv2,sv3") != std::string::npos);
        CHECK(out.find("0.33333333333333331") != std::string::npos);
        CHECK(out.find("0.22222222222222") != std::string::npos);
        CHECK(out.find("1.7320508075688772") != std::string::npos);
    }

    TEST_CASE("experiment subcommand writes all four artifacts") {
        Sandbox box;
        const std::string cfg = quick_config(box);
        const std::string d = box.file("exp");
        REQUIRE(run("experiment --config " + cfg + " --workdir " + d) == 0);
        for (const std::string name :
             {"report.json", "report.txt", "report.timings.json", "coefficients.csv"}) {
            CHECK(fs::exists(fs::path(d) / name));
        }
        const auto doc = nlohmann::json::parse(slurp(d + "/report.json"));
        CHECK(doc.at("seed") == 11);
        CHECK(doc.at("rows").size() >= 4);
        const CoefficientTable coeffs = parse_heatmap(d + "/coefficients.csv");
        coeffs.validate();

        // rerunning under a new workdir yields byte-identical reports
        const std::string d2 = box.file("exp2");
        REQUIRE(run("experiment --config " + cfg + " --workdir " + d2) == 0);
        CHECK(slurp(d + "/report.json") == slurp(d2 + "/report.json"));
        CHECK(slurp(d + "/report.txt") == slurp(d2 + "/report.txt"));
        CHECK(slurp(d + "/coefficients.csv") == slurp(d2 + "/coefficients.csv"));
    }

    TEST_CASE("heatmap subcommand reproduces training coefficients") {
        Sandbox box;
        const std::string cfg = quick_config(box);
        const std::string d = box.file("w");
        REQUIRE(run("gen-data --config " + cfg + " --workdir " + d) == 0);
        for (int k = 0; k < 2; ++k) {
            const std::string ks = std::to_string(k);
            REQUIRE(run("finetune --base " + d + "/base.smrg --train " + d + "/task" + ks +
                        ".train.smrg --epochs 10 --lr 0.001 --seed " + std::to_string(600 + k) +
                        " --out task" + ks + ".ckpt.smrg --workdir " + d) == 0);
        }
        const std::string pair = d + "/task0.ckpt.smrg " + d + "/task1.ckpt.smrg";
        REQUIRE(run("pseudo --ckpt " + pair + " --val " + d + "/task0.val.smrg " + d +
                    "/task1.val.smrg --fraction 0.2 --seed 700 --out pseudo.smrg --workdir " +
                    d) == 0);
        REQUIRE(run("train-sml --ckpt " + pair + " --pseudo " + d + "/pseudo.smrg --config " +
                    cfg + " --seed 800 --mode layer_wise --out sml.smrg --heatmap train.csv "
                    "--workdir " + d) == 0);
        REQUIRE(run("heatmap --ckpt " + pair + " --sml " + d +
                    "/sml.smrg --mode layer_wise --out recomputed.csv --workdir " + d) == 0);
        const CoefficientTable a = parse_heatmap(d + "/train.csv");
        const CoefficientTable b = parse_heatmap(d + "/recomputed.csv");
        REQUIRE(a.values.size() == b.values.size());
        for (std::size_t k = 0; k < a.values.size(); ++k) {
            for (std::size_t l = 0; l < a.values[k].size(); ++l) {
                CHECK(b.values[k][l] == doctest::Approx(a.values[k][l]).epsilon(1e-12));
            }
        }
    }

    TEST_CASE("config rejection: unknown keys exit 1") {
        Sandbox box;
        const std::string path = box.file("bad.json");
        {
            std::ofstream f(path);
            f << R"({"suite": {"tasks": 2, "bogus_knob": 1}})";
        }
        const std::string log = box.file("err.log");
        CHECK(run("gen-data --config " + path + " --workdir " + box.file("d"), log) == 1);
        CHECK(slurp(log).find("bogus_knob") != std::string::npos);
        {
            std::ofstream f(path, std::ios::trunc);
            f << R"({"suite": {"tasks": "two"}})";
        }
        CHECK(run("gen-data --config " + path + " --workdir " + box.file("d"), log) == 1);
        CHECK(run("gen-data --config " + box.file("missing.json") + " --workdir " +
                  box.file("d")) == 1);
    }
}
