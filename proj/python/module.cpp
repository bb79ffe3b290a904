#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "statsmerge/container.hpp"
#include "statsmerge/distill.hpp"
#include "statsmerge/error.hpp"
#include "statsmerge/harness.hpp"
#include "statsmerge/learner.hpp"
#include "statsmerge/matrix.hpp"
#include "statsmerge/merge.hpp"
#include "statsmerge/stats.hpp"
#include "statsmerge/svd.hpp"

namespace py = pybind11;
using namespace statsmerge;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix mat_from(const DoubleArray& a) {
    if (a.ndim() != 2) throw ShapeError("expected a 2-D array");
    Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    std::copy(a.data(), a.data() + m.size(), m.values.begin());
    return m;
}

py::array_t<double> mat_to(const Matrix& m) {
    py::array_t<double> a({m.rows, m.cols});
    std::copy(m.values.begin(), m.values.end(), a.mutable_data());
    return a;
}

std::vector<std::uint32_t> labels_from(const py::object& obj) {
    return obj.cast<std::vector<std::uint32_t>>();
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
    mod.doc() = "model merging with learned per-layer coefficients";

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const IoError& e) {
            PyErr_SetString(PyExc_OSError, e.what());
        } catch (const Error& e) {
            const std::string msg = "[" + e.category() + "] " + e.what();
            PyErr_SetString(PyExc_ValueError, msg.c_str());
        }
    });

    py::enum_<MergeMode>(mod, "MergeMode")
        .value("task_wise", MergeMode::task_wise)
        .value("layer_wise", MergeMode::layer_wise);

    py::enum_<LabelMode>(mod, "LabelMode")
        .value("kd_hard", LabelMode::kd_hard)
        .value("kd_soft", LabelMode::kd_soft)
        .value("ground_truth", LabelMode::ground_truth);

    py::class_<ArchSpec>(mod, "ArchSpec")
        .def_static("mlp", &ArchSpec::mlp, py::arg("input_dim"), py::arg("hidden"),
                    py::arg("output_dim"))
        .def_property_readonly("input_dim", &ArchSpec::input_dim)
        .def_property_readonly("output_dim", &ArchSpec::output_dim)
        .def_property_readonly("layer_count", &ArchSpec::layer_count)
        .def("__eq__", [](const ArchSpec& a, const ArchSpec& b) { return a == b; });

    py::class_<ModelCheckpoint>(mod, "ModelCheckpoint")
        .def_readonly("arch", &ModelCheckpoint::arch)
        .def_property_readonly("role", [](const ModelCheckpoint& c) { return c.meta.role; })
        .def_property(
            "task_id", [](const ModelCheckpoint& c) { return c.meta.task_id; },
            [](ModelCheckpoint& c, const std::string& id) { c.meta.task_id = id; })
        .def_property_readonly(
            "base_fingerprint", [](const ModelCheckpoint& c) { return c.meta.base_fingerprint; })
        .def_property_readonly("layer_names",
                               [](const ModelCheckpoint& c) {
                                   std::vector<std::string> names;
                                   for (const auto& p : c.params) names.push_back(p.name);
                                   return names;
                               })
        .def("weight", [](const ModelCheckpoint& c, std::size_t l) { return mat_to(c.weight(l)); },
             py::arg("layer"))
        .def("bias", [](const ModelCheckpoint& c, std::size_t l) { return mat_to(c.bias(l)); },
             py::arg("layer"))
        .def("validate", &ModelCheckpoint::validate)
        .def("__eq__",
             [](const ModelCheckpoint& a, const ModelCheckpoint& b) { return a == b; });

    py::class_<Dataset>(mod, "Dataset")
        .def(py::init([](const DoubleArray& inputs, const py::object& labels,
                         std::size_t num_classes) {
                 Dataset ds;
                 ds.inputs = mat_from(inputs);
                 ds.labels = labels_from(labels);
                 ds.num_classes = num_classes;
                 ds.validate();
                 return ds;
             }),
             py::arg("inputs"), py::arg("labels"), py::arg("num_classes"))
        .def_property_readonly("inputs", [](const Dataset& d) { return mat_to(d.inputs); })
        .def_readonly("labels", &Dataset::labels)
        .def_readonly("num_classes", &Dataset::num_classes)
        .def_property_readonly("size", &Dataset::size);

    py::class_<WeightStats>(mod, "WeightStats")
        .def_readonly("mu", &WeightStats::mu)
        .def_readonly("var", &WeightStats::var)
        .def_readonly("norm", &WeightStats::norm)
        .def_readonly("singular", &WeightStats::singular);

    py::class_<StatsConfig>(mod, "StatsConfig")
        .def(py::init<>())
        .def_readwrite("rank", &StatsConfig::rank)
        .def_readwrite("normalize", &StatsConfig::normalize)
        .def_readwrite("svd_tol", &StatsConfig::svd_tol);

    py::class_<SMLTrainConfig>(mod, "SMLTrainConfig")
        .def(py::init<>())
        .def_readwrite("epochs", &SMLTrainConfig::epochs)
        .def_readwrite("base_lr", &SMLTrainConfig::base_lr)
        .def_readwrite("decay_every", &SMLTrainConfig::decay_every)
        .def_readwrite("decay_factor", &SMLTrainConfig::decay_factor)
        .def_readwrite("batch_size", &SMLTrainConfig::batch_size)
        .def_readwrite("hidden_dim", &SMLTrainConfig::hidden_dim)
        .def_readwrite("label_mode", &SMLTrainConfig::label_mode)
        .def_readwrite("seed", &SMLTrainConfig::seed)
        .def_readwrite("pseudo_fraction", &SMLTrainConfig::pseudo_fraction);

    py::class_<DistillConfig>(mod, "DistillConfig")
        .def(py::init<>())
        .def_readwrite("alpha", &DistillConfig::alpha)
        .def_readwrite("temperature", &DistillConfig::temperature)
        .def_readwrite("epochs", &DistillConfig::epochs)
        .def_readwrite("lr", &DistillConfig::lr)
        .def_readwrite("seed", &DistillConfig::seed);

    py::class_<TaskSuiteConfig>(mod, "TaskSuiteConfig")
        .def(py::init<>())
        .def_readwrite("tasks", &TaskSuiteConfig::tasks)
        .def_readwrite("classes_per_task", &TaskSuiteConfig::classes_per_task)
        .def_readwrite("input_dim", &TaskSuiteConfig::input_dim)
        .def_readwrite("train_per_task", &TaskSuiteConfig::train_per_task)
        .def_readwrite("val_per_task", &TaskSuiteConfig::val_per_task)
        .def_readwrite("test_per_task", &TaskSuiteConfig::test_per_task)
        .def_readwrite("cluster_separation", &TaskSuiteConfig::cluster_separation)
        .def_readwrite("seed", &TaskSuiteConfig::seed)
        .def_readwrite("hidden_dims", &TaskSuiteConfig::hidden_dims)
        .def_readwrite("pretrain_epochs", &TaskSuiteConfig::pretrain_epochs)
        .def_readwrite("finetune_epochs", &TaskSuiteConfig::finetune_epochs)
        .def_readwrite("finetune_lr", &TaskSuiteConfig::finetune_lr)
        .def_property_readonly("total_classes", &TaskSuiteConfig::total_classes)
        .def("arch", &TaskSuiteConfig::arch)
        .def("validate", &TaskSuiteConfig::validate);

    py::class_<CoefficientTable>(mod, "CoefficientTable")
        .def(py::init<>())
        .def_readwrite("mode", &CoefficientTable::mode)
        .def_readwrite("values", &CoefficientTable::values)
        .def_property_readonly("tasks", &CoefficientTable::tasks)
        .def_property_readonly("layers", &CoefficientTable::layers)
        .def("validate", &CoefficientTable::validate);

    py::class_<SMLParams>(mod, "SMLParams")
        .def_static("init", &SMLParams::init, py::arg("feature_dim"), py::arg("hidden"),
                    py::arg("seed"))
        .def_property_readonly("hidden_dim", &SMLParams::hidden_dim)
        .def_property_readonly("feature_dim", &SMLParams::feature_dim)
        .def_property_readonly("w1", [](const SMLParams& p) { return mat_to(p.w1); })
        .def_property_readonly("b1", [](const SMLParams& p) { return mat_to(p.b1); })
        .def_property_readonly("w2", [](const SMLParams& p) { return mat_to(p.w2); })
        .def_property_readonly("b2", [](const SMLParams& p) { return mat_to(p.b2); });

    py::class_<PseudoLabeledSet>(mod, "PseudoLabeledSet")
        .def_property_readonly("inputs", [](const PseudoLabeledSet& s) { return mat_to(s.inputs); })
        .def_readonly("hard_label", &PseudoLabeledSet::hard_label)
        .def_property_readonly("soft_label",
                               [](const PseudoLabeledSet& s) { return mat_to(s.soft_label); })
        .def_readonly("source_task", &PseudoLabeledSet::source_task)
        .def_readonly("num_classes", &PseudoLabeledSet::num_classes)
        .def_property_readonly("size", &PseudoLabeledSet::size)
        .def("validate", &PseudoLabeledSet::validate);

    py::class_<MergeRequest>(mod, "MergeRequest")
        .def(py::init<>())
        .def_readwrite("method", &MergeRequest::method)
        .def_readwrite("mode", &MergeRequest::mode)
        .def_readwrite("coefficients", &MergeRequest::coefficients)
        .def_readwrite("scaling", &MergeRequest::scaling)
        .def_readwrite("keep_fraction", &MergeRequest::keep_fraction)
        .def_readwrite("base", &MergeRequest::base)
        .def("validate", &MergeRequest::validate);

    py::class_<TaskData>(mod, "TaskData")
        .def_readonly("task_id", &TaskData::task_id)
        .def_readonly("train", &TaskData::train)
        .def_readonly("val", &TaskData::val)
        .def_readonly("test", &TaskData::test);

    py::class_<TaskSuite>(mod, "TaskSuite")
        .def_readonly("tasks", &TaskSuite::tasks)
        .def_readonly("pretrain", &TaskSuite::pretrain);

    py::class_<EpochLog>(mod, "EpochLog")
        .def_readonly("lr", &EpochLog::lr)
        .def_readonly("loss", &EpochLog::loss)
        .def_readonly("coeffs", &EpochLog::coeffs);

    py::class_<SMLTrainResult>(mod, "SMLTrainResult")
        .def_readonly("params", &SMLTrainResult::params)
        .def_readonly("coeffs", &SMLTrainResult::coeffs)
        .def_readonly("initial_loss", &SMLTrainResult::initial_loss)
        .def_readonly("trace", &SMLTrainResult::trace);

    py::class_<ReportRow>(mod, "ReportRow")
        .def_readonly("method", &ReportRow::method)
        .def_readonly("per_task", &ReportRow::per_task)
        .def_readonly("avg_acc", &ReportRow::avg_acc);

    py::class_<StageTiming>(mod, "StageTiming")
        .def_readonly("stage", &StageTiming::stage)
        .def_readonly("seconds", &StageTiming::seconds);

    py::class_<ExperimentReport>(mod, "ExperimentReport")
        .def_readonly("config", &ExperimentReport::config)
        .def_readonly("task_ids", &ExperimentReport::task_ids)
        .def_readonly("rows", &ExperimentReport::rows)
        .def_readonly("coefficients", &ExperimentReport::coefficients)
        .def_readonly("has_coefficients", &ExperimentReport::has_coefficients)
        .def_readonly("timings", &ExperimentReport::timings)
        .def_readonly("base_model", &ExperimentReport::base_model)
        .def_readonly("task_models", &ExperimentReport::task_models)
        .def_readonly("pseudo", &ExperimentReport::pseudo)
        .def_readonly("merged_models", &ExperimentReport::merged_models)
        .def("row", &ExperimentReport::row, py::arg("method"),
             py::return_value_policy::reference_internal)
        .def("to_json", [](const ExperimentReport& r) { return report_json(r); })
        .def("to_text", [](const ExperimentReport& r) { return report_text(r); })
        .def("timings_to_json", [](const ExperimentReport& r) { return timings_json(r); });

    py::class_<HeteroReport>(mod, "HeteroReport")
        .def_readonly("task_ids", &HeteroReport::task_ids)
        .def_readonly("teacher_acc", &HeteroReport::teacher_acc)
        .def_readonly("distilled_acc", &HeteroReport::distilled_acc)
        .def_readonly("stats_row", &HeteroReport::stats_row)
        .def_readonly("arithmetic_row", &HeteroReport::arithmetic_row)
        .def_readonly("students", &HeteroReport::students)
        .def_readonly("student_base", &HeteroReport::student_base)
        .def_readonly("coefficients", &HeteroReport::coefficients);

    mod.def(
        "svd_values",
        [](const DoubleArray& m, std::size_t r, double tol) {
            return svd_values(mat_from(m), r, tol);
        },
        py::arg("matrix"), py::arg("rank"), py::arg("tol") = kDefaultSvdTol);

    mod.def(
        "layer_stats",
        [](const DoubleArray& w, const StatsConfig& cfg) { return layer_stats(mat_from(w), cfg); },
        py::arg("weight"), py::arg("config") = StatsConfig{});
    mod.def("task_stats", &task_stats, py::arg("checkpoint"), py::arg("config") = StatsConfig{});
    mod.def("layer_stats_table", &layer_stats_table, py::arg("checkpoints"),
            py::arg("config") = StatsConfig{});
    mod.def("task_stats_table", &task_stats_table, py::arg("checkpoints"),
            py::arg("config") = StatsConfig{});
    mod.def("feature_vector", &feature_vector, py::arg("stats_table"),
            py::arg("config") = StatsConfig{});

    mod.def("init_checkpoint", &init_checkpoint, py::arg("arch"), py::arg("seed"));
    mod.def("param_fingerprint", &param_fingerprint, py::arg("checkpoint"));
    mod.def("merge_compatible", &merge_compatible, py::arg("a"), py::arg("b"));
    mod.def(
        "forward_logits",
        [](const ModelCheckpoint& c, const DoubleArray& batch) {
            return mat_to(forward_logits(c, mat_from(batch)));
        },
        py::arg("checkpoint"), py::arg("batch"));
    mod.def("train_supervised", &train_supervised, py::arg("start"), py::arg("train"),
            py::arg("epochs"), py::arg("lr"), py::arg("seed"));
    mod.def("fine_tune", &fine_tune, py::arg("base"), py::arg("train"), py::arg("epochs"),
            py::arg("lr"), py::arg("seed"));

    mod.def("sml_forward", &sml_forward, py::arg("params"), py::arg("feature"));
    mod.def("normalize_scores", &normalize_scores, py::arg("raw_scores"), py::arg("mode"));
    mod.def("uniform_table", &uniform_table, py::arg("tasks"), py::arg("layers"), py::arg("mode"));
    mod.def("train_sml", &train_sml, py::arg("task_checkpoints"), py::arg("pseudo_set"),
            py::arg("config"), py::arg("stats_config"), py::arg("mode"));

    mod.def("stats_merge", &stats_merge, py::arg("task_checkpoints"), py::arg("coefficients"));
    mod.def("stats_merge_delta", &stats_merge_delta, py::arg("base"), py::arg("task_checkpoints"),
            py::arg("coefficients"));
    mod.def("weight_average", &weight_average, py::arg("task_checkpoints"));
    mod.def("task_arithmetic", &task_arithmetic, py::arg("base"), py::arg("task_checkpoints"),
            py::arg("scaling"));
    mod.def("ties_merge", &ties_merge, py::arg("base"), py::arg("task_checkpoints"),
            py::arg("scaling"), py::arg("keep_fraction"));
    mod.def("run_merge", &run_merge, py::arg("request"), py::arg("task_checkpoints"));

    mod.def(
        "generate_pseudo_labels",
        [](const std::vector<ModelCheckpoint>& teachers, const std::vector<DoubleArray>& inputs,
           double fraction, std::uint64_t seed) {
            std::vector<Matrix> mats;
            mats.reserve(inputs.size());
            for (const auto& a : inputs) mats.push_back(mat_from(a));
            return generate_pseudo_labels(teachers, mats, fraction, seed);
        },
        py::arg("teachers"), py::arg("val_inputs"), py::arg("fraction"), py::arg("seed"));
    mod.def("pseudo_sample_rows", &pseudo_sample_rows, py::arg("sizes"), py::arg("fraction"),
            py::arg("seed"));
    mod.def("ce_loss", &ce_loss, py::arg("pred"), py::arg("target_class"));
    mod.def("kl_loss", &kl_loss, py::arg("teacher"), py::arg("student"));
    mod.def("hetero_distill", &hetero_distill, py::arg("teacher"), py::arg("student_init"),
            py::arg("train"), py::arg("config"));

    mod.def("gen_tasks", &gen_tasks, py::arg("config"));
    mod.def("pretrain_base", &pretrain_base, py::arg("config"), py::arg("pretrain"));
    mod.def("evaluate", &evaluate, py::arg("checkpoint"), py::arg("test"));
    mod.def("corrupt_gaussian", &corrupt_gaussian, py::arg("dataset"), py::arg("sigma"),
            py::arg("seed"));
    mod.def("ground_truth_set", &ground_truth_set, py::arg("tasks"), py::arg("fraction"),
            py::arg("seed"));
    mod.def("run_experiment", &run_experiment, py::arg("suite"), py::arg("methods"),
            py::arg("sml_config"), py::arg("stats_config"));
    mod.def("run_hetero_experiment", &run_hetero_experiment, py::arg("suite"),
            py::arg("teacher_hidden"), py::arg("student_hidden"), py::arg("distill_config"),
            py::arg("sml_config"), py::arg("stats_config"));
    mod.def("export_heatmap", &export_heatmap, py::arg("coefficients"), py::arg("path"));
    mod.def("parse_heatmap", &parse_heatmap, py::arg("path"));

    mod.def("save_checkpoint", &save_checkpoint, py::arg("checkpoint"), py::arg("path"));
    mod.def("load_checkpoint", &load_checkpoint, py::arg("path"));
    mod.def("save_dataset", &save_dataset, py::arg("dataset"), py::arg("path"));
    mod.def("load_dataset", &load_dataset, py::arg("path"));
    mod.def("save_sml", &save_sml, py::arg("params"), py::arg("path"));
    mod.def("load_sml", &load_sml, py::arg("path"));
    mod.def("save_pseudoset", &save_pseudoset, py::arg("pseudo_set"), py::arg("path"));
    mod.def("load_pseudoset", &load_pseudoset, py::arg("path"));
}
