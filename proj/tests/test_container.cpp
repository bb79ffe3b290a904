#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "statsmerge/checkpoint.hpp"
#include "statsmerge/container.hpp"
#include "statsmerge/distill.hpp"
#include "statsmerge/error.hpp"
#include "statsmerge/learner.hpp"
#include "statsmerge/rng.hpp"

using namespace statsmerge;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("smrg-test-" + std::to_string(Rng(std::random_device{}()).next_u64()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::vector<std::uint8_t> slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void spit(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

std::size_t offset_of(const FormatError& e) { return e.offset(); }

}  // namespace

TEST_SUITE("container") {
    TEST_CASE("checkpoint round trip is bit exact") {
        TempDir dir;
        const ArchSpec arch = ArchSpec::mlp(5, {7, 3}, 4);
        ModelCheckpoint ckpt = init_checkpoint(arch, 77);
        ckpt.meta.role = "task";
        ckpt.meta.task_id = "task2";
        const std::string path = dir.file("a.smrg");
        save_checkpoint(ckpt, path);
        const ModelCheckpoint back = load_checkpoint(path);
        CHECK(back == ckpt);
        CHECK(param_fingerprint(back) == param_fingerprint(ckpt));
    }

    TEST_CASE("dataset round trip") {
        TempDir dir;
        Rng rng(3);
        Dataset ds;
        ds.inputs = Matrix(9, 4);
        for (auto& v : ds.inputs.values) v = rng.normal();
        ds.num_classes = 5;
        for (std::size_t i = 0; i < 9; ++i) {
            ds.labels.push_back(static_cast<std::uint32_t>(rng.index(5)));
        }
        const std::string path = dir.file("d.smrg");
        save_dataset(ds, path);
        const Dataset back = load_dataset(path);
        CHECK(back.inputs == ds.inputs);
        CHECK(back.labels == ds.labels);
        CHECK(back.num_classes == 5);
    }

    TEST_CASE("sml round trip") {
        TempDir dir;
        const SMLParams params = SMLParams::init(6, 16, 5);
        const std::string path = dir.file("s.smrg");
        save_sml(params, path);
        const SMLParams back = load_sml(path);
        CHECK(back.w1 == params.w1);
        CHECK(back.b1 == params.b1);
        CHECK(back.w2 == params.w2);
        CHECK(back.b2 == params.b2);
    }

    TEST_CASE("pseudo set round trip") {
        TempDir dir;
        Rng rng(4);
        PseudoLabeledSet set;
        set.inputs = Matrix(6, 3);
        for (auto& v : set.inputs.values) v = rng.normal();
        set.num_classes = 3;
        for (std::size_t i = 0; i < 6; ++i) {
            const auto c = static_cast<std::uint32_t>(rng.index(3));
            set.hard_label.push_back(c);
            set.source_task.push_back(static_cast<std::uint32_t>(rng.index(2)));
            for (std::size_t j = 0; j < 3; ++j) {
                set.soft_label.values.push_back(j == c ? 0.8 : 0.1);
            }
        }
        set.soft_label.rows = 6;
        set.soft_label.cols = 3;
        const std::string path = dir.file("p.smrg");
        save_pseudoset(set, path);
        const PseudoLabeledSet back = load_pseudoset(path);
        CHECK(back.inputs == set.inputs);
        CHECK(back.hard_label == set.hard_label);
        CHECK(back.source_task == set.source_task);
        CHECK(back.soft_label == set.soft_label);
    }

    TEST_CASE("wrong magic reports byte offset zero") {
        TempDir dir;
        const std::string path = dir.file("x.smrg");
        save_sml(SMLParams::init(3, 4, 1), path);
        auto bytes = slurp(path);
        bytes[0] = 'X';
        spit(path, bytes);
        try {
            load_sml(path);
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(offset_of(e) == 0);
            CHECK(std::string(e.what()).find("offset 0") != std::string::npos);
        }
    }

    TEST_CASE("unsupported version reports offset four") {
        TempDir dir;
        const std::string path = dir.file("x.smrg");
        save_sml(SMLParams::init(3, 4, 1), path);
        auto bytes = slurp(path);
        bytes[4] = 0xEE;
        spit(path, bytes);
        try {
            load_sml(path);
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(offset_of(e) == 4);
        }
    }

    TEST_CASE("header truncation reports offset eight") {
        TempDir dir;
        const std::string path = dir.file("x.smrg");
        save_sml(SMLParams::init(3, 4, 1), path);
        auto bytes = slurp(path);
        bytes.resize(10);
        spit(path, bytes);
        CHECK_THROWS_AS(load_sml(path), FormatError);
        try {
            load_sml(path);
        } catch (const FormatError& e) {
            CHECK(offset_of(e) == 8);
        }
    }

    TEST_CASE("mangled header JSON reports offset twelve") {
        TempDir dir;
        const std::string path = dir.file("x.smrg");
        save_sml(SMLParams::init(3, 4, 1), path);
        auto bytes = slurp(path);
        bytes[12] = '!';
        spit(path, bytes);
        try {
            load_sml(path);
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(offset_of(e) == 12);
        }
    }

    TEST_CASE("kind mismatch is a format error") {
        TempDir dir;
        const std::string path = dir.file("x.smrg");
        save_sml(SMLParams::init(3, 4, 1), path);
        CHECK_THROWS_AS(load_checkpoint(path), FormatError);
    }

    TEST_CASE("payload truncation reports the payload offset") {
        TempDir dir;
        const std::string path = dir.file("x.smrg");
        const ModelCheckpoint ckpt = init_checkpoint(ArchSpec::mlp(3, {4}, 2), 9);
        save_checkpoint(ckpt, path);
        auto bytes = slurp(path);
        const std::size_t full = bytes.size();
        bytes.resize(full - 8);
        spit(path, bytes);
        try {
            load_checkpoint(path);
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(offset_of(e) >= 12);
            CHECK(offset_of(e) < full);
        }
    }

    TEST_CASE("missing file is an io error") {
        CHECK_THROWS_AS(load_checkpoint("/nonexistent/nowhere.smrg"), IoError);
    }
}
