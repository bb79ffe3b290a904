#include "statsmerge/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "statsmerge/error.hpp"
#include "json.hpp"

namespace statsmerge {

namespace {

using json = nlohmann::ordered_json;

constexpr char kMagic[4] = {'S', 'M', 'R', 'G'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_f64(std::vector<unsigned char>& out, double d) {
    const auto v = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_matrix(std::vector<unsigned char>& out, const Matrix& m) {
    for (double d : m.values) put_f64(out, d);
}

void put_u32_seq(std::vector<unsigned char>& out, const std::vector<std::uint32_t>& seq) {
    for (std::uint32_t v : seq) put_u32(out, v);
}

void write_container(const json& header, const std::vector<unsigned char>& payload,
                     const std::string& path) {
    const std::string header_text = header.dump();
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    std::vector<unsigned char> bytes;
    bytes.reserve(12 + header_text.size() + payload.size());
    bytes.insert(bytes.end(), kMagic, kMagic + 4);
    put_u32(bytes, kVersion);
    put_u32(bytes, static_cast<std::uint32_t>(header_text.size()));
    bytes.insert(bytes.end(), header_text.begin(), header_text.end());
    bytes.insert(bytes.end(), payload.begin(), payload.end());
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("short write to '" + path + "'");
}

struct Loaded {
    json header;
    std::vector<unsigned char> payload;
    std::size_t payload_offset = 0;
};

std::uint32_t get_u32(const std::vector<unsigned char>& b, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[at + i]) << (8 * i);
    return v;
}

Loaded read_container(const std::string& path, const std::string& expect_kind) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for reading");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                     std::istreambuf_iterator<char>());

    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw FormatError("bad magic, expected \"SMRG\"", 0);
    }
    if (bytes.size() < 8) throw FormatError("truncated version field", 4);
    const std::uint32_t version = get_u32(bytes, 4);
    if (version != kVersion) {
        throw FormatError("unsupported version " + std::to_string(version), 4);
    }
    if (bytes.size() < 12) throw FormatError("truncated header length field", 8);
    const std::uint32_t header_len = get_u32(bytes, 8);
    if (12 + static_cast<std::size_t>(header_len) > bytes.size()) {
        throw FormatError("header length " + std::to_string(header_len) +
                              " runs past end of file",
                          8);
    }

    Loaded loaded;
    loaded.payload_offset = 12 + header_len;
    try {
        loaded.header = json::parse(bytes.begin() + 12, bytes.begin() + 12 + header_len);
    } catch (const json::exception& e) {
        throw FormatError(std::string("unparsable header: ") + e.what(), 12);
    }
    if (!loaded.header.is_object() || !loaded.header.contains("kind") ||
        !loaded.header["kind"].is_string()) {
        throw FormatError("header lacks a string \"kind\" field", 12);
    }
    if (loaded.header["kind"] != expect_kind) {
        throw FormatError("header kind \"" + loaded.header["kind"].get<std::string>() +
                              "\", expected \"" + expect_kind + "\"",
                          12);
    }
    loaded.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(loaded.payload_offset),
                          bytes.end());
    return loaded;
}

void require_payload_size(const Loaded& loaded, std::size_t expected) {
    if (loaded.payload.size() != expected) {
        throw FormatError("payload has " + std::to_string(loaded.payload.size()) +
                              " bytes, header declares " + std::to_string(expected),
                          loaded.payload_offset);
    }
}

class PayloadReader {
public:
    explicit PayloadReader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

    double next_f64() {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[at_ + i]) << (8 * i);
        at_ += 8;
        return std::bit_cast<double>(v);
    }

    std::uint32_t next_u32() {
        const std::uint32_t v = get_u32(bytes_, at_);
        at_ += 4;
        return v;
    }

    Matrix next_matrix(std::size_t rows, std::size_t cols) {
        Matrix m(rows, cols);
        for (double& v : m.values) v = next_f64();
        return m;
    }

private:
    const std::vector<unsigned char>& bytes_;
    std::size_t at_ = 0;
};

json shape_entry(const std::string& name, const Matrix& m) {
    return json{{"name", name}, {"rows", m.rows}, {"cols", m.cols}};
}

std::uint64_t parse_fingerprint(const json& meta, std::size_t offset) {
    try {
        return std::stoull(meta.at("base_fingerprint").get<std::string>());
    } catch (const std::exception&) {
        throw FormatError("bad base_fingerprint in header", offset);
    }
}

const char* activation_name(Activation a) {
    return a == Activation::relu ? "relu" : "identity";
}

Activation activation_from(const std::string& s, std::size_t offset) {
    if (s == "relu") return Activation::relu;
    if (s == "identity") return Activation::identity;
    throw FormatError("unknown activation \"" + s + "\"", offset);
}

}  // namespace

void save_checkpoint(const ModelCheckpoint& ckpt, const std::string& path) {
    ckpt.validate();
    json arch = json::array();
    for (const auto& layer : ckpt.arch.layers) {
        arch.push_back({{"in", layer.in_dim},
                        {"out", layer.out_dim},
                        {"act", activation_name(layer.activation)}});
    }
    json params = json::array();
    for (const auto& p : ckpt.params) params.push_back(shape_entry(p.name, p.tensor));
    const json header = {{"kind", "checkpoint"},
                         {"arch", arch},
                         {"params", params},
                         {"meta",
                          {{"role", ckpt.meta.role},
                           {"task_id", ckpt.meta.task_id},
                           {"base_fingerprint", std::to_string(ckpt.meta.base_fingerprint)}}}};
    std::vector<unsigned char> payload;
    for (const auto& p : ckpt.params) put_matrix(payload, p.tensor);
    write_container(header, payload, path);
}

ModelCheckpoint load_checkpoint(const std::string& path) {
    const Loaded loaded = read_container(path, "checkpoint");
    ModelCheckpoint ckpt;
    try {
        for (const auto& layer : loaded.header.at("arch")) {
            ckpt.arch.layers.push_back(
                {layer.at("in").get<std::size_t>(), layer.at("out").get<std::size_t>(),
                 activation_from(layer.at("act").get<std::string>(), 12)});
        }
        const auto& meta = loaded.header.at("meta");
        ckpt.meta.role = meta.at("role").get<std::string>();
        ckpt.meta.task_id = meta.at("task_id").get<std::string>();
        ckpt.meta.base_fingerprint = parse_fingerprint(meta, 12);

        std::size_t expected = 0;
        std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> shapes;
        for (const auto& p : loaded.header.at("params")) {
            shapes.emplace_back(p.at("name").get<std::string>(),
                                std::make_pair(p.at("rows").get<std::size_t>(),
                                               p.at("cols").get<std::size_t>()));
            expected += shapes.back().second.first * shapes.back().second.second * 8;
        }
        require_payload_size(loaded, expected);
        PayloadReader reader(loaded.payload);
        for (const auto& [name, shape] : shapes) {
            ckpt.params.push_back({name, reader.next_matrix(shape.first, shape.second)});
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed checkpoint header: ") + e.what(), 12);
    }
    ckpt.validate();
    return ckpt;
}

void save_dataset(const Dataset& ds, const std::string& path) {
    ds.validate();
    const json header = {{"kind", "dataset"},
                         {"inputs", {{"rows", ds.inputs.rows}, {"cols", ds.inputs.cols}}},
                         {"num_classes", ds.num_classes}};
    std::vector<unsigned char> payload;
    put_matrix(payload, ds.inputs);
    put_u32_seq(payload, ds.labels);
    write_container(header, payload, path);
}

Dataset load_dataset(const std::string& path) {
    const Loaded loaded = read_container(path, "dataset");
    Dataset ds;
    try {
        const auto& shape = loaded.header.at("inputs");
        const auto rows = shape.at("rows").get<std::size_t>();
        const auto cols = shape.at("cols").get<std::size_t>();
        ds.num_classes = loaded.header.at("num_classes").get<std::size_t>();
        require_payload_size(loaded, rows * cols * 8 + rows * 4);
        PayloadReader reader(loaded.payload);
        ds.inputs = reader.next_matrix(rows, cols);
        ds.labels.resize(rows);
        for (auto& label : ds.labels) label = reader.next_u32();
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed dataset header: ") + e.what(), 12);
    }
    ds.validate();
    return ds;
}

void save_sml(const SMLParams& params, const std::string& path) {
    params.validate();
    json shapes = json::array();
    shapes.push_back(shape_entry("w1", params.w1));
    shapes.push_back(shape_entry("b1", params.b1));
    shapes.push_back(shape_entry("w2", params.w2));
    shapes.push_back(shape_entry("b2", params.b2));
    const json header = {{"kind", "sml"}, {"params", shapes}};
    std::vector<unsigned char> payload;
    for (const Matrix* m : {&params.w1, &params.b1, &params.w2, &params.b2}) {
        put_matrix(payload, *m);
    }
    write_container(header, payload, path);
}

SMLParams load_sml(const std::string& path) {
    const Loaded loaded = read_container(path, "sml");
    SMLParams params;
    try {
        const auto& shapes = loaded.header.at("params");
        if (!shapes.is_array() || shapes.size() != 4) {
            throw FormatError("sml header must declare exactly 4 tensors", 12);
        }
        std::size_t expected = 0;
        for (const auto& p : shapes) {
            expected += p.at("rows").get<std::size_t>() * p.at("cols").get<std::size_t>() * 8;
        }
        require_payload_size(loaded, expected);
        PayloadReader reader(loaded.payload);
        Matrix* slots[4] = {&params.w1, &params.b1, &params.w2, &params.b2};
        const char* names[4] = {"w1", "b1", "w2", "b2"};
        for (std::size_t i = 0; i < 4; ++i) {
            const auto& p = shapes[i];
            if (p.at("name").get<std::string>() != names[i]) {
                throw FormatError("sml tensor " + std::to_string(i) + " must be \"" +
                                      names[i] + "\"",
                                  12);
            }
            *slots[i] =
                reader.next_matrix(p.at("rows").get<std::size_t>(), p.at("cols").get<std::size_t>());
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed sml header: ") + e.what(), 12);
    }
    params.validate();
    return params;
}

void save_pseudoset(const PseudoLabeledSet& ps, const std::string& path) {
    ps.validate();
    const json header = {{"kind", "pseudoset"},
                         {"inputs", {{"rows", ps.inputs.rows}, {"cols", ps.inputs.cols}}},
                         {"num_classes", ps.num_classes}};
    std::vector<unsigned char> payload;
    put_matrix(payload, ps.inputs);
    put_u32_seq(payload, ps.hard_label);
    put_u32_seq(payload, ps.source_task);
    put_matrix(payload, ps.soft_label);
    write_container(header, payload, path);
}

PseudoLabeledSet load_pseudoset(const std::string& path) {
    const Loaded loaded = read_container(path, "pseudoset");
    PseudoLabeledSet ps;
    try {
        const auto& shape = loaded.header.at("inputs");
        const auto rows = shape.at("rows").get<std::size_t>();
        const auto cols = shape.at("cols").get<std::size_t>();
        ps.num_classes = loaded.header.at("num_classes").get<std::size_t>();
        require_payload_size(loaded,
                             rows * cols * 8 + rows * 4 * 2 + rows * ps.num_classes * 8);
        PayloadReader reader(loaded.payload);
        ps.inputs = reader.next_matrix(rows, cols);
        ps.hard_label.resize(rows);
        for (auto& v : ps.hard_label) v = reader.next_u32();
        ps.source_task.resize(rows);
        for (auto& v : ps.source_task) v = reader.next_u32();
        ps.soft_label = reader.next_matrix(rows, ps.num_classes);
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed pseudoset header: ") + e.what(), 12);
    }
    ps.validate();
    return ps;
}

}  // namespace statsmerge
