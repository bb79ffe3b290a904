#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace statsmerge {

// Domain error with a stable category string. The CLI maps any Error to
// exit code 1 and prints the category; everything else is a usage error.
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& what)
        : std::runtime_error(what), category_(std::move(category)) {}

    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

struct ShapeError : Error {
    explicit ShapeError(const std::string& what) : Error("shape", what) {}
};

struct ParamError : Error {
    explicit ParamError(const std::string& what) : Error("parameter", what) {}
};

struct CompatError : Error {
    explicit CompatError(const std::string& what) : Error("compatibility", what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what) : Error("io", what) {}
};

// Container parse failure; carries the byte offset where the file went bad.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t offset)
        : Error("format", what + " (byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

} // namespace statsmerge
