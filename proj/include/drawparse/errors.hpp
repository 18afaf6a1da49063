#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace drawparse {

// Invalid value handed to a type constructor (degenerate box, bad enum, ...).
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Annotation grammar rejection. `offset` is the code-point index into the
// input where the problem was detected; `detail` is the message without the
// offset suffix.
struct ParseError : std::runtime_error {
    std::size_t offset;
    std::string detail;
    ParseError(std::size_t off, const std::string& msg)
        : std::runtime_error(msg + " (offset " + std::to_string(off) + ")"),
          offset(off),
          detail(msg) {}
};

// File or stream problem; message names the path when known.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed label line; message carries the 1-based line number.
struct LabelError : std::runtime_error {
    int line;
    LabelError(int line_no, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
};

// Structural violation of a document schema. One entry per offending field.
struct Violation {
    std::string path;     // e.g. "views[0].annotations[2].confidence"
    std::string rule;     // short rule name, e.g. "confidence_range"
    std::string message;  // human-readable detail

    bool operator==(const Violation&) const = default;
};

struct SchemaError : std::runtime_error {
    std::vector<Violation> violations;
    explicit SchemaError(std::vector<Violation> v)
        : std::runtime_error(format(v)), violations(std::move(v)) {}

  private:
    static std::string format(const std::vector<Violation>& v) {
        std::string s = "schema violation";
        if (v.size() != 1) s += "s (" + std::to_string(v.size()) + ")";
        for (const auto& x : v) s += "\n  " + x.path + ": " + x.message + " [" + x.rule + "]";
        return s;
    }
};

// Malformed JSON input; `byte` is the offset reported by the JSON parser.
struct JsonError : std::runtime_error {
    std::size_t byte;
    JsonError(std::size_t b, const std::string& msg)
        : std::runtime_error("malformed JSON at byte " + std::to_string(b) + ": " + msg), byte(b) {}
};

// Failure reported by an inference backend behind one of the pipeline ports.
struct BackendError : std::runtime_error {
    explicit BackendError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace drawparse
