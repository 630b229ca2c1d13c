#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace smt {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input document. `line` is 1-based, 0 when unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line)
        : Error("line " + std::to_string(line) + ": " + msg), line(line) {}
    int line;
};

/// Token stream that violates a sequence grammar. `index` is the offending token position.
class GrammarError : public Error {
public:
    GrammarError(const std::string& msg, std::size_t index)
        : Error("token " + std::to_string(index) + ": " + msg), index(index) {}
    std::size_t index;
};

class UnsupportedFeature : public Error {
public:
    using Error::Error;
};

} // namespace smt
