#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace rpslab {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Syntax/validation failure while reading a spec file or expression.
/// line/column are 1-based; column 0 means "whole line".
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line, int column)
        : Error(format(what, line, column)), line_(line), column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    static std::string format(const std::string& what, int line, int column) {
        std::string s = "parse error";
        if (line > 0) s += " at line " + std::to_string(line);
        if (column > 0) s += ", column " + std::to_string(column);
        return s + ": " + what;
    }
    int line_;
    int column_;
};

/// Runs fn(i) for i in [0, n), spread over worker threads.
/// Thread count: RPSLAB_THREADS if set, else hardware concurrency.
/// fn must only write to per-index state; results are then independent
/// of the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

int worker_count();

/// Shortest of %.17g that round-trips; used for all CSV payloads.
std::string format_double(double x);

}  // namespace rpslab
