#pragma once

#include <stdexcept>
#include <string>

namespace dmtz {

// Error categories; the CLI maps them onto its exit-code table.
enum class Errc {
    invalid_argument,
    io,
    format,
    bound_violation,
    internal,
};

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace dmtz
