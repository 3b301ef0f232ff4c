#pragma once

#include <stdexcept>
#include <string>

namespace strata {

// Error categories. Kept in sync with the STRATA_E_* codes in the public
// C header (strata.h).
enum class ErrorCode : int {
    ok = 0,
    schema = 1,
    parse = 2,
    empty_input = 3,
    dimension = 4,
    domain = 5,
    ties = 6,
    degenerate = 7,
    singular = 8,
    too_large = 9,
    coupling_undefined = 10,
    io = 11,
    usage = 12,
    internal = 13,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

const char* error_code_name(ErrorCode code) noexcept;

}  // namespace strata
