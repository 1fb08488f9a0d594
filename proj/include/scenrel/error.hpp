#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace scenrel {

enum class ErrorCode : std::uint8_t {
    Parse,                  // malformed input file
    Domain,                 // argument outside its mathematical domain
    InsufficientData,       // e.g. t = 0 where an estimate needs t >= 1
    Precondition,           // operation called outside its stated regime
    UndefinedConditional,   // conditioning on a zero-mass subdomain
    NumericalDegeneracy,    // quadrature mass underflow, all-zero IS weights
    Transition,             // illegal workflow transition
    Config,                 // bad run configuration
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

#define SCENREL_REQUIRE(cond, code, msg)                  \
    do {                                                  \
        if (!(cond)) throw ::scenrel::Error((code), (msg)); \
    } while (0)

}  // namespace scenrel
