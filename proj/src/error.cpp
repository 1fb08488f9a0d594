#include "scenrel/error.hpp"

namespace scenrel {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::Parse: return "parse";
        case ErrorCode::Domain: return "domain";
        case ErrorCode::InsufficientData: return "insufficient-data";
        case ErrorCode::Precondition: return "precondition";
        case ErrorCode::UndefinedConditional: return "undefined-conditional";
        case ErrorCode::NumericalDegeneracy: return "numerical-degeneracy";
        case ErrorCode::Transition: return "transition";
        case ErrorCode::Config: return "config";
    }
    return "unknown";
}

}  // namespace scenrel
