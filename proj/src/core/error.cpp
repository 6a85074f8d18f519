#include "error.hpp"

namespace tpot {

const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::Contract: return "contract";
    case ErrorKind::SplitInfeasible: return "split-infeasible";
    case ErrorKind::IncompatibleCombine: return "incompatible-combine";
    case ErrorKind::NoGuess: return "no-guess";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::DegenerateOutput: return "degenerate-output";
    case ErrorKind::Training: return "training";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Io: return "io";
    case ErrorKind::GenerationFailed: return "generation-failed";
    case ErrorKind::UndefinedHeritability: return "undefined-heritability";
    case ErrorKind::BudgetExceeded: return "budget-exceeded";
    case ErrorKind::Usage: return "usage";
    }
    return "unknown";
}

} // namespace tpot
