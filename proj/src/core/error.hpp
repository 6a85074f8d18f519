#pragma once

#include <stdexcept>
#include <string>

namespace tpot {

enum class ErrorKind {
    Contract,
    SplitInfeasible,
    IncompatibleCombine,
    NoGuess,
    Shape,
    DegenerateOutput,
    Training,
    Parse,
    Schema,
    Io,
    GenerationFailed,
    UndefinedHeritability,
    BudgetExceeded,
    Usage,
};

const char* to_string(ErrorKind kind) noexcept;

// All failures raised by the core carry a kind so the C boundary can map
// them onto status codes without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what)
{
    if (!cond) {
        fail(kind, what);
    }
}

} // namespace tpot
