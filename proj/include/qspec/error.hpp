#ifndef QSPEC_ERROR_HPP
#define QSPEC_ERROR_HPP

#include <stdexcept>
#include <string>
#include <utility>

namespace qspec
{
enum class Errc
{
    InvalidModel,
    InvalidPulse,
    InvalidParameter,
    PoleProximity,
    WindowTooSmall,
    ZeroField,
    GridTooCoarse,
    NoRootCertified,
    WindowInsufficient,
    OptimizerFailure,
    Config,
};

const char *to_string(Errc code);

// Single exception type for the library. `what_violated` names the invariant or
// precondition that failed so front ends can report it verbatim.
class Error : public std::runtime_error
{
public:
    Error(Errc code, std::string what_violated, const std::string &message)
        : std::runtime_error(message), code_(code), violated_(std::move(what_violated))
    {
    }

    Errc code() const noexcept { return code_; }
    const std::string &violated() const noexcept { return violated_; }

    // True for failures of the numerical certification machinery (as opposed to bad input).
    bool is_certification_failure() const noexcept
    {
        return code_ == Errc::NoRootCertified || code_ == Errc::WindowInsufficient ||
               code_ == Errc::OptimizerFailure;
    }

private:
    Errc code_;
    std::string violated_;
};

} // namespace qspec

#endif // QSPEC_ERROR_HPP
