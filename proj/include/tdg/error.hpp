#pragma once

#include <stdexcept>
#include <string>

namespace tdg
{

enum class ErrorKind
{
    invalid_order,
    out_of_domain,
    singular_point,
    non_integrable_kernel,
    invalid_input,
    degenerate_ray,
    input_error,
    solver_failure,
    internal_error,
    config_error,
    undefined_index,
    adapt_abort,
};

const char *to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` distinguishes the failure.
class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string &what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string &what)
{
    if (!condition)
        throw Error(kind, what);
}

} // namespace tdg
