#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nrpp {

enum class ErrorKind {
    domain,        // argument outside the admissible set
    capability,    // operation not supported by the model / regime
    singularity,   // zero intensity where a logarithm or division is needed
    configuration, // malformed model, scenario or sampler setup
    estimation,    // estimator could not produce a value
    precondition,  // structural precondition violated (e.g. non-coincident roots)
    numerical,     // factorization / convergence failure
    degenerate     // zero curvature or zero integrand where positivity is required
};

[[nodiscard]] std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

} // namespace nrpp
