#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace eigenop {

class ConfigurationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what, std::vector<double> diagnostics = {})
        : std::runtime_error(what), diagnostics_(std::move(diagnostics)) {}

    // Partial per-item residuals or other values available at failure time.
    const std::vector<double>& diagnostics() const noexcept { return diagnostics_; }

private:
    std::vector<double> diagnostics_;
};

class IntegrationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace eigenop
