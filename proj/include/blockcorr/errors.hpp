#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace blockcorr {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Iterative solve that did not reach its tolerance.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class UnsupportedConfiguration : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Pearson coefficient requested for an interference process with zero variance.
class UndefinedCorrelation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Configuration rejected before any computation; carries every offending field.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(std::vector<std::string> problems)
        : std::invalid_argument(join(problems)), problems_(std::move(problems)) {}

    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    static std::string join(const std::vector<std::string>& problems) {
        std::string out = "invalid configuration:";
        for (const auto& p : problems) {
            out += "\n  ";
            out += p;
        }
        return out;
    }

    std::vector<std::string> problems_;
};

} // namespace blockcorr
