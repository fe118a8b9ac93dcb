#ifndef OGLM_ERRORS_HPP
#define OGLM_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace oglm {

struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NotPositiveDefiniteError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when the expected information cannot be factorized during a fit.
struct SingularInformationError : std::runtime_error {
    int iteration;
    explicit SingularInformationError(const std::string& what, int iter = 0)
        : std::runtime_error(what), iteration(iter) {}
};

struct AllocationError : std::runtime_error {
    int worker;
    explicit AllocationError(const std::string& what, int w)
        : std::runtime_error(what), worker(w) {}
};

struct PilotTooSmallError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OneShotUnavailableError : std::runtime_error {
    std::vector<int> failed_workers;
    OneShotUnavailableError(const std::string& what, std::vector<int> failed)
        : std::runtime_error(what), failed_workers(std::move(failed)) {}
};

struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AggregationError : std::runtime_error {
    int worker;
    AggregationError(const std::string& what, int w)
        : std::runtime_error(what), worker(w) {}
};

}  // namespace oglm

#endif  // OGLM_ERRORS_HPP
