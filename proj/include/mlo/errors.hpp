#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mlo {

/// A parameter is outside its documented domain.
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The queue is unstable (traffic intensity a >= 1); delays are unbounded.
class UnstableSystem : public std::runtime_error {
public:
    explicit UnstableSystem(double a)
        : std::runtime_error("unstable system: traffic intensity a = " + std::to_string(a) + " >= 1"),
          intensity_(a) {}

    double intensity() const noexcept { return intensity_; }

private:
    double intensity_;
};

/// Channel never idles (p_e = 0) or collisions are certain (p = 1).
class DegenerateChannel : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonConvergence : public std::runtime_error {
public:
    NonConvergence(double residual, int iterations)
        : std::runtime_error("fixed point did not converge after " + std::to_string(iterations) +
                             " iterations (residual " + std::to_string(residual) + ")"),
          residual_(residual),
          iterations_(iterations) {}

    double residual() const noexcept { return residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double residual_;
    int iterations_;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TraceParseError : public std::runtime_error {
public:
    TraceParseError(std::size_t line, const std::string& what)
        : std::runtime_error("trace line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class EmptySample : public std::invalid_argument {
public:
    EmptySample() : std::invalid_argument("percentile of an empty sample") {}
};

class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mlo
