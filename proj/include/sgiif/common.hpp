#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>

namespace sgiif
{
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// y = op(x); the output vector is already sized by the caller.
using LinearOperator = std::function<void(Vector const &x, Vector &y)>;

/// Raised for invalid user input or inconsistent arguments.
class validation_error : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure fails (non-convergence, blow-up, NaN).
class numerical_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

inline void expect(bool condition, std::string const &message)
{
  if (!condition)
  {
    throw validation_error(message);
  }
}

inline std::span<double const> as_span(Vector const &v)
{
  return {v.data(), static_cast<std::size_t>(v.size())};
}

inline std::span<double> as_span(Vector &v)
{
  return {v.data(), static_cast<std::size_t>(v.size())};
}

constexpr std::int64_t pow2(int n) { return std::int64_t{1} << n; }

/// Number of translations on a one-dimensional level: 1 at level 0, else 2^(level-1).
constexpr std::int64_t translations(int level) { return level == 0 ? 1 : pow2(level - 1); }

/// Number of threads requested through SGIIF_THREADS (0 = runtime default).
int configured_threads();

/// Applies SGIIF_THREADS to the OpenMP runtime, if one is linked.
void apply_thread_limit();

} // namespace sgiif
