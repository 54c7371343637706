#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace gk {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using Rng = std::mt19937_64;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class ErrorKind {
  invalid_argument,  // bad parameter value / malformed input
  dimension,         // shape makes the requested operation impossible
  non_finite,        // NaN or Inf encountered in an input
  rank_deficient,    // a matrix that must have full rank does not
  not_psd,           // matrix not positive semidefinite within jitter budget
  not_pd,            // matrix not positive definite where required
  routing,           // no admissible pipeline for the given sizes
  numeric,           // a numerical invariant failed at runtime
  config,            // configuration file problem
  io,                // file / format problem
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

inline void require(bool ok, ErrorKind kind, const std::string& msg) {
  if (!ok) fail(kind, msg);
}

template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& a, const char* name) {
  if (!a.allFinite()) fail(ErrorKind::non_finite, std::string(name) + " contains NaN or Inf");
}

// Deterministic per-replication seed derivation (splitmix64 mix of master and index).
inline std::uint64_t sub_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace gk
