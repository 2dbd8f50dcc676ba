#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace idrl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Rng = std::mt19937_64;

// Input that violates a documented contract (bad config, mismatched dims).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem or on-disk format problem.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed binary file; `field` names the header entry that failed to parse.
class FormatError : public IoError {
 public:
  FormatError(std::string field, const std::string& what)
      : IoError(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Non-finite value during training.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Deterministic seed derivation for independent streams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double standard_normal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

inline Vec one_hot(int index, int n) {
  Vec v = Vec::Zero(n);
  v[index] = 1.0;
  return v;
}

inline int argmax(const Vec& v) {
  Eigen::Index i = 0;
  v.maxCoeff(&i);
  return static_cast<int>(i);
}

}  // namespace idrl
