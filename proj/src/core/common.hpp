// Copyright 2026 the mmt authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmt {

enum class ErrorCode {
  kOk = 0,
  kInvalidArgument,
  kData,
  kMode,
  kIo,
  kDiverged,
  kCheckFailed,
  kInternal,
};

const char* error_code_name(ErrorCode code);

// Exception carrying a coarse error category; the C API maps it to a status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

// Warning sink (stderr). Kept as a function so callers never format unless
// a warning actually fires.
void warn(const std::string& message);

using Vec3 = std::array<double, 3>;

double distance(const Vec3& a, const Vec3& b);

inline constexpr double kInvSqrt2Pi = 0.3989422804014327;

// Exact (erf-based) GELU.
double gelu_value(double x);

// Dense row-major matrix for plain (non-differentiated) math.
struct Mat {
  int rows = 0, cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}
  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  double at(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
};

// Deterministic RNG. All randomness in the project flows through this class:
// uniform doubles come from the top 53 bits of the engine output and normals
// from a cache-free Box-Muller transform, so a restored engine state resumes
// the exact sample stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi).
  int uniform_int(int lo, int hi);

  // Standard normal, no cached spare.
  double normal();

  std::string serialize() const;
  void restore(const std::string& state);

 private:
  std::mt19937_64 engine_;
};

// Shortest decimal form that parses back to the same double. Used for CSV
// metrics so resumed runs emit byte-identical rows.
std::string format_double(double value);

}  // namespace mmt
