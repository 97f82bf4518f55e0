// Copyright 2026 the mmt authors
// SPDX-License-Identifier: Apache-2.0

#include "core/common.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace mmt {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return "ok";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kData: return "data_error";
    case ErrorCode::kMode: return "mode_error";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kDiverged: return "diverged";
    case ErrorCode::kCheckFailed: return "check_failed";
    case ErrorCode::kInternal: return "internal_error";
  }
  return "unknown";
}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

void warn(const std::string& message) {
  std::fprintf(stderr, "[mmt] warning: %s\n", message.c_str());
}

double distance(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double gelu_value(double x) {
  return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2));
}

int Rng::uniform_int(int lo, int hi) {
  if (hi <= lo) fail(ErrorCode::kInvalidArgument, "uniform_int: empty range");
  return lo + static_cast<int>(uniform() * static_cast<double>(hi - lo));
}

double Rng::normal() {
  // u1 in (0, 1] so the log is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::string Rng::serialize() const {
  std::ostringstream os;
  os << engine_;
  return os.str();
}

void Rng::restore(const std::string& state) {
  std::istringstream is(state);
  is >> engine_;
  if (is.fail()) fail(ErrorCode::kData, "bad RNG state string");
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  // Trim to the shortest representation that still round-trips.
  for (int prec = 1; prec < 17; ++prec) {
    char shorter[40];
    std::snprintf(shorter, sizeof(shorter), "%.*g", prec, value);
    double parsed = 0.0;
    std::sscanf(shorter, "%lf", &parsed);
    if (parsed == value) return shorter;
  }
  return buf;
}

}  // namespace mmt
