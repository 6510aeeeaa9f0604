#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <variant>
#include <vector>

namespace tsbet {

// Rejection round standing for "never rejected".
inline constexpr std::int64_t kNeverRejected = std::numeric_limits<std::int64_t>::max();

struct HardDeadline {
  std::int64_t deadline;
};

struct Logistic {
  double center;
  double scale;
};

struct ExponentialDecay {
  double timescale;
};

// R(t) = values[t]; zero past the end.
struct Table {
  std::vector<double> values;
};

using RewardKind = std::variant<HardDeadline, Logistic, ExponentialDecay, Table>;

struct RewardSpec {
  RewardKind kind;
  // Solver truncation; 0 means derive it from effective_horizon(spec, 1e-6).
  std::int64_t horizon = 0;
};

RewardSpec make_hard_deadline(std::int64_t deadline, std::int64_t horizon = 0);
RewardSpec make_logistic(double center, double scale, std::int64_t horizon = 0);
RewardSpec make_exponential(double timescale, std::int64_t horizon = 0);
RewardSpec make_table(std::vector<double> values, std::int64_t horizon = 0);

// R(t) for t >= 0; kNeverRejected maps to 0.
double evaluate(const RewardSpec& spec, std::int64_t t);

// Smallest H such that R(t) < epsilon for every t > H.
std::int64_t effective_horizon(const RewardSpec& spec, double epsilon);

// spec.horizon if set, otherwise effective_horizon(spec, epsilon).
std::int64_t solver_horizon(const RewardSpec& spec, double epsilon = 1e-6);

std::string describe(const RewardSpec& spec);

}  // namespace tsbet
