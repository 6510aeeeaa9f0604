#include "tsbet/reward.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tsbet/errors.hpp"

namespace tsbet {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::int64_t ceil_nonneg(double x) {
  if (!(x > 0.0)) return 0;
  return static_cast<std::int64_t>(std::ceil(x));
}

}  // namespace

RewardSpec make_hard_deadline(std::int64_t deadline, std::int64_t horizon) {
  if (deadline < 1) throw DomainError("hard deadline must be a positive round");
  return {HardDeadline{deadline}, horizon};
}

RewardSpec make_logistic(double center, double scale, std::int64_t horizon) {
  if (!(center > 0.0) || !(scale > 0.0)) throw DomainError("logistic reward needs center > 0 and scale > 0");
  return {Logistic{center, scale}, horizon};
}

RewardSpec make_exponential(double timescale, std::int64_t horizon) {
  if (!(timescale > 0.0)) throw DomainError("exponential reward needs a positive timescale");
  return {ExponentialDecay{timescale}, horizon};
}

RewardSpec make_table(std::vector<double> values, std::int64_t horizon) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0) || !std::isfinite(values[i])) throw DomainError("reward table entries must be finite and >= 0");
    if (i > 0 && values[i] > values[i - 1]) throw DomainError("reward table must be non-increasing");
  }
  return {Table{std::move(values)}, horizon};
}

double evaluate(const RewardSpec& spec, std::int64_t t) {
  if (t == kNeverRejected) return 0.0;
  if (t < 0) throw DomainError("reward: negative round");
  const double td = static_cast<double>(t);
  return std::visit(
      overloaded{[&](const HardDeadline& h) { return t <= h.deadline ? 1.0 : 0.0; },
                 [&](const Logistic& l) { return 1.0 / (1.0 + std::exp((td - l.center) / l.scale)); },
                 [&](const ExponentialDecay& e) { return std::exp(-td / e.timescale); },
                 [&](const Table& tab) {
                   return static_cast<std::size_t>(t) < tab.values.size() ? tab.values[t] : 0.0;
                 }},
      spec.kind);
}

std::int64_t effective_horizon(const RewardSpec& spec, double epsilon) {
  if (!(epsilon > 0.0)) throw DomainError("effective_horizon: epsilon must be positive");
  // Continuous crossing time, rounded up.
  return std::visit(
      overloaded{[&](const HardDeadline& h) -> std::int64_t { return epsilon <= 1.0 ? h.deadline : 0; },
                 [&](const Logistic& l) -> std::int64_t {
                   if (epsilon >= 1.0) return 0;
                   return ceil_nonneg(l.center + l.scale * std::log(1.0 / epsilon - 1.0));
                 },
                 [&](const ExponentialDecay& e) -> std::int64_t {
                   return ceil_nonneg(e.timescale * std::log(1.0 / epsilon));
                 },
                 [&](const Table& tab) -> std::int64_t {
                   for (std::size_t i = tab.values.size(); i-- > 0;) {
                     if (tab.values[i] >= epsilon) return static_cast<std::int64_t>(i);
                   }
                   return 0;
                 }},
      spec.kind);
}

std::int64_t solver_horizon(const RewardSpec& spec, double epsilon) {
  const std::int64_t h = spec.horizon > 0 ? spec.horizon : effective_horizon(spec, epsilon);
  return std::max<std::int64_t>(h, 1);
}

std::string describe(const RewardSpec& spec) {
  std::ostringstream out;
  std::visit(overloaded{[&](const HardDeadline& h) { out << "hard_deadline(T=" << h.deadline << ")"; },
                        [&](const Logistic& l) { out << "logistic(T=" << l.center << ",beta=" << l.scale << ")"; },
                        [&](const ExponentialDecay& e) { out << "exponential(T=" << e.timescale << ")"; },
                        [&](const Table& t) { out << "table(n=" << t.values.size() << ")"; }},
             spec.kind);
  return out.str();
}

}  // namespace tsbet
