#include "tsbet/stopping.hpp"

#include <algorithm>
#include <cmath>

#include "tsbet/errors.hpp"
#include "tsbet/special_functions.hpp"

namespace tsbet {

StoppingDistribution StoppingDistribution::empty(std::int64_t horizon, Estimator kind) {
  if (horizon < 1) throw DomainError("stopping distribution needs horizon >= 1");
  StoppingDistribution d;
  d.horizon = horizon;
  d.mass.assign(static_cast<std::size_t>(horizon) + 1, 0.0);
  d.se.assign(static_cast<std::size_t>(horizon) + 1, 0.0);
  d.never_mass = 1.0;
  d.kind = kind;
  return d;
}

std::vector<double> StoppingDistribution::cdf() const {
  std::vector<double> out(mass.size(), 0.0);
  CompensatedSum acc;
  for (std::size_t t = 1; t < mass.size(); ++t) {
    acc.add(mass[t]);
    out[t] = std::min(1.0, acc.value());
  }
  return out;
}

double StoppingDistribution::cdf_at(std::int64_t t) const {
  if (t <= 0) return 0.0;
  const auto last = std::min<std::int64_t>(t, horizon);
  CompensatedSum acc;
  for (std::int64_t s = 1; s <= last; ++s) acc.add(mass[s]);
  return std::min(1.0, acc.value());
}

RewardEstimate expected_reward(const StoppingDistribution& dist, const RewardSpec& reward) {
  CompensatedSum first, second;
  for (std::int64_t t = 1; t <= dist.horizon; ++t) {
    const double r = evaluate(reward, t);
    first.add(dist.mass[t] * r);
    second.add(dist.mass[t] * r * r);
  }
  RewardEstimate out;
  out.estimate = first.value();
  if (dist.kind == Estimator::MonteCarlo && dist.paths > 1) {
    const double var = std::max(0.0, second.value() - out.estimate * out.estimate);
    out.standard_error = std::sqrt(var / static_cast<double>(dist.paths));
  }
  out.truncation_bound = evaluate(reward, dist.horizon + 1) * dist.never_mass;
  return out;
}

double cdf_sup_distance(const StoppingDistribution& a, const StoppingDistribution& b, std::int64_t limit) {
  const std::int64_t last = std::min({limit, a.horizon, b.horizon});
  const auto fa = a.cdf();
  const auto fb = b.cdf();
  double sup = 0.0;
  for (std::int64_t t = 1; t <= last; ++t) sup = std::max(sup, std::abs(fa[t] - fb[t]));
  return sup;
}

std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials, double confidence) {
  if (trials == 0 || successes > trials) throw DomainError("wilson_interval: need 0 <= successes <= trials, trials >= 1");
  if (!(confidence > 0.0 && confidence < 1.0)) throw DomainError("wilson_interval: confidence must lie in (0,1)");
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z = inverse_normal_cdf(0.5 + 0.5 * confidence);
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (phat + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  double lo = centre - half;
  double hi = centre + half;
  if (successes == 0) lo = 0.0;
  if (successes == trials) hi = 1.0;
  return {std::clamp(lo, 0.0, 1.0), std::clamp(hi, 0.0, 1.0)};
}

}  // namespace tsbet
