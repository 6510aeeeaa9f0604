#include "tsbet/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "tsbet/errors.hpp"
#include "tsbet/parallel.hpp"
#include "tsbet/rng.hpp"
#include "tsbet/special_functions.hpp"

namespace tsbet {

namespace {

constexpr std::uint64_t kChunk = 4096;

std::uint64_t name_stream(const std::string& name) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h | 1u;
}

struct ChunkResult {
  std::vector<std::uint64_t> counts;
  std::vector<double> sum, sum_sq;  // per checkpoint
  double kappa_sum = 0.0;
};

}  // namespace

double sample_observation(const Distribution& d, std::uint64_t seed, std::uint64_t stream, std::uint64_t path,
                          std::uint64_t round) {
  const double u = counter_uniform(seed, stream, path, round);
  if (const auto* b = std::get_if<Bernoulli>(&d)) return u < b->p ? 1.0 : 0.0;
  const auto& g = std::get<Gaussian>(d);
  return g.mu + g.sigma * inverse_normal_cdf(u);
}

MonteCarloRun run(const TestingProblem& problem, const Strategy& strategy, const SimConfig& config) {
  if (config.paths < 1) throw DomainError("simulation needs at least one path");
  if (config.horizon < 1) throw DomainError("simulation needs horizon >= 1");
  const Distribution& law = config.measure == Measure::Null ? problem.null : problem.alternative;
  const std::uint64_t stream = config.common_random_numbers ? 0 : name_stream(strategy.name());
  const auto H = config.horizon;

  std::vector<std::int64_t> checkpoints;
  for (auto c : config.checkpoints) {
    if (c >= 1 && c <= H) checkpoints.push_back(c);
  }
  checkpoints.push_back(H);
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());

  const std::uint64_t chunks = (config.paths + kChunk - 1) / kChunk;
  std::vector<ChunkResult> parts(chunks);
  parallel_for(chunks, config.workers, [&](std::size_t c) {
    ChunkResult& r = parts[c];
    r.counts.assign(static_cast<std::size_t>(H) + 1, 0);
    r.sum.assign(checkpoints.size(), 0.0);
    r.sum_sq.assign(checkpoints.size(), 0.0);
    const std::uint64_t begin = c * kChunk;
    const std::uint64_t end = std::min(config.paths, begin + kChunk);
    for (std::uint64_t path = begin; path < end; ++path) {
      auto walker = strategy.start();
      std::size_t next_cp = 0;
      bool stopped = false;
      std::int64_t t = 1;
      for (; t <= H; ++t) {
        walker->observe(sample_observation(law, config.seed, stream, path, static_cast<std::uint64_t>(t)));
        if (walker->rejected(problem.alpha)) {
          ++r.counts[t];
          stopped = true;
          break;
        }
        if (walker->dead()) break;
        if (next_cp < checkpoints.size() && checkpoints[next_cp] == t) {
          const double e = walker->evidence();
          r.sum[next_cp] += e;
          r.sum_sq[next_cp] += e * e;
          ++next_cp;
        }
      }
      // Frozen evidence for the remaining checkpoints.
      const double e = walker->evidence();
      for (; next_cp < checkpoints.size(); ++next_cp) {
        r.sum[next_cp] += e;
        r.sum_sq[next_cp] += e * e;
      }
      if (!stopped && config.kappa && e > 0.0) {
        r.kappa_sum += std::min(1.0, std::pow(problem.alpha * e, *config.kappa));
      }
    }
  });

  MonteCarloRun out;
  out.strategy = strategy.name();
  out.dist = StoppingDistribution::empty(H, Estimator::MonteCarlo);
  out.dist.paths = config.paths;
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(H) + 1, 0);
  std::vector<double> sum(checkpoints.size(), 0.0), sum_sq(checkpoints.size(), 0.0);
  double kappa_sum = 0.0;
  for (const ChunkResult& r : parts) {
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += r.counts[i];
    for (std::size_t i = 0; i < sum.size(); ++i) {
      sum[i] += r.sum[i];
      sum_sq[i] += r.sum_sq[i];
    }
    kappa_sum += r.kappa_sum;
  }
  const double n = static_cast<double>(config.paths);
  std::uint64_t total = 0;
  for (std::size_t t = 1; t < counts.size(); ++t) {
    const double m = static_cast<double>(counts[t]) / n;
    out.dist.mass[t] = m;
    out.dist.se[t] = std::sqrt(m * (1.0 - m) / n);
    total += counts[t];
  }
  out.rejections = total;
  out.dist.never_mass = static_cast<double>(config.paths - total) / n;
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    const double mean = sum[i] / n;
    const double var = std::max(0.0, sum_sq[i] / n - mean * mean);
    out.stopped_means.push_back({checkpoints[i], mean, std::sqrt(var / n)});
  }
  if (config.kappa) out.kappa_tail = kappa_sum / n;
  return out;
}

Comparison compare(const TestingProblem& problem, const std::vector<StrategyPtr>& strategies,
                   const SimConfig& config, const std::vector<RewardSpec>& rewards) {
  if (strategies.empty()) throw DomainError("compare: empty strategy list");
  Comparison out;
  out.rewards = rewards;
  for (const auto& s : strategies) {
    ComparisonRow row;
    row.strategy = s->name();
    row.run = run(problem, *s, config);
    for (const auto& r : rewards) row.rewards.push_back(expected_reward(row.run.dist, r));
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace tsbet
