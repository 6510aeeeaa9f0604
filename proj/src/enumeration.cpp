#include "tsbet/enumeration.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <unordered_map>

#include "tsbet/errors.hpp"
#include "tsbet/parallel.hpp"
#include "tsbet/special_functions.hpp"

namespace tsbet {

namespace {

struct KeyHash {
  std::size_t operator()(const std::vector<std::int64_t>& key) const {
    std::uint64_t h = 1469598103934665603ull;
    for (std::int64_t v : key) {
      h ^= static_cast<std::uint64_t>(v);
      h *= 1099511628211ull;
      h ^= h >> 29;
    }
    return static_cast<std::size_t>(h);
  }
};

struct Node {
  std::unique_ptr<Walker> walker;
  double alt;
  double null;
};

struct Tally {
  std::vector<double> alt, null;
  double lost_alt = 0.0, lost_null = 0.0;  // dead or unresolved at the horizon
  double excess = -INFINITY;
  std::uint64_t states = 0;
  explicit Tally(std::size_t n) : alt(n, 0.0), null(n, 0.0) {}
};

struct Params {
  double p0, p1, alpha;
  std::int64_t horizon;
};

double martingale_excess(double parent, double u1, double u0, double p0) {
  const double mean = p0 * u1 + (1.0 - p0) * u0;
  if (parent > 0.0) return (mean - parent) / parent;
  return mean > 0.0 ? INFINITY : 0.0;
}

void depth_first(const Params& prm, const Walker& w, double alt, double null, std::int64_t t, Tally& tally) {
  ++tally.states;
  std::unique_ptr<Walker> kids[2];
  for (int x = 1; x >= 0; --x) {
    kids[x] = w.clone();
    kids[x]->observe(static_cast<double>(x));
  }
  tally.excess = std::max(tally.excess, martingale_excess(w.evidence(), kids[1]->evidence(), kids[0]->evidence(), prm.p0));
  for (int x = 1; x >= 0; --x) {
    const double a = alt * (x ? prm.p1 : 1.0 - prm.p1);
    const double n = null * (x ? prm.p0 : 1.0 - prm.p0);
    if (kids[x]->rejected(prm.alpha)) {
      tally.alt[t + 1] += a;
      tally.null[t + 1] += n;
    } else if (kids[x]->dead() || t + 1 >= prm.horizon) {
      tally.lost_alt += a;
      tally.lost_null += n;
    } else {
      depth_first(prm, *kids[x], a, n, t + 1, tally);
    }
  }
}

}  // namespace

ExactStopping exact_stopping_distribution(const TestingProblem& problem, const Strategy& strategy,
                                          std::int64_t horizon, const EnumerationOptions& options) {
  if (!is_bernoulli(problem)) throw DomainError("exact enumeration needs a Bernoulli problem");
  if (horizon < 1) throw DomainError("exact enumeration: horizon must be >= 1");
  if (!strategy.compact_state() && horizon > options.prefix_limit) {
    std::ostringstream msg;
    msg << "exact enumeration: strategy '" << strategy.name() << "' depends on the full prefix; horizon "
        << horizon << " exceeds the limit " << options.prefix_limit;
    throw DomainError(msg.str());
  }
  const Params prm{std::get<Bernoulli>(problem.null).p, std::get<Bernoulli>(problem.alternative).p,
                   problem.alpha, horizon};
  const auto n = static_cast<std::size_t>(horizon) + 1;
  Tally tally(n);

  std::vector<Node> level;
  level.push_back({strategy.start(), 1.0, 1.0});
  std::int64_t t = 0;
  bool switched = false;
  std::vector<std::int64_t> key;
  while (!level.empty() && t < horizon) {
    if (level.size() > options.level_budget) {
      switched = true;
      break;
    }
    std::vector<Node> next;
    std::unordered_map<std::vector<std::int64_t>, std::size_t, KeyHash> index;
    for (Node& node : level) {
      ++tally.states;
      std::unique_ptr<Walker> kids[2];
      for (int x = 1; x >= 0; --x) {
        kids[x] = node.walker->clone();
        kids[x]->observe(static_cast<double>(x));
      }
      tally.excess = std::max(tally.excess, martingale_excess(node.walker->evidence(), kids[1]->evidence(),
                                                              kids[0]->evidence(), prm.p0));
      for (int x = 1; x >= 0; --x) {
        const double a = node.alt * (x ? prm.p1 : 1.0 - prm.p1);
        const double nm = node.null * (x ? prm.p0 : 1.0 - prm.p0);
        if (kids[x]->rejected(prm.alpha)) {
          tally.alt[t + 1] += a;
          tally.null[t + 1] += nm;
          continue;
        }
        if (kids[x]->dead() || t + 1 >= horizon) {
          tally.lost_alt += a;
          tally.lost_null += nm;
          continue;
        }
        key.clear();
        kids[x]->append_key(key);
        auto [it, inserted] = index.try_emplace(key, next.size());
        if (inserted) {
          next.push_back({std::move(kids[x]), a, nm});
        } else {
          next[it->second].alt += a;
          next[it->second].null += nm;
        }
      }
    }
    level.swap(next);
    ++t;
  }

  if (switched) {
    // Fixed chunks reduced in order keep the sums independent of the worker count.
    const std::size_t chunks = std::min<std::size_t>(level.size(), 256);
    std::vector<Tally> parts(chunks, Tally(n));
    const std::size_t per = (level.size() + chunks - 1) / chunks;
    parallel_for(chunks, options.workers, [&](std::size_t c) {
      const std::size_t begin = c * per;
      const std::size_t end = std::min(level.size(), begin + per);
      for (std::size_t i = begin; i < end; ++i) depth_first(prm, *level[i].walker, level[i].alt, level[i].null, t, parts[c]);
    });
    for (const Tally& part : parts) {
      for (std::size_t i = 0; i < n; ++i) {
        tally.alt[i] += part.alt[i];
        tally.null[i] += part.null[i];
      }
      tally.lost_alt += part.lost_alt;
      tally.lost_null += part.lost_null;
      tally.excess = std::max(tally.excess, part.excess);
      tally.states += part.states;
    }
    level.clear();
  }
  for (const Node& node : level) {
    tally.lost_alt += node.alt;
    tally.lost_null += node.null;
  }

  ExactStopping out;
  out.alternative = StoppingDistribution::empty(horizon, Estimator::Exact);
  out.null = StoppingDistribution::empty(horizon, Estimator::Exact);
  out.alternative.mass = tally.alt;
  out.null.mass = tally.null;
  out.alternative.never_mass = std::clamp(tally.lost_alt, 0.0, 1.0);
  out.null.never_mass = std::clamp(tally.lost_null, 0.0, 1.0);
  out.max_martingale_excess = tally.excess;
  out.states = tally.states;
  out.depth_first = switched;
  return out;
}

namespace {

class RuleWalker : public Walker {
 public:
  explicit RuleWalker(const PrefixRule::Rule* rule) : rule_(rule) {}
  void observe(double x) override {
    const auto [e0, e1] = (*rule_)(prefix_);
    wealth_ *= x == 1.0 ? e1 : e0;
    prefix_.push_back(x == 1.0 ? 1 : 0);
  }
  double evidence() const override { return wealth_; }
  std::unique_ptr<Walker> clone() const override { return std::make_unique<RuleWalker>(*this); }
  void append_key(std::vector<std::int64_t>& key) const override { key.insert(key.end(), prefix_.begin(), prefix_.end()); }

 private:
  const PrefixRule::Rule* rule_;
  std::vector<int> prefix_;
  double wealth_ = 1.0;
};

}  // namespace

std::unique_ptr<Walker> PrefixRule::start() const { return std::make_unique<RuleWalker>(&rule_); }

}  // namespace tsbet
