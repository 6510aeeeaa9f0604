#include "tsbet/hard_deadline.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "tsbet/errors.hpp"
#include "tsbet/special_functions.hpp"

namespace tsbet {

double GaussianDoob::h(std::int64_t t, double s) const {
  if (t >= deadline) return s >= c ? 1.0 : 0.0;
  return normal_sf((c - s) / (sigma * std::sqrt(static_cast<double>(deadline - t))));
}

double GaussianDoob::h_complement(std::int64_t t, double s) const {
  if (t >= deadline) return s >= c ? 0.0 : 1.0;
  return normal_cdf((c - s) / (sigma * std::sqrt(static_cast<double>(deadline - t))));
}

GaussianDoob gaussian_np(double sigma, std::int64_t deadline, double alpha) {
  if (!(sigma > 0.0)) throw DomainError("gaussian_np: sigma must be positive");
  if (deadline < 1) throw DomainError("gaussian_np: deadline must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("gaussian_np: alpha must lie in (0,1)");
  // F^{-1}(1 - alpha) = -F^{-1}(alpha) avoids rounding 1 - alpha.
  const double c = -sigma * std::sqrt(static_cast<double>(deadline)) * inverse_normal_cdf(alpha);
  return GaussianDoob{sigma, deadline, alpha, c};
}

namespace {

struct Powers {
  std::vector<Rational> p, q;
  Powers(const Rational& p0, int n) : p(n + 1), q(n + 1) {
    p[0] = q[0] = 1;
    const Rational q0 = 1 - p0;
    for (int i = 1; i <= n; ++i) {
      p[i] = p[i - 1] * p0;
      q[i] = q[i - 1] * q0;
    }
  }
  // Mass of one string with u ones and v zeros.
  Rational atom(int u, int v) const { return p[u] * q[v]; }
};

void validate_np_inputs(const Rational& p0, const Rational& p1, int deadline, const Rational& alpha) {
  if (deadline < 1) throw DomainError("NP event: deadline must be >= 1");
  if (!(p0 > 0 && p0 < 1)) throw DomainError("NP event: p0 must lie in (0,1)");
  if (p1 < 0 || p1 > 1) throw DomainError("NP event: p1 must lie in [0,1]");
  if (p1 == p0) throw DomainError("NP event: p1 must differ from p0");
  if (!(alpha > 0 && alpha <= 1)) throw DomainError("NP event: alpha must lie in (0,1]");
}

void summarise(NPEventBernoulli& ev) {
  const int T = ev.deadline;
  ev.null_mass = level_mass(ev.counts, ev.p0, T);
  ev.power = level_mass(ev.counts, ev.p1, T);
  int k = T + 1;
  while (k > 0 && ev.counts[k - 1] == binomial(T, k - 1)) --k;
  ev.k = k;
  ev.r = k >= 1 ? ev.counts[k - 1] : BigInt(0);
  ev.upper_tail_form = true;
  for (int j = 0; j + 1 < k; ++j) {
    if (ev.counts[j] != 0) ev.upper_tail_form = false;
  }
}

NPEventBernoulli greedy_event(const Rational& p0, const Rational& p1, int T, const Rational& alpha) {
  const Powers pw(p0, T);
  NPEventBernoulli ev;
  ev.deadline = T;
  ev.p0 = p0;
  ev.p1 = p1;
  ev.alpha = alpha;
  ev.counts.assign(T + 1, BigInt(0));
  // Smallest k with P0(S_T >= k) <= alpha.
  std::vector<Rational> tail(T + 2);
  tail[T + 1] = 0;
  for (int j = T; j >= 0; --j) tail[j] = tail[j + 1] + Rational(binomial(T, j)) * pw.atom(j, T - j);
  int k = T + 1;
  while (k > 0 && tail[k - 1] <= alpha) --k;
  for (int j = k; j <= T; ++j) ev.counts[j] = binomial(T, j);
  if (k >= 1) {
    const Rational room = (alpha - tail[k]) / pw.atom(k - 1, T - k + 1);
    ev.counts[k - 1] = std::min(floor_div(room), binomial(T, k - 1));
  }
  summarise(ev);
  return ev;
}

// Bounded knapsack over levels, items sorted by decreasing likelihood ratio.
class LevelKnapsack {
 public:
  struct Item {
    int level;
    Rational weight;  // null mass of one string
    Rational value;   // alternative mass of one string
    BigInt cap;
  };

  LevelKnapsack(std::vector<Item> items, Rational budget) : items_(std::move(items)), budget_(std::move(budget)) {}

  std::vector<BigInt> solve() {
    std::vector<BigInt> take(items_.size(), BigInt(0));
    // Incumbent: take as much as fits, in ratio order.
    Rational room = budget_;
    best_value_ = 0;
    best_.assign(items_.size(), BigInt(0));
    for (std::size_t j = 0; j < items_.size(); ++j) {
      const BigInt m = std::min(items_[j].cap, floor_div(room / items_[j].weight));
      best_[j] = m;
      room -= Rational(m) * items_[j].weight;
      best_value_ += Rational(m) * items_[j].value;
    }
    search(0, budget_, Rational(0), take);
    return best_;
  }

 private:
  Rational bound(std::size_t j, Rational room) const {
    Rational extra = 0;
    for (; j < items_.size(); ++j) {
      const Rational full = Rational(items_[j].cap) * items_[j].weight;
      if (full <= room) {
        room -= full;
        extra += Rational(items_[j].cap) * items_[j].value;
      } else {
        extra += room / items_[j].weight * items_[j].value;
        break;
      }
    }
    return extra;
  }

  void search(std::size_t j, const Rational& room, const Rational& value, std::vector<BigInt>& take) {
    if (++nodes_ > kNodeLimit) throw SolverError("NP knapsack: node limit exceeded");
    if (j == items_.size()) {
      if (value > best_value_) {
        best_value_ = value;
        best_ = take;
      }
      return;
    }
    const Item& it = items_[j];
    BigInt m = std::min(it.cap, floor_div(room / it.weight));
    for (;; --m) {
      const Rational used = Rational(m) * it.weight;
      const Rational v = value + Rational(m) * it.value;
      if (v + bound(j + 1, room - used) <= best_value_) break;
      take[j] = m;
      search(j + 1, room - used, v, take);
      take[j] = 0;
      if (m == 0) break;
    }
  }

  static constexpr long kNodeLimit = 20'000'000;
  std::vector<Item> items_;
  Rational budget_;
  Rational best_value_;
  std::vector<BigInt> best_;
  long nodes_ = 0;
};

}  // namespace

Rational level_mass(const std::vector<BigInt>& counts, const Rational& p, int deadline) {
  const Powers pw(p, deadline);
  Rational total = 0;
  for (int k = 0; k <= deadline; ++k) {
    if (counts[k] != 0) total += Rational(counts[k]) * pw.atom(k, deadline - k);
  }
  return total;
}

NPEventBernoulli bernoulli_np_greedy(double p0, double p1, int deadline, double alpha) {
  const Rational rp0 = snap_probability(p0), rp1 = snap_probability(p1), ra = snap_probability(alpha);
  validate_np_inputs(rp0, rp1, deadline, ra);
  if (rp0 > Rational(1, 2)) throw DomainError("bernoulli_np_greedy: greedy structure needs p0 <= 1/2");
  if (!(rp1 > rp0)) throw DomainError("bernoulli_np_greedy: needs p1 > p0");
  return greedy_event(rp0, rp1, deadline, ra);
}

NPEventBernoulli bernoulli_np_exact(double p0, double p1, int deadline, double alpha, int max_deadline) {
  const Rational rp0 = snap_probability(p0), rp1 = snap_probability(p1), ra = snap_probability(alpha);
  validate_np_inputs(rp0, rp1, deadline, ra);
  if (deadline > max_deadline) {
    std::ostringstream msg;
    msg << "bernoulli_np_exact: deadline " << deadline << " exceeds the exact-search cap " << max_deadline
        << "; use the upper-tail approximation instead";
    throw DomainError(msg.str());
  }

  const int T = deadline;
  const Powers w(rp0, T), v(rp1, T);
  std::vector<LevelKnapsack::Item> items;
  for (int i = 0; i <= T; ++i) {
    // Likelihood ratio increases with k when p1 > p0.
    const int k = rp1 > rp0 ? T - i : i;
    const Rational value = v.atom(k, T - k);
    if (value == 0) continue;
    items.push_back({k, w.atom(k, T - k), value, binomial(T, k)});
  }
  LevelKnapsack knapsack(items, ra);
  const std::vector<BigInt> take = knapsack.solve();
  NPEventBernoulli ev;
  ev.deadline = T;
  ev.p0 = rp0;
  ev.p1 = rp1;
  ev.alpha = ra;
  ev.counts.assign(T + 1, BigInt(0));
  for (std::size_t j = 0; j < items.size(); ++j) ev.counts[items[j].level] = take[j];
  summarise(ev);
  return ev;
}

NPEventBernoulli bernoulli_np_level_union(double p0, double p1, int deadline, double alpha) {
  const Rational rp0 = snap_probability(p0), rp1 = snap_probability(p1), ra = snap_probability(alpha);
  validate_np_inputs(rp0, rp1, deadline, ra);
  const int T = deadline;
  const Powers w(rp0, T), v(rp1, T);
  struct Level {
    int k;
    Rational null, alt;
  };
  std::vector<Level> levels;
  for (int i = 0; i <= T; ++i) {
    const int k = rp1 > rp0 ? T - i : i;
    const BigInt n = binomial(T, k);
    levels.push_back({k, w.atom(k, T - k) * n, v.atom(k, T - k) * n});
  }
  // suffix[i]: alternative mass of levels i.. (an optimistic bound).
  std::vector<Rational> suffix(levels.size() + 1, Rational(0));
  for (std::size_t i = levels.size(); i-- > 0;) suffix[i] = suffix[i + 1] + levels[i].alt;

  std::vector<bool> current(levels.size(), false), best_set(levels.size(), false);
  Rational best = -1;
  std::function<void(std::size_t, const Rational&, const Rational&)> search =
      [&](std::size_t i, const Rational& used, const Rational& power) {
        if (power + suffix[i] <= best) return;
        if (i == levels.size()) {
          best = power;
          best_set = current;
          return;
        }
        if (used + levels[i].null <= ra) {
          current[i] = true;
          search(i + 1, used + levels[i].null, power + levels[i].alt);
          current[i] = false;
        }
        search(i + 1, used, power);
      };
  search(0, Rational(0), Rational(0));

  NPEventBernoulli ev;
  ev.deadline = T;
  ev.p0 = rp0;
  ev.p1 = rp1;
  ev.alpha = ra;
  ev.counts.assign(T + 1, BigInt(0));
  for (std::size_t j = 0; j < levels.size(); ++j)
    if (best_set[j]) ev.counts[levels[j].k] = binomial(T, levels[j].k);
  summarise(ev);
  return ev;
}

std::vector<int> unrank_level_string(int deadline, int level, const BigInt& index) {
  if (level < 0 || level > deadline || index < 0 || index >= binomial(deadline, level)) {
    throw DomainError("unrank_level_string: index out of range");
  }
  std::vector<int> bits(deadline, 0);
  BigInt idx = index;
  int need = level;
  for (int j = 0; j < deadline; ++j) {
    const BigInt with_one = need >= 1 ? binomial(deadline - j - 1, need - 1) : BigInt(0);
    if (idx < with_one) {
      bits[j] = 1;
      --need;
    } else {
      idx -= with_one;
    }
  }
  return bits;
}

BigInt strings_before_prefix(int deadline, int level, const std::vector<int>& prefix) {
  BigInt before = 0;
  int ones = 0;
  for (std::size_t j = 0; j < prefix.size(); ++j) {
    if (prefix[j] == 0 && level - ones - 1 >= 0) {
      before += binomial(deadline - static_cast<int>(j) - 1, level - ones - 1);
    }
    ones += prefix[j];
  }
  return before;
}

BernoulliDoob::BernoulliDoob(NPEventBernoulli event, DoobScaling scaling)
    : event_(std::move(event)), scaling_(scaling), q0_(1 - event_.p0) {
  const int T = event_.deadline;
  for (int L = 0; L <= T; ++L) {
    const BigInt total = binomial(T, L);
    const BigInt& m = event_.counts[L];
    if (m == total) {
      full_levels_.push_back(L);
    } else if (m > 0) {
      Partial part;
      part.level = L;
      part.m = m;
      part.chain = unrank_level_string(T, L, m - 1);
      const std::vector<int> next = unrank_level_string(T, L, m);
      part.common = 0;
      while (part.chain[part.common] == next[part.common]) ++part.common;
      for (int t = 0; t <= part.common; ++t) {
        const std::vector<int> prefix(part.chain.begin(), part.chain.begin() + t);
        part.count.push_back(m - strings_before_prefix(T, L, prefix));
      }
      partial_.push_back(std::move(part));
    }
  }
}

Rational BernoulliDoob::h_prefix(const std::vector<int>& prefix) const {
  const int T = event_.deadline;
  const int t = static_cast<int>(prefix.size());
  if (t > T) throw DomainError("h_prefix: prefix longer than the deadline");
  int s = 0;
  for (int x : prefix) {
    if (x != 0 && x != 1) throw DomainError("h_prefix: bits must be 0 or 1");
    s += x;
  }
  const Powers pw(event_.p0, T);
  Rational h = 0;
  for (int L = s; L <= s + (T - t); ++L) {
    const BigInt& m = event_.counts[L];
    if (m == 0) continue;
    const BigInt block = binomial(T - t, L - s);
    BigInt included = block;
    if (m != binomial(T, L)) {
      const BigInt before = strings_before_prefix(T, L, prefix);
      included = m - before;
      if (included < 0) included = 0;
      if (included > block) included = block;
    }
    if (included != 0) h += Rational(included) * pw.atom(L - s, T - t - (L - s));
  }
  return h;
}

Rational BernoulliDoob::evidence_prefix(const std::vector<int>& prefix) const {
  const Rational h = h_prefix(prefix);
  if (scaling_ == DoobScaling::Alpha) return h / event_.alpha;
  if (event_.null_mass == 0) return Rational(0);
  return h / event_.null_mass;
}

BernoulliDoob::State BernoulliDoob::initial() const {
  State s;
  s.status.assign(partial_.size(), Status::Partial);
  return s;
}

BernoulliDoob::State BernoulliDoob::advance(const State& state, int x) const {
  if (state.t >= event_.deadline) return state;
  State next = state;
  next.t = state.t + 1;
  next.s = state.s + (x == 1 ? 1 : 0);
  for (std::size_t i = 0; i < partial_.size(); ++i) {
    if (state.status[i] != Status::Partial) continue;
    const Partial& p = partial_[i];
    if (state.t < p.common && x == p.chain[state.t]) continue;
    next.status[i] = x == 1 ? Status::All : Status::None;
  }
  return next;
}

Rational BernoulliDoob::compute(const State& state) const {
  const int T = event_.deadline;
  const int t = state.t, s = state.s;
  const Powers pw(event_.p0, T - t);
  auto block_mass = [&](int L, const BigInt& count) {
    return Rational(count) * pw.atom(L - s, T - t - (L - s));
  };
  Rational h = 0;
  for (int L : full_levels_) {
    if (L < s || L - s > T - t) continue;
    h += block_mass(L, binomial(T - t, L - s));
  }
  for (std::size_t i = 0; i < partial_.size(); ++i) {
    const Partial& p = partial_[i];
    const int L = p.level;
    if (L < s || L - s > T - t) continue;
    switch (state.status[i]) {
      case Status::All:
        h += block_mass(L, binomial(T - t, L - s));
        break;
      case Status::None:
        break;
      case Status::Partial:
        h += block_mass(L, p.count[t]);
        break;
    }
  }
  return h;
}

const BernoulliDoob::Entry& BernoulliDoob::entry(const State& state) const {
  std::vector<std::int64_t> key{state.t, state.s};
  for (Status st : state.status) key.push_back(static_cast<std::int64_t>(st));
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  Entry e;
  e.h = compute(state);
  e.value = to_double(e.h);
  if (scaling_ == DoobScaling::Alpha) {
    e.evidence = to_double(e.h / event_.alpha);
    e.reject = e.h >= 1;
  } else if (event_.null_mass == 0) {
    e.evidence = 0.0;
    e.reject = false;
  } else {
    e.evidence = to_double(e.h / event_.null_mass);
    e.reject = event_.alpha * e.h >= event_.null_mass;
  }
  std::lock_guard<std::mutex> lock(mutex_);
  return cache_.emplace(std::move(key), std::move(e)).first->second;
}

UpperTailDoob::UpperTailDoob(double p0, double p1, int deadline, double alpha, DoobScaling scaling)
    : deadline_(deadline), p0d_(p0) {
  p0_ = snap_probability(p0);
  p1_ = snap_probability(p1);
  alpha_ = snap_probability(alpha);
  validate_np_inputs(p0_, p1_, deadline, alpha_);
  if (!(p1_ > p0_)) throw DomainError("upper-tail Doob: needs p1 > p0");
  const int T = deadline;
  const Rational q0 = 1 - p0_;
  h_.assign(T + 1, {});
  for (int t = 0; t <= T; ++t) h_[t].assign(t + 1, Rational(0));
  // Tail probabilities P0(S_T >= k) come from the t = 0 row for each k; find k~ first.
  const Powers pw(p0_, T), pw1(p1_, T);
  Rational tail = 0;
  k_ = T + 1;
  for (int k = T; k >= 0; --k) {
    const Rational next = tail + Rational(binomial(T, k)) * pw.atom(k, T - k);
    if (next > alpha_) break;
    tail = next;
    k_ = k;
  }
  power_ = 0;
  for (int j = k_; j <= T; ++j) power_ += Rational(binomial(T, j)) * pw1.atom(j, T - j);
  for (int s = 0; s <= T; ++s) h_[T][s] = s >= k_ ? 1 : 0;
  for (int t = T - 1; t >= 0; --t) {
    for (int s = 0; s <= t; ++s) h_[t][s] = p0_ * h_[t + 1][s + 1] + q0 * h_[t + 1][s];
  }
  null_mass_ = h_[0][0];
  hd_.assign(T + 1, {});
  evidence_.assign(T + 1, {});
  reject_.assign(T + 1, {});
  for (int t = 0; t <= T; ++t) {
    for (int s = 0; s <= t; ++s) {
      const Rational& h = h_[t][s];
      hd_[t].push_back(to_double(h));
      if (scaling == DoobScaling::Alpha) {
        evidence_[t].push_back(to_double(h / alpha_));
        reject_[t].push_back(h >= 1);
      } else if (null_mass_ == 0) {
        evidence_[t].push_back(0.0);
        reject_[t].push_back(false);
      } else {
        evidence_[t].push_back(to_double(h / null_mass_));
        reject_[t].push_back(alpha_ * h >= null_mass_);
      }
    }
  }
}

double UpperTailDoob::action(int t, int s) const {
  if (t < 1 || t > deadline_ || s < 0 || s > t - 1) throw DomainError("upper-tail action: state out of range");
  if (h_[t - 1][s] == 0) return p0d_;
  return to_double(p0_ * h_[t][s + 1] / h_[t - 1][s]);
}

namespace {

class BernoulliDoobWalker : public Walker {
 public:
  explicit BernoulliDoobWalker(std::shared_ptr<const BernoulliDoob> doob)
      : doob_(std::move(doob)), state_(doob_->initial()) {
    load();
  }
  void observe(double x) override {
    state_ = doob_->advance(state_, x == 1.0 ? 1 : 0);
    load();
  }
  double evidence() const override { return evidence_; }
  bool rejected(double) const override { return reject_; }
  bool dead() const override { return zero_; }
  std::unique_ptr<Walker> clone() const override { return std::make_unique<BernoulliDoobWalker>(*this); }
  void append_key(std::vector<std::int64_t>& key) const override {
    key.push_back(state_.s);
    for (auto st : state_.status) key.push_back(static_cast<std::int64_t>(st));
  }

 private:
  void load() {
    const BernoulliDoob::Entry& e = doob_->entry(state_);
    evidence_ = e.evidence;
    reject_ = e.reject;
    zero_ = e.h == 0;
  }
  std::shared_ptr<const BernoulliDoob> doob_;
  BernoulliDoob::State state_;
  double evidence_ = 1.0;
  bool reject_ = false;
  bool zero_ = false;
};

class UpperTailWalker : public Walker {
 public:
  explicit UpperTailWalker(std::shared_ptr<const UpperTailDoob> doob) : doob_(std::move(doob)) {}
  void observe(double x) override {
    if (t_ >= doob_->deadline()) return;
    ++t_;
    if (x == 1.0) ++s_;
  }
  double evidence() const override { return doob_->evidence(t_, s_); }
  bool rejected(double) const override { return doob_->rejects(t_, s_); }
  bool dead() const override { return doob_->h_exact(t_, s_) == 0; }
  std::unique_ptr<Walker> clone() const override { return std::make_unique<UpperTailWalker>(*this); }
  void append_key(std::vector<std::int64_t>& key) const override { key.push_back(s_); }

 private:
  std::shared_ptr<const UpperTailDoob> doob_;
  int t_ = 0;
  int s_ = 0;
};

class GaussianDoobWalker : public Walker {
 public:
  GaussianDoobWalker(const GaussianDoob* doob, double mu0, double sign) : doob_(*doob), mu0_(mu0), sign_(sign) {}
  void observe(double x) override {
    if (t_ >= doob_.deadline) return;
    ++t_;
    s_ += sign_ * (x - mu0_);
  }
  double evidence() const override { return doob_.evidence(t_, s_); }
  bool rejected(double) const override { return doob_.rejects(t_, s_); }
  bool dead() const override { return t_ >= doob_.deadline && !doob_.rejects(t_, s_); }
  std::unique_ptr<Walker> clone() const override { return std::make_unique<GaussianDoobWalker>(*this); }
  void append_key(std::vector<std::int64_t>& key) const override { key.push_back(key_bits(s_)); }

 private:
  GaussianDoob doob_;
  double mu0_;
  double sign_;
  std::int64_t t_ = 0;
  double s_ = 0.0;
};

}  // namespace

BernoulliDoobStrategy::BernoulliDoobStrategy(std::shared_ptr<const BernoulliDoob> doob, std::string name)
    : doob_(std::move(doob)), name_(std::move(name)) {}

std::unique_ptr<Walker> BernoulliDoobStrategy::start() const { return std::make_unique<BernoulliDoobWalker>(doob_); }

UpperTailStrategy::UpperTailStrategy(std::shared_ptr<const UpperTailDoob> doob, std::string name)
    : doob_(std::move(doob)), name_(std::move(name)) {}

std::unique_ptr<Walker> UpperTailStrategy::start() const { return std::make_unique<UpperTailWalker>(doob_); }

GaussianDoobStrategy::GaussianDoobStrategy(const TestingProblem& problem, std::int64_t deadline, std::string name)
    : doob_{}, name_(std::move(name)) {
  const auto* g0 = std::get_if<Gaussian>(&problem.null);
  if (!g0) throw DomainError("GaussianDoobStrategy: Gaussian problem required");
  const double delta = std::get<Gaussian>(problem.alternative).mu - g0->mu;
  doob_ = gaussian_np(g0->sigma, deadline, problem.alpha);
  mu0_ = g0->mu;
  sign_ = delta > 0.0 ? 1.0 : -1.0;
}

std::unique_ptr<Walker> GaussianDoobStrategy::start() const {
  return std::make_unique<GaussianDoobWalker>(&doob_, mu0_, sign_);
}

}  // namespace tsbet
