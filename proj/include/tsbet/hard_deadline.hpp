#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "tsbet/model.hpp"
#include "tsbet/rational.hpp"
#include "tsbet/strategy.hpp"

namespace tsbet {

// Fixed-sample Gaussian test {S_T >= c} on centred sums S_t = sum (x_i - mu0).
struct GaussianDoob {
  double sigma;
  std::int64_t deadline;
  double alpha;
  double c;

  // h_t(s) = P0(S_T >= c | S_t = s).
  double h(std::int64_t t, double s) const;
  // 1 - h_t(s), accurate when h is close to 1.
  double h_complement(std::int64_t t, double s) const;
  double evidence(std::int64_t t, double s) const { return h(t, s) / alpha; }
  // Rejection needs h_t(s) >= 1, which happens only at the deadline.
  bool rejects(std::int64_t t, double s) const { return t >= deadline && s >= c; }
};

GaussianDoob gaussian_np(double sigma, std::int64_t deadline, double alpha);

// Deterministic Neyman-Pearson event for T Bernoulli trials, described by the
// number m_k of strings taken from each level {S_T = k}. Within a level the
// first m_k strings in lexicographic order with 1 > 0 are taken.
struct NPEventBernoulli {
  int deadline = 0;
  Rational p0, p1, alpha;
  std::vector<BigInt> counts;  // m_0..m_T
  // Upper-tail summary: every level >= k is full, `r` strings come from level
  // k-1. `upper_tail_form` says whether that describes the whole event.
  int k = 0;
  BigInt r;
  bool upper_tail_form = true;
  Rational null_mass;
  Rational power;
};

// Greedy construction, valid for p0 <= 1/2 < ... and p1 > p0.
NPEventBernoulli bernoulli_np_greedy(double p0, double p1, int deadline, double alpha);

// Exact integer programme over per-level counts: greedy when it is valid,
// branch and bound over levels ordered by likelihood ratio otherwise.
NPEventBernoulli bernoulli_np_exact(double p0, double p1, int deadline, double alpha, int max_deadline = 30);

// Best event that is a union of whole levels {S_T = k}, i.e. the best
// deterministic S_T-measurable test.
NPEventBernoulli bernoulli_np_level_union(double p0, double p1, int deadline, double alpha);

// Null and alternative mass of a per-level count vector.
Rational level_mass(const std::vector<BigInt>& counts, const Rational& p, int deadline);

// The i-th (0-based) string of level L in descending lexicographic order.
std::vector<int> unrank_level_string(int deadline, int level, const BigInt& index);

// Number of level-L strings that sort strictly before every string with this prefix.
BigInt strings_before_prefix(int deadline, int level, const std::vector<int>& prefix);

enum class DoobScaling {
  NullMass,  // U_t = h_t / h_0, reject when U_t >= 1/alpha
  Alpha      // U_t = h_t / alpha, reject when h_t >= 1
};

// Doob martingale h_t = P0(Gamma | x^t) for an exact Bernoulli NP event.
class BernoulliDoob {
 public:
  enum class Status : std::uint8_t { All, None, Partial };

  struct State {
    int t = 0;
    int s = 0;
    std::vector<Status> status;  // one per partial level
  };

  struct Entry {
    Rational h;
    double value;      // h as a double
    double evidence;   // scaled e-process value
    bool reject;
  };

  BernoulliDoob(NPEventBernoulli event, DoobScaling scaling = DoobScaling::NullMass);

  const NPEventBernoulli& event() const { return event_; }
  DoobScaling scaling() const { return scaling_; }

  // Direct combinatorial evaluation for an explicit prefix.
  Rational h_prefix(const std::vector<int>& prefix) const;
  Rational evidence_prefix(const std::vector<int>& prefix) const;

  State initial() const;
  State advance(const State& state, int x) const;
  // Memoised; safe to call from several threads.
  const Entry& entry(const State& state) const;

 private:
  Rational compute(const State& state) const;

  struct Partial {
    int level;
    BigInt m;
    std::vector<int> chain;    // last included string
    int common;                // common prefix length with the first excluded string
    std::vector<BigInt> count; // included strings below chain[0..t), t <= common
  };

  NPEventBernoulli event_;
  DoobScaling scaling_;
  Rational q0_;
  std::vector<Partial> partial_;
  std::vector<int> full_levels_;
  mutable std::mutex mutex_;
  mutable std::map<std::vector<std::int64_t>, Entry> cache_;
};

// Doob process of the S_T-measurable event {S_T >= k~}.
class UpperTailDoob {
 public:
  UpperTailDoob(double p0, double p1, int deadline, double alpha, DoobScaling scaling = DoobScaling::NullMass);

  int deadline() const { return deadline_; }
  int threshold() const { return k_; }
  const Rational& null_mass() const { return null_mass_; }
  const Rational& power() const { return power_; }
  const Rational& h_exact(int t, int s) const { return h_[t][s]; }
  double h(int t, int s) const { return hd_[t][s]; }
  double evidence(int t, int s) const { return evidence_[t][s]; }
  bool rejects(int t, int s) const { return reject_[t][s]; }
  // Probability the round-t bet puts on outcome 1 given S_{t-1} = s (t >= 1).
  double action(int t, int s) const;
  double p0() const { return p0d_; }

 private:
  int deadline_;
  int k_;
  double p0d_;
  Rational p0_, p1_, alpha_;
  Rational null_mass_, power_;
  std::vector<std::vector<Rational>> h_;
  std::vector<std::vector<double>> hd_;
  std::vector<std::vector<double>> evidence_;
  std::vector<std::vector<bool>> reject_;
};

class BernoulliDoobStrategy : public Strategy {
 public:
  explicit BernoulliDoobStrategy(std::shared_ptr<const BernoulliDoob> doob, std::string name = "doob");
  std::string name() const override { return name_; }
  std::unique_ptr<Walker> start() const override;

 private:
  std::shared_ptr<const BernoulliDoob> doob_;
  std::string name_;
};

class UpperTailStrategy : public Strategy {
 public:
  explicit UpperTailStrategy(std::shared_ptr<const UpperTailDoob> doob, std::string name = "doob_upper_tail");
  std::string name() const override { return name_; }
  std::unique_ptr<Walker> start() const override;

 private:
  std::shared_ptr<const UpperTailDoob> doob_;
  std::string name_;
};

// Observations are centred at the null mean and oriented towards the alternative.
class GaussianDoobStrategy : public Strategy {
 public:
  GaussianDoobStrategy(const TestingProblem& problem, std::int64_t deadline, std::string name = "doob");
  std::string name() const override { return name_; }
  std::unique_ptr<Walker> start() const override;
  const GaussianDoob& doob() const { return doob_; }

 private:
  GaussianDoob doob_;
  double mu0_;
  double sign_;
  std::string name_;
};

}  // namespace tsbet
