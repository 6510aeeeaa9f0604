#include "tsbet/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tsbet/errors.hpp"
#include "tsbet/quadrature.hpp"

namespace tsbet {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    std::ostringstream msg;
    msg << what << ": probability " << p << " outside [0,1]";
    throw DomainError(msg.str());
  }
}

void check_action(double a, double lo, double hi, const char* family) {
  if (!(a >= lo && a <= hi)) {
    std::ostringstream msg;
    msg << family << ": action " << a << " outside [" << lo << ", " << hi << "]";
    throw DomainError(msg.str());
  }
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

// log(exp(x) + exp(y)) without overflow.
double log_add(double x, double y) {
  if (x == -std::numeric_limits<double>::infinity()) return y;
  if (y == -std::numeric_limits<double>::infinity()) return x;
  const double m = std::max(x, y);
  return m + std::log1p(std::exp(-std::abs(x - y)));
}

}  // namespace

Distribution make_bernoulli(double p) {
  check_probability(p, "Bernoulli");
  return Bernoulli{p};
}

Distribution make_gaussian(double mu, double sigma) {
  if (!std::isfinite(mu)) throw DomainError("Gaussian: mean must be finite");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("Gaussian: sigma must be positive");
  return Gaussian{mu, sigma};
}

double mean(const Distribution& d) {
  return std::visit(overloaded{[](const Bernoulli& b) { return b.p; },
                               [](const Gaussian& g) { return g.mu; }},
                    d);
}

TestingProblem make_problem(Distribution null, Distribution alternative, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
  if (null.index() != alternative.index()) {
    throw DomainError("null and alternative must be of the same distribution family");
  }
  if (const auto* b0 = std::get_if<Bernoulli>(&null)) {
    const double p0 = b0->p;
    const double p1 = std::get<Bernoulli>(alternative).p;
    check_probability(p0, "null");
    check_probability(p1, "alternative");
    if (p0 == p1) throw DomainError("alternative equals the null");
    if (p0 == 0.0 || p0 == 1.0) {
      throw DomainError("alternative is not absolutely continuous w.r.t. a degenerate null");
    }
  } else {
    const auto& g0 = std::get<Gaussian>(null);
    const auto& g1 = std::get<Gaussian>(alternative);
    make_gaussian(g0.mu, g0.sigma);
    make_gaussian(g1.mu, g1.sigma);
    if (g0.sigma != g1.sigma) throw DomainError("Gaussian null and alternative must share sigma");
    if (g0.mu == g1.mu) throw DomainError("alternative equals the null");
  }
  return TestingProblem{null, alternative, alpha};
}

bool is_bernoulli(const TestingProblem& problem) {
  return std::holds_alternative<Bernoulli>(problem.null);
}

ActionFamily default_family(const TestingProblem& problem) {
  if (const auto* b0 = std::get_if<Bernoulli>(&problem.null)) return BernoulliBet{b0->p};
  const auto& g0 = std::get<Gaussian>(problem.null);
  return GaussianShift{g0.mu, g0.sigma};
}

std::pair<double, double> action_interval(const ActionFamily& family) {
  return std::visit(
      overloaded{[](const BernoulliBet&) { return std::pair{0.0, 1.0}; },
                 [](const GaussianShift& g) { return std::pair{g.a_min, g.a_max}; },
                 [](const CoinBet& c) { return std::pair{-1.0 / (c.hi - c.m), 1.0 / (c.m - c.lo)}; }},
      family);
}

double identity_action(const ActionFamily& family) {
  return std::visit(overloaded{[](const BernoulliBet& b) { return b.p0; },
                               [](const GaussianShift&) { return 0.0; },
                               [](const CoinBet&) { return 0.0; }},
                    family);
}

std::pair<double, double> bernoulli_payoffs(double p0, double action) {
  return {(1.0 - action) / (1.0 - p0), action / p0};
}

double payoff(const ActionFamily& family, double action, double outcome) {
  return std::visit(
      overloaded{
          [&](const BernoulliBet& b) {
            check_action(action, 0.0, 1.0, "BernoulliBet");
            if (outcome != 0.0 && outcome != 1.0) throw DomainError("BernoulliBet: outcome must be 0 or 1");
            const auto [e0, e1] = bernoulli_payoffs(b.p0, action);
            return outcome == 1.0 ? e1 : e0;
          },
          [&](const GaussianShift& g) {
            check_action(action, g.a_min, g.a_max, "GaussianShift");
            const double s2 = g.sigma * g.sigma;
            return std::exp(action * (outcome - g.mu0) / s2 - action * action / (2.0 * s2));
          },
          [&](const CoinBet& c) {
            const auto [lo, hi] = action_interval(c);
            check_action(action, lo, hi, "CoinBet");
            if (!(outcome >= c.lo && outcome <= c.hi)) throw DomainError("CoinBet: outcome outside support");
            return std::max(0.0, 1.0 + action * (outcome - c.m));
          }},
      family);
}

bool null_mean_check(const ActionFamily& family, double action, const Distribution& null,
                     double tolerance, std::size_t nodes) {
  if (const auto* c = std::get_if<CoinBet>(&family)) {
    return null_mean_check(*c, action, mean(null), tolerance);
  }
  if (std::holds_alternative<BernoulliBet>(family)) {
    const auto* b = std::get_if<Bernoulli>(&null);
    if (!b) throw DomainError("null_mean_check: BernoulliBet requires a Bernoulli null");
    const double m = b->p * payoff(family, action, 1.0) + (1.0 - b->p) * payoff(family, action, 0.0);
    return m <= 1.0 + tolerance;
  }
  const auto* g = std::get_if<Gaussian>(&null);
  if (!g) throw DomainError("null_mean_check: GaussianShift requires a Gaussian null");
  const double m =
      normal_expectation([&](double x) { return payoff(family, action, x); }, g->mu, g->sigma, nodes);
  return m <= 1.0 + tolerance;
}

bool null_mean_check(const CoinBet& family, double action, double null_mean, double tolerance) {
  const auto [lo, hi] = action_interval(family);
  check_action(action, lo, hi, "CoinBet");
  return 1.0 + action * (null_mean - family.m) <= 1.0 + tolerance;
}

double ExtendedReal::value() const {
  if (kind_ != Kind::Finite) throw DomainError("ExtendedReal: value is infinite");
  return value_;
}

ExtendedReal log_growth(const TestingProblem& problem, const ActionFamily& family, double action) {
  if (const auto* g = std::get_if<GaussianShift>(&family)) {
    const auto* alt = std::get_if<Gaussian>(&problem.alternative);
    if (!alt) throw DomainError("log_growth: GaussianShift requires a Gaussian alternative");
    check_action(action, g->a_min, g->a_max, "GaussianShift");
    const double s2 = g->sigma * g->sigma;
    return ExtendedReal::finite(action * (alt->mu - g->mu0) / s2 - action * action / (2.0 * s2));
  }
  const auto* alt = std::get_if<Bernoulli>(&problem.alternative);
  if (!alt) throw DomainError("log_growth: family requires a Bernoulli alternative");
  const double p1 = alt->p;
  const double e1 = payoff(family, action, 1.0);
  const double e0 = payoff(family, action, 0.0);
  if ((p1 > 0.0 && e1 == 0.0) || (p1 < 1.0 && e0 == 0.0)) return ExtendedReal::minus_infinity();
  double g = 0.0;
  if (p1 > 0.0) g += p1 * std::log(e1);
  if (p1 < 1.0) g += (1.0 - p1) * std::log(e0);
  return ExtendedReal::finite(g);
}

double kl(const Distribution& alternative, const Distribution& null) {
  if (alternative.index() != null.index()) throw DomainError("kl: mismatched distribution families");
  if (const auto* b1 = std::get_if<Bernoulli>(&alternative)) {
    const double p1 = b1->p;
    const double p0 = std::get<Bernoulli>(null).p;
    if (p1 == p0) return 0.0;
    if ((p1 > 0.0 && p0 == 0.0) || (p1 < 1.0 && p0 == 1.0)) {
      throw InfiniteDivergence("kl: alternative not absolutely continuous w.r.t. null");
    }
    double d = 0.0;
    if (p1 > 0.0) d += p1 * std::log(p1 / p0);
    if (p1 < 1.0) d += (1.0 - p1) * std::log((1.0 - p1) / (1.0 - p0));
    return std::max(0.0, d);
  }
  const auto& g1 = std::get<Gaussian>(alternative);
  const auto& g0 = std::get<Gaussian>(null);
  const double delta = g1.mu - g0.mu;
  if (g1.sigma == g0.sigma) return delta * delta / (2.0 * g0.sigma * g0.sigma);
  const double r = g1.sigma / g0.sigma;
  return std::log(g0.sigma / g1.sigma) + (r * r + delta * delta / (g0.sigma * g0.sigma)) / 2.0 - 0.5;
}

double bernoulli_log_lr_moment(double p0, double p1, double beta) {
  // log(p1 (p1/p0)^beta + q1 (q1/q0)^beta)
  const double q0 = 1.0 - p0;
  const double q1 = 1.0 - p1;
  if ((p1 > 0.0 && p0 == 0.0) || (q1 > 0.0 && q0 == 0.0)) {
    throw InfiniteDivergence("likelihood-ratio moment is infinite");
  }
  const double l1 = p1 > 0.0 ? std::log(p1 / p0) : 0.0;
  const double l0 = q1 > 0.0 ? std::log(q1 / q0) : 0.0;
  const double spread = beta * std::max(std::abs(l1), std::abs(l0));
  if (spread < 0.5) {
    double s = 0.0;
    if (p1 > 0.0) s += p1 * std::expm1(beta * l1);
    if (q1 > 0.0) s += q1 * std::expm1(beta * l0);
    return std::log1p(s);
  }
  const double ninf = -std::numeric_limits<double>::infinity();
  const double t1 = p1 > 0.0 ? std::log(p1) + beta * l1 : ninf;
  const double t0 = q1 > 0.0 ? std::log(q1) + beta * l0 : ninf;
  return log_add(t1, t0);
}

double renyi(double order, const Distribution& alternative, const Distribution& null) {
  if (!(order > 1.0) || !std::isfinite(order)) throw DomainError("renyi: order must exceed 1");
  if (alternative.index() != null.index()) throw DomainError("renyi: mismatched distribution families");
  if (const auto* b1 = std::get_if<Bernoulli>(&alternative)) {
    const double p0 = std::get<Bernoulli>(null).p;
    return std::max(0.0, bernoulli_log_lr_moment(p0, b1->p, order - 1.0) / (order - 1.0));
  }
  const auto& g1 = std::get<Gaussian>(alternative);
  const auto& g0 = std::get<Gaussian>(null);
  const double delta = g1.mu - g0.mu;
  const double s0 = g0.sigma * g0.sigma;
  const double s1 = g1.sigma * g1.sigma;
  if (s0 == s1) return order * delta * delta / (2.0 * s0);
  const double mix = order * s0 + (1.0 - order) * s1;
  if (!(mix > 0.0)) throw InfiniteDivergence("renyi: Gaussian moment is infinite for this order");
  return order * delta * delta / (2.0 * mix) -
         std::log(mix / (std::pow(s0, 1.0 - order) * std::pow(s1, order))) / (2.0 * (order - 1.0));
}

Distribution tilt(const TestingProblem& problem, double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw DomainError("tilt: eta must lie in (0,1)");
  const double xi = 1.0 / (1.0 - eta);
  if (const auto* b1 = std::get_if<Bernoulli>(&problem.alternative)) {
    const double p1 = b1->p;
    const double p0 = std::get<Bernoulli>(problem.null).p;
    if (p1 == 0.0 || p1 == 1.0) return Bernoulli{p1};
    // logit p* = logit p1 + (xi - 1)(logit p1 - logit p0)
    const double l = logit(p1) + (eta * xi) * (logit(p1) - logit(p0));
    const double p = l >= 0.0 ? 1.0 / (1.0 + std::exp(-l)) : std::exp(l) / (1.0 + std::exp(l));
    return Bernoulli{p};
  }
  const auto& g1 = std::get<Gaussian>(problem.alternative);
  const auto& g0 = std::get<Gaussian>(problem.null);
  return Gaussian{g0.mu + (g1.mu - g0.mu) * xi, g0.sigma};
}

}  // namespace tsbet
