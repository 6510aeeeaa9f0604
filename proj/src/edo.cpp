#include "tsbet/edo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tsbet/errors.hpp"
#include "tsbet/root_finding.hpp"

namespace tsbet {

namespace {

constexpr double kEtaLo = 1e-9;
constexpr double kEtaHi = 1.0 - 1e-9;
constexpr double kEtaTol = 1e-12;

void check_timescale(double timescale) {
  if (!(timescale > 0.0) || std::isnan(timescale)) throw DomainError("EDO: timescale must be positive");
}

}  // namespace

double bernoulli_timescale_lhs(double p0, double p1, double eta) {
  return (1.0 - eta) * bernoulli_log_lr_moment(p0, p1, eta / (1.0 - eta));
}

double bernoulli_sup_lhs(double p0, double p1) {
  // Non-decreasing in eta; scan a log-spaced grid of 1 - eta down to 1e-15.
  double best = 0.0;
  for (int k = 1; k <= 150; ++k) {
    const double gap = std::pow(10.0, -0.1 * k);
    best = std::max(best, bernoulli_timescale_lhs(p0, p1, 1.0 - gap));
  }
  return best;
}

EdoSolution solve_gaussian(const TestingProblem& problem, double timescale) {
  check_timescale(timescale);
  const auto* g0 = std::get_if<Gaussian>(&problem.null);
  if (!g0) throw DomainError("solve_gaussian: Gaussian problem required");
  const auto& g1 = std::get<Gaussian>(problem.alternative);
  const double delta = g1.mu - g0->mu;
  if (delta == 0.0) throw DomainError("solve_gaussian: degenerate alternative (mu = 0)");
  const double s2 = g0->sigma * g0->sigma;
  EdoSolution sol{};
  sol.timescale = timescale;
  sol.eta_star = 2.0 * s2 / (delta * delta * timescale + 2.0 * s2);
  sol.renyi_order = 1.0 + 2.0 * s2 / (delta * delta * timescale);
  sol.action = delta + 2.0 * s2 / (delta * timescale);
  sol.tilted = Gaussian{g0->mu + sol.action, g0->sigma};
  sol.family = GaussianShift{g0->mu, g0->sigma, std::min(0.0, sol.action), std::max(4.0, sol.action)};
  sol.payoff_bound = std::nullopt;
  sol.bounds = value_bounds(sol.eta_star, std::nullopt, problem.alpha);
  sol.gamma = (sol.action * delta - 0.5 * sol.action * sol.action) / s2;
  sol.power_one = timescale >= 2.0 * s2 / (delta * delta);
  sol.kappa = power_exponent(problem, sol.family, sol.action);
  return sol;
}

EdoSolution solve_bernoulli(const TestingProblem& problem, double timescale) {
  check_timescale(timescale);
  const auto* b0 = std::get_if<Bernoulli>(&problem.null);
  if (!b0) throw DomainError("solve_bernoulli: Bernoulli problem required");
  const double p0 = b0->p;
  const double p1 = std::get<Bernoulli>(problem.alternative).p;
  const double target = 1.0 / timescale;
  auto f = [&](double eta) { return bernoulli_timescale_lhs(p0, p1, eta) - target; };

  if (f(kEtaHi) < 0.0) {
    const double sup = bernoulli_sup_lhs(p0, p1);
    std::ostringstream msg;
    msg << "EDO equation has no solution: 1/T = " << target << " exceeds sup G ~ " << sup
        << "; feasible timescales are T > " << 1.0 / sup;
    throw NoSolution(msg.str(), 1.0 / sup);
  }
  double lo = kEtaLo;
  // Very long timescales put the root below the default bracket.
  while (f(lo) > 0.0) {
    lo *= 1e-3;
    if (lo < 1e-300) throw SolverError("EDO: could not bracket eta from below");
  }
  const RootResult root = bracketed_root(f, lo, kEtaHi, std::min(kEtaTol, 1e-3 * lo));

  EdoSolution sol{};
  sol.timescale = timescale;
  sol.eta_star = root.root;
  sol.iterations = root.iterations;
  sol.renyi_order = 1.0 / (1.0 - sol.eta_star);
  sol.tilted = tilt(problem, sol.eta_star);
  sol.action = std::get<Bernoulli>(sol.tilted).p;
  sol.family = BernoulliBet{p0};
  const auto [e0, e1] = bernoulli_payoffs(p0, sol.action);
  sol.payoff_bound = std::max(e0, e1);
  sol.bounds = value_bounds(sol.eta_star, sol.payoff_bound, problem.alpha);
  const ExtendedReal g = log_growth(problem, sol.family, sol.action);
  sol.gamma = g.is_finite() ? g.value() : -INFINITY;
  sol.power_one = timescale >= 1.0 / kl(problem.alternative, problem.null);
  sol.kappa = power_exponent(problem, sol.family, sol.action);
  return sol;
}

EdoSolution solve_edo(const TestingProblem& problem, double timescale) {
  return is_bernoulli(problem) ? solve_bernoulli(problem, timescale) : solve_gaussian(problem, timescale);
}

ValueBounds value_bounds(double eta, std::optional<double> payoff_bound, double alpha) {
  ValueBounds b;
  b.upper = std::pow(alpha, eta);
  if (payoff_bound && std::isfinite(*payoff_bound) && *payoff_bound > 0.0) {
    b.lower = std::pow(alpha / *payoff_bound, eta);
  }
  return b;
}

ValueBounds value_bounds(const EdoSolution& solution, double alpha) {
  return value_bounds(solution.eta_star, solution.payoff_bound, alpha);
}

std::optional<PowerExponent> power_exponent(const TestingProblem& problem, const ActionFamily& family,
                                            double action) {
  const ExtendedReal gamma = log_growth(problem, family, action);
  if (gamma.is_finite() && gamma.value() >= 0.0) return std::nullopt;

  if (const auto* g = std::get_if<GaussianShift>(&family)) {
    // E[exp(k(a(X-mu0)/s^2 - a^2/(2s^2)))] = exp(k a (2 delta - a + k a) / (2 s^2)) under N(mu1, s^2)
    const double delta = std::get<Gaussian>(problem.alternative).mu - g->mu0;
    return PowerExponent{1.0 - 2.0 * delta / action, std::nullopt};
  }

  const double p1 = std::get<Bernoulli>(problem.alternative).p;
  const double e1 = payoff(family, action, 1.0);
  const double e0 = payoff(family, action, 0.0);
  auto moment = [&](double k) {
    // log E_alt[phi^k]; zero payoffs contribute nothing for k > 0.
    const double ninf = -INFINITY;
    const double t1 = (p1 > 0.0 && e1 > 0.0) ? std::log(p1) + k * std::log(e1) : ninf;
    const double t0 = (p1 < 1.0 && e0 > 0.0) ? std::log1p(-p1) + k * std::log(e0) : ninf;
    const double m = std::max(t1, t0);
    if (m == ninf) return ninf;
    return m + std::log(std::exp(t1 - m) + std::exp(t0 - m));
  };
  double lo = 1e-9;
  double hi = 64.0;
  if (!(moment(lo) < 0.0)) throw SolverError("power_exponent: moment not below 1 near kappa = 0");
  int doublings = 0;
  while (moment(hi) < 0.0) {
    hi *= 2.0;
    if (++doublings > 60) {
      std::ostringstream msg;
      msg << "power_exponent: no root of E[phi^kappa] = 1 found below kappa = " << hi;
      throw SolverError(msg.str());
    }
  }
  const RootResult r = bracketed_root(moment, lo, hi, 1e-14);
  const double bound = std::max(e0, e1);
  return PowerExponent{r.root, bound};
}

ValueBounds power_bounds(const PowerExponent& pe, double alpha, double wealth) {
  ValueBounds b;
  b.upper = std::min(1.0, std::pow(alpha * wealth, pe.kappa));
  if (pe.payoff_bound) b.lower = std::min(1.0, std::pow(alpha * wealth / *pe.payoff_bound, pe.kappa));
  return b;
}

double gro_action(const TestingProblem& problem) {
  if (const auto* b1 = std::get_if<Bernoulli>(&problem.alternative)) return b1->p;
  return std::get<Gaussian>(problem.alternative).mu - std::get<Gaussian>(problem.null).mu;
}

}  // namespace tsbet
