#pragma once

#include <optional>
#include <utility>

#include "tsbet/model.hpp"

namespace tsbet {

struct ValueBounds {
  std::optional<double> lower;  // absent when payoffs are unbounded
  double upper;
};

// Positive root of E_alt[phi^kappa] = 1 for a bet with negative drift.
struct PowerExponent {
  double kappa;
  std::optional<double> payoff_bound;  // max payoff, absent for Gaussian shifts
};

struct EdoSolution {
  double timescale;
  double eta_star;
  Distribution tilted;          // pi_star
  ActionFamily family;
  double action;                // p_star (Bernoulli) or shift (Gaussian)
  double renyi_order;           // 1 / (1 - eta_star)
  std::optional<double> payoff_bound;
  ValueBounds bounds;           // for E[exp(-tau/T)] at the problem's alpha
  double gamma;                 // drift of log-wealth under the alternative
  bool power_one;
  std::optional<PowerExponent> kappa;
  int iterations = 0;
};

EdoSolution solve_gaussian(const TestingProblem& problem, double timescale);
EdoSolution solve_bernoulli(const TestingProblem& problem, double timescale);
// Dispatches on the problem's variant.
EdoSolution solve_edo(const TestingProblem& problem, double timescale);

// ((alpha / Phi)^eta, alpha^eta).
ValueBounds value_bounds(double eta, std::optional<double> payoff_bound, double alpha);
ValueBounds value_bounds(const EdoSolution& solution, double alpha);

// Empty when gamma(action) >= 0 (power one).
std::optional<PowerExponent> power_exponent(const TestingProblem& problem, const ActionFamily& family,
                                            double action);

// ((alpha w / Phi)^kappa, (alpha w)^kappa): bounds on P(tau_w < infinity).
ValueBounds power_bounds(const PowerExponent& pe, double alpha, double wealth = 1.0);

// Likelihood-ratio bet: a = p1 (Bernoulli) or a = mu1 - mu0 (Gaussian shift).
double gro_action(const TestingProblem& problem);

// Left side of the EDO timescale equation, (1-eta) log E_alt[(dpi1/dpi0)^{eta/(1-eta)}].
double bernoulli_timescale_lhs(double p0, double p1, double eta);

// Numerical estimate of sup over eta of the left side (approached as eta -> 1).
double bernoulli_sup_lhs(double p0, double p1);

}  // namespace tsbet
