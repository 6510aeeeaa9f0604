// End-to-end acceptance checks. One PASS/FAIL line per criterion; the exit
// status is non-zero when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tsbet/baselines.hpp"
#include "tsbet/bellman.hpp"
#include "tsbet/edo.hpp"
#include "tsbet/enumeration.hpp"
#include "tsbet/errors.hpp"
#include "tsbet/hard_deadline.hpp"
#include "tsbet/quadrature.hpp"
#include "tsbet/simulate.hpp"
#include "tsbet/special_functions.hpp"

using namespace tsbet;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(const std::string& label, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s  %-34s %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", label.c_str(), o.detail.c_str(), seconds_since(t0));
  std::fflush(stdout);
}

template <class... Args>
std::string str(Args&&... args) {
  std::ostringstream s;
  s.precision(6);
  (s << ... << args);
  return s.str();
}

TestingProblem ber(double p0, double p1, double alpha) {
  return make_problem(make_bernoulli(p0), make_bernoulli(p1), alpha);
}

TestingProblem gauss(double mu, double sigma, double alpha) {
  return make_problem(make_gaussian(0.0, sigma), make_gaussian(mu, sigma), alpha);
}

std::shared_ptr<const BellmanSolution> bellman(const TestingProblem& p, const RewardSpec& r, double z_min,
                                               std::size_t points, std::size_t actions, std::int64_t H, bool capping) {
  BellmanOptions opt;
  opt.capping = capping;
  const ActionFamily f = default_family(p);
  return std::make_shared<BellmanSolution>(
      backward_induction(p, f, r, WealthGrid::log_uniform(z_min, points), default_actions(p, f, actions), H, opt));
}

// --- 1 ---------------------------------------------------------------------

Outcome np_exactness() {
  const auto t0 = Clock::now();
  const auto a = bernoulli_np_greedy(0.4, 0.6, 10, 0.05);
  const auto b = bernoulli_np_greedy(0.4, 0.6, 20, 0.05);
  const double dt = seconds_since(t0);
  const bool ok = a.k == 8 && a.r == 106 && b.k == 13 && b.r == 102809 && dt < 1.0;
  return {ok, str("T=10: k=", a.k, " r=", a.r, "; T=20: k=", b.k, " r=", b.r, "; ", dt, " s")};
}

// --- 2 ---------------------------------------------------------------------

Outcome toy_np() {
  const auto t0 = Clock::now();
  const UpperTailDoob tail(0.5, 0.75, 3, 0.25);
  const auto ev = bernoulli_np_exact(0.5, 0.75, 3, 0.25);
  const double dt = seconds_since(t0);
  const bool ok = tail.power() == Rational(27, 64) && ev.power == Rational(36, 64) && dt < 1.0;
  return {ok, str("upper tail ", to_string(tail.power() * 64), "/64, unrestricted ", to_string(ev.power * 64), "/64")};
}

// --- 3 ---------------------------------------------------------------------

Outcome gaussian_edo() {
  double worst_closed = 0.0, worst_identity = 0.0;
  int cases = 0;
  // Signal-to-noise 0.2..1 and T >= 5 keep the optimal shift within a few
  // standard deviations, where the 41-node rule is accurate.
  for (double snr : {0.2, 0.4, 0.6, 0.8, 1.0})
    for (double sigma : {0.5, 1.0, 2.0, 3.0})
      for (double T : {5.0, 10.0, 30.0, 100.0, 1000.0}) {
        ++cases;
        const double mu = snr * sigma;
        const EdoSolution s = solve_gaussian(gauss(mu, sigma, 0.05), T);
        const double s2 = sigma * sigma;
        const double eta = 2 * s2 / (mu * mu * T + 2 * s2);
        const double shift = mu + 2 * s2 / (mu * T);
        worst_closed = std::max({worst_closed, std::abs(s.eta_star - eta), std::abs(s.action - shift)});
        const double a = s.action;
        const double m = normal_expectation(
            [&](double x) { return std::exp(s.eta_star * (a * x / s2 - a * a / (2 * s2))); }, mu, sigma, 41);
        worst_identity = std::max(worst_identity, std::abs(m - std::exp(1.0 / T)));
      }
  const bool ok = cases == 100 && worst_closed <= 1e-10 && worst_identity <= 1e-8;
  return {ok, str(cases, " cases; closed-form error ", worst_closed, ", identity error ", worst_identity)};
}

// --- 4 ---------------------------------------------------------------------

Outcome bernoulli_edo() {
  double worst_identity = 0.0, worst_argmax = 0.0;
  for (auto [p0, p1] : {std::pair{0.5, 2.0 / 3.0}, {0.5, 0.7}, {0.4, 0.6}, {0.2, 0.3}})
    for (double T : {8.0, 20.0, 30.0, 100.0}) {
      EdoSolution s;
      try {
        s = solve_bernoulli(ber(p0, p1, 0.05), T);
      } catch (const NoSolution&) {
        continue;
      }
      auto objective = [&](double q) {
        return p1 * std::pow(q / p0, s.eta_star) + (1 - p1) * std::pow((1 - q) / (1 - p0), s.eta_star);
      };
      worst_identity = std::max(worst_identity, std::abs(objective(s.action) - std::exp(1.0 / T)));
      double best = -1, arg = 0;
      for (int k = 0; k <= 10000; ++k) {
        const double q = k / 10000.0;
        if (objective(q) > best) best = objective(q), arg = q;
      }
      worst_argmax = std::max(worst_argmax, std::abs(arg - s.action));
    }
  // Power one exactly when T >= 1/KL, read off the sign of gamma.
  const TestingProblem p = ber(0.5, 0.7, 0.05);
  const double boundary = 1.0 / kl(p.alternative, p.null);
  const EdoSolution below = solve_bernoulli(p, boundary * (1 - 1e-6));
  const EdoSolution above = solve_bernoulli(p, boundary * (1 + 1e-6));
  const bool sides = below.gamma < 0 && !below.power_one && above.gamma >= 0 && above.power_one;
  const bool ok = worst_identity <= 1e-8 && worst_argmax <= 1e-4 && sides;
  return {ok, str("identity error ", worst_identity, ", argmax gap ", worst_argmax, ", 1/KL = ", boundary,
                  " gamma(-) = ", below.gamma, " gamma(+) = ", above.gamma)};
}

// --- 5 ---------------------------------------------------------------------

Outcome value_sandwich() {
  const auto t0 = Clock::now();
  const TestingProblem p = ber(0.5, 2.0 / 3.0, 0.05);
  const EdoSolution s = solve_bernoulli(p, 30.0);
  SimConfig cfg;
  cfg.paths = 300000;
  cfg.horizon = 1000;
  const MonteCarloRun r = run(p, ConstantAction(default_family(p), s.action), cfg);
  const RewardEstimate e = expected_reward(r.dist, make_exponential(30));
  const double lo = *s.bounds.lower, hi = s.bounds.upper;
  const double dt = seconds_since(t0);
  const bool ok = e.estimate >= lo - 3 * e.standard_error - e.truncation_bound &&
                  e.estimate <= hi + 3 * e.standard_error && dt < 30.0;
  return {ok, str("E[exp(-tau/30)] = ", e.estimate, " +- ", e.standard_error, " in [", lo, ", ", hi, "]")};
}

// --- 6 ---------------------------------------------------------------------

Outcome power_sandwich() {
  const TestingProblem p = ber(0.5, 0.7, 0.05);
  std::ostringstream detail;
  bool ok = true;
  int below = 0;
  for (double T : {6.0, 7.0, 8.0, 9.0, 10.0}) {
    const EdoSolution s = solve_bernoulli(p, T);
    if (!s.kappa) return {false, str("T=", T, " has no kappa")};
    ++below;
    SimConfig cfg;
    cfg.paths = 5000;
    cfg.horizon = 2000;
    cfg.kappa = s.kappa->kappa;
    const MonteCarloRun r = run(p, ConstantAction(default_family(p), s.action), cfg);
    const auto [wlo, whi] = wilson_interval(r.rejections, cfg.paths);
    const ValueBounds b = power_bounds(*s.kappa, 0.05);
    const bool hit = whi + *r.kappa_tail >= *b.lower && wlo <= b.upper;
    ok = ok && hit;
    detail << "T=" << T << (hit ? " ok" : " MISS") << " ";
  }
  // Above the boundary the unstopped mass keeps shrinking with the horizon.
  // Above the boundary the unstopped mass keeps shrinking as the horizon grows.
  for (double T : {13.0, 20.0, 30.0}) {
    const EdoSolution s = solve_bernoulli(p, T);
    bool shrinking = s.power_one;
    double first = -1.0, prev = 2.0;
    detail << "T=" << T << " unstopped";
    for (std::int64_t H : {250, 1000, 4000, 16000}) {
      SimConfig cfg;
      cfg.paths = 5000;
      cfg.horizon = H;
      const double never = run(p, ConstantAction(default_family(p), s.action), cfg).dist.never_mass;
      if (first < 0) first = never;
      shrinking = shrinking && (never < prev || never == 0.0);
      prev = never;
      detail << " " << never;
    }
    shrinking = shrinking && (prev == 0.0 || prev < first / 4);
    ok = ok && shrinking;
    detail << (shrinking ? "; " : " MISS; ");
  }
  return {ok && below == 5, detail.str()};
}

// --- 7 ---------------------------------------------------------------------

// Exact game value over every Markov action assignment, on exact wealths.
double tree_value(double p0, double p1, double z, int t, int H, const std::vector<double>& acts, const RewardSpec& r,
                  bool capping) {
  if (t >= H || z <= 0.0) return 0.0;
  double best = 0.0;
  for (double a : acts) {
    auto [e0, e1] = bernoulli_payoffs(p0, a);
    if (capping) std::tie(e0, e1) = apply_capping(p0, e0, e1, z);
    double v = 0.0;
    for (auto [prob, zc] : {std::pair{p1, z * e1}, {1 - p1, z * e0}})
      v += prob * (crosses_boundary(zc) ? evaluate(r, t + 1) : tree_value(p0, p1, zc, t + 1, H, acts, r, capping));
    best = std::max(best, v);
  }
  return best;
}

void reachable(double p0, double z, int depth, const std::vector<double>& acts, bool capping, std::set<double>& out) {
  if (depth == 0 || z <= 0.0 || crosses_boundary(z)) return;
  out.insert(z);
  for (double a : acts) {
    auto [e0, e1] = bernoulli_payoffs(p0, a);
    if (capping) std::tie(e0, e1) = apply_capping(p0, e0, e1, z);
    reachable(p0, z * e0, depth - 1, acts, capping, out);
    reachable(p0, z * e1, depth - 1, acts, capping, out);
  }
}

Outcome bellman_oracle() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int instances = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 60; ++trial) {
    const double p0 = 0.15 + 0.6 * u(rng);
    const double p1 = p0 + (0.97 - p0) * (0.1 + 0.9 * u(rng));
    const int H = 2 + trial % 2;
    const bool capping = trial % 3 == 2;
    const auto acts = linear_actions(p0, 1.0, 3 + trial % 7);
    const TestingProblem p = ber(p0, p1, 0.2);
    const RewardSpec r = trial % 2 ? make_exponential(0.5 + 4 * u(rng)) : make_hard_deadline(H);
    const double z0 = 0.02 + 0.9 * u(rng);
    std::set<double> nodes;
    reachable(p0, z0, H, acts, capping, nodes);
    if (nodes.size() < 2) nodes.insert(z0 / 2);
    const WealthGrid g = WealthGrid::from_nodes({nodes.begin(), nodes.end()});
    BellmanOptions opt;
    opt.capping = capping;
    const BellmanSolution s = backward_induction(p, default_family(p), r, g, acts, H, opt);
    const auto i = static_cast<std::size_t>(std::find(g.nodes().begin(), g.nodes().end(), z0) - g.nodes().begin());
    const double diff = std::abs(s.values.value[0][i] - tree_value(p0, p1, z0, 0, H, acts, r, capping));
    worst = std::max(worst, diff);
    ++instances;
  }
  return {instances >= 50 && worst <= 1e-12, str(instances, " instances, max |V - oracle| = ", worst)};
}

// --- 8 ---------------------------------------------------------------------

Outcome fig3_closeness() {
  const auto t0 = Clock::now();
  const TestingProblem p = ber(0.5, 2.0 / 3.0, 0.05);
  const EdoSolution s = solve_bernoulli(p, 30.0);
  const auto sol = bellman(p, make_exponential(30), 1e-10, 401, 401, 180, true);
  SimConfig cfg;
  cfg.paths = 300000;
  cfg.horizon = 180;
  const auto capped = std::make_shared<CappedConstant>(p, s.action, "capped_edo");
  const auto policy = std::make_shared<PolicyStrategy>(sol, "bellman");
  const Comparison c = compare(p, {capped, policy}, cfg, {make_exponential(30)});
  const double sup = cdf_sup_distance(c.rows[0].run.dist, c.rows[1].run.dist, 120);
  const auto fa = c.rows[0].run.dist.cdf(), fb = c.rows[1].run.dist.cdf();
  std::int64_t at = 1;
  for (std::int64_t t = 1; t <= 120; ++t)
    if (std::abs(fa[t] - fb[t]) == sup) at = t;
  // Lattice diagnostic: rounds each strategy needs on a run of successes.
  auto rounds_on_ones = [](const Strategy& st) {
    auto w = st.start();
    for (int t = 1; t <= 60; ++t) {
      w->observe(1.0);
      if (w->rejected(0.05)) return t;
    }
    return -1;
  };
  const int r_edo = rounds_on_ones(*capped), r_bell = rounds_on_ones(*policy);
  const double dt = seconds_since(t0);
  return {sup <= 0.02 && dt < 120.0,
          str("sup |F_capped_edo - F_bellman| = ", sup, " at t=", at, " (threshold 0.02); rewards ",
              c.rows[0].rewards[0].estimate, " vs ", c.rows[1].rewards[0].estimate, ", DP start value ",
              sol->grid.interpolate(sol->values.value[0], 0.05), "; all-ones rejection round: capped EDO ", r_edo,
              ", Bellman ", r_bell, " (mass (2/3)^", r_bell, " = ", std::pow(2.0 / 3.0, r_bell), ")")};
}

// --- 9 ---------------------------------------------------------------------

Outcome validity() {
  std::ostringstream detail;
  bool ok = true;
  double worst_exact = 0.0;
  int exact_count = 0;
  for (const TestingProblem& p : {ber(0.4, 0.6, 0.05), ber(0.5, 2.0 / 3.0, 0.05)}) {
    const double p0 = std::get<Bernoulli>(p.null).p, p1 = std::get<Bernoulli>(p.alternative).p;
    const ActionFamily f = default_family(p);
    const double edo = solve_bernoulli(p, 30.0).action;
    std::vector<StrategyPtr> all{
        std::make_shared<ConstantAction>(f, p1, "gro"),
        std::make_shared<ConstantAction>(f, edo, "edo"),
        std::make_shared<CappedConstant>(p, edo, "capped_edo"),
        std::make_shared<PolicyStrategy>(bellman(p, make_exponential(30), 1e-10, 201, 201, 60, true), "bellman_exp"),
        std::make_shared<PolicyStrategy>(bellman(p, make_hard_deadline(20), 1e-10, 201, 201, 20, false), "bellman_hd"),
        std::make_shared<BernoulliDoobStrategy>(std::make_shared<BernoulliDoob>(bernoulli_np_exact(p0, p1, 20, 0.05))),
        std::make_shared<UpperTailStrategy>(std::make_shared<UpperTailDoob>(p0, p1, 20, 0.05)),
        std::make_shared<StarBets>(p, 20),
        std::make_shared<ScheduleMix>(p, 20)};
    for (const auto& s : all) {
      const double null = exact_stopping_distribution(p, *s, 20).null.rejection_probability();
      worst_exact = std::max(worst_exact, null);
      ++exact_count;
      if (null > 0.05 + 1e-12) {
        ok = false;
        detail << s->name() << "=" << null << " ";
      }
    }
  }
  // Gaussian strategies by Monte Carlo under the null.
  const TestingProblem g = gauss(0.6, 1.0, 0.05);
  const ActionFamily gf = default_family(g);
  std::vector<StrategyPtr> gs{std::make_shared<ConstantAction>(gf, 0.6, "gro"),
                              std::make_shared<ConstantAction>(gf, solve_gaussian(g, 10.0).action, "edo"),
                              std::make_shared<PolicyStrategy>(bellman(g, make_logistic(30, 2), 1e-8, 201, 201, 80, false)),
                              std::make_shared<GaussianDoobStrategy>(g, 30)};
  double worst_mc = 0.0;
  for (const auto& s : gs) {
    SimConfig cfg;
    cfg.paths = 100000;
    cfg.horizon = 200;
    cfg.measure = Measure::Null;
    const MonteCarloRun r = run(g, *s, cfg);
    const double rate = static_cast<double>(r.rejections) / cfg.paths;
    worst_mc = std::max(worst_mc, rate);
    if (rate > 0.05 + 3 * std::sqrt(0.05 * 0.95 / cfg.paths)) {
      ok = false;
      detail << "gaussian " << s->name() << "=" << rate << " ";
    }
  }
  detail << exact_count << " exact Bernoulli checks (max null rejection " << worst_exact << "), 4 Gaussian MC (max "
         << worst_mc << ")";
  return {ok, detail.str()};
}

// --- 10 --------------------------------------------------------------------

Outcome gaussian_doob() {
  const GaussianDoob d = gaussian_np(1.0, 30, 0.05);
  // 1 - h comes from the complementary tail; h itself rounds to 1 far out.
  // Beyond |s| = 40 the gap at t = 29 drops below the smallest double.
  double least_gap = 1.0;
  bool early = false;
  for (std::int64_t t = 0; t < 30; ++t)
    for (double s = -40.0; s <= 40.0; s += 0.01) {
      least_gap = std::min(least_gap, d.h_complement(t, s));
      early = early || d.rejects(t, s);
    }
  const double terminal = normal_sf(d.c / std::sqrt(30.0));
  const bool ok = least_gap > 0.0 && !early && std::abs(terminal - 0.05) <= 1e-10;
  return {ok, str("min 1 - h_t(s) over t<30, |s|<=40: ", least_gap, ", early rejection: ", early ? "yes" : "no",
                  "; P0(S_30 >= c) - alpha = ", terminal - 0.05, " (c = ", d.c, ")")};
}

// --- 11 --------------------------------------------------------------------

Outcome doob_dominance() {
  const TestingProblem p = ber(0.4, 0.6, 0.05);
  const ActionFamily f = default_family(p);
  std::ostringstream detail;
  bool ok = true;
  for (int T : {10, 25}) {
    const auto ev = bernoulli_np_exact(0.4, 0.6, T, 0.05);
    const double np = to_double(ev.power);
    const auto doob = std::make_shared<BernoulliDoobStrategy>(std::make_shared<BernoulliDoob>(ev), "doob");
    const double edo = solve_bernoulli(p, static_cast<double>(T)).action;
    std::vector<StrategyPtr> others{
        std::make_shared<ConstantAction>(f, 0.6, "gro"),
        std::make_shared<ConstantAction>(f, edo, "edo"),
        std::make_shared<CappedConstant>(p, edo, "capped_edo"),
        std::make_shared<PolicyStrategy>(bellman(p, make_hard_deadline(T), 1e-10, 401, 401, T, false), "bellman_hd"),
        std::make_shared<UpperTailStrategy>(std::make_shared<UpperTailDoob>(0.4, 0.6, T, 0.05)),
        std::make_shared<StarBets>(p, T),
        std::make_shared<ScheduleMix>(p, T)};
    const double attained = exact_stopping_distribution(p, *doob, T).alternative.cdf_at(T);
    ok = ok && std::abs(attained - np) <= 1e-12;
    double best_other = 0.0;
    std::string best_name;
    for (const auto& s : others) {
      const double v = exact_stopping_distribution(p, *s, T).alternative.cdf_at(T);
      if (v > best_other) best_other = v, best_name = s->name();
      if (!(v < np)) ok = false;
    }
    detail << "T=" << T << ": NP " << np << ", best other " << best_name << " " << best_other << "; ";
  }
  return {ok, detail.str()};
}

// --- Figure 1 ----------------------------------------------------------------

Outcome fig1_trends() {
  const TestingProblem g = gauss(0.6, 1.0, 0.05);
  const auto hd = bellman(g, make_hard_deadline(30), 1e-8, 401, 401, 150, false);
  const auto ex = bellman(g, make_exponential(10), 1e-8, 401, 401, 150, false);
  const auto lg = bellman(g, make_logistic(30, 2), 1e-8, 401, 401, 150, false);
  const std::size_t n = hd->grid.size();
  const double step = (hd->actions.back() - hd->actions.front()) / static_cast<double>(hd->actions.size() - 1);

  // Hard deadline: for wealth with a live chance, the bet grows towards T.
  auto aggressive = [&](const BellmanSolution& s, std::size_t early, std::size_t late) {
    int live = 0, up = 0;
    double mean_early = 0.0, mean_late = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (s.values.value[late][i] < 1e-6) continue;
      ++live;
      up += s.policy.action[late][i] >= s.policy.action[early][i] - 1e-12;
      mean_early += s.policy.action[early][i];
      mean_late += s.policy.action[late][i];
    }
    return std::tuple{live, live ? static_cast<double>(up) / live : 0.0, live ? (mean_late - mean_early) / live : 0.0};
  };
  const auto [hd_live, hd_frac, hd_gain] = aggressive(*hd, 0, 29);
  const auto [lg_live, lg_frac, lg_gain] = aggressive(*lg, 0, 29);
  // Exponential: rows far from the horizon barely move.
  int stationary = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double spread = 0.0;
    for (std::size_t t = 1; t <= 50; ++t) spread = std::max(spread, std::abs(ex->policy.action[t][i] - ex->policy.action[0][i]));
    stationary += spread <= step + 1e-12;
  }
  const double stat_frac = static_cast<double>(stationary) / static_cast<double>(n);
  // Hopeless region: nothing to gain after the deadline.
  bool hopeless = true;
  for (std::size_t t = 30; t < 150; ++t)
    for (double v : hd->values.value[t]) hopeless = hopeless && v == 0.0;
  const bool ok = hd_live > 0 && hd_frac >= 0.9 && hd_gain > 0.0 && lg_frac >= 0.9 && lg_gain > 0.0 &&
                  stat_frac >= 0.95 && hopeless;
  return {ok, str("deadline: ", hd_frac * 100, "% of live nodes bet more at t=29 (mean +", hd_gain, "); logistic: ",
                  lg_frac * 100, "% (+", lg_gain, "); exponential rows 0..50 within one action step at ", stat_frac * 100,
                  "% of nodes; hopeless after T: ", hopeless ? "yes" : "no")};
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  report("1  NP event exactness", np_exactness);
  report("2  toy Neyman-Pearson powers", toy_np);
  report("3  Gaussian EDO closed forms", gaussian_edo);
  report("4  Bernoulli EDO identity", bernoulli_edo);
  report("5  reward sandwich (T=30)", value_sandwich);
  report("6  power sandwich (Fig. 5)", power_sandwich);
  report("7  Bellman exhaustive oracle", bellman_oracle);
  report("8  Fig. 3 capped EDO vs Bellman", fig3_closeness);
  report("9  validity suite", validity);
  report("10 Gaussian Doob", gaussian_doob);
  report("11 Doob dominance", doob_dominance);
  report("Fig. 1 policy trends", fig1_trends);
  std::printf("%d criteria failed, total %.1f s\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
