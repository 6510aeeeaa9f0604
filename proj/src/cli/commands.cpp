#include <chrono>
#include <cmath>
#include <iostream>

#include <CLI11.hpp>

#include "tsbet/cli.hpp"
#include "tsbet/edo.hpp"
#include "tsbet/enumeration.hpp"
#include "tsbet/errors.hpp"
#include "tsbet/special_functions.hpp"

namespace tsbet::cli {

namespace {

Json describe(const Distribution& d) {
  if (const auto* b = std::get_if<Bernoulli>(&d)) return Json{{"model", "bernoulli"}, {"p", b->p}};
  const auto& g = std::get<Gaussian>(d);
  return Json{{"model", "gaussian"}, {"mu", g.mu}, {"sigma", g.sigma}};
}

Json optional_number(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

Json exact(const Rational& r) { return Json{{"exact", to_string(r)}, {"value", to_double(r)}}; }

std::string safe_stem(const std::string& name) {
  std::string out;
  for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.') ? c : '_';
  return out;
}

std::vector<Row> distribution_rows(const StoppingDistribution& d) {
  std::vector<Row> rows;
  const auto cdf = d.cdf();
  for (std::int64_t t = 1; t <= d.horizon; ++t) rows.push_back({t, d.mass[t], cdf[t], d.se[t]});
  return rows;
}

}  // namespace

int cmd_edo(const ExperimentConfig& cfg, OutputDir& out) {
  if (cfg.edo_timescales.empty()) throw UsageError("edo: no timescales (set edo.timescales or an exponential reward)");
  const TestingProblem& problem = cfg.problem;
  const double divergence = kl(problem.alternative, problem.null);
  const double gro = gro_action(problem);
  Json reports = Json::array();
  std::vector<Row> rows;
  for (double T : cfg.edo_timescales) {
    const EdoSolution sol = solve_edo(problem, T);
    Json power = nullptr;
    std::optional<double> plo, phi;
    if (sol.kappa) {
      const ValueBounds pb = power_bounds(*sol.kappa, problem.alpha);
      plo = pb.lower;
      phi = pb.upper;
      power = Json{{"kappa", sol.kappa->kappa}, {"lower", optional_number(pb.lower)}, {"upper", pb.upper}};
    }
    reports.push_back(Json{{"timescale", T},
                           {"eta_star", sol.eta_star},
                           {"renyi_order", sol.renyi_order},
                           {"action", sol.action},
                           {"tilted", describe(sol.tilted)},
                           {"payoff_bound", optional_number(sol.payoff_bound)},
                           {"value_bounds", {{"lower", optional_number(sol.bounds.lower)}, {"upper", sol.bounds.upper}}},
                           {"gamma", sol.gamma},
                           {"power_one", sol.power_one},
                           {"power_one_threshold", 1.0 / divergence},
                           {"power", power},
                           {"gro", {{"action", gro}, {"log_growth", divergence}, {"distance", std::abs(sol.action - gro)}}},
                           {"iterations", sol.iterations}});
    rows.push_back({T, sol.eta_star, sol.action, gro, sol.gamma, sol.power_one,
                    sol.kappa ? Json(sol.kappa->kappa) : Json(nullptr), optional_number(sol.bounds.lower),
                    sol.bounds.upper, optional_number(plo), optional_number(phi)});
  }
  out.write_json("edo_report", Json{{"kl", divergence}, {"solutions", reports}});
  out.write_table("edo", {"timescale", "eta_star", "action", "gro_action", "gamma", "power_one", "kappa",
                          "value_lower", "value_upper", "power_lower", "power_upper"},
                  rows);
  return 0;
}

int cmd_bellman(const ExperimentConfig& cfg, OutputDir& out) {
  if (cfg.rewards.empty()) throw UsageError("bellman: the config lists no rewards");
  const WealthGrid grid = WealthGrid::log_uniform(cfg.solver.z_min, cfg.solver.grid_points);
  const auto actions = default_actions(cfg.problem, cfg.family, cfg.solver.actions);
  BellmanOptions opt;
  opt.capping = cfg.solver.capping;
  opt.quadrature_nodes = cfg.solver.quadrature_nodes;
  opt.workers = cfg.solver.workers;
  const double log_alpha = std::log(cfg.problem.alpha);

  std::vector<double> log_wealth;
  for (double z : grid.nodes()) log_wealth.push_back(std::log(z) - log_alpha);

  for (const auto& reward : cfg.rewards) {
    const std::int64_t H = cfg.solver.horizon > 0 ? cfg.solver.horizon : solver_horizon(reward.spec, cfg.solver.epsilon);
    const BellmanSolution sol = backward_induction(cfg.problem, cfg.family, reward.spec, grid, actions, H, opt);
    std::vector<Row> rows;
    Json hopeless = Json::array();
    for (std::int64_t t = 0; t < H; ++t) {
      // Nothing rejected from round t+1 on earns a reward.
      const bool dead = evaluate(reward.spec, t + 1) == 0.0;
      hopeless.push_back(dead);
      const auto& v = sol.values.value[t];
      const auto& a = sol.policy.action[t];
      for (std::size_t i = 0; i < grid.size(); ++i)
        rows.push_back({t, grid.nodes()[i], log_wealth[i], v[i], a[i], dead});
    }
    const std::string stem = safe_stem(reward.name);
    out.write_table("bellman_" + stem, {"t", "z", "log_wealth", "value", "action", "hopeless"}, rows);
    out.write_json("heatmap_" + stem, Json{{"reward", reward.name},
                                           {"reward_description", describe(reward.spec)},
                                           {"horizon", H},
                                           {"alpha", cfg.problem.alpha},
                                           {"z", grid.nodes()},
                                           {"log_wealth", log_wealth},
                                           {"action", sol.policy.action},
                                           {"value", std::vector<std::vector<double>>(sol.values.value.begin(),
                                                                                     sol.values.value.end() - 1)},
                                           {"hopeless", hopeless},
                                           {"start_value", grid.interpolate(sol.values.value[0], cfg.problem.alpha)}});
  }
  return 0;
}

namespace {

std::vector<Row> exact_rows(const ExactStopping& ex) {
  std::vector<Row> rows;
  const auto ca = ex.alternative.cdf();
  const auto cn = ex.null.cdf();
  for (std::int64_t t = 1; t <= ex.alternative.horizon; ++t)
    rows.push_back({t, ex.alternative.mass[t], ca[t], ex.null.mass[t], cn[t]});
  return rows;
}

const std::vector<std::string> kExactHeader{"round", "mass", "cdf", "null_mass", "null_cdf"};

Json bernoulli_doob_report(const ExperimentConfig& cfg, std::int64_t T, OutputDir& out) {
  const TestingProblem& problem = cfg.problem;
  const double p0 = std::get<Bernoulli>(problem.null).p, p1 = std::get<Bernoulli>(problem.alternative).p;
  const int deadline = static_cast<int>(T);
  NPEventBernoulli ev = bernoulli_np_exact(p0, p1, deadline, problem.alpha);
  const NPEventBernoulli levels = bernoulli_np_level_union(p0, p1, deadline, problem.alpha);
  const UpperTailDoob tail(p0, p1, deadline, problem.alpha, cfg.doob.scaling);
  Json counts = Json::array();
  for (const auto& c : ev.counts) counts.push_back(c.str());
  Json taken = Json::array();
  for (int k = 0; k <= deadline; ++k)
    if (levels.counts[k] != 0) taken.push_back(k);

  auto doob = std::make_shared<const BernoulliDoob>(ev, cfg.doob.scaling);
  const BernoulliDoobStrategy strategy(doob, "doob");
  const std::int64_t horizon = cfg.doob.stopping_horizon > 0 ? cfg.doob.stopping_horizon : T;
  EnumerationOptions eopt;
  eopt.workers = cfg.solver.workers;
  const ExactStopping ex = exact_stopping_distribution(problem, strategy, horizon, eopt);
  out.write_table("doob_T" + std::to_string(T), kExactHeader, exact_rows(ex));

  double early = 0.0;
  std::int64_t first = 0;
  for (std::int64_t t = 1; t < std::min(T, horizon + 1); ++t) {
    early += ex.alternative.mass[t];
    if (first == 0 && ex.alternative.mass[t] > 0.0) first = t;
  }
  if (first == 0)
    for (std::int64_t t = T; t <= horizon; ++t)
      if (ex.alternative.mass[t] > 0.0) {
        first = t;
        break;
      }

  Json report{{"deadline", T},
              {"k", ev.k},
              {"r", ev.r.str()},
              {"upper_tail_form", ev.upper_tail_form},
              {"counts", counts},
              {"null_mass", exact(ev.null_mass)},
              {"power", exact(ev.power)},
              {"upper_tail", {{"threshold", tail.threshold()}, {"null_mass", exact(tail.null_mass())}, {"power", exact(tail.power())}}},
              {"level_union", {{"levels", taken}, {"null_mass", exact(levels.null_mass)}, {"power", exact(levels.power)}}},
              {"scaling", cfg.doob.scaling == DoobScaling::NullMass ? "null_mass" : "alpha"},
              {"stopping_horizon", horizon},
              {"early_rejection_possible", early > 0.0},
              {"early_rejection_mass", early},
              {"first_rejection_round", first},
              {"deadline_rejection_probability", ex.alternative.cdf_at(std::min(T, horizon))},
              {"null_rejection_probability", ex.null.rejection_probability()}};

  if (cfg.doob.compare_gro) {
    const ConstantAction gro(cfg.family, gro_action(problem), "gro");
    const ExactStopping gx = exact_stopping_distribution(problem, gro, horizon, eopt);
    out.write_table("gro_T" + std::to_string(T), kExactHeader, exact_rows(gx));
    report["gro_deadline_rejection_probability"] = gx.alternative.cdf_at(std::min(T, horizon));
  }
  return report;
}

Json gaussian_doob_report(const ExperimentConfig& cfg, std::int64_t T, OutputDir& out) {
  const auto& g0 = std::get<Gaussian>(cfg.problem.null);
  const auto& g1 = std::get<Gaussian>(cfg.problem.alternative);
  const GaussianDoob g = gaussian_np(g0.sigma, T, cfg.problem.alpha);
  const double scale = g0.sigma * std::sqrt(static_cast<double>(T));
  const double shift = std::abs(g1.mu - g0.mu) * static_cast<double>(T);
  const double power = normal_sf((g.c - shift) / scale);
  std::vector<Row> rows;
  for (std::int64_t t = 1; t <= T; ++t) {
    const double m = t == T ? power : 0.0;
    const double n = t == T ? cfg.problem.alpha : 0.0;
    rows.push_back({t, m, m, n, n});
  }
  out.write_table("doob_T" + std::to_string(T), kExactHeader, rows);
  return Json{{"deadline", T},
              {"threshold", g.c},
              {"null_rejection_probability", normal_sf(g.c / scale)},
              {"power", power},
              {"early_rejection_possible", false},
              {"note", "no early rejection possible: h_t(s) < 1 for every t < T"}};
}


Json run_summary(const ComparisonRow& row, const std::vector<NamedReward>& rewards) {
  const auto& r = row.run;
  const auto [lo, hi] = wilson_interval(r.rejections, r.dist.paths);
  Json means = Json::array();
  for (const auto& m : r.stopped_means) means.push_back({{"t", m.t}, {"mean", m.mean}, {"se", m.standard_error}});
  Json rw = Json::object();
  for (std::size_t j = 0; j < rewards.size(); ++j)
    rw[rewards[j].name] = {{"estimate", row.rewards[j].estimate},
                           {"se", row.rewards[j].standard_error},
                           {"truncation_bound", row.rewards[j].truncation_bound}};
  return Json{{"paths", r.dist.paths},
              {"rejections", r.rejections},
              {"rejection_probability", r.dist.rejection_probability()},
              {"wilson_95", {lo, hi}},
              {"never_mass", r.dist.never_mass},
              {"stopped_means", means},
              {"kappa_tail", optional_number(r.kappa_tail)},
              {"rewards", rw}};
}

void emit_comparison(const ExperimentConfig& cfg, const Comparison& cmp, bool per_strategy, OutputDir& out) {
  std::vector<Row> long_rows, reward_rows;
  Json summary = Json::object();
  for (const auto& row : cmp.rows) {
    for (auto& r : distribution_rows(row.run.dist)) {
      r.insert(r.begin(), row.strategy);
      long_rows.push_back(std::move(r));
    }
    for (std::size_t j = 0; j < cfg.rewards.size(); ++j)
      reward_rows.push_back({row.strategy, cfg.rewards[j].name, row.rewards[j].estimate,
                             row.rewards[j].standard_error, row.rewards[j].truncation_bound});
    if (per_strategy)
      out.write_table("cdf_" + safe_stem(row.strategy), {"t", "mass", "cdf", "se"}, distribution_rows(row.run.dist));
    summary[row.strategy] = run_summary(row, cfg.rewards);
  }
  out.write_table("stopping", {"strategy", "t", "mass", "cdf", "se"}, long_rows);
  out.write_table("rewards", {"strategy", "reward", "estimate", "se", "truncation_bound"}, reward_rows);
  out.write_json("summary", Json{{"measure", cfg.sim.measure == Measure::Null ? "null" : "alternative"},
                                 {"horizon", cfg.sim.horizon},
                                 {"strategies", summary}});
}

void power_sweep(const ExperimentConfig& cfg, const PowerSweep& sweep, OutputDir& out) {
  const TestingProblem& problem = cfg.problem;
  std::vector<Row> rows;
  for (double T : sweep.timescales) {
    const EdoSolution sol = solve_edo(problem, T);
    SimConfig sc = cfg.sim;
    sc.paths = sweep.paths;
    sc.horizon = sweep.horizon;
    sc.measure = Measure::Alternative;
    if (sol.kappa) sc.kappa = sol.kappa->kappa;
    const ConstantAction strategy(cfg.family, sol.action, "edo");
    const MonteCarloRun r = run(problem, strategy, sc);
    const auto [lo, hi] = wilson_interval(r.rejections, r.dist.paths);
    const double power = r.dist.rejection_probability();
    double blo = 1.0, bhi = 1.0;
    if (sol.kappa) {
      const ValueBounds pb = power_bounds(*sol.kappa, problem.alpha);
      blo = pb.lower.value_or(0.0);
      bhi = pb.upper;
    }
    // Unstopped paths may still reject later; power_one rows have no kappa, so
    // their whole unstopped mass is the bound.
    const double trunc = r.kappa_tail ? *r.kappa_tail : r.dist.never_mass;
    const double hi_adj = std::min(1.0, hi + trunc);
    rows.push_back({T, sol.eta_star, sol.action, sol.gamma, sol.power_one,
                    sol.kappa ? Json(sol.kappa->kappa) : Json(nullptr), optional_number(sol.payoff_bound), blo, bhi,
                    r.dist.paths, r.rejections, power, lo, hi, trunc, hi_adj, lo <= bhi && hi_adj >= blo});
  }
  out.write_table("power_sweep", {"timescale", "eta_star", "action", "gamma", "power_one", "kappa", "payoff_bound",
                                  "bound_lower", "bound_upper", "paths", "rejections", "power", "wilson_lo",
                                  "wilson_hi", "truncation_bound", "wilson_hi_adjusted", "intersects"},
                  rows);
}

}  // namespace

int cmd_doob(const ExperimentConfig& cfg, OutputDir& out) {
  if (cfg.doob.deadlines.empty()) throw UsageError("doob: no deadlines (set doob.deadlines or a hard_deadline reward)");
  Json reports = Json::array();
  for (auto T : cfg.doob.deadlines)
    reports.push_back(is_bernoulli(cfg.problem) ? bernoulli_doob_report(cfg, T, out) : gaussian_doob_report(cfg, T, out));
  out.write_json("doob_report", Json{{"deadlines", reports}});
  return 0;
}

int cmd_simulate(const ExperimentConfig& cfg, OutputDir& out) {
  if (cfg.strategies.empty()) throw UsageError("simulate: the strategy list is empty");
  const auto strategies = build_strategies(cfg);
  std::vector<RewardSpec> rewards;
  for (const auto& r : cfg.rewards) rewards.push_back(r.spec);
  emit_comparison(cfg, compare(cfg.problem, strategies, cfg.sim, rewards), false, out);
  return 0;
}

int cmd_compare(const ExperimentConfig& cfg, OutputDir& out) {
  if (cfg.strategies.empty() && !cfg.power_sweep) throw UsageError("compare: the strategy list is empty");
  if (!cfg.strategies.empty()) {
    if (!cfg.sim.common_random_numbers) throw UsageError("compare: requires simulation.crn = true");
    const auto strategies = build_strategies(cfg);
    std::vector<RewardSpec> rewards;
    for (const auto& r : cfg.rewards) rewards.push_back(r.spec);
    emit_comparison(cfg, compare(cfg.problem, strategies, cfg.sim, rewards), true, out);
  }
  if (cfg.power_sweep) power_sweep(cfg, *cfg.power_sweep, out);
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"Time-sensitive anytime-valid testing by betting"};
  app.set_version_flag("--version", std::string(TSBET_VERSION));
  app.require_subcommand(1);

  std::string config_path;
  Overrides ov;
  std::string out_dir, format;
  std::uint64_t seed = 0, paths = 0;
  unsigned workers = 0;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"edo", "solve the stationary exponential-decay bet"},
      {"bellman", "backward induction: policy and value tables, heatmaps"},
      {"doob", "hard-deadline Neyman-Pearson events and exact stopping laws"},
      {"simulate", "Monte Carlo stopping-time distributions"},
      {"compare", "common-random-number comparison (and power sweeps)"}};
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (default: $TSBET_OUT_DIR or ./tsbet_out)");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--paths", paths, "Monte Carlo path count")->check(CLI::PositiveNumber);
    sub->add_option("--format", format, "table format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--workers", workers, "worker threads (0: hardware concurrency)");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  CLI::App* chosen = nullptr;
  for (auto* s : subs)
    if (s->parsed()) chosen = s;
  const std::string command = chosen->get_name();
  if (chosen->count("--out")) ov.out = out_dir;
  if (chosen->count("--seed")) ov.seed = seed;
  if (chosen->count("--paths")) ov.paths = paths;
  if (chosen->count("--format")) ov.format = format;
  if (chosen->count("--workers")) ov.workers = workers;

  try {
    const auto start = std::chrono::steady_clock::now();
    const ExperimentConfig cfg = load_config(config_path, ov);
    OutputDir out(cfg.output.dir, cfg.output.format, make_provenance(cfg, command));
    if (command == "edo") {
      cmd_edo(cfg, out);
    } else if (command == "bellman") {
      cmd_bellman(cfg, out);
    } else if (command == "doob") {
      cmd_doob(cfg, out);
    } else if (command == "simulate") {
      cmd_simulate(cfg, out);
    } else {
      cmd_compare(cfg, out);
    }
    const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.finish(runtime);
    std::cout << command << ": wrote " << out.files().size() << " files to " << out.path().string() << " ("
              << fmt(std::round(runtime * 1000.0) / 1000.0) << " s)\n";
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "tsbet " << command << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "tsbet " << command << ": error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace tsbet::cli
