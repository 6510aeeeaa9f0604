#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "tsbet/baselines.hpp"
#include "tsbet/bellman.hpp"
#include "tsbet/cli.hpp"
#include "tsbet/edo.hpp"
#include "tsbet/errors.hpp"
#include "tsbet/hard_deadline.hpp"

namespace tsbet::cli {

namespace {

// Reads keys of one config object, records the value actually used (default
// or given) and rejects keys nobody asked for.
class Block {
 public:
  Block(const Json& in, std::string where) : in_(in), where_(std::move(where)) {
    if (!in_.is_object()) throw UsageError(where_ + ": expected an object");
  }

  bool has(const std::string& key) const { return in_.contains(key); }

  template <class T>
  T get(const std::string& key, T fallback) {
    seen_.insert(key);
    T value = in_.contains(key) ? convert<T>(key) : fallback;
    out_[key] = value;
    return value;
  }

  template <class T>
  T require(const std::string& key) {
    seen_.insert(key);
    if (!in_.contains(key)) throw UsageError(where_ + ": missing required key '" + key + "'");
    T value = convert<T>(key);
    out_[key] = value;
    return value;
  }

  const Json& raw(const std::string& key) {
    seen_.insert(key);
    return in_.at(key);
  }

  void set(const std::string& key, Json value) { out_[key] = std::move(value); }

  Json finish() {
    for (const auto& item : in_.items()) {
      if (!seen_.count(item.key())) throw UsageError(where_ + ": unknown key '" + item.key() + "'");
    }
    return out_.is_null() ? Json::object() : out_;
  }

 private:
  template <class T>
  T convert(const std::string& key) const {
    const Json& v = in_.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw UsageError(where_ + "." + key + ": expected a boolean");
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!v.is_number_unsigned()) throw UsageError(where_ + "." + key + ": expected a non-negative integer");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw UsageError(where_ + "." + key + ": expected an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw UsageError(where_ + "." + key + ": expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw UsageError(where_ + "." + key + ": expected a string");
    }
    try {
      return v.get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw UsageError(where_ + "." + key + ": " + e.what());
    }
  }

  Json in_;
  std::string where_;
  std::set<std::string> seen_;
  Json out_ = Json::object();
};

std::string number_tag(double x) {
  std::ostringstream s;
  s << x;
  return s.str();
}

NamedReward parse_reward(const Json& in, std::size_t index, Json& resolved) {
  Block b(in, "rewards[" + std::to_string(index) + "]");
  const auto kind = b.require<std::string>("kind");
  const auto horizon = b.get<std::int64_t>("horizon", 0);
  NamedReward r;
  std::string tag;
  if (kind == "hard_deadline") {
    const auto T = b.require<std::int64_t>("deadline");
    r.spec = make_hard_deadline(T, horizon);
    tag = "hard_deadline_" + std::to_string(T);
  } else if (kind == "logistic") {
    const auto c = b.require<double>("center");
    const auto s = b.require<double>("scale");
    r.spec = make_logistic(c, s, horizon);
    tag = "logistic_" + number_tag(c);
  } else if (kind == "exponential") {
    const auto T = b.require<double>("timescale");
    r.spec = make_exponential(T, horizon);
    tag = "exponential_" + number_tag(T);
  } else if (kind == "table") {
    const Json& v = b.raw("values");
    if (!v.is_array()) throw UsageError("rewards.values: expected an array");
    std::vector<double> values;
    for (const auto& x : v) {
      if (!x.is_number()) throw UsageError("rewards.values: expected numbers");
      values.push_back(x.get<double>());
    }
    b.set("values", values);
    r.spec = make_table(std::move(values), horizon);
    tag = "table";
  } else {
    throw UsageError("rewards: unknown kind '" + kind + "'");
  }
  r.name = b.get<std::string>("name", tag);
  resolved = b.finish();
  return r;
}

const std::set<std::string> kStrategyKinds{"constant", "gro",  "edo",       "capped_constant",
                                           "bellman",  "doob", "star_bets", "schedule_mix"};

// Fills defaults (notably the name) and rejects unknown keys.
Json resolve_strategy(const Json& in, std::size_t index, const SolverSettings& solver) {
  Block b(in, "strategies[" + std::to_string(index) + "]");
  const auto kind = b.require<std::string>("kind");
  if (!kStrategyKinds.count(kind)) throw UsageError("strategies: unknown kind '" + kind + "'");
  std::string name;
  if (kind == "constant" || kind == "capped_constant") {
    const auto a = b.require<double>("action");
    name = (kind == "constant" ? "constant_" : "capped_") + number_tag(a);
  } else if (kind == "gro") {
    const bool capped = b.get<bool>("capped", false);
    name = capped ? "gro_capped" : "gro";
  } else if (kind == "edo") {
    const auto T = b.require<double>("timescale");
    const bool capped = b.get<bool>("capped", false);
    name = "edo_T" + number_tag(T) + (capped ? "_capped" : "");
  } else if (kind == "bellman") {
    const auto reward = b.require<std::string>("reward");
    b.get<bool>("capping", solver.capping);
    b.get<std::int64_t>("horizon", solver.horizon);
    name = "bellman_" + reward;
  } else if (kind == "doob") {
    const auto T = b.require<std::int64_t>("deadline");
    const auto variant = b.get<std::string>("variant", "exact");
    if (variant != "exact" && variant != "upper_tail") throw UsageError("doob variant must be exact or upper_tail");
    const auto scaling = b.get<std::string>("scaling", "null_mass");
    if (scaling != "null_mass" && scaling != "alpha") throw UsageError("doob scaling must be null_mass or alpha");
    name = "doob_T" + std::to_string(T) + (variant == "upper_tail" ? "_upper_tail" : "");
  } else {
    const auto T = b.require<std::int64_t>("deadline");
    name = kind + "_T" + std::to_string(T);
  }
  b.get<std::string>("name", name);
  return b.finish();
}

}  // namespace

ExperimentConfig parse_config(const Json& input, const Overrides& overrides) {
  if (!input.is_object()) throw UsageError("config: expected a JSON object");
  static const std::set<std::string> kTop{"problem",    "rewards",     "solver",      "edo",   "doob",
                                          "simulation", "strategies",  "power_sweep", "output"};
  for (const auto& item : input.items()) {
    if (!kTop.count(item.key())) throw UsageError("config: unknown block '" + item.key() + "'");
  }
  if (!input.contains("problem")) throw UsageError("config: missing 'problem' block");

  ExperimentConfig cfg;
  Json& res = cfg.resolved;
  res = Json::object();

  // problem
  {
    Block b(input.at("problem"), "problem");
    const auto model = b.require<std::string>("model");
    const auto alpha = b.require<double>("alpha");
    if (model == "bernoulli") {
      const auto p0 = b.require<double>("p0");
      const auto p1 = b.require<double>("p1");
      cfg.problem = make_problem(make_bernoulli(p0), make_bernoulli(p1), alpha);
      cfg.family = default_family(cfg.problem);
    } else if (model == "gaussian") {
      const auto mu0 = b.get<double>("mu0", 0.0);
      const auto mu1 = b.require<double>("mu1");
      const auto sigma = b.get<double>("sigma", 1.0);
      cfg.problem = make_problem(make_gaussian(mu0, sigma), make_gaussian(mu1, sigma), alpha);
      GaussianShift fam{mu0, sigma};
      fam.a_min = b.get<double>("action_min", fam.a_min);
      fam.a_max = b.get<double>("action_max", fam.a_max);
      if (!(fam.a_min < fam.a_max)) throw UsageError("problem: action_min must be below action_max");
      cfg.family = fam;
    } else {
      throw UsageError("problem: unknown model '" + model + "'");
    }
    res["problem"] = b.finish();
  }
  const bool bern = is_bernoulli(cfg.problem);

  // rewards
  res["rewards"] = Json::array();
  if (input.contains("rewards")) {
    const Json& list = input.at("rewards");
    if (!list.is_array()) throw UsageError("rewards: expected an array");
    std::set<std::string> names;
    for (std::size_t i = 0; i < list.size(); ++i) {
      Json r;
      cfg.rewards.push_back(parse_reward(list[i], i, r));
      if (!names.insert(cfg.rewards.back().name).second)
        throw UsageError("rewards: duplicate name '" + cfg.rewards.back().name + "'");
      res["rewards"].push_back(r);
    }
  }

  // solver
  {
    Block b(input.value("solver", Json::object()), "solver");
    SolverSettings& s = cfg.solver;
    s.grid_points = b.get<std::size_t>("grid_points", s.grid_points);
    s.z_min = b.get<double>("z_min", bern ? 1e-10 : 1e-8);
    s.actions = b.get<std::size_t>("actions", s.actions);
    s.horizon = b.get<std::int64_t>("horizon", s.horizon);
    s.quadrature_nodes = b.get<std::size_t>("quadrature_nodes", s.quadrature_nodes);
    s.capping = b.get<bool>("capping", s.capping);
    s.epsilon = b.get<double>("epsilon", s.epsilon);
    s.workers = b.get<unsigned>("workers", 0);
    if (overrides.workers) s.workers = *overrides.workers;
    if (s.grid_points < 3) throw UsageError("solver.grid_points must be >= 3");
    if (s.actions < 1) throw UsageError("solver.actions must be >= 1");
    if (!(s.z_min > 0.0 && s.z_min < 1.0)) throw UsageError("solver.z_min must lie in (0,1)");
    if (s.horizon < 0) throw UsageError("solver.horizon must be >= 0");
    if (s.capping && !bern) throw UsageError("solver.capping applies to Bernoulli problems only");
    Json out = b.finish();
    out.erase("workers");  // execution detail, does not change results
    res["solver"] = out;
  }

  // edo
  {
    Block b(input.value("edo", Json::object()), "edo");
    std::vector<double> ts;
    if (b.has("timescales")) {
      ts = b.require<std::vector<double>>("timescales");
    } else {
      for (const auto& r : cfg.rewards)
        if (const auto* e = std::get_if<ExponentialDecay>(&r.spec.kind)) ts.push_back(e->timescale);
      b.set("timescales", ts);
    }
    cfg.edo_timescales = ts;
    res["edo"] = b.finish();
  }

  // doob
  {
    Block b(input.value("doob", Json::object()), "doob");
    DoobSettings& d = cfg.doob;
    if (b.has("deadlines")) {
      d.deadlines = b.require<std::vector<std::int64_t>>("deadlines");
    } else {
      for (const auto& r : cfg.rewards)
        if (const auto* h = std::get_if<HardDeadline>(&r.spec.kind)) d.deadlines.push_back(h->deadline);
      b.set("deadlines", d.deadlines);
    }
    const auto scaling = b.get<std::string>("scaling", "null_mass");
    if (scaling == "null_mass") {
      d.scaling = DoobScaling::NullMass;
    } else if (scaling == "alpha") {
      d.scaling = DoobScaling::Alpha;
    } else {
      throw UsageError("doob.scaling must be null_mass or alpha");
    }
    d.stopping_horizon = b.get<std::int64_t>("stopping_horizon", 0);
    d.compare_gro = b.get<bool>("compare_gro", true);
    for (auto T : d.deadlines)
      if (T < 1) throw UsageError("doob.deadlines must be >= 1");
    res["doob"] = b.finish();
  }

  // simulation
  {
    Block b(input.value("simulation", Json::object()), "simulation");
    SimConfig& s = cfg.sim;
    s.paths = b.get<std::uint64_t>("paths", s.paths);
    if (overrides.paths) s.paths = *overrides.paths;
    s.seed = b.get<std::uint64_t>("seed", s.seed);
    if (overrides.seed) s.seed = *overrides.seed;
    s.horizon = b.get<std::int64_t>("horizon", s.horizon);
    const auto measure = b.get<std::string>("measure", "alternative");
    if (measure == "alternative") {
      s.measure = Measure::Alternative;
    } else if (measure == "null") {
      s.measure = Measure::Null;
    } else {
      throw UsageError("simulation.measure must be null or alternative");
    }
    s.common_random_numbers = b.get<bool>("crn", true);
    s.checkpoints = b.get<std::vector<std::int64_t>>("checkpoints", s.checkpoints);
    s.workers = cfg.solver.workers;
    if (s.paths < 1) throw UsageError("simulation.paths must be >= 1");
    if (s.horizon < 1) throw UsageError("simulation.horizon must be >= 1");
    Json out = b.finish();
    out["paths"] = s.paths;
    out["seed"] = s.seed;
    res["simulation"] = out;
  }

  // strategies
  res["strategies"] = Json::array();
  if (input.contains("strategies")) {
    const Json& list = input.at("strategies");
    if (!list.is_array()) throw UsageError("strategies: expected an array");
    std::set<std::string> names;
    for (std::size_t i = 0; i < list.size(); ++i) {
      Json s = resolve_strategy(list[i], i, cfg.solver);
      const std::string name = s.at("name");
      if (!names.insert(name).second) throw UsageError("strategies: duplicate name '" + name + "'");
      cfg.strategies.push_back(s);
      res["strategies"].push_back(s);
    }
  }

  // power sweep
  if (input.contains("power_sweep")) {
    Block b(input.at("power_sweep"), "power_sweep");
    if (!bern) throw UsageError("power_sweep needs a Bernoulli problem");
    PowerSweep p;
    p.timescales = b.require<std::vector<double>>("timescales");
    p.horizon = b.get<std::int64_t>("horizon", p.horizon);
    p.paths = b.get<std::uint64_t>("paths", p.paths);
    if (overrides.paths) p.paths = *overrides.paths;
    if (p.horizon < 1 || p.paths < 1) throw UsageError("power_sweep: horizon and paths must be >= 1");
    Json out = b.finish();
    out["paths"] = p.paths;
    res["power_sweep"] = out;
    cfg.power_sweep = p;
  }

  // output (not part of the echoed config: it does not affect results)
  {
    Block b(input.value("output", Json::object()), "output");
    std::string dir = b.get<std::string>("dir", "");
    if (overrides.out) dir = *overrides.out;
    if (dir.empty()) {
      const char* env = std::getenv("TSBET_OUT_DIR");
      dir = env && *env ? env : "tsbet_out";
    }
    cfg.output.dir = dir;
    cfg.output.format = b.get<std::string>("format", "csv");
    if (overrides.format) cfg.output.format = *overrides.format;
    if (cfg.output.format != "csv" && cfg.output.format != "json")
      throw UsageError("output format must be csv or json");
    b.finish();
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  Json j;
  try {
    j = Json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("config " + path.string() + ": " + e.what());
  }
  return parse_config(j, overrides);
}

namespace {

const NamedReward& reward_by_name(const ExperimentConfig& cfg, const std::string& name) {
  for (const auto& r : cfg.rewards)
    if (r.name == name) return r;
  throw UsageError("strategy refers to unknown reward '" + name + "'");
}

double bernoulli_p1(const TestingProblem& problem) { return std::get<Bernoulli>(problem.alternative).p; }
double bernoulli_p0(const TestingProblem& problem) { return std::get<Bernoulli>(problem.null).p; }

}  // namespace

StrategyPtr build_strategy(const ExperimentConfig& cfg, const Json& spec) {
  const std::string kind = spec.at("kind");
  const std::string name = spec.at("name");
  const TestingProblem& problem = cfg.problem;
  const bool bern = is_bernoulli(problem);
  auto constant = [&](double action, bool capped) -> StrategyPtr {
    if (capped) {
      if (!bern) throw UsageError("strategy " + name + ": capping needs a Bernoulli problem");
      return std::make_shared<CappedConstant>(problem, action, name);
    }
    return std::make_shared<ConstantAction>(cfg.family, action, name);
  };

  if (kind == "constant") return constant(spec.at("action"), false);
  if (kind == "capped_constant") return constant(spec.at("action"), true);
  if (kind == "gro") return constant(gro_action(problem), spec.at("capped"));
  if (kind == "edo") {
    const EdoSolution sol = solve_edo(problem, spec.at("timescale"));
    return constant(sol.action, spec.at("capped"));
  }
  if (kind == "bellman") {
    const NamedReward& reward = reward_by_name(cfg, spec.at("reward"));
    std::int64_t horizon = spec.at("horizon");
    if (horizon == 0) horizon = solver_horizon(reward.spec, cfg.solver.epsilon);
    BellmanOptions opt;
    opt.capping = spec.at("capping");
    opt.quadrature_nodes = cfg.solver.quadrature_nodes;
    opt.workers = cfg.solver.workers;
    if (opt.capping && !bern) throw UsageError("strategy " + name + ": capping needs a Bernoulli problem");
    const WealthGrid grid = WealthGrid::log_uniform(cfg.solver.z_min, cfg.solver.grid_points);
    const auto actions = default_actions(problem, cfg.family, cfg.solver.actions);
    auto sol = std::make_shared<const BellmanSolution>(
        backward_induction(problem, cfg.family, reward.spec, grid, actions, horizon, opt));
    return std::make_shared<PolicyStrategy>(sol, name);
  }
  if (kind == "doob") {
    const std::int64_t T = spec.at("deadline");
    if (!bern) return std::make_shared<GaussianDoobStrategy>(problem, T, name);
    const DoobScaling scaling = spec.at("scaling") == "alpha" ? DoobScaling::Alpha : DoobScaling::NullMass;
    const double p0 = bernoulli_p0(problem), p1 = bernoulli_p1(problem);
    if (spec.at("variant") == "upper_tail") {
      auto doob = std::make_shared<const UpperTailDoob>(p0, p1, static_cast<int>(T), problem.alpha, scaling);
      return std::make_shared<UpperTailStrategy>(doob, name);
    }
    auto doob = std::make_shared<const BernoulliDoob>(
        bernoulli_np_exact(p0, p1, static_cast<int>(T), problem.alpha), scaling);
    return std::make_shared<BernoulliDoobStrategy>(doob, name);
  }
  if (kind == "star_bets") {
    if (!bern) throw UsageError("strategy " + name + ": star_bets needs a Bernoulli problem");
    return std::make_shared<StarBets>(problem, spec.at("deadline").get<std::int64_t>(), name);
  }
  if (kind == "schedule_mix") {
    if (!bern) throw UsageError("strategy " + name + ": schedule_mix needs a Bernoulli problem");
    return std::make_shared<ScheduleMix>(problem, spec.at("deadline").get<std::int64_t>(), name);
  }
  throw UsageError("unknown strategy kind '" + kind + "'");
}

std::vector<StrategyPtr> build_strategies(const ExperimentConfig& cfg) {
  std::vector<StrategyPtr> out;
  for (const auto& spec : cfg.strategies) out.push_back(build_strategy(cfg, spec));
  return out;
}

}  // namespace tsbet::cli
