#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsbet/bellman.hpp"
#include "tsbet/hard_deadline.hpp"
#include "tsbet/model.hpp"
#include "tsbet/reward.hpp"
#include "tsbet/simulate.hpp"
#include "tsbet/strategy.hpp"

namespace tsbet::cli {

using Json = nlohmann::json;

// Bad flags, malformed or inconsistent configs. Maps to exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NamedReward {
  std::string name;
  RewardSpec spec;
};

struct SolverSettings {
  std::size_t grid_points = 401;
  double z_min = 1e-8;
  std::size_t actions = 401;
  std::int64_t horizon = 0;  // 0: per-reward solver_horizon
  std::size_t quadrature_nodes = 41;
  bool capping = false;
  double epsilon = 1e-6;
  unsigned workers = 0;
};

struct DoobSettings {
  std::vector<std::int64_t> deadlines;
  DoobScaling scaling = DoobScaling::NullMass;
  std::int64_t stopping_horizon = 0;  // 0: the deadline
  bool compare_gro = true;
};

struct PowerSweep {
  std::vector<double> timescales;
  std::int64_t horizon = 2000;
  std::uint64_t paths = 5000;
};

struct OutputSettings {
  std::string dir;
  std::string format = "csv";
};

struct ExperimentConfig {
  Json resolved;  // input with every default filled in, echoed into outputs
  TestingProblem problem;
  ActionFamily family;
  std::vector<NamedReward> rewards;
  SolverSettings solver;
  std::vector<double> edo_timescales;
  DoobSettings doob;
  SimConfig sim;
  std::vector<Json> strategies;
  std::optional<PowerSweep> power_sweep;
  OutputSettings output;
};

struct Overrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> paths;
  std::optional<std::string> format;
  std::optional<unsigned> workers;
};

ExperimentConfig parse_config(const Json& input, const Overrides& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path, const Overrides& overrides = {});

// Strategy objects for the config's strategy list (Bellman policies are solved on demand).
std::vector<StrategyPtr> build_strategies(const ExperimentConfig& config);
StrategyPtr build_strategy(const ExperimentConfig& config, const Json& spec);

std::uint64_t fnv1a(const std::string& bytes);
std::string config_hash(const ExperimentConfig& config);

// Provenance shared by every file of one invocation.
struct Provenance {
  std::string version;
  std::string command;
  std::string config_hash;
  std::uint64_t seed;
  Json config;
};

Provenance make_provenance(const ExperimentConfig& config, const std::string& command);

using Row = std::vector<Json>;

// Writers embed the provenance ('#' header lines for CSV, a "metadata" object
// for JSON). Tables follow the chosen format, nested reports are always JSON.
class OutputDir {
 public:
  OutputDir(std::filesystem::path dir, std::string format, Provenance provenance);
  void write_table(const std::string& stem, const std::vector<std::string>& header, const std::vector<Row>& rows);
  void write_json(const std::string& stem, Json body);
  // manifest.json lists the files written and the wall-clock runtime.
  void finish(double runtime_seconds);
  const std::filesystem::path& path() const { return dir_; }
  const std::vector<std::string>& files() const { return files_; }

 private:
  std::filesystem::path dir_;
  std::string format_;
  Provenance provenance_;
  std::vector<std::string> files_;
};

// Shortest round-trip decimal form.
std::string fmt(double x);

int cmd_edo(const ExperimentConfig& config, OutputDir& out);
int cmd_bellman(const ExperimentConfig& config, OutputDir& out);
int cmd_doob(const ExperimentConfig& config, OutputDir& out);
int cmd_simulate(const ExperimentConfig& config, OutputDir& out);
int cmd_compare(const ExperimentConfig& config, OutputDir& out);

// Full command line handling; returns the process exit code.
int run(int argc, char** argv);

}  // namespace tsbet::cli
