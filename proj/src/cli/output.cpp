#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "tsbet/cli.hpp"
#include "tsbet/errors.hpp"

namespace tsbet::cli {

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const ExperimentConfig& config) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << fnv1a(config.resolved.dump());
  return s.str();
}

Provenance make_provenance(const ExperimentConfig& config, const std::string& command) {
  return Provenance{TSBET_VERSION, command, config_hash(config), config.sim.seed, config.resolved};
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

std::string cell(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  }
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return v.dump();
  if (v.is_number()) return fmt(v.get<double>());
  return v.dump();
}

Json metadata(const Provenance& p) {
  return Json{{"tool", "tsbet"},
              {"version", p.version},
              {"command", p.command},
              {"config_hash", p.config_hash},
              {"seed", p.seed},
              {"config", p.config}};
}

}  // namespace

OutputDir::OutputDir(std::filesystem::path dir, std::string format, Provenance provenance)
    : dir_(std::move(dir)), format_(std::move(format)), provenance_(std::move(provenance)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw UsageError("cannot create output directory " + dir_.string() + ": " + ec.message());
}

void OutputDir::write_table(const std::string& stem, const std::vector<std::string>& header,
                            const std::vector<Row>& rows) {
  if (format_ == "json") {
    Json body{{"columns", header}, {"rows", rows}};
    write_json(stem, std::move(body));
    return;
  }
  const std::string file = stem + ".csv";
  std::ofstream out(dir_ / file, std::ios::binary);
  if (!out) throw UsageError("cannot write " + (dir_ / file).string());
  out << "# tsbet " << provenance_.version << '\n'
      << "# command " << provenance_.command << '\n'
      << "# config_hash " << provenance_.config_hash << '\n'
      << "# seed " << provenance_.seed << '\n';
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << cell(row[i]);
    out << '\n';
  }
  files_.push_back(file);
}

void OutputDir::write_json(const std::string& stem, Json body) {
  const std::string file = stem + ".json";
  body["metadata"] = metadata(provenance_);
  std::ofstream out(dir_ / file, std::ios::binary);
  if (!out) throw UsageError("cannot write " + (dir_ / file).string());
  out << body.dump(1) << '\n';
  files_.push_back(file);
}

void OutputDir::finish(double runtime_seconds) {
  Json manifest{{"metadata", metadata(provenance_)}, {"files", files_}, {"runtime_seconds", runtime_seconds}};
  std::ofstream out(dir_ / "manifest.json", std::ios::binary);
  if (!out) throw UsageError("cannot write manifest in " + dir_.string());
  out << manifest.dump(1) << '\n';
}

}  // namespace tsbet::cli
