// Runs one CLI command and compares its files with checked-in expectations.
// Provenance (CSV '#' lines, the JSON "metadata" object) and manifest.json are
// ignored. Set TSBET_REGEN_GOLDEN=1 to rewrite the expectations instead.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

std::string normalised(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (p.extension() == ".json") {
    nlohmann::json j = nlohmann::json::parse(in);
    j.erase("metadata");
    return j.dump(1);
  }
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line))
    if (line.empty() || line[0] != '#') out << line << '\n';
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 6) {
    std::cerr << "usage: golden_check TSBET COMMAND CONFIG EXPECTED_DIR OUT_DIR\n";
    return 2;
  }
  const std::string tool = argv[1], command = argv[2];
  const fs::path config = argv[3], expected = argv[4], out = argv[5];
  fs::remove_all(out);
  const std::string cmd = "\"" + tool + "\" " + command + " --config \"" + config.string() + "\" --out \"" +
                          out.string() + "\" --workers 2";
  if (std::system(cmd.c_str()) != 0) {
    std::cerr << "command failed: " << cmd << '\n';
    return 1;
  }

  if (const char* regen = std::getenv("TSBET_REGEN_GOLDEN"); regen && std::string(regen) == "1") {
    fs::create_directories(expected);
    for (const auto& e : fs::directory_iterator(expected)) fs::remove(e.path());
    for (const auto& e : fs::directory_iterator(out)) {
      if (e.path().filename() == "manifest.json") continue;
      std::ofstream(expected / e.path().filename(), std::ios::binary) << normalised(e.path());
    }
    std::cout << "regenerated " << expected << '\n';
    return 0;
  }

  int failures = 0, checked = 0;
  for (const auto& e : fs::directory_iterator(expected)) {
    const fs::path got = out / e.path().filename();
    ++checked;
    if (!fs::exists(got)) {
      std::cerr << "missing output " << got << '\n';
      ++failures;
      continue;
    }
    std::ifstream want_in(e.path(), std::ios::binary);
    const std::string want{std::istreambuf_iterator<char>(want_in), {}};
    if (normalised(got) != want) {
      std::cerr << "mismatch in " << e.path().filename() << '\n';
      ++failures;
    }
  }
  for (const auto& e : fs::directory_iterator(out)) {
    if (e.path().filename() != "manifest.json" && !fs::exists(expected / e.path().filename())) {
      std::cerr << "unexpected output " << e.path().filename() << '\n';
      ++failures;
    }
  }
  if (checked == 0) {
    std::cerr << "no expectations in " << expected << '\n';
    return 1;
  }
  std::cout << checked << " files compared, " << failures << " mismatches\n";
  return failures == 0 ? 0 : 1;
}
