// Command-line front end: validate and run scenario files, sweep
// configuration grids into an outcome matrix, and diff the matrix against an
// expectations table.
//
// Exit codes: 0 ok, 1 expectation mismatch, 2 invalid input.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "fivegsim/report.hpp"
#include "fivegsim/simcore.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitMismatch = 1;
constexpr int kExitInvalidInput = 2;

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out << content;
  return out.good();
}

int load_scenario(const std::string& path, fivegsim::ScenarioConfig& out_config) {
  auto text = read_file(path);
  if (!text) {
    std::cerr << "error: cannot read " << path << "\n";
    return kExitInvalidInput;
  }
  fivegsim::ScenarioParseResult parsed = fivegsim::parse_scenario_text(*text);
  if (!parsed.ok()) {
    std::cerr << "error: invalid scenario " << path << "\n";
    for (const auto& e : parsed.errors) std::cerr << "  " << e << "\n";
    return kExitInvalidInput;
  }
  out_config = std::move(*parsed.config);
  return kExitOk;
}

int cmd_validate(const std::string& path) {
  fivegsim::ScenarioConfig config;
  int rc = load_scenario(path, config);
  if (rc != kExitOk) return rc;
  std::cout << "ok: " << path << " fingerprint=" << config.fingerprint() << "\n";
  return kExitOk;
}

int cmd_run(const std::string& path, std::optional<uint64_t> seed_override,
            const std::string& out_dir) {
  fivegsim::ScenarioConfig config;
  int rc = load_scenario(path, config);
  if (rc != kExitOk) return rc;
  if (seed_override) config.seed = *seed_override;

  fivegsim::RunResult run = fivegsim::run_scenario(config);
  if (!run.ok()) {
    std::cerr << "error: " << run.error << "\n";
    return kExitInvalidInput;
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  std::filesystem::path dir(out_dir);
  std::string report = fivegsim::render_report(config, run);
  bool wrote = write_file(dir / "report.txt", report) &&
               write_file(dir / "report.json",
                          fivegsim::report_json(config, run).dump(2) + "\n") &&
               write_file(dir / "transcript.log", run.transcript_text);
  if (!wrote) {
    std::cerr << "error: cannot write report files under " << out_dir << "\n";
    return kExitInvalidInput;
  }
  std::cout << report;
  return kExitOk;
}

int cmd_matrix(const std::string& grid_path, const std::string& expect_path,
               unsigned workers, const std::string& out_dir) {
  auto text = read_file(grid_path);
  if (!text) {
    std::cerr << "error: cannot read " << grid_path << "\n";
    return kExitInvalidInput;
  }
  fivegsim::GridParseResult parsed = fivegsim::parse_grid_text(*text);
  if (!parsed.ok()) {
    std::cerr << "error: invalid grid " << grid_path << "\n";
    for (const auto& e : parsed.errors) std::cerr << "  " << e << "\n";
    return kExitInvalidInput;
  }

  fivegsim::OutcomeMatrix matrix =
      fivegsim::enumerate_outcomes(*parsed.grid, workers == 0 ? 1 : workers);
  std::string tsv = matrix.render_tsv();

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  std::filesystem::path dir(out_dir);
  if (!write_file(dir / "matrix.tsv", tsv) ||
      !write_file(dir / "matrix.json", matrix.render_json().dump(2) + "\n")) {
    std::cerr << "error: cannot write matrix files under " << out_dir << "\n";
    return kExitInvalidInput;
  }
  std::cout << tsv;

  if (expect_path.empty()) return kExitOk;
  auto expectations = read_file(expect_path);
  if (!expectations) {
    std::cerr << "error: cannot read " << expect_path << "\n";
    return kExitInvalidInput;
  }
  fivegsim::MatrixDiff diff = fivegsim::diff_matrix(matrix, *expectations);
  if (!diff.ok()) {
    std::cerr << diff.mismatches.size() << " mismatch(es) against " << expect_path
              << ":\n";
    for (const auto& m : diff.mismatches) std::cerr << "  " << m << "\n";
    return kExitMismatch;
  }
  std::cout << "matrix matches " << expect_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic simulator of the 5G registration/authentication "
               "security plane with a scriptable adversary"};
  app.require_subcommand(1);

  std::string scenario_path, grid_path, expect_path, out_dir = ".";
  std::optional<uint64_t> seed_override;
  unsigned workers = 1;

  auto* run = app.add_subcommand("run", "Run one scenario and write report files");
  run->add_option("scenario", scenario_path, "Scenario file (JSON)")->required();
  run->add_option("--seed", seed_override, "Override the scenario seed");
  run->add_option("--out", out_dir, "Output directory for report files");

  auto* matrix = app.add_subcommand("matrix", "Sweep a configuration grid");
  matrix->add_option("grid", grid_path, "Grid file (JSON)")->required();
  matrix->add_option("--expect", expect_path, "Expectations table (TSV) to diff against");
  matrix->add_option("--workers", workers, "Parallel runs");

  auto* validate = app.add_subcommand("validate", "Validate a scenario file");
  validate->add_option("scenario", scenario_path, "Scenario file (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalidInput;
  }

  if (app.got_subcommand(run)) return cmd_run(scenario_path, seed_override, out_dir);
  if (app.got_subcommand(matrix))
    return cmd_matrix(grid_path, expect_path, workers, out_dir);
  return cmd_validate(scenario_path);
}
