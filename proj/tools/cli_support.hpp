#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "psm/control/ncg.hpp"
#include "psm/core/scenario.hpp"
#include "psm/solver/record.hpp"
#include "psm/solver/trajectory.hpp"
#include "psm/train/pipeline.hpp"

namespace psm::cli {

namespace fs = std::filesystem;

/// Digest record of one command run, written as manifest.json next to the outputs.
class RunManifest {
 public:
  RunManifest(std::string command, std::string config_path, std::uint64_t seed);

  void input(const fs::path& path);
  void output(const fs::path& path);
  /// Checks every output exists and is non-empty, then writes `<dir>/manifest.json`.
  void finish(const fs::path& dir);

 private:
  std::string command_;
  std::string config_path_;
  std::uint64_t seed_;
  std::vector<fs::path> inputs_;
  std::vector<fs::path> outputs_;
  std::chrono::steady_clock::time_point start_;
};

/// Output directory: the flag when given, else $PSM_OUTPUT_DIR, else `fallback`.
fs::path output_dir(const std::string& flag, const std::string& fallback);
/// Worker threads from $PSM_WORKERS (default 1).
unsigned workers_from_env();

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

/// Corpus sizes from the optional "corpus" block of a scenario file.
struct CorpusSizes {
  std::size_t n_train = 16;
  std::size_t n_test = 4;
};
CorpusSizes corpus_sizes(const fs::path& scenario_path);

/// Training file: an optional "preset" (desk or full) overridden field by field.
train::FitOptions load_fit_options(const fs::path& path);
train::NoiseSpec load_noise(const fs::path& path);

struct ControlFile {
  control::CgConfig cg;
  std::optional<std::vector<double>> v_init;
};
ControlFile load_control(const fs::path& path, std::size_t n_controls);

/// Replaces the scenario's constraints with the "constraints" array of `path`
/// (same schema as in a scenario file).
std::vector<ConstraintSchedule> load_schedule(const ScenarioConfig& scenario, const fs::path& path);

struct DetectorFile {
  std::size_t window = 8;
  std::optional<double> zeta;
  double zeta_factor = 5.0;
  int twin_epochs = 50;
  double twin_lr_factor = 0.1;
  std::size_t conditions = 64;
  std::string condition_set = "original";  // original, degraded or both
};
DetectorFile load_detector(const fs::path& path);

std::string dump_trajectory(const solver::InputTrajectory& trajectory);
solver::InputTrajectory load_trajectory(const fs::path& path);

/// Dataset directory: scenario.json, scaling.json, train/ and test/ holding
/// rec_NNN.psmd records and traj_NNN.json inputs.
struct DatasetDir {
  fs::path root;
  fs::path scenario() const { return root / "scenario.json"; }
  fs::path scaling() const { return root / "scaling.json"; }
  fs::path split(const std::string& name) const { return root / name; }
};
/// Records of one split in file-name order.
std::vector<fs::path> record_files(const fs::path& dir);
std::vector<solver::SimulationRecord> read_records(const std::vector<fs::path>& files);

}  // namespace psm::cli
