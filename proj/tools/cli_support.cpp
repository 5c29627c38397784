#include "cli_support.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "psm/core/digest.hpp"
#include "psm/core/errors.hpp"
#include "psm/core/scenario_io.hpp"

#ifndef PSM_VERSION
#define PSM_VERSION "0.0.0"
#endif

namespace psm::cli {

using nlohmann::json;

namespace {

json parse_file(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

RunManifest::RunManifest(std::string command, std::string config_path, std::uint64_t seed)
    : command_(std::move(command)),
      config_path_(std::move(config_path)),
      seed_(seed),
      start_(std::chrono::steady_clock::now()) {}

void RunManifest::input(const fs::path& path) { inputs_.push_back(path); }
void RunManifest::output(const fs::path& path) { outputs_.push_back(path); }

void RunManifest::finish(const fs::path& dir) {
  json j;
  j["command"] = command_;
  j["config"] = config_path_;
  j["seed"] = seed_;
  j["version"] = PSM_VERSION;
  auto digests = [](const std::vector<fs::path>& files, bool must_exist) {
    json out = json::object();
    for (const auto& f : files) {
      std::error_code ec;
      if (!fs::exists(f, ec) || fs::file_size(f, ec) == 0) {
        if (must_exist) throw IoError("output missing or empty: " + f.string());
        continue;
      }
      out[f.string()] = hex64(file_digest(f));
    }
    return out;
  };
  j["inputs"] = digests(inputs_, false);
  j["outputs"] = digests(outputs_, true);
  j["duration_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  write_text(dir / "manifest.json", j.dump(2) + "\n");
}

fs::path output_dir(const std::string& flag, const std::string& fallback) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("PSM_OUTPUT_DIR"); env && *env) return env;
  return fallback;
}

unsigned workers_from_env() {
  const char* env = std::getenv("PSM_WORKERS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw ConfigError(std::string("PSM_WORKERS must be a positive integer, got ") + env);
  return static_cast<unsigned>(n);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

CorpusSizes corpus_sizes(const fs::path& scenario_path) {
  const json j = parse_file(scenario_path);
  CorpusSizes s;
  if (j.contains("corpus")) {
    s.n_train = get_or(j["corpus"], "n_train", s.n_train);
    s.n_test = get_or(j["corpus"], "n_test", s.n_test);
  }
  if (s.n_train == 0) throw ConfigError("corpus: n_train must be >= 1");
  return s;
}

train::FitOptions load_fit_options(const fs::path& path) {
  const json j = parse_file(path);
  const std::string preset = get_or<std::string>(j, "preset", "desk");
  train::FitOptions o;
  if (preset == "desk") {
    o = train::desk_preset();
  } else if (preset == "full") {
    o = train::full_preset();
  } else {
    throw ConfigError("train config: preset must be desk or full");
  }
  o.head_width = get_or(j, "head_width", o.head_width);
  o.head_depth = get_or(j, "head_depth", o.head_depth);
  o.inter_width = get_or(j, "inter_width", o.inter_width);
  o.tail_width = get_or(j, "tail_width", o.tail_width);
  auto& t = o.train;
  t.alpha = get_or(j, "alpha", t.alpha);
  t.beta = get_or(j, "beta", t.beta);
  t.epochs = get_or(j, "epochs", t.epochs);
  t.batch_size = get_or(j, "batch_size", t.batch_size);
  t.collocation_batch = get_or(j, "collocation_batch", t.collocation_batch);
  t.seed = get_or(j, "seed", t.seed);
  t.adam.lr0 = get_or(j, "lr0", t.adam.lr0);
  t.adam.decay = get_or(j, "decay", t.adam.decay);
  t.adam.decay_every = get_or(j, "decay_every", t.adam.decay_every);
  t.validate();
  return o;
}

train::NoiseSpec load_noise(const fs::path& path) {
  const json j = parse_file(path);
  train::NoiseSpec n;
  const std::string mode = get_or<std::string>(j, "mode", "none");
  if (mode == "none") {
    n.mode = train::NoiseMode::none;
  } else if (mode == "homoscedastic") {
    n.mode = train::NoiseMode::homoscedastic;
  } else if (mode == "heteroscedastic") {
    n.mode = train::NoiseMode::heteroscedastic;
  } else {
    throw ConfigError("noise: mode must be none, homoscedastic or heteroscedastic");
  }
  n.sigma = get_or(j, "sigma", n.sigma);
  n.xi = get_or(j, "xi", n.xi);
  n.validate();
  return n;
}

ControlFile load_control(const fs::path& path, std::size_t n_controls) {
  const json j = parse_file(path);
  ControlFile c;
  c.cg.horizon = get_or(j, "horizon", c.cg.horizon);
  c.cg.epsilon = get_or(j, "epsilon", c.cg.epsilon);
  c.cg.gamma = get_or(j, "gamma", c.cg.gamma);
  c.cg.qp_tolerance = get_or(j, "qp_tolerance", c.cg.qp_tolerance);
  c.cg.max_sweeps = get_or(j, "max_sweeps", c.cg.max_sweeps);
  if (j.contains("q")) {
    const auto rows = get_or<std::vector<std::vector<double>>>(j, "q", {});
    if (rows.size() != n_controls) throw ConfigError("control: q must be p x p");
    c.cg.q.resize(static_cast<Eigen::Index>(n_controls), static_cast<Eigen::Index>(n_controls));
    for (std::size_t i = 0; i < n_controls; ++i) {
      if (rows[i].size() != n_controls) throw ConfigError("control: q must be p x p");
      for (std::size_t k = 0; k < n_controls; ++k) {
        c.cg.q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
      }
    }
  }
  if (j.contains("v_init")) {
    c.v_init = get_or<std::vector<double>>(j, "v_init", {});
    if (c.v_init->size() != n_controls) throw ConfigError("control: v_init needs one value per control");
  }
  if (c.cg.horizon < 1 || c.cg.gamma < 1) throw ConfigError("control: horizon and gamma must be >= 1");
  if (c.cg.epsilon < 0.0) throw ConfigError("control: epsilon must be >= 0");
  return c;
}

std::vector<ConstraintSchedule> load_schedule(const ScenarioConfig& scenario, const fs::path& path) {
  const json sched = parse_file(path);
  if (!sched.contains("constraints")) throw ConfigError(path.string() + ": missing 'constraints'");
  json base = json::parse(dump_scenario(scenario));
  base["constraints"] = sched["constraints"];
  return parse_scenario(base.dump()).constraints;
}

DetectorFile load_detector(const fs::path& path) {
  const json j = parse_file(path);
  DetectorFile d;
  d.window = get_or(j, "window", d.window);
  if (j.contains("zeta")) d.zeta = get_or(j, "zeta", 0.0);
  d.zeta_factor = get_or(j, "zeta_factor", d.zeta_factor);
  d.twin_epochs = get_or(j, "twin_epochs", d.twin_epochs);
  d.twin_lr_factor = get_or(j, "twin_lr_factor", d.twin_lr_factor);
  d.conditions = get_or(j, "conditions", d.conditions);
  d.condition_set = get_or(j, "condition_set", d.condition_set);
  if (d.window < 1) throw ConfigError("detector: window must be >= 1");
  if (d.zeta && !(*d.zeta > 0.0)) throw ConfigError("detector: zeta must be > 0");
  if (!(d.zeta_factor > 0.0)) throw ConfigError("detector: zeta_factor must be > 0");
  if (d.twin_epochs < 0 || !(d.twin_lr_factor > 0.0)) throw ConfigError("detector: bad twin settings");
  if (d.condition_set != "original" && d.condition_set != "degraded" && d.condition_set != "both") {
    throw ConfigError("detector: condition_set must be original, degraded or both");
  }
  return d;
}

std::string dump_trajectory(const solver::InputTrajectory& trajectory) {
  json j;
  j["channels"] = json::array();
  for (const auto& c : trajectory.channels) j["channels"].push_back({{"times", c.times}, {"values", c.values}});
  return j.dump(2) + "\n";
}

solver::InputTrajectory load_trajectory(const fs::path& path) {
  const json j = parse_file(path);
  solver::InputTrajectory t;
  try {
    for (const auto& c : j.at("channels")) {
      solver::ChannelSeries s;
      s.times = c.at("times").get<std::vector<double>>();
      s.values = c.at("values").get<std::vector<double>>();
      if (s.times.empty() || s.times.size() != s.values.size()) {
        throw ConfigError(path.string() + ": times and values must be non-empty and equally long");
      }
      t.channels.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return t;
}

std::vector<fs::path> record_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".psmd") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw IoError("no .psmd records in " + dir.string());
  return out;
}

std::vector<solver::SimulationRecord> read_records(const std::vector<fs::path>& files) {
  std::vector<solver::SimulationRecord> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(solver::read_record(f));
  return out;
}

}  // namespace psm::cli
