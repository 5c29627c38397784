#include <cstdio>
#include <iostream>
#include <limits>
#include <map>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli_support.hpp"
#include "psm/control/ncg.hpp"
#include "psm/core/errors.hpp"
#include "psm/core/scaling_io.hpp"
#include "psm/core/scenario_io.hpp"
#include "psm/diag/detector.hpp"
#include "psm/diag/residuals.hpp"
#include "psm/diag/signature.hpp"
#include "psm/diag/twin.hpp"
#include "psm/solver/transport_solver.hpp"
#include "psm/train/rollout.hpp"

namespace psm::cli {
namespace {

using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

std::string zero_pad(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03zu", i);
  return buf;
}

bool same_scaling(const ScalingSpec& a, const ScalingSpec& b) { return dump_scaling(a) == dump_scaling(b); }

void check_model_matches(const train::Model& model, const ScenarioConfig& sc) {
  if (model.stations != sc.sensor_stations || model.layout.n_controls != sc.n_controls()) {
    throw ConfigError("model stations/controls do not match scenario '" + sc.name + "'");
  }
}

// Records of a dataset directory: train/ then test/ when present, else the
// directory itself.
std::vector<fs::path> stream_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const char* split : {"train", "test"}) {
    if (fs::is_directory(dir / split)) {
      auto f = record_files(dir / split);
      out.insert(out.end(), f.begin(), f.end());
    }
  }
  return out.empty() ? record_files(dir) : out;
}

solver::SimulationRecord slice_from(const solver::SimulationRecord& r, std::size_t k) {
  solver::SimulationRecord s = r;
  auto cut = [k](auto& v) { v.erase(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k)); };
  cut(s.times);
  cut(s.controls);
  cut(s.states);
  cut(s.sensors);
  return s;
}

// ---------------------------------------------------------------- gen-data

struct GenArgs {
  std::string config;
  std::uint64_t seed = 2024;
  std::string out;
};

int cmd_gen_data(const GenArgs& a) {
  RunManifest m("gen-data", a.config, a.seed);
  m.input(a.config);
  const ScenarioConfig sc = load_scenario(a.config);
  const CorpusSizes sizes = corpus_sizes(a.config);
  const DatasetDir dir{output_dir(a.out, "data")};
  fs::create_directories(dir.root);

  const solver::TransportSolver solver(sc);
  const auto trajs = solver::generate_trajectories(a.seed, sc, sizes.n_train + sizes.n_test);
  const auto recs = solver::run_corpus(solver, trajs, workers_from_env());
  const std::vector<solver::SimulationRecord> train(recs.begin(), recs.begin() + static_cast<std::ptrdiff_t>(sizes.n_train));

  save_scenario(sc, dir.scenario());
  m.output(dir.scenario());
  save_scaling(train::compute_scaling(train, sc), dir.scaling());
  m.output(dir.scaling());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const bool is_train = i < sizes.n_train;
    const std::size_t local = is_train ? i : i - sizes.n_train;
    const fs::path split = dir.split(is_train ? "train" : "test");
    fs::create_directories(split);
    const fs::path rec = split / ("rec_" + zero_pad(local) + ".psmd");
    const fs::path traj = split / ("traj_" + zero_pad(local) + ".json");
    solver::write_record(recs[i], rec);
    solver::read_record(rec);
    write_text(traj, dump_trajectory(trajs[i]));
    m.output(rec);
    m.output(traj);
  }
  m.finish(dir.root);
  std::printf("wrote %zu train + %zu test records to %s\n", sizes.n_train, sizes.n_test, dir.root.c_str());
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string data;
  std::string config;
  std::string mode = "psm";
  std::string noise;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool quiet = false;
};

int cmd_train(const TrainArgs& a) {
  const DatasetDir data{a.data};
  const ScenarioConfig sc = load_scenario(data.scenario());
  train::FitOptions opt = a.config.empty() ? train::desk_preset() : load_fit_options(a.config);
  if (a.mode == "ann") {
    opt.train.alpha = 1.0;
    opt.train.beta = 0.0;
  }
  if (a.seed) opt.train.seed = *a.seed;
  if (!a.noise.empty()) opt.noise = load_noise(a.noise);

  RunManifest m("train --mode " + a.mode, a.config, opt.train.seed);
  m.input(data.scenario());
  m.input(data.scaling());
  if (!a.config.empty()) m.input(a.config);
  if (!a.noise.empty()) m.input(a.noise);
  const auto files = record_files(data.split("train"));
  for (const auto& f : files) m.input(f);
  const auto records = read_records(files);

  const auto fitted = train::fit_model(sc, records, opt, [&](const train::EpochMetrics& e) {
    if (!a.quiet && (e.epoch == 1 || e.epoch % 10 == 0)) {
      std::fprintf(stderr, "epoch %4d  L_m %.4e  L_p %.4e  L_sigma %.4e  lr %.2e\n", e.epoch, e.measurement,
                   e.physics, e.total, e.learning_rate);
    }
  });
  if (!same_scaling(fitted.model.scaling, load_scaling(data.scaling()))) {
    throw ConfigError("scaling of " + data.root.string() + " does not match its training records");
  }

  const fs::path out = output_dir(a.out, "model");
  fs::create_directories(out);
  train::save_model(fitted.model, out / "model");
  train::write_metrics_csv(fitted.history, out / "metrics.csv");
  train::load_model(out / "model");
  m.output(out / "model.psmw");
  m.output(out / "model.json");
  m.output(out / "metrics.csv");
  m.finish(out);
  const auto& last = fitted.history.back();
  std::printf("trained %s model, %d epochs, final L_sigma %.4e -> %s\n", a.mode.c_str(), last.epoch, last.total,
              out.c_str());
  return 0;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::vector<std::string> models;
  std::string data;
  std::string split = "test";
  std::string out;
};

int cmd_eval(const EvalArgs& a) {
  if (a.models.empty() || a.models.size() > 2) throw ConfigError("eval: give one or two --model paths");
  const DatasetDir data{a.data};
  const ScalingSpec data_scaling = load_scaling(data.scaling());
  RunManifest m("eval", "", 0);
  m.input(data.scaling());
  const auto files = record_files(data.split(a.split));
  for (const auto& f : files) m.input(f);
  const auto records = read_records(files);

  struct Row {
    std::string model;
    train::RmseRow mean, max;
  };
  std::vector<Row> rows;
  for (const auto& path : a.models) {
    const auto model = train::load_model(path);
    m.input(fs::path(path).replace_extension(".psmw"));
    if (!same_scaling(model.scaling, data_scaling)) {
      throw ConfigError("eval: scaling of " + path + " does not match " + data.scaling().string());
    }
    std::vector<train::RolloutResult> rr;
    for (const auto& r : records) {
      rr.push_back(train::rollout_evaluate(model.mlp, model.params, model.scaling, model.layout, r));
    }
    rows.push_back({path, train::mean_rmse(rr), train::max_rmse(rr)});
  }

  std::string csv = "model,stat,p_Pa,u_m_s,T_K\n";
  auto line = [&](const std::string& model, const char* stat, const double* v) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%s,%.6g,%.6g,%.6g\n", model.c_str(), stat, v[0], v[1], v[2]);
    csv += buf;
  };
  for (const auto& r : rows) {
    line(r.model, "mean", r.mean.values);
    line(r.model, "max", r.max.values);
  }
  if (rows.size() == 2) {
    // Second model over first, per field.
    double mean_ratio[3], max_ratio[3];
    for (int f = 0; f < 3; ++f) {
      mean_ratio[f] = rows[1].mean.values[f] / rows[0].mean.values[f];
      max_ratio[f] = rows[1].max.values[f] / rows[0].max.values[f];
    }
    line("ratio", "mean", mean_ratio);
    line("ratio", "max", max_ratio);
  }
  const fs::path out = output_dir(a.out, "eval");
  write_text(out / "rmse.csv", csv);
  m.output(out / "rmse.csv");
  m.finish(out);
  std::fputs(csv.c_str(), stdout);
  return 0;
}

// ---------------------------------------------------------------- control

struct ControlArgs {
  std::string model;
  std::string config;
  std::string reference;
  std::string schedule;
  bool no_constraints = false;
  std::string control_config;
  std::string out;
};

int cmd_control(const ControlArgs& a) {
  const ScenarioConfig sc = load_scenario(a.config);
  const auto model = train::load_model(a.model);
  check_model_matches(model, sc);
  RunManifest m("control", a.control_config, 0);
  m.input(a.config);
  m.input(fs::path(a.model).replace_extension(".psmw"));
  m.input(a.reference);

  std::vector<ConstraintSchedule> schedules = sc.constraints;
  if (a.no_constraints) {
    schedules.clear();
  } else if (!a.schedule.empty()) {
    schedules = load_schedule(sc, a.schedule);
    m.input(a.schedule);
  }
  ControlFile cf;
  if (!a.control_config.empty()) {
    cf = load_control(a.control_config, sc.n_controls());
    m.input(a.control_config);
  }
  const auto reference = load_trajectory(a.reference);
  solver::validate(reference, sc);

  const solver::TransportSolver env(sc);
  const auto log = control::ncg_rollout(model, env, reference, schedules, cf.cg, cf.v_init);
  const fs::path out = output_dir(a.out, "control");
  fs::create_directories(out);
  control::write_ncg_csv(log, out / "rollout.csv");
  m.output(out / "rollout.csv");
  m.finish(out);
  std::size_t active = 0;
  for (const auto& s : log.steps) active += s.active ? 1 : 0;
  std::printf("%zu steps, governor active on %zu, %zu linearizations, max bound excess %.4g\n", log.steps.size(),
              active, log.linearizations, log.max_violation);
  return 0;
}

// ---------------------------------------------------------------- diagnose

struct DiagnoseArgs {
  std::string model;
  std::string nominal_data;
  std::string stream;
  std::string detector;
  std::uint64_t seed = 7;
  std::string out;
};

int cmd_diagnose(const DiagnoseArgs& a) {
  const DatasetDir nominal{a.nominal_data};
  const ScenarioConfig sc = load_scenario(nominal.scenario());
  const auto model = train::load_model(a.model);
  check_model_matches(model, sc);
  const DetectorFile det = a.detector.empty() ? DetectorFile{} : load_detector(a.detector);
  RunManifest m("diagnose", a.detector, a.seed);
  m.input(nominal.scenario());
  m.input(fs::path(a.model).replace_extension(".psmw"));
  if (!a.detector.empty()) m.input(a.detector);

  const auto nominal_files = record_files(nominal.split("train"));
  const auto nominal_records = read_records(nominal_files);
  diag::DetectorConfig dcfg;
  dcfg.window = det.window;
  if (det.zeta) {
    dcfg.zeta = *det.zeta;
  } else {
    std::vector<diag::StreamSample> validation;
    for (const auto& r : nominal_records) {
      auto s = diag::stream_from_record(r, model.scaling);
      validation.insert(validation.end(), s.begin(), s.end());
    }
    dcfg.zeta = diag::calibrate_zeta(model, validation, det.window, det.zeta_factor);
  }

  const auto files = stream_files(a.stream);
  for (const auto& f : files) m.input(f);
  const auto stream = read_records(files);
  diag::Detector detector(model, dcfg);
  std::optional<std::pair<std::size_t, std::size_t>> latch;  // (record, step)
  for (std::size_t r = 0; r < stream.size() && !latch; ++r) {
    const auto samples = diag::stream_from_record(stream[r], model.scaling);
    for (std::size_t k = 0; k < samples.size(); ++k) {
      if (detector.push(samples[k])) {
        latch = {r, k};
        break;
      }
    }
  }

  const fs::path out = output_dir(a.out, "diagnose");
  fs::create_directories(out);
  json verdict;
  verdict["zeta"] = dcfg.zeta;
  verdict["window"] = dcfg.window;
  std::string text;
  if (!latch) {
    verdict["degradation"] = false;
    text = "no degradation detected (" + std::to_string(stream.size()) + " records, zeta " +
           std::to_string(dcfg.zeta) + ")\n";
  } else {
    const auto [rec, step] = *latch;
    std::vector<solver::SimulationRecord> post{slice_from(stream[rec], step)};
    post.insert(post.end(), stream.begin() + static_cast<std::ptrdiff_t>(rec) + 1, stream.end());
    const auto fault_ds = train::assemble_dataset(post, sc, model.scaling);

    diag::TwinConfig tcfg;
    tcfg.epochs = det.twin_epochs;
    tcfg.lr_factor = det.twin_lr_factor;
    tcfg.seed = a.seed;
    const auto twin = diag::transfer_learn_twin(model, fault_ds, tcfg);
    const train::Model twin_model{model.mlp, twin.params, model.scaling, model.layout, model.stations,
                                  model.delta_t};
    train::save_model(twin_model, out / "twin");
    m.output(out / "twin.psmw");
    m.output(out / "twin.json");

    Matrix conditions;
    const auto nominal_ds = train::assemble_dataset(nominal_records, sc, model.scaling);
    if (det.condition_set == "original") {
      conditions = diag::conditions_from(nominal_ds, det.conditions);
    } else if (det.condition_set == "degraded") {
      conditions = diag::conditions_from(fault_ds, det.conditions);
    } else {
      const Matrix c0 = diag::conditions_from(nominal_ds, det.conditions);
      const Matrix c1 = diag::conditions_from(fault_ds, det.conditions);
      conditions = Matrix(c0.rows + c1.rows, c0.cols);
      std::copy_n(c0.ptr(), c0.rows * c0.cols, conditions.ptr());
      std::copy_n(c1.ptr(), c1.rows * c1.cols, conditions.ptr() + c0.rows * c0.cols);
    }
    const train::PhysicsContext pctx{sc, model.scaling, model.layout, {}};
    const auto z = solver::TransportSolver(sc).grid().centers;
    const auto sig = diag::signature(diag::pde_residuals(model, pctx, conditions, z),
                                     diag::pde_residuals(twin_model, pctx, conditions, z));
    diag::write_signature_csv(sig, out / "signature.csv");
    m.output(out / "signature.csv");

    // Localization ratio of every equation over every segment; the candidate is
    // the segment with the largest momentum ratio.
    json segs = json::array();
    double start = 0.0, best = -1.0;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < sc.segments.size(); ++i) {
      const double lo = start, hi = start + sc.segments[i].length;
      start = hi;
      const double rm = diag::localization_ratio(z, sig.momentum.difference, lo, hi);
      segs.push_back({{"segment", sc.segments[i].name},
                      {"z_min", lo},
                      {"z_max", hi},
                      {"mass", diag::localization_ratio(z, sig.mass.difference, lo, hi)},
                      {"momentum", rm},
                      {"energy", diag::localization_ratio(z, sig.energy.difference, lo, hi)}});
      if (rm > best) {
        best = rm;
        best_i = i;
      }
    }
    verdict["degradation"] = true;
    verdict["latch"] = {{"record", files[rec].string()}, {"step", step}, {"sample", *detector.latched_at()}};
    verdict["twin_mse"] = {{"nominal_model", diag::measurement_mse(model, fault_ds)},
                           {"twin_model", diag::measurement_mse(twin_model, fault_ds)}};
    verdict["localization"] = segs;
    verdict["candidate_segment"] = sc.segments[best_i].name;
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "degradation detected in %s at step %zu; momentum localization ratio %.2f over segment '%s' "
                  "[%.2f, %.2f] m%s\n",
                  files[rec].filename().c_str(), step, best, sc.segments[best_i].name.c_str(),
                  segs[best_i]["z_min"].get<double>(), segs[best_i]["z_max"].get<double>(),
                  best >= 2.0 ? "" : " (not localized: ratio below 2)");
    text = buf;
  }
  verdict["text"] = text;
  write_text(out / "verdict.json", verdict.dump(2) + "\n");
  write_text(out / "verdict.txt", text);
  m.output(out / "verdict.json");
  m.output(out / "verdict.txt");
  m.finish(out);
  std::fputs(text.c_str(), stdout);
  return 0;
}

}  // namespace
}  // namespace psm::cli

int main(int argc, char** argv) {
  using namespace psm::cli;
  CLI::App app{"Physics-informed state-space models for 1D transport"};
  app.require_subcommand(1);
  app.set_version_flag("--version", PSM_VERSION);

  GenArgs gen;
  auto* g = app.add_subcommand("gen-data", "Simulate a training/test corpus");
  g->add_option("--config", gen.config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  g->add_option("--seed", gen.seed, "Trajectory seed");
  g->add_option("--out", gen.out, "Output directory");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a PSM or a plain ANN");
  t->add_option("--data", tr.data, "Dataset directory from gen-data")->required()->check(CLI::ExistingDirectory);
  t->add_option("--config", tr.config, "Training JSON")->check(CLI::ExistingFile);
  t->add_option("--mode", tr.mode, "psm or ann")->check(CLI::IsMember({"psm", "ann"}));
  t->add_option("--noise", tr.noise, "Noise JSON")->check(CLI::ExistingFile);
  t->add_option("--seed", tr.seed, "Training seed (overrides the config)");
  t->add_option("--out", tr.out, "Output directory");
  t->add_flag("--quiet", tr.quiet, "No per-epoch progress");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Closed-loop RMSE table");
  e->add_option("--model", ev.models, "Model path (give two for ratio rows)")->required();
  e->add_option("--data", ev.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  e->add_option("--split", ev.split, "train or test")->check(CLI::IsMember({"train", "test"}));
  e->add_option("--out", ev.out, "Output directory");

  ControlArgs ct;
  auto* c = app.add_subcommand("control", "Command-governor rollout against the reference solver");
  c->add_option("--model", ct.model, "Model path")->required();
  c->add_option("--config", ct.config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  c->add_option("--reference", ct.reference, "Reference trajectory JSON")->required()->check(CLI::ExistingFile);
  auto* sched = c->add_option("--schedule", ct.schedule, "Constraint schedule JSON")->check(CLI::ExistingFile);
  c->add_flag("--no-constraints", ct.no_constraints, "Run with an empty schedule")->excludes(sched);
  c->add_option("--control-config", ct.control_config, "Governor JSON")->check(CLI::ExistingFile);
  c->add_option("--out", ct.out, "Output directory");

  DiagnoseArgs dg;
  auto* d = app.add_subcommand("diagnose", "Degradation latch, twin fine-tuning and residual signature");
  d->add_option("--model", dg.model, "Nominal model path")->required();
  d->add_option("--nominal-data", dg.nominal_data, "Dataset the nominal model was trained on")
      ->required()
      ->check(CLI::ExistingDirectory);
  d->add_option("--stream", dg.stream, "Directory of new records")->required()->check(CLI::ExistingDirectory);
  d->add_option("--detector", dg.detector, "Detector JSON")->check(CLI::ExistingFile);
  d->add_option("--seed", dg.seed, "Twin fine-tuning seed");
  d->add_option("--out", dg.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*g) return cmd_gen_data(gen);
    if (*t) return cmd_train(tr);
    if (*e) return cmd_eval(ev);
    if (*c) return cmd_control(ct);
    if (*d) return cmd_diagnose(dg);
  } catch (const psm::ConfigError& err) {
    std::cerr << "config error: " << err.what() << '\n';
    return kExitConfig;
  } catch (const psm::NumericalError& err) {
    std::cerr << "numerical error: " << err.what() << '\n';
    return kExitNumerical;
  } catch (const psm::IoError& err) {
    std::cerr << "i/o error: " << err.what() << '\n';
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& err) {
    std::cerr << "i/o error: " << err.what() << '\n';
    return kExitIo;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 0;
}
