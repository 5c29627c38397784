#include "psm/train/pipeline.hpp"

#include <fstream>
#include <sstream>

#include "psm/core/errors.hpp"
#include "psm/core/random.hpp"
#include "psm/solver/trajectory.hpp"
#include "psm/solver/transport_solver.hpp"

namespace psm::train {

Corpus make_corpus(const ScenarioConfig& scenario, std::uint64_t seed, std::size_t n_train,
                   std::size_t n_test, std::size_t workers) {
  solver::TransportSolver s(scenario);
  auto recs = solver::run_corpus(s, solver::generate_trajectories(seed, scenario, n_train + n_test), workers);
  Corpus c;
  c.train.assign(std::make_move_iterator(recs.begin()),
                 std::make_move_iterator(recs.begin() + static_cast<std::ptrdiff_t>(n_train)));
  c.test.assign(std::make_move_iterator(recs.begin() + static_cast<std::ptrdiff_t>(n_train)),
                std::make_move_iterator(recs.end()));
  return c;
}

FitOptions desk_preset() {
  FitOptions o;
  o.train.epochs = 200;
  o.train.batch_size = 512;
  o.train.collocation_batch = 512;
  return o;
}

FitOptions full_preset() {
  FitOptions o;
  o.head_width = 200;
  o.inter_width = 100;
  o.tail_width = 100;
  o.train.epochs = 500;
  o.train.batch_size = 2048;
  o.train.collocation_batch = 2048;
  return o;
}

Fitted fit_model(const ScenarioConfig& scenario, const std::vector<solver::SimulationRecord>& records,
                 const FitOptions& o, const EpochCallback& on_epoch) {
  const ScalingSpec sc = compute_scaling(records, scenario);
  const Dataset ds = assemble_dataset(records, scenario, sc);
  nn::MlpSpec spec;
  spec.input_dim = ds.layout.input_dim();
  spec.head_width = o.head_width;
  spec.head_depth = o.head_depth;
  spec.inter_width = o.inter_width;
  spec.tail_width = o.tail_width;
  nn::Mlp mlp(spec);
  PhysicsContext ctx{scenario, sc, ds.layout, {}};
  auto res = train(mlp, mlp.init_params(derive_seed(o.train.seed, 0)), ds, ctx, o.train, o.noise, on_epoch);
  return {Model{mlp, std::move(res.params), sc, ds.layout, scenario.sensor_stations, scenario.delta_t},
          std::move(res.history), res.physics_evaluations};
}

void write_metrics_csv(const std::vector<EpochMetrics>& history, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(12);
  out << "epoch,L_m,L_p,L_sigma,learning_rate\n";
  for (const auto& m : history) {
    out << m.epoch << ',' << m.measurement << ',' << m.physics << ',' << m.total << ','
        << m.learning_rate << '\n';
  }
}

std::vector<EpochMetrics> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<EpochMetrics> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    EpochMetrics m;
    char c1, c2, c3, c4;
    if (!(ss >> m.epoch >> c1 >> m.measurement >> c2 >> m.physics >> c3 >> m.total >> c4 >> m.learning_rate)) {
      throw IoError(path.string() + ": malformed metrics row");
    }
    out.push_back(m);
  }
  return out;
}

}  // namespace psm::train
