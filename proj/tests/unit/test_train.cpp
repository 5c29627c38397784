#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>

#include "helpers.hpp"
#include "psm/core/errors.hpp"
#include "psm/core/random.hpp"
#include "psm/train/dataset.hpp"
#include "psm/train/losses.hpp"
#include "psm/train/model.hpp"
#include "psm/train/noise.hpp"
#include "psm/train/physics.hpp"
#include "psm/train/pipeline.hpp"
#include "psm/train/rollout.hpp"
#include "psm/train/trainer.hpp"

using namespace psm;
namespace fs = std::filesystem;

TEST_CASE("log-cosh values, symmetry and large arguments") {
  CHECK(train::logcosh(0.0) == 0.0);
  CHECK(train::logcosh(1.0) == doctest::Approx(0.433780830483027).epsilon(1e-14));
  CHECK(train::logcosh(800.0) == doctest::Approx(800.0 - std::log(2.0)));
  Rng r(1);
  for (int i = 0; i < 100; ++i) {
    const double e = r.uniform(-50, 50);
    CHECK(train::logcosh(e) == train::logcosh(-e));
    CHECK(train::logcosh(e) >= 0.0);
  }
  Matrix p(2, 3), t(2, 3, 0.0);
  for (std::size_t i = 0; i < 6; ++i) p.data[i] = 0.1 * static_cast<double>(i) - 0.2;
  Matrix g;
  const double l = train::measurement_loss(p, t, &g);
  double expect = 0.0;
  for (double x : p.data) expect += train::logcosh(x) / 6.0;
  CHECK(l == doctest::Approx(expect));
  for (std::size_t i = 0; i < 6; ++i) CHECK(g.data[i] == doctest::Approx(std::tanh(p.data[i]) / 6.0));
}

TEST_CASE("dataset pairs every t = 0 row with a t = delta_t row") {
  const auto c = testing::short_channel();
  const auto recs = testing::short_records(c, 2);
  const auto scaling = train::compute_scaling(recs, c);
  const auto ds = train::assemble_dataset(recs, c, scaling);
  const auto& lay = ds.layout;
  CHECK(lay.input_dim() == 2 + 2 + 18);
  CHECK(ds.size() == 2 * 6 * 6 * 2);
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, int> count;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto key = std::make_tuple(ds.record_of_row[i], ds.step_of_row[i], ds.station_of_row[i]);
    count[key] += ds.is_initial[i] ? 1 : 10;
    const double t = ds.inputs(i, train::InputLayout::t_col);
    CHECK(t == (ds.is_initial[i] ? 0.0 : 1.0));
    const auto st = ds.station_of_row[i];
    CHECK(ds.inputs(i, train::InputLayout::z_col) == doctest::Approx(c.sensor_stations[st] / scaling.z_max));
    const auto& rec = recs[ds.record_of_row[i]];
    const auto k = ds.step_of_row[i];
    const auto& target = ds.is_initial[i] ? rec.sensors[k] : rec.sensors[k + 1];
    for (int f = 0; f < 3; ++f) {
      CHECK(ds.targets(i, f) == doctest::Approx(scaling.field(f).scale(target[3 * st + f])));
      if (ds.is_initial[i]) CHECK(ds.targets(i, f) == ds.inputs(i, lay.x0_col() + 3 * st + f));
    }
  }
  for (const auto& [key, n] : count) CHECK(n == 11);
}

TEST_CASE("scaling covers the records with margin") {
  const auto c = testing::short_channel();
  const auto recs = testing::short_records(c, 2);
  const auto s = train::compute_scaling(recs, c, 0.05);
  CHECK(s.z_max == doctest::Approx(2.8));
  CHECK(s.t_max == doctest::Approx(5.0));
  for (const auto& r : recs) {
    for (const auto& st : r.states) {
      for (double t : st.T) CHECK((s.T.scale(t) > 0.0 && s.T.scale(t) < 1.0));
    }
  }
  CHECK(s.controls[0].min == doctest::Approx(0.549));
}

TEST_CASE("noise touches only x0 columns and targets") {
  train::InputLayout lay{2, 2};
  Matrix x(4, lay.input_dim(), 0.5), y(4, 3, 0.5);
  const Matrix x0 = x, y0 = y;
  Rng r(2);
  train::NoiseSpec none;
  train::add_noise(x, y, lay, none, r);
  CHECK(x.data == x0.data);
  train::NoiseSpec homo{train::NoiseMode::homoscedastic, 0.01, 0.0};
  train::add_noise(x, y, lay, homo, r);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < lay.x0_col(); ++j) CHECK(x(i, j) == 0.5);
    for (std::size_t j = lay.x0_col(); j < lay.input_dim(); ++j) CHECK(x(i, j) != 0.5);
    for (int f = 0; f < 3; ++f) CHECK(y(i, f) != 0.5);
  }
  CHECK_THROWS_AS((train::NoiseSpec{train::NoiseMode::homoscedastic, -1.0, 0.0}.validate()), ConfigError);
  Rng s(3);
  double sq = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double d = train::noisy(0.3, homo, s) - 0.3;
    sq += d * d;
  }
  CHECK(std::sqrt(sq / 20000) == doctest::Approx(0.01).epsilon(0.03));
}

TEST_CASE("collocation keeps conditions and redraws z and t") {
  train::InputLayout lay{1, 1};
  Matrix b(3, lay.input_dim());
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < b.cols; ++j) b(i, j) = static_cast<double>(10 * i + j);
  }
  Rng r(4);
  const auto c = train::sample_collocation(r, 50, b, lay);
  for (std::size_t i = 0; i < c.rows; ++i) {
    CHECK((c(i, 0) >= 0.0 && c(i, 0) < 1.0));
    CHECK((c(i, 1) >= 0.0 && c(i, 1) < 1.0));
    const auto src = static_cast<std::size_t>(c(i, 2) / 10.0);
    for (std::size_t j = 2; j < b.cols; ++j) CHECK(c(i, j) == b(src, j));
  }
}

TEST_CASE("physics loss gradient matches finite differences") {
  const auto c = testing::short_channel();
  const auto recs = testing::short_records(c, 1);
  const auto m = testing::tiny_model(c, recs);
  const auto ds = train::assemble_dataset(recs, c, m.scaling);
  Rng r(6);
  const auto colloc = train::sample_collocation(r, 16, ds.inputs, ds.layout);
  train::PhysicsContext ctx{c, m.scaling, m.layout, {}};
  std::vector<double> g(m.params.size(), 0.0);
  const double base = train::physics_loss(m.mlp, m.params, colloc, ctx, &g).loss;
  CHECK(base > 0.0);
  Rng pick(1);
  for (int t = 0; t < 40; ++t) {
    const auto j = pick.index(m.params.size());
    const double h = 1e-6;
    auto a = m.params, b = m.params;
    a[j] += h;
    b[j] -= h;
    const double fd = (train::physics_loss(m.mlp, a, colloc, ctx).loss - train::physics_loss(m.mlp, b, colloc, ctx).loss) / (2 * h);
    CHECK(std::abs(fd - g[j]) / std::max({std::abs(fd), std::abs(g[j]), 1e-8}) < 1e-5);
  }
  // A source override changes only the energy residual.
  auto ctx2 = ctx;
  ctx2.source_override = [](double, std::span<const double>) { return 0.0; };
  const auto r1 = train::physics_loss(m.mlp, m.params, colloc, ctx);
  const auto r2 = train::physics_loss(m.mlp, m.params, colloc, ctx2);
  CHECK(r1.residuals.mass == r2.residuals.mass);
  CHECK(r1.residuals.momentum == r2.residuals.momentum);
  CHECK(r1.residuals.energy != r2.residuals.energy);
}

TEST_CASE("training is reproducible and reduces the loss") {
  const auto c = testing::short_channel();
  const auto recs = testing::short_records(c, 2);
  const auto m = testing::tiny_model(c, recs);
  const auto ds = train::assemble_dataset(recs, c, m.scaling);
  train::PhysicsContext ctx{c, m.scaling, m.layout, {}};
  train::TrainConfig cfg;
  cfg.epochs = 15;
  cfg.batch_size = 32;
  cfg.collocation_batch = 32;
  cfg.adam.lr0 = 3e-3;
  const auto a = train::train(m.mlp, m.params, ds, ctx, cfg, {});
  const auto b = train::train(m.mlp, m.params, ds, ctx, cfg, {});
  CHECK(a.params == b.params);
  CHECK(a.history.back().total < a.history.front().total);
  CHECK(a.physics_evaluations == 15 * ((ds.size() + 31) / 32));

  cfg.alpha = 1.0;
  cfg.beta = 0.0;
  const auto m_only = train::train(m.mlp, m.params, ds, ctx, cfg, {});
  CHECK(m_only.physics_evaluations == 0);
  CHECK(m_only.history.back().physics == 0.0);

  cfg.alpha = 0.7;
  CHECK_THROWS_AS(train::train(m.mlp, m.params, ds, ctx, cfg, {}), ConfigError);
  cfg.alpha = 1.0;
  cfg.batch_size = 0;
  CHECK_THROWS_AS(train::train(m.mlp, m.params, ds, ctx, cfg, {}), ConfigError);
}

TEST_CASE("model save and load round trip") {
  const auto c = testing::short_channel();
  const auto recs = testing::short_records(c, 1);
  const auto m = testing::tiny_model(c, recs);
  const fs::path dir = fs::temp_directory_path() / "psm_test_model";
  fs::create_directories(dir);
  train::save_model(m, dir / "m");
  for (const auto& p : {dir / "m", dir / "m.json", dir / "m.psmw"}) {
    const auto back = train::load_model(p);
    CHECK(back.params == m.params);
    CHECK(back.stations == m.stations);
    CHECK(back.delta_t == m.delta_t);
    CHECK(back.scaling.T.max == m.scaling.T.max);
    CHECK(back.step(recs[0].sensors[0], recs[0].controls[0]) == m.step(recs[0].sensors[0], recs[0].controls[0]));
  }
  CHECK_THROWS_AS(train::load_model(dir / "absent"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("step jacobian matches finite differences") {
  const auto c = testing::short_channel();
  const auto recs = testing::short_records(c, 1);
  const auto m = testing::tiny_model(c, recs);
  const auto x = scale_sensors(m.scaling, recs[0].sensors[2]);
  const auto v = scale_controls(m.scaling, recs[0].controls[2]);
  const auto j = train::step_jacobian(m, x, v);
  CHECK(j.value == m.step_scaled(x, v));
  const double h = 1e-6;
  for (std::size_t d = 0; d < x.size(); d += 5) {
    auto a = x, b = x;
    a[d] += h;
    b[d] -= h;
    const auto ya = m.step_scaled(a, v), yb = m.step_scaled(b, v);
    for (std::size_t i = 0; i < ya.size(); ++i) CHECK(j.a(i, d) == doctest::Approx((ya[i] - yb[i]) / (2 * h)).epsilon(1e-6));
  }
  for (std::size_t d = 0; d < v.size(); ++d) {
    auto a = v, b = v;
    a[d] += h;
    b[d] -= h;
    const auto ya = m.step_scaled(x, a), yb = m.step_scaled(x, b);
    for (std::size_t i = 0; i < ya.size(); ++i) CHECK(j.b(i, d) == doctest::Approx((ya[i] - yb[i]) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("rollout bookkeeping") {
  const auto c = testing::short_channel();
  const auto recs = testing::short_records(c, 1);
  const auto m = testing::tiny_model(c, recs);
  const auto r = train::rollout_evaluate(m.mlp, m.params, m.scaling, m.layout, recs[0]);
  CHECK(r.predictions.size() == recs[0].n_times() - 1);
  CHECK(r.z.size() == 30);
  double mean_sq = 0.0;
  for (double e : r.sq_error_by_z[2]) mean_sq += e / 30.0;
  CHECK(r.rmse[2] == doctest::Approx(std::sqrt(mean_sq)));
  const auto mean = train::mean_rmse({r, r});
  CHECK(mean.values[2] == doctest::Approx(r.rmse[2]));
}

TEST_CASE("metrics csv round trip") {
  std::vector<train::EpochMetrics> h = {{1, 0.5, 0.25, 0.375, 1e-3}, {2, 0.25, 0.125, 0.1875, 1e-3}};
  const fs::path p = fs::temp_directory_path() / "psm_test_metrics.csv";
  train::write_metrics_csv(h, p);
  const auto back = train::read_metrics_csv(p);
  REQUIRE(back.size() == 2);
  CHECK(back[1].epoch == 2);
  CHECK(back[1].total == doctest::Approx(0.1875));
  fs::remove(p);
  CHECK_THROWS_AS(train::read_metrics_csv(p), IoError);
}

namespace {

double mean_abs_residual(const nn::Mlp& mlp, const std::vector<double>& params, const Matrix& colloc,
                         const train::PhysicsContext& ctx) {
  const auto r = train::physics_loss(mlp, params, colloc, ctx).residuals;
  double s = 0.0;
  for (const auto* v : {&r.mass, &r.momentum, &r.energy}) {
    for (double x : *v) s += std::abs(x);
  }
  REQUIRE(std::isfinite(s));
  return s / static_cast<double>(3 * r.mass.size());
}

}  // namespace

TEST_CASE("manufactured linear temperature balances the energy equation") {
  // Identity-activation network with unit-width layers: p and u constant, T
  // linear in z. The source q''' = rho(T) cp u dT/dz then cancels advection.
  const auto c = testing::short_channel();
  const auto recs = testing::short_records(c, 1);
  const auto scaling = train::compute_scaling(recs, c);
  const train::InputLayout layout{c.n_controls(), c.n_stations()};
  nn::MlpSpec spec;
  spec.input_dim = layout.input_dim();
  spec.head_width = 1;
  spec.head_depth = 1;
  spec.inter_width = 1;
  spec.tail_width = 1;
  spec.activation = nn::Activation::identity;
  const nn::Mlp mlp(spec);
  std::vector<double> p(mlp.n_params(), 0.0);
  // Layers: head (in x 1), inter (1 x 1), tails (1 x 3), then output weights and biases.
  const std::size_t head = spec.input_dim + 1;
  p[train::InputLayout::z_col] = 1.0;
  p[head] = 1.0;
  const std::size_t tails = head + 2;
  for (std::size_t i = 0; i < 3; ++i) p[tails + i] = 1.0;
  const std::size_t out_w = tails + 6;
  const double slope = 0.3, t0 = 0.2, u0 = 0.45, p0 = 0.5;
  p[out_w + 2] = slope;
  p[out_w + 3] = p0;
  p[out_w + 4] = u0;
  p[out_w + 5] = t0;
  REQUIRE(out_w + 6 == mlp.n_params());

  const double dTdz = slope * scaling.T.span() / scaling.z_max;
  const double u = scaling.u.unscale(u0);
  train::PhysicsContext ctx{c, scaling, layout, {}};
  ctx.source_override = [&](double z, std::span<const double>) {
    const double T = scaling.T.unscale(t0 + slope * z / scaling.z_max);
    return density(c.fluid, T) * c.fluid.cp * u * dTdz;
  };
  const auto ds = train::assemble_dataset(recs, c, scaling);
  Rng r(17);
  const auto colloc = train::sample_collocation(r, 500, ds.inputs, ds.layout);
  const auto res = train::physics_loss(mlp, p, colloc, ctx).residuals;
  double worst = 0.0;
  for (double e : res.energy) worst = std::max(worst, std::abs(e));
  CHECK(worst < 1e-8);
}

TEST_CASE("trained network has far smaller physics residuals than at initialisation") {
  const auto c = testing::short_channel();
  const auto recs = testing::short_records(c, 2);
  const auto m = testing::tiny_model(c, recs);
  const auto ds = train::assemble_dataset(recs, c, m.scaling);
  train::PhysicsContext ctx{c, m.scaling, m.layout, {}};
  train::TrainConfig cfg;
  cfg.epochs = 150;
  cfg.batch_size = 32;
  cfg.collocation_batch = 32;
  cfg.adam.lr0 = 3e-3;
  const auto trained = train::train(m.mlp, m.params, ds, ctx, cfg, {});
  Rng r(23);
  const auto colloc = train::sample_collocation(r, 10000, ds.inputs, ds.layout);
  const double before = mean_abs_residual(m.mlp, m.params, colloc, ctx);
  const double after = mean_abs_residual(m.mlp, trained.params, colloc, ctx);
  MESSAGE("mean |r| untrained " << before << ", trained " << after);
  CHECK(after * 10.0 <= before);
}

TEST_CASE("with alpha = 1 the physics configuration trains exactly like the plain network") {
  const auto c = testing::short_channel();
  const auto recs = testing::short_records(c, 2);
  const auto m = testing::tiny_model(c, recs);
  const auto ds = train::assemble_dataset(recs, c, m.scaling);
  train::TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 32;
  cfg.collocation_batch = 32;
  cfg.alpha = 1.0;
  cfg.beta = 0.0;
  // The plain network gets a physics context whose source is not even finite:
  // it must never be consulted.
  const train::PhysicsContext psm_ctx{c, m.scaling, m.layout, {}};
  train::PhysicsContext ann_ctx = psm_ctx;
  ann_ctx.source_override = [](double, std::span<const double>) { return std::nan(""); };
  const auto a = train::train(m.mlp, m.params, ds, psm_ctx, cfg, {});
  const auto b = train::train(m.mlp, m.params, ds, ann_ctx, cfg, {});
  CHECK(a.params == b.params);
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].measurement == b.history[i].measurement);
    CHECK(a.history[i].total == b.history[i].total);
  }
}

TEST_CASE("one full heated-channel episode yields 480 samples") {
  const auto c = heated_channel_preset();
  const auto recs = testing::short_records(c, 1);
  const auto scaling = train::compute_scaling(recs, c);
  CHECK(train::assemble_dataset(recs, c, scaling).size() == 480);
}

TEST_CASE("steady constant-input episode has identical t = 0 and t = delta_t targets") {
  const auto c = testing::short_channel();
  solver::TransportSolver s(c);
  const std::vector<solver::SimulationRecord> recs = {
      solver::run_experiment(s, solver::constant_trajectory({0.649, 844.65}))};
  const auto scaling = train::compute_scaling(recs, c);
  const auto ds = train::assemble_dataset(recs, c, scaling);
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> rows;
  for (std::size_t i = 0; i < ds.size(); ++i) rows[{ds.step_of_row[i], ds.station_of_row[i]}].push_back(i);
  for (const auto& [key, idx] : rows) {
    REQUIRE(idx.size() == 2);
    for (int f = 0; f < 3; ++f) CHECK(ds.targets(idx[0], f) == doctest::Approx(ds.targets(idx[1], f)).epsilon(1e-9));
  }
}

TEST_CASE("collocation positions are uniform") {
  train::InputLayout lay{1, 1};
  Matrix b(1, lay.input_dim(), 0.3);
  Rng r(21);
  const std::size_t n = 100000;
  const auto c = train::sample_collocation(r, n, b, lay);
  for (std::size_t col : {train::InputLayout::z_col, train::InputLayout::t_col}) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = c(i, col);
    std::sort(v.begin(), v.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double lo = static_cast<double>(i) / n, hi = static_cast<double>(i + 1) / n;
      ks = std::max({ks, std::abs(v[i] - lo), std::abs(hi - v[i])});
    }
    CHECK(ks < 0.01);
  }
}

TEST_CASE("noise edge cases and homoscedastic spread") {
  Rng r(22);
  const train::NoiseSpec zero{train::NoiseMode::homoscedastic, 0.0, 0.0};
  const train::NoiseSpec hetero{train::NoiseMode::heteroscedastic, 0.0, 0.5};
  for (double x : {0.0, 0.25, 0.9}) CHECK(train::noisy(x, zero, r) == x);
  for (int i = 0; i < 100; ++i) CHECK(train::noisy(0.0, hetero, r) == 0.0);
  const train::NoiseSpec homo{train::NoiseMode::homoscedastic, 0.05, 0.0};
  const int n = 1000000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = train::noisy(0.4, homo, r) - 0.4;
    sum += d;
    sq += d * d;
  }
  const double mean = sum / n;
  CHECK(std::sqrt(sq / n - mean * mean) == doctest::Approx(0.05).epsilon(0.05));
}

TEST_CASE("constant fields at rest without a source have zero residuals") {
  const auto c = testing::short_channel();
  const auto recs = testing::short_records(c, 1);
  const auto scaling = train::compute_scaling(recs, c);
  const train::InputLayout layout{c.n_controls(), c.n_stations()};
  nn::MlpSpec spec;
  spec.input_dim = layout.input_dim();
  spec.head_width = 4;
  spec.head_depth = 1;
  spec.inter_width = 3;
  spec.tail_width = 2;
  const nn::Mlp mlp(spec);
  std::vector<double> p(mlp.n_params(), 0.0);
  p[mlp.out_b_offset()] = 0.4;
  p[mlp.out_b_offset() + 1] = scaling.u.scale(0.0);
  p[mlp.out_b_offset() + 2] = 0.6;
  train::PhysicsContext ctx{c, scaling, layout, {}};
  ctx.source_override = [](double, std::span<const double>) { return 0.0; };
  const auto ds = train::assemble_dataset(recs, c, scaling);
  Rng r(23);
  const auto colloc = train::sample_collocation(r, 200, ds.inputs, ds.layout);
  const auto res = train::physics_loss(mlp, p, colloc, ctx);
  for (std::size_t i = 0; i < colloc.rows; ++i) {
    CHECK(std::abs(res.residuals.mass[i]) < 1e-12);
    CHECK(std::abs(res.residuals.momentum[i]) < 1e-12);
    CHECK(std::abs(res.residuals.energy[i]) < 1e-12);
  }
  CHECK(res.loss < 1e-20);
}
