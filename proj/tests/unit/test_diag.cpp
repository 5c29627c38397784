#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "helpers.hpp"
#include "psm/core/errors.hpp"
#include "psm/diag/detector.hpp"
#include "psm/diag/residuals.hpp"
#include "psm/diag/signature.hpp"
#include "psm/diag/twin.hpp"
#include "psm/train/physics.hpp"

using namespace psm;
namespace fs = std::filesystem;

namespace {

// Stream whose measurements are the model's own predictions, plus `bias` from
// sample `from` onwards.
std::vector<diag::StreamSample> self_stream(const train::Model& m, const solver::SimulationRecord& rec,
                                            double bias, std::size_t from) {
  auto s = diag::stream_from_record(rec, m.scaling);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i].measured = m.step_scaled(s[i].x0, s[i].v);
    if (i >= from) {
      for (double& y : s[i].measured) y += bias;
    }
  }
  return s;
}

diag::ResidualCurves curves(std::size_t n, double (*f)(double)) {
  diag::ResidualCurves c;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 0.1 * static_cast<double>(i);
    c.z.push_back(z);
    c.mass.push_back(f(z));
    c.momentum.push_back(2.0 * f(z));
    c.energy.push_back(-f(z));
  }
  return c;
}

}  // namespace

TEST_CASE("detector stays quiet on a perfect stream and latches on a bias") {
  const auto c = testing::short_channel();
  auto c40 = c;
  c40.episode_duration = 100.0;
  const auto recs = testing::short_records(c40, 1);
  const auto m = testing::tiny_model(c40, recs);
  diag::DetectorConfig cfg{1e-4, 4};
  CHECK_FALSE(diag::detect(m, self_stream(m, recs[0], 0.0, 0), cfg).has_value());
  const auto stream = self_stream(m, recs[0], 0.05, 9);
  const auto at = diag::detect(m, stream, cfg);
  REQUIRE(at.has_value());
  // Samples 8..11 form the first window that contains biased samples.
  CHECK(*at == 11);

  diag::Detector d(m, cfg);
  for (const auto& s : stream) d.push(s);
  CHECK(d.window_mse().size() == stream.size() / 4);
  CHECK(d.latched_at() == at);

  CHECK_THROWS_AS((diag::Detector{m, {0.0, 4}}), ConfigError);
  CHECK_THROWS_AS((diag::Detector{m, {1.0, 0}}), ConfigError);
}

TEST_CASE("zeta calibration uses the 95th percentile of window errors") {
  const auto c = testing::short_channel();
  auto c100 = c;
  c100.episode_duration = 100.0;
  const auto recs = testing::short_records(c100, 1);
  const auto m = testing::tiny_model(c100, recs);
  const auto stream = diag::stream_from_record(recs[0], m.scaling);
  auto e = diag::window_errors(m, stream, 2);
  REQUIRE(e.size() == 10);
  std::sort(e.begin(), e.end());
  CHECK(diag::calibrate_zeta(m, stream, 2, 5.0) == doctest::Approx(5.0 * e[9]));
  CHECK_THROWS_AS(diag::calibrate_zeta(m, {}, 2), ConfigError);
}

TEST_CASE("twin fine-tuning lowers the post-fault error") {
  const auto c = testing::short_channel();
  const auto recs = testing::short_records(c, 2);
  const auto m = testing::tiny_model(c, recs);
  const auto ds = train::assemble_dataset(recs, c, m.scaling);
  diag::TwinConfig cfg;
  cfg.epochs = 20;
  cfg.batch_size = 32;
  cfg.lr_factor = 1.0;
  const auto twin = diag::transfer_learn_twin(m, ds, cfg);
  CHECK(twin.history.size() == 20);
  train::Model tm{m.mlp, twin.params, m.scaling, m.layout, m.stations, m.delta_t};
  CHECK(diag::measurement_mse(tm, ds) < diag::measurement_mse(m, ds));

  train::Dataset empty;
  empty.layout = ds.layout;
  CHECK(diag::transfer_learn_twin(m, empty, cfg).params == m.params);

  // Quiet first epoch, then a step size large enough to blow the loss up.
  cfg.adam.lr0 = 1e-5;
  cfg.adam.decay = 1e7;
  cfg.adam.decay_every = 1;
  cfg.epochs = 10;
  CHECK_THROWS_AS(diag::transfer_learn_twin(m, ds, cfg), NumericalError);
}

TEST_CASE("residual curves average over conditions") {
  const auto c = testing::short_channel();
  const auto recs = testing::short_records(c, 2);
  const auto m = testing::tiny_model(c, recs);
  const auto ds = train::assemble_dataset(recs, c, m.scaling);
  const auto cond = diag::conditions_from(ds, 5);
  CHECK(cond.rows == 5);
  CHECK(cond.cols == ds.layout.input_dim());
  train::PhysicsContext ctx{c, m.scaling, m.layout, {}};
  const std::vector<double> z = {0.3, 1.4, 2.5};
  const auto r = diag::pde_residuals(m, ctx, cond, z);
  REQUIRE(r.mass.size() == 3);
  // Direct evaluation of the same points.
  Matrix pts(cond.rows, cond.cols);
  double mean = 0.0;
  for (std::size_t i = 0; i < cond.rows; ++i) {
    std::copy(cond.row(i).begin(), cond.row(i).end(), pts.row(i).begin());
    pts(i, 0) = 1.4 / m.scaling.z_max;
    pts(i, 1) = 0.5;
  }
  const auto direct = train::physics_loss(m.mlp, m.params, pts, ctx);
  for (double e : direct.residuals.energy) mean += e / static_cast<double>(cond.rows);
  CHECK(r.energy[1] == doctest::Approx(mean));
}

TEST_CASE("signature of identical curves is zero") {
  const auto a = curves(30, [](double z) { return std::sin(z); });
  const auto s = diag::signature(a, a);
  for (const auto* cs : {&s.mass, &s.momentum, &s.energy}) {
    for (std::size_t i = 0; i < 30; ++i) {
      CHECK(cs->difference[i] == 0.0);
      CHECK(cs->scaled[i] == 0.0);
    }
  }
}

TEST_CASE("signature difference and scaling") {
  const auto a = curves(30, [](double z) { return std::sin(z); });
  const auto b = curves(30, [](double z) { return 0.5 * std::sin(z) + 0.1; });
  const auto s = diag::signature(a, b);
  double lo = 1e9, hi = -1e9;
  for (std::size_t i = 0; i < 30; ++i) {
    CHECK(s.mass.difference[i] == doctest::Approx(a.mass[i] - b.mass[i]));
    lo = std::min(lo, s.mass.scaled[i]);
    hi = std::max(hi, s.mass.scaled[i]);
  }
  CHECK(lo == doctest::Approx(-1.0));
  CHECK(hi == doctest::Approx(1.0));
  auto c = b;
  c.z.pop_back();
  CHECK_THROWS_AS(diag::signature(a, c), ConfigError);

  const fs::path p = fs::temp_directory_path() / "psm_test_sig.csv";
  diag::write_signature_csv(s, p);
  std::ifstream in(p);
  std::string header;
  std::getline(in, header);
  CHECK(header == "z,eq,r_nom,r_m,r,scaled_r");
  std::size_t lines = 0;
  for (std::string l; std::getline(in, l);) ++lines;
  CHECK(lines == 90);
  fs::remove(p);
}

TEST_CASE("localization ratio") {
  const std::vector<double> z = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
  CHECK(diag::localization_ratio(z, {0.1, 0.1, 3.0, -2.0, 0.2, 0.0}, 1.5, 3.5) == doctest::Approx(15.0));
  CHECK(diag::localization_ratio(z, {0.0, 0.0, 1.0, 0.0, 0.0, 0.0}, 1.5, 3.5) == std::numeric_limits<double>::infinity());
  CHECK(diag::localization_ratio(z, std::vector<double>(6, 0.0), 1.5, 3.5) == 0.0);
}

TEST_CASE("infinite threshold never latches and curves are deterministic") {
  const auto c = testing::short_channel();
  const auto recs = testing::short_records(c, 1);
  const auto m = testing::tiny_model(c, recs);
  const diag::DetectorConfig cfg{std::numeric_limits<double>::infinity(), 2};
  CHECK_FALSE(diag::detect(m, self_stream(m, recs[0], 10.0, 0), cfg).has_value());

  const auto ds = train::assemble_dataset(recs, c, m.scaling);
  const auto cond = diag::conditions_from(ds, 4);
  train::PhysicsContext ctx{c, m.scaling, m.layout, {}};
  const std::vector<double> z = {0.2, 1.1, 2.6};
  const auto a = diag::pde_residuals(m, ctx, cond, z);
  const auto b = diag::pde_residuals(m, ctx, cond, z);
  CHECK(a.mass == b.mass);
  CHECK(a.momentum == b.momentum);
  CHECK(a.energy == b.energy);
}
