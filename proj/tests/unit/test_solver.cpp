#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "psm/core/errors.hpp"
#include "psm/core/fluid.hpp"
#include "psm/core/grid.hpp"
#include "psm/core/random.hpp"
#include "psm/core/scenario_io.hpp"
#include "psm/solver/record.hpp"
#include "psm/solver/trajectory.hpp"
#include "psm/solver/transport_solver.hpp"

using namespace psm;
namespace fs = std::filesystem;

TEST_CASE("heated channel steady rise matches the energy balance") {
  const auto c = heated_channel_preset();
  solver::TransportSolver s(c);
  for (const auto& v : {std::vector<double>{0.649, 844.65}, std::vector<double>{0.549, 804.65},
                        std::vector<double>{0.749, 884.65}}) {
    const auto st = s.steady_state(v);
    const double analytic = 50e6 * 0.8 / (density(c.fluid, v[1]) * v[0] * c.fluid.cp);
    CHECK(st.T.back() - st.T.front() == doctest::Approx(analytic).epsilon(1e-6));
    // Unheated sections stay flat.
    CHECK(st.T[9] == doctest::Approx(st.T[0]));
    CHECK(st.T[29] == doctest::Approx(st.T[20]));
    const auto [lo, hi] = std::minmax_element(st.face_mass_flow.begin(), st.face_mass_flow.end());
    CHECK((*hi - *lo) / *hi < 1e-9);
  }
}

TEST_CASE("outlet pressure is pinned and pressure falls downstream") {
  const auto c = heated_channel_preset();
  solver::TransportSolver s(c);
  const auto st = s.steady_state({0.649, 844.65});
  CHECK(st.p.front() > st.p.back());
  CHECK(std::abs(st.p.back()) < 50.0);
}

TEST_CASE("sensors sample the stations station-major") {
  const auto c = heated_channel_preset();
  solver::TransportSolver s(c);
  const auto st = s.steady_state({0.649, 844.65});
  const auto y = s.sensors(st);
  REQUIRE(y.size() == 3 * c.n_stations());
  CHECK(y[2] == doctest::Approx(interpolate_centers(s.grid(), st.T, 0.25)));
  CHECK(y[3 * 4 + 2] == doctest::Approx(interpolate_centers(s.grid(), st.T, 2.3)));
}

TEST_CASE("loop conserves energy with balanced source and sink") {
  const auto c = loop_preset();
  solver::TransportSolver s(c);
  const std::vector<double> v = {50e6, 1500.0};
  const auto& g = s.grid();
  auto mean_t = [&](const FieldState& st) {
    double m = 0.0, mt = 0.0;
    for (std::size_t i = 0; i < st.size(); ++i) {
      const double w = density(c.fluid, st.T[i]) * g.dz[i];
      m += w;
      mt += w * st.T[i];
    }
    return mt / m;
  };
  auto st = s.initial_guess(v);
  const double t0 = mean_t(st);
  for (int k = 0; k < 6; ++k) st = s.step(st, v);
  CHECK(std::abs(mean_t(st) - t0) < 0.01);
  const auto ss = s.steady_state(v);
  const auto [lo, hi] = std::minmax_element(ss.face_mass_flow.begin(), ss.face_mass_flow.end());
  CHECK((*hi - *lo) / *hi < 1e-3);
  CHECK(*lo > 0.0);
}

TEST_CASE("more pump head gives more flow") {
  const auto c = loop_preset();
  solver::TransportSolver s(c);
  const auto a = s.steady_state({50e6, 1200.0});
  const auto b = s.steady_state({50e6, 1800.0});
  CHECK(b.face_mass_flow[0] > a.face_mass_flow[0]);
}

TEST_CASE("degraded friction slows the loop") {
  const auto c = loop_preset();
  solver::TransportSolver nominal(c), degraded(inject_degradation(c, 3, 10.0));
  const std::vector<double> v = {50e6, 1500.0};
  CHECK(degraded.steady_state(v).face_mass_flow[0] < nominal.steady_state(v).face_mass_flow[0]);
}

TEST_CASE("trajectories are deterministic and inside the channel ranges") {
  const auto c = heated_channel_preset();
  const auto a = solver::generate_trajectories(11, c, 5);
  const auto b = solver::generate_trajectories(11, c, 5);
  for (std::size_t e = 0; e < a.size(); ++e) {
    CHECK_NOTHROW(solver::validate(a[e], c));
    for (double t = 0.0; t <= c.episode_duration; t += 2.5) {
      const auto va = a[e].at(t), vb = b[e].at(t);
      CHECK(va == vb);
      for (std::size_t ch = 0; ch < va.size(); ++ch) {
        CHECK(va[ch] >= c.controls[ch].min);
        CHECK(va[ch] <= c.controls[ch].max);
      }
    }
  }
  CHECK(solver::generate_trajectory(derive_seed(11, 2), c).at(17.0) == a[2].at(17.0));
  auto bad = solver::constant_trajectory({5.0, 800.0});
  CHECK_THROWS_AS(solver::validate(bad, c), ConfigError);
}

TEST_CASE("experiments hold inputs at the sampling cadence") {
  const auto c = testing::short_channel();
  solver::TransportSolver s(c);
  const auto tr = solver::generate_trajectory(99, c);
  const auto rec = solver::run_experiment(s, tr);
  CHECK(rec.n_times() == 7);
  CHECK(rec.states.size() == rec.n_times());
  CHECK(rec.sensors.size() == rec.n_times());
  for (std::size_t k = 0; k < rec.n_times(); ++k) {
    CHECK(rec.times[k] == doctest::Approx(5.0 * k));
    CHECK(rec.controls[k] == tr.at(rec.times[k]));
  }
}

TEST_CASE("corpus does not depend on the worker count") {
  const auto c = testing::short_channel();
  solver::TransportSolver s(c);
  const auto tr = solver::generate_trajectories(4, c, 3);
  const auto one = solver::run_corpus(s, tr, 1);
  const auto three = solver::run_corpus(s, tr, 3);
  for (std::size_t e = 0; e < one.size(); ++e) {
    CHECK(one[e].sensors == three[e].sensors);
    CHECK(one[e].states.back().T == three[e].states.back().T);
  }
}

TEST_CASE("record binary round trip and error paths") {
  const auto c = testing::short_channel();
  const auto recs = testing::short_records(c, 1);
  const fs::path dir = fs::temp_directory_path() / "psm_test_record";
  fs::create_directories(dir);
  solver::write_record(recs[0], dir / "r.psmd");
  const auto back = solver::read_record(dir / "r.psmd");
  CHECK(back.scenario_hash == recs[0].scenario_hash);
  CHECK(back.times == recs[0].times);
  CHECK(back.controls == recs[0].controls);
  CHECK(back.sensors == recs[0].sensors);
  CHECK(back.states.back().p == recs[0].states.back().p);
  solver::write_record_csv(recs[0], dir / "r.csv");
  CHECK(fs::file_size(dir / "r.csv") > 0);
  {
    std::ofstream junk(dir / "junk.psmd");
    junk << "XXXX";
  }
  CHECK_THROWS_AS(solver::read_record(dir / "junk.psmd"), IoError);
  CHECK_THROWS_AS(solver::read_record(dir / "missing.psmd"), IoError);
  fs::remove_all(dir);
}

namespace {

ScenarioConfig adiabatic_channel() {
  auto c = heated_channel_preset();
  for (auto& s : c.segments) s.source.reset();
  c.constraints.clear();
  return c;
}

}  // namespace

TEST_CASE("adiabatic channel stays at the inlet temperature") {
  const solver::TransportSolver s(adiabatic_channel());
  const auto st = s.steady_state({0.649, 844.65});
  for (double t : st.T) CHECK(t == doctest::Approx(844.65).epsilon(1e-10));
}

TEST_CASE("steady inputs are a fixed point of one step") {
  const auto c = heated_channel_preset();
  const solver::TransportSolver s(c);
  const std::vector<double> v = {0.6, 860.0};
  const auto st = s.steady_state(v);
  const auto next = s.step(st, v);
  auto range = [](const std::vector<double>& x) {
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    return std::max(*hi - *lo, 1e-12 * std::max(std::abs(*hi), 1.0));
  };
  for (auto f : {&FieldState::p, &FieldState::u, &FieldState::T}) {
    const double span = range(st.*f);
    for (std::size_t i = 0; i < st.size(); ++i) CHECK(std::abs((next.*f)[i] - (st.*f)[i]) < 1e-6 * span + 1e-9);
  }
}

TEST_CASE("inlet temperature step travels at the flow speed") {
  // Half-height crossing of the front at z = 1 m is expected after 1 / u seconds.
  auto c = adiabatic_channel();
  c.delta_t = 0.1;
  c.episode_duration = 3.0;
  const solver::TransportSolver s(c);
  const double u = 0.649;
  auto st = s.steady_state({u, 830.0});
  double t = 0.0, crossing = -1.0;
  double prev = interpolate_centers(s.grid(), st.T, 1.0);
  while (t < 3.0 && crossing < 0.0) {
    st = s.step(st, {u, 850.0});
    t += c.delta_t;
    const double now = interpolate_centers(s.grid(), st.T, 1.0);
    if (now >= 840.0) crossing = t - c.delta_t * (now - 840.0) / (now - prev);
    prev = now;
  }
  REQUIRE(crossing > 0.0);
  CHECK(crossing == doctest::Approx(1.0 / u).epsilon(0.15));
}

TEST_CASE("loop head balances wall friction at steady state") {
  const auto c = loop_preset();
  const solver::TransportSolver s(c);
  for (double dp : {1200.0, 2400.0}) {
    const auto st = s.steady_state({50e6, dp});
    const auto& g = s.grid();
    double loss = 0.0;
    for (std::size_t i = 0; i < g.n_cells(); ++i) {
      const auto& seg = c.segments[g.segment_of_cell[i]];
      loss += seg.friction_factor / seg.hydraulic_diameter * density(c.fluid, st.T[i]) * st.u[i] *
              std::abs(st.u[i]) / 2.0 * g.dz[i];
    }
    CHECK(loss == doctest::Approx(dp).epsilon(0.01));
  }
  const auto a = s.steady_state({50e6, 1200.0}), b = s.steady_state({50e6, 2400.0});
  CHECK(b.u[0] > a.u[0]);
}

TEST_CASE("tenfold friction in pipe 3 gives a tenfold pressure drop at matched velocity") {
  const auto c = loop_preset();
  const solver::TransportSolver nominal(c), degraded(inject_degradation(c, 3, 10.0));
  CHECK(dump_scenario(inject_degradation(c, 3, 1.0)) == dump_scenario(c));
  const std::vector<double> v = {50e6, 1500.0};
  // Pipe 3 spans [4, 5] m; compare the drop per unit dynamic head rho u^2.
  auto drop_per_head = [&](const solver::TransportSolver& s) {
    const auto st = s.steady_state(v);
    const auto& g = s.grid();
    const double dp = interpolate_centers(g, st.p, 4.05) - interpolate_centers(g, st.p, 4.95);
    const double rho = density(c.fluid, interpolate_centers(g, st.T, 4.5));
    const double u = interpolate_centers(g, st.u, 4.5);
    return dp / (rho * u * u);
  };
  CHECK(drop_per_head(degraded) / drop_per_head(nominal) == doctest::Approx(10.0).epsilon(0.05));
}

TEST_CASE("zero-step experiment keeps only the initial state") {
  const auto c = testing::short_channel();
  const solver::TransportSolver s(c);
  const auto tr = solver::constant_trajectory({0.649, 844.65});
  const auto init = s.steady_state(tr.at(0.0));
  const auto rec = solver::run_experiment(s, tr, init, 0);
  CHECK(rec.n_times() == 1);
  CHECK(rec.states.size() == 1);
  CHECK(rec.states[0].T == init.T);
}

TEST_CASE("rerunning an experiment writes byte-identical files") {
  const auto c = testing::short_channel();
  const auto dir = fs::temp_directory_path() / "psm_rerun";
  fs::create_directories(dir);
  for (const char* name : {"a.psmd", "b.psmd"}) {
    solver::write_record(testing::short_records(c, 1, 21)[0], dir / name);
  }
  auto bytes = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  CHECK(bytes(dir / "a.psmd") == bytes(dir / "b.psmd"));
  fs::remove_all(dir);
}
