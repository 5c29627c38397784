#include "psm/solver/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "psm/core/errors.hpp"
#include "psm/core/random.hpp"

namespace psm::solver {

double ChannelSeries::at(double t) const {
  if (t <= times.front()) return values.front();
  if (t >= times.back()) return values.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t j = static_cast<std::size_t>(it - times.begin());
  const double w = (t - times[j - 1]) / (times[j] - times[j - 1]);
  return values[j - 1] + w * (values[j] - values[j - 1]);
}

std::vector<double> InputTrajectory::at(double t) const {
  std::vector<double> v(channels.size());
  for (std::size_t c = 0; c < channels.size(); ++c) v[c] = channels[c].at(t);
  return v;
}

InputTrajectory constant_trajectory(const std::vector<double>& v) {
  InputTrajectory tr;
  for (double x : v) tr.channels.push_back({{0.0}, {x}});
  return tr;
}

InputTrajectory generate_trajectory(std::uint64_t experiment_seed, const ScenarioConfig& config) {
  Rng rng(experiment_seed);
  const auto& tp = config.trajectory;
  const double horizon = config.episode_duration;
  InputTrajectory tr;
  for (const auto& ch : config.controls) {
    const double range = ch.max - ch.min;
    ChannelSeries s;
    double t = 0.0;
    double x = rng.uniform(ch.min, ch.max);
    s.times.push_back(t);
    s.values.push_back(x);
    while (t < horizon) {
      t += rng.uniform(tp.hold_min, tp.hold_max);
      s.times.push_back(t);
      s.values.push_back(x);
      if (t >= horizon) break;
      const double target = rng.uniform(ch.min, ch.max);
      const double rate = rng.uniform(tp.ramp_rate_min, tp.ramp_rate_max) * range;
      const double duration = std::abs(target - x) / rate;
      if (duration < 1e-6) continue;
      t += duration;
      x = std::clamp(target, ch.min, ch.max);
      s.times.push_back(t);
      s.values.push_back(x);
    }
    // A zero hold can repeat a knot time; drop duplicates so knots stay strictly increasing.
    ChannelSeries clean;
    for (std::size_t k = 0; k < s.times.size(); ++k) {
      if (!clean.times.empty() && s.times[k] <= clean.times.back()) continue;
      clean.times.push_back(s.times[k]);
      clean.values.push_back(s.values[k]);
    }
    tr.channels.push_back(std::move(clean));
  }
  return tr;
}

std::vector<InputTrajectory> generate_trajectories(std::uint64_t seed, const ScenarioConfig& config,
                                                   std::size_t n_experiments) {
  if (n_experiments < 1) throw ConfigError("trajectories: need at least one experiment");
  std::vector<InputTrajectory> out;
  out.reserve(n_experiments);
  for (std::size_t e = 0; e < n_experiments; ++e) {
    out.push_back(generate_trajectory(derive_seed(seed, e), config));
  }
  return out;
}

void validate(const InputTrajectory& tr, const ScenarioConfig& config) {
  if (tr.channels.size() != config.n_controls()) {
    throw ConfigError("trajectory: channel count does not match the scenario");
  }
  for (std::size_t c = 0; c < tr.channels.size(); ++c) {
    const auto& s = tr.channels[c];
    const auto& ch = config.controls[c];
    if (s.times.empty() || s.times.size() != s.values.size() || s.times.front() != 0.0) {
      throw ConfigError("trajectory: channel " + ch.name + " needs knots starting at t = 0");
    }
    for (std::size_t k = 1; k < s.times.size(); ++k) {
      if (!(s.times[k] > s.times[k - 1])) {
        throw ConfigError("trajectory: knot times must increase (" + ch.name + ")");
      }
    }
    for (double x : s.values) {
      if (x < ch.min || x > ch.max) {
        throw ConfigError("trajectory: value outside range for " + ch.name);
      }
    }
  }
}

}  // namespace psm::solver
