#include "psm/diag/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "psm/core/errors.hpp"

namespace psm::diag {

std::vector<StreamSample> stream_from_record(const solver::SimulationRecord& rec,
                                             const ScalingSpec& sc) {
  std::vector<StreamSample> out;
  for (std::size_t k = 0; k + 1 < rec.n_times(); ++k) {
    out.push_back({scale_sensors(sc, rec.sensors[k]), scale_controls(sc, rec.controls[k]),
                   scale_sensors(sc, rec.sensors[k + 1])});
  }
  return out;
}

void DetectorConfig::validate() const {
  if (!(zeta > 0.0)) throw ConfigError("detector: zeta must be positive");
  if (window == 0) throw ConfigError("detector: window must be >= 1");
}

Detector::Detector(const train::Model& model, DetectorConfig config) : model_(model), config_(config) {
  config_.validate();
}

bool Detector::push(const StreamSample& s) {
  const auto pred = model_.step_scaled(s.x0, s.v);
  if (pred.size() != s.measured.size()) throw ConfigError("detector: sample size mismatch");
  for (std::size_t i = 0; i < pred.size(); ++i) acc_ += (pred[i] - s.measured[i]) * (pred[i] - s.measured[i]);
  acc_count_ += pred.size();
  ++seen_;
  if (seen_ % config_.window == 0) {
    const double e = acc_ / static_cast<double>(acc_count_);
    window_mse_.push_back(e);
    if (!latched_at_ && e > config_.zeta) latched_at_ = seen_ - 1;
    acc_ = 0.0;
    acc_count_ = 0;
  }
  return latched();
}

std::optional<std::size_t> detect(const train::Model& model, const std::vector<StreamSample>& stream,
                                  const DetectorConfig& config) {
  Detector d(model, config);
  for (const auto& s : stream) {
    if (d.push(s)) break;
  }
  return d.latched_at();
}

std::vector<double> window_errors(const train::Model& model, const std::vector<StreamSample>& stream,
                                  std::size_t window) {
  Detector d(model, {std::numeric_limits<double>::infinity(), window});
  for (const auto& s : stream) d.push(s);
  return d.window_mse();
}

double calibrate_zeta(const train::Model& model, const std::vector<StreamSample>& validation,
                      std::size_t window, double factor) {
  auto e = window_errors(model, validation, window);
  if (e.empty()) throw ConfigError("detector: validation stream shorter than one window");
  std::sort(e.begin(), e.end());
  // Nearest-rank percentile.
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(e.size())));
  return factor * e[std::max<std::size_t>(rank, 1) - 1];
}

}  // namespace psm::diag
