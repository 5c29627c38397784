#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "psm/solver/record.hpp"
#include "psm/train/model.hpp"

namespace psm::diag {

/// One transition of a sensor stream in scaled units: x0 and v at step k, and
/// the measured snapshot at step k + 1.
struct StreamSample {
  std::vector<double> x0;
  std::vector<double> v;
  std::vector<double> measured;
};

std::vector<StreamSample> stream_from_record(const solver::SimulationRecord& record,
                                             const ScalingSpec& scaling);

struct DetectorConfig {
  double zeta = 0.0;        // latch threshold on window MSE, scaled units squared
  std::size_t window = 8;   // samples per MSE evaluation

  void validate() const;
};

/// Prediction-error latch. Samples are grouped into consecutive windows; the
/// first window whose MSE exceeds zeta latches for good.
class Detector {
 public:
  Detector(const train::Model& model, DetectorConfig config);

  /// Returns true once latched.
  bool push(const StreamSample& sample);
  bool latched() const { return latched_at_.has_value(); }
  /// Index (0-based, over all pushed samples) of the last sample of the firing window.
  std::optional<std::size_t> latched_at() const { return latched_at_; }
  const std::vector<double>& window_mse() const { return window_mse_; }

 private:
  const train::Model& model_;
  DetectorConfig config_;
  std::size_t seen_ = 0;
  double acc_ = 0.0;
  std::size_t acc_count_ = 0;
  std::vector<double> window_mse_;
  std::optional<std::size_t> latched_at_;
};

std::optional<std::size_t> detect(const train::Model& model, const std::vector<StreamSample>& stream,
                                  const DetectorConfig& config);

/// Window MSEs of the model over a stream (complete windows only).
std::vector<double> window_errors(const train::Model& model, const std::vector<StreamSample>& stream,
                                  std::size_t window);

/// factor times the 95th percentile of the validation window MSEs.
double calibrate_zeta(const train::Model& model, const std::vector<StreamSample>& validation,
                      std::size_t window, double factor = 5.0);

}  // namespace psm::diag
