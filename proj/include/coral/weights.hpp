#pragma once

// Sliding window of recent observations and the per-dimension correlation
// weights derived from it.

#include <cstddef>
#include <deque>
#include <stdexcept>
#include <vector>

#include "coral/config_space.hpp"
#include "coral/dcov.hpp"
#include "coral/device.hpp"

namespace coral {

/// FIFO of the W most recent successful measurements; evicts oldest first.
class SampleWindow {
 public:
  explicit SampleWindow(std::size_t capacity = 5) : capacity_(capacity) {
    if (capacity_ < 2) throw std::invalid_argument("window capacity must be >= 2");
  }

  void push(const MeasurementSample& s) {
    if (samples_.size() == capacity_) samples_.pop_front();
    samples_.push_back(s);
  }

  [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
  [[nodiscard]] bool empty() const noexcept { return samples_.empty(); }
  [[nodiscard]] std::size_t capacity() const noexcept { return capacity_; }
  /// Oldest first.
  [[nodiscard]] const std::deque<MeasurementSample>& samples() const noexcept { return samples_; }

 private:
  std::size_t capacity_;
  std::deque<MeasurementSample> samples_;
};

/// alpha_i = dCor(throughput, s_i), beta_i = dCor(power, s_i), indexed by Dimension.
struct CorrelationWeights {
  PerDimension<double> alpha{1.0, 1.0, 1.0, 1.0, 1.0};
  PerDimension<double> beta{1.0, 1.0, 1.0, 1.0, 1.0};

  [[nodiscard]] double alpha_of(Dimension d) const noexcept { return alpha[index_of(d)]; }
  [[nodiscard]] double beta_of(Dimension d) const noexcept { return beta[index_of(d)]; }

  [[nodiscard]] PerDimension<double> gamma() const noexcept {
    PerDimension<double> g{};
    for (std::size_t i = 0; i < kDimensions; ++i) g[i] = std::max(alpha[i], beta[i]);
    return g;
  }

  friend bool operator==(const CorrelationWeights&, const CorrelationWeights&) = default;
};

/// Dimensions that never changed inside the window, and windows with fewer
/// than two samples, get weight 1.0 so the search keeps moving along them.
inline CorrelationWeights correlation_weights(const SampleWindow& window) {
  if (window.empty()) throw std::invalid_argument("correlation_weights: empty window");
  CorrelationWeights w;
  if (window.size() < 2) return w;

  std::vector<double> tput;
  std::vector<double> power;
  tput.reserve(window.size());
  power.reserve(window.size());
  for (const auto& s : window.samples()) {
    tput.push_back(s.throughput_fps);
    power.push_back(s.power_mw);
  }

  std::vector<double> setting(window.size());
  for (Dimension d : kAllDimensions) {
    bool constant = true;
    for (std::size_t k = 0; k < window.size(); ++k) {
      setting[k] = static_cast<double>(window.samples()[k].config.get(d));
      if (setting[k] != setting[0]) constant = false;
    }
    if (constant) continue;
    w.alpha[index_of(d)] = dcov::distance_correlation(tput, setting);
    w.beta[index_of(d)] = dcov::distance_correlation(power, setting);
  }
  return w;
}

}  // namespace coral
