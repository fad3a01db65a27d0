#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace compactlab {

/// Welford accumulator with Chan's pairwise merge.
class RunningStats {
 public:
  void add(double x) noexcept {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }

  void merge(const RunningStats& other) noexcept {
    if (other.n_ == 0) return;
    if (n_ == 0) {
      *this = other;
      return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(other.n_);
    const double delta = other.mean_ - mean_;
    const double n = na + nb;
    mean_ += delta * nb / n;
    m2_ += other.m2_ + delta * delta * na * nb / n;
    n_ += other.n_;
  }

  std::size_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double stddev() const noexcept { return std::sqrt(variance()); }
  double stderr_of_mean() const noexcept {
    return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

enum class EstimatorStatus {
  Ok,
  SurvivorWarning,  ///< too many paths were censored at the horizon
  TailDivergent,    ///< geometric tail bound not convergent (p̂ ≥ 1)
};

constexpr std::string_view to_string(EstimatorStatus s) noexcept {
  switch (s) {
    case EstimatorStatus::Ok: return "ok";
    case EstimatorStatus::SurvivorWarning: return "survivor-warning";
    case EstimatorStatus::TailDivergent: return "tail-divergent";
  }
  return "unknown";
}

/// Universal Monte Carlo return value.
struct EstimatorResult {
  double mean = 0.0;
  double std_error = 0.0;  ///< sample std / sqrt(n_paths)
  std::size_t n_paths = 0;
  double step_h = 0.0;
  std::uint64_t seed = 0;
  EstimatorStatus status = EstimatorStatus::Ok;
  double censored_fraction = 0.0;  ///< paths still alive at the horizon

  static EstimatorResult from(const RunningStats& s, double h, std::uint64_t seed) {
    return {s.mean(), s.stderr_of_mean(), s.count(), h, seed, EstimatorStatus::Ok, 0.0};
  }
};

}  // namespace compactlab
