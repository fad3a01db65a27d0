#pragma once

// Exact-law sampling of rotationally symmetric stable processes on R^d.
//
// Normalization (fixed library-wide):
//   alpha = 2  ->  standard Brownian motion, each coordinate has variance h
//                  over a step of length h; generator (1/2)Laplacian.
//   alpha < 2  ->  E[exp(i xi.X_h)] = exp(-h |xi|^alpha); generator
//                  -(-Laplacian)^{alpha/2}.
// The two conventions do not agree at alpha -> 2 (they differ by a factor 2
// in time). Every downstream closed form states which one it assumes.
//
// For alpha < 2 the increment is B(2 S_h) where B is a standard Brownian
// motion and S_h is an (alpha/2)-stable subordinator with Laplace exponent
// lambda^{alpha/2}; the factor 2 turns (|xi|^2/2)^{alpha/2} into |xi|^alpha.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "compactlab/errors.hpp"
#include "compactlab/rng.hpp"

namespace compactlab {

using Point = std::vector<double>;

enum class Convention {
  BrownianHalfLaplacian,  ///< alpha = 2, generator (1/2)Laplacian
  StableUnitExponent,     ///< alpha < 2, characteristic exponent |xi|^alpha
};

class ProcessSpec {
 public:
  ProcessSpec(double alpha, int dim) : alpha_(alpha), dim_(dim) {
    detail::require(alpha > 0.0 && alpha <= 2.0, "alpha ∈ (0,2] required, got " + std::to_string(alpha));
    detail::require(dim >= 1, "dim ≥ 1 required, got " + std::to_string(dim));
  }

  static ProcessSpec brownian(int dim) { return {2.0, dim}; }
  static ProcessSpec stable(double alpha, int dim) { return {alpha, dim}; }

  double alpha() const noexcept { return alpha_; }
  int dim() const noexcept { return dim_; }
  bool is_brownian() const noexcept { return alpha_ == 2.0; }
  Convention convention() const noexcept {
    return is_brownian() ? Convention::BrownianHalfLaplacian : Convention::StableUnitExponent;
  }

  friend bool operator==(const ProcessSpec&, const ProcessSpec&) = default;

 private:
  double alpha_;
  int dim_;
};

/// One-sided stable draw with E[exp(-lambda S)] = exp(-h lambda^index)
/// (Kanter / Chambers-Mallows-Stuck representation).
inline double sample_subordinator_increment(double index, double h, RandomStream& rng) {
  detail::require(index > 0.0 && index < 1.0, "subordinator index must lie in (0,1)");
  detail::require(h > 0.0, "step h must be positive");
  const double u = std::numbers::pi * rng.uniform();
  const double e = rng.exponential();
  const double a = index;
  const double s1 = std::sin(a * u) / std::pow(std::sin(u), 1.0 / a) *
                    std::pow(std::sin((1.0 - a) * u) / e, (1.0 - a) / a);
  return std::pow(h, 1.0 / a) * s1;
}

/// Increment sampler with the per-step constants hoisted out of the loop.
class IncrementSampler {
 public:
  IncrementSampler(const ProcessSpec& spec, double h) : spec_(spec), h_(h) {
    detail::require(h > 0.0, "step h must be positive");
    sqrt_h_ = std::sqrt(h);
    if (!spec.is_brownian()) {
      index_ = spec.alpha() / 2.0;
      subordinator_scale_ = std::pow(h, 1.0 / index_);
    }
  }

  const ProcessSpec& spec() const noexcept { return spec_; }
  double step() const noexcept { return h_; }

  /// Writes one increment over a step of length h into `out` (size dim).
  void draw(RandomStream& rng, std::span<double> out) const {
    if (spec_.is_brownian()) {
      for (double& v : out) v = sqrt_h_ * rng.normal();
      return;
    }
    const double u = std::numbers::pi * rng.uniform();
    const double e = rng.exponential();
    const double a = index_;
    const double s = subordinator_scale_ * std::sin(a * u) / std::pow(std::sin(u), 1.0 / a) *
                     std::pow(std::sin((1.0 - a) * u) / e, (1.0 - a) / a);
    const double scale = std::sqrt(2.0 * s);
    for (double& v : out) v = scale * rng.normal();
  }

 private:
  ProcessSpec spec_;
  double h_;
  double sqrt_h_ = 0.0;
  double index_ = 0.0;
  double subordinator_scale_ = 0.0;
};

inline Point sample_increment(const ProcessSpec& spec, double h, RandomStream& rng) {
  Point out(static_cast<std::size_t>(spec.dim()));
  IncrementSampler(spec, h).draw(rng, out);
  return out;
}

/// Number of grid steps of length h fitting in [0, t_max].
inline std::size_t grid_steps(double t_max, double h) {
  return static_cast<std::size_t>(std::floor(t_max / h * (1.0 + 1e-12)));
}

/// Discretized trajectory on the grid t_k = k h, k = 0..steps.
struct PathSample {
  double step_h = 0.0;
  int dim = 0;
  std::uint64_t seed = 0;
  std::vector<double> coords;  ///< row-major, (steps + 1) x dim

  std::size_t size() const noexcept { return dim == 0 ? 0 : coords.size() / static_cast<std::size_t>(dim); }
  std::size_t steps() const noexcept { return size() == 0 ? 0 : size() - 1; }
  double time(std::size_t k) const noexcept { return static_cast<double>(k) * step_h; }
  double t_max() const noexcept { return time(steps()); }
  std::span<const double> position(std::size_t k) const {
    return {coords.data() + k * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }

  friend bool operator==(const PathSample&, const PathSample&) = default;
};

inline PathSample sample_path(const ProcessSpec& spec, std::span<const double> x0, double t_max, double h,
                              std::uint64_t seed) {
  detail::require(h > 0.0 && t_max >= h, "sample_path requires t_max ≥ h > 0");
  detail::require(x0.size() == static_cast<std::size_t>(spec.dim()), "x0 dimension mismatch");
  const std::size_t d = x0.size();
  const std::size_t steps = grid_steps(t_max, h);
  PathSample path{h, spec.dim(), seed, std::vector<double>((steps + 1) * d)};
  std::copy(x0.begin(), x0.end(), path.coords.begin());
  IncrementSampler sampler(spec, h);
  RandomStream rng(seed);
  for (std::size_t k = 1; k <= steps; ++k) {
    double* cur = path.coords.data() + k * d;
    const double* prev = cur - d;
    sampler.draw(rng, {cur, d});
    for (std::size_t i = 0; i < d; ++i) cur[i] += prev[i];
  }
  return path;
}

/// CSV with columns t, x_1..x_d.
inline void write_csv(std::ostream& os, const PathSample& path) {
  os << "t";
  for (int i = 1; i <= path.dim; ++i) os << ",x_" << i;
  os << '\n';
  os.precision(17);
  for (std::size_t k = 0; k < path.size(); ++k) {
    os << path.time(k);
    for (double v : path.position(k)) os << ',' << v;
    os << '\n';
  }
}

}  // namespace compactlab
