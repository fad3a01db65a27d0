#pragma once

// Open subsets of R^d and compact exhaustions K_n ⊂ U_n ⊂ K_{n+1}.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "compactlab/errors.hpp"
#include "compactlab/process.hpp"

namespace compactlab {

class Domain;

namespace shapes {

struct FullSpace {
  int dim = 1;
};

struct Ball {
  Point center;
  double radius = 1.0;
};

struct Box {
  Point lo, hi;
};

struct Interval {
  double a = -1.0, b = 1.0;
};

struct UnionOfBalls {
  std::vector<Point> centers;
  std::vector<double> radii;
  // Lookup index: balls sorted by first center coordinate.
  std::vector<std::size_t> order;
  std::vector<double> sorted_first;
  double max_radius = 0.0;
};

struct UnionOfIntervals {
  std::vector<std::pair<double, double>> segments;
  std::vector<std::pair<double, double>> components;  ///< merged, sorted, disjoint
};

/// base ∩ Ball(0, radius)
struct Clipped {
  std::shared_ptr<const Domain> base;
  double radius = 1.0;
};

}  // namespace shapes

class Domain {
 public:
  using Shape = std::variant<shapes::FullSpace, shapes::Ball, shapes::Box, shapes::Interval,
                             shapes::UnionOfBalls, shapes::UnionOfIntervals, shapes::Clipped>;

  static Domain full_space(int dim) {
    detail::require(dim >= 1, "FullSpace needs dim ≥ 1");
    return Domain(shapes::FullSpace{dim}, dim);
  }

  static Domain ball(Point center, double radius) {
    detail::require(!center.empty(), "Ball needs a center");
    detail::require(radius > 0.0, "Ball radius must be positive");
    const int d = static_cast<int>(center.size());
    return Domain(shapes::Ball{std::move(center), radius}, d);
  }

  static Domain box(Point lo, Point hi) {
    detail::require(!lo.empty() && lo.size() == hi.size(), "Box corners must have equal, nonzero dimension");
    for (std::size_t i = 0; i < lo.size(); ++i) detail::require(lo[i] < hi[i], "Box must be nonempty");
    const int d = static_cast<int>(lo.size());
    return Domain(shapes::Box{std::move(lo), std::move(hi)}, d);
  }

  static Domain interval(double a, double b) {
    detail::require(a < b, "Interval (a,b) must be nonempty");
    return Domain(shapes::Interval{a, b}, 1);
  }

  static Domain union_of_balls(std::vector<Point> centers, std::vector<double> radii) {
    detail::require(!centers.empty() && centers.size() == radii.size(), "UnionOfBalls needs N ≥ 1 balls");
    const std::size_t d = centers.front().size();
    detail::require(d >= 1, "UnionOfBalls centers need dim ≥ 1");
    for (std::size_t i = 0; i < centers.size(); ++i) {
      detail::require(centers[i].size() == d, "UnionOfBalls centers must share a dimension");
      detail::require(radii[i] > 0.0, "UnionOfBalls radii must be positive");
    }
    shapes::UnionOfBalls u{std::move(centers), std::move(radii), {}, {}, 0.0};
    u.order.resize(u.centers.size());
    std::iota(u.order.begin(), u.order.end(), std::size_t{0});
    std::stable_sort(u.order.begin(), u.order.end(),
                     [&](std::size_t i, std::size_t j) { return u.centers[i][0] < u.centers[j][0]; });
    for (std::size_t i : u.order) u.sorted_first.push_back(u.centers[i][0]);
    u.max_radius = *std::max_element(u.radii.begin(), u.radii.end());
    return Domain(std::move(u), static_cast<int>(d));
  }

  static Domain union_of_intervals(std::vector<std::pair<double, double>> segments) {
    detail::require(!segments.empty(), "UnionOfIntervals needs N ≥ 1 segments");
    for (auto [a, b] : segments) detail::require(a < b, "UnionOfIntervals segments must be nonempty");
    auto sorted = segments;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::pair<double, double>> comps;
    for (auto seg : sorted) {
      // Open intervals (a,b),(b,c) stay disjoint: the shared endpoint is excluded.
      if (!comps.empty() && seg.first < comps.back().second)
        comps.back().second = std::max(comps.back().second, seg.second);
      else
        comps.push_back(seg);
    }
    return Domain(shapes::UnionOfIntervals{std::move(segments), std::move(comps)}, 1);
  }

  /// this ∩ Ball(0, radius); a full space clips to a plain ball.
  Domain clipped(double radius) const {
    detail::require(radius > 0.0, "clip radius must be positive");
    if (std::holds_alternative<shapes::FullSpace>(shape_)) {
      if (dim_ == 1) return interval(-radius, radius);
      return ball(Point(static_cast<std::size_t>(dim_), 0.0), radius);
    }
    return Domain(shapes::Clipped{std::make_shared<const Domain>(*this), radius}, dim_);
  }

  int dim() const noexcept { return dim_; }
  const Shape& shape() const noexcept { return shape_; }

  std::size_t truncation() const noexcept {
    if (auto* u = std::get_if<shapes::UnionOfBalls>(&shape_)) return u->centers.size();
    if (auto* u = std::get_if<shapes::UnionOfIntervals>(&shape_)) return u->segments.size();
    return 1;
  }

  bool is_full_space() const noexcept { return std::holds_alternative<shapes::FullSpace>(shape_); }

  bool contains(std::span<const double> x) const {
    check_dim(x);
    return contains_unchecked(x);
  }

  /// Euclidean distance from an interior point to the complement when it is
  /// available in closed form; nullopt for shapes without an exact formula.
  /// Returns 0 for points outside.
  std::optional<double> boundary_distance(std::span<const double> x) const {
    check_dim(x);
    if (!contains_unchecked(x)) return 0.0;
    return exact_distance(x);
  }

  /// Radius of a ball around x contained in the domain (positive for interior
  /// points, 0 outside). Exact where boundary_distance is, a lower bound otherwise.
  double interior_radius(std::span<const double> x) const {
    check_dim(x);
    if (!contains_unchecked(x)) return 0.0;
    if (auto d = exact_distance(x)) return *d;
    if (auto* u = std::get_if<shapes::UnionOfBalls>(&shape_)) {
      double best = 0.0;
      for (std::size_t i = 0; i < u->centers.size(); ++i)
        best = std::max(best, u->radii[i] - distance(x, u->centers[i]));
      return best;
    }
    const auto& c = std::get<shapes::Clipped>(shape_);
    return std::min(c.base->interior_radius(x), c.radius - norm(x));
  }

  std::string name() const {
    return std::visit(
        [](const auto& s) -> std::string {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, shapes::FullSpace>) return "FullSpace";
          if constexpr (std::is_same_v<S, shapes::Ball>) return "Ball";
          if constexpr (std::is_same_v<S, shapes::Box>) return "Box";
          if constexpr (std::is_same_v<S, shapes::Interval>) return "Interval";
          if constexpr (std::is_same_v<S, shapes::UnionOfBalls>) return "UnionOfBalls";
          if constexpr (std::is_same_v<S, shapes::UnionOfIntervals>) return "UnionOfIntervals";
          if constexpr (std::is_same_v<S, shapes::Clipped>) return "Clipped(" + s.base->name() + ")";
        },
        shape_);
  }

  static double norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
  }

  static double distance(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
    return std::sqrt(s);
  }

 private:
  Domain(Shape shape, int dim) : shape_(std::move(shape)), dim_(dim) {}

  void check_dim(std::span<const double> x) const {
    if (x.size() != static_cast<std::size_t>(dim_))
      throw ArgumentError("point of dimension " + std::to_string(x.size()) + " queried on a " +
                          std::to_string(dim_) + "-dimensional domain");
  }

  static double squared_distance(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
    return s;
  }

  static const std::pair<double, double>* component_of(const shapes::UnionOfIntervals& u, double x) {
    auto it = std::upper_bound(u.components.begin(), u.components.end(), x,
                               [](double v, const auto& c) { return v < c.first; });
    if (it == u.components.begin()) return nullptr;
    --it;
    return (x > it->first && x < it->second) ? &*it : nullptr;
  }

  bool contains_unchecked(std::span<const double> x) const {
    return std::visit(
        [&](const auto& s) -> bool {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, shapes::FullSpace>) {
            return true;
          } else if constexpr (std::is_same_v<S, shapes::Ball>) {
            return squared_distance(x, s.center) < s.radius * s.radius;
          } else if constexpr (std::is_same_v<S, shapes::Box>) {
            for (std::size_t i = 0; i < x.size(); ++i)
              if (!(x[i] > s.lo[i] && x[i] < s.hi[i])) return false;
            return true;
          } else if constexpr (std::is_same_v<S, shapes::Interval>) {
            return x[0] > s.a && x[0] < s.b;
          } else if constexpr (std::is_same_v<S, shapes::UnionOfBalls>) {
            const double lo = x[0] - s.max_radius;
            const double hi = x[0] + s.max_radius;
            auto it = std::lower_bound(s.sorted_first.begin(), s.sorted_first.end(), lo);
            for (auto k = static_cast<std::size_t>(it - s.sorted_first.begin());
                 k < s.sorted_first.size() && s.sorted_first[k] <= hi; ++k) {
              const std::size_t i = s.order[k];
              if (squared_distance(x, s.centers[i]) < s.radii[i] * s.radii[i]) return true;
            }
            return false;
          } else if constexpr (std::is_same_v<S, shapes::UnionOfIntervals>) {
            return component_of(s, x[0]) != nullptr;
          } else {
            return norm(x) < s.radius && s.base->contains_unchecked(x);
          }
        },
        shape_);
  }

  // Precondition: x is inside.
  std::optional<double> exact_distance(std::span<const double> x) const {
    return std::visit(
        [&](const auto& s) -> std::optional<double> {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, shapes::FullSpace>) {
            return std::numeric_limits<double>::infinity();
          } else if constexpr (std::is_same_v<S, shapes::Ball>) {
            return s.radius - distance(x, s.center);
          } else if constexpr (std::is_same_v<S, shapes::Box>) {
            double m = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < x.size(); ++i) m = std::min({m, x[i] - s.lo[i], s.hi[i] - x[i]});
            return m;
          } else if constexpr (std::is_same_v<S, shapes::Interval>) {
            return std::min(x[0] - s.a, s.b - x[0]);
          } else if constexpr (std::is_same_v<S, shapes::UnionOfBalls>) {
            return std::nullopt;
          } else if constexpr (std::is_same_v<S, shapes::UnionOfIntervals>) {
            const auto* c = component_of(s, x[0]);
            return std::min(x[0] - c->first, c->second - x[0]);
          } else {
            auto base = s.base->exact_distance(x);
            if (!base) return std::nullopt;
            return std::min(*base, s.radius - norm(x));
          }
        },
        shape_);
  }

  Shape shape_;
  int dim_;
};

/// r_n = (log log(n+3))^{-1/2}
inline double shrinking_ball_radius(int n) {
  detail::require(n >= 1, "ball index n ≥ 1 required");
  return 1.0 / std::sqrt(std::log(std::log(static_cast<double>(n) + 3.0)));
}

/// Union of B(e_n, r_n), n = 1..n_max, with e_n = (n,0,...,0). In d = 1 the
/// balls are the intervals (n - r_n, n + r_n).
inline Domain shrinking_ball_domain(int d, int n_max) {
  detail::require(d >= 1, "dimension d ≥ 1 required");
  detail::require(n_max >= 1, "truncation N ≥ 1 required");
  if (d == 1) {
    std::vector<std::pair<double, double>> segs;
    for (int n = 1; n <= n_max; ++n) {
      const double r = shrinking_ball_radius(n);
      segs.emplace_back(n - r, n + r);
    }
    return Domain::union_of_intervals(std::move(segs));
  }
  std::vector<Point> centers;
  std::vector<double> radii;
  for (int n = 1; n <= n_max; ++n) {
    Point c(static_cast<std::size_t>(d), 0.0);
    c[0] = n;
    centers.push_back(std::move(c));
    radii.push_back(shrinking_ball_radius(n));
  }
  return Domain::union_of_balls(std::move(centers), std::move(radii));
}

/// U_k = domain ∩ B(0, R_k), k = 1..m, with compacts K_k = closure of
/// domain-points in B(0, (R_{k-1}+R_k)/2), R_0 = 0.
class Exhaustion {
 public:
  Exhaustion(const Domain& parent, std::vector<double> radii) : radii_(std::move(radii)) {
    detail::require(!radii_.empty(), "exhaustion needs m ≥ 1 levels");
    for (std::size_t k = 0; k < radii_.size(); ++k) {
      detail::require(radii_[k] > 0.0 && (k == 0 || radii_[k] > radii_[k - 1]),
                      "exhaustion radii must be positive and strictly increasing");
      levels_.push_back(parent.clipped(radii_[k]));
    }
  }

  std::size_t size() const noexcept { return levels_.size(); }
  /// Level k = 1..size().
  const Domain& level(std::size_t k) const { return levels_.at(k - 1); }
  double radius(std::size_t k) const { return radii_.at(k - 1); }
  double compact_radius(std::size_t k) const {
    const double prev = k >= 2 ? radii_.at(k - 2) : 0.0;
    return 0.5 * (prev + radii_.at(k - 1));
  }
  /// Membership in K_k (for points of the parent domain).
  bool in_compact(std::size_t k, std::span<const double> x) const {
    return Domain::norm(x) <= compact_radius(k);
  }

 private:
  std::vector<double> radii_;
  std::vector<Domain> levels_;
};

/// R_k = k * scale.
inline Exhaustion standard_exhaustion(const Domain& domain, int m, double scale = 1.0) {
  detail::require(m >= 1, "exhaustion needs m ≥ 1 levels");
  detail::require(scale > 0.0, "exhaustion scale must be positive");
  std::vector<double> radii;
  for (int k = 1; k <= m; ++k) radii.push_back(k * scale);
  return Exhaustion(domain, std::move(radii));
}

}  // namespace compactlab
