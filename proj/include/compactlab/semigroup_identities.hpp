#pragma once

// Dynkin decomposition, the boundary operator T_{n,t}, its norm bound and the
// 1-subprocess identity, all estimated on Monte Carlo path ensembles.
//
// T_{n,t}f(x) = E_x[p_{t-tau_n} f(X_{tau_n}); tau_n <= t]. By the strong
// Markov property this equals E_x[exp(-A_t) f(X_t); tau_n <= t < zeta], which
// is what the estimators below average (the path simply continues past
// tau_n). The Dynkin check instead evaluates p_{t-tau} f(X_tau) with a closed
// form heat semigroup, so it exercises the decomposition and not the sampler's
// Markov property.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "compactlab/errors.hpp"
#include "compactlab/functionals.hpp"
#include "compactlab/geometry.hpp"
#include "compactlab/parallel.hpp"
#include "compactlab/process.hpp"
#include "compactlab/rng.hpp"
#include "compactlab/stats.hpp"

namespace compactlab {

using PointFunction = std::function<double(std::span<const double>)>;

/// Test function with an optional closed-form free semigroup p_s f.
class TestFunction {
 public:
  enum class Kind { GaussianBump, Constant, Custom };

  /// f(x) = exp(-a |x - c|^2).
  static TestFunction gaussian_bump(double a, Point center) {
    detail::require(a > 0.0, "Gaussian bump needs a > 0");
    detail::require(!center.empty(), "Gaussian bump needs a center");
    TestFunction f(Kind::GaussianBump);
    f.a_ = a;
    f.center_ = std::move(center);
    return f;
  }

  static TestFunction constant(double c) {
    TestFunction f(Kind::Constant);
    f.value_ = c;
    return f;
  }

  /// No heat oracle; usable for boundary terms only.
  static TestFunction custom(PointFunction fn) {
    detail::require(static_cast<bool>(fn), "custom test function needs a callable");
    TestFunction f(Kind::Custom);
    f.fn_ = std::move(fn);
    return f;
  }

  Kind kind() const noexcept { return kind_; }

  double operator()(std::span<const double> x) const {
    switch (kind_) {
      case Kind::GaussianBump: {
        double r2 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) r2 += (x[i] - center_[i]) * (x[i] - center_[i]);
        return std::exp(-a_ * r2);
      }
      case Kind::Constant: return value_;
      case Kind::Custom: return fn_(x);
    }
    return 0.0;
  }

  /// Free (unkilled, whole-space) semigroup oracle exists for this process.
  bool has_heat_oracle(const ProcessSpec& spec) const noexcept {
    return kind_ == Kind::Constant || (kind_ == Kind::GaussianBump && spec.is_brownian());
  }

  /// p_s f(y) for the free process. For Brownian motion with generator
  /// (1/2)Laplacian: (1 + 2as)^{-d/2} exp(-a |y-c|^2 / (1 + 2as)).
  double heat(const ProcessSpec& spec, double s, std::span<const double> y) const {
    if (!has_heat_oracle(spec))
      throw UnsupportedConfiguration("no closed-form inner semigroup for this test function and process");
    if (kind_ == Kind::Constant) return value_;
    const double q = 1.0 + 2.0 * a_ * s;
    double r2 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) r2 += (y[i] - center_[i]) * (y[i] - center_[i]);
    return std::pow(q, -0.5 * static_cast<double>(y.size())) * std::exp(-a_ * r2 / q);
  }

 private:
  explicit TestFunction(Kind k) : kind_(k) {}
  Kind kind_;
  double a_ = 1.0;
  double value_ = 1.0;
  Point center_;
  PointFunction fn_;
};

struct DynkinResult {
  double residual = 0.0;   ///< p_t f - p_t^U f - boundary term, averaged path by path
  double std_error = 0.0;  ///< combined standard error of the residual
  EstimatorResult free_term;
  EstimatorResult part_term;
  EstimatorResult boundary_term;
  double exit_fraction = 0.0;  ///< P(tau_U <= t)
  bool bridge_corrected = false;
};

/// Residual of p_t f(x0) = p_t^U f(x0) + E[p_{t-tau} f(X_tau); tau <= t].
/// The three terms are computed on one ensemble; the residual and its error are
/// taken per path.
inline DynkinResult dynkin_residual(const ProcessSpec& spec, std::span<const double> x0, const TestFunction& f,
                                    double t, const Domain& U, double h, std::size_t n_paths, std::uint64_t seed,
                                    const ExitOptions& opts = {}) {
  detail::require_point(spec, x0);
  detail::require(t > 0.0 && h > 0.0 && t >= h, "Dynkin check needs t ≥ h > 0");
  detail::require(n_paths >= 2, "estimators need n_paths ≥ 2");
  detail::require(U.contains(x0), "starting point must lie inside U");
  if (!f.has_heat_oracle(spec))
    throw UnsupportedConfiguration("Dynkin check needs a closed-form inner semigroup (alpha = 2 with a Gaussian "
                                   "bump, or a constant test function)");

  const IncrementSampler sampler(spec, h);
  const std::size_t steps = grid_steps(t, h);
  const double horizon = static_cast<double>(steps) * h;
  const std::size_t d = x0.size();
  const Point start(x0.begin(), x0.end());

  struct Acc {
    RunningStats residual, free_term, part_term, boundary_term, exited;
    void merge(const Acc& o) {
      residual.merge(o.residual);
      free_term.merge(o.free_term);
      part_term.merge(o.part_term);
      boundary_term.merge(o.boundary_term);
      exited.merge(o.exited);
    }
  };

  auto acc = chunked_reduce<Acc>(n_paths, opts.exec, [&](std::size_t i, Acc& a) {
    thread_local std::vector<double> x, inc;
    x.assign(start.begin(), start.end());
    inc.resize(d);
    RandomStream rng(derive_seed(seed, i));
    ExitMonitor monitor(U, spec, h, opts.bridge_correction);
    monitor.enter(x);
    bool out = false;
    double boundary = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
      sampler.draw(rng, inc);
      for (std::size_t j = 0; j < d; ++j) x[j] += inc[j];
      if (!out && monitor.step(x, rng)) {
        out = true;
        boundary = f.heat(spec, horizon - static_cast<double>(k + 1) * h, x);
      }
    }
    const double ft = f(x);
    const double part = out ? 0.0 : ft;
    a.free_term.add(ft);
    a.part_term.add(part);
    a.boundary_term.add(boundary);
    a.residual.add(out ? ft - boundary : 0.0);
    a.exited.add(out ? 1.0 : 0.0);
  });

  DynkinResult r;
  r.residual = acc.residual.mean();
  r.std_error = acc.residual.stderr_of_mean();
  r.free_term = EstimatorResult::from(acc.free_term, h, seed);
  r.part_term = EstimatorResult::from(acc.part_term, h, seed);
  r.boundary_term = EstimatorResult::from(acc.boundary_term, h, seed);
  r.exit_fraction = acc.exited.mean();
  r.bridge_corrected = ExitMonitor(U, spec, h, opts.bridge_correction).bridge_active();
  return r;
}

struct ProbeValue {
  Point x;
  EstimatorResult value;
};

/// T_{n,t}f on a probe grid.
struct BoundaryTermEstimate {
  std::size_t level = 0;
  double t = 0.0;
  std::vector<ProbeValue> values;

  std::size_t argmax() const {
    detail::require(!values.empty(), "empty probe grid");
    std::size_t best = 0;
    for (std::size_t j = 1; j < values.size(); ++j)
      if (values[j].value.mean > values[best].value.mean) best = j;
    return best;
  }
  double sup() const { return values[argmax()].value.mean; }
};

namespace detail {

struct ContinuationValues {
  double plain = 0.0;       ///< exp(-A_t) f(X_t) 1{tau_n <= t < zeta}
  double subprocess = 0.0;  ///< same path weighted by the 1-subprocess survival e^{-tau} e^{-(t-tau)}
};

/// One path of the killed process from x0 up to time steps*h; level exit
/// tracked by `level`, death by exit of `parent` or by the potential.
template <class Fn>
ContinuationValues continue_path(const IncrementSampler& sampler, const ProcessSpec& spec, const Domain& level,
                                 const Domain& parent, const KillingPotential& v, const Fn& f,
                                 std::span<const double> x0, std::size_t steps, double h, bool bridge,
                                 RandomStream& rng, std::vector<double>& x, std::vector<double>& inc) {
  ContinuationValues out;
  if (!parent.contains(x0)) return out;
  const std::size_t d = x0.size();
  x.assign(x0.begin(), x0.end());
  inc.resize(d);
  bool reached = !level.contains(x0);
  double tau = 0.0;
  ExitMonitor level_monitor(level, spec, h, bridge);
  ExitMonitor parent_monitor(parent, spec, h, bridge);
  if (!reached) level_monitor.enter(x);
  parent_monitor.enter(x);
  const bool killing = !v.is_none();
  double A = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    if (killing) {
      A += v(x) * h;
      if (A > 745.0) return out;  // exp(-A) underflows
    }
    sampler.draw(rng, inc);
    for (std::size_t j = 0; j < d; ++j) x[j] += inc[j];
    if (!reached && level_monitor.step(x, rng)) {
      reached = true;
      tau = static_cast<double>(k + 1) * h;
    }
    if (parent_monitor.step(x, rng)) return out;
  }
  if (!reached) return out;
  const double t = static_cast<double>(steps) * h;
  out.plain = std::exp(-A) * f(std::span<const double>(x));
  out.subprocess = std::exp(-tau) * (std::exp(-(t - tau)) * out.plain);
  return out;
}

}  // namespace detail

/// Estimates T_{n,t}f(x) at each probe for the process killed by `life`,
/// with U_n = `level`.
inline BoundaryTermEstimate estimate_boundary_term(const ProcessSpec& spec, const Lifetime& life,
                                                   const Domain& level, std::size_t level_index, double t,
                                                   std::span<const Point> probes, const PointFunction& f, double h,
                                                   std::size_t n_paths, std::uint64_t seed,
                                                   const ExitOptions& opts = {}) {
  detail::require(!probes.empty(), "empty probe grid");
  detail::require(t >= 0.0 && h > 0.0, "boundary term needs t ≥ 0 and h > 0");
  detail::require(n_paths >= 2, "estimators need n_paths ≥ 2");
  const Domain parent = life.domain.value_or(Domain::full_space(spec.dim()));
  const IncrementSampler sampler(spec, h);
  const std::size_t steps = grid_steps(t, h);
  BoundaryTermEstimate est;
  est.level = level_index;
  est.t = t;
  for (std::size_t j = 0; j < probes.size(); ++j) {
    detail::require_point(spec, probes[j]);
    const std::uint64_t probe_seed = derive_seed(seed, 0xB0B0ULL + j);
    auto stats = chunked_reduce<RunningStats>(n_paths, opts.exec, [&](std::size_t i, RunningStats& a) {
      thread_local std::vector<double> x, inc;
      RandomStream rng(derive_seed(probe_seed, i));
      a.add(detail::continue_path(sampler, spec, level, parent, life.potential, f, probes[j], steps, h,
                                  opts.bridge_correction, rng, x, inc)
                .plain);
    });
    est.values.push_back({probes[j], EstimatorResult::from(stats, h, probe_seed)});
  }
  return est;
}

/// ||T_{n,t}||_{inf->inf} = sup_x T_{n,t}1(x) (positive kernel), as a max over probes.
struct TNormEstimate {
  BoundaryTermEstimate table;
  double norm = 0.0;
  double std_error = 0.0;  ///< at the maximizing probe
  Point argmax;
};

inline TNormEstimate estimate_T_norm(const ProcessSpec& spec, const Lifetime& life, const Exhaustion& exhaustion,
                                     std::size_t n, double t, std::span<const Point> probes, double h,
                                     std::size_t n_paths, std::uint64_t seed, const ExitOptions& opts = {}) {
  detail::require(n >= 1 && n <= exhaustion.size(), "exhaustion level out of range");
  const PointFunction one = [](std::span<const double>) { return 1.0; };
  TNormEstimate out;
  out.table = estimate_boundary_term(spec, life, exhaustion.level(n), n, t, probes, one, h, n_paths, seed, opts);
  const std::size_t j = out.table.argmax();
  out.norm = out.table.values[j].value.mean;
  out.std_error = out.table.values[j].value.std_error;
  out.argmax = out.table.values[j].x;
  return out;
}

struct TNormBoundRow {
  Point x;
  bool in_compact = false;
  EstimatorResult boundary;               ///< T_{n,t}1(x)
  std::optional<KilledLifetimeResult> lifetime;  ///< E_x[zeta] on exterior probes
};

struct TNormBoundCheck {
  std::size_t n = 0, m = 0;
  double t = 0.0;
  double lhs = 0.0, lhs_std_error = 0.0;
  double sup_compact = 0.0, sup_compact_std_error = 0.0;
  double sup_lifetime = 0.0, sup_lifetime_std_error = 0.0;
  double rhs = 0.0;
  double combined_std_error = 0.0;
  bool pass = false;
  bool loose = false;  ///< rhs >= 1 while ||T|| <= 1 always
  // Same quantities on every second probe (grid-refinement sensitivity).
  double coarse_lhs = 0.0, coarse_rhs = 0.0;
  std::vector<TNormBoundRow> rows;
};

struct TNormBoundOptions {
  double h = 1e-3;
  std::size_t n_paths = 4000;
  std::size_t lifetime_paths = 0;  ///< 0 = n_paths
  double lifetime_t_max = 50.0;
  ExitOptions exit{};
};

/// ||T_{n,t}|| <= sup_{K_m} T_{n,t}1 + (4/t) sup_{E \ K_m} E_x[zeta].
inline TNormBoundCheck t_norm_bound_check(const ProcessSpec& spec, const Lifetime& life,
                                          const Exhaustion& exhaustion, std::size_t n, std::size_t m, double t,
                                          std::span<const Point> probes, std::uint64_t seed,
                                          const TNormBoundOptions& opts = {}) {
  detail::require(m >= 1 && m < n && n <= exhaustion.size(), "norm bound needs 1 ≤ m < n ≤ levels");
  detail::require(t > 0.0, "norm bound needs t > 0");
  detail::require(!probes.empty(), "empty probe grid");
  const bool bounded_parent = life.domain && !life.domain->is_full_space();
  if (life.potential.is_none() && !bounded_parent)
    throw ArgumentError("conservative process without killing: E_x[ζ] = ∞, the bound is vacuous");

  TNormBoundCheck c;
  c.n = n;
  c.m = m;
  c.t = t;
  const auto norm = estimate_T_norm(spec, life, exhaustion, n, t, probes, opts.h, opts.n_paths, seed, opts.exit);
  const Domain parent = life.domain.value_or(Domain::full_space(spec.dim()));
  KilledLifetimeOptions lo;
  lo.t_max = opts.lifetime_t_max;
  lo.exec = opts.exit.exec;
  const std::size_t lifetime_paths = opts.lifetime_paths == 0 ? opts.n_paths : opts.lifetime_paths;

  struct Sup {
    double value = 0.0, se = 0.0;
    bool any = false;
    void offer(double v, double e) {
      if (!any || v > value) {
        value = v;
        se = e;
        any = true;
      }
    }
  };
  Sup lhs, compact, exterior, coarse_lhs, coarse_compact, coarse_exterior;
  for (std::size_t j = 0; j < probes.size(); ++j) {
    TNormBoundRow row;
    row.x = probes[j];
    row.boundary = norm.table.values[j].value;
    row.in_compact = parent.contains(probes[j]) && exhaustion.in_compact(m, probes[j]);
    const bool coarse = j % 2 == 0;
    lhs.offer(row.boundary.mean, row.boundary.std_error);
    if (coarse) coarse_lhs.offer(row.boundary.mean, row.boundary.std_error);
    if (row.in_compact) {
      compact.offer(row.boundary.mean, row.boundary.std_error);
      if (coarse) coarse_compact.offer(row.boundary.mean, row.boundary.std_error);
    } else if (parent.contains(probes[j])) {
      // Probe points double as the probe grid for p̂.
      lo.probes = {probes[j]};
      row.lifetime = estimate_killed_lifetime_mean(spec, probes[j], life, opts.h, lifetime_paths,
                                                   derive_seed(seed, 0x11FEULL + j), lo, opts.exit);
      const double v = row.lifetime->upper_estimate;
      exterior.offer(v, row.lifetime->lifetime.std_error);
      if (coarse) coarse_exterior.offer(v, row.lifetime->lifetime.std_error);
    }
    c.rows.push_back(std::move(row));
  }
  c.lhs = lhs.value;
  c.lhs_std_error = lhs.se;
  c.sup_compact = compact.value;
  c.sup_compact_std_error = compact.se;
  c.sup_lifetime = exterior.value;
  c.sup_lifetime_std_error = exterior.se;
  c.rhs = compact.value + (4.0 / t) * exterior.value;
  c.combined_std_error = std::sqrt(lhs.se * lhs.se + compact.se * compact.se +
                                   (4.0 / t) * (4.0 / t) * exterior.se * exterior.se);
  c.pass = c.lhs <= c.rhs + 3.0 * c.combined_std_error;
  c.loose = c.rhs >= 1.0;
  c.coarse_lhs = coarse_lhs.value;
  c.coarse_rhs = coarse_compact.value + (4.0 / t) * coarse_exterior.value;
  return c;
}

struct SubprocessCommuteResult {
  double max_abs_deviation = 0.0;
  double max_rel_deviation = 0.0;
  std::vector<double> subprocess;  ///< T^{(1)}_{n,t}f per probe
  std::vector<double> scaled;      ///< e^{-t} T_{n,t}f per probe
};

/// T^{(1)}_{n,t}f versus e^{-t} T_{n,t}f on the same paths; the 1-subprocess
/// is the deterministic weight e^{-s}.
inline SubprocessCommuteResult subprocess_commute_check(const ProcessSpec& spec, const Lifetime& life,
                                                        const Domain& level, double t,
                                                        std::span<const Point> probes, const PointFunction& f,
                                                        double h, std::size_t n_paths, std::uint64_t seed,
                                                        const ExitOptions& opts = {}) {
  detail::require(!probes.empty(), "empty probe grid");
  detail::require(t >= 0.0 && h > 0.0 && n_paths >= 2, "commute check needs t ≥ 0, h > 0, n_paths ≥ 2");
  const Domain parent = life.domain.value_or(Domain::full_space(spec.dim()));
  const IncrementSampler sampler(spec, h);
  const std::size_t steps = grid_steps(t, h);
  const double horizon = static_cast<double>(steps) * h;

  struct Acc {
    RunningStats plain, sub;
    void merge(const Acc& o) {
      plain.merge(o.plain);
      sub.merge(o.sub);
    }
  };
  SubprocessCommuteResult r;
  for (std::size_t j = 0; j < probes.size(); ++j) {
    detail::require_point(spec, probes[j]);
    auto acc = chunked_reduce<Acc>(n_paths, opts.exec, [&](std::size_t i, Acc& a) {
      thread_local std::vector<double> x, inc;
      RandomStream rng(derive_seed(derive_seed(seed, 0xC0C0ULL + j), i));
      auto v = detail::continue_path(sampler, spec, level, parent, life.potential, f, probes[j], steps, h,
                                     opts.bridge_correction, rng, x, inc);
      a.plain.add(v.plain);
      a.sub.add(v.subprocess);
    });
    const double sub = acc.sub.mean();
    const double scaled = std::exp(-horizon) * acc.plain.mean();
    const double dev = std::abs(sub - scaled);
    const double ref = std::max(std::abs(sub), std::abs(scaled));
    r.subprocess.push_back(sub);
    r.scaled.push_back(scaled);
    r.max_abs_deviation = std::max(r.max_abs_deviation, dev);
    r.max_rel_deviation = std::max(r.max_rel_deviation, ref > 0.0 ? dev / ref : 0.0);
  }
  return r;
}

}  // namespace compactlab
