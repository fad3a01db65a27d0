#pragma once

// Path functionals and Monte Carlo estimators: exit times, survival,
// 1-resolvents, Feynman-Kac weights, killed lifetimes and time-changed clocks.
//
// Exit detection happens at grid times. For Brownian motion on shapes with a
// closed-form boundary distance, a Brownian-bridge correction additionally
// kills a step (x -> y) with both ends inside with probability
// exp(-2 d(x) d(y) / h) (half-space approximation of the crossing law).
// The exit is then recorded at the end of the step.
//
// Additive functionals use the left-endpoint rule: V is frozen at X_{t_k}
// over [t_k, t_{k+1}), so A is piecewise linear and exp(-A) is integrated
// exactly on each step.

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
#include "compactlab/geometry.hpp"
#include "compactlab/parallel.hpp"
#include "compactlab/process.hpp"
#include "compactlab/rng.hpp"
#include "compactlab/stats.hpp"

namespace compactlab {

/// V(x) = offset + coefficient |x|^exponent, or a user callable.
class KillingPotential {
 public:
  enum class Kind { None, Constant, Power, Custom };

  static KillingPotential none() { return KillingPotential(Kind::None); }

  static KillingPotential constant(double c) {
    detail::require(c >= 0.0, "killing potential must be nonnegative");
    KillingPotential v(Kind::Constant);
    v.offset_ = c;
    return v;
  }

  static KillingPotential power(double offset, double coefficient, double exponent) {
    detail::require(offset >= 0.0 && coefficient >= 0.0, "killing potential must be nonnegative");
    detail::require(exponent >= 0.0, "potential exponent must be nonnegative (local boundedness)");
    KillingPotential v(Kind::Power);
    v.offset_ = offset;
    v.coefficient_ = coefficient;
    v.exponent_ = exponent;
    return v;
  }

  static KillingPotential custom(std::function<double(std::span<const double>)> fn, bool coercive = false) {
    detail::require(static_cast<bool>(fn), "custom potential needs a callable");
    KillingPotential v(Kind::Custom);
    v.fn_ = std::move(fn);
    v.coercive_ = coercive;
    return v;
  }

  Kind kind() const noexcept { return kind_; }
  bool is_none() const noexcept { return kind_ == Kind::None; }
  double offset() const noexcept { return offset_; }
  double coefficient() const noexcept { return coefficient_; }
  double exponent() const noexcept { return exponent_; }

  /// V(x) -> infinity as |x| -> infinity.
  bool coercive() const noexcept {
    if (kind_ == Kind::Power) return coefficient_ > 0.0 && exponent_ > 0.0;
    return kind_ == Kind::Custom && coercive_;
  }

  /// Infimum of V over R^d when known in closed form (else 0).
  double lower_bound() const noexcept { return kind_ == Kind::Custom ? 0.0 : offset_; }

  double operator()(std::span<const double> x) const {
    switch (kind_) {
      case Kind::None: return 0.0;
      case Kind::Constant: return offset_;
      case Kind::Power: {
        if (coefficient_ == 0.0) return offset_;
        double r2 = 0.0;
        for (double v : x) r2 += v * v;
        return offset_ + coefficient_ * (exponent_ == 2.0 ? r2 : std::pow(r2, 0.5 * exponent_));
      }
      case Kind::Custom: {
        const double v = fn_(x);
        if (!(v >= 0.0)) throw ContractViolation("killing potential is negative at a visited point");
        return v;
      }
    }
    return 0.0;
  }

 private:
  explicit KillingPotential(Kind k) : kind_(k) {}
  Kind kind_;
  double offset_ = 0.0;
  double coefficient_ = 0.0;
  double exponent_ = 0.0;
  bool coercive_ = false;
  std::function<double(std::span<const double>)> fn_;
};

/// Weight W of the time change, with 1 + |x|^beta <= W(x) < infinity.
class TimeChangeWeight {
 public:
  /// W(x) = factor (1 + |x|^beta), factor >= 1.
  static TimeChangeWeight extremal(double beta, double factor = 1.0) {
    detail::require(beta >= 0.0, "time-change exponent beta must be ≥ 0");
    detail::require(factor >= 1.0, "W ≥ 1 + |x|^β requires factor ≥ 1");
    TimeChangeWeight w;
    w.beta_ = beta;
    w.factor_ = factor;
    return w;
  }

  /// Radial profile W(x) = profile(|x|); validated on `probe_radii`.
  static TimeChangeWeight radial(double beta, std::function<double(double)> profile,
                                 std::span<const double> probe_radii) {
    detail::require(beta >= 0.0, "time-change exponent beta must be ≥ 0");
    detail::require(static_cast<bool>(profile), "radial weight needs a profile");
    TimeChangeWeight w;
    w.beta_ = beta;
    w.profile_ = std::move(profile);
    for (double r : probe_radii) {
      const double v = w.at_radius(r);
      if (!(v >= 1.0 + std::pow(r, beta)) || !std::isfinite(v))
        throw ArgumentError("weight violates 1 + |x|^β ≤ W(x) < ∞ at |x| = " + std::to_string(r));
    }
    return w;
  }

  double beta() const noexcept { return beta_; }
  bool is_extremal() const noexcept { return !profile_ && factor_ == 1.0; }

  double at_radius(double r) const {
    if (profile_) return profile_(r);
    return factor_ * (1.0 + (beta_ == 0.0 ? 1.0 : std::pow(r, beta_)));
  }

  double operator()(std::span<const double> x) const { return at_radius(Domain::norm(x)); }

 private:
  double beta_ = 0.0;
  double factor_ = 1.0;
  std::function<double(double)> profile_;
};

/// How a process dies: exit from `domain` and/or Feynman-Kac killing at rate V.
struct Lifetime {
  std::optional<Domain> domain;
  KillingPotential potential = KillingPotential::none();

  bool infinite() const { return (!domain || domain->is_full_space()) && potential.is_none(); }
};

struct ExitOptions {
  bool bridge_correction = true;  ///< only honoured for alpha = 2 and exact-distance shapes
  Execution exec{};
};

/// Per-path exit monitor. Call enter(x0) on an interior start, then step(y)
/// for every new grid position.
class ExitMonitor {
 public:
  ExitMonitor(const Domain& domain, const ProcessSpec& spec, double h, bool bridge_requested)
      : domain_(&domain), h_(h) {
    bridge_ = bridge_requested && spec.is_brownian() && !domain.is_full_space();
    if (bridge_) {
      // Only shapes with a closed-form distance qualify.
      bridge_ = has_exact_distance(domain);
    }
  }

  bool bridge_active() const noexcept { return bridge_; }

  void enter(std::span<const double> x0) {
    if (bridge_) last_distance_ = *domain_->boundary_distance(x0);
  }

  /// True if the step ending at y leaves the domain.
  bool step(std::span<const double> y, RandomStream& rng) {
    if (!bridge_) return !domain_->contains(y);
    const double dy = *domain_->boundary_distance(y);
    if (dy <= 0.0) return true;
    const double z = 2.0 * last_distance_ * dy / h_;
    last_distance_ = dy;
    return z < 40.0 && rng.uniform() < std::exp(-z);
  }

 private:
  static bool has_exact_distance(const Domain& d) {
    using namespace shapes;
    return std::visit(
        [&](const auto& s) -> bool {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, UnionOfBalls>) return false;
          else if constexpr (std::is_same_v<S, Clipped>) return has_exact_distance(*s.base);
          else return true;
        },
        d.shape());
  }

  const Domain* domain_;
  double h_;
  bool bridge_ = false;
  double last_distance_ = 0.0;
};

namespace detail {

struct WalkOutcome {
  std::size_t steps = 0;  ///< alive intervals [t_k, t_{k+1}) walked
  bool exited = false;
  bool stopped = false;  ///< the interval callback asked to stop
};

/// Walks one path from x0. `on_interval(k, x_k)` is called for every interval
/// on which the path is alive at its left endpoint; returning false stops the
/// walk. The exit (if any) happens at time steps * h.
template <class OnInterval>
WalkOutcome walk(const IncrementSampler& sampler, ExitMonitor& monitor, std::span<const double> x0,
                 std::size_t max_steps, RandomStream& rng, std::vector<double>& x, std::vector<double>& inc,
                 OnInterval&& on_interval) {
  const std::size_t d = x0.size();
  x.assign(x0.begin(), x0.end());
  inc.resize(d);
  monitor.enter(x);
  WalkOutcome out;
  for (std::size_t k = 0; k < max_steps; ++k) {
    if (!on_interval(k, std::span<const double>(x))) {
      out.steps = k;
      out.stopped = true;
      return out;
    }
    sampler.draw(rng, inc);
    for (std::size_t i = 0; i < d; ++i) x[i] += inc[i];
    if (monitor.step(x, rng)) {
      out.steps = k + 1;
      out.exited = true;
      return out;
    }
  }
  out.steps = max_steps;
  return out;
}

inline void require_point(const ProcessSpec& spec, std::span<const double> x0) {
  require(x0.size() == static_cast<std::size_t>(spec.dim()), "starting point dimension mismatch");
}

}  // namespace detail

/// First grid time t_k with X_{t_k} outside the domain; 0 if X_0 is outside,
/// nullopt ("survived") if the path never leaves.
inline std::optional<double> exit_time(const PathSample& path, const Domain& domain) {
  for (std::size_t k = 0; k < path.size(); ++k)
    if (!domain.contains(path.position(k))) return path.time(k);
  return std::nullopt;
}

/// Exit-time functionals computed on one shared ensemble.
struct ExitSummary {
  EstimatorResult mean_exit;  ///< E[min(tau, t_max)]
  EstimatorResult r1;         ///< E[1 - exp(-min(tau, t_max))]
  double censored_fraction = 0.0;
  bool bridge_corrected = false;
};

inline constexpr double kSurvivorWarningFraction = 1e-3;

inline ExitSummary estimate_exit_functionals(const ProcessSpec& spec, std::span<const double> x0,
                                             const Domain& domain, double t_max, double h, std::size_t n_paths,
                                             std::uint64_t seed, const ExitOptions& opts = {}) {
  detail::require_point(spec, x0);
  detail::require(h > 0.0 && t_max >= h, "exit estimators require t_max ≥ h > 0");
  detail::require(n_paths >= 2, "estimators need n_paths ≥ 2");
  detail::require(domain.contains(x0), "starting point must lie inside the domain");

  const IncrementSampler sampler(spec, h);
  const std::size_t max_steps = grid_steps(t_max, h);
  const double horizon = static_cast<double>(max_steps) * h;
  ExitMonitor probe(domain, spec, h, opts.bridge_correction);

  struct Acc {
    RunningStats tau, r1;
    std::size_t censored = 0;
    void merge(const Acc& o) {
      tau.merge(o.tau);
      r1.merge(o.r1);
      censored += o.censored;
    }
  };

  const Point start(x0.begin(), x0.end());
  auto acc = chunked_reduce<Acc>(n_paths, opts.exec, [&](std::size_t i, Acc& a) {
    thread_local std::vector<double> x, inc;
    RandomStream rng(derive_seed(seed, i));
    ExitMonitor monitor(domain, spec, h, opts.bridge_correction);
    auto out = detail::walk(sampler, monitor, start, max_steps, rng, x, inc,
                            [](std::size_t, std::span<const double>) { return true; });
    const double tau = out.exited ? static_cast<double>(out.steps) * h : horizon;
    a.tau.add(tau);
    a.r1.add(-std::expm1(-tau));
    if (!out.exited) ++a.censored;
  });

  ExitSummary s;
  s.censored_fraction = static_cast<double>(acc.censored) / static_cast<double>(n_paths);
  s.bridge_corrected = probe.bridge_active();
  s.mean_exit = EstimatorResult::from(acc.tau, h, seed);
  s.r1 = EstimatorResult::from(acc.r1, h, seed);
  for (auto* r : {&s.mean_exit, &s.r1}) {
    r->censored_fraction = s.censored_fraction;
    if (s.censored_fraction >= kSurvivorWarningFraction) r->status = EstimatorStatus::SurvivorWarning;
  }
  return s;
}

/// E_x[min(tau_D, t_max)] with survivor accounting.
inline EstimatorResult estimate_mean_exit_time(const ProcessSpec& spec, std::span<const double> x0,
                                               const Domain& domain, double t_max, double h, std::size_t n_paths,
                                               std::uint64_t seed, const ExitOptions& opts = {}) {
  return estimate_exit_functionals(spec, x0, domain, t_max, h, n_paths, seed, opts).mean_exit;
}

/// P_x(tau_D > t).
inline EstimatorResult estimate_survival(const ProcessSpec& spec, std::span<const double> x0, const Domain& domain,
                                         double t, double h, std::size_t n_paths, std::uint64_t seed,
                                         const ExitOptions& opts = {}) {
  detail::require_point(spec, x0);
  detail::require(h > 0.0 && t >= 0.0, "survival needs t ≥ 0 and h > 0");
  detail::require(n_paths >= 2, "estimators need n_paths ≥ 2");
  RunningStats stats;
  if (!domain.contains(x0)) {
    for (std::size_t i = 0; i < n_paths; ++i) stats.add(0.0);
    return EstimatorResult::from(stats, h, seed);
  }
  if (domain.is_full_space()) {
    for (std::size_t i = 0; i < n_paths; ++i) stats.add(1.0);
    return EstimatorResult::from(stats, h, seed);
  }
  const IncrementSampler sampler(spec, h);
  const std::size_t steps = grid_steps(t, h);
  const Point start(x0.begin(), x0.end());
  stats = chunked_reduce<RunningStats>(n_paths, opts.exec, [&](std::size_t i, RunningStats& a) {
    thread_local std::vector<double> x, inc;
    RandomStream rng(derive_seed(seed, i));
    ExitMonitor monitor(domain, spec, h, opts.bridge_correction);
    auto out = detail::walk(sampler, monitor, start, steps, rng, x, inc,
                            [](std::size_t, std::span<const double>) { return true; });
    a.add(out.exited ? 0.0 : 1.0);
  });
  return EstimatorResult::from(stats, h, seed);
}

/// R_1 1(x) = E_x[ int_0^zeta e^{-s} ds ] = E_x[1 - e^{-zeta}], where zeta is the
/// exit time of `life.domain` combined with Feynman-Kac killing at rate
/// `life.potential`; the integral is cut at t_max (bias <= e^{-t_max}).
inline EstimatorResult estimate_resolvent_r1(const ProcessSpec& spec, std::span<const double> x0,
                                             const Lifetime& life, double h, std::size_t n_paths,
                                             std::uint64_t seed, double t_max = 30.0,
                                             const ExitOptions& opts = {}) {
  detail::require_point(spec, x0);
  detail::require(h > 0.0 && t_max >= h, "resolvent estimator requires t_max ≥ h > 0");
  detail::require(n_paths >= 2, "estimators need n_paths ≥ 2");
  const Domain domain = life.domain.value_or(Domain::full_space(spec.dim()));
  RunningStats stats;
  if (!domain.contains(x0)) {
    for (std::size_t i = 0; i < n_paths; ++i) stats.add(0.0);
    return EstimatorResult::from(stats, h, seed);
  }
  const std::size_t max_steps = grid_steps(t_max, h);
  if (life.infinite()) {
    // Deterministic: zeta = infinity.
    const double v = -std::expm1(-static_cast<double>(max_steps) * h);
    for (std::size_t i = 0; i < n_paths; ++i) stats.add(v);
    return EstimatorResult::from(stats, h, seed);
  }
  const IncrementSampler sampler(spec, h);
  const Point start(x0.begin(), x0.end());
  constexpr double negligible = 1e-16;
  stats = chunked_reduce<RunningStats>(n_paths, opts.exec, [&](std::size_t i, RunningStats& a) {
    thread_local std::vector<double> x, inc;
    RandomStream rng(derive_seed(seed, i));
    ExitMonitor monitor(domain, spec, h, opts.bridge_correction);
    double log_weight = 0.0;  // -(t + A_t)
    double integral = 0.0;
    detail::walk(sampler, monitor, start, max_steps, rng, x, inc, [&](std::size_t, std::span<const double> xk) {
      const double rate = 1.0 + life.potential(xk);
      const double w = std::exp(log_weight);
      integral += w * (-std::expm1(-rate * h)) / rate;
      log_weight -= rate * h;
      return w > negligible;
    });
    a.add(integral);
  });
  return EstimatorResult::from(stats, h, seed);
}

/// -A_t = -sum_{t_k < t} V(X_{t_k}) h; finite, so the weight exp(-A_t) lies in (0,1].
inline double feynman_kac_log_weight(const PathSample& path, const KillingPotential& v, double t) {
  detail::require(t >= 0.0, "time t must be nonnegative");
  const std::size_t steps = grid_steps(t, path.step_h);
  detail::require(steps <= path.steps(), "t exceeds the path horizon");
  double a = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double vk = v(path.position(k));
    if (!(vk >= 0.0) || !std::isfinite(vk)) throw ContractViolation("killing potential is negative or infinite at a visited point");
    a += vk * path.step_h;
  }
  return -a;
}

/// exp(-A_t). Underflows to 0 in double once A_t exceeds about 745; use
/// feynman_kac_log_weight when the weight itself must stay positive.
inline double feynman_kac_weight(const PathSample& path, const KillingPotential& v, double t) {
  return std::exp(feynman_kac_log_weight(path, v, t));
}

struct KilledLifetimeOptions {
  double t_max = 200.0;                 ///< horizon of the path quadrature
  double stop_weight = 1e-13;           ///< stop a path once exp(-A) drops below this
  std::vector<Point> probes;            ///< probe grid for p̂ = sup_x P_x^V(zeta > 1); empty = {x0}
  std::size_t probe_paths = 0;          ///< paths per probe; 0 = n_paths
  Execution exec{};
};

struct KilledLifetimeResult {
  EstimatorResult lifetime;       ///< censored E_x^V[zeta] (integral up to the stopping point)
  double tail_bound = 0.0;        ///< E[exp(-A) at stop] / (1 - p̂): bound on the neglected part
  double upper_estimate = 0.0;    ///< lifetime.mean + tail_bound
  double p_hat = 0.0;             ///< sup over probes of P^V(zeta > 1)
  double geometric_bound = 0.0;   ///< 1 / (1 - p̂)
  EstimatorStatus status = EstimatorStatus::Ok;
};

namespace detail {

/// P_x(zeta > t) = E_x[exp(-A_t); t < tau_E] by left-endpoint killing.
inline EstimatorResult killed_survival(const ProcessSpec& spec, std::span<const double> x0, const Lifetime& life,
                                       double t, double h, std::size_t n_paths, std::uint64_t seed,
                                       const ExitOptions& opts) {
  const IncrementSampler sampler(spec, h);
  const std::size_t steps = grid_steps(t, h);
  const Domain domain = life.domain.value_or(Domain::full_space(spec.dim()));
  const Point start(x0.begin(), x0.end());
  if (!domain.contains(start)) {
    RunningStats zero;
    for (std::size_t i = 0; i < n_paths; ++i) zero.add(0.0);
    return EstimatorResult::from(zero, h, seed);
  }
  auto stats = chunked_reduce<RunningStats>(n_paths, opts.exec, [&](std::size_t i, RunningStats& a) {
    thread_local std::vector<double> x, inc;
    RandomStream rng(derive_seed(seed, i));
    ExitMonitor monitor(domain, spec, h, opts.bridge_correction);
    double A = 0.0;
    auto out = walk(sampler, monitor, start, steps, rng, x, inc, [&](std::size_t, std::span<const double> xk) {
      A += life.potential(xk) * h;
      return A < 745.0;  // exp(-A) underflows beyond this
    });
    a.add(out.exited || out.stopped ? 0.0 : std::exp(-A));
  });
  return EstimatorResult::from(stats, h, seed);
}

}  // namespace detail

/// E_x[zeta] = int_0^inf P_x(zeta > t) dt for a lifetime built from exit of a
/// domain and/or killing at rate V, with the geometric tail bound
/// sup_x E_x[zeta] <= 1/(1-p), p = sup_x P_x(zeta > 1).
inline KilledLifetimeResult estimate_killed_lifetime_mean(const ProcessSpec& spec, std::span<const double> x0,
                                                          const Lifetime& life, double h, std::size_t n_paths,
                                                          std::uint64_t seed, const KilledLifetimeOptions& opts = {},
                                                          const ExitOptions& exit_opts = {}) {
  detail::require_point(spec, x0);
  detail::require(h > 0.0 && opts.t_max >= h, "killed lifetime requires t_max ≥ h > 0");
  detail::require(n_paths >= 2, "estimators need n_paths ≥ 2");
  const IncrementSampler sampler(spec, h);
  const std::size_t max_steps = grid_steps(opts.t_max, h);
  const Domain domain = life.domain.value_or(Domain::full_space(spec.dim()));
  const Point start(x0.begin(), x0.end());
  ExitOptions eo = exit_opts;
  eo.exec = opts.exec;

  struct Acc {
    RunningStats life, residual;
    void merge(const Acc& o) {
      life.merge(o.life);
      residual.merge(o.residual);
    }
  };
  const bool inside = domain.contains(start);
  auto acc = chunked_reduce<Acc>(n_paths, opts.exec, [&](std::size_t i, Acc& a) {
    if (!inside) {
      a.life.add(0.0);
      a.residual.add(0.0);
      return;
    }
    thread_local std::vector<double> x, inc;
    RandomStream rng(derive_seed(seed, i));
    ExitMonitor monitor(domain, spec, h, eo.bridge_correction);
    double A = 0.0, integral = 0.0;
    auto out = detail::walk(sampler, monitor, start, max_steps, rng, x, inc,
                            [&](std::size_t, std::span<const double> xk) {
                              const double w = std::exp(-A);
                              if (w < opts.stop_weight) return false;
                              const double vk = life.potential(xk);
                              integral += vk > 0.0 ? w * (-std::expm1(-vk * h)) / vk : w * h;
                              A += vk * h;
                              return true;
                            });
    a.life.add(integral);
    a.residual.add(out.exited ? 0.0 : std::exp(-A));
  });

  KilledLifetimeResult out;
  out.lifetime = EstimatorResult::from(acc.life, h, seed);
  const std::size_t probe_paths = opts.probe_paths == 0 ? n_paths : opts.probe_paths;
  std::vector<Point> probes = opts.probes;
  if (probes.empty()) probes.push_back(start);
  for (std::size_t j = 0; j < probes.size(); ++j) {
    const auto s = detail::killed_survival(spec, probes[j], life, 1.0, h, probe_paths,
                                           derive_seed(seed ^ 0x5EEDULL, j), eo);
    out.p_hat = std::max(out.p_hat, s.mean);
  }
  if (out.p_hat >= 1.0 - 1e-12) {
    out.status = EstimatorStatus::TailDivergent;
    out.geometric_bound = std::numeric_limits<double>::infinity();
    out.tail_bound = acc.residual.mean() > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  } else {
    out.geometric_bound = 1.0 / (1.0 - out.p_hat);
    out.tail_bound = acc.residual.mean() * out.geometric_bound;
  }
  out.upper_estimate = out.lifetime.mean + out.tail_bound;
  out.lifetime.censored_fraction = acc.residual.mean();
  out.lifetime.status = out.status;
  return out;
}

inline KilledLifetimeResult estimate_killed_lifetime_mean(const ProcessSpec& spec, std::span<const double> x0,
                                                          const KillingPotential& v, double h, std::size_t n_paths,
                                                          std::uint64_t seed, const KilledLifetimeOptions& opts = {}) {
  return estimate_killed_lifetime_mean(spec, x0, Lifetime{std::nullopt, v}, h, n_paths, seed, opts);
}

/// Clock A_t = int_0^t W(X_s)^{-1} ds on a sampled path and its inverse.
class TimeChangedPath {
 public:
  TimeChangedPath(PathSample path, const TimeChangeWeight& w) : path_(std::move(path)) {
    clock_.resize(path_.size());
    rates_.resize(path_.size());
    for (std::size_t k = 0; k < path_.size(); ++k) {
      const double wk = w(path_.position(k));
      if (!(wk >= 1.0)) throw ArgumentError("time-change weight must satisfy W ≥ 1");
      rates_[k] = 1.0 / wk;
      if (k > 0) clock_[k] = clock_[k - 1] + rates_[k - 1] * path_.step_h;
    }
  }

  const PathSample& path() const noexcept { return path_; }
  /// A_{t_k}, k = 0..steps.
  const std::vector<double>& clock() const noexcept { return clock_; }
  double clock_end() const noexcept { return clock_.back(); }

  /// tau_s = A^{-1}(s) (A piecewise linear); nullopt beyond the horizon.
  std::optional<double> inverse(double s) const {
    if (s < 0.0 || s > clock_.back()) return std::nullopt;
    auto it = std::upper_bound(clock_.begin(), clock_.end(), s);
    if (it == clock_.end()) return path_.t_max();
    const auto k = static_cast<std::size_t>(it - clock_.begin()) - 1;
    return path_.time(k) + (s - clock_[k]) / rates_[k];
  }

  /// X^mu_s = X_{tau_s}, read off the grid at floor(tau_s / h).
  std::optional<Point> position_at(double s) const {
    auto t = inverse(s);
    if (!t) return std::nullopt;
    auto k = std::min(path_.steps(), static_cast<std::size_t>(std::floor(*t / path_.step_h * (1.0 + 1e-12))));
    auto p = path_.position(k);
    return Point(p.begin(), p.end());
  }

 private:
  PathSample path_;
  std::vector<double> clock_;
  std::vector<double> rates_;
};

inline TimeChangedPath time_change_clock(PathSample path, const TimeChangeWeight& w) {
  return TimeChangedPath(std::move(path), w);
}

}  // namespace compactlab
