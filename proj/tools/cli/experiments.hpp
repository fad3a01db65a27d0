#pragma once

// The named experiments. Each one resolves its config against embedded
// defaults, validates it, runs, and fills a Report whose assertions decide the
// exit status.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cli/config.hpp"
#include "cli/report.hpp"
#include "compactlab/analytics.hpp"
#include "compactlab/functionals.hpp"
#include "compactlab/geometry.hpp"
#include "compactlab/process.hpp"
#include "compactlab/semigroup_identities.hpp"
#include "compactlab/spectral.hpp"

namespace compactlab::cli {

using Runner = Report (*)(const Config&, const Execution&);

struct ExperimentDef {
  std::string name;
  std::string defaults;
  Runner run;
};

namespace detail {

/// Wraps library precondition errors so the message names the field.
template <class F>
auto scoped(const std::string& key, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ArgumentError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

inline ProcessSpec process_from(const Config& c) {
  const long long d = c.integer("process.dim");
  c.require(d >= 1 && d <= 64, "process.dim", "dimension d ≥ 1 required");
  const double a = c.real("process.alpha");
  c.require(a > 0.0 && a <= 2.0, "process.alpha", "alpha ∈ (0,2] required, got " + fmt(a));
  return ProcessSpec(a, static_cast<int>(d));
}

inline Point point_from(const Config& c, const std::string& key, int dim) {
  auto p = c.reals(key);
  c.require(p.size() == static_cast<std::size_t>(dim), key,
            "expected " + std::to_string(dim) + " coordinates, got " + std::to_string(p.size()));
  return p;
}

inline std::vector<Point> probes_from(const Config& c, int dim) {
  auto ps = c.points("probes");
  c.require(!ps.empty(), "probes", "at least one probe point required");
  for (const auto& p : ps)
    c.require(p.size() == static_cast<std::size_t>(dim), "probes",
              "every probe needs " + std::to_string(dim) + " coordinates");
  return ps;
}

inline Domain domain_from(const Config& c, int dim) {
  const std::string shape = c.string("domain.shape");
  return scoped("domain." + shape, [&]() -> Domain {
    if (shape == "full") return Domain::full_space(dim);
    if (shape == "ball") return Domain::ball(point_from(c, "domain.center", dim), c.real("domain.radius"));
    if (shape == "box") return Domain::box(point_from(c, "domain.lo", dim), point_from(c, "domain.hi", dim));
    if (shape == "interval") {
      c.require(dim == 1, "domain.shape", "interval needs process.dim = 1");
      return Domain::interval(c.real("domain.a"), c.real("domain.b"));
    }
    if (shape == "shrinking-balls") {
      const long long n = c.integer("domain.n_max");
      c.require(n >= 1, "domain.n_max", "truncation N ≥ 1 required");
      return shrinking_ball_domain(dim, static_cast<int>(n));
    }
    throw ConfigError("domain.shape: unknown shape '" + shape + "'");
  });
}

inline KillingPotential potential_from(const Config& c) {
  if (!c.has("potential.kind")) return KillingPotential::none();
  const std::string kind = c.string("potential.kind");
  return scoped("potential", [&]() -> KillingPotential {
    if (kind == "none") return KillingPotential::none();
    if (kind == "constant") return KillingPotential::constant(c.real("potential.offset"));
    if (kind == "power")
      return KillingPotential::power(c.real("potential.offset"), c.real("potential.coefficient"),
                                     c.real("potential.exponent"));
    throw ConfigError("potential.kind: unknown kind '" + kind + "'");
  });
}

inline TimeChangeWeight weight_from(const Config& c) {
  return scoped("weight", [&] { return TimeChangeWeight::extremal(c.real("weight.beta"), c.real("weight.factor")); });
}

inline TestFunction test_function_from(const Config& c, int dim) {
  const std::string kind = c.string("f.kind");
  if (kind == "gaussian") return TestFunction::gaussian_bump(c.real("f.a"), point_from(c, "f.center", dim));
  if (kind == "constant") return TestFunction::constant(c.real("f.value"));
  throw ConfigError("f.kind: unknown kind '" + kind + "'");
}

inline double positive(const Config& c, const std::string& key) {
  const double v = c.real(key);
  c.require(v > 0.0, key, "must be positive");
  return v;
}

inline std::size_t paths(const Config& c, const std::string& key = "n_paths") {
  const auto n = c.uint(key);
  c.require(n >= 2, key, "at least 2 paths required");
  return static_cast<std::size_t>(n);
}

inline void require_transient(const Config& c, const ProcessSpec& spec) {
  c.require(static_cast<double>(spec.dim()) > spec.alpha(), "process.dim",
            "d > α required for transience (got d = " + std::to_string(spec.dim()) + ", α = " + fmt(spec.alpha()) + ")");
}

inline bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

inline ExitOptions exit_options(const Config& c, const Execution& exec) {
  ExitOptions o;
  o.bridge_correction = c.has("bridge") ? c.boolean("bridge") : true;
  o.exec = exec;
  return o;
}

inline std::vector<double> as_row(std::span<const double> x, std::initializer_list<double> tail) {
  std::vector<double> r(x.begin(), x.end());
  r.insert(r.end(), tail);
  return r;
}

inline std::vector<std::string> coord_columns(int dim, std::initializer_list<std::string> tail, std::string prefix = "x_") {
  std::vector<std::string> cols;
  for (int i = 1; i <= dim; ++i) cols.push_back(prefix + std::to_string(i));
  cols.insert(cols.end(), tail);
  return cols;
}

inline GeneratorMatrix base_generator(const Grid& grid, double alpha) {
  auto gen = dirichlet_laplacian(grid);
  return alpha < 2.0 ? fractional_power(gen, alpha) : gen;
}

// ---------------------------------------------------------------------------

inline Report run_sample_paths(const Config& c, const Execution&) {
  const ProcessSpec spec = process_from(c);
  const Point x0 = point_from(c, "x0", spec.dim());
  const double h = positive(c, "h"), t_max = positive(c, "t_max");
  c.require(t_max >= h, "t_max", "t_max ≥ h required");
  const auto n = c.uint("n_paths");
  c.require(n >= 1, "n_paths", "at least one path required");
  const bool tc = c.boolean("time_change.enabled");
  std::optional<TimeChangeWeight> w;
  if (tc) {
    require_transient(c, spec);
    w = weight_from(c);
  }
  const std::uint64_t seed = c.uint("seed");

  Report rep("sample-paths",
             "Rotationally symmetric alpha-stable paths from exact-law increments, optionally time-changed by "
             "A_t = int_0^t W(X_s)^{-1} ds",
             c);
  auto& tab = rep.table("paths", coord_columns(spec.dim(), {}, "x_"));
  tab.columns.insert(tab.columns.begin(), {"path", "t"});
  if (tc) tab.columns.push_back("clock");
  bool clock_ok = true;
  for (std::uint64_t p = 0; p < n; ++p) {
    auto path = sample_path(spec, x0, t_max, h, compactlab::derive_seed(seed, p));
    std::optional<TimeChangedPath> tcp;
    if (w) tcp.emplace(path, *w);
    for (std::size_t k = 0; k < path.size(); ++k) {
      std::vector<double> row{static_cast<double>(p), path.time(k)};
      for (double v : path.position(k)) row.push_back(v);
      if (tcp) {
        const double a = tcp->clock()[k];
        clock_ok = clock_ok && a <= path.time(k) * (1.0 + 1e-12) && (k == 0 || a >= tcp->clock()[k - 1]);
        row.push_back(a);
      }
      tab.rows.push_back(std::move(row));
    }
  }
  if (tc) rep.check("time-change clock nondecreasing with A_t <= t (W >= 1)", clock_ok, "all sampled steps");
  return rep;
}

inline Report run_exit_time(const Config& c, const Execution& exec) {
  const ProcessSpec spec = process_from(c);
  const Domain domain = domain_from(c, spec.dim());
  const Point x0 = point_from(c, "x0", spec.dim());
  c.require(domain.contains(x0), "x0", "starting point must lie inside the domain");
  const double h = positive(c, "h"), t_max = positive(c, "t_max");
  const std::size_t n = paths(c);
  const auto opts = exit_options(c, exec);
  const std::uint64_t seed = c.uint("seed");
  const auto s = estimate_exit_functionals(spec, x0, domain, t_max, h, n, seed, opts);

  Report rep("exit-time",
             "Mean exit time from a ball or interval: E_x[tau] = (r^2 - |x|^2)/d for Brownian motion and the "
             "Getoor formula for alpha < 2; R_1 1(x) = E_x[1 - e^{-tau}]",
             c);
  auto& tab = rep.table("exit", {"mean_exit", "std_error", "r1", "r1_std_error", "censored_fraction", "oracle"});

  std::optional<double> oracle;
  const std::string shape = c.string("domain.shape");
  if (shape == "ball") {
    const Point ctr = c.reals("domain.center");
    oracle = mean_exit_time_ball(spec, c.real("domain.radius"), Domain::distance(x0, ctr));
  } else if (shape == "interval") {
    const double a = c.real("domain.a"), b = c.real("domain.b");
    oracle = mean_exit_time_ball(spec, 0.5 * (b - a), std::abs(x0[0] - 0.5 * (a + b)));
  }
  tab.rows.push_back({s.mean_exit.mean, s.mean_exit.std_error, s.r1.mean, s.r1.std_error, s.censored_fraction,
                      oracle.value_or(std::numeric_limits<double>::quiet_NaN())});
  rep.note("bridge_corrected", s.bridge_corrected);
  rep.note("status", std::string(to_string(s.mean_exit.status)));
  if (oracle) {
    const double tol = std::max(3.0 * s.mean_exit.std_error, 0.01 * *oracle);
    const double dev = std::abs(s.mean_exit.mean - *oracle);
    rep.check("E[tau] matches the closed form within max(3 stderr, 1%)", dev <= tol,
              "estimate " + fmt(s.mean_exit.mean) + ", oracle " + fmt(*oracle) + ", |dev| " + fmt(dev) + ", tol " +
                  fmt(tol));
  }
  rep.check("censored fraction below the survivor threshold", s.censored_fraction < kSurvivorWarningFraction,
            fmt(s.censored_fraction));
  return rep;
}

inline Report run_tightness_scan(const Config& c, const Execution& exec) {
  const ProcessSpec spec = process_from(c);
  const KillingPotential v = potential_from(c);
  const auto probes = probes_from(c, spec.dim());
  const double h = positive(c, "h"), t_max = positive(c, "t_max");
  const std::size_t n = paths(c);
  const std::uint64_t seed = c.uint("seed");
  const auto opts = exit_options(c, exec);
  const Lifetime life{std::nullopt, v};

  Report rep("tightness-scan",
             "Tightness of the killed process: R_1 1(x) = E_x[1 - e^{-zeta}] tends to 0 as x leaves every compact",
             c);
  auto& tab = rep.table("r1", coord_columns(spec.dim(), {"norm", "r1", "std_error"}));
  std::vector<double> vals;
  for (std::size_t j = 0; j < probes.size(); ++j) {
    const auto r = estimate_resolvent_r1(spec, probes[j], life, h, n, compactlab::derive_seed(seed, j), t_max, opts);
    tab.rows.push_back(as_row(probes[j], {Domain::norm(probes[j]), r.mean, r.std_error}));
    vals.push_back(r.mean);
  }
  rep.check("R_1 1 strictly decreasing along the probes", strictly_decreasing(vals), "");
  rep.check("last value below half the first", vals.back() < 0.5 * vals.front(),
            fmt(vals.back()) + " vs " + fmt(vals.front()));
  return rep;
}

inline Report run_dynkin_check(const Config& c, const Execution& exec) {
  const ProcessSpec spec = process_from(c);
  const Domain U = domain_from(c, spec.dim());
  const Point x0 = point_from(c, "x0", spec.dim());
  const TestFunction f = test_function_from(c, spec.dim());
  c.require(f.has_heat_oracle(spec), "f.kind", "the boundary term needs a closed-form p_s f (Gaussian bump with alpha = 2, or a constant)");
  const double t = positive(c, "t"), h = positive(c, "h");
  const std::size_t n = paths(c);
  const auto r = dynkin_residual(spec, x0, f, t, U, h, n, c.uint("seed"), exit_options(c, exec));

  Report rep("dynkin-check",
             "Dynkin's formula: p_t f(x) = p_t^U f(x) + E_x[p_{t-tau_U} f(X_{tau_U}); tau_U <= t]", c);
  auto& tab = rep.table("dynkin", {"free_term", "part_term", "boundary_term", "residual", "combined_std_error",
                                   "exit_fraction"});
  tab.rows.push_back({r.free_term.mean, r.part_term.mean, r.boundary_term.mean, r.residual, r.std_error,
                      r.exit_fraction});
  if (f.has_heat_oracle(spec)) rep.note("free_term_exact", f.heat(spec, t, x0));
  rep.note("bridge_corrected", r.bridge_corrected);
  rep.check("|residual| < 3 combined stderr", std::abs(r.residual) < 3.0 * r.std_error,
            "residual " + fmt(r.residual) + ", stderr " + fmt(r.std_error));
  return rep;
}

inline Report run_t_norm_check(const Config& c, const Execution& exec) {
  const ProcessSpec spec = process_from(c);
  const Domain parent = domain_from(c, spec.dim());
  const KillingPotential v = potential_from(c);
  const Lifetime life{parent.is_full_space() ? std::nullopt : std::optional<Domain>(parent), v};
  c.require(!life.infinite(), "potential.kind", "the norm bound needs a finite lifetime (a killing potential or a bounded domain)");
  const long long levels = c.integer("exhaustion.levels");
  c.require(levels >= 2, "exhaustion.levels", "at least 2 levels required");
  const Exhaustion exh = standard_exhaustion(parent, static_cast<int>(levels), positive(c, "exhaustion.scale"));
  const long long ln = c.integer("level.n"), lm = c.integer("level.m");
  c.require(lm >= 1 && lm < ln && ln <= levels, "level.n", "1 ≤ level.m < level.n ≤ exhaustion.levels required");
  const double t = positive(c, "t");
  const auto probes = probes_from(c, spec.dim());
  const std::uint64_t seed = c.uint("seed");

  TNormBoundOptions o;
  o.h = positive(c, "h");
  o.n_paths = paths(c);
  o.lifetime_paths = paths(c, "lifetime.paths");
  o.lifetime_t_max = positive(c, "lifetime.t_max");
  o.exit = exit_options(c, exec);
  const auto chk = t_norm_bound_check(spec, life, exh, static_cast<std::size_t>(ln), static_cast<std::size_t>(lm), t,
                                      probes, seed, o);

  Report rep("t-norm-check",
             "Operator-norm bound: ||T_{n,t}|| <= sup_{K_m} E_x[p_{t-tau_n}1(X_{tau_n}); tau_n <= t] + (4/t) "
             "sup_{E \\ K_m} E_x[zeta]",
             c);
  auto& tab = rep.table("probes", coord_columns(spec.dim(), {"in_compact", "T1", "T1_std_error", "lifetime",
                                                             "lifetime_upper", "p_hat"}));
  for (const auto& row : chk.rows) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    tab.rows.push_back(as_row(row.x, {row.in_compact ? 1.0 : 0.0, row.boundary.mean, row.boundary.std_error,
                                      row.lifetime ? row.lifetime->lifetime.mean : nan,
                                      row.lifetime ? row.lifetime->upper_estimate : nan,
                                      row.lifetime ? row.lifetime->p_hat : nan}));
  }
  auto& sum = rep.table("bound", {"n", "m", "t", "lhs", "sup_compact", "sup_lifetime", "rhs", "combined_std_error",
                                  "coarse_lhs", "coarse_rhs"});
  sum.rows.push_back({static_cast<double>(chk.n), static_cast<double>(chk.m), chk.t, chk.lhs, chk.sup_compact,
                      chk.sup_lifetime, chk.rhs, chk.combined_std_error, chk.coarse_lhs, chk.coarse_rhs});
  rep.note("loose", chk.loose);
  rep.check("||T_{n,t}|| <= rhs + 3 stderr", chk.pass,
            "lhs " + fmt(chk.lhs) + ", rhs " + fmt(chk.rhs) + ", stderr " + fmt(chk.combined_std_error));

  if (c.boolean("check_subprocess")) {
    const PointFunction one = [](std::span<const double>) { return 1.0; };
    const auto sc = subprocess_commute_check(spec, life, exh.level(static_cast<std::size_t>(ln)), t, probes, one, o.h,
                                             o.n_paths, compactlab::derive_seed(seed, 977), o.exit);
    auto& st = rep.table("subprocess", coord_columns(spec.dim(), {"T1_subprocess", "exp_minus_t_T1"}));
    for (std::size_t j = 0; j < probes.size(); ++j)
      st.rows.push_back(as_row(probes[j], {sc.subprocess[j], sc.scaled[j]}));
    rep.check("T^(1)_{n,t} f = e^{-t} T_{n,t} f to relative 1e-12", sc.max_rel_deviation <= 1e-12,
              "max relative deviation " + fmt(sc.max_rel_deviation));
  }
  return rep;
}

inline Grid grid_from(const Config& c) {
  const double a = c.real("grid.x_min"), b = c.real("grid.x_max"), d = positive(c, "grid.delta");
  c.require(a < b, "grid.x_max", "grid.x_max > grid.x_min required");
  return scoped("grid", [&] { return Grid::with_spacing(a, b, d); });
}

inline Report run_spectra(const Config& c, const Execution&) {
  const double alpha = c.real("spectral.alpha");
  c.require(alpha > 0.0 && alpha <= 2.0, "spectral.alpha", "alpha ∈ (0,2] required, got " + fmt(alpha));
  const Grid grid = grid_from(c);
  const KillingPotential v = potential_from(c);
  const double t = positive(c, "t");
  auto t_grid = c.reals("spectral.t_grid");
  c.require(!t_grid.empty(), "spectral.t_grid", "at least one time required");
  auto radii = c.reals("spectral.levels");
  c.require(!radii.empty(), "spectral.levels", "at least one level required");

  const GeneratorMatrix plain = base_generator(grid, alpha);
  const GeneratorMatrix gen = v.is_none() ? plain : killing(plain, v);
  const Domain line = Domain::interval(grid.x_min, grid.x_max);
  const Exhaustion exh = scoped("spectral.levels", [&] { return Exhaustion(line, radii); });

  Report rep("spectra",
             "Compactness of the semigroup: ||p_t - p_t^n||_{inf->inf} -> 0 along the exhaustion, and the L^p "
             "spectral bounds do not depend on p",
             c);

  const auto cd = compactness_diagnostic(gen, exh, t);
  auto& ct = rep.table("compactness", {"radius", "size", "norm"});
  for (std::size_t k = 0; k < cd.norms.size(); ++k)
    ct.rows.push_back({cd.radii[k], static_cast<double>(cd.sizes[k]), cd.norms[k]});
  rep.note("compactness_route", cd.route);

  // The top level may cover the whole grid; the largest proper level is reported too.
  std::size_t proper = cd.norms.size();
  for (std::size_t k = cd.norms.size(); k-- > 0;)
    if (cd.sizes[k] < gen.size()) {
      proper = k;
      break;
    }
  rep.check("norm at the top exhaustion level < 0.01", cd.norms.back() < 0.01, fmt(cd.norms.back()));
  if (proper < cd.norms.size() && proper + 1 != cd.norms.size())
    rep.check("norm at the largest proper level < 0.01", cd.norms[proper] < 0.01,
              "R = " + fmt(cd.radii[proper]) + ": " + fmt(cd.norms[proper]));

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(gen.size()));
  const Eigen::VectorXd p1 = semigroup_apply(gen, t, ones);
  rep.check("sub-Markov: P_t 1 <= 1", p1.maxCoeff() <= 1.0 + 1e-10 && p1.minCoeff() >= -1e-12,
            "max " + fmt(p1.maxCoeff()) + ", min " + fmt(p1.minCoeff()));

  if (c.boolean("spectral.control")) {
    const auto cc = compactness_diagnostic(plain, exh, t);
    auto& cn = rep.table("control", {"radius", "size", "norm"});
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < cc.norms.size(); ++k) {
      cn.rows.push_back({cc.radii[k], static_cast<double>(cc.sizes[k]), cc.norms[k]});
      if (cc.sizes[k] < plain.size()) lowest = std::min(lowest, cc.norms[k]);
    }
    rep.check("conservative control stays >= 0.9 on proper levels", lowest >= 0.9, "min " + fmt(lowest));
  }

  const auto lp = lp_spectral_bound_compare(gen, t_grid);
  auto& lt = rep.table("lp_rates", {"t", "norm_1", "norm_2", "norm_inf", "rate_1", "rate_2", "rate_inf"});
  for (std::size_t i = 0; i < lp.t_grid.size(); ++i)
    lt.rows.push_back({lp.t_grid[i], lp.norms.at("1")[i], lp.norms.at("2")[i], lp.norms.at("inf")[i],
                       lp.rates.at("1")[i], lp.rates.at("2")[i], lp.rates.at("inf")[i]});
  rep.note("lambda_1", lp.lambda_1);
  rep.note("lp_route", lp.route);
  const double r1 = lp.rates.at("1").back(), r2 = lp.rates.at("2").back(), ri = lp.rates.at("inf").back();
  const double gap = std::abs(r1 - r2) / r2;
  rep.check("|rate_1 - rate_2| / rate_2 < 0.05 at the largest t", gap < 0.05, fmt(gap));
  if (!gen.weighted()) rep.check("rate_1 = rate_inf exactly (symmetric generator)", r1 == ri, fmt(r1) + " vs " + fmt(ri));

  const auto sr = spectral_report(gen, v.is_none() ? "dirichlet" : "killed", t_grid);
  rep.note("spectral", to_json(sr));
  rep.check("heat trace strictly decreasing in t", sr.diagnostics.at("trace_strictly_decreasing"), "");
  return rep;
}

inline Report run_trace_study(const Config& c, const Execution&) {
  auto ns = c.reals("trace.n_list");
  c.require(ns.size() >= 2, "trace.n_list", "at least two interval counts required");
  for (double n : ns) c.require(n >= 1 && n == std::floor(n), "trace.n_list", "interval counts must be positive integers");
  const double t = positive(c, "trace.t"), delta = positive(c, "grid.delta");

  Report rep("trace-study",
             "Shrinking balls: the mean exit time bound r_n^2 decreases while the heat trace of the Dirichlet "
             "semigroup diverges, so a compact semigroup need not be trace class",
             c);
  auto& tab = rep.table("trace", {"N", "nodes", "trace", "lambda_0", "q_outer"});
  std::vector<double> traces, qs;
  for (double nd : ns) {
    const int n = static_cast<int>(nd);
    const Domain dom = shrinking_ball_domain(1, n);
    const Grid grid = Grid::with_spacing(-1.0, n + 2.0, delta);
    const auto gen = dirichlet_laplacian(grid, dom);
    const double tr = heat_trace(gen, t);
    const double r = shrinking_ball_radius(n);
    traces.push_back(tr);
    qs.push_back(r * r);
    tab.rows.push_back({nd, static_cast<double>(gen.size()), tr, gen.eigenvalues()[0], r * r});
  }
  const std::size_t k = traces.size() - 1;
  const double growth = traces[k] / traces[k - 1] - 1.0;
  rep.check("heat trace grows >= 20% at the largest doubling", growth >= 0.2, fmt(100.0 * growth) + "%");
  const double ratio = qs.back() / qs.front();
  rep.check("r_N^2 falls below 0.2 of its initial value", ratio < 0.2, "ratio " + fmt(ratio));
  return rep;
}

inline Report run_beta_transition(const Config& c, const Execution&) {
  const double alpha = c.real("spectral.alpha");
  c.require(alpha > 0.0 && alpha <= 2.0, "spectral.alpha", "alpha ∈ (0,2] required, got " + fmt(alpha));
  auto betas = c.reals("beta.list");
  auto radii = c.reals("beta.radii");
  c.require(!betas.empty(), "beta.list", "at least one beta required");
  c.require(radii.size() >= 2, "beta.radii", "at least two radii required");
  c.require(std::is_sorted(radii.begin(), radii.end()), "beta.radii", "radii must be increasing");
  const double delta = positive(c, "grid.delta");

  Report rep("beta-transition",
             "Time change by W = 1 + |x|^beta: the truncated bottom eigenvalue stabilizes in R iff beta > alpha "
             "(discrete spectrum), and drifts to 0 otherwise",
             c);
  auto& tab = rep.table("eigenvalues", {"beta", "R", "nodes", "lambda_0", "lambda_1"});
  for (double beta : betas) {
    const auto w = scoped("beta.list", [&] { return TimeChangeWeight::extremal(beta); });
    std::vector<double> l0, l1;
    for (double R : radii) {
      const Grid grid = Grid::with_spacing(-R, R, delta);
      const auto gen = weighted_generator(dirichlet_laplacian(grid), w, alpha);
      const auto& ev = gen.eigenvalues();
      l0.push_back(ev[0]);
      l1.push_back(ev[1]);
      tab.rows.push_back({beta, R, static_cast<double>(gen.size()), ev[0], ev[1]});
    }
    const std::size_t k = l0.size() - 1;
    const double change = (l0[k] - l0[k - 1]) / l0[k - 1];
    const double change1 = (l1[k] - l1[k - 1]) / l1[k - 1];
    rep.note("lambda_1_relative_change_beta_" + fmt(beta), change1);
    if (beta > alpha)
      rep.check("beta = " + fmt(beta) + " > alpha: bottom eigenvalue changes < 1% over the last doubling",
                std::abs(change) < 0.01, fmt(100.0 * change) + "%");
    else
      rep.check("beta = " + fmt(beta) + " <= alpha: bottom eigenvalue decreases > 20% over the last doubling",
                change < -0.2, fmt(100.0 * change) + "%");
  }
  return rep;
}

inline Report run_theorem4_scan(const Config& c, const Execution& exec) {
  const ProcessSpec spec = process_from(c);
  const long long n_max = c.integer("domain.n_max");
  c.require(n_max >= 2, "domain.n_max", "truncation N ≥ 2 required");
  auto ns = c.reals("scan.n");
  c.require(!ns.empty(), "scan.n", "at least one probe index required");
  for (double n : ns)
    c.require(n >= 1 && n <= static_cast<double>(n_max) && n == std::floor(n), "scan.n",
              "probe indices must be integers in [1, domain.n_max]");
  const double h = positive(c, "h"), t_max = positive(c, "t_max");
  const std::size_t n_paths = paths(c);
  const std::uint64_t seed = c.uint("seed");
  const auto opts = exit_options(c, exec);

  const Domain dom = shrinking_ball_domain(spec.dim(), static_cast<int>(n_max));
  auto probe = [&](double n) {
    Point x(static_cast<std::size_t>(spec.dim()), 0.0);
    x[0] = n;
    return x;
  };

  Report rep("theorem4-scan",
             "Equivalent conditions for compactness: E_x[tau_D] -> 0 and R_1 1(x) = E_x[1 - e^{-tau_D}] -> 0 as "
             "|x| -> infinity, on the union of shrinking balls B(e_n, r_n)",
             c);
  auto& tab = rep.table("scan", {"n", "x_1", "mean_exit", "mean_exit_std_error", "r1", "r1_std_error", "N"});
  std::vector<double> taus, r1s;
  for (std::size_t j = 0; j < ns.size(); ++j) {
    const Point x = probe(ns[j]);
    const auto s = estimate_exit_functionals(spec, x, dom, t_max, h, n_paths, compactlab::derive_seed(seed, j), opts);
    taus.push_back(s.mean_exit.mean);
    r1s.push_back(s.r1.mean);
    tab.rows.push_back({ns[j], x[0], s.mean_exit.mean, s.mean_exit.std_error, s.r1.mean, s.r1.std_error,
                        static_cast<double>(n_max)});
  }
  rep.check("E[tau] strictly decreasing across the scan", strictly_decreasing(taus), "");
  rep.check("R_1 strictly decreasing across the scan", strictly_decreasing(r1s), "");
  rep.check("final E[tau] below half the first", taus.back() < 0.5 * taus.front(),
            fmt(taus.back()) + " vs " + fmt(taus.front()));
  rep.check("final R_1 below half the first", r1s.back() < 0.5 * r1s.front(),
            fmt(r1s.back()) + " vs " + fmt(r1s.front()));

  // Stability in N: the largest probe with n <= N/2, rerun on the union truncated at 2N.
  std::optional<std::size_t> sj;
  for (std::size_t j = 0; j < ns.size(); ++j)
    if (2.0 * ns[j] <= static_cast<double>(n_max)) sj = j;
  if (sj) {
    const Domain dom2 = shrinking_ball_domain(spec.dim(), static_cast<int>(2 * n_max));
    const Point x = probe(ns[*sj]);
    const auto s2 = estimate_exit_functionals(spec, x, dom2, t_max, h, n_paths, compactlab::derive_seed(seed, *sj), opts);
    auto& st = rep.table("n_stability", {"n", "N", "mean_exit", "mean_exit_std_error", "r1", "r1_std_error"});
    st.rows.push_back({ns[*sj], static_cast<double>(n_max), taus[*sj], tab.rows[*sj][3], r1s[*sj], tab.rows[*sj][5]});
    st.rows.push_back({ns[*sj], static_cast<double>(2 * n_max), s2.mean_exit.mean, s2.mean_exit.std_error, s2.r1.mean,
                       s2.r1.std_error});
    const double se = std::hypot(tab.rows[*sj][3], s2.mean_exit.std_error);
    const double dev = std::abs(s2.mean_exit.mean - taus[*sj]);
    rep.check("E[tau] at n = " + fmt(ns[*sj]) + " stable under N -> 2N (within 3 stderr)", dev <= 3.0 * se,
              "|dev| " + fmt(dev) + ", stderr " + fmt(se));
  }
  return rep;
}

inline Report run_resolvent_bounds(const Config& c, const Execution&) {
  const ProcessSpec spec = process_from(c);
  require_transient(c, spec);
  c.require(spec.dim() <= 3, "process.dim", "the J quadrature is implemented for d ∈ {1,2,3}");
  const TimeChangeWeight w = weight_from(c);
  auto radii = c.reals("analytics.radii");
  c.require(!radii.empty(), "analytics.radii", "at least one radius required");
  const int d = spec.dim();
  const double a = spec.alpha();
  std::vector<Point> probes;
  for (double r : radii) {
    Point x(static_cast<std::size_t>(d), 0.0);
    x[0] = r;
    probes.push_back(x);
  }

  Report rep("resolvent-bounds",
             "Time-changed Green potential: R_0^mu 1(x) = c(d,alpha) int |x-y|^{alpha-d} W(y)^{-1} dy <= "
             "c(d,alpha) J_{d-alpha,beta}(x), finite and vanishing at infinity when beta > alpha",
             c);

  const double ref = j_integral(JParams{0.5, 2.0, 1}, std::vector<double>{0.0});
  const double want = std::numbers::pi * std::numbers::sqrt2;
  rep.check("J_{1/2,2}(0) = pi sqrt 2 in d = 1 (relative 1e-5)", std::abs(ref - want) <= 1e-5 * want,
            fmt(ref) + " vs " + fmt(want));

  const auto chk = r0_mu_bound_check(w, d, a, probes);
  auto& tab = rep.table("r0_mu", {"radius", "quadrature", "bound", "tolerance"});
  for (std::size_t i = 0; i < chk.rows.size(); ++i)
    tab.rows.push_back({radii[i], chk.rows[i].quadrature, chk.rows[i].bound, chk.rows[i].tolerance});
  rep.note("green_constant", green_constant(d, a));
  rep.note("green_constant_process", green_constant_for(spec));
  if (!chk.warning.empty()) rep.note("warning", chk.warning);
  rep.check("R_0^mu 1 <= c(d,alpha) J on every probe", chk.all_pass, "");
  if (w.is_extremal() && chk.decay_checked) {
    double worst = 0.0;
    for (const auto& r : chk.rows) worst = std::max(worst, std::abs(r.quadrature - r.bound) - r.tolerance);
    rep.check("columns coincide within quadrature tolerance (extremal W)", worst <= 0.0, "worst excess " + fmt(worst));
  }
  if (chk.decay_checked)
    rep.check("both columns strictly decreasing in |x|", chk.quadrature_decreasing && chk.bound_decreasing, "");

  if (c.has("analytics.train") && c.has("analytics.holdout")) {
    const JParams jp{c.real("analytics.gamma1"), c.real("analytics.gamma2"), d};
    scoped("analytics", [&] {
      jp.validate();
      return 0;
    });
    const auto train = c.reals("analytics.train"), hold = c.reals("analytics.holdout");
    const auto fit = scoped("analytics", [&] { return fit_j_bound(jp, train, hold); });
    auto& ft = rep.table("j_bound_fit", {"radius", "ratio", "held_out"});
    for (auto [r, q] : fit.train) ft.rows.push_back({r, q, 0.0});
    for (auto [r, q] : fit.holdout) ft.rows.push_back({r, q, 1.0});
    rep.note("j_bound_constant", fit.constant);
    rep.check("J <= c * shape on held-out radii", fit.holdout_pass,
              "max held-out ratio " + fmt(fit.max_holdout_ratio) + ", c " + fmt(fit.constant));
  }
  return rep;
}

}  // namespace detail

inline const std::vector<ExperimentDef>& experiments() {
  static const std::vector<ExperimentDef> list = {
      {"sample-paths", R"(process.alpha = 1.5
process.dim = 1
x0 = 0
h = 0.01
t_max = 1
n_paths = 3
seed = 1
time_change.enabled = false
weight.beta = 2
weight.factor = 1
output.format = csv
)",
       &detail::run_sample_paths},
      {"exit-time", R"(process.alpha = 2
process.dim = 2
domain.shape = ball
domain.center = 0, 0
domain.radius = 1
x0 = 0, 0
h = 1e-4
t_max = 20
n_paths = 100000
bridge = true
seed = 7
output.format = csv
)",
       &detail::run_exit_time},
      {"tightness-scan", R"(process.alpha = 2
process.dim = 1
potential.kind = power
potential.offset = 0
potential.coefficient = 1
potential.exponent = 2
probes = 0; 1; 2; 4; 8
h = 1e-3
t_max = 15
n_paths = 4000
seed = 3
output.format = csv
)",
       &detail::run_tightness_scan},
      {"dynkin-check", R"(process.alpha = 2
process.dim = 1
domain.shape = interval
domain.a = -1
domain.b = 1
x0 = 0
f.kind = gaussian
f.a = 1
f.center = 0
t = 0.5
h = 1e-3
n_paths = 100000
bridge = true
seed = 11
output.format = csv
)",
       &detail::run_dynkin_check},
      {"t-norm-check", R"(process.alpha = 1
process.dim = 1
domain.shape = full
potential.kind = power
potential.offset = 1
potential.coefficient = 1
potential.exponent = 2
exhaustion.scale = 1
exhaustion.levels = 8
level.n = 6
level.m = 3
t = 1
probes = 0:10:0.5
h = 1e-3
n_paths = 4000
lifetime.paths = 2000
lifetime.t_max = 50
check_subprocess = true
seed = 5
output.format = csv
)",
       &detail::run_t_norm_check},
      {"spectra", R"(spectral.alpha = 2
grid.x_min = -20
grid.x_max = 20
grid.delta = 0.01
potential.kind = power
potential.offset = 1
potential.coefficient = 1
potential.exponent = 2
t = 1
spectral.t_grid = 1, 2, 4, 8
spectral.levels = 2:20:2
spectral.control = true
seed = 0
output.format = json
)",
       &detail::run_spectra},
      {"trace-study", R"(trace.n_list = 8, 16, 32, 64
trace.t = 0.01
grid.delta = 0.01
seed = 0
output.format = csv
)",
       &detail::run_trace_study},
      {"beta-transition", R"(spectral.alpha = 1
beta.list = 2, 0.5
beta.radii = 20, 40, 80
grid.delta = 0.1
seed = 0
output.format = csv
)",
       &detail::run_beta_transition},
      {"theorem4-scan", R"(process.alpha = 2
process.dim = 2
domain.n_max = 40
scan.n = 5, 10, 20, 40
h = 1e-3
t_max = 20
n_paths = 20000
bridge = true
seed = 13
output.format = csv
)",
       &detail::run_theorem4_scan},
      {"resolvent-bounds", R"(process.alpha = 0.5
process.dim = 1
weight.beta = 1
weight.factor = 1
analytics.radii = 1, 2, 4, 8, 16
analytics.gamma1 = 0.5
analytics.gamma2 = 3
analytics.train = 1, 2, 4, 8
analytics.holdout = 16, 32, 64
seed = 0
output.format = csv
)",
       &detail::run_resolvent_bounds},
  };
  return list;
}

inline const ExperimentDef* find_experiment(const std::string& name) {
  for (const auto& e : experiments())
    if (e.name == name) return &e;
  return nullptr;
}

inline std::string experiment_names() {
  std::string s;
  for (const auto& e : experiments()) s += (s.empty() ? "" : ", ") + e.name;
  return s;
}

/// Overlays the experiment's embedded defaults.
inline Config resolve_config(Config config) {
  const std::string name = config.string("experiment");
  const ExperimentDef* def = find_experiment(name);
  if (!def) throw ConfigError("experiment: unknown experiment '" + name + "' (expected one of " + experiment_names() + ")");
  config.overlay_defaults(Config::parse_string(def->defaults, name + " defaults"));
  return config;
}

/// Runs a resolved config.
inline Report run_experiment(const Config& resolved, const Execution& exec) {
  const ExperimentDef* def = find_experiment(resolved.string("experiment"));
  if (!def) throw ConfigError("experiment: unknown experiment '" + resolved.string("experiment") + "'");
  return def->run(resolved, exec);
}

}  // namespace compactlab::cli
