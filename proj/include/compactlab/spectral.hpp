#pragma once

// Matrix realizations of (fractional, weighted, killed) generators on a
// uniform 1D grid, their semigroups, heat traces and norm diagnostics.
//
// Conventions:
//   * The grid (x_min, x_max) with n interior nodes x_i = x_min + (i+1) delta,
//     delta = (x_max - x_min)/(n+1). Dirichlet conditions hold at x_min, x_max
//     and at every deleted node.
//   * dirichlet_laplacian gives L = (1/2) D2 / delta^2, matching ProcessSpec's
//     alpha = 2 convention.
//   * fractional_power(L, alpha) is the SPECTRAL power -(-Delta)^{alpha/2}:
//     each eigenvalue mu of -(1/2)D2 is mapped to (2 mu)^{alpha/2}. It is not
//     the restricted (singular integral) fractional Laplacian.
//   * A weight W gives L^W = -W (-Delta)^{alpha/2}, self-adjoint for the
//     measure w_i = 1/W(x_i). Internally everything is kept as the symmetric
//     positive matrix B = W^{1/2}(-L)W^{-1/2}, so P_t = W^{1/2} e^{-tB} W^{-1/2}.
//   * Killing by V adds diag(V) to B.
//
// A generator remembers the steps that built it, so the part process on a
// sub-mask (an exhaustion level) is rebuilt from scratch with the same
// recipe rather than cut out of the parent matrix.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "compactlab/errors.hpp"
#include "compactlab/functionals.hpp"
#include "compactlab/geometry.hpp"
#include "compactlab/linalg.hpp"

namespace compactlab {

struct Grid {
  double x_min = -1.0;
  double x_max = 1.0;
  std::size_t n = 1;  ///< interior nodes

  static Grid with_spacing(double x_min, double x_max, double delta) {
    detail::require(x_max > x_min && delta > 0.0, "grid needs x_max > x_min and delta > 0");
    const auto cells = static_cast<long>(std::llround((x_max - x_min) / delta));
    detail::require(cells >= 2, "grid spacing too coarse for the interval");
    return {x_min, x_max, static_cast<std::size_t>(cells - 1)};
  }

  double spacing() const noexcept { return (x_max - x_min) / static_cast<double>(n + 1); }
  double node(std::size_t i) const noexcept { return x_min + static_cast<double>(i + 1) * spacing(); }
};

/// Steps applied on top of the Dirichlet half-Laplacian.
struct GeneratorRecipe {
  std::optional<double> power;                          ///< alpha of the spectral power
  std::function<double(double)> weight;                 ///< W(x); empty = unweighted
  std::vector<std::function<double(double)>> killing;   ///< V(x) terms, summed
};

class GeneratorMatrix {
 public:
  enum class Form { Tridiagonal, Dense, Spectral };

  const Grid& grid() const noexcept { return grid_; }
  double spacing() const noexcept { return grid_.spacing(); }
  std::size_t size() const noexcept { return index_.size(); }
  const std::vector<std::size_t>& grid_indices() const noexcept { return index_; }
  const std::vector<double>& nodes() const noexcept { return nodes_; }
  const GeneratorRecipe& recipe() const noexcept { return recipe_; }
  Form form() const noexcept { return form_; }

  bool weighted() const noexcept { return !weight_.empty(); }
  /// W(x_i); empty when unweighted.
  const std::vector<double>& weight() const noexcept { return weight_; }
  /// Measure weights w_i = 1/W(x_i) (all ones when unweighted).
  std::vector<double> measure() const {
    std::vector<double> m(size(), 1.0);
    for (std::size_t i = 0; i < weight_.size(); ++i) m[i] = 1.0 / weight_[i];
    return m;
  }
  bool killed() const noexcept { return !recipe_.killing.empty(); }
  /// Exponent of the spectral power (2 when the plain half-Laplacian is used).
  double alpha() const noexcept { return recipe_.power.value_or(2.0); }
  /// Generator has nonnegative off-diagonal entries (exact positivity).
  bool is_metzler() const noexcept { return form_ == Form::Tridiagonal; }

  /// Symmetrized nonnegative operator B = W^{1/2}(-L)W^{-1/2}.
  Eigen::MatrixXd symmetrized() const {
    const auto n = static_cast<Eigen::Index>(size());
    if (form_ == Form::Tridiagonal) {
      Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
      for (Eigen::Index i = 0; i < n; ++i) b(i, i) = diag_[i];
      for (Eigen::Index i = 0; i + 1 < n; ++i) b(i, i + 1) = b(i + 1, i) = off_[i];
      return b;
    }
    if (form_ == Form::Dense) return dense_;
    const auto& e = eigen_full();
    return e.vectors * e.values.asDiagonal() * e.vectors.transpose();
  }

  /// The generator L itself (L <= 0 in the weighted pairing).
  Eigen::MatrixXd matrix() const {
    Eigen::MatrixXd l = -symmetrized();
    if (weighted()) {
      for (Eigen::Index i = 0; i < l.rows(); ++i)
        for (Eigen::Index j = 0; j < l.cols(); ++j) l(i, j) *= std::sqrt(weight_[i] / weight_[j]);
    }
    return l;
  }

  /// Eigenvalues of -L, ascending.
  const Eigen::VectorXd& eigenvalues() const {
    if (form_ == Form::Spectral) return cache_->full.values;
    std::call_once(cache_->values_once, [&] {
      cache_->values = form_ == Form::Tridiagonal ? linalg::tridiagonal_eigen(diag_, off_, false)
                                                  : linalg::dense_eigen(dense_, false);
    });
    return cache_->values.values;
  }

  /// Orthonormal eigenvectors of B (columns, ground state positive).
  const linalg::SymmetricEigen& eigensystem() const { return eigen_full(); }

  /// k-th eigenfunction normalized in sum_i f_i^2 w_i delta = 1.
  Eigen::VectorXd weighted_eigenvector(std::size_t k) const {
    const auto& e = eigen_full();
    Eigen::VectorXd v = e.vectors.col(static_cast<Eigen::Index>(k)) / std::sqrt(spacing());
    for (std::size_t i = 0; i < weight_.size(); ++i) v[static_cast<Eigen::Index>(i)] *= std::sqrt(weight_[i]);
    return v;
  }

  /// Part generator on the nodes where `keep` holds, rebuilt with the same recipe.
  GeneratorMatrix restricted(const std::function<bool(double)>& keep) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < index_.size(); ++i)
      if (keep(nodes_[i])) idx.push_back(index_[i]);
    return build(grid_, std::move(idx), recipe_);
  }

  /// Part generator on the given positions (ascending) of this node list.
  GeneratorMatrix restricted_positions(const std::vector<std::size_t>& positions) const {
    std::vector<std::size_t> idx;
    for (std::size_t p : positions) idx.push_back(index_.at(p));
    return build(grid_, std::move(idx), recipe_);
  }

  /// Builds the generator on grid nodes `index` (ascending) by `recipe`.
  static GeneratorMatrix build(const Grid& grid, std::vector<std::size_t> index, GeneratorRecipe recipe) {
    if (index.size() < 3) throw ArgumentError("generator needs at least 3 masked grid points");
    GeneratorMatrix g;
    g.grid_ = grid;
    g.index_ = std::move(index);
    g.recipe_ = std::move(recipe);
    g.cache_ = std::make_shared<Cache>();
    const std::size_t n = g.index_.size();
    for (std::size_t i : g.index_) g.nodes_.push_back(grid.node(i));

    const double delta = grid.spacing();
    const double inv = 1.0 / (delta * delta);
    g.diag_.assign(n, inv);
    g.off_.assign(n - 1, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i)
      if (g.index_[i + 1] == g.index_[i] + 1) g.off_[i] = -0.5 * inv;
    g.form_ = Form::Tridiagonal;

    if (g.recipe_.power) {
      const double alpha = *g.recipe_.power;
      detail::require(alpha > 0.0 && alpha <= 2.0, "alpha ∈ (0,2] required");
      if (alpha == 2.0) {
        for (double& v : g.diag_) v *= 2.0;
        for (double& v : g.off_) v *= 2.0;
      } else {
        auto e = linalg::tridiagonal_eigen(g.diag_, g.off_, true);
        for (Eigen::Index k = 0; k < e.values.size(); ++k) e.values[k] = std::pow(2.0 * std::max(e.values[k], 0.0), 0.5 * alpha);
        fix_signs(e.vectors);
        g.cache_->full = std::move(e);
        std::call_once(g.cache_->full_once, [] {});
        g.form_ = Form::Spectral;
        g.diag_.clear();
        g.off_.clear();
      }
    }

    if (g.recipe_.weight) {
      g.weight_.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double w = g.recipe_.weight(g.nodes_[i]);
        if (!(w >= 1.0) || !std::isfinite(w)) throw ArgumentError("time-change weight must satisfy 1 ≤ W(x) < ∞ on the grid");
        g.weight_[i] = w;
      }
      if (g.form_ == Form::Tridiagonal) {
        for (std::size_t i = 0; i < n; ++i) g.diag_[i] *= g.weight_[i];
        for (std::size_t i = 0; i + 1 < n; ++i) g.off_[i] *= std::sqrt(g.weight_[i] * g.weight_[i + 1]);
      } else {
        g.to_dense();
        Eigen::VectorXd s(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) s[static_cast<Eigen::Index>(i)] = std::sqrt(g.weight_[i]);
        g.dense_ = s.asDiagonal() * g.dense_ * s.asDiagonal();
      }
    }

    for (const auto& v : g.recipe_.killing) {
      if (g.form_ == Form::Spectral) g.to_dense();
      for (std::size_t i = 0; i < n; ++i) {
        const double vi = v(g.nodes_[i]);
        if (!(vi >= 0.0)) throw ContractViolation("killing potential is negative on the grid");
        if (g.form_ == Form::Tridiagonal)
          g.diag_[i] += vi;
        else
          g.dense_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += vi;
      }
    }
    return g;
  }

 private:
  struct Cache {
    std::once_flag values_once, full_once;
    linalg::SymmetricEigen values, full;
  };

  GeneratorMatrix() = default;

  static void fix_signs(Eigen::MatrixXd& v) {
    for (Eigen::Index k = 0; k < v.cols(); ++k)
      if (v.col(k).sum() < 0.0) v.col(k) = -v.col(k);
  }

  void to_dense() {
    dense_ = symmetrized();
    form_ = Form::Dense;
    diag_.clear();
    off_.clear();
    cache_ = std::make_shared<Cache>();
  }

  const linalg::SymmetricEigen& eigen_full() const {
    std::call_once(cache_->full_once, [&] {
      cache_->full = form_ == Form::Tridiagonal ? linalg::tridiagonal_eigen(diag_, off_, true)
                                                : linalg::dense_eigen(dense_, true);
      fix_signs(cache_->full.vectors);
    });
    return cache_->full;
  }

  Grid grid_;
  std::vector<std::size_t> index_;
  std::vector<double> nodes_;
  GeneratorRecipe recipe_;
  Form form_ = Form::Tridiagonal;
  std::vector<double> diag_, off_;
  Eigen::MatrixXd dense_;
  std::vector<double> weight_;
  std::shared_ptr<Cache> cache_;
};

/// L = (1/2) D2 / delta^2 on the grid nodes where `mask` holds.
inline GeneratorMatrix dirichlet_laplacian(const Grid& grid, const std::function<bool(double)>& mask) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < grid.n; ++i)
    if (mask(grid.node(i))) idx.push_back(i);
  return GeneratorMatrix::build(grid, std::move(idx), {});
}

inline GeneratorMatrix dirichlet_laplacian(const Grid& grid, const Domain& domain) {
  detail::require(domain.dim() == 1, "grid generators need a 1-dimensional domain");
  return dirichlet_laplacian(grid, [&](double x) { return domain.contains(std::span<const double>(&x, 1)); });
}

inline GeneratorMatrix dirichlet_laplacian(const Grid& grid) {
  return dirichlet_laplacian(grid, [](double) { return true; });
}

/// -(-Delta)^{alpha/2} by the spectral calculus; alpha = 2 returns the full
/// (not half) Laplacian.
inline GeneratorMatrix fractional_power(const GeneratorMatrix& gen, double alpha) {
  detail::require(alpha > 0.0 && alpha <= 2.0, "alpha ∈ (0,2] required");
  const auto& r = gen.recipe();
  detail::require(!r.power && !r.weight && r.killing.empty(),
                  "fractional_power applies to a plain Dirichlet Laplacian");
  GeneratorRecipe next = r;
  next.power = alpha;
  return GeneratorMatrix::build(gen.grid(), gen.grid_indices(), std::move(next));
}

/// L^W = -W (-Delta)^{alpha/2}, self-adjoint for the measure W^{-1} dx.
inline GeneratorMatrix weighted_generator(const GeneratorMatrix& gen, std::function<double(double)> weight,
                                          double alpha) {
  detail::require(alpha > 0.0 && alpha <= 2.0, "alpha ∈ (0,2] required");
  detail::require(static_cast<bool>(weight), "weighted generator needs a weight");
  const auto& r = gen.recipe();
  detail::require(!r.power && !r.weight && r.killing.empty(),
                  "weighted_generator applies to a plain Dirichlet Laplacian");
  GeneratorRecipe next;
  next.power = alpha;
  next.weight = std::move(weight);
  return GeneratorMatrix::build(gen.grid(), gen.grid_indices(), std::move(next));
}

inline GeneratorMatrix weighted_generator(const GeneratorMatrix& gen, const TimeChangeWeight& w, double alpha) {
  return weighted_generator(gen, [w](double x) { return w.at_radius(std::abs(x)); }, alpha);
}

/// L - V.
inline GeneratorMatrix killing(const GeneratorMatrix& gen, std::function<double(double)> v) {
  detail::require(static_cast<bool>(v), "killing needs a potential");
  GeneratorRecipe next = gen.recipe();
  next.killing.push_back(std::move(v));
  return GeneratorMatrix::build(gen.grid(), gen.grid_indices(), std::move(next));
}

inline GeneratorMatrix killing(const GeneratorMatrix& gen, const KillingPotential& v) {
  return killing(gen, [v](double x) { return v(std::span<const double>(&x, 1)); });
}

namespace detail {

/// S e^{-t Lambda} S^T u, shared by the forward and transposed actions so the
/// unweighted cases agree bit for bit.
inline Eigen::VectorXd spectral_action(const linalg::SymmetricEigen& e, double t, const Eigen::VectorXd& u) {
  Eigen::VectorXd c = e.vectors.transpose() * u;
  for (Eigen::Index k = 0; k < c.size(); ++k) c[k] *= std::exp(-t * e.values[k]);
  return e.vectors * c;
}

}  // namespace detail

/// P_t v.
inline Eigen::VectorXd semigroup_apply(const GeneratorMatrix& gen, double t, const Eigen::VectorXd& v) {
  detail::require(t >= 0.0, "t ≥ 0 required");
  detail::require(static_cast<std::size_t>(v.size()) == gen.size(), "vector size mismatch");
  if (t == 0.0) return v;
  Eigen::VectorXd u = v;
  const auto& w = gen.weight();
  for (std::size_t i = 0; i < w.size(); ++i) u[static_cast<Eigen::Index>(i)] /= std::sqrt(w[i]);
  Eigen::VectorXd out = detail::spectral_action(gen.eigensystem(), t, u);
  for (std::size_t i = 0; i < w.size(); ++i) out[static_cast<Eigen::Index>(i)] *= std::sqrt(w[i]);
  return out;
}

/// P_t^T v (plain matrix transpose).
inline Eigen::VectorXd semigroup_apply_transpose(const GeneratorMatrix& gen, double t, const Eigen::VectorXd& v) {
  detail::require(t >= 0.0, "t ≥ 0 required");
  detail::require(static_cast<std::size_t>(v.size()) == gen.size(), "vector size mismatch");
  if (t == 0.0) return v;
  Eigen::VectorXd u = v;
  const auto& w = gen.weight();
  for (std::size_t i = 0; i < w.size(); ++i) u[static_cast<Eigen::Index>(i)] *= std::sqrt(w[i]);
  Eigen::VectorXd out = detail::spectral_action(gen.eigensystem(), t, u);
  for (std::size_t i = 0; i < w.size(); ++i) out[static_cast<Eigen::Index>(i)] /= std::sqrt(w[i]);
  return out;
}

inline constexpr double kRoundoffFloor = 1e-12;

/// Dense P_t = e^{tL}; P_0 = I exactly, round-off negatives above -1e-12 set to 0.
inline Eigen::MatrixXd semigroup_matrix(const GeneratorMatrix& gen, double t) {
  detail::require(t >= 0.0, "t ≥ 0 required");
  const auto n = static_cast<Eigen::Index>(gen.size());
  if (t == 0.0) return Eigen::MatrixXd::Identity(n, n);
  const auto& e = gen.eigensystem();
  Eigen::MatrixXd m = e.vectors;
  for (Eigen::Index k = 0; k < n; ++k) m.col(k) *= std::exp(-0.5 * t * e.values[k]);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  p.selfadjointView<Eigen::Lower>().rankUpdate(m);
  p.triangularView<Eigen::StrictlyUpper>() = p.transpose();
  if (gen.weighted()) {
    const auto& w = gen.weight();
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) p(i, j) *= std::sqrt(w[i] / w[j]);
  }
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      if (p(i, j) < 0.0 && p(i, j) > -kRoundoffFloor) p(i, j) = 0.0;
  return p;
}

/// sum_k exp(-lambda_k t) = sum_i P_t(i,i). The matrix trace already
/// approximates int p_t(x,x) dx: P_t(i,i) ~ p_t(x_i,x_i) delta.
inline double heat_trace(const GeneratorMatrix& gen, double t) {
  detail::require(t > 0.0, "heat trace needs t > 0");
  const auto& ev = gen.eigenvalues();
  double s = 0.0;
  for (Eigen::Index k = ev.size(); k-- > 0;) s += std::exp(-ev[k] * t);
  return s;
}

/// Max absolute row sum.
inline double inf_norm(const Eigen::MatrixXd& a) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) s += std::abs(a(i, j));
    best = std::max(best, s);
  }
  return best;
}

enum class NormRoute { Auto, FullMatrix, Dominated };

inline constexpr std::size_t kFullMatrixLimit = 1200;

struct CompactnessDiagnostic {
  double t = 0.0;
  std::vector<double> radii;
  std::vector<std::size_t> sizes;
  std::vector<double> norms;  ///< ||P_t - P_t^n||_{inf->inf}, one per level
  std::string route;
};

/// ||P_t - P_t^n||_{inf->inf} for the part generators on the exhaustion levels.
///
/// FullMatrix: max absolute row sum of the dense difference (P_t^n extended
/// by zero). Dominated: uses 0 <= P_t^n <= P_t entrywise (Metzler generators,
/// and spectral powers by subordination), which turns the row sums into
/// max_i (P_t 1 - P_t^n 1)(i) and avoids forming n x n matrices.
inline CompactnessDiagnostic compactness_diagnostic(const GeneratorMatrix& gen, const Exhaustion& levels, double t,
                                                    NormRoute route = NormRoute::Auto) {
  detail::require(t >= 0.0, "t ≥ 0 required");
  CompactnessDiagnostic out;
  out.t = t;
  if (route == NormRoute::Auto) route = gen.size() <= kFullMatrixLimit ? NormRoute::FullMatrix : NormRoute::Dominated;
  out.route = route == NormRoute::FullMatrix ? "full-matrix" : "dominated";

  // Positions of the level nodes inside gen's node list; must be nested.
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t k = 1; k <= levels.size(); ++k) {
    const Domain& lvl = levels.level(k);
    detail::require(lvl.dim() == 1, "grid generators need 1-dimensional levels");
    std::vector<std::size_t> pos;
    for (std::size_t i = 0; i < gen.size(); ++i) {
      const double x = gen.nodes()[i];
      if (lvl.contains(std::span<const double>(&x, 1))) pos.push_back(i);
    }
    if (!members.empty() && !std::includes(pos.begin(), pos.end(), members.back().begin(), members.back().end()))
      throw ArgumentError("exhaustion levels are not nested on the grid");
    members.push_back(std::move(pos));
  }

  const auto n = static_cast<Eigen::Index>(gen.size());
  Eigen::MatrixXd p_full;
  Eigen::VectorXd p_one;
  if (route == NormRoute::FullMatrix)
    p_full = semigroup_matrix(gen, t);
  else
    p_one = semigroup_apply(gen, t, Eigen::VectorXd::Ones(n));

  for (std::size_t k = 0; k < members.size(); ++k) {
    const auto& pos = members[k];
    out.radii.push_back(levels.radius(k + 1));
    out.sizes.push_back(pos.size());
    if (pos.size() == gen.size()) {
      out.norms.push_back(0.0);  // same generator
      continue;
    }
    if (pos.size() < 3) {
      // Level holds (almost) no nodes: P_t^n = 0.
      out.norms.push_back(route == NormRoute::FullMatrix ? inf_norm(p_full) : p_one.maxCoeff());
      continue;
    }
    const GeneratorMatrix part = gen.restricted_positions(pos);
    if (route == NormRoute::FullMatrix) {
      Eigen::MatrixXd diff = p_full;
      const Eigen::MatrixXd pn = semigroup_matrix(part, t);
      for (std::size_t a = 0; a < pos.size(); ++a)
        for (std::size_t b = 0; b < pos.size(); ++b)
          diff(static_cast<Eigen::Index>(pos[a]), static_cast<Eigen::Index>(pos[b])) -=
              pn(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      out.norms.push_back(inf_norm(diff));
    } else {
      const Eigen::VectorXd pn_one =
          semigroup_apply(part, t, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(pos.size())));
      Eigen::VectorXd diff = p_one;
      for (std::size_t a = 0; a < pos.size(); ++a) diff[static_cast<Eigen::Index>(pos[a])] -= pn_one[static_cast<Eigen::Index>(a)];
      out.norms.push_back(std::max(0.0, diff.maxCoeff()));
    }
  }
  return out;
}

struct LpRates {
  std::vector<double> t_grid;
  std::map<std::string, std::vector<double>> norms;      ///< "1", "2", "inf" -> ||P_t||_{p->p}
  std::map<std::string, std::vector<double>> rates;      ///< -(1/t) log ||P_t||
  std::map<std::string, double> extrapolated;           ///< slope of -log ||P_t|| over the last two t
  double lambda_1 = 0.0;
  std::string route;
};

/// Operator-norm decay rates on L^1(w), L^2(w), L^inf:
///   ||P||_{inf} = max row sum |P_ij|,
///   ||P||_{1}   = max_j sum_i |P_ij| w_i / w_j,
///   ||P||_{2}   = exp(-lambda_1 t).
inline LpRates lp_spectral_bound_compare(const GeneratorMatrix& gen, std::span<const double> t_grid,
                                         NormRoute route = NormRoute::Auto) {
  detail::require(!t_grid.empty(), "empty t-grid");
  for (std::size_t i = 0; i < t_grid.size(); ++i)
    detail::require(t_grid[i] > 0.0 && (i == 0 || t_grid[i] > t_grid[i - 1]), "t-grid must be positive and increasing");
  if (route == NormRoute::Auto) route = gen.size() <= kFullMatrixLimit ? NormRoute::FullMatrix : NormRoute::Dominated;
  LpRates r;
  r.route = route == NormRoute::FullMatrix ? "full-matrix" : "vector-action";
  r.t_grid.assign(t_grid.begin(), t_grid.end());
  r.lambda_1 = gen.eigensystem().values[0];
  const auto n = static_cast<Eigen::Index>(gen.size());
  const std::vector<double> w = gen.measure();
  Eigen::VectorXd wv(n);
  for (Eigen::Index i = 0; i < n; ++i) wv[i] = w[static_cast<std::size_t>(i)];

  for (double t : t_grid) {
    double n_inf = 0.0, n_one = 0.0;
    if (route == NormRoute::FullMatrix) {
      const Eigen::MatrixXd p = semigroup_matrix(gen, t);
      for (Eigen::Index i = 0; i < n; ++i) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) s += std::abs(p(i, j));
        n_inf = std::max(n_inf, s);
      }
      for (Eigen::Index j = 0; j < n; ++j) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) s += std::abs(p(i, j)) * wv[i] / wv[j];
        n_one = std::max(n_one, s);
      }
    } else {
      // Nonnegative kernel: row sums are P 1, weighted column sums are P^T w / w.
      const Eigen::VectorXd rows = semigroup_apply(gen, t, Eigen::VectorXd::Ones(n));
      const Eigen::VectorXd cols = semigroup_apply_transpose(gen, t, gen.weighted() ? wv : Eigen::VectorXd::Ones(n));
      n_inf = rows.maxCoeff();
      for (Eigen::Index j = 0; j < n; ++j) n_one = std::max(n_one, gen.weighted() ? cols[j] / wv[j] : cols[j]);
    }
    const double n_two = std::exp(-r.lambda_1 * t);
    r.norms["inf"].push_back(n_inf);
    r.norms["1"].push_back(n_one);
    r.norms["2"].push_back(n_two);
    r.rates["inf"].push_back(-std::log(n_inf) / t);
    r.rates["1"].push_back(-std::log(n_one) / t);
    r.rates["2"].push_back(-std::log(n_two) / t);
  }
  for (const auto& [p, v] : r.norms) {
    if (v.size() >= 2) {
      const std::size_t a = v.size() - 2, b = v.size() - 1;
      r.extrapolated[p] = (std::log(v[a]) - std::log(v[b])) / (t_grid[b] - t_grid[a]);
    } else {
      r.extrapolated[p] = r.rates.at(p).back();
    }
  }
  return r;
}

/// Spectral summary for JSON output.
struct SpectralReport {
  std::string label;
  std::vector<double> eigenvalues;                   ///< lowest eigenvalues of -L
  std::vector<std::pair<double, double>> trace;      ///< (t, trace)
  std::map<std::string, double> rates;               ///< p -> decay rate
  std::map<std::string, bool> diagnostics;
  std::map<std::string, double> values;
};

inline nlohmann::ordered_json to_json(const SpectralReport& r) {
  nlohmann::ordered_json j;
  j["label"] = r.label;
  j["eigenvalues"] = r.eigenvalues;
  auto& tr = j["trace"] = nlohmann::ordered_json::array();
  for (auto [t, v] : r.trace) tr.push_back({{"t", t}, {"trace", v}});
  j["rates"] = r.rates;
  j["diagnostics"] = r.diagnostics;
  j["values"] = r.values;
  return j;
}

inline SpectralReport spectral_report(const GeneratorMatrix& gen, std::string label, std::span<const double> trace_times,
                                      std::size_t n_eigen = 10) {
  SpectralReport r;
  r.label = std::move(label);
  const auto& ev = gen.eigenvalues();
  for (Eigen::Index k = 0; k < std::min<Eigen::Index>(ev.size(), static_cast<Eigen::Index>(n_eigen)); ++k)
    r.eigenvalues.push_back(ev[k]);
  for (double t : trace_times) r.trace.emplace_back(t, heat_trace(gen, t));
  bool decreasing = true;
  for (std::size_t i = 1; i < r.trace.size(); ++i) decreasing = decreasing && r.trace[i].second < r.trace[i - 1].second;
  r.diagnostics["trace_strictly_decreasing"] = decreasing;
  r.values["size"] = static_cast<double>(gen.size());
  r.values["spacing"] = gen.spacing();
  return r;
}

}  // namespace compactlab
