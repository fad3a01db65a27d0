#pragma once

// Thin wrappers over LAPACKE symmetric eigensolvers.

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <lapacke.h>

#include "compactlab/errors.hpp"

namespace compactlab::linalg {

struct SymmetricEigen {
  Eigen::VectorXd values;   ///< ascending
  Eigen::MatrixXd vectors;  ///< orthonormal columns; empty when values only were requested
};

inline void check_info(lapack_int info, const char* routine) {
  if (info != 0) throw std::runtime_error(std::string(routine) + " failed with info = " + std::to_string(info));
}

/// Eigenpairs of the symmetric tridiagonal matrix with diagonal d and
/// off-diagonal e (size n-1).
inline SymmetricEigen tridiagonal_eigen(const std::vector<double>& d, const std::vector<double>& e,
                                        bool want_vectors) {
  const auto n = static_cast<lapack_int>(d.size());
  detail::require(n >= 1 && e.size() + 1 == d.size(), "tridiagonal sizes mismatch");
  SymmetricEigen out;
  std::vector<double> diag = d;
  std::vector<double> off(e.begin(), e.end());
  off.push_back(0.0);
  if (!want_vectors) {
    check_info(LAPACKE_dsterf(n, diag.data(), off.data()), "dsterf");
    out.values = Eigen::Map<Eigen::VectorXd>(diag.data(), n);
    return out;
  }
  out.values.resize(n);
  out.vectors.resize(n, n);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  lapack_int found = 0;
  lapack_logical tryrac = 1;
  check_info(LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', 'A', n, diag.data(), off.data(), 0.0, 0.0, 0, 0, &found,
                            out.values.data(), out.vectors.data(), n, n, support.data(), &tryrac),
             "dstemr");
  detail::require(found == n, "dstemr returned an incomplete spectrum");
  return out;
}

/// Eigenpairs of a dense symmetric matrix (lower triangle is read).
inline SymmetricEigen dense_eigen(const Eigen::MatrixXd& a, bool want_vectors) {
  const auto n = static_cast<lapack_int>(a.rows());
  detail::require(a.rows() == a.cols() && n >= 1, "dense eigensolver needs a square matrix");
  SymmetricEigen out;
  Eigen::MatrixXd work = a;
  out.values.resize(n);
  check_info(LAPACKE_dsyevd(LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', 'L', n, work.data(), n, out.values.data()),
             "dsyevd");
  if (want_vectors) out.vectors = std::move(work);
  return out;
}

}  // namespace compactlab::linalg
