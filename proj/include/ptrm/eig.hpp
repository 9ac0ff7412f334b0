#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "ptrm/error.hpp"

namespace ptrm {

inline constexpr Eigen::Index kMaxDenseEigSize = 4096;

/// All eigenvalues of a general complex matrix (LAPACK zgeev: balancing,
/// Hessenberg reduction, shifted QR). Order is whatever the solver returns.
inline std::vector<std::complex<double>> eig_dense(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) {
    throw ValidationError(fmt::format("eig_dense: matrix is {}x{}, not square", m.rows(), m.cols()));
  }
  if (m.rows() > kMaxDenseEigSize) {
    throw ValidationError(fmt::format("eig_dense: size {} exceeds the dense budget {}", m.rows(), kMaxDenseEigSize));
  }
  if (!m.allFinite()) throw ValidationError("eig_dense: matrix has non-finite entries");
  const auto n = static_cast<lapack_int>(m.rows());
  if (n == 0) return {};

  Eigen::MatrixXcd work = m;  // zgeev overwrites its input; Eigen storage is column-major
  std::vector<std::complex<double>> w(static_cast<std::size_t>(n));
  std::complex<double> unused{};
  const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, work.data(), n, w.data(), &unused, 1,
                                        &unused, 1);
  if (info > 0) {
    throw ConvergenceError(fmt::format("eig_dense: QR iteration failed to converge ({} eigenvalues unresolved)", info));
  }
  if (info < 0) throw ValidationError(fmt::format("eig_dense: zgeev rejected argument {}", -info));
  return w;
}

}  // namespace ptrm
