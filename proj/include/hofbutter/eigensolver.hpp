#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include <lapacke.h>

#include "hofbutter/error.hpp"

namespace hofbutter {

using cplx = std::complex<double>;
using HermitianMatrix = Eigen::MatrixXcd;

struct Eigensystem {
  Eigen::VectorXd values;    // ascending
  Eigen::MatrixXcd vectors;  // column n belongs to values[n]
};

inline Eigensystem eigensystem(const HermitianMatrix& h) {
  Eigen::SelfAdjointEigenSolver<HermitianMatrix> es(h);
  if (es.info() != Eigen::Success) throw Error("eigensystem: solver did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

inline std::vector<double> eigenvalues_dense(const HermitianMatrix& h) {
  Eigen::SelfAdjointEigenSolver<HermitianMatrix> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error("eigenvalues: solver did not converge");
  return {es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size()};
}

/// Hermitian matrix whose only off-diagonal entries couple i and i-1 (mod n).
/// lower[i] holds H(i, i-1 mod n); diagonal entries are real.
struct CyclicTridiagonal {
  std::vector<double> diag;
  std::vector<cplx> lower;

  std::size_t size() const { return diag.size(); }

  HermitianMatrix dense() const {
    const auto n = static_cast<Eigen::Index>(diag.size());
    HermitianMatrix h = HermitianMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) h(i, i) = diag[i];
    if (n == 1) return h;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index j = (i + n - 1) % n;
      h(i, j) += lower[i];
      h(j, i) += std::conj(lower[i]);
    }
    return h;
  }
};

/// Eigenvalues of a cyclic tridiagonal Hermitian matrix in O(n^2).
///
/// The interleaving order 0, n-1, 1, n-2, 2, ... places every cyclic
/// neighbour pair within distance two, so the permuted matrix is a
/// pentadiagonal band handled by LAPACK's zhbev.
inline std::vector<double> eigenvalues(const CyclicTridiagonal& m) {
  const int n = static_cast<int>(m.size());
  if (n <= 3) return eigenvalues_dense(m.dense());

  std::vector<int> pos(n);
  const int front = (n + 1) / 2;
  for (int i = 0; i < front; ++i) pos[i] = 2 * i;
  for (int i = 1; i <= n - front; ++i) pos[n - i] = 2 * i - 1;

  const int kd = 2;
  const int ldab = kd + 1;
  std::vector<cplx> ab(static_cast<std::size_t>(ldab) * n, cplx{0.0, 0.0});
  auto put = [&](int r, int c, cplx v) {
    // upper storage: A(r,c) with r <= c lives at ab[kd + r - c + c*ldab]
    if (r > c) {
      std::swap(r, c);
      v = std::conj(v);
    }
    ab[static_cast<std::size_t>(kd + r - c + c * ldab)] += v;
  };
  for (int i = 0; i < n; ++i) put(pos[i], pos[i], m.diag[i]);
  for (int i = 0; i < n; ++i) put(pos[i], pos[(i + n - 1) % n], m.lower[i]);

  // std::complex<double> and the C99 complex type share layout
  std::vector<double> w(n);
  const lapack_int info = LAPACKE_zhbev(LAPACK_COL_MAJOR, 'N', 'U', n, kd,
                                        reinterpret_cast<lapack_complex_double*>(ab.data()), ldab,
                                        w.data(), nullptr, 1);
  if (info != 0) throw Error("zhbev failed with info=" + std::to_string(info));
  return w;
}

}  // namespace hofbutter
