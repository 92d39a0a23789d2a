#pragma once

// Test-only brute-force helpers: collective spin operators assembled directly
// from Kronecker products in the 2^N product basis, independent of the
// library's operator and basis code. Used as the oracle for degeneracies and
// ladder coefficients.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <map>
#include <vector>

namespace test_support {

inline Eigen::MatrixXd kron(const Eigen::MatrixXd& a,
                            const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

struct CollectiveOps {
  Eigen::MatrixXd jz, jplus, jminus, j2;
};

/// Collective operators summed over single-spin embeddings I x .. x op x .. I.
inline CollectiveOps collective_ops(int n_spins) {
  const Eigen::Index dim = Eigen::Index(1) << n_spins;
  Eigen::MatrixXd sz(2, 2), sp(2, 2), sm(2, 2);
  sz << 0.5, 0, 0, -0.5;
  sp << 0, 1, 0, 0;  // raising in the |up>=e0, |down>=e1 convention
  sm << 0, 0, 1, 0;
  CollectiveOps ops;
  ops.jz = Eigen::MatrixXd::Zero(dim, dim);
  ops.jplus = Eigen::MatrixXd::Zero(dim, dim);
  ops.jminus = Eigen::MatrixXd::Zero(dim, dim);
  for (int k = 0; k < n_spins; ++k) {
    Eigen::MatrixXd termz = Eigen::MatrixXd::Identity(1, 1);
    Eigen::MatrixXd termp = termz, termm = termz;
    for (int s = 0; s < n_spins; ++s) {
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(2, 2);
      termz = kron(termz, s == k ? sz : eye);
      termp = kron(termp, s == k ? sp : eye);
      termm = kron(termm, s == k ? sm : eye);
    }
    ops.jz += termz;
    ops.jplus += termp;
    ops.jminus += termm;
  }
  ops.j2 = ops.jz * ops.jz - ops.jz + ops.jplus * ops.jminus;
  return ops;
}

/// Simultaneous eigenbasis of (J^2, Jz) found numerically; returns the
/// multiplicity of each j ladder (count of simultaneous eigenvectors with
/// J^2 eigenvalue j(j+1) and Jz eigenvalue m = j).
inline std::map<int, int> ladder_multiplicities(int n_spins) {
  const auto ops = collective_ops(n_spins);
  // J^2 and Jz commute; diagonalize J^2 + c Jz with c small enough to split
  // degeneracies without mixing the spectra
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ops.j2 +
                                                    (1.0 / 1024) * ops.jz);
  std::map<int, int> counts;  // doubled j -> number of ladders
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const Eigen::VectorXd v = es.eigenvectors().col(i);
    const double j2v = v.dot(ops.j2 * v);
    const double jzv = v.dot(ops.jz * v);
    const int dj = static_cast<int>(std::lround(std::sqrt(1.0 + 4.0 * j2v) - 1.0));
    const int dm = static_cast<int>(std::lround(2.0 * jzv));
    if (dj == dm) counts[dj] += 1;  // count each ladder once, at its top
  }
  return counts;
}

}  // namespace test_support
