#pragma once

#include "holodyn/roots.hpp"
#include "holodyn/types.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace holodyn {

// Characteristic polynomial det(zI - M), lowest degree first.
inline std::vector<cplx> characteristic_polynomial(const CMatrix& m) {
  const auto n = m.rows();
  if (n != m.cols() || n < 1 || n > kMaxDim) throw Error("eigenvalues need a square matrix of size 1..3");
  if (n == 1) return {-m(0, 0), 1.0};
  const cplx tr = m.trace();
  if (n == 2) {
    const cplx det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    return {det, -tr, 1.0};
  }
  // Sum of principal 2x2 minors, and the determinant by cofactors.
  auto minor2 = [&](int i, int j) { return m(i, i) * m(j, j) - m(i, j) * m(j, i); };
  const cplx c2 = minor2(0, 1) + minor2(0, 2) + minor2(1, 2);
  const cplx det = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
                   m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
                   m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
  return {-det, c2, -tr, 1.0};
}

// Descending modulus; ties broken by real then imaginary part. Moduli are
// compared after rounding to 12 significant digits so that a rotation's
// eigenvalues count as tied.
inline void sort_by_modulus(std::vector<cplx>& v) {
  auto key = [](cplx a) {
    const double r = std::abs(a);
    if (r == 0.0 || !std::isfinite(r)) return r;
    const double q = std::pow(10.0, 11 - std::floor(std::log10(r)));
    return std::round(r * q) / q;
  };
  std::sort(v.begin(), v.end(), [&](cplx a, cplx b) {
    if (key(a) != key(b)) return key(a) > key(b);
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
}

inline std::vector<cplx> eigenvalues(const CMatrix& m) {
  if (!all_finite(m)) throw Error("eigenvalue iteration failed: non-finite matrix");
  if (m.rows() != m.cols() || m.rows() < 1 || m.rows() > kMaxDim)
    throw Error("eigenvalues need a square matrix of size 1..3");
  // Schur form rather than characteristic roots: repeated eigenvalues keep
  // full accuracy.
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(Eigen::MatrixXcd(m), false);
  if (es.info() != Eigen::Success) throw Error("eigenvalue iteration failed");
  std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  sort_by_modulus(ev);
  return ev;
}

}  // namespace holodyn
