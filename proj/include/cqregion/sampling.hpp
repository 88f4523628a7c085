#pragma once

#include "cqregion/channel.hpp"
#include "cqregion/infoquant.hpp"
#include "cqregion/optimize.hpp"

namespace cqregion {

inline CMatrix ginibre(int rows, int cols, Rng& rng) {
  CMatrix g(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) g(i, j) = Complex(rng.normal(), rng.normal());
  return g;
}

// Hilbert-Schmidt-ish random state: G G^dag / tr.
inline DensityOperator random_density(int d, Rng& rng) {
  const CMatrix g = ginibre(d, d, rng);
  CMatrix m = g * g.adjoint();
  m /= m.trace().real();
  return DensityOperator::trusted(std::move(m));
}

inline CVector random_pure(int d, Rng& rng) {
  CVector v(d);
  for (int i = 0; i < d; ++i) v[i] = Complex(rng.normal(), rng.normal());
  v.normalize();
  return v;
}

// Haar-ish unitary via QR of a Ginibre matrix.
inline CMatrix random_unitary(int d, Rng& rng) {
  const CMatrix g = ginibre(d, d, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ() * CMatrix::Identity(d, d);
  const CMatrix r = q.adjoint() * g;
  for (int i = 0; i < d; ++i) {
    const Complex rii = r(i, i);
    if (std::abs(rii) > 1e-14) q.col(i) *= rii / std::abs(rii);
  }
  return q;
}

// Random channel from a Haar-ish isometry V: C^din -> C^dout (x) C^env.
inline KrausChannel random_channel(int din, int dout, int env, Rng& rng) {
  const int rows = dout * env;
  if (rows < din) throw dimension_error("random_channel: dout*env must be >= din");
  const CMatrix g = ginibre(rows, din, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  const CMatrix v = qr.householderQ() * CMatrix::Identity(rows, din);
  std::vector<CMatrix> kraus;
  kraus.reserve(env);
  for (int k = 0; k < env; ++k) {
    CMatrix op(dout, din);
    for (int b = 0; b < dout; ++b) op.row(b) = v.row(static_cast<Eigen::Index>(b) * env + k);
    kraus.push_back(std::move(op));
  }
  return KrausChannel(std::move(kraus), "random");
}

inline Ensemble random_ensemble(int d, int k, Rng& rng) {
  std::vector<Ensemble::Member> ms;
  std::vector<double> w(k);
  double norm = 0.0;
  for (int i = 0; i < k; ++i) {
    w[i] = -std::log(rng.uniform());
    norm += w[i];
  }
  for (int i = 0; i < k; ++i) ms.push_back({w[i] / norm, random_density(d, rng)});
  return Ensemble::trusted(std::move(ms));
}

// Random PSD Gram matrix with unit diagonal (random env states).
inline GeneralizedDephasingSpec random_dephasing_spec(int d, Rng& rng) {
  std::vector<CVector> phis;
  phis.reserve(d);
  for (int i = 0; i < d; ++i) phis.push_back(random_pure(d, rng));
  return GeneralizedDephasingSpec::from_env_states(phis);
}

}  // namespace cqregion
