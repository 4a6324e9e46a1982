#include "bdctm/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bdctm/error.hpp"

namespace bdctm {

Matrix monotone_first_diff(int d1) {
  if (d1 < 3) throw DimensionError("monotone_first_diff: need D1 >= 3, got " + std::to_string(d1));
  Matrix d = Matrix::Zero(d1 - 2, d1);
  for (int i = 0; i < d1 - 2; ++i) {
    d(i, i + 1) = 1.0;
    d(i, i + 2) = -1.0;
  }
  return d.transpose() * d;
}

Matrix rw2_penalty(int dim) {
  if (dim < 3) throw DimensionError("rw2_penalty: need D >= 3, got " + std::to_string(dim));
  Matrix d = Matrix::Zero(dim - 2, dim);
  for (int i = 0; i < dim - 2; ++i) {
    d(i, i) = 1.0;
    d(i, i + 1) = -2.0;
    d(i, i + 2) = 1.0;
  }
  return d.transpose() * d;
}

Matrix identity_penalty(int g) {
  if (g < 1) throw DimensionError("identity_penalty: need G >= 1");
  return Matrix::Identity(g, g);
}

Matrix zero_penalty(int dim) {
  if (dim < 0) throw DimensionError("zero_penalty: negative dimension");
  return Matrix::Zero(dim, dim);
}

Matrix build_penalty(const PenaltySpec& spec) {
  switch (spec.kind) {
    case PenaltySpec::Kind::MonotoneFirstDiff:
      return monotone_first_diff(spec.dimension);
    case PenaltySpec::Kind::Rw2:
      return rw2_penalty(spec.dimension);
    case PenaltySpec::Kind::Identity:
      return identity_penalty(spec.dimension);
    case PenaltySpec::Kind::Zero:
      return zero_penalty(spec.dimension);
  }
  return zero_penalty(spec.dimension);
}

Matrix tensor_precision(const Matrix& k1, const Matrix& k2, double omega) {
  if (!(omega > 0.0 && omega < 1.0)) throw DomainError("tensor_precision: omega must lie in (0,1)");
  return omega * kron(k1, Matrix::Identity(k2.rows(), k2.rows())) +
         (1.0 - omega) * kron(Matrix::Identity(k1.rows(), k1.rows()), k2);
}

GeneralizedDeterminant generalized_determinant(const Vector& eigenvalues, double rtol) {
  GeneralizedDeterminant out;
  if (eigenvalues.size() == 0) return out;
  const double top = eigenvalues.maxCoeff();
  if (!(top > 0.0)) return out;
  const double cut = rtol * top;
  for (double ev : eigenvalues) {
    if (ev > cut) {
      out.log_gdet += std::log(ev);
      ++out.rank;
    }
  }
  return out;
}

GeneralizedDeterminant generalized_determinant(const Matrix& k, double rtol) {
  if (k.rows() != k.cols()) throw DomainError("generalized_determinant: matrix is not square");
  const double scale = std::max(1.0, k.cwiseAbs().maxCoeff());
  if ((k - k.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw DomainError("generalized_determinant: matrix is not symmetric");
  }
  if (k.rows() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Matrix> es(k, Eigen::EigenvaluesOnly);
  return generalized_determinant(es.eigenvalues(), rtol);
}

double log_gdet(const Matrix& k) { return generalized_determinant(k).log_gdet; }
int rank(const Matrix& k) { return generalized_determinant(k).rank; }

std::vector<double> default_omega_values(int size) {
  if (size < 1) throw DimensionError("anisotropy grid needs at least one point");
  if (size == 1) return {0.5};
  std::vector<double> w(size);
  for (int i = 0; i < size; ++i) w[i] = 0.05 + 0.9 * i / (size - 1);
  return w;
}

AnisotropyGrid build_anisotropy_grid(const Matrix& k1, const Matrix& k2,
                                     const std::vector<double>& omega) {
  if (omega.empty()) throw DimensionError("anisotropy grid needs at least one point");
  Eigen::SelfAdjointEigenSolver<Matrix> e1(k1, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Matrix> e2(k2, Eigen::EigenvaluesOnly);
  const Vector& lam = e1.eigenvalues();
  const Vector& mu = e2.eigenvalues();

  AnisotropyGrid grid;
  grid.omega = omega;
  const double log_w = -std::log(static_cast<double>(omega.size()));
  for (double w : omega) {
    if (!(w > 0.0 && w < 1.0)) throw DomainError("anisotropy grid: omega must lie in (0,1)");
    Vector spec(lam.size() * mu.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
      for (Eigen::Index j = 0; j < mu.size(); ++j) {
        spec[i * mu.size() + j] = w * lam[i] + (1.0 - w) * mu[j];
      }
    }
    const auto gd = generalized_determinant(spec);
    grid.log_gdet.push_back(gd.log_gdet);
    grid.rank.push_back(gd.rank);
    grid.log_prior.push_back(log_w);
  }
  return grid;
}

AnisotropyGrid build_anisotropy_grid(const Matrix& k1, const Matrix& k2, int size) {
  return build_anisotropy_grid(k1, k2, default_omega_values(size));
}

}  // namespace bdctm
