#include "bdctm/monotone.hpp"

#include <cmath>

#include "bdctm/error.hpp"

namespace bdctm {

namespace {

void check_size(const Eigen::Ref<const Vector>& v, const MonotoneMap& map) {
  if (v.size() != map.size()) throw DimensionError("monotone map: block size mismatch");
}

}  // namespace

Matrix sigma_matrix(int d1, int d2) {
  if (d1 < 1 || d2 < 1) throw DimensionError("sigma_matrix: dimensions must be positive");
  const Matrix lower = Matrix::Ones(d1, d1).triangularView<Eigen::Lower>();
  return kron(lower, Matrix::Identity(d2, d2));
}

bool overflows(const Eigen::Ref<const Vector>& beta, const MonotoneMap& map) {
  if (!map.monotone) return false;
  for (int i = map.d2; i < map.size(); ++i) {
    if (beta[i] > kMaxExponent) return true;
  }
  return false;
}

Vector beta_tilde(const Eigen::Ref<const Vector>& beta, const MonotoneMap& map) {
  check_size(beta, map);
  Vector out = beta;
  if (map.monotone) {
    for (int i = map.d2; i < map.size(); ++i) out[i] = std::exp(beta[i]);
  }
  return out;
}

std::optional<Vector> gamma_from_beta(const Eigen::Ref<const Vector>& beta,
                                      const MonotoneMap& map) {
  check_size(beta, map);
  if (overflows(beta, map)) return std::nullopt;
  Vector g = beta_tilde(beta, map);
  if (map.monotone) {
    for (int i = map.d2; i < map.size(); ++i) g[i] += g[i - map.d2];
  }
  return g;
}

Vector jacobian_diag(const Eigen::Ref<const Vector>& beta, const MonotoneMap& map) {
  check_size(beta, map);
  Vector c = Vector::Ones(map.size());
  if (map.monotone) {
    for (int i = map.d2; i < map.size(); ++i) c[i] = std::exp(beta[i]);
  }
  return c;
}

Vector pullback(const Eigen::Ref<const Vector>& beta, const MonotoneMap& map,
                const Eigen::Ref<const Vector>& grad_gamma) {
  check_size(beta, map);
  check_size(grad_gamma, map);
  if (!map.monotone) return grad_gamma;
  // Sigma^T g: suffix sums along d1 for every d2.
  Vector s = grad_gamma;
  for (int i = map.size() - 1 - map.d2; i >= 0; --i) s[i] += s[i + map.d2];
  for (int i = map.d2; i < map.size(); ++i) s[i] *= std::exp(beta[i]);
  return s;
}

}  // namespace bdctm
