#pragma once

#include <optional>

#include "bdctm/linalg.hpp"

namespace bdctm {

/// Coefficient layout of one partial transformation with a D1 x D2 grid
/// (index d = (d1-1)*D2 + d2). When `monotone` is set, entries with d1 >= 2
/// are exponentiated and gamma is the cumulative sum along d1, which makes
/// the block strictly increasing in the response direction.
struct MonotoneMap {
  int d1 = 1;
  int d2 = 1;
  bool monotone = true;

  int size() const { return d1 * d2; }
  bool exponentiated(int index) const { return monotone && index >= d2; }
};

/// Largest exponent accepted before a state is declared overflowing.
inline constexpr double kMaxExponent = 700.0;

/// Dense Sigma_{D1} (x) I_{D2}, all-ones lower triangle. Test oracle only;
/// gamma_from_beta never materializes it.
Matrix sigma_matrix(int d1, int d2);

/// True when some exponentiated coefficient exceeds kMaxExponent.
bool overflows(const Eigen::Ref<const Vector>& beta, const MonotoneMap& map);

/// beta_tilde: first D2 entries copied, the rest exponentiated.
Vector beta_tilde(const Eigen::Ref<const Vector>& beta, const MonotoneMap& map);

/// gamma = Sigma * beta_tilde via strided cumulative sums. Returns nullopt
/// on exponent overflow so callers can reject the state.
std::optional<Vector> gamma_from_beta(const Eigen::Ref<const Vector>& beta,
                                      const MonotoneMap& map);

/// Diagonal of C: 1 for copied entries, exp(beta_d) for exponentiated ones.
Vector jacobian_diag(const Eigen::Ref<const Vector>& beta, const MonotoneMap& map);

/// Chain rule d/dbeta = C * Sigma^T * (d/dgamma), computed with reverse
/// strided cumulative sums.
Vector pullback(const Eigen::Ref<const Vector>& beta, const MonotoneMap& map,
                const Eigen::Ref<const Vector>& grad_gamma);

}  // namespace bdctm
