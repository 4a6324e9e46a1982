#pragma once

#include <vector>

#include "bdctm/linalg.hpp"

namespace bdctm {

/// Prior precision structure of one coefficient direction plus its
/// inverse-gamma hyperparameters for the smoothing variance.
struct PenaltySpec {
  enum class Kind { MonotoneFirstDiff, Rw2, Identity, Zero };
  Kind kind = Kind::Zero;
  int dimension = 1;
  double a = 1.0;
  double b = 0.001;
};

/// D~^T D~ with D~ the (D1-2) x D1 partial first-difference matrix
/// (D~_{i,i+1} = 1, D~_{i,i+2} = -1). The first coefficient is untouched.
Matrix monotone_first_diff(int d1);

/// Second-order random-walk precision Delta2^T Delta2.
Matrix rw2_penalty(int d);

Matrix identity_penalty(int g);
Matrix zero_penalty(int d);

Matrix build_penalty(const PenaltySpec& spec);

/// omega (K1 (x) I_{D2}) + (1 - omega) (I_{D1} (x) K2), 0 < omega < 1.
Matrix tensor_precision(const Matrix& k1, const Matrix& k2, double omega);

/// Relative eigenvalue cut-off for the generalized determinant and rank.
inline constexpr double kRankRtol = 1e-10;

struct GeneralizedDeterminant {
  double log_gdet = 0.0;  ///< sum of log eigenvalues above the cut-off
  int rank = 0;
};

/// Spectrum-based log generalized determinant and rank of a symmetric PSD
/// matrix. Asymmetric input raises DomainError.
GeneralizedDeterminant generalized_determinant(const Matrix& k, double rtol = kRankRtol);
/// Same, from an already known spectrum.
GeneralizedDeterminant generalized_determinant(const Vector& eigenvalues,
                                               double rtol = kRankRtol);

double log_gdet(const Matrix& k);
int rank(const Matrix& k);

/// Discrete support of the anisotropy parameter of a tensor block with the
/// precomputed log generalized determinants of K(omega).
struct AnisotropyGrid {
  std::vector<double> omega;
  std::vector<double> log_gdet;
  std::vector<int> rank;
  std::vector<double> log_prior;  ///< normalized log prior weights

  int size() const { return static_cast<int>(omega.size()); }
};

/// `size` equidistant points on [0.05, 0.95] (0.5 alone when size == 1).
std::vector<double> default_omega_values(int size = 17);

/// Uses the Kronecker eigenvalue-sum identity: spec(K(omega)) =
/// {omega * lambda_i + (1 - omega) * mu_j}.
AnisotropyGrid build_anisotropy_grid(const Matrix& k1, const Matrix& k2, int size = 17);
AnisotropyGrid build_anisotropy_grid(const Matrix& k1, const Matrix& k2,
                                     const std::vector<double>& omega);

}  // namespace bdctm
