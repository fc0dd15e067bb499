#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace graze {

/// Segment lengths and incidence angles of a period, read cyclically.
///
/// Indices are unrolled: s_k and alpha_k for any integer k resolve to
/// k mod N, so G(0, N) and friends run over one full period with
/// alpha_N identified with alpha_0.
class GContext {
 public:
  /// Requires equal lengths N >= 2, all s > 0 and all |alpha| < pi/2.
  GContext(std::vector<double> lengths, std::vector<double> alphas);

  int period() const { return static_cast<int>(lengths_.size()); }
  double length(int k) const { return lengths_[wrap(k)]; }
  double alpha(int k) const { return alphas_[wrap(k)]; }
  double cos_alpha(int k) const { return cosines_[wrap(k)]; }

 private:
  std::size_t wrap(int k) const {
    const int n = period();
    return static_cast<std::size_t>(((k % n) + n) % n);
  }

  std::vector<double> lengths_;
  std::vector<double> alphas_;
  std::vector<double> cosines_;
};

/// G(j, k) for k >= j - 1, by the forward three-term recursion.
/// Throws DomainError for k < j - 1.
double G(const GContext& ctx, int j, int k);

/// The row G(j, j-1), G(j, j), ..., G(j, k_max); entry i is G(j, j - 1 + i).
std::vector<double> g_row(const GContext& ctx, int j, int k_max);

/// G(j, k) evaluated with the flipped recursion in the first index.
double G_flipped(const GContext& ctx, int j, int k);

/// cos alpha_j cos alpha_{j+1} ... cos alpha_{k-1}; 1 for j == k.
double pcos(const GContext& ctx, int j, int k);
/// (-1)^(N+1) pcos(j, k), the sign set by the full period N.
double p_tilde(const GContext& ctx, int j, int k);

/// Signed combinations of G used by the perturbation formulas.
struct GVariants {
  double g = 0.0;
  double minus_left = 0.0;   // G(j,k) - cos a_j G(j+1,k)
  double minus_right = 0.0;  // G(j,k) - cos a_k G(j,k-1)
  double plus_left = 0.0;    // G(j,k) + cos a_j G(j+1,k)
  double plus_right = 0.0;   // G(j,k) + cos a_k G(j,k-1)
  double p_tilde = 0.0;
};

GVariants variants(const GContext& ctx, int j, int k);

/// D = G(0,N) - cos^2 a_0 G(1,N-1) + 2 p~(0,N).
double D(const GContext& ctx);
/// Same scalar from the expansion 2 s_{N-1} G(0,N-1) + cos a_0 G-_l(0,N-1)
/// + cos a_{N-1} G-_r(0,N-1) + 2 p~(0,N).
double D_expanded(const GContext& ctx);

/// Value of an identity residual together with the size of its largest term.
struct Residual {
  double value = 0.0;
  double scale = 1.0;
  double relative() const { return std::abs(value) / scale; }
};

/// G(j,k-1)G(j+1,k) - G(j,k)G(j+1,k-1) - pcos(j+1,k)^2, for j <= k.
Residual det_identity_residual(const GContext& ctx, int j, int k);
/// G(i,k) - [G(i,j)G(j,k) - cos^2 a_j G(i,j-1)G(j+1,k)], for i <= j <= k.
Residual partition_identity_residual(const GContext& ctx, int i, int j, int k);
/// Forward recursion minus flipped recursion for G(j, k).
Residual recursion_agreement_residual(const GContext& ctx, int j, int k);

/// The six inequalities (a)-(f) bounding G, for j < k. Each entry is true
/// when the inequality holds. At k == j + 1 the upper bounds of (a) and (d)
/// are equalities and are checked non-strictly.
std::array<bool, 6> check_inequalities(const GContext& ctx, int j, int k);

}  // namespace graze
