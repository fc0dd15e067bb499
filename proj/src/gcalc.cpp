#include "graze/gcalc.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <string>

#include "graze/errors.hpp"
#include "graze/vec2.hpp"

namespace graze {

namespace {

double scale_of(std::initializer_list<double> terms) {
  double s = 1.0;
  for (double t : terms) s = std::max(s, std::abs(t));
  return s;
}

}  // namespace

GContext::GContext(std::vector<double> lengths, std::vector<double> alphas)
    : lengths_(std::move(lengths)), alphas_(std::move(alphas)) {
  if (lengths_.size() != alphas_.size()) throw DomainError("GContext: lengths and angles differ in size");
  if (lengths_.size() < 2) throw DomainError("GContext: period must be at least 2");
  for (std::size_t i = 0; i < lengths_.size(); ++i) {
    if (!(lengths_[i] > 0.0)) throw DomainError("GContext: segment lengths must be positive");
    if (!(std::abs(alphas_[i]) < kPi / 2)) throw DomainError("GContext: |alpha| must be below pi/2");
  }
  cosines_.reserve(alphas_.size());
  for (double a : alphas_) cosines_.push_back(std::cos(a));
}

std::vector<double> g_row(const GContext& ctx, int j, int k_max) {
  if (k_max < j - 1)
    throw DomainError("G(j,k) needs k >= j-1, got j=" + std::to_string(j) + " k=" + std::to_string(k_max));
  std::vector<double> row;
  row.reserve(static_cast<std::size_t>(k_max - j + 2));
  row.push_back(0.0);
  if (k_max >= j) row.push_back(1.0);
  for (int k = j + 1; k <= k_max; ++k) {
    const double c_prev = ctx.cos_alpha(k - 1);
    const double next = (2.0 * ctx.length(k - 1) + c_prev + ctx.cos_alpha(k)) * row.back() -
                        c_prev * c_prev * row[row.size() - 2];
    row.push_back(next);
  }
  return row;
}

double G(const GContext& ctx, int j, int k) { return g_row(ctx, j, k).back(); }

double G_flipped(const GContext& ctx, int j, int k) {
  if (k < j - 1) throw DomainError("G(j,k) needs k >= j-1");
  if (k == j - 1) return 0.0;
  double g_far = 0.0;   // G(i+2, k)
  double g_near = 1.0;  // G(i+1, k), starting at i + 1 = k
  for (int i = k - 1; i >= j; --i) {
    const double c_next = ctx.cos_alpha(i + 1);
    const double g = (2.0 * ctx.length(i) + ctx.cos_alpha(i) + c_next) * g_near - c_next * c_next * g_far;
    g_far = g_near;
    g_near = g;
  }
  return g_near;
}

double pcos(const GContext& ctx, int j, int k) {
  if (k < j) throw DomainError("pcos(j,k) needs j <= k");
  double p = 1.0;
  for (int i = j; i < k; ++i) p *= ctx.cos_alpha(i);
  return p;
}

double p_tilde(const GContext& ctx, int j, int k) {
  const double sign = (ctx.period() % 2 == 1) ? 1.0 : -1.0;  // (-1)^(N+1)
  return sign * pcos(ctx, j, k);
}

GVariants variants(const GContext& ctx, int j, int k) {
  GVariants v;
  v.g = G(ctx, j, k);
  const double left = ctx.cos_alpha(j) * G(ctx, j + 1, k);
  const double right = ctx.cos_alpha(k) * G(ctx, j, k - 1);
  v.minus_left = v.g - left;
  v.plus_left = v.g + left;
  v.minus_right = v.g - right;
  v.plus_right = v.g + right;
  v.p_tilde = p_tilde(ctx, j, k);
  return v;
}

double D(const GContext& ctx) {
  const int n = ctx.period();
  const double c0 = ctx.cos_alpha(0);
  return G(ctx, 0, n) - c0 * c0 * G(ctx, 1, n - 1) + 2.0 * p_tilde(ctx, 0, n);
}

double D_expanded(const GContext& ctx) {
  const int n = ctx.period();
  const GVariants v = variants(ctx, 0, n - 1);
  return 2.0 * ctx.length(n - 1) * v.g + ctx.cos_alpha(0) * v.minus_left +
         ctx.cos_alpha(n - 1) * v.minus_right + 2.0 * p_tilde(ctx, 0, n);
}

Residual det_identity_residual(const GContext& ctx, int j, int k) {
  if (k < j) throw DomainError("det identity needs j <= k");
  if (k == j) {
    // G(j+1, j-1) lies one step below the recursion's base; continuing the
    // recursion backwards gives -sec^2 a_j, and pcos(j+1, j) = sec a_j.
    const double sec = 1.0 / ctx.cos_alpha(j);
    const double lhs = 0.0 * 0.0 - 1.0 * (-sec * sec);
    return {lhs - sec * sec, scale_of({lhs, sec * sec})};
  }
  const double a = G(ctx, j, k - 1) * G(ctx, j + 1, k);
  const double b = G(ctx, j, k) * G(ctx, j + 1, k - 1);
  const double p = pcos(ctx, j + 1, k);
  return {a - b - p * p, scale_of({a, b, p * p})};
}

Residual partition_identity_residual(const GContext& ctx, int i, int j, int k) {
  if (!(i <= j && j <= k)) throw DomainError("partition identity needs i <= j <= k");
  const double c = ctx.cos_alpha(j);
  const double lhs = G(ctx, i, k);
  const double t1 = G(ctx, i, j) * G(ctx, j, k);
  const double t2 = c * c * G(ctx, i, j - 1) * G(ctx, j + 1, k);
  return {lhs - (t1 - t2), scale_of({lhs, t1, t2})};
}

Residual recursion_agreement_residual(const GContext& ctx, int j, int k) {
  if (k <= j) throw DomainError("flipped recursion needs j < k");
  const double c_next = ctx.cos_alpha(j + 1);
  const double lhs = G(ctx, j, k);
  const double t1 = (2.0 * ctx.length(j) + ctx.cos_alpha(j) + c_next) * G(ctx, j + 1, k);
  const double t2 = c_next * c_next * G(ctx, j + 2, k);
  return {lhs - (t1 - t2), scale_of({lhs, t1, t2})};
}

std::array<bool, 6> check_inequalities(const GContext& ctx, int j, int k) {
  if (k <= j) throw DomainError("inequalities need j < k");
  const bool base = (k == j + 1);
  const double g = G(ctx, j, k);
  const double g_last = G(ctx, j, k - 1);   // G(j, k-1)
  const double g_first = G(ctx, j + 1, k);  // G(j+1, k)
  const double cj = ctx.cos_alpha(j);
  const double cj1 = ctx.cos_alpha(j + 1);
  const double ck = ctx.cos_alpha(k);
  const double ck1 = ctx.cos_alpha(k - 1);
  const double sk1 = ctx.length(k - 1);
  const double sj = ctx.length(j);

  const double a_hi = (2.0 * sk1 + ck1 + ck) * g_last;
  const double d_hi = (2.0 * sj + cj + cj1) * g_first;
  return {
      (2.0 * sk1 + ck) * g_last < g && (base ? g <= a_hi : g < a_hi),
      ck * g_last < g,
      g > pcos(ctx, j + 1, k + 1),
      (2.0 * sj + cj) * g_first < g && (base ? g <= d_hi : g < d_hi),
      cj * g_first < g,
      g > pcos(ctx, j, k),
  };
}

}  // namespace graze
