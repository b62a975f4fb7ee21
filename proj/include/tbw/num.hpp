#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace tbw::num {

inline double sigmoid(double x) {
  if (x >= 0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

// log(sigmoid(x)), stable for large |x|
inline double log_sigmoid(double x) {
  if (x >= 0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

double mean(std::span<const double> xs);
double sample_variance(std::span<const double> xs);  // unbiased, n >= 2

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

// Two-sided p-value for Student's t with (possibly fractional) df.
double student_t_two_sided_p(double t, double df);

// Upper tail of the chi-square distribution with k degrees of freedom.
double chi_square_sf(double x, double k);

// Spearman rank correlation (average ranks on ties).
double spearman_rho(std::span<const double> xs, std::span<const double> ys);

// average ranks, 1-based, ties share the mean rank
std::vector<double> ranks_with_ties(std::span<const double> xs);

// FNV-1a 64-bit, used for artifact fingerprints in manifests.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace tbw::num
