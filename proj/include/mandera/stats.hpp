#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mandera {

/// Regularized incomplete beta function I_x(a, b), continued-fraction form.
double incomplete_beta(double a, double b, double x);

/// Two-sided p-value of the Pearson-correlation t statistic with nu degrees
/// of freedom: I_{nu/(nu+t^2)}(nu/2, 1/2).
double t_test_two_sided_p(double t, double nu);

/// Pearson correlation of two equal-length vectors. Returns NaN when either
/// vector is constant.
double pearson(std::span<const double> x, std::span<const double> y);

/// One-sample Kolmogorov-Smirnov distance of samples against Uniform(0,1).
double ks_uniform_distance(std::vector<double> samples);

/// Asymptotic KS critical value c(alpha)/sqrt(n), c = sqrt(-ln(alpha/2)/2).
double ks_critical_value(double alpha, std::size_t n);

/// Linear-interpolation quantile (R type 7) of a sample; q in [0,1].
double quantile(std::vector<double> sorted_values, double q);

struct BoxplotStats {
  double q1 = 0, median = 0, q3 = 0;
  double lo_whisker = 0, hi_whisker = 0;  // Q1-1.5*IQR, Q3+1.5*IQR
};

BoxplotStats boxplot_stats(std::vector<double> values);

/// Mean and standard error of the mean (sd/sqrt(n), sample sd with n-1).
struct MeanSe {
  double mean = 0;
  double se = 0;
};
MeanSe mean_se(std::span<const double> values);

}  // namespace mandera
