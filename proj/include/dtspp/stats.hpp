#ifndef DTSPP_STATS_HPP
#define DTSPP_STATS_HPP

namespace dtspp {

double ln_gamma(double x);

/// Regularized incomplete beta function I_x(a, b), continued-fraction
/// evaluation, accurate to ~1e-14 for the a,b used here.
double incomplete_beta(double a, double b, double x);

/// Two-sided p-value of a Student-t statistic with `df` degrees of freedom:
/// P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2).
double student_t_two_sided_p(double t, double df);

/// Standard normal CDF.
double normal_cdf(double z);

}  // namespace dtspp

#endif
