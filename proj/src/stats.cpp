#include "dtspp/stats.hpp"

#include <cmath>

#include "dtspp/common.hpp"

namespace dtspp {

namespace {

// Modified Lentz continued fraction for the incomplete beta.
double beta_cf(double a, double b, double x) {
    constexpr double kFpMin = 1e-300;
    constexpr double kEps = 1e-15;
    constexpr int kMaxIter = 500;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw numeric_error("incomplete beta continued fraction did not converge");
}

}  // namespace

double ln_gamma(double x) {
    // Lanczos approximation, g=5, n=6.
    static const double cof[6] = {76.18009172947146,    -86.50532032941677,
                                  24.01409824083091,    -1.231739572450155,
                                  0.1208650973866179e-2, -0.5395239384953e-5};
    double y = x;
    double tmp = x + 5.5;
    tmp -= (x + 0.5) * std::log(tmp);
    double ser = 1.000000000190015;
    for (int j = 0; j < 6; ++j) ser += cof[j] / ++y;
    return -tmp + std::log(2.5066282746310005 * ser / x);
}

double incomplete_beta(double a, double b, double x) {
    if (x < 0.0 || x > 1.0) throw numeric_error("incomplete beta argument outside [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_bt = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) +
                         a * std::log(x) + b * std::log1p(-x);
    const double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return bt * beta_cf(a, b, x) / a;
    }
    return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
    if (df <= 0.0) throw numeric_error("degrees of freedom must be positive");
    if (std::isinf(t)) return 0.0;
    if (std::isnan(t)) throw numeric_error("t statistic is NaN");
    return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / 1.4142135623730950488016887242097);
}

}  // namespace dtspp
