#include "strata/special_functions.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "strata/error.hpp"

namespace strata {

namespace {
constexpr double kSqrt2 = 1.4142135623730950488016887242097;
constexpr double kSqrt2Pi = 2.5066282746310005024157652848110;
}  // namespace

double std_normal_cdf(double x) {
    // erfc keeps relative precision in the lower tail; the upper tail loses
    // only absolute precision ~1e-17, irrelevant at double.
    return 0.5 * std::erfc(-x / kSqrt2);
}

double std_normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / kSqrt2Pi;
}

namespace {

// Rational approximation of the probit function (Acklam), |rel err| < 1.2e-9
// over (0,1). Refined below, so the final accuracy is set by std_normal_cdf.
double probit_estimate(double p) {
    static const double a[6] = {
        -3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
        1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[5] = {
        -5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
        6.680131188771972e+01,  -1.328068155288572e+01};
    static const double c[6] = {
        -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
        -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[4] = {
        7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
        3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    if (p < p_low) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double q = p - 0.5;
    double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        raise(ErrorCode::domain,
              "std_normal_quantile: p must lie strictly in (0,1), got " + std::to_string(p));
    }
    double x = probit_estimate(p);
    // One Halley step on F(x) = cdf(x) - p.
    double err = std_normal_cdf(x) - p;
    double u = err * kSqrt2Pi * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

namespace {

constexpr int kGammaMaxIter = 500;
constexpr double kGammaEps = 1e-16;

// Series for P(a,x), valid/efficient for x < a+1.
double gamma_p_series(double a, double x) {
    double sum = 1.0 / a;
    double term = sum;
    for (int n = 1; n <= kGammaMaxIter; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * kGammaEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Lentz continued fraction for Q(a,x), x >= a+1.
double gamma_q_cf(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kGammaMaxIter; ++i) {
        double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kGammaEps) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double regularized_gamma_p(double a, double x) {
    if (!(a > 0.0) || x < 0.0) {
        raise(ErrorCode::domain, "regularized_gamma_p: requires a > 0, x >= 0");
    }
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_cf(a, x);
}

double regularized_gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0) {
        raise(ErrorCode::domain, "regularized_gamma_q: requires a > 0, x >= 0");
    }
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

namespace {

void check_chi2_args(double x, int k) {
    if (k < 1) raise(ErrorCode::domain, "chi2: degrees of freedom must be >= 1");
    if (x < 0.0) raise(ErrorCode::domain, "chi2: argument must be >= 0");
}

}  // namespace

double chi2_sf(double x, int k) {
    check_chi2_args(x, k);
    return regularized_gamma_q(0.5 * k, 0.5 * x);
}

double chi2_cdf(double x, int k) {
    check_chi2_args(x, k);
    return regularized_gamma_p(0.5 * k, 0.5 * x);
}

double chi2_pdf(double x, int k) {
    check_chi2_args(x, k);
    double half_k = 0.5 * k;
    if (x == 0.0) {
        if (k == 1) return std::numeric_limits<double>::infinity();
        if (k == 2) return 0.5;
        return 0.0;
    }
    return std::exp((half_k - 1.0) * std::log(x) - 0.5 * x - std::lgamma(half_k) -
                    half_k * std::log(2.0));
}

double chi2_quantile(double p, int k) {
    if (k < 1) raise(ErrorCode::domain, "chi2_quantile: degrees of freedom must be >= 1");
    if (!(p > 0.0 && p < 1.0)) {
        raise(ErrorCode::domain, "chi2_quantile: p must lie strictly in (0,1)");
    }
    // Wilson-Hilferty start, then safeguarded Newton on cdf(x) - p.
    double z = std_normal_quantile(p);
    double t = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
    double x = k * t * t * t;
    if (!(x > 0.0)) x = 0.5 * k;

    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 200; ++iter) {
        double f = chi2_cdf(x, k) - p;
        if (f > 0.0) {
            hi = x;
        } else {
            lo = x;
        }
        double deriv = chi2_pdf(x, k);
        double step = f / deriv;
        double next = x - step;
        if (!(next > lo && (next < hi))) {
            next = std::isinf(hi) ? 2.0 * x : 0.5 * (lo + hi);
        }
        if (std::abs(next - x) <= 1e-14 * std::max(1.0, std::abs(x))) {
            x = next;
            break;
        }
        x = next;
    }
    return x;
}

const char* error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::ok: return "ok";
        case ErrorCode::schema: return "schema";
        case ErrorCode::parse: return "parse";
        case ErrorCode::empty_input: return "empty-input";
        case ErrorCode::dimension: return "dimension";
        case ErrorCode::domain: return "domain";
        case ErrorCode::ties: return "ties";
        case ErrorCode::degenerate: return "degenerate";
        case ErrorCode::singular: return "singular";
        case ErrorCode::too_large: return "too-large";
        case ErrorCode::coupling_undefined: return "coupling-undefined";
        case ErrorCode::io: return "io";
        case ErrorCode::usage: return "usage";
        case ErrorCode::internal: return "internal";
    }
    return "unknown";
}

}  // namespace strata
