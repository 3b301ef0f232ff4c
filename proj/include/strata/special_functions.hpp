#pragma once

namespace strata {

// Standard normal cumulative distribution function.
// Relative accuracy a few ulps (complementary error function based, so the
// tails keep full relative precision).
double std_normal_cdf(double x);

// Standard normal density.
double std_normal_pdf(double x);

// Inverse of std_normal_cdf on (0,1). Rational initial approximation
// refined with one Halley step against std_normal_cdf, which pins the
// round-trip error |cdf(quantile(p)) - p| well below 1e-12.
// Throws Error(domain) for p outside (0,1).
double std_normal_quantile(double p);

// Regularized lower/upper incomplete gamma functions P(a,x) and Q(a,x),
// a > 0, x >= 0. Series expansion for x < a+1, Lentz continued fraction
// otherwise.
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

// Chi-squared distribution with k >= 1 degrees of freedom.
double chi2_sf(double x, int k);        // survival function Q(k/2, x/2)
double chi2_cdf(double x, int k);
double chi2_pdf(double x, int k);
// Lower-tail quantile: chi2_cdf(chi2_quantile(p, k), k) == p.
double chi2_quantile(double p, int k);

}  // namespace strata
