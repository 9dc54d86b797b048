#pragma once

namespace mlexp::dist {

/// P(a, x), lower regularized incomplete gamma.
double gamma_p(double a, double x);
/// Q(a, x) = 1 - P(a, x), computed directly for accuracy in the tail.
double gamma_q(double a, double x);
/// I_x(a, b), regularized incomplete beta.
double beta_inc(double x, double a, double b);

double normal_cdf(double x);
double normal_sf(double x);
/// Inverse of normal_cdf on (0, 1).
double normal_quantile(double p);

double t_cdf(double x, double df);
/// P(|T| >= |t|).
double t_two_sided(double t, double df);

double chi2_cdf(double x, double df);
double chi2_sf(double x, double df);

double f_cdf(double x, double d1, double d2);
double f_sf(double x, double d1, double d2);

}  // namespace mlexp::dist
