// Student t and F tail probabilities via the regularized incomplete beta function.
#pragma once

namespace scalarexp::dist {

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

/// P(T <= t) for Student's t with `df` degrees of freedom.
double student_t_cdf(double t, double df);
/// Two-sided P(|T| >= |t|).
double student_t_two_sided_p(double t, double df);
/// Quantile of Student's t (bisection on the cdf).
double student_t_quantile(double p, double df);

/// Upper tail P(F >= f) for the F distribution with (d1, d2) degrees of freedom.
double f_survival(double f, double d1, double d2);

}  // namespace scalarexp::dist
