#ifndef SMSNME_NUMERICS_HPP
#define SMSNME_NUMERICS_HPP

#include <cstddef>
#include <functional>
#include <numbers>
#include <span>

namespace smsnme {

inline constexpr double kLogTwoPi = 1.8378770664093454836;
inline constexpr double kLogTwo = std::numbers::ln2;

/// Standard normal distribution function.
double norm_cdf(double z);
/// log Phi(z); erfc-based down to z = -37, asymptotic series below.
double log_norm_cdf(double z);
/// Phi^{-1}(p) for p in (0, 1).
double norm_quantile(double p);

/// log of the standard Student-t distribution function with `dof` degrees of freedom.
double log_student_t_cdf(double t, double dof);

double log_sum_exp(std::span<const double> values);
double log_add_exp(double a, double b);

struct QuadratureResult {
    double value;
    double abs_error;
    std::size_t subdivisions;
};

/** \brief Globally adaptive Gauss-Kronrod (21-point) quadrature on [a, b].
 *
 * The interval with the largest error estimate is bisected until the total
 * error estimate is below max(rel_tol * |value|, abs_tol) or `max_subdivisions`
 * intervals exist. Throws NumericalError on non-convergence, with the reached
 * estimate and error in the message.
 */
QuadratureResult integrate_adaptive(const std::function<double(double)> &f, double a, double b,
                                    double rel_tol = 1e-8, double abs_tol = 0.0,
                                    std::size_t max_subdivisions = 200);

} // namespace smsnme

#endif
