#include "smsnme/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "smsnme/errors.hpp"

namespace smsnme {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
}

double norm_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

double log_norm_cdf(double z) {
    if (z < -37.0) {
        // Mills-ratio series; erfc underflows past this point.
        const double z2 = z * z;
        const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
        return -0.5 * z2 - 0.5 * kLogTwoPi - std::log(-z) + std::log(series);
    }
    if (z < 0.0) {
        return std::log(0.5 * std::erfc(-z * kInvSqrt2));
    }
    return std::log1p(-0.5 * std::erfc(z * kInvSqrt2));
}

double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw ParameterError("norm_quantile: probability must lie in (0, 1)");
    }
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double log_student_t_cdf(double t, double dof) {
    const boost::math::students_t_distribution<double> dist(dof);
    if (t >= 0.0) {
        return std::log1p(-boost::math::cdf(boost::math::complement(dist, t)));
    }
    const double lower = boost::math::cdf(dist, t);
    if (lower > 0.0) {
        return std::log(lower);
    }
    // Far lower tail: F(t) ~ f(t) |t| / dof.
    const double log_pdf = std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) -
                           0.5 * std::log(dof * std::numbers::pi) -
                           0.5 * (dof + 1.0) * std::log1p(t * t / dof);
    return log_pdf + std::log(-t / dof);
}

double log_sum_exp(std::span<const double> values) {
    if (values.empty()) {
        return -std::numeric_limits<double>::infinity();
    }
    const double top = *std::max_element(values.begin(), values.end());
    if (!std::isfinite(top)) {
        return top;
    }
    double acc = 0.0;
    for (double v : values) {
        acc += std::exp(v - top);
    }
    return top + std::log(acc);
}

double log_add_exp(double a, double b) {
    if (a < b) {
        std::swap(a, b);
    }
    if (!std::isfinite(a)) {
        return a;
    }
    return a + std::log1p(std::exp(b - a));
}

QuadratureResult integrate_adaptive(const std::function<double(double)> &f, double a, double b,
                                    double rel_tol, double abs_tol, std::size_t max_subdivisions) {
    using Rule = boost::math::quadrature::gauss_kronrod<double, 21>;
    struct Panel {
        double lo, hi, value, error;
        bool operator<(const Panel &other) const { return error < other.error; }
    };
    auto eval = [&](double lo, double hi) {
        double err = 0.0;
        const double v = Rule::integrate(f, lo, hi, 0, 0.0, &err);
        return Panel{lo, hi, v, err};
    };

    std::priority_queue<Panel> panels;
    panels.push(eval(a, b));
    double total = panels.top().value;
    double total_err = panels.top().error;
    std::size_t count = 1;

    auto converged = [&] { return total_err <= std::max(abs_tol, rel_tol * std::abs(total)); };
    while (!converged()) {
        if (count >= max_subdivisions) {
            std::ostringstream msg;
            msg << "adaptive quadrature on [" << a << ", " << b << "] did not converge after "
                << count << " subdivisions: estimate " << total << ", error " << total_err
                << ", requested relative tolerance " << rel_tol;
            throw NumericalError(msg.str());
        }
        const Panel worst = panels.top();
        panels.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        const Panel left = eval(worst.lo, mid);
        const Panel right = eval(mid, worst.hi);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        panels.push(left);
        panels.push(right);
        ++count;
    }
    // Re-sum to drop the drift accumulated by the incremental updates.
    double sum = 0.0;
    double err = 0.0;
    std::vector<Panel> all;
    all.reserve(panels.size());
    while (!panels.empty()) {
        all.push_back(panels.top());
        panels.pop();
    }
    std::sort(all.begin(), all.end(), [](const Panel &x, const Panel &y) { return x.lo < y.lo; });
    for (const auto &p : all) {
        sum += p.value;
        err += p.error;
    }
    return {sum, err, count};
}

} // namespace smsnme
