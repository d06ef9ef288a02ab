#include "smsnme/kernels.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <sstream>

#include "smsnme/errors.hpp"
#include "smsnme/numerics.hpp"

namespace smsnme {

MeDensityCache::MeDensityCache(const MeTheta &theta)
    : dim_(theta.dim()), family_(theta.family), sf_(theta.sf), a_(theta.a()) {
    theta.validate();
    const Vector b = theta.b();
    omega_inv_ = theta.omega2.cwiseInverse();
    omega_inv_b_ = omega_inv_.cwiseProduct(b);
    s_ = b.dot(omega_inv_b_);
    const double log_det_omega = theta.omega2.array().log().sum();
    const double b_norm = b.norm();
    components_.reserve(static_cast<std::size_t>(theta.groups()));
    for (int j = 0; j < theta.groups(); ++j) {
        Component c;
        c.log_weight = std::log(theta.weights(j));
        c.mu = theta.mu(j);
        c.delta = theta.delta(j);
        c.c = theta.gamma2(j) + c.delta * c.delta;
        c.one_plus_cs = 1.0 + c.c * s_;
        c.log_det = log_det_omega + std::log(c.one_plus_cs);
        c.skewed = is_skewed(family_) && std::abs(c.delta) * b_norm >= 1e-12;
        c.skew_scale = c.delta / std::sqrt(c.one_plus_cs * (1.0 + theta.gamma2(j) * s_));
        components_.push_back(c);
    }
}

double MeDensityCache::row_log_density(std::span<const double> z) const {
    double ee = 0.0;
    double be = 0.0;
    for (int k = 0; k < dim_; ++k) {
        const double e = z[static_cast<std::size_t>(k)] - a_(k);
        ee += e * e * omega_inv_(k);
        be += e * omega_inv_b_(k);
    }
    double terms[16];
    std::vector<double> spill;
    double *buf = terms;
    if (components_.size() > 16) {
        spill.resize(components_.size());
        buf = spill.data();
    }
    std::size_t used = 0;
    for (const auto &c : components_) {
        if (!std::isfinite(c.log_weight)) {
            continue;
        }
        const double bd = be - c.mu * s_;
        const double dd = ee - 2.0 * c.mu * be + c.mu * c.mu * s_;
        DensityTerms t;
        t.mahalanobis = std::max(0.0, dd - c.c * bd * bd / c.one_plus_cs);
        t.log_det = c.log_det;
        t.skew_arg = c.skewed ? c.skew_scale * bd : 0.0;
        t.skewed = c.skewed;
        buf[used++] = c.log_weight + smsn_log_density(t, dim_, family_, sf_);
    }
    return log_sum_exp(std::span<const double>(buf, used));
}

namespace {

std::span<const double> row_span(const Dataset &data, std::size_t i) {
    return {data.z().data() + i * static_cast<std::size_t>(data.dim()),
            static_cast<std::size_t>(data.dim())};
}

[[noreturn]] void rethrow_with_row(std::size_t row, const std::exception &e) {
    std::ostringstream msg;
    msg << "density evaluation failed at row " << row + 1 << ": " << e.what();
    throw NumericalError(msg.str());
}

void check_output(const Dataset &data, std::span<double> out) {
    if (out.size() != data.size()) {
        throw ParameterError("output span length differs from the number of rows");
    }
}

} // namespace

void row_log_densities_serial(const MeTheta &theta, const Dataset &data, std::span<double> out) {
    check_output(data, out);
    if (theta.dim() != data.dim()) {
        throw ParameterError("parameter and data dimensions disagree");
    }
    const MeDensityCache cache(theta);
    for (std::size_t i = 0; i < data.size(); ++i) {
        try {
            out[i] = cache.row_log_density(row_span(data, i));
        } catch (const NumericalError &e) {
            rethrow_with_row(i, e);
        }
    }
}

void row_log_densities_parallel(const MeTheta &theta, const Dataset &data, std::span<double> out) {
    check_output(data, out);
    if (theta.dim() != data.dim()) {
        throw ParameterError("parameter and data dimensions disagree");
    }
    const MeDensityCache cache(theta);
    const auto n = static_cast<long>(data.size());
    long failed_row = -1;
    std::string failure;
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
        try {
            out[static_cast<std::size_t>(i)] =
                cache.row_log_density(row_span(data, static_cast<std::size_t>(i)));
        } catch (const std::exception &e) {
#pragma omp critical(smsnme_row_failure)
            if (failed_row < 0 || i < failed_row) {
                failed_row = i;
                failure = e.what();
            }
        }
    }
    if (failed_row >= 0) {
        rethrow_with_row(static_cast<std::size_t>(failed_row), NumericalError(failure));
    }
}

Matrix loglik_matrix_serial(std::span<const MeTheta> draws, const Dataset &data) {
    Matrix out(static_cast<Eigen::Index>(draws.size()), static_cast<Eigen::Index>(data.size()));
    std::vector<double> row(data.size());
    for (std::size_t l = 0; l < draws.size(); ++l) {
        row_log_densities_serial(draws[l], data, row);
        for (std::size_t i = 0; i < data.size(); ++i) {
            out(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(i)) = row[i];
        }
    }
    return out;
}

Matrix loglik_matrix_parallel(std::span<const MeTheta> draws, const Dataset &data) {
    const auto draw_count = static_cast<long>(draws.size());
    const auto n = data.size();
    Matrix out(draw_count, static_cast<Eigen::Index>(n));
    long failed_draw = -1;
    std::string failure;
#pragma omp parallel
    {
        std::vector<double> row(n);
#pragma omp for schedule(dynamic, 4)
        for (long l = 0; l < draw_count; ++l) {
            try {
                row_log_densities_serial(draws[static_cast<std::size_t>(l)], data, row);
                for (std::size_t i = 0; i < n; ++i) {
                    out(l, static_cast<Eigen::Index>(i)) = row[i];
                }
            } catch (const std::exception &e) {
#pragma omp critical(smsnme_draw_failure)
                if (failed_draw < 0 || l < failed_draw) {
                    failed_draw = l;
                    failure = e.what();
                }
            }
        }
    }
    if (failed_draw >= 0) {
        std::ostringstream msg;
        msg << "draw " << failed_draw + 1 << ": " << failure;
        throw NumericalError(msg.str());
    }
    return out;
}

} // namespace smsnme
