#include "smsnme/distributions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "smsnme/errors.hpp"
#include "smsnme/numerics.hpp"

namespace smsnme {

namespace {

constexpr double kShapeEpsilon = 1e-12;

struct FamilyInfo {
    Family family;
    std::string_view code;
    std::string_view label;
};

constexpr std::array<FamilyInfo, 8> kFamilies{{
    {Family::Normal, "fmn", "FMN-ME"},
    {Family::StudentT, "fmt", "FMT-ME"},
    {Family::Slash, "fmsl", "FMSL-ME"},
    {Family::ContaminatedNormal, "fmcn", "FMCN-ME"},
    {Family::SkewNormal, "fmsn", "FMSN-ME"},
    {Family::SkewT, "fmst", "FMST-ME"},
    {Family::SkewSlash, "fmssl", "FMSSL-ME"},
    {Family::SkewContaminatedNormal, "fmscn", "FMSCN-ME"},
}};

const FamilyInfo &info(Family family) {
    for (const auto &f : kFamilies) {
        if (f.family == family) {
            return f;
        }
    }
    throw ParameterError("unknown family");
}

Eigen::LLT<Matrix> checked_llt(const Matrix &m, const char *what) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw ParameterError(std::string(what) + " must be a non-empty square matrix");
    }
    if (!m.isApprox(m.transpose(), 1e-10)) {
        throw ParameterError(std::string(what) + " is not symmetric");
    }
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) {
        throw ParameterError(std::string(what) + " is not positive definite");
    }
    return llt;
}

double log_det_from(const Eigen::LLT<Matrix> &llt) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

// Skew factor log(2 Phi(a)) or 0 on the symmetric path.
double log_skew_factor(bool skewed, double a) {
    return skewed ? kLogTwo + log_norm_cdf(a) : 0.0;
}

double slash_log_integral(const DensityTerms &t, int dim, double nu) {
    // log of int_0^1 u^{nu - 1 + dim/2} exp(-u m / 2) [2 Phi(sqrt(u) a)] du
    const double k = nu - 1.0 + 0.5 * dim;
    const double half_m = 0.5 * t.mahalanobis;
    auto g = [&](double u) {
        return k * std::log(u) - u * half_m + log_skew_factor(t.skewed, std::sqrt(u) * t.skew_arg);
    };
    double offset = g(1.0);
    if (half_m > 0.0 && k > 0.0 && k / half_m < 1.0) {
        offset = std::max(offset, g(k / half_m));
    }
    for (int i = 0; i < 64; ++i) {
        offset = std::max(offset, g((i + 0.5) / 64.0));
    }
    auto integrand = [&](double u) { return std::exp(g(u) - offset); };
    const QuadratureResult r = integrate_adaptive(integrand, 0.0, 1.0, 1e-8, 0.0, 200);
    return offset + std::log(r.value);
}

} // namespace

bool is_skewed(Family family) {
    switch (family) {
    case Family::SkewNormal:
    case Family::SkewT:
    case Family::SkewSlash:
    case Family::SkewContaminatedNormal:
        return true;
    default:
        return false;
    }
}

MixingKind mixing_kind(Family family) {
    switch (family) {
    case Family::Normal:
    case Family::SkewNormal:
        return MixingKind::Degenerate;
    case Family::StudentT:
    case Family::SkewT:
        return MixingKind::Gamma;
    case Family::Slash:
    case Family::SkewSlash:
        return MixingKind::Beta;
    case Family::ContaminatedNormal:
    case Family::SkewContaminatedNormal:
        return MixingKind::TwoPoint;
    }
    throw ParameterError("unknown family");
}

std::string_view model_code(Family family) { return info(family).code; }

std::string model_label(Family family) { return std::string(info(family).label); }

Family family_from_code(std::string_view code) {
    for (const auto &f : kFamilies) {
        if (f.code == code) {
            return f.family;
        }
    }
    throw InputError("unknown model code '" + std::string(code) +
                     "' (expected fmn, fmt, fmsl, fmcn, fmsn, fmst, fmssl or fmscn)");
}

void validate_scale_factor(Family family, const ScaleFactor &sf) {
    switch (mixing_kind(family)) {
    case MixingKind::Degenerate:
        return;
    case MixingKind::Gamma:
    case MixingKind::Beta:
        if (!(sf.nu > 0.0) || !std::isfinite(sf.nu)) {
            throw ParameterError("scale factor nu must be a positive finite number");
        }
        return;
    case MixingKind::TwoPoint:
        if (!(sf.rho > 0.0 && sf.rho < 1.0) || !(sf.tau > 0.0 && sf.tau <= 1.0)) {
            throw ParameterError("contaminated-normal rho must lie in (0, 1) and tau in (0, 1]");
        }
        return;
    }
}

double draw_scale_factor(Family family, const ScaleFactor &sf, Rng &rng) {
    switch (mixing_kind(family)) {
    case MixingKind::Degenerate:
        return 1.0;
    case MixingKind::Gamma:
        return gamma_rate(rng, 0.5 * sf.nu, 0.5 * sf.nu);
    case MixingKind::Beta:
        return std::pow(uniform_open(rng), 1.0 / sf.nu);
    case MixingKind::TwoPoint:
        return uniform_open(rng) < sf.rho ? sf.tau : 1.0;
    }
    return 1.0;
}

OmegaLambda omega_lambda_from(const Matrix &sigma, const Vector &delta) {
    checked_llt(sigma, "sigma");
    if (delta.size() != sigma.rows()) {
        throw ParameterError("delta and sigma dimensions differ");
    }
    OmegaLambda out;
    out.omega = sigma + delta * delta.transpose();
    const Eigen::LLT<Matrix> llt = checked_llt(out.omega, "omega");
    const Vector omega_inv_delta = llt.solve(delta);
    const double quad = delta.dot(omega_inv_delta);
    out.lambda = omega_inv_delta / std::sqrt(1.0 - quad);
    return out;
}

SigmaDelta sigma_delta_from(const Matrix &omega, const Vector &lambda) {
    checked_llt(omega, "omega");
    if (lambda.size() != omega.rows()) {
        throw ParameterError("lambda and omega dimensions differ");
    }
    const Vector small_delta = lambda / std::sqrt(1.0 + lambda.dot(omega * lambda));
    SigmaDelta out;
    out.delta = omega * small_delta;
    out.sigma = omega - out.delta * out.delta.transpose();
    out.sigma = 0.5 * (out.sigma + out.sigma.transpose());
    checked_llt(out.sigma, "sigma");
    return out;
}

double smsn_log_density(const DensityTerms &t, int dim, Family family, const ScaleFactor &sf) {
    const double m = t.mahalanobis;
    const double base = -0.5 * dim * kLogTwoPi - 0.5 * t.log_det;
    switch (mixing_kind(family)) {
    case MixingKind::Degenerate:
        return base - 0.5 * m + log_skew_factor(t.skewed, t.skew_arg);
    case MixingKind::Gamma: {
        const double nu = sf.nu;
        const double log_t = std::lgamma(0.5 * (nu + dim)) - std::lgamma(0.5 * nu) -
                             0.5 * dim * std::log(nu * std::numbers::pi) - 0.5 * t.log_det -
                             0.5 * (nu + dim) * std::log1p(m / nu);
        if (!t.skewed) {
            return log_t;
        }
        const double arg = std::sqrt((nu + dim) / (nu + m)) * t.skew_arg;
        return log_t + kLogTwo + log_student_t_cdf(arg, nu + dim);
    }
    case MixingKind::Beta:
        return std::log(sf.nu) + base + slash_log_integral(t, dim, sf.nu);
    case MixingKind::TwoPoint: {
        const double tau = sf.tau;
        const double contaminated = std::log(sf.rho) + base + 0.5 * dim * std::log(tau) -
                                    0.5 * tau * m +
                                    log_skew_factor(t.skewed, std::sqrt(tau) * t.skew_arg);
        const double clean =
            std::log1p(-sf.rho) + base - 0.5 * m + log_skew_factor(t.skewed, t.skew_arg);
        return log_add_exp(contaminated, clean);
    }
    }
    return -std::numeric_limits<double>::infinity();
}

SmsnParams::SmsnParams(Vector mu, Matrix sigma, Vector delta, Family family, ScaleFactor sf)
    : mu_(std::move(mu)), sigma_(std::move(sigma)), delta_(std::move(delta)), family_(family),
      sf_(sf) {
    if (mu_.size() == 0 || sigma_.rows() != mu_.size() || delta_.size() != mu_.size()) {
        throw ParameterError("SMSN location, scale and shape dimensions disagree");
    }
    validate_scale_factor(family_, sf_);
    const Eigen::LLT<Matrix> sigma_llt = checked_llt(sigma_, "sigma");
    sigma_chol_ = sigma_llt.matrixL();
    if (!is_skewed(family_) && delta_.norm() != 0.0) {
        throw ParameterError("symmetric families require a zero shape vector");
    }
    skewed_ = is_skewed(family_) && delta_.norm() >= kShapeEpsilon;
    omega_ = sigma_ + delta_ * delta_.transpose();
    omega_llt_ = checked_llt(omega_, "omega");
    log_det_omega_ = log_det_from(omega_llt_);
    if (skewed_) {
        const Vector omega_inv_delta = omega_llt_.solve(delta_);
        lambda_ = omega_inv_delta / std::sqrt(1.0 - delta_.dot(omega_inv_delta));
    } else {
        lambda_ = Vector::Zero(mu_.size());
    }
}

DensityTerms SmsnParams::terms(const Vector &x) const {
    if (x.size() != mu_.size()) {
        throw ParameterError("density argument has the wrong dimension");
    }
    const Vector diff = x - mu_;
    const Vector half = omega_llt_.matrixL().solve(diff);
    DensityTerms t;
    t.mahalanobis = half.squaredNorm();
    t.log_det = log_det_omega_;
    t.skew_arg = skewed_ ? lambda_.dot(diff) : 0.0;
    t.skewed = skewed_;
    return t;
}

double SmsnParams::log_pdf(const Vector &x) const {
    return smsn_log_density(terms(x), dim(), family_, sf_);
}

double SmsnParams::pdf(const Vector &x) const { return std::exp(log_pdf(x)); }

Matrix smsn_sample(const SmsnParams &params, std::size_t n, Rng &rng) {
    if (n == 0) {
        throw ParameterError("sample size must be at least 1");
    }
    const int q = params.dim();
    Matrix out(static_cast<Eigen::Index>(n), q);
    Matrix chol(q, q);
    chol = Eigen::LLT<Matrix>(params.sigma()).matrixL();
    Vector z(q);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = draw_scale_factor(params.family(), params.scale_factor(), rng);
        const double inv_sqrt_u = 1.0 / std::sqrt(u);
        for (int k = 0; k < q; ++k) {
            z(k) = std_normal(rng);
        }
        Vector y = params.mu() + inv_sqrt_u * (chol * z);
        if (is_skewed(params.family())) {
            const double t = std::abs(std_normal(rng)) * inv_sqrt_u;
            y += params.delta() * t;
        }
        out.row(static_cast<Eigen::Index>(i)) = y.transpose();
    }
    return out;
}

SmsnParams affine_transform(const SmsnParams &params, const Matrix &c, const Vector &d) {
    if (c.cols() != params.dim() || c.rows() != d.size()) {
        throw ParameterError("affine map dimensions do not match the distribution");
    }
    Eigen::FullPivLU<Matrix> lu(c);
    if (c.rows() > c.cols() || lu.rank() != c.rows()) {
        throw ParameterError("affine map matrix must have full row rank");
    }
    Matrix sigma = c * params.sigma() * c.transpose();
    sigma = 0.5 * (sigma + sigma.transpose());
    return SmsnParams(c * params.mu() + d, sigma, c * params.delta(), params.family(),
                      params.scale_factor());
}

double truncated_normal_sample(double mu, double var, double lower, Rng &rng) {
    if (!(var > 0.0)) {
        throw ParameterError("truncated normal variance must be positive");
    }
    const double sd = std::sqrt(var);
    if (lower == -std::numeric_limits<double>::infinity()) {
        return mu + sd * std_normal(rng);
    }
    const double alpha = (lower - mu) / sd;
    double z;
    if (alpha > 30.0) {
        // Exponential proposal with the optimal rate; erfc underflows out here.
        const double rate = 0.5 * (alpha + std::sqrt(alpha * alpha + 4.0));
        do {
            z = alpha - std::log(uniform_open(rng)) / rate;
        } while (uniform_open(rng) > std::exp(-0.5 * (z - rate) * (z - rate)));
    } else {
        // Upper-tail inverse CDF: 1 - Phi(z) = (1 - u)(1 - Phi(alpha)).
        const double tail = std::erfc(alpha / std::numbers::sqrt2);
        z = std::numbers::sqrt2 * boost::math::erfc_inv((1.0 - uniform_open(rng)) * tail);
    }
    const double x = mu + sd * z;
    return x > lower ? x : std::nextafter(lower, std::numeric_limits<double>::infinity());
}

double truncated_gamma_sample(double shape, double rate, double lower, double upper, Rng &rng) {
    if (!(shape > 0.0) || !(rate > 0.0) || !(lower < upper) || lower < 0.0) {
        throw NumericalError("invalid truncated gamma parameters");
    }
    const double p_lo = lower > 0.0 ? boost::math::gamma_p(shape, rate * lower) : 0.0;
    const double p_hi = std::isfinite(upper) ? boost::math::gamma_p(shape, rate * upper) : 1.0;
    const double mass = p_hi - p_lo;
    if (mass > 1e-280) {
        const double v = p_lo + uniform_open(rng) * mass;
        double x = v >= 1.0 ? upper : boost::math::gamma_p_inv(shape, v) / rate;
        return std::clamp(x, std::nextafter(lower, upper), std::nextafter(upper, lower));
    }
    if (lower == 0.0) {
        // rate -> 0 limit: density proportional to x^{shape - 1} on (0, upper).
        return upper * std::pow(uniform_open(rng), 1.0 / shape);
    }
    throw NumericalError("truncated gamma interval carries no representable mass");
}

double truncated_gamma_unit_sample(double shape, double rate, Rng &rng) {
    return truncated_gamma_sample(shape, rate, 0.0, 1.0, rng);
}

void validate(const IgParams &params) {
    if (!(params.gamma > 0.0) || !(params.delta > 0.0)) {
        throw ParameterError("inverse Gaussian requires gamma > 0 and delta > 0");
    }
}

double ig_log_pdf(double u, const IgParams &params) {
    validate(params);
    if (!(u > 0.0)) {
        throw ParameterError("inverse Gaussian density is defined for u > 0 only");
    }
    const double g = params.gamma;
    const double d = params.delta;
    return std::log(d) - 0.5 * kLogTwoPi - 1.5 * std::log(u) -
           0.5 * (d * d / u + g * g * u - 2.0 * d * g);
}

double ig_pdf(double u, const IgParams &params) { return std::exp(ig_log_pdf(u, params)); }

double ig_sample(const IgParams &params, Rng &rng) {
    validate(params);
    const double mean = params.delta / params.gamma;
    const double shape = params.delta * params.delta;
    const double nz = std_normal(rng);
    const double y = nz * nz;
    const double x = mean + mean * mean * y / (2.0 * shape) -
                     mean / (2.0 * shape) * std::sqrt(4.0 * mean * shape * y + mean * mean * y * y);
    return uniform_open(rng) <= mean / (mean + x) ? x : mean * mean / x;
}

void validate(const NigParams &params) {
    validate(IgParams{params.gamma, params.delta});
    const auto p = params.mu.size();
    if (p == 0 || params.capdelta.rows() != p || params.lambda.size() != p) {
        throw ParameterError("NIG parameter dimensions disagree");
    }
    checked_llt(params.capdelta, "NIG capdelta");
    if (std::abs(params.capdelta.determinant() - 1.0) > 1e-10) {
        std::ostringstream msg;
        msg << "NIG capdelta must have determinant 1 (got " << params.capdelta.determinant() << ")";
        throw ParameterError(msg.str());
    }
}

Matrix nig_sample(const NigParams &params, std::size_t n, Rng &rng) {
    validate(params);
    const auto p = params.mu.size();
    const Matrix chol = Eigen::LLT<Matrix>(params.capdelta).matrixL();
    const Vector shift = params.capdelta * params.lambda;
    Matrix out(static_cast<Eigen::Index>(n), p);
    Vector z(p);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = ig_sample(IgParams{params.gamma, params.delta}, rng);
        for (Eigen::Index k = 0; k < p; ++k) {
            z(k) = std_normal(rng);
        }
        out.row(static_cast<Eigen::Index>(i)) =
            (params.mu + u * shift + std::sqrt(u) * (chol * z)).transpose();
    }
    return out;
}

} // namespace smsnme
