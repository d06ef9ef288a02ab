#include "smsnme/me_model.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "smsnme/errors.hpp"
#include "smsnme/kernels.hpp"

namespace smsnme {

Vector MeTheta::a() const {
    Vector out(dim());
    out(0) = 0.0;
    out.tail(responses()) = alpha;
    return out;
}

Vector MeTheta::b() const {
    Vector out(dim());
    out(0) = 1.0;
    out.tail(responses()) = beta;
    return out;
}

void MeTheta::validate() const {
    const auto r = alpha.size();
    const auto g = mu.size();
    if (r < 1 || beta.size() != r || omega2.size() != r + 1) {
        throw ParameterError("alpha, beta and omega2 dimensions disagree");
    }
    if (g < 1 || delta.size() != g || gamma2.size() != g || weights.size() != g) {
        throw ParameterError("component parameter vectors must all have length G");
    }
    if (!(gamma2.array() > 0.0).all() || !(omega2.array() > 0.0).all()) {
        throw ParameterError("gamma2 and omega2 must be positive");
    }
    if (!alpha.allFinite() || !beta.allFinite() || !mu.allFinite() || !delta.allFinite() ||
        !gamma2.allFinite() || !omega2.allFinite()) {
        throw ParameterError("parameters must be finite");
    }
    if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-8) {
        throw ParameterError("weights must lie on the probability simplex");
    }
    if (!is_skewed(family) && delta.cwiseAbs().maxCoeff() != 0.0) {
        throw ParameterError("symmetric families require zero shape parameters");
    }
    validate_scale_factor(family, sf);
}

Dataset::Dataset(RowMatrix z, std::vector<std::string> column_names)
    : z_(std::move(z)), names_(std::move(column_names)) {
    if (z_.rows() < 1) {
        throw InputError("dataset must contain at least one row");
    }
    if (z_.cols() < 2) {
        throw InputError("dataset needs a covariate column and at least one response column");
    }
    if (!z_.allFinite()) {
        throw InputError("dataset contains missing or non-finite entries");
    }
    if (names_.empty()) {
        names_.push_back("X");
        for (Eigen::Index k = 1; k < z_.cols(); ++k) {
            names_.push_back("Y" + std::to_string(k));
        }
    }
    if (names_.size() != static_cast<std::size_t>(z_.cols())) {
        throw InputError("column name count differs from the column count");
    }
}

Dataset Dataset::replicated(std::size_t times) const {
    RowMatrix out(z_.rows() * static_cast<Eigen::Index>(times), z_.cols());
    for (std::size_t k = 0; k < times; ++k) {
        out.middleRows(static_cast<Eigen::Index>(k) * z_.rows(), z_.rows()) = z_;
    }
    return Dataset(std::move(out), names_);
}

InducedMixture induced_mixture(const MeTheta &theta) {
    theta.validate();
    const Vector a = theta.a();
    const Vector b = theta.b();
    const int p = theta.dim();
    const int r = theta.responses();
    InducedMixture out;
    out.weights = theta.weights;
    out.family = theta.family;
    out.sf = theta.sf;
    for (int j = 0; j < theta.groups(); ++j) {
        const double g2 = theta.gamma2(j);
        out.xi.push_back(a + theta.mu(j) * b);
        out.lambda_shape.push_back(theta.delta(j) * b);
        // Block form: [g2 + w0, g2 beta^T; g2 beta, g2 beta beta^T + Omega_e]
        Matrix sigma(p, p);
        sigma(0, 0) = g2 + theta.omega2(0);
        sigma.block(0, 1, 1, r) = g2 * theta.beta.transpose();
        sigma.block(1, 0, r, 1) = g2 * theta.beta;
        sigma.block(1, 1, r, r) = g2 * theta.beta * theta.beta.transpose();
        sigma.block(1, 1, r, r).diagonal() += theta.omega2.tail(r);
        out.sigma.push_back(std::move(sigma));
    }
    return out;
}

MixtureSpec InducedMixture::to_mixture() const {
    std::vector<SmsnParams> comps;
    comps.reserve(xi.size());
    for (std::size_t j = 0; j < xi.size(); ++j) {
        comps.emplace_back(xi[j], sigma[j], lambda_shape[j], family, sf);
    }
    return MixtureSpec(std::move(comps), weights);
}

double observed_loglik(const MeTheta &theta, const Dataset &data, double clone_weight) {
    std::vector<double> rows(data.size());
    row_log_densities_parallel(theta, data, rows);
    double total = 0.0;
    for (double v : rows) {
        total += v;
    }
    return clone_weight * total;
}

double observed_loglik_via_mixture(const MeTheta &theta, const Dataset &data) {
    if (theta.dim() != data.dim()) {
        throw ParameterError("parameter and data dimensions disagree");
    }
    const MixtureSpec spec = induced_mixture(theta).to_mixture();
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        total += mixture_log_pdf(data.row(i), spec);
    }
    return total;
}

SimulatedData simulate_me(const MeTheta &theta, std::size_t n, Rng &rng) {
    theta.validate();
    if (n == 0) {
        throw ParameterError("sample size must be at least 1");
    }
    const int p = theta.dim();
    const Vector a = theta.a();
    const Vector b = theta.b();
    const bool skewed = is_skewed(theta.family);
    RowMatrix z(static_cast<Eigen::Index>(n), p);
    MeLatents lat;
    lat.x.resize(n);
    lat.labels.resize(n);
    lat.u.resize(n);
    lat.t.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = draw_categorical(theta.weights, rng);
        const auto jj = static_cast<Eigen::Index>(j);
        const double u = draw_scale_factor(theta.family, theta.sf, rng);
        const double t = skewed ? std::abs(std_normal(rng)) / std::sqrt(u) : 0.0;
        const double x =
            theta.mu(jj) + theta.delta(jj) * t + std::sqrt(theta.gamma2(jj) / u) * std_normal(rng);
        for (int k = 0; k < p; ++k) {
            z(static_cast<Eigen::Index>(i), k) =
                a(k) + b(k) * x + std::sqrt(theta.omega2(k) / u) * std_normal(rng);
        }
        lat.x[i] = x;
        lat.labels[i] = j;
        lat.u[i] = u;
        lat.t[i] = t;
    }
    return {Dataset(std::move(z)), std::move(lat)};
}

void FmnigSettings::validate() const {
    const auto g = weights.size();
    if (g < 1 || mu.size() != g || lambda.size() != g || gamma.size() != g || delta.size() != g) {
        throw ParameterError("NIG component settings must all have length G");
    }
    if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-8) {
        throw ParameterError("weights must lie on the probability simplex");
    }
    if (!(gamma.array() > 0.0).all() || !(delta.array() > 0.0).all()) {
        throw ParameterError("NIG gamma and delta must be positive");
    }
    if (alpha.size() < 1 || beta.size() != alpha.size() || omega.rows() != alpha.size() + 1 ||
        omega.cols() != omega.rows()) {
        throw ParameterError("alpha, beta and Omega dimensions disagree");
    }
    if (Eigen::LLT<Matrix>(omega).info() != Eigen::Success) {
        throw ParameterError("Omega must be positive definite");
    }
    if (std::abs(omega.determinant() - 1.0) > 1e-10) {
        std::ostringstream msg;
        msg << "Omega must have determinant 1 (got " << omega.determinant() << ")";
        throw ParameterError(msg.str());
    }
}

SimulatedData simulate_fmnig_me(const FmnigSettings &settings, std::size_t n, Rng &rng) {
    settings.validate();
    if (n == 0) {
        throw ParameterError("sample size must be at least 1");
    }
    const auto p = settings.omega.rows();
    Vector a(p), b(p);
    a(0) = 0.0;
    b(0) = 1.0;
    a.tail(p - 1) = settings.alpha;
    b.tail(p - 1) = settings.beta;
    const Matrix chol = Eigen::LLT<Matrix>(settings.omega).matrixL();
    RowMatrix z(static_cast<Eigen::Index>(n), p);
    MeLatents lat;
    lat.x.resize(n);
    lat.labels.resize(n);
    lat.u.resize(n);
    lat.t.assign(n, 0.0);
    Vector e(p);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = draw_categorical(settings.weights, rng);
        const auto jj = static_cast<Eigen::Index>(j);
        const double u = ig_sample(IgParams{settings.gamma(jj), settings.delta(jj)}, rng);
        const double x = settings.mu(jj) + u * settings.lambda(jj) + std::sqrt(u) * std_normal(rng);
        for (Eigen::Index k = 0; k < p; ++k) {
            e(k) = std_normal(rng);
        }
        z.row(static_cast<Eigen::Index>(i)) = (a + b * x + std::sqrt(u) * (chol * e)).transpose();
        lat.x[i] = x;
        lat.labels[i] = j;
        lat.u[i] = u;
    }
    return {Dataset(std::move(z)), std::move(lat)};
}

MeTheta sim1_theta(Family family) {
    MeTheta t;
    t.alpha = Vector{{0.4, 0.1}};
    t.beta = Vector{{0.8, 0.9}};
    t.omega2 = Vector{{0.2, 0.3, 0.4}};
    t.mu = Vector{{2.0, 8.0}};
    t.delta = is_skewed(family) ? Vector{{-2.0, 2.0}} : Vector::Zero(2);
    t.gamma2 = Vector{{0.1, 0.1}};
    t.weights = Vector{{0.7, 0.3}};
    t.family = family;
    switch (mixing_kind(family)) {
    case MixingKind::Gamma:
    case MixingKind::Beta:
        t.sf.nu = 3.0;
        break;
    case MixingKind::TwoPoint:
        t.sf.rho = 0.7;
        t.sf.tau = 0.3;
        break;
    case MixingKind::Degenerate:
        break;
    }
    return t;
}

FmnigSettings sim2_settings() {
    FmnigSettings s;
    s.weights = Vector{{0.4, 0.3, 0.3}};
    s.mu = Vector{{-10.0, 1.0, 10.0}};
    s.lambda = Vector{{-2.0, 1.0, -2.0}};
    s.gamma = Vector::Constant(3, 1.0);
    s.delta = Vector::Constant(3, 0.5);
    s.alpha = Vector{{0.4, 0.1}};
    s.beta = Vector{{0.8, 0.9}};
    s.omega = Matrix::Identity(3, 3);
    return s;
}

} // namespace smsnme
