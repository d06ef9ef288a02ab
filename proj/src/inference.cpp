#include "smsnme/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "smsnme/errors.hpp"
#include "smsnme/kernels.hpp"
#include "smsnme/numerics.hpp"

namespace smsnme {

namespace {

constexpr double kTargetAcceptance = 0.35;

double clamp_variance(double v) { return std::max(v, kVarianceFloor); }

// Draw from N(P^{-1} rhs, P^{-1}) for a small SPD precision P.
Vector draw_gaussian_canonical(const Matrix &precision, const Vector &rhs, Rng &rng) {
    Eigen::LLT<Matrix> llt(precision);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("conditional precision matrix is not positive definite");
    }
    const Vector mean = llt.solve(rhs);
    Vector z(rhs.size());
    for (Eigen::Index k = 0; k < z.size(); ++k) {
        z(k) = std_normal(rng);
    }
    return mean + llt.matrixU().solve(z);
}

Vector draw_dirichlet(const Vector &conc, Rng &rng) {
    Vector out(conc.size());
    for (Eigen::Index j = 0; j < conc.size(); ++j) {
        out(j) = gamma_rate(rng, conc(j), 1.0);
    }
    const double total = out.sum();
    if (!(total > 0.0)) {
        // All gamma draws underflowed (tiny concentrations): put the mass on one index.
        out.setZero();
        out(static_cast<Eigen::Index>(draw_categorical(conc, rng))) = 1.0;
        return out;
    }
    return out / total;
}

std::vector<double> kmeans_1d(std::vector<double> values, int k, std::vector<std::size_t> &labels) {
    const std::size_t n = values.size();
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> centers(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        const double q = (j + 0.5) / k;
        centers[static_cast<std::size_t>(j)] =
            sorted[std::min(n - 1, static_cast<std::size_t>(q * static_cast<double>(n)))];
    }
    labels.assign(n, 0);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            for (std::size_t j = 1; j < centers.size(); ++j) {
                if (std::abs(values[i] - centers[j]) < std::abs(values[i] - centers[best])) {
                    best = j;
                }
            }
            changed = changed || labels[i] != best;
            labels[i] = best;
        }
        std::vector<double> sum(centers.size(), 0.0);
        std::vector<std::size_t> count(centers.size(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            sum[labels[i]] += values[i];
            ++count[labels[i]];
        }
        for (std::size_t j = 0; j < centers.size(); ++j) {
            if (count[j] > 0) {
                centers[j] = sum[j] / static_cast<double>(count[j]);
            }
        }
        if (!changed && iter > 0) {
            break;
        }
    }
    // Order clusters by center so that component 1 has the smallest location.
    std::vector<std::size_t> order(centers.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return centers[x] < centers[y]; });
    std::vector<std::size_t> rank(centers.size());
    std::vector<double> out(centers.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
        rank[order[r]] = r;
        out[r] = centers[order[r]];
    }
    for (auto &l : labels) {
        l = rank[l];
    }
    return out;
}

} // namespace

void PriorSpec::validate() const {
    auto positive = [](const Vector &v) { return v.size() >= 1 && (v.array() > 0.0).all(); };
    for (const NormalPrior *np : {&alpha, &beta, &mu, &delta}) {
        if (!positive(np->variance) || np->mean.size() < 1) {
            throw ParameterError("normal prior variances must be positive");
        }
    }
    if (!(e > 0 && g > 0 && h > 0 && l > 0 && m > 0) || !positive(kappa)) {
        throw ParameterError("gamma and Dirichlet hyperparameters must be positive");
    }
    if (!(lambda0 > 0.0 && lambda0 < lambda1)) {
        throw ParameterError("need 0 < lambda0 < lambda1");
    }
    if (!(phi_sl > 0 && psi_sl > 0 && rho0 > 0 && rho1 > 0 && tau0 > 0 && tau1 > 0)) {
        throw ParameterError("scale-factor hyperparameters must be positive");
    }
}

void McmcConfig::validate() const {
    if (!(iterations > burn_in) || thin < 1) {
        throw ParameterError("MCMC config needs iterations > burn-in and thinning >= 1");
    }
    if (clone_factor < 1) {
        throw ParameterError("clone factor must be at least 1");
    }
}

void Chain::refresh_label_summary() {
    latent_modal_label.assign(rows, 0);
    if (draws.empty() || labels.size() != draws.size() * rows) {
        return;
    }
    std::vector<std::size_t> counts(static_cast<std::size_t>(groups));
    for (std::size_t i = 0; i < rows; ++i) {
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t l = 0; l < draws.size(); ++l) {
            ++counts[labels[l * rows + i]];
        }
        latent_modal_label[i] = static_cast<std::size_t>(
            std::max_element(counts.begin(), counts.end()) - counts.begin());
    }
}

MeTheta sample_prior(int responses, int groups, Family family, const PriorSpec &prior, Rng &rng,
                     LatentState *hyper) {
    prior.validate();
    MeTheta t;
    t.family = family;
    auto normal_vec = [&](const NormalPrior &np, int size) {
        Vector v(size);
        for (int k = 0; k < size; ++k) {
            v(k) = np.mean_at(k) + std::sqrt(np.variance_at(k)) * std_normal(rng);
        }
        return v;
    };
    t.alpha = normal_vec(prior.alpha, responses);
    t.beta = normal_vec(prior.beta, responses);
    t.mu = normal_vec(prior.mu, groups);
    t.delta = is_skewed(family) ? normal_vec(prior.delta, groups) : Vector::Zero(groups);
    const double f = gamma_rate(rng, prior.g, prior.h);
    t.gamma2.resize(groups);
    for (int j = 0; j < groups; ++j) {
        t.gamma2(j) = clamp_variance(1.0 / gamma_rate(rng, prior.e, f));
    }
    t.omega2.resize(responses + 1);
    for (int k = 0; k <= responses; ++k) {
        t.omega2(k) = clamp_variance(1.0 / gamma_rate(rng, prior.l, prior.m));
    }
    Vector conc(groups);
    for (int j = 0; j < groups; ++j) {
        conc(j) = prior.kappa_at(j);
    }
    t.weights = draw_dirichlet(conc, rng);
    double lambda = 0.5 * (prior.lambda0 + prior.lambda1);
    switch (mixing_kind(family)) {
    case MixingKind::Gamma:
        lambda = prior.lambda0 + (prior.lambda1 - prior.lambda0) * uniform_open(rng);
        t.sf.nu = -std::log(uniform_open(rng)) / lambda;
        break;
    case MixingKind::Beta:
        t.sf.nu = gamma_rate(rng, prior.phi_sl, prior.psi_sl);
        break;
    case MixingKind::TwoPoint:
        t.sf.rho = beta_draw(rng, prior.rho0, prior.rho1);
        t.sf.tau = beta_draw(rng, prior.tau0, prior.tau1);
        break;
    case MixingKind::Degenerate:
        break;
    }
    if (hyper != nullptr) {
        hyper->f = f;
        hyper->lambda = lambda;
    }
    return t;
}

GibbsSampler::GibbsSampler(Dataset data, int groups, Family family, PriorSpec prior,
                           McmcConfig config)
    : data_(std::move(data)), n_(data_.size()), groups_(groups), family_(family),
      skewed_(is_skewed(family)), prior_(std::move(prior)), config_(config),
      rng_(make_stream(config.seed, config.stream)) {
    prior_.validate();
    config_.validate();
    if (groups_ < 1 || groups_ > 255) {
        throw ParameterError("number of components must lie in [1, 255]");
    }
    if (n_ < static_cast<std::size_t>(groups_)) {
        throw ParameterError("need at least as many observations as components");
    }
    initialize();
}

void GibbsSampler::initialize() {
    const int r = data_.responses();
    const std::size_t m = n_ * config_.clone_factor;
    const auto &z = data_.z();

    std::vector<double> xs(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        xs[i] = z(static_cast<Eigen::Index>(i), 0);
    }
    std::vector<std::size_t> labels;
    const std::vector<double> centers = kmeans_1d(xs, groups_, labels);

    const double x_mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n_);
    double x_var = 0.0;
    for (double v : xs) {
        x_var += (v - x_mean) * (v - x_mean);
    }
    x_var /= static_cast<double>(n_);

    theta_.family = family_;
    theta_.alpha.resize(r);
    theta_.beta.resize(r);
    theta_.omega2.resize(r + 1);
    for (int k = 0; k < r; ++k) {
        double y_mean = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            y_mean += z(static_cast<Eigen::Index>(i), k + 1);
        }
        y_mean /= static_cast<double>(n_);
        double cov = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            cov += (xs[i] - x_mean) * (z(static_cast<Eigen::Index>(i), k + 1) - y_mean);
        }
        cov /= static_cast<double>(n_);
        const double slope = x_var > 1e-12 ? cov / x_var : 0.0;
        theta_.beta(k) = slope;
        theta_.alpha(k) = y_mean - slope * x_mean;
        double resid = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double e = z(static_cast<Eigen::Index>(i), k + 1) - theta_.alpha(k) - slope * xs[i];
            resid += e * e;
        }
        theta_.omega2(k + 1) = clamp_variance(resid / static_cast<double>(n_));
    }
    theta_.omega2(0) = clamp_variance(theta_.omega2.tail(r).mean());

    theta_.mu.resize(groups_);
    theta_.delta = Vector::Zero(groups_);
    theta_.gamma2.resize(groups_);
    theta_.weights.resize(groups_);
    for (int j = 0; j < groups_; ++j) {
        double sum = 0.0, sq = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < n_; ++i) {
            if (labels[i] == static_cast<std::size_t>(j)) {
                sum += xs[i];
                sq += xs[i] * xs[i];
                ++count;
            }
        }
        const double mean = count > 0 ? sum / static_cast<double>(count) : centers[static_cast<std::size_t>(j)];
        const double var = count > 1 ? sq / static_cast<double>(count) - mean * mean : x_var;
        theta_.mu(j) = mean;
        theta_.gamma2(j) = clamp_variance(var);
        theta_.weights(j) = (static_cast<double>(count) + 1.0) / static_cast<double>(n_ + groups_);
    }

    switch (mixing_kind(family_)) {
    case MixingKind::Gamma:
        theta_.sf.nu = 5.0;
        break;
    case MixingKind::Beta:
        theta_.sf.nu = 2.0;
        break;
    case MixingKind::TwoPoint:
        theta_.sf.rho = 0.5;
        theta_.sf.tau = 0.5;
        break;
    case MixingKind::Degenerate:
        break;
    }

    lat_.x.resize(m);
    lat_.s.resize(m);
    lat_.u.assign(m, 1.0);
    lat_.t.assign(m, skewed_ ? 1.0 : 0.0);
    lat_.contaminated.assign(m, 0);
    for (std::size_t i = 0; i < m; ++i) {
        lat_.x[i] = xs[data_row(i)];
        lat_.s[i] = labels[data_row(i)];
    }
    lat_.f = prior_.g / prior_.h;
    lat_.lambda = 0.5 * (prior_.lambda0 + prior_.lambda1);
}

void GibbsSampler::set_state(MeTheta theta, LatentState latents) {
    theta.validate();
    if (latents.x.size() != n_ * config_.clone_factor || latents.s.size() != latents.x.size() ||
        latents.u.size() != latents.x.size() || latents.t.size() != latents.x.size()) {
        throw ParameterError("latent state size does not match the data");
    }
    if (latents.contaminated.size() != latents.x.size()) {
        latents.contaminated.assign(latents.x.size(), 0);
    }
    theta_ = std::move(theta);
    lat_ = std::move(latents);
}

void GibbsSampler::set_data(Dataset data) {
    if (data.size() != n_ || data.dim() != data_.dim()) {
        throw ParameterError("replacement data must keep the shape of the original");
    }
    data_ = std::move(data);
}

double GibbsSampler::adapt_rate() const {
    return 1.0 / std::pow(static_cast<double>(iteration_) + 1.0, 0.6);
}

void GibbsSampler::check_finite(const char *what) const {
    auto bad = [](const Vector &v) { return !v.allFinite(); };
    if (bad(theta_.alpha) || bad(theta_.beta) || bad(theta_.mu) || bad(theta_.delta) ||
        bad(theta_.gamma2) || bad(theta_.omega2) || bad(theta_.weights) ||
        !std::isfinite(theta_.sf.nu) || !std::isfinite(theta_.sf.tau)) {
        std::ostringstream msg;
        msg << "sampler produced a non-finite value in the " << what << " update at sweep "
            << iteration_;
        throw NumericalError(msg.str());
    }
}

int GibbsSampler::u_exponent_dim() const { return data_.dim() + 1 + (skewed_ ? 1 : 0); }

double GibbsSampler::quadratic_form(std::size_t i) const {
    // U-free part of the exponent of p(Z_i | x, U) p(x | S, T, U) p(T | U).
    const auto row = static_cast<Eigen::Index>(data_row(i));
    const auto &z = data_.z();
    const double x = lat_.x[i];
    double q = (z(row, 0) - x) * (z(row, 0) - x) / theta_.omega2(0);
    for (int k = 0; k < data_.responses(); ++k) {
        const double e = z(row, k + 1) - theta_.alpha(k) - theta_.beta(k) * x;
        q += e * e / theta_.omega2(k + 1);
    }
    const auto j = static_cast<Eigen::Index>(lat_.s[i]);
    const double c = x - theta_.mu(j) - theta_.delta(j) * lat_.t[i];
    q += c * c / theta_.gamma2(j);
    if (skewed_) {
        q += lat_.t[i] * lat_.t[i];
    }
    return q;
}

void GibbsSampler::update_x() {
    const int r = data_.responses();
    const auto &z = data_.z();
    const double w0 = 1.0 / theta_.omega2(0);
    double slope_prec = w0;
    for (int k = 0; k < r; ++k) {
        slope_prec += theta_.beta(k) * theta_.beta(k) / theta_.omega2(k + 1);
    }
    for (std::size_t i = 0; i < latent_rows(); ++i) {
        const auto row = static_cast<Eigen::Index>(data_row(i));
        const auto j = static_cast<Eigen::Index>(lat_.s[i]);
        const double gj = 1.0 / theta_.gamma2(j);
        const double u = lat_.u[i];
        double num = gj * (theta_.mu(j) + theta_.delta(j) * lat_.t[i]) + w0 * z(row, 0);
        for (int k = 0; k < r; ++k) {
            num += theta_.beta(k) * (z(row, k + 1) - theta_.alpha(k)) / theta_.omega2(k + 1);
        }
        const double prec = u * (gj + slope_prec);
        lat_.x[i] = u * num / prec + std_normal(rng_) / std::sqrt(prec);
    }
}

void GibbsSampler::update_t() {
    if (!skewed_) {
        return;
    }
    for (std::size_t i = 0; i < latent_rows(); ++i) {
        const auto j = static_cast<Eigen::Index>(lat_.s[i]);
        const double g2 = theta_.gamma2(j);
        const double d = theta_.delta(j);
        const double denom = g2 + d * d;
        const double mean = d * (lat_.x[i] - theta_.mu(j)) / denom;
        const double var = g2 / (lat_.u[i] * denom);
        lat_.t[i] = truncated_normal_sample(mean, var, 0.0, rng_);
    }
}

void GibbsSampler::update_u() {
    const MixingKind kind = mixing_kind(family_);
    if (kind == MixingKind::Degenerate) {
        return;
    }
    const double half_dim = 0.5 * u_exponent_dim();
    const ScaleFactor &sf = theta_.sf;
    for (std::size_t i = 0; i < latent_rows(); ++i) {
        const double half_q = 0.5 * quadratic_form(i);
        switch (kind) {
        case MixingKind::Gamma:
            lat_.u[i] = gamma_rate(rng_, 0.5 * sf.nu + half_dim, 0.5 * sf.nu + half_q);
            break;
        case MixingKind::Beta:
            lat_.u[i] = truncated_gamma_unit_sample(sf.nu + half_dim, half_q, rng_);
            break;
        case MixingKind::TwoPoint: {
            const double log_c = std::log(sf.rho) + half_dim * std::log(sf.tau) - sf.tau * half_q;
            const double log_1 = std::log1p(-sf.rho) - half_q;
            const double prob_c = 1.0 / (1.0 + std::exp(log_1 - log_c));
            const bool c = uniform_open(rng_) < prob_c;
            lat_.contaminated[i] = c ? 1 : 0;
            lat_.u[i] = c ? sf.tau : 1.0;
            break;
        }
        case MixingKind::Degenerate:
            break;
        }
    }
}

void GibbsSampler::update_s() {
    if (groups_ == 1) {
        std::fill(lat_.s.begin(), lat_.s.end(), 0);
        return;
    }
    std::vector<double> logp(static_cast<std::size_t>(groups_));
    Vector prob(groups_);
    Vector log_w = theta_.weights.array().log();
    Vector log_g = theta_.gamma2.array().log();
    for (std::size_t i = 0; i < latent_rows(); ++i) {
        const double u = lat_.u[i];
        double top = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < groups_; ++j) {
            const double c = lat_.x[i] - theta_.mu(j) - theta_.delta(j) * lat_.t[i];
            logp[static_cast<std::size_t>(j)] =
                log_w(j) - 0.5 * log_g(j) - 0.5 * u * c * c / theta_.gamma2(j);
            top = std::max(top, logp[static_cast<std::size_t>(j)]);
        }
        for (int j = 0; j < groups_; ++j) {
            prob(j) = std::exp(logp[static_cast<std::size_t>(j)] - top);
        }
        lat_.s[i] = draw_categorical(prob, rng_);
    }
}

void GibbsSampler::update_regression() {
    const int r = data_.responses();
    const auto &z = data_.z();
    for (int k = 0; k < r; ++k) {
        Matrix prec = Matrix::Zero(2, 2);
        Vector rhs = Vector::Zero(2);
        for (std::size_t i = 0; i < latent_rows(); ++i) {
            const double u = lat_.u[i];
            const double x = lat_.x[i];
            const double y = z(static_cast<Eigen::Index>(data_row(i)), k + 1);
            prec(0, 0) += u;
            prec(0, 1) += u * x;
            prec(1, 1) += u * x * x;
            rhs(0) += u * y;
            rhs(1) += u * x * y;
        }
        const double w = 1.0 / theta_.omega2(k + 1);
        prec *= w;
        prec(1, 0) = prec(0, 1);
        rhs *= w;
        prec(0, 0) += 1.0 / prior_.alpha.variance_at(k);
        prec(1, 1) += 1.0 / prior_.beta.variance_at(k);
        rhs(0) += prior_.alpha.mean_at(k) / prior_.alpha.variance_at(k);
        rhs(1) += prior_.beta.mean_at(k) / prior_.beta.variance_at(k);
        const Vector draw = draw_gaussian_canonical(prec, rhs, rng_);
        theta_.alpha(k) = draw(0);
        theta_.beta(k) = draw(1);
    }
    check_finite("regression coefficient");
}

void GibbsSampler::update_components() {
    const int dim = skewed_ ? 2 : 1;
    std::vector<Matrix> prec(static_cast<std::size_t>(groups_), Matrix::Zero(dim, dim));
    std::vector<Vector> rhs(static_cast<std::size_t>(groups_), Vector::Zero(dim));
    for (std::size_t i = 0; i < latent_rows(); ++i) {
        const std::size_t j = lat_.s[i];
        const double u = lat_.u[i];
        const double x = lat_.x[i];
        prec[j](0, 0) += u;
        rhs[j](0) += u * x;
        if (skewed_) {
            const double t = lat_.t[i];
            prec[j](0, 1) += u * t;
            prec[j](1, 1) += u * t * t;
            rhs[j](1) += u * t * x;
        }
    }
    for (int j = 0; j < groups_; ++j) {
        auto &pj = prec[static_cast<std::size_t>(j)];
        auto &rj = rhs[static_cast<std::size_t>(j)];
        const double gj = 1.0 / theta_.gamma2(j);
        pj *= gj;
        rj *= gj;
        pj(0, 0) += 1.0 / prior_.mu.variance_at(j);
        rj(0) += prior_.mu.mean_at(j) / prior_.mu.variance_at(j);
        if (skewed_) {
            pj(1, 0) = pj(0, 1);
            pj(1, 1) += 1.0 / prior_.delta.variance_at(j);
            rj(1) += prior_.delta.mean_at(j) / prior_.delta.variance_at(j);
        }
        const Vector draw = draw_gaussian_canonical(pj, rj, rng_);
        theta_.mu(j) = draw(0);
        if (skewed_) {
            theta_.delta(j) = draw(1);
        }
    }
    check_finite("component location/shape");
}

void GibbsSampler::update_gamma() {
    std::vector<double> count(static_cast<std::size_t>(groups_), 0.0);
    std::vector<double> ss(static_cast<std::size_t>(groups_), 0.0);
    for (std::size_t i = 0; i < latent_rows(); ++i) {
        const std::size_t j = lat_.s[i];
        const auto jj = static_cast<Eigen::Index>(j);
        const double c = lat_.x[i] - theta_.mu(jj) - theta_.delta(jj) * lat_.t[i];
        count[j] += 1.0;
        ss[j] += lat_.u[i] * c * c;
    }
    double precision_sum = 0.0;
    for (int j = 0; j < groups_; ++j) {
        const auto jj = static_cast<std::size_t>(j);
        const double precision =
            gamma_rate(rng_, prior_.e + 0.5 * count[jj], lat_.f + 0.5 * ss[jj]);
        theta_.gamma2(j) = clamp_variance(1.0 / precision);
        precision_sum += 1.0 / theta_.gamma2(j);
    }
    lat_.f = gamma_rate(rng_, prior_.g + groups_ * prior_.e, prior_.h + precision_sum);
    check_finite("component scale");
}

void GibbsSampler::update_omega() {
    const int r = data_.responses();
    const auto &z = data_.z();
    std::vector<double> ss(static_cast<std::size_t>(r + 1), 0.0);
    for (std::size_t i = 0; i < latent_rows(); ++i) {
        const auto row = static_cast<Eigen::Index>(data_row(i));
        const double u = lat_.u[i];
        const double x = lat_.x[i];
        ss[0] += u * (z(row, 0) - x) * (z(row, 0) - x);
        for (int k = 0; k < r; ++k) {
            const double e = z(row, k + 1) - theta_.alpha(k) - theta_.beta(k) * x;
            ss[static_cast<std::size_t>(k + 1)] += u * e * e;
        }
    }
    const double half_rows = 0.5 * static_cast<double>(latent_rows());
    for (int k = 0; k <= r; ++k) {
        const double precision =
            gamma_rate(rng_, prior_.l + half_rows, prior_.m + 0.5 * ss[static_cast<std::size_t>(k)]);
        theta_.omega2(k) = clamp_variance(1.0 / precision);
    }
    check_finite("error scale");
}

void GibbsSampler::update_weights() {
    Vector conc(groups_);
    for (int j = 0; j < groups_; ++j) {
        conc(j) = prior_.kappa_at(j);
    }
    for (std::size_t s : lat_.s) {
        conc(static_cast<Eigen::Index>(s)) += 1.0;
    }
    theta_.weights = draw_dirichlet(conc, rng_);
    check_finite("weight");
}

void GibbsSampler::update_scale_factor() {
    switch (mixing_kind(family_)) {
    case MixingKind::Gamma:
        update_nu_skewt();
        break;
    case MixingKind::Beta:
        update_nu_slash();
        break;
    case MixingKind::TwoPoint:
        update_nu_scn();
        break;
    case MixingKind::Degenerate:
        break;
    }
    check_finite("scale factor");
}

void GibbsSampler::update_nu_skewt() {
    bool accepted = false;
    theta_.sf.nu = smsnme::update_nu_skewt(theta_.sf.nu, lat_.lambda, lat_.u, stats_.nu_step, rng_,
                                           accepted);
    lat_.lambda = update_nu_rate(theta_.sf.nu, prior_, rng_);
    if (adapting()) {
        stats_.nu_step *= std::exp(adapt_rate() * ((accepted ? 1.0 : 0.0) - kTargetAcceptance));
    } else {
        ++nu_trials_;
        nu_accepts_ += accepted ? 1 : 0;
        stats_.nu_acceptance = static_cast<double>(nu_accepts_) / static_cast<double>(nu_trials_);
    }
}

void GibbsSampler::update_nu_slash() { theta_.sf.nu = smsnme::update_nu_slash(lat_.u, prior_, rng_); }

void GibbsSampler::update_nu_scn() {
    theta_.sf.rho = update_rho_scn(lat_.contaminated, prior_, rng_);

    // tau | rest on the logit scale; only contaminated rows carry tau.
    const double half_dim = 0.5 * u_exponent_dim();
    double count = 0.0;
    double half_q_sum = 0.0;
    for (std::size_t i = 0; i < latent_rows(); ++i) {
        if (lat_.contaminated[i] != 0) {
            count += 1.0;
            half_q_sum += 0.5 * quadratic_form(i);
        }
    }
    auto log_target = [&](double tau) {
        return (prior_.tau0 - 1.0 + count * half_dim) * std::log(tau) +
               (prior_.tau1 - 1.0) * std::log1p(-tau) - tau * half_q_sum + std::log(tau) +
               std::log1p(-tau);
    };
    const double tau = theta_.sf.tau;
    const double logit = std::log(tau) - std::log1p(-tau);
    const double proposal_logit = logit + stats_.tau_step * std_normal(rng_);
    const double proposal = 1.0 / (1.0 + std::exp(-proposal_logit));
    bool accepted = false;
    if (proposal > 0.0 && proposal < 1.0 &&
        std::log(uniform_open(rng_)) < log_target(proposal) - log_target(tau)) {
        theta_.sf.tau = proposal;
        accepted = true;
        for (std::size_t i = 0; i < latent_rows(); ++i) {
            if (lat_.contaminated[i] != 0) {
                lat_.u[i] = proposal;
            }
        }
    }
    if (adapting()) {
        stats_.tau_step *= std::exp(adapt_rate() * ((accepted ? 1.0 : 0.0) - kTargetAcceptance));
    } else {
        ++tau_trials_;
        tau_accepts_ += accepted ? 1 : 0;
        stats_.tau_acceptance = static_cast<double>(tau_accepts_) / static_cast<double>(tau_trials_);
    }
}

void GibbsSampler::sweep() {
    ++iteration_;
    update_x();
    update_t();
    update_u();
    update_s();
    update_regression();
    update_components();
    update_gamma();
    update_omega();
    update_weights();
    update_scale_factor();
}

double update_nu_skewt(double nu, double lambda, std::span<const double> u, double step, Rng &rng,
                       bool &accepted) {
    double sum_u = 0.0;
    double sum_log_u = 0.0;
    for (double v : u) {
        sum_u += v;
        sum_log_u += std::log(v);
    }
    const double count = static_cast<double>(u.size());
    // Includes the log-scale Jacobian (+ log nu).
    auto log_target = [&](double v) {
        const double half = 0.5 * v;
        return count * (half * std::log(half) - std::lgamma(half)) + (half - 1.0) * sum_log_u -
               half * sum_u - lambda * v + std::log(v);
    };
    const double proposal = nu * std::exp(step * std_normal(rng));
    accepted = std::isfinite(proposal) && proposal > 0.0 &&
               std::log(uniform_open(rng)) < log_target(proposal) - log_target(nu);
    return accepted ? proposal : nu;
}

double update_nu_rate(double nu, const PriorSpec &prior, Rng &rng) {
    return truncated_gamma_sample(2.0, nu, prior.lambda0, prior.lambda1, rng);
}

double update_nu_slash(std::span<const double> u, const PriorSpec &prior, Rng &rng) {
    double sum_log_u = 0.0;
    for (double v : u) {
        sum_log_u += std::log(v);
    }
    return gamma_rate(rng, prior.phi_sl + static_cast<double>(u.size()), prior.psi_sl - sum_log_u);
}

double update_rho_scn(std::span<const std::uint8_t> contaminated, const PriorSpec &prior,
                      Rng &rng) {
    double hits = 0.0;
    for (auto c : contaminated) {
        hits += c != 0 ? 1.0 : 0.0;
    }
    const double misses = static_cast<double>(contaminated.size()) - hits;
    return beta_draw(rng, prior.rho0 + hits, prior.rho1 + misses);
}

Chain gibbs_fit(const Dataset &data, int groups, Family family, const PriorSpec &prior,
                const McmcConfig &config) {
    GibbsSampler sampler(data, groups, family, prior, config);
    Chain chain;
    chain.family = family;
    chain.groups = groups;
    chain.config = config;
    chain.prior = prior;
    chain.rows = data.size();
    const std::size_t stored = config.stored_count();
    chain.draws.reserve(stored);
    chain.loglik.reserve(stored);
    chain.labels.reserve(stored * data.size());
    chain.latent_x_mean.assign(data.size(), 0.0);

    std::vector<double> row_ll(data.size());
    for (std::size_t it = 1; it <= config.iterations; ++it) {
        sampler.sweep();
        if (it <= config.burn_in || (it - config.burn_in) % config.thin != 0) {
            continue;
        }
        const MeTheta &theta = sampler.theta();
        row_log_densities_parallel(theta, data, row_ll);
        double ll = 0.0;
        for (double v : row_ll) {
            ll += v;
        }
        if (!std::isfinite(ll)) {
            std::ostringstream msg;
            msg << "non-finite observed log-likelihood at sweep " << it;
            throw NumericalError(msg.str());
        }
        chain.draws.push_back(theta);
        chain.loglik.push_back(ll);
        const auto &lat = sampler.latents();
        for (std::size_t i = 0; i < data.size(); ++i) {
            chain.labels.push_back(static_cast<std::uint8_t>(lat.s[i]));
            chain.latent_x_mean[i] += lat.x[i];
        }
    }
    if (!chain.draws.empty()) {
        for (double &v : chain.latent_x_mean) {
            v /= static_cast<double>(chain.draws.size());
        }
    }
    chain.stats = sampler.stats();
    chain.refresh_label_summary();
    return chain;
}

Chain relabel_chain(const Chain &chain) {
    Chain out = chain;
    out.relabeled = true;
    const int g = chain.groups;
    if (g < 2 || chain.draws.empty()) {
        return out;
    }
    auto apply = [&](MeTheta &t, const std::vector<int> &perm) {
        // New component k takes old component perm[k].
        MeTheta src = t;
        for (int k = 0; k < g; ++k) {
            t.mu(k) = src.mu(perm[static_cast<std::size_t>(k)]);
            t.delta(k) = src.delta(perm[static_cast<std::size_t>(k)]);
            t.gamma2(k) = src.gamma2(perm[static_cast<std::size_t>(k)]);
            t.weights(k) = src.weights(perm[static_cast<std::size_t>(k)]);
        }
    };
    auto relabel_rows = [&](std::size_t l, const std::vector<int> &perm) {
        std::vector<std::uint8_t> inverse(static_cast<std::size_t>(g));
        for (int k = 0; k < g; ++k) {
            inverse[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])] =
                static_cast<std::uint8_t>(k);
        }
        if (out.labels.size() == out.draws.size() * out.rows) {
            for (std::size_t i = 0; i < out.rows; ++i) {
                auto &lab = out.labels[l * out.rows + i];
                lab = inverse[lab];
            }
        }
    };

    // First draw: order constraint on mu.
    std::vector<int> perm(static_cast<std::size_t>(g));
    std::iota(perm.begin(), perm.end(), 0);
    const Vector &first = out.draws[0].mu;
    std::stable_sort(perm.begin(), perm.end(), [&](int x, int y) { return first(x) < first(y); });
    apply(out.draws[0], perm);
    relabel_rows(0, perm);
    Vector reference = out.draws[0].mu;

    std::vector<int> candidate(static_cast<std::size_t>(g));
    for (std::size_t l = 1; l < out.draws.size(); ++l) {
        MeTheta &t = out.draws[l];
        std::iota(candidate.begin(), candidate.end(), 0);
        std::vector<int> best = candidate;
        double best_cost = std::numeric_limits<double>::infinity();
        do {
            double cost = 0.0;
            for (int k = 0; k < g; ++k) {
                const double d = t.mu(candidate[static_cast<std::size_t>(k)]) - reference(k);
                cost += d * d;
            }
            if (cost < best_cost) {
                best_cost = cost;
                best = candidate;
            }
        } while (std::next_permutation(candidate.begin(), candidate.end()));
        apply(t, best);
        relabel_rows(l, best);
        reference += (t.mu - reference) / static_cast<double>(l + 1);
    }
    out.refresh_label_summary();
    return out;
}

MeTheta posterior_mean(const Chain &chain) {
    if (chain.draws.empty()) {
        throw ParameterError("posterior mean of an empty chain");
    }
    const MeTheta &first = chain.draws.front();
    Vector acc = Vector::Zero(flatten(first).size());
    for (const auto &d : chain.draws) {
        acc += flatten(d);
    }
    acc /= static_cast<double>(chain.draws.size());
    MeTheta out = unflatten(acc, first.family, first.responses(), first.groups());
    out.weights /= out.weights.sum();
    return out;
}

std::vector<std::string> parameter_names(Family family, int responses, int groups) {
    std::vector<std::string> names;
    for (int k = 1; k <= responses; ++k) {
        names.push_back("alpha_" + std::to_string(k));
    }
    for (int k = 1; k <= responses; ++k) {
        names.push_back("beta_" + std::to_string(k));
    }
    for (int j = 1; j <= groups; ++j) {
        names.push_back("mu_" + std::to_string(j));
    }
    if (is_skewed(family)) {
        for (int j = 1; j <= groups; ++j) {
            names.push_back("delta_" + std::to_string(j));
        }
    }
    for (int j = 1; j <= groups; ++j) {
        names.push_back("gamma2_" + std::to_string(j));
    }
    for (int k = 0; k <= responses; ++k) {
        names.push_back("omega2_" + std::to_string(k));
    }
    for (int j = 1; j <= groups; ++j) {
        names.push_back("p_" + std::to_string(j));
    }
    switch (mixing_kind(family)) {
    case MixingKind::Gamma:
    case MixingKind::Beta:
        names.push_back("nu");
        break;
    case MixingKind::TwoPoint:
        names.push_back("rho");
        names.push_back("tau");
        break;
    case MixingKind::Degenerate:
        break;
    }
    return names;
}

Vector flatten(const MeTheta &t) {
    std::vector<double> v;
    auto append = [&](const Vector &x) { v.insert(v.end(), x.data(), x.data() + x.size()); };
    append(t.alpha);
    append(t.beta);
    append(t.mu);
    if (is_skewed(t.family)) {
        append(t.delta);
    }
    append(t.gamma2);
    append(t.omega2);
    append(t.weights);
    switch (mixing_kind(t.family)) {
    case MixingKind::Gamma:
    case MixingKind::Beta:
        v.push_back(t.sf.nu);
        break;
    case MixingKind::TwoPoint:
        v.push_back(t.sf.rho);
        v.push_back(t.sf.tau);
        break;
    case MixingKind::Degenerate:
        break;
    }
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

MeTheta unflatten(const Vector &values, Family family, int responses, int groups) {
    const auto expected = parameter_names(family, responses, groups).size();
    if (static_cast<std::size_t>(values.size()) != expected) {
        throw ParameterError("flattened parameter vector has the wrong length");
    }
    MeTheta t;
    t.family = family;
    Eigen::Index pos = 0;
    auto take = [&](int count) {
        Vector out = values.segment(pos, count);
        pos += count;
        return out;
    };
    t.alpha = take(responses);
    t.beta = take(responses);
    t.mu = take(groups);
    t.delta = is_skewed(family) ? take(groups) : Vector::Zero(groups);
    t.gamma2 = take(groups);
    t.omega2 = take(responses + 1);
    t.weights = take(groups);
    switch (mixing_kind(family)) {
    case MixingKind::Gamma:
    case MixingKind::Beta:
        t.sf.nu = values(pos++);
        break;
    case MixingKind::TwoPoint:
        t.sf.rho = values(pos++);
        t.sf.tau = values(pos++);
        break;
    case MixingKind::Degenerate:
        break;
    }
    return t;
}

std::vector<ParameterSummary> summarize(const Chain &chain) {
    if (chain.draws.empty()) {
        return {};
    }
    const MeTheta &first = chain.draws.front();
    const auto names = parameter_names(first.family, first.responses(), first.groups());
    const std::size_t count = chain.draws.size();
    Matrix values(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(names.size()));
    for (std::size_t l = 0; l < count; ++l) {
        values.row(static_cast<Eigen::Index>(l)) = flatten(chain.draws[l]).transpose();
    }
    auto quantile = [](std::vector<double> &sorted, double q) {
        // Linear interpolation between order statistics.
        const double pos = q * static_cast<double>(sorted.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, sorted.size() - 1);
        return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
    };
    std::vector<ParameterSummary> out;
    for (std::size_t k = 0; k < names.size(); ++k) {
        const auto col = values.col(static_cast<Eigen::Index>(k));
        std::vector<double> v(col.data(), col.data() + count);
        const double mean = col.mean();
        const double var =
            count > 1 ? (col.array() - mean).square().sum() / static_cast<double>(count - 1) : 0.0;
        std::sort(v.begin(), v.end());
        out.push_back({names[k], mean, std::sqrt(var), quantile(v, 0.025), quantile(v, 0.975)});
    }
    return out;
}

} // namespace smsnme
