#include "smsnme/mixture.hpp"

#include <cmath>
#include <limits>

#include "smsnme/errors.hpp"
#include "smsnme/numerics.hpp"

namespace smsnme {

MixtureSpec::MixtureSpec(std::vector<SmsnParams> components, Vector weights)
    : components_(std::move(components)), weights_(std::move(weights)) {
    if (components_.empty()) {
        throw ParameterError("a mixture needs at least one component");
    }
    if (static_cast<std::size_t>(weights_.size()) != components_.size()) {
        throw ParameterError("mixture weight count differs from component count");
    }
    if ((weights_.array() < 0.0).any() || !weights_.allFinite()) {
        throw ParameterError("mixture weights must be nonnegative");
    }
    const double total = weights_.sum();
    if (std::abs(total - 1.0) > 1e-8) {
        throw ParameterError("mixture weights must sum to 1");
    }
    weights_ /= total;
    const auto &first = components_.front();
    for (const auto &c : components_) {
        if (c.family() != first.family() || !(c.scale_factor() == first.scale_factor()) ||
            c.dim() != first.dim()) {
            throw ParameterError("mixture components must share family, scale factor and dimension");
        }
    }
}

double mixture_log_pdf(const Vector &y, const MixtureSpec &spec) {
    std::vector<double> terms;
    terms.reserve(spec.size());
    for (std::size_t j = 0; j < spec.size(); ++j) {
        const double w = spec.weights()(static_cast<Eigen::Index>(j));
        if (w > 0.0) {
            terms.push_back(std::log(w) + spec.component(j).log_pdf(y));
        }
    }
    return log_sum_exp(terms);
}

double mixture_pdf(const Vector &y, const MixtureSpec &spec) {
    return std::exp(mixture_log_pdf(y, spec));
}

std::size_t draw_categorical(const Vector &weights, Rng &rng) {
    const double u = uniform_open(rng) * weights.sum();
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (Eigen::Index j = 0; j < weights.size(); ++j) {
        if (weights(j) > 0.0) {
            last_positive = static_cast<std::size_t>(j);
            cumulative += weights(j);
            if (u < cumulative) {
                return static_cast<std::size_t>(j);
            }
        }
    }
    return last_positive;
}

MixtureSample mixture_sample(const MixtureSpec &spec, std::size_t n, Rng &rng) {
    if (n == 0) {
        throw ParameterError("sample size must be at least 1");
    }
    MixtureSample out;
    out.values.resize(static_cast<Eigen::Index>(n), spec.dim());
    out.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = draw_categorical(spec.weights(), rng);
        out.labels[i] = j;
        out.values.row(static_cast<Eigen::Index>(i)) = smsn_sample(spec.component(j), 1, rng).row(0);
    }
    return out;
}

} // namespace smsnme
