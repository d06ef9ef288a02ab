#ifndef SMSNME_MIXTURE_HPP
#define SMSNME_MIXTURE_HPP

#include <cstddef>
#include <vector>

#include "smsnme/distributions.hpp"

namespace smsnme {

/// Finite mixture of SMSN components sharing one family and one scale factor.
class MixtureSpec {
public:
    /// Weights are renormalized when |sum - 1| <= 1e-8; a larger gap is an error.
    MixtureSpec(std::vector<SmsnParams> components, Vector weights);

    std::size_t size() const { return components_.size(); }
    int dim() const { return components_.front().dim(); }
    const std::vector<SmsnParams> &components() const { return components_; }
    const SmsnParams &component(std::size_t j) const { return components_[j]; }
    const Vector &weights() const { return weights_; }
    Family family() const { return components_.front().family(); }

private:
    std::vector<SmsnParams> components_;
    Vector weights_;
};

/// log sum_j p_j SMSN(y | theta_j), by log-sum-exp over components.
double mixture_log_pdf(const Vector &y, const MixtureSpec &spec);
double mixture_pdf(const Vector &y, const MixtureSpec &spec);

/// Categorical draw by inverse CDF over the cumulative weights (index order).
std::size_t draw_categorical(const Vector &weights, Rng &rng);

struct MixtureSample {
    Matrix values;                    ///< n x q
    std::vector<std::size_t> labels;  ///< zero-based component index per row
};

MixtureSample mixture_sample(const MixtureSpec &spec, std::size_t n, Rng &rng);

} // namespace smsnme

#endif
