#ifndef SMSNME_ME_MODEL_HPP
#define SMSNME_ME_MODEL_HPP

/** \file
 * Measurement-error regression with an SMSN-mixture latent covariate:
 *
 *   Z = a + b x + eps,  a = (0, alpha^T)^T,  b = (1, beta^T)^T,
 *   x | S = j ~ SMSN(mu_j, gamma2_j, Delta_j, nu),  eps ~ SMN_p(0, Omega, nu),
 *
 * with Omega = diag(omega2_0, ..., omega2_r) and x and eps sharing the scale factor U.
 * Marginally Z is a G-component SMSN mixture with
 *   xi_j = a + mu_j b,  Lambda_j = Delta_j b,  Sigma_j = gamma2_j b b^T + Omega.
 */

#include <cstddef>
#include <string>
#include <vector>

#include "smsnme/distributions.hpp"
#include "smsnme/mixture.hpp"

namespace smsnme {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Full parameter vector of the mixture measurement-error model.
struct MeTheta {
    Vector alpha;   ///< r intercepts
    Vector beta;    ///< r slopes
    Vector mu;      ///< G component locations of x
    Vector delta;   ///< G component shapes of x (zero for symmetric families)
    Vector gamma2;  ///< G component scales of x
    Vector omega2;  ///< r + 1 error scales
    Vector weights; ///< G mixing weights
    Family family = Family::Normal;
    ScaleFactor sf;

    int responses() const { return static_cast<int>(alpha.size()); }
    int dim() const { return responses() + 1; }
    int groups() const { return static_cast<int>(mu.size()); }
    /// (0, alpha^T)^T
    Vector a() const;
    /// (1, beta^T)^T
    Vector b() const;

    /// Throws ParameterError when a dimension, sign, simplex or family constraint fails.
    void validate() const;
};

/// n observations of Z = (X, Y_1, ..., Y_r).
class Dataset {
public:
    explicit Dataset(RowMatrix z, std::vector<std::string> column_names = {});

    std::size_t size() const { return static_cast<std::size_t>(z_.rows()); }
    int dim() const { return static_cast<int>(z_.cols()); }
    int responses() const { return dim() - 1; }
    const RowMatrix &z() const { return z_; }
    const std::vector<std::string> &column_names() const { return names_; }
    Vector row(std::size_t i) const { return z_.row(static_cast<Eigen::Index>(i)).transpose(); }

    /// Rows repeated `times` times in order (z, z, ..., z).
    Dataset replicated(std::size_t times) const;

private:
    RowMatrix z_;
    std::vector<std::string> names_;
};

/// Marginal mixture parameters of Z implied by a MeTheta.
struct InducedMixture {
    std::vector<Vector> xi;
    std::vector<Vector> lambda_shape; ///< Lambda_j = Delta_j b
    std::vector<Matrix> sigma;        ///< gamma2_j b b^T + Omega
    Vector weights;
    Family family = Family::Normal;
    ScaleFactor sf;

    MixtureSpec to_mixture() const;
};

InducedMixture induced_mixture(const MeTheta &theta);

/// sum_i log pi(z_i | theta), each term multiplied by `clone_weight`.
double observed_loglik(const MeTheta &theta, const Dataset &data, double clone_weight = 1.0);
/// Same quantity evaluated through the generic mixture density of `induced_mixture`.
double observed_loglik_via_mixture(const MeTheta &theta, const Dataset &data);

struct MeLatents {
    std::vector<double> x;
    std::vector<std::size_t> labels;
    std::vector<double> u;
    std::vector<double> t;
};

struct SimulatedData {
    Dataset data;
    MeLatents latents;
};

/// Draws S, U, T and x, then Z | x, U ~ N_p(a + b x, Omega / U).
SimulatedData simulate_me(const MeTheta &theta, std::size_t n, Rng &rng);

/// Mixture of normal inverse Gaussian latent covariates with NIG errors.
struct FmnigSettings {
    Vector weights;
    Vector mu;
    Vector lambda;
    Vector gamma;
    Vector delta;
    Vector alpha;
    Vector beta;
    Matrix omega; ///< p x p, SPD with determinant 1

    void validate() const;
};

/// Z | x, U ~ N_p(a + b x, U Omega); x | U, S = j ~ N(mu_j + U lambda_j, U); U | S = j ~ IG(gamma_j, delta_j).
SimulatedData simulate_fmnig_me(const FmnigSettings &settings, std::size_t n, Rng &rng);

/// Parameter setup of the first simulation study (r = 2, G = 2) for any family.
MeTheta sim1_theta(Family family);
/// The three-component NIG scenario (p = 3).
FmnigSettings sim2_settings();

} // namespace smsnme

#endif
