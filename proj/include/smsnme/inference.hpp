#ifndef SMSNME_INFERENCE_HPP
#define SMSNME_INFERENCE_HPP

/** \file
 * Gibbs sampler for the mixture measurement-error model.
 *
 * The sampler works on the data-augmented representation
 *
 *   Z_i | x_i, U_i       ~ N_p(a + b x_i, Omega / U_i)
 *   x_i | S_i = j, U, T  ~ N(mu_j + Delta_j T_i, gamma2_j / U_i)
 *   T_i | U_i            ~ TN(0, 1 / U_i, (0, inf))       (skewed families only)
 *   U_i                  ~ H(. | nu),   P(S_i = j) = p_j
 *
 * for which every block except nu (t family) and tau (contaminated normal)
 * has a closed-form full conditional.
 */

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "smsnme/me_model.hpp"

namespace smsnme {

/// Independent normal prior; a length-1 vector is broadcast to every coordinate.
struct NormalPrior {
    Vector mean = Vector::Zero(1);
    Vector variance = Vector::Constant(1, 1e4);

    double mean_at(Eigen::Index k) const { return mean.size() == 1 ? mean(0) : mean(k); }
    double variance_at(Eigen::Index k) const {
        return variance.size() == 1 ? variance(0) : variance(k);
    }
};

struct PriorSpec {
    NormalPrior alpha;
    NormalPrior beta;
    NormalPrior mu;
    NormalPrior delta;
    double e = 0.01; ///< gamma_j^{-2} | f ~ Gamma(e, f)
    double g = 0.01; ///< f ~ Gamma(g, h)
    double h = 0.01;
    double l = 0.01; ///< omega_i^{-2} ~ Gamma(l, m)
    double m = 0.01;
    Vector kappa = Vector::Ones(1); ///< Dirichlet, broadcast like NormalPrior
    double lambda0 = 0.04;          ///< nu ~ Exp(lambda), lambda ~ U(lambda0, lambda1)
    double lambda1 = 0.5;
    double phi_sl = 0.01;           ///< slash: nu ~ Gamma(phi_sl, psi_sl)
    double psi_sl = 0.01;
    double rho0 = 1.0;              ///< contaminated normal: rho ~ Beta(rho0, rho1)
    double rho1 = 1.0;
    double tau0 = 1.0;              ///< tau ~ Beta(tau0, tau1)
    double tau1 = 1.0;

    double kappa_at(Eigen::Index j) const { return kappa.size() == 1 ? kappa(0) : kappa(j); }
    void validate() const;
};

struct McmcConfig {
    std::size_t iterations = 25000;
    std::size_t burn_in = 5000;
    std::size_t thin = 30;
    std::uint64_t seed = 1;
    /// Stream index under `seed`; independent chains use distinct indices.
    std::uint64_t stream = 0;
    /// Data-cloning level K: the likelihood is raised to the K-th power.
    std::size_t clone_factor = 1;

    std::size_t stored_count() const { return (iterations - burn_in) / thin; }
    void validate() const;
};

/// Floor applied to gamma2_j and omega2_i after every draw.
inline constexpr double kVarianceFloor = 1e-8;

struct LatentState {
    std::vector<double> x;
    std::vector<std::size_t> s;
    std::vector<double> u;
    std::vector<double> t;
    std::vector<std::uint8_t> contaminated; ///< U_i = tau (two-point mixing only)
    double f = 1.0;                         ///< hyper-rate of the gamma_j^{-2} prior
    double lambda = 0.27;                   ///< hyper-rate of the nu prior (t family)
};

struct SamplerStats {
    double nu_step = 0.5;      ///< random-walk scale on log nu (frozen after burn-in)
    double tau_step = 0.5;     ///< random-walk scale on logit tau
    double nu_acceptance = 0;  ///< post-burn-in acceptance rate
    double tau_acceptance = 0;
};

/// Stored draws of one run.
struct Chain {
    Family family = Family::Normal;
    int groups = 1;
    McmcConfig config;
    PriorSpec prior;
    std::vector<MeTheta> draws;
    std::vector<double> loglik;       ///< observed log-likelihood per draw (unweighted)
    std::vector<std::uint8_t> labels; ///< L x n component labels, row-major
    std::size_t rows = 0;             ///< n
    std::vector<double> latent_x_mean;
    std::vector<std::size_t> latent_modal_label;
    SamplerStats stats;
    bool relabeled = false;

    std::size_t size() const { return draws.size(); }
    /// Recomputes the modal-label summary from `labels`.
    void refresh_label_summary();
};

/// Draw (theta, f, lambda) from the prior; used by the joint-distribution test.
MeTheta sample_prior(int responses, int groups, Family family, const PriorSpec &prior, Rng &rng,
                     LatentState *hyper = nullptr);

class GibbsSampler {
public:
    GibbsSampler(Dataset data, int groups, Family family, PriorSpec prior, McmcConfig config);

    /// One full sweep over latents, parameters and the scale factor.
    void sweep();

    const MeTheta &theta() const { return theta_; }
    const LatentState &latents() const { return lat_; }
    const Dataset &data() const { return data_; }
    const SamplerStats &stats() const { return stats_; }
    std::size_t iteration() const { return iteration_; }

    /// Replace state wholesale (joint-distribution testing and warm starts).
    void set_state(MeTheta theta, LatentState latents);
    void set_data(Dataset data);

    // Individual full conditionals in sweep order.
    void update_x();
    void update_t();
    void update_u();
    void update_s();
    void update_regression();
    void update_components();
    void update_gamma();
    void update_omega();
    void update_weights();
    void update_scale_factor();

private:
    std::size_t latent_rows() const { return lat_.x.size(); }
    std::size_t data_row(std::size_t i) const { return i % n_; }
    double quadratic_form(std::size_t i) const;
    int u_exponent_dim() const;
    void initialize();
    void check_finite(const char *what) const;
    bool adapting() const { return iteration_ <= config_.burn_in; }
    double adapt_rate() const;

    void update_nu_skewt();
    void update_nu_slash();
    void update_nu_scn();

    Dataset data_;
    std::size_t n_;
    int groups_;
    Family family_;
    bool skewed_;
    PriorSpec prior_;
    McmcConfig config_;
    Rng rng_;
    MeTheta theta_;
    LatentState lat_;
    SamplerStats stats_;
    std::size_t iteration_ = 0;
    std::size_t nu_accepts_ = 0;
    std::size_t nu_trials_ = 0;
    std::size_t tau_accepts_ = 0;
    std::size_t tau_trials_ = 0;
};

/// Runs `config.iterations` sweeps and stores every `thin`-th draw after burn-in.
Chain gibbs_fit(const Dataset &data, int groups, Family family, const PriorSpec &prior,
                const McmcConfig &config);

/** \brief One Metropolis-Hastings step for nu in the t family.
 *
 * Target exp(-lambda nu) prod_i Gamma(U_i | nu/2, nu/2) with a Gaussian random walk
 * on log nu. Returns the new value; `accepted` reports the decision.
 */
double update_nu_skewt(double nu, double lambda, std::span<const double> u, double step, Rng &rng,
                       bool &accepted);
/// lambda | nu: density proportional to lambda exp(-lambda nu) on (lambda0, lambda1).
double update_nu_rate(double nu, const PriorSpec &prior, Rng &rng);
/// nu | U ~ Gamma(phi_sl + n, psi_sl - sum log U_i).
double update_nu_slash(std::span<const double> u, const PriorSpec &prior, Rng &rng);
/// rho | indicators ~ Beta(rho0 + #contaminated, rho1 + #clean).
double update_rho_scn(std::span<const std::uint8_t> contaminated, const PriorSpec &prior,
                      Rng &rng);

/// Post-hoc relabeling toward a running reference of component locations.
Chain relabel_chain(const Chain &chain);

/// Posterior mean of the stored draws; weights renormalized, nu on its natural scale.
MeTheta posterior_mean(const Chain &chain);

/// Names of the flattened parameter vector for a family / dimension.
std::vector<std::string> parameter_names(Family family, int responses, int groups);
/// alpha, beta, mu, delta (skewed only), gamma2, omega2, weights, nu | (rho, tau).
Vector flatten(const MeTheta &theta);
MeTheta unflatten(const Vector &values, Family family, int responses, int groups);

struct ParameterSummary {
    std::string name;
    double mean;
    double sd;
    double q025;
    double q975;
};

std::vector<ParameterSummary> summarize(const Chain &chain);

} // namespace smsnme

#endif
