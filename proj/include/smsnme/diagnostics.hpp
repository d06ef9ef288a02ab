#ifndef SMSNME_DIAGNOSTICS_HPP
#define SMSNME_DIAGNOSTICS_HPP

/** \file
 * Posterior predictive checking with the deviance discrepancy, and the
 * data-cloning check of parameter estimability.
 */

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "smsnme/inference.hpp"

namespace smsnme {

struct PpcReport {
    double p_value = 0.0;
    std::vector<double> realized;   ///< D(z, theta_l)
    std::vector<double> predictive; ///< D(w_l, theta_l)
    std::size_t draws = 0;
};

/** \brief Bayesian p-value: share of draws whose replicate deviance is at least the realized one.
 *
 * Replicate l is simulated from the induced mixture at theta_l with the stream
 * make_stream(seed, l), so the result does not depend on thread scheduling.
 */
PpcReport ppc_pvalue(const Chain &chain, const Dataset &data, std::uint64_t seed);
/// p-value recomputed from stored deviance pairs.
double ppc_pvalue_from_pairs(std::span<const double> realized, std::span<const double> predictive);

struct CloneLevel {
    std::size_t k = 1;
    Vector mean;
    Matrix covariance;
    double lambda_max = 0.0;
    double lambda_hat = 0.0; ///< lambda_max relative to the first retained level
    bool converged = true;
    std::string note;        ///< reason when not converged
};

struct CloneReport {
    std::vector<std::string> names; ///< coordinates of g(theta)
    std::vector<CloneLevel> levels; ///< retained levels, increasing K
    std::vector<std::size_t> omitted;
};

/// g(theta): flattened parameters with weights replaced by log(p_j / p_G), j < G.
Vector clone_transform(const MeTheta &theta);
std::vector<std::string> clone_transform_names(Family family, int responses, int groups);

/// Mean, covariance and largest covariance eigenvalue of one level's draws of g(theta).
/// `loglik` is the chain's trace, used for the convergence flag.
CloneLevel summarize_clone_level(std::size_t k, const std::vector<Vector> &g_draws,
                                 std::span<const double> loglik);
/// Drops non-converged levels with a warning, orders by K and normalizes lambda_hat.
CloneReport assemble_clone_report(std::vector<std::string> names, std::vector<CloneLevel> levels);

/// One relabeled fit per clone level; level k uses stream config.stream + k.
CloneReport data_clone(const Dataset &data, int groups, Family family, const PriorSpec &prior,
                       const McmcConfig &config, const std::vector<std::size_t> &levels);

/// Geweke-style z-score comparing the first 10% and last 50% of a trace.
double trace_drift_z(std::span<const double> trace);
/// Standard error of a trace mean from non-overlapping batch means.
double batch_means_se(std::span<const double> trace);

void write_ppc_csv(const PpcReport &report, std::ostream &out);
void write_clone_csv(const CloneReport &report, std::ostream &out);

} // namespace smsnme

#endif
