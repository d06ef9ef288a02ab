#ifndef SMSNME_MODEL_SELECTION_HPP
#define SMSNME_MODEL_SELECTION_HPP

/** \file
 * Deviance and the two DIC estimators computed from stored draws.
 *
 *   plug-in:  -4 mean_l sum_i log pi(z_i | theta_l) + 2 sum_i log pi(z_i | theta_bar)
 *   robust:   -4 mean_l sum_i log pi(z_i | theta_l) + 2 sum_i log mean_l pi(z_i | theta_l)
 *
 * The robust form uses the posterior predictive density per observation and so
 * does not depend on how mixture components are labelled.
 */

#include <iosfwd>
#include <string>
#include <vector>

#include "smsnme/inference.hpp"

namespace smsnme {

struct DicReport {
    double dic_plugin = 0.0;
    double dic_robust = 0.0;
    double tau_d = 0.0;        ///< effective dimension of the robust variant
    double tau_d_plugin = 0.0; ///< effective dimension of the plug-in variant
    double mean_deviance = 0.0;
    double loglik_at_mean = 0.0; ///< observed log-likelihood at theta_bar
};

/// -2 * observed log-likelihood.
double deviance(const MeTheta &theta, const Dataset &data);

/// Warns when the chain has G >= 2 and was not relabeled.
double dic_plugin(const Chain &chain, const Dataset &data);
double dic_robust(const Chain &chain, const Dataset &data);

struct EffectiveDimension {
    double plugin;
    double robust;
};
EffectiveDimension effective_dimension(const Chain &chain, const Dataset &data);

/// Both variants from one pass over the L x n log-density matrix.
DicReport dic_report(const Chain &chain, const Dataset &data);
/// Same quantities from a precomputed L x n matrix and the log-likelihood at theta_bar.
DicReport dic_report_from_matrix(const Matrix &loglik, double loglik_at_mean);

struct ComparisonRow {
    std::string model; ///< e.g. "FMST-ME"
    int groups = 1;
    DicReport dic;
};

/// Sorts by robust DIC (stable) and writes model,G,dic_robust,dic_plugin,tau_d,loglik,best.
void write_comparison_csv(std::vector<ComparisonRow> rows, std::ostream &out);

} // namespace smsnme

#endif
