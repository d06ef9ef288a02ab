#include "smsnme/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "smsnme/errors.hpp"
#include "smsnme/kernels.hpp"
#include "smsnme/numerics.hpp"

namespace smsnme {

namespace {

void require_draws(const Chain &chain) {
    if (chain.draws.empty()) {
        throw ParameterError("DIC needs at least one stored draw");
    }
}

void warn_if_unlabeled(const Chain &chain) {
    if (chain.groups >= 2 && !chain.relabeled) {
        warn("plug-in DIC evaluated on a chain that was not relabeled; theta_bar may mix components");
    }
}

} // namespace

double deviance(const MeTheta &theta, const Dataset &data) {
    return -2.0 * observed_loglik(theta, data);
}

DicReport dic_report_from_matrix(const Matrix &loglik, double loglik_at_mean) {
    const auto draws = loglik.rows();
    const auto n = loglik.cols();
    if (draws < 1) {
        throw ParameterError("DIC needs at least one stored draw");
    }
    // Per-draw totals are summed first so the mean matches the chain's loglik trace.
    double total = 0.0;
    for (Eigen::Index l = 0; l < draws; ++l) {
        total += loglik.row(l).sum();
    }
    const double mean_loglik = total / static_cast<double>(draws);
    const double log_l = std::log(static_cast<double>(draws));
    double predictive = 0.0;
    std::vector<double> column(static_cast<std::size_t>(draws));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index l = 0; l < draws; ++l) {
            column[static_cast<std::size_t>(l)] = loglik(l, i);
        }
        predictive += log_sum_exp(column) - log_l;
    }
    DicReport r;
    r.mean_deviance = -2.0 * mean_loglik;
    r.loglik_at_mean = loglik_at_mean;
    r.dic_plugin = -4.0 * mean_loglik + 2.0 * loglik_at_mean;
    r.dic_robust = -4.0 * mean_loglik + 2.0 * predictive;
    r.tau_d_plugin = r.mean_deviance + 2.0 * loglik_at_mean;
    r.tau_d = r.mean_deviance + 2.0 * predictive;
    return r;
}

DicReport dic_report(const Chain &chain, const Dataset &data) {
    require_draws(chain);
    warn_if_unlabeled(chain);
    const Matrix ll = loglik_matrix_parallel(chain.draws, data);
    return dic_report_from_matrix(ll, observed_loglik(posterior_mean(chain), data));
}

double dic_plugin(const Chain &chain, const Dataset &data) { return dic_report(chain, data).dic_plugin; }

double dic_robust(const Chain &chain, const Dataset &data) {
    require_draws(chain);
    const Matrix ll = loglik_matrix_parallel(chain.draws, data);
    return dic_report_from_matrix(ll, 0.0).dic_robust;
}

EffectiveDimension effective_dimension(const Chain &chain, const Dataset &data) {
    const DicReport r = dic_report(chain, data);
    return {r.tau_d_plugin, r.tau_d};
}

void write_comparison_csv(std::vector<ComparisonRow> rows, std::ostream &out) {
    std::stable_sort(rows.begin(), rows.end(), [](const ComparisonRow &a, const ComparisonRow &b) {
        return a.dic.dic_robust < b.dic.dic_robust;
    });
    out << "model,G,dic_robust,dic_plugin,tau_d,loglik,best\n";
    out << std::setprecision(10);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto &r = rows[k];
        out << r.model << ',' << r.groups << ',' << r.dic.dic_robust << ',' << r.dic.dic_plugin << ','
            << r.dic.tau_d << ',' << r.dic.loglik_at_mean << ',' << (k == 0 ? 1 : 0) << '\n';
    }
}

} // namespace smsnme
