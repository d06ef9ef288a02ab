#include "smsnme/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "smsnme/errors.hpp"
#include "smsnme/kernels.hpp"

namespace smsnme {

namespace {

constexpr double kDriftLimit = 5.0;

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s / static_cast<double>(v.size());
}

} // namespace

double ppc_pvalue_from_pairs(std::span<const double> realized, std::span<const double> predictive) {
    if (realized.empty() || realized.size() != predictive.size()) {
        throw ParameterError("deviance pairs must be non-empty and of equal length");
    }
    std::size_t hits = 0;
    for (std::size_t l = 0; l < realized.size(); ++l) {
        hits += predictive[l] >= realized[l] ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(realized.size());
}

PpcReport ppc_pvalue(const Chain &chain, const Dataset &data, std::uint64_t seed) {
    if (chain.draws.empty()) {
        throw ParameterError("posterior predictive check needs at least one stored draw");
    }
    const auto draw_count = static_cast<long>(chain.draws.size());
    const std::size_t n = data.size();
    PpcReport report;
    report.draws = chain.draws.size();
    report.realized.assign(report.draws, 0.0);
    report.predictive.assign(report.draws, 0.0);
    long failed = -1;
    std::string failure;
#pragma omp parallel
    {
        std::vector<double> rows(n);
#pragma omp for schedule(dynamic, 4)
        for (long l = 0; l < draw_count; ++l) {
            try {
                const MeTheta &theta = chain.draws[static_cast<std::size_t>(l)];
                row_log_densities_serial(theta, data, rows);
                double realized = 0.0;
                for (double v : rows) {
                    realized += v;
                }
                Rng rng = make_stream(seed, static_cast<std::uint64_t>(l));
                const MixtureSample rep =
                    mixture_sample(induced_mixture(theta).to_mixture(), n, rng);
                const MeDensityCache cache(theta);
                double predictive = 0.0;
                std::vector<double> z(static_cast<std::size_t>(data.dim()));
                for (std::size_t i = 0; i < n; ++i) {
                    for (int k = 0; k < data.dim(); ++k) {
                        z[static_cast<std::size_t>(k)] = rep.values(static_cast<Eigen::Index>(i), k);
                    }
                    predictive += cache.row_log_density(z);
                }
                report.realized[static_cast<std::size_t>(l)] = -2.0 * realized;
                report.predictive[static_cast<std::size_t>(l)] = -2.0 * predictive;
            } catch (const std::exception &e) {
#pragma omp critical(smsnme_ppc_failure)
                if (failed < 0 || l < failed) {
                    failed = l;
                    failure = e.what();
                }
            }
        }
    }
    if (failed >= 0) {
        std::ostringstream msg;
        msg << "predictive check failed at draw " << failed + 1 << ": " << failure;
        throw NumericalError(msg.str());
    }
    report.p_value = ppc_pvalue_from_pairs(report.realized, report.predictive);
    return report;
}

Vector clone_transform(const MeTheta &theta) {
    const int g = theta.groups();
    const Vector flat = flatten(theta);
    const auto names = parameter_names(theta.family, theta.responses(), g);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(flat.size()));
    const double log_last = std::log(theta.weights(g - 1));
    int weight_index = 0;
    for (std::size_t k = 0; k < names.size(); ++k) {
        if (names[k].rfind("p_", 0) == 0) {
            if (weight_index < g - 1) {
                out.push_back(std::log(theta.weights(weight_index)) - log_last);
            }
            ++weight_index;
        } else {
            out.push_back(flat(static_cast<Eigen::Index>(k)));
        }
    }
    return Eigen::Map<const Vector>(out.data(), static_cast<Eigen::Index>(out.size()));
}

std::vector<std::string> clone_transform_names(Family family, int responses, int groups) {
    std::vector<std::string> out;
    for (const auto &name : parameter_names(family, responses, groups)) {
        if (name.rfind("p_", 0) == 0) {
            if (name != "p_" + std::to_string(groups)) {
                out.push_back("alr_" + name);
            }
        } else {
            out.push_back(name);
        }
    }
    return out;
}

double batch_means_se(std::span<const double> trace) {
    const std::size_t n = trace.size();
    if (n < 4) {
        throw ParameterError("batch means need at least four values");
    }
    const auto batches = static_cast<std::size_t>(std::max(2.0, std::floor(std::sqrt(n))));
    const std::size_t size = n / batches;
    std::vector<double> means(batches);
    for (std::size_t b = 0; b < batches; ++b) {
        means[b] = mean_of(trace.subspan(b * size, size));
    }
    const double grand = mean_of(means);
    double ss = 0.0;
    for (double m : means) {
        ss += (m - grand) * (m - grand);
    }
    return std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));
}

double trace_drift_z(std::span<const double> trace) {
    const std::size_t n = trace.size();
    const std::size_t head = n / 10;
    const std::size_t tail = n / 2;
    if (head < 4) {
        return 0.0;
    }
    const auto a = trace.first(head);
    const auto b = trace.last(tail);
    const double se = std::hypot(batch_means_se(a), batch_means_se(b));
    const double diff = mean_of(a) - mean_of(b);
    if (se == 0.0) {
        return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return diff / se;
}

CloneLevel summarize_clone_level(std::size_t k, const std::vector<Vector> &g_draws,
                                 std::span<const double> loglik) {
    CloneLevel level;
    level.k = k;
    if (g_draws.size() < 2) {
        level.converged = false;
        level.note = "fewer than two stored draws";
        return level;
    }
    const auto dim = g_draws.front().size();
    level.mean = Vector::Zero(dim);
    for (const auto &v : g_draws) {
        level.mean += v;
    }
    level.mean /= static_cast<double>(g_draws.size());
    level.covariance = Matrix::Zero(dim, dim);
    for (const auto &v : g_draws) {
        const Vector d = v - level.mean;
        level.covariance.noalias() += d * d.transpose();
    }
    level.covariance /= static_cast<double>(g_draws.size() - 1);
    level.covariance = 0.5 * (level.covariance + level.covariance.transpose()).eval();
    if (!level.covariance.allFinite()) {
        level.converged = false;
        level.note = "non-finite posterior covariance";
        return level;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(level.covariance, Eigen::EigenvaluesOnly);
    level.lambda_max = eig.eigenvalues().maxCoeff();
    if (!loglik.empty()) {
        const double z = trace_drift_z(loglik);
        if (!std::isfinite(z) || std::abs(z) > kDriftLimit) {
            level.converged = false;
            std::ostringstream msg;
            msg << "log-likelihood trace drift z = " << z;
            level.note = msg.str();
        }
    }
    return level;
}

CloneReport assemble_clone_report(std::vector<std::string> names, std::vector<CloneLevel> levels) {
    CloneReport report;
    report.names = std::move(names);
    std::stable_sort(levels.begin(), levels.end(),
                     [](const CloneLevel &a, const CloneLevel &b) { return a.k < b.k; });
    for (auto &level : levels) {
        if (!level.converged || !(level.lambda_max > 0.0)) {
            std::ostringstream msg;
            msg << "clone level K = " << level.k << " omitted: "
                << (level.note.empty() ? "degenerate covariance" : level.note);
            warn(msg.str());
            report.omitted.push_back(level.k);
            continue;
        }
        report.levels.push_back(std::move(level));
    }
    if (!report.levels.empty()) {
        const double base = report.levels.front().lambda_max;
        for (auto &level : report.levels) {
            level.lambda_hat = level.lambda_max / base;
        }
        report.levels.front().lambda_hat = 1.0;
    }
    return report;
}

CloneReport data_clone(const Dataset &data, int groups, Family family, const PriorSpec &prior,
                       const McmcConfig &config, const std::vector<std::size_t> &levels) {
    if (levels.empty()) {
        throw ParameterError("need at least one clone level");
    }
    for (std::size_t k : levels) {
        if (k < 1) {
            throw ParameterError("clone levels must be at least 1");
        }
    }
    std::vector<CloneLevel> out(levels.size());
    const auto count = static_cast<long>(levels.size());
    long failed = -1;
    std::string failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (long idx = 0; idx < count; ++idx) {
        const std::size_t k = levels[static_cast<std::size_t>(idx)];
        McmcConfig cfg = config;
        cfg.clone_factor = k;
        cfg.stream = config.stream + static_cast<std::uint64_t>(idx);
        try {
            const Chain chain = relabel_chain(gibbs_fit(data, groups, family, prior, cfg));
            std::vector<Vector> g;
            g.reserve(chain.draws.size());
            for (const auto &d : chain.draws) {
                g.push_back(clone_transform(d));
            }
            out[static_cast<std::size_t>(idx)] = summarize_clone_level(k, g, chain.loglik);
        } catch (const NumericalError &e) {
            CloneLevel level;
            level.k = k;
            level.converged = false;
            level.note = e.what();
            out[static_cast<std::size_t>(idx)] = std::move(level);
        } catch (const std::exception &e) {
#pragma omp critical(smsnme_clone_failure)
            if (failed < 0 || idx < failed) {
                failed = idx;
                failure = e.what();
            }
        }
    }
    if (failed >= 0) {
        throw ParameterError(failure);
    }
    return assemble_clone_report(clone_transform_names(family, data.responses(), groups),
                                 std::move(out));
}

void write_ppc_csv(const PpcReport &report, std::ostream &out) {
    out << "draw,realized,predictive\n" << std::setprecision(10);
    for (std::size_t l = 0; l < report.draws; ++l) {
        out << l + 1 << ',' << report.realized[l] << ',' << report.predictive[l] << '\n';
    }
}

void write_clone_csv(const CloneReport &report, std::ostream &out) {
    out << "K,lambda_hat,inv_K,lambda_max\n" << std::setprecision(10);
    for (const auto &level : report.levels) {
        out << level.k << ',' << level.lambda_hat << ',' << 1.0 / static_cast<double>(level.k) << ','
            << level.lambda_max << '\n';
    }
}

} // namespace smsnme
