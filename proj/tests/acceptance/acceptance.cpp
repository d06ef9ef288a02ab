// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
//   acceptance [--quick] [--only N[,N...]]
//
// --quick runs the recovery criteria at 8000/2000/10 with doubled tolerances.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "../unit/oracles.hpp"
#include "smsnme/diagnostics.hpp"
#include "smsnme/distributions.hpp"
#include "smsnme/inference.hpp"
#include "smsnme/model_selection.hpp"

using namespace smsnme;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

bool g_quick = false;

McmcConfig study_config(std::uint64_t seed) {
    McmcConfig c;
    if (g_quick) {
        c.iterations = 8000;
        c.burn_in = 2000;
        c.thin = 10;
    }
    c.seed = seed;
    return c;
}

Dataset sim1_data(Family f, std::size_t n, std::uint64_t seed) {
    Rng rng = make_stream(seed, 1000);
    return simulate_me(sim1_theta(f), n, rng).data;
}

std::string fmt(double v, int prec = 4) {
    std::ostringstream s;
    s.precision(prec);
    s << v;
    return s.str();
}

// ---------------------------------------------------------------- 1

Outcome parameter_recovery() {
    // Across-replicate sds of the posterior means at n = 500.
    const std::map<std::string, double> sd = {
        {"alpha_1", 0.038}, {"alpha_2", 0.044}, {"beta_1", 0.007},  {"beta_2", 0.008},
        {"mu_1", 0.090},    {"mu_2", 0.114},    {"delta_1", 0.119}, {"delta_2", 0.172},
        {"gamma2_1", 0.063}, {"gamma2_2", 0.071}, {"omega2_0", 0.026}, {"omega2_1", 0.026},
        {"omega2_2", 0.036}, {"p_1", 0.020},    {"p_2", 0.020}};
    const double mult = g_quick ? 8.0 : 4.0;
    const auto names = parameter_names(Family::SkewNormal, 2, 2);
    const Vector truth = flatten(sim1_theta(Family::SkewNormal));

    std::vector<Vector> means(5);
#pragma omp parallel for schedule(dynamic)
    for (int s = 0; s < 5; ++s) {
        const auto data = sim1_data(Family::SkewNormal, 500, static_cast<std::uint64_t>(s + 1));
        McmcConfig cfg = study_config(static_cast<std::uint64_t>(s + 1));
        means[s] = flatten(posterior_mean(relabel_chain(gibbs_fit(data, 2, Family::SkewNormal, PriorSpec{}, cfg))));
    }

    bool ok = true;
    double worst = 0.0;
    std::string worst_name;
    for (int s = 0; s < 5; ++s) {
        for (std::size_t k = 0; k < names.size(); ++k) {
            const auto kk = static_cast<Eigen::Index>(k);
            const double ratio = std::abs(means[s](kk) - truth(kk)) / sd.at(names[k]);
            ok = ok && ratio < mult;
            if (ratio > worst) {
                worst = ratio;
                worst_name = names[k] + " seed " + std::to_string(s + 1) + " = " + fmt(means[s](kk));
            }
        }
    }
    return {ok, "worst |mean - truth| / sd = " + fmt(worst, 3) + " (" + worst_name + "), limit " + fmt(mult)};
}

// ---------------------------------------------------------------- 2

Outcome nu_recovery() {
    std::vector<double> nu(5);
#pragma omp parallel for schedule(dynamic)
    for (int s = 0; s < 5; ++s) {
        const auto data = sim1_data(Family::SkewT, 500, static_cast<std::uint64_t>(s + 1));
        McmcConfig cfg = study_config(static_cast<std::uint64_t>(s + 1));
        nu[s] = posterior_mean(relabel_chain(gibbs_fit(data, 2, Family::SkewT, PriorSpec{}, cfg))).sf.nu;
    }
    bool ok = true;
    std::string detail = "posterior mean nu:";
    for (double v : nu) {
        ok = ok && v > 2.2 && v < 4.5;
        detail += " " + fmt(v, 3);
    }
    return {ok, detail + ", required in (2.2, 4.5)"};
}

// ---------------------------------------------------------------- 3

Outcome dic_ordering() {
    Rng rng = make_stream(2024, 0);
    const Dataset data = simulate_fmnig_me(sim2_settings(), 100, rng).data;
    const std::vector<Family> skewed{Family::SkewT, Family::SkewSlash, Family::SkewContaminatedNormal};
    const std::vector<Family> symmetric{Family::Normal, Family::StudentT, Family::Slash,
                                        Family::ContaminatedNormal};
    std::vector<Family> all = skewed;
    all.insert(all.end(), symmetric.begin(), symmetric.end());
    std::vector<double> dic(all.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t k = 0; k < all.size(); ++k) {
        McmcConfig cfg = study_config(7);
        cfg.stream = k;
        dic[k] = dic_robust(gibbs_fit(data, 3, all[k], PriorSpec{}, cfg), data);
    }
    double worst_skewed = -INFINITY, best_symmetric = INFINITY;
    std::string detail;
    for (std::size_t k = 0; k < all.size(); ++k) {
        (k < skewed.size() ? worst_skewed : best_symmetric) =
            k < skewed.size() ? std::max(worst_skewed, dic[k]) : std::min(best_symmetric, dic[k]);
        detail += std::string(model_code(all[k])) + "=" + fmt(dic[k], 6) + " ";
    }
    return {worst_skewed < best_symmetric, detail};
}

// ---------------------------------------------------------------- 4

Outcome bayesian_pvalue() {
    const auto data = sim1_data(Family::SkewT, 500, 11);
    const Chain good = relabel_chain(gibbs_fit(data, 2, Family::SkewT, PriorSpec{}, study_config(11)));
    const Chain bad = gibbs_fit(data, 1, Family::Normal, PriorSpec{}, study_config(11));
    const double p_good = ppc_pvalue(good, data, 31).p_value;
    const double p_bad = ppc_pvalue(bad, data, 31).p_value;
    const bool ok_good = p_good > 0.2 && p_good < 0.8;
    const bool ok_bad = p_bad < 0.05 || p_bad > 0.95;
    return {ok_good && ok_bad, "well-specified FMST G=2 p = " + fmt(p_good, 3) + (ok_good ? " (ok)" : " (out of (0.2, 0.8))") +
                                   "; misspecified FMN G=1 p = " + fmt(p_bad, 3) +
                                   (ok_bad ? " (ok)" : " (not < 0.05 or > 0.95)")};
}

// ---------------------------------------------------------------- 5

Outcome data_cloning() {
    const auto data = sim1_data(Family::SkewNormal, 200, 5);
    const CloneReport r =
        data_clone(data, 2, Family::SkewNormal, PriorSpec{}, study_config(5), {1, 2, 4, 8, 16});
    bool ok = !r.levels.empty() && r.levels.front().k == 1;
    std::string detail = "lambda_hat:";
    std::set<std::size_t> seen;
    for (const auto &l : r.levels) {
        seen.insert(l.k);
        const double k = static_cast<double>(l.k);
        detail += " K=" + std::to_string(l.k) + ":" + fmt(l.lambda_hat, 3);
        if (l.k > 1) {
            ok = ok && l.lambda_hat > 0.5 / k && l.lambda_hat < 2.0 / k;
        }
    }
    for (std::size_t k : {2, 4, 8, 16}) {
        ok = ok && seen.count(k) == 1;
    }
    if (!r.omitted.empty()) {
        detail += " (omitted levels: " + std::to_string(r.omitted.size()) + ")";
    }
    return {ok, detail + ", required in (0.5/K, 2/K)"};
}

// ---------------------------------------------------------------- 6

Vector v1(double x) { return Vector::Constant(1, x); }

SmsnParams scalar(Family f, double mu, double sigma, double delta, ScaleFactor sf = {}) {
    return SmsnParams(v1(mu), Matrix::Constant(1, 1, sigma), v1(delta), f, sf);
}

ScaleFactor family_sf(Family f, double nu) {
    switch (mixing_kind(f)) {
    case MixingKind::Gamma:
    case MixingKind::Beta:
        return {nu, 0.0, 1.0};
    case MixingKind::TwoPoint:
        return {0.0, 0.3, 0.4};
    case MixingKind::Degenerate:
        break;
    }
    return {};
}

constexpr std::array kFamilies{Family::Normal,     Family::StudentT,  Family::Slash,
                               Family::ContaminatedNormal, Family::SkewNormal, Family::SkewT,
                               Family::SkewSlash,  Family::SkewContaminatedNormal};

Outcome property_suite() {
    std::vector<std::string> failures;
    auto require = [&](bool cond, const std::string &what) {
        if (!cond) {
            failures.push_back(what);
        }
    };

    for (Family f : kFamilies) {
        const double nu = mixing_kind(f) == MixingKind::Beta ? 5.0 : 10.0;
        const auto p = scalar(f, 0.5, 1.3, is_skewed(f) ? 1.5 : 0.0, family_sf(f, nu));
        const double half = 12.0 * std::sqrt(p.omega()(0, 0));
        const double mass = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            [&](double x) { return p.pdf(v1(x)); }, 0.5 - half, 0.5 + half, 20, 1e-12);
        require(std::abs(mass - 1.0) < 1e-4, "normalization " + std::string(model_code(f)) + " = " + fmt(mass, 10));
    }

    const double mu = -0.2, omega = 0.9;
    for (double x : {-2.5, 0.0, 1.3}) {
        auto close = [&](double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); };
        require(close(scalar(Family::SkewNormal, mu, omega, 0).pdf(v1(x)), oracle::normal_pdf(x, mu, omega), 1e-12),
                "SN(0 shape) = N");
        require(close(scalar(Family::SkewT, mu, omega, 0, {4.0, 0, 1}).pdf(v1(x)), oracle::t_pdf(x, mu, omega, 4.0), 1e-12),
                "ST(0 shape) = t");
        const double cn = 0.3 * oracle::normal_pdf(x, mu, omega / 0.4) + 0.7 * oracle::normal_pdf(x, mu, omega);
        require(close(scalar(Family::SkewContaminatedNormal, mu, omega, 0, {0, 0.3, 0.4}).pdf(v1(x)), cn, 1e-12),
                "SCN(0 shape) = CN");
        const double m = (x - mu) * (x - mu) / omega, s = 3.5;
        const double slash = 3.0 / std::sqrt(2.0 * oracle::kPi * omega) *
                             (m > 0 ? std::pow(2.0 / m, s) * boost::math::tgamma_lower(s, 0.5 * m) : 1.0 / s);
        require(close(scalar(Family::SkewSlash, mu, omega, 0, {3.0, 0, 1}).pdf(v1(x)), slash, 1e-6),
                "SSL(0 shape) = SL");
        require(close(scalar(Family::SkewContaminatedNormal, mu, omega, 0.8, {0, 0.4, 1.0}).pdf(v1(x)),
                      scalar(Family::SkewNormal, mu, omega, 0.8).pdf(v1(x)), 1e-14),
                "SCN(tau = 1) = SN");
    }

    Rng rng = make_stream(42, 0);
    double worst_rt = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        Matrix a(3, 3);
        Vector delta(3);
        for (int i = 0; i < 3; ++i) {
            delta(i) = 2.0 * std_normal(rng);
            for (int j = 0; j < 3; ++j) {
                a(i, j) = std_normal(rng);
            }
        }
        const Matrix sigma = a * a.transpose() + 0.1 * Matrix::Identity(3, 3);
        const auto ol = omega_lambda_from(sigma, delta);
        const auto sd = sigma_delta_from(ol.omega, ol.lambda);
        worst_rt = std::max({worst_rt, (sd.sigma - sigma).cwiseAbs().maxCoeff(), (sd.delta - delta).cwiseAbs().maxCoeff()});
    }
    require(worst_rt < 1e-10, "round trip error " + fmt(worst_rt));

    const auto sn = smsn_sample(scalar(Family::SkewNormal, 0, 1, 1), 100000, rng);
    const auto mom = oracle::moments(std::vector<double>(sn.data(), sn.data() + sn.size()));
    require(std::abs(mom.mean - std::sqrt(2.0 / oracle::kPi)) < 3.0 * mom.se, "SN sample mean " + fmt(mom.mean));

    const std::size_t n = 10000;
    const double critical = 1.63 / std::sqrt(static_cast<double>(n));
    for (Family f : kFamilies) {
        const auto p = scalar(f, 0.5, 1.5, is_skewed(f) ? 1.2 : 0.0, family_sf(f, 3.0));
        const double half = 40.0 * std::sqrt(p.omega()(0, 0));
        const oracle::GridCdf cdf([&](double x) { return p.pdf(v1(x)); }, 0.5 - half, 0.5 + half, 8000);
        const auto draws = smsn_sample(p, n, rng);
        const double d = oracle::ks_statistic({draws.data(), draws.data() + n}, cdf);
        require(d < critical, "KS " + std::string(model_code(f)) + " D = " + fmt(d));
    }

    std::string detail = failures.empty() ? "normalization, reductions, round trip (max err " + fmt(worst_rt, 2) +
                                                "), SN mean, KS x8"
                                          : "";
    for (const auto &f : failures) {
        detail += f + "; ";
    }
    return {failures.empty(), detail};
}

// ---------------------------------------------------------------- 7

Outcome dic_algebra() {
    const auto data = sim1_data(Family::SkewNormal, 200, 3);
    Chain single;
    single.family = Family::SkewNormal;
    single.groups = 2;
    single.rows = data.size();
    single.relabeled = true;
    single.draws = {sim1_theta(Family::SkewNormal)};
    single.loglik = {observed_loglik(single.draws[0], data)};
    const DicReport r = dic_report(single, data);
    const double d = deviance(single.draws[0], data);
    const double e1 = std::max(std::abs(r.dic_plugin - d), std::abs(r.dic_robust - d)) / std::abs(d);

    McmcConfig cfg = study_config(3);
    cfg.iterations = 4000;
    cfg.burn_in = 1000;
    cfg.thin = 10;
    const Chain c = gibbs_fit(data, 2, Family::SkewNormal, PriorSpec{}, cfg);
    Chain perm = c;
    for (auto &t : perm.draws) {
        t.mu.reverseInPlace();
        t.delta.reverseInPlace();
        t.gamma2.reverseInPlace();
        t.weights.reverseInPlace();
    }
    const double a = dic_robust(c, data), b = dic_robust(perm, data);
    const double e2 = std::abs(a - b) / std::abs(a);
    return {e1 < 1e-12 && e2 < 1e-10,
            "single-draw rel err " + fmt(e1, 2) + ", permutation rel err " + fmt(e2, 2)};
}

// ---------------------------------------------------------------- 8

Outcome sampler_correctness() {
    constexpr int kResponses = 2, kGroups = 2;
    constexpr std::size_t kRows = 5;
    PriorSpec prior;
    prior.alpha.variance = Vector::Constant(1, 1.0);
    prior.beta.mean = Vector::Constant(1, 1.0);
    prior.beta.variance = Vector::Constant(1, 0.25);
    prior.mu.variance = Vector::Constant(1, 4.0);
    prior.delta.variance = Vector::Constant(1, 1.0);
    prior.e = 3.0;
    prior.g = 4.0;
    prior.h = 4.0;
    prior.l = 4.0;
    prior.m = 2.0;
    prior.kappa = Vector::Constant(1, 2.0);

    auto functions = [](const MeTheta &t) {
        return std::array<double, 10>{t.alpha(0), t.beta(0), t.mu(0), t.delta(0), std::log(t.gamma2(0)),
                                      std::log(t.omega2(0)), std::log(t.omega2(1)), t.weights(0),
                                      t.mu(0) * t.delta(0), t.beta(0) * t.beta(0)};
    };
    const std::array<const char *, 10> names{"alpha_1", "beta_1", "mu_1", "delta_1", "log gamma2_1",
                                             "log omega2_0", "log omega2_1", "p_1", "mu_1 delta_1",
                                             "beta_1^2"};

    // Marginal-conditional simulator: independent prior draws.
    const std::size_t m = 200000;
    std::array<std::vector<double>, 10> mc;
    Rng rng = make_stream(77, 0);
    for (std::size_t i = 0; i < m; ++i) {
        const auto g = functions(sample_prior(kResponses, kGroups, Family::SkewNormal, prior, rng));
        for (std::size_t k = 0; k < 10; ++k) {
            mc[k].push_back(g[k]);
        }
    }

    // Successive-conditional simulator: Gibbs sweep, then fresh data given the latents.
    LatentState hyper;
    MeTheta theta = sample_prior(kResponses, kGroups, Family::SkewNormal, prior, rng, &hyper);
    SimulatedData sim = simulate_me(theta, kRows, rng);
    McmcConfig cfg;
    cfg.iterations = 2;
    cfg.burn_in = 1;
    cfg.thin = 1;
    cfg.seed = 78;
    GibbsSampler sampler(sim.data, kGroups, Family::SkewNormal, prior, cfg);
    LatentState lat = hyper;
    lat.x = sim.latents.x;
    lat.s = sim.latents.labels;
    lat.u = sim.latents.u;
    lat.t = sim.latents.t;
    sampler.set_state(theta, lat);

    const std::size_t sweeps = 400000;
    std::array<std::vector<double>, 10> sc;
    RowMatrix z(static_cast<Eigen::Index>(kRows), kResponses + 1);
    for (std::size_t it = 0; it < sweeps; ++it) {
        sampler.sweep();
        const MeTheta &t = sampler.theta();
        const LatentState &l = sampler.latents();
        const Vector a = t.a(), b = t.b();
        for (std::size_t i = 0; i < kRows; ++i) {
            for (int k = 0; k <= kResponses; ++k) {
                z(static_cast<Eigen::Index>(i), k) =
                    a(k) + b(k) * l.x[i] + std::sqrt(t.omega2(k) / l.u[i]) * std_normal(rng);
            }
        }
        sampler.set_data(Dataset(z));
        const auto g = functions(t);
        for (std::size_t k = 0; k < 10; ++k) {
            sc[k].push_back(g[k]);
        }
    }

    bool ok = true;
    std::string detail = "z:";
    double worst = 0.0;
    for (std::size_t k = 0; k < 10; ++k) {
        const auto mm = oracle::moments(mc[k]);
        double sc_mean = 0.0;
        for (double v : sc[k]) {
            sc_mean += v / static_cast<double>(sc[k].size());
        }
        const double se = batch_means_se(sc[k]);
        const double zscore = (mm.mean - sc_mean) / std::sqrt(mm.se * mm.se + se * se);
        ok = ok && std::abs(zscore) < 4.0;
        worst = std::max(worst, std::abs(zscore));
        detail += std::string(" ") + names[k] + "=" + fmt(zscore, 2);
    }

    const auto data = sim1_data(Family::SkewNormal, 100, 9);
    const MeTheta t = sim1_theta(Family::SkewNormal);
    const double base = observed_loglik(t, data);
    double clone_err = 0.0;
    for (double k : {2.0, 4.0, 8.0, 16.0}) {
        clone_err = std::max(clone_err, std::abs(observed_loglik(t, data, k) - k * base) / std::abs(k * base));
    }
    ok = ok && clone_err <= 1e-12;
    return {ok, "Geweke max |z| = " + fmt(worst, 3) + " (" + detail + "); clone identity rel err " + fmt(clone_err, 2)};
}

// ---------------------------------------------------------------- 9

int run_cli(const std::string &args) {
    const std::string cmd = std::string(SMSNME_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome cli_determinism() {
    const fs::path root = fs::temp_directory_path() / ("smsnme_accept_" + std::to_string(::getpid()));
    fs::remove_all(root);
    const std::string mcmc = " --iters 2000 --burnin 500 --thin 5 --seed 4";
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"simulate", "simulate --preset sim1-fmst --n 150 --seed 9"},
        {"simulate-nig", "simulate --preset sim2-nig --n 100 --seed 9"},
        {"fit", "fit --data {data} --model fmst --g 2" + mcmc},
        {"compare", "compare --data {data} --models fmn,fmsn:2,fmst:2" + mcmc},
        {"ppc", "diagnose --data {data} --ppc --chain {fit} --seed 6"},
        {"dclone", "diagnose --data {data} --dclone --levels 1,2,4 --model fmsn --g 2" + mcmc},
    };

    std::vector<std::string> mismatches;
    for (const char *run : {"a", "b"}) {
        for (const auto &[name, cmd] : commands) {
            const fs::path out = root / run / name;
            fs::create_directories(out);
            std::string args = cmd;
            auto subst = [&](const std::string &key, const std::string &value) {
                for (auto pos = args.find(key); pos != std::string::npos; pos = args.find(key)) {
                    args.replace(pos, key.size(), value);
                }
            };
            subst("{data}", (root / run / "simulate" / "data.csv").string());
            subst("{fit}", (root / run / "fit").string());
            if (run_cli(args + " --out " + out.string()) != 0) {
                mismatches.push_back(name + " exited nonzero");
            }
        }
    }
    std::size_t files = 0;
    for (const auto &[name, cmd] : commands) {
        for (const auto &entry : fs::directory_iterator(root / "a" / name)) {
            const fs::path other = root / "b" / name / entry.path().filename();
            ++files;
            // Manifests record the input paths, which differ between the two runs.
            std::string lhs = slurp(entry.path()), rhs = slurp(other);
            const std::string da = (root / "a").string(), db = (root / "b").string();
            for (auto pos = lhs.find(da); pos != std::string::npos; pos = lhs.find(da)) {
                lhs.replace(pos, da.size(), "<run>");
            }
            for (auto pos = rhs.find(db); pos != std::string::npos; pos = rhs.find(db)) {
                rhs.replace(pos, db.size(), "<run>");
            }
            if (lhs.empty() || lhs != rhs) {
                mismatches.push_back(name + "/" + entry.path().filename().string());
            }
        }
    }
    fs::remove_all(root);
    std::string detail = std::to_string(files) + " files compared across " + std::to_string(commands.size()) +
                         " commands";
    for (const auto &m : mismatches) {
        detail += "; differs: " + m;
    }
    return {mismatches.empty() && files > 0, detail};
}

} // namespace

int main(int argc, char **argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--quick") {
            g_quick = true;
        } else if (arg == "--only" && i + 1 < argc) {
            std::stringstream list(argv[++i]);
            for (std::string item; std::getline(list, item, ',');) {
                only.insert(std::stoi(item));
            }
        } else {
            std::cerr << "usage: acceptance [--quick] [--only N[,N...]]\n";
            return 2;
        }
    }

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"parameter recovery, FMSN-ME n=500, 5 seeds", parameter_recovery},
        {"nu recovery, FMST-ME n=500, 5 seeds", nu_recovery},
        {"DIC ordering on FMNIG-ME data, n=100, G=3", dic_ordering},
        {"Bayesian p-value, well- and misspecified fits", bayesian_pvalue},
        {"data cloning eigenvalue decay, n=200", data_cloning},
        {"distribution property suite", property_suite},
        {"DIC algebra", dic_algebra},
        {"sampler correctness (Geweke, clone identity)", sampler_correctness},
        {"CLI byte determinism", cli_determinism},
    };

    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k) + 1;
        if (!only.empty() && only.count(id) == 0) {
            continue;
        }
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception &e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << criteria[k].first << ": " << o.detail
                  << " (" << fmt(secs, 3) << " s)" << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
