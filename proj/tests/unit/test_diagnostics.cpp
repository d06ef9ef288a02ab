#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "smsnme/diagnostics.hpp"

using namespace smsnme;

namespace {

Dataset sim_data(std::size_t n, std::uint64_t seed) {
    Rng rng = make_stream(seed, 0);
    return simulate_me(sim1_theta(Family::SkewNormal), n, rng).data;
}

McmcConfig small_config() {
    McmcConfig c;
    c.iterations = 900;
    c.burn_in = 300;
    c.thin = 6;
    return c;
}

} // namespace

TEST_CASE("p-value from deviance pairs") {
    const std::vector<double> realized{1.0, 2.0, 3.0, 4.0};
    const std::vector<double> predictive{0.5, 2.0, 5.0, 3.0};
    CHECK(ppc_pvalue_from_pairs(realized, predictive) == 0.5);
    const std::vector<double> low{0.0, 0.0, 0.0, 0.0};
    CHECK(ppc_pvalue_from_pairs(realized, low) == 0.0);
    CHECK(ppc_pvalue_from_pairs(low, realized) == 1.0);
}

TEST_CASE("ppc is deterministic and consistent with its pairs") {
    const auto data = sim_data(100, 1);
    const Chain c = relabel_chain(gibbs_fit(data, 2, Family::SkewNormal, PriorSpec{}, small_config()));
    const PpcReport a = ppc_pvalue(c, data, 7);
    const PpcReport b = ppc_pvalue(c, data, 7);
    CHECK(a.draws == c.size());
    CHECK(a.realized == b.realized);
    CHECK(a.predictive == b.predictive);
    CHECK(a.p_value == ppc_pvalue_from_pairs(a.realized, a.predictive));
    CHECK(a.p_value >= 0.0);
    CHECK(a.p_value <= 1.0);
    for (std::size_t l = 0; l < c.size(); ++l) {
        REQUIRE(a.realized[l] == doctest::Approx(-2.0 * c.loglik[l]).epsilon(1e-10));
    }
    std::ostringstream out;
    write_ppc_csv(a, out);
    CHECK(out.str().rfind("draw,realized,predictive\n", 0) == 0);
}

TEST_CASE("clone transform uses additive log-ratio weights") {
    const MeTheta t = sim1_theta(Family::SkewT);
    const Vector g = clone_transform(t);
    const auto names = clone_transform_names(Family::SkewT, 2, 2);
    CHECK(static_cast<std::size_t>(g.size()) == names.size());
    const Vector flat = flatten(t);
    CHECK(g.size() == flat.size() - 1);
    bool found = false;
    for (std::size_t k = 0; k < names.size(); ++k) {
        if (names[k].find("weight") != std::string::npos || names[k].find("alr") != std::string::npos) {
            CHECK(g(static_cast<Eigen::Index>(k)) == doctest::Approx(std::log(t.weights(0) / t.weights(1))));
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("clone level summary") {
    Rng rng = make_stream(3, 0);
    std::vector<Vector> draws(400, Vector(3));
    std::vector<double> trace(400);
    for (std::size_t l = 0; l < draws.size(); ++l) {
        const double a = std_normal(rng), b = std_normal(rng), c = std_normal(rng);
        draws[l] << a, a + 0.5 * b, 0.1 * c;
        trace[l] = std_normal(rng);
    }
    const CloneLevel lvl = summarize_clone_level(1, draws, trace);
    CHECK(lvl.converged);
    CHECK((lvl.covariance - lvl.covariance.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(lvl.covariance);
    CHECK(es.eigenvalues().minCoeff() >= 0.0);
    CHECK(lvl.lambda_max == doctest::Approx(es.eigenvalues().maxCoeff()).epsilon(1e-12));

    std::vector<double> drift(400);
    for (std::size_t l = 0; l < drift.size(); ++l) {
        drift[l] = static_cast<double>(l) + 0.1 * std_normal(rng);
    }
    CHECK(std::abs(trace_drift_z(trace)) < 4.0);
    CHECK(std::abs(trace_drift_z(drift)) > 5.0);
    CHECK_FALSE(summarize_clone_level(2, draws, drift).converged);
    CHECK_FALSE(summarize_clone_level(2, {draws[0]}, std::span<const double>(trace.data(), 1)).converged);
    CHECK(batch_means_se(trace) > 0.0);
}

TEST_CASE("clone report normalizes by the first retained level") {
    std::vector<CloneLevel> levels(3);
    levels[0].k = 4;
    levels[0].lambda_max = 0.5;
    levels[1].k = 1;
    levels[1].lambda_max = 2.0;
    levels[1].converged = false;
    levels[2].k = 2;
    levels[2].lambda_max = 1.0;
    const CloneReport r = assemble_clone_report({"a"}, levels);
    REQUIRE(r.levels.size() == 2);
    CHECK(r.omitted == std::vector<std::size_t>{1});
    CHECK(r.levels[0].k == 2);
    CHECK(r.levels[0].lambda_hat == 1.0);
    CHECK(r.levels[1].lambda_hat == doctest::Approx(0.5));
    std::ostringstream out;
    write_clone_csv(r, out);
    CHECK(out.str().rfind("K,lambda_hat,inv_K,lambda_max\n", 0) == 0);
}

TEST_CASE("clone weight multiplies the log-likelihood") {
    const auto data = sim_data(50, 4);
    const MeTheta t = sim1_theta(Family::SkewNormal);
    const double base = observed_loglik(t, data);
    for (double k : {2.0, 5.0, 16.0}) {
        CHECK(std::abs(observed_loglik(t, data, k) - k * base) <= 1e-12 * std::abs(k * base));
    }
}

TEST_CASE("data cloning runs per level") {
    const auto data = sim_data(60, 5);
    const CloneReport r = data_clone(data, 2, Family::SkewNormal, PriorSpec{}, small_config(), {1, 2});
    CHECK(r.levels.size() + r.omitted.size() == 2);
    if (!r.levels.empty()) {
        CHECK(r.levels[0].lambda_hat == 1.0);
    }
    const CloneReport again = data_clone(data, 2, Family::SkewNormal, PriorSpec{}, small_config(), {1, 2});
    REQUIRE(again.levels.size() == r.levels.size());
    for (std::size_t i = 0; i < r.levels.size(); ++i) {
        CHECK(again.levels[i].lambda_max == r.levels[i].lambda_max);
    }
}
