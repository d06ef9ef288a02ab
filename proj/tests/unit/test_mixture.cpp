#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>

#include "oracles.hpp"
#include "smsnme/errors.hpp"
#include "smsnme/mixture.hpp"
#include "smsnme/numerics.hpp"

using namespace smsnme;

namespace {

Vector v1(double x) { return Vector::Constant(1, x); }

SmsnParams sn(double mu, double sigma, double delta) {
    return SmsnParams(v1(mu), Matrix::Constant(1, 1, sigma), v1(delta), Family::SkewNormal);
}

MixtureSpec two_sn() { return MixtureSpec({sn(-1.0, 0.5, 1.0), sn(2.0, 1.0, -0.7)}, Vector{{0.35, 0.65}}); }

} // namespace

TEST_CASE("single and duplicated components") {
    const auto c = sn(0.3, 1.1, 0.4);
    const MixtureSpec one({c}, v1(1.0));
    const MixtureSpec dup({c, c}, Vector{{0.5, 0.5}});
    for (double x : {-1.0, 0.0, 2.5}) {
        CHECK(mixture_pdf(v1(x), one) == doctest::Approx(c.pdf(v1(x))).epsilon(1e-14));
        CHECK(mixture_pdf(v1(x), dup) == doctest::Approx(c.pdf(v1(x))).epsilon(1e-14));
    }
}

TEST_CASE("two skew-normal components against a direct weighted sum") {
    const auto spec = two_sn();
    for (double x : {-3.0, -1.0, 0.2, 1.9, 4.0}) {
        const double ref = 0.35 * oracle::sn_pdf(x, -1.0, 0.5, 1.0) + 0.65 * oracle::sn_pdf(x, 2.0, 1.0, -0.7);
        CHECK(std::abs(mixture_pdf(v1(x), spec) - ref) < 1e-10);
    }
}

TEST_CASE("label permutation leaves the density unchanged") {
    const MixtureSpec a({sn(-1.0, 0.5, 1.0), sn(2.0, 1.0, -0.7)}, Vector{{0.35, 0.65}});
    const MixtureSpec b({sn(2.0, 1.0, -0.7), sn(-1.0, 0.5, 1.0)}, Vector{{0.65, 0.35}});
    for (double x = -4.0; x <= 5.0; x += 0.37) {
        CHECK(mixture_pdf(v1(x), a) == doctest::Approx(mixture_pdf(v1(x), b)).epsilon(1e-14));
    }
}

TEST_CASE("normalization") {
    const auto spec = two_sn();
    const double total = oracle::integrate([&](double x) { return mixture_pdf(v1(x), spec); }, -20, 20);
    CHECK(std::abs(total - 1.0) < 1e-4);
}

TEST_CASE("weight validation") {
    CHECK_NOTHROW(MixtureSpec({sn(0, 1, 0), sn(1, 1, 0)}, Vector{{0.5, 0.5 + 1e-9}}));
    CHECK_THROWS_AS(MixtureSpec({sn(0, 1, 0), sn(1, 1, 0)}, Vector{{0.5, 0.6}}), ParameterError);
    CHECK_THROWS_AS(MixtureSpec({sn(0, 1, 0), sn(1, 1, 0)}, Vector{{1.2, -0.2}}), ParameterError);
    const SmsnParams t(v1(0), Matrix::Constant(1, 1, 1.0), v1(0), Family::SkewT, {3.0, 0, 1});
    CHECK_THROWS_AS(MixtureSpec({sn(0, 1, 0), t}, Vector{{0.5, 0.5}}), ParameterError);
}

TEST_CASE("sampling labels and values") {
    Rng rng = make_stream(1, 0);
    const MixtureSpec degenerate({sn(0, 1, 0), sn(5, 1, 0)}, Vector{{1.0, 0.0}});
    for (auto l : mixture_sample(degenerate, 1000, rng).labels) {
        REQUIRE(l == 0);
    }

    const MixtureSpec spec({sn(-1.0, 0.5, 1.0), sn(2.0, 1.0, -0.7)}, Vector{{0.7, 0.3}});
    const std::size_t n = 100000;
    const auto s = mixture_sample(spec, n, rng);
    double first = 0.0;
    for (auto l : s.labels) {
        first += l == 0 ? 1.0 : 0.0;
    }
    CHECK(std::abs(first / n - 0.7) < 3.0 * std::sqrt(0.7 * 0.3 / n));

    // Chi-square over 20 equal-width bins spanning the sample.
    const int bins = 20;
    const double lo = s.values.minCoeff() - 1e-9, hi = s.values.maxCoeff() + 1e-9;
    const double width = (hi - lo) / bins;
    std::vector<double> observed(bins, 0.0);
    for (Eigen::Index i = 0; i < s.values.rows(); ++i) {
        observed[static_cast<std::size_t>(std::min(bins - 1, static_cast<int>((s.values(i, 0) - lo) / width)))] += 1;
    }
    double chi2 = 0.0;
    int used = 0;
    for (int b = 0; b < bins; ++b) {
        const double e = n * oracle::integrate([&](double x) { return mixture_pdf(v1(x), spec); },
                                               lo + b * width, lo + (b + 1) * width);
        if (e > 5.0) {
            const double o = observed[static_cast<std::size_t>(b)];
            chi2 += (o - e) * (o - e) / e;
            ++used;
        }
    }
    CHECK(chi2 < boost::math::quantile(boost::math::chi_squared(used - 1), 0.99));
}

TEST_CASE("log-sum-exp helpers") {
    const std::vector<double> v{-1000.0, -1000.0};
    CHECK(log_sum_exp(v) == doctest::Approx(-1000.0 + std::log(2.0)).epsilon(1e-15));
    const std::vector<double> empty_mass{-INFINITY, -INFINITY};
    CHECK(log_sum_exp(empty_mass) == -INFINITY);
    CHECK(log_add_exp(0.0, 0.0) == doctest::Approx(std::log(2.0)));
}
