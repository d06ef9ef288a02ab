#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "smsnme/errors.hpp"
#include "smsnme/io.hpp"

using namespace smsnme;

TEST_CASE("format_double round trips") {
    Rng rng = make_stream(1, 0);
    for (int i = 0; i < 2000; ++i) {
        const double v = std_normal(rng) * std::pow(10.0, static_cast<int>(i % 40) - 20);
        REQUIRE(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(std::strtod(format_double(std::numeric_limits<double>::denorm_min()).c_str(), nullptr) ==
          std::numeric_limits<double>::denorm_min());
}

TEST_CASE("dataset csv round trip and errors") {
    Rng rng = make_stream(2, 0);
    const Dataset data = simulate_me(sim1_theta(Family::SkewT), 40, rng).data;
    std::stringstream buf;
    write_dataset_csv(data, buf);
    const Dataset back = read_dataset_csv(buf);
    CHECK(back.size() == 40);
    CHECK(back.responses() == 2);
    CHECK((back.z().array() == data.z().array()).all());

    std::istringstream bad("X,Y1,Y2\n1,2,3\n4,abc,6\n");
    try {
        read_dataset_csv(bad);
        FAIL("expected InputError");
    } catch (const InputError &e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 3") != std::string::npos);
        CHECK(msg.find("Y1") != std::string::npos);
    }
    std::istringstream ragged("X,Y1\n1,2\n3\n");
    CHECK_THROWS_AS(read_dataset_csv(ragged), InputError);
    std::istringstream nan("X,Y1\n1,nan\n");
    CHECK_THROWS_AS(read_dataset_csv(nan), InputError);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_dataset_csv(empty), InputError);
    CHECK_THROWS_AS(read_dataset_csv(std::filesystem::path("/nonexistent/data.csv")), InputError);
}

TEST_CASE("chain csv round trip is exact") {
    Rng rng = make_stream(3, 0);
    const Dataset data = simulate_me(sim1_theta(Family::SkewContaminatedNormal), 60, rng).data;
    McmcConfig c;
    c.iterations = 300;
    c.burn_in = 100;
    c.thin = 4;
    const Chain chain = relabel_chain(gibbs_fit(data, 2, Family::SkewContaminatedNormal, PriorSpec{}, c));
    std::stringstream buf;
    write_chain_csv(chain, buf);
    const Chain back = read_chain_csv(buf, Family::SkewContaminatedNormal);
    REQUIRE(back.size() == chain.size());
    CHECK(back.groups == 2);
    for (std::size_t l = 0; l < chain.size(); ++l) {
        REQUIRE((flatten(back.draws[l]).array() == flatten(chain.draws[l]).array()).all());
        REQUIRE(back.loglik[l] == chain.loglik[l]);
    }

    std::stringstream summary;
    write_summary_csv(chain, summary);
    CHECK(summary.str().rfind("parameter,mean,sd,q2.5,q97.5\n", 0) == 0);
    std::stringstream latent;
    write_latent_summary_csv(chain, latent);
    CHECK(latent.str().rfind("row,x_mean,modal_label\n", 0) == 0);
}

TEST_CASE("manifest helpers") {
    const auto dir = std::filesystem::temp_directory_path() / "smsnme_io_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "a.txt";
    atomic_write(path, "hello");
    std::ifstream in(path);
    std::string s;
    std::getline(in, s);
    CHECK(s == "hello");
    const std::string sum = file_checksum(path);
    CHECK(sum.size() == 16);
    CHECK(sum == "a430d84680aabd0b"); // FNV-1a 64 of "hello"
    CHECK_FALSE(std::filesystem::exists(dir / "a.txt.tmp"));

    const auto j = to_json(McmcConfig{});
    CHECK(j.at("iterations") == 25000);
    CHECK(to_json(PriorSpec{}).contains("lambda0"));
    std::filesystem::remove_all(dir);
}
