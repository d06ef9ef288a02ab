#include "smsnme/rng.hpp"

#include <array>

#include "smsnme/errors.hpp"

namespace smsnme {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
    const std::uint64_t a = splitmix64(seed);
    const std::uint64_t b = splitmix64(seed ^ splitmix64(stream + 1));
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

double uniform_open(Rng &rng) {
    // 53 random bits, offset by half a step so 0 and 1 are both excluded.
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double std_normal(Rng &rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    return dist(rng);
}

double gamma_rate(Rng &rng, double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0)) {
        throw NumericalError("gamma draw with non-positive shape or rate");
    }
    std::gamma_distribution<double> dist(shape, 1.0 / rate);
    return dist(rng);
}

double beta_draw(Rng &rng, double a, double b) {
    const double x = gamma_rate(rng, a, 1.0);
    const double y = gamma_rate(rng, b, 1.0);
    return x / (x + y);
}

} // namespace smsnme
