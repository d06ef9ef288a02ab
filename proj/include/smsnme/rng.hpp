#ifndef SMSNME_RNG_HPP
#define SMSNME_RNG_HPP

#include <cstdint>
#include <random>

namespace smsnme {

using Rng = std::mt19937_64;

/** \brief Derive an independent random stream from a master seed.
 *
 * Split rule: the generator is seeded with a `std::seed_seq` built from
 * splitmix64(seed), splitmix64(seed ^ splitmix64(stream + 1)) and the stream index.
 * Stream ids are fixed by the caller (chain index, clone level, draw index),
 * never by thread id, so results do not depend on scheduling.
 */
Rng make_stream(std::uint64_t seed, std::uint64_t stream);

std::uint64_t splitmix64(std::uint64_t x);

/// Uniform draw on the open interval (0, 1).
double uniform_open(Rng &rng);
double std_normal(Rng &rng);
/// Gamma with the given shape and *rate*.
double gamma_rate(Rng &rng, double shape, double rate);
double beta_draw(Rng &rng, double a, double b);

} // namespace smsnme

#endif
