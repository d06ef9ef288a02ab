#ifndef SMSNME_IO_HPP
#define SMSNME_IO_HPP

/** \file
 * CSV and manifest persistence. Numbers are written in shortest round-trip
 * form so that a chain read back from disk reproduces the stored doubles.
 */

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "json.hpp"

#include "smsnme/inference.hpp"

namespace smsnme {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

/// Header row of column names, first column the covariate X. Errors name the line.
Dataset read_dataset_csv(std::istream &in);
Dataset read_dataset_csv(const std::filesystem::path &path);
void write_dataset_csv(const Dataset &data, std::ostream &out);
/// Per-row simulated latents: x, label (1-based), u, t.
void write_latents_csv(const MeLatents &latents, std::ostream &out);

/// One row per stored draw: draw, loglik, then the named parameter columns.
void write_chain_csv(const Chain &chain, std::ostream &out);
/// Reads draws and log-likelihoods back; dimensions are inferred from the header.
Chain read_chain_csv(std::istream &in, Family family);
/// Posterior mean of each latent x_i and its modal component (1-based).
void write_latent_summary_csv(const Chain &chain, std::ostream &out);
void write_summary_csv(const Chain &chain, std::ostream &out);

nlohmann::json to_json(const McmcConfig &config);
nlohmann::json to_json(const PriorSpec &prior);

/// FNV-1a over the file bytes, as 16 hex digits.
std::string file_checksum(const std::filesystem::path &path);

/// Writes to a sibling temporary file and renames it over `path`.
void atomic_write(const std::filesystem::path &path, const std::string &content);

} // namespace smsnme

#endif
