#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include <json.hpp>

#include "mtd/score_prior.hpp"

namespace mtd::cli {

enum class PriorKind { kNone, kGaussian, kGmm, kNeural };

PriorKind parse_prior_kind(const std::string& name);
std::string to_string(PriorKind kind);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const nlohmann::json& doc, const std::filesystem::path& path);

/// Prior JSON documents:
///   {"kind": "gaussian", "side": L, "mean": x | [L*L], "variance": v | [L*L]}
///   {"kind": "gmm", "side": L, "components": [{"weight": w, "mean": [L*L], "variance": v}, ...]}
GaussianPrior gaussian_from_json(const nlohmann::json& doc);
GmmPrior gmm_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const GmmPrior& prior);

/// ZeroScore for kNone (path ignored); JSON for gaussian/gmm; SCORENET1 for
/// neural. Throws ShapeError if the prior side is not `side`.
std::unique_ptr<ScoreProvider> load_prior(PriorKind kind, const std::filesystem::path& path, int side);

/// Mixture whose component means are sums of a few random Gaussian bumps,
/// clipped to [0, 1]; equal weights and a shared variance.
GmmPrior make_blob_gmm(int side, int components, double variance, std::uint64_t seed);

}  // namespace mtd::cli
