#include "cli/prior_file.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "mtd/error.hpp"
#include "mtd/scorenet.hpp"

namespace mtd::cli {
namespace {

using nlohmann::json;

Image image_field(const json& value, int side, const char* name) {
  if (value.is_number()) return Image(side, side, value.get<double>());
  if (!value.is_array() || value.size() != static_cast<std::size_t>(side) * side) {
    throw FormatError(std::string("prior field '") + name + "' must be a number or " +
                      std::to_string(side * side) + " values");
  }
  std::vector<double> data;
  for (const json& v : value) {
    if (!v.is_number()) throw FormatError(std::string("non-numeric entry in prior field '") + name + "'");
    data.push_back(v.get<double>());
  }
  return Image(side, side, std::move(data));
}

int read_side(const json& doc) {
  if (!doc.contains("side") || !doc["side"].is_number_integer() || doc["side"].get<int>() < 1) {
    throw FormatError("prior document needs a positive integer 'side'");
  }
  return doc["side"].get<int>();
}

void expect_kind(const json& doc, const std::string& kind) {
  if (!doc.is_object() || doc.value("kind", std::string()) != kind) {
    throw FormatError("expected a prior document of kind '" + kind + "'");
  }
}

}  // namespace

PriorKind parse_prior_kind(const std::string& name) {
  if (name == "none") return PriorKind::kNone;
  if (name == "gaussian") return PriorKind::kGaussian;
  if (name == "gmm") return PriorKind::kGmm;
  if (name == "neural") return PriorKind::kNeural;
  throw ConfigError("unknown prior '" + name + "' (none, gaussian, gmm, neural)");
}

std::string to_string(PriorKind kind) {
  switch (kind) {
    case PriorKind::kNone:
      return "none";
    case PriorKind::kGaussian:
      return "gaussian";
    case PriorKind::kGmm:
      return "gmm";
    case PriorKind::kNeural:
      return "neural";
  }
  return "none";
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_json(const json& doc, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

GaussianPrior gaussian_from_json(const json& doc) {
  expect_kind(doc, "gaussian");
  const int side = read_side(doc);
  if (!doc.contains("mean") || !doc.contains("variance")) throw FormatError("gaussian prior needs mean and variance");
  return GaussianPrior(image_field(doc["mean"], side, "mean"), image_field(doc["variance"], side, "variance"));
}

GmmPrior gmm_from_json(const json& doc) {
  expect_kind(doc, "gmm");
  const int side = read_side(doc);
  if (!doc.contains("components") || !doc["components"].is_array()) throw FormatError("gmm prior needs components");
  std::vector<GmmPrior::Component> comps;
  for (const json& c : doc["components"]) {
    if (!c.is_object() || !c.contains("weight") || !c.contains("mean") || !c.contains("variance") ||
        !c["weight"].is_number() || !c["variance"].is_number()) {
      throw FormatError("gmm component needs numeric weight, mean and variance");
    }
    comps.push_back({c["weight"].get<double>(), image_field(c["mean"], side, "mean"), c["variance"].get<double>()});
  }
  return GmmPrior(std::move(comps));
}

json to_json(const GmmPrior& prior) {
  json doc;
  doc["kind"] = "gmm";
  doc["side"] = prior.side();
  doc["components"] = json::array();
  for (const GmmPrior::Component& c : prior.components()) {
    doc["components"].push_back({{"weight", c.weight}, {"mean", c.mean.data()}, {"variance", c.variance}});
  }
  return doc;
}

std::unique_ptr<ScoreProvider> load_prior(PriorKind kind, const std::filesystem::path& path, int side) {
  std::unique_ptr<ScoreProvider> prior;
  switch (kind) {
    case PriorKind::kNone:
      return std::make_unique<ZeroScore>(side);
    case PriorKind::kGaussian:
      prior = std::make_unique<GaussianPrior>(gaussian_from_json(read_json(path)));
      break;
    case PriorKind::kGmm:
      prior = std::make_unique<GmmPrior>(gmm_from_json(read_json(path)));
      break;
    case PriorKind::kNeural:
      prior = std::make_unique<NeuralScore>(load_scorenet(path));
      break;
  }
  if (prior->side() != side) {
    throw ShapeError(to_string(kind) + " prior is " + std::to_string(prior->side()) + " pixels, iterate is " +
                     std::to_string(side));
  }
  return prior;
}

GmmPrior make_blob_gmm(int side, int components, double variance, std::uint64_t seed) {
  if (side < 1 || components < 1) throw ConfigError("mixture needs a positive side and component count");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(0.0, side);
  std::uniform_real_distribution<double> amp(0.5, 1.0);
  std::uniform_real_distribution<double> width(0.12 * side, 0.3 * side);
  std::vector<GmmPrior::Component> comps;
  for (int k = 0; k < components; ++k) {
    Image mean(side, side);
    for (int bump = 0; bump < 3; ++bump) {
      const double cy = pos(rng), cx = pos(rng), a = amp(rng), w = width(rng);
      for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
          const double d2 = (r + 0.5 - cy) * (r + 0.5 - cy) + (c + 0.5 - cx) * (c + 0.5 - cx);
          mean.at(r, c) += a * std::exp(-d2 / (2.0 * w * w));
        }
      }
    }
    for (double& v : mean.values()) v = std::min(v, 1.0);
    comps.push_back({1.0 / components, std::move(mean), variance});
  }
  return GmmPrior(std::move(comps));
}

}  // namespace mtd::cli
