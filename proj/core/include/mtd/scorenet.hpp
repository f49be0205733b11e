#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mtd/image.hpp"

namespace mtd {

enum class LayerKind : std::uint8_t { kConv = 0, kDense = 1, kElu = 2, kSoftplus = 3 };

/// One network layer. Conv weights are (out, in, k, k) row-major with
/// zero "same" padding and cross-correlation orientation; dense weights are
/// (out, in) over the channel-major flattened tensor. Activations carry no
/// parameters.
struct Layer {
  LayerKind kind = LayerKind::kElu;
  int in = 0;
  int out = 0;
  int kernel = 0;  // conv only
  std::vector<float> weights;
  std::vector<float> biases;
};

/// Feed-forward score network over 1 x L x L inputs.
///
/// SCORENET1 layout, little-endian:
///   char[9] "SCORENET1", u32 version (=1), u32 L, f32 sigma_dsm, u32 layer_count
///   per layer: u8 kind
///     conv:  u32 in_ch, u32 out_ch, u32 k, f32 weights[out*in*k*k], f32 biases[out]
///     dense: u32 in, u32 out, f32 weights[out*in], f32 biases[out]
///   f32 test_input[L*L], f32 test_output[L*L]
struct NeuralScoreNet {
  int L = 0;
  float sigma_dsm = 0.0f;
  std::vector<Layer> layers;
  std::vector<float> test_input;
  std::vector<float> test_output;

  /// Throws ConfigError("validation ...") on inconsistent layer shapes.
  void validate() const;
  /// Forward pass in double precision. Throws NumericError if any activation
  /// is non-finite.
  Image forward(const Image& x) const;
  /// Max |forward(test_input) - test_output|.
  double parity_error() const;
};

inline constexpr std::uint32_t kScoreNetVersion = 1;

/// Parses and validates; never returns a partially read network.
NeuralScoreNet load_scorenet(std::span<const std::uint8_t> bytes);
NeuralScoreNet load_scorenet(const std::filesystem::path& path);
std::vector<std::uint8_t> save_scorenet(const NeuralScoreNet& net);
void save_scorenet(const NeuralScoreNet& net, const std::filesystem::path& path);

/// conv3x3(1->w) ELU conv3x3(w->w) ELU conv3x3(w->w) ELU conv3x3(w->1), with
/// weights drawn uniformly in +-1/sqrt(fan_in). The test vector holds a
/// seeded uniform [0,1] input and this implementation's forward pass on it.
NeuralScoreNet make_reference_scorenet(int L, float sigma_dsm, std::uint64_t seed, int width = 32);

/// Replaces the test vector with (input, forward(input)).
void set_test_vector(NeuralScoreNet& net, const Image& input);

}  // namespace mtd
