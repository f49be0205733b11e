#include "mtd/scorenet.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <string>

#include "mtd/error.hpp"
#include "mtd/image_io.hpp"

namespace mtd {

static_assert(std::endian::native == std::endian::little, "file formats assume a little-endian host");

namespace {

constexpr char kMagic[9] = {'S', 'C', 'O', 'R', 'E', 'N', 'E', 'T', '1'};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::vector<float> floats(std::size_t n, const char* what) {
    if (n > (bytes_.size() - pos_) / sizeof(float)) throw LengthError(std::string("SCORENET1 ") + what);
    std::vector<float> v(n);
    std::memcpy(v.data(), bytes_.data() + pos_, n * sizeof(float));
    pos_ += n * sizeof(float);
    return v;
  }

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) throw LengthError(std::string("SCORENET1 ") + what);
  }
  bool done() const noexcept { return pos_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

void put_floats(std::vector<std::uint8_t>& out, const std::vector<float>& v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(v.data());
  out.insert(out.end(), p, p + v.size() * sizeof(float));
}

// Sanity cap on any one layer dimension, so a corrupt header cannot request
// gigabytes before the length check runs.
constexpr std::uint32_t kMaxDim = 1u << 16;

void conv_same(const std::vector<double>& in, int channels, int L, const Layer& layer, std::vector<double>& out) {
  const int k = layer.kernel;
  const int pad = k / 2;
  const std::size_t plane = static_cast<std::size_t>(L) * L;
  out.assign(static_cast<std::size_t>(layer.out) * plane, 0.0);
  for (int o = 0; o < layer.out; ++o) {
    double* dst = out.data() + o * plane;
    for (std::size_t p = 0; p < plane; ++p) dst[p] = layer.biases[static_cast<std::size_t>(o)];
    for (int i = 0; i < channels; ++i) {
      const double* src = in.data() + i * plane;
      for (int u = 0; u < k; ++u) {
        for (int v = 0; v < k; ++v) {
          const double w =
              layer.weights[((static_cast<std::size_t>(o) * channels + i) * k + u) * k + v];
          const int dr = u - pad;
          const int dc = v - pad;
          const int r_lo = std::max(0, -dr), r_hi = std::min(L, L - dr);
          const int c_lo = std::max(0, -dc), c_hi = std::min(L, L - dc);
          for (int r = r_lo; r < r_hi; ++r) {
            const double* s = src + static_cast<std::size_t>(r + dr) * L + dc;
            double* d = dst + static_cast<std::size_t>(r) * L;
            for (int c = c_lo; c < c_hi; ++c) d[c] += w * s[c];
          }
        }
      }
    }
  }
}

}  // namespace

void NeuralScoreNet::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("validation error: " + what); };
  if (L < 1) fail("L must be positive");
  if (layers.empty()) fail("network has no layers");
  const std::size_t plane = static_cast<std::size_t>(L) * L;
  std::size_t channels = 1;
  for (std::size_t n = 0; n < layers.size(); ++n) {
    const Layer& layer = layers[n];
    const std::string where = "layer " + std::to_string(n) + ": ";
    switch (layer.kind) {
      case LayerKind::kConv:
        if (static_cast<std::size_t>(layer.in) != channels) {
          fail(where + "conv expects " + std::to_string(layer.in) + " channels, receives " + std::to_string(channels));
        }
        if (layer.kernel < 1 || layer.kernel % 2 == 0) fail(where + "conv kernel must be odd");
        if (layer.out < 1) fail(where + "conv needs at least one output channel");
        if (layer.weights.size() !=
            static_cast<std::size_t>(layer.out) * layer.in * layer.kernel * layer.kernel) {
          fail(where + "conv weight count mismatch");
        }
        if (layer.biases.size() != static_cast<std::size_t>(layer.out)) fail(where + "conv bias count mismatch");
        channels = static_cast<std::size_t>(layer.out);
        break;
      case LayerKind::kDense:
        if (static_cast<std::size_t>(layer.in) != channels * plane) {
          fail(where + "dense expects " + std::to_string(layer.in) + " inputs, receives " +
               std::to_string(channels * plane));
        }
        if (layer.out < 1 || static_cast<std::size_t>(layer.out) % plane != 0) {
          fail(where + "dense output must be a positive multiple of L*L");
        }
        if (layer.weights.size() != static_cast<std::size_t>(layer.out) * layer.in) {
          fail(where + "dense weight count mismatch");
        }
        if (layer.biases.size() != static_cast<std::size_t>(layer.out)) fail(where + "dense bias count mismatch");
        channels = static_cast<std::size_t>(layer.out) / plane;
        break;
      case LayerKind::kElu:
      case LayerKind::kSoftplus:
        break;
      default:
        fail(where + "unknown layer kind");
    }
  }
  if (channels != 1) fail("network must end with a single channel, ends with " + std::to_string(channels));
  if (test_input.size() != plane || test_output.size() != plane) fail("test vector must hold L*L input and output");
}

Image NeuralScoreNet::forward(const Image& x) const {
  if (x.width() != L || x.height() != L) throw ShapeError("network input must be " + std::to_string(L) + "x" + std::to_string(L));
  const std::size_t plane = static_cast<std::size_t>(L) * L;
  std::vector<double> cur(x.values().begin(), x.values().end());
  std::vector<double> next;
  int channels = 1;
  for (const Layer& layer : layers) {
    switch (layer.kind) {
      case LayerKind::kConv:
        conv_same(cur, channels, L, layer, next);
        cur.swap(next);
        channels = layer.out;
        break;
      case LayerKind::kDense:
        next.assign(static_cast<std::size_t>(layer.out), 0.0);
        for (int o = 0; o < layer.out; ++o) {
          double acc = layer.biases[static_cast<std::size_t>(o)];
          const float* w = layer.weights.data() + static_cast<std::size_t>(o) * layer.in;
          for (int i = 0; i < layer.in; ++i) acc += w[i] * cur[static_cast<std::size_t>(i)];
          next[static_cast<std::size_t>(o)] = acc;
        }
        cur.swap(next);
        channels = static_cast<int>(static_cast<std::size_t>(layer.out) / plane);
        break;
      case LayerKind::kElu:
        for (double& v : cur) v = v > 0.0 ? v : std::expm1(v);
        break;
      case LayerKind::kSoftplus:
        // Linear above 20, matching the usual framework threshold.
        for (double& v : cur) v = v > 20.0 ? v : std::log1p(std::exp(v));
        break;
    }
    for (double v : cur) {
      if (!std::isfinite(v)) throw NumericError("non-finite activation in score network (corrupt weights?)");
    }
  }
  return Image(L, L, std::move(cur));
}

double NeuralScoreNet::parity_error() const {
  const std::vector<double> in(test_input.begin(), test_input.end());
  const Image out = forward(Image(L, L, in));
  double worst = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) worst = std::max(worst, std::abs(out[i] - test_output[i]));
  return worst;
}

NeuralScoreNet load_scorenet(std::span<const std::uint8_t> bytes) {
  Reader in(bytes);
  in.need(sizeof(kMagic), "magic");
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) throw FormatError("bad SCORENET1 magic");
  for (std::size_t i = 0; i < sizeof(kMagic); ++i) in.get<std::uint8_t>("magic");
  const auto version = in.get<std::uint32_t>("version");
  if (version != kScoreNetVersion) throw FormatError("unsupported SCORENET1 version " + std::to_string(version));

  NeuralScoreNet net;
  const auto L = in.get<std::uint32_t>("L");
  if (L == 0 || L > 1024) throw FormatError("implausible SCORENET1 side " + std::to_string(L));
  net.L = static_cast<int>(L);
  net.sigma_dsm = in.get<float>("sigma_dsm");
  const auto count = in.get<std::uint32_t>("layer count");
  if (count > 4096) throw FormatError("implausible SCORENET1 layer count");
  for (std::uint32_t n = 0; n < count; ++n) {
    Layer layer;
    const auto kind = in.get<std::uint8_t>("layer kind");
    if (kind > 3) throw FormatError("unknown SCORENET1 layer kind " + std::to_string(kind));
    layer.kind = static_cast<LayerKind>(kind);
    if (layer.kind == LayerKind::kConv) {
      const auto ci = in.get<std::uint32_t>("conv header");
      const auto co = in.get<std::uint32_t>("conv header");
      const auto k = in.get<std::uint32_t>("conv header");
      if (ci > kMaxDim || co > kMaxDim || k > 64) throw FormatError("implausible conv dimensions");
      layer.in = static_cast<int>(ci);
      layer.out = static_cast<int>(co);
      layer.kernel = static_cast<int>(k);
      layer.weights = in.floats(std::size_t{co} * ci * k * k, "conv weights");
      layer.biases = in.floats(co, "conv biases");
    } else if (layer.kind == LayerKind::kDense) {
      const auto fi = in.get<std::uint32_t>("dense header");
      const auto fo = in.get<std::uint32_t>("dense header");
      if (fi > (1u << 24) || fo > (1u << 24)) throw FormatError("implausible dense dimensions");
      layer.in = static_cast<int>(fi);
      layer.out = static_cast<int>(fo);
      layer.weights = in.floats(std::size_t{fo} * fi, "dense weights");
      layer.biases = in.floats(fo, "dense biases");
    }
    net.layers.push_back(std::move(layer));
  }
  net.test_input = in.floats(std::size_t{L} * L, "test input");
  net.test_output = in.floats(std::size_t{L} * L, "test output");
  if (!in.done()) throw FormatError("trailing bytes after SCORENET1 test vector");
  net.validate();
  return net;
}

NeuralScoreNet load_scorenet(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  return load_scorenet(bytes);
}

std::vector<std::uint8_t> save_scorenet(const NeuralScoreNet& net) {
  net.validate();
  std::vector<std::uint8_t> out(kMagic, kMagic + sizeof(kMagic));
  put<std::uint32_t>(out, kScoreNetVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(net.L));
  put<float>(out, net.sigma_dsm);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(net.layers.size()));
  for (const Layer& layer : net.layers) {
    put<std::uint8_t>(out, static_cast<std::uint8_t>(layer.kind));
    if (layer.kind == LayerKind::kConv) {
      put<std::uint32_t>(out, static_cast<std::uint32_t>(layer.in));
      put<std::uint32_t>(out, static_cast<std::uint32_t>(layer.out));
      put<std::uint32_t>(out, static_cast<std::uint32_t>(layer.kernel));
    } else if (layer.kind == LayerKind::kDense) {
      put<std::uint32_t>(out, static_cast<std::uint32_t>(layer.in));
      put<std::uint32_t>(out, static_cast<std::uint32_t>(layer.out));
    }
    if (layer.kind == LayerKind::kConv || layer.kind == LayerKind::kDense) {
      put_floats(out, layer.weights);
      put_floats(out, layer.biases);
    }
  }
  put_floats(out, net.test_input);
  put_floats(out, net.test_output);
  return out;
}

void save_scorenet(const NeuralScoreNet& net, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = save_scorenet(net);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

void set_test_vector(NeuralScoreNet& net, const Image& input) {
  const std::size_t plane = static_cast<std::size_t>(net.L) * net.L;
  net.test_input.assign(plane, 0.0f);
  net.test_output.assign(plane, 0.0f);
  for (std::size_t i = 0; i < plane; ++i) net.test_input[i] = static_cast<float>(input[i]);
  const std::vector<double> rounded(net.test_input.begin(), net.test_input.end());
  const Image out = net.forward(Image(net.L, net.L, rounded));
  for (std::size_t i = 0; i < plane; ++i) net.test_output[i] = static_cast<float>(out[i]);
}

NeuralScoreNet make_reference_scorenet(int L, float sigma_dsm, std::uint64_t seed, int width) {
  std::mt19937_64 rng(seed);
  NeuralScoreNet net;
  net.L = L;
  net.sigma_dsm = sigma_dsm;
  auto conv = [&](int in, int out) {
    Layer layer;
    layer.kind = LayerKind::kConv;
    layer.in = in;
    layer.out = out;
    layer.kernel = 3;
    const float bound = 1.0f / std::sqrt(static_cast<float>(in * 9));
    std::uniform_real_distribution<float> u(-bound, bound);
    layer.weights.resize(static_cast<std::size_t>(out) * in * 9);
    for (float& w : layer.weights) w = u(rng);
    layer.biases.resize(static_cast<std::size_t>(out));
    for (float& b : layer.biases) b = u(rng);
    return layer;
  };
  Layer elu;
  elu.kind = LayerKind::kElu;
  net.layers = {conv(1, width), elu, conv(width, width), elu, conv(width, width), elu, conv(width, 1)};
  Image probe = Image::square(L);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (double& v : probe.values()) v = u01(rng);
  net.test_input.assign(static_cast<std::size_t>(L) * L, 0.0f);
  net.test_output.assign(static_cast<std::size_t>(L) * L, 0.0f);
  set_test_vector(net, probe);
  return net;
}

}  // namespace mtd
