#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "biosketch/error.hpp"
#include "biosketch/rng.hpp"

namespace biosketch {

using Vector = std::vector<double>;

enum class Modality { Face, Iris };

constexpr std::string_view to_string(Modality m) noexcept { return m == Modality::Face ? "face" : "iris"; }

/// One modality's feature vector as produced by an upstream network.
class Embedding {
 public:
  Embedding(Modality modality, Vector values) : modality_(modality), values_(std::move(values)) {
    if (values_.empty()) throw Error(Errc::InvalidParams, "embedding must have positive dimension");
    for (double v : values_) {
      if (!std::isfinite(v)) throw Error(Errc::InvalidParams, "embedding contains a non-finite value");
    }
  }

  Modality modality() const noexcept { return modality_; }
  const Vector& values() const noexcept { return values_; }
  std::size_t dimension() const noexcept { return values_.size(); }

  friend bool operator==(const Embedding&, const Embedding&) = default;

 private:
  Modality modality_;
  Vector values_;
};

enum class FusionMode { FCA, BLA };
enum class Activation { Identity, Rectifier };

constexpr std::string_view to_string(FusionMode m) noexcept { return m == FusionMode::FCA ? "fca" : "bla"; }
constexpr std::string_view to_string(Activation a) noexcept {
  return a == Activation::Identity ? "identity" : "relu";
}

inline constexpr std::size_t kDefaultFusedDim = 4096;

/// Parameters of the joint representation layer.
///
/// FCA: e = act(W [face; iris] + b), W is out_dim x (d_face + d_iris).
/// BLA: e = act(P vec(face iris^T)) with P out_dim x (d_face d_iris), or
///      act(vec(face iris^T)) when no projection is stored, in which case
///      out_dim = d_face d_iris. vec() is row-major.
/// Matrices are row-major. Values are float32 on disk, widened on load.
struct FusionWeights {
  FusionMode mode = FusionMode::FCA;
  Activation activation = Activation::Rectifier;
  std::size_t d_face = 0;
  std::size_t d_iris = 0;
  std::size_t out_dim = 0;
  Vector matrix;  // W (FCA) or P (BLA); empty for BLA without projection
  Vector bias;    // FCA only

  bool has_projection() const noexcept { return mode == FusionMode::FCA || !matrix.empty(); }

  std::size_t input_dim() const noexcept {
    return mode == FusionMode::FCA ? d_face + d_iris : d_face * d_iris;
  }

  void validate() const {
    if (d_face == 0 || d_iris == 0 || out_dim == 0) throw Error(Errc::DimensionMismatch, "zero dimension in weights");
    if (mode == FusionMode::FCA) {
      if (matrix.size() != out_dim * input_dim() || bias.size() != out_dim) {
        throw Error(Errc::DimensionMismatch, "FCA weight/bias sizes do not match the declared dims");
      }
    } else {
      if (!bias.empty()) throw Error(Errc::DimensionMismatch, "BLA weights carry no bias");
      if (matrix.empty() && out_dim != input_dim()) {
        throw Error(Errc::DimensionMismatch, "BLA without projection must have out_dim = d_face * d_iris");
      }
      if (!matrix.empty() && matrix.size() != out_dim * input_dim()) {
        throw Error(Errc::DimensionMismatch, "BLA projection size does not match the declared dims");
      }
    }
  }

  friend bool operator==(const FusionWeights&, const FusionWeights&) = default;
};

namespace detail {

inline double apply(Activation a, double x) noexcept { return a == Activation::Rectifier && x < 0.0 ? 0.0 : x; }

inline void check_inputs(const Embedding& face, const Embedding& iris, const FusionWeights& w) {
  if (face.modality() != Modality::Face || iris.modality() != Modality::Iris) {
    throw Error(Errc::DimensionMismatch, "expected (face, iris) embeddings");
  }
  if (face.dimension() != w.d_face || iris.dimension() != w.d_iris) {
    throw Error(Errc::DimensionMismatch, "embedding dims (" + std::to_string(face.dimension()) + ", " +
                                             std::to_string(iris.dimension()) + ") do not match weights (" +
                                             std::to_string(w.d_face) + ", " + std::to_string(w.d_iris) + ")");
  }
}

// y = A x for a row-major rows x x.size() matrix.
inline Vector matvec(const Vector& a, const Vector& x, std::size_t rows) {
  Vector y(rows, 0.0);
  const std::size_t cols = x.size();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = a.data() + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
  return y;
}

}  // namespace detail

/// Concatenate then fully connected layer.
inline Vector fuse_fca(const Embedding& face, const Embedding& iris, const FusionWeights& w) {
  if (w.mode != FusionMode::FCA) throw Error(Errc::DimensionMismatch, "weights are not FCA");
  detail::check_inputs(face, iris, w);
  Vector x = face.values();
  x.insert(x.end(), iris.values().begin(), iris.values().end());
  Vector e = detail::matvec(w.matrix, x, w.out_dim);
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = detail::apply(w.activation, e[i] + w.bias[i]);
  return e;
}

/// Outer product of the two embeddings, optionally projected.
inline Vector fuse_bla(const Embedding& face, const Embedding& iris, const FusionWeights& w) {
  if (w.mode != FusionMode::BLA) throw Error(Errc::DimensionMismatch, "weights are not BLA");
  detail::check_inputs(face, iris, w);
  Vector flat;
  flat.reserve(w.d_face * w.d_iris);
  for (double f : face.values()) {
    for (double i : iris.values()) flat.push_back(f * i);
  }
  Vector e = w.matrix.empty() ? std::move(flat) : detail::matvec(w.matrix, flat, w.out_dim);
  for (double& v : e) v = detail::apply(w.activation, v);
  return e;
}

inline Vector fuse(const Embedding& face, const Embedding& iris, const FusionWeights& w) {
  return w.mode == FusionMode::FCA ? fuse_fca(face, iris, w) : fuse_bla(face, iris, w);
}

/// Seeded Gaussian weights for synthetic experiments, entries ~ N(0, 1/fan_in)
/// rounded to float32 so that a save/load round trip is exact.
inline FusionWeights random_weights(FusionMode mode, std::size_t d_face, std::size_t d_iris,
                                    std::optional<std::size_t> out_dim, std::uint64_t seed) {
  FusionWeights w;
  w.mode = mode;
  w.d_face = d_face;
  w.d_iris = d_iris;
  w.activation = mode == FusionMode::FCA ? Activation::Rectifier : Activation::Identity;
  const std::size_t in = w.input_dim();
  if (mode == FusionMode::BLA && !out_dim) {
    w.out_dim = in;
  } else {
    w.out_dim = out_dim.value_or(kDefaultFusedDim);
    Rng rng(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));
    w.matrix.resize(w.out_dim * in);
    for (double& v : w.matrix) v = static_cast<float>(rng.normal() * scale);
    if (mode == FusionMode::FCA) w.bias.assign(w.out_dim, 0.0);
  }
  w.validate();
  return w;
}

// Weights file:
//
//   biosketch-weights 1\n
//   mode <fca|bla>\n
//   activation <identity|relu>\n
//   d_face <int>\n
//   d_iris <int>\n
//   out_dim <int>\n
//   projection <0|1>\n
//   payload <count>\n
//   <count little-endian IEEE-754 float32 values>
//
// FCA payload is W (row-major) followed by b. BLA payload is P (row-major)
// when projection is 1 and empty otherwise.

inline void save_weights(const FusionWeights& w, const std::filesystem::path& path) {
  w.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  const std::size_t count = w.matrix.size() + w.bias.size();
  out << "biosketch-weights 1\n"
      << "mode " << to_string(w.mode) << '\n'
      << "activation " << to_string(w.activation) << '\n'
      << "d_face " << w.d_face << '\n'
      << "d_iris " << w.d_iris << '\n'
      << "out_dim " << w.out_dim << '\n'
      << "projection " << (w.matrix.empty() ? 0 : 1) << '\n'
      << "payload " << count << '\n';
  auto put = [&](double v) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    const char bytes[4] = {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                           static_cast<char>((bits >> 16) & 0xff), static_cast<char>((bits >> 24) & 0xff)};
    out.write(bytes, 4);
  };
  for (double v : w.matrix) put(v);
  for (double v : w.bias) put(v);
  if (!out) throw Error(Errc::IoError, "short write to " + path.string());
}

inline FusionWeights load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  auto line = [&]() -> std::string {
    const auto nl = data.find('\n', pos);
    if (nl == std::string::npos) throw Error(Errc::ParseError, "truncated weights header");
    std::string s = data.substr(pos, nl - pos);
    pos = nl + 1;
    return s;
  };
  auto field = [&](std::string_view key) -> std::string {
    const std::string s = line();
    if (s.size() <= key.size() + 1 || s.compare(0, key.size(), key) != 0 || s[key.size()] != ' ') {
      throw Error(Errc::ParseError, "expected '" + std::string(key) + "' in weights header, got '" + s + "'");
    }
    return s.substr(key.size() + 1);
  };
  auto number = [&](std::string_view key) -> std::size_t {
    const std::string s = field(key);
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty() || s[0] == '-') throw Error(Errc::ParseError, "bad integer for " + std::string(key));
    return static_cast<std::size_t>(v);
  };

  if (line() != "biosketch-weights 1") throw Error(Errc::ParseError, "not a biosketch weights file");
  FusionWeights w;
  const std::string mode = field("mode");
  if (mode == "fca") w.mode = FusionMode::FCA;
  else if (mode == "bla") w.mode = FusionMode::BLA;
  else throw Error(Errc::ParseError, "unknown fusion mode '" + mode + "'");
  const std::string act = field("activation");
  if (act == "identity") w.activation = Activation::Identity;
  else if (act == "relu") w.activation = Activation::Rectifier;
  else throw Error(Errc::ParseError, "unknown activation '" + act + "'");
  w.d_face = number("d_face");
  w.d_iris = number("d_iris");
  w.out_dim = number("out_dim");
  const std::size_t projection = number("projection");
  if (projection > 1) throw Error(Errc::ParseError, "projection must be 0 or 1");
  const std::size_t count = number("payload");
  if (data.size() - pos != count * 4) {
    throw Error(Errc::ParseError, "payload holds " + std::to_string(data.size() - pos) + " bytes, header declares " +
                                      std::to_string(count * 4));
  }
  Vector payload(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto* b = reinterpret_cast<const unsigned char*>(data.data() + pos + 4 * i);
    const std::uint32_t bits = std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) | (std::uint32_t{b[2]} << 16) |
                               (std::uint32_t{b[3]} << 24);
    payload[i] = std::bit_cast<float>(bits);
  }
  if (w.mode == FusionMode::FCA) {
    if (projection != 1) throw Error(Errc::ParseError, "FCA weights always carry a matrix");
    if (count < w.out_dim) throw Error(Errc::DimensionMismatch, "payload shorter than the bias");
    w.matrix.assign(payload.begin(), payload.end() - static_cast<std::ptrdiff_t>(w.out_dim));
    w.bias.assign(payload.end() - static_cast<std::ptrdiff_t>(w.out_dim), payload.end());
  } else if (projection == 1) {
    w.matrix = std::move(payload);
  } else if (count != 0) {
    throw Error(Errc::DimensionMismatch, "BLA without projection must have an empty payload");
  }
  w.validate();
  return w;
}

}  // namespace biosketch
