#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "biosketch/error.hpp"
#include "biosketch/fusion.hpp"
#include "biosketch/rng.hpp"

namespace biosketch {

struct SamplePair {
  Embedding face;
  Embedding iris;

  friend bool operator==(const SamplePair&, const SamplePair&) = default;
};

struct Subject {
  std::string id;
  std::vector<SamplePair> samples;

  friend bool operator==(const Subject&, const Subject&) = default;
};

struct SynthParams {
  std::size_t num_subjects = 50;
  std::size_t samples_per_subject = 20;
  std::size_t d_face = 64;
  std::size_t d_iris = 64;
  double between_std = 1.0;
  double within_std = 0.5;
  std::uint64_t seed = 1;

  friend bool operator==(const SynthParams&, const SynthParams&) = default;
};

struct EmbeddingDataset {
  std::vector<Subject> subjects;
  /// Present when the dataset was generated rather than read from disk.
  std::optional<SynthParams> generation;

  std::size_t d_face() const { return subjects.empty() ? 0 : subjects.front().samples.front().face.dimension(); }
  std::size_t d_iris() const { return subjects.empty() ? 0 : subjects.front().samples.front().iris.dimension(); }

  std::size_t total_samples() const {
    std::size_t n = 0;
    for (const auto& s : subjects) n += s.samples.size();
    return n;
  }

  const Subject* find(std::string_view id) const {
    for (const auto& s : subjects) {
      if (s.id == id) return &s;
    }
    return nullptr;
  }

  void validate() const {
    for (const auto& s : subjects) {
      if (s.samples.empty()) throw Error(Errc::InsufficientData, "subject " + s.id + " has no samples");
      for (const auto& p : s.samples) {
        if (p.face.dimension() != d_face() || p.iris.dimension() != d_iris()) {
          throw Error(Errc::InconsistentDimensions, "subject " + s.id + " has a sample with different dims");
        }
      }
    }
  }
};

/// Isotropic Gaussian subject model: each subject has latent face and iris
/// means drawn from N(0, between_std^2 I); each sample adds N(0, within_std^2 I)
/// noise. Subject i draws from its own stream derive_seed(seed, i), so the
/// data is a pure function of the parameters.
inline EmbeddingDataset gen_population(const SynthParams& p) {
  if (p.num_subjects == 0 || p.samples_per_subject == 0 || p.d_face == 0 || p.d_iris == 0) {
    throw Error(Errc::InvalidParams, "counts and dimensions must be positive");
  }
  if (!(p.between_std > 0.0) || !(p.within_std >= 0.0)) {
    throw Error(Errc::InvalidParams, "between_std must be > 0 and within_std >= 0");
  }
  EmbeddingDataset ds;
  ds.generation = p;
  const int width = static_cast<int>(std::to_string(p.num_subjects - 1).size());
  for (std::size_t s = 0; s < p.num_subjects; ++s) {
    Rng rng(derive_seed(p.seed, s));
    Vector face_mean(p.d_face), iris_mean(p.d_iris);
    for (double& v : face_mean) v = p.between_std * rng.normal();
    for (double& v : iris_mean) v = p.between_std * rng.normal();
    Subject subj;
    std::string num = std::to_string(s);
    subj.id = "s" + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(num.size()))), '0') + num;
    for (std::size_t k = 0; k < p.samples_per_subject; ++k) {
      Vector f = face_mean, i = iris_mean;
      for (double& v : f) v += p.within_std * rng.normal();
      for (double& v : i) v += p.within_std * rng.normal();
      subj.samples.push_back({Embedding(Modality::Face, std::move(f)), Embedding(Modality::Iris, std::move(i))});
    }
    ds.subjects.push_back(std::move(subj));
  }
  return ds;
}

namespace detail {

inline void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace detail

// Embeddings CSV: one row per (subject, sample, modality)
//
//   subject_id,sample_id,modality,v0,v1,...
//
// A header row starting with "subject_id," is written and skipped on read.
// Values use the shortest decimal form that parses back to the same double,
// so a write/read round trip is exact.
inline void write_embeddings(const EmbeddingDataset& ds, const std::filesystem::path& path) {
  ds.validate();
  std::string out = "subject_id,sample_id,modality";
  for (std::size_t k = 0; k < std::max(ds.d_face(), ds.d_iris()); ++k) out += ",v" + std::to_string(k);
  out += '\n';
  for (const auto& s : ds.subjects) {
    if (s.id.empty() || s.id.find_first_of(",\n\r") != std::string::npos) {
      throw Error(Errc::InvalidParams, "subject id '" + s.id + "' cannot be written to CSV");
    }
    for (std::size_t k = 0; k < s.samples.size(); ++k) {
      for (const Embedding* e : {&s.samples[k].face, &s.samples[k].iris}) {
        out += s.id;
        out += ',';
        out += std::to_string(k);
        out += ',';
        out += to_string(e->modality());
        for (double v : e->values()) {
          out += ',';
          detail::append_double(out, v);
        }
        out += '\n';
      }
    }
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(Errc::IoError, "cannot write " + path.string());
  f << out;
  if (!f) throw Error(Errc::IoError, "short write to " + path.string());
}

inline EmbeddingDataset read_embeddings(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::IoError, "cannot open " + path.string());

  struct Partial {
    std::optional<Vector> face, iris;
  };
  std::vector<std::string> order;
  std::map<std::string, std::map<long long, Partial>> rows;
  std::optional<std::size_t> d_face, d_iris;
  std::string line;
  std::size_t lineno = 0, data_rows = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1 && line.rfind("subject_id,", 0) == 0) continue;
    const auto cells = detail::split_commas(line);
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (cells.size() < 4) throw Error(Errc::ParseError, where + ": expected subject_id,sample_id,modality,values");
    const std::string id(cells[0]);
    if (id.empty()) throw Error(Errc::ParseError, where + ": empty subject id");
    long long sample = 0;
    {
      const auto r = std::from_chars(cells[1].data(), cells[1].data() + cells[1].size(), sample);
      if (r.ec != std::errc() || r.ptr != cells[1].data() + cells[1].size() || sample < 0) {
        throw Error(Errc::ParseError, where + ": bad sample_id");
      }
    }
    Modality modality;
    if (cells[2] == "face") modality = Modality::Face;
    else if (cells[2] == "iris") modality = Modality::Iris;
    else throw Error(Errc::ParseError, where + ": modality must be face or iris");
    Vector values(cells.size() - 3);
    for (std::size_t k = 3; k < cells.size(); ++k) {
      const auto cell = cells[k];
      const auto r = std::from_chars(cell.data(), cell.data() + cell.size(), values[k - 3]);
      if (r.ec != std::errc() || r.ptr != cell.data() + cell.size()) {
        throw Error(Errc::ParseError, where + ": bad number '" + std::string(cell) + "'");
      }
    }
    auto& dim = modality == Modality::Face ? d_face : d_iris;
    if (!dim) dim = values.size();
    if (*dim != values.size()) {
      throw Error(Errc::InconsistentDimensions, where + ": " + std::string(to_string(modality)) + " row has " +
                                                    std::to_string(values.size()) + " values, expected " +
                                                    std::to_string(*dim));
    }
    if (!rows.count(id)) order.push_back(id);
    auto& slot = rows[id][sample];
    auto& target = modality == Modality::Face ? slot.face : slot.iris;
    if (target) throw Error(Errc::ParseError, where + ": duplicate row");
    target = std::move(values);
    ++data_rows;
  }
  if (data_rows == 0) throw Error(Errc::ParseError, path.string() + ": no embedding rows");

  EmbeddingDataset ds;
  for (const auto& id : order) {
    Subject s{id, {}};
    for (auto& [sample, partial] : rows[id]) {
      if (!partial.face || !partial.iris) {
        throw Error(Errc::ParseError, "subject " + id + " sample " + std::to_string(sample) + " lacks a modality");
      }
      s.samples.push_back({Embedding(Modality::Face, std::move(*partial.face)),
                           Embedding(Modality::Iris, std::move(*partial.iris))});
    }
    ds.subjects.push_back(std::move(s));
  }
  return ds;
}

}  // namespace biosketch
