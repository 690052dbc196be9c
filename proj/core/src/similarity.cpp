#include "factrace/similarity.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_set>

#include "factrace/error.hpp"
#include "factrace/io.hpp"

namespace factrace {

nlohmann::json EmbeddingManifest::to_json() const {
  return {{"lang", lang},
          {"step", step},
          {"layers", layers},
          {"prompts", prompts},
          {"dim", dim},
          {"dtype", "float32-le"},
          {"layout", "layer,prompt,dim"},
          {"data_path", data_path},
          {"fact_id_order", fact_id_order}};
}

EmbeddingManifest EmbeddingManifest::from_json(const nlohmann::json& j) {
  EmbeddingManifest m;
  try {
    m.lang = j.at("lang").get<std::string>();
    m.step = j.at("step").get<Step>();
    m.layers = j.at("layers").get<std::size_t>();
    m.prompts = j.at("prompts").get<std::size_t>();
    m.dim = j.at("dim").get<std::size_t>();
    m.data_path = j.at("data_path").get<std::string>();
    m.fact_id_order = j.at("fact_id_order").get<std::vector<FactId>>();
    if (j.contains("dtype") && j.at("dtype") != "float32-le") {
      throw Error(ErrorCode::InvalidManifest, "unsupported dtype " + j.at("dtype").dump());
    }
    if (j.contains("layout") && j.at("layout") != "layer,prompt,dim") {
      throw Error(ErrorCode::InvalidManifest, "unsupported layout " + j.at("layout").dump());
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidManifest, std::string("embedding manifest: ") + e.what());
  }
  return m;
}

EmbeddingTensor::EmbeddingTensor(EmbeddingManifest manifest, std::vector<float> data)
    : manifest_(std::move(manifest)), data_(std::move(data)) {
  const auto& m = manifest_;
  nlohmann::json where = {{"lang", m.lang}, {"step", m.step}};
  if (m.layers < 1 || m.dim < 1) {
    throw Error(ErrorCode::InvalidManifest, "layers and dim must be positive", where);
  }
  if (m.fact_id_order.size() != m.prompts) {
    throw Error(ErrorCode::InvalidManifest, "fact_id_order length differs from prompts", where);
  }
  if (data_.size() * sizeof(float) != m.expected_bytes()) {
    throw Error(ErrorCode::InvalidManifest,
                "tensor holds " + std::to_string(data_.size() * sizeof(float)) + " bytes, expected " +
                    std::to_string(m.expected_bytes()),
                where);
  }
  for (std::size_t p = 0; p < m.fact_id_order.size(); ++p) {
    if (!row_of_.emplace(m.fact_id_order[p], p).second) {
      throw Error(ErrorCode::InvalidManifest,
                  "fact " + std::to_string(m.fact_id_order[p]) + " repeated in fact_id_order", where);
    }
  }
}

std::span<const float> EmbeddingTensor::vector(std::size_t layer, FactId id) const {
  auto it = row_of_.find(id);
  if (it == row_of_.end()) {
    throw Error(ErrorCode::UnknownId,
                "fact " + std::to_string(id) + " has no embedding in " + manifest_.lang + " step " +
                    std::to_string(manifest_.step),
                {{"fact_id", id}, {"lang", manifest_.lang}, {"step", manifest_.step}});
  }
  if (layer >= manifest_.layers) {
    throw Error(ErrorCode::LayerCountMismatch, "layer index out of range");
  }
  const std::size_t offset = (layer * manifest_.prompts + it->second) * manifest_.dim;
  return std::span<const float>(data_).subspan(offset, manifest_.dim);
}

std::filesystem::path sidecar_path(const std::filesystem::path& dir, const LanguageCode& lang,
                                   Step step) {
  return dir / (lang + "_" + std::to_string(step) + ".json");
}

namespace {

std::uint32_t byteswap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0xFF00u) | ((v << 8) & 0xFF0000u) | (v << 24);
}

}  // namespace

EmbeddingTensor load_embeddings(const std::filesystem::path& sidecar) {
  auto manifest = EmbeddingManifest::from_json(io::read_json(sidecar));
  std::filesystem::path data_path = manifest.data_path;
  if (data_path.is_relative()) data_path = sidecar.parent_path() / data_path;

  std::error_code ec;
  auto size = std::filesystem::file_size(data_path, ec);
  if (ec) {
    throw Error(ErrorCode::InvalidManifest, "cannot stat " + data_path.string(),
                {{"path", data_path.string()}});
  }
  if (size != manifest.expected_bytes()) {
    throw Error(ErrorCode::InvalidManifest,
                data_path.string() + " has " + std::to_string(size) + " bytes, expected " +
                    std::to_string(manifest.expected_bytes()),
                {{"path", data_path.string()}});
  }
  std::vector<float> data(size / sizeof(float));
  std::ifstream in(data_path, std::ios::binary);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(size));
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot read " + data_path.string(), {{"path", data_path.string()}});
  }
  if constexpr (std::endian::native == std::endian::big) {
    for (auto& f : data) {
      std::uint32_t bits;
      std::memcpy(&bits, &f, 4);
      bits = byteswap32(bits);
      std::memcpy(&f, &bits, 4);
    }
  }
  return EmbeddingTensor(std::move(manifest), std::move(data));
}

void save_embeddings(const std::filesystem::path& dir, const EmbeddingTensor& tensor) {
  auto manifest = tensor.manifest();
  const std::string stem = manifest.lang + "_" + std::to_string(manifest.step);
  manifest.data_path = stem + ".f32";

  std::string bytes(tensor.data().size() * sizeof(float), '\0');
  std::memcpy(bytes.data(), tensor.data().data(), bytes.size());
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < bytes.size(); i += 4) {
      std::uint32_t bits;
      std::memcpy(&bits, bytes.data() + i, 4);
      bits = byteswap32(bits);
      std::memcpy(bytes.data() + i, &bits, 4);
    }
  }
  io::write_file_atomic(dir / manifest.data_path, bytes);
  io::write_json_atomic(dir / (stem + ".json"), manifest.to_json());
}

double cosine(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "cosine of vectors with dims " + std::to_string(u.size()) + " and " +
                    std::to_string(v.size()));
  }
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double a = u[i];
    double b = v[i];
    if (!std::isfinite(a) || !std::isfinite(b)) {
      throw Error(ErrorCode::NonFiniteInput, "non-finite component in cosine input", {{"index", i}});
    }
    dot += a * b;
    nu += a * a;
    nv += b * b;
  }
  if (nu == 0.0 || nv == 0.0) throw Error(ErrorCode::ZeroVector, "cosine of a zero vector");
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

PairSimilarity mean_pair_similarity(const EmbeddingTensor& lang, const EmbeddingTensor& ref,
                                    const std::vector<FactId>& subset) {
  const auto& a = lang.manifest();
  const auto& b = ref.manifest();
  if (a.step != b.step) {
    throw Error(ErrorCode::StepMismatch,
                "embedding steps differ: " + std::to_string(a.step) + " vs " + std::to_string(b.step));
  }
  if (a.layers != b.layers) {
    throw Error(ErrorCode::LayerCountMismatch,
                "layer counts differ: " + std::to_string(a.layers) + " vs " + std::to_string(b.layers));
  }
  if (a.dim != b.dim) {
    throw Error(ErrorCode::DimensionMismatch,
                "embedding dims differ: " + std::to_string(a.dim) + " vs " + std::to_string(b.dim));
  }

  PairSimilarity out;
  double sum = 0.0;
  std::size_t terms = 0;
  std::vector<double> per_layer(a.layers);
  for (auto id : subset) {
    bool zero = false;
    for (std::size_t layer = 0; layer < a.layers; ++layer) {
      try {
        per_layer[layer] = cosine(lang.vector(layer, id), ref.vector(layer, id));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ZeroVector) throw;
        zero = true;
        break;
      }
    }
    if (zero) {
      ++out.skipped;
      continue;
    }
    for (double c : per_layer) sum += c;
    terms += a.layers;
    ++out.pairs;
  }
  if (terms > 0) out.mean = std::clamp(sum / static_cast<double>(terms), -1.0, 1.0);
  return out;
}

std::vector<SimilaritySeries> similarity_trajectories(
    const std::vector<StepEmbeddings>& steps, const std::vector<FactId>& sclfp_ids,
    const std::vector<FactId>& uwlfp_ids, const std::vector<FactId>& all_ids,
    const std::map<FactId, bool>& identical_object) {
  auto filter = [&](const std::vector<FactId>& ids) {
    std::vector<FactId> kept;
    for (auto id : ids) {
      auto it = identical_object.find(id);
      if (it != identical_object.end() && it->second) continue;
      kept.push_back(id);
    }
    return kept;
  };
  const std::vector<std::pair<std::string, std::vector<FactId>>> groups = {
      {"SCLFP", filter(sclfp_ids)}, {"UWLFP", filter(uwlfp_ids)}, {"all", filter(all_ids)}};

  std::vector<SimilaritySeries> out;
  for (const auto& [name, ids] : groups) {
    SimilaritySeries series{name, {}};
    for (const auto& s : steps) {
      SimilarityPoint point{s.step, {}};
      if (!ids.empty()) point.value = mean_pair_similarity(*s.lang, *s.ref, ids);
      series.points.push_back(point);
    }
    out.push_back(std::move(series));
  }
  return out;
}

std::string similarity_csv(const std::vector<SimilaritySeries>& series) {
  std::string out = "group,step,mean_sim,pairs,skipped\n";
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      out += io::csv_row({s.group, std::to_string(p.step), io::format_optional(p.value.mean),
                          std::to_string(p.value.pairs), std::to_string(p.value.skipped)});
    }
  }
  return out;
}

}  // namespace factrace
