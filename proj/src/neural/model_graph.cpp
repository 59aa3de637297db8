#include "magclimb/neural/model_graph.hpp"

#include <bit>
#include <cstring>

#include "magclimb/common/errors.hpp"
#include "magclimb/common/io.hpp"
#include "magclimb/common/json_fields.hpp"
#include "magclimb/neural/loss.hpp"

namespace magclimb::neural {

namespace {

static_assert(std::endian::native == std::endian::little, "model blobs assume a little-endian host");

constexpr const char* kFormat = "magclimb.model";
constexpr int kFormatVersion = 1;

}  // namespace

template <typename T>
ModelGraph<T>::ModelGraph(std::string name, FeatureShape input) : name_(std::move(name)), input_(input), output_(input) {
  if (input.steps == 0 || input.channels == 0) throw ShapeError("model input shape must be non-empty");
}

template <typename T>
ModelGraph<T>::ModelGraph(const ModelGraph& other)
    : name_(other.name_), input_(other.input_), output_(other.output_), metadata_(other.metadata_) {
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

template <typename T>
ModelGraph<T>& ModelGraph<T>::operator=(const ModelGraph& other) {
  if (this != &other) {
    ModelGraph copy(other);
    *this = std::move(copy);
  }
  return *this;
}

template <typename T>
Layer<T>& ModelGraph<T>::add(std::unique_ptr<Layer<T>> layer) {
  try {
    output_ = layer->output_shape(output_);
  } catch (const ShapeError& e) {
    throw ShapeError("layer " + std::to_string(layers_.size()) + " (" + layer->kind() + "): " + e.what());
  }
  layers_.push_back(std::move(layer));
  return *layers_.back();
}

template <typename T>
Tensor<T> ModelGraph<T>::forward(const Tensor<T>& x, Mode mode) {
  if (!(x.shape().feature() == input_)) {
    throw ShapeError("model '" + name_ + "' expects samples " + to_string(input_) + ", got " + to_string(x.shape()));
  }
  Tensor<T> h = x;
  for (auto& l : layers_) h = l->forward(h, mode);
  return h;
}

template <typename T>
Tensor<T> ModelGraph<T>::backward(const Tensor<T>& grad_logits) {
  Tensor<T> g = grad_logits;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
  return g;
}

template <typename T>
Tensor<T> ModelGraph<T>::predict_proba(const Tensor<T>& x) {
  return softmax(forward(x, Mode::Infer));
}

template <typename T>
std::vector<Param<T>*> ModelGraph<T>::params() {
  std::vector<Param<T>*> out;
  for (auto& l : layers_) {
    for (auto* p : l->params()) out.push_back(p);
  }
  return out;
}

template <typename T>
std::size_t ModelGraph<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) {
    for (const auto* p : l->params()) n += p->size();
  }
  return n;
}

template <typename T>
void ModelGraph<T>::zero_grad() {
  for (auto* p : params()) std::fill(p->grad.begin(), p->grad.end(), T(0));
}

template <typename T>
void ModelGraph<T>::initialize(std::uint64_t seed) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Rng rng = make_rng(seed, i);
    layers_[i]->initialize(rng);
  }
  reseed_dropout(derive_seed(seed, 0xD0D0));
}

template <typename T>
void ModelGraph<T>::reseed_dropout(std::uint64_t seed) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (auto* d = dynamic_cast<Dropout<T>*>(layers_[i].get())) d->reseed(derive_seed(seed, i));
  }
}

template <typename T>
void ModelGraph<T>::freeze_dropout(bool frozen) {
  for (auto& l : layers_) {
    if (auto* d = dynamic_cast<Dropout<T>*>(l.get())) d->freeze_mask(frozen);
  }
}

template <typename T>
std::vector<std::vector<T>> ModelGraph<T>::snapshot() {
  std::vector<std::vector<T>> out;
  for (auto* p : params()) out.push_back(p->value);
  return out;
}

template <typename T>
void ModelGraph<T>::restore(const std::vector<std::vector<T>>& values) {
  auto ps = params();
  if (ps.size() != values.size()) throw ShapeError("snapshot has a different parameter count");
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (ps[i]->size() != values[i].size()) throw ShapeError("snapshot size mismatch for '" + ps[i]->name + "'");
    ps[i]->value = values[i];
  }
}

template <typename T>
nlohmann::json ModelGraph<T>::manifest(const std::string& blob_name) const {
  nlohmann::json layers = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto& l : layers_) {
    nlohmann::json ps = nlohmann::json::array();
    for (const auto* p : l->params()) {
      ps.push_back({{"name", p->name}, {"shape", p->dims}, {"offset", offset}, {"count", p->size()}});
      offset += p->size();
    }
    layers.push_back({{"kind", l->kind()}, {"config", l->config()}, {"params", ps}});
  }
  const auto bytes = blob();
  return {{"format", kFormat},
          {"version", kFormatVersion},
          {"name", name_},
          {"input", {{"steps", input_.steps}, {"channels", input_.channels}}},
          {"output", {{"steps", output_.steps}, {"channels", output_.channels}}},
          {"dtype", "float32"},
          {"byte_order", "little"},
          {"value_count", offset},
          {"blob", blob_name},
          {"blob_fnv1a64", io::hex64(io::fnv1a64(bytes))},
          {"layers", layers},
          {"metadata", metadata_}};
}

template <typename T>
std::vector<std::uint8_t> ModelGraph<T>::blob() const {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(parameter_count() * sizeof(float));
  for (const auto& l : layers_) {
    for (const auto* p : l->params()) {
      for (T v : p->value) {
        const float f = static_cast<float>(v);
        std::uint8_t raw[sizeof(float)];
        std::memcpy(raw, &f, sizeof(float));
        bytes.insert(bytes.end(), raw, raw + sizeof(float));
      }
    }
  }
  return bytes;
}

template <typename T>
ModelGraph<T> ModelGraph<T>::from_manifest(const nlohmann::json& m, std::span<const std::uint8_t> blob) {
  try {
    if (m.at("format").get<std::string>() != kFormat) throw ConfigError("not a model manifest");
    if (m.at("version").get<int>() != kFormatVersion) throw ConfigError("unsupported model manifest version");
    if (m.at("dtype").get<std::string>() != "float32") throw ConfigError("unsupported model dtype");
    ModelGraph g(m.at("name").get<std::string>(),
                 {m.at("input").at("steps").get<std::size_t>(), m.at("input").at("channels").get<std::size_t>()});
    const std::size_t count = m.at("value_count").get<std::size_t>();
    if (blob.size() != count * sizeof(float)) {
      throw DataError("model blob holds " + std::to_string(blob.size()) + " bytes, manifest expects " +
                      std::to_string(count * sizeof(float)));
    }
    if (m.contains("blob_fnv1a64") && m.at("blob_fnv1a64").get<std::string>() != io::hex64(io::fnv1a64(blob))) {
      throw DataError("model blob checksum mismatch");
    }
    std::size_t offset = 0;
    for (const auto& entry : m.at("layers")) {
      auto& layer = g.add(make_layer<T>(entry.at("kind").get<std::string>(), entry.at("config")));
      auto ps = layer.params();
      const auto& described = entry.at("params");
      if (described.size() != ps.size()) throw ConfigError("layer parameter list does not match its kind");
      for (std::size_t k = 0; k < ps.size(); ++k) {
        if (described[k].at("shape").get<std::vector<std::size_t>>() != ps[k]->dims) {
          throw ConfigError("parameter '" + ps[k]->name + "' shape does not match layer config");
        }
        for (auto& v : ps[k]->value) {
          float f;
          std::memcpy(&f, blob.data() + offset * sizeof(float), sizeof(float));
          v = static_cast<T>(f);
          ++offset;
        }
      }
    }
    if (offset != count) throw ConfigError("manifest value_count disagrees with its layers");
    if (m.contains("metadata")) g.metadata_ = m.at("metadata");
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model manifest: ") + e.what());
  }
}

template <typename T>
void ModelGraph<T>::save(const std::filesystem::path& manifest_path) const {
  auto blob_path = manifest_path;
  blob_path.replace_extension(".bin");
  const auto bytes = blob();
  io::write_bytes_atomic(blob_path, bytes);
  io::write_text_atomic(manifest_path, manifest(blob_path.filename().string()).dump(2) + "\n");
}

template <typename T>
ModelGraph<T> ModelGraph<T>::load(const std::filesystem::path& manifest_path) {
  const auto m = json_fields::load_file(manifest_path.string());
  const auto blob_path = manifest_path.parent_path() / m.at("blob").get<std::string>();
  const auto bytes = io::read_bytes(blob_path);
  return from_manifest(m, bytes);
}

template class ModelGraph<float>;
template class ModelGraph<double>;

}  // namespace magclimb::neural
