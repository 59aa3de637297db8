#include "magclimb/models/classifier.hpp"

#include "magclimb/common/errors.hpp"
#include "magclimb/common/io.hpp"
#include "magclimb/common/json_fields.hpp"
#include "magclimb/common/rng.hpp"
#include "magclimb/models/features.hpp"
#include "magclimb/models/knn.hpp"

namespace magclimb::models {

namespace {

constexpr const char* kClassicFormat = "magclimb.classifier";

nlohmann::json scaler_json(const FeatureScaler& s) { return {{"mean", s.mean}, {"scale", s.scale}}; }

FeatureScaler scaler_from_json(const nlohmann::json& j) {
  FeatureScaler s;
  s.mean = j.at("mean").get<FeatureVector>();
  s.scale = j.at("scale").get<FeatureVector>();
  return s;
}

std::vector<FeatureVector> scaled_features(const std::vector<std::vector<double>>& windows, const FeatureScaler& s) {
  auto rows = feature_rows(windows);
  for (auto& r : rows) r = s.apply(r);
  return rows;
}

std::vector<std::vector<double>> as_rows(const std::vector<FeatureVector>& f) {
  std::vector<std::vector<double>> out;
  out.reserve(f.size());
  for (const auto& r : f) out.emplace_back(r.begin(), r.end());
  return out;
}

/// Sequence models and the BP network share training and persistence.
class NeuralClassifier final : public Classifier {
 public:
  NeuralClassifier(ModelKind kind, ClassifierOptions options, std::size_t window_length)
      : kind_(kind), options_(std::move(options)), window_length_(window_length) {}

  NeuralClassifier(ModelKind kind, neural::ModelGraph<float> model, std::optional<FeatureScaler> scaler)
      : kind_(kind), model_(std::move(model)), scaler_(scaler), fitted_(true) {}

  ModelKind kind() const override { return kind_; }

  std::optional<TrainHistory> fit(const WindowSet& train, std::uint64_t seed) override {
    train.validate();
    const std::uint64_t init_seed = derive_seed(seed, 0x1417);
    switch (kind_) {
      case ModelKind::IcnnLstm: {
        auto cfg = options_.icnn;
        cfg.window_length = window_length_;
        model_ = build_icnn_lstm<float>(cfg, init_seed);
        break;
      }
      case ModelKind::Lstm: {
        auto cfg = options_.lstm;
        cfg.window_length = window_length_;
        model_ = build_lstm_baseline<float>(cfg, init_seed);
        break;
      }
      case ModelKind::Rnn: {
        auto cfg = options_.rnn;
        cfg.window_length = window_length_;
        model_ = build_rnn_baseline<float>(cfg, init_seed);
        break;
      }
      default:
        model_ = build_bp_baseline<float>(options_.bp, init_seed);
        break;
    }
    TrainConfig tc = options_.train;
    tc.seed = seed;
    TrainHistory h = kind_ == ModelKind::Bp ? train_bp(train, tc) : train_sequences(train, tc);
    model_.metadata() = {{"classifier", to_string(kind_)}, {"train", to_json(tc)}};
    if (scaler_) model_.metadata()["scaler"] = scaler_json(*scaler_);
    fitted_ = true;
    return h;
  }

  std::vector<HazardLabel> predict(const std::vector<std::vector<double>>& windows) override {
    require_fitted();
    if (windows.empty()) return {};
    if (kind_ == ModelKind::Bp) return predict_labels(model_, features_to_tensor(scaled_features(windows, *scaler_)));
    return predict_labels(model_, windows_to_tensor(windows));
  }

  void save(const std::filesystem::path& path) const override {
    require_fitted();
    model_.save(path);
  }

 private:
  TrainHistory train_bp(const WindowSet& train, const TrainConfig& tc) {
    const auto raw = feature_rows(train.windows);
    scaler_ = FeatureScaler::fit(raw);
    std::vector<FeatureVector> rows = raw;
    for (auto& r : rows) r = scaler_->apply(r);
    return models::train(model_, features_to_tensor(rows), train.labels, tc);
  }

  TrainHistory train_sequences(const WindowSet& train, const TrainConfig& tc) {
    scaler_.reset();
    return models::train(model_, windows_to_tensor(train.windows), train.labels, tc);
  }

  void require_fitted() const {
    if (!fitted_) throw ConfigError(std::string(to_string(kind_)) + " classifier used before fit");
  }

  ModelKind kind_;
  ClassifierOptions options_;
  std::size_t window_length_ = 0;
  neural::ModelGraph<float> model_;
  std::optional<FeatureScaler> scaler_;
  bool fitted_ = false;
};

class ForestClassifier final : public Classifier {
 public:
  explicit ForestClassifier(RfConfig cfg) : cfg_(cfg) {}
  explicit ForestClassifier(RandomForest forest) : forest_(std::move(forest)), fitted_(true) {}

  ModelKind kind() const override { return ModelKind::Rf; }

  std::optional<TrainHistory> fit(const WindowSet& train, std::uint64_t seed) override {
    train.validate();
    RfConfig cfg = cfg_;
    cfg.seed = seed;
    forest_ = rf_train(as_rows(feature_rows(train.windows)), train.labels, cfg);
    fitted_ = true;
    return std::nullopt;
  }

  std::vector<HazardLabel> predict(const std::vector<std::vector<double>>& windows) override {
    if (!fitted_) throw ConfigError("rf classifier used before fit");
    std::vector<HazardLabel> out;
    out.reserve(windows.size());
    for (const auto& f : feature_rows(windows)) out.push_back(rf_classify(forest_, f));
    return out;
  }

  void save(const std::filesystem::path& path) const override {
    if (!fitted_) throw ConfigError("rf classifier used before fit");
    const nlohmann::json j = {{"format", kClassicFormat}, {"classifier", "rf"}, {"forest", to_json(forest_)}};
    io::write_text_atomic(path, j.dump(1) + "\n");
  }

 private:
  RfConfig cfg_;
  RandomForest forest_;
  bool fitted_ = false;
};

/// Stores the standardized training features; prediction is an exhaustive search.
class KnnClassifier final : public Classifier {
 public:
  explicit KnnClassifier(std::size_t k) : k_(k) {}

  ModelKind kind() const override { return ModelKind::Knn; }

  std::optional<TrainHistory> fit(const WindowSet& train, std::uint64_t) override {
    train.validate();
    const auto raw = feature_rows(train.windows);
    scaler_ = FeatureScaler::fit(raw);
    std::vector<FeatureVector> rows = raw;
    for (auto& r : rows) r = scaler_.apply(r);
    x_ = as_rows(rows);
    y_ = train.labels;
    if (k_ == 0 || k_ > x_.size()) throw ConfigError("knn K must lie in [1, training size]");
    return std::nullopt;
  }

  std::vector<HazardLabel> predict(const std::vector<std::vector<double>>& windows) override {
    if (x_.empty()) throw ConfigError("knn classifier used before fit");
    std::vector<HazardLabel> out;
    out.reserve(windows.size());
    for (const auto& f : scaled_features(windows, scaler_)) out.push_back(knn_classify(x_, y_, f, k_));
    return out;
  }

  void save(const std::filesystem::path& path) const override {
    if (x_.empty()) throw ConfigError("knn classifier used before fit");
    std::vector<int> labels;
    for (auto l : y_) labels.push_back(static_cast<int>(index_of(l)));
    const nlohmann::json j = {{"format", kClassicFormat}, {"classifier", "knn"}, {"k", k_},
                              {"scaler", scaler_json(scaler_)}, {"features", x_}, {"labels", labels}};
    io::write_text_atomic(path, j.dump() + "\n");
  }

  static std::unique_ptr<KnnClassifier> from_json(const nlohmann::json& j) {
    auto c = std::make_unique<KnnClassifier>(j.at("k").get<std::size_t>());
    c->scaler_ = scaler_from_json(j.at("scaler"));
    c->x_ = j.at("features").get<std::vector<std::vector<double>>>();
    for (int v : j.at("labels").get<std::vector<int>>()) c->y_.push_back(label_from_index(v));
    if (c->x_.size() != c->y_.size() || c->x_.empty()) throw DataError("knn manifest has inconsistent data");
    return c;
  }

 private:
  std::size_t k_;
  FeatureScaler scaler_;
  std::vector<std::vector<double>> x_;
  std::vector<HazardLabel> y_;
};

}  // namespace

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::IcnnLstm: return "icnn_lstm";
    case ModelKind::Lstm: return "lstm";
    case ModelKind::Rnn: return "rnn";
    case ModelKind::Bp: return "bp";
    case ModelKind::Rf: return "rf";
    case ModelKind::Knn: return "knn";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
  for (auto k : kAllModelKinds) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("unknown model '" + name + "' (expected icnn_lstm, lstm, rnn, bp, rf or knn)");
}

bool consumes_sequences(ModelKind kind) {
  return kind == ModelKind::IcnnLstm || kind == ModelKind::Lstm || kind == ModelKind::Rnn;
}

nlohmann::json to_json(const ClassifierOptions& o) {
  return {{"icnn_lstm", to_json(o.icnn)},
          {"lstm", {{"layers", o.lstm.layers}, {"hidden", o.lstm.hidden}, {"dense_units", o.lstm.dense_units}}},
          {"rnn",
           {{"layers", o.rnn.layers},
            {"hidden", o.rnn.hidden},
            {"dense_units", o.rnn.dense_units},
            {"truncation", o.rnn.truncation}}},
          {"bp", {{"hidden_layers", o.bp.hidden_layers}, {"hidden_units", o.bp.hidden_units}}},
          {"rf",
           {{"trees", o.rf.trees},
            {"max_depth", o.rf.max_depth},
            {"min_samples_split", o.rf.min_samples_split},
            {"max_features", o.rf.max_features},
            {"bootstrap", o.rf.bootstrap}}},
          {"knn", {{"k", o.knn_k}}},
          {"train", to_json(o.train)}};
}

std::unique_ptr<Classifier> make_classifier(ModelKind kind, const ClassifierOptions& options,
                                            std::size_t window_length) {
  switch (kind) {
    case ModelKind::Rf: return std::make_unique<ForestClassifier>(options.rf);
    case ModelKind::Knn:
      if (options.knn_k == 0) throw ConfigError("knn K must be >= 1");
      return std::make_unique<KnnClassifier>(options.knn_k);
    default: break;
  }
  validate(options.train);
  if (kind == ModelKind::IcnnLstm) {
    auto cfg = options.icnn;
    cfg.window_length = window_length;
    validate(cfg);
    if (window_length < minimum_window_length(cfg)) {
      throw ShapeError("window length " + std::to_string(window_length) + " is below the minimum " +
                       std::to_string(minimum_window_length(cfg)));
    }
  }
  return std::make_unique<NeuralClassifier>(kind, options, window_length);
}

std::unique_ptr<Classifier> load_classifier(const std::filesystem::path& path) {
  const auto j = json_fields::load_file(path.string());
  const std::string format = j.value("format", "");
  if (format == kClassicFormat) {
    try {
      const auto kind = model_kind_from_string(j.at("classifier").get<std::string>());
      if (kind == ModelKind::Rf) return std::make_unique<ForestClassifier>(forest_from_json(j.at("forest")));
      if (kind == ModelKind::Knn) return KnnClassifier::from_json(j);
      throw DataError("classifier manifest names a neural model");
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ": " + e.what());
    }
  }
  auto model = neural::ModelGraph<float>::load(path);
  const auto& meta = model.metadata();
  if (!meta.contains("classifier")) throw DataError(path.string() + ": model manifest lacks a classifier tag");
  const auto kind = model_kind_from_string(meta.at("classifier").get<std::string>());
  std::optional<FeatureScaler> scaler;
  if (kind == ModelKind::Bp) {
    if (!meta.contains("scaler")) throw DataError(path.string() + ": bp manifest lacks feature scaling");
    scaler = scaler_from_json(meta.at("scaler"));
  }
  return std::make_unique<NeuralClassifier>(kind, std::move(model), scaler);
}

}  // namespace magclimb::models
