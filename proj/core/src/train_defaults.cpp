#include "latfuse/train_defaults.hpp"

#include <string>

#include <nlohmann/json.hpp>

#include "latfuse/errors.hpp"

namespace latfuse {

namespace detail {
extern const std::string_view kEmbeddedTrainDefaults;
}

namespace {

using Json = nlohmann::json;

Json parse_defaults(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw FormatError(std::string("training defaults are not valid JSON: ") + e.what());
  }
  if (j.value("format", "") != "latfuse-train-defaults" || j.value("version", 0) != 1) {
    throw FormatError("unsupported training defaults document");
  }
  return j;
}

const Json& builtin() {
  static const Json j = parse_defaults(detail::kEmbeddedTrainDefaults);
  return j;
}

const char* key(TransformKind kind) {
  return kind == TransformKind::householder ? "householder" : "matrix_exp";
}

void apply(MethodDefaults& d, const Json& j) {
  if (j.contains("batch")) d.batch = j.at("batch").get<int>();
  if (j.contains("iterations")) d.iterations = j.at("iterations").get<int>();
  if (j.contains("lr")) d.lr = j.at("lr").get<double>();
  if (j.contains("confidence")) d.confidence = j.at("confidence").get<double>();
}

}  // namespace

void check_train_defaults(std::string_view json_text) {
  const auto j = parse_defaults(json_text);
  try {
    for (const char* k : {"householder", "matrix_exp"}) {
      MethodDefaults d;
      apply(d, j.at(k));
      for (const auto& row : j.at("rows")) apply(d, row.at(k));
    }
    (void)j.at("points_per_epoch").get<int>();
  } catch (const Json::exception& e) {
    throw FormatError(std::string("malformed training defaults: ") + e.what());
  }
}

MethodDefaults method_defaults(int dim, TransformKind method) {
  const auto& j = builtin();
  MethodDefaults d;
  apply(d, j.at(key(method)));
  for (const auto& row : j.at("rows")) {
    if (row.at("dim").get<int>() == dim) apply(d, row.at(key(method)));
  }
  return d;
}

int default_points_per_epoch() { return builtin().at("points_per_epoch").get<int>(); }

TrainConfig default_train_config(int dim, TransformKind method) {
  const auto d = method_defaults(dim, method);
  TrainConfig cfg;
  cfg.points_per_epoch = default_points_per_epoch();
  cfg.batch = d.batch;
  cfg.lr = d.lr;
  const int per_epoch = cfg.updates_per_epoch();
  cfg.epochs = (d.iterations + per_epoch - 1) / per_epoch;
  return cfg;
}

}  // namespace latfuse
