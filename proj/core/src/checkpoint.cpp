#include "latfuse/checkpoint.hpp"

#include <cstdio>

#include <nlohmann/json.hpp>

#include "latfuse/decimal.hpp"
#include "latfuse/errors.hpp"
#include "latfuse/io.hpp"

namespace latfuse {

namespace {

using Json = nlohmann::ordered_json;

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(format_double(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw FormatError("matrix has wrong row count");
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw FormatError("matrix row has wrong length");
    }
    for (Eigen::Index k = 0; k < cols; ++k) {
      m(i, k) = parse_double(row.at(static_cast<std::size_t>(k)).get<std::string>());
    }
  }
  return m;
}

Json vector_to_json(const Vector& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(format_double(x));
  return a;
}

Vector vector_from_json(const Json& j, Eigen::Index n) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n) {
    throw FormatError("vector has wrong length");
  }
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v(i) = parse_double(j.at(static_cast<std::size_t>(i)).get<std::string>());
  }
  return v;
}

Json estimate_to_json(const NsmEstimate& e) {
  return Json{{"mean", format_double(e.mean)},
              {"var_of_mean", format_double(e.var_of_mean)},
              {"n_samples", e.n_samples},
              {"seed", e.seed}};
}

NsmEstimate estimate_from_json(const Json& j) {
  NsmEstimate e;
  e.mean = parse_double(j.at("mean").get<std::string>());
  e.var_of_mean = parse_double(j.at("var_of_mean").get<std::string>());
  e.n_samples = j.at("n_samples").get<std::int64_t>();
  e.seed = j.at("seed").get<std::uint64_t>();
  return e;
}

}  // namespace

Json train_config_to_json(const TrainConfig& cfg) {
  return Json{{"epochs", cfg.epochs},
              {"points_per_epoch", cfg.points_per_epoch},
              {"batch", cfg.batch},
              {"lr", format_double(cfg.lr)},
              {"step_period", cfg.step_period},
              {"step_factor", format_double(cfg.step_factor)},
              {"seed", cfg.seed},
              {"eval_every", cfg.eval_every},
              {"eval_samples", cfg.eval_samples},
              {"workers", cfg.workers},
              {"checkpoint_every", cfg.checkpoint_every},
              {"checkpoint_path", cfg.checkpoint_path.string()},
              {"divergence_factor", format_double(cfg.divergence_factor)},
              {"label", cfg.label}};
}

TrainConfig train_config_from_json(const Json& j) {
  TrainConfig cfg;
  cfg.epochs = j.at("epochs").get<int>();
  cfg.points_per_epoch = j.at("points_per_epoch").get<int>();
  cfg.batch = j.at("batch").get<int>();
  cfg.lr = parse_double(j.at("lr").get<std::string>());
  cfg.step_period = j.at("step_period").get<int>();
  cfg.step_factor = parse_double(j.at("step_factor").get<std::string>());
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.eval_every = j.at("eval_every").get<int>();
  cfg.eval_samples = j.at("eval_samples").get<std::int64_t>();
  cfg.workers = j.at("workers").get<int>();
  cfg.checkpoint_every = j.at("checkpoint_every").get<int>();
  cfg.checkpoint_path = j.at("checkpoint_path").get<std::string>();
  cfg.divergence_factor = parse_double(j.at("divergence_factor").get<std::string>());
  cfg.label = j.value("label", "");
  return cfg;
}

std::string config_hash(const TrainConfig& cfg) {
  const std::string text = train_config_to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string checkpoint_to_json(const Checkpoint& ckpt) {
  const auto& m = ckpt.model;
  Json j;
  j["format"] = "latfuse-checkpoint";
  j["version"] = kCheckpointVersion;
  j["kind"] = std::string(to_string(m.kind()));
  j["label"] = ckpt.config.label;
  j["dim"] = m.dim();
  j["base"] = matrix_to_json(m.base().rows());
  Json blocks = Json::array();
  for (const auto& b : m.blocks()) blocks.push_back(Json::array({b.offset, b.size}));
  j["blocks"] = std::move(blocks);
  if (m.kind() == TransformKind::householder) {
    Json vs = Json::array();
    for (const auto& v : std::get<HouseholderParam>(m.params()).vectors) vs.push_back(vector_to_json(v));
    j["params"] = Json{{"vectors", std::move(vs)}};
  } else {
    j["params"] = Json{{"a", matrix_to_json(std::get<ExpParam>(m.params()).a)}};
  }
  j["state"] = Json{{"epoch", ckpt.state.epoch}, {"updates", ckpt.state.updates}};
  if (ckpt.state.first_epoch_loss) {
    j["state"]["first_epoch_loss"] = format_double(*ckpt.state.first_epoch_loss);
  }
  j["rng"] = Json{{"seed", ckpt.config.seed}, {"next_stream", ckpt.state.updates}};
  j["config"] = train_config_to_json(ckpt.config);
  j["config_hash"] = config_hash(ckpt.config);
  Json hist = Json::array();
  for (const auto& r : ckpt.history.records) {
    Json h{{"epoch", r.epoch}, {"lr", format_double(r.lr)}, {"mean_loss", format_double(r.mean_loss)}};
    if (r.nsm) h["nsm"] = estimate_to_json(*r.nsm);
    hist.push_back(std::move(h));
  }
  j["history"] = std::move(hist);
  return j.dump(1) + "\n";
}

Checkpoint checkpoint_from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw FormatError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != "latfuse-checkpoint") {
    throw FormatError("not a latfuse checkpoint");
  }
  const int version = j.value("version", 0);
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kCheckpointVersion) + ")");
  }
  try {
    const int n = j.at("dim").get<int>();
    GeneratorMatrix base(matrix_from_json(j.at("base"), n, n));
    std::vector<Block> blocks;
    for (const auto& b : j.at("blocks")) blocks.push_back(Block{b.at(0).get<int>(), b.at(1).get<int>()});
    const auto kind = parse_transform_kind(j.at("kind").get<std::string>());
    FusionModel::Params params;
    if (kind == TransformKind::householder) {
      HouseholderParam p;
      for (const auto& v : j.at("params").at("vectors")) p.vectors.push_back(vector_from_json(v, n));
      params = std::move(p);
    } else {
      params = ExpParam{matrix_from_json(j.at("params").at("a"), n, n)};
    }
    auto cfg = train_config_from_json(j.at("config"));
    if (config_hash(cfg) != j.at("config_hash").get<std::string>()) {
      throw FormatError("checkpoint config hash mismatch (file corrupt or edited)");
    }
    TrainState state;
    state.epoch = j.at("state").at("epoch").get<int>();
    state.updates = j.at("state").at("updates").get<std::int64_t>();
    if (j.at("state").contains("first_epoch_loss")) {
      state.first_epoch_loss = parse_double(j.at("state").at("first_epoch_loss").get<std::string>());
    }
    TrainHistory history;
    for (const auto& h : j.at("history")) {
      EpochRecord r;
      r.epoch = h.at("epoch").get<int>();
      r.lr = parse_double(h.at("lr").get<std::string>());
      r.mean_loss = parse_double(h.at("mean_loss").get<std::string>());
      if (h.contains("nsm")) r.nsm = estimate_from_json(h.at("nsm"));
      history.records.push_back(r);
    }
    return Checkpoint{FusionModel(std::move(base), std::move(blocks), std::move(params)), std::move(cfg),
                      state, std::move(history)};
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("corrupt checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("corrupt checkpoint: ") + e.what());
  } catch (const DegenerateLatticeError& e) {
    throw FormatError(std::string("corrupt checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_file_atomic(path, checkpoint_to_json(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_json(read_file(path));
}

}  // namespace latfuse
