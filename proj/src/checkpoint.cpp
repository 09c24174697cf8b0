#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "shapelab/errors.hpp"
#include "shapelab/models.hpp"

namespace shapelab {

namespace {

constexpr const char* kMagic = "SHAPELAB-CKPT v1";

nlohmann::json spec_to_json(const MlpSpec& s) {
  return {{"input_units", s.input_units},
          {"hidden_units", s.hidden_units},
          {"output_units", s.output_units},
          {"l2_coefficient", s.l2_coefficient}};
}

nlohmann::json spec_to_json(const CnnSpec& s) {
  nlohmann::json heads = nlohmann::json::array();
  for (const HeadSpec& h : s.heads) {
    heads.push_back({{"name", h.name}, {"class_count", h.class_count}, {"loss_weight", h.loss_weight}});
  }
  return {{"resolution", s.resolution},
          {"input_channels", s.input_channels},
          {"feature_maps", s.feature_maps},
          {"kernel_extent", s.kernel_extent},
          {"pool_window", s.pool_window},
          {"pool_stride", s.pool_stride},
          {"fc_units", s.fc_units},
          {"dropout_rate", s.dropout_rate},
          {"l2_coefficient", s.l2_coefficient},
          {"heads", heads}};
}

MlpSpec mlp_spec_from_json(const nlohmann::json& j) {
  MlpSpec s;
  s.input_units = j.at("input_units").get<int>();
  s.hidden_units = j.at("hidden_units").get<int>();
  s.output_units = j.at("output_units").get<int>();
  s.l2_coefficient = j.at("l2_coefficient").get<double>();
  return s;
}

CnnSpec cnn_spec_from_json(const nlohmann::json& j) {
  CnnSpec s;
  s.resolution = j.at("resolution").get<int>();
  s.input_channels = j.at("input_channels").get<int>();
  s.feature_maps = j.at("feature_maps").get<int>();
  s.kernel_extent = j.at("kernel_extent").get<int>();
  s.pool_window = j.at("pool_window").get<int>();
  s.pool_stride = j.at("pool_stride").get<int>();
  s.fc_units = j.at("fc_units").get<int>();
  s.dropout_rate = j.at("dropout_rate").get<double>();
  s.l2_coefficient = j.at("l2_coefficient").get<double>();
  s.heads.clear();
  for (const auto& h : j.at("heads")) {
    s.heads.push_back({h.at("name").get<std::string>(), h.at("class_count").get<int>(),
                       h.at("loss_weight").get<double>()});
  }
  return s;
}

Checkpoint collect(const std::string& kind, const std::vector<Tensor>& params,
                   const std::vector<std::string>& names, const TrainResult& result,
                   std::uint64_t seed) {
  Checkpoint ckpt;
  ckpt.model_kind = kind;
  ckpt.seed = seed;
  ckpt.best_epoch = result.best_epoch;
  ckpt.best_train_loss = result.best_train_loss;
  ckpt.names = names;
  for (const Tensor& p : params) {
    ckpt.shapes.push_back(p.shape());
    ckpt.payloads.emplace_back(p.data(), p.data() + p.size());
  }
  return ckpt;
}

void put_le_doubles(std::string& out, const std::vector<double>& values) {
  for (double v : values) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
  }
}

double get_le_double(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int b = 7; b >= 0; --b) bits = (bits << 8) | p[b];
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

}  // namespace

Checkpoint make_checkpoint(const Mlp& model, const TrainResult& result, std::uint64_t seed) {
  Checkpoint ckpt = collect("mlp", model.params(), model.param_names(), result, seed);
  ckpt.mlp_spec = model.spec();
  return ckpt;
}

Checkpoint make_checkpoint(const Cnn& model, const TrainResult& result, std::uint64_t seed) {
  Checkpoint ckpt = collect("cnn", model.params(), model.param_names(), result, seed);
  ckpt.cnn_spec = model.spec();
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  nlohmann::json manifest;
  manifest["model"] = ckpt.model_kind;
  manifest["seed"] = ckpt.seed;
  manifest["best_epoch"] = ckpt.best_epoch;
  manifest["best_train_loss"] = ckpt.best_train_loss;
  if (ckpt.model_kind == "mlp") {
    manifest["spec"] = spec_to_json(ckpt.mlp_spec);
  } else if (ckpt.model_kind == "cnn") {
    manifest["spec"] = spec_to_json(ckpt.cnn_spec);
  } else {
    throw ConfigError("checkpoint: unknown model kind '" + ckpt.model_kind + "'");
  }
  nlohmann::json params = nlohmann::json::array();
  std::int64_t offset = 0;
  for (std::size_t i = 0; i < ckpt.names.size(); ++i) {
    const std::int64_t count = static_cast<std::int64_t>(ckpt.payloads[i].size());
    params.push_back({{"name", ckpt.names[i]},
                      {"shape", ckpt.shapes[i]},
                      {"offset", offset},
                      {"count", count}});
    offset += count;
  }
  manifest["params"] = params;

  const std::string header = manifest.dump(2);
  std::string blob;
  blob += kMagic;
  blob += '\n';
  blob += std::to_string(header.size());
  blob += '\n';
  blob += header;
  blob += '\n';
  for (const auto& payload : ckpt.payloads) put_le_doubles(blob, payload);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("checkpoint: cannot open '" + path + "' for writing");
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw IoError("checkpoint: short write to '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("checkpoint: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string blob = buf.str();

  std::size_t pos = blob.find('\n');
  if (pos == std::string::npos || blob.substr(0, pos) != kMagic) {
    throw IoError("checkpoint: '" + path + "' lacks the " + std::string(kMagic) + " magic");
  }
  std::size_t len_end = blob.find('\n', pos + 1);
  if (len_end == std::string::npos) throw IoError("checkpoint: truncated header");
  std::size_t header_len = 0;
  try {
    header_len = std::stoul(blob.substr(pos + 1, len_end - pos - 1));
  } catch (const std::exception&) {
    throw IoError("checkpoint: bad manifest length");
  }
  const std::size_t header_start = len_end + 1;
  if (header_start + header_len + 1 > blob.size()) throw IoError("checkpoint: truncated manifest");

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(blob.substr(header_start, header_len));
  } catch (const std::exception& e) {
    throw IoError("checkpoint: manifest parse failure: " + std::string(e.what()));
  }

  Checkpoint ckpt;
  const std::size_t payload_start = header_start + header_len + 1;
  try {
    ckpt.model_kind = manifest.at("model").get<std::string>();
    ckpt.seed = manifest.at("seed").get<std::uint64_t>();
    ckpt.best_epoch = manifest.at("best_epoch").get<int>();
    ckpt.best_train_loss = manifest.at("best_train_loss").get<double>();
    if (ckpt.model_kind == "mlp") {
      ckpt.mlp_spec = mlp_spec_from_json(manifest.at("spec"));
    } else if (ckpt.model_kind == "cnn") {
      ckpt.cnn_spec = cnn_spec_from_json(manifest.at("spec"));
    } else {
      throw IoError("checkpoint: unknown model kind '" + ckpt.model_kind + "'");
    }
    for (const auto& p : manifest.at("params")) {
      ckpt.names.push_back(p.at("name").get<std::string>());
      ckpt.shapes.push_back(p.at("shape").get<std::vector<int>>());
      const std::size_t offset = p.at("offset").get<std::size_t>();
      const std::size_t count = p.at("count").get<std::size_t>();
      const std::size_t byte_start = payload_start + 8 * offset;
      if (byte_start + 8 * count > blob.size()) throw IoError("checkpoint: truncated payload");
      std::vector<double> values(count);
      const unsigned char* bytes = reinterpret_cast<const unsigned char*>(blob.data()) + byte_start;
      for (std::size_t i = 0; i < count; ++i) values[i] = get_le_double(bytes + 8 * i);
      ckpt.payloads.push_back(std::move(values));
    }
  } catch (const IoError&) {
    throw;
  } catch (const std::exception& e) {
    throw IoError("checkpoint: malformed manifest: " + std::string(e.what()));
  }
  return ckpt;
}

namespace {

void load_params(std::vector<Tensor>& params, const std::vector<std::string>& names,
                 const Checkpoint& ckpt) {
  if (ckpt.names != names) throw IoError("checkpoint: parameter names do not match the spec");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (ckpt.shapes[i] != params[i].shape() ||
        ckpt.payloads[i].size() != static_cast<std::size_t>(params[i].size())) {
      throw IoError("checkpoint: parameter '" + names[i] + "' has mismatched shape");
    }
    std::copy(ckpt.payloads[i].begin(), ckpt.payloads[i].end(), params[i].data());
  }
}

}  // namespace

Mlp mlp_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.model_kind != "mlp") throw ConfigError("checkpoint: not an mlp checkpoint");
  Rng rng(0);
  Mlp model(ckpt.mlp_spec, rng);
  load_params(model.params(), model.param_names(), ckpt);
  return model;
}

Cnn cnn_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.model_kind != "cnn") throw ConfigError("checkpoint: not a cnn checkpoint");
  Rng rng(0);
  Cnn model(ckpt.cnn_spec, rng);
  load_params(model.params(), model.param_names(), ckpt);
  return model;
}

}  // namespace shapelab
