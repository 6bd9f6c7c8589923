#include "actgen/checkpoint.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace actgen {

namespace {

using nlohmann::json;

json mlp_to_json(const Mlp& mlp) {
  json layers = json::array();
  for (const auto& layer : mlp.layers()) {
    json l;
    l["activation"] = to_string(layer.activation);
    l["weight"] = {{"shape", layer.weight.shape()},
                   {"values", layer.weight.to_vector()}};
    l["bias"] = {{"shape", layer.bias.shape()}, {"values", layer.bias.to_vector()}};
    layers.push_back(std::move(l));
  }
  return json{{"layers", std::move(layers)}};
}

Tensor tensor_from_json(const json& j, bool requires_grad) {
  auto shape = j.at("shape").get<std::vector<std::size_t>>();
  auto values = j.at("values").get<std::vector<double>>();
  Tensor t = Tensor::from_data(std::move(shape), std::move(values));
  t.set_requires_grad(requires_grad);
  return t;
}

Mlp mlp_from_json(const json& j) {
  Mlp mlp;
  for (const auto& l : j.at("layers")) {
    DenseLayer layer;
    layer.activation = activation_from_string(l.at("activation").get<std::string>());
    layer.weight = tensor_from_json(l.at("weight"), true);
    layer.bias = tensor_from_json(l.at("bias"), true);
    if (layer.weight.rank() != 2 || layer.bias.rank() != 1 ||
        layer.bias.extent(0) != layer.weight.extent(1)) {
      throw std::invalid_argument("checkpoint: inconsistent layer shapes");
    }
    mlp.layers().push_back(std::move(layer));
  }
  if (mlp.empty()) throw std::invalid_argument("checkpoint: network has no layers");
  return mlp;
}

json optim_to_json(const Checkpoint::OptimState& s) {
  return json{{"step_count", s.step_count},
              {"lr", s.adam.lr},
              {"beta1", s.adam.beta1},
              {"beta2", s.adam.beta2},
              {"eps", s.adam.eps},
              {"m", s.m},
              {"v", s.v}};
}

Checkpoint::OptimState optim_from_json(const json& j) {
  Checkpoint::OptimState s;
  s.step_count = j.at("step_count").get<std::size_t>();
  s.adam.lr = j.at("lr").get<double>();
  s.adam.beta1 = j.at("beta1").get<double>();
  s.adam.beta2 = j.at("beta2").get<double>();
  s.adam.eps = j.at("eps").get<double>();
  s.m = j.at("m").get<std::vector<std::vector<double>>>();
  s.v = j.at("v").get<std::vector<std::vector<double>>>();
  return s;
}

json config_to_json(const ModelConfig& c) {
  return json{{"frame_dim", c.frame_dim},
              {"latent_dim", c.latent_dim},
              {"seq_len", c.seq_len},
              {"classes", c.classes},
              {"z_dim", c.z_dim},
              {"consistency_weight", c.consistency_weight},
              {"window_len", c.window_len},
              {"batch_size", c.batch_size},
              {"encoder_hidden", c.encoder_hidden},
              {"decoder_hidden", c.decoder_hidden},
              {"generator_hidden", c.generator_hidden},
              {"discriminator_hidden", c.discriminator_hidden}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.frame_dim = j.at("frame_dim").get<std::size_t>();
  c.latent_dim = j.at("latent_dim").get<std::size_t>();
  c.seq_len = j.at("seq_len").get<std::size_t>();
  c.classes = j.at("classes").get<std::size_t>();
  c.z_dim = j.at("z_dim").get<std::size_t>();
  c.consistency_weight = j.at("consistency_weight").get<double>();
  c.window_len = j.at("window_len").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.encoder_hidden = j.at("encoder_hidden").get<std::vector<std::size_t>>();
  c.decoder_hidden = j.at("decoder_hidden").get<std::vector<std::size_t>>();
  c.generator_hidden = j.at("generator_hidden").get<std::vector<std::size_t>>();
  c.discriminator_hidden = j.at("discriminator_hidden").get<std::vector<std::size_t>>();
  c.validate();
  return c;
}

}  // namespace

std::string checkpoint_to_json(const Checkpoint& ckpt) {
  json j;
  j["format"] = "actgen-checkpoint";
  j["version"] = Checkpoint::kFormatVersion;
  j["config"] = config_to_json(ckpt.config);
  j["norm"] = {{"scale", ckpt.norm.scale}};
  j["networks"] = {{"encoder", mlp_to_json(ckpt.bundle.encoder)},
                   {"decoder", mlp_to_json(ckpt.bundle.decoder)},
                   {"generator", mlp_to_json(ckpt.bundle.generator)},
                   {"discriminator", mlp_to_json(ckpt.bundle.discriminator)}};
  json optims = json::object();
  if (ckpt.autoencoder_opt) optims["autoencoder"] = optim_to_json(*ckpt.autoencoder_opt);
  if (ckpt.discriminator_opt) optims["discriminator"] = optim_to_json(*ckpt.discriminator_opt);
  if (ckpt.generator_opt) optims["generator"] = optim_to_json(*ckpt.generator_opt);
  j["optimizers"] = std::move(optims);
  return j.dump();
}

Checkpoint checkpoint_from_json(const std::string& text) {
  const json j = json::parse(text);
  if (j.at("format").get<std::string>() != "actgen-checkpoint") {
    throw std::invalid_argument("checkpoint: unrecognized format tag");
  }
  if (j.at("version").get<int>() != Checkpoint::kFormatVersion) {
    throw std::invalid_argument("checkpoint: unsupported version " +
                                std::to_string(j.at("version").get<int>()));
  }
  Checkpoint ckpt;
  ckpt.config = config_from_json(j.at("config"));
  ckpt.norm.scale = j.at("norm").at("scale").get<double>();
  const auto& nets = j.at("networks");
  ckpt.bundle.encoder = mlp_from_json(nets.at("encoder"));
  ckpt.bundle.decoder = mlp_from_json(nets.at("decoder"));
  ckpt.bundle.generator = mlp_from_json(nets.at("generator"));
  ckpt.bundle.discriminator = mlp_from_json(nets.at("discriminator"));
  const auto& optims = j.at("optimizers");
  if (optims.contains("autoencoder")) {
    ckpt.autoencoder_opt = optim_from_json(optims.at("autoencoder"));
  }
  if (optims.contains("discriminator")) {
    ckpt.discriminator_opt = optim_from_json(optims.at("discriminator"));
  }
  if (optims.contains("generator")) {
    ckpt.generator_opt = optim_from_json(optims.at("generator"));
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  os << checkpoint_to_json(ckpt);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path.string());
  std::ostringstream buf;
  buf << is.rdbuf();
  return checkpoint_from_json(buf.str());
}

}  // namespace actgen
