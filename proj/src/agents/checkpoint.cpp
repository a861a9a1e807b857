#include "pgdqn/agents/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace pgdqn {

using nlohmann::json;

namespace {
constexpr int kFormatVersion = 1;
}

void save_checkpoint(const DualNetwork& net, const std::string& path) {
  json doc;
  doc["format_version"] = kFormatVersion;
  const NetworkConfig& c = net.config();
  doc["arch"] = {
      {"obs_dim", c.obs_dim},
      {"n_actions", c.n_actions},
      {"embedding_widths", c.embedding_widths},
      {"head_width", c.head_width},
      {"dueling", c.dueling},
      {"noisy", c.noisy},
      {"pref_branch", c.pref_branch},
      {"share_embedding", c.share_embedding},
  };
  json tensors = json::object();
  for (const auto& [name, tensor] : net.named_tensors()) {
    tensors[name] = {
        {"shape", tensor->shape()},
        {"data", std::vector<double>(tensor->data().begin(), tensor->data().end())},
    };
  }
  doc["tensors"] = std::move(tensors);

  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  out << doc.dump();
}

DualNetwork load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  json doc = json::parse(in);
  if (doc.at("format_version").get<int>() != kFormatVersion)
    throw std::runtime_error("load_checkpoint: unsupported format version");

  const json& arch = doc.at("arch");
  NetworkConfig c;
  c.obs_dim = arch.at("obs_dim").get<int>();
  c.n_actions = arch.at("n_actions").get<int>();
  c.embedding_widths = arch.at("embedding_widths").get<std::vector<int>>();
  c.head_width = arch.at("head_width").get<int>();
  c.dueling = arch.at("dueling").get<bool>();
  c.noisy = arch.at("noisy").get<bool>();
  c.pref_branch = arch.at("pref_branch").get<bool>();
  c.share_embedding = arch.at("share_embedding").get<bool>();

  Prng scratch(0);
  DualNetwork net = DualNetwork::create(c, scratch);
  const json& tensors = doc.at("tensors");
  for (auto& [name, tensor] : net.named_tensors()) {
    if (!tensors.contains(name))
      throw std::runtime_error("load_checkpoint: missing tensor '" + name + "'");
    const json& entry = tensors.at(name);
    auto shape = entry.at("shape").get<std::vector<std::size_t>>();
    if (shape != tensor->shape())
      throw std::runtime_error("load_checkpoint: shape mismatch for '" + name + "'");
    auto data = entry.at("data").get<std::vector<double>>();
    if (data.size() != tensor->size())
      throw std::runtime_error("load_checkpoint: data length mismatch for '" + name + "'");
    std::copy(data.begin(), data.end(), tensor->data().begin());
  }
  return net;
}

}  // namespace pgdqn
