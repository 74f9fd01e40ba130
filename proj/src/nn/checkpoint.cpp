#include <json.hpp>

#include "octal/nn.hpp"

namespace octal::nn {

using nlohmann::ordered_json;

namespace {

ordered_json quantized(const std::vector<double>& values) {
  ordered_json out = ordered_json::array();
  for (double v : values) out.push_back(graph::quantize(v));
  return out;
}

}  // namespace

std::string write_checkpoint(const Checkpoint& c) {
  const Architecture& a = c.model.architecture();
  const Hyper& h = c.hyper;
  ordered_json j;
  j["format"] = "octal-checkpoint-1";
  j["architecture"] = {{"variant", name(a.variant)},
                       {"input_width", a.input_width},
                       {"hidden", a.hidden},
                       {"layers", a.layers},
                       {"multiply", a.multiply},
                       {"inner_norm", a.inner_norm}};
  j["hyper"] = {{"learning_rate", h.learning_rate}, {"dropout", h.dropout},   {"patience", h.patience},
                {"max_epochs", h.max_epochs},       {"batch_size", h.batch_size}, {"seed", h.seed},
                {"beta1", h.beta1},                 {"beta2", h.beta2},       {"epsilon", h.epsilon}};
  j["encoding"] = {{"scheme", c.scheme},
                   {"directed", c.directed},
                   {"dictionary_seed", c.dictionary_seed},
                   {"dictionary_sigma", c.dictionary_sigma}};
  const auto dict = graph::Dictionary::make(c.dictionary_seed, c.dictionary_sigma);
  j["encoding"]["dictionary"] =
      quantized(std::vector<double>(dict.values().begin(), dict.values().end()));
  ordered_json blocks = ordered_json::array();
  for (const Block& b : c.model.blocks()) {
    blocks.push_back({{"name", b.name}, {"rows", b.rows}, {"cols", b.cols}, {"offset", b.offset}});
  }
  j["blocks"] = std::move(blocks);
  j["params"] = quantized(c.model.params());
  j["running"] = quantized(c.model.running());
  return j.dump() + "\n";
}

Checkpoint read_checkpoint(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::exception& e) {
    throw std::invalid_argument(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format") != "octal-checkpoint-1") throw std::invalid_argument("unknown checkpoint format");
    const auto& ja = j.at("architecture");
    Architecture a;
    a.variant = parse_variant(ja.at("variant").get<std::string>());
    a.input_width = ja.at("input_width").get<std::size_t>();
    a.hidden = ja.at("hidden").get<std::size_t>();
    a.layers = ja.at("layers").get<std::size_t>();
    a.multiply = ja.at("multiply").get<bool>();
    a.inner_norm = ja.at("inner_norm").get<bool>();
    const auto& jh = j.at("hyper");
    Checkpoint c;
    c.hyper.learning_rate = jh.at("learning_rate").get<double>();
    c.hyper.dropout = jh.at("dropout").get<double>();
    c.hyper.patience = jh.at("patience").get<std::size_t>();
    c.hyper.max_epochs = jh.at("max_epochs").get<std::size_t>();
    c.hyper.batch_size = jh.at("batch_size").get<std::size_t>();
    c.hyper.seed = jh.at("seed").get<std::uint64_t>();
    c.hyper.beta1 = jh.at("beta1").get<double>();
    c.hyper.beta2 = jh.at("beta2").get<double>();
    c.hyper.epsilon = jh.at("epsilon").get<double>();
    const auto& je = j.at("encoding");
    c.scheme = je.at("scheme").get<std::string>();
    c.directed = je.at("directed").get<bool>();
    c.dictionary_seed = je.at("dictionary_seed").get<std::uint64_t>();
    c.dictionary_sigma = je.at("dictionary_sigma").get<double>();
    c.model = Model(a, 0);
    auto params = j.at("params").get<std::vector<double>>();
    auto running = j.at("running").get<std::vector<double>>();
    if (params.size() != c.model.params().size() || running.size() != c.model.running().size()) {
      throw std::invalid_argument("checkpoint weights do not match the architecture");
    }
    c.model.params() = std::move(params);
    c.model.running() = std::move(running);
    return c;
  } catch (const ordered_json::exception& e) {
    throw std::invalid_argument(std::string("malformed checkpoint: ") + e.what());
  }
}

std::string write_history(const std::vector<EpochRecord>& history) {
  std::string out;
  for (const auto& r : history) {
    ordered_json j = {{"epoch", r.epoch}, {"train_loss", r.train_loss}, {"val_accuracy", r.val_accuracy}};
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace octal::nn
