// octal: corpus generation, oracle checking, training and evaluation.
//
// Exit codes: 0 success or "holds", 1 "fails" or a runtime error,
// 2 "unknown" or an exhausted resource budget, 3 usage or input errors.

#include <chrono>
#include <optional>
#include <thread>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "octal/workflow.hpp"

namespace fs = std::filesystem;
using namespace octal;
using nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "octal 0.1.0";

enum Exit : int { kOk = 0, kFails = 1, kUnknown = 2, kUsage = 3 };

// Input problems that map to the usage exit code.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw std::runtime_error("cannot write " + path.string());
}

unsigned thread_count() {
  if (const char* env = std::getenv("OCTAL_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct Common {
  std::uint64_t seed = 0;
  std::size_t state_cap = 200'000;
  double timeout_s = 120.0;
  std::string out;

  std::chrono::milliseconds timeout() const {
    return std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000.0));
  }
};

struct EncodingFlags {
  std::string scheme = "gaussian";
  bool directed = false;
  std::uint64_t dict_seed = 0;
  double sigma = 0.05;

  workflow::Encoding get() const { return {workflow::parse_scheme(scheme), directed, dict_seed, sigma}; }
};

void add_limits(CLI::App* app, Common& c) {
  app->add_option("--state-cap", c.state_cap, "State cap for translation and product")->capture_default_str();
  app->add_option("--timeout-s", c.timeout_s, "Wall-clock limit per check, seconds")->capture_default_str();
}

void add_encoding(CLI::App* app, EncodingFlags& e) {
  app->add_option("--scheme", e.scheme, "Node features")->check(CLI::IsMember({"gaussian", "one_hot"}))->capture_default_str();
  app->add_flag("--directed", e.directed, "Add source/destination features to transition nodes");
  app->add_option("--dict-seed", e.dict_seed, "Seed of the encoding dictionary")->capture_default_str();
  app->add_option("--sigma", e.sigma, "Spread of the encoding dictionary")->capture_default_str();
}

ordered_json encoding_json(const workflow::Encoding& e) {
  return {{"scheme", workflow::name(e.scheme)},
          {"directed", e.directed},
          {"dict_seed", e.dictionary_seed},
          {"sigma", e.sigma}};
}

// Everything needed to rerun the command, plus the files it wrote.
void write_manifest(const fs::path& dir, const std::string& command, ordered_json config,
                    const std::vector<std::string>& outputs, ordered_json extra = ordered_json::object()) {
  ordered_json j;
  j["tool"] = kVersion;
  j["command"] = command;
  j["config"] = std::move(config);
  j["outputs"] = outputs;
  for (auto& [k, v] : extra.items()) j[k] = v;
  write_file(dir / "manifest.json", j.dump(2) + "\n");
}

fs::path out_dir(const Common& c) {
  if (c.out.empty()) throw InputError("--out is required");
  fs::create_directories(c.out);
  return c.out;
}

dataset::Dataset load_dataset(const std::string& path) {
  if (!fs::exists(path)) throw InputError("no such dataset: " + path);
  dataset::Dataset ds;
  for (const auto& s : dataset::read_jsonl(path)) ds.samples.push_back(dataset::decode(s));
  return ds;
}

nn::Checkpoint load_checkpoint(const std::string& path) {
  try {
    return nn::read_checkpoint(read_file(path));
  } catch (const std::invalid_argument& e) {
    throw InputError(path + ": " + e.what());
  }
}

// --- check ------------------------------------------------------------------

int cmd_check(const std::string& automaton_path, const std::string& formula_text, const Common& c) {
  buchi::Automaton b;
  ltl::Formula f = ltl::Formula::constant(true);
  try {
    b = buchi::read_automaton(read_file(automaton_path));
    f = ltl::parse(formula_text);
  } catch (const buchi::FormatError& e) {
    throw InputError(automaton_path + ":" + std::to_string(e.line()) + ": " + e.what());
  } catch (const ltl::ParseError& e) {
    throw InputError(std::string("formula: ") + e.what());
  }
  buchi::Limits limits;
  limits.state_cap = c.state_cap;
  const auto start = std::chrono::steady_clock::now();
  limits.deadline = start + c.timeout();
  try {
    const buchi::Verdict v = buchi::check(b, f, limits);
    std::printf("verdict: %s\n", v.holds ? "holds" : "fails");
    if (v.counterexample) {
      const bool verified = buchi::accepts(b, *v.counterexample) && !ltl::eval(f, *v.counterexample);
      std::printf("counterexample: %s\n", ltl::to_string(*v.counterexample).c_str());
      std::printf("counterexample verified: %s\n", verified ? "yes" : "no");
    }
    std::printf("states explored: %zu\n", v.explored_states);
    std::printf("time: %.6f s\n", std::chrono::duration<double>(v.elapsed).count());
    return v.holds ? kOk : kFails;
  } catch (const buchi::ResourceLimit& e) {
    std::printf("verdict: unknown\nreason: %s\n", e.what());
    std::printf("time: %.6f s\n",
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    return kUnknown;
  }
}

// --- gen --------------------------------------------------------------------

int cmd_gen(const std::string& profile, std::size_t count, const EncodingFlags& enc, const Common& c) {
  dataset::GenOptions o;
  o.profile = dataset::parse_profile(profile);
  o.count = count;
  o.seed = c.seed;
  o.state_cap = c.state_cap;
  o.timeout = c.timeout();
  o.threads = thread_count();
  const fs::path dir = out_dir(c);
  const dataset::Dataset ds = dataset::generate_corpus(o);
  const workflow::Encoder encoder(enc.get());
  dataset::write_jsonl((dir / "dataset.jsonl").string(), dataset::encode(ds, encoder.options()));
  const auto stats = dataset::corpus_stats(ds);
  ordered_json config = {{"profile", profile},   {"count", count},         {"seed", c.seed},
                         {"state_cap", c.state_cap}, {"timeout_s", c.timeout_s},
                         {"encoding", encoding_json(enc.get())}};
  write_manifest(dir, "gen", config, {"dataset.jsonl"}, {{"stats", ordered_json::parse(dataset::to_json(stats))}});
  std::printf("%s\n", dataset::to_json(stats).c_str());
  return kOk;
}

// --- encode -----------------------------------------------------------------

int cmd_encode(const std::string& data, const std::string& automaton_path, const std::string& formula_text,
               int label, const EncodingFlags& enc, const Common& c) {
  const fs::path dir = out_dir(c);
  const workflow::Encoder encoder(enc.get());
  ordered_json config = {{"encoding", encoding_json(enc.get())}};
  if (!data.empty()) {
    const dataset::Dataset ds = load_dataset(data);
    dataset::write_jsonl((dir / "dataset.jsonl").string(), dataset::encode(ds, encoder.options()));
    config["data"] = data;
  } else {
    if (automaton_path.empty() || formula_text.empty()) throw InputError("need --data or --automaton with --formula");
    buchi::Automaton b;
    ltl::Formula f = ltl::Formula::constant(true);
    try {
      b = buchi::read_automaton(read_file(automaton_path));
      f = ltl::parse(formula_text);
    } catch (const std::exception& e) {
      throw InputError(e.what());
    }
    dataset::write_jsonl((dir / "dataset.jsonl").string(), {encoder.sample(b, f, label)});
    config["automaton"] = automaton_path;
    config["formula"] = formula_text;
    config["label"] = label;
  }
  write_manifest(dir, "encode", config, {"dataset.jsonl"});
  return kOk;
}

// --- train ------------------------------------------------------------------

struct TrainFlags {
  std::string data;
  std::string variant = "gin";
  double split = 0.8;
  nn::Hyper hp;
  std::size_t hidden = 128;
  bool multiply = false;
  bool inner_norm = false;
};

int cmd_train(const TrainFlags& t, const EncodingFlags& enc, const Common& c) {
  const fs::path dir = out_dir(c);
  const dataset::Dataset ds = load_dataset(t.data);
  const auto [train_part, val_part] = dataset::split(ds, t.split, c.seed);
  const workflow::Encoder encoder(enc.get());
  nn::Architecture arch;
  arch.variant = nn::parse_variant(t.variant);
  arch.input_width = encoder.encoding().width();
  arch.hidden = t.hidden;
  arch.multiply = t.multiply;
  arch.inner_norm = t.inner_norm;
  nn::Hyper hp = t.hp;
  hp.seed = c.seed;
  const auto train_in = encoder.inputs(train_part);
  const auto val_in = encoder.inputs(val_part);
  const nn::TrainResult r = nn::train(arch, train_in, val_in, hp, [](const nn::EpochRecord& e) {
    std::fprintf(stderr, "epoch %zu loss %.6f val_accuracy %.4f\n", e.epoch, e.train_loss, e.val_accuracy);
  });
  nn::Checkpoint ck;
  ck.model = r.model;
  ck.hyper = hp;
  workflow::set_encoding(ck, encoder.encoding());
  write_file(dir / "checkpoint.json", nn::write_checkpoint(ck));
  write_file(dir / "history.jsonl", nn::write_history(r.history));
  dataset::write_jsonl((dir / "val.jsonl").string(), dataset::encode(val_part, encoder.options()));
  const nn::Metrics m = nn::classification_metrics(nn::predict(r.model, val_in), workflow::labels(val_in));
  write_file(dir / "metrics.json", workflow::to_json(m) + "\n");
  ordered_json config = {{"data", t.data},
                         {"variant", t.variant},
                         {"split", t.split},
                         {"seed", c.seed},
                         {"lr", hp.learning_rate},
                         {"dropout", hp.dropout},
                         {"patience", hp.patience},
                         {"max_epochs", hp.max_epochs},
                         {"batch_size", hp.batch_size},
                         {"hidden", t.hidden},
                         {"multiply", t.multiply},
                         {"inner_norm", t.inner_norm},
                         {"encoding", encoding_json(enc.get())}};
  write_manifest(dir, "train", config, {"checkpoint.json", "history.jsonl", "val.jsonl", "metrics.json"},
                 {{"best_epoch", r.best_epoch}, {"best_val_accuracy", r.best_val_accuracy}});
  std::printf("%s\n", workflow::to_json(m).c_str());
  return kOk;
}

// --- eval -------------------------------------------------------------------

int cmd_eval(const std::string& data, const std::string& checkpoint, const Common& c) {
  const nn::Checkpoint ck = load_checkpoint(checkpoint);
  const workflow::Encoder encoder(workflow::encoding_of(ck));
  const auto in = encoder.inputs(load_dataset(data));
  const nn::Metrics m = nn::classification_metrics(nn::predict(ck.model, in), workflow::labels(in));
  const std::string text = workflow::to_json(m);
  if (!c.out.empty()) {
    const fs::path dir = out_dir(c);
    write_file(dir / "metrics.json", text + "\n");
    write_manifest(dir, "eval", {{"data", data}, {"checkpoint", checkpoint}}, {"metrics.json"});
  }
  std::printf("%s\n", text.c_str());
  return kOk;
}

// --- rank -------------------------------------------------------------------

int cmd_rank(const std::string& checkpoint, const std::string& profile, std::size_t count, const Common& c) {
  const nn::Checkpoint ck = load_checkpoint(checkpoint);
  const workflow::Encoder encoder(workflow::encoding_of(ck));
  dataset::GenOptions o;
  o.profile = dataset::parse_profile(profile);
  o.count = count;
  o.seed = c.seed;
  o.state_cap = c.state_cap;
  o.timeout = c.timeout();
  o.threads = thread_count();
  const auto groups = dataset::build_ranking_groups(o);
  const auto scores = workflow::ranking_scores(ck.model, groups, encoder);
  const nn::RankingMetrics m = nn::ranking_metrics(scores);
  const std::string text = workflow::to_json(m);
  if (!c.out.empty()) {
    const fs::path dir = out_dir(c);
    write_file(dir / "ranking.json", text + "\n");
    std::string lines;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      ordered_json j = {{"positive", ltl::to_string(groups[g].positive)},
                        {"rank", nn::rank_of_positive(scores[g])},
                        {"scores", scores[g]}};
      lines += j.dump() + "\n";
    }
    write_file(dir / "groups.jsonl", lines);
    write_manifest(dir, "rank",
                   {{"checkpoint", checkpoint}, {"profile", profile}, {"count", count}, {"seed", c.seed},
                    {"state_cap", c.state_cap}, {"timeout_s", c.timeout_s}},
                   {"ranking.json", "groups.jsonl"});
  }
  std::printf("%s\n", text.c_str());
  return kOk;
}

// --- perturb ----------------------------------------------------------------

int cmd_perturb(const std::string& data, double p, const std::string& checkpoint, const EncodingFlags& enc,
                const Common& c) {
  const fs::path dir = out_dir(c);
  std::optional<nn::Checkpoint> ck;
  if (!checkpoint.empty()) ck = load_checkpoint(checkpoint);
  const workflow::Encoder encoder(ck ? workflow::encoding_of(*ck) : enc.get());
  dataset::Dataset positives;
  for (auto& s : load_dataset(data).samples) {
    if (s.label == 1) positives.samples.push_back(std::move(s));
  }
  const auto set = dataset::build_perturbation_set(positives, p, c.seed, encoder.options());
  dataset::write_jsonl((dir / "perturbed.jsonl").string(), set);

  // The oracle's view of the automata left after the drop.
  buchi::Limits limits;
  limits.state_cap = c.state_cap;
  std::size_t still_hold = 0, now_fail = 0, unknown = 0;
  for (std::size_t i = 0; i < positives.samples.size(); ++i) {
    limits.deadline = std::chrono::steady_clock::now() + c.timeout();
    try {
      const auto survivor = dataset::surviving_automaton(set[2 * i + 1].graph);
      ++(buchi::check(survivor, positives.samples[i].formula, limits).holds ? still_hold : now_fail);
    } catch (const buchi::ResourceLimit&) {
      ++unknown;
    }
  }
  ordered_json report = {{"pairs", positives.samples.size()},
                         {"p", p},
                         {"perturbed_still_hold", still_hold},
                         {"perturbed_fail", now_fail},
                         {"perturbed_unknown", unknown}};
  std::vector<std::string> outputs{"perturbed.jsonl", "perturb.json"};
  if (ck) {
    const auto in = workflow::inputs(set);
    const nn::Metrics m = nn::classification_metrics(nn::predict(ck->model, in), workflow::labels(in));
    report["metrics"] = ordered_json::parse(workflow::to_json(m));
  }
  write_file(dir / "perturb.json", report.dump(2) + "\n");
  write_manifest(dir, "perturb",
                 {{"data", data}, {"p", p}, {"seed", c.seed}, {"checkpoint", checkpoint},
                  {"encoding", encoding_json(encoder.encoding())}},
                 outputs);
  std::printf("%s\n", report.dump(2).c_str());
  return kOk;
}

// --- bench ------------------------------------------------------------------

int cmd_bench(const std::string& data, const std::string& checkpoint, const Common& c) {
  const nn::Checkpoint ck = load_checkpoint(checkpoint);
  const workflow::Encoder encoder(workflow::encoding_of(ck));
  const workflow::BenchReport r =
      workflow::bench(load_dataset(data), ck.model, encoder, {c.state_cap, c.timeout()});
  const std::string text = workflow::to_json(r);
  if (!c.out.empty()) {
    const fs::path dir = out_dir(c);
    write_file(dir / "bench.json", text + "\n");
    write_manifest(dir, "bench",
                   {{"data", data}, {"checkpoint", checkpoint}, {"state_cap", c.state_cap}, {"timeout_s", c.timeout_s}},
                   {"bench.json"});
  }
  std::printf("samples %zu  unknown %zu\n", r.samples.size(), r.unknown);
  std::printf("oracle %.6f s  inference %.6f s  preprocessing %.6f s\n", r.oracle_seconds, r.inference_seconds,
              r.preprocess_seconds);
  std::printf("speedup inference-only %.2fx  with overhead %.2fx\n", r.inference_speedup(), r.overall_speedup());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LTL model checking by graph learning, with a classical oracle"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common common;
  EncodingFlags enc;

  auto* check = app.add_subcommand("check", "Decide whether an automaton satisfies a formula");
  std::string automaton_path, formula_text;
  check->add_option("automaton", automaton_path, "Automaton file")->required();
  check->add_option("formula", formula_text, "LTL formula")->required();
  add_limits(check, common);

  auto* gen = app.add_subcommand("gen", "Generate a labelled corpus");
  std::string profile = "short_like";
  std::size_t count = 0;
  gen->add_option("--profile", profile)->check(CLI::IsMember({"short_like", "diverse_like"}))->capture_default_str();
  gen->add_option("--count", count, "Number of samples (even)")->required();
  gen->add_option("--seed", common.seed)->required();
  gen->add_option("--out", common.out, "Output directory")->required();
  add_limits(gen, common);
  add_encoding(gen, enc);

  auto* encode = app.add_subcommand("encode", "Re-encode a dataset or encode one pair");
  std::string data;
  int label = 1;
  encode->add_option("--data", data, "Dataset file to re-encode");
  encode->add_option("--automaton", automaton_path, "Automaton file");
  encode->add_option("--formula", formula_text, "LTL formula");
  encode->add_option("--label", label)->check(CLI::Range(0, 1))->capture_default_str();
  encode->add_option("--out", common.out, "Output directory")->required();
  add_encoding(encode, enc);

  auto* train = app.add_subcommand("train", "Train a classifier on a dataset");
  TrainFlags tf;
  train->add_option("--data", tf.data, "Dataset file")->required();
  train->add_option("--variant", tf.variant)->check(CLI::IsMember({"gin", "gcn", "mlp", "linkpred"}))->capture_default_str();
  train->add_option("--seed", common.seed)->required();
  train->add_option("--split", tf.split, "Training fraction")->capture_default_str();
  train->add_option("--lr", tf.hp.learning_rate)->capture_default_str();
  train->add_option("--dropout", tf.hp.dropout)->capture_default_str();
  train->add_option("--patience", tf.hp.patience)->capture_default_str();
  train->add_option("--max-epochs", tf.hp.max_epochs)->capture_default_str();
  train->add_option("--batch-size", tf.hp.batch_size)->capture_default_str();
  train->add_option("--hidden", tf.hidden)->capture_default_str();
  train->add_flag("--multiply", tf.multiply, "Link predictor: multiply the two embeddings");
  train->add_flag("--inner-norm", tf.inner_norm, "GIN: batch normalization inside each layer");
  train->add_option("--out", common.out, "Output directory")->required();
  add_encoding(train, enc);

  auto* eval = app.add_subcommand("eval", "Classification metrics of a checkpoint");
  std::string checkpoint;
  eval->add_option("--data", data, "Dataset file")->required();
  eval->add_option("--checkpoint", checkpoint)->required();
  eval->add_option("--out", common.out, "Output directory");

  auto* rank = app.add_subcommand("rank", "One-vs-many ranking of a checkpoint");
  std::size_t groups = 100;
  rank->add_option("--checkpoint", checkpoint)->required();
  rank->add_option("--profile", profile)->check(CLI::IsMember({"short_like", "diverse_like"}))->capture_default_str();
  rank->add_option("--count", groups, "Number of groups")->capture_default_str();
  rank->add_option("--seed", common.seed)->required();
  rank->add_option("--out", common.out, "Output directory");
  add_limits(rank, common);

  auto* perturb = app.add_subcommand("perturb", "Edge-drop perturbation set, optionally evaluated");
  double p = 0.3;
  perturb->add_option("--data", data, "Dataset file; its positives are used")->required();
  perturb->add_option("--p", p, "Fraction of incidence edges to drop")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  perturb->add_option("--seed", common.seed)->required();
  perturb->add_option("--checkpoint", checkpoint);
  perturb->add_option("--out", common.out, "Output directory")->required();
  add_limits(perturb, common);
  add_encoding(perturb, enc);

  auto* bench = app.add_subcommand("bench", "Oracle and model timing");
  bench->add_option("--data", data, "Dataset file")->required();
  bench->add_option("--checkpoint", checkpoint)->required();
  bench->add_option("--out", common.out, "Output directory");
  add_limits(bench, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*check) return cmd_check(automaton_path, formula_text, common);
    if (*gen) return cmd_gen(profile, count, enc, common);
    if (*encode) return cmd_encode(data, automaton_path, formula_text, label, enc, common);
    if (*train) return cmd_train(tf, enc, common);
    if (*eval) return cmd_eval(data, checkpoint, common);
    if (*rank) return cmd_rank(checkpoint, profile, groups, common);
    if (*perturb) return cmd_perturb(data, p, checkpoint, enc, common);
    if (*bench) return cmd_bench(data, checkpoint, common);
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const graph::SchemaError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const dataset::BudgetExhausted& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUnknown;
  } catch (const buchi::ResourceLimit& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUnknown;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFails;
  }
  return kUsage;
}
