// kasper CLI: train / eval / classify / serve / simulate / repl / gen-corpus.
// Exit codes: 0 success, 1 validation failure, 2 internal invariant violation.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "kasper/brain.hpp"
#include "kasper/checkpoint.hpp"
#include "kasper/corpus.hpp"
#include "kasper/intent.hpp"
#include "kasper/neural.hpp"
#include "kasper/sim.hpp"

namespace {

using namespace kasper;

struct CommonModelFlags {
  std::uint64_t seed = 42;
  int epochs = 40;
  double lr = 0.05;
  int filters = 16;
  int hidden = 32;
  int dim = 50;
  int knn_k = 5;
  std::string embeddings_path;

  intent::TrainConfig config() const {
    intent::TrainConfig c;
    c.seed = seed;
    c.epochs = epochs;
    c.learning_rate = lr;
    c.filters_per_width = filters;
    c.hidden_size = hidden;
    return c;
  }
};

void add_model_flags(CLI::App* cmd, CommonModelFlags& flags) {
  cmd->add_option("--seed", flags.seed, "deterministic seed");
  cmd->add_option("--epochs", flags.epochs, "training epochs");
  cmd->add_option("--lr", flags.lr, "learning rate");
  cmd->add_option("--filters", flags.filters, "CNN filters per width");
  cmd->add_option("--hidden", flags.hidden, "RNN hidden size");
  cmd->add_option("--dim", flags.dim, "embedding dimension for the seeded random table");
  cmd->add_option("--knn-k", flags.knn_k, "k for the KNN classifier");
  cmd->add_option("--embeddings", flags.embeddings_path,
                  "pre-trained embedding file (token then D decimals per line)");
}

intent::EmbeddingTable make_table(const CommonModelFlags& flags, const intent::Dataset& data) {
  if (!flags.embeddings_path.empty()) return intent::load_embeddings(flags.embeddings_path);
  return intent::random_table(intent::corpus_vocabulary(data), flags.dim, flags.seed);
}

std::shared_ptr<brain::BrainClient> make_brain(const std::string& ckpt_path,
                                               const std::string& brain_url,
                                               bool default_fuzzy) {
  if (!brain_url.empty()) {
    return std::make_shared<brain::HttpBrain>(brain_url);
  }
  if (!ckpt_path.empty()) {
    auto bundle =
        std::make_shared<const intent::ModelBundle>(intent::load_checkpoint(ckpt_path));
    return std::make_shared<brain::InProcessBrain>(bundle, brain::SkillRegistry::defaults());
  }
  if (!default_fuzzy) return nullptr;
  // no checkpoint: fuzzy matching over the bundled corpus still answers
  auto bundle = std::make_shared<intent::ModelBundle>();
  const intent::Dataset data = corpus::generate_corpus(corpus::default_spec());
  bundle->exemplars = intent::split_dataset(data, 0.8, 42).train;
  bundle->default_algo = "fuzzy";
  return std::make_shared<brain::InProcessBrain>(bundle, brain::SkillRegistry::defaults());
}

int run_train(const std::string& data_path, const std::string& algo, const std::string& out_path,
              const CommonModelFlags& flags) {
  const intent::Dataset data = intent::load_dataset(data_path);
  const intent::Split split = intent::split_dataset(data, 0.8, flags.seed);
  intent::ensure_all_classes_present(split.train);
  const intent::EmbeddingTable table = make_table(flags, data);
  const intent::TrainConfig config = flags.config();

  intent::ModelBundle bundle;
  bundle.table = table;
  bundle.exemplars = split.train;
  bundle.knn_k = flags.knn_k;
  if (algo == "cnn") {
    bundle.cnn = intent::train_cnn(split.train, table, config);
    bundle.default_algo = "cnn";
  } else if (algo == "rnn") {
    bundle.rnn = intent::train_rnn(split.train, table, config);
    bundle.default_algo = "rnn";
  } else {
    std::cerr << "train: --algo must be cnn or rnn\n";
    return 1;
  }
  intent::save_checkpoint(bundle, out_path);

  const auto eval = intent::evaluate(
      [&](const std::string& text) { return intent::classify_with(bundle, algo, text); },
      split.held_out);
  std::cout << "trained " << algo << " on " << split.train.examples.size() << " examples ("
            << config.epochs << " epochs, seed " << config.seed << ")\n";
  char acc[32];
  std::snprintf(acc, sizeof(acc), "%.2f%%", eval.accuracy * 100.0);
  std::cout << "held-out accuracy: " << acc << "\n";
  std::cout << "checkpoint written to " << out_path << "\n";
  return 0;
}

int run_eval(const std::string& data_path, const std::string& ckpt_path, bool all_algos,
             const CommonModelFlags& flags) {
  const intent::Dataset data = intent::load_dataset(data_path);

  if (all_algos) {
    std::optional<intent::EmbeddingTable> table;
    if (!ckpt_path.empty()) {
      table = intent::load_checkpoint(ckpt_path).table;
    } else if (!flags.embeddings_path.empty()) {
      table = intent::load_embeddings(flags.embeddings_path);
    }
    const sim::ComparisonReport report =
        sim::run_comparison(data, flags.config(), flags.dim, flags.knn_k, table);
    std::cout << "train " << report.train_size << " / held-out " << report.held_out_size
              << " (seed " << flags.seed << ")\n";
    std::cout << report.table_text();
    return 0;
  }

  if (ckpt_path.empty()) {
    std::cerr << "eval: need --ckpt or --all-algos\n";
    return 1;
  }
  const intent::ModelBundle bundle = intent::load_checkpoint(ckpt_path);
  const intent::Split split = intent::split_dataset(data, 0.8, flags.seed);
  const auto eval = intent::evaluate(
      [&](const std::string& text) { return intent::classify_with(bundle, "", text); },
      split.held_out);
  char acc[32];
  std::snprintf(acc, sizeof(acc), "%.2f%%", eval.accuracy * 100.0);
  std::cout << bundle.default_algo << " held-out accuracy: " << acc << " ("
            << split.held_out.examples.size() << " examples)\n";
  return 0;
}

int run_classify(const std::string& ckpt_path, const std::string& text, const std::string& algo) {
  const intent::ModelBundle bundle = intent::load_checkpoint(ckpt_path);
  const intent::Prediction pred = intent::classify_with(bundle, algo, text);
  const brain::SkillRegistry registry = brain::SkillRegistry::defaults();
  char conf[32];
  std::snprintf(conf, sizeof(conf), "%.4f", pred.confidence);
  std::cout << "intent: " << intent::class_label(pred.argmax) << "\n";
  std::cout << "confidence: " << conf << "\n";
  std::cout << "response: " << brain::route(pred.argmax, text, registry) << "\n";
  return 0;
}

int run_serve(const std::string& ckpt_path, const std::string& bind,
              const std::string& skills_path) {
  brain::SkillRegistry registry = brain::SkillRegistry::defaults();
  if (!skills_path.empty()) registry.load_overrides(skills_path);

  brain::BrainService service(registry);
  service.set_bundle(
      std::make_shared<const intent::ModelBundle>(intent::load_checkpoint(ckpt_path)));

  std::string host = brain::kDefaultBindHost;
  int port = brain::kDefaultBindPort;
  if (!bind.empty()) {
    auto colon = bind.find_last_of(':');
    if (colon == std::string::npos) {
      std::cerr << "serve: --bind must be host:port\n";
      return 1;
    }
    host = bind.substr(0, colon);
    port = std::stoi(bind.substr(colon + 1));
  }
  std::cout << "kasper brain listening on http://" << host << ":" << port << "\n";
  service.run_blocking(host, port);
  return 0;
}

int run_simulate(const std::string& scenario_path, const std::string& ckpt_path,
                 const std::string& brain_url, const std::string& out_path) {
  const sim::Scenario scenario = sim::parse_scenario(scenario_path);
  assistant::AssistantContext ctx;
  sim::SimOptions opts;
  std::string fixture_dir = scenario_path;
  auto slash = fixture_dir.find_last_of('/');
  opts.fixture_dir = slash == std::string::npos ? "." : fixture_dir.substr(0, slash);
  auto client = make_brain(ckpt_path, brain_url, /*default_fuzzy=*/false);
  opts.brain = client.get();

  const sim::SimReport report = sim::run_scenario(scenario, ctx, opts);
  const std::string text = report.to_text();
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    out << text;
  }
  return report.violations.empty() ? 0 : 2;
}

int run_repl(const std::string& ckpt_path, const std::string& brain_url) {
  auto client = make_brain(ckpt_path, brain_url, /*default_fuzzy=*/true);
  sim::ReplSession session(client);
  std::cout << "kasper repl — !wake to wake, !play <id> / !pause / !stop for media,\n"
            << "!fail <msg> to simulate a recognition failure, plain text is a transcript,\n"
            << "!quit to exit.\n";
  std::string line;
  std::cout << "> " << std::flush;
  while (std::getline(std::cin, line)) {
    if (line == "!quit" || line == "!exit") break;
    for (const auto& out : session.turn(line)) std::cout << out << "\n";
    std::cout << "> " << std::flush;
  }
  return 0;
}

int run_gen_corpus(std::uint64_t seed, int per_class, const std::string& out_path) {
  corpus::CorpusSpec spec = corpus::default_spec();
  spec.seed = seed;
  spec.per_class = per_class;
  const intent::Dataset data = corpus::generate_corpus(spec);
  intent::save_dataset(data, out_path);
  std::cout << "wrote " << data.examples.size() << " examples to " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kasper — local voice-assistant runtime"};
  app.require_subcommand(1);

  CommonModelFlags flags;

  // train
  auto* train = app.add_subcommand("train", "train a classifier and write a checkpoint");
  std::string train_data, train_algo = "cnn", train_out = "kasper.ckpt";
  train->add_option("--data", train_data, "dataset file")->required();
  train->add_option("--algo", train_algo, "cnn|rnn");
  train->add_option("--out", train_out, "checkpoint output path");
  add_model_flags(train, flags);

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate classifiers on a dataset");
  std::string eval_data, eval_ckpt;
  bool all_algos = false;
  eval->add_option("--data", eval_data, "dataset file")->required();
  eval->add_option("--ckpt", eval_ckpt, "checkpoint file");
  eval->add_flag("--all-algos", all_algos, "train cnn+rnn and print the four-algorithm table");
  add_model_flags(eval, flags);

  // classify
  auto* classify = app.add_subcommand("classify", "classify one utterance");
  std::string cls_ckpt, cls_text, cls_algo;
  classify->add_option("--ckpt", cls_ckpt, "checkpoint file")->required();
  classify->add_option("--text", cls_text, "utterance")->required();
  classify->add_option("--algo", cls_algo, "cnn|rnn|knn|fuzzy (default: checkpoint's)");

  // serve
  auto* serve = app.add_subcommand("serve", "run the brain HTTP service");
  std::string serve_ckpt, serve_bind, serve_skills;
  serve->add_option("--ckpt", serve_ckpt, "checkpoint file")->required();
  serve->add_option("--bind", serve_bind, "host:port (default 127.0.0.1:7431)");
  serve->add_option("--skills", serve_skills, "skill template override file");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "run a scenario file");
  std::string sim_scenario, sim_ckpt, sim_brain, sim_out;
  simulate->add_option("--scenario", sim_scenario, "scenario file")->required();
  simulate->add_option("--ckpt", sim_ckpt, "checkpoint for an in-process brain");
  simulate->add_option("--brain", sim_brain, "brain service url (http mode)");
  simulate->add_option("--out", sim_out, "write the report here instead of stdout");

  // repl
  auto* repl = app.add_subcommand("repl", "interactive turn-based session");
  std::string repl_ckpt, repl_brain;
  repl->add_option("--ckpt", repl_ckpt, "checkpoint for an in-process brain");
  repl->add_option("--brain", repl_brain, "brain service url (http mode)");

  // gen-corpus
  auto* gen = app.add_subcommand("gen-corpus", "generate the bundled synthetic dataset");
  std::uint64_t gen_seed = 42;
  int gen_per_class = 50;
  std::string gen_out = "corpus.tsv";
  gen->add_option("--seed", gen_seed, "generation seed");
  gen->add_option("--per-class", gen_per_class, "examples per class");
  gen->add_option("--out", gen_out, "output dataset file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return run_train(train_data, train_algo, train_out, flags);
    if (eval->parsed()) return run_eval(eval_data, eval_ckpt, all_algos, flags);
    if (classify->parsed()) return run_classify(cls_ckpt, cls_text, cls_algo);
    if (serve->parsed()) return run_serve(serve_ckpt, serve_bind, serve_skills);
    if (simulate->parsed()) return run_simulate(sim_scenario, sim_ckpt, sim_brain, sim_out);
    if (repl->parsed()) return run_repl(repl_ckpt, repl_brain);
    if (gen->parsed()) return run_gen_corpus(gen_seed, gen_per_class, gen_out);
  } catch (const fsm::InvalidTransition& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
