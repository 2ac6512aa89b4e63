// og: build corpora, train, generate outlines, evaluate, ablate, run the
// step-wise baselines and check gradients.
//
// Exit codes: 0 success, 2 usage or validation error, 3 runtime failure.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "og/experiment.hpp"
#include "og/gradcheck.hpp"
#include "og/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Input problems the user can fix; mapped to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string preset = "desk";
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::size_t> epochs;
  std::optional<double> learning_rate;
  std::optional<std::size_t> batch_size;
  std::string variant;
  std::string ablate;
  std::string heading_dependency;

  void attach(CLI::App* cmd, bool training = true) {
    cmd->add_option("--preset", preset, "Configuration preset")->check(CLI::IsMember({"desk", "paper"}));
    cmd->add_option("--config", config_path, "JSON configuration file (overrides the preset)");
    cmd->add_option("--seed", seed, "Seed (overrides the config and OG_SEED)");
    cmd->add_option("--variant", variant, "Boundary variant")
        ->check(CLI::IsMember({"mpd", "mpd_minus_p", "gpd", "crf"}));
    cmd->add_option("--ablate", ablate, "Ablations, a subset of PSHR, e.g. PS");
    cmd->add_option("--heading-dependency", heading_dependency, "Heading dependency")
        ->check(CLI::IsMember({"markov", "global", "none"}));
    if (!training) return;
    cmd->add_option("--workers", workers, "Worker threads for gradient computation")->check(CLI::PositiveNumber);
    cmd->add_option("--epochs", epochs, "Training epochs")->check(CLI::PositiveNumber);
    cmd->add_option("--lr", learning_rate, "Adam learning rate")->check(CLI::NonNegativeNumber);
    cmd->add_option("--batch-size", batch_size, "Documents per update")->check(CLI::PositiveNumber);
  }

  og::ExperimentConfig resolve() const {
    og::ExperimentConfig c = og::preset(preset);
    if (!config_path.empty()) c = og::load_config(config_path, c);
    if (const char* env = std::getenv("OG_SEED")) {
      try {
        c.seed = std::stoull(env);
      } catch (const std::exception&) {
        throw og::ConfigError(std::string("OG_SEED is not an unsigned integer: ") + env);
      }
    }
    if (seed) c.seed = *seed;
    c.train.seed = c.seed;
    if (workers) c.train.workers = *workers;
    if (epochs) c.train.epochs = *epochs;
    if (learning_rate) c.train.learning_rate = static_cast<og::Real>(*learning_rate);
    if (batch_size) c.train.batch_size = *batch_size;
    if (!variant.empty()) c.model.boundary = og::parse_boundary_variant(variant);
    if (!heading_dependency.empty()) c.model.heading_dependency = og::parse_heading_dependency(heading_dependency);
    for (char f : ablate) {
      switch (f) {
        case 'P': c.model.boundary = og::BoundaryVariant::kMpdMinusP; break;
        case 'S': c.model.ablate_section_attention = true; break;
        case 'H': c.model.ablate_heading_dependency = true; break;
        case 'R': c.model.ablate_review = true; break;
        default: throw og::ConfigError(std::string("--ablate: unknown flag '") + f + "' (expected P, S, H, R)");
      }
    }
    // Re-validate the merged result.
    return og::config_from_json(json::object(), c);
  }
};

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_records(const fs::path& path, const json& prov, const std::vector<og::OutlineRecord>& records) {
  auto out = open_output(path);
  out << json{{"provenance", prov}}.dump() << '\n';
  for (const auto& r : records) out << og::record_to_json(r).dump() << '\n';
}

std::uint64_t hash_input_dir(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::uint64_t h = og::fnv1a("");
  for (const auto& f : files) {
    h = og::fnv1a(f.filename().string(), h);
    std::ifstream in(f, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    h = og::fnv1a(bytes, h);
  }
  return h;
}

// Test split when present, else dev, else the training data.
std::pair<std::string, const std::vector<og::OutlineExample>*> evaluation_split(const og::CorpusDir& c) {
  if (!c.test.empty()) return {"test", &c.test};
  if (!c.dev.empty()) return {"dev", &c.dev};
  return {"train", &c.train};
}

// ---------------------------------------------------------------------------

struct BuildCorpusArgs {
  std::string input, output, category = "mixture", style = "wikitext";
  std::size_t doc_vocab = og::kPaperDocVocab, head_vocab = og::kPaperHeadVocab;
  std::optional<std::uint64_t> seed;
};

int cmd_build_corpus(const BuildCorpusArgs& a) {
  if (!fs::is_directory(a.input)) throw UsageError("input directory not found: " + a.input);
  std::uint64_t seed = 1;
  if (const char* env = std::getenv("OG_SEED")) seed = std::stoull(env);
  if (a.seed) seed = *a.seed;
  const auto style = a.style == "markdown" ? og::HeadingStyle::kMarkdown : og::HeadingStyle::kWikitext;

  auto raw = og::read_article_dir(a.input, a.category, style);
  std::vector<og::OutlineExample> kept;
  std::map<std::string, std::size_t> rejected;
  for (const auto& art : raw) {
    auto parsed = og::parse_article(art);
    if (auto* ex = std::get_if<og::OutlineExample>(&parsed)) kept.push_back(std::move(*ex));
    else ++rejected[std::string(og::rejection_name(std::get<og::Rejection>(parsed)))];
  }

  fs::create_directories(a.output);
  const fs::path out(a.output);
  json splits = json::object();
  std::vector<og::OutlineExample> vocab_source;
  if (kept.size() >= og::kMinSplitExamples) {
    auto split = og::split_corpus(kept, seed);
    og::write_jsonl(out / "train.jsonl", split.train);
    og::write_jsonl(out / "dev.jsonl", split.dev);
    og::write_jsonl(out / "test.jsonl", split.test);
    splits = {{"train", split.train.size()}, {"dev", split.dev.size()}, {"test", split.test.size()}};
    vocab_source = std::move(split.train);
  } else {
    std::cerr << "warning: " << kept.size() << " examples is fewer than " << og::kMinSplitExamples
              << "; writing corpus.jsonl without a train/dev/test split\n";
    og::write_jsonl(out / "corpus.jsonl", kept);
    splits = {{"corpus", kept.size()}};
    vocab_source = kept;
  }
  {
    auto dv = open_output(out / "doc_vocab.txt");
    og::build_vocab(vocab_source, og::VocabSide::kDocument, a.doc_vocab).save(dv);
    auto hv = open_output(out / "head_vocab.txt");
    og::build_vocab(vocab_source, og::VocabSide::kHeading, a.head_vocab).save(hv);
  }

  const json settings = {{"doc_vocab", a.doc_vocab}, {"head_vocab", a.head_vocab}, {"category", a.category},
                         {"style", a.style}};
  const json prov = {{"config_hash", og::hex64(og::fnv1a(settings.dump()))},
                     {"seed", seed},
                     {"corpus_hash", og::hex64(hash_input_dir(a.input))}};
  json manifest = {{"provenance", prov},
                   {"settings", settings},
                   {"articles_read", raw.size()},
                   {"rejected", rejected},
                   {"splits", splits},
                   {"stats", kept.empty() ? json(nullptr) : og::stats_to_json(og::compute_stats(kept))}};
  open_output(out / "manifest.json") << manifest.dump() << '\n';

  std::cout << "read " << raw.size() << " articles, kept " << kept.size() << ", rejected "
            << raw.size() - kept.size() << "\n";
  if (!kept.empty()) {
    auto s = og::compute_stats(kept);
    std::cout << "avg sections " << s.article_avg_sections << ", avg paragraphs " << s.article_avg_paragraphs
              << ", heading avg words " << s.heading_avg_words << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string corpus, output;
  bool wallclock = false;
};

int cmd_train(const TrainArgs& a, const CommonOptions& common) {
  auto config = common.resolve();
  config.train.log_wallclock = a.wallclock;
  auto corpus = og::load_corpus_dir(a.corpus);
  const json prov = og::provenance(config, corpus.hash);

  fs::create_directories(a.output);
  auto log = open_output(fs::path(a.output) / "train_log.jsonl");
  log << json{{"provenance", prov}}.dump() << '\n';
  auto sys = og::train_system(config, corpus.train, corpus.dev, &log);
  og::save_checkpoint(a.output, sys.checkpoint(prov));
  std::cout << "best epoch " << sys.result.best_epoch << ", dev perplexity " << sys.result.best_dev_ppl
            << "\ncheckpoint written to " << a.output << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct Document {
  std::string id;
  std::vector<og::Tokens> paragraphs;
};

std::vector<Document> read_generate_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("input file not found: " + path.string());
  std::vector<Document> docs;
  if (path.extension() == ".jsonl") {
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw UsageError(path.string() + ":" + std::to_string(n) + ": " + e.what());
      }
      if (j.contains("provenance")) continue;
      if (!j.contains("paragraphs") || !j["paragraphs"].is_array())
        throw UsageError(path.string() + ":" + std::to_string(n) + ": missing paragraphs array");
      Document d;
      d.id = j.value("id", "doc-" + std::to_string(docs.size()));
      for (const auto& p : j["paragraphs"]) {
        if (p.is_string()) d.paragraphs.push_back(og::preprocess_tokens(p.get<std::string>()));
        else d.paragraphs.push_back(p.get<og::Tokens>());
      }
      docs.push_back(std::move(d));
    }
  } else {
    for (const auto& art : og::read_articles(in, path.stem().string(), "mixture")) {
      Document d;
      d.id = art.id;
      for (const auto& b : art.blocks) {
        if (b.kind != og::Block::Kind::kParagraph) continue;
        auto tokens = og::preprocess_tokens(b.text);
        if (!tokens.empty()) d.paragraphs.push_back(std::move(tokens));
      }
      docs.push_back(std::move(d));
    }
  }
  for (const auto& d : docs)
    if (d.paragraphs.empty()) throw UsageError("document " + d.id + " has no paragraphs");
  if (docs.empty()) throw UsageError("no documents in " + path.string());
  return docs;
}

struct GenerateArgs {
  std::string checkpoint, input, output;
  bool trace = false;
};

int cmd_generate(const GenerateArgs& a) {
  if (!fs::is_directory(a.checkpoint)) throw UsageError("checkpoint directory not found: " + a.checkpoint);
  auto docs = read_generate_input(a.input);
  auto ckpt = og::load_checkpoint(a.checkpoint);
  auto model = og::model_from_checkpoint(ckpt);

  auto out = open_output(a.output);
  out << json{{"provenance", ckpt.provenance}}.dump() << '\n';
  for (const auto& d : docs) {
    og::DecodeTrace trace;
    auto g = og::generate_outline(d.paragraphs, model, ckpt.doc_vocab, ckpt.head_vocab, &trace);
    json line = {{"id", d.id}, {"labels", g.labels}, {"headings", g.headings}, {"probabilities", g.probabilities}};
    if (a.trace) {
      line["trace"] = {{"review_set_sizes", trace.review_set_sizes},
                       {"degenerate", trace.degenerate},
                       {"section_attention", trace.section_attention},
                       {"review_attention", trace.review_attention}};
    }
    out << line.dump() << '\n';
  }
  std::cout << "wrote " << docs.size() << " outlines to " << a.output << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
  std::string gold, output, table;
  std::vector<std::string> predictions, names;
};

int cmd_evaluate(const EvaluateArgs& a) {
  if (!a.names.empty() && a.names.size() != a.predictions.size())
    throw UsageError("--name must be given once per --pred");
  auto gold = og::read_records(a.gold);
  if (gold.empty()) throw UsageError("gold file is empty: " + a.gold);

  std::vector<std::pair<std::string, og::EvalReport>> rows;
  json systems = json::array();
  for (std::size_t i = 0; i < a.predictions.size(); ++i) {
    auto pred = og::read_records(a.predictions[i]);
    if (pred.empty()) throw UsageError("prediction file is empty: " + a.predictions[i]);
    std::map<std::string, og::OutlineRecord> by_id;
    for (auto& r : pred) by_id[r.id] = std::move(r);
    std::vector<og::OutlineRecord> aligned;
    for (const auto& g : gold) {
      auto it = by_id.find(g.id);
      if (it == by_id.end()) throw UsageError("no prediction for document " + g.id + " in " + a.predictions[i]);
      if (it->second.labels.size() != g.labels.size())
        throw UsageError("document " + g.id + ": predicted " + std::to_string(it->second.labels.size()) +
                         " labels for " + std::to_string(g.labels.size()) + " paragraphs");
      aligned.push_back(it->second);
    }
    std::string name = a.names.empty() ? fs::path(a.predictions[i]).stem().string() : a.names[i];
    auto report = og::evaluate(aligned, gold);
    systems.push_back({{"name", name},
                       {"predictions", a.predictions[i]},
                       {"predictions_hash", og::hex64(og::file_hash(a.predictions[i]))},
                       {"report", og::report_to_json(report)}});
    rows.emplace_back(std::move(name), std::move(report));
  }

  json doc = {{"provenance",
               {{"config_hash", og::hex64(og::fnv1a(json(a.names).dump()))},
                {"seed", nullptr},
                {"corpus_hash", og::hex64(og::file_hash(a.gold))}}},
              {"gold", a.gold},
              {"systems", systems}};
  if (rows.size() >= 2) {
    json tests = json::array();
    for (std::size_t i = 1; i < rows.size(); ++i) {
      json per_metric = json::object();
      for (const char* metric : {"em_outline", "em_sec", "rouge_head"}) {
        auto pairs = og::paired_scores(rows[0].second, rows[i].second, metric);
        if (pairs.a.size() < 2) per_metric[metric] = {{"pairs", pairs.a.size()}, {"note", "too few pairs"}};
        else per_metric[metric] = og::ttest_to_json(og::paired_significance(pairs.a, pairs.b));
      }
      tests.push_back({{"a", rows[0].first}, {"b", rows[i].first}, {"tests", per_metric}});
    }
    doc["paired_t_tests"] = tests;
  }

  const std::string table = og::metrics_table(rows);
  std::cout << table;
  if (!a.output.empty()) open_output(a.output) << doc.dump() << '\n';
  if (!a.table.empty()) open_output(a.table) << table;
  return 0;
}

// ---------------------------------------------------------------------------

struct AblateArgs {
  std::string corpus, output;
};

int cmd_ablate(const AblateArgs& a, const CommonOptions& common) {
  auto config = common.resolve();
  auto corpus = og::load_corpus_dir(a.corpus);
  auto [split_name, eval_docs] = evaluation_split(corpus);
  const json prov = og::provenance(config, corpus.hash);

  fs::create_directories(a.output);
  std::vector<std::pair<std::string, og::EvalReport>> rows;
  auto lines = open_output(fs::path(a.output) / "ablation.jsonl");
  lines << json{{"provenance", prov}}.dump() << '\n';
  std::vector<og::OutlineRecord> gold;
  for (const auto& e : *eval_docs) gold.push_back(og::gold_record(e));

  for (const auto& row : og::ablation_rows()) {
    og::ExperimentConfig c = config;
    c.model = row.apply(config.model);
    auto sys = og::train_system(c, corpus.train, corpus.dev);
    og::attention_counters().reset();
    auto pred = og::predict(sys.model, sys.doc_vocab, sys.head_vocab, *eval_docs);
    const std::uint64_t section_calls = og::attention_counters().section;
    const std::uint64_t review_calls = og::attention_counters().review;
    auto report = og::evaluate(pred, gold);
    lines << json{{"model", row.name},
                  {"split", split_name},
                  {"split_hash", og::hex64(corpus.test_hash)},
                  {"config_hash", og::hex64(og::config_hash(c))},
                  {"best_dev_ppl", sys.result.best_dev_ppl},
                  {"attention_calls", {{"section", section_calls}, {"review", review_calls}}},
                  {"report", og::report_to_json(report, false)}}
                 .dump()
          << '\n';
    std::cerr << row.name << " done\n";
    rows.emplace_back(row.name, std::move(report));
  }
  const std::string table = og::metrics_table(rows);
  open_output(fs::path(a.output) / "ablation.txt") << table;
  std::cout << table;
  return 0;
}

// ---------------------------------------------------------------------------

struct BaselineArgs {
  std::string system, corpus, output, checkpoint;
};

int cmd_run_baseline(const BaselineArgs& a, const CommonOptions& common) {
  if (!og::is_baseline_system(a.system)) throw UsageError("unknown system " + a.system);
  auto config = common.resolve();
  auto corpus = og::load_corpus_dir(a.corpus);
  auto [split_name, eval_docs] = evaluation_split(corpus);

  std::optional<og::TrainedSystem> trained;
  const auto boundary = og::baseline_boundary(a.system);
  if (boundary || og::baseline_uses_neural_headings(a.system)) {
    if (!a.checkpoint.empty()) {
      auto ckpt = og::load_checkpoint(a.checkpoint);
      trained.emplace();
      trained->config = config;
      trained->doc_vocab = ckpt.doc_vocab;
      trained->head_vocab = ckpt.head_vocab;
      trained->model = og::model_from_checkpoint(ckpt);
    } else {
      if (boundary) config.model.boundary = *boundary;
      trained = og::train_system(config, corpus.train, corpus.dev);
    }
  }
  auto pred = og::run_baseline(a.system, *eval_docs, config.textrank, trained ? &*trained : nullptr);
  write_records(a.output, og::provenance(config, corpus.hash), pred);

  std::vector<og::OutlineRecord> gold;
  for (const auto& e : *eval_docs) gold.push_back(og::gold_record(e));
  std::vector<std::pair<std::string, og::EvalReport>> rows;
  rows.emplace_back(a.system, og::evaluate(pred, gold));
  std::cout << "evaluated on the " << split_name << " split\n" << og::metrics_table(rows);
  return 0;
}

// ---------------------------------------------------------------------------

struct GradCheckArgs {
  double epsilon = 1e-5;
  double tolerance = 1e-4;
};

int cmd_grad_check(const GradCheckArgs& a, const CommonOptions& common) {
  auto config = common.resolve();
  const auto doc = og::gradcheck_document();
  const std::vector<og::OutlineExample> docs{doc};
  auto dv = og::build_vocab(docs, og::VocabSide::kDocument, config.doc_vocab);
  auto hv = og::build_vocab(docs, og::VocabSide::kHeading, config.head_vocab);
  og::ModelConfig mc = config.model;
  mc.doc_vocab = dv.size();
  mc.head_vocab = hv.size();
  og::OutlineModel model(mc, config.seed);
  const auto ex = og::encode_example(doc, dv, hv);

  og::GradCheckOptions opt;
  opt.epsilon = static_cast<og::Real>(a.epsilon);
  opt.tolerance = static_cast<og::Real>(a.tolerance);
  const auto start = std::chrono::steady_clock::now();
  auto report = og::grad_check([&](og::Tape& t) { return model.loss(t, ex, config.train.boundary_weight); },
                               model.params, opt);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::cout << "document: " << doc.paragraphs.size() << " paragraphs, " << doc.headings.size() << " sections\n"
            << "entries checked: " << report.entries_checked << "\n"
            << "max relative error: " << report.max_rel_error << " (tolerance " << a.tolerance << ")\n"
            << "worst entry: " << report.worst_param << "[" << report.worst_index << "] analytic "
            << report.worst_analytic << " numeric " << report.worst_numeric << "\n"
            << "seconds: " << seconds << "\n"
            << (report.passed ? "PASS" : "FAIL") << "\n";
  return report.passed ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Outline generation: segment documents into sections and generate section headings"};
  app.require_subcommand(1);

  BuildCorpusArgs build;
  auto* c_build = app.add_subcommand("build-corpus", "Build train/dev/test records from heading-annotated articles");
  c_build->add_option("--input", build.input, "Directory of article files")->required();
  c_build->add_option("--output", build.output, "Output directory")->required();
  c_build->add_option("--doc-vocab", build.doc_vocab, "Document vocabulary size")->check(CLI::PositiveNumber);
  c_build->add_option("--head-vocab", build.head_vocab, "Heading vocabulary size")->check(CLI::PositiveNumber);
  c_build->add_option("--seed", build.seed, "Split seed");
  c_build->add_option("--category", build.category, "Category recorded on every example");
  c_build->add_option("--style", build.style, "Heading markup")->check(CLI::IsMember({"wikitext", "markdown"}));

  TrainArgs train;
  CommonOptions train_common;
  auto* c_train = app.add_subcommand("train", "Train a model and write the best checkpoint");
  c_train->add_option("--corpus", train.corpus, "build-corpus output directory")->required();
  c_train->add_option("--output", train.output, "Checkpoint directory")->required();
  c_train->add_flag("--log-wallclock", train.wallclock, "Record elapsed seconds in the training log");
  train_common.attach(c_train);

  GenerateArgs gen;
  auto* c_gen = app.add_subcommand("generate", "Generate outlines for documents");
  c_gen->add_option("--checkpoint", gen.checkpoint, "Checkpoint directory")->required();
  c_gen->add_option("--input", gen.input, "Text file (blank-line paragraphs) or .jsonl records")->required();
  c_gen->add_option("--output", gen.output, "Output .jsonl")->required();
  c_gen->add_flag("--trace", gen.trace, "Include attention weights and review-set sizes");

  EvaluateArgs eval;
  auto* c_eval = app.add_subcommand("evaluate", "Score predicted outlines against gold records");
  c_eval->add_option("--gold", eval.gold, "Gold records (.jsonl)")->required();
  c_eval->add_option("--pred", eval.predictions, "Predicted records (.jsonl); repeat for several systems")
      ->required();
  c_eval->add_option("--name", eval.names, "System name per --pred");
  c_eval->add_option("--output", eval.output, "Report file (JSON)");
  c_eval->add_option("--table", eval.table, "Plain-text table file");

  AblateArgs abl;
  CommonOptions abl_common;
  auto* c_abl = app.add_subcommand("ablate", "Train and evaluate the full model and its five ablations");
  c_abl->add_option("--corpus", abl.corpus, "build-corpus output directory")->required();
  c_abl->add_option("--output", abl.output, "Output directory")->required();
  abl_common.attach(c_abl);

  BaselineArgs base;
  CommonOptions base_common;
  auto* c_base = app.add_subcommand("run-baseline", "Run a step-wise baseline system");
  c_base->add_option("--system", base.system, "System")->required()->check(CLI::IsMember(
      std::vector<std::string>(std::begin(og::kBaselineSystems), std::end(og::kBaselineSystems))));
  c_base->add_option("--corpus", base.corpus, "build-corpus output directory")->required();
  c_base->add_option("--output", base.output, "Predictions (.jsonl)")->required();
  c_base->add_option("--checkpoint", base.checkpoint, "Use this checkpoint instead of training");
  base_common.attach(c_base);

  GradCheckArgs gc;
  CommonOptions gc_common;
  auto* c_gc = app.add_subcommand("grad-check", "Compare analytic gradients of the full loss to central differences");
  c_gc->add_option("--epsilon", gc.epsilon, "Central-difference step")->check(CLI::Range(1e-6, 1e-4));
  c_gc->add_option("--tolerance", gc.tolerance, "Maximum relative error")->check(CLI::PositiveNumber);
  gc_common.attach(c_gc, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*c_build) return cmd_build_corpus(build);
    if (*c_train) return cmd_train(train, train_common);
    if (*c_gen) return cmd_generate(gen);
    if (*c_eval) return cmd_evaluate(eval);
    if (*c_abl) return cmd_ablate(abl, abl_common);
    if (*c_base) return cmd_run_baseline(base, base_common);
    if (*c_gc) return cmd_grad_check(gc, gc_common);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const og::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const og::CorpusError& e) {
    std::cerr << "corpus error: " << e.what() << "\n";
    return 2;
  } catch (const og::TrainingDiverged& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
