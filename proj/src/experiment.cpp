#include "og/experiment.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace og {

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw CorpusError("cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

CorpusDir load_corpus_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw CorpusError("corpus directory not found: " + dir.string());
  CorpusDir c;
  std::uint64_t h = fnv1a("");
  auto load = [&](const char* name, std::vector<OutlineExample>& into) {
    const auto path = dir / name;
    const std::string bytes = read_file(path);
    h = fnv1a(bytes, h);
    std::istringstream in(bytes);
    into = read_jsonl(in);
    return fnv1a(bytes);
  };
  if (std::filesystem::exists(dir / "train.jsonl")) {
    c.split = true;
    load("train.jsonl", c.train);
    load("dev.jsonl", c.dev);
    c.test_hash = load("test.jsonl", c.test);
  } else if (std::filesystem::exists(dir / "corpus.jsonl")) {
    c.test_hash = load("corpus.jsonl", c.train);
  } else {
    throw CorpusError("no train.jsonl or corpus.jsonl in " + dir.string());
  }
  if (c.train.empty()) throw CorpusError("empty training data in " + dir.string());
  c.hash = h;
  return c;
}

nlohmann::json provenance(const ExperimentConfig& config, std::uint64_t corpus_hash) {
  return {{"config_hash", hex64(config_hash(config))}, {"seed", config.seed}, {"corpus_hash", hex64(corpus_hash)}};
}

Checkpoint TrainedSystem::checkpoint(const nlohmann::json& prov) const {
  Checkpoint c;
  c.model = model.config();
  c.train = config.train;
  c.params = model.params;
  c.doc_vocab = doc_vocab;
  c.head_vocab = head_vocab;
  c.best_dev_ppl = result.best_dev_ppl;
  c.provenance = prov;
  return c;
}

TrainedSystem train_system(const ExperimentConfig& config, std::span<const OutlineExample> train,
                           std::span<const OutlineExample> dev, std::ostream* log, const EpochCallback& on_epoch) {
  TrainedSystem s;
  s.config = config;
  s.config.train.seed = config.seed;
  s.doc_vocab = build_vocab(train, VocabSide::kDocument, config.doc_vocab);
  s.head_vocab = build_vocab(train, VocabSide::kHeading, config.head_vocab);
  ModelConfig mc = config.model;
  mc.doc_vocab = s.doc_vocab.size();
  mc.head_vocab = s.head_vocab.size();
  s.model = OutlineModel(mc, config.seed);

  std::vector<EncodedExample> tr, dv;
  for (const auto& e : train) tr.push_back(encode_example(e, s.doc_vocab, s.head_vocab));
  for (const auto& e : dev) dv.push_back(encode_example(e, s.doc_vocab, s.head_vocab));
  s.result = og::train(s.model, tr, dv, s.config.train, log, on_epoch);
  s.model.params = s.result.best_params;
  return s;
}

std::vector<OutlineRecord> predict(const OutlineModel& model, const Vocabulary& doc_vocab,
                                   const Vocabulary& head_vocab, std::span<const OutlineExample> docs) {
  std::vector<OutlineRecord> out;
  out.reserve(docs.size());
  for (const auto& d : docs) {
    auto g = generate_outline(d.paragraphs, model, doc_vocab, head_vocab);
    out.push_back({d.id, std::move(g.labels), std::move(g.headings)});
  }
  return out;
}

nlohmann::json record_to_json(const OutlineRecord& r) {
  return {{"id", r.id}, {"labels", r.labels}, {"headings", r.headings}};
}

OutlineRecord record_from_json(const nlohmann::json& j) {
  OutlineRecord r;
  try {
    r.id = j.at("id").get<std::string>();
    r.labels = j.at("labels").get<std::vector<int>>();
    r.headings = j.at("headings").get<std::vector<Tokens>>();
  } catch (const nlohmann::json::exception& e) {
    throw CorpusError(std::string("malformed outline record: ") + e.what());
  }
  std::size_t ones = 0;
  for (int l : r.labels) {
    if (l != 0 && l != 1) throw CorpusError("labels must be 0 or 1 in record " + r.id);
    ones += static_cast<std::size_t>(l);
  }
  if (r.labels.empty() || r.labels.back() != 1)
    throw CorpusError("record " + r.id + " must end with a boundary label 1");
  if (ones != r.headings.size())
    throw CorpusError("record " + r.id + " has " + std::to_string(r.headings.size()) + " headings for " +
                      std::to_string(ones) + " sections");
  return r;
}

std::vector<OutlineRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot read " + path.string());
  std::vector<OutlineRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw CorpusError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
    if (j.contains("provenance")) continue;
    out.push_back(record_from_json(j));
  }
  return out;
}

ModelConfig AblationRow::apply(ModelConfig m) const {
  if (no_p) m.boundary = BoundaryVariant::kMpdMinusP;
  if (no_s) m.ablate_section_attention = true;
  if (no_h) m.ablate_heading_dependency = true;
  if (no_r) m.ablate_review = true;
  return m;
}

const std::vector<AblationRow>& ablation_rows() {
  static const std::vector<AblationRow> rows = {
      {"HiStGen", false, false, false, false},   {"HiStGen-P", true, false, false, false},
      {"HiStGen-S", false, true, false, false},  {"HiStGen-H", false, false, true, false},
      {"HiStGen-R", false, false, false, true},  {"HiStGen-PSHR", true, true, true, true},
  };
  return rows;
}

bool is_baseline_system(const std::string& name) {
  for (const char* s : kBaselineSystems)
    if (name == s) return true;
  return false;
}

std::optional<BoundaryVariant> baseline_boundary(const std::string& system) {
  if (system.starts_with("ig_crf")) return BoundaryVariant::kCrf;
  if (system.starts_with("ig_gpd")) return BoundaryVariant::kGpd;
  return std::nullopt;
}

bool baseline_uses_neural_headings(const std::string& system) { return system.ends_with("_neural"); }

std::vector<OutlineRecord> run_baseline(const std::string& system, std::span<const OutlineExample> docs,
                                        const TextRankConfig& textrank, const TrainedSystem* trained) {
  if (!is_baseline_system(system)) throw std::invalid_argument("unknown baseline system " + system);
  const auto boundary = baseline_boundary(system);
  const bool neural = baseline_uses_neural_headings(system);
  if ((boundary || neural) && !trained) throw std::invalid_argument(system + " needs a trained model");
  if (boundary && trained->model.config().boundary != *boundary)
    throw std::invalid_argument(system + " needs a model trained with boundary variant " +
                                std::string(to_string(*boundary)));

  SectionHeadingFn heading = neural ? neural_method(trained->model, trained->doc_vocab, trained->head_vocab)
                                    : textrank_method(textrank);
  std::vector<OutlineRecord> out;
  for (const auto& d : docs) {
    StepwiseOutline o;
    if (boundary) {
      std::vector<std::vector<int>> ids;
      for (const auto& p : d.paragraphs) ids.push_back(trained->doc_vocab.encode(p));
      auto labels = trained->model.predict_boundaries(ids).labels;
      o = ig_pipeline(d.paragraphs, labels, heading);
    } else {
      o = ga_pipeline(d.paragraphs, heading);
    }
    out.push_back({d.id, std::move(o.labels), std::move(o.headings)});
  }
  return out;
}

}  // namespace og
