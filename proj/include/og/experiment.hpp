// Glue shared by the command-line tool and the acceptance suite: corpus
// directories, vocabulary + model construction, training, prediction,
// ablation rows and baseline systems.

#ifndef OG_EXPERIMENT_HPP
#define OG_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "og/baselines.hpp"
#include "og/config.hpp"
#include "og/corpus.hpp"
#include "og/metrics.hpp"
#include "og/model.hpp"
#include "og/trainer.hpp"

namespace og {

// A build-corpus output directory: train/dev/test.jsonl, or corpus.jsonl
// when there were too few examples to split.
struct CorpusDir {
  std::vector<OutlineExample> train, dev, test;
  bool split = false;
  std::uint64_t hash = 0;       // over the files read, in fixed order
  std::uint64_t test_hash = 0;  // test.jsonl alone (train data when unsplit)
};
CorpusDir load_corpus_dir(const std::filesystem::path& dir);

nlohmann::json provenance(const ExperimentConfig& config, std::uint64_t corpus_hash);

struct TrainedSystem {
  ExperimentConfig config;
  Vocabulary doc_vocab;
  Vocabulary head_vocab;
  OutlineModel model;
  TrainResult result;

  Checkpoint checkpoint(const nlohmann::json& prov) const;
};

// Vocabularies from `train`, a model seeded with config.seed, training, and
// the lowest-dev-perplexity parameters copied back into the model.
TrainedSystem train_system(const ExperimentConfig& config, std::span<const OutlineExample> train,
                           std::span<const OutlineExample> dev, std::ostream* log = nullptr,
                           const EpochCallback& on_epoch = {});

std::vector<OutlineRecord> predict(const OutlineModel& model, const Vocabulary& doc_vocab,
                                   const Vocabulary& head_vocab, std::span<const OutlineExample> docs);

nlohmann::json record_to_json(const OutlineRecord& r);
// Accepts prediction lines and full example lines alike.
OutlineRecord record_from_json(const nlohmann::json& j);
std::vector<OutlineRecord> read_records(const std::filesystem::path& path);

// Ablation rows in table order: full, -P, -S, -H, -R, -PSHR.
struct AblationRow {
  std::string name;
  ModelConfig apply(ModelConfig base) const;
  bool no_p = false, no_s = false, no_h = false, no_r = false;
};
const std::vector<AblationRow>& ablation_rows();

inline constexpr const char* kBaselineSystems[] = {"ig_crf_textrank", "ig_gpd_textrank", "ig_crf_neural",
                                                   "ig_gpd_neural",   "ga_textrank",     "ga_neural"};
bool is_baseline_system(const std::string& name);
// Boundary variant a system needs trained, if any.
std::optional<BoundaryVariant> baseline_boundary(const std::string& system);
bool baseline_uses_neural_headings(const std::string& system);

// Runs a step-wise system. `trained` must be present whenever the system
// needs a boundary model or neural headings.
std::vector<OutlineRecord> run_baseline(const std::string& system, std::span<const OutlineExample> docs,
                                        const TextRankConfig& textrank, const TrainedSystem* trained);

}  // namespace og

#endif  // OG_EXPERIMENT_HPP
