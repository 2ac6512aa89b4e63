// Maximum-likelihood training: Adam, global-norm clipping, mini-batches,
// dev-perplexity model selection and checkpoints.

#ifndef OG_TRAINER_HPP
#define OG_TRAINER_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "og/autodiff.hpp"
#include "og/corpus.hpp"
#include "og/model.hpp"

namespace og {

struct TrainConfig {
  Real learning_rate = Real(0.0005);
  std::size_t batch_size = 64;
  Real clip_norm = Real(5);
  std::size_t epochs = 12;
  std::uint64_t seed = 1;
  Real boundary_weight = Real(1);
  std::size_t workers = 1;
  bool log_wallclock = false;

  void validate() const;
};

struct AdamState {
  static constexpr Real kBeta1 = Real(0.9);
  static constexpr Real kBeta2 = Real(0.999);
  static constexpr Real kEpsilon = Real(1e-8);

  AdamState() = default;
  explicit AdamState(const ParamSet& params);

  std::vector<Tensor> first;
  std::vector<Tensor> second;
  std::uint64_t step = 0;
};

// Bias-corrected Adam update in place.
void adam_step(ParamSet& params, const GradSet& grads, AdamState& state, Real learning_rate);

// Rescales every gradient by max_norm / norm when the global L2 norm exceeds
// max_norm. Returns the norm before clipping.
Real clip_gradients(GradSet& grads, Real max_norm);

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(std::size_t epoch, std::size_t batch, const std::string& what)
      : std::runtime_error(what), epoch_(epoch), batch_(batch) {}
  std::size_t epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }

 private:
  std::size_t epoch_;
  std::size_t batch_;
};

// -log-likelihood and token count of the headings under teacher forcing and
// gold boundaries.
struct HeadingLikelihood {
  Real nll = 0;
  std::size_t tokens = 0;
  Real perplexity() const;
};
HeadingLikelihood heading_likelihood(const OutlineModel& model, std::span<const EncodedExample> examples);

// Loss and summed gradient of a batch, documents reduced in index order so
// the result does not depend on `workers`.
Real batch_gradient(const OutlineModel& model, std::span<const EncodedExample> batch,
                    Real boundary_weight, std::size_t workers, GradSet& out);

struct EpochRecord {
  std::size_t epoch = 0;
  Real train_loss = 0;
  Real dev_ppl = 0;
  double wallclock = 0;
};

nlohmann::json epoch_record_to_json(const EpochRecord& r);

struct TrainResult {
  ParamSet best_params;
  Real best_dev_ppl = 0;
  std::size_t best_epoch = 0;
  std::vector<EpochRecord> history;
};

using EpochCallback = std::function<void(const EpochRecord&, const OutlineModel&)>;

// Trains `model` in place and returns the lowest-dev-perplexity parameters.
// One line per epoch is written to `log` when given.
TrainResult train(OutlineModel& model, std::span<const EncodedExample> train_set,
                  std::span<const EncodedExample> dev_set, const TrainConfig& config,
                  std::ostream* log = nullptr, const EpochCallback& on_epoch = {});

// ---------------------------------------------------------------------------
// Checkpoints: manifest.txt (versioned names and shapes), params.bin (tensor
// payload in manifest order), config.json, doc_vocab.txt, head_vocab.txt.

inline constexpr const char* kCheckpointVersion = "og-checkpoint v1";

struct Checkpoint {
  ModelConfig model;
  TrainConfig train;
  ParamSet params;
  Vocabulary doc_vocab;
  Vocabulary head_vocab;
  Real best_dev_ppl = 0;
  nlohmann::json provenance = nlohmann::json::object();
};

void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& dir);
// Rebuilds the model and copies the stored parameters into it.
OutlineModel model_from_checkpoint(const Checkpoint& checkpoint);

// Outline of a tokenized document in vocabulary space.
struct GeneratedOutline {
  std::vector<int> labels;
  std::vector<Real> probabilities;
  std::vector<Tokens> headings;
};
GeneratedOutline generate_outline(const std::vector<Tokens>& paragraphs, const OutlineModel& model,
                                  const Vocabulary& doc_vocab, const Vocabulary& head_vocab,
                                  DecodeTrace* trace = nullptr);

}  // namespace og

#endif  // OG_TRAINER_HPP
