// The full outline generation model: hierarchical encoder, boundary model
// and heading decoder over one shared parameter set.

#ifndef OG_MODEL_HPP
#define OG_MODEL_HPP

#include <cstdint>
#include <vector>

#include "og/autodiff.hpp"
#include "og/boundary.hpp"
#include "og/corpus.hpp"
#include "og/decoder.hpp"
#include "og/encoder.hpp"
#include "og/model_config.hpp"

namespace og {

// An OutlineExample mapped through the two vocabularies.
struct EncodedExample {
  std::vector<std::vector<int>> paragraphs;
  std::vector<int> labels;
  std::vector<std::vector<int>> headings;
};

EncodedExample encode_example(const OutlineExample& example, const Vocabulary& doc_vocab,
                              const Vocabulary& head_vocab);

struct LossParts {
  Real heading_nll = 0;
  Real boundary_nll = 0;
  std::size_t heading_tokens = 0;
};

class OutlineModel {
 public:
  OutlineModel() = default;
  OutlineModel(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }

  // heading NLL + lambda * boundary NLL under gold boundaries and teacher
  // forcing.
  Var loss(Tape& t, const EncodedExample& example, Real boundary_weight,
           LossParts* parts = nullptr) const;

  struct Outline {
    BoundarySequence boundaries;
    std::vector<std::vector<int>> headings;
  };
  Outline generate(const std::vector<std::vector<int>>& paragraphs, DecodeTrace* trace = nullptr) const;
  // Headings for a fixed segmentation.
  std::vector<std::vector<int>> generate_headings(const std::vector<std::vector<int>>& paragraphs,
                                                  std::span<const int> labels,
                                                  DecodeTrace* trace = nullptr) const;
  BoundarySequence predict_boundaries(const std::vector<std::vector<int>>& paragraphs) const;

  ParamSet params;
  Encoder encoder;
  BoundaryModel boundary;
  Decoder decoder;

 private:
  ModelConfig config_;
};

}  // namespace og

#endif  // OG_MODEL_HPP
