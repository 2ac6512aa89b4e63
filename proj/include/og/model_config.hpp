#ifndef OG_MODEL_CONFIG_HPP
#define OG_MODEL_CONFIG_HPP

#include <cstddef>
#include <string>
#include <string_view>

#include "og/tensor.hpp"

namespace og {

enum class BoundaryVariant { kMpd, kMpdMinusP, kGpd, kCrf };
enum class HeadingDependency { kMarkov, kGlobal, kNone };

std::string_view to_string(BoundaryVariant v);
std::string_view to_string(HeadingDependency d);
BoundaryVariant parse_boundary_variant(std::string_view s);
HeadingDependency parse_heading_dependency(std::string_view s);

struct ModelConfig {
  // Vocabulary sizes including the four special tokens.
  std::size_t doc_vocab = 0;
  std::size_t head_vocab = 0;

  std::size_t word_emb = 32;
  std::size_t head_emb = 32;
  std::size_t hidden = 32;      // encoder GRU size H; paragraph states are 2H
  std::size_t dec_hidden = 64;  // decoder GRU size
  std::size_t attn = 64;        // review-attention size
  Real init_range = Real(0.08);

  BoundaryVariant boundary = BoundaryVariant::kMpd;
  Real threshold = Real(0.5);

  bool ablate_section_attention = false;  // -S
  bool ablate_heading_dependency = false;  // -H
  bool ablate_review = false;              // -R
  HeadingDependency heading_dependency = HeadingDependency::kMarkov;
  std::size_t max_heading_len = 8;

  std::size_t state_dim() const { return 2 * hidden; }
  HeadingDependency effective_dependency() const {
    return ablate_heading_dependency ? HeadingDependency::kNone : heading_dependency;
  }
  // Throws std::invalid_argument on non-positive sizes.
  void validate() const;
};

}  // namespace og

#endif  // OG_MODEL_CONFIG_HPP
