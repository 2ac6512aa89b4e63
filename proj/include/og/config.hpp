// Experiment configuration: one JSON document, validated strictly, with the
// "paper" and "desk" presets and reproducibility hashing.

#ifndef OG_CONFIG_HPP
#define OG_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"
#include "og/baselines.hpp"
#include "og/model_config.hpp"
#include "og/trainer.hpp"

namespace og {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  // Vocabulary caps (non-special entries).
  std::size_t doc_vocab = 2000;
  std::size_t head_vocab = 500;
  // Sizes and variant flags; vocabulary sizes are filled in from the built
  // vocabularies.
  ModelConfig model;
  TrainConfig train;
  TextRankConfig textrank;
};

ExperimentConfig preset(std::string_view name);

// Overlays `j` on `base`. Unknown keys and out-of-range values throw
// ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = preset("desk"));
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = preset("desk"));

nlohmann::json model_config_to_json(const ModelConfig& m);
ModelConfig model_config_from_json(const nlohmann::json& j);
nlohmann::json train_config_to_json(const TrainConfig& t);
TrainConfig train_config_from_json(const nlohmann::json& j);

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t hash = 0xcbf29ce484222325ULL);
std::uint64_t file_hash(const std::filesystem::path& path);
std::string hex64(std::uint64_t value);
std::uint64_t config_hash(const ExperimentConfig& config);

}  // namespace og

#endif  // OG_CONFIG_HPP
