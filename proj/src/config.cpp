#include "og/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace og {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const json& j, const char* key, T& slot, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    slot = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

void read_size(const json& j, const char* key, std::size_t& slot, const std::string& where) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError(where + "." + key + " must be a non-negative integer");
  slot = v.get<std::size_t>();
}

void positive(std::size_t value, const std::string& name) {
  if (value == 0) throw ConfigError(name + " must be positive");
}

}  // namespace

nlohmann::json model_config_to_json(const ModelConfig& m) {
  return {{"doc_vocab", m.doc_vocab},
          {"head_vocab", m.head_vocab},
          {"word_emb", m.word_emb},
          {"head_emb", m.head_emb},
          {"hidden", m.hidden},
          {"dec_hidden", m.dec_hidden},
          {"attn", m.attn},
          {"init_range", m.init_range},
          {"boundary", std::string(to_string(m.boundary))},
          {"threshold", m.threshold},
          {"ablate_section_attention", m.ablate_section_attention},
          {"ablate_heading_dependency", m.ablate_heading_dependency},
          {"ablate_review", m.ablate_review},
          {"heading_dependency", std::string(to_string(m.heading_dependency))},
          {"max_heading_len", m.max_heading_len}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  const std::string where = "model";
  reject_unknown(j,
                 {"doc_vocab", "head_vocab", "word_emb", "head_emb", "hidden", "dec_hidden", "attn", "init_range",
                  "boundary", "threshold", "ablate_section_attention", "ablate_heading_dependency",
                  "ablate_review", "heading_dependency", "max_heading_len"},
                 where);
  ModelConfig m;
  read_size(j, "doc_vocab", m.doc_vocab, where);
  read_size(j, "head_vocab", m.head_vocab, where);
  read_size(j, "word_emb", m.word_emb, where);
  read_size(j, "head_emb", m.head_emb, where);
  read_size(j, "hidden", m.hidden, where);
  read_size(j, "dec_hidden", m.dec_hidden, where);
  read_size(j, "attn", m.attn, where);
  read(j, "init_range", m.init_range, where);
  if (j.contains("boundary")) m.boundary = parse_boundary_variant(j.at("boundary").get<std::string>());
  read(j, "threshold", m.threshold, where);
  read(j, "ablate_section_attention", m.ablate_section_attention, where);
  read(j, "ablate_heading_dependency", m.ablate_heading_dependency, where);
  read(j, "ablate_review", m.ablate_review, where);
  if (j.contains("heading_dependency"))
    m.heading_dependency = parse_heading_dependency(j.at("heading_dependency").get<std::string>());
  read_size(j, "max_heading_len", m.max_heading_len, where);
  return m;
}

nlohmann::json train_config_to_json(const TrainConfig& t) {
  return {{"learning_rate", t.learning_rate}, {"batch_size", t.batch_size},
          {"clip_norm", t.clip_norm},         {"epochs", t.epochs},
          {"seed", t.seed},                   {"boundary_weight", t.boundary_weight},
          {"workers", t.workers},             {"log_wallclock", t.log_wallclock}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig t;
  const std::string where = "train";
  reject_unknown(j,
                 {"learning_rate", "batch_size", "clip_norm", "epochs", "seed", "boundary_weight", "workers",
                  "log_wallclock"},
                 where);
  read(j, "learning_rate", t.learning_rate, where);
  read_size(j, "batch_size", t.batch_size, where);
  read(j, "clip_norm", t.clip_norm, where);
  read_size(j, "epochs", t.epochs, where);
  read(j, "seed", t.seed, where);
  read(j, "boundary_weight", t.boundary_weight, where);
  read_size(j, "workers", t.workers, where);
  read(j, "log_wallclock", t.log_wallclock, where);
  return t;
}

ExperimentConfig preset(std::string_view name) {
  ExperimentConfig c;
  if (name == "desk") {
    c.doc_vocab = 2000;
    c.head_vocab = 500;
    c.model.word_emb = 32;
    c.model.head_emb = 32;
    c.model.hidden = 32;
    c.model.dec_hidden = 32;
    c.model.attn = 32;
    c.train.learning_rate = Real(0.005);
    c.train.batch_size = 5;
    c.train.boundary_weight = Real(0.3);
    c.train.epochs = 60;
  } else if (name == "paper") {
    c.doc_vocab = 130000;
    c.head_vocab = 16000;
    c.model.word_emb = 300;
    c.model.head_emb = 300;
    c.model.hidden = 300;
    c.model.dec_hidden = 300;
    c.model.attn = 300;
    c.train.learning_rate = Real(0.0005);
    c.train.batch_size = 64;
    c.train.epochs = 12;
  } else {
    throw ConfigError("unknown preset '" + std::string(name) + "' (expected desk or paper)");
  }
  c.train.clip_norm = Real(5);
  return c;
}

ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig c) {
  reject_unknown(j, {"seed", "vocab", "model", "boundary", "decoder", "train", "textrank"}, "config");
  if (j.contains("seed")) {
    read(j, "seed", c.seed, "config");
    c.train.seed = c.seed;
  }
  if (j.contains("vocab")) {
    const json& v = j.at("vocab");
    reject_unknown(v, {"doc", "head"}, "vocab");
    read_size(v, "doc", c.doc_vocab, "vocab");
    read_size(v, "head", c.head_vocab, "vocab");
  }
  if (j.contains("model")) {
    const json& m = j.at("model");
    reject_unknown(m, {"word_emb", "head_emb", "hidden", "dec_hidden", "attn", "init_range"}, "model");
    read_size(m, "word_emb", c.model.word_emb, "model");
    read_size(m, "head_emb", c.model.head_emb, "model");
    read_size(m, "hidden", c.model.hidden, "model");
    read_size(m, "dec_hidden", c.model.dec_hidden, "model");
    read_size(m, "attn", c.model.attn, "model");
    read(m, "init_range", c.model.init_range, "model");
  }
  if (j.contains("boundary")) {
    const json& b = j.at("boundary");
    reject_unknown(b, {"variant", "threshold"}, "boundary");
    try {
      if (b.contains("variant")) c.model.boundary = parse_boundary_variant(b.at("variant").get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError(std::string("boundary.variant: ") + e.what());
    }
    read(b, "threshold", c.model.threshold, "boundary");
  }
  if (j.contains("decoder")) {
    const json& d = j.at("decoder");
    reject_unknown(d, {"ablate", "heading_dependency", "max_len"}, "decoder");
    if (d.contains("ablate")) {
      c.model.ablate_section_attention = c.model.ablate_heading_dependency = c.model.ablate_review = false;
      if (!d.at("ablate").is_array()) throw ConfigError("decoder.ablate must be an array of S, H, R");
      for (const auto& flag : d.at("ablate")) {
        const std::string f = flag.is_string() ? flag.get<std::string>() : "";
        if (f == "S") c.model.ablate_section_attention = true;
        else if (f == "H") c.model.ablate_heading_dependency = true;
        else if (f == "R") c.model.ablate_review = true;
        else throw ConfigError("decoder.ablate: unknown flag " + flag.dump());
      }
    }
    try {
      if (d.contains("heading_dependency"))
        c.model.heading_dependency = parse_heading_dependency(d.at("heading_dependency").get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError(std::string("decoder.heading_dependency: ") + e.what());
    }
    read_size(d, "max_len", c.model.max_heading_len, "decoder");
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    reject_unknown(t, {"learning_rate", "batch_size", "clip_norm", "epochs", "boundary_weight", "workers"}, "train");
    read(t, "learning_rate", c.train.learning_rate, "train");
    read_size(t, "batch_size", c.train.batch_size, "train");
    read(t, "clip_norm", c.train.clip_norm, "train");
    read_size(t, "epochs", c.train.epochs, "train");
    read(t, "boundary_weight", c.train.boundary_weight, "train");
    read_size(t, "workers", c.train.workers, "train");
  }
  if (j.contains("textrank")) {
    const json& r = j.at("textrank");
    reject_unknown(r, {"window", "damping", "max_iter", "tol", "top_k"}, "textrank");
    read_size(r, "window", c.textrank.window, "textrank");
    read(r, "damping", c.textrank.damping, "textrank");
    read_size(r, "max_iter", c.textrank.max_iterations, "textrank");
    read(r, "tol", c.textrank.tolerance, "textrank");
    read_size(r, "top_k", c.textrank.top_k, "textrank");
  }

  positive(c.doc_vocab, "vocab.doc");
  positive(c.head_vocab, "vocab.head");
  positive(c.model.word_emb, "model.word_emb");
  positive(c.model.head_emb, "model.head_emb");
  positive(c.model.hidden, "model.hidden");
  positive(c.model.dec_hidden, "model.dec_hidden");
  positive(c.model.attn, "model.attn");
  positive(c.model.max_heading_len, "decoder.max_len");
  positive(c.textrank.window, "textrank.window");
  positive(c.textrank.top_k, "textrank.top_k");
  positive(c.textrank.max_iterations, "textrank.max_iter");
  if (!(c.model.init_range > 0)) throw ConfigError("model.init_range must be positive");
  if (!(c.model.threshold > 0 && c.model.threshold < 1)) throw ConfigError("boundary.threshold must be in (0,1)");
  if (!(c.textrank.damping > 0 && c.textrank.damping < 1)) throw ConfigError("textrank.damping must be in (0,1)");
  if (!(c.textrank.tolerance > 0)) throw ConfigError("textrank.tol must be positive");
  try {
    c.train.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("train: ") + e.what());
  }
  return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  json ablate = json::array();
  if (c.model.ablate_section_attention) ablate.push_back("S");
  if (c.model.ablate_heading_dependency) ablate.push_back("H");
  if (c.model.ablate_review) ablate.push_back("R");
  return {{"seed", c.seed},
          {"vocab", {{"doc", c.doc_vocab}, {"head", c.head_vocab}}},
          {"model",
           {{"word_emb", c.model.word_emb},
            {"head_emb", c.model.head_emb},
            {"hidden", c.model.hidden},
            {"dec_hidden", c.model.dec_hidden},
            {"attn", c.model.attn},
            {"init_range", c.model.init_range}}},
          {"boundary", {{"variant", std::string(to_string(c.model.boundary))}, {"threshold", c.model.threshold}}},
          {"decoder",
           {{"ablate", ablate},
            {"heading_dependency", std::string(to_string(c.model.heading_dependency))},
            {"max_len", c.model.max_heading_len}}},
          {"train",
           {{"learning_rate", c.train.learning_rate},
            {"batch_size", c.train.batch_size},
            {"clip_norm", c.train.clip_norm},
            {"epochs", c.train.epochs},
            {"boundary_weight", c.train.boundary_weight},
            {"workers", c.train.workers}}},
          {"textrank",
           {{"window", c.textrank.window},
            {"damping", c.textrank.damping},
            {"max_iter", c.textrank.max_iterations},
            {"tol", c.textrank.tolerance},
            {"top_k", c.textrank.top_k}}}};
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j, std::move(base));
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t hash) {
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::uint64_t file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::uint64_t h = fnv1a("");
  char buf[1 << 14];
  while (in) {
    in.read(buf, sizeof buf);
    h = fnv1a(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  // Workers do not change results, so they stay out of the hash.
  json j = config_to_json(config);
  j["train"].erase("workers");
  return fnv1a(j.dump());
}

}  // namespace og
