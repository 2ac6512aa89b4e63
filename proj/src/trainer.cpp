#include "og/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "og/config.hpp"

namespace og {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0) || !std::isfinite(learning_rate))
    throw std::invalid_argument("learning_rate must be non-negative");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  if (!(clip_norm > 0)) throw std::invalid_argument("clip_norm must be positive");
  if (epochs == 0) throw std::invalid_argument("epochs must be positive");
  if (!(boundary_weight >= 0)) throw std::invalid_argument("boundary_weight must be non-negative");
  if (workers == 0) throw std::invalid_argument("workers must be positive");
}

AdamState::AdamState(const ParamSet& params) {
  for (const auto& p : params) {
    first.emplace_back(p.value.shape(), Real(0));
    second.emplace_back(p.value.shape(), Real(0));
  }
}

void adam_step(ParamSet& params, const GradSet& grads, AdamState& state, Real learning_rate) {
  if (state.first.size() != params.size() || grads.size() != params.size())
    throw std::invalid_argument("adam_step: parameter/gradient/state count mismatch");
  ++state.step;
  const Real step = static_cast<Real>(state.step);
  const Real c1 = 1 - std::pow(AdamState::kBeta1, step);
  const Real c2 = 1 - std::pow(AdamState::kBeta2, step);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto w = params[i].value.data();
    auto g = grads[i].data();
    auto m = state.first[i].data();
    auto v = state.second[i].data();
    if (g.size() != w.size() || m.size() != w.size())
      throw DimensionError("adam_step: shape mismatch for " + params[i].name);
    for (std::size_t k = 0; k < w.size(); ++k) {
      m[k] = AdamState::kBeta1 * m[k] + (1 - AdamState::kBeta1) * g[k];
      v[k] = AdamState::kBeta2 * v[k] + (1 - AdamState::kBeta2) * g[k] * g[k];
      const Real mhat = m[k] / c1;
      const Real vhat = v[k] / c2;
      w[k] -= learning_rate * mhat / (std::sqrt(vhat) + AdamState::kEpsilon);
    }
  }
}

Real clip_gradients(GradSet& grads, Real max_norm) {
  const Real norm = grads.l2_norm();
  if (norm > max_norm) grads.scale(max_norm / norm);
  return norm;
}

Real HeadingLikelihood::perplexity() const {
  if (tokens == 0) throw std::invalid_argument("perplexity of zero tokens");
  return std::exp(nll / static_cast<Real>(tokens));
}

HeadingLikelihood heading_likelihood(const OutlineModel& model, std::span<const EncodedExample> examples) {
  HeadingLikelihood out;
  for (const auto& ex : examples) {
    Tape t(&model.params);
    LossParts parts;
    model.loss(t, ex, Real(0), &parts);
    out.nll += parts.heading_nll;
    out.tokens += parts.heading_tokens;
  }
  return out;
}

namespace {

Real document_gradient(const OutlineModel& model, const EncodedExample& ex, Real boundary_weight, GradSet& g) {
  Tape t(&model.params, &g);
  Var loss = model.loss(t, ex, boundary_weight);
  const Real value = t.scalar(loss);
  if (!std::isfinite(value)) return value;
  t.backward(loss);
  return value;
}

}  // namespace

Real batch_gradient(const OutlineModel& model, std::span<const EncodedExample> batch, Real boundary_weight,
                    std::size_t workers, GradSet& out) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  out = GradSet(model.params);
  std::vector<GradSet> per_doc(batch.size(), GradSet(model.params));
  std::vector<Real> losses(batch.size(), 0);

  const std::size_t n = std::min(std::max<std::size_t>(workers, 1), batch.size());
  if (n == 1) {
    for (std::size_t i = 0; i < batch.size(); ++i)
      losses[i] = document_gradient(model, batch[i], boundary_weight, per_doc[i]);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < batch.size(); i += n)
          losses[i] = document_gradient(model, batch[i], boundary_weight, per_doc[i]);
      });
    }
    for (auto& th : pool) th.join();
  }

  // Mean over documents, summed in index order.
  const Real inv = Real(1) / static_cast<Real>(batch.size());
  Real total = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out.add(per_doc[i], inv);
    total += losses[i];
  }
  return total * inv;
}

nlohmann::json epoch_record_to_json(const EpochRecord& r) {
  return {{"epoch", r.epoch}, {"train_loss", r.train_loss}, {"dev_ppl", r.dev_ppl}, {"wallclock", r.wallclock}};
}

TrainResult train(OutlineModel& model, std::span<const EncodedExample> train_set,
                  std::span<const EncodedExample> dev_set, const TrainConfig& config, std::ostream* log,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (train_set.empty()) throw std::invalid_argument("empty training set");
  // Without a dev split, selection falls back to training perplexity.
  std::span<const EncodedExample> select_set = dev_set.empty() ? train_set : dev_set;

  TrainResult result;
  AdamState adam(model.params);
  Rng root(config.seed);
  std::vector<std::size_t> order(train_set.size());
  const auto start = std::chrono::steady_clock::now();

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng = root.split(epoch);
    shuffle_rng.shuffle(order);

    Real loss_sum = 0;
    std::size_t batches = 0;
    for (std::size_t b = 0; b * config.batch_size < order.size(); ++b) {
      const std::size_t lo = b * config.batch_size;
      const std::size_t hi = std::min(order.size(), lo + config.batch_size);
      std::vector<EncodedExample> batch;
      batch.reserve(hi - lo);
      for (std::size_t i = lo; i < hi; ++i) batch.push_back(train_set[order[i]]);

      GradSet grads;
      const Real loss = batch_gradient(model, batch, config.boundary_weight, config.workers, grads);
      if (!std::isfinite(loss) || !grads.all_finite()) {
        std::ostringstream msg;
        msg << "training diverged at epoch " << epoch << ", batch " << b << " (loss " << loss << ")";
        throw TrainingDiverged(epoch, b, msg.str());
      }
      clip_gradients(grads, config.clip_norm);
      adam_step(model.params, grads, adam, config.learning_rate);
      loss_sum += loss;
      ++batches;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<Real>(batches);
    rec.dev_ppl = heading_likelihood(model, select_set).perplexity();
    if (config.log_wallclock)
      rec.wallclock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.push_back(rec);
    if (log) *log << epoch_record_to_json(rec).dump() << '\n' << std::flush;

    if (result.best_epoch == 0 || rec.dev_ppl < result.best_dev_ppl) {
      result.best_epoch = epoch;
      result.best_dev_ppl = rec.dev_ppl;
      result.best_params = model.params;
    }
    if (on_epoch) on_epoch(rec, model);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

std::ofstream open_out(const std::filesystem::path& p, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(p, mode);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& p, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(p, mode);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  return in;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(dir / "manifest.txt");
    out << kCheckpointVersion << '\n';
    for (const auto& p : ckpt.params) {
      out << p.name << ' ' << p.value.rank();
      for (auto d : p.value.shape()) out << ' ' << d;
      out << '\n';
    }
  }
  {
    auto out = open_out(dir / "params.bin", std::ios::out | std::ios::binary);
    for (const auto& p : ckpt.params) write_tensor(out, p.value);
  }
  {
    nlohmann::json j = {{"model", model_config_to_json(ckpt.model)},
                        {"train", train_config_to_json(ckpt.train)},
                        {"best_dev_ppl", ckpt.best_dev_ppl},
                        {"provenance", ckpt.provenance}};
    auto out = open_out(dir / "config.json");
    out << j.dump(2) << '\n';
  }
  {
    auto out = open_out(dir / "doc_vocab.txt");
    ckpt.doc_vocab.save(out);
  }
  {
    auto out = open_out(dir / "head_vocab.txt");
    ckpt.head_vocab.save(out);
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  Checkpoint ckpt;
  auto manifest = open_in(dir / "manifest.txt");
  std::string line;
  if (!std::getline(manifest, line) || line != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version in " + (dir / "manifest.txt").string());

  auto payload = open_in(dir / "params.bin", std::ios::in | std::ios::binary);
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string name;
    std::size_t rank = 0;
    fields >> name >> rank;
    Shape shape(rank);
    for (auto& d : shape) fields >> d;
    if (!fields) throw std::runtime_error("malformed manifest line: " + line);
    Tensor value = read_tensor(payload);
    if (value.shape() != shape)
      throw std::runtime_error("payload shape " + shape_string(value.shape()) + " does not match manifest " +
                               shape_string(shape) + " for " + name);
    ckpt.params.add(name, std::move(value));
  }

  auto cfg_in = open_in(dir / "config.json");
  nlohmann::json j = nlohmann::json::parse(cfg_in);
  ckpt.model = model_config_from_json(j.at("model"));
  ckpt.train = train_config_from_json(j.at("train"));
  ckpt.best_dev_ppl = j.at("best_dev_ppl").get<Real>();
  ckpt.provenance = j.value("provenance", nlohmann::json::object());

  auto dv = open_in(dir / "doc_vocab.txt");
  ckpt.doc_vocab = Vocabulary::load(dv);
  auto hv = open_in(dir / "head_vocab.txt");
  ckpt.head_vocab = Vocabulary::load(hv);
  return ckpt;
}

OutlineModel model_from_checkpoint(const Checkpoint& ckpt) {
  OutlineModel model(ckpt.model, 0);
  if (model.params.size() != ckpt.params.size())
    throw std::runtime_error("checkpoint has " + std::to_string(ckpt.params.size()) + " tensors, model expects " +
                             std::to_string(model.params.size()));
  for (std::size_t i = 0; i < model.params.size(); ++i) {
    const auto& stored = ckpt.params[i];
    auto& slot = model.params[i];
    if (stored.name != slot.name || stored.value.shape() != slot.value.shape())
      throw std::runtime_error("checkpoint tensor " + stored.name + " " + shape_string(stored.value.shape()) +
                               " does not match model tensor " + slot.name + " " +
                               shape_string(slot.value.shape()));
    slot.value = stored.value;
  }
  return model;
}

GeneratedOutline generate_outline(const std::vector<Tokens>& paragraphs, const OutlineModel& model,
                                  const Vocabulary& doc_vocab, const Vocabulary& head_vocab, DecodeTrace* trace) {
  if (paragraphs.empty()) throw std::invalid_argument("empty document");
  std::vector<std::vector<int>> ids;
  ids.reserve(paragraphs.size());
  for (const auto& p : paragraphs) {
    ids.push_back(doc_vocab.encode(p));
    // A paragraph that preprocessed to nothing still occupies a position.
    if (ids.back().empty()) ids.back().push_back(Vocabulary::kUnk);
  }
  auto outline = model.generate(ids, trace);
  GeneratedOutline out;
  out.labels = outline.boundaries.labels;
  out.probabilities = outline.boundaries.probabilities;
  for (const auto& h : outline.headings) out.headings.push_back(head_vocab.decode(h));
  return out;
}

}  // namespace og
