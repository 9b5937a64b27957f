// Reviewer disagreement classifier: a sentence-pair model over SDAP comment
// texts. The native head is 2-way with class order (NonContradiction,
// Contradiction); a 3-way NLI head (entailment, neutral, contradiction) can
// be wrapped so its probabilities collapse to the two-way scheme.
#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "revcon/errors.hpp"
#include "revcon/metrics.hpp"
#include "revcon/nn/checkpoint.hpp"
#include "revcon/nn/lstm.hpp"
#include "revcon/nn/optim.hpp"
#include "revcon/nn/tokenizer.hpp"
#include "revcon/sdap.hpp"

namespace revcon {

enum class PairLabel { NonContradiction, Contradiction };

inline std::string_view pair_label_name(PairLabel l) {
  return l == PairLabel::Contradiction ? "contradiction" : "non_contradiction";
}

struct TrainConfigPair {
  int batch_size = 16;
  int max_tokens = 280;
  double dropout = 0.1;
  double learning_rate = 1e-5;
  int epochs = 10;
  std::uint64_t seed = 0;
  double threshold = 0.5;
  // architecture sizes
  int embedding_dim = 64;
  int hidden_dim = 32;

  void validate() const {
    if (max_tokens < 8) throw ModelError("max_tokens must be at least 8");
    if (learning_rate <= 0 || batch_size < 1 || epochs < 0 || dropout < 0 || dropout >= 1 ||
        !(threshold > 0.0 && threshold < 1.0) || embedding_dim < 1 || hidden_dim < 1)
      throw ModelError("invalid pair training config");
  }
};

struct ContradictionPrediction {
  std::string rpc_id;  // empty when the candidate has no corpus reference
  double probability_contradiction = 0.0;
  PairLabel label = PairLabel::NonContradiction;
};

// Joint encoding: <cls> a <sep> b <sep> with segment ids 0/1. When the pair
// exceeds max_tokens the longer segment loses tokens first.
struct EncodedPair {
  std::vector<std::string> tokens;
  std::vector<int> segments;
};

inline EncodedPair encode_pair(const std::string& comment_a, const std::string& comment_b,
                               const TrainConfigPair& config) {
  config.validate();
  if (trim(comment_a).empty()) throw EmptyText("first comment is empty");
  if (trim(comment_b).empty()) throw EmptyText("second comment is empty");
  auto ta = nn::word_tokenize(comment_a);
  auto tb = nn::word_tokenize(comment_b);
  const std::size_t budget = static_cast<std::size_t>(config.max_tokens) - 3;
  while (ta.size() + tb.size() > budget) {
    if (ta.size() >= tb.size())
      ta.pop_back();
    else
      tb.pop_back();
  }
  EncodedPair out;
  out.tokens.push_back("<cls>");
  out.segments.push_back(0);
  for (auto& t : ta) {
    out.tokens.push_back(std::move(t));
    out.segments.push_back(0);
  }
  out.tokens.push_back("<sep>");
  out.segments.push_back(0);
  for (auto& t : tb) {
    out.tokens.push_back(std::move(t));
    out.segments.push_back(1);
  }
  out.tokens.push_back("<sep>");
  out.segments.push_back(1);
  return out;
}

inline ContradictionPrediction collapse_nli_probabilities(double entail, double neutral,
                                                          double contradiction,
                                                          double threshold = 0.5) {
  if (entail < 0 || neutral < 0 || contradiction < 0)
    throw NotADistribution("negative probability");
  const double sum = entail + neutral + contradiction;
  if (std::abs(sum - 1.0) > 1e-6)
    throw NotADistribution("probabilities sum to " + std::to_string(sum));
  ContradictionPrediction out;
  out.probability_contradiction = contradiction;
  out.label = contradiction >= threshold ? PairLabel::Contradiction : PairLabel::NonContradiction;
  return out;
}

class DisagreementModel {
public:
  DisagreementModel(nn::Vocab vocab, TrainConfigPair cfg, int n_classes = 2)
      : vocab_(std::move(vocab)), cfg_(cfg), n_classes_(n_classes) {
    cfg_.validate();
    if (n_classes_ != 2 && n_classes_ != 3) throw ModelError("head must be 2-way or 3-way");
    Rng rng(cfg_.seed);
    const auto e = static_cast<Eigen::Index>(cfg_.embedding_dim);
    const auto h = static_cast<Eigen::Index>(cfg_.hidden_dim);
    const double bound = 0.1;
    tok_emb_ = params_.add_uniform("token_embedding", static_cast<Eigen::Index>(vocab_.size()), e,
                                   bound, rng);
    seg_emb_ = params_.add_uniform("segment_embedding", 2, e, bound, rng);
    lstm_ = nn::BiLstmParams::create(params_, "encoder", e, h, rng);
    w_out_ = params_.add_uniform("head_w", 2 * h, n_classes_, bound, rng);
    b_out_ = params_.add_uniform("head_b", 1, n_classes_, bound, rng);
  }

  const TrainConfigPair& config() const { return cfg_; }
  const nn::Vocab& vocab() const { return vocab_; }
  int n_classes() const { return n_classes_; }
  const std::string& backbone_id() const { return backbone_id_; }
  std::vector<nn::Parameter*> parameters() { return params_.all(); }

  std::vector<std::string> class_order() const {
    if (n_classes_ == 2) return {"non_contradiction", "contradiction"};
    return {"entailment", "neutral", "contradiction"};
  }

  nn::Node* forward(nn::Graph& g, const EncodedPair& enc, double dropout) const {
    auto* self = const_cast<DisagreementModel*>(this);
    std::vector<int> ids;
    ids.reserve(enc.tokens.size());
    for (const auto& t : enc.tokens) ids.push_back(vocab_.id(t));
    nn::Node* emb =
        g.add(g.embedding(*self->tok_emb_, ids), g.embedding(*self->seg_emb_, enc.segments));
    nn::Node* h = g.dropout(nn::bilstm_forward(g, self->lstm_, g.dropout(emb, dropout)), dropout);
    nn::Node* pooled = g.mean_rows(h);
    return g.add(g.matmul(pooled, g.leaf(*self->w_out_)), g.leaf(*self->b_out_));
  }

  // Class probabilities for the ordered pair (a, b), evaluation mode.
  std::vector<double> predict_probs(const std::string& a, const std::string& b) const {
    EncodedPair enc = encode_pair(a, b, cfg_);
    nn::Graph g(false, nullptr);
    nn::Node* logits = forward(g, enc, 0.0);
    const double mx = logits->value.maxCoeff();
    Eigen::ArrayXXd e = (logits->value.array() - mx).exp();
    const double z = e.sum();
    std::vector<double> probs;
    for (int c = 0; c < n_classes_; ++c) probs.push_back(e(0, c) / z);
    return probs;
  }

  void save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    nlohmann::ordered_json manifest;
    manifest["format_version"] = 1;
    manifest["kind"] = "disagreement";
    manifest["backbone_id"] = backbone_id_;
    manifest["class_order"] = class_order();
    manifest["threshold"] = cfg_.threshold;
    manifest["max_tokens"] = cfg_.max_tokens;
    manifest["config"] = config_json();
    nn::write_json_file(dir / "manifest.json", manifest);
    nn::write_json_file(dir / "vocab.json", vocab_.to_json());
    nn::save_weights(dir / "weights.bin", const_cast<DisagreementModel*>(this)->params_.all());
  }

  static DisagreementModel load(const std::filesystem::path& dir) {
    auto [model, order] = load_any(dir);
    if (order != std::vector<std::string>{"non_contradiction", "contradiction"})
      throw IncompatibleCheckpoint("checkpoint head is not the 2-way scheme");
    return std::move(model);
  }

  nlohmann::ordered_json config_json() const {
    return {{"batch_size", cfg_.batch_size},     {"max_tokens", cfg_.max_tokens},
            {"dropout", cfg_.dropout},           {"learning_rate", cfg_.learning_rate},
            {"epochs", cfg_.epochs},             {"seed", cfg_.seed},
            {"threshold", cfg_.threshold},       {"embedding_dim", cfg_.embedding_dim},
            {"hidden_dim", cfg_.hidden_dim}};
  }

  static TrainConfigPair config_from_json(const nlohmann::json& j) {
    TrainConfigPair cfg;
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.max_tokens = j.value("max_tokens", cfg.max_tokens);
    cfg.dropout = j.value("dropout", cfg.dropout);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.threshold = j.value("threshold", cfg.threshold);
    cfg.embedding_dim = j.value("embedding_dim", cfg.embedding_dim);
    cfg.hidden_dim = j.value("hidden_dim", cfg.hidden_dim);
    return cfg;
  }

  static std::pair<DisagreementModel, std::vector<std::string>> load_any(
      const std::filesystem::path& dir) {
    auto manifest = nn::read_json_file(dir / "manifest.json");
    if (manifest.value("kind", "") != "disagreement")
      throw IncompatibleCheckpoint("not a disagreement model checkpoint");
    if (manifest.value("format_version", 0) != 1)
      throw IncompatibleCheckpoint("unsupported checkpoint version");
    auto order = manifest.value("class_order", std::vector<std::string>{});
    if (order.size() != 2 && order.size() != 3)
      throw IncompatibleCheckpoint("class_order must list 2 or 3 classes");
    TrainConfigPair cfg = config_from_json(manifest.at("config"));
    nn::Vocab vocab = nn::Vocab::from_json(nn::read_json_file(dir / "vocab.json"));
    DisagreementModel model(std::move(vocab), cfg, static_cast<int>(order.size()));
    if (model.class_order() != order)
      throw IncompatibleCheckpoint("unrecognized class_order in checkpoint");
    nn::load_weights(dir / "weights.bin", model.params_.all());
    return {std::move(model), order};
  }

private:
  nn::Vocab vocab_;
  TrainConfigPair cfg_;
  int n_classes_;
  std::string backbone_id_ = "bilstm";
  nn::ParameterSet params_;
  nn::Parameter* tok_emb_ = nullptr;
  nn::Parameter* seg_emb_ = nullptr;
  nn::BiLstmParams lstm_;
  nn::Parameter* w_out_ = nullptr;
  nn::Parameter* b_out_ = nullptr;
};

// A 3-way NLI checkpoint wrapped so predictions collapse to the 2-way scheme.
inline DisagreementModel load_nli_pretrained(const std::string& backbone_id,
                                             const std::filesystem::path& source) {
  auto [model, order] = DisagreementModel::load_any(source);
  if (order != std::vector<std::string>{"entailment", "neutral", "contradiction"})
    throw IncompatibleCheckpoint("checkpoint does not provide a 3-way NLI head");
  if (backbone_id != model.backbone_id())
    throw IncompatibleCheckpoint("backbone mismatch: requested '" + backbone_id + "', found '" +
                                 model.backbone_id() + "'");
  return std::move(model);
}

namespace detail {

// rpc_id recovered from the two comment ids, reviews in canonical order
inline std::string rpc_id_of(const SdapCandidate& c) {
  const auto cut_a = c.comment_a.comment_id.rfind('#');
  const auto cut_b = c.comment_b.comment_id.rfind('#');
  if (cut_a == std::string::npos || cut_b == std::string::npos) return "";
  std::string ra = c.comment_a.comment_id.substr(0, cut_a);
  std::string ia = c.comment_a.comment_id.substr(cut_a + 1);
  std::string rb = c.comment_b.comment_id.substr(0, cut_b);
  std::string ib = c.comment_b.comment_id.substr(cut_b + 1);
  if (rb < ra) {
    std::swap(ra, rb);
    std::swap(ia, ib);
  }
  return make_pair_id(ra, rb) + "#" + ia + "." + ib;
}

}  // namespace detail

inline ContradictionPrediction predict(const DisagreementModel& model,
                                       const SdapCandidate& candidate,
                                       bool symmetrize = false) {
  auto probs = model.predict_probs(candidate.comment_a.text, candidate.comment_b.text);
  if (symmetrize) {
    auto rev = model.predict_probs(candidate.comment_b.text, candidate.comment_a.text);
    for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = 0.5 * (probs[i] + rev[i]);
  }
  ContradictionPrediction out;
  if (model.n_classes() == 3) {
    out = collapse_nli_probabilities(probs[0], probs[1], probs[2], model.config().threshold);
  } else {
    out.probability_contradiction = probs[1];
    out.label = probs[1] >= model.config().threshold ? PairLabel::Contradiction
                                                     : PairLabel::NonContradiction;
  }
  out.rpc_id = detail::rpc_id_of(candidate);
  return out;
}

struct PairExample {
  std::string rpc_id;
  std::string text_a;
  std::string text_b;
  PairLabel label = PairLabel::NonContradiction;
};

// Labeled training items from every gold-labeled RPC, CannotDecide excluded.
inline std::vector<PairExample> make_pair_examples(const Corpus& corpus) {
  std::vector<PairExample> out;
  for (const auto& rpc : corpus.rpcs) {
    if (!rpc.gold_label || rpc.excluded_from_training()) continue;
    const ReviewComment* a = corpus.find_comment(rpc.comment_a_id);
    const ReviewComment* b = corpus.find_comment(rpc.comment_b_id);
    if (!a || !b) continue;
    out.push_back(PairExample{rpc.rpc_id, a->text, b->text,
                              *rpc.gold_label == GoldLabel::Contradiction
                                  ? PairLabel::Contradiction
                                  : PairLabel::NonContradiction});
  }
  return out;
}

struct PairEvalReport {
  MetricsReport metrics;
  std::vector<ContradictionPrediction> predictions;
};

inline PairEvalReport evaluate_disagreement(const DisagreementModel& model,
                                            const std::vector<PairExample>& test) {
  if (test.empty()) throw EmptyInput("no test pairs");
  std::vector<int> gold, pred;
  PairEvalReport rep;
  for (const auto& ex : test) {
    auto probs = model.predict_probs(ex.text_a, ex.text_b);
    ContradictionPrediction p;
    if (model.n_classes() == 3) {
      p = collapse_nli_probabilities(probs[0], probs[1], probs[2], model.config().threshold);
    } else {
      p.probability_contradiction = probs[1];
      p.label = probs[1] >= model.config().threshold ? PairLabel::Contradiction
                                                     : PairLabel::NonContradiction;
    }
    p.rpc_id = ex.rpc_id;
    rep.predictions.push_back(p);
    gold.push_back(ex.label == PairLabel::Contradiction ? 1 : 0);
    pred.push_back(p.label == PairLabel::Contradiction ? 1 : 0);
  }
  rep.metrics = compute_metrics(gold, pred, {"non_contradiction", "contradiction"});
  return rep;
}

inline DisagreementModel train_disagreement(const std::vector<PairExample>& train,
                                            const std::vector<PairExample>& validation,
                                            const TrainConfigPair& config) {
  config.validate();
  if (train.empty()) throw EmptyTrainingSet("no training pairs");
  bool any_c = false, any_n = false;
  for (const auto& ex : train)
    (ex.label == PairLabel::Contradiction ? any_c : any_n) = true;
  if (!any_c || !any_n)
    throw SingleClassTrainingSet("training pairs cover only one class");

  std::vector<std::string> texts;
  for (const auto& ex : train) {
    texts.push_back(ex.text_a);
    texts.push_back(ex.text_b);
  }
  nn::Vocab vocab = nn::Vocab::build(texts);
  DisagreementModel model(std::move(vocab), config);

  nn::Adam::Options aopt;
  aopt.lr = config.learning_rate;
  nn::Adam adam(model.parameters(), aopt);
  Rng rng(config.seed + 1);

  auto macro_f1_on = [&](const std::vector<PairExample>& split) {
    const auto& probe = split.empty() ? train : split;
    return evaluate_disagreement(model, probe).metrics.macro_f1;
  };

  std::vector<nn::Mat> best_values;
  auto snapshot = [&] {
    best_values.clear();
    for (nn::Parameter* p : model.parameters()) best_values.push_back(p->value);
  };
  snapshot();
  double best_f1 = config.epochs > 0 ? macro_f1_on(validation) : 0.0;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t at = 0; at < order.size(); at += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), at + static_cast<std::size_t>(config.batch_size));
      adam.zero_grad();
      for (std::size_t k = at; k < stop; ++k) {
        const PairExample& ex = train[order[k]];
        nn::Graph g(true, &rng);
        EncodedPair enc = encode_pair(ex.text_a, ex.text_b, config);
        nn::Node* logits = model.forward(g, enc, config.dropout);
        nn::Node* loss = g.scale(
            g.ce_logits(logits, ex.label == PairLabel::Contradiction ? 1 : 0),
            1.0 / static_cast<double>(stop - at));
        g.backward(loss);
      }
      adam.step();
    }
    const double f1 = macro_f1_on(validation);
    if (f1 > best_f1) {
      best_f1 = f1;
      snapshot();
    }
  }

  if (config.epochs > 0) {
    auto params = model.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best_values[i];
  }
  return model;
}

inline std::string predictions_to_jsonl(const std::vector<ContradictionPrediction>& preds) {
  std::string out;
  for (const auto& p : preds) {
    nlohmann::ordered_json j{{"rpc_id", p.rpc_id},
                             {"prob", p.probability_contradiction},
                             {"label", std::string(pair_label_name(p.label))}};
    out += j.dump();
    out += "\n";
  }
  return out;
}

}  // namespace revcon
