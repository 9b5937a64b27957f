// Aspect Sentiment Model: joint aspect category detection (ACD) and aspect
// category sentiment analysis (ACSA) over review comments, treating a
// comment as a bag of word instances.
//
// ACD: embedding -> BiLSTM -> per-aspect attention + linear head -> detection
// probability (all 8 aspects). ACSA: embedding -> stacked BiLSTM -> shared
// word sentiment layer giving each word a positive probability, then a per-aspect
// attention whose weights aggregate word sentiments. The normative contract:
// sentiment(aspect) = sum_w attention_aspect(w) * word_positive(w), a convex
// combination, with attention rows summing to 1.
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "revcon/errors.hpp"
#include "revcon/metrics.hpp"
#include "revcon/nn/checkpoint.hpp"
#include "revcon/nn/lstm.hpp"
#include "revcon/nn/optim.hpp"
#include "revcon/nn/tokenizer.hpp"
#include "revcon/review.hpp"

namespace revcon {

struct TrainConfigAspect {
  int batch_size = 16;
  double dropout = 0.5;
  int epochs = 15;
  double learning_rate = 1e-3;
  double weight_decay = 1e-3;
  double detection_threshold = 0.5;
  std::uint64_t seed = 0;
  // architecture sizes (free choices, recorded in the checkpoint manifest)
  int embedding_dim = 64;
  int hidden_dim = 32;  // per direction
  int attention_dim = 32;
  int acsa_layers = 2;

  void validate() const {
    if (!(detection_threshold > 0.0 && detection_threshold < 1.0))
      throw ModelError("detection_threshold must lie in (0,1)");
    if (learning_rate <= 0 || weight_decay < 0 || batch_size < 1 || epochs < 0 ||
        dropout < 0 || dropout >= 1 || embedding_dim < 1 || hidden_dim < 1 ||
        attention_dim < 1 || acsa_layers < 1)
      throw ModelError("invalid aspect training config");
  }
};

struct AspectPrediction {
  std::vector<std::string> tokens;
  std::array<double, kAspectCount> detection{};                 // probability per aspect
  std::array<std::vector<double>, kAspectCount> attention{};    // aggregation weights, per aspect
  std::vector<double> word_positive;                            // per token
  std::map<Aspect, double> sentiment;  // detected sentiment-bearing aspects only
};

struct AspectTrainReport {
  std::vector<std::string> warnings;
  double best_validation_f1 = 0.0;
  int epochs_run = 0;
};

class AspectSentimentModel {
public:
  AspectSentimentModel(nn::Vocab vocab, TrainConfigAspect cfg)
      : vocab_(std::move(vocab)), cfg_(cfg) {
    cfg_.validate();
    Rng rng(cfg_.seed);
    build_params(rng);
  }

  const TrainConfigAspect& config() const { return cfg_; }
  const nn::Vocab& vocab() const { return vocab_; }
  const std::string& backbone_id() const { return backbone_id_; }
  AspectTrainReport& train_report() { return report_; }
  const AspectTrainReport& train_report() const { return report_; }

  // Full forward pass in evaluation mode.
  AspectPrediction predict(const ReviewComment& comment) const {
    auto ids = vocab_.encode(comment.text);
    if (ids.empty()) throw EmptyAfterTokenization(comment.text);
    nn::Graph g(false, nullptr);
    Forward f = forward(g, ids, 0.0);
    AspectPrediction out;
    for (const auto& w : nn::word_tokenize(comment.text)) out.tokens.push_back(w);
    for (int c = 0; c < kAspectCount; ++c) {
      out.detection[static_cast<std::size_t>(c)] = f.det_prob[static_cast<std::size_t>(c)]->value(0, 0);
      nn::Node* att = f.agg_attention[static_cast<std::size_t>(c)];
      for (Eigen::Index t = 0; t < att->value.rows(); ++t)
        out.attention[static_cast<std::size_t>(c)].push_back(att->value(t, 0));
    }
    for (Eigen::Index t = 0; t < f.word_positive->value.rows(); ++t)
      out.word_positive.push_back(f.word_positive->value(t, 0));
    for (Aspect a : kAllAspects) {
      const auto c = static_cast<std::size_t>(a);
      if (aspect_has_sentiment(a) && out.detection[c] >= cfg_.detection_threshold)
        out.sentiment[a] = f.agg_sentiment[c]->value(0, 0);
    }
    return out;
  }

  void save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    nlohmann::ordered_json manifest;
    manifest["format_version"] = 1;
    manifest["kind"] = "aspect";
    manifest["backbone_id"] = backbone_id_;
    manifest["aspect_order"] = nlohmann::ordered_json::array();
    for (Aspect a : kAllAspects) manifest["aspect_order"].push_back(std::string(aspect_name(a)));
    manifest["threshold"] = cfg_.detection_threshold;
    manifest["config"] = config_json();
    nn::write_json_file(dir / "manifest.json", manifest);
    nn::write_json_file(dir / "vocab.json", vocab_.to_json());
    nn::save_weights(dir / "weights.bin", const_cast<AspectSentimentModel*>(this)->params_.all());
  }

  static AspectSentimentModel load(const std::filesystem::path& dir) {
    auto manifest = nn::read_json_file(dir / "manifest.json");
    if (manifest.value("kind", "") != "aspect")
      throw IncompatibleCheckpoint("not an aspect model checkpoint");
    if (manifest.value("format_version", 0) != 1)
      throw IncompatibleCheckpoint("unsupported checkpoint version");
    std::vector<std::string> order = manifest.value("aspect_order", std::vector<std::string>{});
    if (order.size() != kAspectCount) throw IncompatibleCheckpoint("bad aspect_order");
    for (int c = 0; c < kAspectCount; ++c)
      if (order[static_cast<std::size_t>(c)] != aspect_name(kAllAspects[static_cast<std::size_t>(c)]))
        throw IncompatibleCheckpoint("aspect_order differs from canonical order");
    TrainConfigAspect cfg = config_from_json(manifest.at("config"));
    nn::Vocab vocab = nn::Vocab::from_json(nn::read_json_file(dir / "vocab.json"));
    AspectSentimentModel model(std::move(vocab), cfg);
    nn::load_weights(dir / "weights.bin", model.params_.all());
    return model;
  }

  // ---- internals shared with the trainer ----
  struct Forward {
    std::array<nn::Node*, kAspectCount> det_logit{};
    std::array<nn::Node*, kAspectCount> det_prob{};
    std::array<nn::Node*, kAspectCount> agg_attention{};  // t x 1 softmax weights
    std::array<nn::Node*, kAspectCount> agg_sentiment{};  // 1 x 1; null for Summary
    nn::Node* word_positive = nullptr;                    // t x 1
  };

  Forward forward(nn::Graph& g, const std::vector<int>& ids, double dropout) const {
    auto* self = const_cast<AspectSentimentModel*>(this);
    Forward f;
    nn::Node* emb = g.embedding(*self->embedding_, ids);
    nn::Node* emb_d = g.dropout(emb, dropout);

    nn::Node* h_acd = g.dropout(nn::bilstm_forward(g, self->acd_lstm_, emb_d), dropout);
    nn::Node* hs = emb_d;
    for (auto& layer : self->acsa_lstm_) hs = g.dropout(nn::bilstm_forward(g, layer, hs), dropout);
    nn::Node* word_logits = g.add_rowvec(g.matmul(hs, g.leaf(*self->ws_)), g.leaf(*self->bs_));
    f.word_positive = g.sigmoid(word_logits);

    for (int c = 0; c < kAspectCount; ++c) {
      const auto ci = static_cast<std::size_t>(c);
      AcdHead& head = self->acd_heads_[ci];
      nn::Node* u = g.tanh(g.add_rowvec(g.matmul(h_acd, g.leaf(*head.wa)), g.leaf(*head.ba)));
      nn::Node* alpha = g.softmax_vec(g.matmul(u, g.leaf(*head.va)));
      nn::Node* ctx = g.matmul(g.transpose(alpha), h_acd);  // 1 x 2h
      f.det_logit[ci] = g.add(g.matmul(ctx, g.leaf(*head.wd)), g.leaf(*head.bd));
      f.det_prob[ci] = g.sigmoid(f.det_logit[ci]);

      const Aspect aspect = kAllAspects[ci];
      if (aspect_has_sentiment(aspect)) {
        AcsaHead& sh = self->acsa_heads_[ci];
        nn::Node* u2 = g.tanh(g.add_rowvec(g.matmul(hs, g.leaf(*sh.wa)), g.leaf(*sh.ba)));
        nn::Node* alpha2 = g.softmax_vec(g.matmul(u2, g.leaf(*sh.va)));
        f.agg_attention[ci] = alpha2;
        f.agg_sentiment[ci] = g.matmul(g.transpose(alpha2), f.word_positive);  // convex combo
      } else {
        // Summary has no sentiment; expose its detection attention instead
        f.agg_attention[ci] = alpha;
        f.agg_sentiment[ci] = nullptr;
      }
    }
    return f;
  }

  std::vector<nn::Parameter*> parameters() { return params_.all(); }
  nn::ParameterSet& parameter_set() { return params_; }

  nlohmann::ordered_json config_json() const {
    return {{"batch_size", cfg_.batch_size},
            {"dropout", cfg_.dropout},
            {"epochs", cfg_.epochs},
            {"learning_rate", cfg_.learning_rate},
            {"weight_decay", cfg_.weight_decay},
            {"detection_threshold", cfg_.detection_threshold},
            {"seed", cfg_.seed},
            {"embedding_dim", cfg_.embedding_dim},
            {"hidden_dim", cfg_.hidden_dim},
            {"attention_dim", cfg_.attention_dim},
            {"acsa_layers", cfg_.acsa_layers}};
  }

  static TrainConfigAspect config_from_json(const nlohmann::json& j) {
    TrainConfigAspect cfg;
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.dropout = j.value("dropout", cfg.dropout);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.weight_decay = j.value("weight_decay", cfg.weight_decay);
    cfg.detection_threshold = j.value("detection_threshold", cfg.detection_threshold);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.embedding_dim = j.value("embedding_dim", cfg.embedding_dim);
    cfg.hidden_dim = j.value("hidden_dim", cfg.hidden_dim);
    cfg.attention_dim = j.value("attention_dim", cfg.attention_dim);
    cfg.acsa_layers = j.value("acsa_layers", cfg.acsa_layers);
    return cfg;
  }

private:
  struct AcdHead {
    nn::Parameter* wa;  // 2h x a
    nn::Parameter* ba;  // 1 x a
    nn::Parameter* va;  // a x 1
    nn::Parameter* wd;  // 2h x 1
    nn::Parameter* bd;  // 1 x 1
  };
  struct AcsaHead {
    nn::Parameter* wa;
    nn::Parameter* ba;
    nn::Parameter* va;
  };

  void build_params(Rng& rng) {
    const auto e = static_cast<Eigen::Index>(cfg_.embedding_dim);
    const auto h = static_cast<Eigen::Index>(cfg_.hidden_dim);
    const auto a = static_cast<Eigen::Index>(cfg_.attention_dim);
    const double bound = 0.1;
    embedding_ = params_.add_uniform("embedding", static_cast<Eigen::Index>(vocab_.size()), e,
                                     bound, rng);
    acd_lstm_ = nn::BiLstmParams::create(params_, "acd.lstm", e, h, rng);
    acsa_lstm_.clear();
    Eigen::Index in = e;
    for (int l = 0; l < cfg_.acsa_layers; ++l) {
      acsa_lstm_.push_back(
          nn::BiLstmParams::create(params_, "acsa.lstm" + std::to_string(l), in, h, rng));
      in = 2 * h;
    }
    ws_ = params_.add_uniform("acsa.word_w", 2 * h, 1, bound, rng);
    bs_ = params_.add_uniform("acsa.word_b", 1, 1, bound, rng);
    for (int c = 0; c < kAspectCount; ++c) {
      const std::string name = std::string(aspect_name(kAllAspects[static_cast<std::size_t>(c)]));
      AcdHead& head = acd_heads_[static_cast<std::size_t>(c)];
      head.wa = params_.add_uniform("acd." + name + ".wa", 2 * h, a, bound, rng);
      head.ba = params_.add_uniform("acd." + name + ".ba", 1, a, bound, rng);
      head.va = params_.add_uniform("acd." + name + ".va", a, 1, bound, rng);
      head.wd = params_.add_uniform("acd." + name + ".wd", 2 * h, 1, bound, rng);
      head.bd = params_.add_uniform("acd." + name + ".bd", 1, 1, bound, rng);
      if (aspect_has_sentiment(kAllAspects[static_cast<std::size_t>(c)])) {
        AcsaHead& sh = acsa_heads_[static_cast<std::size_t>(c)];
        sh.wa = params_.add_uniform("acsa." + name + ".wa", 2 * h, a, bound, rng);
        sh.ba = params_.add_uniform("acsa." + name + ".ba", 1, a, bound, rng);
        sh.va = params_.add_uniform("acsa." + name + ".va", a, 1, bound, rng);
      }
    }
  }

  nn::Vocab vocab_;
  TrainConfigAspect cfg_;
  std::string backbone_id_ = "bilstm";
  AspectTrainReport report_;
  nn::ParameterSet params_;
  nn::Parameter* embedding_ = nullptr;
  nn::BiLstmParams acd_lstm_;
  std::vector<nn::BiLstmParams> acsa_lstm_;
  nn::Parameter* ws_ = nullptr;
  nn::Parameter* bs_ = nullptr;
  std::array<AcdHead, kAspectCount> acd_heads_{};
  std::array<AcsaHead, kAspectCount> acsa_heads_{};
};

// ---- module operations ----

inline AspectPrediction predict_acd(const AspectSentimentModel& model,
                                    const ReviewComment& comment) {
  return model.predict(comment);
}

inline std::map<Aspect, double> predict_acsa(const AspectSentimentModel& model,
                                             const ReviewComment& comment,
                                             const std::set<Aspect>& aspects) {
  for (Aspect a : aspects)
    if (!aspect_has_sentiment(a)) throw SummaryAspectRequested(std::string(aspect_name(a)));
  auto ids = model.vocab().encode(comment.text);
  if (ids.empty()) throw EmptyAfterTokenization(comment.text);
  nn::Graph g(false, nullptr);
  auto f = model.forward(g, ids, 0.0);
  std::map<Aspect, double> out;
  for (Aspect a : aspects)
    out[a] = f.agg_sentiment[static_cast<std::size_t>(a)]->value(0, 0);
  return out;
}

inline std::vector<AspectLabel> label_comment(const AspectSentimentModel& model,
                                              const ReviewComment& comment) {
  AspectPrediction p = model.predict(comment);
  std::vector<AspectLabel> out;
  for (Aspect a : kAllAspects) {
    const auto c = static_cast<std::size_t>(a);
    if (p.detection[c] < model.config().detection_threshold) continue;
    if (!aspect_has_sentiment(a)) {
      out.push_back(make_label(a));
    } else {
      const double s = p.sentiment.at(a);
      out.push_back(make_label(a, s >= 0.5 ? Sentiment::Positive : Sentiment::Negative));
    }
  }
  return out;
}

struct AspectEvalReport {
  std::map<Aspect, double> detection_f1;
  std::map<Aspect, double> sentiment_f1;  // over comments where gold and pred both detect
  double macro_detection_f1 = 0.0;
  double macro_sentiment_f1 = 0.0;
  std::vector<std::string> warnings;
};

inline AspectEvalReport evaluate_aspect_model(const AspectSentimentModel& model,
                                              const std::vector<ReviewComment>& raw) {
  if (raw.empty()) throw EmptyInput("no test comments");
  AspectEvalReport rep;
  std::vector<ReviewComment> test;
  std::vector<std::vector<AspectLabel>> predicted;
  for (const auto& c : raw) {
    if (model.vocab().encode(c.text).empty()) {
      rep.warnings.push_back("comment '" + c.comment_id + "' tokenizes to nothing; skipped");
      continue;
    }
    test.push_back(c);
    predicted.push_back(label_comment(model, c));
  }
  if (test.empty()) throw EmptyInput("all test comments tokenize to nothing");

  double det_sum = 0.0;
  int det_n = 0;
  double sent_sum = 0.0;
  int sent_n = 0;
  for (Aspect a : kAllAspects) {
    std::size_t tp = 0, fp = 0, fn = 0;
    std::vector<int> sent_gold, sent_pred;
    for (std::size_t i = 0; i < test.size(); ++i) {
      const bool g = test[i].carries(a);
      bool p = false;
      std::optional<Sentiment> ps;
      for (const auto& l : predicted[i])
        if (l.aspect == a) {
          p = true;
          ps = l.sentiment;
        }
      if (g && p) {
        ++tp;
        if (aspect_has_sentiment(a)) {
          const auto gs = test[i].sentiment_for(a);
          if (gs && ps) {
            sent_gold.push_back(*gs == Sentiment::Positive ? 0 : 1);
            sent_pred.push_back(*ps == Sentiment::Positive ? 0 : 1);
          }
        }
      } else if (g) {
        ++fn;
      } else if (p) {
        ++fp;
      }
    }
    const double prec = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    const double rec = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    const double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
    if (tp + fn == 0 && tp + fp == 0) {
      rep.warnings.push_back("aspect '" + std::string(aspect_name(a)) +
                             "' absent from gold and predictions; excluded from macro");
    } else {
      rep.detection_f1[a] = f1;
      det_sum += f1;
      ++det_n;
    }
    if (aspect_has_sentiment(a)) {
      if (sent_gold.empty()) {
        rep.warnings.push_back("aspect '" + std::string(aspect_name(a)) +
                               "' has no jointly detected comments; sentiment F1 skipped");
      } else {
        auto m = compute_metrics(sent_gold, sent_pred, {"positive", "negative"});
        rep.sentiment_f1[a] = m.macro_f1;
        sent_sum += m.macro_f1;
        ++sent_n;
      }
    }
  }
  rep.macro_detection_f1 = det_n ? det_sum / det_n : 0.0;
  rep.macro_sentiment_f1 = sent_n ? sent_sum / sent_n : 0.0;
  return rep;
}

inline nlohmann::ordered_json aspect_eval_to_json(const AspectEvalReport& rep) {
  nlohmann::ordered_json j;
  j["detection_f1"] = nlohmann::ordered_json::object();
  for (const auto& [a, f1] : rep.detection_f1) j["detection_f1"][std::string(aspect_name(a))] = f1;
  j["sentiment_f1"] = nlohmann::ordered_json::object();
  for (const auto& [a, f1] : rep.sentiment_f1) j["sentiment_f1"][std::string(aspect_name(a))] = f1;
  j["macro_detection_f1"] = rep.macro_detection_f1;
  j["macro_sentiment_f1"] = rep.macro_sentiment_f1;
  j["warnings"] = rep.warnings;
  return j;
}

inline AspectSentimentModel train_aspect_model(const std::vector<ReviewComment>& train,
                                               const std::vector<ReviewComment>& validation,
                                               const TrainConfigAspect& config) {
  config.validate();
  if (train.empty()) throw EmptyTrainingSet("no training comments");
  for (const auto& c : train)
    if (!c.has_labels()) throw EmptyTrainingSet("training comment without gold labels: " + c.comment_id);

  std::vector<std::string> texts;
  for (const auto& c : train) texts.push_back(c.text);
  nn::Vocab vocab = nn::Vocab::build(texts);
  AspectSentimentModel model(std::move(vocab), config);

  // aspects with no positive training example are skipped with a warning
  std::array<std::size_t, kAspectCount> positives{};
  for (const auto& c : train)
    for (Aspect a : kAllAspects)
      if (c.carries(a)) ++positives[static_cast<std::size_t>(a)];
  std::array<bool, kAspectCount> active{};
  for (int ci = 0; ci < kAspectCount; ++ci) {
    active[static_cast<std::size_t>(ci)] = positives[static_cast<std::size_t>(ci)] > 0;
    if (!active[static_cast<std::size_t>(ci)])
      model.train_report().warnings.push_back(
          "aspect '" + std::string(aspect_name(kAllAspects[static_cast<std::size_t>(ci)])) +
          "' has no positive training examples; detection trained on negatives only");
  }

  nn::Adam::Options aopt;
  aopt.lr = config.learning_rate;
  aopt.weight_decay = config.weight_decay;
  nn::Adam adam(model.parameters(), aopt);
  Rng rng(config.seed + 1);

  auto sample_loss = [&](nn::Graph& g, const ReviewComment& c, double scale) {
    auto ids = model.vocab().encode(c.text);
    if (ids.empty()) return static_cast<nn::Node*>(nullptr);
    auto f = model.forward(g, ids, config.dropout);
    nn::Node* loss = nullptr;
    auto accumulate = [&](nn::Node* term) { loss = loss ? g.add(loss, term) : term; };
    for (Aspect a : kAllAspects) {
      const auto ci = static_cast<std::size_t>(a);
      const bool gold = c.carries(a);
      accumulate(g.bce_logit(f.det_logit[ci], gold ? 1.0 : 0.0));
      if (gold && aspect_has_sentiment(a)) {
        const auto s = c.sentiment_for(a);
        if (s) accumulate(g.bce_prob(f.agg_sentiment[ci], *s == Sentiment::Positive ? 1.0 : 0.0));
      }
    }
    return g.scale(loss, scale);
  };

  auto validation_f1 = [&](const std::vector<ReviewComment>& split) {
    const auto& probe = split.empty() ? train : split;
    try {
      return evaluate_aspect_model(model, probe).macro_detection_f1;
    } catch (const EmptyInput&) {
      return 0.0;
    }
  };

  std::vector<nn::Mat> best_values;
  double best_f1 = -1.0;
  auto snapshot = [&] {
    best_values.clear();
    for (nn::Parameter* p : model.parameters()) best_values.push_back(p->value);
  };
  snapshot();
  best_f1 = config.epochs > 0 ? validation_f1(validation) : 0.0;
  model.train_report().best_validation_f1 = best_f1;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t at = 0; at < order.size(); at += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(order.size(), at + static_cast<std::size_t>(config.batch_size));
      adam.zero_grad();
      bool any = false;
      for (std::size_t k = at; k < stop; ++k) {
        nn::Graph g(true, &rng);
        nn::Node* loss = sample_loss(g, train[order[k]], 1.0 / static_cast<double>(stop - at));
        if (!loss) continue;
        g.backward(loss);
        any = true;
      }
      if (any) adam.step();
    }
    const double f1 = validation_f1(validation);
    if (f1 > best_f1) {
      best_f1 = f1;
      snapshot();
      model.train_report().best_validation_f1 = best_f1;
    }
    model.train_report().epochs_run = epoch + 1;
  }

  if (config.epochs > 0) {
    auto params = model.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best_values[i];
  }
  return model;
}

}  // namespace revcon
