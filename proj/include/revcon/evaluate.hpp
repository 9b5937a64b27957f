// Two-stage end-to-end evaluation. Stage 1 scores pair_has_sdap with
// predicted labels against the gold weak labels. Stage 2 classifies the
// predicted SDAPs and matches them to gold RPCs by comment identity:
// a predicted SDAP without a gold counterpart scores against NonContradiction,
// and a gold Contradiction RPC that no predicted SDAP covers is a false
// negative that never reached the classifier.
#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "revcon/disagreement.hpp"
#include "revcon/metrics.hpp"
#include "revcon/sdap.hpp"

namespace revcon {

using PairClassifier = std::function<ContradictionPrediction(const SdapCandidate&)>;

inline PairClassifier classifier_from(const DisagreementModel& model, bool symmetrize = false) {
  return [&model, symmetrize](const SdapCandidate& c) { return predict(model, c, symmetrize); };
}

// Answers with the gold RPC label; unknown candidates get NonContradiction.
inline PairClassifier oracle_classifier(const Corpus& corpus) {
  return [&corpus](const SdapCandidate& c) {
    ContradictionPrediction out;
    out.rpc_id = detail::rpc_id_of(c);
    const ReviewPairComment* rpc = corpus.find_rpc(out.rpc_id);
    const bool hit =
        rpc && rpc->gold_label && *rpc->gold_label == GoldLabel::Contradiction;
    out.probability_contradiction = hit ? 1.0 : 0.0;
    out.label = hit ? PairLabel::Contradiction : PairLabel::NonContradiction;
    return out;
  };
}

struct E2eItem {
  std::string rpc_id;
  std::string pair_id;
  std::string comment_a_id;
  std::string comment_b_id;
  int gold = 0;  // 1 = contradiction
  int pred = 0;
  double probability = 0.0;  // contradiction probability
  bool propagated = false;   // the gold SDAP was never predicted
};

struct EndToEndReport {
  double sdap_detection_accuracy = 0.0;
  std::size_t pairs_evaluated = 0;
  MetricsReport disagreement_metrics;
  std::vector<E2eItem> items;
};

// aspect_labeler == nullptr evaluates with gold labels passed straight through.
inline EndToEndReport evaluate_end_to_end(const Corpus& corpus,
                                          const AspectSentimentModel* aspect_labeler,
                                          const PairClassifier& classify) {
  if (corpus.pairs.empty()) throw EmptyInput("corpus has no review pairs");
  EndToEndReport rep;
  std::size_t stage1_correct = 0;
  std::set<std::string> covered;

  for (const auto& pair : corpus.pairs) {
    if (!pair.weak_label)
      throw MissingGold("pair '" + pair.pair_id + "' has no gold weak label");
    const Review* ra = corpus.find_review(pair.review_a_id);
    const Review* rb = corpus.find_review(pair.review_b_id);
    if (!ra || !rb) throw DataError("pair '" + pair.pair_id + "' references missing reviews");

    auto sdaps = extract_sdaps(*ra, *rb, aspect_labeler);
    const bool predicted_candidate = !sdaps.empty();
    const bool gold_candidate = *pair.weak_label == WeakLabel::Candidate;
    if (predicted_candidate == gold_candidate) ++stage1_correct;

    for (const auto& sdap : sdaps) {
      E2eItem item;
      item.rpc_id = detail::rpc_id_of(sdap);
      item.pair_id = pair.pair_id;
      item.comment_a_id = sdap.comment_a.comment_id;
      item.comment_b_id = sdap.comment_b.comment_id;
      covered.insert(item.rpc_id);
      const ReviewPairComment* rpc = corpus.find_rpc(item.rpc_id);
      if (rpc && rpc->gold_label) {
        if (*rpc->gold_label == GoldLabel::CannotDecide) continue;
        item.gold = *rpc->gold_label == GoldLabel::Contradiction ? 1 : 0;
      } else {
        item.gold = 0;
      }
      ContradictionPrediction p = classify(sdap);
      item.pred = p.label == PairLabel::Contradiction ? 1 : 0;
      item.probability = p.probability_contradiction;
      rep.items.push_back(std::move(item));
    }
  }

  // gold contradictions the first stage never surfaced
  for (const auto& rpc : corpus.rpcs) {
    if (!rpc.gold_label || *rpc.gold_label != GoldLabel::Contradiction) continue;
    if (covered.count(rpc.rpc_id)) continue;
    E2eItem item;
    item.rpc_id = rpc.rpc_id;
    item.pair_id = rpc.pair_id;
    item.comment_a_id = rpc.comment_a_id;
    item.comment_b_id = rpc.comment_b_id;
    item.gold = 1;
    item.pred = 0;
    item.probability = 0.0;
    item.propagated = true;
    rep.items.push_back(std::move(item));
  }

  rep.pairs_evaluated = corpus.pairs.size();
  rep.sdap_detection_accuracy =
      static_cast<double>(stage1_correct) / static_cast<double>(corpus.pairs.size());
  if (!rep.items.empty()) {
    std::vector<int> gold, pred;
    for (const auto& it : rep.items) {
      gold.push_back(it.gold);
      pred.push_back(it.pred);
    }
    rep.disagreement_metrics =
        compute_metrics(gold, pred, {"non_contradiction", "contradiction"});
  }
  return rep;
}

inline EndToEndReport evaluate_end_to_end(const Corpus& corpus,
                                          const AspectSentimentModel* aspect_labeler,
                                          const DisagreementModel& model,
                                          bool symmetrize = false) {
  return evaluate_end_to_end(corpus, aspect_labeler, classifier_from(model, symmetrize));
}

// ---- Appendix-style error listing ----

struct ErrorEntry {
  std::string rpc_id;
  std::string pair_id;
  int gold = 0;
  int pred = 0;
  double probability = 0.0;
  double confidence = 0.0;  // of the wrong prediction
  std::vector<std::string> flags;  // LONG, PROPAGATED, OTHER
};

struct ErrorReportOptions {
  std::size_t long_token_threshold = 280;
};

inline std::vector<ErrorEntry> error_report(const EndToEndReport& report, const Corpus& corpus,
                                            const ErrorReportOptions& opts = {}) {
  std::vector<ErrorEntry> out;
  for (const auto& item : report.items) {
    if (item.gold == item.pred) continue;
    ErrorEntry e;
    e.rpc_id = item.rpc_id;
    e.pair_id = item.pair_id;
    e.gold = item.gold;
    e.pred = item.pred;
    e.probability = item.probability;
    e.confidence = item.pred == 1 ? item.probability : 1.0 - item.probability;
    bool is_long = false;
    for (const auto& cid : {item.comment_a_id, item.comment_b_id}) {
      const ReviewComment* c = corpus.find_comment(cid);
      if (c && nn::word_tokenize(c->text).size() > opts.long_token_threshold) is_long = true;
    }
    if (is_long) e.flags.push_back("LONG");
    if (item.propagated) e.flags.push_back("PROPAGATED");
    if (e.flags.empty()) e.flags.push_back("OTHER");
    out.push_back(std::move(e));
  }
  std::sort(out.begin(), out.end(), [](const ErrorEntry& a, const ErrorEntry& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    return a.rpc_id < b.rpc_id;
  });
  return out;
}

inline nlohmann::ordered_json e2e_to_json(const EndToEndReport& rep) {
  nlohmann::ordered_json j;
  j["sdap_detection_accuracy"] = rep.sdap_detection_accuracy;
  j["pairs_evaluated"] = rep.pairs_evaluated;
  j["disagreement"] = rep.items.empty() ? nlohmann::ordered_json(nullptr)
                                        : metrics_to_json(rep.disagreement_metrics);
  j["items"] = nlohmann::ordered_json::array();
  for (const auto& it : rep.items) {
    j["items"].push_back({{"rpc_id", it.rpc_id},
                          {"pair_id", it.pair_id},
                          {"gold", it.gold},
                          {"pred", it.pred},
                          {"prob", it.probability},
                          {"propagated", it.propagated}});
  }
  return j;
}

inline nlohmann::ordered_json error_report_to_json(const std::vector<ErrorEntry>& entries) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    arr.push_back({{"rpc_id", e.rpc_id},
                   {"pair_id", e.pair_id},
                   {"gold", e.gold},
                   {"pred", e.pred},
                   {"prob", e.probability},
                   {"confidence", e.confidence},
                   {"flags", e.flags}});
  }
  return arr;
}

// Every gold-labeled comment in the corpus, in deterministic paper order.
inline std::vector<ReviewComment> labeled_comments(const Corpus& corpus) {
  std::vector<ReviewComment> out;
  for (const auto& [pid, paper] : corpus.papers)
    for (const auto& r : paper.reviews)
      for (const auto& c : r.comments)
        if (c.has_labels()) out.push_back(c);
  return out;
}

}  // namespace revcon
