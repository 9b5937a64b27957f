// Review-pair generation, weak labeling and review-pair-comment compilation.
//
// A pair is a Candidate when some cross comment pair shares an aspect with
// opposite sentiments (Summary never counts: it carries no sentiment). RPCs
// are exactly those cross comment pairs, one per (comment_a, comment_b).
#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "revcon/errors.hpp"
#include "revcon/review.hpp"

namespace revcon {

// Aspects both comments carry with opposite sentiments.
inline std::set<Aspect> opposed_aspects(const ReviewComment& a, const ReviewComment& b) {
  std::set<Aspect> out;
  for (Aspect asp : kAllAspects) {
    if (!aspect_has_sentiment(asp)) continue;
    const auto sa = a.sentiment_for(asp);
    const auto sb = b.sentiment_for(asp);
    if (sa && sb && *sa == opposite(*sb)) out.insert(asp);
  }
  return out;
}

// All unordered review pairs of one paper, canonically ordered by review id.
inline std::vector<ReviewPair> generate_pairs(const Paper& paper) {
  std::vector<std::string> ids;
  ids.reserve(paper.reviews.size());
  for (const auto& r : paper.reviews) ids.push_back(r.review_id);
  std::sort(ids.begin(), ids.end());
  std::vector<ReviewPair> out;
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      ReviewPair p;
      p.review_a_id = ids[i];
      p.review_b_id = ids[j];
      p.pair_id = make_pair_id(p.review_a_id, p.review_b_id);
      out.push_back(std::move(p));
    }
  return out;
}

inline ReviewPair weak_label_pair(const ReviewPair& pair, const Corpus& corpus) {
  const Review* a = corpus.find_review(pair.review_a_id);
  const Review* b = corpus.find_review(pair.review_b_id);
  if (!a || !b) throw DataError("pair references unknown review: " + pair.pair_id);
  if (!a->is_labeled()) throw UnlabeledComments(a->review_id);
  if (!b->is_labeled()) throw UnlabeledComments(b->review_id);
  ReviewPair out = pair;
  out.weak_label = WeakLabel::NoContradiction;
  for (const auto& ca : a->comments) {
    for (const auto& cb : b->comments) {
      if (!opposed_aspects(ca, cb).empty()) {
        out.weak_label = WeakLabel::Candidate;
        return out;
      }
    }
  }
  return out;
}

inline std::vector<ReviewPairComment> compile_rpcs(const ReviewPair& pair,
                                                   const Corpus& corpus) {
  if (pair.weak_label != WeakLabel::Candidate) throw NotACandidate(pair.pair_id);
  const Review* a = corpus.find_review(pair.review_a_id);
  const Review* b = corpus.find_review(pair.review_b_id);
  if (!a || !b) throw DataError("pair references unknown review: " + pair.pair_id);
  std::vector<ReviewPairComment> out;
  for (std::size_t i = 0; i < a->comments.size(); ++i) {
    for (std::size_t j = 0; j < b->comments.size(); ++j) {
      auto shared = opposed_aspects(a->comments[i], b->comments[j]);
      if (shared.empty()) continue;
      ReviewPairComment rpc;
      rpc.rpc_id = make_rpc_id(pair.pair_id, i, j);
      rpc.pair_id = pair.pair_id;
      rpc.comment_a_id = a->comments[i].comment_id;
      rpc.comment_b_id = b->comments[j].comment_id;
      rpc.shared_opposed_aspects = std::move(shared);
      out.push_back(std::move(rpc));
    }
  }
  return out;
}

// Populates corpus.pairs and corpus.rpcs for every paper. Pairs whose
// reviews lack aspect labels keep weak_label unset instead of failing the
// whole corpus; they contribute no RPCs.
inline void build_pair_stage(Corpus& corpus) {
  // rpc_ids are stable functions of review/comment order, so gold labels
  // survive a rebuild; labels whose candidates disappear are dropped
  std::map<std::string, GoldLabel> gold;
  for (const auto& rpc : corpus.rpcs)
    if (rpc.gold_label) gold.emplace(rpc.rpc_id, *rpc.gold_label);
  corpus.pairs.clear();
  corpus.rpcs.clear();
  corpus.rebuild_index();
  for (const auto& [pid, paper] : corpus.papers) {
    for (ReviewPair& pair : generate_pairs(paper)) {
      const Review* a = corpus.find_review(pair.review_a_id);
      const Review* b = corpus.find_review(pair.review_b_id);
      if (a && b && a->is_labeled() && b->is_labeled()) {
        pair = weak_label_pair(pair, corpus);
        if (pair.weak_label == WeakLabel::Candidate)
          for (auto& rpc : compile_rpcs(pair, corpus)) corpus.rpcs.push_back(std::move(rpc));
      }
      corpus.pairs.push_back(std::move(pair));
    }
  }
  for (auto& rpc : corpus.rpcs) {
    auto it = gold.find(rpc.rpc_id);
    if (it != gold.end()) rpc.gold_label = it->second;
  }
  corpus.rebuild_index();
}

}  // namespace revcon
