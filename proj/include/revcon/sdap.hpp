// Sentiment Disparity Aspect Pair extraction. Two comments form an SDAP when
// they share at least one sentiment-bearing aspect with opposite sentiments
// (the "aspect same, sentiment opposite" test). Labels come either from gold
// annotation or from an aspect model.
#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "revcon/aspect_model.hpp"
#include "revcon/errors.hpp"
#include "revcon/review.hpp"

namespace revcon {

enum class LabelSource { Gold, Predicted };

struct SdapCandidate {
  ReviewComment comment_a;
  ReviewComment comment_b;
  std::set<Aspect> opposed_aspects;  // never empty, never contains Summary
  LabelSource label_source = LabelSource::Gold;
};

// Aspects present in both label sets with opposite sentiments. Symmetric.
inline std::pair<bool, std::set<Aspect>> is_asop(const std::vector<AspectLabel>& labels_a,
                                                 const std::vector<AspectLabel>& labels_b) {
  std::set<Aspect> opposed;
  for (const auto& la : labels_a) {
    if (!aspect_has_sentiment(la.aspect) || !la.sentiment) continue;
    for (const auto& lb : labels_b) {
      if (lb.aspect != la.aspect || !lb.sentiment) continue;
      if (*lb.sentiment == opposite(*la.sentiment)) opposed.insert(la.aspect);
    }
  }
  return {!opposed.empty(), opposed};
}

namespace detail {

// Gold mode requires a labeled review; predicted mode labels every comment,
// treating text that tokenizes to nothing as carrying no aspects.
inline std::vector<std::vector<AspectLabel>> labels_for(const Review& r,
                                                        const AspectSentimentModel* labeler) {
  std::vector<std::vector<AspectLabel>> out;
  if (labeler == nullptr) {
    if (!r.is_labeled())
      throw MissingLabels("review '" + r.review_id + "' has no gold aspect labels");
    for (const auto& c : r.comments) out.push_back(c.labels);
  } else {
    for (const auto& c : r.comments) {
      try {
        out.push_back(label_comment(*labeler, c));
      } catch (const EmptyAfterTokenization&) {
        out.emplace_back();
      }
    }
  }
  return out;
}

}  // namespace detail

inline std::vector<SdapCandidate> extract_sdaps(const Review& review_a, const Review& review_b,
                                                const AspectSentimentModel* labeler = nullptr) {
  const auto labels_a = detail::labels_for(review_a, labeler);
  const auto labels_b = detail::labels_for(review_b, labeler);
  std::vector<SdapCandidate> out;
  for (std::size_t i = 0; i < review_a.comments.size(); ++i) {
    for (std::size_t j = 0; j < review_b.comments.size(); ++j) {
      auto [hit, aspects] = is_asop(labels_a[i], labels_b[j]);
      if (!hit) continue;
      out.push_back(SdapCandidate{review_a.comments[i], review_b.comments[j], std::move(aspects),
                                  labeler ? LabelSource::Predicted : LabelSource::Gold});
    }
  }
  return out;
}

inline bool pair_has_sdap(const Review& review_a, const Review& review_b,
                          const AspectSentimentModel* labeler = nullptr) {
  return !extract_sdaps(review_a, review_b, labeler).empty();
}

}  // namespace revcon
