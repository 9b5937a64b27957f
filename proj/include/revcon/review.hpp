// Core data model: papers, reviews, sentence-level comments, review pairs and
// the cross-review comment pairs that get annotated for contradiction.
// A Corpus is immutable after load; operations over it are pure functions.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "revcon/aspects.hpp"
#include "revcon/errors.hpp"

namespace revcon {

struct ReviewComment {
  std::string comment_id;
  std::string text;
  std::size_t begin = 0;  // char offsets into the parent review raw_text
  std::size_t end = 0;
  std::vector<AspectLabel> labels;  // at most one label per aspect

  bool has_labels() const { return !labels.empty(); }

  std::optional<Sentiment> sentiment_for(Aspect a) const {
    for (const auto& l : labels)
      if (l.aspect == a) return l.sentiment;
    return std::nullopt;
  }

  bool carries(Aspect a) const {
    for (const auto& l : labels)
      if (l.aspect == a) return true;
    return false;
  }
};

struct Review {
  std::string review_id;
  std::string paper_id;
  std::string reviewer_alias;
  std::string raw_text;
  std::vector<ReviewComment> comments;  // ordered by begin offset, non-overlapping

  // A review whose comments carry no aspect labels cannot be weak-labeled.
  bool is_labeled() const {
    for (const auto& c : comments)
      if (c.has_labels()) return true;
    return false;
  }
};

enum class Venue { ICLR, NeurIPS, Other };

inline std::string_view venue_name(Venue v) {
  switch (v) {
    case Venue::ICLR: return "ICLR";
    case Venue::NeurIPS: return "NeurIPS";
    case Venue::Other: return "Other";
  }
  return "Other";
}

inline Venue parse_venue(std::string_view name) {
  const std::string key = to_lower(trim(name));
  if (key == "iclr") return Venue::ICLR;
  if (key == "neurips" || key == "nips") return Venue::NeurIPS;
  return Venue::Other;
}

struct Paper {
  std::string paper_id;
  Venue venue = Venue::Other;
  int year = 0;
  std::string title;
  std::string abstract;
  std::vector<Review> reviews;
};

enum class WeakLabel { NoContradiction, Candidate };

inline std::string_view weak_label_name(WeakLabel w) {
  return w == WeakLabel::Candidate ? "candidate" : "no_contradiction";
}

// Unordered pair of reviews of one paper, stored canonically with
// review_a_id < review_b_id so (A,B) and (B,A) are the same pair.
struct ReviewPair {
  std::string pair_id;
  std::string review_a_id;
  std::string review_b_id;
  std::optional<WeakLabel> weak_label;
};

enum class GoldLabel { Contradiction, NonContradiction, CannotDecide };

inline std::string_view gold_label_token(GoldLabel g) {
  switch (g) {
    case GoldLabel::Contradiction: return "C";
    case GoldLabel::NonContradiction: return "N";
    case GoldLabel::CannotDecide: return "CNT";
  }
  return "?";
}

inline std::optional<GoldLabel> try_parse_gold_label(std::string_view token) {
  const std::string t = trim(token);
  if (t == "C") return GoldLabel::Contradiction;
  if (t == "N") return GoldLabel::NonContradiction;
  if (t == "CNT") return GoldLabel::CannotDecide;
  return std::nullopt;
}

// One comment from each side of a review pair, kept only when the two
// comments share at least one aspect with opposite sentiments.
struct ReviewPairComment {
  std::string rpc_id;
  std::string pair_id;
  std::string comment_a_id;
  std::string comment_b_id;
  std::set<Aspect> shared_opposed_aspects;
  std::optional<GoldLabel> gold_label;

  // CannotDecide rows stay in the corpus but never reach training/evaluation.
  bool excluded_from_training() const {
    return gold_label.has_value() && *gold_label == GoldLabel::CannotDecide;
  }
};

inline std::string make_comment_id(const std::string& review_id, std::size_t index) {
  return review_id + "#" + std::to_string(index);
}

inline std::string make_pair_id(const std::string& review_a_id, const std::string& review_b_id) {
  return review_a_id + "|" + review_b_id;
}

inline std::string make_rpc_id(const std::string& pair_id, std::size_t a_index,
                               std::size_t b_index) {
  return pair_id + "#" + std::to_string(a_index) + "." + std::to_string(b_index);
}

class Corpus {
public:
  std::map<std::string, Paper> papers;
  std::vector<ReviewPair> pairs;
  std::vector<ReviewPairComment> rpcs;

  void rebuild_index() {
    review_to_paper_.clear();
    pair_index_.clear();
    rpc_index_.clear();
    for (const auto& [pid, paper] : papers)
      for (const auto& r : paper.reviews) review_to_paper_[r.review_id] = pid;
    for (std::size_t i = 0; i < pairs.size(); ++i) pair_index_[pairs[i].pair_id] = i;
    for (std::size_t i = 0; i < rpcs.size(); ++i) rpc_index_[rpcs[i].rpc_id] = i;
  }

  const Paper* find_paper(const std::string& paper_id) const {
    auto it = papers.find(paper_id);
    return it == papers.end() ? nullptr : &it->second;
  }

  const Review* find_review(const std::string& review_id) const {
    auto it = review_to_paper_.find(review_id);
    if (it == review_to_paper_.end()) return nullptr;
    const Paper* p = find_paper(it->second);
    if (!p) return nullptr;
    for (const auto& r : p->reviews)
      if (r.review_id == review_id) return &r;
    return nullptr;
  }

  // Comment ids embed the review id: "<review_id>#<index>".
  const ReviewComment* find_comment(const std::string& comment_id) const {
    const auto pos = comment_id.rfind('#');
    if (pos == std::string::npos) return nullptr;
    const Review* r = find_review(comment_id.substr(0, pos));
    if (!r) return nullptr;
    for (const auto& c : r->comments)
      if (c.comment_id == comment_id) return &c;
    return nullptr;
  }

  const ReviewPair* find_pair(const std::string& pair_id) const {
    auto it = pair_index_.find(pair_id);
    return it == pair_index_.end() ? nullptr : &pairs[it->second];
  }

  const ReviewPairComment* find_rpc(const std::string& rpc_id) const {
    auto it = rpc_index_.find(rpc_id);
    return it == rpc_index_.end() ? nullptr : &rpcs[it->second];
  }

  const std::string* paper_of_review(const std::string& review_id) const {
    auto it = review_to_paper_.find(review_id);
    return it == review_to_paper_.end() ? nullptr : &it->second;
  }

  std::size_t review_count() const {
    std::size_t n = 0;
    for (const auto& [_, p] : papers) n += p.reviews.size();
    return n;
  }

private:
  std::unordered_map<std::string, std::string> review_to_paper_;
  std::unordered_map<std::string, std::size_t> pair_index_;
  std::unordered_map<std::string, std::size_t> rpc_index_;
};

}  // namespace revcon
