// Dataset statistics: per-venue paper/review/pair counts plus per-aspect
// counts of review pair comments split by gold label. Pair counts fall back
// to C(n,2) per paper when pairs have not been generated yet, so `stats`
// works on a freshly ingested corpus.
#pragma once

#include <cstddef>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "revcon/review.hpp"

namespace revcon {

struct VenueCounts {
  std::size_t papers = 0;
  std::size_t reviews = 0;
  std::size_t pairs = 0;
};

struct AspectGoldCounts {
  std::size_t contradiction = 0;
  std::size_t non_contradiction = 0;
  std::size_t cannot_decide = 0;
  std::size_t unlabeled = 0;

  std::size_t total() const {
    return contradiction + non_contradiction + cannot_decide + unlabeled;
  }
};

struct StatsTable {
  std::map<std::string, VenueCounts> by_venue;   // keyed by venue name
  VenueCounts total;                             // sums of the venue rows
  std::map<std::string, AspectGoldCounts> rpcs_by_aspect;
  std::size_t rpc_total = 0;
  std::size_t candidate_pairs = 0;
  std::size_t no_contradiction_pairs = 0;
};

inline StatsTable corpus_stats(const Corpus& corpus) {
  StatsTable t;
  const bool pairs_built = !corpus.pairs.empty();

  std::map<std::string, std::size_t> pairs_by_paper;
  if (pairs_built) {
    for (const auto& pair : corpus.pairs) {
      const std::string* pid = corpus.paper_of_review(pair.review_a_id);
      if (pid) ++pairs_by_paper[*pid];
      if (pair.weak_label) {
        if (*pair.weak_label == WeakLabel::Candidate) ++t.candidate_pairs;
        else ++t.no_contradiction_pairs;
      }
    }
  }

  for (const auto& [pid, paper] : corpus.papers) {
    VenueCounts& v = t.by_venue[std::string(venue_name(paper.venue))];
    v.papers += 1;
    v.reviews += paper.reviews.size();
    const std::size_t n = paper.reviews.size();
    v.pairs += pairs_built ? pairs_by_paper[pid] : n * (n - 1) / 2;
  }
  for (const auto& [name, v] : t.by_venue) {
    t.total.papers += v.papers;
    t.total.reviews += v.reviews;
    t.total.pairs += v.pairs;
  }

  t.rpc_total = corpus.rpcs.size();
  for (const auto& rpc : corpus.rpcs) {
    for (Aspect a : rpc.shared_opposed_aspects) {
      AspectGoldCounts& c = t.rpcs_by_aspect[std::string(aspect_name(a))];
      if (!rpc.gold_label) ++c.unlabeled;
      else if (*rpc.gold_label == GoldLabel::Contradiction) ++c.contradiction;
      else if (*rpc.gold_label == GoldLabel::NonContradiction) ++c.non_contradiction;
      else ++c.cannot_decide;
    }
  }
  return t;
}

inline nlohmann::ordered_json stats_to_json(const StatsTable& t) {
  nlohmann::ordered_json j;
  auto venue_row = [](const VenueCounts& v) {
    return nlohmann::ordered_json{{"papers", v.papers}, {"reviews", v.reviews}, {"pairs", v.pairs}};
  };
  j["venues"] = nlohmann::ordered_json::object();
  for (const auto& [name, v] : t.by_venue) j["venues"][name] = venue_row(v);
  j["total"] = venue_row(t.total);
  j["candidate_pairs"] = t.candidate_pairs;
  j["no_contradiction_pairs"] = t.no_contradiction_pairs;
  j["rpc_total"] = t.rpc_total;
  j["rpcs_by_aspect"] = nlohmann::ordered_json::object();
  for (const auto& [name, c] : t.rpcs_by_aspect)
    j["rpcs_by_aspect"][name] = {{"contradiction", c.contradiction},
                                 {"non_contradiction", c.non_contradiction},
                                 {"cannot_decide", c.cannot_decide},
                                 {"unlabeled", c.unlabeled}};
  return j;
}

}  // namespace revcon
