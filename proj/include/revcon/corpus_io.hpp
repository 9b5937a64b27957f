// Corpus serialization. Two read formats:
//   asap_jsonl: one paper record per line
//   plain_dir:  directory of *.json files, one paper record each, read in
//               sorted filename order
//
// Record schema: {paper_id, venue, year, title, abstract, reviews:[
//   {review_id, reviewer_alias, text, comments?:[{text, start, end,
//    labels?:[{aspect, sentiment?}]}]}]}
// plus an optional "gold" array of {rpc_id, label} the writer emits once
// annotations exist; reading it regenerates pairs/RPCs and reattaches labels.
#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "revcon/errors.hpp"
#include "revcon/pairs.hpp"
#include "revcon/review.hpp"
#include "revcon/segment.hpp"

namespace revcon {

enum class CorpusFormat { AsapJsonl, PlainDir };

struct LoadOptions {
  bool segment_missing = true;  // auto-segment reviews that arrive without comments
};

namespace detail {

using Json = nlohmann::ordered_json;

inline const Json& need_field(const Json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end()) throw MalformedRecord(line, std::string("missing field '") + key + "'");
  return *it;
}

inline std::string need_string(const Json& j, const char* key, std::size_t line) {
  const Json& v = need_field(j, key, line);
  if (!v.is_string()) throw MalformedRecord(line, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

inline long need_int(const Json& j, const char* key, std::size_t line) {
  const Json& v = need_field(j, key, line);
  if (!v.is_number_integer()) throw MalformedRecord(line, std::string("field '") + key + "' must be an integer");
  return v.get<long>();
}

inline AspectLabel parse_label_json(const Json& j, std::size_t line) {
  if (!j.is_object()) throw MalformedRecord(line, "label must be an object");
  const std::string aspect_str = need_string(j, "aspect", line);
  const auto aspect = try_parse_aspect(aspect_str);
  if (!aspect) throw UnknownAspectName(aspect_str);
  AspectLabel label;
  label.aspect = *aspect;
  auto it = j.find("sentiment");
  if (it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw MalformedRecord(line, "label sentiment must be a string");
    const auto s = try_parse_sentiment(it->get<std::string>());
    if (!s) throw MalformedRecord(line, "unknown sentiment '" + it->get<std::string>() + "'");
    label.sentiment = *s;
  }
  if (!label.valid()) {
    throw MalformedRecord(line, aspect_has_sentiment(label.aspect)
                                    ? "label for '" + std::string(aspect_name(label.aspect)) + "' requires a sentiment"
                                    : "summary labels carry no sentiment");
  }
  return label;
}

inline ReviewComment parse_comment_json(const Json& j, const std::string& raw_text,
                                        std::size_t line) {
  if (!j.is_object()) throw MalformedRecord(line, "comment must be an object");
  ReviewComment c;
  c.text = need_string(j, "text", line);
  const long start = need_int(j, "start", line);
  const long end = need_int(j, "end", line);
  if (start < 0 || end < start || static_cast<std::size_t>(end) > raw_text.size())
    throw MalformedRecord(line, "comment span out of range");
  c.begin = static_cast<std::size_t>(start);
  c.end = static_cast<std::size_t>(end);
  if (raw_text.substr(c.begin, c.end - c.begin) != c.text)
    throw MalformedRecord(line, "comment text does not match its span");
  if (c.text.empty()) throw MalformedRecord(line, "comment text is empty");
  if (auto it = j.find("labels"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw MalformedRecord(line, "labels must be an array");
    std::set<Aspect> seen;
    for (const auto& lj : *it) {
      AspectLabel label = parse_label_json(lj, line);
      if (!seen.insert(label.aspect).second)
        throw MalformedRecord(line, "duplicate aspect label on one comment");
      c.labels.push_back(label);
    }
  }
  return c;
}

inline Paper parse_paper_record(const Json& rec, std::size_t line,
                                std::vector<std::pair<std::string, GoldLabel>>* gold_out) {
  if (!rec.is_object()) throw MalformedRecord(line, "record must be a JSON object");
  Paper p;
  p.paper_id = need_string(rec, "paper_id", line);
  if (p.paper_id.empty()) throw MalformedRecord(line, "paper_id is empty");
  p.venue = parse_venue(need_string(rec, "venue", line));
  p.year = static_cast<int>(need_int(rec, "year", line));
  p.title = need_string(rec, "title", line);
  p.abstract = need_string(rec, "abstract", line);

  const Json& reviews = need_field(rec, "reviews", line);
  if (!reviews.is_array()) throw MalformedRecord(line, "field 'reviews' must be an array");
  for (const auto& rj : reviews) {
    if (!rj.is_object()) throw MalformedRecord(line, "review must be an object");
    Review r;
    r.review_id = need_string(rj, "review_id", line);
    if (r.review_id.empty()) throw MalformedRecord(line, "review_id is empty");
    if (r.review_id.find('|') != std::string::npos || r.review_id.find('#') != std::string::npos)
      throw MalformedRecord(line, "review_id must not contain '|' or '#'");
    r.paper_id = p.paper_id;
    r.reviewer_alias = need_string(rj, "reviewer_alias", line);
    r.raw_text = need_string(rj, "text", line);
    if (auto it = rj.find("comments"); it != rj.end() && !it->is_null()) {
      if (!it->is_array()) throw MalformedRecord(line, "comments must be an array");
      for (const auto& cj : *it) r.comments.push_back(parse_comment_json(cj, r.raw_text, line));
      std::sort(r.comments.begin(), r.comments.end(),
                [](const ReviewComment& a, const ReviewComment& b) { return a.begin < b.begin; });
      for (std::size_t i = 1; i < r.comments.size(); ++i)
        if (r.comments[i].begin < r.comments[i - 1].end)
          throw MalformedRecord(line, "overlapping comment spans");
      for (std::size_t i = 0; i < r.comments.size(); ++i)
        r.comments[i].comment_id = make_comment_id(r.review_id, i);
    }
    p.reviews.push_back(std::move(r));
  }

  if (gold_out) {
    if (auto it = rec.find("gold"); it != rec.end() && !it->is_null()) {
      if (!it->is_array()) throw MalformedRecord(line, "field 'gold' must be an array");
      for (const auto& gj : *it) {
        const std::string rpc_id = need_string(gj, "rpc_id", line);
        const std::string token = need_string(gj, "label", line);
        const auto label = try_parse_gold_label(token);
        if (!label) throw BadLabelToken(token);
        gold_out->emplace_back(rpc_id, *label);
      }
    }
  }
  return p;
}

}  // namespace detail

inline Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format,
                          const LoadOptions& opts = {}) {
  namespace fs = std::filesystem;
  if (!fs::exists(path)) throw DataError("no such path: " + path.string());

  // (record json, line number, source tag for plain_dir diagnostics)
  std::vector<std::tuple<detail::Json, std::size_t, std::string>> records;
  auto parse_text = [](const std::string& text, std::size_t line, const std::string& src) {
    detail::Json j = detail::Json::parse(text, nullptr, false);
    if (j.is_discarded())
      throw MalformedRecord(line, src.empty() ? "invalid JSON" : src + ": invalid JSON");
    return j;
  };

  if (format == CorpusFormat::AsapJsonl) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path.string());
    std::string line_text;
    std::size_t line = 0;
    while (std::getline(in, line_text)) {
      ++line;
      if (is_blank(line_text)) continue;
      records.emplace_back(parse_text(line_text, line, ""), line, "");
    }
  } else {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(path))
      if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      std::ifstream in(f);
      std::stringstream ss;
      ss << in.rdbuf();
      records.emplace_back(parse_text(ss.str(), 1, f.filename().string()), 1,
                           f.filename().string());
    }
  }

  Corpus corpus;
  std::unordered_set<std::string> review_ids;
  std::vector<std::pair<std::string, GoldLabel>> gold;
  for (auto& [rec, line, src] : records) {
    Paper p = detail::parse_paper_record(rec, line, &gold);
    if (corpus.papers.count(p.paper_id)) throw DuplicateId("paper " + p.paper_id);
    for (const auto& r : p.reviews)
      if (!review_ids.insert(r.review_id).second) throw DuplicateId("review " + r.review_id);
    corpus.papers.emplace(p.paper_id, std::move(p));
  }

  if (opts.segment_missing) {
    const RuleSegmenter seg;
    for (auto& [pid, paper] : corpus.papers)
      for (auto& r : paper.reviews)
        if (r.comments.empty() && !is_blank(r.raw_text)) attach_segmented_comments(r, seg);
  }
  corpus.rebuild_index();

  if (!gold.empty()) {
    build_pair_stage(corpus);
    std::map<std::string, GoldLabel> by_id;
    for (auto& [rpc_id, label] : gold) {
      auto [it, inserted] = by_id.emplace(rpc_id, label);
      if (!inserted && it->second != label) throw ConflictingLabels(rpc_id);
    }
    std::unordered_set<std::string> matched;
    for (auto& rpc : corpus.rpcs) {
      auto it = by_id.find(rpc.rpc_id);
      if (it != by_id.end()) {
        rpc.gold_label = it->second;
        matched.insert(it->first);
      }
    }
    for (const auto& [rpc_id, label] : by_id)
      if (!matched.count(rpc_id)) throw UnknownRpcId(rpc_id);
  }
  return corpus;
}

inline Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& opts = {}) {
  const CorpusFormat fmt = std::filesystem::is_directory(path) ? CorpusFormat::PlainDir
                                                               : CorpusFormat::AsapJsonl;
  return load_corpus(path, fmt, opts);
}

inline detail::Json paper_to_json(const Paper& p, const Corpus& corpus) {
  detail::Json rec;
  rec["paper_id"] = p.paper_id;
  rec["venue"] = std::string(venue_name(p.venue));
  rec["year"] = p.year;
  rec["title"] = p.title;
  rec["abstract"] = p.abstract;
  rec["reviews"] = detail::Json::array();
  for (const auto& r : p.reviews) {
    detail::Json rj;
    rj["review_id"] = r.review_id;
    rj["reviewer_alias"] = r.reviewer_alias;
    rj["text"] = r.raw_text;
    if (!r.comments.empty()) {
      rj["comments"] = detail::Json::array();
      for (const auto& c : r.comments) {
        detail::Json cj;
        cj["text"] = c.text;
        cj["start"] = c.begin;
        cj["end"] = c.end;
        cj["labels"] = detail::Json::array();
        for (const auto& l : c.labels) {
          detail::Json lj;
          lj["aspect"] = std::string(aspect_name(l.aspect));
          if (l.sentiment) lj["sentiment"] = std::string(sentiment_name(*l.sentiment));
          else lj["sentiment"] = nullptr;
          cj["labels"].push_back(std::move(lj));
        }
        rj["comments"].push_back(std::move(cj));
      }
    }
    rec["reviews"].push_back(std::move(rj));
  }
  detail::Json gold = detail::Json::array();
  for (const auto& rpc : corpus.rpcs) {
    if (!rpc.gold_label) continue;
    const std::string* pid = corpus.paper_of_review(rpc.pair_id.substr(0, rpc.pair_id.find('|')));
    if (pid && *pid == p.paper_id)
      gold.push_back({{"rpc_id", rpc.rpc_id},
                      {"label", std::string(gold_label_token(*rpc.gold_label))}});
  }
  if (!gold.empty()) rec["gold"] = std::move(gold);
  return rec;
}

inline void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write: " + path.string());
  for (const auto& [pid, p] : corpus.papers) out << paper_to_json(p, corpus).dump() << "\n";
}

}  // namespace revcon
