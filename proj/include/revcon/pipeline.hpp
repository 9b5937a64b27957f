// End-to-end orchestration: reviews in, contradiction findings out, plus the
// per-paper report an editor would read. Staging per review pair: segment
// (when comments are missing) -> label comments -> extract SDAPs -> classify.
// Findings below the decision threshold stay in the JSON output (labelled
// non_contradiction) and are hidden by default in HTML.
#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "revcon/disagreement.hpp"
#include "revcon/llm.hpp"
#include "revcon/pairs.hpp"
#include "revcon/sdap.hpp"
#include "revcon/segment.hpp"
#include "revcon/version.hpp"

namespace revcon {

struct ContradictionFinding {
  std::string paper_id;
  std::string pair_id;
  std::string rpc_id;
  ReviewComment comment_a;  // text + span + id
  ReviewComment comment_b;
  std::set<Aspect> opposed_aspects;  // never empty
  double probability = 0.0;
  PairLabel label = PairLabel::NonContradiction;
};

struct PaperReport {
  std::string paper_id;
  std::string generated_at;
  nlohmann::ordered_json manifest;  // {aspect_ckpt, disagree_ckpt, thresholds}
  std::vector<ContradictionFinding> findings;  // sorted by descending probability
  std::size_t pairs_examined = 0;
  std::map<Aspect, std::size_t> contradictions_by_aspect;
  std::size_t contradiction_count = 0;
};

struct DetectOptions {
  bool symmetrize = false;
  std::string aspect_ckpt;    // recorded in the manifest only
  std::string disagree_ckpt;  // recorded in the manifest only
  std::string generated_at;   // empty = current UTC time
};

namespace detail {

inline void finalize_report(PaperReport& rep, const AspectSentimentModel* aspect,
                            const DisagreementModel& model, const DetectOptions& opts) {
  std::sort(rep.findings.begin(), rep.findings.end(),
            [](const ContradictionFinding& a, const ContradictionFinding& b) {
              if (a.probability != b.probability) return a.probability > b.probability;
              return a.rpc_id < b.rpc_id;
            });
  for (const auto& f : rep.findings) {
    if (f.label != PairLabel::Contradiction) continue;
    ++rep.contradiction_count;
    for (Aspect a : f.opposed_aspects) ++rep.contradictions_by_aspect[a];
  }
  rep.generated_at = opts.generated_at.empty() ? iso_utc_timestamp() : opts.generated_at;
  rep.manifest = {
      {"aspect_ckpt", opts.aspect_ckpt},
      {"disagree_ckpt", opts.disagree_ckpt},
      {"thresholds",
       {{"detection", aspect ? aspect->config().detection_threshold : 0.5},
        {"decision", model.config().threshold}}},
      {"symmetrize", opts.symmetrize},
      {"gold_aspect_labels", aspect == nullptr},
      {"version", kVersion}};
}

inline void collect_findings(PaperReport& rep, const std::string& paper_id, const Review& ra,
                             const Review& rb, const std::string& pair_id,
                             const AspectSentimentModel* aspect, const DisagreementModel& model,
                             const DetectOptions& opts) {
  for (const auto& sdap : extract_sdaps(ra, rb, aspect)) {
    ContradictionFinding f;
    f.paper_id = paper_id;
    f.pair_id = pair_id;
    f.rpc_id = detail::rpc_id_of(sdap);
    f.comment_a = sdap.comment_a;
    f.comment_b = sdap.comment_b;
    f.opposed_aspects = sdap.opposed_aspects;
    ContradictionPrediction p = predict(model, sdap, opts.symmetrize);
    f.probability = p.probability_contradiction;
    f.label = p.label;
    rep.findings.push_back(std::move(f));
  }
}

}  // namespace detail

// aspect == nullptr uses the gold labels already on the comments.
inline PaperReport detect(const Paper& input, const AspectSentimentModel* aspect,
                          const DisagreementModel& model, const DetectOptions& opts = {}) {
  if (input.reviews.size() < 2)
    throw TooFewReviews("paper '" + input.paper_id + "' has fewer than 2 reviews");
  Paper paper = input;
  for (auto& r : paper.reviews)
    if (r.comments.empty()) attach_segmented_comments(r, RuleSegmenter{});

  PaperReport rep;
  rep.paper_id = paper.paper_id;
  std::map<std::string, const Review*> by_id;
  for (const auto& r : paper.reviews) by_id[r.review_id] = &r;
  for (const auto& pair : generate_pairs(paper)) {
    ++rep.pairs_examined;
    try {
      detail::collect_findings(rep, paper.paper_id, *by_id.at(pair.review_a_id),
                               *by_id.at(pair.review_b_id), pair.pair_id, aspect, model, opts);
    } catch (const ModelError& e) {
      throw ModelError("pair '" + pair.pair_id + "': " + e.what());
    }
  }
  detail::finalize_report(rep, aspect, model, opts);
  return rep;
}

// Ad-hoc variant for two raw texts outside any corpus; identical staging.
inline std::vector<ContradictionFinding> detect_pair(const std::string& review_a,
                                                     const std::string& review_b,
                                                     const AspectSentimentModel& aspect,
                                                     const DisagreementModel& model,
                                                     const DetectOptions& opts = {}) {
  if (trim(review_a).empty()) throw EmptyText("first review is empty");
  if (trim(review_b).empty()) throw EmptyText("second review is empty");
  Review ra, rb;
  ra.review_id = "a";
  ra.raw_text = review_a;
  rb.review_id = "b";
  rb.raw_text = review_b;
  attach_segmented_comments(ra, RuleSegmenter{});
  attach_segmented_comments(rb, RuleSegmenter{});
  PaperReport rep;
  detail::collect_findings(rep, "", ra, rb, make_pair_id("a", "b"), &aspect, model, opts);
  std::sort(rep.findings.begin(), rep.findings.end(),
            [](const ContradictionFinding& a, const ContradictionFinding& b) {
              if (a.probability != b.probability) return a.probability > b.probability;
              return a.rpc_id < b.rpc_id;
            });
  return rep.findings;
}

// ---- rendering ----

inline nlohmann::ordered_json finding_to_json(const ContradictionFinding& f) {
  auto comment_json = [](const ReviewComment& c) {
    return nlohmann::ordered_json{
        {"id", c.comment_id}, {"text", c.text}, {"start", c.begin}, {"end", c.end}};
  };
  nlohmann::ordered_json aspects = nlohmann::ordered_json::array();
  for (Aspect a : f.opposed_aspects) aspects.push_back(std::string(aspect_name(a)));
  return nlohmann::ordered_json{{"pair_id", f.pair_id},
                                {"rpc_id", f.rpc_id},
                                {"comment_a", comment_json(f.comment_a)},
                                {"comment_b", comment_json(f.comment_b)},
                                {"opposed_aspects", aspects},
                                {"probability", f.probability},
                                {"label", std::string(pair_label_name(f.label))}};
}

inline nlohmann::ordered_json report_to_json(const PaperReport& rep) {
  nlohmann::ordered_json j;
  j["paper_id"] = rep.paper_id;
  j["generated_at"] = rep.generated_at;
  j["manifest"] = rep.manifest;
  j["findings"] = nlohmann::ordered_json::array();
  for (const auto& f : rep.findings) j["findings"].push_back(finding_to_json(f));
  nlohmann::ordered_json by_aspect = nlohmann::ordered_json::object();
  for (const auto& [a, n] : rep.contradictions_by_aspect)
    by_aspect[std::string(aspect_name(a))] = n;
  j["summary"] = {{"pairs_examined", rep.pairs_examined},
                  {"findings_total", rep.findings.size()},
                  {"contradictions", rep.contradiction_count},
                  {"by_aspect", by_aspect}};
  return j;
}

inline std::string report_to_text(const PaperReport& rep) {
  std::ostringstream out;
  out << "paper " << rep.paper_id << "  (" << rep.contradiction_count << " contradiction"
      << (rep.contradiction_count == 1 ? "" : "s") << " across " << rep.pairs_examined
      << " review pairs)\n";
  for (const auto& f : rep.findings) {
    out << "\n[" << pair_label_name(f.label) << "  p=" << f.probability << "]  " << f.rpc_id
        << "\n  aspects:";
    for (Aspect a : f.opposed_aspects) out << " " << aspect_name(a);
    out << "\n  A: " << f.comment_a.text << "\n  B: " << f.comment_b.text << "\n";
  }
  return out.str();
}

namespace detail {

inline std::string html_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

// Self-contained page. Below-threshold findings are present but hidden until
// the reader opens the "show non-contradictions" details block.
inline std::string report_to_html(const PaperReport& rep) {
  std::ostringstream out;
  out << "<!doctype html>\n<html><head><meta charset=\"utf-8\">\n<title>Review contradictions: "
      << detail::html_escape(rep.paper_id) << "</title>\n<style>\n"
      << "body{font-family:sans-serif;max-width:60em;margin:2em auto;padding:0 1em}\n"
      << ".finding{border:1px solid #ccc;border-radius:6px;padding:0.8em;margin:1em 0}\n"
      << ".finding mark{background:#ffe9a8}\n"
      << ".aspects{color:#555;font-size:0.9em}\n"
      << ".prob{float:right;font-weight:bold}\n"
      << "details{margin-top:2em}\n</style></head><body>\n"
      << "<h1>" << detail::html_escape(rep.paper_id) << "</h1>\n<p>" << rep.contradiction_count
      << " contradiction(s) across " << rep.pairs_examined << " review pair(s); generated "
      << detail::html_escape(rep.generated_at) << "</p>\n";
  auto emit = [&](const ContradictionFinding& f) {
    out << "<div class=\"finding\"><span class=\"prob\">p=" << f.probability << "</span>"
        << "<div class=\"aspects\">" << detail::html_escape(f.rpc_id) << " &middot;";
    for (Aspect a : f.opposed_aspects) out << " " << aspect_name(a);
    out << "</div>\n<p>A: <mark>" << detail::html_escape(f.comment_a.text) << "</mark></p>\n"
        << "<p>B: <mark>" << detail::html_escape(f.comment_b.text) << "</mark></p>\n</div>\n";
  };
  for (const auto& f : rep.findings)
    if (f.label == PairLabel::Contradiction) emit(f);
  out << "<details><summary>show non-contradictions</summary>\n";
  for (const auto& f : rep.findings)
    if (f.label != PairLabel::Contradiction) emit(f);
  out << "</details>\n</body></html>\n";
  return out.str();
}

inline std::string render_report(const PaperReport& rep, const std::string& format) {
  if (format == "json") return report_to_json(rep).dump(2) + "\n";
  if (format == "html") return report_to_html(rep);
  if (format == "text") return report_to_text(rep);
  throw DataError("unknown report format: '" + format + "'");
}

}  // namespace revcon
