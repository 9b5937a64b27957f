// Rule-based sentence segmentation for review text.
//
// A comment boundary is a run of [.?!] (optionally followed by closing
// quotes/brackets) that is followed by whitespace, except when the '.' is
// guarded: preceding token in the abbreviation list, a single letter
// (initials, "e.g."), or a line-initial number (list marker). Blank lines
// and bullet markers also separate comments. Spans are trimmed, so the gaps
// between consecutive spans contain only whitespace and the original text is
// recoverable from the spans.
#pragma once

#include <algorithm>
#include <cctype>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "revcon/errors.hpp"
#include "revcon/review.hpp"
#include "revcon/strings.hpp"

namespace revcon {

class Segmenter {
public:
  virtual ~Segmenter() = default;
  virtual std::vector<ReviewComment> segment(std::string_view raw_text) const = 0;
};

class RuleSegmenter final : public Segmenter {
public:
  struct Options {
    std::set<std::string> abbreviations = default_abbreviations();
  };

  RuleSegmenter() = default;
  explicit RuleSegmenter(Options opts) : opts_(std::move(opts)) {}

  static std::set<std::string> default_abbreviations() {
    return {"al",   "et",   "etc", "fig",  "figs", "eq",   "eqs", "sec",
            "sect", "tab",  "ref", "refs", "alg",  "thm",  "lem", "prop",
            "def",  "cf",   "vs",  "resp", "approx", "incl", "ca",  "dr",
            "mr",   "ms",   "mrs", "prof", "st",   "no",   "nos", "vol",
            "app",  "ch",   "pp",  "eg",   "ie"};
  }

  std::vector<ReviewComment> segment(std::string_view raw) const override {
    if (is_blank(raw)) throw EmptyReview("review text is empty");

    std::vector<std::size_t> cuts;  // positions where a new comment starts
    const std::size_t n = raw.size();
    std::size_t i = 0;
    while (i < n) {
      const char c = raw[i];
      if (c == '.' || c == '?' || c == '!') {
        std::size_t j = i;
        bool has_period_only = true;
        while (j < n && (raw[j] == '.' || raw[j] == '?' || raw[j] == '!')) {
          if (raw[j] != '.') has_period_only = false;
          ++j;
        }
        // closing quotes / brackets stay with the sentence
        while (j < n && (raw[j] == '"' || raw[j] == '\'' || raw[j] == ')' ||
                         raw[j] == ']' || raw[j] == '}'))
          ++j;
        const bool at_break = j >= n || is_space(raw[j]);
        if (at_break && !(has_period_only && guarded(raw, i))) {
          std::size_t next = j;
          while (next < n && is_space(raw[next])) ++next;
          if (next < n) cuts.push_back(next);
        }
        i = j;
        continue;
      }
      if (c == '\n') {
        std::size_t j = i + 1;
        std::size_t newlines = 1;
        while (j < n && is_space(raw[j])) {
          if (raw[j] == '\n') ++newlines;
          ++j;
        }
        const bool bullet = j < n && (raw[j] == '-' || raw[j] == '*' || raw[j] == '+' ||
                                      static_cast<unsigned char>(raw[j]) > 0x7f);
        if (j < n && (newlines >= 2 || bullet)) cuts.push_back(j);
        i = j;
        continue;
      }
      ++i;
    }

    std::vector<ReviewComment> out;
    std::size_t start = 0;
    auto emit = [&](std::size_t from, std::size_t to) {
      while (from < to && is_space(raw[from])) ++from;
      while (to > from && is_space(raw[to - 1])) --to;
      if (from >= to) return;
      ReviewComment c;
      c.begin = from;
      c.end = to;
      c.text = std::string(raw.substr(from, to - from));
      out.push_back(std::move(c));
    };
    for (std::size_t cut : cuts) {
      if (cut > start) emit(start, cut);
      start = cut;
    }
    emit(start, n);
    if (out.empty()) throw EmptyReview("review text is empty");
    return out;
  }

private:
  // True when the '.' at position `dot` must not end a sentence.
  bool guarded(std::string_view raw, std::size_t dot) const {
    std::size_t e = dot;
    std::size_t b = e;
    while (b > 0 && (std::isalnum(static_cast<unsigned char>(raw[b - 1])) != 0)) --b;
    if (b == e) return false;  // terminator not attached to a token ("..", " .")
    std::string token = to_lower(raw.substr(b, e - b));

    const bool all_alpha =
        std::all_of(token.begin(), token.end(),
                    [](unsigned char ch) { return std::isalpha(ch) != 0; });
    const bool all_digit =
        std::all_of(token.begin(), token.end(),
                    [](unsigned char ch) { return std::isdigit(ch) != 0; });

    if (all_alpha && token.size() == 1) return true;  // initials, "e.g."
    if (all_alpha && opts_.abbreviations.count(token) > 0) return true;
    if (all_digit) {
      // line-initial number = list marker ("1. The method ...")
      std::size_t k = b;
      while (k > 0 && raw[k - 1] != '\n' && is_space(raw[k - 1])) --k;
      if (k == 0 || raw[k - 1] == '\n') return true;
    }
    return false;
  }

  Options opts_;
};

inline std::vector<ReviewComment> segment_review(std::string_view raw_text) {
  static const RuleSegmenter seg;
  return seg.segment(raw_text);
}

// Segments raw text and assigns comment ids for the given review.
inline void attach_segmented_comments(Review& review, const Segmenter& seg) {
  review.comments = seg.segment(review.raw_text);
  for (std::size_t i = 0; i < review.comments.size(); ++i)
    review.comments[i].comment_id = make_comment_id(review.review_id, i);
}

}  // namespace revcon
