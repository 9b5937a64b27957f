#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "revcon/rng.hpp"
#include "revcon/segment.hpp"

using namespace revcon;

TEST_CASE("two terminated sentences give two comments", "[segment]") {
  auto out = segment_review("The paper is clear. Results are weak.");
  REQUIRE(out.size() == 2);
  CHECK(out[0].text == "The paper is clear.");
  CHECK(out[1].text == "Results are weak.");
}

TEST_CASE("text without a terminator still yields one comment", "[segment]") {
  auto out = segment_review("Interesting idea");
  REQUIRE(out.size() == 1);
  CHECK(out[0].text == "Interesting idea");
}

TEST_CASE("blank input is rejected", "[segment]") {
  CHECK_THROWS_AS(segment_review(""), EmptyReview);
  CHECK_THROWS_AS(segment_review("   \n\t  "), EmptyReview);
}

// Gold segment counts were fixed by hand before the segmenter existed.
TEST_CASE("hand-annotated reviews segment to the gold counts", "[segment]") {
  const std::vector<std::pair<std::string, std::size_t>> gold = {
      {"The paper is clear. Results are weak.", 2},
      {"Interesting idea", 1},
      {"The method builds on Smith et al. and extends it.", 1},
      {"See Fig. 2 for details. The ablation is missing.", 2},
      {"Accuracy improves by 3.5 points. Impressive!", 2},
      {"Is the baseline tuned? I doubt it.", 2},
      {"e.g. the loss in Eq. 4 is unstable.", 1},
      {"1. The method is novel.\n2. The writing is poor.", 2},
      {"The idea is simple (see Sec. 3.2). It works well.", 2},
      {"Really?! The claim is unsupported...", 2},
      {"Strengths:\n- novel loss\n- strong results", 3},
      {"The proof of Thm. 2 is wrong. Please fix it.", 2},
      {"Dr. Smith's prior work is not cited. This is a problem.", 2},
      {"The dataset has 10k samples. 5k are synthetic.", 2},
      {"We thank the authors. However, concerns remain.", 2},
      {"Paragraph one.\n\nParagraph two without terminator", 2},
      {"The approach (cf. [12]) seems sound. More experiments needed.", 2},
      {"Novel? Yes. Useful? No.", 4},
      {"Results in Tab. 3 vs. Tab. 4 disagree. Clarify.", 2},
      {"i.e. the gradient vanishes. The fix: clip at 1.0.", 2},
  };
  for (const auto& [text, n] : gold) {
    INFO("text: " << text);
    CHECK(segment_review(text).size() == n);
  }
}

TEST_CASE("spans slice the raw text exactly and gaps are whitespace", "[segment]") {
  Rng rng(7);
  const std::vector<std::string> sentences = {
      "The model works well.", "Results are weak!",  "Why no baselines?",
      "See Fig. 3.",           "Smith et al. agree.", "Nice idea",
  };
  for (int iter = 0; iter < 200; ++iter) {
    std::string raw;
    const std::size_t n = 1 + rng.below(5);
    for (std::size_t i = 0; i < n; ++i) {
      raw += sentences[rng.below(sentences.size())];
      const std::size_t pad = 1 + rng.below(3);
      for (std::size_t p = 0; p < pad; ++p) raw += (rng.below(4) == 0 ? '\n' : ' ');
    }
    const auto out = segment_review(raw);
    std::size_t prev_end = 0;
    for (const auto& c : out) {
      REQUIRE(c.begin >= prev_end);
      REQUIRE(c.end <= raw.size());
      REQUIRE(c.begin < c.end);
      CHECK(raw.substr(c.begin, c.end - c.begin) == c.text);
      for (std::size_t k = prev_end; k < c.begin; ++k) CHECK(is_space(raw[k]));
      CHECK_FALSE(c.text.empty());
      prev_end = c.end;
    }
    for (std::size_t k = prev_end; k < raw.size(); ++k) CHECK(is_space(raw[k]));
  }
}

TEST_CASE("attach_segmented_comments assigns sequential comment ids", "[segment]") {
  Review r;
  r.review_id = "r9";
  r.raw_text = "First point. Second point.";
  attach_segmented_comments(r, RuleSegmenter{});
  REQUIRE(r.comments.size() == 2);
  CHECK(r.comments[0].comment_id == "r9#0");
  CHECK(r.comments[1].comment_id == "r9#1");
}
