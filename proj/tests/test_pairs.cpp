#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "helpers.hpp"
#include "revcon/pairs.hpp"

using namespace revcon;
using namespace revcon::testing;

static Review labeled_review(const std::string& id, const std::string& pid,
                             std::vector<AspectLabel> labels) {
  return make_review(id, pid, {{"Some comment text.", std::move(labels)}});
}

TEST_CASE("pair count is n choose 2 with canonical unique ordering", "[pairs]") {
  for (std::size_t n = 0; n <= 10; ++n) {
    std::vector<Review> reviews;
    for (std::size_t i = 0; i < n; ++i)
      reviews.push_back(labeled_review("r" + std::to_string(i), "p", {}));
    Paper paper = make_paper("p", Venue::ICLR, std::move(reviews));
    auto pairs = generate_pairs(paper);
    CHECK(pairs.size() == n * (n - 1) / 2);
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& pr : pairs) {
      CHECK(pr.review_a_id < pr.review_b_id);
      CHECK(pr.pair_id == pr.review_a_id + "|" + pr.review_b_id);
      CHECK(seen.insert({pr.review_a_id, pr.review_b_id}).second);
      CHECK_FALSE(pr.weak_label.has_value());
    }
  }
}

TEST_CASE("opposite sentiments on a shared aspect make a Candidate", "[pairs]") {
  Corpus c = make_corpus({make_paper(
      "p", Venue::ICLR,
      {labeled_review("r1", "p", {make_label(Aspect::Soundness, Sentiment::Positive)}),
       labeled_review("r2", "p", {make_label(Aspect::Soundness, Sentiment::Negative)})})});
  auto pairs = generate_pairs(c.papers.at("p"));
  REQUIRE(pairs.size() == 1);
  auto labeled = weak_label_pair(pairs[0], c);
  CHECK(labeled.weak_label == WeakLabel::Candidate);
}

TEST_CASE("agreeing sentiments give NoContradiction", "[pairs]") {
  Corpus c = make_corpus({make_paper(
      "p", Venue::ICLR,
      {labeled_review("r1", "p", {make_label(Aspect::Clarity, Sentiment::Positive)}),
       labeled_review("r2", "p", {make_label(Aspect::Clarity, Sentiment::Positive)})})});
  auto labeled = weak_label_pair(generate_pairs(c.papers.at("p"))[0], c);
  CHECK(labeled.weak_label == WeakLabel::NoContradiction);
}

TEST_CASE("summary labels never oppose", "[pairs]") {
  Corpus c = make_corpus({make_paper(
      "p", Venue::ICLR,
      {labeled_review("r1", "p", {make_label(Aspect::Summary)}),
       labeled_review("r2", "p", {make_label(Aspect::Summary)})})});
  auto labeled = weak_label_pair(generate_pairs(c.papers.at("p"))[0], c);
  CHECK(labeled.weak_label == WeakLabel::NoContradiction);
}

TEST_CASE("weak labeling requires labeled comments on both sides", "[pairs]") {
  Corpus c = make_corpus({make_paper(
      "p", Venue::ICLR,
      {labeled_review("r1", "p", {make_label(Aspect::Clarity, Sentiment::Positive)}),
       labeled_review("r2", "p", {})})});
  CHECK_THROWS_AS(weak_label_pair(generate_pairs(c.papers.at("p"))[0], c),
                  UnlabeledComments);
}

TEST_CASE("compile_rpcs keeps exactly the opposing comment pairs", "[pairs]") {
  Review r1 = make_review("r1", "p",
                          {{"Motivation is compelling.",
                            {make_label(Aspect::Motivation, Sentiment::Positive)}},
                           {"Well written.", {make_label(Aspect::Clarity, Sentiment::Positive)}}});
  Review r2 = make_review("r2", "p",
                          {{"The motivation is weak.",
                            {make_label(Aspect::Motivation, Sentiment::Negative)}}});
  Corpus c = make_corpus({make_paper("p", Venue::ICLR, {r1, r2})});
  auto pair = weak_label_pair(generate_pairs(c.papers.at("p"))[0], c);
  auto rpcs = compile_rpcs(pair, c);
  REQUIRE(rpcs.size() == 1);
  CHECK(rpcs[0].rpc_id == "r1|r2#0.0");
  CHECK(rpcs[0].comment_a_id == "r1#0");
  CHECK(rpcs[0].comment_b_id == "r2#0");
  CHECK(rpcs[0].shared_opposed_aspects == std::set<Aspect>{Aspect::Motivation});
  CHECK_FALSE(rpcs[0].gold_label.has_value());
}

TEST_CASE("one comment pair can oppose on several aspects", "[pairs]") {
  Review r1 = make_review("r1", "p",
                          {{"Clear and sound.",
                            {make_label(Aspect::Clarity, Sentiment::Positive),
                             make_label(Aspect::Soundness, Sentiment::Positive)}}});
  Review r2 = make_review("r2", "p",
                          {{"Muddled and unsound.",
                            {make_label(Aspect::Clarity, Sentiment::Negative),
                             make_label(Aspect::Soundness, Sentiment::Negative)}}});
  Corpus c = make_corpus({make_paper("p", Venue::ICLR, {r1, r2})});
  auto pair = weak_label_pair(generate_pairs(c.papers.at("p"))[0], c);
  auto rpcs = compile_rpcs(pair, c);
  REQUIRE(rpcs.size() == 1);
  CHECK(rpcs[0].shared_opposed_aspects ==
        std::set<Aspect>{Aspect::Clarity, Aspect::Soundness});
}

TEST_CASE("compiling a non-candidate pair is an error", "[pairs]") {
  Corpus c = make_corpus({make_paper(
      "p", Venue::ICLR,
      {labeled_review("r1", "p", {make_label(Aspect::Clarity, Sentiment::Positive)}),
       labeled_review("r2", "p", {make_label(Aspect::Clarity, Sentiment::Positive)})})});
  auto pair = weak_label_pair(generate_pairs(c.papers.at("p"))[0], c);
  CHECK_THROWS_AS(compile_rpcs(pair, c), NotACandidate);
}

// Weak label and RPC compilation must agree with a brute-force double loop
// over all cross comment pairs under the shared-aspect-opposite-sentiment rule.
TEST_CASE("candidate rule matches brute force on random corpora", "[pairs]") {
  Rng rng(1234);
  for (int iter = 0; iter < 1000; ++iter) {
    Corpus c = random_corpus(rng, 1 + rng.below(3));
    for (const auto& [pid, paper] : c.papers) {
      for (const auto& pair : generate_pairs(paper)) {
        const Review* a = c.find_review(pair.review_a_id);
        const Review* b = c.find_review(pair.review_b_id);
        std::size_t brute_count = 0;
        for (const auto& ca : a->comments)
          for (const auto& cb : b->comments) {
            bool opposed = false;
            for (Aspect asp : kAllAspects) {
              if (!aspect_has_sentiment(asp)) continue;
              auto sa = ca.sentiment_for(asp);
              auto sb = cb.sentiment_for(asp);
              if (sa && sb && *sa != *sb) opposed = true;
            }
            if (opposed) ++brute_count;
          }
        auto labeled = weak_label_pair(pair, c);
        CHECK((labeled.weak_label == WeakLabel::Candidate) == (brute_count > 0));
        if (labeled.weak_label == WeakLabel::Candidate)
          CHECK(compile_rpcs(labeled, c).size() == brute_count);
      }
    }
  }
}

TEST_CASE("build_pair_stage fills pairs and rpcs for the whole corpus", "[pairs]") {
  Rng rng(5);
  Corpus c = random_corpus(rng, 4);
  build_pair_stage(c);
  std::size_t expected_pairs = 0;
  for (const auto& [pid, paper] : c.papers) {
    const std::size_t n = paper.reviews.size();
    expected_pairs += n * (n - 1) / 2;
  }
  CHECK(c.pairs.size() == expected_pairs);
  for (const auto& rpc : c.rpcs) {
    CHECK(c.find_pair(rpc.pair_id) != nullptr);
    CHECK(c.find_comment(rpc.comment_a_id) != nullptr);
    CHECK(c.find_rpc(rpc.rpc_id) == &rpc);
  }
}
