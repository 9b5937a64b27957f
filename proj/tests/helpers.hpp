// Builders shared across test files: compact construction of labeled
// corpora with correct comment spans, plus a random corpus generator for
// property tests.
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "revcon/pairs.hpp"
#include "revcon/review.hpp"
#include "revcon/rng.hpp"

namespace revcon::testing {

struct CommentSpec {
  std::string text;
  std::vector<AspectLabel> labels;
};

inline Review make_review(const std::string& review_id, const std::string& paper_id,
                          const std::vector<CommentSpec>& specs) {
  Review r;
  r.review_id = review_id;
  r.paper_id = paper_id;
  r.reviewer_alias = "anon";
  for (std::size_t i = 0; i < specs.size(); ++i) {
    ReviewComment c;
    c.begin = r.raw_text.size();
    r.raw_text += specs[i].text;
    c.end = r.raw_text.size();
    if (i + 1 < specs.size()) r.raw_text += " ";
    c.text = specs[i].text;
    c.labels = specs[i].labels;
    c.comment_id = make_comment_id(review_id, i);
    r.comments.push_back(std::move(c));
  }
  return r;
}

inline Paper make_paper(const std::string& paper_id, Venue venue,
                        std::vector<Review> reviews) {
  Paper p;
  p.paper_id = paper_id;
  p.venue = venue;
  p.year = 2020;
  p.title = "Title of " + paper_id;
  p.abstract = "Abstract of " + paper_id;
  p.reviews = std::move(reviews);
  return p;
}

inline Corpus make_corpus(std::vector<Paper> papers) {
  Corpus c;
  for (auto& p : papers) c.papers.emplace(p.paper_id, std::move(p));
  c.rebuild_index();
  return c;
}

// Random labeled corpus: every comment carries 0..2 labels over random
// aspects/sentiments, so weak labels and RPCs vary freely.
inline Corpus random_corpus(Rng& rng, std::size_t n_papers = 3) {
  std::vector<Paper> papers;
  for (std::size_t pi = 0; pi < n_papers; ++pi) {
    const std::string pid = "p" + std::to_string(pi);
    std::vector<Review> reviews;
    const std::size_t n_reviews = 2 + rng.below(3);
    for (std::size_t ri = 0; ri < n_reviews; ++ri) {
      std::vector<CommentSpec> specs;
      const std::size_t n_comments = 1 + rng.below(4);
      for (std::size_t ci = 0; ci < n_comments; ++ci) {
        CommentSpec spec;
        spec.text = "Comment " + std::to_string(ci) + " of review " + std::to_string(ri) + ".";
        const std::size_t n_labels = rng.below(3);
        std::set<Aspect> used;
        for (std::size_t li = 0; li < n_labels; ++li) {
          const Aspect a = kAllAspects[rng.below(kAspectCount)];
          if (!used.insert(a).second) continue;
          if (aspect_has_sentiment(a))
            spec.labels.push_back(make_label(
                a, rng.below(2) ? Sentiment::Positive : Sentiment::Negative));
          else
            spec.labels.push_back(make_label(a));
        }
        specs.push_back(std::move(spec));
      }
      // guarantee at least one labeled comment per review so weak labeling
      // is always defined
      if (specs[0].labels.empty())
        specs[0].labels.push_back(make_label(Aspect::Clarity, Sentiment::Positive));
      reviews.push_back(make_review("p" + std::to_string(pi) + "r" + std::to_string(ri),
                                    pid, specs));
    }
    papers.push_back(make_paper(pid, pi % 2 ? Venue::NeurIPS : Venue::ICLR,
                                std::move(reviews)));
  }
  return make_corpus(std::move(papers));
}

}  // namespace revcon::testing
