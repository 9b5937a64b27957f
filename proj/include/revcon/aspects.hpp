// The eight review aspect categories and the two-valued sentiment scheme.
// Summary is the one aspect that never carries a sentiment.
#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "revcon/errors.hpp"
#include "revcon/strings.hpp"

namespace revcon {

enum class Aspect {
  Motivation,
  Clarity,
  Soundness,
  Substance,
  Originality,
  MeaningfulComparison,
  Replicability,
  Summary,
};

inline constexpr int kAspectCount = 8;

inline constexpr std::array<Aspect, kAspectCount> kAllAspects = {
    Aspect::Motivation,   Aspect::Clarity,       Aspect::Soundness,
    Aspect::Substance,    Aspect::Originality,   Aspect::MeaningfulComparison,
    Aspect::Replicability, Aspect::Summary,
};

inline constexpr bool aspect_has_sentiment(Aspect a) { return a != Aspect::Summary; }

// Canonical wire names. Read side is case/punctuation-insensitive.
inline std::string_view aspect_name(Aspect a) {
  switch (a) {
    case Aspect::Motivation: return "motivation";
    case Aspect::Clarity: return "clarity";
    case Aspect::Soundness: return "soundness";
    case Aspect::Substance: return "substance";
    case Aspect::Originality: return "originality";
    case Aspect::MeaningfulComparison: return "meaningful_comparison";
    case Aspect::Replicability: return "replicability";
    case Aspect::Summary: return "summary";
  }
  return "unknown";
}

inline std::optional<Aspect> try_parse_aspect(std::string_view name) {
  std::string key;
  key.reserve(name.size());
  for (char c : name) {
    if (std::isalpha(static_cast<unsigned char>(c)))
      key += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  for (Aspect a : kAllAspects) {
    std::string canon;
    for (char c : aspect_name(a))
      if (c != '_') canon += c;
    if (key == canon) return a;
  }
  return std::nullopt;
}

inline Aspect parse_aspect(std::string_view name) {
  if (auto a = try_parse_aspect(name)) return *a;
  throw UnknownAspectName("unknown aspect name: '" + std::string(name) + "'");
}

enum class Sentiment { Positive, Negative };

inline std::string_view sentiment_name(Sentiment s) {
  return s == Sentiment::Positive ? "positive" : "negative";
}

inline std::optional<Sentiment> try_parse_sentiment(std::string_view name) {
  const std::string key = to_lower(trim(name));
  if (key == "positive" || key == "pos" || key == "+") return Sentiment::Positive;
  if (key == "negative" || key == "neg" || key == "-") return Sentiment::Negative;
  return std::nullopt;
}

inline Sentiment opposite(Sentiment s) {
  return s == Sentiment::Positive ? Sentiment::Negative : Sentiment::Positive;
}

// An aspect tag on a comment. sentiment is absent exactly when aspect == Summary.
struct AspectLabel {
  Aspect aspect;
  std::optional<Sentiment> sentiment;

  bool valid() const { return aspect_has_sentiment(aspect) == sentiment.has_value(); }

  friend bool operator==(const AspectLabel& a, const AspectLabel& b) {
    return a.aspect == b.aspect && a.sentiment == b.sentiment;
  }
  friend auto operator<=>(const AspectLabel& a, const AspectLabel& b) = default;
};

inline AspectLabel make_label(Aspect a, std::optional<Sentiment> s = std::nullopt) {
  return AspectLabel{a, aspect_has_sentiment(a) ? s : std::nullopt};
}

}  // namespace revcon
