// Word-level tokenizer and vocabulary. Tokens are lowercased alphanumeric
// runs; the vocabulary is frozen at build time with deterministic ordering
// (count descending, then token) so identical corpora give identical ids.
#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "revcon/errors.hpp"

namespace revcon::nn {

inline std::vector<std::string> word_tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

class Vocab {
public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kCls = 2;
  static constexpr int kSep = 3;

  Vocab() : tokens_{"<pad>", "<unk>", "<cls>", "<sep>"} { reindex(); }

  static Vocab build(const std::vector<std::string>& texts, std::size_t min_count = 1) {
    std::map<std::string, std::size_t> counts;
    for (const auto& t : texts)
      for (auto& w : word_tokenize(t)) ++counts[w];
    std::vector<std::pair<std::string, std::size_t>> ordered(counts.begin(), counts.end());
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    Vocab v;
    for (const auto& [tok, c] : ordered)
      if (c >= min_count) {
        v.index_.emplace(tok, static_cast<int>(v.tokens_.size()));
        v.tokens_.push_back(tok);
      }
    return v;
  }

  int id(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kUnk : it->second;
  }

  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return tokens_.size(); }

  std::vector<int> encode(std::string_view text) const {
    std::vector<int> out;
    for (const auto& w : word_tokenize(text)) out.push_back(id(w));
    return out;
  }

  nlohmann::ordered_json to_json() const { return {{"tokens", tokens_}}; }

  static Vocab from_json(const nlohmann::json& j) {
    if (!j.contains("tokens") || !j["tokens"].is_array())
      throw IncompatibleCheckpoint("vocab file lacks a tokens array");
    Vocab v;
    v.tokens_ = j["tokens"].get<std::vector<std::string>>();
    if (v.tokens_.size() < 4 || v.tokens_[0] != "<pad>" || v.tokens_[1] != "<unk>")
      throw IncompatibleCheckpoint("vocab special tokens missing");
    v.reindex();
    return v;
  }

private:
  void reindex() {
    index_.clear();
    for (std::size_t i = 0; i < tokens_.size(); ++i)
      index_.emplace(tokens_[i], static_cast<int>(i));
  }

  std::vector<std::string> tokens_;
  std::map<std::string, int> index_;
};

}  // namespace revcon::nn
