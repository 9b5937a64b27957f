// Zero-shot contradiction detection through an external chat-completion
// service. The client never talks to the network when the content-addressed
// cache already holds a response for (model id, prompt); live calls go
// through a sliding-window rate limiter and exponential-backoff retries.
// Transports and clocks are injected so the whole stack runs under test
// doubles with a virtual clock.
#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <deque>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "revcon/disagreement.hpp"
#include "revcon/errors.hpp"
#include "revcon/metrics.hpp"
#include "revcon/strings.hpp"

namespace revcon {

struct PromptTemplate {
  std::string text;
  std::string version = "v1";

  // both placeholders must occur exactly once
  void validate() const {
    for (const char* ph : {"{review1}", "{review2}"}) {
      const auto first = text.find(ph);
      if (first == std::string::npos)
        throw MissingPlaceholder(std::string("template lacks ") + ph);
      if (text.find(ph, first + 1) != std::string::npos)
        throw MissingPlaceholder(std::string("template repeats ") + ph);
    }
  }
};

inline PromptTemplate default_prompt_template() {
  return PromptTemplate{
      "Do these two peer-review comments contradict each other? "
      "Answer Yes or No, then explain. Review 1: {review1} Review 2: {review2}",
      "v1"};
}

inline std::string build_prompt(const PromptTemplate& tpl, const std::string& review1,
                                const std::string& review2) {
  tpl.validate();
  std::string out = tpl.text;
  const auto p1 = out.find("{review1}");
  const auto p2 = out.find("{review2}");
  // later placeholder first, so inserted review text is never rescanned
  if (p1 < p2) {
    out.replace(p2, 9, review2);
    out.replace(p1, 9, review1);
  } else {
    out.replace(p1, 9, review1);
    out.replace(p2, 9, review2);
  }
  return out;
}

enum class Verdict { Contradiction, NonContradiction, Unparseable };

inline std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Contradiction: return "contradiction";
    case Verdict::NonContradiction: return "non_contradiction";
    case Verdict::Unparseable: return "unparseable";
  }
  return "?";
}

// Total: every string maps to exactly one verdict.
inline Verdict parse_verdict(const std::string& response) {
  const std::string low = to_lower(response);
  std::string first;
  for (char c : low) {
    if (std::isalnum(static_cast<unsigned char>(c)))
      first += c;
    else if (!first.empty())
      break;
  }
  if (first == "yes") return Verdict::Contradiction;
  if (first == "no") return Verdict::NonContradiction;
  for (const char* negated :
       {"no contradiction", "not contradict", "not a contradiction", "do not contradict",
        "does not contradict", "don't contradict", "doesn't contradict", "never contradict"})
    if (low.find(negated) != std::string::npos) return Verdict::NonContradiction;
  if (low.find("contradict") != std::string::npos) return Verdict::Contradiction;
  return Verdict::Unparseable;
}

// ---- clock and rate limiting ----

class Clock {
public:
  virtual ~Clock() = default;
  virtual double now() = 0;  // seconds, monotonic
  virtual void sleep_for(double seconds) = 0;
};

class RealClock : public Clock {
public:
  double now() override {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
  }
  void sleep_for(double seconds) override {
    std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
  }
};

class VirtualClock : public Clock {
public:
  double now() override { return t_; }
  void sleep_for(double seconds) override { t_ += seconds; }
  void advance(double seconds) { t_ += seconds; }

private:
  double t_ = 0.0;
};

// At most `rpm` acquisitions inside any sliding 60 second window.
class RateLimiter {
public:
  RateLimiter(int rpm, Clock& clock) : rpm_(rpm), clock_(clock) {}

  void acquire() {
    for (;;) {
      const double now = clock_.now();
      while (!times_.empty() && times_.front() <= now - 60.0) times_.pop_front();
      if (static_cast<int>(times_.size()) < rpm_) {
        times_.push_back(now);
        return;
      }
      clock_.sleep_for(times_.front() + 60.0 - now);
    }
  }

private:
  int rpm_;
  Clock& clock_;
  std::deque<double> times_;
};

// ---- transport and client ----

class ChatTransport {
public:
  virtual ~ChatTransport() = default;
  virtual std::string complete(const std::string& prompt, const std::string& model_id) = 0;
};

struct LlmClientConfig {
  std::string endpoint = "https://api.openai.com";
  std::string model_id = "gpt-3.5-turbo";
  std::string credential_env = "OPENAI_API_KEY";
  int max_retries = 3;
  int rpm = 60;
  std::filesystem::path cache_dir;

  void validate() const {
    if (max_retries < 0) throw DataError("max_retries must be >= 0");
    if (rpm <= 0) throw DataError("rpm must be positive");
    if (cache_dir.empty()) throw DataError("cache_dir is required");
  }
};

namespace detail {

inline std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace detail

class LlmClient {
public:
  LlmClient(LlmClientConfig cfg, ChatTransport& transport, Clock& clock)
      : cfg_(std::move(cfg)), transport_(transport), clock_(clock),
        limiter_(cfg_.rpm, clock) {
    cfg_.validate();
    std::filesystem::create_directories(cfg_.cache_dir);
  }

  const LlmClientConfig& config() const { return cfg_; }
  std::size_t cache_hits() const { return cache_hits_; }
  std::size_t network_calls() const { return network_calls_; }

  std::string query(const std::string& prompt) {
    const char* key = std::getenv(cfg_.credential_env.c_str());
    if (key == nullptr || *key == '\0')
      throw AuthError("credential environment variable '" + cfg_.credential_env + "' is not set");

    const auto path = cache_path(prompt);
    if (auto cached = read_cache(path, prompt)) {
      ++cache_hits_;
      return *cached;
    }

    double backoff = 0.5;
    for (int attempt = 0;; ++attempt) {
      limiter_.acquire();
      ++network_calls_;
      try {
        std::string response = transport_.complete(prompt, cfg_.model_id);
        write_cache(path, prompt, response);
        return response;
      } catch (const AuthError&) {
        throw;
      } catch (const LlmError&) {
        if (attempt >= cfg_.max_retries) throw;
        clock_.sleep_for(backoff);
        backoff *= 2.0;
      }
    }
  }

private:
  std::filesystem::path cache_path(const std::string& prompt) const {
    return cfg_.cache_dir / (detail::fnv1a_hex(cfg_.model_id + '\x1f' + prompt) + ".json");
  }

  // the stored prompt is compared back so a hash collision degrades to a miss
  std::optional<std::string> read_cache(const std::filesystem::path& path,
                                        const std::string& prompt) const {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) return std::nullopt;
    if (j.value("model_id", "") != cfg_.model_id || j.value("prompt", "") != prompt)
      return std::nullopt;
    if (!j.contains("response") || !j["response"].is_string()) return std::nullopt;
    return j["response"].get<std::string>();
  }

  void write_cache(const std::filesystem::path& path, const std::string& prompt,
                   const std::string& response) const {
    nlohmann::ordered_json j{
        {"model_id", cfg_.model_id}, {"prompt", prompt}, {"response", response}};
    const auto tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp);
      out << j.dump(2) << "\n";
    }
    std::filesystem::rename(tmp, path);
  }

  LlmClientConfig cfg_;
  ChatTransport& transport_;
  Clock& clock_;
  RateLimiter limiter_;
  std::size_t cache_hits_ = 0;
  std::size_t network_calls_ = 0;
};

// ---- evaluation ----

struct LlmEvalReport {
  MetricsReport metrics;
  std::vector<Verdict> verdicts;               // aligned with the input items
  std::vector<std::string> unparseable_ids;    // scored NonContradiction, flagged
  nlohmann::ordered_json manifest;
};

inline std::string iso_utc_timestamp() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

inline LlmEvalReport evaluate_llm(LlmClient& client, const PromptTemplate& tpl,
                                  const std::vector<PairExample>& items) {
  tpl.validate();
  if (items.empty()) throw EmptyInput("no items to evaluate");
  LlmEvalReport rep;
  std::vector<int> gold, pred;
  for (const auto& ex : items) {
    const std::string prompt = build_prompt(tpl, ex.text_a, ex.text_b);
    const Verdict v = parse_verdict(client.query(prompt));
    rep.verdicts.push_back(v);
    if (v == Verdict::Unparseable) rep.unparseable_ids.push_back(ex.rpc_id);
    gold.push_back(ex.label == PairLabel::Contradiction ? 1 : 0);
    pred.push_back(v == Verdict::Contradiction ? 1 : 0);
  }
  rep.metrics = compute_metrics(gold, pred, {"non_contradiction", "contradiction"});
  rep.manifest = {{"model_id", client.config().model_id},
                  {"template_version", tpl.version},
                  {"timestamp", iso_utc_timestamp()},
                  {"items", items.size()},
                  {"cache_hits", client.cache_hits()},
                  {"network_calls", client.network_calls()},
                  {"unparseable", rep.unparseable_ids.size()}};
  return rep;
}

}  // namespace revcon
