#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "revcon/llm.hpp"
#include "revcon/rng.hpp"

using namespace revcon;

namespace {

std::filesystem::path fresh_cache(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  return dir;
}

// deterministic stand-in service: contradiction iff the prompt mentions a flaw
class ScriptedTransport : public ChatTransport {
public:
  std::string complete(const std::string& prompt, const std::string&) override {
    ++calls;
    if (prompt.find("flawed") != std::string::npos) return "Yes, they contradict each other.";
    return "No contradiction between the reviews.";
  }
  int calls = 0;
};

class FlakyTransport : public ChatTransport {
public:
  explicit FlakyTransport(int failures) : failures_left(failures) {}
  std::string complete(const std::string&, const std::string&) override {
    ++calls;
    if (failures_left-- > 0) throw ServiceError("upstream 500");
    return "Yes.";
  }
  int calls = 0;
  int failures_left;
};

class RejectingTransport : public ChatTransport {
public:
  std::string complete(const std::string&, const std::string&) override {
    ++calls;
    throw AuthError("401 from service");
  }
  int calls = 0;
};

LlmClientConfig config_for(const std::filesystem::path& cache) {
  LlmClientConfig cfg;
  cfg.model_id = "scripted-oracle";
  cfg.credential_env = "REVCON_TEST_KEY";
  cfg.cache_dir = cache;
  cfg.rpm = 1000;
  return cfg;
}

std::vector<PairExample> pair_fixture() {
  std::vector<PairExample> out;
  auto push = [&out](const char* a, const char* b, PairLabel l) {
    PairExample ex;
    ex.rpc_id = "fx#" + std::to_string(out.size());
    ex.text_a = a;
    ex.text_b = b;
    ex.label = l;
    out.push_back(std::move(ex));
  };
  push("the proof is flawed", "the proof is correct", PairLabel::Contradiction);
  push("the idea is flawed in places", "the idea works well", PairLabel::Contradiction);
  push("the writing is clear", "the paper reads well", PairLabel::NonContradiction);
  push("experiments are thorough", "evaluation is broad", PairLabel::NonContradiction);
  return out;
}

struct EnvGuard {
  EnvGuard(const char* name, const char* value) : name_(name) {
    if (value)
      setenv(name, value, 1);
    else
      unsetenv(name);
  }
  ~EnvGuard() { unsetenv(name_); }
  const char* name_;
};

}  // namespace

TEST_CASE("prompt templates need each placeholder exactly once", "[llm]") {
  REQUIRE_NOTHROW(default_prompt_template().validate());
  REQUIRE_THROWS_AS(PromptTemplate{"only {review1} here"}.validate(), MissingPlaceholder);
  REQUIRE_THROWS_AS(PromptTemplate{"{review2} twice {review2} with {review1}"}.validate(),
                    MissingPlaceholder);

  const PromptTemplate tpl{"A: {review1} B: {review2}", "vX"};
  REQUIRE(build_prompt(tpl, "first", "second") == "A: first B: second");

  // review text that looks like a placeholder is inserted verbatim
  REQUIRE(build_prompt(tpl, "sneaky {review2}", "second") == "A: sneaky {review2} B: second");
  const PromptTemplate flipped{"B: {review2} A: {review1}", "vX"};
  REQUIRE(build_prompt(flipped, "first", "sneaky {review1}") == "B: sneaky {review1} A: first");
}

TEST_CASE("verdict parsing is a total function", "[llm]") {
  REQUIRE(parse_verdict("Yes, they contradict.") == Verdict::Contradiction);
  REQUIRE(parse_verdict("  YES!!") == Verdict::Contradiction);
  REQUIRE(parse_verdict("No.") == Verdict::NonContradiction);
  REQUIRE(parse_verdict("No contradiction here.") == Verdict::NonContradiction);
  REQUIRE(parse_verdict("These comments do not contradict each other.") ==
          Verdict::NonContradiction);
  REQUIRE(parse_verdict("The two reviews contradict each other on novelty.") ==
          Verdict::Contradiction);
  REQUIRE(parse_verdict("I think they disagree somewhat.") == Verdict::Unparseable);
  REQUIRE(parse_verdict("") == Verdict::Unparseable);
  REQUIRE(parse_verdict("42") == Verdict::Unparseable);

  Rng rng(99);
  for (int iter = 0; iter < 2000; ++iter) {
    std::string junk;
    const std::size_t n = rng.below(24);
    for (std::size_t i = 0; i < n; ++i)
      junk += static_cast<char>(32 + rng.below(95));
    const Verdict v = parse_verdict(junk);
    REQUIRE((v == Verdict::Contradiction || v == Verdict::NonContradiction ||
             v == Verdict::Unparseable));
  }
}

TEST_CASE("queries require the credential before any network call", "[llm]") {
  EnvGuard guard("REVCON_TEST_KEY", nullptr);
  ScriptedTransport transport;
  VirtualClock clock;
  LlmClient client(config_for(fresh_cache("revcon_llm_auth")), transport, clock);
  REQUIRE_THROWS_AS(client.query("anything"), AuthError);
  REQUIRE(transport.calls == 0);
  REQUIRE(client.network_calls() == 0);
}

TEST_CASE("configs are validated", "[llm]") {
  ScriptedTransport transport;
  VirtualClock clock;
  LlmClientConfig cfg = config_for(fresh_cache("revcon_llm_cfg"));
  cfg.rpm = 0;
  REQUIRE_THROWS_AS(LlmClient(cfg, transport, clock), DataError);
  cfg = config_for(fresh_cache("revcon_llm_cfg"));
  cfg.cache_dir.clear();
  REQUIRE_THROWS_AS(LlmClient(cfg, transport, clock), DataError);
  cfg = config_for(fresh_cache("revcon_llm_cfg"));
  cfg.max_retries = -1;
  REQUIRE_THROWS_AS(LlmClient(cfg, transport, clock), DataError);
}

TEST_CASE("responses are cached by model and prompt", "[llm]") {
  EnvGuard guard("REVCON_TEST_KEY", "k");
  const auto cache = fresh_cache("revcon_llm_cache");
  ScriptedTransport transport;
  VirtualClock clock;
  LlmClient client(config_for(cache), transport, clock);

  REQUIRE(client.query("is this flawed?") == "Yes, they contradict each other.");
  REQUIRE(client.query("is this flawed?") == "Yes, they contradict each other.");
  REQUIRE(transport.calls == 1);
  REQUIRE(client.cache_hits() == 1);
  REQUIRE(client.network_calls() == 1);

  SECTION("a second client reuses the files") {
    ScriptedTransport second;
    LlmClient reuse(config_for(cache), second, clock);
    REQUIRE(reuse.query("is this flawed?") == "Yes, they contradict each other.");
    REQUIRE(second.calls == 0);
    REQUIRE(reuse.cache_hits() == 1);
  }

  SECTION("a different model id misses") {
    ScriptedTransport second;
    LlmClientConfig other = config_for(cache);
    other.model_id = "another-model";
    LlmClient miss(other, second, clock);
    REQUIRE(miss.query("is this flawed?") == "Yes, they contradict each other.");
    REQUIRE(second.calls == 1);
    REQUIRE(miss.cache_hits() == 0);
  }

  SECTION("a colliding file with the wrong prompt degrades to a miss") {
    const std::string prompt = "fresh question about a flawed lemma";
    const auto path =
        cache / (revcon::detail::fnv1a_hex(std::string("scripted-oracle") + '\x1f' + prompt) +
                 ".json");
    {
      std::ofstream out(path);
      out << nlohmann::json{{"model_id", "scripted-oracle"},
                            {"prompt", "some other prompt"},
                            {"response", "No."}}
                 .dump();
    }
    ScriptedTransport second;
    LlmClient collide(config_for(cache), second, clock);
    REQUIRE(collide.query(prompt) == "Yes, they contradict each other.");
    REQUIRE(second.calls == 1);
    REQUIRE(collide.cache_hits() == 0);
  }
}

TEST_CASE("transient failures are retried with backoff", "[llm]") {
  EnvGuard guard("REVCON_TEST_KEY", "k");
  VirtualClock clock;

  SECTION("two failures then success") {
    FlakyTransport transport(2);
    LlmClient client(config_for(fresh_cache("revcon_llm_retry")), transport, clock);
    REQUIRE(client.query("q") == "Yes.");
    REQUIRE(transport.calls == 3);
    REQUIRE(clock.now() == 0.5 + 1.0);  // exponential backoff between attempts
  }

  SECTION("retries exhausted rethrows the service error") {
    FlakyTransport transport(100);
    LlmClientConfig cfg = config_for(fresh_cache("revcon_llm_retry2"));
    cfg.max_retries = 2;
    LlmClient client(cfg, transport, clock);
    REQUIRE_THROWS_AS(client.query("q"), ServiceError);
    REQUIRE(transport.calls == 3);  // first attempt plus two retries
  }

  SECTION("auth failures from the service are not retried") {
    RejectingTransport transport;
    LlmClient client(config_for(fresh_cache("revcon_llm_retry3")), transport, clock);
    REQUIRE_THROWS_AS(client.query("q"), AuthError);
    REQUIRE(transport.calls == 1);
  }
}

TEST_CASE("the request rate is capped inside a sliding window", "[llm]") {
  EnvGuard guard("REVCON_TEST_KEY", "k");
  VirtualClock clock;

  class StampingTransport : public ChatTransport {
  public:
    explicit StampingTransport(Clock& c) : clock_(c) {}
    std::string complete(const std::string&, const std::string&) override {
      stamps.push_back(clock_.now());
      return "No.";
    }
    std::vector<double> stamps;

  private:
    Clock& clock_;
  } transport(clock);

  LlmClientConfig cfg = config_for(fresh_cache("revcon_llm_rpm"));
  cfg.rpm = 3;
  LlmClient client(cfg, transport, clock);
  for (int i = 0; i < 7; ++i) client.query("prompt " + std::to_string(i));

  REQUIRE(transport.stamps.size() == 7);
  for (std::size_t i = 0; i < transport.stamps.size(); ++i) {
    std::size_t in_window = 0;
    for (std::size_t j = 0; j <= i; ++j)
      if (transport.stamps[j] > transport.stamps[i] - 60.0) ++in_window;
    REQUIRE(in_window <= 3);
  }
  REQUIRE(clock.now() >= 120.0);  // seven calls at three per minute span two waits
}

TEST_CASE("a scripted oracle service scores perfectly and reruns from cache", "[llm]") {
  EnvGuard guard("REVCON_TEST_KEY", "k");
  const auto cache = fresh_cache("revcon_llm_eval");
  const auto items = pair_fixture();
  VirtualClock clock;

  ScriptedTransport transport;
  LlmClient client(config_for(cache), transport, clock);
  const LlmEvalReport first = evaluate_llm(client, default_prompt_template(), items);
  REQUIRE(first.metrics.macro_f1 == 1.0);
  REQUIRE(first.metrics.accuracy == 1.0);
  REQUIRE(first.unparseable_ids.empty());
  REQUIRE(first.manifest.at("model_id") == "scripted-oracle");
  REQUIRE(first.manifest.at("template_version") == "v1");
  REQUIRE(first.manifest.at("network_calls") == 4);
  REQUIRE(first.manifest.at("cache_hits") == 0);

  ScriptedTransport idle;
  LlmClient cached_client(config_for(cache), idle, clock);
  const LlmEvalReport second = evaluate_llm(cached_client, default_prompt_template(), items);
  REQUIRE(idle.calls == 0);
  REQUIRE(second.manifest.at("cache_hits") == 4);
  REQUIRE(second.manifest.at("network_calls") == 0);

  // identical scores from the cached run
  REQUIRE(metrics_to_json(first.metrics) == metrics_to_json(second.metrics));
  REQUIRE(first.verdicts == second.verdicts);

  REQUIRE_THROWS_AS(evaluate_llm(client, default_prompt_template(), {}), EmptyInput);
}

TEST_CASE("unparseable answers score as non contradiction and are flagged", "[llm]") {
  EnvGuard guard("REVCON_TEST_KEY", "k");

  class MumblingTransport : public ChatTransport {
  public:
    std::string complete(const std::string&, const std::string&) override {
      return "hard to say, really";
    }
  } transport;

  VirtualClock clock;
  LlmClient client(config_for(fresh_cache("revcon_llm_mumble")), transport, clock);
  const auto items = pair_fixture();
  const LlmEvalReport rep = evaluate_llm(client, default_prompt_template(), items);
  REQUIRE(rep.unparseable_ids.size() == items.size());
  REQUIRE(rep.manifest.at("unparseable") == items.size());
  // everything scored as non contradiction: the two N items are the hits
  REQUIRE(rep.metrics.accuracy == 0.5);
  for (Verdict v : rep.verdicts) REQUIRE(v == Verdict::Unparseable);
}
