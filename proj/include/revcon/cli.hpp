// Command line surface. Subcommands: ingest, stats, pairs,
// annotate export|import, train aspect|disagree, evaluate
// aspect|disagree|e2e|llm, detect, report. Exit codes: 0 success, 1 usage,
// 2 data error, 3 model/service error. Every run logs a one-line
// reproducibility manifest (command, seed, config, version) to stderr.
#pragma once

#include <algorithm>
#include <array>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "revcon/annotation.hpp"
#include "revcon/aspect_model.hpp"
#include "revcon/corpus_io.hpp"
#include "revcon/disagreement.hpp"
#include "revcon/evaluate.hpp"
#include "revcon/llm.hpp"
#include "revcon/llm_http.hpp"
#include "revcon/pipeline.hpp"
#include "revcon/split.hpp"
#include "revcon/stats.hpp"
#include "revcon/version.hpp"

namespace revcon {
namespace cli_detail {

inline void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    if (!content.empty() && content.back() != '\n') std::cout << "\n";
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw DataError("cannot write: " + out_path);
  f << content;
}

inline nlohmann::json load_config(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  std::ifstream in(path);
  if (!in) throw DataError("cannot read config: " + path);
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw DataError("config is not a JSON object: " + path);
  return j;
}

inline Corpus load(const std::string& path, bool force_plain_dir) {
  if (force_plain_dir) return load_corpus(path, CorpusFormat::PlainDir, LoadOptions{});
  return load_corpus(path);
}

// seeded 80/10/10 shuffle split of arbitrary items
template <typename T>
std::array<std::vector<T>, 3> split3(const std::vector<T>& items, std::uint64_t seed) {
  std::vector<std::size_t> idx(items.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  rng.shuffle(idx);
  const auto counts = detail::largest_remainder_counts(items.size(), {0.8, 0.1, 0.1});
  std::array<std::vector<T>, 3> out;
  std::size_t at = 0;
  for (int part = 0; part < 3; ++part)
    for (std::size_t k = 0; k < counts[static_cast<std::size_t>(part)]; ++k)
      out[static_cast<std::size_t>(part)].push_back(items[idx[at++]]);
  return out;
}

inline std::string stats_to_text(const StatsTable& t) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-12s %8s %8s %8s\n", "venue", "papers", "reviews", "pairs");
  out << buf;
  auto row = [&](const std::string& name, const VenueCounts& v) {
    std::snprintf(buf, sizeof buf, "%-12s %8zu %8zu %8zu\n", name.c_str(), v.papers, v.reviews,
                  v.pairs);
    out << buf;
  };
  for (const auto& [name, v] : t.by_venue) row(name, v);
  row("total", t.total);
  out << "\ncandidate pairs:        " << t.candidate_pairs
      << "\nno-contradiction pairs: " << t.no_contradiction_pairs
      << "\nreview pair comments:   " << t.rpc_total << "\n";
  if (!t.rpcs_by_aspect.empty()) {
    std::snprintf(buf, sizeof buf, "\n%-22s %6s %6s %6s %10s\n", "aspect", "C", "N", "CNT",
                  "unlabeled");
    out << buf;
    for (const auto& [name, c] : t.rpcs_by_aspect) {
      std::snprintf(buf, sizeof buf, "%-22s %6zu %6zu %6zu %10zu\n", name.c_str(),
                    c.contradiction, c.non_contradiction, c.cannot_decide, c.unlabeled);
      out << buf;
    }
  }
  return out.str();
}

// mock transport answering from a prebuilt prompt -> verdict map
class GoldTransport : public ChatTransport {
public:
  explicit GoldTransport(std::map<std::string, std::string> answers)
      : answers_(std::move(answers)) {}

  std::string complete(const std::string& prompt, const std::string&) override {
    auto it = answers_.find(prompt);
    if (it == answers_.end()) throw ServiceError("no scripted answer for prompt");
    return it->second;
  }

private:
  std::map<std::string, std::string> answers_;
};

}  // namespace cli_detail

inline int run_cli(std::vector<std::string> args) {
  CLI::App app{"peer-review contradiction detection toolkit"};
  app.name("revcon");
  app.require_subcommand(1);

  std::string corpus_path, out_path, config_path, checkpoint, aspect_ckpt, disagree_ckpt;
  std::string paper_id, format, backbone = "bilstm", template_path, template_version = "v1";
  std::string cache_dir, model_id = "gpt-3.5-turbo", endpoint = "https://api.openai.com";
  std::string credential_env = "OPENAI_API_KEY", dump_predictions;
  std::vector<std::string> csv_files;
  std::int64_t seed_flag = -1;
  std::size_t batch_size = 100, long_threshold = 280;
  int rpm = 60, retries = 3;
  bool plain_dir = false, stratified = false, gold_aspects = false, oracle_disagree = false;
  bool symmetrize = false, nli = false, mock_gold = false;

  auto add_corpus = [&](CLI::App* sub) {
    sub->add_option("--corpus", corpus_path, "corpus file (JSON lines) or directory")->required();
    sub->add_flag("--plain-dir", plain_dir, "treat --corpus as a directory of *.json records");
  };
  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", seed_flag, "seed override (wins over --config)");
  };
  const std::uint64_t kDefaultSeed = 0;
  auto resolved_seed = [&](std::uint64_t from_config) {
    return seed_flag >= 0 ? static_cast<std::uint64_t>(seed_flag) : from_config;
  };

  std::function<void()> action;
  std::string command;

  // ---- ingest ----
  auto* ingest = app.add_subcommand("ingest", "validate, segment, and normalize a corpus");
  add_corpus(ingest);
  ingest->add_option("--out", out_path, "normalized corpus output path")->required();
  ingest->callback([&] {
    command = "ingest";
    action = [&] {
      Corpus c = cli_detail::load(corpus_path, plain_dir);
      build_pair_stage(c);
      save_corpus(c, out_path);
      nlohmann::ordered_json j{{"papers", c.papers.size()},
                               {"reviews", c.review_count()},
                               {"pairs", c.pairs.size()},
                               {"rpcs", c.rpcs.size()},
                               {"out", out_path}};
      std::cout << j.dump(2) << "\n";
    };
  });

  // ---- stats ----
  auto* stats = app.add_subcommand("stats", "dataset statistics table");
  add_corpus(stats);
  stats->add_option("--out", out_path, "write to file instead of stdout");
  stats->add_option("--format", format, "json|text");
  stats->callback([&] {
    command = "stats";
    // `format` is shared across subcommands; resolve the default here rather
    // than via default_val, which would overwrite it at setup time
    if (stats->count("--format") == 0) format = "json";
    action = [&] {
      Corpus c = cli_detail::load(corpus_path, plain_dir);
      if (c.pairs.empty()) build_pair_stage(c);
      const StatsTable t = corpus_stats(c);
      if (format == "json")
        cli_detail::emit(out_path, stats_to_json(t).dump(2) + "\n");
      else if (format == "text")
        cli_detail::emit(out_path, cli_detail::stats_to_text(t));
      else
        throw DataError("unknown format: '" + format + "'");
    };
  });

  // ---- pairs ----
  auto* pairs_cmd = app.add_subcommand("pairs", "generate review pairs, weak labels, and RPCs");
  add_corpus(pairs_cmd);
  pairs_cmd->add_option("--out", out_path, "write to file instead of stdout");
  pairs_cmd->callback([&] {
    command = "pairs";
    action = [&] {
      Corpus c = cli_detail::load(corpus_path, plain_dir);
      build_pair_stage(c);
      nlohmann::ordered_json j;
      j["pairs"] = nlohmann::ordered_json::array();
      for (const auto& p : c.pairs)
        j["pairs"].push_back(
            {{"pair_id", p.pair_id},
             {"review_a", p.review_a_id},
             {"review_b", p.review_b_id},
             {"weak_label", p.weak_label
                                ? nlohmann::ordered_json(std::string(weak_label_name(*p.weak_label)))
                                : nlohmann::ordered_json(nullptr)}});
      j["rpcs"] = nlohmann::ordered_json::array();
      for (const auto& r : c.rpcs) {
        nlohmann::ordered_json aspects = nlohmann::ordered_json::array();
        for (Aspect a : r.shared_opposed_aspects) aspects.push_back(std::string(aspect_name(a)));
        j["rpcs"].push_back(
            {{"rpc_id", r.rpc_id},
             {"pair_id", r.pair_id},
             {"aspects", aspects},
             {"gold", r.gold_label
                          ? nlohmann::ordered_json(std::string(gold_label_token(*r.gold_label)))
                          : nlohmann::ordered_json(nullptr)}});
      }
      cli_detail::emit(out_path, j.dump(2) + "\n");
    };
  });

  // ---- annotate ----
  auto* annotate = app.add_subcommand("annotate", "annotation batch tooling");
  annotate->require_subcommand(1);
  auto* ann_export = annotate->add_subcommand("export", "write annotation CSV batches");
  add_corpus(ann_export);
  add_seed(ann_export);
  ann_export->add_option("--out", out_path, "output directory")->required();
  ann_export->add_option("--batch-size", batch_size, "rows per CSV batch")->default_val(100);
  ann_export->add_flag("--stratified", stratified, "balance weak-label strata across batches");
  ann_export->callback([&] {
    command = "annotate export";
    action = [&] {
      Corpus c = cli_detail::load(corpus_path, plain_dir);
      if (c.rpcs.empty()) build_pair_stage(c);
      ExportOptions opts;
      opts.batch_size = batch_size;
      opts.seed = resolved_seed(kDefaultSeed);
      opts.stratified = stratified;
      auto files = export_annotation_files(c, c.rpcs, out_path, opts);
      nlohmann::ordered_json j{{"batches", files.size()}, {"rpcs", c.rpcs.size()}};
      j["files"] = nlohmann::ordered_json::array();
      for (const auto& f : files) j["files"].push_back(f.string());
      std::cout << j.dump(2) << "\n";
    };
  });
  auto* ann_import = annotate->add_subcommand("import", "merge annotated CSV files");
  add_corpus(ann_import);
  ann_import->add_option("--out", out_path, "updated corpus output path")->required();
  ann_import->add_option("files", csv_files, "annotated CSV files")->required()->expected(-1);
  ann_import->callback([&] {
    command = "annotate import";
    action = [&] {
      Corpus c = cli_detail::load(corpus_path, plain_dir);
      std::vector<std::filesystem::path> files(csv_files.begin(), csv_files.end());
      Corpus updated = import_annotations(c, files);
      save_corpus(updated, out_path);
      std::size_t gold = 0;
      for (const auto& r : updated.rpcs) gold += r.gold_label.has_value();
      nlohmann::ordered_json j{{"rpcs", updated.rpcs.size()}, {"gold_labels", gold},
                               {"out", out_path}};
      std::cout << j.dump(2) << "\n";
    };
  });

  // ---- train ----
  auto* train = app.add_subcommand("train", "train a model");
  train->require_subcommand(1);
  auto* train_aspect = train->add_subcommand("aspect", "train the aspect sentiment model");
  add_corpus(train_aspect);
  add_seed(train_aspect);
  train_aspect->add_option("--config", config_path, "JSON config (TrainConfigAspect keys)");
  train_aspect->add_option("--checkpoint", checkpoint, "output checkpoint directory")->required();
  train_aspect->callback([&] {
    command = "train aspect";
    action = [&] {
      Corpus c = cli_detail::load(corpus_path, plain_dir);
      auto comments = labeled_comments(c);
      TrainConfigAspect cfg =
          AspectSentimentModel::config_from_json(cli_detail::load_config(config_path));
      cfg.seed = resolved_seed(cfg.seed);
      auto parts = cli_detail::split3(comments, cfg.seed);
      AspectSentimentModel model = train_aspect_model(parts[0], parts[1], cfg);
      model.save(checkpoint);
      const auto& test = parts[2].empty() ? parts[0] : parts[2];
      AspectEvalReport rep = evaluate_aspect_model(model, test);
      nlohmann::ordered_json j{{"train", parts[0].size()},
                               {"validation", parts[1].size()},
                               {"test", parts[2].size()},
                               {"best_validation_f1", model.train_report().best_validation_f1},
                               {"checkpoint", checkpoint},
                               {"test_eval", aspect_eval_to_json(rep)}};
      std::cout << j.dump(2) << "\n";
    };
  });
  auto* train_disagree = train->add_subcommand("disagree", "train the disagreement classifier");
  add_corpus(train_disagree);
  add_seed(train_disagree);
  train_disagree->add_option("--config", config_path, "JSON config (TrainConfigPair keys)");
  train_disagree->add_option("--checkpoint", checkpoint, "output checkpoint directory")->required();
  train_disagree->callback([&] {
    command = "train disagree";
    action = [&] {
      Corpus c = cli_detail::load(corpus_path, plain_dir);
      if (c.rpcs.empty()) build_pair_stage(c);
      auto examples = make_pair_examples(c);
      TrainConfigPair cfg =
          DisagreementModel::config_from_json(cli_detail::load_config(config_path));
      cfg.seed = resolved_seed(cfg.seed);
      auto parts = cli_detail::split3(examples, cfg.seed);
      DisagreementModel model = train_disagreement(parts[0], parts[1], cfg);
      model.save(checkpoint);
      const auto& test = parts[2].empty() ? parts[0] : parts[2];
      PairEvalReport rep = evaluate_disagreement(model, test);
      nlohmann::ordered_json j{{"train", parts[0].size()},
                               {"validation", parts[1].size()},
                               {"test", parts[2].size()},
                               {"checkpoint", checkpoint},
                               {"test_metrics", metrics_to_json(rep.metrics)}};
      std::cout << j.dump(2) << "\n";
    };
  });

  // ---- evaluate ----
  auto* evaluate = app.add_subcommand("evaluate", "evaluate models");
  evaluate->require_subcommand(1);
  auto* eval_aspect = evaluate->add_subcommand("aspect", "aspect model detection/sentiment F1");
  add_corpus(eval_aspect);
  eval_aspect->add_option("--checkpoint", checkpoint, "aspect checkpoint directory")->required();
  eval_aspect->add_option("--out", out_path, "write to file instead of stdout");
  eval_aspect->callback([&] {
    command = "evaluate aspect";
    action = [&] {
      Corpus c = cli_detail::load(corpus_path, plain_dir);
      AspectSentimentModel model = AspectSentimentModel::load(checkpoint);
      AspectEvalReport rep = evaluate_aspect_model(model, labeled_comments(c));
      cli_detail::emit(out_path, aspect_eval_to_json(rep).dump(2) + "\n");
    };
  });
  auto* eval_disagree = evaluate->add_subcommand("disagree", "disagreement classifier metrics");
  add_corpus(eval_disagree);
  eval_disagree->add_option("--checkpoint", checkpoint, "checkpoint directory")->required();
  eval_disagree->add_flag("--nli", nli, "wrap a 3-way NLI checkpoint (zero-shot)");
  eval_disagree->add_option("--backbone", backbone, "expected backbone id for --nli");
  eval_disagree->add_option("--dump-predictions", dump_predictions,
                            "also write per-item predictions (JSON lines)");
  eval_disagree->add_option("--out", out_path, "write to file instead of stdout");
  eval_disagree->callback([&] {
    command = "evaluate disagree";
    action = [&] {
      Corpus c = cli_detail::load(corpus_path, plain_dir);
      if (c.rpcs.empty()) build_pair_stage(c);
      auto examples = make_pair_examples(c);
      std::optional<DisagreementModel> model;
      if (nli)
        model.emplace(load_nli_pretrained(backbone, checkpoint));
      else
        model.emplace(DisagreementModel::load(checkpoint));
      PairEvalReport rep = evaluate_disagreement(*model, examples);
      if (!dump_predictions.empty())
        cli_detail::emit(dump_predictions, predictions_to_jsonl(rep.predictions));
      cli_detail::emit(out_path, metrics_to_json(rep.metrics).dump(2) + "\n");
    };
  });
  auto* eval_e2e = evaluate->add_subcommand("e2e", "two-stage end-to-end evaluation");
  add_corpus(eval_e2e);
  eval_e2e->add_option("--aspect-checkpoint", aspect_ckpt, "aspect model checkpoint");
  eval_e2e->add_flag("--gold-aspects", gold_aspects, "pass gold aspect labels through stage 1");
  eval_e2e->add_option("--disagree-checkpoint", disagree_ckpt, "disagreement checkpoint");
  eval_e2e->add_flag("--oracle-disagree", oracle_disagree,
                     "answer stage 2 from gold RPC labels (harness check)");
  eval_e2e->add_option("--long-threshold", long_threshold,
                       "token count that flags a comment as LONG")->default_val(280);
  eval_e2e->add_option("--out", out_path, "write to file instead of stdout");
  eval_e2e->callback([&] {
    command = "evaluate e2e";
    action = [&] {
      Corpus c = cli_detail::load(corpus_path, plain_dir);
      if (c.pairs.empty()) build_pair_stage(c);
      std::optional<AspectSentimentModel> aspect;
      if (!gold_aspects) {
        if (aspect_ckpt.empty())
          throw DataError("need --aspect-checkpoint or --gold-aspects");
        aspect.emplace(AspectSentimentModel::load(aspect_ckpt));
      }
      std::optional<DisagreementModel> model;
      PairClassifier classify;
      if (oracle_disagree) {
        classify = oracle_classifier(c);
      } else {
        if (disagree_ckpt.empty())
          throw DataError("need --disagree-checkpoint or --oracle-disagree");
        model.emplace(DisagreementModel::load(disagree_ckpt));
        classify = classifier_from(*model);
      }
      EndToEndReport rep = evaluate_end_to_end(c, aspect ? &*aspect : nullptr, classify);
      ErrorReportOptions eopts;
      eopts.long_token_threshold = long_threshold;
      nlohmann::ordered_json j = e2e_to_json(rep);
      j["errors"] = error_report_to_json(error_report(rep, c, eopts));
      cli_detail::emit(out_path, j.dump(2) + "\n");
    };
  });
  auto* eval_llm = evaluate->add_subcommand("llm", "zero-shot chat-completion comparison");
  add_corpus(eval_llm);
  eval_llm->add_option("--cache", cache_dir, "response cache directory")->required();
  eval_llm->add_option("--model", model_id, "model identifier");
  eval_llm->add_option("--endpoint", endpoint, "chat-completion endpoint");
  eval_llm->add_option("--credential-env", credential_env, "env var holding the API key");
  eval_llm->add_option("--rpm", rpm, "requests-per-minute cap");
  eval_llm->add_option("--retries", retries, "max retries on transient failures");
  eval_llm->add_option("--template", template_path, "prompt template file");
  eval_llm->add_option("--template-version", template_version, "template version tag");
  eval_llm->add_flag("--mock-gold", mock_gold, "answer from gold labels, no network (harness check)");
  eval_llm->add_option("--out", out_path, "write to file instead of stdout");
  eval_llm->callback([&] {
    command = "evaluate llm";
    action = [&] {
      Corpus c = cli_detail::load(corpus_path, plain_dir);
      if (c.rpcs.empty()) build_pair_stage(c);
      auto examples = make_pair_examples(c);
      PromptTemplate tpl = default_prompt_template();
      if (!template_path.empty()) {
        std::ifstream in(template_path);
        if (!in) throw DataError("cannot read template: " + template_path);
        std::ostringstream ss;
        ss << in.rdbuf();
        tpl.text = ss.str();
      }
      tpl.version = template_version;
      tpl.validate();
      LlmClientConfig cfg;
      cfg.endpoint = endpoint;
      cfg.model_id = model_id;
      cfg.credential_env = credential_env;
      cfg.max_retries = retries;
      cfg.rpm = rpm;
      cfg.cache_dir = cache_dir;
      std::unique_ptr<ChatTransport> transport;
      if (mock_gold) {
        std::map<std::string, std::string> answers;
        for (const auto& ex : examples)
          answers[build_prompt(tpl, ex.text_a, ex.text_b)] =
              ex.label == PairLabel::Contradiction ? "Yes, they contradict." : "No contradiction.";
        transport = std::make_unique<cli_detail::GoldTransport>(std::move(answers));
        // the mock needs no real key; satisfy the client's credential gate
        cfg.credential_env = "REVCON_MOCK_CREDENTIAL";
        setenv(cfg.credential_env.c_str(), "mock", 1);
      } else {
        const char* key = std::getenv(credential_env.c_str());
        transport = std::make_unique<HttpChatTransport>(endpoint, key ? key : "");
      }
      RealClock clock;
      LlmClient client(cfg, *transport, clock);
      LlmEvalReport rep = evaluate_llm(client, tpl, examples);
      nlohmann::ordered_json j{{"metrics", metrics_to_json(rep.metrics)},
                               {"manifest", rep.manifest}};
      cli_detail::emit(out_path, j.dump(2) + "\n");
    };
  });

  // ---- detect / report ----
  auto add_detect_opts = [&](CLI::App* sub) {
    add_corpus(sub);
    sub->add_option("--paper", paper_id, "paper id inside the corpus")->required();
    sub->add_option("--aspect-checkpoint", aspect_ckpt, "aspect model checkpoint");
    sub->add_flag("--gold-aspects", gold_aspects, "use gold aspect labels instead of a model");
    sub->add_option("--disagree-checkpoint", disagree_ckpt, "disagreement checkpoint")->required();
    sub->add_flag("--symmetrize", symmetrize, "average classifier output over both pair orders");
    sub->add_option("--format", format, "json|html|text");
    sub->add_option("--out", out_path, "write to file instead of stdout");
  };
  auto run_detect = [&] {
    Corpus c = cli_detail::load(corpus_path, plain_dir);
    const Paper* paper = c.find_paper(paper_id);
    if (!paper) throw DataError("paper not found: '" + paper_id + "'");
    std::optional<AspectSentimentModel> aspect;
    if (!gold_aspects) {
      if (aspect_ckpt.empty()) throw DataError("need --aspect-checkpoint or --gold-aspects");
      aspect.emplace(AspectSentimentModel::load(aspect_ckpt));
    }
    DisagreementModel model = DisagreementModel::load(disagree_ckpt);
    DetectOptions opts;
    opts.symmetrize = symmetrize;
    opts.aspect_ckpt = aspect_ckpt;
    opts.disagree_ckpt = disagree_ckpt;
    PaperReport rep = detect(*paper, aspect ? &*aspect : nullptr, model, opts);
    cli_detail::emit(out_path, render_report(rep, format));
  };
  auto* detect_cmd = app.add_subcommand("detect", "contradiction findings for one paper");
  add_detect_opts(detect_cmd);
  detect_cmd->callback([&] {
    command = "detect";
    if (detect_cmd->count("--format") == 0) format = "json";
    action = run_detect;
  });
  auto* report_cmd = app.add_subcommand("report", "editor-facing report for one paper");
  add_detect_opts(report_cmd);
  report_cmd->callback([&] {
    command = "report";
    if (report_cmd->count("--format") == 0) format = "html";
    action = run_detect;
  });

  try {
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  nlohmann::ordered_json manifest{
      {"command", command},
      {"version", kVersion},
      {"seed", seed_flag >= 0 ? nlohmann::ordered_json(seed_flag) : nlohmann::ordered_json(nullptr)},
      {"config", config_path.empty() ? nlohmann::ordered_json(nullptr)
                                     : nlohmann::ordered_json(config_path)},
      {"timestamp", iso_utc_timestamp()}};
  std::cerr << manifest.dump() << "\n";

  try {
    action();
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const LlmError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace revcon
