// Annotation batch export and import.
//
// Export shuffles RPCs with a fixed seed, chunks them into batches and writes
// CSV files with header rpc_id,paper_id,title,comment_a,comment_b,aspects,
// label,expert_label. Already-assigned gold labels are written into the
// label column so an unmodified round trip preserves them. Stratified mode
// deals each gold-label stratum round-robin across batches, keeping batches
// class-balanced within one item.
//
// Import merges files into a fresh Corpus value. The expert_label column
// overrides annotator labels; disagreement without an expert decision is an
// error rather than a silent majority vote.
#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "revcon/csv.hpp"
#include "revcon/errors.hpp"
#include "revcon/pairs.hpp"
#include "revcon/review.hpp"
#include "revcon/rng.hpp"

namespace revcon {

struct ExportOptions {
  std::size_t batch_size = 100;
  std::uint64_t seed = 0;
  bool stratified = false;
};

inline const char* kAnnotationHeader =
    "rpc_id,paper_id,title,comment_a,comment_b,aspects,label,expert_label";

namespace detail {

inline CsvRow annotation_row(const Corpus& corpus, const ReviewPairComment& rpc) {
  const ReviewComment* a = corpus.find_comment(rpc.comment_a_id);
  const ReviewComment* b = corpus.find_comment(rpc.comment_b_id);
  if (!a || !b) throw DataError("rpc references unknown comment: " + rpc.rpc_id);
  const std::string review_a = rpc.pair_id.substr(0, rpc.pair_id.find('|'));
  const std::string* paper_id = corpus.paper_of_review(review_a);
  const Paper* paper = paper_id ? corpus.find_paper(*paper_id) : nullptr;
  std::string aspects;
  for (Aspect asp : rpc.shared_opposed_aspects) {
    if (!aspects.empty()) aspects += ';';
    aspects += std::string(aspect_name(asp));
  }
  return {rpc.rpc_id,
          paper ? paper->paper_id : "",
          paper ? paper->title : "",
          a->text,
          b->text,
          aspects,
          rpc.gold_label ? std::string(gold_label_token(*rpc.gold_label)) : "",
          ""};
}

}  // namespace detail

// Returns one CSV document per batch, deterministic in `seed`.
inline std::vector<std::string> export_annotation_batches(const Corpus& corpus,
                                                          const std::vector<ReviewPairComment>& rpcs,
                                                          const ExportOptions& opts = {}) {
  if (rpcs.empty()) throw EmptyInput("no review pair comments to export");
  if (opts.batch_size < 1) throw DataError("batch_size must be at least 1");

  std::vector<std::size_t> order(rpcs.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(opts.seed);
  rng.shuffle(order);

  const std::size_t n_batches = (rpcs.size() + opts.batch_size - 1) / opts.batch_size;
  std::vector<std::vector<std::size_t>> batches(n_batches);

  if (opts.stratified) {
    // strata in fixed order: C, N, CNT, unlabeled; deal each round-robin
    std::map<int, std::vector<std::size_t>> strata;
    for (std::size_t i : order) {
      const auto& g = rpcs[i].gold_label;
      strata[g ? static_cast<int>(*g) : 3].push_back(i);
    }
    std::size_t cursor = 0;
    for (const auto& [key, members] : strata)
      for (std::size_t i : members) batches[cursor++ % n_batches].push_back(i);
  } else {
    for (std::size_t k = 0; k < order.size(); ++k)
      batches[k / opts.batch_size].push_back(order[k]);
  }

  std::vector<std::string> out;
  for (const auto& batch : batches) {
    std::ostringstream os;
    os << kAnnotationHeader << "\r\n";
    for (std::size_t i : batch) write_csv_row(os, detail::annotation_row(corpus, rpcs[i]));
    out.push_back(os.str());
  }
  return out;
}

// Writes batches as <prefix>NNN.csv under dir; returns the file paths.
inline std::vector<std::filesystem::path> export_annotation_files(
    const Corpus& corpus, const std::vector<ReviewPairComment>& rpcs,
    const std::filesystem::path& dir, const ExportOptions& opts = {},
    const std::string& prefix = "batch_") {
  std::filesystem::create_directories(dir);
  auto docs = export_annotation_batches(corpus, rpcs, opts);
  std::vector<std::filesystem::path> paths;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    char num[8];
    std::snprintf(num, sizeof num, "%03zu", i + 1);
    auto path = dir / (prefix + num + ".csv");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write: " + path.string());
    f << docs[i];
    paths.push_back(std::move(path));
  }
  return paths;
}

inline Corpus import_annotations(const Corpus& corpus,
                                 const std::vector<std::filesystem::path>& files) {
  Corpus out = corpus;
  if (out.rpcs.empty()) build_pair_stage(out);
  else out.rebuild_index();

  std::map<std::string, std::set<GoldLabel>> votes;
  std::map<std::string, std::set<GoldLabel>> expert_votes;

  for (const auto& file : files) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw DataError("cannot open: " + file.string());
    auto rows = read_csv(in);
    if (rows.empty()) throw MalformedRecord(1, file.filename().string() + ": empty file");
    std::ostringstream hdr;
    for (std::size_t i = 0; i < rows[0].size(); ++i) {
      if (i) hdr << ',';
      hdr << rows[0][i];
    }
    if (hdr.str() != kAnnotationHeader)
      throw MalformedRecord(1, file.filename().string() + ": unexpected header");
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const CsvRow& row = rows[r];
      if (row.size() != 8)
        throw MalformedRecord(r + 1, file.filename().string() + ": expected 8 columns");
      const std::string& rpc_id = row[0];
      const std::string label = trim(row[6]);
      const std::string expert = trim(row[7]);
      if (!out.find_rpc(rpc_id)) throw UnknownRpcId(rpc_id);
      if (!label.empty()) {
        const auto g = try_parse_gold_label(label);
        if (!g) throw BadLabelToken(label);
        votes[rpc_id].insert(*g);
      }
      if (!expert.empty()) {
        const auto g = try_parse_gold_label(expert);
        if (!g) throw BadLabelToken(expert);
        expert_votes[rpc_id].insert(*g);
      }
    }
  }

  std::map<std::string, GoldLabel> final_label;
  for (const auto& [rpc_id, labels] : expert_votes) {
    if (labels.size() > 1) throw ConflictingLabels(rpc_id);
    final_label[rpc_id] = *labels.begin();
  }
  for (const auto& [rpc_id, labels] : votes) {
    if (final_label.count(rpc_id)) continue;  // expert already decided
    if (labels.size() > 1) throw ConflictingLabels(rpc_id);
    final_label[rpc_id] = *labels.begin();
  }

  for (auto& rpc : out.rpcs) {
    auto it = final_label.find(rpc.rpc_id);
    if (it != final_label.end()) rpc.gold_label = it->second;
  }
  return out;
}

}  // namespace revcon
