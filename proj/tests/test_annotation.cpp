#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "revcon/annotation.hpp"
#include "revcon/corpus_io.hpp"

using namespace revcon;
using namespace revcon::testing;
namespace fs = std::filesystem;

namespace {

// 5 reviews opposing pairwise on clarity: lots of RPCs from one small corpus.
Corpus annotated_corpus() {
  std::vector<Review> reviews;
  for (int i = 0; i < 5; ++i) {
    const Sentiment s = i % 2 ? Sentiment::Negative : Sentiment::Positive;
    reviews.push_back(make_review("r" + std::to_string(i), "p",
                                  {{"Comment about clarity number " + std::to_string(i) + ".",
                                    {make_label(Aspect::Clarity, s)}}}));
  }
  Corpus c = make_corpus({make_paper("p", Venue::ICLR, std::move(reviews))});
  build_pair_stage(c);
  return c;
}

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string replace_label_cell(const std::string& csv, const std::string& rpc_id,
                               const std::string& label, bool expert = false) {
  std::istringstream is(csv);
  auto rows = read_csv(is);
  std::ostringstream os;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i][0] == rpc_id) rows[i][expert ? 7 : 6] = label;
    write_csv_row(os, rows[i]);
  }
  return os.str();
}

}  // namespace

TEST_CASE("batches chunk with the final ragged batch", "[annotation]") {
  Corpus c = annotated_corpus();
  REQUIRE(c.rpcs.size() == 6);  // pairs of opposite-parity reviews
  ExportOptions opts;
  opts.batch_size = 4;
  auto docs = export_annotation_batches(c, c.rpcs, opts);
  REQUIRE(docs.size() == 2);
  std::istringstream b0(docs[0]), b1(docs[1]);
  CHECK(read_csv(b0).size() == 5);  // header + 4 rows
  CHECK(read_csv(b1).size() == 3);  // header + 2 rows
}

TEST_CASE("export is byte identical for a fixed seed", "[annotation]") {
  Corpus c = annotated_corpus();
  ExportOptions opts;
  opts.batch_size = 2;
  opts.seed = 99;
  auto a = export_annotation_batches(c, c.rpcs, opts);
  auto b = export_annotation_batches(c, c.rpcs, opts);
  CHECK(a == b);
  opts.seed = 100;
  auto d = export_annotation_batches(c, c.rpcs, opts);
  CHECK(a != d);
}

TEST_CASE("export rows carry header, texts and aspects", "[annotation]") {
  Corpus c = annotated_corpus();
  ExportOptions opts;
  opts.batch_size = 100;
  auto docs = export_annotation_batches(c, c.rpcs, opts);
  REQUIRE(docs.size() == 1);
  std::istringstream is(docs[0]);
  auto rows = read_csv(is);
  REQUIRE(rows.size() == 7);
  CHECK(rows[0] == CsvRow{"rpc_id", "paper_id", "title", "comment_a", "comment_b",
                          "aspects", "label", "expert_label"});
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(c.find_rpc(rows[i][0]) != nullptr);
    CHECK(rows[i][1] == "p");
    CHECK(rows[i][5] == "clarity");
    CHECK(rows[i][6].empty());
    CHECK(rows[i][7].empty());
  }
}

TEST_CASE("stratified batches balance gold labels within one", "[annotation]") {
  Corpus c = annotated_corpus();
  REQUIRE(c.rpcs.size() == 6);
  for (std::size_t i = 0; i < c.rpcs.size(); ++i)
    c.rpcs[i].gold_label = i < 3 ? GoldLabel::Contradiction : GoldLabel::NonContradiction;
  ExportOptions opts;
  opts.batch_size = 2;
  opts.stratified = true;
  auto docs = export_annotation_batches(c, c.rpcs, opts);
  REQUIRE(docs.size() == 3);
  for (const auto& doc : docs) {
    std::istringstream is(doc);
    auto rows = read_csv(is);
    int con = 0, non = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i][6] == "C") ++con;
      if (rows[i][6] == "N") ++non;
    }
    CHECK(std::abs(con - non) <= 1);
  }
}

TEST_CASE("unmodified round trip preserves gold labels", "[annotation]") {
  Corpus c = annotated_corpus();
  c.rpcs[0].gold_label = GoldLabel::Contradiction;
  c.rpcs[3].gold_label = GoldLabel::CannotDecide;
  const fs::path dir = temp_dir("anno_roundtrip");
  auto files = export_annotation_files(c, c.rpcs, dir);
  Corpus imported = import_annotations(c, files);
  for (const auto& rpc : c.rpcs)
    CHECK(imported.find_rpc(rpc.rpc_id)->gold_label == rpc.gold_label);
}

TEST_CASE("labels written by annotators import onto the rpcs", "[annotation]") {
  Corpus c = annotated_corpus();
  ExportOptions opts;
  opts.batch_size = 100;
  auto docs = export_annotation_batches(c, c.rpcs, opts);
  std::string doc = replace_label_cell(docs[0], c.rpcs[0].rpc_id, "C");
  doc = replace_label_cell(doc, c.rpcs[1].rpc_id, "N");
  const fs::path dir = temp_dir("anno_import");
  std::ofstream(dir / "b.csv", std::ios::binary) << doc;
  Corpus imported = import_annotations(c, {dir / "b.csv"});
  CHECK(imported.find_rpc(c.rpcs[0].rpc_id)->gold_label == GoldLabel::Contradiction);
  CHECK(imported.find_rpc(c.rpcs[1].rpc_id)->gold_label == GoldLabel::NonContradiction);
  CHECK_FALSE(imported.find_rpc(c.rpcs[2].rpc_id)->gold_label.has_value());
  // input corpus untouched
  CHECK_FALSE(c.rpcs[0].gold_label.has_value());
}

TEST_CASE("conflicting annotations need an expert decision", "[annotation]") {
  Corpus c = annotated_corpus();
  ExportOptions opts;
  opts.batch_size = 100;
  auto docs = export_annotation_batches(c, c.rpcs, opts);
  const std::string& id = c.rpcs[0].rpc_id;
  const fs::path dir = temp_dir("anno_conflict");
  std::ofstream(dir / "a.csv", std::ios::binary) << replace_label_cell(docs[0], id, "C");
  std::ofstream(dir / "b.csv", std::ios::binary) << replace_label_cell(docs[0], id, "N");
  CHECK_THROWS_AS(import_annotations(c, {dir / "a.csv", dir / "b.csv"}), ConflictingLabels);

  // the expert column settles it
  std::string with_expert = replace_label_cell(docs[0], id, "N");
  with_expert = replace_label_cell(with_expert, id, "C", /*expert=*/true);
  std::ofstream(dir / "c.csv", std::ios::binary) << with_expert;
  Corpus imported = import_annotations(c, {dir / "a.csv", dir / "c.csv"});
  CHECK(imported.find_rpc(id)->gold_label == GoldLabel::Contradiction);
}

TEST_CASE("unknown rpc ids and bad tokens are rejected", "[annotation]") {
  Corpus c = annotated_corpus();
  ExportOptions opts;
  opts.batch_size = 100;
  auto docs = export_annotation_batches(c, c.rpcs, opts);
  const fs::path dir = temp_dir("anno_bad");

  std::string unknown = docs[0];
  const std::string& id = c.rpcs[0].rpc_id;
  const auto pos = unknown.find(id);
  unknown = unknown.substr(0, pos) + "nope|x#0.0" + unknown.substr(pos + id.size());
  std::ofstream(dir / "unknown.csv", std::ios::binary) << unknown;
  CHECK_THROWS_AS(import_annotations(c, {dir / "unknown.csv"}), UnknownRpcId);

  std::ofstream(dir / "badtoken.csv", std::ios::binary)
      << replace_label_cell(docs[0], c.rpcs[1].rpc_id, "yes");
  CHECK_THROWS_AS(import_annotations(c, {dir / "badtoken.csv"}), BadLabelToken);
}

TEST_CASE("exporting nothing is an error", "[annotation]") {
  Corpus c = annotated_corpus();
  CHECK_THROWS_AS(export_annotation_batches(c, {}, {}), EmptyInput);
}
