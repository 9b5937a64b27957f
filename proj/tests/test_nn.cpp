#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "revcon/nn/checkpoint.hpp"
#include "revcon/nn/graph.hpp"
#include "revcon/nn/lstm.hpp"
#include "revcon/nn/optim.hpp"
#include "revcon/nn/tokenizer.hpp"
#include "revcon/rng.hpp"

using namespace revcon;
using nn::Graph;
using nn::Mat;
using nn::Node;
using nn::Parameter;
using nn::ParameterSet;

namespace {

using BuildFn = std::function<Node*(Graph&)>;

double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

double eval_scalar(const BuildFn& build) {
  Graph g;
  return build(g)->value(0, 0);
}

// central finite differences against the analytic gradients, every entry
void check_grads(const BuildFn& build, const std::vector<Parameter*>& params,
                 double tol = 1e-4) {
  for (Parameter* p : params) p->zero_grad();
  Graph g;
  g.backward(build(g));
  const double eps = 1e-5;
  for (Parameter* p : params) {
    for (Eigen::Index i = 0; i < p->value.rows(); ++i)
      for (Eigen::Index j = 0; j < p->value.cols(); ++j) {
        const double orig = p->value(i, j);
        p->value(i, j) = orig + eps;
        const double up = eval_scalar(build);
        p->value(i, j) = orig - eps;
        const double dn = eval_scalar(build);
        p->value(i, j) = orig;
        const double numeric = (up - dn) / (2.0 * eps);
        INFO(p->name << "(" << i << "," << j << ") analytic=" << p->grad(i, j)
                     << " numeric=" << numeric);
        CHECK(rel_diff(p->grad(i, j), numeric) < tol);
      }
  }
}

Mat fixed_random(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
  return m;
}

// dot with a fixed matrix so every output entry feeds the loss asymmetrically
Node* weighted(Graph& g, Node* x, std::uint64_t seed) {
  return g.sum(g.cmul(x, g.constant(fixed_random(x->value.rows(), x->value.cols(), seed))));
}

}  // namespace

TEST_CASE("primitive op gradients match finite differences", "[nn]") {
  ParameterSet set;
  Rng rng(7);
  Parameter* a = set.add_uniform("a", 2, 3, 0.8, rng);
  Parameter* b = set.add_uniform("b", 3, 2, 0.8, rng);
  Parameter* c = set.add_uniform("c", 2, 3, 0.8, rng);
  Parameter* v = set.add_uniform("v", 1, 3, 0.8, rng);
  Parameter* col = set.add_uniform("col", 5, 1, 0.8, rng);
  Parameter* z1 = set.add_uniform("z1", 1, 1, 0.8, rng);
  Parameter* z4 = set.add_uniform("z4", 1, 4, 0.8, rng);
  Parameter* table = set.add_uniform("table", 4, 3, 0.8, rng);

  SECTION("matmul") {
    check_grads([&](Graph& g) { return weighted(g, g.matmul(g.leaf(*a), g.leaf(*b)), 11); },
                {a, b});
  }
  SECTION("transpose") {
    check_grads([&](Graph& g) { return weighted(g, g.transpose(g.leaf(*a)), 12); }, {a});
  }
  SECTION("add and sub") {
    check_grads(
        [&](Graph& g) { return weighted(g, g.add(g.leaf(*a), g.leaf(*c)), 13); }, {a, c});
    check_grads(
        [&](Graph& g) { return weighted(g, g.sub(g.leaf(*a), g.leaf(*c)), 14); }, {a, c});
  }
  SECTION("add_rowvec") {
    check_grads(
        [&](Graph& g) { return weighted(g, g.add_rowvec(g.leaf(*a), g.leaf(*v)), 15); }, {a, v});
  }
  SECTION("cmul and scale") {
    check_grads(
        [&](Graph& g) { return weighted(g, g.cmul(g.leaf(*a), g.leaf(*c)), 16); }, {a, c});
    check_grads([&](Graph& g) { return weighted(g, g.scale(g.leaf(*a), -1.7), 17); }, {a});
  }
  SECTION("sigmoid, tanh, relu") {
    check_grads([&](Graph& g) { return weighted(g, g.sigmoid(g.leaf(*a)), 18); }, {a});
    check_grads([&](Graph& g) { return weighted(g, g.tanh(g.leaf(*a)), 19); }, {a});
    // keep every entry well away from the relu kink
    for (Eigen::Index i = 0; i < 2; ++i)
      for (Eigen::Index j = 0; j < 3; ++j)
        if (std::abs(c->value(i, j)) < 0.05) c->value(i, j) = 0.3;
    check_grads([&](Graph& g) { return weighted(g, g.relu(g.leaf(*c)), 20); }, {c});
  }
  SECTION("softmax over a vector") {
    check_grads([&](Graph& g) { return weighted(g, g.softmax_vec(g.leaf(*col)), 21); }, {col});
  }
  SECTION("slicing and stacking") {
    check_grads([&](Graph& g) { return weighted(g, g.slice_cols(g.leaf(*a), 1, 2), 22); }, {a});
    check_grads([&](Graph& g) { return weighted(g, g.slice_row(g.leaf(*a), 1), 23); }, {a});
    check_grads(
        [&](Graph& g) {
          Node* x = g.leaf(*a);
          return weighted(g, g.stack_rows({g.slice_row(x, 1), g.slice_row(x, 0)}), 24);
        },
        {a});
  }
  SECTION("reverse, concat, mean, sum") {
    check_grads([&](Graph& g) { return weighted(g, g.reverse_rows(g.leaf(*a)), 25); }, {a});
    check_grads(
        [&](Graph& g) { return weighted(g, g.concat_cols(g.leaf(*a), g.leaf(*c)), 26); }, {a, c});
    check_grads([&](Graph& g) { return weighted(g, g.mean_rows(g.leaf(*a)), 27); }, {a});
    check_grads([&](Graph& g) { return g.sum(g.leaf(*a)); }, {a});
  }
  SECTION("embedding rows") {
    const std::vector<int> ids{1, 0, 2, 1, 3};
    check_grads([&](Graph& g) { return weighted(g, g.embedding(*table, ids), 28); }, {table});
  }
  SECTION("losses") {
    check_grads([&](Graph& g) { return g.bce_prob(g.sigmoid(g.leaf(*z1)), 1.0); }, {z1});
    check_grads([&](Graph& g) { return g.bce_prob(g.sigmoid(g.leaf(*z1)), 0.0); }, {z1});
    check_grads([&](Graph& g) { return g.bce_logit(g.leaf(*z1), 1.0); }, {z1});
    check_grads([&](Graph& g) { return g.bce_logit(g.leaf(*z1), 0.0); }, {z1});
    check_grads([&](Graph& g) { return g.ce_logits(g.leaf(*z4), 2); }, {z4});
  }
  SECTION("a parameter used twice accumulates both paths") {
    check_grads(
        [&](Graph& g) {
          Node* x = g.leaf(*a);
          Node* y = g.leaf(*a);  // second leaf of the same parameter
          return g.sum(g.cmul(g.sigmoid(x), g.tanh(y)));
        },
        {a});
  }
}

TEST_CASE("recurrent layer gradients match finite differences", "[nn]") {
  ParameterSet set;
  Rng rng(9);
  Parameter* x = set.add_uniform("x", 4, 3, 0.8, rng);
  nn::LstmParams lstm = nn::LstmParams::create(set, "lstm", 3, 2, rng);
  nn::BiLstmParams bi = nn::BiLstmParams::create(set, "bi", 3, 2, rng);

  check_grads([&](Graph& g) { return weighted(g, nn::lstm_forward(g, lstm, g.leaf(*x)), 31); },
              {x, lstm.wx, lstm.wh, lstm.b});
  check_grads([&](Graph& g) { return weighted(g, nn::bilstm_forward(g, bi, g.leaf(*x)), 32); },
              {x, bi.fwd.wx, bi.fwd.wh, bi.fwd.b, bi.bwd.wx, bi.bwd.wh, bi.bwd.b});
}

TEST_CASE("dropout is identity in evaluation mode and rescales in training", "[nn]") {
  ParameterSet set;
  Rng rng(3);
  Parameter* a = set.add_uniform("a", 10, 10, 1.0, rng);

  Graph eval;
  Node* out = eval.dropout(eval.leaf(*a), 0.4);
  REQUIRE(out->value == a->value);

  Rng drop_rng(5);
  Graph train(true, &drop_rng);
  Node* dropped = train.dropout(train.leaf(*a), 0.4);
  std::size_t zeros = 0;
  for (Eigen::Index i = 0; i < 10; ++i)
    for (Eigen::Index j = 0; j < 10; ++j) {
      const double r = dropped->value(i, j) == 0.0 ? 0.0 : dropped->value(i, j) / a->value(i, j);
      if (r == 0.0)
        ++zeros;
      else
        REQUIRE_THAT(r, Catch::Matchers::WithinAbs(1.0 / 0.6, 1e-12));
    }
  REQUIRE(zeros > 10);
  REQUIRE(zeros < 90);

  Graph bad(true, nullptr);
  REQUIRE_THROWS_AS(bad.dropout(bad.leaf(*a), 0.4), ModelError);
}

TEST_CASE("adam drives a quadratic to its minimum", "[nn]") {
  ParameterSet set;
  Parameter* x = set.add("x", 1, 1);
  x->value(0, 0) = -4.0;
  nn::Adam::Options opts;
  opts.lr = 0.1;
  nn::Adam adam({x}, opts);
  for (int step = 0; step < 400; ++step) {
    adam.zero_grad();
    Graph g;
    Node* diff = g.sub(g.leaf(*x), g.constant(Mat::Constant(1, 1, 3.0)));
    g.backward(g.cmul(diff, diff));
    adam.step();
  }
  REQUIRE_THAT(x->value(0, 0), Catch::Matchers::WithinAbs(3.0, 1e-3));
}

TEST_CASE("tokenizer lowercases alphanumeric runs", "[nn]") {
  REQUIRE(nn::word_tokenize("Hello, World!!") == std::vector<std::string>{"hello", "world"});
  REQUIRE(nn::word_tokenize("state-of-the-art (SOTA)") ==
          std::vector<std::string>{"state", "of", "the", "art", "sota"});
  REQUIRE(nn::word_tokenize("  ") == std::vector<std::string>{});
  REQUIRE(nn::word_tokenize("eq 3b") == std::vector<std::string>{"eq", "3b"});
}

TEST_CASE("vocabulary ordering is count-descending then lexicographic", "[nn]") {
  nn::Vocab v = nn::Vocab::build({"b b b a a c", "a"});
  REQUIRE(v.size() == 7);  // 4 specials + a, b, c
  REQUIRE(v.id("a") == 4);
  REQUIRE(v.id("b") == 5);
  REQUIRE(v.id("c") == 6);
  REQUIRE(v.id("zzz") == nn::Vocab::kUnk);
  REQUIRE(v.encode("a zzz C") == std::vector<int>{4, nn::Vocab::kUnk, 6});

  nn::Vocab pruned = nn::Vocab::build({"b b b a a c"}, 2);
  REQUIRE(pruned.id("c") == nn::Vocab::kUnk);
  REQUIRE(pruned.id("a") != nn::Vocab::kUnk);

  nn::Vocab reloaded = nn::Vocab::from_json(v.to_json());
  REQUIRE(reloaded.size() == v.size());
  REQUIRE(reloaded.id("b") == v.id("b"));

  nlohmann::json bad{{"tokens", {"<pad>", "x"}}};
  REQUIRE_THROWS_AS(nn::Vocab::from_json(bad), IncompatibleCheckpoint);
}

TEST_CASE("weight files round trip exactly and reject mismatches", "[nn]") {
  const auto dir = std::filesystem::temp_directory_path() / "revcon_nn_ckpt";
  std::filesystem::create_directories(dir);
  const auto file = dir / "weights.bin";

  ParameterSet set;
  Rng rng(21);
  Parameter* a = set.add_uniform("alpha", 3, 4, 1.0, rng);
  Parameter* b = set.add_uniform("beta", 1, 2, 1.0, rng);
  const Mat a_orig = a->value;
  const Mat b_orig = b->value;
  nn::save_weights(file, set.all());

  a->value.setZero();
  b->value.setZero();
  nn::load_weights(file, set.all());
  REQUIRE(a->value == a_orig);
  REQUIRE(b->value == b_orig);

  SECTION("shape mismatch") {
    ParameterSet other;
    other.add("alpha", 4, 3);
    other.add("beta", 1, 2);
    REQUIRE_THROWS_AS(nn::load_weights(file, other.all()), IncompatibleCheckpoint);
  }
  SECTION("unexpected tensor in the file") {
    ParameterSet other;
    other.add("alpha", 3, 4);
    REQUIRE_THROWS_AS(nn::load_weights(file, other.all()), IncompatibleCheckpoint);
  }
  SECTION("missing tensor in the file") {
    ParameterSet other;
    other.add("alpha", 3, 4);
    other.add("beta", 1, 2);
    other.add("gamma", 2, 2);
    REQUIRE_THROWS_AS(nn::load_weights(file, other.all()), IncompatibleCheckpoint);
  }
  SECTION("bad magic") {
    std::ofstream f(dir / "junk.bin", std::ios::binary);
    f << "NOTAWTSFILE";
    f.close();
    REQUIRE_THROWS_AS(nn::load_weights(dir / "junk.bin", set.all()), IncompatibleCheckpoint);
  }
  SECTION("missing file") {
    REQUIRE_THROWS_AS(nn::load_weights(dir / "nope.bin", set.all()), IncompatibleCheckpoint);
  }
}
