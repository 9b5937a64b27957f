// Reverse-mode automatic differentiation over Eigen matrices, sized for the
// small recurrent models in this library. A Graph owns the tape for one
// forward pass; backward() walks it once and accumulates parameter
// gradients. Everything is double precision so finite-difference gradient
// checks can be tight.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "revcon/errors.hpp"
#include "revcon/rng.hpp"

namespace revcon::nn {

using Mat = Eigen::MatrixXd;

// A named trainable tensor. Lives in the model, outlives any Graph.
struct Parameter {
  std::string name;
  Mat value;
  Mat grad;

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

class ParameterSet {
public:
  Parameter* add(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
    params_.push_back(std::make_unique<Parameter>());
    Parameter* p = params_.back().get();
    p->name = name;
    p->value.setZero(rows, cols);
    p->grad.setZero(rows, cols);
    return p;
  }

  // Uniform init in [-bound, bound], deterministic via the caller's rng.
  Parameter* add_uniform(const std::string& name, Eigen::Index rows, Eigen::Index cols,
                         double bound, Rng& rng) {
    Parameter* p = add(name, rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) p->value(i, j) = rng.uniform(-bound, bound);
    return p;
  }

  std::vector<Parameter*> all() {
    std::vector<Parameter*> out;
    for (auto& p : params_) out.push_back(p.get());
    return out;
  }

  void zero_grads() {
    for (auto& p : params_) p->zero_grad();
  }

private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

struct Node {
  Mat value;
  Mat grad;
  std::vector<Node*> parents;
  std::function<void(Node&)> backward_fn;  // adds into parents' grads
  Parameter* param = nullptr;              // set on parameter leaves
};

class Graph {
public:
  // training=false disables dropout; the rng drives dropout masks only
  explicit Graph(bool training = false, Rng* rng = nullptr)
      : training_(training), rng_(rng) {}

  Node* constant(Mat v) { return make(std::move(v), {}, nullptr); }

  Node* leaf(Parameter& p) {
    Node* n = make(p.value, {}, nullptr);
    n->param = &p;
    return n;
  }

  Node* matmul(Node* a, Node* b) {
    return make(a->value * b->value, {a, b}, [](Node& n) {
      n.parents[0]->grad += n.grad * n.parents[1]->value.transpose();
      n.parents[1]->grad += n.parents[0]->value.transpose() * n.grad;
    });
  }

  Node* transpose(Node* a) {
    return make(a->value.transpose(), {a},
                [](Node& n) { n.parents[0]->grad += n.grad.transpose(); });
  }

  Node* add(Node* a, Node* b) {
    return make(a->value + b->value, {a, b}, [](Node& n) {
      n.parents[0]->grad += n.grad;
      n.parents[1]->grad += n.grad;
    });
  }

  // X (t x k) plus a bias row v (1 x k) broadcast over rows
  Node* add_rowvec(Node* x, Node* v) {
    Mat out = x->value;
    out.rowwise() += v->value.row(0);
    return make(std::move(out), {x, v}, [](Node& n) {
      n.parents[0]->grad += n.grad;
      n.parents[1]->grad.row(0) += n.grad.colwise().sum();
    });
  }

  Node* sub(Node* a, Node* b) {
    return make(a->value - b->value, {a, b}, [](Node& n) {
      n.parents[0]->grad += n.grad;
      n.parents[1]->grad -= n.grad;
    });
  }

  Node* cmul(Node* a, Node* b) {
    return make(a->value.cwiseProduct(b->value), {a, b}, [](Node& n) {
      n.parents[0]->grad += n.grad.cwiseProduct(n.parents[1]->value);
      n.parents[1]->grad += n.grad.cwiseProduct(n.parents[0]->value);
    });
  }

  Node* scale(Node* a, double c) {
    return make(a->value * c, {a}, [c](Node& n) { n.parents[0]->grad += n.grad * c; });
  }

  Node* sigmoid(Node* a) {
    Mat s = a->value.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
    return make(std::move(s), {a}, [](Node& n) {
      n.parents[0]->grad +=
          n.grad.cwiseProduct(n.value.cwiseProduct(Mat::Ones(n.value.rows(), n.value.cols()) - n.value));
    });
  }

  Node* tanh(Node* a) {
    Mat t = a->value.array().tanh().matrix();
    return make(std::move(t), {a}, [](Node& n) {
      n.parents[0]->grad += n.grad.cwiseProduct(
          (Mat::Ones(n.value.rows(), n.value.cols()) - n.value.cwiseProduct(n.value)));
    });
  }

  Node* relu(Node* a) {
    Mat r = a->value.cwiseMax(0.0);
    return make(std::move(r), {a}, [](Node& n) {
      n.parents[0]->grad += n.grad.cwiseProduct(
          n.parents[0]->value.unaryExpr([](double x) { return x > 0.0 ? 1.0 : 0.0; }));
    });
  }

  // softmax over all entries of a column or row vector
  Node* softmax_vec(Node* a) {
    const double mx = a->value.maxCoeff();
    Mat e = (a->value.array() - mx).exp().matrix();
    Mat y = e / e.sum();
    return make(std::move(y), {a}, [](Node& n) {
      const double dot = n.value.cwiseProduct(n.grad).sum();
      n.parents[0]->grad +=
          n.value.cwiseProduct(n.grad - Mat::Constant(n.grad.rows(), n.grad.cols(), dot));
    });
  }

  Node* slice_cols(Node* a, Eigen::Index c0, Eigen::Index w) {
    return make(a->value.middleCols(c0, w), {a}, [c0, w](Node& n) {
      n.parents[0]->grad.middleCols(c0, w) += n.grad;
    });
  }

  Node* slice_row(Node* a, Eigen::Index r) {
    return make(a->value.row(r), {a},
                [r](Node& n) { n.parents[0]->grad.row(r) += n.grad.row(0); });
  }

  // stack 1 x d rows into a t x d matrix
  Node* stack_rows(const std::vector<Node*>& rows) {
    Mat out(static_cast<Eigen::Index>(rows.size()), rows[0]->value.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = rows[i]->value.row(0);
    return make(std::move(out), rows, [](Node& n) {
      for (std::size_t i = 0; i < n.parents.size(); ++i)
        n.parents[i]->grad.row(0) += n.grad.row(static_cast<Eigen::Index>(i));
    });
  }

  Node* reverse_rows(Node* a) {
    return make(a->value.colwise().reverse(), {a},
                [](Node& n) { n.parents[0]->grad += n.grad.colwise().reverse(); });
  }

  Node* concat_cols(Node* a, Node* b) {
    Mat out(a->value.rows(), a->value.cols() + b->value.cols());
    out << a->value, b->value;
    return make(std::move(out), {a, b}, [](Node& n) {
      const Eigen::Index ca = n.parents[0]->value.cols();
      n.parents[0]->grad += n.grad.leftCols(ca);
      n.parents[1]->grad += n.grad.rightCols(n.grad.cols() - ca);
    });
  }

  Node* sum(Node* a) {
    Mat out(1, 1);
    out(0, 0) = a->value.sum();
    return make(std::move(out), {a}, [](Node& n) {
      n.parents[0]->grad.array() += n.grad(0, 0);
    });
  }

  Node* mean_rows(Node* a) {  // t x d -> 1 x d
    Mat out = a->value.colwise().mean();
    return make(std::move(out), {a}, [](Node& n) {
      const double inv = 1.0 / static_cast<double>(n.parents[0]->value.rows());
      n.parents[0]->grad += (Mat::Ones(n.parents[0]->value.rows(), 1) * n.grad.row(0)) * inv;
    });
  }

  // rows of the embedding table selected by token id; gradients go straight
  // into the table's grad rows (no full-table copy on the tape)
  Node* embedding(Parameter& table, const std::vector<int>& ids) {
    Mat out(static_cast<Eigen::Index>(ids.size()), table.value.cols());
    for (std::size_t t = 0; t < ids.size(); ++t)
      out.row(static_cast<Eigen::Index>(t)) = table.value.row(ids[t]);
    Parameter* tp = &table;
    auto ids_copy = ids;
    return make(std::move(out), {}, [tp, ids_copy](Node& n) {
      for (std::size_t t = 0; t < ids_copy.size(); ++t)
        tp->grad.row(ids_copy[t]) += n.grad.row(static_cast<Eigen::Index>(t));
    });
  }

  // inverted dropout; identity when the graph is not in training mode
  Node* dropout(Node* a, double rate) {
    if (!training_ || rate <= 0.0) return a;
    if (!rng_) throw ModelError("dropout requires an rng in training mode");
    Mat mask(a->value.rows(), a->value.cols());
    const double keep = 1.0 - rate;
    for (Eigen::Index i = 0; i < mask.rows(); ++i)
      for (Eigen::Index j = 0; j < mask.cols(); ++j)
        mask(i, j) = rng_->uniform() < keep ? 1.0 / keep : 0.0;
    Mat out = a->value.cwiseProduct(mask);
    return make(std::move(out), {a}, [mask](Node& n) {
      n.parents[0]->grad += n.grad.cwiseProduct(mask);
    });
  }

  // binary cross-entropy on a probability already in (0,1); 1 x 1 nodes
  Node* bce_prob(Node* p, double target) {
    const double eps = 1e-12;
    const double pv = p->value(0, 0);
    Mat out(1, 1);
    out(0, 0) = -(target * std::log(pv + eps) + (1.0 - target) * std::log(1.0 - pv + eps));
    return make(std::move(out), {p}, [target, eps](Node& n) {
      const double pv = n.parents[0]->value(0, 0);
      n.parents[0]->grad(0, 0) +=
          n.grad(0, 0) * (-(target / (pv + eps)) + (1.0 - target) / (1.0 - pv + eps));
    });
  }

  // numerically stable BCE on a logit; 1 x 1 nodes
  Node* bce_logit(Node* z, double target) {
    const double zv = z->value(0, 0);
    Mat out(1, 1);
    out(0, 0) = std::max(zv, 0.0) - zv * target + std::log1p(std::exp(-std::abs(zv)));
    return make(std::move(out), {z}, [target](Node& n) {
      const double zv = n.parents[0]->value(0, 0);
      const double s = 1.0 / (1.0 + std::exp(-zv));
      n.parents[0]->grad(0, 0) += n.grad(0, 0) * (s - target);
    });
  }

  // cross-entropy of a 1 x k logit row against a class index
  Node* ce_logits(Node* z, int target) {
    const double mx = z->value.maxCoeff();
    const double lse = mx + std::log((z->value.array() - mx).exp().sum());
    Mat out(1, 1);
    out(0, 0) = lse - z->value(0, target);
    return make(std::move(out), {z}, [target](Node& n) {
      const double mx = n.parents[0]->value.maxCoeff();
      Mat sm = (n.parents[0]->value.array() - mx).exp().matrix();
      sm /= sm.sum();
      sm(0, target) -= 1.0;
      n.parents[0]->grad += n.grad(0, 0) * sm;
    });
  }

  // Accumulates d(root)/d(param) into every reachable Parameter's grad.
  void backward(Node* root) {
    if (root->value.size() != 1) throw ModelError("backward expects a scalar loss");
    std::vector<Node*> topo;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack{{root, 0}};
    seen.insert(root);
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < node->parents.size()) {
        Node* p = node->parents[next++];
        if (seen.insert(p).second) stack.push_back({p, 0});
      } else {
        topo.push_back(node);
        stack.pop_back();
      }
    }
    root->grad(0, 0) = 1.0;
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
      Node* n = *it;
      if (n->backward_fn) n->backward_fn(*n);
    }
    for (Node* n : topo)
      if (n->param) n->param->grad += n->grad;
  }

  bool training() const { return training_; }
  std::size_t size() const { return nodes_.size(); }

private:
  Node* make(Mat value, std::vector<Node*> parents, std::function<void(Node&)> fn) {
    nodes_.emplace_back();
    Node& n = nodes_.back();
    n.value = std::move(value);
    n.grad.setZero(n.value.rows(), n.value.cols());
    n.parents = std::move(parents);
    n.backward_fn = std::move(fn);
    return &n;
  }

  std::deque<Node> nodes_;
  bool training_;
  Rng* rng_;
};

}  // namespace revcon::nn
