// LSTM and BiLSTM layers expressed through the autograd graph. Input is a
// t x e matrix of embedded tokens (rows = time steps); output stacks the
// hidden state rows, t x h for one direction or t x 2h for a BiLSTM.
#pragma once

#include <string>
#include <vector>

#include "revcon/nn/graph.hpp"

namespace revcon::nn {

// Gate layout inside the fused weight matrices: [input, forget, output, cell].
struct LstmParams {
  Parameter* wx = nullptr;  // e x 4h
  Parameter* wh = nullptr;  // h x 4h
  Parameter* b = nullptr;   // 1 x 4h
  Eigen::Index hidden = 0;

  static LstmParams create(ParameterSet& set, const std::string& prefix, Eigen::Index emb,
                           Eigen::Index hidden, Rng& rng) {
    LstmParams p;
    p.hidden = hidden;
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    p.wx = set.add_uniform(prefix + ".wx", emb, 4 * hidden, bound, rng);
    p.wh = set.add_uniform(prefix + ".wh", hidden, 4 * hidden, bound, rng);
    p.b = set.add_uniform(prefix + ".b", 1, 4 * hidden, bound, rng);
    return p;
  }
};

// Runs the recurrence over the rows of x (t x e), returns t x h.
inline Node* lstm_forward(Graph& g, const LstmParams& p, Node* x) {
  const Eigen::Index t_steps = x->value.rows();
  const Eigen::Index h = p.hidden;
  Node* wx = g.leaf(*p.wx);
  Node* wh = g.leaf(*p.wh);
  Node* b = g.leaf(*p.b);
  Node* h_prev = g.constant(Mat::Zero(1, h));
  Node* c_prev = g.constant(Mat::Zero(1, h));
  std::vector<Node*> hs;
  hs.reserve(t_steps);
  for (Eigen::Index t = 0; t < t_steps; ++t) {
    Node* xt = g.slice_row(x, t);
    Node* z = g.add(g.add(g.matmul(xt, wx), g.matmul(h_prev, wh)), b);
    Node* i = g.sigmoid(g.slice_cols(z, 0, h));
    Node* f = g.sigmoid(g.slice_cols(z, h, h));
    Node* o = g.sigmoid(g.slice_cols(z, 2 * h, h));
    Node* cand = g.tanh(g.slice_cols(z, 3 * h, h));
    Node* c = g.add(g.cmul(f, c_prev), g.cmul(i, cand));
    Node* ht = g.cmul(o, g.tanh(c));
    hs.push_back(ht);
    h_prev = ht;
    c_prev = c;
  }
  return g.stack_rows(hs);
}

struct BiLstmParams {
  LstmParams fwd;
  LstmParams bwd;

  static BiLstmParams create(ParameterSet& set, const std::string& prefix, Eigen::Index emb,
                             Eigen::Index hidden, Rng& rng) {
    BiLstmParams p;
    p.fwd = LstmParams::create(set, prefix + ".fwd", emb, hidden, rng);
    p.bwd = LstmParams::create(set, prefix + ".bwd", emb, hidden, rng);
    return p;
  }
};

// t x e -> t x 2h; the backward direction reads the sequence reversed and is
// flipped back so row t always describes token t.
inline Node* bilstm_forward(Graph& g, const BiLstmParams& p, Node* x) {
  Node* hf = lstm_forward(g, p.fwd, x);
  Node* hb = g.reverse_rows(lstm_forward(g, p.bwd, g.reverse_rows(x)));
  return g.concat_cols(hf, hb);
}

}  // namespace revcon::nn
