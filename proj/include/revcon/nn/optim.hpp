// Adam with decoupled weight decay over a fixed parameter list.
#pragma once

#include <cmath>
#include <vector>

#include "revcon/nn/graph.hpp"

namespace revcon::nn {

class Adam {
public:
  struct Options {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;  // decoupled: p -= lr * wd * p
  };

  Adam(std::vector<Parameter*> params, Options opts)
      : params_(std::move(params)), opts_(opts) {
    for (Parameter* p : params_) {
      m_.emplace_back(Mat::Zero(p->value.rows(), p->value.cols()));
      v_.emplace_back(Mat::Zero(p->value.rows(), p->value.cols()));
    }
  }

  void step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(opts_.beta1, t_);
    const double bc2 = 1.0 - std::pow(opts_.beta2, t_);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      Parameter& p = *params_[i];
      m_[i] = opts_.beta1 * m_[i] + (1.0 - opts_.beta1) * p.grad;
      v_[i] = opts_.beta2 * v_[i] + (1.0 - opts_.beta2) * p.grad.cwiseProduct(p.grad);
      const Mat mhat = m_[i] / bc1;
      const Mat vhat = v_[i] / bc2;
      p.value -= opts_.lr * mhat.cwiseQuotient(
                     (vhat.cwiseSqrt().array() + opts_.eps).matrix());
      if (opts_.weight_decay > 0.0) p.value -= opts_.lr * opts_.weight_decay * p.value;
    }
  }

  void zero_grad() {
    for (Parameter* p : params_) p->zero_grad();
  }

private:
  std::vector<Parameter*> params_;
  Options opts_;
  std::vector<Mat> m_, v_;
  int t_ = 0;
};

}  // namespace revcon::nn
