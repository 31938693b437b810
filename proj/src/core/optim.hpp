#pragma once

#include "core/common.hpp"

namespace bothp {

// Adam over a fixed, positionally-stable list of tensors.
class Adam {
 public:
  explicit Adam(double lr) : lr_(lr) {}

  void step(const std::vector<Mat*>& params, const std::vector<Mat>& grads) {
    if (params.size() != grads.size()) throw ValidationError("Adam::step: param/grad count mismatch");
    if (m_.empty()) {
      for (const Mat* p : params) {
        m_.push_back(Mat::Zero(p->rows(), p->cols()));
        v_.push_back(Mat::Zero(p->rows(), p->cols()));
      }
    }
    if (m_.size() != params.size()) throw ValidationError("Adam::step: tensor list changed size");
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (size_t i = 0; i < params.size(); ++i) {
      const Mat& g = grads[i];
      m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
      v_[i] = (beta2_ * v_[i].array() + (1.0 - beta2_) * g.array().square()).matrix();
      params[i]->array() -=
          lr_ * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + eps_);
    }
  }

 private:
  double lr_;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  int t_ = 0;
  std::vector<Mat> m_, v_;
};

}  // namespace bothp
