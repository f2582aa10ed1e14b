#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "idflow/params.hpp"

namespace idflow {

/// Adam with bias correction (beta1 0.9, beta2 0.999, eps 1e-8).
template <typename T>
class AdamT {
 public:
  explicit AdamT(const ModelParamsT<T>& params, double beta1 = 0.9, double beta2 = 0.999,
                 double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const auto& [name, t] : params) {
      m_.emplace_back(t.values().size(), T(0));
      v_.emplace_back(t.values().size(), T(0));
    }
  }

  int64_t steps_taken() const { return t_; }

  void step(ModelParamsT<T>& params, double lr) {
    if (m_.size() != params.size())
      throw Error(ErrorKind::Contract, "optimizer state does not match parameter set");
    ++t_;
    const T bc1 = static_cast<T>(1.0 - std::pow(beta1_, static_cast<double>(t_)));
    const T bc2 = static_cast<T>(1.0 - std::pow(beta2_, static_cast<double>(t_)));
    const T b1 = static_cast<T>(beta1_), b2 = static_cast<T>(beta2_);
    const T eps = static_cast<T>(eps_), rate = static_cast<T>(lr);
    size_t k = 0;
    for (auto& [name, t] : params) {
      if (!t.has_grad())
        throw Error(ErrorKind::Contract, "missing gradient for parameter " + name);
      const auto& g = std::as_const(t).grad();
      auto& m = m_[k];
      auto& v = v_[k];
      auto& val = t.values();
      for (size_t i = 0; i < val.size(); ++i) {
        m[i] = b1 * m[i] + (T(1) - b1) * g[i];
        v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
        const T mhat = m[i] / bc1;
        const T vhat = v[i] / bc2;
        val[i] -= rate * mhat / (std::sqrt(vhat) + eps);
      }
      ++k;
    }
  }

 private:
  double beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::vector<std::vector<T>> m_, v_;
};

using Adam = AdamT<float>;

/// One-cycle schedule: cosine warmup over the first 30% of steps from
/// max_lr/25 up to max_lr, then cosine decay down to max_lr/1e4.
double onecycle_lr(int64_t step, int64_t total_steps, double max_lr);

}  // namespace idflow
