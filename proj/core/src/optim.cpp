#include "idflow/optim.hpp"

#include <cmath>

#include "idflow/error.hpp"

namespace idflow {
namespace {

double cosine_blend(double from, double to, double tau) {
  return to + (from - to) * (1.0 + std::cos(M_PI * tau)) / 2.0;
}

}  // namespace

double onecycle_lr(int64_t step, int64_t total_steps, double max_lr) {
  if (total_steps < 1) throw Error(ErrorKind::Domain, "onecycle_lr: total_steps must be >= 1");
  if (step < 0 || step > total_steps)
    throw Error(ErrorKind::Domain, "onecycle_lr: step outside [0, total_steps]");

  const double start_lr = max_lr / 25.0;
  const double end_lr = max_lr / 1e4;
  const int64_t warmup = std::max<int64_t>(1, std::llround(0.3 * static_cast<double>(total_steps)));
  if (step <= warmup)
    return cosine_blend(start_lr, max_lr, static_cast<double>(step) / static_cast<double>(warmup));
  return cosine_blend(max_lr, end_lr,
                      static_cast<double>(step - warmup) / static_cast<double>(total_steps - warmup));
}

}  // namespace idflow
