#include "idflow/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "idflow/error.hpp"

namespace idflow {
namespace {

constexpr double kRadToDeg = 180.0 / M_PI;

void check_fields(const FlowField& pred, const FlowField& gt) {
  if (pred.height != gt.height || pred.width != gt.width)
    throw Error(ErrorKind::Shape, "metric: resolutions disagree");
}

}  // namespace

void MetricsAccumulator::add(const FlowField& pred, const FlowField& gt) {
  check_fields(pred, gt);
  for (size_t i = 0; i < gt.mask.size(); ++i) {
    if (!gt.mask[i] || !pred.mask[i]) continue;
    const double du = static_cast<double>(pred.u[i]) - gt.u[i];
    const double dv = static_cast<double>(pred.v[i]) - gt.v[i];
    const double err = std::sqrt(du * du + dv * dv);
    epe_sum += err;
    for (int n = 1; n <= 3; ++n)
      if (err > n) ++over[n - 1];

    const double dot = 1.0 + static_cast<double>(pred.u[i]) * gt.u[i] +
                       static_cast<double>(pred.v[i]) * gt.v[i];
    const double np = std::sqrt(1.0 + static_cast<double>(pred.u[i]) * pred.u[i] +
                                static_cast<double>(pred.v[i]) * pred.v[i]);
    const double ng =
        std::sqrt(1.0 + static_cast<double>(gt.u[i]) * gt.u[i] + static_cast<double>(gt.v[i]) * gt.v[i]);
    ae_sum += std::acos(std::clamp(dot / (np * ng), -1.0, 1.0)) * kRadToDeg;
    ++count;
  }
}

MetricsReport MetricsAccumulator::report() const {
  if (count == 0) throw Error(ErrorKind::Domain, "metric: empty valid mask");
  MetricsReport r;
  r.valid_count = count;
  r.epe = epe_sum / static_cast<double>(count);
  r.ae = ae_sum / static_cast<double>(count);
  for (int n = 1; n <= 3; ++n)
    r.npe[n] = 100.0 * static_cast<double>(over[n - 1]) / static_cast<double>(count);
  return r;
}

double epe(const FlowField& pred, const FlowField& gt) {
  MetricsAccumulator acc;
  acc.add(pred, gt);
  return acc.report().epe;
}

double ae(const FlowField& pred, const FlowField& gt) {
  MetricsAccumulator acc;
  acc.add(pred, gt);
  return acc.report().ae;
}

double npe(const FlowField& pred, const FlowField& gt, int n) {
  if (n < 1 || n > 3) throw Error(ErrorKind::Domain, "npe: n must be 1, 2 or 3");
  MetricsAccumulator acc;
  acc.add(pred, gt);
  return acc.report().npe.at(n);
}

MetricsReport compute_metrics(const FlowField& pred, const FlowField& gt) {
  MetricsAccumulator acc;
  acc.add(pred, gt);
  return acc.report();
}

}  // namespace idflow
