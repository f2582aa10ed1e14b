#include "idflow/schemes.hpp"

#include <cmath>
#include <cstdio>
#include <memory>

#include "idflow/error.hpp"
#include "idflow/motion_comp.hpp"
#include "idflow/nn.hpp"

namespace idflow {

void TidConfig::validate() const {
  if (seq_len < 1) throw Error(ErrorKind::Domain, "tid: sequence length must be >= 1");
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorKind::Domain, "tid: gamma must be in (0,1)");
  if (bins < 2) throw Error(ErrorKind::Domain, "tid: bins must be >= 2");
}

IdResult run_id(const EventWindow& window, ResidualFlowExtractor& extractor, const IdConfig& cfg) {
  if (cfg.iterations < 1) throw Error(ErrorKind::Domain, "run_id: iterations must be >= 1");
  if (window.events.empty()) throw Error(ErrorKind::Domain, "run_id: empty event window");
  const int h = window.height, w = window.width;

  IdResult result;
  VoxelGrid raw = build_voxel_grid(window, cfg.bins);
  VoxelGrid deblurred;
  const VoxelGrid* current = &raw;
  WarpedEvents warped = to_warped(window);
  Tensor state = extractor.initial_state(h, w);

  for (int i = 0; i < cfg.iterations; ++i) {
    auto out = extractor.extract(*current, state);
    result.flow_tensor = i == 0 ? out.residual : add(result.flow_tensor, out.residual);
    result.residual_mean_abs.push_back(mean_abs(out.residual));
    result.iterates.push_back(tensor_to_flow(result.flow_tensor));

    if (i + 1 < cfg.iterations) {
      state = cfg.wsm_enabled ? extractor.warm_start(result.flow_tensor)
                              : extractor.initial_state(h, w);
      if (cfg.deblur_enabled) {
        warped = deblur_events(warped, tensor_to_flow(out.residual), window.t_begin);
        deblurred = rebin(warped, cfg.bins, h, w);
        current = &deblurred;
      }
    }
  }
  result.flow = result.iterates.back();
  return result;
}

TidStepResult run_tid_step(const EventWindow& window, const Tensor& prior,
                           ResidualFlowExtractor& extractor, const TidConfig& cfg) {
  cfg.validate();
  if (window.events.empty()) throw Error(ErrorKind::Domain, "run_tid_step: empty event window");
  if (prior.rank() != 3 || prior.dim(0) != 2 || prior.dim(1) != window.height ||
      prior.dim(2) != window.width)
    throw Error(ErrorKind::Shape, "run_tid_step: prior resolution does not match the window");

  Tensor state = extractor.warm_start(prior);
  const FlowField prior_field = tensor_to_flow(prior);
  WarpedEvents warped = deblur_events(window, prior_field, window.t_begin);
  VoxelGrid grid = rebin(warped, cfg.bins, window.height, window.width);

  auto out = extractor.extract(grid, state);

  TidStepResult result;
  result.flow_tensor = add(prior, out.residual);
  result.flow = tensor_to_flow(result.flow_tensor);
  result.residual_mean_abs = mean_abs(out.residual);

  if (cfg.propagation == TidConfig::Propagation::kLearned) {
    if (!out.future.has_value())
      throw Error(ErrorKind::Contract,
                  "run_tid_step: learned propagation requires a future-flow head");
    result.next_prior = *out.future;
    result.next_prior_field = tensor_to_flow(result.next_prior);
  } else {
    result.next_prior_field = forward_transport(result.flow);
    // transported priors re-enter as plain values; the warp is not a gradient path
    result.next_prior = flow_to_tensor<float>(result.next_prior_field);
  }
  return result;
}

FlowField forward_transport(const FlowField& flow) {
  flow.validate();
  const int h = flow.height, w = flow.width;
  FlowField out = FlowField::zeros(h, w, /*valid=*/false);
  std::vector<float> best_mag(static_cast<size_t>(h) * w, -1.f);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t si = flow.idx(y, x);
      if (!flow.mask[si]) continue;
      const float u = flow.u[si], v = flow.v[si];
      const double dx = x + static_cast<double>(u);
      const double dy = y + static_cast<double>(v);
      const int x0 = static_cast<int>(std::floor(dx));
      const int y0 = static_cast<int>(std::floor(dy));
      const double fx = dx - x0, fy = dy - y0;
      const double wx[2] = {1.0 - fx, fx};
      const double wy[2] = {1.0 - fy, fy};
      const float mag = u * u + v * v;
      for (int yi = 0; yi < 2; ++yi) {
        const int yy = y0 + yi;
        if (yy < 0 || yy >= h) continue;
        for (int xi = 0; xi < 2; ++xi) {
          const int xx = x0 + xi;
          if (xx < 0 || xx >= w) continue;
          if (wy[yi] * wx[xi] <= 1e-6) continue;
          const size_t di = static_cast<size_t>(yy) * w + xx;
          if (mag > best_mag[di]) {
            best_mag[di] = mag;
            out.u[di] = u;
            out.v[di] = v;
            out.mask[di] = 1;
          }
        }
      }
    }
  }
  return out;
}

double loss_id(const FlowField& final_flow, const FlowField& gt) {
  if (final_flow.height != gt.height || final_flow.width != gt.width)
    throw Error(ErrorKind::Shape, "loss_id: resolutions disagree");
  double total = 0.0;
  int64_t count = 0;
  for (size_t i = 0; i < gt.mask.size(); ++i) {
    if (!gt.mask[i] || !final_flow.mask[i]) continue;
    total += std::abs(static_cast<double>(final_flow.u[i]) - gt.u[i]);
    total += std::abs(static_cast<double>(final_flow.v[i]) - gt.v[i]);
    count += 2;
  }
  if (count == 0) throw Error(ErrorKind::Domain, "loss_id: empty mask");
  return total / static_cast<double>(count);
}

double tid_weight(int t, int seq_len, double gamma) {
  return std::pow(gamma, static_cast<double>(seq_len - t));
}

double loss_tid(const std::vector<TidTrace>& traces, const std::vector<FlowField>& gts,
                double gamma) {
  if (traces.empty()) throw Error(ErrorKind::Contract, "loss_tid: no steps");
  if (gts.size() < traces.size())
    throw Error(ErrorKind::Contract, "loss_tid: ground-truth count does not cover the steps");
  const int seq_len = static_cast<int>(traces.size()) - 1;
  double total = 0.0;
  for (int t = 0; t < static_cast<int>(traces.size()); ++t) {
    double term = loss_id(traces[t].flow, gts[t]);
    if (traces[t].future.has_value()) {
      if (t + 1 >= static_cast<int>(gts.size()))
        throw Error(ErrorKind::Contract, "loss_tid: future term lacks ground truth");
      term += loss_id(*traces[t].future, gts[t + 1]);
    }
    total += tid_weight(t, seq_len, gamma) * term;
  }
  return total;
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& rows) {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  std::fprintf(f, "iter_or_t,mean_abs_residual,epe_vs_gt\n");
  for (const TraceRow& r : rows) {
    if (r.epe_vs_gt.has_value())
      std::fprintf(f, "%d,%.9g,%.9g\n", r.iter_or_t, r.mean_abs_residual, *r.epe_vs_gt);
    else
      std::fprintf(f, "%d,%.9g,\n", r.iter_or_t, r.mean_abs_residual);
  }
  std::fclose(f);
}

}  // namespace idflow
