#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "idflow/events.hpp"
#include "idflow/flow.hpp"
#include "idflow/idnet.hpp"
#include "idflow/tensor.hpp"

namespace idflow {

/// Iterative deblurring over one batch of events.
struct IdConfig {
  int iterations = 4;
  bool deblur_enabled = true;
  bool wsm_enabled = true;
  int bins = 15;  // event-volume bins fed to the extractor
};

/// Temporal iterative deblurring over streaming windows.
struct TidConfig {
  int seq_len = 5;     // T; the training loss spans steps t = 0..T
  double gamma = 0.8;  // geometric loss weighting, in (0, 1)
  enum class Propagation { kLearned, kDirectTransport };
  Propagation propagation = Propagation::kLearned;
  int bins = 15;

  void validate() const;
};

struct IdResult {
  FlowField flow;                     // final estimate (== iterates.back())
  Tensor flow_tensor;                 // graph-carrying sum of residuals
  std::vector<FlowField> iterates;    // F_1 .. F_N
  std::vector<double> residual_mean_abs;
};

/// Algorithm: F_0 = 0, M_0 = 0, bins_0 = raw; each iteration extracts a
/// residual from the current bins, accumulates F, warm-starts the memory from
/// the accumulated flow (when enabled) and deblurs further by the residual
/// (when enabled; otherwise raw bins are re-fed).
IdResult run_id(const EventWindow& window, ResidualFlowExtractor& extractor, const IdConfig& cfg);

struct TidStepResult {
  FlowField flow;           // F^t = prior + residual
  Tensor flow_tensor;       // graph-carrying
  Tensor next_prior;        // F̂^{t+1}: learned-head output, or the detached transported field
  FlowField next_prior_field;  // with the transport hole mask when applicable
  double residual_mean_abs;
};

/// One TID timestep: warm-start memory from the prior, deblur the window by
/// the prior, one extractor pass, add the residual. The learned propagation
/// mode requires an extractor with a future head.
TidStepResult run_tid_step(const EventWindow& window, const Tensor& prior,
                           ResidualFlowExtractor& extractor, const TidConfig& cfg);

/// Splats each valid pixel's flow to x + F(x) (4-corner bilinear footprint);
/// conflicting writes keep the larger-magnitude flow, unfilled pixels get
/// zero flow and an invalid mask.
FlowField forward_transport(const FlowField& flow);

/// Masked mean L1 over both flow components (the ID training objective).
double loss_id(const FlowField& final_flow, const FlowField& gt);

/// Geometric weight gamma^(T-t) for step t of a T+1-step sequence.
double tid_weight(int t, int seq_len, double gamma);

struct TidTrace {
  FlowField flow;                   // F^t
  std::optional<FlowField> future;  // F̂^{t+1}, absent when no GT exists for it
};

/// Sum over steps of gamma^(T-t) * (L1(gt^t, F^t) + L1(gt^{t+1}, F̂^{t+1})),
/// with T = traces.size()-1. Future terms are included only where present;
/// gts must cover every referenced index.
double loss_tid(const std::vector<TidTrace>& traces, const std::vector<FlowField>& gts,
                double gamma);

struct TraceRow {
  int iter_or_t = 0;
  double mean_abs_residual = 0.0;
  std::optional<double> epe_vs_gt;
};

/// CSV with header iter_or_t,mean_abs_residual,epe_vs_gt.
void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& rows);

}  // namespace idflow
