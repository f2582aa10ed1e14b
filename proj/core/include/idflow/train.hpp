#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "idflow/idnet.hpp"
#include "idflow/metrics.hpp"
#include "idflow/schemes.hpp"
#include "idflow/synth.hpp"

namespace idflow {

struct SceneData {
  std::vector<EventWindow> windows;
  std::vector<FlowField> gts;
};

struct Dataset {
  std::vector<SceneData> scenes;
  int height = 0;
  int width = 0;

  int64_t window_count() const;
};

/// On-disk layout written by the generator CLI:
///   <dir>/manifest.txt and <dir>/scene_NNNN/{win_KKK.evt1, gt_KKK.flo, gt_KKK.pgm}
void save_dataset(const Dataset& data, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

/// In-memory dataset of freshly generated scenes; spec.seed is advanced per
/// scene so every scene differs.
Dataset make_dataset(SceneSpec spec, int scenes, int steps_per_scene);

struct TrainConfig {
  std::string scheme = "id";  // "id" or "tid"
  IdConfig id{};
  TidConfig tid{};
  int steps = 2000;
  int batch = 3;
  double lr_max = 1e-4;
  double p_hflip = 0.5;
  double p_vflip = 0.1;
  int crop_h = 0;  // 0 = no crop
  int crop_w = 0;
  uint64_t seed = 1;

  void validate() const;
};

struct TrainLogRow {
  int step = 0;
  double loss = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  std::vector<TrainLogRow> log;
};

/// Runs the configured scheme's optimization loop on the dataset. Loss
/// follows the scheme objective (final-flow L1 for ID, geometrically
/// weighted current+future L1 for TID). Deterministic for a fixed seed.
/// Throws a Numeric error if the loss stops being finite.
TrainResult train_model(IdNet& net, const Dataset& data, const TrainConfig& cfg);

void write_loss_csv(const std::filesystem::path& path, const std::vector<TrainLogRow>& rows);

MetricsReport evaluate_id(IdNet& net, const Dataset& data, const IdConfig& cfg);

struct TidEval {
  std::vector<double> epe_per_step;       // indexed by timestep t
  std::vector<double> residual_per_step;  // mean |residual flow| at t
  MetricsReport overall;
  double prior_invalid_fraction = 0.0;    // holes in propagated priors (transport mode)
};

TidEval evaluate_tid(IdNet& net, const Dataset& data, const TidConfig& cfg);

}  // namespace idflow
