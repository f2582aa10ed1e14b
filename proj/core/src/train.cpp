#include "idflow/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "idflow/augment.hpp"
#include "idflow/error.hpp"
#include "idflow/nn.hpp"
#include "idflow/optim.hpp"
#include "idflow/rng.hpp"

namespace idflow {
namespace {

Tensor gt_loss(const Tensor& pred, const FlowField& gt) {
  return l1_loss(pred, flow_to_tensor<float>(gt), gt.mask);
}

struct TidStepLosses {
  std::vector<Tensor> terms;
  std::vector<double> weights;
};

}  // namespace

int64_t Dataset::window_count() const {
  int64_t n = 0;
  for (const auto& s : scenes) n += static_cast<int64_t>(s.windows.size());
  return n;
}

void save_dataset(const Dataset& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::FILE* manifest = std::fopen((dir / "manifest.txt").string().c_str(), "wb");
  if (!manifest) throw Error(ErrorKind::Io, "cannot write manifest in " + dir.string());
  std::fprintf(manifest, "scenes %zu\nresolution %d %d\n", data.scenes.size(), data.height,
               data.width);
  char name[64];
  for (size_t s = 0; s < data.scenes.size(); ++s) {
    std::snprintf(name, sizeof(name), "scene_%04zu", s);
    const std::filesystem::path scene_dir = dir / name;
    std::filesystem::create_directories(scene_dir);
    const SceneData& scene = data.scenes[s];
    std::fprintf(manifest, "%s windows %zu events", name, scene.windows.size());
    for (size_t k = 0; k < scene.windows.size(); ++k) {
      std::snprintf(name, sizeof(name), "win_%03zu.evt1", k);
      write_events(scene.windows[k], scene_dir / name);
      std::snprintf(name, sizeof(name), "gt_%03zu.flo", k);
      write_flo(scene.gts[k], scene_dir / name);
      std::fprintf(manifest, " %zu", scene.windows[k].events.size());
    }
    std::fprintf(manifest, "\n");
    std::snprintf(name, sizeof(name), "scene_%04zu", s);
  }
  std::fclose(manifest);
}

Dataset load_dataset(const std::filesystem::path& dir) {
  if (!std::filesystem::exists(dir / "manifest.txt"))
    throw Error(ErrorKind::Io, "no dataset manifest in " + dir.string());
  Dataset data;
  char name[64];
  for (size_t s = 0;; ++s) {
    std::snprintf(name, sizeof(name), "scene_%04zu", s);
    const std::filesystem::path scene_dir = dir / name;
    if (!std::filesystem::exists(scene_dir)) break;
    SceneData scene;
    for (size_t k = 0;; ++k) {
      std::snprintf(name, sizeof(name), "win_%03zu.evt1", k);
      if (!std::filesystem::exists(scene_dir / name)) break;
      scene.windows.push_back(read_events(scene_dir / name));
      std::snprintf(name, sizeof(name), "gt_%03zu.flo", k);
      scene.gts.push_back(read_flo(scene_dir / name));
    }
    if (scene.windows.empty())
      throw Error(ErrorKind::Io, "scene directory without windows: " + scene_dir.string());
    data.height = scene.windows[0].height;
    data.width = scene.windows[0].width;
    data.scenes.push_back(std::move(scene));
  }
  if (data.scenes.empty()) throw Error(ErrorKind::Io, "empty dataset: " + dir.string());
  return data;
}

Dataset make_dataset(SceneSpec spec, int scenes, int steps_per_scene) {
  Dataset data;
  data.height = spec.height;
  data.width = spec.width;
  const uint64_t base_seed = spec.seed;
  for (int s = 0; s < scenes; ++s) {
    spec.seed = base_seed + static_cast<uint64_t>(s) * 0x9e3779b9ull;
    SceneData scene;
    for (auto& [w, gt] : generate_sequence(spec, steps_per_scene)) {
      scene.windows.push_back(std::move(w));
      scene.gts.push_back(std::move(gt));
    }
    data.scenes.push_back(std::move(scene));
  }
  return data;
}

void TrainConfig::validate() const {
  if (scheme != "id" && scheme != "tid")
    throw Error(ErrorKind::Contract, "scheme must be 'id' or 'tid'");
  if (steps < 0) throw Error(ErrorKind::Domain, "negative step count");
  if (batch < 1) throw Error(ErrorKind::Domain, "batch must be >= 1");
  if (lr_max <= 0) throw Error(ErrorKind::Domain, "lr_max must be positive");
  if (p_hflip < 0 || p_hflip > 1 || p_vflip < 0 || p_vflip > 1)
    throw Error(ErrorKind::Domain, "flip probabilities must be in [0,1]");
  if ((crop_h && crop_h % 8) || (crop_w && crop_w % 8))
    throw Error(ErrorKind::Domain, "crop size must be divisible by 8");
}

TrainResult train_model(IdNet& net, const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.scenes.empty()) throw Error(ErrorKind::Io, "training dataset is empty");
  const bool tid = cfg.scheme == "tid";
  const int tid_steps = cfg.tid.seq_len + 1;  // loss spans t = 0..T
  if (tid) {
    cfg.tid.validate();
    bool any = false;
    for (const auto& s : data.scenes) any = any || static_cast<int>(s.windows.size()) >= tid_steps;
    if (!any)
      throw Error(ErrorKind::Contract, "tid training needs scenes with at least T+1 windows");
  }

  Rng sample_rng = Rng(cfg.seed).fork(1);
  Rng aug_rng = Rng(cfg.seed).fork(2);
  NetExtractor extractor(net);
  AdamT<float> adam(net.params());
  TrainResult result;
  result.log.reserve(static_cast<size_t>(cfg.steps));

  for (int step = 0; step < cfg.steps; ++step) {
    net.params().zero_grad();
    Tensor total;
    int redraws = 0;
    for (int b = 0; b < cfg.batch; ++b) {
      if (++redraws > 100 * cfg.batch)
        throw Error(ErrorKind::Contract, "could not draw a usable training sample");
      const AugmentSpec aug = sample_augment(aug_rng, data.height, data.width, cfg.crop_h,
                                             cfg.crop_w, cfg.p_hflip, cfg.p_vflip);
      Tensor sample_loss;
      if (!tid) {
        // uniform over all windows of all scenes
        const auto& scene = data.scenes[static_cast<size_t>(
            sample_rng.uniform_int(0, static_cast<int64_t>(data.scenes.size()) - 1))];
        const size_t k = static_cast<size_t>(
            sample_rng.uniform_int(0, static_cast<int64_t>(scene.windows.size()) - 1));
        auto [win, gt] = augment_window(scene.windows[k], scene.gts[k], aug);
        if (win.events.empty() || gt.valid_count() == 0) {
          --b;  // crop removed the content; redraw
          continue;
        }
        IdResult run = run_id(win, extractor, cfg.id);
        sample_loss = gt_loss(run.flow_tensor, gt);
      } else {
        // scenes long enough for a full T+1-step stretch
        size_t si;
        do {
          si = static_cast<size_t>(
              sample_rng.uniform_int(0, static_cast<int64_t>(data.scenes.size()) - 1));
        } while (static_cast<int>(data.scenes[si].windows.size()) < tid_steps);
        const auto& scene = data.scenes[si];
        const size_t start = static_cast<size_t>(sample_rng.uniform_int(
            0, static_cast<int64_t>(scene.windows.size()) - tid_steps));

        // one augmentation for the whole stretch keeps it temporally coherent
        std::vector<EventWindow> wins(tid_steps);
        std::vector<FlowField> gts(tid_steps);
        bool dead = false;
        for (int t = 0; t < tid_steps && !dead; ++t) {
          std::tie(wins[t], gts[t]) =
              augment_window(scene.windows[start + t], scene.gts[start + t], aug);
          dead = wins[t].events.empty() || gts[t].valid_count() == 0;
        }
        if (dead) {
          --b;
          continue;
        }

        Tensor prior = Tensor::zeros({2, wins[0].height, wins[0].width});
        std::vector<Tensor> terms;
        for (int t = 0; t < tid_steps; ++t) {
          TidStepResult sr = run_tid_step(wins[t], prior, extractor, cfg.tid);
          const float wgt = static_cast<float>(tid_weight(t, cfg.tid.seq_len, cfg.tid.gamma));
          terms.push_back(affine(gt_loss(sr.flow_tensor, gts[t]), wgt, 0.f));
          if (net.config().future_head && t + 1 < tid_steps)
            terms.push_back(affine(gt_loss(sr.next_prior, gts[t + 1]), wgt, 0.f));
          prior = sr.next_prior;
        }
        sample_loss = terms[0];
        for (size_t i = 1; i < terms.size(); ++i) sample_loss = add(sample_loss, terms[i]);
      }
      total = total.defined() ? add(total, sample_loss) : sample_loss;
    }
    Tensor loss = affine(total, 1.f / static_cast<float>(cfg.batch), 0.f);
    const double loss_value = static_cast<double>(loss.item());
    if (!std::isfinite(loss_value))
      throw Error(ErrorKind::Numeric,
                  "loss became non-finite at step " + std::to_string(step));
    loss.backward();
    const double lr = onecycle_lr(step, std::max(cfg.steps - 1, 1), cfg.lr_max);
    adam.step(net.params(), lr);
    result.log.push_back({step, loss_value, lr});
  }
  return result;
}

void write_loss_csv(const std::filesystem::path& path, const std::vector<TrainLogRow>& rows) {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  std::fprintf(f, "step,loss,lr\n");
  for (const TrainLogRow& r : rows) std::fprintf(f, "%d,%.9g,%.9g\n", r.step, r.loss, r.lr);
  std::fclose(f);
}

MetricsReport evaluate_id(IdNet& net, const Dataset& data, const IdConfig& cfg) {
  NoGradGuard ng;
  NetExtractor extractor(net);
  MetricsAccumulator acc;
  for (const auto& scene : data.scenes)
    for (size_t k = 0; k < scene.windows.size(); ++k) {
      if (scene.windows[k].events.empty() || scene.gts[k].valid_count() == 0) continue;
      IdResult run = run_id(scene.windows[k], extractor, cfg);
      acc.add(run.flow, scene.gts[k]);
    }
  return acc.report();
}

TidEval evaluate_tid(IdNet& net, const Dataset& data, const TidConfig& cfg) {
  NoGradGuard ng;
  NetExtractor extractor(net);
  TidEval eval;
  MetricsAccumulator overall;
  std::vector<MetricsAccumulator> per_step;
  std::vector<double> residual_sums;
  std::vector<int64_t> residual_counts;
  double invalid_sum = 0.0;
  int64_t prior_count = 0;

  for (const auto& scene : data.scenes) {
    Tensor prior;
    for (size_t t = 0; t < scene.windows.size(); ++t) {
      if (scene.windows[t].events.empty()) break;
      if (t == 0) prior = Tensor::zeros({2, scene.windows[t].height, scene.windows[t].width});
      TidStepResult sr = run_tid_step(scene.windows[t], prior, extractor, cfg);
      if (per_step.size() <= t) {
        per_step.resize(t + 1);
        residual_sums.resize(t + 1, 0.0);
        residual_counts.resize(t + 1, 0);
      }
      if (scene.gts[t].valid_count() > 0) {
        per_step[t].add(sr.flow, scene.gts[t]);
        overall.add(sr.flow, scene.gts[t]);
      }
      residual_sums[t] += sr.residual_mean_abs;
      residual_counts[t] += 1;
      if (cfg.propagation == TidConfig::Propagation::kDirectTransport) {
        const int64_t holes =
            static_cast<int64_t>(sr.next_prior_field.mask.size()) -
            sr.next_prior_field.valid_count();
        invalid_sum += static_cast<double>(holes) /
                       static_cast<double>(sr.next_prior_field.mask.size());
        ++prior_count;
      }
      prior = sr.next_prior;
    }
  }

  eval.overall = overall.report();
  for (size_t t = 0; t < per_step.size(); ++t) {
    eval.epe_per_step.push_back(per_step[t].count ? per_step[t].report().epe : 0.0);
    eval.residual_per_step.push_back(
        residual_counts[t] ? residual_sums[t] / static_cast<double>(residual_counts[t]) : 0.0);
  }
  if (prior_count) eval.prior_invalid_fraction = invalid_sum / static_cast<double>(prior_count);
  return eval;
}

}  // namespace idflow
