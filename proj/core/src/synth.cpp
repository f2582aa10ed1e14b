#include "idflow/synth.hpp"

#include <algorithm>
#include <cmath>

#include "idflow/error.hpp"
#include "idflow/rng.hpp"

namespace idflow {
namespace {

constexpr double kTwoPi = 2.0 * M_PI;

double max_speed(const SceneSpec& s) {
  switch (s.motion) {
    case SceneSpec::Motion::kConstant:
      return std::hypot(s.u, s.v);
    case SceneSpec::Motion::kPerDotRandom:
      return s.rand_max_mag;
    case SceneSpec::Motion::kAffine: {
      double m = 0.0;
      const double xs[2] = {0.0, static_cast<double>(s.width - 1)};
      const double ys[2] = {0.0, static_cast<double>(s.height - 1)};
      for (double x : xs)
        for (double y : ys)
          m = std::max(m, std::hypot(s.affine[0] * x + s.affine[1] * y + s.affine[2],
                                     s.affine[3] * x + s.affine[4] * y + s.affine[5]));
      return m;
    }
  }
  return 0.0;
}

std::vector<DotState> make_dots(const SceneSpec& spec, int steps, Rng& rng) {
  // Keep dots inside the frame for the whole sequence where possible.
  const double travel = max_speed(spec) * steps;
  double inset = spec.dot_radius + travel;
  inset = std::min(inset, std::min(spec.height, spec.width) / 3.0);

  std::vector<DotState> dots(spec.dot_count);
  for (DotState& d : dots) {
    d.cx = rng.uniform(inset, spec.width - 1 - inset);
    d.cy = rng.uniform(inset, spec.height - 1 - inset);
  }
  for (DotState& d : dots) {
    switch (spec.motion) {
      case SceneSpec::Motion::kConstant:
        d.vu = spec.u;
        d.vv = spec.v;
        break;
      case SceneSpec::Motion::kAffine:
        d.vu = spec.affine[0] * d.cx + spec.affine[1] * d.cy + spec.affine[2];
        d.vv = spec.affine[3] * d.cx + spec.affine[4] * d.cy + spec.affine[5];
        break;
      case SceneSpec::Motion::kPerDotRandom: {
        const double mag = rng.uniform(spec.rand_min_mag, spec.rand_max_mag);
        const double ang = rng.uniform(0.0, kTwoPi);
        d.vu = mag * std::cos(ang);
        d.vv = mag * std::sin(ang);
        break;
      }
    }
  }
  return dots;
}

FlowField ground_truth(const SceneSpec& spec, const std::vector<DotState>& dots, int step) {
  FlowField gt = FlowField::zeros(spec.height, spec.width, /*valid=*/false);
  if (spec.dense_gt) {
    if (spec.motion != SceneSpec::Motion::kConstant)
      throw Error(ErrorKind::Contract, "dense ground truth is defined for constant motion only");
    std::fill(gt.u.begin(), gt.u.end(), static_cast<float>(spec.u));
    std::fill(gt.v.begin(), gt.v.end(), static_cast<float>(spec.v));
    std::fill(gt.mask.begin(), gt.mask.end(), uint8_t{1});
  }
  // painter's order: later dots overwrite earlier ones where they overlap
  const double reach = spec.dot_radius + 0.5;
  for (const DotState& d : dots) {
    const double cx = d.cx + step * d.vu;
    const double cy = d.cy + step * d.vv;
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - reach)));
    const int x1 = std::min(spec.width - 1, static_cast<int>(std::ceil(cx + reach)));
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - reach)));
    const int y1 = std::min(spec.height - 1, static_cast<int>(std::ceil(cy + reach)));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const double dx = x - cx, dy = y - cy;
        if (dx * dx + dy * dy > reach * reach) continue;
        const size_t i = gt.idx(y, x);
        gt.u[i] = static_cast<float>(d.vu);
        gt.v[i] = static_cast<float>(d.vv);
        gt.mask[i] = 1;
      }
  }
  return gt;
}

}  // namespace

void SceneSpec::validate() const {
  if (height < 8 || width < 8) throw Error(ErrorKind::Domain, "scene resolution too small");
  if (dot_count < 0) throw Error(ErrorKind::Domain, "negative dot count");
  if (dot_radius <= 0) throw Error(ErrorKind::Domain, "dot radius must be positive");
  if (duration_us == 0) throw Error(ErrorKind::Domain, "window duration must be positive");
  if (events_per_px <= 0) throw Error(ErrorKind::Domain, "event rate must be positive");
  if (noise_rate < 0) throw Error(ErrorKind::Domain, "negative noise rate");
  if (max_speed(*this) > height / 4.0)
    throw Error(ErrorKind::Domain, "motion magnitude above H/4 px per window");
}

std::vector<DotState> scene_dots(const SceneSpec& spec, int steps) {
  spec.validate();
  Rng rng(spec.seed);
  return make_dots(spec, steps, rng);
}

std::vector<std::pair<EventWindow, FlowField>> generate_sequence(const SceneSpec& spec,
                                                                 int steps) {
  spec.validate();
  if (steps < 1) throw Error(ErrorKind::Domain, "generate_sequence: steps must be >= 1");

  Rng rng(spec.seed);
  const std::vector<DotState> dots = make_dots(spec, steps, rng);

  std::vector<std::pair<EventWindow, FlowField>> out;
  out.reserve(steps);
  for (int k = 0; k < steps; ++k) {
    EventWindow w;
    w.height = static_cast<uint16_t>(spec.height);
    w.width = static_cast<uint16_t>(spec.width);
    w.t_begin = static_cast<uint64_t>(k) * spec.duration_us;
    w.t_end = w.t_begin + spec.duration_us;

    for (const DotState& d : dots) {
      const double speed = std::hypot(d.vu, d.vv);
      const double perimeter = kTwoPi * spec.dot_radius;
      const int n = static_cast<int>(std::llround(spec.events_per_px * speed * perimeter));
      for (int i = 0; i < n; ++i) {
        const double s = rng.uniform();           // position inside the window
        const double ang = rng.uniform(0.0, kTwoPi);
        const double nx = std::cos(ang), ny = std::sin(ang);
        const double lead = nx * d.vu + ny * d.vv;
        if (std::abs(lead) < 1e-12) continue;  // edge tangent to the motion
        const double cx = d.cx + (k + s) * d.vu;
        const double cy = d.cy + (k + s) * d.vv;
        const long px = std::lround(cx + spec.dot_radius * nx);
        const long py = std::lround(cy + spec.dot_radius * ny);
        if (px < 0 || px >= spec.width || py < 0 || py >= spec.height) continue;
        Event e;
        e.t = w.t_begin + static_cast<uint64_t>(s * static_cast<double>(spec.duration_us));
        e.x = static_cast<uint16_t>(px);
        e.y = static_cast<uint16_t>(py);
        e.p = lead > 0 ? 1 : -1;
        w.events.push_back(e);
      }
    }

    const int noise_n =
        static_cast<int>(std::llround(spec.noise_rate * spec.height * spec.width));
    for (int i = 0; i < noise_n; ++i) {
      Event e;
      e.t = w.t_begin + static_cast<uint64_t>(rng.uniform() * static_cast<double>(spec.duration_us));
      e.x = static_cast<uint16_t>(rng.uniform_int(0, spec.width - 1));
      e.y = static_cast<uint16_t>(rng.uniform_int(0, spec.height - 1));
      e.p = rng.bernoulli(0.5) ? 1 : -1;
      w.events.push_back(e);
    }

    std::stable_sort(w.events.begin(), w.events.end(),
                     [](const Event& a, const Event& b) { return a.t < b.t; });
    out.emplace_back(std::move(w), ground_truth(spec, dots, k));
  }
  return out;
}

std::pair<EventWindow, FlowField> generate(const SceneSpec& spec) {
  return std::move(generate_sequence(spec, 1).front());
}

}  // namespace idflow
