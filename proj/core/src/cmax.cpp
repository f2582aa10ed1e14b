#include "idflow/cmax.hpp"

#include <algorithm>
#include <cmath>

#include "idflow/error.hpp"

namespace idflow {
namespace {

struct Cell {
  float x, y;
  float s;  // normalized time in [0,1]
  float w;  // |grid value|
};

// Variance of the IWE of the cells displaced by the uniform flow (u, v).
double candidate_variance(const std::vector<Cell>& cells, int height, int width, double u,
                          double v, std::vector<double>& img) {
  std::fill(img.begin(), img.end(), 0.0);
  for (const Cell& c : cells) {
    const double x = c.x - c.s * u;  // warp to t_begin
    const double y = c.y - c.s * v;
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0;
    const double fy = y - y0;
    const double wx[2] = {1.0 - fx, fx};
    const double wy[2] = {1.0 - fy, fy};
    for (int yi = 0; yi < 2; ++yi) {
      const int yy = y0 + yi;
      if (yy < 0 || yy >= height || wy[yi] == 0.0) continue;
      for (int xi = 0; xi < 2; ++xi) {
        const int xx = x0 + xi;
        if (xx < 0 || xx >= width || wx[xi] == 0.0) continue;
        img[static_cast<size_t>(yy) * width + xx] += c.w * wy[yi] * wx[xi];
      }
    }
  }
  const double n = static_cast<double>(img.size());
  double mean = 0.0;
  for (double p : img) mean += p;
  mean /= n;
  double var = 0.0;
  for (double p : img) {
    const double d = p - mean;
    var += d * d;
  }
  return var / n;
}

}  // namespace

CmaxResult cmax_extract(const VoxelGrid& grid, const CmaxSearch& search) {
  if (!std::isfinite(search.radius) || search.radius < 0 || search.step <= 0)
    throw Error(ErrorKind::Domain, "cmax search range must be finite with positive step");

  CmaxResult result;
  result.flow = FlowField::zeros(grid.height, grid.width);

  std::vector<Cell> cells;
  const double tscale = grid.bins > 1 ? 1.0 / (grid.bins - 1) : 0.0;
  for (int b = 0; b < grid.bins; ++b) {
    const float* plane = grid.bin(b);
    const float s = static_cast<float>(b * tscale);
    for (int y = 0; y < grid.height; ++y)
      for (int x = 0; x < grid.width; ++x) {
        const float v = plane[static_cast<size_t>(y) * grid.width + x];
        if (v != 0.f) cells.push_back({static_cast<float>(x), static_cast<float>(y), s,
                                       std::abs(v)});
      }
  }
  if (cells.empty()) {
    result.empty_input = true;
    return result;
  }

  const int n = static_cast<int>(std::floor(search.radius / search.step + 1e-9));
  std::vector<double> img(static_cast<size_t>(grid.height) * grid.width);
  double best_var = -1.0, best_u = 0.0, best_v = 0.0;
  for (int iu = -n; iu <= n; ++iu) {
    const double u = iu * search.step;
    for (int iv = -n; iv <= n; ++iv) {
      const double v = iv * search.step;
      const double var = candidate_variance(cells, grid.height, grid.width, u, v, img);
      bool better = var > best_var + 1e-12;
      if (!better && std::abs(var - best_var) <= 1e-12) {
        const double mag = u * u + v * v, best_mag = best_u * best_u + best_v * best_v;
        better = mag < best_mag - 1e-12 ||
                 (std::abs(mag - best_mag) <= 1e-12 &&
                  (u < best_u || (u == best_u && v < best_v)));
      }
      if (better) {
        best_var = var;
        best_u = u;
        best_v = v;
      }
    }
  }

  std::fill(result.flow.u.begin(), result.flow.u.end(), static_cast<float>(best_u));
  std::fill(result.flow.v.begin(), result.flow.v.end(), static_cast<float>(best_v));
  return result;
}

ExtractOutT<float> CmaxExtractor::extract(const VoxelGrid& grid, const Tensor& state) {
  (void)state;
  CmaxSearch s = search_;
  for (int i = 0; i < calls_; ++i)
    s.radius = std::max(s.min_radius, s.radius * s.shrink);
  ++calls_;

  CmaxResult r = cmax_extract(grid, s);
  last_empty_ = r.empty_input;

  ExtractOutT<float> out;
  out.residual = flow_to_tensor<float>(r.flow);
  out.state = Tensor::zeros({1});
  return out;
}

}  // namespace idflow
