#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "idflow/tensor.hpp"

namespace idflow {

namespace detail {

struct ConvDims {
  int cin, h, w;
  int cout, kh, kw;
  int ho, wo;
  int stride, pad;
};

// indices i in [0, out_size) with 0 <= i*stride + k - pad < in_size
inline void conv_range(int k, int pad, int stride, int in_size, int out_size, int* lo, int* hi) {
  int lo_v = 0;
  if (k < pad) lo_v = (pad - k + stride - 1) / stride;
  lo_v = std::min(lo_v, out_size);
  const int hi_num = in_size - 1 - k + pad;
  int hi_v = hi_num < 0 ? 0 : std::min(out_size, hi_num / stride + 1);
  *lo = lo_v;
  *hi = std::max(hi_v, lo_v);
}

template <typename T>
void conv2d_forward(const T* in, const T* wt, const T* bias, T* out, const ConvDims& d) {
  const size_t out_plane = static_cast<size_t>(d.ho) * d.wo;
  for (int o = 0; o < d.cout; ++o) {
    T* outp = out + o * out_plane;
    std::fill(outp, outp + out_plane, bias ? bias[o] : T(0));
  }
  for (int o = 0; o < d.cout; ++o) {
    T* outp = out + o * out_plane;
    for (int c = 0; c < d.cin; ++c) {
      const T* inp = in + static_cast<size_t>(c) * d.h * d.w;
      const T* wp = wt + (static_cast<size_t>(o) * d.cin + c) * d.kh * d.kw;
      for (int ky = 0; ky < d.kh; ++ky) {
        int oy_lo, oy_hi;
        conv_range(ky, d.pad, d.stride, d.h, d.ho, &oy_lo, &oy_hi);
        for (int kx = 0; kx < d.kw; ++kx) {
          const T wv = wp[ky * d.kw + kx];
          int ox_lo, ox_hi;
          conv_range(kx, d.pad, d.stride, d.w, d.wo, &ox_lo, &ox_hi);
          for (int oy = oy_lo; oy < oy_hi; ++oy) {
            const int iy = oy * d.stride + ky - d.pad;
            const T* irow = inp + static_cast<size_t>(iy) * d.w + (kx - d.pad);
            T* orow = outp + static_cast<size_t>(oy) * d.wo;
            if (d.stride == 1) {
              for (int ox = ox_lo; ox < ox_hi; ++ox) orow[ox] += wv * irow[ox];
            } else {
              for (int ox = ox_lo; ox < ox_hi; ++ox)
                orow[ox] += wv * irow[static_cast<size_t>(ox) * d.stride];
            }
          }
        }
      }
    }
  }
}

template <typename T>
void conv2d_backward_input(T* din, const T* wt, const T* gout, const ConvDims& d) {
  const size_t out_plane = static_cast<size_t>(d.ho) * d.wo;
  for (int o = 0; o < d.cout; ++o) {
    const T* goutp = gout + o * out_plane;
    for (int c = 0; c < d.cin; ++c) {
      T* dinp = din + static_cast<size_t>(c) * d.h * d.w;
      const T* wp = wt + (static_cast<size_t>(o) * d.cin + c) * d.kh * d.kw;
      for (int ky = 0; ky < d.kh; ++ky) {
        int oy_lo, oy_hi;
        conv_range(ky, d.pad, d.stride, d.h, d.ho, &oy_lo, &oy_hi);
        for (int kx = 0; kx < d.kw; ++kx) {
          const T wv = wp[ky * d.kw + kx];
          int ox_lo, ox_hi;
          conv_range(kx, d.pad, d.stride, d.w, d.wo, &ox_lo, &ox_hi);
          for (int oy = oy_lo; oy < oy_hi; ++oy) {
            const int iy = oy * d.stride + ky - d.pad;
            T* dirow = dinp + static_cast<size_t>(iy) * d.w + (kx - d.pad);
            const T* grow = goutp + static_cast<size_t>(oy) * d.wo;
            if (d.stride == 1) {
              for (int ox = ox_lo; ox < ox_hi; ++ox) dirow[ox] += wv * grow[ox];
            } else {
              for (int ox = ox_lo; ox < ox_hi; ++ox)
                dirow[static_cast<size_t>(ox) * d.stride] += wv * grow[ox];
            }
          }
        }
      }
    }
  }
}

template <typename T>
void conv2d_backward_weight(const T* in, T* dwt, T* dbias, const T* gout, const ConvDims& d) {
  const size_t out_plane = static_cast<size_t>(d.ho) * d.wo;
  for (int o = 0; o < d.cout; ++o) {
    const T* goutp = gout + o * out_plane;
    if (dbias) {
      T acc = T(0);
      for (size_t i = 0; i < out_plane; ++i) acc += goutp[i];
      dbias[o] += acc;
    }
    for (int c = 0; c < d.cin; ++c) {
      const T* inp = in + static_cast<size_t>(c) * d.h * d.w;
      T* dwp = dwt + (static_cast<size_t>(o) * d.cin + c) * d.kh * d.kw;
      for (int ky = 0; ky < d.kh; ++ky) {
        int oy_lo, oy_hi;
        conv_range(ky, d.pad, d.stride, d.h, d.ho, &oy_lo, &oy_hi);
        for (int kx = 0; kx < d.kw; ++kx) {
          int ox_lo, ox_hi;
          conv_range(kx, d.pad, d.stride, d.w, d.wo, &ox_lo, &ox_hi);
          T acc = T(0);
          for (int oy = oy_lo; oy < oy_hi; ++oy) {
            const int iy = oy * d.stride + ky - d.pad;
            const T* irow = inp + static_cast<size_t>(iy) * d.w + (kx - d.pad);
            const T* grow = goutp + static_cast<size_t>(oy) * d.wo;
            if (d.stride == 1) {
              for (int ox = ox_lo; ox < ox_hi; ++ox) acc += grow[ox] * irow[ox];
            } else {
              for (int ox = ox_lo; ox < ox_hi; ++ox)
                acc += grow[ox] * irow[static_cast<size_t>(ox) * d.stride];
            }
          }
          dwp[ky * d.kw + kx] += acc;
        }
      }
    }
  }
}

}  // namespace detail

/// Cross-correlation convolution with zero padding. x: (Cin,H,W),
/// weight: (Cout,Cin,kh,kw), bias: (Cout) or an undefined tensor for none.
template <typename T>
TensorT<T> conv2d(const TensorT<T>& x, const TensorT<T>& weight, const TensorT<T>& bias,
                  int stride, int pad) {
  if (x.rank() != 3 || weight.rank() != 4)
    throw Error(ErrorKind::Shape, "conv2d: expects (Cin,H,W) input and (Cout,Cin,kh,kw) weight");
  if (stride < 1) throw Error(ErrorKind::Domain, "conv2d: stride must be >= 1");
  detail::ConvDims d;
  d.cin = x.dim(0);
  d.h = x.dim(1);
  d.w = x.dim(2);
  d.cout = weight.dim(0);
  d.kh = weight.dim(2);
  d.kw = weight.dim(3);
  d.stride = stride;
  d.pad = pad;
  if (weight.dim(1) != d.cin) throw Error(ErrorKind::Shape, "conv2d: channel mismatch");
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != d.cout))
    throw Error(ErrorKind::Shape, "conv2d: bias shape mismatch");
  d.ho = (d.h + 2 * pad - d.kh) / stride + 1;
  d.wo = (d.w + 2 * pad - d.kw) / stride + 1;
  if (d.ho <= 0 || d.wo <= 0) throw Error(ErrorKind::Shape, "conv2d: empty output");

  std::vector<T> out(static_cast<size_t>(d.cout) * d.ho * d.wo);
  detail::conv2d_forward(x.values().data(), weight.values().data(),
                         bias.defined() ? bias.values().data() : nullptr, out.data(), d);

  auto xn = x.node();
  auto wn = weight.node();
  auto bn = bias.defined() ? bias.node() : nullptr;
  std::vector<typename TensorT<T>::NodePtr> parents = {xn, wn};
  if (bn) parents.push_back(bn);
  return detail::make_op_node<T>(
      {d.cout, d.ho, d.wo}, std::move(out), std::move(parents),
      [xn, wn, bn, d](typename TensorT<T>::Node& self) {
        if (xn->requires_grad) {
          xn->ensure_grad();
          detail::conv2d_backward_input(xn->grad.data(), wn->value.data(), self.grad.data(), d);
        }
        if (wn->requires_grad || (bn && bn->requires_grad)) {
          wn->ensure_grad();
          if (bn) bn->ensure_grad();
          detail::conv2d_backward_weight(xn->value.data(), wn->grad.data(),
                                         bn ? bn->grad.data() : nullptr, self.grad.data(), d);
        }
      });
}

/// Bilinear interpolation to (out_h, out_w) with half-pixel centers
/// (align_corners disabled); sampling clamps to edges.
template <typename T>
TensorT<T> bilinear_resize(const TensorT<T>& x, int out_h, int out_w) {
  if (x.rank() != 3) throw Error(ErrorKind::Shape, "bilinear_resize: expects (C,H,W)");
  if (out_h < 1 || out_w < 1) throw Error(ErrorKind::Domain, "bilinear_resize: empty output");
  const int c = x.dim(0), h = x.dim(1), w = x.dim(2);

  struct Axis {
    int i0, i1;
    T f;
  };
  auto make_axis = [](int in_size, int out_size) {
    std::vector<Axis> ax(out_size);
    const double scale = static_cast<double>(in_size) / out_size;
    for (int i = 0; i < out_size; ++i) {
      double src = (i + 0.5) * scale - 0.5;
      src = std::clamp(src, 0.0, static_cast<double>(in_size - 1));
      const int i0 = static_cast<int>(src);
      ax[i] = {i0, std::min(i0 + 1, in_size - 1), static_cast<T>(src - i0)};
    }
    return ax;
  };
  auto ys = make_axis(h, out_h);
  auto xs = make_axis(w, out_w);

  std::vector<T> out(static_cast<size_t>(c) * out_h * out_w);
  const T* in = x.values().data();
  for (int ch = 0; ch < c; ++ch) {
    const T* inp = in + static_cast<size_t>(ch) * h * w;
    T* outp = out.data() + static_cast<size_t>(ch) * out_h * out_w;
    for (int oy = 0; oy < out_h; ++oy) {
      const Axis ay = ys[oy];
      const T* r0 = inp + static_cast<size_t>(ay.i0) * w;
      const T* r1 = inp + static_cast<size_t>(ay.i1) * w;
      T* orow = outp + static_cast<size_t>(oy) * out_w;
      for (int ox = 0; ox < out_w; ++ox) {
        const Axis axx = xs[ox];
        const T top = r0[axx.i0] + axx.f * (r0[axx.i1] - r0[axx.i0]);
        const T bot = r1[axx.i0] + axx.f * (r1[axx.i1] - r1[axx.i0]);
        orow[ox] = top + ay.f * (bot - top);
      }
    }
  }

  auto xn = x.node();
  return detail::make_op_node<T>(
      {c, out_h, out_w}, std::move(out), {xn},
      [xn, c, h, w, out_h, out_w, ys, xs](typename TensorT<T>::Node& self) {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (int ch = 0; ch < c; ++ch) {
          T* dinp = xn->grad.data() + static_cast<size_t>(ch) * h * w;
          const T* goutp = self.grad.data() + static_cast<size_t>(ch) * out_h * out_w;
          for (int oy = 0; oy < out_h; ++oy) {
            const Axis ay = ys[oy];
            for (int ox = 0; ox < out_w; ++ox) {
              const Axis axx = xs[ox];
              const T g = goutp[static_cast<size_t>(oy) * out_w + ox];
              const T g0 = g * (T(1) - ay.f), g1 = g * ay.f;
              dinp[static_cast<size_t>(ay.i0) * w + axx.i0] += g0 * (T(1) - axx.f);
              dinp[static_cast<size_t>(ay.i0) * w + axx.i1] += g0 * axx.f;
              dinp[static_cast<size_t>(ay.i1) * w + axx.i0] += g1 * (T(1) - axx.f);
              dinp[static_cast<size_t>(ay.i1) * w + axx.i1] += g1 * axx.f;
            }
          }
        }
      });
}

template <typename T>
TensorT<T> bilinear_resize(const TensorT<T>& x, double factor) {
  if (factor <= 0) throw Error(ErrorKind::Domain, "bilinear_resize: factor must be positive");
  const int oh = std::max(1, static_cast<int>(std::lround(x.dim(1) * factor)));
  const int ow = std::max(1, static_cast<int>(std::lround(x.dim(2) * factor)));
  return bilinear_resize(x, oh, ow);
}

/// Standard ConvGRU cell with shared-shape 3x3 gate convolutions:
///   z = sigma(conv([h,x])), r = sigma(conv([h,x])),
///   h~ = tanh(conv([r*h, x])), h' = (1-z)*h + z*h~.
template <typename T>
TensorT<T> convgru_step(const TensorT<T>& h, const TensorT<T>& x, const TensorT<T>& wz,
                        const TensorT<T>& bz, const TensorT<T>& wr, const TensorT<T>& br,
                        const TensorT<T>& wh, const TensorT<T>& bh) {
  if (h.rank() != 3 || x.rank() != 3 || h.dim(1) != x.dim(1) || h.dim(2) != x.dim(2))
    throw Error(ErrorKind::Shape, "convgru_step: state/input spatial shapes disagree");
  const int pad = (wz.dim(2) - 1) / 2;
  auto hx = concat_channels(h, x);
  auto z = sigmoid(conv2d(hx, wz, bz, 1, pad));
  auto r = sigmoid(conv2d(hx, wr, br, 1, pad));
  auto rhx = concat_channels(mul(r, h), x);
  auto h_cand = tanh_op(conv2d(rhx, wh, bh, 1, pad));
  return add(mul(affine(z, T(-1), T(1)), h), mul(z, h_cand));
}

/// Mean of |pred - target| over masked entries. The mask is per-pixel
/// (H*W, nonzero = keep) and applies to every channel; empty mask = all valid.
template <typename T>
TensorT<T> l1_loss(const TensorT<T>& pred, const TensorT<T>& target,
                   const std::vector<uint8_t>& mask = {}) {
  detail::check_same_shape(pred, target, "l1_loss");
  const int64_t n = pred.numel();
  const int64_t plane = pred.rank() == 3 ? static_cast<int64_t>(pred.dim(1)) * pred.dim(2) : n;
  if (!mask.empty() && static_cast<int64_t>(mask.size()) != plane)
    throw Error(ErrorKind::Shape, "l1_loss: mask must have one entry per pixel");

  const auto& pv = pred.values();
  const auto& tv = target.values();
  int64_t count = 0;
  double total = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    if (!mask.empty() && !mask[static_cast<size_t>(i % plane)]) continue;
    total += std::abs(static_cast<double>(pv[static_cast<size_t>(i)]) -
                      static_cast<double>(tv[static_cast<size_t>(i)]));
    ++count;
  }
  if (count == 0) throw Error(ErrorKind::Domain, "l1_loss: empty mask");

  auto pn = pred.node();
  auto tn = target.node();
  const T inv = T(1) / static_cast<T>(count);
  auto mask_copy = std::make_shared<std::vector<uint8_t>>(mask);
  return detail::make_op_node<T>(
      {1}, {static_cast<T>(total / static_cast<double>(count))}, {pn, tn},
      [pn, tn, inv, plane, n, mask_copy](typename TensorT<T>::Node& self) {
        const T g = self.grad[0] * inv;
        const bool use_mask = !mask_copy->empty();
        if (pn->requires_grad) pn->ensure_grad();
        if (tn->requires_grad) tn->ensure_grad();
        for (int64_t i = 0; i < n; ++i) {
          if (use_mask && !(*mask_copy)[static_cast<size_t>(i % plane)]) continue;
          const T d = pn->value[static_cast<size_t>(i)] - tn->value[static_cast<size_t>(i)];
          const T s = d > T(0) ? g : (d < T(0) ? -g : T(0));
          if (pn->requires_grad) pn->grad[static_cast<size_t>(i)] += s;
          if (tn->requires_grad) tn->grad[static_cast<size_t>(i)] -= s;
        }
      });
}

/// Mean absolute value of the entries (plain number, no graph).
template <typename T>
double mean_abs(const TensorT<T>& t) {
  double s = 0.0;
  for (T v : t.values()) s += std::abs(static_cast<double>(v));
  return t.numel() ? s / static_cast<double>(t.numel()) : 0.0;
}

}  // namespace idflow
