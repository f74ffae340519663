/* Copyright 2026 The semdef Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "semdef/core/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace semdef {
namespace {

template <typename T>
Graph<T>& same_graph(Var<T> a, Var<T> b) {
  if (!a.valid() || !b.valid() || &a.graph() != &b.graph()) {
    throw DimensionError("operands belong to different graphs");
  }
  return a.graph();
}

template <typename T>
void require_same_shape(const char* op, const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shapes " + shape_str(a.shape()) +
                         " and " + shape_str(b.shape()) + " differ");
  }
}

template <typename T, typename Fn, typename Deriv>
Var<T> unary(OpKind kind, Var<T> x, Fn fn, Deriv deriv) {
  Graph<T>& g = x.graph();
  const Tensor<T>& xv = x.value();
  Tensor<T> y(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) y[i] = fn(xv[i]);
  const std::size_t ix = x.id();
  return g.record(kind, {ix}, std::move(y),
                  [ix, deriv](Graph<T>& gr, std::size_t self) {
                    const Tensor<T>& gy = gr.upstream(self);
                    const Tensor<T>& yv = gr.value(self);
                    const Tensor<T>& xin = gr.value(ix);
                    Tensor<T>& gx = gr.grad_slot(ix);
                    for (std::size_t i = 0; i < gy.size(); ++i) {
                      gx[i] += gy[i] * deriv(xin[i], yv[i]);
                    }
                  });
}

template <typename T>
T stable_sigmoid(T v) {
  if (v >= T{0}) return T{1} / (T{1} + std::exp(-v));
  const T e = std::exp(v);
  return e / (T{1} + e);
}

}  // namespace

template <typename T>
Var<T> matmul(Var<T> a, Var<T> b) {
  Graph<T>& g = same_graph(a, b);
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = b.value();
  const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  if (bv.rank() > 2 || bv.rows() != k) {
    throw DimensionError("matmul: inner extents differ, " +
                         shape_str(av.shape()) + " * " + shape_str(bv.shape()));
  }
  Tensor<T> c({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    T* crow = c.raw() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T aip = av[i * k + p];
      if (aip == T{0}) continue;
      const T* brow = bv.raw() + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
  const std::size_t ia = a.id(), ib = b.id();
  return g.record(
      OpKind::kMatMul, {ia, ib}, std::move(c),
      [ia, ib, m, k, n](Graph<T>& gr, std::size_t self) {
        const Tensor<T>& gc = gr.upstream(self);
        if (gr.requires_grad(ia)) {
          const Tensor<T>& bv = gr.value(ib);
          Tensor<T>& ga = gr.grad_slot(ia);
          for (std::size_t i = 0; i < m; ++i) {
            const T* gcrow = gc.raw() + i * n;
            for (std::size_t p = 0; p < k; ++p) {
              const T* brow = bv.raw() + p * n;
              T acc{0};
              for (std::size_t j = 0; j < n; ++j) acc += gcrow[j] * brow[j];
              ga[i * k + p] += acc;
            }
          }
        }
        if (gr.requires_grad(ib)) {
          const Tensor<T>& av = gr.value(ia);
          Tensor<T>& gb = gr.grad_slot(ib);
          for (std::size_t i = 0; i < m; ++i) {
            const T* gcrow = gc.raw() + i * n;
            for (std::size_t p = 0; p < k; ++p) {
              const T aip = av[i * k + p];
              if (aip == T{0}) continue;
              T* gbrow = gb.raw() + p * n;
              for (std::size_t j = 0; j < n; ++j) gbrow[j] += aip * gcrow[j];
            }
          }
        }
      });
}

template <typename T>
Var<T> transpose(Var<T> a) {
  Graph<T>& g = a.graph();
  const Tensor<T>& av = a.value();
  const std::size_t r = av.rows(), c = av.cols();
  Tensor<T> t({c, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) t[j * r + i] = av[i * c + j];
  const std::size_t ia = a.id();
  return g.record(OpKind::kTranspose, {ia}, std::move(t),
                  [ia, r, c](Graph<T>& gr, std::size_t self) {
                    const Tensor<T>& gt = gr.upstream(self);
                    Tensor<T>& ga = gr.grad_slot(ia);
                    for (std::size_t i = 0; i < r; ++i)
                      for (std::size_t j = 0; j < c; ++j)
                        ga[i * c + j] += gt[j * r + i];
                  });
}

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
  Graph<T>& g = same_graph(a, b);
  require_same_shape("add", a.value(), b.value());
  Tensor<T> y = a.value();
  const Tensor<T>& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return g.record(OpKind::kAdd, {ia, ib}, std::move(y),
                  [ia, ib](Graph<T>& gr, std::size_t self) {
                    const Tensor<T>& gy = gr.upstream(self);
                    for (std::size_t in : {ia, ib}) {
                      if (!gr.requires_grad(in)) continue;
                      Tensor<T>& gx = gr.grad_slot(in);
                      for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i];
                    }
                  });
}

template <typename T>
Var<T> sub(Var<T> a, Var<T> b) {
  Graph<T>& g = same_graph(a, b);
  require_same_shape("sub", a.value(), b.value());
  Tensor<T> y = a.value();
  const Tensor<T>& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return g.record(OpKind::kSub, {ia, ib}, std::move(y),
                  [ia, ib](Graph<T>& gr, std::size_t self) {
                    const Tensor<T>& gy = gr.upstream(self);
                    if (gr.requires_grad(ia)) {
                      Tensor<T>& ga = gr.grad_slot(ia);
                      for (std::size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i];
                    }
                    if (gr.requires_grad(ib)) {
                      Tensor<T>& gb = gr.grad_slot(ib);
                      for (std::size_t i = 0; i < gy.size(); ++i) gb[i] -= gy[i];
                    }
                  });
}

template <typename T>
Var<T> mul(Var<T> a, Var<T> b) {
  Graph<T>& g = same_graph(a, b);
  require_same_shape("mul", a.value(), b.value());
  Tensor<T> y = a.value();
  const Tensor<T>& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return g.record(OpKind::kMul, {ia, ib}, std::move(y),
                  [ia, ib](Graph<T>& gr, std::size_t self) {
                    const Tensor<T>& gy = gr.upstream(self);
                    const Tensor<T>& av = gr.value(ia);
                    const Tensor<T>& bv = gr.value(ib);
                    if (gr.requires_grad(ia)) {
                      Tensor<T>& ga = gr.grad_slot(ia);
                      for (std::size_t i = 0; i < gy.size(); ++i)
                        ga[i] += gy[i] * bv[i];
                    }
                    if (gr.requires_grad(ib)) {
                      Tensor<T>& gb = gr.grad_slot(ib);
                      for (std::size_t i = 0; i < gy.size(); ++i)
                        gb[i] += gy[i] * av[i];
                    }
                  });
}

template <typename T>
Var<T> affine(Var<T> a, T scale, T shift) {
  Graph<T>& g = a.graph();
  Tensor<T> y = a.value();
  for (auto& v : y.data()) v = scale * v + shift;
  const std::size_t ia = a.id();
  return g.record(OpKind::kAffine, {ia}, std::move(y),
                  [ia, scale](Graph<T>& gr, std::size_t self) {
                    const Tensor<T>& gy = gr.upstream(self);
                    Tensor<T>& ga = gr.grad_slot(ia);
                    for (std::size_t i = 0; i < gy.size(); ++i)
                      ga[i] += scale * gy[i];
                  });
}

template <typename T>
Var<T> add_bias(Var<T> a, Var<T> bias) {
  Graph<T>& g = same_graph(a, bias);
  const Tensor<T>& bv = bias.value();
  Tensor<T> y = a.value();
  const std::size_t c = y.cols(), r = y.rows();
  if (bv.size() != c) {
    throw DimensionError("add_bias: bias " + shape_str(bv.shape()) +
                         " does not match " + shape_str(y.shape()));
  }
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) y[i * c + j] += bv[j];
  const std::size_t ia = a.id(), ib = bias.id();
  return g.record(OpKind::kAddBias, {ia, ib}, std::move(y),
                  [ia, ib, r, c](Graph<T>& gr, std::size_t self) {
                    const Tensor<T>& gy = gr.upstream(self);
                    if (gr.requires_grad(ia)) {
                      Tensor<T>& ga = gr.grad_slot(ia);
                      for (std::size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i];
                    }
                    if (gr.requires_grad(ib)) {
                      Tensor<T>& gb = gr.grad_slot(ib);
                      for (std::size_t i = 0; i < r; ++i)
                        for (std::size_t j = 0; j < c; ++j)
                          gb[j] += gy[i * c + j];
                    }
                  });
}

template <typename T>
Var<T> scale_rows(Var<T> a, Var<T> s) {
  Graph<T>& g = same_graph(a, s);
  const Tensor<T>& sv = s.value();
  Tensor<T> y = a.value();
  const std::size_t c = y.cols(), r = y.rows();
  if (sv.size() != r) {
    throw DimensionError("scale_rows: scales " + shape_str(sv.shape()) +
                         " do not match " + shape_str(y.shape()));
  }
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) y[i * c + j] *= sv[i];
  const std::size_t ia = a.id(), is = s.id();
  return g.record(OpKind::kScaleRows, {ia, is}, std::move(y),
                  [ia, is, r, c](Graph<T>& gr, std::size_t self) {
                    const Tensor<T>& gy = gr.upstream(self);
                    const Tensor<T>& av = gr.value(ia);
                    const Tensor<T>& sv = gr.value(is);
                    if (gr.requires_grad(ia)) {
                      Tensor<T>& ga = gr.grad_slot(ia);
                      for (std::size_t i = 0; i < r; ++i)
                        for (std::size_t j = 0; j < c; ++j)
                          ga[i * c + j] += gy[i * c + j] * sv[i];
                    }
                    if (gr.requires_grad(is)) {
                      Tensor<T>& gs = gr.grad_slot(is);
                      for (std::size_t i = 0; i < r; ++i) {
                        T acc{0};
                        for (std::size_t j = 0; j < c; ++j)
                          acc += gy[i * c + j] * av[i * c + j];
                        gs[i] += acc;
                      }
                    }
                  });
}

template <typename T>
Var<T> sigmoid(Var<T> x) {
  return unary<T>(
      OpKind::kSigmoid, x, [](T v) { return stable_sigmoid(v); },
      [](T, T y) { return y * (T{1} - y); });
}

template <typename T>
Var<T> tanh(Var<T> x) {
  return unary<T>(
      OpKind::kTanh, x, [](T v) { return std::tanh(v); },
      [](T, T y) { return T{1} - y * y; });
}

template <typename T>
Var<T> relu(Var<T> x) {
  return unary<T>(
      OpKind::kRelu, x, [](T v) { return v > T{0} ? v : T{0}; },
      [](T v, T) { return v > T{0} ? T{1} : T{0}; });
}

template <typename T>
Var<T> masked_softmax(Var<T> x, const Mask& visible) {
  Graph<T>& g = x.graph();
  const Tensor<T>& xv = x.value();
  const std::size_t r = xv.rows(), c = xv.cols();
  if (c == 0) throw DimensionError("softmax over an empty last axis");
  if (!visible.empty() && visible.size() != xv.size()) {
    throw DimensionError("softmax mask has " + std::to_string(visible.size()) +
                         " entries for shape " + shape_str(xv.shape()));
  }
  auto shown = [&visible](std::size_t i) {
    return visible.empty() || visible[i] != 0;
  };
  Tensor<T> y(xv.shape());
  for (std::size_t i = 0; i < r; ++i) {
    T mx = -std::numeric_limits<T>::infinity();
    for (std::size_t j = 0; j < c; ++j)
      if (shown(i * c + j)) mx = std::max(mx, xv[i * c + j]);
    if (mx == -std::numeric_limits<T>::infinity()) {
      throw DimensionError("softmax row " + std::to_string(i) +
                           " has every position masked");
    }
    T total{0};
    for (std::size_t j = 0; j < c; ++j) {
      if (!shown(i * c + j)) continue;
      const T e = std::exp(xv[i * c + j] - mx);
      y[i * c + j] = e;
      total += e;
    }
    for (std::size_t j = 0; j < c; ++j) y[i * c + j] /= total;
  }
  const std::size_t ix = x.id();
  return g.record(OpKind::kSoftmax, {ix}, std::move(y),
                  [ix, r, c](Graph<T>& gr, std::size_t self) {
                    const Tensor<T>& gy = gr.upstream(self);
                    const Tensor<T>& yv = gr.value(self);
                    Tensor<T>& gx = gr.grad_slot(ix);
                    for (std::size_t i = 0; i < r; ++i) {
                      T dot{0};
                      for (std::size_t j = 0; j < c; ++j)
                        dot += gy[i * c + j] * yv[i * c + j];
                      for (std::size_t j = 0; j < c; ++j)
                        gx[i * c + j] += yv[i * c + j] * (gy[i * c + j] - dot);
                    }
                  });
}

template <typename T>
Var<T> softmax(Var<T> x) {
  return masked_softmax(x, Mask{});
}

template <typename T>
Var<T> layer_norm(Var<T> x, Var<T> gain, Var<T> bias, T eps) {
  Graph<T>& g = same_graph(x, gain);
  same_graph(x, bias);
  const Tensor<T>& xv = x.value();
  const std::size_t r = xv.rows(), d = xv.cols();
  if (gain.value().size() != d || bias.value().size() != d) {
    throw DimensionError("layer_norm: gain/bias do not match width " +
                         std::to_string(d));
  }
  const Tensor<T>& gv = gain.value();
  const Tensor<T>& bv = bias.value();
  Tensor<T> y(xv.shape());
  // Normalised rows and inverse deviations are kept for the backward rule.
  Tensor<T> xhat(xv.shape());
  std::vector<T> inv_std(r);
  for (std::size_t i = 0; i < r; ++i) {
    const T* row = xv.raw() + i * d;
    T mean{0};
    for (std::size_t j = 0; j < d; ++j) mean += row[j];
    mean /= static_cast<T>(d);
    T var{0};
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= static_cast<T>(d);
    const T inv = T{1} / std::sqrt(var + eps);
    inv_std[i] = inv;
    for (std::size_t j = 0; j < d; ++j) {
      const T h = (row[j] - mean) * inv;
      xhat[i * d + j] = h;
      y[i * d + j] = h * gv[j] + bv[j];
    }
  }
  const std::size_t ix = x.id(), ig = gain.id(), ib = bias.id();
  return g.record(
      OpKind::kLayerNorm, {ix, ig, ib}, std::move(y),
      [ix, ig, ib, r, d, xhat = std::move(xhat), inv_std = std::move(inv_std)](
          Graph<T>& gr, std::size_t self) {
        const Tensor<T>& gy = gr.upstream(self);
        const Tensor<T>& gv = gr.value(ig);
        if (gr.requires_grad(ig)) {
          Tensor<T>& gg = gr.grad_slot(ig);
          for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < d; ++j)
              gg[j] += gy[i * d + j] * xhat[i * d + j];
        }
        if (gr.requires_grad(ib)) {
          Tensor<T>& gb = gr.grad_slot(ib);
          for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < d; ++j) gb[j] += gy[i * d + j];
        }
        if (gr.requires_grad(ix)) {
          Tensor<T>& gx = gr.grad_slot(ix);
          const T n = static_cast<T>(d);
          for (std::size_t i = 0; i < r; ++i) {
            T sum_dh{0}, sum_dh_h{0};
            for (std::size_t j = 0; j < d; ++j) {
              const T dh = gy[i * d + j] * gv[j];
              sum_dh += dh;
              sum_dh_h += dh * xhat[i * d + j];
            }
            for (std::size_t j = 0; j < d; ++j) {
              const T dh = gy[i * d + j] * gv[j];
              gx[i * d + j] += inv_std[i] / n *
                               (n * dh - sum_dh - xhat[i * d + j] * sum_dh_h);
            }
          }
        }
      });
}

template <typename T>
Var<T> concat_cols(std::span<const Var<T>> parts) {
  if (parts.empty()) throw DimensionError("concat_cols of nothing");
  Graph<T>& g = parts[0].graph();
  const std::size_t r = parts[0].value().rows();
  std::size_t total = 0;
  std::vector<std::size_t> ids, widths;
  for (const Var<T>& p : parts) {
    same_graph(parts[0], p);
    if (p.value().rows() != r) {
      throw DimensionError("concat_cols: row counts differ, " +
                           shape_str(parts[0].shape()) + " vs " +
                           shape_str(p.shape()));
    }
    ids.push_back(p.id());
    widths.push_back(p.value().cols());
    total += p.value().cols();
  }
  Tensor<T> y({r, total});
  std::size_t off = 0;
  for (const Var<T>& p : parts) {
    const Tensor<T>& pv = p.value();
    const std::size_t w = pv.cols();
    for (std::size_t i = 0; i < r; ++i)
      std::copy_n(pv.raw() + i * w, w, y.raw() + i * total + off);
    off += w;
  }
  return g.record(OpKind::kConcatCols, ids, std::move(y),
                  [ids, widths, r, total](Graph<T>& gr, std::size_t self) {
                    const Tensor<T>& gy = gr.upstream(self);
                    std::size_t off = 0;
                    for (std::size_t k = 0; k < ids.size(); ++k) {
                      const std::size_t w = widths[k];
                      if (gr.requires_grad(ids[k])) {
                        Tensor<T>& gp = gr.grad_slot(ids[k]);
                        for (std::size_t i = 0; i < r; ++i)
                          for (std::size_t j = 0; j < w; ++j)
                            gp[i * w + j] += gy[i * total + off + j];
                      }
                      off += w;
                    }
                  });
}

template <typename T>
Var<T> concat_rows(std::span<const Var<T>> parts) {
  if (parts.empty()) throw DimensionError("concat_rows of nothing");
  Graph<T>& g = parts[0].graph();
  const std::size_t c = parts[0].value().cols();
  std::size_t total = 0;
  std::vector<std::size_t> ids, heights;
  for (const Var<T>& p : parts) {
    same_graph(parts[0], p);
    if (p.value().cols() != c) {
      throw DimensionError("concat_rows: widths differ, " +
                           shape_str(parts[0].shape()) + " vs " +
                           shape_str(p.shape()));
    }
    ids.push_back(p.id());
    heights.push_back(p.value().rows());
    total += p.value().rows();
  }
  Tensor<T> y({total, c});
  std::size_t off = 0;
  for (const Var<T>& p : parts) {
    const Tensor<T>& pv = p.value();
    std::copy_n(pv.raw(), pv.size(), y.raw() + off * c);
    off += pv.rows();
  }
  return g.record(OpKind::kConcatRows, ids, std::move(y),
                  [ids, heights, c](Graph<T>& gr, std::size_t self) {
                    const Tensor<T>& gy = gr.upstream(self);
                    std::size_t off = 0;
                    for (std::size_t k = 0; k < ids.size(); ++k) {
                      const std::size_t n = heights[k] * c;
                      if (gr.requires_grad(ids[k])) {
                        Tensor<T>& gp = gr.grad_slot(ids[k]);
                        for (std::size_t i = 0; i < n; ++i)
                          gp[i] += gy[off * c + i];
                      }
                      off += heights[k];
                    }
                  });
}

template <typename T>
Var<T> slice_rows(Var<T> x, std::size_t begin, std::size_t count) {
  Graph<T>& g = x.graph();
  const Tensor<T>& xv = x.value();
  const std::size_t c = xv.cols();
  if (count == 0 || begin + count > xv.rows()) {
    throw DimensionError("slice_rows [" + std::to_string(begin) + ", +" +
                         std::to_string(count) + ") out of " +
                         shape_str(xv.shape()));
  }
  Tensor<T> y({count, c});
  std::copy_n(xv.raw() + begin * c, count * c, y.raw());
  const std::size_t ix = x.id();
  return g.record(OpKind::kSliceRows, {ix}, std::move(y),
                  [ix, begin, count, c](Graph<T>& gr, std::size_t self) {
                    const Tensor<T>& gy = gr.upstream(self);
                    Tensor<T>& gx = gr.grad_slot(ix);
                    for (std::size_t i = 0; i < count * c; ++i)
                      gx[begin * c + i] += gy[i];
                  });
}

template <typename T>
Var<T> slice_cols(Var<T> x, std::size_t begin, std::size_t count) {
  Graph<T>& g = x.graph();
  const Tensor<T>& xv = x.value();
  const std::size_t r = xv.rows(), c = xv.cols();
  if (count == 0 || begin + count > c) {
    throw DimensionError("slice_cols [" + std::to_string(begin) + ", +" +
                         std::to_string(count) + ") out of " +
                         shape_str(xv.shape()));
  }
  Tensor<T> y({r, count});
  for (std::size_t i = 0; i < r; ++i)
    std::copy_n(xv.raw() + i * c + begin, count, y.raw() + i * count);
  const std::size_t ix = x.id();
  return g.record(OpKind::kSliceCols, {ix}, std::move(y),
                  [ix, begin, count, r, c](Graph<T>& gr, std::size_t self) {
                    const Tensor<T>& gy = gr.upstream(self);
                    Tensor<T>& gx = gr.grad_slot(ix);
                    for (std::size_t i = 0; i < r; ++i)
                      for (std::size_t j = 0; j < count; ++j)
                        gx[i * c + begin + j] += gy[i * count + j];
                  });
}

template <typename T>
Var<T> repeat_rows(Var<T> x, std::size_t n) {
  Graph<T>& g = x.graph();
  const Tensor<T>& xv = x.value();
  if (xv.rows() != 1 || n == 0) {
    throw DimensionError("repeat_rows needs a single row, got " +
                         shape_str(xv.shape()));
  }
  const std::size_t c = xv.cols();
  Tensor<T> y({n, c});
  for (std::size_t i = 0; i < n; ++i) std::copy_n(xv.raw(), c, y.raw() + i * c);
  const std::size_t ix = x.id();
  return g.record(OpKind::kRepeatRows, {ix}, std::move(y),
                  [ix, n, c](Graph<T>& gr, std::size_t self) {
                    const Tensor<T>& gy = gr.upstream(self);
                    Tensor<T>& gx = gr.grad_slot(ix);
                    for (std::size_t i = 0; i < n; ++i)
                      for (std::size_t j = 0; j < c; ++j) gx[j] += gy[i * c + j];
                  });
}

template <typename T>
Var<T> unfold_rows(Var<T> x, std::size_t width) {
  Graph<T>& g = x.graph();
  const Tensor<T>& xv = x.value();
  const std::size_t len = xv.rows(), c = xv.cols();
  if (width == 0 || width > len) {
    throw DimensionError("unfold_rows width " + std::to_string(width) +
                         " over " + std::to_string(len) + " rows");
  }
  const std::size_t windows = len - width + 1;
  Tensor<T> y({windows, width * c});
  for (std::size_t w = 0; w < windows; ++w)
    std::copy_n(xv.raw() + w * c, width * c, y.raw() + w * width * c);
  const std::size_t ix = x.id();
  return g.record(OpKind::kUnfoldRows, {ix}, std::move(y),
                  [ix, windows, width, c](Graph<T>& gr, std::size_t self) {
                    const Tensor<T>& gy = gr.upstream(self);
                    Tensor<T>& gx = gr.grad_slot(ix);
                    for (std::size_t w = 0; w < windows; ++w)
                      for (std::size_t k = 0; k < width * c; ++k)
                        gx[w * c + k] += gy[w * width * c + k];
                  });
}

template <typename T>
Var<T> max_rows(Var<T> x) {
  Graph<T>& g = x.graph();
  const Tensor<T>& xv = x.value();
  const std::size_t r = xv.rows(), c = xv.cols();
  Tensor<T> y({1, c});
  std::vector<std::size_t> arg(c, 0);
  for (std::size_t j = 0; j < c; ++j) {
    T best = xv[j];
    for (std::size_t i = 1; i < r; ++i) {
      if (xv[i * c + j] > best) {
        best = xv[i * c + j];
        arg[j] = i;
      }
    }
    y[j] = best;
  }
  const std::size_t ix = x.id();
  return g.record(OpKind::kMaxRows, {ix}, std::move(y),
                  [ix, c, arg = std::move(arg)](Graph<T>& gr, std::size_t self) {
                    const Tensor<T>& gy = gr.upstream(self);
                    Tensor<T>& gx = gr.grad_slot(ix);
                    for (std::size_t j = 0; j < c; ++j) gx[arg[j] * c + j] += gy[j];
                  });
}

template <typename T>
Var<T> sum(Var<T> x) {
  Graph<T>& g = x.graph();
  T total{0};
  for (T v : x.value().data()) total += v;
  const std::size_t ix = x.id();
  return g.record(OpKind::kSum, {ix}, Tensor<T>::scalar(total),
                  [ix](Graph<T>& gr, std::size_t self) {
                    const T gy = gr.upstream(self)[0];
                    Tensor<T>& gx = gr.grad_slot(ix);
                    for (auto& v : gx.data()) v += gy;
                  });
}

template <typename T>
Var<T> reshape(Var<T> x, Shape shape) {
  Graph<T>& g = x.graph();
  if (numel(shape) != x.value().size()) {
    throw DimensionError("reshape " + shape_str(x.shape()) + " to " +
                         shape_str(shape));
  }
  const std::size_t ix = x.id();
  return g.record(OpKind::kReshape, {ix}, x.value().reshaped(std::move(shape)),
                  [ix](Graph<T>& gr, std::size_t self) {
                    const Tensor<T>& gy = gr.upstream(self);
                    Tensor<T>& gx = gr.grad_slot(ix);
                    for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i];
                  });
}

template <typename T>
Var<T> lookup(Graph<T>& g, Parameter<T>& table, std::span<const TokenId> ids) {
  const Tensor<T>& tv = table.value;
  const std::size_t vocab = tv.rows(), d = tv.cols();
  if (ids.empty()) throw DimensionError("lookup of an empty id sequence");
  Tensor<T> y({ids.size(), d});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= vocab) {
      throw DimensionError("id " + std::to_string(ids[i]) + " out of range for '" +
                           table.name + "' with " + std::to_string(vocab) +
                           " rows");
    }
    std::copy_n(tv.raw() + ids[i] * d, d, y.raw() + i * d);
  }
  Parameter<T>* p = &table;
  std::vector<TokenId> rows(ids.begin(), ids.end());
  return g.record(
      OpKind::kLookup, {}, std::move(y),
      [p, rows = std::move(rows), d](Graph<T>& gr, std::size_t self) {
        const Tensor<T>& gy = gr.upstream(self);
        for (std::size_t i = 0; i < rows.size(); ++i)
          for (std::size_t j = 0; j < d; ++j)
            p->grad[rows[i] * d + j] += gy[i * d + j];
      },
      !table.frozen);
}

template <typename T>
Var<T> dropout(Var<T> x, double p, Rng& rng) {
  Graph<T>& g = x.graph();
  if (p < 0.0 || p >= 1.0) throw ConfigError("dropout probability must be in [0,1)");
  if (p == 0.0 || !g.tracking()) return x;
  std::bernoulli_distribution keep(1.0 - p);
  const T scale = static_cast<T>(1.0 / (1.0 - p));
  Tensor<T> factor(x.shape());
  for (auto& f : factor.data()) f = keep(rng) ? scale : T{0};
  Tensor<T> y = x.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= factor[i];
  const std::size_t ix = x.id();
  return g.record(OpKind::kDropout, {ix}, std::move(y),
                  [ix, factor = std::move(factor)](Graph<T>& gr, std::size_t self) {
                    const Tensor<T>& gy = gr.upstream(self);
                    Tensor<T>& gx = gr.grad_slot(ix);
                    for (std::size_t i = 0; i < gy.size(); ++i)
                      gx[i] += gy[i] * factor[i];
                  });
}

template <typename T>
Var<T> cross_entropy_smoothed(Var<T> logits, std::span<const std::size_t> targets,
                              T smoothing, const Mask& mask) {
  Graph<T>& g = logits.graph();
  const Tensor<T>& lv = logits.value();
  const std::size_t rows = lv.rows(), vocab = lv.cols();
  if (targets.size() != rows || mask.size() != rows) {
    throw DimensionError("cross_entropy: " + std::to_string(targets.size()) +
                         " targets and " + std::to_string(mask.size()) +
                         " mask entries for " + std::to_string(rows) + " rows");
  }
  if (smoothing < T{0} || smoothing >= T{1}) {
    throw ConfigError("label smoothing must be in [0, 1)");
  }
  std::size_t active = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    if (!mask[i]) continue;
    if (targets[i] >= vocab) {
      throw DimensionError("target " + std::to_string(targets[i]) +
                           " out of range for vocabulary of " +
                           std::to_string(vocab));
    }
    ++active;
  }
  if (active == 0) throw DimensionError("cross_entropy with every position masked");

  const T other_weight =
      vocab > 1 ? smoothing / static_cast<T>(vocab - 1) : T{0};
  const T target_weight = vocab > 1 ? T{1} - smoothing : T{1};
  // Softmax probabilities of active rows, reused by the backward rule.
  Tensor<T> probs(lv.shape());
  T total{0};
  for (std::size_t i = 0; i < rows; ++i) {
    if (!mask[i]) continue;
    const T* row = lv.raw() + i * vocab;
    T mx = row[0];
    for (std::size_t j = 1; j < vocab; ++j) mx = std::max(mx, row[j]);
    T z{0};
    for (std::size_t j = 0; j < vocab; ++j) z += std::exp(row[j] - mx);
    const T log_z = mx + std::log(z);
    T others{0};
    for (std::size_t j = 0; j < vocab; ++j) {
      const T lp = row[j] - log_z;
      probs[i * vocab + j] = std::exp(lp);
      if (j != targets[i]) others -= lp;
    }
    const T nll = log_z - row[targets[i]];
    total += target_weight * nll + other_weight * others;
  }
  const T inv_active = T{1} / static_cast<T>(active);
  const std::size_t il = logits.id();
  std::vector<std::size_t> tgt(targets.begin(), targets.end());
  return g.record(
      OpKind::kCrossEntropy, {il}, Tensor<T>::scalar(total * inv_active),
      [il, rows, vocab, inv_active, target_weight, other_weight, mask,
       tgt = std::move(tgt), probs = std::move(probs)](Graph<T>& gr,
                                                       std::size_t self) {
        const T scale = gr.upstream(self)[0] * inv_active;
        Tensor<T>& gx = gr.grad_slot(il);
        for (std::size_t i = 0; i < rows; ++i) {
          if (!mask[i]) continue;
          for (std::size_t j = 0; j < vocab; ++j) {
            const T w = j == tgt[i] ? target_weight : other_weight;
            gx[i * vocab + j] += scale * (probs[i * vocab + j] - w);
          }
        }
      });
}

#define SEMDEF_INSTANTIATE_OPS(T)                                              \
  template Var<T> matmul(Var<T>, Var<T>);                                      \
  template Var<T> transpose(Var<T>);                                           \
  template Var<T> add(Var<T>, Var<T>);                                         \
  template Var<T> sub(Var<T>, Var<T>);                                         \
  template Var<T> mul(Var<T>, Var<T>);                                         \
  template Var<T> affine(Var<T>, T, T);                                        \
  template Var<T> add_bias(Var<T>, Var<T>);                                    \
  template Var<T> scale_rows(Var<T>, Var<T>);                                  \
  template Var<T> sigmoid(Var<T>);                                             \
  template Var<T> tanh(Var<T>);                                                \
  template Var<T> relu(Var<T>);                                                \
  template Var<T> softmax(Var<T>);                                             \
  template Var<T> masked_softmax(Var<T>, const Mask&);                         \
  template Var<T> layer_norm(Var<T>, Var<T>, Var<T>, T);                       \
  template Var<T> concat_cols(std::span<const Var<T>>);                        \
  template Var<T> concat_rows(std::span<const Var<T>>);                        \
  template Var<T> slice_rows(Var<T>, std::size_t, std::size_t);                \
  template Var<T> slice_cols(Var<T>, std::size_t, std::size_t);                \
  template Var<T> repeat_rows(Var<T>, std::size_t);                            \
  template Var<T> unfold_rows(Var<T>, std::size_t);                            \
  template Var<T> max_rows(Var<T>);                                            \
  template Var<T> sum(Var<T>);                                                 \
  template Var<T> reshape(Var<T>, Shape);                                      \
  template Var<T> lookup(Graph<T>&, Parameter<T>&, std::span<const TokenId>);  \
  template Var<T> dropout(Var<T>, double, Rng&);                               \
  template Var<T> cross_entropy_smoothed(Var<T>, std::span<const std::size_t>, \
                                         T, const Mask&);

SEMDEF_INSTANTIATE_OPS(float)
SEMDEF_INSTANTIATE_OPS(double)

#undef SEMDEF_INSTANTIATE_OPS

}  // namespace semdef
