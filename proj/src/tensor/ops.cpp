// Copyright 2026 The psnet Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <limits>

#include "op_support.h"
#include "psnet/errors.h"
#include "psnet/ops.h"

namespace psnet {

namespace {

template <typename T>
void require_same_shape(const BasicTensor<T>& a, const BasicTensor<T>& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ConfigError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                      shape_string(b.shape()));
  }
}

// Elementwise unary op with derivative expressed through input x and output y.
template <typename T, typename F, typename D>
BasicTensor<T> unary(const BasicTensor<T>& x, F f, D dfdx) {
  auto in = x.values();
  std::vector<T> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
  return detail::make_result<T>(x.shape(), std::move(out), {&x}, [dfdx](detail::Node<T>& node) {
    std::vector<T>* dx = detail::parent_grad(node, 0);
    if (!dx) return;
    const auto& xv = node.parents[0]->value;
    for (std::size_t i = 0; i < xv.size(); ++i) (*dx)[i] += node.grad[i] * dfdx(xv[i], node.value[i]);
  });
}

}  // namespace

template <typename T>
BasicTensor<T> leaky_relu(const BasicTensor<T>& x, T slope) {
  return unary(
      x, [slope](T v) { return v > T(0) ? v : slope * v; },
      [slope](T v, T) { return v > T(0) ? T(1) : slope; });
}

template <typename T>
BasicTensor<T> abs(const BasicTensor<T>& x) {
  return unary(
      x, [](T v) { return std::abs(v); },
      [](T v, T) { return v > T(0) ? T(1) : (v < T(0) ? T(-1) : T(0)); });
}

template <typename T>
BasicTensor<T> softplus(const BasicTensor<T>& x) {
  return unary(
      x, [](T v) { return v > T(20) ? v : std::log1p(std::exp(v)); },
      [](T v, T) { return T(1) / (T(1) + std::exp(-v)); });
}

template <typename T>
BasicTensor<T> scale(const BasicTensor<T>& x, T factor) {
  return unary(
      x, [factor](T v) { return v * factor; }, [factor](T, T) { return factor; });
}

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape(a, b, "add");
  auto av = a.values();
  auto bv = b.values();
  std::vector<T> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return detail::make_result<T>(a.shape(), std::move(out), {&a, &b}, [](detail::Node<T>& node) {
    for (std::size_t p = 0; p < 2; ++p) {
      if (std::vector<T>* d = detail::parent_grad(node, p)) {
        for (std::size_t i = 0; i < d->size(); ++i) (*d)[i] += node.grad[i];
      }
    }
  });
}

template <typename T>
BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape(a, b, "sub");
  auto av = a.values();
  auto bv = b.values();
  std::vector<T> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  return detail::make_result<T>(a.shape(), std::move(out), {&a, &b}, [](detail::Node<T>& node) {
    if (std::vector<T>* d = detail::parent_grad(node, 0)) {
      for (std::size_t i = 0; i < d->size(); ++i) (*d)[i] += node.grad[i];
    }
    if (std::vector<T>* d = detail::parent_grad(node, 1)) {
      for (std::size_t i = 0; i < d->size(); ++i) (*d)[i] -= node.grad[i];
    }
  });
}

template <typename T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape(a, b, "mul");
  auto av = a.values();
  auto bv = b.values();
  std::vector<T> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return detail::make_result<T>(a.shape(), std::move(out), {&a, &b}, [](detail::Node<T>& node) {
    const auto& av = node.parents[0]->value;
    const auto& bv = node.parents[1]->value;
    if (std::vector<T>* d = detail::parent_grad(node, 0)) {
      for (std::size_t i = 0; i < d->size(); ++i) (*d)[i] += node.grad[i] * bv[i];
    }
    if (std::vector<T>* d = detail::parent_grad(node, 1)) {
      for (std::size_t i = 0; i < d->size(); ++i) (*d)[i] += node.grad[i] * av[i];
    }
  });
}

template <typename T>
BasicTensor<T> sum(const BasicTensor<T>& x) {
  T s = 0;
  for (T v : x.values()) s += v;
  return detail::make_result<T>({1}, {s}, {&x}, [](detail::Node<T>& node) {
    if (std::vector<T>* d = detail::parent_grad(node, 0)) {
      for (T& v : *d) v += node.grad[0];
    }
  });
}

template <typename T>
BasicTensor<T> mean(const BasicTensor<T>& x) {
  return scale(sum(x), T(1) / static_cast<T>(x.numel()));
}

template <typename T>
BasicTensor<T> sum_rows(const BasicTensor<T>& x) {
  if (x.rank() != 2) throw ConfigError("sum_rows: expected [B,N], got " + shape_string(x.shape()));
  const int rows = x.dim(0);
  const int cols = x.dim(1);
  std::vector<T> out(rows, T(0));
  auto xv = x.values();
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out[r] += xv[r * cols + c];
  }
  return detail::make_result<T>({rows, 1}, std::move(out), {&x}, [cols](detail::Node<T>& node) {
    if (std::vector<T>* d = detail::parent_grad(node, 0)) {
      for (std::size_t i = 0; i < d->size(); ++i) (*d)[i] += node.grad[i / cols];
    }
  });
}

template <typename T>
BasicTensor<T> reshape(const BasicTensor<T>& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw ConfigError("reshape: cannot view " + shape_string(x.shape()) + " as " + shape_string(shape));
  }
  std::vector<T> out(x.values().begin(), x.values().end());
  return detail::make_result<T>(std::move(shape), std::move(out), {&x}, [](detail::Node<T>& node) {
    if (std::vector<T>* d = detail::parent_grad(node, 0)) {
      for (std::size_t i = 0; i < d->size(); ++i) (*d)[i] += node.grad[i];
    }
  });
}

template <typename T>
BasicTensor<T> concat_columns(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(0) != b.dim(0)) {
    throw ConfigError("concat_columns: incompatible " + shape_string(a.shape()) + " and " +
                      shape_string(b.shape()));
  }
  const int rows = a.dim(0);
  const int na = a.dim(1);
  const int nb = b.dim(1);
  std::vector<T> out(static_cast<std::size_t>(rows) * (na + nb));
  for (int r = 0; r < rows; ++r) {
    std::copy_n(a.values().data() + r * na, na, out.data() + r * (na + nb));
    std::copy_n(b.values().data() + r * nb, nb, out.data() + r * (na + nb) + na);
  }
  return detail::make_result<T>(
      {rows, na + nb}, std::move(out), {&a, &b}, [rows, na, nb](detail::Node<T>& node) {
        std::vector<T>* da = detail::parent_grad(node, 0);
        std::vector<T>* db = detail::parent_grad(node, 1);
        for (int r = 0; r < rows; ++r) {
          const T* g = node.grad.data() + r * (na + nb);
          if (da) {
            for (int c = 0; c < na; ++c) (*da)[r * na + c] += g[c];
          }
          if (db) {
            for (int c = 0; c < nb; ++c) (*db)[r * nb + c] += g[na + c];
          }
        }
      });
}

template <typename T>
BasicTensor<T> repeat_rows(const BasicTensor<T>& x, int rows) {
  if (x.rank() != 2 || x.dim(0) != 1 || rows < 1) {
    throw ConfigError("repeat_rows: expected [1,N] and rows >= 1, got " + shape_string(x.shape()));
  }
  const int cols = x.dim(1);
  std::vector<T> out;
  out.reserve(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) out.insert(out.end(), x.values().begin(), x.values().end());
  return detail::make_result<T>({rows, cols}, std::move(out), {&x}, [rows, cols](detail::Node<T>& node) {
    if (std::vector<T>* d = detail::parent_grad(node, 0)) {
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) (*d)[c] += node.grad[r * cols + c];
      }
    }
  });
}

template <typename T>
BasicTensor<T> linear(const BasicTensor<T>& x, const BasicTensor<T>& weight,
                      const BasicTensor<T>& bias) {
  if (x.rank() != 2 || weight.rank() != 2 || x.dim(1) != weight.dim(1) ||
      static_cast<int>(bias.numel()) != weight.dim(0)) {
    throw ConfigError("linear: incompatible input " + shape_string(x.shape()) + ", weight " +
                      shape_string(weight.shape()) + ", bias " + shape_string(bias.shape()));
  }
  const int batch = x.dim(0);
  const int in = x.dim(1);
  const int out_dim = weight.dim(0);
  std::vector<T> out(static_cast<std::size_t>(batch) * out_dim);
  auto xv = x.values();
  auto wv = weight.values();
  auto bv = bias.values();
  for (int b = 0; b < batch; ++b) {
    for (int m = 0; m < out_dim; ++m) {
      T s = bv[m];
      const T* xr = xv.data() + b * in;
      const T* wr = wv.data() + m * in;
      for (int n = 0; n < in; ++n) s += xr[n] * wr[n];
      out[b * out_dim + m] = s;
    }
  }
  return detail::make_result<T>(
      {batch, out_dim}, std::move(out), {&x, &weight, &bias},
      [batch, in, out_dim](detail::Node<T>& node) {
        const auto& xv = node.parents[0]->value;
        const auto& wv = node.parents[1]->value;
        std::vector<T>* dx = detail::parent_grad(node, 0);
        std::vector<T>* dw = detail::parent_grad(node, 1);
        std::vector<T>* db = detail::parent_grad(node, 2);
        for (int b = 0; b < batch; ++b) {
          for (int m = 0; m < out_dim; ++m) {
            const T g = node.grad[b * out_dim + m];
            if (g == T(0)) continue;
            if (db) (*db)[m] += g;
            if (dw) {
              T* dwr = dw->data() + m * in;
              const T* xr = xv.data() + b * in;
              for (int n = 0; n < in; ++n) dwr[n] += g * xr[n];
            }
            if (dx) {
              T* dxr = dx->data() + b * in;
              const T* wr = wv.data() + m * in;
              for (int n = 0; n < in; ++n) dxr[n] += g * wr[n];
            }
          }
        }
      });
}

template <typename T>
BasicTensor<T> l2_normalize_channels(const BasicTensor<T>& x, T eps) {
  int batch = 1;
  int plane = 0;
  if (x.rank() == 3 && x.dim(0) == 3) {
    plane = x.dim(1) * x.dim(2);
  } else if (x.rank() == 4 && x.dim(1) == 3) {
    batch = x.dim(0);
    plane = x.dim(2) * x.dim(3);
  } else {
    throw ConfigError("l2_normalize_channels: expected [3,H,W] or [B,3,H,W], got " +
                      shape_string(x.shape()));
  }
  auto xv = x.values();
  std::vector<T> out(xv.size());
  for (int b = 0; b < batch; ++b) {
    const std::size_t base = static_cast<std::size_t>(b) * 3 * plane;
    for (int p = 0; p < plane; ++p) {
      const T a = xv[base + p], c = xv[base + plane + p], d = xv[base + 2 * plane + p];
      const T denom = std::max(std::sqrt(a * a + c * c + d * d), eps);
      out[base + p] = a / denom;
      out[base + plane + p] = c / denom;
      out[base + 2 * plane + p] = d / denom;
    }
  }
  return detail::make_result<T>(x.shape(), std::move(out), {&x}, [batch, plane, eps](detail::Node<T>& node) {
    std::vector<T>* dx = detail::parent_grad(node, 0);
    if (!dx) return;
    const auto& xv = node.parents[0]->value;
    const auto& y = node.value;
    const auto& g = node.grad;
    for (int b = 0; b < batch; ++b) {
      const std::size_t base = static_cast<std::size_t>(b) * 3 * plane;
      for (int p = 0; p < plane; ++p) {
        const std::size_t i0 = base + p, i1 = base + plane + p, i2 = base + 2 * plane + p;
        const T norm = std::sqrt(xv[i0] * xv[i0] + xv[i1] * xv[i1] + xv[i2] * xv[i2]);
        if (norm >= eps) {
          const T yg = y[i0] * g[i0] + y[i1] * g[i1] + y[i2] * g[i2];
          (*dx)[i0] += (g[i0] - y[i0] * yg) / norm;
          (*dx)[i1] += (g[i1] - y[i1] * yg) / norm;
          (*dx)[i2] += (g[i2] - y[i2] * yg) / norm;
        } else {
          (*dx)[i0] += g[i0] / eps;
          (*dx)[i1] += g[i1] / eps;
          (*dx)[i2] += g[i2] / eps;
        }
      }
    }
  });
}

namespace {

// Shared kernel for both fusion entry points: `slices` equally sized
// blocks read through `at(slice, i)`.
template <typename T, typename At>
std::pair<std::vector<T>, std::vector<int>> elementwise_max(std::size_t slices, std::size_t size, At at) {
  std::vector<T> out(size);
  std::vector<int> arg(size, 0);
  for (std::size_t i = 0; i < size; ++i) out[i] = at(0, i);
  for (std::size_t s = 1; s < slices; ++s) {
    for (std::size_t i = 0; i < size; ++i) {
      const T v = at(s, i);
      if (v > out[i]) {
        out[i] = v;
        arg[i] = static_cast<int>(s);
      }
    }
  }
  return {std::move(out), std::move(arg)};
}

}  // namespace

template <typename T>
BasicTensor<T> max_fuse(std::span<const BasicTensor<T>> features) {
  if (features.empty()) throw UsageError("max_fuse: empty feature list");
  for (const auto& f : features) require_same_shape(features[0], f, "max_fuse");
  const std::size_t size = features[0].numel();
  auto [out, arg] = elementwise_max<T>(features.size(), size,
                                       [&](std::size_t s, std::size_t i) { return features[s][i]; });

  auto node = std::make_shared<detail::Node<T>>();
  node->shape = features[0].shape();
  node->value = std::move(out);
  bool needs = false;
  if (NoGradGuard::grad_enabled()) {
    for (const auto& f : features) needs = needs || f.requires_grad();
  }
  if (needs) {
    node->requires_grad = true;
    for (const auto& f : features) node->parents.push_back(f.node());
    node->backward = [arg = std::move(arg)](detail::Node<T>& n) {
      for (std::size_t i = 0; i < arg.size(); ++i) {
        if (std::vector<T>* d = detail::parent_grad(n, arg[i])) (*d)[i] += n.grad[i];
      }
    };
  }
  return BasicTensor<T>(std::move(node));
}

template <typename T>
BasicTensor<T> max_over_batch(const BasicTensor<T>& x) {
  if (x.rank() < 2) throw ConfigError("max_over_batch: expected a leading batch axis");
  const std::size_t slices = x.dim(0);
  const std::size_t size = x.numel() / slices;
  auto xv = x.values();
  auto [out, arg] = elementwise_max<T>(slices, size,
                                       [&](std::size_t s, std::size_t i) { return xv[s * size + i]; });
  Shape shape = x.shape();
  shape[0] = 1;
  return detail::make_result<T>(std::move(shape), std::move(out), {&x},
                                [arg = std::move(arg), size](detail::Node<T>& node) {
                                  std::vector<T>* d = detail::parent_grad(node, 0);
                                  if (!d) return;
                                  for (std::size_t i = 0; i < size; ++i) {
                                    (*d)[arg[i] * size + i] += node.grad[i];
                                  }
                                });
}

template <typename T>
BasicTensor<T> softmax_cross_entropy(const BasicTensor<T>& logits, std::span<const int> targets) {
  if (logits.rank() != 2) {
    throw ConfigError("softmax_cross_entropy: logits must be [B,K], got " + shape_string(logits.shape()));
  }
  const int batch = logits.dim(0);
  const int classes = logits.dim(1);
  if (static_cast<int>(targets.size()) != batch) {
    throw UsageError("softmax_cross_entropy: " + std::to_string(targets.size()) + " targets for batch " +
                     std::to_string(batch));
  }
  for (int t : targets) {
    if (t < 0 || t >= classes) {
      throw UsageError("softmax_cross_entropy: target " + std::to_string(t) + " outside [0," +
                       std::to_string(classes) + ")");
    }
  }
  auto lv = logits.values();
  std::vector<T> probs(lv.size());
  T loss = 0;
  for (int b = 0; b < batch; ++b) {
    const T* row = lv.data() + b * classes;
    const T peak = *std::max_element(row, row + classes);
    T z = 0;
    for (int k = 0; k < classes; ++k) z += std::exp(row[k] - peak);
    const T log_z = std::log(z) + peak;
    for (int k = 0; k < classes; ++k) probs[b * classes + k] = std::exp(row[k] - log_z);
    loss += log_z - row[targets[b]];
  }
  loss /= static_cast<T>(batch);
  std::vector<int> target_copy(targets.begin(), targets.end());
  return detail::make_result<T>(
      {1}, {loss}, {&logits},
      [probs = std::move(probs), target_copy = std::move(target_copy), batch, classes](detail::Node<T>& node) {
        std::vector<T>* d = detail::parent_grad(node, 0);
        if (!d) return;
        const T g = node.grad[0] / static_cast<T>(batch);
        for (int b = 0; b < batch; ++b) {
          for (int k = 0; k < classes; ++k) {
            const T onehot = k == target_copy[b] ? T(1) : T(0);
            (*d)[b * classes + k] += g * (probs[b * classes + k] - onehot);
          }
        }
      });
}

template <typename T>
BasicTensor<T> cosine_loss(const BasicTensor<T>& pred, const BasicTensor<T>& gt,
                           const BasicTensor<T>& mask) {
  const std::size_t plane = mask.numel();
  if (pred.numel() != 3 * plane || gt.numel() != 3 * plane || pred.dim(-1) != mask.dim(-1)) {
    throw ConfigError("cosine_loss: pred " + shape_string(pred.shape()) + ", gt " +
                      shape_string(gt.shape()) + ", mask " + shape_string(mask.shape()) +
                      " are inconsistent");
  }
  auto pv = pred.values();
  auto gv = gt.values();
  auto mv = mask.values();
  std::size_t count = 0;
  T total = 0;
  for (std::size_t p = 0; p < plane; ++p) {
    if (mv[p] == T(0)) continue;
    ++count;
    total += T(1) - (pv[p] * gv[p] + pv[plane + p] * gv[plane + p] + pv[2 * plane + p] * gv[2 * plane + p]);
  }
  if (count == 0) throw UsageError("cosine_loss: empty mask");
  const T inv = T(1) / static_cast<T>(count);
  return detail::make_result<T>({1}, {total * inv}, {&pred, &gt, &mask}, [plane, inv](detail::Node<T>& node) {
    const auto& pv = node.parents[0]->value;
    const auto& gv = node.parents[1]->value;
    const auto& mv = node.parents[2]->value;
    const T g = node.grad[0] * inv;
    std::vector<T>* dp = detail::parent_grad(node, 0);
    std::vector<T>* dg = detail::parent_grad(node, 1);
    for (std::size_t p = 0; p < plane; ++p) {
      if (mv[p] == T(0)) continue;
      for (std::size_t c = 0; c < 3; ++c) {
        if (dp) (*dp)[c * plane + p] -= g * gv[c * plane + p];
        if (dg) (*dg)[c * plane + p] -= g * pv[c * plane + p];
      }
    }
  });
}

#define PSNET_INSTANTIATE_OPS(T)                                                                   \
  template BasicTensor<T> leaky_relu(const BasicTensor<T>&, T);                                    \
  template BasicTensor<T> abs(const BasicTensor<T>&);                                              \
  template BasicTensor<T> softplus(const BasicTensor<T>&);                                         \
  template BasicTensor<T> scale(const BasicTensor<T>&, T);                                         \
  template BasicTensor<T> add(const BasicTensor<T>&, const BasicTensor<T>&);                       \
  template BasicTensor<T> sub(const BasicTensor<T>&, const BasicTensor<T>&);                       \
  template BasicTensor<T> mul(const BasicTensor<T>&, const BasicTensor<T>&);                       \
  template BasicTensor<T> sum(const BasicTensor<T>&);                                              \
  template BasicTensor<T> mean(const BasicTensor<T>&);                                             \
  template BasicTensor<T> sum_rows(const BasicTensor<T>&);                                         \
  template BasicTensor<T> reshape(const BasicTensor<T>&, Shape);                                   \
  template BasicTensor<T> concat_columns(const BasicTensor<T>&, const BasicTensor<T>&);            \
  template BasicTensor<T> repeat_rows(const BasicTensor<T>&, int);                                 \
  template BasicTensor<T> linear(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&); \
  template BasicTensor<T> l2_normalize_channels(const BasicTensor<T>&, T);                         \
  template BasicTensor<T> max_fuse(std::span<const BasicTensor<T>>);                               \
  template BasicTensor<T> max_over_batch(const BasicTensor<T>&);                                   \
  template BasicTensor<T> softmax_cross_entropy(const BasicTensor<T>&, std::span<const int>);      \
  template BasicTensor<T> cosine_loss(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&);

PSNET_INSTANTIATE_OPS(float)
PSNET_INSTANTIATE_OPS(double)

}  // namespace psnet
