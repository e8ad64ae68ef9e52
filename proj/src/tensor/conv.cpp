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

#include <Eigen/Core>

#include "op_support.h"
#include "psnet/errors.h"
#include "psnet/ops.h"

namespace psnet {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMapMat = Eigen::Map<const RowMat<T>>;

// Patch geometry of a strided convolution: an image of `channels` x
// `height` x `width` sampled on an `out_h` x `out_w` grid.
struct Geometry {
  int channels, height, width;
  int kernel, stride, padding;
  int out_h, out_w;

  int patch_rows() const { return channels * kernel * kernel; }
  int grid_size() const { return out_h * out_w; }
};

template <typename T>
void im2col(const T* image, const Geometry& g, T* col) {
  const int grid = g.grid_size();
  for (int c = 0; c < g.channels; ++c) {
    for (int ki = 0; ki < g.kernel; ++ki) {
      for (int kj = 0; kj < g.kernel; ++kj) {
        T* row = col + static_cast<std::size_t>((c * g.kernel + ki) * g.kernel + kj) * grid;
        for (int oy = 0; oy < g.out_h; ++oy) {
          const int y = oy * g.stride - g.padding + ki;
          T* dst = row + oy * g.out_w;
          if (y < 0 || y >= g.height) {
            std::fill(dst, dst + g.out_w, T(0));
            continue;
          }
          const T* src = image + (static_cast<std::size_t>(c) * g.height + y) * g.width;
          for (int ox = 0; ox < g.out_w; ++ox) {
            const int x = ox * g.stride - g.padding + kj;
            dst[ox] = (x >= 0 && x < g.width) ? src[x] : T(0);
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-adds patch columns back into the image.
template <typename T>
void col2im(const T* col, const Geometry& g, T* image) {
  const int grid = g.grid_size();
  for (int c = 0; c < g.channels; ++c) {
    for (int ki = 0; ki < g.kernel; ++ki) {
      for (int kj = 0; kj < g.kernel; ++kj) {
        const T* row = col + static_cast<std::size_t>((c * g.kernel + ki) * g.kernel + kj) * grid;
        for (int oy = 0; oy < g.out_h; ++oy) {
          const int y = oy * g.stride - g.padding + ki;
          if (y < 0 || y >= g.height) continue;
          const T* src = row + oy * g.out_w;
          T* dst = image + (static_cast<std::size_t>(c) * g.height + y) * g.width;
          for (int ox = 0; ox < g.out_w; ++ox) {
            const int x = ox * g.stride - g.padding + kj;
            if (x >= 0 && x < g.width) dst[x] += src[ox];
          }
        }
      }
    }
  }
}

struct ImageBatch {
  int batch, channels, height, width;
  bool had_batch_axis;
};

template <typename T>
ImageBatch image_batch(const BasicTensor<T>& x, const char* op) {
  const Shape& s = x.shape();
  if (s.size() == 3) return {1, s[0], s[1], s[2], false};
  if (s.size() == 4) return {s[0], s[1], s[2], s[3], true};
  throw ConfigError(std::string(op) + ": input must be [C,H,W] or [B,C,H,W], got " + shape_string(s));
}

template <typename T>
void check_kernel(const BasicTensor<T>& weight, const BasicTensor<T>& bias, int out_channels,
                  const char* op) {
  const Shape& w = weight.shape();
  if (w.size() != 4 || w[2] != w[3]) {
    throw ConfigError(std::string(op) + ": weight must be square [*,*,k,k], got " + shape_string(w));
  }
  if (static_cast<int>(bias.numel()) != out_channels) {
    throw ConfigError(std::string(op) + ": bias has " + std::to_string(bias.numel()) +
                      " entries for " + std::to_string(out_channels) + " output channels");
  }
}

Shape output_shape(const ImageBatch& in, int channels, int h, int w) {
  if (in.had_batch_axis) return {in.batch, channels, h, w};
  return {channels, h, w};
}

}  // namespace

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                      const BasicTensor<T>& bias, int stride, int padding) {
  const ImageBatch in = image_batch(input, "conv2d");
  const int out_channels = weight.dim(0);
  check_kernel(weight, bias, out_channels, "conv2d");
  if (weight.dim(1) != in.channels) {
    throw ConfigError("conv2d: input has " + std::to_string(in.channels) +
                      " channels but weight expects " + std::to_string(weight.dim(1)));
  }
  if (stride <= 0 || padding < 0) throw ConfigError("conv2d: stride must be positive and padding non-negative");
  const int k = weight.dim(2);
  const int out_h = (in.height + 2 * padding - k) / stride + 1;
  const int out_w = (in.width + 2 * padding - k) / stride + 1;
  if (in.height + 2 * padding < k || in.width + 2 * padding < k) {
    throw ConfigError("conv2d: kernel larger than padded input");
  }
  const Geometry g{in.channels, in.height, in.width, k, stride, padding, out_h, out_w};

  const std::size_t in_stride = static_cast<std::size_t>(in.channels) * in.height * in.width;
  const std::size_t out_stride = static_cast<std::size_t>(out_channels) * g.grid_size();
  std::vector<T> out(out_stride * in.batch);
  std::vector<T> col(static_cast<std::size_t>(g.patch_rows()) * g.grid_size());
  ConstMapMat<T> w(weight.values().data(), out_channels, g.patch_rows());
  Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> b(bias.values().data(), out_channels);
  for (int n = 0; n < in.batch; ++n) {
    im2col(input.values().data() + n * in_stride, g, col.data());
    MapMat<T> o(out.data() + n * out_stride, out_channels, g.grid_size());
    o.noalias() = w * ConstMapMat<T>(col.data(), g.patch_rows(), g.grid_size());
    o.colwise() += b;
  }

  return detail::make_result<T>(
      output_shape(in, out_channels, out_h, out_w), std::move(out), {&input, &weight, &bias},
      [in, g, out_channels, in_stride, out_stride](detail::Node<T>& node) {
        const T* x = node.parents[0]->value.data();
        const T* wv = node.parents[1]->value.data();
        std::vector<T>* dx = detail::parent_grad(node, 0);
        std::vector<T>* dw = detail::parent_grad(node, 1);
        std::vector<T>* db = detail::parent_grad(node, 2);
        std::vector<T> col(static_cast<std::size_t>(g.patch_rows()) * g.grid_size());
        ConstMapMat<T> w(wv, out_channels, g.patch_rows());
        for (int n = 0; n < in.batch; ++n) {
          ConstMapMat<T> grad(node.grad.data() + n * out_stride, out_channels, g.grid_size());
          if (dw) {
            im2col(x + n * in_stride, g, col.data());
            MapMat<T>(dw->data(), out_channels, g.patch_rows()).noalias() +=
                grad * ConstMapMat<T>(col.data(), g.patch_rows(), g.grid_size()).transpose();
          }
          if (db) {
            // Plain loop: Eigen's vectorized reduction depends on buffer
            // alignment, which would make gradients vary between runs.
            const T* gp = node.grad.data() + n * out_stride;
            const std::size_t plane = g.grid_size();
            for (int c = 0; c < out_channels; ++c) {
              T s = 0;
              for (std::size_t i = 0; i < plane; ++i) s += gp[c * plane + i];
              (*db)[c] += s;
            }
          }
          if (dx) {
            MapMat<T>(col.data(), g.patch_rows(), g.grid_size()).noalias() = w.transpose() * grad;
            col2im(col.data(), g, dx->data() + n * in_stride);
          }
        }
      });
}

template <typename T>
BasicTensor<T> deconv2d(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                        const BasicTensor<T>& bias, int stride, int padding) {
  if (stride <= 0) throw ConfigError("deconv2d: stride must be positive, got " + std::to_string(stride));
  const ImageBatch in = image_batch(input, "deconv2d");
  if (weight.rank() != 4) throw ConfigError("deconv2d: weight must be [C_in,C_out,k,k]");
  const int out_channels = weight.dim(1);
  check_kernel(weight, bias, out_channels, "deconv2d");
  if (weight.dim(0) != in.channels) {
    throw ConfigError("deconv2d: input has " + std::to_string(in.channels) +
                      " channels but weight expects " + std::to_string(weight.dim(0)));
  }
  const int k = weight.dim(2);
  if (padding < 0 || k - 2 * padding != stride) {
    throw ConfigError("deconv2d: kernel " + std::to_string(k) + " with padding " +
                      std::to_string(padding) + " does not upsample exactly by stride " +
                      std::to_string(stride));
  }
  const int out_h = in.height * stride;
  const int out_w = in.width * stride;
  // Geometry of the adjoint convolution, from the output image onto the
  // input grid.
  const Geometry g{out_channels, out_h, out_w, k, stride, padding, in.height, in.width};

  const std::size_t in_stride = static_cast<std::size_t>(in.channels) * in.height * in.width;
  const std::size_t out_plane = static_cast<std::size_t>(out_h) * out_w;
  const std::size_t out_stride = out_channels * out_plane;
  std::vector<T> out(out_stride * in.batch, T(0));
  std::vector<T> col(static_cast<std::size_t>(g.patch_rows()) * g.grid_size());
  ConstMapMat<T> w(weight.values().data(), in.channels, g.patch_rows());
  for (int n = 0; n < in.batch; ++n) {
    ConstMapMat<T> x(input.values().data() + n * in_stride, in.channels, g.grid_size());
    MapMat<T>(col.data(), g.patch_rows(), g.grid_size()).noalias() = w.transpose() * x;
    T* o = out.data() + n * out_stride;
    col2im(col.data(), g, o);
    for (int c = 0; c < out_channels; ++c) {
      const T bc = bias.values()[c];
      for (std::size_t i = 0; i < out_plane; ++i) o[c * out_plane + i] += bc;
    }
  }

  return detail::make_result<T>(
      output_shape(in, out_channels, out_h, out_w), std::move(out), {&input, &weight, &bias},
      [in, g, out_channels, in_stride, out_stride, out_plane](detail::Node<T>& node) {
        const T* x = node.parents[0]->value.data();
        const T* wv = node.parents[1]->value.data();
        std::vector<T>* dx = detail::parent_grad(node, 0);
        std::vector<T>* dw = detail::parent_grad(node, 1);
        std::vector<T>* db = detail::parent_grad(node, 2);
        std::vector<T> col(static_cast<std::size_t>(g.patch_rows()) * g.grid_size());
        ConstMapMat<T> w(wv, in.channels, g.patch_rows());
        for (int n = 0; n < in.batch; ++n) {
          const T* grad = node.grad.data() + n * out_stride;
          if (db) {
            for (int c = 0; c < out_channels; ++c) {
              T s = 0;
              for (std::size_t i = 0; i < out_plane; ++i) s += grad[c * out_plane + i];
              (*db)[c] += s;
            }
          }
          if (!dx && !dw) continue;
          im2col(grad, g, col.data());
          ConstMapMat<T> gcol(col.data(), g.patch_rows(), g.grid_size());
          if (dx) {
            MapMat<T>(dx->data() + n * in_stride, in.channels, g.grid_size()).noalias() += w * gcol;
          }
          if (dw) {
            ConstMapMat<T> xm(x + n * in_stride, in.channels, g.grid_size());
            MapMat<T>(dw->data(), in.channels, g.patch_rows()).noalias() += xm * gcol.transpose();
          }
        }
      });
}

template BasicTensor<float> conv2d(const BasicTensor<float>&, const BasicTensor<float>&,
                                   const BasicTensor<float>&, int, int);
template BasicTensor<double> conv2d(const BasicTensor<double>&, const BasicTensor<double>&,
                                    const BasicTensor<double>&, int, int);
template BasicTensor<float> deconv2d(const BasicTensor<float>&, const BasicTensor<float>&,
                                     const BasicTensor<float>&, int, int);
template BasicTensor<double> deconv2d(const BasicTensor<double>&, const BasicTensor<double>&,
                                      const BasicTensor<double>&, int, int);

}  // namespace psnet
