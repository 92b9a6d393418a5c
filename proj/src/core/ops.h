#pragma once

#include <vector>

#include "core/autograd.h"

namespace stvsr {
namespace ops {

// ---- plain-value sampling primitive ----------------------------------------
// Bilinear read of src[n,c] at fractional (y, x) with zero padding outside.
// At exactly integer coordinates the left/lower interpolation cell is used,
// which fixes the subgradient choice there.
template <typename T>
T bilinear_sample(const Tensor<T>& src, int n, int c, T y, T x);

// Value plus partial derivatives w.r.t. y and x (same cell convention).
template <typename T>
void bilinear_sample_grad(const Tensor<T>& src, int n, int c, T y, T x, T* value,
                          T* dy, T* dx);

// ---- elementwise / structural ----------------------------------------------
template <typename T>
Var<T> add(Var<T> a, Var<T> b);
template <typename T>
Var<T> sub(Var<T> a, Var<T> b);
template <typename T>
Var<T> scale(Var<T> a, T s);
template <typename T>
Var<T> leaky_relu(Var<T> a, T neg_slope);
template <typename T>
Var<T> sigmoid(Var<T> a);
template <typename T>
Var<T> concat_c(const std::vector<Var<T>>& xs);
template <typename T>
Var<T> slice_c(Var<T> x, int c0, int len);

// ---- convolution family -----------------------------------------------------
// w is [oc, ic, k, k]; b is [1, oc, 1, 1] or null.
template <typename T>
Var<T> conv2d(Var<T> x, Var<T> w, Var<T> b, int stride, int pad);

// DCNv2-style deformable conv, stride 1. offsets is [n, 2*K*K*groups, oh, ow]
// with (dy, dx) pairs per (group, tap); modulation is [n, K*K*groups, oh, ow]
// already in [0, 1], or null. `groups` partitions the input channels.
template <typename T>
Var<T> deform_conv2d(Var<T> x, Var<T> w, Var<T> b, Var<T> offsets, Var<T> modulation,
                     int pad, int groups);

template <typename T>
Var<T> pixel_shuffle(Var<T> x, int r);
template <typename T>
Var<T> pixel_unshuffle(Var<T> x, int r);

// Half-pixel-center bilinear upsample by an integer factor; border clamped so
// constants are preserved.
template <typename T>
Var<T> bilinear_upsample(Var<T> x, int factor);

// Backward warp by a per-pixel flow [n, 2, h, w] (dy, dx), zero padding.
template <typename T>
Var<T> warp(Var<T> src, Var<T> flow);

// Mean (dy, dx) over all taps*groups of an offset field laid out as in
// deform_conv2d: returns [n, 2, h, w].
template <typename T>
Var<T> mean_flow(Var<T> offsets);

// out = s*phi_f + (1-s)*phi_b with s = sigmoid(logit_f - logit_b) per pixel;
// logits are [n, 1, h, w].
template <typename T>
Var<T> blend_softmax(Var<T> phi_f, Var<T> phi_b, Var<T> logit_f, Var<T> logit_b);

// The two softmax weights as plain tensors (diagnostics/tests).
template <typename T>
std::pair<Tensor<T>, Tensor<T>> softmax2_weights(const Tensor<T>& logit_f,
                                                 const Tensor<T>& logit_b);

// mean over elements of sqrt(d^2 + omega^2), d = pred - target. Scalar output.
template <typename T>
Var<T> charbonnier(Var<T> pred, const Tensor<T>& target, T omega);

// Weighted sum of scalar vars.
template <typename T>
Var<T> add_weighted(const std::vector<Var<T>>& scalars, const std::vector<T>& weights);

// Sum of all elements, as a scalar var.
template <typename T>
Var<T> sum_all(Var<T> x);

}  // namespace ops
}  // namespace stvsr
