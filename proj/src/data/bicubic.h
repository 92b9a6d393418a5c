#pragma once

#include "core/tensor.h"

namespace stvsr {
namespace data {

// Separable Keys bicubic (a = -0.5) resize to an arbitrary size. When
// downscaling, the kernel is widened by the scale factor (antialiasing);
// weights are renormalized and borders replicate, so constants map to
// themselves exactly.
template <typename T>
Tensor<T> resize_bicubic(const Tensor<T>& src, int out_h, int out_w);

// Bicubic downscale by an integer factor with clamping to [0,1]; dims must be
// divisible by the factor.
template <typename T>
Tensor<T> degrade_bicubic(const Tensor<T>& frame, int scale);

// Bicubic upscale by an integer factor (no antialiasing needed); used by the
// plain-interpolation baseline.
template <typename T>
Tensor<T> upscale_bicubic(const Tensor<T>& frame, int scale);

}  // namespace data
}  // namespace stvsr
