#pragma once

#include <string>

#include "core/tensor.h"

namespace stvsr {
namespace data {

// Reads an 8-bit PNG into a [3, h, w] pixel_unit frame (values / 255).
// Grayscale sources are replicated to three channels. Throws ConfigError on
// decode failure with the path in the message.
Tensor<float> read_png(const std::string& path);

// Writes a [3|1, h, w] frame as 8-bit PNG, clamping to [0,1] and quantizing
// with round-half-up.
void write_png(const std::string& path, const Tensor<float>& frame);

}  // namespace data
}  // namespace stvsr
