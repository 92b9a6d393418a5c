#include "data/png_io.h"

#include <png.h>

#include <cmath>
#include <cstring>
#include <vector>

namespace stvsr {
namespace data {

Tensor<float> read_png(const std::string& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw ConfigError("read_png: cannot open '" + path + "': " + image.message);
  image.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&image);
    throw ConfigError("read_png: decode failed for '" + path + "': " + image.message);
  }
  const int h = int(image.height), w = int(image.width);
  Tensor<float> out(Shape::chw(3, h, w));
  out.domain = ValueDomain::pixel_unit;
  for (int c = 0; c < 3; ++c) {
    float* plane = out.plane(0, c);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        plane[int64_t(y) * w + x] = buf[(size_t(y) * w + x) * 3 + c] / 255.0f;
  }
  return out;
}

void write_png(const std::string& path, const Tensor<float>& frame) {
  const Shape& s = frame.shape;
  if (s.n != 1 || (s.c != 3 && s.c != 1))
    throw ConfigError("write_png: expected [1|3, h, w] frame, got " + s.str());
  std::vector<png_byte> buf(size_t(s.h) * s.w * 3);
  for (int y = 0; y < s.h; ++y)
    for (int x = 0; x < s.w; ++x)
      for (int c = 0; c < 3; ++c) {
        float v = frame.at(0, s.c == 3 ? c : 0, y, x);
        v = std::min(1.0f, std::max(0.0f, v));
        buf[(size_t(y) * s.w + x) * 3 + c] = png_byte(std::floor(v * 255.0f + 0.5f));
      }
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = png_uint_32(s.w);
  image.height = png_uint_32(s.h);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, buf.data(), 0, nullptr))
    throw ConfigError("write_png: cannot write '" + path + "': " + image.message);
}

}  // namespace data
}  // namespace stvsr
