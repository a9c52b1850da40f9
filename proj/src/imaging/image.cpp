#include "fewrays/image.hpp"

#include <algorithm>
#include <stdexcept>

namespace fewrays {

Image::Image(int width, int height, double fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw std::invalid_argument("Image: negative dimensions");
  data_.assign(static_cast<std::size_t>(width) * height * 3, fill);
}

bool Image::in_unit_range() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return x >= 0.0 && x <= 1.0; });
}

ScalarMap luma(const Image& image) {
  ScalarMap out(image.width(), image.height());
  for (int u = 0; u < image.height(); ++u)
    for (int v = 0; v < image.width(); ++v)
      out.at(u, v) = 0.299 * image.at(u, v, 0) + 0.587 * image.at(u, v, 1) + 0.114 * image.at(u, v, 2);
  return out;
}

}  // namespace fewrays
