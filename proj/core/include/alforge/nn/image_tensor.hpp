#pragma once

#include <vector>

#include "alforge/core/grid.hpp"
#include "alforge/nn/tensor.hpp"

namespace alforge::nn {

/// Stacks equally sized images into a [N, 1, H, W] tensor.
inline Tensor image_batch(const std::vector<const Image*>& images) {
  const int rows = images.front()->rows(), cols = images.front()->cols();
  std::vector<double> values;
  values.reserve(images.size() * images.front()->size());
  for (const Image* im : images) values.insert(values.end(), im->values().begin(), im->values().end());
  return Tensor::from({static_cast<int>(images.size()), 1, rows, cols}, std::move(values));
}

inline Tensor image_batch(const Image& image) { return image_batch(std::vector<const Image*>{&image}); }

/// Sample `n` of a [N, 1, H, W] tensor as an image.
inline Image tensor_image(const Tensor& t, int n = 0) {
  const int rows = t.dim(2), cols = t.dim(3);
  const auto begin = t.data().begin() + static_cast<std::ptrdiff_t>(n) * rows * cols;
  return Image(rows, cols, std::vector<double>(begin, begin + rows * cols));
}

}  // namespace alforge::nn
