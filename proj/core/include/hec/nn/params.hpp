#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hec/tensor.hpp"

namespace hec::nn {

// Ordered, named parameter tensors. The order is fixed by the network spec
// that created them, so gradients and optimizer state can be kept as plain
// parallel vectors of matrices.
struct NetParams {
  std::vector<std::string> names;
  std::vector<Mat> tensors;
  std::uint64_t seed = 0;

  Mat& at(std::string_view name);
  const Mat& at(std::string_view name) const;
  bool has(std::string_view name) const;

  std::size_t count() const;  // total number of scalar parameters

  void add(std::string name, Mat tensor);
};

using GradSet = std::vector<Mat>;

GradSet zeros_like(const NetParams& params);
void accumulate(GradSet& into, const GradSet& grads, double scale = 1.0);

// Tensors whose name does not end in ".b" are weights; the L2 penalty and
// its gradient only touch those.
bool is_bias_name(std::string_view name);
double l2_penalty(const NetParams& params, double lambda);
void add_l2_gradient(GradSet& grads, const NetParams& params, double lambda);

}  // namespace hec::nn
