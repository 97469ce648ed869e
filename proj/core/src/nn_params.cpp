#include "hec/nn/params.hpp"

#include "hec/types.hpp"

namespace hec::nn {

Mat& NetParams::at(std::string_view name) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return tensors[i];
  }
  throw ShapeError("no parameter tensor named '" + std::string(name) + "'");
}

const Mat& NetParams::at(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return tensors[i];
  }
  throw ShapeError("no parameter tensor named '" + std::string(name) + "'");
}

bool NetParams::has(std::string_view name) const {
  for (const auto& n : names) {
    if (n == name) return true;
  }
  return false;
}

std::size_t NetParams::count() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += static_cast<std::size_t>(t.size());
  return n;
}

void NetParams::add(std::string name, Mat tensor) {
  names.push_back(std::move(name));
  tensors.push_back(std::move(tensor));
}

GradSet zeros_like(const NetParams& params) {
  GradSet grads;
  grads.reserve(params.tensors.size());
  for (const auto& t : params.tensors) {
    grads.push_back(Mat::Zero(t.rows(), t.cols()));
  }
  return grads;
}

void accumulate(GradSet& into, const GradSet& grads, double scale) {
  if (into.size() != grads.size()) throw ShapeError("gradient set size mismatch");
  for (std::size_t i = 0; i < grads.size(); ++i) {
    into[i] += scale * grads[i];
  }
}

bool is_bias_name(std::string_view name) {
  return name.size() >= 2 && name.substr(name.size() - 2) == ".b";
}

double l2_penalty(const NetParams& params, double lambda) {
  if (lambda == 0.0) return 0.0;
  double ssq = 0.0;
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    if (is_bias_name(params.names[i])) continue;
    ssq += params.tensors[i].squaredNorm();
  }
  return lambda * ssq;
}

void add_l2_gradient(GradSet& grads, const NetParams& params, double lambda) {
  if (lambda == 0.0) return;
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    if (is_bias_name(params.names[i])) continue;
    grads[i] += 2.0 * lambda * params.tensors[i];
  }
}

}  // namespace hec::nn
