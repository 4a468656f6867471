#include "emofuse/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "emofuse/kernels.hpp"
#include "emofuse/rng.hpp"

namespace emofuse {

Vec affine(std::span<const double> x, const Tensor& W, const Tensor* b) {
  require_shape(!W.is_vector() && W.cols() == x.size(),
                "affine: W " + W.shape_string() + " incompatible with x of length " + std::to_string(x.size()));
  Vec y(W.rows());
  kernels::matvec(W.data(), W.rows(), W.cols(), x, y);
  if (b) {
    require_shape(b->size() == W.rows(), "affine: bias length mismatch");
    kernels::add(b->data(), y);
  }
  return y;
}

void affine_backward(std::span<const double> x, const Tensor& W, std::span<const double> grad_y,
                     std::span<double> grad_x, Tensor* grad_W, Tensor* grad_b) {
  require_shape(W.cols() == x.size() && W.rows() == grad_y.size(), "affine_backward: shape mismatch");
  if (!grad_x.empty()) {
    require_shape(grad_x.size() == x.size(), "affine_backward: grad_x length mismatch");
    kernels::matvec_t_acc(W.data(), W.rows(), W.cols(), grad_y, grad_x);
  }
  if (grad_W) {
    require_shape(grad_W->same_shape(W), "affine_backward: grad_W shape mismatch");
    kernels::outer_acc(grad_W->data(), W.rows(), W.cols(), grad_y, x);
  }
  if (grad_b) {
    require_shape(grad_b->size() == grad_y.size(), "affine_backward: grad_b length mismatch");
    kernels::add(grad_y, grad_b->data());
  }
}

Vec tanh_map(std::span<const double> x) {
  Vec y(x.size());
  std::transform(x.begin(), x.end(), y.begin(), [](double v) { return std::tanh(v); });
  return y;
}

void tanh_backward(std::span<const double> y, std::span<const double> grad_y, std::span<double> grad_x) {
  require_shape(y.size() == grad_y.size() && y.size() == grad_x.size(), "tanh_backward: length mismatch");
  for (std::size_t k = 0; k < y.size(); ++k) grad_x[k] += grad_y[k] * (1.0 - y[k] * y[k]);
}

Vec sigmoid_map(std::span<const double> x) {
  Vec y(x.size());
  std::transform(x.begin(), x.end(), y.begin(), [](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  return y;
}

void sigmoid_backward(std::span<const double> y, std::span<const double> grad_y, std::span<double> grad_x) {
  require_shape(y.size() == grad_y.size() && y.size() == grad_x.size(), "sigmoid_backward: length mismatch");
  for (std::size_t k = 0; k < y.size(); ++k) grad_x[k] += grad_y[k] * y[k] * (1.0 - y[k]);
}

Vec softmax(std::span<const double> x) {
  require_shape(!x.empty(), "softmax: empty input");
  const double shift = *std::max_element(x.begin(), x.end());
  Vec p(x.size());
  double total = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    p[k] = std::exp(x[k] - shift);
    total += p[k];
  }
  for (double& v : p) v /= total;
  return p;
}

void softmax_backward(std::span<const double> p, std::span<const double> grad_p, std::span<double> grad_x) {
  require_shape(p.size() == grad_p.size() && p.size() == grad_x.size(), "softmax_backward: length mismatch");
  const double inner = kernels::dot(grad_p, p);
  for (std::size_t k = 0; k < p.size(); ++k) grad_x[k] += p[k] * (grad_p[k] - inner);
}

Vec concat(std::initializer_list<std::span<const double>> parts) {
  std::size_t total = 0;
  for (auto part : parts) total += part.size();
  Vec y;
  y.reserve(total);
  for (auto part : parts) y.insert(y.end(), part.begin(), part.end());
  return y;
}

void concat_backward(std::span<const double> grad_y, std::initializer_list<std::span<double>> grad_parts) {
  std::size_t offset = 0;
  for (auto part : grad_parts) {
    require_shape(offset + part.size() <= grad_y.size(), "concat_backward: parts exceed gradient length");
    kernels::add(grad_y.subspan(offset, part.size()), part);
    offset += part.size();
  }
  require_shape(offset == grad_y.size(), "concat_backward: parts do not cover the gradient");
}

Vec mean_rows(const Tensor& F) {
  require_shape(F.rows() > 0, "mean_rows: no rows");
  const double w = 1.0 / static_cast<double>(F.rows());
  Vec y(F.cols(), 0.0);
  for (std::size_t i = 0; i < F.rows(); ++i) kernels::axpy(w, F.row(i), y);
  return y;
}

void mean_rows_backward(std::span<const double> grad_y, Tensor& grad_F) {
  require_shape(grad_F.rows() > 0 && grad_F.cols() == grad_y.size(), "mean_rows_backward: shape mismatch");
  const double w = 1.0 / static_cast<double>(grad_F.rows());
  for (std::size_t i = 0; i < grad_F.rows(); ++i) kernels::axpy(w, grad_y, grad_F.row(i));
}

Vec weighted_sum(const Tensor& F, std::span<const double> alpha) {
  require_shape(F.rows() == alpha.size(), "weighted_sum: weight count does not match row count");
  Vec y(F.cols(), 0.0);
  for (std::size_t i = 0; i < F.rows(); ++i) kernels::axpy(alpha[i], F.row(i), y);
  return y;
}

void weighted_sum_backward(const Tensor& F, std::span<const double> alpha, std::span<const double> grad_y,
                           Tensor* grad_F, std::span<double> grad_alpha) {
  require_shape(F.rows() == alpha.size() && F.cols() == grad_y.size(), "weighted_sum_backward: shape mismatch");
  for (std::size_t i = 0; i < F.rows(); ++i) {
    if (grad_F) kernels::axpy(alpha[i], grad_y, grad_F->row(i));
    if (!grad_alpha.empty()) grad_alpha[i] += kernels::dot(F.row(i), grad_y);
  }
}

double nll_from_probs(std::span<const double> p, std::size_t target) {
  if (target >= p.size()) throw std::out_of_range("nll: target index out of range");
  return -std::log(std::max(p[target], kLogClamp));
}

void nll_backward(std::span<const double> p, std::size_t target, double grad_loss, std::span<double> grad_p) {
  if (target >= p.size()) throw std::out_of_range("nll: target index out of range");
  require_shape(grad_p.size() == p.size(), "nll_backward: length mismatch");
  if (p[target] > kLogClamp) grad_p[target] += -grad_loss / p[target];
}

Vec finite_diff_grad(const std::function<double(std::span<const double>)>& f, std::span<const double> x,
                     double h) {
  Vec probe(x.begin(), x.end());
  Vec grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

void init_uniform_fan_in(Tensor& t, std::size_t fan_in, Rng& rng) {
  const double k = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
  for (double& v : t.data()) v = rng.uniform(-k, k);
}

}  // namespace emofuse
