#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "emofuse/tensor.hpp"

// Differentiable primitives. Every forward has a matching *_backward that takes
// the gradient of a scalar loss w.r.t. the forward output and *adds* the
// resulting gradients into caller-provided buffers. Passing an empty span (or
// nullptr) for an input gradient skips it.

namespace emofuse {

class Rng;

/// Lower clamp applied to probabilities before taking logs.
inline constexpr double kLogClamp = 1e-12;

/// W x (+ b). W is m x n, x has n entries, b (optional) has m.
Vec affine(std::span<const double> x, const Tensor& W, const Tensor* b = nullptr);
void affine_backward(std::span<const double> x, const Tensor& W, std::span<const double> grad_y,
                     std::span<double> grad_x, Tensor* grad_W, Tensor* grad_b);

Vec tanh_map(std::span<const double> x);
/// `y` is the forward output.
void tanh_backward(std::span<const double> y, std::span<const double> grad_y, std::span<double> grad_x);

Vec sigmoid_map(std::span<const double> x);
void sigmoid_backward(std::span<const double> y, std::span<const double> grad_y, std::span<double> grad_x);

/// Max-shifted softmax. Throws ShapeError on an empty input.
Vec softmax(std::span<const double> x);
/// `p` is the forward output.
void softmax_backward(std::span<const double> p, std::span<const double> grad_p, std::span<double> grad_x);

Vec concat(std::initializer_list<std::span<const double>> parts);
/// Splits grad_y by the lengths of `grad_parts` and accumulates into each.
void concat_backward(std::span<const double> grad_y, std::initializer_list<std::span<double>> grad_parts);

/// Mean of the rows of an N x d matrix, computed as sum_i (1/N) f_i left to
/// right, so it equals weighted_sum with a uniform 1/N weight vector bitwise.
/// Throws ShapeError when N = 0.
Vec mean_rows(const Tensor& F);
void mean_rows_backward(std::span<const double> grad_y, Tensor& grad_F);

/// sum_i alpha_i f_i over the rows of F, left to right.
Vec weighted_sum(const Tensor& F, std::span<const double> alpha);
void weighted_sum_backward(const Tensor& F, std::span<const double> alpha, std::span<const double> grad_y,
                           Tensor* grad_F, std::span<double> grad_alpha);

/// -log(max(p[target], kLogClamp)). Throws std::out_of_range for a bad target.
double nll_from_probs(std::span<const double> p, std::size_t target);
/// Adds grad_loss * d(nll)/dp into grad_p; zero when the clamp is active.
void nll_backward(std::span<const double> p, std::size_t target, double grad_loss, std::span<double> grad_p);

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h per coordinate.
Vec finite_diff_grad(const std::function<double(std::span<const double>)>& f, std::span<const double> x,
                     double h = 1e-6);

/// uniform(-k, k) with k = 1/sqrt(fan_in).
void init_uniform_fan_in(Tensor& t, std::size_t fan_in, Rng& rng);

}  // namespace emofuse
