#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "emofuse/tensor.hpp"

// Finite-difference verification of every backward pass.

namespace emofuse {

struct GradTolerance {
  double step = 1e-6;
  double relative = 1e-4;
  double absolute_floor = 1e-7;
};

/// Running comparison of analytic against numeric gradients. An element
/// passes when |a - n| <= absolute_floor or |a - n| / max(|a|, |n|) < relative.
struct GradComparison {
  GradTolerance tol;
  std::size_t elements = 0;
  std::size_t failures = 0;
  double max_relative = 0.0;  // over elements with magnitude above the absolute floor
  double max_absolute = 0.0;

  void compare(std::span<const double> analytic, std::span<const double> numeric);
  bool passed() const { return failures == 0; }
};

/// Perturbs `value` in place coordinate by coordinate (restoring it) and
/// compares d loss / d value against `analytic`.
void check_tensor(GradComparison& cmp, Tensor& value, const Tensor& analytic, const std::function<double()>& loss);
void check_vector(GradComparison& cmp, Vec& value, std::span<const double> analytic,
                  const std::function<double()>& loss);

struct GradCheckSizes {
  std::size_t objects = 2;  // N
  std::size_t steps = 2;    // T
  std::size_t F = 3;
  std::size_t H = 4;
  std::size_t M = 3;
  std::size_t raw_global = 5;
  std::size_t raw_face = 4;
  std::size_t d1 = 3;
  std::size_t d3 = 3;
};

struct GradCheckCase {
  std::string component;
  /// Runs one seeded instance, folding its comparisons into `cmp`.
  std::function<void(std::uint64_t seed, GradComparison& cmp)> run;
};

/// Primitives, LSTM cell, attention, semantic net (both variants), both
/// encoders, the head, and the full model under the hierarchical loss.
std::vector<GradCheckCase> default_gradcheck_cases(const GradCheckSizes& sizes = {});

struct GradCheckRow {
  std::string component;
  std::size_t instances = 0;
  GradComparison result;
};

struct GradCheckReport {
  std::vector<GradCheckRow> rows;
  bool passed() const;
  std::vector<std::string> failing() const;
};

/// Runs each case on seeds base_seed .. base_seed + instances - 1.
GradCheckReport run_gradcheck(const std::vector<GradCheckCase>& cases, std::uint64_t base_seed,
                              std::size_t instances = 10, const GradTolerance& tol = {});

void print_gradcheck(const GradCheckReport& report, std::ostream& out);

}  // namespace emofuse
