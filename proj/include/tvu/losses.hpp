// Loss models with declared Lipschitz (G) and smoothness (H) constants.
// GLM losses take z = (x_1..x_d, y) with y in {-1, +1} and model w in R^d;
// the clipped quadratic takes z as a target point in R^d.
#pragma once

#include <functional>
#include <string>

#include "tvu/vec.hpp"

namespace tvu {

struct LossModel {
  std::string name;
  double lipschitz = 0.0;   // G
  double smoothness = 0.0;  // H; 0 marks a nonsmooth loss
  std::function<double(const Vec& w, const Vec& z)> value;
  std::function<Vec(const Vec& w, const Vec& z)> grad;  // subgradient if nonsmooth
};

// log(1 + exp(-y <w,x>)): G = x_bound, H = x_bound^2 / 4.
LossModel logistic_loss(double x_bound);

// max(0, 1 - y <w,x>): G = x_bound, nonsmooth.
LossModel hinge_loss(double x_bound);

// Huber-style clipped quadratic around the target z:
// 0.5 ||w-z||^2 inside ||w-z|| <= clip, linear growth outside.
// grad = (w-z) * min(1, clip/||w-z||): G = clip, H = 1.
LossModel clipped_quadratic(double clip);

// Split a GLM row into features (first d entries) and label (last entry).
Vec glm_features(const Vec& z);
double glm_label(const Vec& z);

}  // namespace tvu
