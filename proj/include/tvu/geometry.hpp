// Constraint bodies for the SCO solvers: linear minimization oracle for
// Frank-Wolfe, Euclidean projection for dual averaging.
#pragma once

#include <functional>
#include <string>

#include "tvu/vec.hpp"

namespace tvu {

struct ConvexBody {
  std::string name;
  Vec center;
  double diameter = 0.0;
  std::function<Vec(const Vec& direction)> lmo;  // argmin_{w in W} <w, direction>
  std::function<Vec(const Vec& point)> project;
};

ConvexBody ball_body(Vec center, double radius);
ConvexBody box_body(Vec lo, Vec hi);

}  // namespace tvu
