// Stochastic convex optimization drivers expressed as (QuerySpec, UpdateRule)
// pairs for the prefix-sum engine.
//
// Variance-reduced Frank-Wolfe: the appended per-step value is the recursive
// gradient-estimator increment (t+1) grad(w_t; z_t) - t grad(w_{t-1}; z_t),
// so the prefix sum telescopes to a running estimate of (t+1) grad F(w_t).
// The update plays v_t = lmo(r_t / (t+1)) and steps w_{t+1} =
// (1 - eta_t) w_t + eta_t v_t with eta_t = 1/(t+1). Sensitivity 2(HD + G):
// consecutive iterates are D/t apart, so the increment moves by at most
// 2G + 2tH * D/t when one point is swapped.
//
// Dual averaging: appends plain gradients (sensitivity 2G); the update
// projects w0 - eta * r_t with the fixed step eta =
// D d^{1/4} sqrt(log2 n) / (G sqrt(n rho)).
#pragma once

#include <cstddef>

#include "tvu/engine.hpp"
#include "tvu/geometry.hpp"
#include "tvu/losses.hpp"

namespace tvu {

QuerySpec vrfw_spec(const LossModel& loss, const ConvexBody& body);
UpdateRule vrfw_rule(const ConvexBody& body);

QuerySpec da_spec(const LossModel& loss);
double da_step_size(double diameter, std::size_t dim, std::size_t n, double rho,
                    double lipschitz);
UpdateRule da_rule(const ConvexBody& body, double eta);

// Mean loss over a dataset (rows in the loss's own encoding).
double empirical_risk(const LossModel& loss, const Vec& w,
                      const std::vector<Vec>& rows);

}  // namespace tvu
