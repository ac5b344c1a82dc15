// Maximal coupling of two isotropic Gaussians N(u, s^2 I) and N(u_new, s^2 I)
// by rejection + reflection. Given r drawn from the first, couple() either
// keeps it (accept) or reflects it across the bisecting hyperplane; the output
// is exactly distributed as N(u_new, s^2 I) and the disagreement probability
// equals the total variation distance between the two Gaussians.
#pragma once

#include "tvu/rng.hpp"
#include "tvu/vec.hpp"

namespace tvu {

// Test instrumentation: `inverted` flips the sign of the log accept ratio and
// is used only by the verification harness's mutation check.
enum class CouplingVariant { standard, inverted };

struct CoupleResult {
  bool accepted = false;
  Vec response;
};

// log of the density ratio at r of the target N(u_new, s^2 I) over the
// source N(u, s^2 I). Throws on sigma <= 0 or dimension mismatch.
double log_density_ratio(const Vec& u, const Vec& u_new, const Vec& r,
                         double sigma);

// Householder reflection of r across the hyperplane bisecting u and u_new:
// u_new + (I - 2 e e^T)(r - u), e = (u_new - u)/||u_new - u||.
// Throws when u == u_new (no bisecting hyperplane).
Vec reflect(const Vec& u, const Vec& u_new, const Vec& r);

// One coupling step. `unif` is a uniform [0,1) draw supplied by the caller.
// Accepts iff log(unif) <= log_density_ratio(u, u_new, r, sigma); on accept
// the response is r itself, otherwise the reflection. sigma == 0 degenerates
// to: accept iff u == u_new, response u_new otherwise.
CoupleResult couple(const Vec& u, const Vec& u_new, const Vec& r, double sigma,
                    double unif, CouplingVariant variant = CouplingVariant::standard);

// TV distance between N(u, s^2 I) and N(u', s^2 I) with ||u - u'|| = delta:
// 2 Phi(delta / (2 sigma)) - 1. sigma == 0 gives 1{delta > 0}.
double gaussian_tv(double delta_norm, double sigma);

// mean + sigma * N(0, I). sigma == 0 returns the mean without consuming
// randomness, so noiseless runs are deterministic.
Vec sample_gaussian(const Vec& mean, double sigma, Rng& rng);

}  // namespace tvu
