#include "tvu/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tvu {

ConvexBody ball_body(Vec center, double radius) {
  if (radius <= 0.0) throw std::invalid_argument("ball_body: radius must be > 0");
  ConvexBody b;
  b.name = "ball";
  b.center = center;
  b.diameter = 2.0 * radius;
  b.lmo = [center, radius](const Vec& dir) {
    const double n = norm(dir);
    if (n == 0.0) return center;  // every boundary point minimizes; pick the center
    Vec out = center;
    axpy_in(out, -radius / n, dir);
    return out;
  };
  b.project = [center, radius](const Vec& p) {
    Vec off = sub(p, center);
    const double n = norm(off);
    if (n <= radius) return p;
    Vec out = center;
    axpy_in(out, radius / n, off);
    return out;
  };
  return b;
}

ConvexBody box_body(Vec lo, Vec hi) {
  require_same_dim(lo, hi);
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (lo[i] > hi[i]) throw std::invalid_argument("box_body: lo > hi");
  }
  ConvexBody b;
  b.name = "box";
  b.center = scaled(add(lo, hi), 0.5);
  b.diameter = dist(lo, hi);
  b.lmo = [lo, hi](const Vec& dir) {
    Vec out(dir.size());
    for (std::size_t i = 0; i < dir.size(); ++i) out[i] = dir[i] > 0.0 ? lo[i] : hi[i];
    return out;
  };
  b.project = [lo, hi](const Vec& p) {
    Vec out = p;
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = std::clamp(p[i], lo[i], hi[i]);
    return out;
  };
  return b;
}

Vec glm_features(const Vec& z) {
  if (z.size() < 2) throw std::invalid_argument("glm row needs features + label");
  return Vec(z.begin(), z.end() - 1);
}

double glm_label(const Vec& z) {
  if (z.size() < 2) throw std::invalid_argument("glm row needs features + label");
  return z.back();
}

LossModel logistic_loss(double x_bound) {
  if (x_bound <= 0.0) throw std::invalid_argument("logistic_loss: x_bound must be > 0");
  LossModel m;
  m.name = "logistic";
  m.lipschitz = x_bound;
  m.smoothness = x_bound * x_bound / 4.0;
  m.value = [](const Vec& w, const Vec& z) {
    const Vec x = glm_features(z);
    const double s = glm_label(z) * dot(w, x);
    // log(1 + exp(-s)) computed stably
    return s > 0.0 ? std::log1p(std::exp(-s)) : -s + std::log1p(std::exp(s));
  };
  m.grad = [](const Vec& w, const Vec& z) {
    const Vec x = glm_features(z);
    const double y = glm_label(z);
    const double s = y * dot(w, x);
    const double coef = -y / (1.0 + std::exp(s));
    return scaled(x, coef);
  };
  return m;
}

LossModel hinge_loss(double x_bound) {
  if (x_bound <= 0.0) throw std::invalid_argument("hinge_loss: x_bound must be > 0");
  LossModel m;
  m.name = "hinge";
  m.lipschitz = x_bound;
  m.smoothness = 0.0;
  m.value = [](const Vec& w, const Vec& z) {
    return std::max(0.0, 1.0 - glm_label(z) * dot(w, glm_features(z)));
  };
  m.grad = [](const Vec& w, const Vec& z) {
    const Vec x = glm_features(z);
    const double y = glm_label(z);
    if (y * dot(w, x) < 1.0) return scaled(x, -y);
    return zeros(x.size());
  };
  return m;
}

LossModel clipped_quadratic(double clip) {
  if (clip <= 0.0) throw std::invalid_argument("clipped_quadratic: clip must be > 0");
  LossModel m;
  m.name = "clipped-quadratic";
  m.lipschitz = clip;
  m.smoothness = 1.0;
  m.value = [clip](const Vec& w, const Vec& z) {
    const double d = dist(w, z);
    if (d <= clip) return 0.5 * d * d;
    return clip * d - 0.5 * clip * clip;
  };
  m.grad = [clip](const Vec& w, const Vec& z) {
    Vec g = sub(w, z);
    const double d = norm(g);
    if (d > clip) {
      const double s = clip / d;
      for (double& x : g) x *= s;
    }
    return g;
  };
  return m;
}

QuerySpec vrfw_spec(const LossModel& loss, const ConvexBody& body) {
  QuerySpec spec;
  spec.name = "vrfw/" + loss.name;
  spec.sensitivity = 2.0 * (loss.smoothness * body.diameter + loss.lipschitz);
  auto grad = loss.grad;
  spec.p = [grad](const ModelHist& hist, const Vec& z, std::size_t t) {
    const Vec& w_t = hist[t - 1];
    const Vec& w_prev = t >= 2 ? hist[t - 2] : hist[0];  // w_0 := w_1
    Vec out = scaled(grad(w_t, z), static_cast<double>(t + 1));
    axpy_in(out, -static_cast<double>(t), grad(w_prev, z));
    return out;
  };
  return spec;
}

UpdateRule vrfw_rule(const ConvexBody& body) {
  UpdateRule rule;
  rule.name = "vrfw";
  rule.w0 = body.center;
  auto lmo = body.lmo;
  rule.update = [lmo](const ModelHist& hist, const Vec& r, std::size_t t) {
    const Vec v = lmo(scaled(r, 1.0 / static_cast<double>(t + 1)));
    const double eta = 1.0 / static_cast<double>(t + 1);
    Vec out = scaled(hist.back(), 1.0 - eta);
    axpy_in(out, eta, v);
    return out;
  };
  return rule;
}

QuerySpec da_spec(const LossModel& loss) {
  QuerySpec spec;
  spec.name = "da/" + loss.name;
  spec.sensitivity = 2.0 * loss.lipschitz;
  auto grad = loss.grad;
  spec.p = [grad](const ModelHist& hist, const Vec& z, std::size_t t) {
    return grad(hist[t - 1], z);
  };
  return spec;
}

double da_step_size(double diameter, std::size_t dim, std::size_t n, double rho,
                    double lipschitz) {
  if (lipschitz <= 0.0 || rho <= 0.0 || n < 2 || dim < 1) {
    throw std::invalid_argument("da_step_size: bad parameters");
  }
  return diameter * std::pow(static_cast<double>(dim), 0.25) *
         std::sqrt(std::log2(static_cast<double>(n))) /
         (lipschitz * std::sqrt(static_cast<double>(n) * rho));
}

UpdateRule da_rule(const ConvexBody& body, double eta) {
  UpdateRule rule;
  rule.name = "da";
  rule.w0 = body.center;
  auto project = body.project;
  const Vec w0 = body.center;
  rule.update = [project, w0, eta](const ModelHist&, const Vec& r, std::size_t) {
    Vec out = w0;
    axpy_in(out, -eta, r);
    return project(out);
  };
  return rule;
}

double empirical_risk(const LossModel& loss, const Vec& w,
                      const std::vector<Vec>& rows) {
  if (rows.empty()) throw std::invalid_argument("empirical_risk: empty dataset");
  double s = 0.0;
  for (const Vec& z : rows) s += loss.value(w, z);
  return s / static_cast<double>(rows.size());
}

}  // namespace tvu
