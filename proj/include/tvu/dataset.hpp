// CSV datasets (header row + decimal floats) and synthetic generators.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tvu/rng.hpp"
#include "tvu/vec.hpp"

namespace tvu {

struct Dataset {
  std::vector<std::string> columns;
  std::vector<Vec> rows;
};

Dataset read_csv(const std::string& path);
void write_csv(const std::string& path, const Dataset& data);

// Uniform points on the unit sphere in R^d.
std::vector<Vec> synth_sphere(std::size_t n, std::size_t d, Rng& rng);

// Planted-model GLM rows (x_1..x_d, y): x uniform on the unit sphere
// resampled until |<x, w*>| >= margin, y = sign(<x, w*>) flipped with
// probability label_noise. Returns rows and the planted direction.
struct SynthGlm {
  std::vector<Vec> rows;
  Vec planted;
};
SynthGlm synth_glm(std::size_t n, std::size_t d, double margin,
                   double label_noise, Rng& rng);

// k Gaussian blobs with the given center spread and within-blob deviation.
struct SynthBlobs {
  std::vector<Vec> points;
  std::vector<Vec> centers;
};
SynthBlobs synth_blobs(std::size_t n, std::size_t k, std::size_t d,
                       double center_spread, double stddev, Rng& rng);

}  // namespace tvu
