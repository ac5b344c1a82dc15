#include "tvu/dataset.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace tvu {

Dataset read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open csv: " + path);
  Dataset data;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv missing header: " + path);
  {
    std::istringstream hs(line);
    std::string col;
    while (std::getline(hs, col, ',')) data.columns.push_back(col);
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    Vec row;
    std::istringstream ls(line);
    std::string tok;
    while (std::getline(ls, tok, ',')) row.push_back(std::stod(tok));
    if (row.size() != data.columns.size()) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected " + std::to_string(data.columns.size()) +
                               " fields, got " + std::to_string(row.size()));
    }
    data.rows.push_back(std::move(row));
  }
  return data;
}

void write_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write csv: " + path);
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < data.columns.size(); ++i) {
    if (i) out << ',';
    out << data.columns[i];
  }
  out << '\n';
  for (const Vec& row : data.rows) {
    if (row.size() != data.columns.size()) {
      throw std::invalid_argument("write_csv: row width mismatch");
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  }
}

std::vector<Vec> synth_sphere(std::size_t n, std::size_t d, Rng& rng) {
  if (d == 0) throw std::invalid_argument("synth_sphere: d == 0");
  std::vector<Vec> out(n);
  for (Vec& v : out) {
    do {
      v = rng.gaussian_vec(d);
    } while (norm(v) == 0.0);
    const double s = 1.0 / norm(v);
    for (double& x : v) x *= s;
  }
  return out;
}

SynthGlm synth_glm(std::size_t n, std::size_t d, double margin,
                   double label_noise, Rng& rng) {
  if (margin < 0.0 || margin >= 1.0) throw std::invalid_argument("synth_glm: bad margin");
  if (label_noise < 0.0 || label_noise >= 0.5) {
    throw std::invalid_argument("synth_glm: label_noise must be in [0, 0.5)");
  }
  SynthGlm out;
  out.planted = synth_sphere(1, d, rng)[0];
  out.rows.resize(n);
  for (Vec& row : out.rows) {
    Vec x;
    double s = 0.0;
    do {
      x = synth_sphere(1, d, rng)[0];
      s = dot(x, out.planted);
    } while (std::fabs(s) < margin);
    double y = s >= 0.0 ? 1.0 : -1.0;
    if (rng.uniform() < label_noise) y = -y;
    row = x;
    row.push_back(y);
  }
  return out;
}

SynthBlobs synth_blobs(std::size_t n, std::size_t k, std::size_t d,
                       double center_spread, double stddev, Rng& rng) {
  if (k == 0) throw std::invalid_argument("synth_blobs: k == 0");
  SynthBlobs out;
  out.centers.resize(k);
  for (Vec& c : out.centers) c = scaled(rng.gaussian_vec(d), center_spread);
  out.points.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec& c = out.centers[i % k];
    out.points[i] = add(c, scaled(rng.gaussian_vec(d), stddev));
  }
  return out;
}

}  // namespace tvu
