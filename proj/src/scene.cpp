#include "fishrect/scene.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "fishrect/random.hpp"

namespace fishrect {

namespace {

using Rgb = Eigen::Array3d;

double smoothstep(double e0, double e1, double x) {
  const double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

// Lattice value noise with smoothstep interpolation.
class ValueNoise {
 public:
  ValueNoise(int cells_x, int cells_y, Rng& rng) : nx_(cells_x + 2), ny_(cells_y + 2) {
    values_.resize(std::size_t(nx_) * ny_);
    for (auto& v : values_) v = rng.uniform(-1.0, 1.0);
  }

  double at(double gx, double gy) const {
    const int x0 = std::clamp(int(std::floor(gx)), 0, nx_ - 2);
    const int y0 = std::clamp(int(std::floor(gy)), 0, ny_ - 2);
    const double tx = smoothstep(0, 1, gx - x0);
    const double ty = smoothstep(0, 1, gy - y0);
    const double a = lattice(x0, y0) + tx * (lattice(x0 + 1, y0) - lattice(x0, y0));
    const double b = lattice(x0, y0 + 1) + tx * (lattice(x0 + 1, y0 + 1) - lattice(x0, y0 + 1));
    return a + ty * (b - a);
  }

 private:
  double lattice(int x, int y) const { return values_[std::size_t(y) * nx_ + x]; }

  int nx_, ny_;
  std::vector<double> values_;
};

struct Box {
  double x0, y0, x1, y1;
  Rgb color;
  int window_rows, window_cols;
};

struct Disc {
  double cx, cy, radius;
  Rgb color;
};

// Coverage of an axis-aligned box with edges softened over ~1.5 px.
double box_cover(const Box& b, double x, double y) {
  constexpr double soft = 1.5;
  return smoothstep(b.x0 - soft, b.x0 + soft, x) * (1 - smoothstep(b.x1 - soft, b.x1 + soft, x)) *
         smoothstep(b.y0 - soft, b.y0 + soft, y) * (1 - smoothstep(b.y1 - soft, b.y1 + soft, y));
}

}  // namespace

Image8 make_scene(int width, int height, std::uint64_t seed) {
  Rng rng(seed);
  const double w = width;
  const double h = height;

  std::vector<ValueNoise> octaves;
  std::vector<double> cell_size;
  for (double cell : {64.0, 32.0, 16.0, 8.0, 4.0, 2.0}) {
    const double s = cell * std::max(w, h) / 256.0;
    octaves.emplace_back(int(std::ceil(w / s)) + 1, int(std::ceil(h / s)) + 1, rng);
    cell_size.push_back(s);
  }
  ValueNoise ridge(int(std::ceil(w / 48.0)) + 1, 2, rng);

  const Rgb sky_top(0.25 + 0.2 * rng.uniform(), 0.45 + 0.2 * rng.uniform(), 0.85);
  const Rgb sky_low(0.85, 0.85 + 0.1 * rng.uniform(), 0.95);
  const Rgb ground_a(0.25 + 0.2 * rng.uniform(), 0.45 + 0.2 * rng.uniform(), 0.2);
  const Rgb ground_b(0.55 + 0.2 * rng.uniform(), 0.45, 0.3 + 0.1 * rng.uniform());
  const double horizon = h * rng.uniform(0.35, 0.55);

  std::vector<Box> boxes;
  const int box_count = 3 + int(rng.below(3));
  for (int i = 0; i < box_count; ++i) {
    const double bw = w * rng.uniform(0.1, 0.25);
    const double bh = h * rng.uniform(0.2, 0.45);
    const double x0 = rng.uniform(0.0, w - bw);
    const double y1 = horizon + h * rng.uniform(0.05, 0.3);
    boxes.push_back({x0, y1 - bh, x0 + bw, y1,
                     Rgb(rng.uniform(0.3, 0.8), rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7)),
                     2 + int(rng.below(4)), 2 + int(rng.below(3))});
  }
  std::vector<Disc> discs;
  for (int i = 0; i < 2; ++i) {
    discs.push_back({rng.uniform(0.1, 0.9) * w, rng.uniform(0.05, 0.35) * h,
                     std::min(w, h) * rng.uniform(0.04, 0.09),
                     Rgb(0.95, rng.uniform(0.7, 0.95), rng.uniform(0.3, 0.6))});
  }

  Image8 img(width, height, 3);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double texture = 0;
      double amplitude = 1.0;
      for (std::size_t o = 0; o < octaves.size(); ++o) {
        texture += amplitude * octaves[o].at(x / cell_size[o], y / cell_size[o]);
        amplitude *= 0.6;
      }
      const double hill = horizon + 0.08 * h * ridge.at(x / 48.0, 0.5);
      const double ground_t = smoothstep(hill - 1.5, hill + 1.5, y);
      const Rgb sky = sky_low + (sky_top - sky_low) * (1.0 - y / h) + 0.05 * texture;
      const double mix = 0.5 + 0.45 * texture;
      const Rgb ground = ground_a * (1 - mix) + ground_b * mix;
      Rgb c = sky * (1 - ground_t) + ground * ground_t;

      for (const auto& d : discs) {
        const double dist = std::hypot(x - d.cx, y - d.cy);
        const double a = 1 - smoothstep(d.radius - 1.5, d.radius + 1.5, dist);
        c = c * (1 - a) + d.color * a;
      }
      for (const auto& b : boxes) {
        const double a = box_cover(b, x, y);
        if (a <= 0) continue;
        Rgb face = b.color * (0.9 + 0.1 * texture);
        // Window grid: darker cells separated by straight mullions.
        const double u = (x - b.x0) / (b.x1 - b.x0) * (b.window_cols * 2 + 1);
        const double v = (y - b.y0) / (b.y1 - b.y0) * (b.window_rows * 2 + 1);
        const double fu = u - std::floor(u);
        const double fv = v - std::floor(v);
        const bool odd = (int(std::floor(u)) % 2 == 1) && (int(std::floor(v)) % 2 == 1);
        if (odd) {
          const double inner = smoothstep(0.0, 0.15, fu) * (1 - smoothstep(0.85, 1.0, fu)) *
                               smoothstep(0.0, 0.15, fv) * (1 - smoothstep(0.85, 1.0, fv));
          face = face * (1 - 0.55 * inner);
        }
        c = c * (1 - a) + face * a;
      }
      auto px = img.pixel(x, y);
      for (int ch = 0; ch < 3; ++ch) px[ch] = quantize_u8(std::clamp(c[ch], 0.0, 1.0) * 255.0);
    }
  }
  return img;
}

}  // namespace fishrect
