#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "fishrect/metrics.hpp"
#include "fishrect/nn/dense_net.hpp"
#include "fishrect/nn/wgan.hpp"
#include "fishrect/random.hpp"

namespace oracle {

using namespace fishrect;
using namespace fishrect::nn;

inline Image8 noise_image(int w, int h, int c, std::uint64_t seed) {
  Image8 img(w, h, c);
  Rng rng(seed);
  for (auto& s : img.data()) s = std::uint8_t(rng.below(256));
  return img;
}

inline Image8 perturb(const Image8& img, int amplitude, std::uint64_t seed) {
  Image8 out = img;
  Rng rng(seed);
  for (auto& s : out.data()) {
    const int v = int(s) + int(rng.below(2 * amplitude + 1)) - amplitude;
    s = std::uint8_t(std::clamp(v, 0, 255));
  }
  return out;
}

// Textbook SSIM: full 2-D Gaussian window evaluated at every position with
// plain loops and long double accumulators.
inline double ssim_oracle(const Image8& a, const Image8& b, const ValidMask* mask = nullptr) {
  auto luma = [](const Image8& img, int x, int y) -> long double {
    if (img.channels() == 1) return img.at(x, y);
    return 0.299L * img.at(x, y, 0) + 0.587L * img.at(x, y, 1) + 0.114L * img.at(x, y, 2);
  };
  const int win = 11, half = 5;
  long double weights[11][11];
  long double total = 0;
  for (int i = 0; i < win; ++i) {
    for (int j = 0; j < win; ++j) {
      weights[i][j] = std::exp(-((i - half) * (i - half) + (j - half) * (j - half)) / (2 * 1.5L * 1.5L));
      total += weights[i][j];
    }
  }
  const long double c1 = (0.01L * 255) * (0.01L * 255), c2 = (0.03L * 255) * (0.03L * 255);
  long double sum = 0;
  long count = 0;
  for (int y = 0; y + win <= a.height(); ++y) {
    for (int x = 0; x + win <= a.width(); ++x) {
      bool inside = true;
      long double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (int i = 0; i < win; ++i) {
        for (int j = 0; j < win; ++j) {
          if (mask && !(*mask)(y + i, x + j)) inside = false;
          const long double w = weights[i][j] / total;
          const long double va = luma(a, x + j, y + i), vb = luma(b, x + j, y + i);
          ma += w * va;
          mb += w * vb;
          saa += w * va * va;
          sbb += w * vb * vb;
          sab += w * va * vb;
        }
      }
      if (!inside) continue;
      const long double var_a = saa - ma * ma, var_b = sbb - mb * mb, cov = sab - ma * mb;
      sum += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
      ++count;
    }
  }
  return double(sum / count);
}

inline Eigen::MatrixXd random_matrix(Rng& rng, int rows, int cols, double scale = 1) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.uniform(-scale, scale);
  return m;
}

inline DenseNet random_net(Rng& rng, int in, int out) {
  std::vector<int> widths{in};
  const int depth = 1 + int(rng.below(3));
  for (int i = 0; i < depth - 1; ++i) widths.push_back(1 + int(rng.below(6)));
  widths.push_back(out);
  return DenseNet::make(widths, rng, 0.8);
}

// Signs of every pre-activation: a change means a finite-difference step
// crossed a LeakyReLU kink.
inline std::vector<bool> activation_pattern(const DenseNet& net, const Eigen::MatrixXd& x) {
  const auto cache = forward(net, x);
  std::vector<bool> out;
  for (const auto& z : cache.pre_activations) {
    for (Eigen::Index i = 0; i < z.size(); ++i) out.push_back(z(i) > 0);
  }
  return out;
}

struct GradCheck {
  std::string name;
  double worst = 0;
  int checked = 0;
  int skipped = 0;
};

// Central differences with step 1e-5 on every parameter of `net`.
inline void check_gradient(DenseNet net, const Eigen::VectorXd& analytic,
                    const std::function<double(const DenseNet&)>& loss,
                    const std::function<std::vector<bool>(const DenseNet&)>& pattern,
                    GradCheck& result) {
  const double h = 1e-5;
  const Eigen::VectorXd theta = net.flat_parameters();
  if (analytic.size() != theta.size()) throw Error(ErrorKind::DimensionMismatch, "gradient size");
  const auto base = pattern(net);
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    Eigen::VectorXd t = theta;
    t(i) += h;
    net.set_flat_parameters(t);
    const double up = loss(net);
    const auto p_up = pattern(net);
    t(i) -= 2 * h;
    net.set_flat_parameters(t);
    const double down = loss(net);
    const auto p_down = pattern(net);
    if (p_up != base || p_down != base) {
      ++result.skipped;
      continue;
    }
    const double numeric = (up - down) / (2 * h);
    const double denom = std::max({std::abs(numeric), std::abs(analytic(i)), 1e-6});
    result.worst = std::max(result.worst, std::abs(numeric - analytic(i)) / denom);
    ++result.checked;
  }
}

inline std::vector<bool> join(std::vector<bool> a, const std::vector<bool>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

inline std::vector<bool> residual_signs(const Eigen::MatrixXd& y, const Eigen::MatrixXd& g) {
  std::vector<bool> out;
  for (Eigen::Index i = 0; i < y.size(); ++i) out.push_back(y(i) > g(i));
  return out;
}

// Analytic gradients of the critic objective, the adversarial generator term
// (w.r.t. critic parameters and inputs), L1 through the generator, the full
// generator objective and the weighted calibration loss, each against
// central differences on `configs` random networks.
inline std::vector<GradCheck> gradient_suite(std::uint64_t seed, int configs) {
  Rng rng(seed);
  GradCheck critic_head{"critic"}, generator_head{"generator"}, l1_head{"l1"},
      combined_head{"combined"}, l2_head{"weighted_l2"}, input_head{"critic_input"};
  for (int config = 0; config < configs; ++config) {
    const int a_dim = 1 + int(rng.below(3));
    const int b_dim = 1 + int(rng.below(3));
    const int batch = 1 + int(rng.below(6));
    auto critic = random_net(rng, a_dim + b_dim, 1);
    auto gen = random_net(rng, a_dim, b_dim);
    const Eigen::MatrixXd a = random_matrix(rng, a_dim, batch, 2);
    const Eigen::MatrixXd b = random_matrix(rng, b_dim, batch, 2);
    const Eigen::MatrixXd fake_b = random_matrix(rng, b_dim, batch, 2);
    const Eigen::MatrixXd real = concat_rows(a, b);
    const Eigen::MatrixXd fake = concat_rows(a, fake_b);

    // critic objective
    {
      const auto g = critic_objective_gradient(critic, real, fake);
      check_gradient(
          critic, g.flat(),
          [&](const DenseNet& n) { return critic_loss(forward(n, real).output, forward(n, fake).output); },
          [&](const DenseNet& n) { return join(activation_pattern(n, real), activation_pattern(n, fake)); },
          critic_head);
    }
    // generator adversarial term w.r.t. critic parameters and inputs
    {
      const auto cache = forward(critic, fake);
      const auto g = backward(critic, cache, generator_loss_gradient(cache.output));
      check_gradient(
          critic, g.flat(), [&](const DenseNet& n) { return generator_loss(forward(n, fake).output); },
          [&](const DenseNet& n) { return activation_pattern(n, fake); }, generator_head);
      const double h = 1e-5;
      for (Eigen::Index i = 0; i < fake.size(); ++i) {
        Eigen::MatrixXd up = fake, down = fake;
        up(i) += h;
        down(i) -= h;
        if (activation_pattern(critic, up) != activation_pattern(critic, down)) {
          ++input_head.skipped;
          continue;
        }
        const double numeric =
            (generator_loss(forward(critic, up).output) - generator_loss(forward(critic, down).output)) / (2 * h);
        const double denom = std::max({std::abs(numeric), std::abs(g.input(i)), 1e-6});
        input_head.worst = std::max(input_head.worst, std::abs(numeric - g.input(i)) / denom);
        ++input_head.checked;
      }
    }
    // L1 through the generator
    {
      const auto cache = forward(gen, a);
      const auto g = backward(gen, cache, l1_loss_gradient(b, cache.output));
      check_gradient(
          gen, g.flat(), [&](const DenseNet& n) { return l1_loss(b, forward(n, a).output); },
          [&](const DenseNet& n) {
            return join(activation_pattern(n, a), residual_signs(b, forward(n, a).output));
          },
          l1_head);
    }
    // full generator objective through a frozen critic
    {
      const double lambda = rng.uniform(0, 10);
      const auto g = generator_objective_gradient(gen, critic, a, b, lambda);
      check_gradient(
          gen, g.flat(),
          [&](const DenseNet& n) {
            const auto out = forward(n, a).output;
            return combined_generator_objective(forward(critic, concat_rows(a, out)).output, b, out, lambda);
          },
          [&](const DenseNet& n) {
            const auto out = forward(n, a).output;
            return join(join(activation_pattern(n, a), activation_pattern(critic, concat_rows(a, out))),
                        residual_signs(b, out));
          },
          combined_head);
    }
    // weighted L2 on a 9-output regressor
    {
      const int in = 1 + int(rng.below(4));
      auto reg = random_net(rng, in, 9);
      const Eigen::MatrixXd x = random_matrix(rng, in, batch, 2);
      const Eigen::MatrixXd k = random_matrix(rng, 9, batch, 2);
      const double beta = rng.uniform(0.5, 40);
      const auto cache = forward(reg, x);
      const auto g = backward(reg, cache, weighted_l2_gradient(cache.output, k, beta));
      check_gradient(
          reg, g.flat(), [&](const DenseNet& n) { return weighted_l2(forward(n, x).output, k, beta); },
          [&](const DenseNet& n) { return activation_pattern(n, x); }, l2_head);
    }
  }
  return {critic_head, generator_head, l1_head, combined_head, l2_head, input_head};
}

}  // namespace oracle
