#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "topocf/core.hpp"

namespace topocf {

using Point2 = std::array<double, 2>;
using Embedding2D = std::vector<Point2>;

/**
 * Exact t-SNE settings. Defaults follow van der Maaten & Hinton (2008):
 * perplexity 30, early exaggeration 12 over the first 250 iterations,
 * momentum 0.5 then 0.8, learning rate 200, adaptive gains floored at 0.01.
 */
struct EmbeddingConfig {
  double perplexity = 30.0;  ///< clamped to (n - 1) / 3 at fit time
  int iterations = 1000;
  double learning_rate = 200.0;
  double early_exaggeration = 12.0;
  int exaggeration_iterations = 250;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  double min_gain = 0.01;
  double init_stddev = 1e-4;
  double entropy_tolerance = 1e-5;
  int max_bisection_steps = 50;
  std::uint64_t seed = 0;
  bool standardize = false;  ///< z-score each input dimension first
};

/// Dense symmetric joint affinities, row-major n x n.
struct Affinities {
  std::size_t n = 0;
  std::vector<double> p;
  std::vector<double> row_entropy_bits;  ///< entropy of each conditional row after bisection
  std::vector<double> beta;              ///< Gaussian precision per row

  double at(std::size_t i, std::size_t j) const { return p[i * n + j]; }
};

using Points = std::vector<std::vector<double>>;

/// Bisection on the Gaussian precision of each row until its entropy is
/// within tolerance of log2(perplexity), then p_ij = (p_j|i + p_i|j) / 2n.
/// Throws too_few_points for n < 4, degenerate_input when all points coincide,
/// contract when perplexity is outside (0, n - 1].
Affinities pairwise_affinities(const Points& x, double perplexity,
                               double entropy_tolerance = 1e-5, int max_bisection_steps = 50);

/// Gradient of KL(P || Q) with respect to Y (n x 2, interleaved), using the
/// Student-t kernel: 4 * sum_j (p_ij - q_ij)(y_i - y_j) / (1 + |y_i - y_j|^2).
std::vector<double> kl_gradient(const Affinities& p, const std::vector<double>& y);
double kl_divergence(const Affinities& p, const std::vector<double>& y);

struct TsneResult {
  Embedding2D embedding;
  double kl_initial = 0.0;  ///< KL at the random initialisation (no exaggeration)
  double kl_final = 0.0;
  double perplexity_used = 0.0;
};

/// Deterministic for a fixed seed. `init`, when given, replaces the seeded
/// Gaussian start (n x 2 interleaved). Final coordinates are rounded to float
/// precision so they survive a 9-significant-digit text round trip.
TsneResult tsne_fit(const Points& x, const EmbeddingConfig& cfg,
                    const std::optional<std::vector<double>>& init = std::nullopt);

Points to_points(const std::vector<CSCode>& codes);
Points cs_points(const Dataset& d);

}  // namespace topocf
