#include "topocf/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "topocf/error.hpp"
#include "topocf/rng.hpp"

namespace topocf {

namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

// Gradient with the attractive term scaled by `exaggeration`.
std::vector<double> gradient(const Affinities& p, const std::vector<double>& y,
                             double exaggeration) {
  const std::size_t n = p.n;
  std::vector<double> num(n * n, 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = y[2 * i] - y[2 * j];
      const double dy = y[2 * i + 1] - y[2 * j + 1];
      const double v = 1.0 / (1.0 + dx * dx + dy * dy);
      num[i * n + j] = num[j * n + i] = v;
      z += 2.0 * v;
    }
  }
  std::vector<double> g(2 * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double gx = 0.0, gy = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double w = num[i * n + j];
      const double m = (exaggeration * p.p[i * n + j] - w / z) * w;
      gx += m * (y[2 * i] - y[2 * j]);
      gy += m * (y[2 * i + 1] - y[2 * j + 1]);
    }
    g[2 * i] = 4.0 * gx;
    g[2 * i + 1] = 4.0 * gy;
  }
  return g;
}

void standardize_columns(Points& x) {
  if (x.empty()) return;
  const std::size_t d = x.front().size();
  for (std::size_t k = 0; k < d; ++k) {
    double mean = 0.0;
    for (const auto& row : x) mean += row[k];
    mean /= static_cast<double>(x.size());
    double var = 0.0;
    for (const auto& row : x) var += (row[k] - mean) * (row[k] - mean);
    const double sd = std::sqrt(var / static_cast<double>(x.size()));
    for (auto& row : x) row[k] = sd > 0.0 ? (row[k] - mean) / sd : 0.0;
  }
}

}  // namespace

Affinities pairwise_affinities(const Points& x, double perplexity, double entropy_tolerance,
                               int max_bisection_steps) {
  const std::size_t n = x.size();
  if (n < 4)
    throw Error(ErrorKind::too_few_points,
                "t-SNE needs at least 4 points, got " + std::to_string(n));
  if (!(perplexity > 0.0) || perplexity > static_cast<double>(n - 1))
    throw Error(ErrorKind::contract, "perplexity " + std::to_string(perplexity) +
                                         " outside (0, " + std::to_string(n - 1) + "]");
  for (const auto& row : x)
    if (row.size() != x.front().size())
      throw Error(ErrorKind::contract, "input points have inconsistent dimension");

  std::vector<double> dist(n * n, 0.0);
  double dmax = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      dist[i * n + j] = dist[j * n + i] = squared_distance(x[i], x[j]);
      dmax = std::max(dmax, dist[i * n + j]);
    }
  if (dmax == 0.0)
    throw Error(ErrorKind::degenerate_input, "all input points are identical");

  const double target = std::log2(perplexity);
  Affinities out;
  out.n = n;
  out.p.assign(n * n, 0.0);
  out.row_entropy_bits.assign(n, 0.0);
  out.beta.assign(n, 0.0);
  std::vector<double> cond(n * n, 0.0);
  std::vector<double> w(n);

  for (std::size_t i = 0; i < n; ++i) {
    const double* d = &dist[i * n];
    double dmin = std::numeric_limits<double>::infinity();
    double dsum = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) dmin = std::min(dmin, d[j]), dsum += d[j];
    const double spread = dsum / static_cast<double>(n - 1) - dmin;

    // Distances are shifted by the row minimum so exp() cannot underflow to
    // an all-zero row; the shift cancels in the normalisation.
    double beta = spread > 0.0 ? 1.0 / spread : 1.0;
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    double entropy = 0.0;
    for (int step = 0; step < max_bisection_steps; ++step) {
      double sum = 0.0, dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) {
          w[j] = 0.0;
          continue;
        }
        w[j] = std::exp(-beta * (d[j] - dmin));
        sum += w[j];
        dot += (d[j] - dmin) * w[j];
      }
      entropy = (std::log(sum) + beta * dot / sum) / std::numbers::ln2;
      if (std::abs(entropy - target) <= entropy_tolerance) break;
      if (entropy > target) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
      } else {
        hi = beta;
        beta = 0.5 * (beta + lo);
      }
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      w[j] = j == i ? 0.0 : std::exp(-beta * (d[j] - dmin));
      sum += w[j];
    }
    double h = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double c = w[j] / sum;
      cond[i * n + j] = c;
      if (c > 0.0) h -= c * std::log2(c);
    }
    out.row_entropy_bits[i] = h;
    out.beta[i] = beta;
  }

  const double denom = 2.0 * static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) out.p[i * n + j] = (cond[i * n + j] + cond[j * n + i]) / denom;
  return out;
}

std::vector<double> kl_gradient(const Affinities& p, const std::vector<double>& y) {
  if (y.size() != 2 * p.n) throw Error(ErrorKind::contract, "Y must be n x 2");
  return gradient(p, y, 1.0);
}

double kl_divergence(const Affinities& p, const std::vector<double>& y) {
  if (y.size() != 2 * p.n) throw Error(ErrorKind::contract, "Y must be n x 2");
  const std::size_t n = p.n;
  std::vector<double> num(n * n, 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double dx = y[2 * i] - y[2 * j];
      const double dy = y[2 * i + 1] - y[2 * j + 1];
      num[i * n + j] = 1.0 / (1.0 + dx * dx + dy * dy);
      z += num[i * n + j];
    }
  double kl = 0.0;
  for (std::size_t k = 0; k < n * n; ++k)
    if (p.p[k] > 0.0) kl += p.p[k] * std::log(p.p[k] / (num[k] / z));
  return kl;
}

TsneResult tsne_fit(const Points& input, const EmbeddingConfig& cfg,
                    const std::optional<std::vector<double>>& init) {
  if (cfg.iterations < 250)
    throw Error(ErrorKind::contract, "t-SNE needs at least 250 iterations");
  if (!(cfg.learning_rate > 0.0)) throw Error(ErrorKind::contract, "learning rate must be positive");

  Points x = input;
  if (cfg.standardize) standardize_columns(x);
  const std::size_t n = x.size();
  const double perplexity =
      n >= 4 ? std::min(cfg.perplexity, static_cast<double>(n - 1) / 3.0) : cfg.perplexity;
  const Affinities p =
      pairwise_affinities(x, perplexity, cfg.entropy_tolerance, cfg.max_bisection_steps);

  std::vector<double> y(2 * n);
  if (init) {
    if (init->size() != 2 * n) throw Error(ErrorKind::contract, "initial layout must be n x 2");
    y = *init;
  } else {
    SplitMix64 rng(cfg.seed);
    for (auto& v : y) v = cfg.init_stddev * rng.normal();
  }

  TsneResult result;
  result.perplexity_used = perplexity;
  result.kl_initial = kl_divergence(p, y);

  std::vector<double> update(2 * n, 0.0), gains(2 * n, 1.0);
  for (int it = 0; it < cfg.iterations; ++it) {
    const bool early = it < cfg.exaggeration_iterations;
    const double momentum = early ? cfg.initial_momentum : cfg.final_momentum;
    const auto g = gradient(p, y, early ? cfg.early_exaggeration : 1.0);
    for (std::size_t k = 0; k < 2 * n; ++k) {
      const bool same_sign = (g[k] > 0.0) == (update[k] > 0.0);
      gains[k] = std::max(cfg.min_gain, same_sign ? gains[k] * 0.8 : gains[k] + 0.2);
      update[k] = momentum * update[k] - cfg.learning_rate * gains[k] * g[k];
      y[k] += update[k];
    }
  }

  for (auto& v : y) v = static_cast<double>(static_cast<float>(v));
  result.kl_final = kl_divergence(p, y);
  result.embedding.resize(n);
  for (std::size_t i = 0; i < n; ++i) result.embedding[i] = {y[2 * i], y[2 * i + 1]};
  return result;
}

Points to_points(const std::vector<CSCode>& codes) {
  Points out;
  out.reserve(codes.size());
  for (const auto& c : codes) out.emplace_back(c.begin(), c.end());
  return out;
}

Points cs_points(const Dataset& d) {
  Points out;
  out.reserve(d.records.size());
  for (const auto& r : d.records) out.emplace_back(r.cs.begin(), r.cs.end());
  return out;
}

}  // namespace topocf
