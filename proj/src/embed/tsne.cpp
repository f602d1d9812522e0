#include "cardio/embed/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cardio/errors.hpp"
#include "cardio/parallel.hpp"
#include "cardio/rng.hpp"

namespace cardio::embed {

void TsneOptions::validate() const {
  if (!(perplexity > 0.0)) throw ValidationError("perplexity must be positive");
  if (iters < 1) throw ValidationError("t-SNE iterations must be positive");
  if (!(learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
  if (!(early_exaggeration >= 1.0)) throw ValidationError("early exaggeration must be at least 1");
  if (exaggeration_iters < 0 || momentum_switch < 0 || kl_every < 0) {
    throw ValidationError("t-SNE schedule values must be non-negative");
  }
  if (!(init_sd > 0.0)) throw ValidationError("t-SNE initial SD must be positive");
}

namespace {

constexpr double kFloor = 1e-12;

void check_input(const Eigen::MatrixXd& data, double perplexity) {
  if (!data.allFinite()) throw ValidationError("t-SNE: input contains non-finite values");
  if (!(perplexity > 0.0)) throw ValidationError("perplexity must be positive");
  if (static_cast<double>(data.rows()) < 3.0 * perplexity) {
    throw ValidationError("perplexity " + std::to_string(perplexity) + " is infeasible for n = " +
                          std::to_string(data.rows()) + " (need n >= 3 * perplexity)");
  }
}

// Row i of p_{j|i}; returns entropy in bits.
double calibrate_row(const Eigen::MatrixXd& data, Eigen::Index i, double perplexity, double* out) {
  const auto n = data.rows();
  std::vector<double> d2(static_cast<std::size_t>(n));
  double dmin = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < n; ++j) {
    d2[static_cast<std::size_t>(j)] = (data.row(i) - data.row(j)).squaredNorm();
    if (j != i) dmin = std::min(dmin, d2[static_cast<std::size_t>(j)]);
  }
  const double target = std::log2(perplexity);
  double beta = 1.0;
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  double entropy = 0.0;
  // Shifting by the nearest distance keeps exp() in range; it cancels.
  const auto evaluate = [&](double b) {
    double sum = 0.0;
    double weighted = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) {
        out[j] = 0.0;
        continue;
      }
      const double shifted = d2[static_cast<std::size_t>(j)] - dmin;
      const double p = std::exp(-b * shifted);
      out[j] = p;
      sum += p;
      weighted += shifted * p;
    }
    for (Eigen::Index j = 0; j < n; ++j) out[j] /= sum;
    return (std::log(sum) + b * weighted / sum) / std::log(2.0);
  };
  for (int it = 0; it < 200; ++it) {
    entropy = evaluate(beta);
    const double diff = entropy - target;
    if (std::abs(diff) < 1e-10) break;
    if (diff > 0.0) {
      lo = beta;
      beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
    } else {
      hi = beta;
      beta = 0.5 * (beta + lo);
    }
  }
  return entropy;
}

}  // namespace

Eigen::MatrixXd conditional_affinities(const Eigen::MatrixXd& data, double perplexity, unsigned threads,
                                       std::vector<double>* entropy_bits) {
  check_input(data, perplexity);
  const auto n = data.rows();
  // Column-major storage: column i holds row i's distribution.
  Eigen::MatrixXd cond(n, n);
  std::vector<double> entropy(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
    entropy[i] = calibrate_row(data, static_cast<Eigen::Index>(i), perplexity, cond.col(static_cast<Eigen::Index>(i)).data());
  });
  if (entropy_bits) *entropy_bits = std::move(entropy);
  cond.transposeInPlace();
  return cond;
}

Eigen::MatrixXd joint_affinities(const Eigen::MatrixXd& data, double perplexity, unsigned threads) {
  Eigen::MatrixXd p = conditional_affinities(data, perplexity, threads);
  const auto n = p.rows();
  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    p(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = std::max((p(i, j) + p(j, i)) * scale, kFloor);
      p(i, j) = v;
      p(j, i) = v;
    }
  }
  return p;
}

TsneResult tsne(const Eigen::MatrixXd& data, std::uint64_t seed, const TsneOptions& opt) {
  opt.validate();
  check_input(data, opt.perplexity);
  const auto n = data.rows();
  const auto nn = static_cast<std::size_t>(n);
  const Eigen::MatrixXd p = joint_affinities(data, opt.perplexity, opt.threads);

  Rng rng(seed);
  std::vector<double> y0(nn), y1(nn);
  for (std::size_t i = 0; i < nn; ++i) {
    y0[i] = opt.init_sd * rng.normal();
    y1[i] = opt.init_sd * rng.normal();
  }
  std::vector<double> u0(nn, 0.0), u1(nn, 0.0), g0(nn), g1(nn), gain0(nn, 1.0), gain1(nn, 1.0);
  std::vector<double> row_z(nn);

  // Row-wise partial sums of the Student-t kernel, totalled in index order.
  const auto normalizer = [&]() {
    parallel_for(nn, opt.threads, [&](std::size_t i) {
      double s = 0.0;
      for (std::size_t j = 0; j < nn; ++j) {
        if (j == i) continue;
        const double a = y0[i] - y0[j];
        const double b = y1[i] - y1[j];
        s += 1.0 / (1.0 + a * a + b * b);
      }
      row_z[i] = s;
    });
    double z = 0.0;
    for (const double s : row_z) z += s;
    return z;
  };

  const auto kl_divergence = [&]() {
    const double z = normalizer();
    parallel_for(nn, opt.threads, [&](std::size_t i) {
      const double* pi = p.col(static_cast<Eigen::Index>(i)).data();  // symmetric
      double s = 0.0;
      for (std::size_t j = 0; j < nn; ++j) {
        if (j == i) continue;
        const double a = y0[i] - y0[j];
        const double b = y1[i] - y1[j];
        const double q = std::max(1.0 / (1.0 + a * a + b * b) / z, kFloor);
        s += pi[j] * std::log(pi[j] / q);
      }
      row_z[i] = s;
    });
    double kl = 0.0;
    for (const double s : row_z) kl += s;
    return std::max(kl, 0.0);
  };

  TsneResult result;
  for (int it = 0; it < opt.iters; ++it) {
    const double exaggeration = it < opt.exaggeration_iters ? opt.early_exaggeration : 1.0;
    const double momentum = it < opt.momentum_switch ? opt.initial_momentum : opt.final_momentum;
    const double z = normalizer();
    parallel_for(nn, opt.threads, [&](std::size_t i) {
      const double* pi = p.col(static_cast<Eigen::Index>(i)).data();
      double a0 = 0.0;
      double a1 = 0.0;
      for (std::size_t j = 0; j < nn; ++j) {
        if (j == i) continue;
        const double a = y0[i] - y0[j];
        const double b = y1[i] - y1[j];
        const double num = 1.0 / (1.0 + a * a + b * b);
        const double mult = (exaggeration * pi[j] - num / z) * num;
        a0 += mult * a;
        a1 += mult * b;
      }
      g0[i] = 4.0 * a0;
      g1[i] = 4.0 * a1;
    });
    const auto step = [&](std::vector<double>& y, std::vector<double>& u, std::vector<double>& g,
                          std::vector<double>& gain) {
      for (std::size_t i = 0; i < nn; ++i) {
        gain[i] = ((g[i] > 0.0) != (u[i] > 0.0)) ? gain[i] + 0.2 : gain[i] * 0.8;
        gain[i] = std::max(gain[i], 0.01);
        u[i] = momentum * u[i] - opt.learning_rate * gain[i] * g[i];
        y[i] += u[i];
      }
      double mean = 0.0;
      for (const double v : y) mean += v;
      mean /= static_cast<double>(nn);
      for (double& v : y) v -= mean;
    };
    step(y0, u0, g0, gain0);
    step(y1, u1, g1, gain1);
    if (!std::isfinite(y0[0]) || !std::isfinite(y1[0])) throw NumericalError("t-SNE: coordinates diverged");
    if (opt.kl_every > 0 && (it + 1) % opt.kl_every == 0) result.kl_trace.emplace_back(it + 1, kl_divergence());
  }

  Embedding& e = result.embedding;
  e.coords.resize(n, 2);
  for (std::size_t i = 0; i < nn; ++i) {
    e.coords(static_cast<Eigen::Index>(i), 0) = y0[i];
    e.coords(static_cast<Eigen::Index>(i), 1) = y1[i];
  }
  if (!e.coords.allFinite()) throw NumericalError("t-SNE: coordinates diverged");
  e.roles.assign(nn, RowRole::Case);
  e.method = Method::Tsne;
  e.iterations = opt.iters;
  e.seed = seed;
  e.kl = (!result.kl_trace.empty() && result.kl_trace.back().first == opt.iters) ? result.kl_trace.back().second
                                                                                 : kl_divergence();
  return result;
}

}  // namespace cardio::embed
