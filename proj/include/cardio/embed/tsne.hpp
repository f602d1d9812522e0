#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "cardio/embed/embedding.hpp"

namespace cardio::embed {

struct TsneOptions {
  double perplexity = 30.0;
  int iters = 1000;
  double learning_rate = 200.0;
  double early_exaggeration = 12.0;
  int exaggeration_iters = 250;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  int momentum_switch = 250;
  double init_sd = 1e-4;
  int kl_every = 0;  // record KL every this many iterations; 0 = final only
  unsigned threads = 1;

  void validate() const;
};

struct TsneResult {
  Embedding embedding;
  std::vector<std::pair<int, double>> kl_trace;  // (iterations completed, KL)
};

/// Conditional affinities p_{j|i} with each row's Gaussian bandwidth found by
/// bisection so that its entropy equals log2(perplexity). `entropy_bits`
/// receives the achieved entropy per row. Rows are computed concurrently.
Eigen::MatrixXd conditional_affinities(const Eigen::MatrixXd& data, double perplexity, unsigned threads = 1,
                                       std::vector<double>* entropy_bits = nullptr);

/// (P + P^T) / (2n) with off-diagonal entries floored at 1e-12.
Eigen::MatrixXd joint_affinities(const Eigen::MatrixXd& data, double perplexity, unsigned threads = 1);

/// Exact t-SNE to two dimensions (all pairwise terms, no tree approximation).
/// Deterministic for a given seed and independent of `threads`. Throws
/// ValidationError when n < 3 * perplexity or the input is not finite.
TsneResult tsne(const Eigen::MatrixXd& data, std::uint64_t seed, const TsneOptions& options = {});

}  // namespace cardio::embed
