#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

namespace morphtok::crf {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Linear-chain transition scores. pairwise(a, b) scores label a followed by b.
struct Transitions {
  Matrix pairwise;
  Vector start;
  Vector stop;

  static Transitions zeros(int labels);
  int labels() const { return static_cast<int>(start.size()); }
};

/// start[y0] + sum_t emissions(t, y_t) + sum_t pairwise(y_{t-1}, y_t) + stop[y_{n-1}]
double sequence_score(const Matrix& emissions, std::span<const int> labels,
                      const Transitions& trans);

/// log of the sum of exp(sequence_score) over all label sequences (forward algorithm).
double log_partition(const Matrix& emissions, const Transitions& trans);

/// log P(labels | emissions).
double log_likelihood(const Matrix& emissions, std::span<const int> labels,
                      const Transitions& trans);

struct ViterbiResult {
  std::vector<int> labels;
  double score = 0.0;
};

/// Highest-scoring label sequence. Ties resolve to the lower label index at
/// the final position and at every backtracking step.
ViterbiResult viterbi(const Matrix& emissions, const Transitions& trans);

/// Gradient of the negative log-likelihood, computed from forward-backward
/// marginals: expected minus observed feature counts.
struct NllGradient {
  double nll = 0.0;
  Matrix emissions;
  Transitions transitions;
};

NllGradient nll_gradient(const Matrix& emissions, std::span<const int> labels,
                         const Transitions& trans);

/// Numerically stable log(exp(a) + exp(b)).
double log_add(double a, double b);

}  // namespace morphtok::crf
