#include "morphtok/crf.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace morphtok::crf {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const Vector& v) {
  const double m = v.maxCoeff();
  if (m == kNegInf) return kNegInf;
  return m + std::log((v.array() - m).exp().sum());
}

// alpha(t, j): log-sum of prefix scores ending in label j at t (emission included).
Matrix forward_table(const Matrix& em, const Transitions& tr) {
  const Eigen::Index n = em.rows(), L = em.cols();
  Matrix alpha(n, L);
  alpha.row(0) = tr.start.transpose() + em.row(0);
  Vector tmp(L);
  for (Eigen::Index t = 1; t < n; ++t) {
    for (Eigen::Index j = 0; j < L; ++j) {
      for (Eigen::Index i = 0; i < L; ++i) tmp(i) = alpha(t - 1, i) + tr.pairwise(i, j);
      alpha(t, j) = log_sum_exp(tmp) + em(t, j);
    }
  }
  return alpha;
}

// beta(t, i): log-sum of suffix scores after t given label i at t (stop included).
Matrix backward_table(const Matrix& em, const Transitions& tr) {
  const Eigen::Index n = em.rows(), L = em.cols();
  Matrix beta(n, L);
  beta.row(n - 1) = tr.stop.transpose();
  Vector tmp(L);
  for (Eigen::Index t = n - 2; t >= 0; --t) {
    for (Eigen::Index i = 0; i < L; ++i) {
      for (Eigen::Index j = 0; j < L; ++j) {
        tmp(j) = tr.pairwise(i, j) + em(t + 1, j) + beta(t + 1, j);
      }
      beta(t, i) = log_sum_exp(tmp);
    }
  }
  return beta;
}

void check_shapes(const Matrix& em, const Transitions& tr) {
  if (em.rows() == 0) throw std::invalid_argument("crf: empty sequence");
  if (em.cols() != tr.labels() || tr.pairwise.rows() != em.cols() ||
      tr.pairwise.cols() != em.cols() || tr.stop.size() != em.cols()) {
    throw std::invalid_argument("crf: label dimension mismatch");
  }
}

}  // namespace

Transitions Transitions::zeros(int labels) {
  return {Matrix::Zero(labels, labels), Vector::Zero(labels), Vector::Zero(labels)};
}

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

double sequence_score(const Matrix& em, std::span<const int> y, const Transitions& tr) {
  check_shapes(em, tr);
  if (static_cast<Eigen::Index>(y.size()) != em.rows()) {
    throw std::invalid_argument("crf: label sequence length mismatch");
  }
  double s = tr.start(y[0]) + tr.stop(y.back());
  for (std::size_t t = 0; t < y.size(); ++t) {
    s += em(static_cast<Eigen::Index>(t), y[t]);
    if (t > 0) s += tr.pairwise(y[t - 1], y[t]);
  }
  return s;
}

double log_partition(const Matrix& em, const Transitions& tr) {
  check_shapes(em, tr);
  const Matrix alpha = forward_table(em, tr);
  return log_sum_exp(alpha.row(em.rows() - 1).transpose() + tr.stop);
}

double log_likelihood(const Matrix& em, std::span<const int> y, const Transitions& tr) {
  return sequence_score(em, y, tr) - log_partition(em, tr);
}

ViterbiResult viterbi(const Matrix& em, const Transitions& tr) {
  check_shapes(em, tr);
  const Eigen::Index n = em.rows(), L = em.cols();
  Matrix delta(n, L);
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> back(n, L);
  delta.row(0) = tr.start.transpose() + em.row(0);
  for (Eigen::Index t = 1; t < n; ++t) {
    for (Eigen::Index j = 0; j < L; ++j) {
      double best = kNegInf;
      int arg = 0;
      for (Eigen::Index i = 0; i < L; ++i) {
        const double s = delta(t - 1, i) + tr.pairwise(i, j);
        if (s > best) {
          best = s;
          arg = static_cast<int>(i);
        }
      }
      delta(t, j) = best + em(t, j);
      back(t, j) = arg;
    }
  }
  ViterbiResult r;
  r.labels.assign(static_cast<std::size_t>(n), 0);
  double best = kNegInf;
  for (Eigen::Index j = 0; j < L; ++j) {
    const double s = delta(n - 1, j) + tr.stop(j);
    if (s > best) {
      best = s;
      r.labels.back() = static_cast<int>(j);
    }
  }
  r.score = best;
  for (Eigen::Index t = n - 1; t > 0; --t) {
    r.labels[t - 1] = back(t, r.labels[t]);
  }
  return r;
}

NllGradient nll_gradient(const Matrix& em, std::span<const int> y, const Transitions& tr) {
  check_shapes(em, tr);
  const Eigen::Index n = em.rows(), L = em.cols();
  const Matrix alpha = forward_table(em, tr);
  const Matrix beta = backward_table(em, tr);
  const double log_z = log_sum_exp(alpha.row(n - 1).transpose() + tr.stop);

  NllGradient g;
  g.nll = log_z - sequence_score(em, y, tr);
  g.emissions = ((alpha + beta).array() - log_z).exp().matrix();
  g.transitions = Transitions::zeros(static_cast<int>(L));
  g.transitions.start = g.emissions.row(0).transpose();
  g.transitions.stop = g.emissions.row(n - 1).transpose();
  for (Eigen::Index t = 1; t < n; ++t) {
    for (Eigen::Index i = 0; i < L; ++i) {
      for (Eigen::Index j = 0; j < L; ++j) {
        g.transitions.pairwise(i, j) += std::exp(alpha(t - 1, i) + tr.pairwise(i, j) +
                                                 em(t, j) + beta(t, j) - log_z);
      }
    }
  }
  // Subtract observed counts.
  g.transitions.start(y[0]) -= 1.0;
  g.transitions.stop(y.back()) -= 1.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    g.emissions(t, y[t]) -= 1.0;
    if (t > 0) g.transitions.pairwise(y[t - 1], y[t]) -= 1.0;
  }
  return g;
}

}  // namespace morphtok::crf
