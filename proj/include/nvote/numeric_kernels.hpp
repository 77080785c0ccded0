#pragma once

// Forward-pass kernels: scaled dot-product self-attention, two-branch score
// fusion, and detection/voting loss terms.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "nvote/error.hpp"

namespace nvote {

// Rows are spatial positions, columns are channels.
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Row-wise softmax(Q K^T / sqrt(c)) for position-major Q and K (N x c).
inline FeatureMatrix attention_weights(const FeatureMatrix& q, const FeatureMatrix& k) {
  if (q.cols() == 0 || k.cols() == 0) throw DomainError("attention needs at least one key channel");
  if (q.cols() != k.cols()) throw DomainError("query and key channel counts differ");
  if (q.rows() != k.rows() || q.rows() == 0) throw DomainError("query and key position counts differ");
  if (!q.allFinite() || !k.allFinite()) throw DomainError("non-finite attention input");

  FeatureMatrix logits = (q * k.transpose()) / std::sqrt(static_cast<double>(k.cols()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    auto row = logits.row(i);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
  return logits;
}

// o_i = sum_j w_ij v_j, where `values` already went through the value map.
inline FeatureMatrix attention_context(const FeatureMatrix& weights, const FeatureMatrix& values) {
  if (weights.rows() != weights.cols() || weights.cols() != values.rows()) {
    throw DomainError("attention weight / value dimensions do not match");
  }
  for (Eigen::Index i = 0; i < weights.rows(); ++i) {
    if (std::abs(weights.row(i).sum() - 1.0) > 1e-6) throw DomainError("attention weight rows must sum to 1");
  }
  return weights * values;
}

// Per-position convex blend of local and vote branch scores. Score maps are
// positions x anchors; weights are one per position.
struct FusionInputs {
  FeatureMatrix p_local;
  FeatureMatrix p_vote;
  Eigen::VectorXd w_local;
  Eigen::VectorXd w_vote;
};

inline FeatureMatrix fuse_scores(const FusionInputs& in) {
  const auto n = in.p_local.rows();
  if (in.p_vote.rows() != n || in.p_vote.cols() != in.p_local.cols() || in.w_local.size() != n ||
      in.w_vote.size() != n) {
    throw ValidationError("fusion inputs have mismatched shapes");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (in.w_local[i] < 0.0 || in.w_vote[i] < 0.0) throw ValidationError("fusion weights must be non-negative");
    if (std::abs(in.w_local[i] + in.w_vote[i] - 1.0) > 1e-6) {
      throw ValidationError("fusion weights must sum to 1 at every position");
    }
  }
  FeatureMatrix out = in.w_local.asDiagonal() * in.p_local;
  out += in.w_vote.asDiagonal() * in.p_vote;
  return out;
}

inline constexpr double kProbabilityClamp = 1e-6;

// -alpha (1 - p)^gamma ln p, with p clamped away from 0 and 1.
inline double focal_loss(double p_t, double alpha = 0.25, double gamma = 2.0) {
  if (p_t >= 1.0) return 0.0;
  const double p = std::clamp(p_t, kProbabilityClamp, 1.0 - kProbabilityClamp);
  return -alpha * std::pow(1.0 - p, gamma) * std::log(p);
}

inline double smooth_l1(double d) {
  const double a = std::abs(d);
  return a < 1.0 ? 0.5 * d * d : a - 0.5;
}

struct LossWeights {
  double lambda_det = 1.0;
  double lambda_nv = 1.0;
  double alpha = 1.0;  // local classification
  double beta = 1.0;   // vote classification
  double gamma = 2.0;  // fused classification
  double w_dist = 0.2;
  double w_ang = 0.06;
  double focal_alpha = 0.25;
  double focal_gamma = 2.0;

  void validate() const {
    for (double v : {lambda_det, lambda_nv, alpha, beta, gamma, w_dist, w_ang, focal_alpha, focal_gamma}) {
      if (!(v >= 0.0)) throw ValidationError("loss weights must be non-negative");
    }
  }
};

struct LossTerms {
  double local = 0.0;
  double vote = 0.0;
  double fusion = 0.0;
  double reg = 0.0;
  double dist = 0.0;
  double ang = 0.0;
};

struct LossBreakdown {
  double cls = 0.0;
  double det = 0.0;
  double nv = 0.0;
  double total = 0.0;
};

inline LossBreakdown total_loss(const LossTerms& t, const LossWeights& w) {
  for (double v : {t.local, t.vote, t.fusion, t.reg, t.dist, t.ang}) {
    if (!(v >= 0.0)) throw ValidationError("loss terms must be non-negative");
  }
  LossBreakdown b;
  b.cls = w.alpha * t.local + w.beta * t.vote + w.gamma * t.fusion;
  b.det = b.cls + t.reg;
  b.nv = w.w_dist * t.dist + w.w_ang * t.ang;
  b.total = w.lambda_det * b.det + w.lambda_nv * b.nv;
  return b;
}

}  // namespace nvote
