#pragma once

#include <algorithm>
#include <cmath>
#include <string_view>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "cdm/aggregators/decision.hpp"
#include "cdm/error.hpp"

namespace cdm {

enum class Exploration { kOptimism, kNone };

struct MetaCmabParams {
  double ridge = 1.0;  // lambda
  double alpha = 1.0;  // optimism coefficient
  Exploration exploration = Exploration::kOptimism;
};

// x(a) = [1, p_1(a), ..., p_N(a)].
inline Eigen::VectorXd advice_feature(const AdviceMatrix& advice, std::size_t arm) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(advice.experts() + 1));
  x[0] = 1.0;
  for (std::size_t n = 0; n < advice.experts(); ++n)
    x[static_cast<Eigen::Index>(n + 1)] = advice(n, arm);
  return x;
}

// Optimistic ridge regression of the reward on the advice vector.
// A = lambda I + sum x x^T, b = sum r x, theta = A^{-1} b,
// score(x) = theta^T x + alpha sqrt(x^T A^{-1} x).
class MetaCmab {
 public:
  explicit MetaCmab(std::size_t experts, MetaCmabParams params = {})
      : params_(params), dim_(static_cast<Eigen::Index>(experts + 1)) {
    if (!(params.ridge > 0.0)) throw ValidationError("MetaCMAB ridge must be > 0");
    if (params.alpha < 0.0) throw ValidationError("MetaCMAB alpha must be >= 0");
    design_ = params.ridge * Eigen::MatrixXd::Identity(dim_, dim_);
    moments_ = Eigen::VectorXd::Zero(dim_);
    theta_ = Eigen::VectorXd::Zero(dim_);
    factor_.compute(design_);
  }

  std::string_view name() const { return "metacmab"; }
  const MetaCmabParams& params() const { return params_; }
  const Eigen::MatrixXd& design() const { return design_; }
  const Eigen::VectorXd& moments() const { return moments_; }
  const Eigen::VectorXd& coefficients() const { return theta_; }
  std::size_t observations() const { return observations_; }
  std::size_t rebuilds() const { return rebuilds_; }

  double mean(const Eigen::VectorXd& x) const { return theta_.dot(x); }

  // sqrt(x^T A^{-1} x) = ||L^{-1} x||.
  double width(const Eigen::VectorXd& x) const {
    return factor_.matrixL().solve(x).norm();
  }

  double score(const Eigen::VectorXd& x) const {
    if (params_.exploration == Exploration::kNone) return mean(x);
    return mean(x) + params_.alpha * width(x);
  }

  // Reward estimate without the exploration bonus, clipped to [0,1].
  double predict(const Eigen::VectorXd& x) const { return std::clamp(mean(x), 0.0, 1.0); }

  void observe(const Eigen::VectorXd& x, double reward) {
    if (x.size() != dim_) throw ValidationError("MetaCMAB feature has wrong length");
    if (!x.allFinite() || !std::isfinite(reward))
      throw ValidationError("MetaCMAB received a non-finite feature or reward");
    design_.noalias() += x * x.transpose();
    moments_.noalias() += reward * x;
    factor_.rankUpdate(x, 1.0);
    if (factor_.info() != Eigen::Success) rebuild();
    theta_ = factor_.solve(moments_);
    ++observations_;
  }

  Decision decide(const AdviceMatrix& advice, Rng& rng) const {
    Decision d;
    d.scores.resize(advice.arms());
    d.predictions.resize(advice.arms());
    for (std::size_t a = 0; a < advice.arms(); ++a) {
      const Eigen::VectorXd x = advice_feature(advice, a);
      d.scores[a] = score(x);
      d.predictions[a] = predict(x);
    }
    d.chosen = rng.argmax(d.scores);
    return d;
  }

  void update(const AdviceMatrix& advice, std::size_t chosen, double reward) {
    observe(advice_feature(advice, chosen), reward);
  }

 private:
  void rebuild() {
    ++rebuilds_;
    factor_.compute(design_);
    if (factor_.info() != Eigen::Success)
      throw NumericError("MetaCMAB design matrix lost positive definiteness");
  }

  MetaCmabParams params_;
  Eigen::Index dim_;
  Eigen::MatrixXd design_;
  Eigen::VectorXd moments_;
  Eigen::VectorXd theta_;
  Eigen::LLT<Eigen::MatrixXd> factor_;
  std::size_t observations_ = 0;
  std::size_t rebuilds_ = 0;
};

}  // namespace cdm
