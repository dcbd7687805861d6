#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cdm/error.hpp"
#include "cdm/stats/distributions.hpp"
#include "cdm/stats/kruskal.hpp"

namespace cdm::stats {

enum class WorkingCorrelation { kIndependence, kExchangeable };

inline std::string to_string(WorkingCorrelation w) {
  return w == WorkingCorrelation::kIndependence ? "independence" : "exchangeable";
}

struct GeeOptions {
  WorkingCorrelation correlation = WorkingCorrelation::kExchangeable;
  double tolerance = 1e-8;  // on max |delta beta|
  int max_iterations = 100;
  Adjustment adjustment = Adjustment::kNone;  // across reported terms
};

struct GeeTerm {
  std::string name;
  double estimate = 0.0;
  double se = 0.0;
  double z = 0.0;
  double p_value = 1.0;
  double p_adjusted = 1.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

struct GeeModel {
  std::vector<GeeTerm> terms;
  Eigen::VectorXd beta;
  Eigen::MatrixXd covariance;  // robust sandwich
  WorkingCorrelation correlation = WorkingCorrelation::kExchangeable;
  double alpha = 0.0;  // exchangeable working correlation
  double scale = 0.0;
  std::size_t clusters = 0;
  std::size_t observations = 0;
  int iterations = 0;
  bool converged = false;

  const GeeTerm& term(const std::string& name) const {
    for (const auto& t : terms)
      if (t.name == name) return t;
    throw ValidationError("no GEE term named '" + name + "'");
  }
};

namespace detail {

// Inverse of the m x m exchangeable matrix (1 - a) I + a J.
inline Eigen::MatrixXd exchangeable_inverse(Eigen::Index m, double a) {
  const double c = a / (1.0 - a + static_cast<double>(m) * a);
  Eigen::MatrixXd r = -c * Eigen::MatrixXd::Ones(m, m);
  r.diagonal().array() += 1.0;
  return r / (1.0 - a);
}

}  // namespace detail

// Gaussian / identity-link GEE with moment estimates of scale and correlation.
inline GeeModel gee_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                        std::span<const std::int64_t> cluster_ids,
                        std::vector<std::string> names = {}, const GeeOptions& opt = {}) {
  const Eigen::Index n = x.rows(), p = x.cols();
  if (y.size() != n || static_cast<Eigen::Index>(cluster_ids.size()) != n)
    throw ValidationError("gee: response, design and cluster lengths differ");
  if (names.empty())
    for (Eigen::Index j = 0; j < p; ++j) names.push_back("x" + std::to_string(j));
  if (static_cast<Eigen::Index>(names.size()) != p) throw ValidationError("gee: one name per column");
  if (!y.allFinite() || !x.allFinite()) throw ValidationError("gee: non-finite input");

  std::map<std::int64_t, std::vector<Eigen::Index>> by_cluster;
  for (Eigen::Index i = 0; i < n; ++i) by_cluster[cluster_ids[static_cast<std::size_t>(i)]].push_back(i);
  if (by_cluster.size() < 2) throw ValidationError("gee: need at least two clusters");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < p) throw ValidationError("gee: design matrix is rank deficient");
  if (n <= p) throw ValidationError("gee: need more observations than columns");

  struct Block {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
  };
  std::vector<Block> blocks;
  Eigen::Index max_size = 1;
  double n_pairs = 0.0;
  for (const auto& [id, rows] : by_cluster) {
    Block b{Eigen::MatrixXd(static_cast<Eigen::Index>(rows.size()), p),
            Eigen::VectorXd(static_cast<Eigen::Index>(rows.size()))};
    for (std::size_t r = 0; r < rows.size(); ++r) {
      b.x.row(static_cast<Eigen::Index>(r)) = x.row(rows[r]);
      b.y(static_cast<Eigen::Index>(r)) = y(rows[r]);
    }
    const auto m = static_cast<Eigen::Index>(rows.size());
    max_size = std::max(max_size, m);
    n_pairs += 0.5 * static_cast<double>(m * (m - 1));
    blocks.push_back(std::move(b));
  }

  GeeModel model;
  model.correlation = opt.correlation;
  model.clusters = blocks.size();
  model.observations = static_cast<std::size_t>(n);
  model.beta = qr.solve(y);

  const bool exch = opt.correlation == WorkingCorrelation::kExchangeable && max_size > 1;
  const double lower = max_size > 1 ? -1.0 / static_cast<double>(max_size - 1) : 0.0;
  const double margin = 1e-6;

  auto estimate_dependence = [&](const Eigen::VectorXd& beta) {
    double ssr = 0.0, cross = 0.0;
    for (const auto& b : blocks) {
      const Eigen::VectorXd e = b.y - b.x * beta;
      const double s = e.sum(), sq = e.squaredNorm();
      ssr += sq;
      cross += (s * s - sq) / 2.0;
    }
    model.scale = ssr / static_cast<double>(n - p);
    if (!exch || model.scale <= 0.0) {
      model.alpha = 0.0;
      return;
    }
    const double denom = n_pairs - static_cast<double>(p);
    const double a = denom > 0.0 ? cross / model.scale / denom : 0.0;
    model.alpha = std::clamp(a, lower + margin, 1.0 - margin);
  };

  auto weight = [&](Eigen::Index m) {
    return exch ? detail::exchangeable_inverse(m, model.alpha) : Eigen::MatrixXd::Identity(m, m);
  };

  for (model.iterations = 1; model.iterations <= opt.max_iterations; ++model.iterations) {
    estimate_dependence(model.beta);
    Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p);
    for (const auto& b : blocks) {
      const Eigen::MatrixXd w = weight(b.x.rows());
      const Eigen::MatrixXd xtw = b.x.transpose() * w;
      lhs.noalias() += xtw * b.x;
      rhs.noalias() += xtw * b.y;
    }
    const Eigen::VectorXd next = lhs.ldlt().solve(rhs);
    if (!next.allFinite()) throw NumericError("gee: non-finite coefficients");
    const double delta = (next - model.beta).cwiseAbs().maxCoeff();
    model.beta = next;
    if (delta < opt.tolerance) {
      model.converged = true;
      break;
    }
  }
  model.iterations = std::min(model.iterations, opt.max_iterations);
  estimate_dependence(model.beta);

  Eigen::MatrixXd bread = Eigen::MatrixXd::Zero(p, p);
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(p, p);
  for (const auto& b : blocks) {
    const Eigen::MatrixXd xtw = b.x.transpose() * weight(b.x.rows());
    const Eigen::VectorXd u = xtw * (b.y - b.x * model.beta);
    bread.noalias() += xtw * b.x;
    meat.noalias() += u * u.transpose();
  }
  const Eigen::MatrixXd inv = bread.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  model.covariance = inv * meat * inv;

  std::vector<double> raw;
  for (Eigen::Index j = 0; j < p; ++j) {
    GeeTerm t;
    t.name = names[static_cast<std::size_t>(j)];
    t.estimate = model.beta(j);
    t.se = std::sqrt(std::max(0.0, model.covariance(j, j)));
    t.z = t.se > 0.0 ? t.estimate / t.se : 0.0;
    t.p_value = t.se > 0.0 ? two_sided_normal_p(t.z) : (t.estimate == 0.0 ? 1.0 : 0.0);
    t.ci_lo = t.estimate - 1.96 * t.se;
    t.ci_hi = t.estimate + 1.96 * t.se;
    raw.push_back(t.p_value);
    model.terms.push_back(std::move(t));
  }
  const auto adj = adjust_p_values(raw, opt.adjustment);
  for (std::size_t j = 0; j < adj.size(); ++j) model.terms[j].p_adjusted = adj[j];
  return model;
}

}  // namespace cdm::stats
