#pragma once

// Independent reference computations for test code only.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "vph/core.hpp"

namespace vph::oracle {

/// Dense (n-1) x (n-1) G with G(i, j) = g(tau_{j+1} - tau_i) for i <= j.
inline Eigen::MatrixXd dense_g(const EventCatalog& cat, const TriggeringKernel& k) {
  const auto t = cat.times();
  const auto m = static_cast<Eigen::Index>(t.size() - 1);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i; j < m; ++j) G(i, j) = k.density(t[j + 1] - t[i]);
  }
  return G;
}

/// Closed-form estimate through dense LU solves: x = G^-1 1, K = G^-T (1/x - mu).
inline std::vector<double> dense_mle(const EventCatalog& cat, double mu, const TriggeringKernel& k) {
  const Eigen::MatrixXd G = dense_g(cat, k);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(G.rows());
  const Eigen::VectorXd x = G.partialPivLu().solve(ones);
  const Eigen::VectorXd rhs = x.cwiseInverse().array() - mu;
  const Eigen::VectorXd K = G.transpose().partialPivLu().solve(rhs);
  std::vector<double> out(K.data(), K.data() + K.size());
  out.push_back(0.0);
  return out;
}

/// Maximizes sum_j log lambda(tau_j) - (mu T + sum_i K_i) over K_1..K_{n-1}
/// (K_n = 0) by damped Newton from K = 0. Returns nullopt if it fails to
/// converge.
inline std::optional<std::vector<double>> newton_mle(const EventCatalog& cat, double mu,
                                                     const TriggeringKernel& k) {
  const auto t = cat.times();
  const std::size_t n = t.size();
  const auto m = static_cast<Eigen::Index>(n - 1);
  // A(i, j) = g(tau_j - tau_i) for event j > i (j indexes events 2..n).
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i; j < m; ++j) A(i, j) = k.density(t[j + 1] - t[i]);
  }
  auto lambda = [&](const Eigen::VectorXd& K) -> Eigen::VectorXd {
    return (A.transpose() * K).array() + mu;
  };
  auto objective = [&](const Eigen::VectorXd& K) {
    const Eigen::VectorXd lam = lambda(K);
    if ((lam.array() <= 0.0).any()) return -std::numeric_limits<double>::infinity();
    return lam.array().log().sum() - K.sum();
  };

  Eigen::VectorXd K = Eigen::VectorXd::Zero(m);
  double f = objective(K);
  int polish = 0;
  for (int iter = 0; iter < 500; ++iter) {
    const Eigen::VectorXd lam = lambda(K);
    const Eigen::VectorXd inv = lam.cwiseInverse();
    const Eigen::VectorXd grad = A * inv - Eigen::VectorXd::Ones(m);
    const Eigen::MatrixXd W = A * inv.cwiseAbs2().asDiagonal();
    const Eigen::MatrixXd H = -(W * A.transpose());
    const Eigen::VectorXd step = H.ldlt().solve(-grad);
    // Once the gradient is small, take a few full Newton steps to reach the
    // rounding floor; a gradient threshold alone is loose when H is nearly singular.
    if (grad.lpNorm<Eigen::Infinity>() < 1e-8) {
      const Eigen::VectorXd trial = K + step;
      if (objective(trial) > -std::numeric_limits<double>::infinity()) K = trial;
      if (++polish == 6) {
        std::vector<double> out(K.data(), K.data() + K.size());
        out.push_back(0.0);
        return out;
      }
      continue;
    }
    double s = 1.0;
    for (int b = 0; b < 60; ++b, s *= 0.5) {
      const Eigen::VectorXd trial = K + s * step;
      const double ft = objective(trial);
      if (ft >= f - 1e-15 * std::abs(f)) {
        K = trial;
        f = ft;
        break;
      }
    }
  }
  return std::nullopt;
}

/// Composite Simpson integration of lambda over [0, T], split at events.
inline double compensator_quadrature(const EventCatalog& cat, double mu, const TriggeringKernel& k,
                                     const std::vector<double>& K, int panels = 2000) {
  std::vector<double> cuts{0.0};
  for (double t : cat.times()) cuts.push_back(t);
  cuts.push_back(cat.window_end());
  auto lam = [&](double s) {
    double v = mu;
    for (std::size_t i = 0; i < cat.size(); ++i) {
      if (cat.time(i) < s) v += K[i] * k.density(s - cat.time(i));
    }
    return v;
  };
  double total = 0.0;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double a = cuts[c], b = cuts[c + 1];
    if (!(b > a)) continue;
    const double h = (b - a) / panels;
    // Evaluate just inside the segment so the left endpoint excludes the event there.
    auto f = [&](double s) { return lam(std::clamp(s, std::nextafter(a, b), b)); };
    double s = f(a) + f(b);
    for (int p = 1; p < panels; ++p) s += f(a + p * h) * (p % 2 == 1 ? 4.0 : 2.0);
    total += s * h / 3.0;
  }
  return total;
}

}  // namespace vph::oracle
