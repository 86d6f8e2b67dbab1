#pragma once

// Reference solver for small explicit families: dense log-barrier Newton on the
// primal program, and for p = 2 an enumeration of active sets through KKT systems.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "qrgeom/error.hpp"
#include "qrgeom/modulus.hpp"

namespace qrgeom {

struct BruteforceLimits {
  std::size_t max_edges = 20;
  std::size_t max_curves = 50;
  std::size_t max_active_set_curves = 12;
};

namespace detail {

struct DenseProgram {
  Eigen::MatrixXd A;  // curves x variables, variables restricted to used, costly edges
  Eigen::VectorXd c;
  std::vector<std::size_t> vars;
  bool infeasible_free = false;
};

inline DenseProgram dense_program(const std::vector<Row>& rows, const std::vector<double>& cost,
                                  const std::vector<double>& var_len) {
  DenseProgram dp;
  std::vector<const Row*> kept;
  std::vector<char> used(cost.size(), 0);
  for (const auto& r : rows) {
    double free_part = 0.0;
    for (auto [e, a] : r.terms)
      if (cost[e] <= 0.0) free_part += a / var_len[e];
    if (free_part >= 1.0) continue;  // satisfied by the free edges at no cost
    kept.push_back(&r);
    for (auto [e, a] : r.terms)
      if (cost[e] > 0.0) used[e] = 1;
  }
  std::vector<long> slot(cost.size(), -1);
  for (std::size_t e = 0; e < cost.size(); ++e)
    if (used[e]) {
      slot[e] = static_cast<long>(dp.vars.size());
      dp.vars.push_back(e);
    }
  dp.A = Eigen::MatrixXd::Zero(static_cast<long>(kept.size()), static_cast<long>(dp.vars.size()));
  dp.c.resize(static_cast<long>(dp.vars.size()));
  for (std::size_t j = 0; j < dp.vars.size(); ++j) dp.c(static_cast<long>(j)) = cost[dp.vars[j]];
  // rhs after subtracting the free edges' contribution
  Eigen::VectorXd b(static_cast<long>(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k) {
    double free_part = 0.0;
    for (auto [e, a] : kept[k]->terms) {
      if (cost[e] <= 0.0)
        free_part += a / var_len[e];
      else
        dp.A(static_cast<long>(k), slot[e]) += a;
    }
    b(static_cast<long>(k)) = 1.0 - free_part;
  }
  // normalize rows to rhs 1
  for (long k = 0; k < dp.A.rows(); ++k) dp.A.row(k) /= b(k);
  return dp;
}

inline double barrier_solve(const DenseProgram& dp, double p) {
  const long m = dp.A.cols(), K = dp.A.rows();
  if (K == 0) return 0.0;
  Eigen::VectorXd x = Eigen::VectorXd::Constant(m, 1.0);
  const double start = (dp.A * x).minCoeff();
  x *= 2.0 / start;
  auto objective = [&](const Eigen::VectorXd& v) {
    double s = 0.0;
    for (long j = 0; j < m; ++j) s += dp.c(j) * std::pow(v(j), p);
    return s;
  };
  auto phi = [&](const Eigen::VectorXd& v, double t) {
    const Eigen::VectorXd slack = dp.A * v - Eigen::VectorXd::Ones(K);
    if (slack.minCoeff() <= 0.0 || v.minCoeff() <= 0.0) return kInf;
    double s = t * objective(v);
    for (long k = 0; k < K; ++k) s -= std::log(slack(k));
    for (long j = 0; j < m; ++j) s -= std::log(v(j));
    return s;
  };
  double t = 1.0;
  const double barrier_terms = static_cast<double>(K + m);
  while (true) {
    for (int it = 0; it < 200; ++it) {
      const Eigen::VectorXd slack = dp.A * x - Eigen::VectorXd::Ones(K);
      Eigen::VectorXd g(m);
      Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m, m);
      for (long j = 0; j < m; ++j) {
        g(j) = t * dp.c(j) * p * std::pow(x(j), p - 1.0) - 1.0 / x(j);
        H(j, j) = t * dp.c(j) * p * (p - 1.0) * std::pow(x(j), p - 2.0) + 1.0 / (x(j) * x(j));
      }
      for (long k = 0; k < K; ++k) {
        const Eigen::VectorXd a = dp.A.row(k).transpose();
        g -= a / slack(k);
        H += a * a.transpose() / (slack(k) * slack(k));
      }
      const Eigen::VectorXd dx = -H.ldlt().solve(g);
      const double decrement = -g.dot(dx);
      if (decrement / 2.0 <= 1e-14) break;
      double step = 1.0;
      const double f0 = phi(x, t);
      while (phi(x + step * dx, t) > f0 + 0.25 * step * g.dot(dx)) {
        step *= 0.5;
        if (step < 1e-20) break;
      }
      x += step * dx;
    }
    if (barrier_terms / t < 1e-13 * std::max(1.0, objective(x))) break;
    t *= 8.0;
  }
  // final polish: scale onto the feasible boundary
  const double m_row = (dp.A * x).minCoeff();
  return objective(x / m_row);
}

inline std::optional<double> active_set_solve(const DenseProgram& dp) {
  const long m = dp.A.cols(), K = dp.A.rows();
  if (K == 0) return 0.0;
  std::optional<double> best;
  const Eigen::VectorXd dinv = (2.0 * dp.c).cwiseInverse();
  for (unsigned mask = 1; mask < (1u << K); ++mask) {
    std::vector<long> idx;
    for (long k = 0; k < K; ++k)
      if (mask & (1u << k)) idx.push_back(k);
    const long s = static_cast<long>(idx.size());
    Eigen::MatrixXd As(s, m);
    for (long i = 0; i < s; ++i) As.row(i) = dp.A.row(idx[static_cast<std::size_t>(i)]);
    const Eigen::MatrixXd G = As * dinv.asDiagonal() * As.transpose();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
    if (lu.rank() < s) continue;
    const Eigen::VectorXd lambda = lu.solve(Eigen::VectorXd::Ones(s));
    if (lambda.minCoeff() < -1e-12) continue;
    const Eigen::VectorXd rho = dinv.asDiagonal() * (As.transpose() * lambda);
    if ((dp.A * rho).minCoeff() < 1.0 - 1e-10) continue;
    const double v = (dp.c.array() * rho.array().square()).sum();
    if (!best || v < *best) best = v;
  }
  return best;
}

}  // namespace detail

struct BruteforceResult {
  double value = 0.0;
  std::optional<double> active_set_value;  // p = 2 and few curves only
};

inline BruteforceResult modulus_bruteforce(const FamilyOracle& family, const std::vector<double>& cost, double p,
                                           const BruteforceLimits& lim = {}) {
  if (!(p > 1.0)) throw ValidationError("p must exceed 1");
  if (family.kind != "explicit" && family.kind != "image-explicit")
    throw ValidationError("brute-force modulus needs an explicit family");
  const auto rows = family.shortest(std::vector<double>(family.num_vars, 0.0));
  if (rows.size() > lim.max_curves) throw CapExceeded("brute-force modulus limited to " + std::to_string(lim.max_curves) + " curves");
  const auto dp = detail::dense_program(rows, cost, family.var_len);
  if (static_cast<std::size_t>(dp.A.cols()) > lim.max_edges)
    throw CapExceeded("brute-force modulus limited to " + std::to_string(lim.max_edges) + " edges");
  BruteforceResult res;
  res.value = detail::barrier_solve(dp, p);
  if (p == 2.0 && static_cast<std::size_t>(dp.A.rows()) <= lim.max_active_set_curves)
    res.active_set_value = detail::active_set_solve(dp);
  return res;
}

}  // namespace qrgeom
