// Copyright 2026 The qpt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// ADMM on the splitting  z = A x,  z in C = Box x PSD x R+, where A stacks
// the (row-equilibrated) linear constraints on top of the identity. Each
// iteration solves (sigma I + A' R A) x = rhs with R = diag(rho), projects
// onto C and updates the scaled dual. The chi/slack block structure of A is
// exploited through a Schur complement on the chi block whenever no row
// couples two slacks, which holds for every tomography program.

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

#include "qpt/error.hpp"
#include "qpt/sdp.hpp"

namespace qpt {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;
using DenseMatrix = Eigen::MatrixXd;

constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e6;

// Constraint rows after equilibration.
struct ScaledRows {
  DenseMatrix chi;           // m x nc
  SparseMatrix slack;        // m x ns
  RealVector lower, upper;   // m
  std::vector<bool> is_eq;
  bool slack_coupled = false;  // some row touches two or more slacks
};

ScaledRows scale_rows(const SdpProblem& p) {
  const auto nc = static_cast<Index>(p.n_chi());
  const auto ns = static_cast<Index>(p.n_slack);
  const auto m = static_cast<Index>(p.inequalities.size() + p.equalities.size());
  ScaledRows rows;
  rows.chi.resize(m, nc);
  rows.lower.resize(m);
  rows.upper.resize(m);
  rows.is_eq.assign(static_cast<std::size_t>(m), false);
  std::vector<Eigen::Triplet<double>> trips;

  auto put = [&](Index i, const LinearForm& f, double lo, double hi, bool eq) {
    double norm2 = f.chi.squaredNorm();
    for (const auto& [j, v] : f.slack) norm2 += v * v;
    const double scale = norm2 > 0.0 ? 1.0 / std::sqrt(norm2) : 1.0;
    rows.chi.row(i) = f.chi.transpose() * scale;
    for (const auto& [j, v] : f.slack) trips.emplace_back(i, static_cast<Index>(j), v * scale);
    rows.lower(i) = lo * scale;
    rows.upper(i) = hi * scale;
    rows.is_eq[static_cast<std::size_t>(i)] = eq || lo == hi;
    if (f.slack.size() > 1) rows.slack_coupled = true;
  };

  Index i = 0;
  for (const auto& q : p.inequalities) put(i++, q.row, q.lower, q.upper, false);
  for (const auto& e : p.equalities) put(i++, e.row, e.value, e.value, true);
  rows.slack.resize(m, ns);
  rows.slack.setFromTriplets(trips.begin(), trips.end());
  rows.slack.makeCompressed();
  return rows;
}

// Factorization of sigma I + A' diag(rho) A for the stacked operator
// A = [rows ; I].
class KktSystem {
 public:
  KktSystem(const ScaledRows& rows, double sigma) : sigma_(sigma) {
    nc_ = rows.chi.cols();
    ns_ = rows.slack.cols();
    schur_ = !rows.slack_coupled;
    const Index m = rows.chi.rows();

    std::vector<Index> ineq, eq;
    for (Index i = 0; i < m; ++i) (rows.is_eq[static_cast<std::size_t>(i)] ? eq : ineq).push_back(i);
    auto gather = [&](const std::vector<Index>& idx, DenseMatrix& c, DenseMatrix& s) {
      c.resize(static_cast<Index>(idx.size()), nc_);
      s = DenseMatrix::Zero(static_cast<Index>(idx.size()), ns_);
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const auto r = static_cast<Index>(k);
        c.row(r) = rows.chi.row(idx[k]);
      }
      const SparseMatrix st = rows.slack.transpose();
      for (std::size_t k = 0; k < idx.size(); ++k) {
        for (SparseMatrix::InnerIterator it(st, idx[k]); it; ++it) {
          s(static_cast<Index>(k), it.row()) = it.value();
        }
      }
    };
    DenseMatrix c_in, s_in, c_eq, s_eq;
    gather(ineq, c_in, s_in);
    gather(eq, c_eq, s_eq);

    g_in_ = c_in.transpose() * c_in;
    g_eq_ = c_eq.transpose() * c_eq;
    k_in_ = c_in.transpose() * s_in;
    k_eq_ = c_eq.transpose() * s_eq;
    if (schur_) {
      q_in_ = s_in.colwise().squaredNorm().transpose();
      q_eq_ = s_eq.colwise().squaredNorm().transpose();
    } else {
      h_in_ = s_in.transpose() * s_in;
      h_eq_ = s_eq.transpose() * s_eq;
    }
  }

  void factor(double rho, double rho_eq) {
    const double diag = sigma_ + rho;
    DenseMatrix mcc = rho * g_in_ + rho_eq * g_eq_;
    mcc.diagonal().array() += diag;
    mcs_ = rho * k_in_ + rho_eq * k_eq_;
    if (schur_) {
      dinv_ = (rho * q_in_ + rho_eq * q_eq_).array() + diag;
      dinv_ = dinv_.cwiseInverse();
      if (ns_ > 0) mcc.noalias() -= mcs_ * dinv_.asDiagonal() * mcs_.transpose();
      llt_.compute(mcc);
    } else {
      DenseMatrix full(nc_ + ns_, nc_ + ns_);
      full.topLeftCorner(nc_, nc_) = mcc;
      full.topRightCorner(nc_, ns_) = mcs_;
      full.bottomLeftCorner(ns_, nc_) = mcs_.transpose();
      DenseMatrix mss = rho * h_in_ + rho_eq * h_eq_;
      mss.diagonal().array() += diag;
      full.bottomRightCorner(ns_, ns_) = mss;
      llt_.compute(full);
    }
    if (llt_.info() != Eigen::Success) {
      throw NumericalError("sdp solve: KKT factorization failed");
    }
  }

  void solve(const RealVector& rc, const RealVector& rs, RealVector& xc, RealVector& xs) const {
    if (schur_) {
      RealVector t = rc;
      if (ns_ > 0) t.noalias() -= mcs_ * dinv_.cwiseProduct(rs);
      xc = llt_.solve(t);
      xs = dinv_.cwiseProduct(rs - mcs_.transpose() * xc);
    } else {
      RealVector rhs(nc_ + ns_);
      rhs << rc, rs;
      const RealVector sol = llt_.solve(rhs);
      xc = sol.head(nc_);
      xs = sol.tail(ns_);
    }
  }

 private:
  double sigma_;
  Index nc_ = 0, ns_ = 0;
  bool schur_ = true;
  DenseMatrix g_in_, g_eq_, k_in_, k_eq_, h_in_, h_eq_;
  RealVector q_in_, q_eq_;
  DenseMatrix mcs_;
  RealVector dinv_;
  Eigen::LLT<DenseMatrix> llt_;
};

class PsdProjector {
 public:
  explicit PsdProjector(Index n) : n_(n), solver_(n) {}

  void project(Eigen::Ref<RealVector> v) {
    if (n_ == 0) return;
    mat_hermitian_into(v, work_);
    solver_.compute(work_);
    if (solver_.info() != Eigen::Success) {
      throw NumericalError("sdp solve: eigendecomposition failed in PSD projection");
    }
    const RealVector w = solver_.eigenvalues().cwiseMax(0.0);
    const auto& vecs = solver_.eigenvectors();
    work_.noalias() = vecs * w.cast<Complex>().asDiagonal() * vecs.adjoint();
    vec_hermitian_into(work_, v);
  }

  double max_eigenvalue(const RealVector& v) {
    if (n_ == 0) return 0.0;
    mat_hermitian_into(v, work_);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(work_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
  }

 private:
  Index n_;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver_;
  ComplexMatrix work_;
};

}  // namespace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal:
      return "Optimal";
    case SolveStatus::kMaxIter:
      return "MaxIter";
    case SolveStatus::kInfeasible:
      return "Infeasible";
  }
  return "Unknown";
}

SdpSolution solve(const SdpProblem& problem, double tol, std::size_t max_iter) {
  SolverOptions options;
  options.tol = tol;
  options.max_iter = max_iter;
  return solve(problem, options);
}

SdpSolution solve(const SdpProblem& problem, const SolverOptions& opt) {
  problem.validate();
  if (!(opt.tol > 0.0)) throw InvariantError("sdp solve: tol must be positive");

  const Index n_side = problem.psd_dim;
  const auto nc = static_cast<Index>(problem.n_chi());
  const auto ns = static_cast<Index>(problem.n_slack);
  const ScaledRows rows = scale_rows(problem);
  const Index m = rows.chi.rows();

  SdpSolution out;
  out.chi_block = HermitianMatrix::zero(n_side);
  out.slacks.assign(static_cast<std::size_t>(ns), 0.0);

  // A zero row is either vacuous or certifies infeasibility by itself.
  for (Index i = 0; i < m; ++i) {
    const bool empty = rows.chi.row(i).squaredNorm() == 0.0 && rows.slack.row(i).norm() == 0.0;
    if (empty && (rows.lower(i) > 0.0 || rows.upper(i) < 0.0)) {
      out.status = SolveStatus::kInfeasible;
      out.diagnostics = "constraint row " + std::to_string(i) + " is 0 but excludes 0";
      return out;
    }
  }

  // Cost scaling.
  RealVector cost_c = problem.objective.chi;
  RealVector cost_s = RealVector::Zero(ns);
  for (const auto& [j, v] : problem.objective.slack) cost_s(static_cast<Index>(j)) += v;
  double cmax = std::max(cost_c.size() ? cost_c.cwiseAbs().maxCoeff() : 0.0,
                         cost_s.size() ? cost_s.cwiseAbs().maxCoeff() : 0.0);
  const double cost_scale = cmax > 0.0 ? 1.0 / cmax : 1.0;
  const RealVector cc = cost_c * cost_scale;
  const RealVector cs = cost_s * cost_scale;
  const double c_norm = std::sqrt(cc.squaredNorm() + cs.squaredNorm());

  KktSystem kkt(rows, opt.sigma);
  double rho = opt.rho;
  auto rho_rows = [&](double r) {
    RealVector v(m);
    for (Index i = 0; i < m; ++i) {
      v(i) = rows.is_eq[static_cast<std::size_t>(i)] ? r * opt.equality_rho_scale : r;
    }
    return v;
  };
  RealVector rho_r = rho_rows(rho);
  kkt.factor(rho, rho * opt.equality_rho_scale);

  PsdProjector proj(n_side);
  RealVector xc = RealVector::Zero(nc), xs = RealVector::Zero(ns);
  RealVector zr = RealVector::Zero(m), zp = RealVector::Zero(nc), zs = RealVector::Zero(ns);
  RealVector yr = RealVector::Zero(m), yp = RealVector::Zero(nc), ys = RealVector::Zero(ns);
  RealVector xtc, xts, rc, rs, ztr, wr;
  RealVector yr_prev, yp_prev, ys_prev;

  const double alpha = opt.relaxation;
  double best_score = kInf;
  RealVector best_zp = zp, best_zs = zs;
  double best_rp = kInf, best_rd = kInf;
  std::size_t iter = 0;

  auto finish = [&](SolveStatus status, const RealVector& fzp, const RealVector& fzs, double rp,
                    double rd) {
    ComplexMatrix chi;
    mat_hermitian_into(fzp, chi);
    out.chi_block = HermitianMatrix(chi);
    for (Index j = 0; j < ns; ++j) out.slacks[static_cast<std::size_t>(j)] = fzs(j);
    out.objective_value = problem.objective.evaluate(fzp, out.slacks);
    out.primal_residual = rp;
    out.dual_residual = rd;
    out.iterations = iter;
    out.status = status;
    return out;
  };

  for (iter = 1; iter <= opt.max_iter; ++iter) {
    const bool check = iter % opt.check_every == 0 || iter == opt.max_iter;
    if (check) {
      yr_prev = yr;
      yp_prev = yp;
      ys_prev = ys;
    }

    // Linear step.
    wr = rho_r.cwiseProduct(zr) - yr;
    rc = opt.sigma * xc - cc + rows.chi.transpose() * wr + (rho * zp - yp);
    rs = opt.sigma * xs - cs + rows.slack.transpose() * wr + (rho * zs - ys);
    kkt.solve(rc, rs, xtc, xts);
    ztr = rows.chi * xtc + rows.slack * xts;

    // Relaxation.
    xc = alpha * xtc + (1.0 - alpha) * xc;
    xs = alpha * xts + (1.0 - alpha) * xs;
    const RealVector hr = alpha * ztr + (1.0 - alpha) * zr;
    const RealVector hp = alpha * xtc + (1.0 - alpha) * zp;
    const RealVector hs = alpha * xts + (1.0 - alpha) * zs;

    // Projection.
    zr = (hr + yr.cwiseQuotient(rho_r)).cwiseMax(rows.lower).cwiseMin(rows.upper);
    zp = hp + yp / rho;
    proj.project(zp);
    zs = (hs + ys / rho).cwiseMax(0.0);

    // Dual update.
    yr += rho_r.cwiseProduct(hr - zr);
    yp += rho * (hp - zp);
    ys += rho * (hs - zs);

    if (!check) continue;

    // Residuals.
    const RealVector axr = rows.chi * xc + rows.slack * xs;
    const double ax_norm = std::sqrt(axr.squaredNorm() + xc.squaredNorm() + xs.squaredNorm());
    const double z_norm = std::sqrt(zr.squaredNorm() + zp.squaredNorm() + zs.squaredNorm());
    const double prim = std::sqrt((axr - zr).squaredNorm() + (xc - zp).squaredNorm() +
                                  (xs - zs).squaredNorm());
    const RealVector aty_c = rows.chi.transpose() * yr + yp;
    const RealVector aty_s = rows.slack.transpose() * yr + ys;
    const double aty_norm = std::sqrt(aty_c.squaredNorm() + aty_s.squaredNorm());
    const double dual = std::sqrt((cc + aty_c).squaredNorm() + (cs + aty_s).squaredNorm());
    const double rp = prim / std::max({1.0, ax_norm, z_norm});
    const double rd = dual / std::max({1.0, c_norm, aty_norm});

    if (std::max(rp, rd) < best_score) {
      best_score = std::max(rp, rd);
      best_zp = zp;
      best_zs = zs;
      best_rp = rp;
      best_rd = rd;
    }
    if (opt.trace != nullptr && iter % opt.trace_every < opt.check_every) {
      *opt.trace << iter << ' ' << rp << ' ' << rd << ' ' << rho << '\n';
    }
    if (rp <= opt.tol && rd <= opt.tol) return finish(SolveStatus::kOptimal, zp, zs, rp, rd);

    // Primal infeasibility: dy = y_k - y_{k-1} with A' dy = 0 and
    // support_C(dy) < 0.
    {
      const RealVector dyr = yr - yr_prev, dyp = yp - yp_prev, dys = ys - ys_prev;
      double dy_max = 0.0;
      if (m) dy_max = std::max(dy_max, dyr.cwiseAbs().maxCoeff());
      if (nc) dy_max = std::max(dy_max, dyp.cwiseAbs().maxCoeff());
      if (ns) dy_max = std::max(dy_max, dys.cwiseAbs().maxCoeff());
      const double eps = opt.infeasibility_tol * dy_max;
      if (dy_max > 1e-12) {
        const RealVector atc = rows.chi.transpose() * dyr + dyp;
        const RealVector ats = rows.slack.transpose() * dyr + dys;
        double at_max = 0.0;
        if (nc) at_max = std::max(at_max, atc.cwiseAbs().maxCoeff());
        if (ns) at_max = std::max(at_max, ats.cwiseAbs().maxCoeff());
        bool certified = at_max <= eps;
        double support = 0.0;
        for (Index i = 0; certified && i < m; ++i) {
          const double d = dyr(i);
          if (d > eps) {
            if (std::isinf(rows.upper(i))) certified = false;
            else support += rows.upper(i) * d;
          } else if (d < -eps) {
            if (std::isinf(rows.lower(i))) certified = false;
            else support += rows.lower(i) * d;
          }
        }
        if (certified && ns && dys.maxCoeff() > eps) certified = false;
        if (certified && nc && proj.max_eigenvalue(dyp) > eps) certified = false;
        if (certified && support < -eps) {
          out.diagnostics = "primal infeasibility certificate at iteration " + std::to_string(iter);
          return finish(SolveStatus::kInfeasible, zp, zs, rp, rd);
        }
      }
    }

    // Residual balancing.
    if (iter % opt.adapt_every < opt.check_every) {
      double next = rho;
      if (rp > opt.adapt_ratio * rd) next = std::min(rho * 2.0, kRhoMax);
      else if (rd > opt.adapt_ratio * rp) next = std::max(rho / 2.0, kRhoMin);
      if (next != rho) {
        // Keep the unscaled dual y; only the penalty changes.
        rho = next;
        rho_r = rho_rows(rho);
        kkt.factor(rho, rho * opt.equality_rho_scale);
      }
    }
  }

  iter = opt.max_iter;
  out.diagnostics = "iteration limit reached; returning best iterate";
  return finish(SolveStatus::kMaxIter, best_zp, best_zs, best_rp, best_rd);
}

}  // namespace qpt
