#include "platoon_mpc/qp.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace platoon_mpc {

const char* to_string(QpStatus status) {
  switch (status) {
    case QpStatus::optimal: return "optimal";
    case QpStatus::infeasible: return "infeasible";
    case QpStatus::max_iterations: return "max_iterations";
  }
  return "unknown";
}

namespace {

constexpr double kPhase1Infeasible = 1e-7; ///< phase-1 objective above this => no feasible point
constexpr double kMinEigenvalue = 1e-10;   ///< reject Hessians not PD beyond this margin

double objective_of(const Mat& h, const Vec& f, const Vec& z) {
  return 0.5 * z.dot(h * z) + f.dot(z);
}

double max_violation(const Mat& c_mat, const Vec& c_vec, const Vec& z) {
  if (c_mat.rows() == 0) return 0.0;
  return (c_mat * z - c_vec).maxCoeff();
}

/// Minimize 0.5 y'Hy + f'y subject to the working-set rows of C y = c via
/// the null-space method: QR-factor C_W', split the space into the range of
/// C_W' and its orthogonal complement, and solve the reduced positive
/// definite system there. The multipliers come from the same factorization
/// by triangular least squares, so their accuracy degrades only with the
/// conditioning of C_W itself (a Schur-complement route squares it, which is
/// what lets near-parallel working rows poison the drop decisions).
///
/// Returns false when the working-set rows are numerically rank deficient;
/// `dependent` then names the position (in w) of the first row the pivoting
/// refused, i.e. a row to remove.
bool kkt_step(const Eigen::LLT<Mat>& h_llt, const Mat& h, const Vec& f,
              const Mat& c_mat, const Vec& c_vec, const std::vector<Index>& w,
              Vec& y, Vec& mu, Index* dependent = nullptr) {
  const Index n = f.size();
  const Index k = static_cast<Index>(w.size());
  if (k == 0) {
    y = h_llt.solve(-f);
    mu.resize(0);
    return true;
  }
  Mat cw_t(n, k);
  Vec cw_rhs(k);
  for (Index j = 0; j < k; ++j) {
    cw_t.col(j) = c_mat.row(w[static_cast<size_t>(j)]).transpose();
    cw_rhs(j) = c_vec(w[static_cast<size_t>(j)]);
  }

  Eigen::ColPivHouseholderQR<Mat> qr(cw_t);
  if (qr.rank() < k) {
    if (dependent) *dependent = qr.colsPermutation().indices()(qr.rank());
    return false;
  }
  const Mat q = qr.householderQ() * Mat::Identity(n, n);
  const Mat r1 = qr.matrixR().topLeftCorner(k, k);
  const auto& perm = qr.colsPermutation();

  // Minimum-norm particular solution of C_W y = c_W.
  const Vec u0 = r1.transpose().triangularView<Eigen::Lower>().solve(
      perm.transpose() * cw_rhs);
  const Vec y0 = q.leftCols(k) * u0;

  if (k == n) {
    y = y0; // vertex: fully determined
  } else {
    const Mat z_basis = q.rightCols(n - k);
    Eigen::LLT<Mat> reduced(Mat(z_basis.transpose() * h * z_basis));
    if (reduced.info() != Eigen::Success) return false;
    const Vec v = reduced.solve(-(z_basis.transpose() * (h * y0 + f)));
    y = y0 + z_basis * v;
  }

  // Stationarity H y + f + C_W' mu = 0 solved for mu.
  const Vec g = -(h * y + f);
  mu = perm * Vec(r1.triangularView<Eigen::Upper>().solve(q.leftCols(k).transpose() * g));
  return true;
}

struct LoopResult {
  Vec z;
  std::vector<Index> active;
  int iterations = 0;
  bool converged = false;
};

/// Primal active-set iteration from a feasible point `z`. The working set is
/// kept sorted ascending; every tie (blocking step, multiplier drop, rank
/// repair) resolves to the lowest row index, so the path is deterministic.
LoopResult active_set_loop(const Eigen::LLT<Mat>& h_llt, const Mat& h, const Vec& f,
                           const Mat& c_mat, const Vec& c_vec, Vec z,
                           std::vector<Index> w, const QpOptions& opt, int max_iter,
                           std::vector<double>* trace) {
  LoopResult out;
  if (trace) trace->push_back(objective_of(h, f, z));

  Vec y, mu, d;
  bool degenerate = false; // last move was zero-length (blocked in place)
  for (int iter = 1; iter <= max_iter; ++iter) {
    out.iterations = iter;
    Index dependent = 0;
    if (!kkt_step(h_llt, h, f, c_mat, c_vec, w, y, mu, &dependent)) {
      // Rank repair: remove the working row the QR pivoting refused.
      if (dependent < 0 || dependent >= static_cast<Index>(w.size())) dependent = 0;
      w.erase(w.begin() + dependent);
      continue;
    }

    d = y - z;
    const double step_scale = 1.0 + z.cwiseAbs().maxCoeff();
    if (d.cwiseAbs().maxCoeff() <= opt.tol_step * step_scale) {
      // At the working-set minimizer: optimal unless a multiplier is negative.
      // Normally the most negative multiplier is dropped; right after a
      // zero-length step the least-index negative one is dropped instead,
      // which breaks the ties that let degenerate vertices cycle.
      Index drop = -1;
      double mu_min = -opt.tol_kkt;
      for (Index j = 0; j < mu.size(); ++j) {
        if (mu(j) < mu_min) {
          mu_min = mu(j);
          drop = j;
          if (degenerate) break;
        }
      }
      if (drop < 0) {
        out.z = std::move(z);
        out.active = std::move(w);
        out.converged = true;
        return out;
      }
      w.erase(w.begin() + drop);
      continue;
    }

    // Longest step toward y that stays feasible; ascending scan keeps the
    // lowest row index on exact ties.
    double alpha = 1.0;
    Index block = -1;
    for (Index i = 0; i < c_mat.rows(); ++i) {
      if (std::binary_search(w.begin(), w.end(), i)) continue;
      const double advance = c_mat.row(i).dot(d);
      if (advance <= opt.tol_step) continue;
      const double slack = std::max(0.0, c_vec(i) - c_mat.row(i).dot(z));
      const double step = slack / advance;
      if (step < alpha) {
        alpha = step;
        block = i;
      }
    }
    z += alpha * d;
    degenerate = alpha <= opt.tol_step;
    if (trace) trace->push_back(objective_of(h, f, z));
    if (block >= 0) w.insert(std::upper_bound(w.begin(), w.end(), block), block);
  }

  out.z = std::move(z);
  out.active = std::move(w);
  return out;
}

/// Feasible start via proximal rounds of the phase-1 subproblem. For the
/// current anchor point zc, each round solves, in the step dz and bound t,
///   minimize t + 0.5*delta*(|dz|^2 + t^2)
///   subject to C (zc + dz) - t <= c, t >= 0,
/// which has the trivial interior start dz = 0, t = violation(zc) + 1.
/// The regularizer penalizes distance from the anchor, so one round can
/// certify feasibility only when a feasible point lies within roughly
/// 1/delta of zc; anchoring at the origin alone misclassifies feasible sets
/// that sit far out. Re-anchoring on each round's optimum and repeating
/// while t still falls fixes that: on polyhedral constraints the proximal
/// sequence reaches the true minimax violation after finitely many rounds,
/// so t stalls within tolerance of zero exactly when the constraints admit
/// a point, and at a strictly positive value when they do not.
struct Phase1Result {
  Vec z;
  int iterations = 0;
  bool feasible = false;
  bool converged = false;
};

Phase1Result phase1(const Mat& c_mat, const Vec& c_vec, const Vec& z0,
                    const QpOptions& opt) {
  const Index n = z0.size();
  const Index m = c_mat.rows();
  // Curvature of the regularizer. Two competing pressures: t stays exactly 0
  // for feasible problems only while delta*|dz*| stays well below 1 (the t>=0
  // multiplier is 1 minus the delta-scaled row multipliers), and the KKT
  // systems lose roughly log10(1/delta) digits of accuracy. 1e-4 keeps both
  // margins comfortably for steps up to |dz| ~ 1e2 per round; smaller values
  // were observed to stall the iteration at t ~ 0.
  constexpr double delta = 1e-4;
  // Each proximal round can shrink the violation by ~(row gain)^2 / delta,
  // so a handful of rounds covers any plausibly scaled problem; the cap only
  // guards against cycling on adversarial geometry.
  constexpr int kMaxRounds = 50;

  Mat h1 = delta * Mat::Identity(n + 1, n + 1);
  Vec f1 = Vec::Zero(n + 1);
  f1(n) = 1.0;
  Mat c1(m + 1, n + 1);
  c1.setZero();
  c1.block(0, 0, m, n) = c_mat;
  c1.col(n).setConstant(-1.0);
  Vec c1_rhs(m + 1);
  c1_rhs(m) = 0.0;

  Eigen::LLT<Mat> h1_llt(h1);
  const int max_iter = opt.max_iter_factor * static_cast<int>(n + 1 + m + 1);

  Phase1Result out;
  Vec center = z0;
  double prev_t = std::numeric_limits<double>::infinity();
  for (int round = 0; round < kMaxRounds; ++round) {
    c1_rhs.head(m) = c_vec - c_mat * center;
    Vec start = Vec::Zero(n + 1);
    start(n) = std::max(0.0, max_violation(c_mat, c_vec, center)) + 1.0;
    LoopResult r = active_set_loop(h1_llt, h1, f1, c1, c1_rhs, start, {}, opt,
                                   max_iter, nullptr);
    out.iterations += r.iterations;
    out.converged = r.converged;
    center += r.z.head(n);
    const double t = r.z(n);
    if (!r.converged) break;
    if (t <= kPhase1Infeasible) {
      out.feasible = true;
      break;
    }
    // Stalled progress means the proximal fixed point is (numerically)
    // reached, and its t is the true minimax violation: infeasible.
    if (t > 0.99 * prev_t || t > prev_t - kPhase1Infeasible) break;
    prev_t = t;
  }
  out.z = std::move(center);
  return out;
}

} // namespace

QpSolution solve_qp(const QpProblem& problem, const QpOptions& options,
                    const QpWarmStart& warm) {
  const Index n = problem.n();
  const Index m = problem.m();
  require(n >= 1, "solve_qp: empty decision vector");
  require(problem.hessian.cols() == n, "solve_qp: hessian must be square");
  require(problem.linear.size() == n, "solve_qp: linear term dimension mismatch");
  require(problem.c_mat.cols() == n || m == 0, "solve_qp: constraint column mismatch");
  require(problem.c_vec.size() == m, "solve_qp: constraint rhs dimension mismatch");

  const double h_scale = std::max(1.0, problem.hessian.cwiseAbs().maxCoeff());
  if ((problem.hessian - problem.hessian.transpose()).cwiseAbs().maxCoeff() >
      1e-9 * h_scale)
    throw InvalidInput("solve_qp: hessian is not symmetric");
  const Mat h = 0.5 * (problem.hessian + problem.hessian.transpose());

  // Reject Hessians that are not positive definite with margin: the shifted
  // factorization succeeds only if the minimum eigenvalue exceeds the margin.
  Eigen::LLT<Mat> pd_probe(
      Mat(h - kMinEigenvalue * Mat::Identity(n, n)));
  if (pd_probe.info() != Eigen::Success)
    throw InvalidInput("solve_qp: hessian must be positive definite");
  Eigen::LLT<Mat> h_llt(h);
  if (h_llt.info() != Eigen::Success)
    throw InvalidInput("solve_qp: hessian factorization failed");

  QpSolution sol;
  const int max_iter = options.max_iter_factor * static_cast<int>(n + m);

  // Start point: warm candidate if it is already feasible, else phase 1.
  Vec z0 = Vec::Zero(n);
  if (warm.z && warm.z->size() == n) z0 = *warm.z;
  if (max_violation(problem.c_mat, problem.c_vec, z0) > options.tol_feas) {
    Phase1Result p1 = phase1(problem.c_mat, problem.c_vec, z0, options);
    sol.iterations += p1.iterations;
    if (!p1.converged) {
      sol.status = QpStatus::max_iterations;
      sol.z = std::move(p1.z);
      sol.objective = objective_of(h, problem.linear, sol.z);
      return sol;
    }
    if (!p1.feasible) {
      sol.status = QpStatus::infeasible;
      sol.z = std::move(p1.z);
      sol.objective = objective_of(h, problem.linear, sol.z);
      return sol;
    }
    z0 = std::move(p1.z);
  }

  // Seed the working set from the warm active set, keeping only rows that are
  // genuinely active at the start point; rank repair in the loop handles any
  // dependent leftovers.
  std::vector<Index> w0;
  for (Index i : warm.active_set) {
    if (i < 0 || i >= m) continue;
    if (std::abs(problem.c_mat.row(i).dot(z0) - problem.c_vec(i)) <= options.tol_feas)
      w0.push_back(i);
  }
  std::sort(w0.begin(), w0.end());
  w0.erase(std::unique(w0.begin(), w0.end()), w0.end());
  if (static_cast<Index>(w0.size()) > n) w0.resize(static_cast<size_t>(n));

  std::vector<double> trace;
  LoopResult r = active_set_loop(h_llt, h, problem.linear, problem.c_mat,
                                 problem.c_vec, std::move(z0), std::move(w0),
                                 options, max_iter,
                                 options.track_objective ? &trace : nullptr);
  sol.iterations += r.iterations;
  sol.z = std::move(r.z);
  sol.active_set = std::move(r.active);
  sol.status = r.converged ? QpStatus::optimal : QpStatus::max_iterations;
  sol.objective = objective_of(h, problem.linear, sol.z);
  sol.objective_trace = std::move(trace);
  return sol;
}

KktSolution solve_equality_kkt(const Mat& hessian, const Vec& linear,
                               const Mat& c_eq, const Vec& c_rhs) {
  const Index n = hessian.rows();
  require(hessian.cols() == n, "solve_equality_kkt: hessian must be square");
  require(linear.size() == n, "solve_equality_kkt: linear term dimension mismatch");
  require(c_eq.cols() == n || c_eq.rows() == 0,
          "solve_equality_kkt: constraint column mismatch");
  require(c_rhs.size() == c_eq.rows(), "solve_equality_kkt: rhs dimension mismatch");

  const Mat h = 0.5 * (hessian + hessian.transpose());
  Eigen::LLT<Mat> h_llt(h);
  if (h_llt.info() != Eigen::Success)
    throw InvalidInput("solve_equality_kkt: hessian must be positive definite");

  std::vector<Index> all(static_cast<size_t>(c_eq.rows()));
  for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<Index>(i);

  KktSolution out;
  if (!kkt_step(h_llt, h, linear, c_eq, c_rhs, all, out.z, out.mu))
    throw NumericalError("solve_equality_kkt: constraint rows are rank deficient");
  return out;
}

DareSolution solve_dare(const Mat& a, const Mat& b, const Mat& q, const Mat& r,
                        const DareOptions& options) {
  const Index n = a.rows();
  require(a.cols() == n, "solve_dare: A must be square");
  require(b.rows() == n, "solve_dare: B row count mismatch");
  require(q.rows() == n && q.cols() == n, "solve_dare: Q dimension mismatch");
  require(r.rows() == b.cols() && r.cols() == b.cols(),
          "solve_dare: R dimension mismatch");

  auto fixed_point_defect = [&](const Mat& p) {
    const Mat bpa = b.transpose() * p * a;
    const Mat g = r + b.transpose() * p * b;
    return Mat(a.transpose() * p * a - p -
               bpa.transpose() * Eigen::LLT<Mat>(g).solve(bpa) + q);
  };

  Mat p = 0.5 * (q + q.transpose());
  DareSolution out;
  for (int iter = 1; iter <= options.max_iter; ++iter) {
    out.iterations = iter;
    const Mat bp = b.transpose() * p;
    Eigen::LLT<Mat> g_llt(Mat(r + bp * b));
    if (g_llt.info() != Eigen::Success)
      throw NumericalError("solve_dare: R + B'PB lost positive definiteness");
    const Mat bpa = bp * a;
    Mat next = a.transpose() * p * a - bpa.transpose() * g_llt.solve(bpa) + q;
    next = 0.5 * (next + next.transpose()).eval();
    if (!next.allFinite()) throw NumericalError("solve_dare: iteration diverged");

    double change = (next - p).norm() / std::max(1.0, next.norm());
    p = std::move(next);
    if (change <= options.tol_rel) {
      // Converged. The iteration is linear, so a few more steps reach the
      // numerical floor almost for free; polish until the change stops
      // shrinking.
      for (int extra = 0; extra < 25 && change > 0.0; ++extra) {
        const Mat bp2 = b.transpose() * p;
        const Mat bpa2 = bp2 * a;
        Mat polished = a.transpose() * p * a -
                       bpa2.transpose() * Eigen::LLT<Mat>(Mat(r + bp2 * b)).solve(bpa2) + q;
        polished = 0.5 * (polished + polished.transpose()).eval();
        const double next_change =
            (polished - p).norm() / std::max(1.0, polished.norm());
        if (!polished.allFinite() || next_change >= change) break;
        p = std::move(polished);
        change = next_change;
        ++out.iterations;
      }
      out.p = p;
      out.residual = fixed_point_defect(p).norm() / std::max(1.0, p.norm());
      return out;
    }
  }

  const double residual = fixed_point_defect(p).norm() / std::max(1.0, p.norm());
  std::ostringstream msg;
  msg << "solve_dare: no convergence after " << options.max_iter
      << " iterations (relative residual " << residual << ")";
  throw NumericalError(msg.str());
}

} // namespace platoon_mpc
