#include "platoon_mpc/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "platoon_mpc/costfn.hpp"

namespace platoon_mpc {

Mat matrix_exponential(const Mat& a) {
  require(a.rows() == a.cols(), "matrix_exponential: square matrix required");
  return a.exp();
}

VehicleDiscrete discretize_by_expm(double tau, double dt) {
  require(tau > 0.0, "discretize_by_expm: tau must be > 0");
  require(dt > 0.0, "discretize_by_expm: dt must be > 0");
  Mat aug = Mat::Zero(4, 4);
  aug(0, 1) = 1.0;
  aug(1, 2) = 1.0;
  aug(2, 2) = -1.0 / tau;
  aug(2, 3) = 1.0 / tau;
  const Mat e = matrix_exponential(aug * dt);
  VehicleDiscrete vd;
  vd.a = e.topLeftCorner(3, 3);
  vd.b = e.topRightCorner(3, 1);
  vd.dt = dt;
  return vd;
}

EnumeratedQp solve_qp_by_enumeration(const QpProblem& problem, double tol_feas) {
  const Index n = problem.n();
  const Index m = problem.m();
  require(m <= 16, "solve_qp_by_enumeration: too many rows to enumerate");

  const auto objective = [&](const Vec& z) {
    return 0.5 * z.dot(problem.hessian * z) + problem.linear.dot(z);
  };
  const auto feasible = [&](const Vec& z) {
    if (m == 0) return true;
    return ((problem.c_mat * z - problem.c_vec).array() <= tol_feas).all();
  };

  EnumeratedQp best;
  for (std::uint32_t subset = 0; subset < (1u << m); ++subset) {
    std::vector<Index> rows;
    for (Index i = 0; i < m; ++i)
      if (subset & (1u << i)) rows.push_back(i);
    if (static_cast<Index>(rows.size()) > n) continue;

    Vec z;
    if (rows.empty()) {
      z = problem.hessian.llt().solve(-problem.linear);
    } else {
      const Index w = static_cast<Index>(rows.size());
      Mat kkt = Mat::Zero(n + w, n + w);
      kkt.topLeftCorner(n, n) = problem.hessian;
      Vec rhs(n + w);
      rhs.head(n) = -problem.linear;
      for (Index i = 0; i < w; ++i) {
        kkt.block(n + i, 0, 1, n) = problem.c_mat.row(rows[static_cast<size_t>(i)]);
        kkt.block(0, n + i, n, 1) =
            problem.c_mat.row(rows[static_cast<size_t>(i)]).transpose();
        rhs(n + i) = problem.c_vec(rows[static_cast<size_t>(i)]);
      }
      Eigen::FullPivLU<Mat> lu(kkt);
      if (!lu.isInvertible()) continue; // dependent candidate rows
      const Vec sol = lu.solve(rhs);
      z = sol.head(n);
      // Dual feasibility: stationarity is H z + f + C_W' mu = 0, and the
      // KKT system is assembled in exactly that convention, so the tail of
      // the solve is mu itself.
      bool dual_ok = true;
      for (Index i = 0; i < w; ++i)
        if (sol(n + i) < -1e-9) dual_ok = false;
      if (!dual_ok) continue;
    }
    if (!feasible(z)) continue;
    const double obj = objective(z);
    if (!best.feasible || obj < best.objective) {
      best.feasible = true;
      best.z = z;
      best.objective = obj;
    }
  }
  return best;
}

namespace {

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}

  double uniform() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  Index integer(Index lo, Index hi) { // inclusive
    return lo + static_cast<Index>(gen() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  Vec vector(Index n, double lo, double hi) {
    Vec v(n);
    for (Index i = 0; i < n; ++i) v(i) = uniform(lo, hi);
    return v;
  }
};

std::string detail_max(const char* what, double value, const char* extra = "") {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s %.3g%s", what, value, extra);
  return buf;
}

CheckResult check_discretization(bool inject_fault) {
  const double taus[] = {0.2, 0.3, 0.5, 0.6, 1.0};
  const double dts[] = {0.1, 0.25, 0.5, 0.75, 1.0};
  double worst = 0.0;
  for (double tau : taus) {
    for (double dt : dts) {
      const VehicleDiscrete closed = discretize_vehicle({tau, 4.0, 2.0, 1.0}, dt);
      const VehicleDiscrete oracle = discretize_by_expm(tau, dt);
      worst = std::max(worst, (closed.a - oracle.a).cwiseAbs().maxCoeff());
      worst = std::max(worst, (closed.b - oracle.b).cwiseAbs().maxCoeff());
    }
  }
  if (inject_fault) worst += 1e-6;
  return {"discretization-closed-form-vs-expm", worst <= 1e-9,
          detail_max("max elementwise error", worst, " over 25 grid points")};
}

CheckResult check_cost_equivalence(Rng& rng) {
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index m = rng.integer(1, 4);
    const Index n = rng.integer(1, 4);
    CostWeights w;
    w.q1 = rng.uniform(0.0, 2.0);
    w.q2 = rng.uniform(0.0, 2.0);
    w.q3 = rng.uniform(0.0, 2.0);
    w.q4 = rng.uniform(0.0, 2.0);
    w.r = rng.uniform(0.1, 3.0);
    std::vector<double> headways(static_cast<size_t>(m));
    for (double& h : headways) h = rng.uniform(0.5, 2.0);

    std::vector<Vec> errors(static_cast<size_t>(n) + 1);
    for (auto& e : errors) e = rng.vector(3 * m, -2.0, 2.0);
    const Vec delta_u = rng.vector(m * n, -1.0, 1.0);
    const Mat half = Mat::NullaryExpr(3 * m, 3 * m,
                                      [&](Index, Index) { return rng.uniform(-1.0, 1.0); });
    const Mat p_terminal = half.transpose() * half;

    const double j_sum = cost_sum_form(errors, delta_u, w, headways, p_terminal);

    const Mat q_stage = stage_penalty(w, headways);
    double j_matrix = 0.0;
    for (Index j = 0; j < n; ++j) {
      const Vec& e = errors[static_cast<size_t>(j)];
      j_matrix += e.dot(q_stage * e);
    }
    const Vec& e_n = errors[static_cast<size_t>(n)];
    j_matrix += e_n.dot(p_terminal * e_n);
    j_matrix += w.r * delta_u.squaredNorm();

    worst = std::max(worst, std::abs(j_sum - j_matrix) / (1.0 + std::abs(j_sum)));
  }
  return {"stage-cost-sum-vs-matrix", worst <= 1e-9,
          detail_max("max relative gap", worst, " over 50 instances")};
}

CheckResult check_qp_oracle(Rng& rng) {
  double worst_dist = 0.0;
  double worst_gap = 0.0;
  std::string failure;

  for (int trial = 0; trial < 40 && failure.empty(); ++trial) {
    const Index n = rng.integer(2, 4);
    const Index m = rng.integer(0, 8);
    QpProblem p;
    const Mat f_half = Mat::NullaryExpr(n, n, [&](Index, Index) { return rng.uniform(-1.0, 1.0); });
    p.hessian = f_half.transpose() * f_half + (0.3 + rng.uniform()) * Mat::Identity(n, n);
    p.linear = rng.vector(n, -2.0, 2.0);
    const Vec z0 = rng.vector(n, -1.0, 1.0);
    p.c_mat = Mat::NullaryExpr(m, n, [&](Index, Index) { return rng.uniform(-1.0, 1.0); });
    p.c_vec = Vec(m);
    for (Index i = 0; i < m; ++i) {
      const double slack = rng.uniform() < 0.3 ? 0.0 : rng.uniform(0.0, 1.5);
      p.c_vec(i) = p.c_mat.row(i).dot(z0) + slack;
    }

    const QpSolution sol = solve_qp(p);
    const EnumeratedQp oracle = solve_qp_by_enumeration(p);
    if (sol.status != QpStatus::optimal || !oracle.feasible) {
      failure = "constructed-feasible problem not solved to optimality";
      break;
    }
    worst_dist = std::max(worst_dist, (sol.z - oracle.z).cwiseAbs().maxCoeff());
    worst_gap = std::max(worst_gap,
                         std::abs(sol.objective - oracle.objective) /
                             (1.0 + std::abs(oracle.objective)));
  }

  // Contradictory half-spaces must be reported as infeasible by both paths.
  for (int trial = 0; trial < 3 && failure.empty(); ++trial) {
    const Index n = rng.integer(1, 3);
    QpProblem p;
    p.hessian = Mat::Identity(n, n) * (1.0 + rng.uniform());
    p.linear = rng.vector(n, -1.0, 1.0);
    p.c_mat = Mat::Zero(2, n);
    p.c_mat(0, 0) = 1.0;
    p.c_mat(1, 0) = -1.0;
    p.c_vec = Vec(2);
    p.c_vec << -1.0, -1.0; // x <= -1 and x >= 1
    if (solve_qp(p).status != QpStatus::infeasible)
      failure = "contradictory constraints not flagged infeasible";
    else if (solve_qp_by_enumeration(p).feasible)
      failure = "enumeration oracle accepted an infeasible problem";
  }

  if (!failure.empty()) return {"qp-active-set-vs-enumeration", false, failure};
  const bool pass = worst_dist <= 1e-7 && worst_gap <= 1e-9;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "max solution distance %.3g, max objective gap %.3g",
                worst_dist, worst_gap);
  return {"qp-active-set-vs-enumeration", pass, buf};
}

CheckResult check_riccati() {
  // Scalar closed form: a=0.5, b=1, q=1, r=1 gives the fixed point
  // p = 0.25 p - 0.25 p^2/(1+p) + 1, i.e. 4p^2 - p - 4 = 0.
  const double expected = (1.0 + std::sqrt(65.0)) / 8.0;
  const Mat a = Mat::Constant(1, 1, 0.5);
  const Mat b = Mat::Constant(1, 1, 1.0);
  const Mat q = Mat::Identity(1, 1);
  const Mat r = Mat::Identity(1, 1);
  const DareSolution scalar = solve_dare(a, b, q, r);
  double worst = std::abs(scalar.p(0, 0) - expected);

  // Zero input column: the fixed point degenerates to the Lyapunov limit
  // p = q / (1 - a^2).
  const Mat a2 = Mat::Constant(1, 1, 0.8);
  const Mat b2 = Mat::Zero(1, 1);
  const DareSolution lyap = solve_dare(a2, b2, q, r);
  worst = std::max(worst, std::abs(lyap.p(0, 0) - 1.0 / (1.0 - 0.64)));

  return {"riccati-fixed-point", worst <= 1e-10,
          detail_max("max closed-form deviation", worst)};
}

} // namespace

std::vector<CheckResult> validate_all(std::uint64_t seed, bool inject_fault) {
  Rng rng(seed);
  std::vector<CheckResult> results;
  results.push_back(check_discretization(inject_fault));
  results.push_back(check_cost_equivalence(rng));
  results.push_back(check_qp_oracle(rng));
  results.push_back(check_riccati());
  return results;
}

} // namespace platoon_mpc
