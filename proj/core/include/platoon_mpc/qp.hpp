#pragma once

#include <optional>
#include <vector>

#include "platoon_mpc/types.hpp"

namespace platoon_mpc {

/// Dense strictly convex quadratic program
///   minimize    0.5 z' H z + f' z
///   subject to  C z <= c
/// H must be symmetric positive definite; C may have zero rows.
struct QpProblem {
  Mat hessian;    ///< n x n, symmetric PD
  Vec linear;     ///< n
  Mat c_mat;      ///< m x n inequality rows
  Vec c_vec;      ///< m right-hand sides

  Index n() const { return hessian.rows(); }
  Index m() const { return c_mat.rows(); }
};

enum class QpStatus {
  optimal,
  infeasible,
  max_iterations,
};

const char* to_string(QpStatus status);

struct QpOptions {
  double tol_feas = 1e-8;    ///< feasibility tolerance on C z - c
  double tol_kkt = 1e-6;     ///< dual feasibility tolerance on multipliers
  double tol_step = 1e-12;   ///< step-size floor treated as "no move"
  int max_iter_factor = 50;  ///< iteration cap = factor * (n + m)
  bool track_objective = false; ///< record the objective after every iterate
};

struct QpSolution {
  Vec z;
  std::vector<Index> active_set; ///< row indices active at the solution, ascending
  int iterations = 0;
  QpStatus status = QpStatus::optimal;
  double objective = 0.0;
  std::vector<double> objective_trace; ///< filled when options.track_objective
};

/// Optional warm start: a candidate point and/or a guess of the active rows.
struct QpWarmStart {
  std::optional<Vec> z;
  std::vector<Index> active_set;
};

/// Primal active-set solver for strictly convex inequality-constrained QPs.
///
/// A feasible start is found with an internal phase-1 subproblem that
/// minimizes the maximum constraint violation; ties in the add/drop rules are
/// broken toward the lowest row index so repeated solves are bit-identical.
/// Throws InvalidParameter on dimension mismatches and InvalidInput if the
/// Hessian is asymmetric beyond 1e-9 or has minimum eigenvalue <= 1e-10.
QpSolution solve_qp(const QpProblem& problem, const QpOptions& options = {},
                    const QpWarmStart& warm = {});

/// Solve the equality-constrained QP
///   minimize 0.5 z' H z + f' z  subject to  C z = c
/// via a Schur-complement factorization. The multipliers satisfy
/// H z + f + C' mu = 0. Throws NumericalError if C is row-rank deficient.
struct KktSolution {
  Vec z;
  Vec mu;
};
KktSolution solve_equality_kkt(const Mat& hessian, const Vec& linear,
                               const Mat& c_eq, const Vec& c_rhs);

struct DareOptions {
  double tol_rel = 1e-10; ///< relative Frobenius change stopping threshold
  int max_iter = 10000;
};

struct DareSolution {
  Mat p;           ///< stabilizing solution, symmetric PSD
  int iterations = 0;
  double residual = 0.0; ///< relative Frobenius norm of the fixed-point defect
};

/// Discrete-time algebraic Riccati equation solved by the fixed-point
/// iteration P <- A'PA - A'PB (R + B'PB)^-1 B'PA + Q starting at P = Q.
/// Throws NumericalError when the iteration fails to converge within
/// options.max_iter (the message reports the final residual).
DareSolution solve_dare(const Mat& a, const Mat& b, const Mat& q, const Mat& r,
                        const DareOptions& options = {});

} // namespace platoon_mpc
