#pragma once

// Linear solvers for the assembled saddle-point system and the post-hoc
// recovery of cavity boundary constants.
//
// The direct path is an LU factorization with pivoting (UMFPACK, 64-bit
// indices, METIS fill-reducing ordering). The iterative path is a
// preconditioned MINRES with a positive diagonal preconditioner.

#include "pdwg/assembly.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

extern "C" {
#include <umfpack.h>
}

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdwg {

enum class SolverMethod { Auto, Direct, Minres };

inline std::string to_string(SolverMethod m) {
  switch (m) {
    case SolverMethod::Auto: return "auto";
    case SolverMethod::Direct: return "direct";
    case SolverMethod::Minres: return "minres";
  }
  return "?";
}

inline SolverMethod parse_solver_method(const std::string& s) {
  if (s == "auto") return SolverMethod::Auto;
  if (s == "direct") return SolverMethod::Direct;
  if (s == "minres") return SolverMethod::Minres;
  throw std::invalid_argument("unknown solver method '" + s + "' (expected auto, direct or minres)");
}

struct SolverOptions {
  SolverMethod method = SolverMethod::Auto;
  std::optional<double> tol;  // default 1e-10 direct, 1e-8 MINRES
  int max_iter = 50000;
  Index direct_limit = 500000;  // Auto switches to MINRES above this many free entries
};

struct SolverStats {
  SolverMethod method = SolverMethod::Direct;
  double relative_residual = 0.0;
  int iterations = 0;               // MINRES iterations, 0 for the direct path
  std::vector<double> residual_history;  // MINRES relative residual estimates
  double factor_nonzeros = 0.0;     // nnz(L) + nnz(U)
  double factor_peak_mb = 0.0;
};

struct SolverError : std::runtime_error {
  enum class Kind { InvalidInput, Singular, OutOfMemory, Inaccurate, Breakdown, NotConverged };
  Kind kind;
  std::string location;  // zero-pivot location when known
  std::vector<double> residual_history;

  SolverError(Kind k, const std::string& msg, std::string loc = {}, std::vector<double> hist = {})
      : std::runtime_error(msg), kind(k), location(std::move(loc)), residual_history(std::move(hist)) {}
};

struct SolutionFields {
  Vector raw;  // all raw entries, constrained ones at their constraint values
  std::vector<Vec3> u;
  std::vector<double> s0, sb, lambda0, lambdab;
  std::vector<Vec3> q0;
  std::vector<Eigen::Vector2d> qb;
  SolverStats stats;
};

inline SolutionFields unpack_solution(const DofMap& dofs, Vector raw, SolverStats stats = {}) {
  if (raw.size() != dofs.total) throw std::invalid_argument("unpack_solution: size mismatch");
  SolutionFields s;
  s.u.resize(dofs.num_tets);
  s.q0.resize(dofs.num_tets);
  s.s0.resize(dofs.num_tets);
  s.lambda0.resize(dofs.num_tets);
  for (Index t = 0; t < dofs.num_tets; ++t) {
    s.u[t] = raw.segment<3>(dofs.u(t, 0));
    s.q0[t] = raw.segment<3>(dofs.q0(t, 0));
    s.s0[t] = raw[dofs.s0(t)];
    s.lambda0[t] = raw[dofs.lambda0(t)];
  }
  s.sb.resize(dofs.num_faces);
  s.lambdab.resize(dofs.num_faces);
  s.qb.resize(dofs.num_faces);
  for (Index f = 0; f < dofs.num_faces; ++f) {
    s.sb[f] = raw[dofs.sb(f)];
    s.lambdab[f] = raw[dofs.lambdab(f)];
    s.qb[f] = raw.segment<2>(dofs.qb(f, 0));
  }
  s.raw = std::move(raw);
  s.stats = std::move(stats);
  return s;
}

namespace detail {

using LongSparse = Eigen::SparseMatrix<double, Eigen::ColMajor, SuiteSparse_long>;

inline std::string umfpack_status_name(SuiteSparse_long status) {
  switch (status) {
    case UMFPACK_OK: return "ok";
    case UMFPACK_WARNING_singular_matrix: return "singular matrix";
    case UMFPACK_ERROR_out_of_memory: return "out of memory";
    case UMFPACK_ERROR_invalid_matrix: return "invalid matrix";
    case UMFPACK_ERROR_ordering_failed: return "ordering failed";
    default: return "status " + std::to_string(status);
  }
}

/// Owns UMFPACK symbolic/numeric objects for one matrix.
class UmfpackLU {
 public:
  explicit UmfpackLU(LongSparse A) : A_(std::move(A)) {
    umfpack_dl_defaults(control_.data());
    control_[UMFPACK_ORDERING] = UMFPACK_ORDERING_METIS;
    control_[UMFPACK_IRSTEP] = 3;
    const auto n = static_cast<SuiteSparse_long>(A_.rows());
    SuiteSparse_long st = umfpack_dl_symbolic(n, n, A_.outerIndexPtr(), A_.innerIndexPtr(),
                                              A_.valuePtr(), &symbolic_, control_.data(), info_.data());
    if (st == UMFPACK_ERROR_ordering_failed) {
      control_[UMFPACK_ORDERING] = UMFPACK_ORDERING_AMD;
      st = umfpack_dl_symbolic(n, n, A_.outerIndexPtr(), A_.innerIndexPtr(), A_.valuePtr(),
                               &symbolic_, control_.data(), info_.data());
    }
    if (st != UMFPACK_OK)
      throw SolverError(st == UMFPACK_ERROR_out_of_memory ? SolverError::Kind::OutOfMemory
                                                          : SolverError::Kind::InvalidInput,
                        "direct solver: symbolic analysis failed (" + umfpack_status_name(st) + ")");
    status_ = umfpack_dl_numeric(A_.outerIndexPtr(), A_.innerIndexPtr(), A_.valuePtr(), symbolic_,
                                 &numeric_, control_.data(), info_.data());
  }
  UmfpackLU(const UmfpackLU&) = delete;
  UmfpackLU& operator=(const UmfpackLU&) = delete;
  ~UmfpackLU() {
    if (numeric_) umfpack_dl_free_numeric(&numeric_);
    if (symbolic_) umfpack_dl_free_symbolic(&symbolic_);
  }

  [[nodiscard]] SuiteSparse_long status() const { return status_; }
  [[nodiscard]] double factor_nonzeros() const { return info_[UMFPACK_LNZ] + info_[UMFPACK_UNZ]; }
  [[nodiscard]] double peak_mb() const {
    return info_[UMFPACK_PEAK_MEMORY] * info_[UMFPACK_SIZE_OF_UNIT] / 1e6;
  }

  /// Column (in the factored matrix) of the smallest |U_kk|, or -1.
  [[nodiscard]] SuiteSparse_long zero_pivot_column() const {
    if (!numeric_) return -1;
    const auto n = A_.rows();
    std::vector<SuiteSparse_long> Q(n);
    std::vector<double> D(n);
    if (umfpack_dl_get_numeric(nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr,
                               Q.data(), D.data(), nullptr, nullptr, numeric_) != UMFPACK_OK)
      return -1;
    SuiteSparse_long k = 0;
    for (SuiteSparse_long i = 1; i < n; ++i)
      if (std::abs(D[i]) < std::abs(D[k])) k = i;
    return Q[k];
  }

  [[nodiscard]] Vector solve(const Vector& b) {
    Vector x(b.size());
    const SuiteSparse_long st =
        umfpack_dl_solve(UMFPACK_A, A_.outerIndexPtr(), A_.innerIndexPtr(), A_.valuePtr(), x.data(),
                         b.data(), numeric_, control_.data(), info_.data());
    if (st != UMFPACK_OK && st != UMFPACK_WARNING_singular_matrix)
      throw SolverError(SolverError::Kind::InvalidInput,
                        "direct solver: solve failed (" + umfpack_status_name(st) + ")");
    return x;
  }

 private:
  LongSparse A_;
  std::array<double, UMFPACK_CONTROL> control_{};
  std::array<double, UMFPACK_INFO> info_{};
  void* symbolic_ = nullptr;
  void* numeric_ = nullptr;
  SuiteSparse_long status_ = UMFPACK_OK;
};

inline double relative_residual(const SparseMatrix& A, const Vector& x, const Vector& b) {
  const double nb = b.norm();
  const double nr = (b - A * x).norm();
  return nb > 0.0 ? nr / nb : nr;
}

}  // namespace detail

/// Solve A x = b on the free entries with the direct LU path.
inline Vector solve_direct(const SparseMatrix& A, const Vector& b, double tol, SolverStats& stats,
                           const DofMap* dofs = nullptr) {
  stats.method = SolverMethod::Direct;
  if (b.norm() == 0.0) {
    stats.relative_residual = 0.0;
    return Vector::Zero(b.size());
  }
  detail::UmfpackLU lu{detail::LongSparse(A)};
  stats.factor_nonzeros = lu.factor_nonzeros();
  stats.factor_peak_mb = lu.peak_mb();
  if (lu.status() == UMFPACK_WARNING_singular_matrix) {
    const auto col = lu.zero_pivot_column();
    std::string where = "column " + std::to_string(col);
    if (dofs && col >= 0 && col < dofs->num_free()) where = dofs->describe(dofs->free_to_raw[col]);
    throw SolverError(SolverError::Kind::Singular,
                      "direct solver: singular factorization, zero pivot at " + where, where);
  }
  if (lu.status() != UMFPACK_OK)
    throw SolverError(lu.status() == UMFPACK_ERROR_out_of_memory ? SolverError::Kind::OutOfMemory
                                                                 : SolverError::Kind::InvalidInput,
                      "direct solver: numeric factorization failed (" +
                          detail::umfpack_status_name(lu.status()) + ")");
  Vector x = lu.solve(b);
  // Extra refinement sweeps beyond UMFPACK's own, kept only while they help.
  double rel = detail::relative_residual(A, x, b);
  for (int step = 0; step < 3 && rel > 0.1 * tol; ++step) {
    const Vector candidate = x + lu.solve(b - A * x);
    const double r = detail::relative_residual(A, candidate, b);
    if (!(r < rel)) break;
    x = candidate;
    rel = r;
  }
  stats.relative_residual = rel;
  if (!(rel <= tol))
    throw SolverError(SolverError::Kind::Inaccurate,
                      "direct solver: relative residual " + std::to_string(rel) +
                          " exceeds tolerance " + std::to_string(tol) +
                          " (if the BLAS kernels are suspect, try OPENBLAS_CORETYPE=Haswell)");
  return x;
}

/// Positive diagonal for MINRES: |A_ii| where nonzero, otherwise the Schur
/// estimate sum_j A_ij^2 / |A_jj| over neighbours with nonzero diagonal.
inline Vector minres_diagonal(const SparseMatrix& A) {
  const Index n = static_cast<Index>(A.rows());
  Vector d = A.diagonal().cwiseAbs();
  const double floor = 1e-12 * std::max(1.0, d.maxCoeff());
  Vector schur = Vector::Zero(n);
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) {
      const Index i = static_cast<Index>(it.row()), j = static_cast<Index>(it.col());
      if (i != j && d[j] > floor) schur[i] += it.value() * it.value() / d[j];
    }
  for (Index i = 0; i < n; ++i)
    if (!(d[i] > floor)) d[i] = std::max(schur[i], floor);
  return d;
}

/// Preconditioned MINRES (Paige-Saunders recurrences) with M = diag(d).
inline Vector solve_minres(const SparseMatrix& A, const Vector& b, double tol, int max_iter,
                           SolverStats& stats) {
  if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("solve_minres: tol must lie in (0,1)");
  stats.method = SolverMethod::Minres;
  stats.residual_history.clear();
  const Index n = static_cast<Index>(b.size());
  Vector x = Vector::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    stats.relative_residual = 0.0;
    return x;
  }
  const Vector dinv = minres_diagonal(A).cwiseInverse();

  Vector r1 = b;
  Vector y = dinv.cwiseProduct(r1);
  double beta1 = r1.dot(y);
  if (!(beta1 > 0.0)) throw SolverError(SolverError::Kind::Breakdown, "MINRES: preconditioner is not positive");
  beta1 = std::sqrt(beta1);
  Vector r2 = r1, w = Vector::Zero(n), w1(n), w2 = Vector::Zero(n), v(n);
  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1, cs = -1.0, sn = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();

  for (int itn = 1; itn <= max_iter; ++itn) {
    v = y / beta;
    y = A * v;
    if (itn >= 2) y -= (beta / oldb) * r1;
    const double alfa = v.dot(y);
    y -= (alfa / beta) * r2;
    r1 = r2;
    r2 = y;
    y = dinv.cwiseProduct(r2);
    oldb = beta;
    const double bb = r2.dot(y);
    if (bb < 0.0) throw SolverError(SolverError::Kind::Breakdown, "MINRES: preconditioner is not positive",
                                    {}, stats.residual_history);
    beta = std::sqrt(bb);
    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const double gamma = std::max(std::hypot(gbar, beta), eps);
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;
    w1 = w2;
    w2 = w;
    w = (v - oldeps * w1 - delta * w2) / gamma;
    x += phi * w;

    stats.residual_history.push_back(phibar / beta1);
    stats.iterations = itn;
    const bool check = phibar / beta1 <= tol || itn % 200 == 0 || beta == 0.0 || itn == max_iter;
    if (check) {
      const double rel = detail::relative_residual(A, x, b);
      stats.relative_residual = rel;
      if (rel <= tol) return x;
      if (beta == 0.0)
        throw SolverError(SolverError::Kind::Breakdown,
                          "MINRES: Lanczos breakdown at iteration " + std::to_string(itn), {},
                          stats.residual_history);
    }
  }
  throw SolverError(SolverError::Kind::NotConverged,
                    "MINRES: no convergence in " + std::to_string(max_iter) +
                        " iterations (relative residual " + std::to_string(stats.relative_residual) + ")",
                    {}, stats.residual_history);
}

/// Solve the free system and return all raw fields (cavity s_b still zero).
inline SolutionFields solve(const GlobalSystem& sys, const SolverOptions& opt = {}) {
  SolverMethod m = opt.method;
  if (m == SolverMethod::Auto)
    m = sys.dofs.num_free() <= opt.direct_limit ? SolverMethod::Direct : SolverMethod::Minres;
  SolverStats stats;
  Vector x;
  if (m == SolverMethod::Direct) {
    x = solve_direct(sys.A, sys.F, opt.tol.value_or(1e-10), stats, &sys.dofs);
  } else {
    x = solve_minres(sys.A, sys.F, opt.tol.value_or(1e-8), opt.max_iter, stats);
  }
  return unpack_solution(sys.dofs, sys.expand_to_raw(x), std::move(stats));
}

struct CavityRecovery {
  std::vector<double> constants;  // c_i, one per cavity component
  double residual_before = 0.0;   // ||A x - F|| over free and cavity rows
  double residual_after = 0.0;
  bool rank_deficient = false;
};

/// c = argmin_a ||A (x + sum_i a_i S_i) - F|| over the free and cavity rows,
/// then s_b on each cavity is set to c_i.
inline CavityRecovery recover_cavity_constants(const GlobalSystem& sys, SolutionFields& fields) {
  CavityRecovery out;
  const auto L = static_cast<Index>(sys.indicators.size());
  const DofMap& dofs = sys.dofs;
  std::vector<char> row_used(dofs.total, 0);
  for (Index i = 0; i < dofs.total; ++i) row_used[i] = !dofs.constrained[i];
  for (const auto& group : dofs.cavity_sb)
    for (Index i : group) row_used[i] = 1;
  auto masked = [&](Vector v) {
    for (Index i = 0; i < dofs.total; ++i)
      if (!row_used[i]) v[i] = 0.0;
    return v;
  };

  const Vector r = masked(sys.F_full - sys.A_full * fields.raw);
  out.residual_before = r.norm();
  out.residual_after = out.residual_before;
  if (L == 0) return out;

  Eigen::MatrixXd AS(dofs.total, L);
  for (Index i = 0; i < L; ++i) AS.col(i) = masked(sys.A_full * sys.indicators[i]);
  const Eigen::MatrixXd G = AS.transpose() * AS;
  const Eigen::VectorXd rhs = AS.transpose() * r;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G);
  const double emax = eig.eigenvalues().cwiseAbs().maxCoeff();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(L);
  if (!(emax > 0.0) || eig.eigenvalues().minCoeff() <= 1e-13 * emax) {
    out.rank_deficient = true;
  } else {
    c = G.ldlt().solve(rhs);
  }
  for (Index i = 0; i < L; ++i) {
    out.constants.push_back(c[i]);
    fields.raw += c[i] * sys.indicators[i];
  }
  out.residual_after = masked(sys.F_full - sys.A_full * fields.raw).norm();
  fields = unpack_solution(dofs, fields.raw, fields.stats);
  return out;
}

}  // namespace pdwg
