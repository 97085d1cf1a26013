#pragma once

// Unpreconditioned conjugate gradients on flat sample vectors.

#include <cmath>
#include <vector>

namespace dns::detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

struct CgOutcome {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Solves A x = b for symmetric positive (semi)definite A, starting from x.
/// `apply(in, out)` writes A * in into out. Stops at ||r|| <= rel_tol * ||b||.
template <class Apply>
CgOutcome conjugate_gradient(Apply&& apply, const std::vector<double>& b, std::vector<double>& x,
                             double rel_tol, int max_iters) {
  CgOutcome out;
  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) {
    x.assign(b.size(), 0.0);
    out.converged = true;
    return out;
  }
  std::vector<double> r(b.size()), p, Ap(b.size());
  apply(x, Ap);
  for (std::size_t k = 0; k < b.size(); ++k) r[k] = b[k] - Ap[k];
  p = r;
  double rr = dot(r, r);
  const double target = rel_tol * bnorm;
  while (std::sqrt(rr) > target && out.iterations < max_iters) {
    apply(p, Ap);
    const double pAp = dot(p, Ap);
    if (!(pAp > 0.0)) break;
    const double alpha = rr / pAp;
    for (std::size_t k = 0; k < b.size(); ++k) {
      x[k] += alpha * p[k];
      r[k] -= alpha * Ap[k];
    }
    const double rr_next = dot(r, r);
    const double beta = rr_next / rr;
    rr = rr_next;
    for (std::size_t k = 0; k < b.size(); ++k) p[k] = r[k] + beta * p[k];
    ++out.iterations;
  }
  out.relative_residual = std::sqrt(rr) / bnorm;
  out.converged = std::sqrt(rr) <= target;
  return out;
}

}  // namespace dns::detail
