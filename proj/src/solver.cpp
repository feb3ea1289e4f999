#include "wsample/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wsample/errors.hpp"
#include "wsample/linalg.hpp"
#include "wsample/parallel.hpp"
#include "wsample/rng.hpp"

namespace wsample {

namespace {

constexpr std::size_t kMaxPaths = 10'000'000;

}  // namespace

StartSystem::StartSystem(std::vector<int> degs, std::uint64_t seed) : degrees(std::move(degs)) {
  for (int d : degrees)
    if (d < 1) throw InputError("start system degrees must be positive");
  Rng rng(seed);
  constants = random_unit_circle(static_cast<Eigen::Index>(degrees.size()), rng);
  gamma = rng.unit_circle();
}

std::size_t StartSystem::num_paths() const {
  std::size_t total = 1;
  for (int d : degrees) {
    if (total > kMaxPaths / static_cast<std::size_t>(d)) throw InputError("too many start paths");
    total *= static_cast<std::size_t>(d);
  }
  return total;
}

ComplexVector StartSystem::root(std::size_t index) const {
  const auto n = static_cast<Eigen::Index>(degrees.size());
  ComplexVector x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto d = static_cast<std::size_t>(degrees[i]);
    const std::size_t j = index % d;
    index /= d;
    const double theta = (std::arg(constants[i]) + 2.0 * std::numbers::pi * static_cast<double>(j)) /
                         static_cast<double>(d);
    x[i] = std::polar(1.0, theta);
  }
  return x;
}

ComplexVector StartSystem::evaluate(const ComplexVector& x) const {
  ComplexVector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) g[i] = std::pow(x[i], degrees[i]) - constants[i];
  return g;
}

ComplexVector StartSystem::jacobian_diagonal(const ComplexVector& x) const {
  ComplexVector dg(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    dg[i] = static_cast<double>(degrees[i]) * std::pow(x[i], degrees[i] - 1);
  return dg;
}

std::string to_string(PathStatus status) {
  switch (status) {
    case PathStatus::converged: return "converged";
    case PathStatus::diverged: return "diverged";
    case PathStatus::failed: return "failed";
  }
  return "unknown";
}

std::vector<ComplexVector> SolveReport::solutions() const {
  std::vector<ComplexVector> out;
  for (const auto& p : paths)
    if (p.status == PathStatus::converged) out.push_back(p.endpoint);
  return out;
}

int SolveReport::count(PathStatus status) const {
  return static_cast<int>(std::count_if(paths.begin(), paths.end(), [&](const auto& p) { return p.status == status; }));
}

namespace {

struct Homotopy {
  const PolySystem& F;
  const StartSystem& G;

  void eval(const ComplexVector& x, double t, ComplexVector& value, ComplexMatrix& jac) const {
    ComplexVector fv;
    ComplexMatrix fj;
    evaluate_with_jacobian(F, x, fv, fj);
    const Complex a = (1.0 - t) * G.gamma;
    value = a * G.evaluate(x) + t * fv;
    jac = t * fj;
    jac.diagonal() += a * G.jacobian_diagonal(x);
  }

  /// dH/dt = F(x) - gamma G(x).
  ComplexVector dt(const ComplexVector& x) const { return evaluate(F, x) - G.gamma * G.evaluate(x); }
};

/// Corrector along the path: Newton on H(., t) with a contraction check. Returns the
/// number of iterations, or -1 on failure.
int correct(const Homotopy& H, ComplexVector& x, double t, int max_iter) {
  ComplexVector value;
  ComplexMatrix jac;
  double previous = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= max_iter; ++it) {
    H.eval(x, t, value, jac);
    ComplexVector dx;
    try {
      dx = lu_solve(jac, -value);
    } catch (const SingularError&) {
      return -1;
    }
    x += dx;
    const double size = dx.norm();
    if (!std::isfinite(size) || size > 0.5 * previous) return -1;
    if (size <= 1e-9 * (1.0 + x.norm())) return it;
    previous = size;
  }
  return -1;
}

/// Newton on F at t = 1 until the update stalls; keeps the best iterate.
int refine(const PolySystem& F, ComplexVector& x, double& residual) {
  ComplexVector value;
  ComplexMatrix jac;
  evaluate_with_jacobian(F, x, value, jac);
  residual = value.norm();
  int iterations = 0;
  for (int it = 0; it < 10; ++it) {
    ComplexVector dx;
    try {
      dx = lu_solve(jac, -value);
    } catch (const SingularError&) {
      break;
    }
    const ComplexVector next = x + dx;
    evaluate_with_jacobian(F, next, value, jac);
    const double r = value.norm();
    ++iterations;
    if (!(r < residual) && dx.norm() > 1e-14 * (1.0 + x.norm())) break;
    if (r <= residual) {
      x = next;
      residual = r;
    }
    if (dx.norm() <= 1e-15 * (1.0 + x.norm())) break;
  }
  return iterations;
}

SolvePath track_path(const Homotopy& H, std::size_t index, const TrackerConfig& cfg) {
  SolvePath path;
  path.start_index = index;
  ComplexVector x = H.G.root(index);
  const int max_iter = std::min(cfg.max_newton, 3);
  double t = 0.0;
  double dt = cfg.h0;
  int attempts = 0;
  while (t < 1.0) {
    if (++attempts > cfg.max_steps) {
      path.failure = "exceeded max_steps";
      break;
    }
    ComplexVector value;
    ComplexMatrix jac;
    H.eval(x, t, value, jac);
    ComplexVector tangent;
    try {
      tangent = lu_solve(jac, -H.dt(x));
    } catch (const SingularError&) {
      tangent = ComplexVector::Zero(x.size());
    }
    const double t1 = std::min(1.0, t + dt);
    ComplexVector next = x + (t1 - t) * tangent;
    const int it = correct(H, next, t1, max_iter);
    if (it >= 0) path.newton_iterations += it;
    else path.newton_iterations += max_iter;
    if (it < 0) {
      dt *= cfg.rho;
      if (dt < cfg.min_step) {
        path.failure = "step size fell below min_step at t = " + std::to_string(t);
        break;
      }
      continue;
    }
    x = next;
    t = t1;
    ++path.steps;
    if (x.norm() > kDivergenceNorm) {
      path.status = PathStatus::diverged;
      path.endpoint = x;
      path.failure = "norm exceeded 1e8 at t = " + std::to_string(t);
      return path;
    }
    if (it <= 2) dt = std::min(dt * cfg.expansion, cfg.h0);
  }
  path.endpoint = x;
  if (t < 1.0) {
    path.status = x.norm() > 1e6 ? PathStatus::diverged : PathStatus::failed;
    return path;
  }
  path.newton_iterations += refine(H.F, x, path.residual);
  path.endpoint = x;
  if (!x.allFinite() || x.norm() > kDivergenceNorm) {
    path.status = PathStatus::diverged;
    path.failure = "endpoint at infinity";
  } else if (path.residual <= 1e-8 * std::max(1.0, x.norm())) {
    path.status = PathStatus::converged;
  } else {
    path.failure = "endpoint residual " + std::to_string(path.residual);
  }
  return path;
}

}  // namespace

SolveReport total_degree_solve_report(const PolySystem& F, std::uint64_t seed, const TrackerConfig& cfg) {
  cfg.validate();
  if (F.num_equations() != F.num_vars())
    throw InputError("total_degree_solve needs a square system, got " + std::to_string(F.num_equations()) +
                     " equations in " + std::to_string(F.num_vars()) + " unknowns");
  const StartSystem G(F.degrees(), seed);
  const Homotopy H{F, G};
  SolveReport report;
  report.paths.resize(G.num_paths());
  parallel_for(report.paths.size(), [&](std::size_t i) { report.paths[i] = track_path(H, i, cfg); });
  return report;
}

std::vector<ComplexVector> total_degree_solve(const PolySystem& F, std::uint64_t seed, const TrackerConfig& cfg) {
  return total_degree_solve_report(F, seed, cfg).solutions();
}

namespace {

PolySystem append_linear(const PolySystem& g, const ExtrinsicPlane& L) {
  const int n = g.num_vars();
  std::vector<Polynomial> eqs = g.equations();
  for (Eigen::Index r = 0; r < L.coefficients.rows(); ++r) {
    std::vector<Monomial> terms;
    for (int j = 0; j < n; ++j) {
      std::vector<int> e(n, 0);
      e[j] = 1;
      terms.push_back({L.coefficients(r, j), e});
    }
    terms.push_back({L.constants[r], std::vector<int>(n, 0)});
    eqs.emplace_back(n, std::move(terms));
  }
  return PolySystem(n, std::move(eqs));
}

/// Newton in the plane's local coordinates on the square system, keeping the best iterate.
ComplexVector polish(const PolySystem& g, const AffinePlane& plane, const ComplexVector& z) {
  ComplexVector best = plane.point(plane.coordinates(z));
  double best_res = evaluate(g, best).norm();
  ComplexVector x = best;
  for (int it = 0; it < 6; ++it) {
    const AffineRestriction r(g, x, plane.basis);
    ComplexVector value;
    ComplexMatrix jac;
    r.eval_with_jac(ComplexVector::Zero(plane.dim()), value, jac);
    try {
      x += plane.basis * lu_solve(jac, -value);
    } catch (const SingularError&) {
      break;
    }
    const double res = evaluate(g, x).norm();
    if (res < best_res) {
      best = x;
      best_res = res;
    } else {
      break;
    }
  }
  return best;
}

}  // namespace

GenerateResult witness_generate_report(const PolySystem& f, int k, std::uint64_t seed, const TrackerConfig& cfg) {
  const int n = f.num_vars();
  if (k < 1 || k > n) throw InputError("codimension must satisfy 1 <= k <= n");
  if (f.num_equations() < k)
    throw InputError("need at least k = " + std::to_string(k) + " equations, got " +
                     std::to_string(f.num_equations()));
  const PolySystem g = randomize_by_degree(f, k, derive_seed(seed, 1));
  const ExtrinsicPlane L = random_extrinsic_plane(n, k, derive_seed(seed, 2));
  const PolySystem F = append_linear(g, L);

  GenerateResult result;
  result.solve = total_degree_solve_report(F, derive_seed(seed, 3), cfg);
  result.witness.system = f.num_equations() == k ? f : g;
  result.witness.plane = extrinsic_to_intrinsic(L);
  for (const auto& z0 : result.solve.solutions()) {
    const ComplexVector z = polish(g, result.witness.plane, z0);
    if (!z.allFinite() || z.norm() > kDivergenceNorm || !(evaluate(f, z).norm() <= 1e-8)) {
      ++result.rejected_residual;
      continue;
    }
    const bool duplicate = std::any_of(result.witness.points.begin(), result.witness.points.end(),
                                       [&](const ComplexVector& p) { return (p - z).norm() <= 1e-6; });
    if (duplicate) {
      ++result.rejected_duplicate;
      continue;
    }
    result.witness.points.push_back(z);
  }
  if (result.witness.points.empty())
    throw EmptyWitnessError("no finite solutions on the slice (" + std::to_string(result.solve.paths.size()) +
                            " paths tracked)");
  validate(result.witness);
  return result;
}

WitnessSet witness_generate(const PolySystem& f, int k, std::uint64_t seed, const TrackerConfig& cfg) {
  return witness_generate_report(f, k, seed, cfg).witness;
}

}  // namespace wsample
