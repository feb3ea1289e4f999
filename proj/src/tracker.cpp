#include "wsample/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/SVD>

#include "wsample/errors.hpp"
#include "wsample/linalg.hpp"
#include "wsample/parallel.hpp"

namespace wsample {

void TrackerConfig::validate() const {
  auto fail = [](const std::string& msg) { throw InputError("tracker config: " + msg); };
  if (!(h0 > 0.0 && h0 <= 1.0)) fail("h must lie in (0, 1]");
  if (!(eps > 0.0)) fail("eps must be positive");
  if (!(delta > 0.0)) fail("delta must be positive");
  if (!(rho > 0.0 && rho < 1.0)) fail("rho must lie in (0, 1)");
  if (max_newton < 1) fail("max_newton must be at least 1");
  if (!(min_step > 0.0 && min_step <= h0)) fail("min_step must lie in (0, h]");
  if (max_steps < 1) fail("max_steps must be at least 1");
  if (!(expansion >= 1.0)) fail("expansion must be >= 1");
}

NewtonResult newton_correct(const AffineRestriction& g, double eps, int max_newton, const ComplexVector& start) {
  const Eigen::Index k = g.num_params();
  if (g.system().num_equations() != k)
    throw InputError("newton_correct needs a square system: " + std::to_string(g.system().num_equations()) +
                     " equations in " + std::to_string(k) + " parameters");
  NewtonResult r;
  r.xi = start.size() == 0 ? ComplexVector::Zero(k) : start;
  if (r.xi.size() != k) throw InputError("newton start has the wrong length");
  ComplexVector value;
  ComplexMatrix jac;
  g.eval_with_jac(r.xi, value, jac);
  r.residual = value.norm();
  r.residuals.push_back(r.residual);
  double last_update = std::numeric_limits<double>::infinity();
  while (r.residual > eps) {
    if (r.iterations >= max_newton || !std::isfinite(r.residual)) return r;
    ComplexVector update;
    try {
      update = lu_solve(jac, -value);
    } catch (const SingularError&) {
      r.singular = true;
      return r;
    }
    r.xi += update;
    ++r.iterations;
    g.eval_with_jac(r.xi, value, jac);
    const double previous = r.residual;
    r.residual = value.norm();
    r.residuals.push_back(r.residual);
    // An update at working precision is as accurate as the point can get.
    const double size = (g.basis() * update).norm();
    if (size <= 1e-12 * (1.0 + g.point(r.xi).norm())) break;
    // Outside the basin of quadratic convergence: let the caller cut the step.
    if (!(r.residual < previous) || size > 0.25 * last_update) return r;
    last_update = size;
  }
  r.converged = true;
  return r;
}

std::optional<Prediction> predictor_direction(const ComplexVector& z, const AffinePlane& target) {
  // Orient toward the plane: r is the perpendicular part of z - b, so -r points at c.
  const ComplexVector r = project_perpendicular(z - target.offset, target.basis);
  const double dist = r.norm();
  if (!(dist >= 1e-14)) return std::nullopt;
  return Prediction{-r / dist, dist};
}

StepControl apriori_step_control(const std::function<double(double)>& residual, double step, double delta,
                                 double rho, double min_step) {
  if (!(step > 0.0)) throw InputError("step must be positive");
  StepControl out;
  out.step = step;
  double ratio = residual(step) / step;
  out.evaluations = 1;
  while (ratio > delta) {
    const double next = rho * step;
    const double next_ratio = residual(next) / next;
    ++out.evaluations;
    // y / h no longer depends on h: the residual is linear and shrinking cannot help.
    if (std::abs(next_ratio - ratio) <= 0.1 * ratio) break;
    if (next < min_step) {
      out.ok = false;
      return out;
    }
    ++out.reductions;
    step = next;
    out.step = step;
    ratio = next_ratio;
  }
  return out;
}

namespace {

double local_condition_at(const PolySystem& f, const ComplexVector& z, const ComplexMatrix& basis) {
  return condition_number(jacobian(f, z) * basis);
}

/// Step in t, absorbing a remainder too small to be worth a step of its own.
double next_increment(double t, double h) { return 1.0 - (t + h) < 1e-12 ? 1.0 - t : h; }
double advance(double t, double dt) { return dt >= 1.0 - t ? 1.0 : t + dt; }

void finish(TrackResult& out, const PolySystem& f, const TrackerConfig& cfg, const AffinePlane& target) {
  out.stats.final_residual = evaluate(f, out.point).norm();
  const double dist = target.distance(out.point);
  if (out.stats.failure.empty() && !(out.stats.final_residual <= cfg.eps)) {
    out.stats.failure = "final residual " + std::to_string(out.stats.final_residual) + " above eps";
  } else if (out.stats.failure.empty() && !(dist <= cfg.eps)) {
    out.stats.failure = "endpoint is " + std::to_string(dist) + " off the target plane";
  }
  out.stats.success = out.stats.failure.empty();
}

}  // namespace

namespace {

bool same_span(const ComplexMatrix& V, const ComplexMatrix& W) {
  return V.cols() == W.cols() && (V - W * (W.adjoint() * V)).norm() <= 1e-12;
}

/// Planes with offsets (1 - t) b + t c and bases on the geodesic from span(V) to span(W):
/// with V^* W = U S Y^*, column j turns from (V U)_j toward (W Y)_j through the
/// principal angle acos(S_jj). Every basis on the way is orthonormal.
class PlanePath {
 public:
  PlanePath(const AffinePlane& source, const AffinePlane& target)
      : source_(source), target_(target), parallel_(same_span(source.basis, target.basis)) {
    const Eigen::JacobiSVD<ComplexMatrix> svd(source.basis.adjoint() * target.basis,
                                              Eigen::ComputeFullU | Eigen::ComputeFullV);
    start_ = source.basis * svd.matrixU();
    const ComplexMatrix end = target.basis * svd.matrixV();
    const Eigen::Index k = start_.cols();
    turn_ = ComplexMatrix::Zero(start_.rows(), k);
    angles_.resize(k);
    for (Eigen::Index j = 0; j < k; ++j) {
      const double c = std::min(1.0, svd.singularValues()[j]);
      angles_[j] = std::acos(c);
      const ComplexVector r = end.col(j) - c * start_.col(j);
      if (r.norm() > 1e-14) turn_.col(j) = r / r.norm();
    }
  }

  bool parallel() const { return parallel_; }

  AffinePlane at(double t) const {
    if (t >= 1.0) return target_;
    AffinePlane p;
    p.offset = (1.0 - t) * source_.offset + t * target_.offset;
    p.basis = start_;
    for (Eigen::Index j = 0; j < start_.cols(); ++j)
      p.basis.col(j) = std::cos(angles_[j] * t) * start_.col(j) + std::sin(angles_[j] * t) * turn_.col(j);
    return p;
  }

 private:
  const AffinePlane& source_;
  const AffinePlane& target_;
  bool parallel_;
  ComplexMatrix start_;
  ComplexMatrix turn_;
  RealVector angles_;
};

/// Orthogonal projection of z onto p, with the length of the move.
ComplexVector project_onto(const ComplexVector& z, const AffinePlane& p, double& distance) {
  const auto pred = predictor_direction(z, p);
  distance = pred ? pred->distance : 0.0;
  return pred ? ComplexVector(z + pred->distance * pred->direction) : z;
}

}  // namespace

TrackResult track_local(const PolySystem& f, const ComplexVector& z, const AffinePlane& source,
                        const AffinePlane& target, const TrackerConfig& cfg, const LocalStepObserver& observer) {
  cfg.validate();
  if (f.num_equations() != target.dim() || source.dim() != target.dim())
    throw InputError("local tracking needs as many equations as plane dimensions");
  TrackResult out{z, {}};
  auto& stats = out.stats;
  const PlanePath path(source, target);
  const bool stationary = path.parallel() && target.distance(source.offset) <= 1e-14;
  double t = stationary ? 1.0 : 0.0;
  double h = cfg.h0;

  while (t < 1.0) {
    if (stats.steps_taken + stats.steps_rejected >= cfg.max_steps) {
      stats.failure = "exceeded max_steps";
      break;
    }
    double dt = next_increment(t, h);
    AffinePlane plane;
    ComplexVector predicted;
    double s = 0.0;
    try {
      plane = path.at(advance(t, dt));
      predicted = project_onto(out.point, plane, s);
      if (cfg.apriori_control && s > 0.0) {
        // Distance per unit of t; exact for translations, first order otherwise.
        const double rate = s / dt;
        const double base = evaluate(f, out.point).norm();
        const auto control = apriori_step_control(
            [&](double step) {
              double d = 0.0;
              return std::max(0.0, evaluate(f, project_onto(out.point, path.at(t + step / rate), d)).norm() - base);
            },
            s, cfg.delta, cfg.rho, cfg.min_step * rate);
        stats.apriori_reductions += control.reductions;
        if (!control.ok) {
          stats.failure = "a priori step control fell below min_step";
          break;
        }
        if (control.step < s) {
          dt = control.step / rate;
          h = dt;
          plane = path.at(t + dt);
          predicted = project_onto(out.point, plane, s);
        }
      }
    } catch (const RankError&) {
      stats.failure = "moving basis lost rank at t = " + std::to_string(t + dt);
      break;
    }
    const double t1 = advance(t, dt);
    const auto newton = newton_correct(restrict(f, predicted, plane.basis), cfg.eps, cfg.max_newton);
    stats.newton_iterations += newton.iterations;
    if (!newton.converged) {
      ++stats.steps_rejected;
      h = dt * cfg.rho;
      if (h < cfg.min_step) {
        stats.failure = "step size fell below min_step";
        break;
      }
      continue;
    }
    const ComplexVector corrected = predicted + plane.basis * newton.xi;
    ++stats.steps_taken;
    if (observer)
      observer(LocalStep{out.point, predicted, corrected, plane, target.distance(out.point),
                         target.distance(corrected), s, t1, newton.iterations});
    out.point = corrected;
    t = t1;
    if (cfg.record_conditions) stats.condition_estimates.push_back(local_condition_at(f, out.point, plane.basis));
    if (newton.iterations <= 2) h = std::min(h * cfg.expansion, cfg.h0);
  }

  if (stats.failure.empty()) {
    // Polish in the target plane's local coordinates.
    const auto polish = newton_correct(restrict(f, target.point(target.coordinates(out.point)), target.basis),
                                       cfg.eps, cfg.max_newton);
    stats.newton_iterations += polish.iterations;
    if (polish.converged) out.point = target.point(target.coordinates(out.point)) + target.basis * polish.xi;
  }
  finish(out, f, cfg, target);
  return out;
}

TrackResult track_local(const PolySystem& f, const ComplexVector& z, const AffinePlane& target,
                        const TrackerConfig& cfg, const LocalStepObserver& observer) {
  return track_local(f, z, AffinePlane{z, target.basis}, target, cfg, observer);
}

TrackResult track_global_path(const PolySystem& f, const ComplexVector& z, const AffinePlane& source,
                              const AffinePlane& target, const TrackerConfig& cfg) {
  cfg.validate();
  if (f.num_equations() != target.dim() || source.dim() != target.dim())
    throw InputError("global tracking needs matching plane dimensions and a square system");
  TrackResult out{z, {}};
  auto& stats = out.stats;
  ComplexVector xi = source.coordinates(z);
  double t = 0.0;
  double h = cfg.h0;

  auto offset_at = [&](double s) -> ComplexVector { return (1.0 - s) * source.offset + s * target.offset; };
  auto basis_at = [&](double s) -> ComplexMatrix { return (1.0 - s) * source.basis + s * target.basis; };

  while (t < 1.0) {
    if (stats.steps_taken + stats.steps_rejected >= cfg.max_steps) {
      stats.failure = "exceeded max_steps";
      break;
    }
    const double dt = next_increment(t, h);
    const double t1 = advance(t, dt);
    const ComplexMatrix M = basis_at(t1);
    const AffineRestriction g(f, offset_at(t1), M);
    const auto newton = newton_correct(g, cfg.eps, cfg.max_newton, xi);
    stats.newton_iterations += newton.iterations;
    if (!newton.converged) {
      ++stats.steps_rejected;
      h *= cfg.rho;
      if (h < cfg.min_step) {
        stats.failure = "step size fell below min_step";
        break;
      }
      continue;
    }
    const RealVector sv = singular_values(M);
    if (!(sv[sv.size() - 1] > 1e-12 * sv[0])) {
      stats.failure = "moving basis lost rank at t = " + std::to_string(t1);
      break;
    }
    t = t1;
    xi = newton.xi;
    ++stats.steps_taken;
    if (cfg.record_conditions) stats.condition_estimates.push_back(condition_number(g.jac(xi)));
    if (newton.iterations <= 2) h = std::min(h * cfg.expansion, cfg.h0);
  }
  out.point = t >= 1.0 ? target.point(xi) : ComplexVector(offset_at(t) + basis_at(t) * xi);
  finish(out, f, cfg, target);
  return out;
}

std::vector<TrackResult> track_global(const WitnessSet& w, const AffinePlane& target, const TrackerConfig& cfg) {
  std::vector<TrackResult> out(w.points.size());
  parallel_for(w.points.size(),
               [&](std::size_t i) { out[i] = track_global_path(w.system, w.points[i], w.plane, target, cfg); });
  return out;
}

std::string to_string(TrackMode mode) { return mode == TrackMode::local ? "local" : "global"; }

TrackMode parse_track_mode(const std::string& text) {
  if (text == "local") return TrackMode::local;
  if (text == "global") return TrackMode::global;
  throw InputError("unknown mode '" + text + "' (expected local or global)");
}

namespace {

/// Indices of failed paths and of paths whose endpoints coincide with another's.
std::vector<std::size_t> suspect_paths(const std::vector<TrackResult>& paths, double distinct) {
  std::vector<char> bad(paths.size(), 0);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (!paths[i].stats.success) bad[i] = 1;
    for (std::size_t j = 0; j < i; ++j)
      if ((paths[i].point - paths[j].point).norm() <= distinct) bad[i] = bad[j] = 1;
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < paths.size(); ++i)
    if (bad[i]) out.push_back(i);
  return out;
}

void accumulate(PathStats& into, const PathStats& earlier) {
  into.newton_iterations += earlier.newton_iterations;
  into.steps_taken += earlier.steps_taken;
  into.steps_rejected += earlier.steps_rejected;
  into.apriori_reductions += earlier.apriori_reductions;
  into.attempts += earlier.attempts;
}

}  // namespace

MoveResult move_witness(const WitnessSet& w, const AffinePlane& target, const TrackerConfig& cfg, TrackMode mode) {
  cfg.validate();
  target.validate();
  if (target.ambient_dim() != w.ambient_dim() || target.dim() != w.plane.dim())
    throw InputError("target plane does not match the witness set dimensions");

  auto track = [&](std::size_t i, const TrackerConfig& c) {
    return mode == TrackMode::global ? track_global_path(w.system, w.points[i], w.plane, target, c)
                                     : track_local(w.system, w.points[i], w.plane, target, c);
  };
  std::vector<TrackResult> paths(w.points.size());
  parallel_for(paths.size(), [&](std::size_t i) { paths[i] = track(i, cfg); });

  // Failed or merged paths are tracked again with shorter steps.
  const WitnessTolerances tol;
  TrackerConfig retry = cfg;
  for (int round = 0; round < kMoveRetries; ++round) {
    const auto suspects = suspect_paths(paths, tol.distinct);
    if (suspects.empty()) break;
    retry.h0 /= 4.0;
    retry.min_step = std::min(retry.min_step, retry.h0);
    retry.max_steps *= 4;
    parallel_for(suspects.size(), [&](std::size_t s) {
      const std::size_t i = suspects[s];
      TrackResult again = track(i, retry);
      accumulate(again.stats, paths[i].stats);
      paths[i] = std::move(again);
    });
  }

  MoveResult result;
  result.moved.system = w.system;
  result.moved.plane = target;
  std::vector<int> failed;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    result.stats.push_back(paths[i].stats);
    result.moved.points.push_back(paths[i].point);
    if (!paths[i].stats.success) failed.push_back(static_cast<int>(i));
  }
  if (!failed.empty()) {
    std::ostringstream msg;
    msg << failed.size() << " of " << paths.size() << " paths failed:";
    for (int i : failed) msg << ' ' << i << " (" << paths[i].stats.failure << ")";
    throw PathFailureError(msg.str(), std::move(failed), std::move(result.stats), false);
  }
  try {
    validate(result.moved, tol);
  } catch (const ValidationError& e) {
    const bool crossing = e.invariant() == "distinct";
    throw PathFailureError(crossing ? std::string("path crossing: ") + e.what() : std::string(e.what()), {},
                           std::move(result.stats), crossing);
  }
  return result;
}

double local_intrinsic_condition(const PolySystem& f, const ComplexVector& z, const AffinePlane& plane) {
  return local_condition_at(f, z, plane.basis);
}

double extrinsic_condition(const PolySystem& f, const ComplexVector& z, const AffinePlane& plane) {
  const ExtrinsicPlane ext = intrinsic_to_extrinsic(plane);
  const int n = f.num_vars();
  const int k = f.num_equations();
  ComplexMatrix A(n, n);
  const ComplexMatrix J = jacobian(f, z);
  const double scale = J.rows() == 0 ? 1.0 : singular_values(J)[0];
  if (!(scale > 0.0)) return std::numeric_limits<double>::infinity();
  A.topRows(k) = J / scale;
  A.bottomRows(n - k) = ext.coefficients;
  return condition_number(A);
}

}  // namespace wsample
