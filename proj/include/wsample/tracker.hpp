#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wsample/polysys.hpp"
#include "wsample/types.hpp"
#include "wsample/witness.hpp"

namespace wsample {

/// Step sizes are fractions of the whole move: both trackers step the homotopy
/// parameter t in [0, 1] by h.
struct TrackerConfig {
  double h0 = 0.1;
  double eps = 1e-10;
  double delta = 1.0;
  double rho = 0.5;
  int max_newton = 6;
  double min_step = 1e-8;
  int max_steps = 10000;
  double expansion = 1.5;
  /// Evaluation-based step control before each local corrector run.
  bool apriori_control = true;
  /// Record kappa(B) after every accepted step.
  bool record_conditions = true;

  /// Throws InputError on out-of-range values (including h0 > 1).
  void validate() const;
};

struct PathStats {
  int newton_iterations = 0;
  int steps_taken = 0;
  int steps_rejected = 0;
  int apriori_reductions = 0;
  double final_residual = 0.0;
  /// Times the path was tracked; counts above include every attempt.
  int attempts = 1;
  std::vector<double> condition_estimates;
  bool success = false;
  std::string failure;
};

struct NewtonResult {
  ComplexVector xi;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  bool singular = false;
  /// ||g(xi)|| before each iteration and after the last one.
  std::vector<double> residuals;
};

/// Newton on a square restricted system from `start` (zero when empty): xi += dxi with
/// g'(xi) dxi = -g(xi), until ||g(xi)|| <= eps, or the update is below working precision
/// relative to the point, or `max_newton` iterations. An iteration that does not lower
/// the residual, or whose update exceeds a quarter of the previous one, ends the run
/// unconverged. Non-convergence and
/// singular Jacobians are reported in the result, not thrown.
NewtonResult newton_correct(const AffineRestriction& g, double eps, int max_newton,
                            const ComplexVector& start = ComplexVector());

struct Prediction {
  ComplexVector direction;  ///< unit, perpendicular to the target plane, pointing at it
  double distance = 0.0;    ///< distance from z to its projection onto the plane
};

/// Direction from z toward its orthogonal projection onto `target`. Empty when z is
/// already on the plane (distance below 1e-14).
std::optional<Prediction> predictor_direction(const ComplexVector& z, const AffinePlane& target);

struct StepControl {
  double step = 0.0;
  int evaluations = 0;
  int reductions = 0;
  bool ok = true;
};

/// A priori step control: evaluates y = residual(step) and shrinks step by rho while
/// y / step > delta. Stops early, keeping the current step, when y / step changes by
/// at most 10% under a reduction: the residual is then linear in the step and shrinking
/// cannot help. Fails (ok = false) when the step would drop below min_step.
StepControl apriori_step_control(const std::function<double(double)>& residual, double step, double delta,
                                 double rho, double min_step);

struct TrackResult {
  ComplexVector point;
  PathStats stats;
};

/// One accepted predictor-corrector step of the local tracker.
struct LocalStep {
  ComplexVector from;
  ComplexVector predicted;
  ComplexVector corrected;
  /// The plane this step predicts onto and corrects in.
  AffinePlane plane;
  /// Distances of `from` and `corrected` to the final target plane.
  double distance_before = 0.0;
  double distance_after = 0.0;
  /// Length of the prediction.
  double step = 0.0;
  double t = 0.0;
  int newton_iterations = 0;
};

using LocalStepObserver = std::function<void(const LocalStep&)>;

/// Moves the solution z of the square system f from `source` onto `target` through the
/// planes (1 - t)(b, V) + t(c, W), orthonormalized. Each step predicts perpendicular to
/// the next plane, onto it, and corrects by Newton in local coordinates of that plane
/// (offset at the predicted point). For parallel planes this is a pure translation and
/// every step moves straight toward the target.
TrackResult track_local(const PolySystem& f, const ComplexVector& z, const AffinePlane& source,
                        const AffinePlane& target, const TrackerConfig& cfg, const LocalStepObserver& observer = {});

/// The single-point form: translates the plane through z with the target basis onto
/// the target. Points of one witness set follow different families this way, so use
/// the form above (or move_witness) to move a whole set.
TrackResult track_local(const PolySystem& f, const ComplexVector& z, const AffinePlane& target,
                        const TrackerConfig& cfg, const LocalStepObserver& observer = {});

/// Tracks xi(t) for f((1-t) b + t c + ((1-t) V + t W) xi) = 0 from the source plane
/// (b, V) of the witness point z to the target (c, W).
TrackResult track_global_path(const PolySystem& f, const ComplexVector& z, const AffinePlane& source,
                              const AffinePlane& target, const TrackerConfig& cfg);

/// track_global_path for every point of `w`.
std::vector<TrackResult> track_global(const WitnessSet& w, const AffinePlane& target, const TrackerConfig& cfg);

enum class TrackMode { local, global };

std::string to_string(TrackMode mode);
TrackMode parse_track_mode(const std::string& text);

struct MoveResult {
  WitnessSet moved;
  std::vector<PathStats> stats;
};

/// Some paths failed, or two paths ended on the same point. Carries everything
/// tracked so far.
class PathFailureError : public std::runtime_error {
 public:
  PathFailureError(const std::string& what, std::vector<int> failed, std::vector<PathStats> stats,
                   bool crossing)
      : std::runtime_error(what), failed_(std::move(failed)), stats_(std::move(stats)), crossing_(crossing) {}
  const std::vector<int>& failed() const { return failed_; }
  const std::vector<PathStats>& stats() const { return stats_; }
  bool crossing() const { return crossing_; }

 private:
  std::vector<int> failed_;
  std::vector<PathStats> stats_;
  bool crossing_;
};

/// Rounds of re-tracking with a quarter of the step for failed or merged paths.
inline constexpr int kMoveRetries = 3;

/// Moves every witness point onto `target` and validates the result. Paths that fail
/// or end on the same point are tracked again with shorter steps, up to kMoveRetries
/// rounds. Paths run concurrently when WITNESS_SAMPLER_THREADS > 1; results keep
/// input order.
MoveResult move_witness(const WitnessSet& w, const AffinePlane& target, const TrackerConfig& cfg, TrackMode mode);

/// kappa of f'(z) W, the k x k Jacobian in local intrinsic coordinates.
double local_intrinsic_condition(const PolySystem& f, const ComplexVector& z, const AffinePlane& plane);
/// kappa of [f'(z); L'], the n x n Jacobian of the system extended by the plane equations.
/// Both blocks have unit 2-norm: L' has orthonormal rows and f'(z) is divided by its
/// largest singular value, so the result does not depend on how f is scaled.
double extrinsic_condition(const PolySystem& f, const ComplexVector& z, const AffinePlane& plane);

}  // namespace wsample
