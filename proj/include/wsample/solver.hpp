#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wsample/polysys.hpp"
#include "wsample/tracker.hpp"
#include "wsample/types.hpp"
#include "wsample/witness.hpp"

namespace wsample {

/// G_i(x) = x_i^{d_i} - c_i with unit-circle c_i, and the random multiplier gamma.
struct StartSystem {
  std::vector<int> degrees;
  ComplexVector constants;
  Complex gamma{1.0, 0.0};

  StartSystem(std::vector<int> degrees, std::uint64_t seed);

  /// Product of the degrees.
  std::size_t num_paths() const;
  /// Start root number `index`, counting in mixed radix over the degrees.
  ComplexVector root(std::size_t index) const;
  ComplexVector evaluate(const ComplexVector& x) const;
  /// Diagonal Jacobian of G.
  ComplexVector jacobian_diagonal(const ComplexVector& x) const;
};

enum class PathStatus { converged, diverged, failed };

std::string to_string(PathStatus status);

struct SolvePath {
  std::size_t start_index = 0;
  PathStatus status = PathStatus::failed;
  ComplexVector endpoint;
  double residual = 0.0;
  int steps = 0;
  int newton_iterations = 0;
  std::string failure;
};

struct SolveReport {
  std::vector<SolvePath> paths;
  /// Endpoints of converged paths, in start-root order.
  std::vector<ComplexVector> solutions() const;
  int count(PathStatus status) const;
};

/// Norm above which a path is classified as going to infinity.
inline constexpr double kDivergenceNorm = 1e8;

/// Tracks every path of (1 - t) gamma G + t F from t = 0 to t = 1 with an Euler
/// predictor and Newton corrector. The t step starts at cfg.h0 and follows the same
/// shrink/expand feedback as the plane trackers.
SolveReport total_degree_solve_report(const PolySystem& F, std::uint64_t seed, const TrackerConfig& cfg);

/// Converged finite endpoints of total_degree_solve_report.
std::vector<ComplexVector> total_degree_solve(const PolySystem& F, std::uint64_t seed, const TrackerConfig& cfg);

struct GenerateResult {
  WitnessSet witness;
  SolveReport solve;
  int rejected_residual = 0;
  int rejected_duplicate = 0;
};

/// Randomizes f to k equations (randomize_by_degree), slices with a seeded random plane
/// of dimension k, solves the n x n system and keeps the distinct endpoints that satisfy
/// the original f to 1e-8. The witness holds f itself when it has k equations and the
/// randomized system otherwise. Throws EmptyWitnessError when nothing survives.
GenerateResult witness_generate_report(const PolySystem& f, int k, std::uint64_t seed, const TrackerConfig& cfg);

WitnessSet witness_generate(const PolySystem& f, int k, std::uint64_t seed, const TrackerConfig& cfg);

}  // namespace wsample
