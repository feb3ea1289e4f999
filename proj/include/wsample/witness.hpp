#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "wsample/polysys.hpp"
#include "wsample/types.hpp"

namespace wsample {

/// A k-plane {offset + basis * xi} in C^n with orthonormal basis columns.
struct AffinePlane {
  ComplexVector offset;
  ComplexMatrix basis;

  int ambient_dim() const { return static_cast<int>(offset.size()); }
  int dim() const { return static_cast<int>(basis.cols()); }

  /// Intrinsic coordinates of the orthogonal projection of x: basis^* (x - offset).
  ComplexVector coordinates(const ComplexVector& x) const;
  /// offset + basis * xi.
  ComplexVector point(const ComplexVector& xi) const { return offset + basis * xi; }
  /// Norm of the component of x - offset perpendicular to the plane.
  double distance(const ComplexVector& x) const;

  /// Throws ValidationError unless 1 <= k <= n and basis^* basis = I to `tol`.
  void validate(double tol = 1e-10) const;
};

/// The same plane as n - k linear equations coefficients * x + constants = 0.
struct ExtrinsicPlane {
  ComplexMatrix coefficients;
  ComplexVector constants;

  ComplexVector residual(const ComplexVector& x) const { return coefficients * x + constants; }
};

/// Seeded plane: unit-circle offset and basis entries, basis then orthonormalized.
/// Rank-deficient draws are retried with a perturbed seed up to three times.
AffinePlane random_plane(int n, int k, std::uint64_t seed);

/// Seeded extrinsic plane with n - k unit-circle equations.
ExtrinsicPlane random_extrinsic_plane(int n, int k, std::uint64_t seed);

/// Offset is the minimum-norm solution; basis is an orthonormal null-space basis.
AffinePlane extrinsic_to_intrinsic(const ExtrinsicPlane& plane);
/// Rows are an orthonormal basis of the complement of span(basis), conjugated.
ExtrinsicPlane intrinsic_to_extrinsic(const AffinePlane& plane);

/// k equations in n unknowns cutting out an (n-k)-dimensional set, a slicing k-plane,
/// and the points where the plane meets the set, stored in ambient coordinates.
struct WitnessSet {
  PolySystem system;
  AffinePlane plane;
  std::vector<ComplexVector> points;

  int degree() const { return static_cast<int>(points.size()); }
  int ambient_dim() const { return system.num_vars(); }
  int codim() const { return system.num_equations(); }
};

struct WitnessTolerances {
  double residual = 1e-8;
  double membership = 1e-8;
  double distinct = 1e-6;
  double orthonormal = 1e-10;
};

/// Checks every WitnessSet invariant, throwing ValidationError naming the first failure:
/// "square", "dimension", "orthonormal", "residual", "membership", "distinct".
void validate(const WitnessSet& w, const WitnessTolerances& tol = {});

/// Smallest pairwise distance between points (+inf for fewer than two).
double min_pairwise_distance(const std::vector<ComplexVector>& points);

/// The plane of `w` re-anchored at its point `index` (0-based).
AffinePlane rebase(const WitnessSet& w, int index);

void write_witness(std::ostream& out, const WitnessSet& w);
/// Parses and validates. ParseError carries the line number.
WitnessSet read_witness(std::istream& in);

/// `header` lines are written first, each prefixed with "# ".
void save_witness(const WitnessSet& w, const std::filesystem::path& path,
                  const std::vector<std::string>& header = {});
WitnessSet load_witness(const std::filesystem::path& path);

}  // namespace wsample
