#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "wsample/polysys.hpp"
#include "wsample/types.hpp"

namespace wsample {

/// The restricted polynomial lost its top-degree coefficient.
class DegeneracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Aberth iteration hit its cap; residuals holds |p(r)| for the final iterates.
class RootFailureError : public std::runtime_error {
 public:
  RootFailureError(const std::string& what, std::vector<double> residuals)
      : std::runtime_error(what), residuals_(std::move(residuals)) {}
  const std::vector<double>& residuals() const { return residuals_; }

 private:
  std::vector<double> residuals_;
};

/// p(xi) = sum_j coefficients[j] xi^j, normalized so the leading coefficient is 1.
struct UnivariatePoly {
  std::vector<Complex> coefficients;
  /// Leading coefficient before normalization.
  Complex divisor{1.0, 0.0};

  UnivariatePoly() = default;
  /// Divides by the leading coefficient. Throws DegeneracyError if it is below 1e-14.
  explicit UnivariatePoly(std::vector<Complex> coeffs);

  int degree() const { return static_cast<int>(coefficients.size()) - 1; }
  /// True when the input was already monic to 1e-12.
  bool monic() const { return std::abs(divisor - Complex(1.0)) <= 1e-12; }

  Complex operator()(Complex x) const;
  Complex derivative(Complex x) const;
  /// sum_j |a_j| |x|^j, the scale for backward-error tests.
  double magnitude(double abs_x) const;
};

/// xi -> f(b + v xi) for a single equation f, expanded and made monic.
UnivariatePoly univariate_restrict(const PolySystem& f, const ComplexVector& b, const ComplexVector& v);

/// All d roots by simultaneous Aberth-Ehrlich iteration from Newton-polygon starting
/// circles. Each root is accepted once |p(r)| <= 32 u sum_j |a_j| |r|^j; 200 sweeps at most.
std::vector<Complex> aberth_roots(const UnivariatePoly& p);

enum class Balance { none, scaling };

std::string to_string(Balance b);
Balance parse_balance(const std::string& text);

/// Diagonal d with D^{-1} C D row/column balanced (radix 2, 1-norms off the diagonal).
RealVector balancing_scale(const ComplexMatrix& C);

/// Companion matrix with ones on the superdiagonal and -a_0..-a_{d-1} in the last row.
ComplexMatrix companion_matrix(const UnivariatePoly& p);

/// Eigenvalue condition number of the root lambda of the companion matrix of p,
/// from the closed-form eigenvectors x = (1, lambda, ..., lambda^{d-1}) and Horner
/// partial sums w. With Balance::scaling the same quantity for D^{-1} C D.
/// Returns +inf when w^T x underflows.
double root_condition(const UnivariatePoly& p, Complex lambda, Balance balance = Balance::none);

enum class Regime { offset, origin, local_shift };

std::string to_string(Regime r);

struct ConditionReport {
  int degree = 0;
  Regime regime = Regime::offset;
  double largest_inverse_cond = 0.0;
  double smallest_inverse_cond = 0.0;
  /// Terms of the hypersurface after merging duplicates.
  int terms = 0;
};

struct LocalShiftResult {
  /// Scalar r with z1 = r v: the smallest-modulus nonzero root of f(v xi).
  Complex shift;
  double inverse_cond_at_zero = 0.0;
  double smallest_inverse_other = 0.0;
};

/// Shifts to the smallest-modulus nonzero root z1 = r v of f(v xi) and reports the
/// conditioning of the roots of f(z1 + v xi).
LocalShiftResult local_shift_condition(const PolySystem& f, const ComplexVector& v, Balance balance = Balance::scaling);

/// Inverse condition numbers of all roots of p.
std::vector<double> inverse_conditions(const UnivariatePoly& p, const std::vector<Complex>& roots, Balance balance);

struct ConditionExperiment {
  int n = 10;
  int t = 5;
  std::vector<int> degrees{10, 20, 30, 40};
  Balance balance = Balance::scaling;
};

/// For each degree: a random sparse hypersurface, a unit-circle offset b and direction v
/// with v_1 = 1, and reports for the offset, origin and local-shift regimes, in that order.
std::vector<ConditionReport> run_condition_experiment(const ConditionExperiment& cfg, std::uint64_t seed);

/// One row of the ratio table, over several seeds (geometric means).
struct ConditionTableRow {
  int degree = 0;
  double offset_largest = 0.0;
  double offset_smallest = 0.0;
  double origin_largest = 0.0;
  double origin_smallest = 0.0;
  /// origin / offset.
  double ratio_smallest = 0.0;
  double ratio_largest = 0.0;
  /// largest / smallest within one regime, the quantity behind the printed ratio
  /// columns of the published table.
  double offset_spread = 0.0;
  double origin_spread = 0.0;
};

std::vector<ConditionTableRow> condition_table(const std::vector<ConditionReport>& reports);

}  // namespace wsample
