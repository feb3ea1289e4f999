#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "wsample/types.hpp"

namespace wsample {

/// One term c * x_1^{e_1} ... x_n^{e_n}.
struct Monomial {
  Complex coefficient;
  std::vector<int> exponents;

  int degree() const;
  friend bool operator==(const Monomial&, const Monomial&) = default;
};

/// Graded lexicographic comparison on exponent vectors of equal length.
bool grlex_less(const std::vector<int>& a, const std::vector<int>& b);

/// A sparse polynomial in n variables. Terms are kept in descending grlex order and merged,
/// and no stored term has a zero coefficient.
class Polynomial {
 public:
  Polynomial() = default;
  /// Merges duplicate exponent vectors by adding coefficients; exact zeros are dropped.
  Polynomial(int num_vars, std::vector<Monomial> terms);

  int num_vars() const { return num_vars_; }
  const std::vector<Monomial>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  int degree() const;

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  int num_vars_ = 0;
  std::vector<Monomial> terms_;
};

/// f = (f_1, ..., f_m) over C[x_1, ..., x_n]. Immutable after construction.
class PolySystem {
 public:
  PolySystem() = default;
  PolySystem(int num_vars, std::vector<Polynomial> equations);

  int num_vars() const { return num_vars_; }
  int num_equations() const { return static_cast<int>(equations_.size()); }
  const std::vector<Polynomial>& equations() const { return equations_; }
  const Polynomial& operator[](std::size_t i) const { return equations_[i]; }

  /// Total degree of each equation.
  std::vector<int> degrees() const;
  /// Largest exponent of each variable over all terms; sizes the power cache.
  const std::vector<int>& max_exponents() const { return max_exponents_; }

  friend bool operator==(const PolySystem& a, const PolySystem& b) {
    return a.num_vars_ == b.num_vars_ && a.equations_ == b.equations_;
  }

 private:
  int num_vars_ = 0;
  std::vector<Polynomial> equations_;
  std::vector<int> max_exponents_;
};

/// f(x), term by term with cached variable powers.
ComplexVector evaluate(const PolySystem& f, const ComplexVector& x);

/// m x n matrix of partial derivatives at x.
ComplexMatrix jacobian(const PolySystem& f, const ComplexVector& x);

/// Both at once, sharing the power cache.
void evaluate_with_jacobian(const PolySystem& f, const ComplexVector& x, ComplexVector& value,
                            ComplexMatrix& jac);

/// The composition xi -> f(b + V xi) without expanding anything. Holds a pointer to f,
/// which must outlive the view. The basis need not be orthonormal here; `restrict`
/// is the checked entry point.
class AffineRestriction {
 public:
  AffineRestriction(const PolySystem& f, ComplexVector offset, ComplexMatrix basis);

  const PolySystem& system() const { return *f_; }
  const ComplexVector& offset() const { return offset_; }
  const ComplexMatrix& basis() const { return basis_; }
  Eigen::Index num_params() const { return basis_.cols(); }

  ComplexVector point(const ComplexVector& xi) const { return offset_ + basis_ * xi; }
  ComplexVector eval(const ComplexVector& xi) const;
  /// jacobian(f, b + V xi) * V.
  ComplexMatrix jac(const ComplexVector& xi) const;
  void eval_with_jac(const ComplexVector& xi, ComplexVector& value, ComplexMatrix& jac) const;

 private:
  const PolySystem* f_;
  ComplexVector offset_;
  ComplexMatrix basis_;
};

/// Checked restriction: throws InputError unless V*V = I to 1e-10.
AffineRestriction restrict(const PolySystem& f, const ComplexVector& b, const ComplexMatrix& V);

/// The symbolic system g(xi) = f(b + V xi) in k = V.cols() variables.
PolySystem expand_substitution(const PolySystem& f, const ComplexVector& b, const ComplexMatrix& V);

/// C * f with C a seeded k x m matrix of unit-circle entries. Returns f itself when m == k.
PolySystem square_system(const PolySystem& f, int k, std::uint64_t seed);

/// [I A] f with f reordered by decreasing degree: the k highest-degree equations, each
/// plus seeded unit-circle multiples of the remaining m - k. Degrees stay those of the
/// k leading equations, so the total-degree count is far below that of square_system.
PolySystem randomize_by_degree(const PolySystem& f, int k, std::uint64_t seed);

/// All adjacent 2x2 minors of a general 2 x cols matrix. Variables are ordered
/// x11..x1c, x21..x2c.
PolySystem adjacent_minors(int cols);

/// Cyclic n-roots: sum_j prod_{l<i} x_{j+l} for i < n, and x_1...x_n - 1.
PolySystem cyclic_roots(int n);

/// x_1^d + t random terms of degree <= d-1 + sum_i c_i x_i, all random coefficients
/// on the unit circle.
PolySystem random_sparse_hypersurface(int n, int d, int t, std::uint64_t seed);

/// Text format: a `POLYSYS n=<n> m=<m>` header followed by one equation per line,
/// terms `(re,im)*x<j>^<e>` joined by `+`. Lines starting with '#' are comments.
void write_polysys(std::ostream& out, const PolySystem& f);
std::string to_string(const PolySystem& f);
PolySystem read_polysys(std::istream& in);
PolySystem parse_polysys(const std::string& text);

/// Reads the m equation lines after an already-consumed header. Used by the witness
/// reader, which embeds this format. `line_no` is advanced past consumed lines.
PolySystem read_polysys_body(std::istream& in, int n, int m, std::size_t& line_no);
/// Parses a header line; returns false if it is not a POLYSYS header.
bool parse_polysys_header(const std::string& line, int& n, int& m);

}  // namespace wsample
