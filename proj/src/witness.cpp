#include "wsample/witness.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <Eigen/QR>

#include "wsample/errors.hpp"
#include "wsample/linalg.hpp"
#include "wsample/rng.hpp"

namespace wsample {

ComplexVector AffinePlane::coordinates(const ComplexVector& x) const {
  return basis.adjoint() * (x - offset);
}

double AffinePlane::distance(const ComplexVector& x) const {
  return project_perpendicular(x - offset, basis).norm();
}

void AffinePlane::validate(double tol) const {
  const int n = ambient_dim();
  const int k = dim();
  if (basis.rows() != n) throw ValidationError("dimension", "basis rows do not match offset length");
  if (k < 1 || k > n)
    throw ValidationError("dimension", "plane dimension " + std::to_string(k) + " not in [1, " +
                                           std::to_string(n) + "]");
  if (!offset.allFinite() || !basis.allFinite()) throw ValidationError("finite", "plane has non-finite entries");
  const double defect = orthonormality_defect(basis);
  if (!(defect <= tol))
    throw ValidationError("orthonormal", "basis^* basis deviates from I by " + std::to_string(defect));
}

AffinePlane random_plane(int n, int k, std::uint64_t seed) {
  if (k < 1 || k > n) throw InputError("plane dimension must satisfy 1 <= k <= n");
  for (int attempt = 0; attempt <= 3; ++attempt) {
    Rng rng(seed + static_cast<std::uint64_t>(attempt) * 0x9E3779B97F4A7C15ULL);
    AffinePlane p;
    p.offset = random_unit_circle(n, rng);
    ComplexMatrix raw(n, k);
    for (int j = 0; j < k; ++j) raw.col(j) = random_unit_circle(n, rng);
    try {
      p.basis = orthonormalize(raw);
      return p;
    } catch (const RankError&) {
    }
  }
  throw RankError("random plane basis was rank deficient after retries");
}

ExtrinsicPlane random_extrinsic_plane(int n, int k, std::uint64_t seed) {
  if (k < 0 || k > n) throw InputError("plane dimension must satisfy 0 <= k <= n");
  Rng rng(seed);
  ExtrinsicPlane p;
  p.coefficients.resize(n - k, n);
  for (int i = 0; i < n - k; ++i) p.coefficients.row(i) = random_unit_circle(n, rng).transpose();
  p.constants = random_unit_circle(n - k, rng);
  return p;
}

namespace {

/// Orthonormal basis of the orthogonal complement of span(Q), Q with orthonormal columns.
ComplexMatrix complement(const ComplexMatrix& Q) {
  const Eigen::Index n = Q.rows();
  if (Q.cols() == 0) return ComplexMatrix::Identity(n, n);
  Eigen::HouseholderQR<ComplexMatrix> qr(Q);
  const ComplexMatrix full = qr.householderQ();
  return full.rightCols(n - Q.cols());
}

}  // namespace

AffinePlane extrinsic_to_intrinsic(const ExtrinsicPlane& plane) {
  const ComplexMatrix& A = plane.coefficients;
  const Eigen::Index r = A.rows();
  const Eigen::Index n = A.cols();
  if (plane.constants.size() != r) throw InputError("extrinsic plane constants have the wrong length");
  if (r > n) throw RankError("more equations than unknowns");
  AffinePlane out;
  if (r == 0) {
    out.offset = ComplexVector::Zero(n);
    out.basis = ComplexMatrix::Identity(n, n);
    return out;
  }
  // A^* = Q1 R, so A x = -c has minimum-norm solution x = Q1 z with R^* z = -c.
  const ComplexMatrix Q1 = orthonormalize(A.adjoint());
  const ComplexMatrix R = Q1.adjoint() * A.adjoint();
  out.offset = Q1 * lu_solve(R.adjoint(), -plane.constants);
  out.basis = complement(Q1);
  return out;
}

ExtrinsicPlane intrinsic_to_extrinsic(const AffinePlane& plane) {
  plane.validate();
  ExtrinsicPlane out;
  out.coefficients = complement(plane.basis).adjoint();
  out.constants = -(out.coefficients * plane.offset);
  return out;
}

double min_pairwise_distance(const std::vector<ComplexVector>& points) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) best = std::min(best, (points[i] - points[j]).norm());
  return best;
}

void validate(const WitnessSet& w, const WitnessTolerances& tol) {
  const int n = w.system.num_vars();
  const int k = w.system.num_equations();
  if (w.plane.ambient_dim() != n)
    throw ValidationError("dimension", "plane lives in C^" + std::to_string(w.plane.ambient_dim()) +
                                           ", system in C^" + std::to_string(n));
  if (w.plane.dim() != k)
    throw ValidationError("square", std::to_string(k) + " equations but a " + std::to_string(w.plane.dim()) +
                                        "-plane");
  w.plane.validate(tol.orthonormal);
  for (std::size_t i = 0; i < w.points.size(); ++i) {
    const auto& z = w.points[i];
    if (z.size() != n) throw ValidationError("dimension", "point " + std::to_string(i) + " has wrong length");
    if (!z.allFinite()) throw ValidationError("finite", "point " + std::to_string(i) + " is not finite");
    const double res = evaluate(w.system, z).norm();
    if (!(res <= tol.residual))
      throw ValidationError("residual", "point " + std::to_string(i) + " has residual " + std::to_string(res));
    const double dist = w.plane.distance(z);
    if (!(dist <= tol.membership))
      throw ValidationError("membership",
                            "point " + std::to_string(i) + " is " + std::to_string(dist) + " off the plane");
  }
  const double sep = min_pairwise_distance(w.points);
  if (!(sep > tol.distinct))
    throw ValidationError("distinct", "two points are only " + std::to_string(sep) + " apart");
}

AffinePlane rebase(const WitnessSet& w, int index) {
  if (index < 0 || index >= w.degree())
    throw InputError("witness index " + std::to_string(index) + " out of range [0, " +
                     std::to_string(w.degree()) + ")");
  return AffinePlane{w.points[index], w.plane.basis};
}

// ---------------------------------------------------------------------------
// File format

namespace {

void write_complex(std::ostream& out, const Complex& c) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g %.17g\n", c.real(), c.imag());
  out << buf;
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::string next(const char* expecting) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      const auto last = line.find_last_not_of(" \t\r");
      return line.substr(first, last - first + 1);
    }
    throw ParseError(std::string("unexpected end of file, expecting ") + expecting, line_no_);
  }

  void expect(const std::string& keyword) {
    const auto line = next(keyword.c_str());
    if (line != keyword) throw ParseError("expected '" + keyword + "', found '" + line + "'", line_no_);
  }

  Complex complex_value() {
    const auto line = next("a complex number");
    std::istringstream is(line);
    double re = 0, im = 0;
    std::string extra;
    if (!(is >> re >> im) || (is >> extra))
      throw ParseError("expected '<re> <im>', found '" + line + "'", line_no_);
    if (!std::isfinite(re) || !std::isfinite(im)) throw ParseError("non-finite value", line_no_);
    return {re, im};
  }

  ComplexVector vector(int n) {
    ComplexVector v(n);
    for (int i = 0; i < n; ++i) v[i] = complex_value();
    return v;
  }

  std::istream& stream() { return in_; }
  std::size_t& line_no() { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

}  // namespace

void write_witness(std::ostream& out, const WitnessSet& w) {
  out << "WITNESS v1\n";
  out << "n " << w.ambient_dim() << " k " << w.codim() << " d " << w.degree() << '\n';
  out << "SYSTEM\n";
  write_polysys(out, w.system);
  out << "PLANE OFFSET\n";
  for (const auto& c : w.plane.offset) write_complex(out, c);
  out << "PLANE BASIS\n";
  for (Eigen::Index j = 0; j < w.plane.basis.cols(); ++j)
    for (Eigen::Index i = 0; i < w.plane.basis.rows(); ++i) write_complex(out, w.plane.basis(i, j));
  out << "POINTS\n";
  for (const auto& z : w.points)
    for (const auto& c : z) write_complex(out, c);
  out << "END\n";
}

WitnessSet read_witness(std::istream& in) {
  LineReader reader(in);
  reader.expect("WITNESS v1");
  int n = 0, k = 0, d = 0;
  {
    const auto line = reader.next("the size line");
    std::istringstream is(line);
    std::string tn, tk, td, extra;
    if (!(is >> tn >> n >> tk >> k >> td >> d) || tn != "n" || tk != "k" || td != "d" || (is >> extra))
      throw ParseError("expected 'n <n> k <k> d <d>', found '" + line + "'", reader.line_no());
    if (n < 1 || k < 1 || k > n || d < 0) throw ParseError("sizes out of range", reader.line_no());
  }
  reader.expect("SYSTEM");
  const auto header = reader.next("a POLYSYS header");
  int sn = 0, sm = 0;
  if (!parse_polysys_header(header, sn, sm)) throw ParseError("malformed POLYSYS header", reader.line_no());
  if (sn != n || sm != k)
    throw ParseError("system is " + std::to_string(sm) + " x " + std::to_string(sn) + ", header says " +
                         std::to_string(k) + " x " + std::to_string(n),
                     reader.line_no());
  WitnessSet w;
  w.system = read_polysys_body(reader.stream(), n, k, reader.line_no());
  reader.expect("PLANE OFFSET");
  w.plane.offset = reader.vector(n);
  reader.expect("PLANE BASIS");
  w.plane.basis.resize(n, k);
  for (int j = 0; j < k; ++j) w.plane.basis.col(j) = reader.vector(n);
  reader.expect("POINTS");
  w.points.reserve(d);
  for (int l = 0; l < d; ++l) w.points.push_back(reader.vector(n));
  reader.expect("END");
  validate(w);
  return w;
}

void save_witness(const WitnessSet& w, const std::filesystem::path& path, const std::vector<std::string>& header) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& h : header) out << "# " << h << '\n';
  write_witness(out, w);
  if (!out) throw IoError("write to " + path.string() + " failed");
}

WitnessSet load_witness(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_witness(in);
}

}  // namespace wsample
