#include "wsample/polysys.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "wsample/errors.hpp"
#include "wsample/linalg.hpp"
#include "wsample/rng.hpp"

namespace wsample {

int Monomial::degree() const { return std::accumulate(exponents.begin(), exponents.end(), 0); }

bool grlex_less(const std::vector<int>& a, const std::vector<int>& b) {
  const int da = std::accumulate(a.begin(), a.end(), 0);
  const int db = std::accumulate(b.begin(), b.end(), 0);
  if (da != db) return da < db;
  return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

namespace {

void check_finite(const Complex& c) {
  if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
    throw InputError("non-finite coefficient");
}

}  // namespace

Polynomial::Polynomial(int num_vars, std::vector<Monomial> terms) : num_vars_(num_vars) {
  if (num_vars < 0) throw InputError("negative number of variables");
  for (const auto& t : terms) {
    if (static_cast<int>(t.exponents.size()) != num_vars)
      throw InputError("exponent vector length " + std::to_string(t.exponents.size()) +
                       " does not match " + std::to_string(num_vars) + " variables");
    if (std::any_of(t.exponents.begin(), t.exponents.end(), [](int e) { return e < 0; }))
      throw InputError("negative exponent");
    check_finite(t.coefficient);
  }
  // Highest grlex term first.
  std::stable_sort(terms.begin(), terms.end(), [](const Monomial& a, const Monomial& b) {
    return grlex_less(b.exponents, a.exponents);
  });
  for (auto& t : terms) {
    if (!terms_.empty() && terms_.back().exponents == t.exponents)
      terms_.back().coefficient += t.coefficient;
    else
      terms_.push_back(std::move(t));
  }
  std::erase_if(terms_, [](const Monomial& t) { return t.coefficient == Complex(0.0, 0.0); });
}

int Polynomial::degree() const { return terms_.empty() ? 0 : terms_.front().degree(); }

PolySystem::PolySystem(int num_vars, std::vector<Polynomial> equations)
    : num_vars_(num_vars), equations_(std::move(equations)), max_exponents_(num_vars, 0) {
  if (num_vars < 0) throw InputError("negative number of variables");
  for (const auto& p : equations_) {
    if (p.num_vars() != num_vars && !p.empty())
      throw InputError("equation has " + std::to_string(p.num_vars()) + " variables, expected " +
                       std::to_string(num_vars));
    for (const auto& t : p.terms())
      for (int j = 0; j < num_vars; ++j)
        max_exponents_[j] = std::max(max_exponents_[j], t.exponents[j]);
  }
}

std::vector<int> PolySystem::degrees() const {
  std::vector<int> out;
  out.reserve(equations_.size());
  for (const auto& p : equations_) out.push_back(p.degree());
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

/// powers[j][e] = x_j^e for e up to the largest exponent of x_j in f.
class PowerCache {
 public:
  PowerCache(const PolySystem& f, const ComplexVector& x) {
    const int n = f.num_vars();
    if (x.size() != n)
      throw InputError("point has length " + std::to_string(x.size()) + ", system has " +
                       std::to_string(n) + " variables");
    powers_.resize(n);
    for (int j = 0; j < n; ++j) {
      const int top = f.max_exponents()[j];
      auto& row = powers_[j];
      row.resize(top + 1);
      row[0] = 1.0;
      for (int e = 1; e <= top; ++e) row[e] = row[e - 1] * x[j];
    }
  }
  const Complex& operator()(int j, int e) const { return powers_[j][e]; }

 private:
  std::vector<std::vector<Complex>> powers_;
};

Complex monomial_value(const Monomial& t, const PowerCache& pw) {
  Complex v = t.coefficient;
  for (std::size_t j = 0; j < t.exponents.size(); ++j)
    if (t.exponents[j] != 0) v *= pw(static_cast<int>(j), t.exponents[j]);
  return v;
}

}  // namespace

ComplexVector evaluate(const PolySystem& f, const ComplexVector& x) {
  const PowerCache pw(f, x);
  ComplexVector out(f.num_equations());
  for (int i = 0; i < f.num_equations(); ++i) {
    Complex acc = 0.0;
    for (const auto& t : f[i].terms()) acc += monomial_value(t, pw);
    out[i] = acc;
  }
  return out;
}

void evaluate_with_jacobian(const PolySystem& f, const ComplexVector& x, ComplexVector& value,
                            ComplexMatrix& jac) {
  const PowerCache pw(f, x);
  const int m = f.num_equations();
  const int n = f.num_vars();
  value.setZero(m);
  jac.setZero(m, n);
  std::vector<int> support;
  for (int i = 0; i < m; ++i) {
    for (const auto& t : f[i].terms()) {
      support.clear();
      for (int j = 0; j < n; ++j)
        if (t.exponents[j] != 0) support.push_back(j);
      value[i] += monomial_value(t, pw);
      for (int j : support) {
        Complex d = t.coefficient * static_cast<double>(t.exponents[j]) * pw(j, t.exponents[j] - 1);
        for (int l : support)
          if (l != j) d *= pw(l, t.exponents[l]);
        jac(i, j) += d;
      }
    }
  }
}

ComplexMatrix jacobian(const PolySystem& f, const ComplexVector& x) {
  ComplexVector value;
  ComplexMatrix jac;
  evaluate_with_jacobian(f, x, value, jac);
  return jac;
}

// ---------------------------------------------------------------------------
// Restriction to an affine subspace

AffineRestriction::AffineRestriction(const PolySystem& f, ComplexVector offset, ComplexMatrix basis)
    : f_(&f), offset_(std::move(offset)), basis_(std::move(basis)) {
  if (offset_.size() != f.num_vars() || basis_.rows() != f.num_vars())
    throw InputError("restriction dimensions do not match the system");
}

ComplexVector AffineRestriction::eval(const ComplexVector& xi) const { return evaluate(*f_, point(xi)); }

ComplexMatrix AffineRestriction::jac(const ComplexVector& xi) const {
  return jacobian(*f_, point(xi)) * basis_;
}

void AffineRestriction::eval_with_jac(const ComplexVector& xi, ComplexVector& value,
                                      ComplexMatrix& jac) const {
  ComplexMatrix full;
  evaluate_with_jacobian(*f_, point(xi), value, full);
  jac.noalias() = full * basis_;
}

AffineRestriction restrict(const PolySystem& f, const ComplexVector& b, const ComplexMatrix& V) {
  if (orthonormality_defect(V) > 1e-10) throw InputError("restriction basis is not orthonormal");
  return AffineRestriction(f, b, V);
}

// ---------------------------------------------------------------------------
// Symbolic substitution

namespace {

using SparseTerms = std::map<std::vector<int>, Complex>;

SparseTerms multiply(const SparseTerms& a, const SparseTerms& b) {
  SparseTerms out;
  for (const auto& [ea, ca] : a)
    for (const auto& [eb, cb] : b) {
      std::vector<int> e(ea.size());
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
      out[std::move(e)] += ca * cb;
    }
  return out;
}

}  // namespace

PolySystem expand_substitution(const PolySystem& f, const ComplexVector& b, const ComplexMatrix& V) {
  const int n = f.num_vars();
  const int k = static_cast<int>(V.cols());
  if (b.size() != n || V.rows() != n) throw InputError("substitution dimensions do not match");

  // linear_powers[j][e] = (b_j + sum_i V(j, i) xi_i)^e, built lazily.
  std::vector<std::vector<SparseTerms>> linear_powers(n);
  auto power_of = [&](int j, int e) -> const SparseTerms& {
    auto& cache = linear_powers[j];
    if (cache.empty()) {
      cache.push_back({{std::vector<int>(k, 0), Complex(1.0)}});
      SparseTerms lin;
      if (b[j] != Complex(0.0)) lin[std::vector<int>(k, 0)] = b[j];
      for (int i = 0; i < k; ++i) {
        if (V(j, i) == Complex(0.0)) continue;
        std::vector<int> ei(k, 0);
        ei[i] = 1;
        lin[ei] = V(j, i);
      }
      cache.push_back(std::move(lin));
    }
    while (static_cast<int>(cache.size()) <= e) cache.push_back(multiply(cache.back(), cache[1]));
    return cache[e];
  };

  std::vector<Polynomial> out;
  out.reserve(f.num_equations());
  for (const auto& p : f.equations()) {
    SparseTerms acc;
    for (const auto& t : p.terms()) {
      SparseTerms prod{{std::vector<int>(k, 0), t.coefficient}};
      for (int j = 0; j < n; ++j)
        if (t.exponents[j] != 0) prod = multiply(prod, power_of(j, t.exponents[j]));
      for (auto& [e, c] : prod) acc[e] += c;
    }
    std::vector<Monomial> terms;
    terms.reserve(acc.size());
    for (auto& [e, c] : acc) terms.push_back({c, e});
    out.emplace_back(k, std::move(terms));
  }
  return PolySystem(k, std::move(out));
}

// ---------------------------------------------------------------------------
// Squaring and generators

PolySystem square_system(const PolySystem& f, int k, std::uint64_t seed) {
  const int m = f.num_equations();
  if (k < 0 || m < k)
    throw InputError("cannot square " + std::to_string(m) + " equations down to " + std::to_string(k));
  if (m == k) return f;
  Rng rng(seed);
  std::vector<Polynomial> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i) {
    std::vector<Monomial> terms;
    for (int j = 0; j < m; ++j) {
      const Complex c = rng.unit_circle();
      for (const auto& t : f[j].terms()) terms.push_back({c * t.coefficient, t.exponents});
    }
    out.emplace_back(f.num_vars(), std::move(terms));
  }
  return PolySystem(f.num_vars(), std::move(out));
}

PolySystem randomize_by_degree(const PolySystem& f, int k, std::uint64_t seed) {
  const int m = f.num_equations();
  if (k < 0 || m < k)
    throw InputError("cannot randomize " + std::to_string(m) + " equations down to " + std::to_string(k));
  if (m == k) return f;
  const std::vector<int> degrees = f.degrees();
  std::vector<int> order(m);
  for (int j = 0; j < m; ++j) order[j] = j;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return degrees[a] > degrees[b]; });
  Rng rng(seed);
  std::vector<Polynomial> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i) {
    std::vector<Monomial> terms = f[order[i]].terms();
    for (int j = k; j < m; ++j) {
      const Complex c = rng.unit_circle();
      for (const auto& t : f[order[j]].terms()) terms.push_back({c * t.coefficient, t.exponents});
    }
    out.emplace_back(f.num_vars(), std::move(terms));
  }
  return PolySystem(f.num_vars(), std::move(out));
}

PolySystem adjacent_minors(int cols) {
  if (cols < 2) throw InputError("adjacent minors need at least 2 columns");
  const int n = 2 * cols;
  auto top = [](int j) { return j; };
  auto bottom = [cols](int j) { return cols + j; };
  std::vector<Polynomial> eqs;
  for (int j = 0; j + 1 < cols; ++j) {
    std::vector<int> e1(n, 0), e2(n, 0);
    e1[top(j)] = 1;
    e1[bottom(j + 1)] = 1;
    e2[bottom(j)] = 1;
    e2[top(j + 1)] = 1;
    eqs.emplace_back(n, std::vector<Monomial>{{1.0, e1}, {-1.0, e2}});
  }
  return PolySystem(n, std::move(eqs));
}

PolySystem cyclic_roots(int n) {
  if (n < 2) throw InputError("cyclic n-roots needs n >= 2");
  std::vector<Polynomial> eqs;
  for (int i = 1; i < n; ++i) {
    std::vector<Monomial> terms;
    for (int j = 0; j < n; ++j) {
      std::vector<int> e(n, 0);
      for (int l = 0; l < i; ++l) e[(j + l) % n] += 1;
      terms.push_back({1.0, std::move(e)});
    }
    eqs.emplace_back(n, std::move(terms));
  }
  eqs.emplace_back(n, std::vector<Monomial>{{1.0, std::vector<int>(n, 1)}, {-1.0, std::vector<int>(n, 0)}});
  return PolySystem(n, std::move(eqs));
}

namespace {

/// Uniform over all exponent vectors in n variables with total degree <= max_degree:
/// a uniformly random n-subset of max_degree + n slots, read as stars and bars.
std::vector<int> random_exponents(Rng& rng, int n, int max_degree) {
  const int slots = max_degree + n;
  std::vector<int> picks;
  // Floyd's sampling of n distinct slots.
  for (int j = slots - n; j < slots; ++j) {
    const int r = static_cast<int>(rng.below(static_cast<std::uint64_t>(j) + 1));
    if (std::find(picks.begin(), picks.end(), r) == picks.end())
      picks.push_back(r);
    else
      picks.push_back(j);
  }
  std::sort(picks.begin(), picks.end());
  std::vector<int> e(n);
  int prev = -1;
  for (int j = 0; j < n; ++j) {
    e[j] = picks[j] - prev - 1;
    prev = picks[j];
  }
  return e;
}

}  // namespace

PolySystem random_sparse_hypersurface(int n, int d, int t, std::uint64_t seed) {
  if (n < 1 || d < 2 || t < 0)
    throw InputError("hypersurface needs n >= 1, d >= 2, t >= 0");
  Rng rng(seed);
  std::vector<Monomial> terms;
  std::vector<int> lead(n, 0);
  lead[0] = d;
  terms.push_back({1.0, lead});
  for (int i = 0; i < t; ++i) {
    const Complex c = rng.unit_circle();
    terms.push_back({c, random_exponents(rng, n, d - 1)});
  }
  for (int i = 0; i < n; ++i) {
    std::vector<int> e(n, 0);
    e[i] = 1;
    terms.push_back({rng.unit_circle(), std::move(e)});
  }
  std::vector<Polynomial> eqs;
  eqs.emplace_back(n, std::move(terms));
  return PolySystem(n, std::move(eqs));
}

// ---------------------------------------------------------------------------
// Text format

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_term(const Monomial& t) {
  std::string s = "(" + format_double(t.coefficient.real()) + "," + format_double(t.coefficient.imag()) + ")";
  for (std::size_t j = 0; j < t.exponents.size(); ++j) {
    if (t.exponents[j] == 0) continue;
    s += "*x" + std::to_string(j + 1);
    if (t.exponents[j] != 1) s += "^" + std::to_string(t.exponents[j]);
  }
  return s;
}

double parse_double(std::string_view s, std::size_t line) {
  // from_chars for double is not available everywhere; strtod on a bounded copy.
  const std::string copy(s);
  char* end = nullptr;
  const double v = std::strtod(copy.c_str(), &end);
  if (copy.empty() || end != copy.c_str() + copy.size()) throw ParseError("bad number '" + copy + "'", line);
  return v;
}

int parse_int(std::string_view s, std::size_t line) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError("bad integer '" + std::string(s) + "'", line);
  return v;
}

std::string strip_spaces(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
  return out;
}

Monomial parse_term(std::string_view s, int n, std::size_t line) {
  if (s.empty() || s.front() != '(') throw ParseError("term must start with '('", line);
  const auto close = s.find(')');
  if (close == std::string_view::npos) throw ParseError("unterminated coefficient", line);
  const auto inner = s.substr(1, close - 1);
  const auto comma = inner.find(',');
  if (comma == std::string_view::npos) throw ParseError("coefficient needs '(re,im)'", line);
  Monomial t{{parse_double(inner.substr(0, comma), line), parse_double(inner.substr(comma + 1), line)},
             std::vector<int>(n, 0)};
  auto rest = s.substr(close + 1);
  while (!rest.empty()) {
    if (rest.size() < 3 || rest[0] != '*' || rest[1] != 'x') throw ParseError("expected '*x<j>'", line);
    rest.remove_prefix(2);
    auto stop = rest.find_first_of("*^");
    const auto var = parse_int(rest.substr(0, stop), line);
    if (var < 1 || var > n) throw ParseError("variable x" + std::to_string(var) + " out of range", line);
    rest = stop == std::string_view::npos ? std::string_view{} : rest.substr(stop);
    int e = 1;
    if (!rest.empty() && rest[0] == '^') {
      rest.remove_prefix(1);
      stop = rest.find('*');
      e = parse_int(rest.substr(0, stop), line);
      if (e < 0) throw ParseError("negative exponent", line);
      rest = stop == std::string_view::npos ? std::string_view{} : rest.substr(stop);
    }
    t.exponents[var - 1] += e;
  }
  if (!std::isfinite(t.coefficient.real()) || !std::isfinite(t.coefficient.imag()))
    throw ParseError("non-finite coefficient", line);
  return t;
}

Polynomial parse_equation(const std::string& raw, int n, std::size_t line) {
  const std::string s = strip_spaces(raw);
  if (s.empty()) throw ParseError("empty equation line", line);
  std::vector<Monomial> terms;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i < s.size()) {
      if (s[i] == '(') ++depth;
      if (s[i] == ')') --depth;
      if (depth < 0) throw ParseError("unbalanced ')'", line);
      if (!(s[i] == '+' && depth == 0)) continue;
    }
    terms.push_back(parse_term(std::string_view(s).substr(start, i - start), n, line));
    start = i + 1;
  }
  if (depth != 0) throw ParseError("unbalanced '('", line);
  return Polynomial(n, std::move(terms));
}

bool next_content_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    return true;
  }
  return false;
}

}  // namespace

void write_polysys(std::ostream& out, const PolySystem& f) {
  out << "POLYSYS n=" << f.num_vars() << " m=" << f.num_equations() << '\n';
  for (const auto& p : f.equations()) {
    if (p.empty()) {
      out << "(0,0)\n";
      continue;
    }
    bool first = true;
    for (const auto& t : p.terms()) {
      if (!first) out << " + ";
      out << format_term(t);
      first = false;
    }
    out << '\n';
  }
}

std::string to_string(const PolySystem& f) {
  std::ostringstream os;
  write_polysys(os, f);
  return os.str();
}

bool parse_polysys_header(const std::string& raw, int& n, int& m) {
  std::istringstream is(raw);
  std::string tag, ns, ms;
  if (!(is >> tag >> ns >> ms) || tag != "POLYSYS") return false;
  if (ns.rfind("n=", 0) != 0 || ms.rfind("m=", 0) != 0) return false;
  try {
    n = parse_int(std::string_view(ns).substr(2), 0);
    m = parse_int(std::string_view(ms).substr(2), 0);
  } catch (const ParseError&) {
    return false;
  }
  std::string extra;
  return !(is >> extra) && n >= 0 && m >= 0;
}

PolySystem read_polysys_body(std::istream& in, int n, int m, std::size_t& line_no) {
  std::vector<Polynomial> eqs;
  std::string line;
  for (int i = 0; i < m; ++i) {
    if (!next_content_line(in, line, line_no))
      throw ParseError("expected " + std::to_string(m) + " equations, found " + std::to_string(i), line_no);
    eqs.push_back(parse_equation(line, n, line_no));
  }
  return PolySystem(n, std::move(eqs));
}

PolySystem read_polysys(std::istream& in) {
  std::size_t line_no = 0;
  std::string line;
  if (!next_content_line(in, line, line_no)) throw ParseError("missing POLYSYS header", line_no);
  int n = 0, m = 0;
  if (!parse_polysys_header(line, n, m)) throw ParseError("malformed POLYSYS header", line_no);
  return read_polysys_body(in, n, m, line_no);
}

PolySystem parse_polysys(const std::string& text) {
  std::istringstream is(text);
  return read_polysys(is);
}

}  // namespace wsample
