#include "wsample/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "wsample/errors.hpp"
#include "wsample/rng.hpp"

namespace wsample {

UnivariatePoly::UnivariatePoly(std::vector<Complex> coeffs) : coefficients(std::move(coeffs)) {
  if (coefficients.empty()) throw InputError("polynomial needs at least one coefficient");
  divisor = coefficients.back();
  if (!(std::abs(divisor) >= 1e-14))
    throw DegeneracyError("leading coefficient " + std::to_string(std::abs(divisor)) + " below 1e-14");
  for (auto& c : coefficients) c /= divisor;
  coefficients.back() = 1.0;
}

Complex UnivariatePoly::operator()(Complex x) const {
  Complex acc = 0.0;
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Complex UnivariatePoly::derivative(Complex x) const {
  Complex acc = 0.0;
  for (int j = degree(); j >= 1; --j) acc = acc * x + static_cast<double>(j) * coefficients[j];
  return acc;
}

double UnivariatePoly::magnitude(double abs_x) const {
  double acc = 0.0;
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * abs_x + std::abs(*it);
  return acc;
}

UnivariatePoly univariate_restrict(const PolySystem& f, const ComplexVector& b, const ComplexVector& v) {
  if (f.num_equations() != 1) throw InputError("univariate_restrict needs a single equation");
  if (v.size() != f.num_vars() || b.size() != f.num_vars()) throw InputError("b and v must have length n");
  if (v.norm() == 0.0) throw InputError("direction v must be nonzero");
  const int d = f[0].degree();
  const PolySystem g = expand_substitution(f, b, v);
  std::vector<Complex> coeffs(static_cast<std::size_t>(d) + 1, 0.0);
  for (const auto& term : g[0].terms()) coeffs[term.exponents[0]] += term.coefficient;
  return UnivariatePoly(std::move(coeffs));
}

namespace {

constexpr double kUnitRoundoff = std::numeric_limits<double>::epsilon() / 2;

/// Starting points on circles whose radii come from the upper convex hull of
/// (j, log |a_j|), a few per hull edge.
std::vector<Complex> newton_polygon_start(const std::vector<Complex>& a) {
  const int d = static_cast<int>(a.size()) - 1;
  std::vector<int> hull;
  for (int j = 0; j <= d; ++j) {
    if (a[j] == Complex(0.0)) continue;
    const double y = std::log(std::abs(a[j]));
    while (hull.size() >= 2) {
      const int i0 = hull[hull.size() - 2];
      const int i1 = hull.back();
      const double y0 = std::log(std::abs(a[i0]));
      const double y1 = std::log(std::abs(a[i1]));
      if ((y1 - y0) * (j - i0) <= (y - y0) * (i1 - i0)) hull.pop_back();
      else break;
    }
    hull.push_back(j);
  }
  std::vector<Complex> z;
  z.reserve(d);
  for (std::size_t h = 1; h < hull.size(); ++h) {
    const int i = hull[h - 1];
    const int k = hull[h];
    const int count = k - i;
    const double radius = std::pow(std::abs(a[i]) / std::abs(a[k]), 1.0 / count);
    for (int m = 0; m < count; ++m) {
      const double theta = 2.0 * std::numbers::pi * m / count + 2.0 * std::numbers::pi * h / d + 0.4;
      z.push_back(std::polar(radius, theta));
    }
  }
  return z;
}

}  // namespace

std::vector<Complex> aberth_roots(const UnivariatePoly& p) {
  const int d = p.degree();
  if (d < 1) throw InputError("aberth_roots needs degree >= 1");
  // Exact zero roots from vanishing low-order coefficients.
  int zeros = 0;
  while (zeros < d && p.coefficients[zeros] == Complex(0.0)) ++zeros;
  std::vector<Complex> roots(zeros, 0.0);
  if (zeros == d) return roots;
  const UnivariatePoly q(std::vector<Complex>(p.coefficients.begin() + zeros, p.coefficients.end()));
  const int m = q.degree();

  std::vector<Complex> z = newton_polygon_start(q.coefficients);
  std::vector<char> done(m, 0);
  std::vector<double> residuals(m, 0.0);
  for (int sweep = 0; sweep < 200; ++sweep) {
    bool all_done = true;
    for (int i = 0; i < m; ++i) {
      if (done[i]) continue;
      const Complex value = q(z[i]);
      residuals[i] = std::abs(value);
      if (residuals[i] <= 32.0 * kUnitRoundoff * q.magnitude(std::abs(z[i]))) {
        done[i] = 1;
        continue;
      }
      all_done = false;
      const Complex ratio = value / q.derivative(z[i]);
      Complex repulsion = 0.0;
      for (int j = 0; j < m; ++j)
        if (j != i) repulsion += 1.0 / (z[i] - z[j]);
      const Complex step = ratio / (1.0 - ratio * repulsion);
      if (std::isfinite(step.real()) && std::isfinite(step.imag())) z[i] -= step;
    }
    if (all_done) {
      roots.insert(roots.end(), z.begin(), z.end());
      return roots;
    }
  }
  for (int i = 0; i < m; ++i) residuals[i] = std::abs(q(z[i]));
  throw RootFailureError("Aberth iteration did not converge in 200 sweeps", residuals);
}

std::string to_string(Balance b) { return b == Balance::none ? "none" : "scaling"; }

Balance parse_balance(const std::string& text) {
  if (text == "none") return Balance::none;
  if (text == "scaling") return Balance::scaling;
  throw InputError("unknown balance '" + text + "' (expected none or scaling)");
}

RealVector balancing_scale(const ComplexMatrix& C) {
  const Eigen::Index n = C.rows();
  ComplexMatrix B = C;
  RealVector scale = RealVector::Ones(n);
  bool converged = false;
  while (!converged) {
    converged = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(B(j, i));
        r += std::abs(B(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      const double s = c + r;
      double f = 1.0;
      double g = r / 2.0;
      while (c < g) {
        f *= 2.0;
        c *= 4.0;
      }
      g = r * 2.0;
      while (c > g) {
        f /= 2.0;
        c /= 4.0;
      }
      if ((c + r) / f < 0.95 * s) {
        converged = false;
        scale[i] *= f;
        B.row(i) /= f;
        B.col(i) *= f;
      }
    }
  }
  return scale;
}

ComplexMatrix companion_matrix(const UnivariatePoly& p) {
  const int d = p.degree();
  ComplexMatrix C = ComplexMatrix::Zero(d, d);
  for (int i = 0; i + 1 < d; ++i) C(i, i + 1) = 1.0;
  for (int j = 0; j < d; ++j) C(d - 1, j) = -p.coefficients[j];
  return C;
}

double root_condition(const UnivariatePoly& p, Complex lambda, Balance balance) {
  const int d = p.degree();
  if (d < 1) throw InputError("root_condition needs degree >= 1");
  if (std::abs(p.coefficients.back() - Complex(1.0)) > 1e-12)
    throw InputError("root_condition needs a monic polynomial");
  ComplexVector x(d), w(d);
  x[0] = 1.0;
  for (int j = 1; j < d; ++j) x[j] = x[j - 1] * lambda;
  w[d - 1] = 1.0;
  for (int j = d - 1; j >= 1; --j) w[j - 1] = lambda * w[j] + p.coefficients[j];
  const double denom = std::abs((w.array() * x.array()).sum());
  if (balance == Balance::scaling) {
    const RealVector D = balancing_scale(companion_matrix(p));
    x = x.cwiseQuotient(D.cast<Complex>());
    w = w.cwiseProduct(D.cast<Complex>());
  }
  if (!(denom > std::numeric_limits<double>::min())) return std::numeric_limits<double>::infinity();
  return x.norm() * w.norm() / denom;
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::offset: return "offset";
    case Regime::origin: return "origin";
    case Regime::local_shift: return "local-shift";
  }
  return "unknown";
}

std::vector<double> inverse_conditions(const UnivariatePoly& p, const std::vector<Complex>& roots, Balance balance) {
  std::vector<double> out;
  out.reserve(roots.size());
  for (const auto& r : roots) out.push_back(1.0 / root_condition(p, r, balance));
  return out;
}

LocalShiftResult local_shift_condition(const PolySystem& f, const ComplexVector& v, Balance balance) {
  const ComplexVector zero = ComplexVector::Zero(f.num_vars());
  const auto origin_roots = aberth_roots(univariate_restrict(f, zero, v));
  const Complex* shift = nullptr;
  for (const auto& r : origin_roots)
    if (std::abs(r) > 1e-10 && (shift == nullptr || std::abs(r) < std::abs(*shift))) shift = &r;
  if (shift == nullptr) throw DegeneracyError("f(v xi) has no nonzero root");

  LocalShiftResult out;
  out.shift = *shift;
  const UnivariatePoly p = univariate_restrict(f, out.shift * v, v);
  const auto roots = aberth_roots(p);
  const auto closest = std::min_element(roots.begin(), roots.end(),
                                        [](Complex a, Complex b) { return std::abs(a) < std::abs(b); });
  out.inverse_cond_at_zero = 1.0 / root_condition(p, 0.0, balance);
  out.smallest_inverse_other = std::numeric_limits<double>::infinity();
  for (auto it = roots.begin(); it != roots.end(); ++it)
    if (it != closest)
      out.smallest_inverse_other = std::min(out.smallest_inverse_other, 1.0 / root_condition(p, *it, balance));
  return out;
}

namespace {

ConditionReport summarize(int degree, Regime regime, const std::vector<double>& inv, int terms) {
  const auto [lo, hi] = std::minmax_element(inv.begin(), inv.end());
  return ConditionReport{degree, regime, *hi, *lo, terms};
}

}  // namespace

std::vector<ConditionReport> run_condition_experiment(const ConditionExperiment& cfg, std::uint64_t seed) {
  if (cfg.n < 1 || cfg.t < 0) throw InputError("condition experiment needs n >= 1 and t >= 0");
  std::vector<ConditionReport> out;
  for (int d : cfg.degrees) {
    try {
      const PolySystem f =
          random_sparse_hypersurface(cfg.n, d, cfg.t, derive_seed(seed, static_cast<std::uint64_t>(d)));
      Rng rng(derive_seed(seed, 1000 + static_cast<std::uint64_t>(d)));
      const ComplexVector b = random_unit_circle(cfg.n, rng);
      ComplexVector v = random_unit_circle(cfg.n, rng);
      v[0] = 1.0;

      const int terms = static_cast<int>(f[0].size());
      const UnivariatePoly offset = univariate_restrict(f, b, v);
      out.push_back(summarize(d, Regime::offset, inverse_conditions(offset, aberth_roots(offset), cfg.balance), terms));
      const UnivariatePoly origin = univariate_restrict(f, ComplexVector::Zero(cfg.n), v);
      out.push_back(summarize(d, Regime::origin, inverse_conditions(origin, aberth_roots(origin), cfg.balance), terms));
      const LocalShiftResult shift = local_shift_condition(f, v, cfg.balance);
      out.push_back(
          ConditionReport{d, Regime::local_shift, shift.inverse_cond_at_zero, shift.smallest_inverse_other, terms});
    } catch (const DegeneracyError& e) {
      throw DegeneracyError("degree " + std::to_string(d) + ": " + e.what());
    } catch (const RootFailureError& e) {
      throw RootFailureError("degree " + std::to_string(d) + ": " + e.what(), e.residuals());
    }
  }
  return out;
}

std::vector<ConditionTableRow> condition_table(const std::vector<ConditionReport>& reports) {
  struct Sums {
    double logs[4] = {0, 0, 0, 0};
    int counts[2] = {0, 0};
  };
  std::map<int, Sums> by_degree;
  auto lg = [](double x) { return std::log10(std::max(x, 1e-300)); };
  for (const auto& r : reports) {
    if (r.regime == Regime::local_shift) continue;
    auto& s = by_degree[r.degree];
    const int base = r.regime == Regime::offset ? 0 : 2;
    s.logs[base] += lg(r.largest_inverse_cond);
    s.logs[base + 1] += lg(r.smallest_inverse_cond);
    ++s.counts[base / 2];
  }
  std::vector<ConditionTableRow> rows;
  for (const auto& [d, s] : by_degree) {
    if (s.counts[0] == 0 || s.counts[1] == 0) continue;
    ConditionTableRow row;
    row.degree = d;
    row.offset_largest = std::pow(10.0, s.logs[0] / s.counts[0]);
    row.offset_smallest = std::pow(10.0, s.logs[1] / s.counts[0]);
    row.origin_largest = std::pow(10.0, s.logs[2] / s.counts[1]);
    row.origin_smallest = std::pow(10.0, s.logs[3] / s.counts[1]);
    row.ratio_smallest = row.origin_smallest / row.offset_smallest;
    row.ratio_largest = row.origin_largest / row.offset_largest;
    row.offset_spread = row.offset_largest / row.offset_smallest;
    row.origin_spread = row.origin_largest / row.origin_smallest;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace wsample
