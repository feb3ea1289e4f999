#include <doctest.h>

#include "oracles.hpp"
#include "wsample/conditioning.hpp"
#include "wsample/errors.hpp"

using namespace wsample;

namespace {

PolySystem one_var(std::vector<std::pair<Complex, int>> terms) {
  std::vector<Monomial> out;
  for (auto [c, e] : terms) out.push_back({c, {e}});
  return PolySystem(1, {Polynomial(1, out)});
}

UnivariatePoly random_monic(int d, Rng& rng) {
  std::vector<Complex> c(d + 1);
  for (int j = 0; j < d; ++j) c[j] = std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform());
  c[d] = 1.0;
  return UnivariatePoly(c);
}

/// Ascending coefficients of prod_i (xi - r_i).
std::vector<Complex> from_roots(const std::vector<Complex>& roots) {
  std::vector<Complex> c{1.0};
  for (Complex r : roots) {
    std::vector<Complex> next(c.size() + 1, 0.0);
    for (std::size_t j = 0; j < c.size(); ++j) {
      next[j + 1] += c[j];
      next[j] -= r * c[j];
    }
    c = next;
  }
  return c;
}

std::vector<ConditionReport> of_regime(const std::vector<ConditionReport>& all, Regime r) {
  std::vector<ConditionReport> out;
  std::copy_if(all.begin(), all.end(), std::back_inserter(out), [&](const auto& x) { return x.regime == r; });
  return out;
}

}  // namespace

TEST_SUITE("conditioning") {
  TEST_CASE("restriction hand cases") {
    const ComplexVector one = ComplexVector::Ones(1), zero = ComplexVector::Zero(1);
    const UnivariatePoly sq = univariate_restrict(one_var({{1.0, 2}}), zero, one);
    REQUIRE(sq.degree() == 2);
    CHECK(sq.coefficients == std::vector<Complex>{0.0, 0.0, 1.0});
    CHECK(sq.monic());

    const UnivariatePoly shifted = univariate_restrict(one_var({{1.0, 2}, {-1.0, 0}}), one, one);
    CHECK(std::abs(shifted.coefficients[0]) < 1e-15);
    CHECK(std::abs(shifted.coefficients[1] - 2.0) < 1e-15);
    CHECK(std::abs(shifted.coefficients[2] - 1.0) < 1e-15);

    const UnivariatePoly scaled = univariate_restrict(one_var({{1.0, 2}}), zero, ComplexVector::Constant(1, 2.0));
    CHECK(!scaled.monic());
    CHECK(std::abs(scaled.divisor - 4.0) < 1e-14);
    CHECK(std::abs(scaled.coefficients.back() - 1.0) < 1e-15);
  }

  TEST_CASE("restriction matches evaluation along the line") {
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
      const PolySystem f = random_sparse_hypersurface(4, 6, 3, 50 + trial);
      const ComplexVector b = oracle::random_vector(4, rng), v = oracle::random_vector(4, rng);
      const UnivariatePoly p = univariate_restrict(f, b, v);
      CHECK(p.degree() == 6);
      for (int s = 0; s < 5; ++s) {
        const Complex xi = oracle::random_vector(1, rng)[0];
        const Complex direct = oracle::eval_terms(f, ComplexVector(b + v * xi))[0];
        CHECK(std::abs(p(xi) * p.divisor - direct) <= 1e-10 * (1 + std::abs(direct)));
      }
    }
  }

  TEST_CASE("leading direction coordinate one gives a monic restriction at the origin") {
    Rng rng(8);
    for (int d : {10, 20}) {
      const PolySystem f = random_sparse_hypersurface(10, d, 5, d);
      ComplexVector v = random_unit_circle(10, rng);
      v[0] = 1.0;
      CHECK(univariate_restrict(f, ComplexVector::Zero(10), v).monic());
    }
  }

  TEST_CASE("restriction errors") {
    const PolySystem f = one_var({{1.0, 2}});
    CHECK_THROWS_AS(univariate_restrict(f, ComplexVector::Zero(1), ComplexVector::Zero(1)), InputError);
    CHECK_THROWS_AS(univariate_restrict(f, ComplexVector::Zero(2), ComplexVector::Ones(1)), InputError);
    CHECK_THROWS_AS(univariate_restrict(adjacent_minors(3), ComplexVector::Zero(6), ComplexVector::Ones(6)),
                    InputError);
    // x1 x2 along (1, 0) loses its quadratic term.
    const PolySystem g(2, {Polynomial(2, {{1.0, {1, 1}}, {1.0, {0, 0}}})});
    ComplexVector v(2);
    v << 1.0, 0.0;
    CHECK_THROWS_AS(univariate_restrict(g, ComplexVector::Zero(2), v), DegeneracyError);
    CHECK_THROWS_AS(UnivariatePoly(std::vector<Complex>{}), InputError);
  }

  TEST_CASE("aberth hand cases") {
    auto two = aberth_roots(UnivariatePoly({-1.0, 0.0, 1.0}));
    std::sort(two.begin(), two.end(), [](Complex a, Complex b) { return a.real() < b.real(); });
    CHECK(std::abs(two[0] + 1.0) < 1e-12);
    CHECK(std::abs(two[1] - 1.0) < 1e-12);

    const auto three = aberth_roots(UnivariatePoly({-1.0, 0.0, 0.0, 1.0}));
    REQUIRE(three.size() == 3);
    for (int k = 0; k < 3; ++k) {
      const Complex w = std::polar(1.0, 2.0 * std::numbers::pi * k / 3);
      double best = 1.0;
      for (Complex r : three) best = std::min(best, std::abs(r - w));
      CHECK(best < 1e-12);
    }
    CHECK_THROWS_AS(aberth_roots(UnivariatePoly({1.0})), InputError);
  }

  TEST_CASE("aberth roots reconstruct the polynomial") {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
      const UnivariatePoly p = random_monic(10, rng);
      const auto roots = aberth_roots(p);
      REQUIRE(roots.size() == 10);
      for (Complex r : roots) CHECK(std::abs(p(r)) <= 1e-10 * (1 + std::pow(std::abs(r), 10)));
      const auto c = from_roots(roots);
      for (int j = 0; j <= 10; ++j) CHECK(std::abs(c[j] - p.coefficients[j]) < 1e-8);
    }
  }

  TEST_CASE("aberth on high degree restrictions") {
    Rng rng(4);
    for (int d : {10, 20, 30, 40}) {
      const PolySystem f = random_sparse_hypersurface(10, d, 5, d);
      const UnivariatePoly p = univariate_restrict(f, random_unit_circle(10, rng), random_unit_circle(10, rng));
      const auto roots = aberth_roots(p);
      REQUIRE(static_cast<int>(roots.size()) == d);
      for (Complex r : roots) CHECK(std::abs(p(r)) <= 1e-8 * std::pow(1 + std::abs(r), d));
    }
  }

  TEST_CASE("root condition hand cases") {
    CHECK(root_condition(UnivariatePoly({-0.3, 1.0}), 0.3) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(root_condition(UnivariatePoly({-1.0, 0.0, 1.0}), 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(root_condition(UnivariatePoly({-1.0, 0.0, 1.0}), -1.0) == doctest::Approx(1.0).epsilon(1e-14));
    UnivariatePoly not_monic;
    not_monic.coefficients = {1.0, 2.0};
    CHECK_THROWS_AS(root_condition(not_monic, -0.5), InputError);
  }

  TEST_CASE("unitary companion matrices are perfectly conditioned") {
    for (int d : {3, 7, 16}) {
      const Complex c = std::polar(1.0, 0.37 * d);
      std::vector<Complex> coeffs(d + 1, 0.0);
      coeffs[0] = -c;
      coeffs[d] = 1.0;
      const UnivariatePoly p(coeffs);
      for (Complex r : aberth_roots(p)) {
        CHECK(std::abs(root_condition(p, r) - 1.0) < 1e-10);
        CHECK(std::abs(root_condition(p, r, Balance::scaling) - 1.0) < 1e-10);
      }
    }
  }

  TEST_CASE("root condition against inverse iteration") {
    Rng rng(13);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<Complex> c(9);
      for (auto& x : c) x = oracle::random_vector(1, rng, 2.0)[0];
      c[8] = 1.0;
      const UnivariatePoly p(c);
      const ComplexMatrix C = oracle::companion(c);
      const RealVector D = balancing_scale(companion_matrix(p));
      const ComplexMatrix Cb = D.cwiseInverse().cast<Complex>().asDiagonal() * C * D.cast<Complex>().asDiagonal();
      for (Complex r : aberth_roots(p)) {
        CAPTURE(r);
        CHECK(root_condition(p, r) == doctest::Approx(oracle::eigen_condition(C, r)).epsilon(1e-4));
        CHECK(root_condition(p, r, Balance::scaling) ==
              doctest::Approx(oracle::eigen_condition(Cb, r)).epsilon(1e-4));
      }
    }
  }

  TEST_CASE("companion matrix layout") {
    const UnivariatePoly p({2.0, 3.0, 5.0, 1.0});
    const ComplexMatrix C = companion_matrix(p);
    CHECK((C - oracle::companion(p.coefficients)).norm() == 0.0);
    const RealVector D = balancing_scale(C);
    for (double s : D) CHECK(std::abs(std::log2(s) - std::round(std::log2(s))) == 0.0);
  }

  TEST_CASE("root condition is invariant under a unit phase") {
    Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
      const UnivariatePoly p = random_monic(8, rng);
      const Complex phase = std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform());
      std::vector<Complex> rotated = p.coefficients;
      for (auto& x : rotated) x *= phase;
      const UnivariatePoly q(rotated);
      for (Complex r : aberth_roots(p))
        for (Balance b : {Balance::none, Balance::scaling})
          CHECK(root_condition(q, r, b) == doctest::Approx(root_condition(p, r, b)).epsilon(1e-10));
    }
  }

  TEST_CASE("inverse conditions lie in (0, 1]") {
    Rng rng(29);
    for (int trial = 0; trial < 10; ++trial) {
      const UnivariatePoly p = random_monic(12, rng);
      for (Balance b : {Balance::none, Balance::scaling})
        for (double x : inverse_conditions(p, aberth_roots(p), b)) {
          CHECK(x > 0.0);
          CHECK(x <= 1.0 + 1e-12);
        }
    }
  }

  TEST_CASE("local shift conditioning") {
    const auto reports = run_condition_experiment(ConditionExperiment{10, 5, {10, 30}, Balance::scaling}, 1);
    const auto shift = of_regime(reports, Regime::local_shift);
    REQUIRE(shift.size() == 2);
    for (const auto& r : shift) CHECK(r.largest_inverse_cond >= 0.5);
    CHECK(shift[0].smallest_inverse_cond < 1e-2);
    CHECK(shift[1].smallest_inverse_cond < 1e-8);

    Rng rng(2);
    ComplexVector v = random_unit_circle(10, rng);
    v[0] = 1.0;
    const PolySystem f = random_sparse_hypersurface(10, 10, 5, 3);
    const LocalShiftResult s = local_shift_condition(f, v);
    CHECK(oracle::eval_terms(f, ComplexVector(s.shift * v)).norm() < 1e-8);
    CHECK(std::abs(s.shift) > 1e-10);
    CHECK(s.inverse_cond_at_zero >= 0.5);
    CHECK(s.smallest_inverse_other <= 1.0);
  }

  TEST_CASE("experiment trends over five seeds") {
    std::vector<ConditionReport> all;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto r = run_condition_experiment(ConditionExperiment{}, seed);
      REQUIRE(r.size() == 12);
      all.insert(all.end(), r.begin(), r.end());
    }
    for (const auto& r : all) {
      CHECK(r.smallest_inverse_cond <= r.largest_inverse_cond);
      CHECK(r.largest_inverse_cond <= 1.0 + 1e-12);
      if (r.regime == Regime::origin) CHECK(r.smallest_inverse_cond > 1e-2);
    }
    const auto table = condition_table(all);
    REQUIRE(table.size() == 4);
    CHECK(table[0].degree == 10);
    CHECK(table[3].degree == 40);
    CHECK(table[3].offset_smallest <= 1e-3 * table[0].offset_smallest);
    for (std::size_t i = 1; i < table.size(); ++i) {
      CHECK(table[i].ratio_smallest > table[i - 1].ratio_smallest);
      CHECK(table[i].offset_spread > table[i - 1].offset_spread);
    }
    for (const auto& row : table) {
      CHECK(row.ratio_smallest == doctest::Approx(row.origin_smallest / row.offset_smallest));
      CHECK(row.ratio_largest == doctest::Approx(row.origin_largest / row.offset_largest));
      CHECK(row.offset_spread == doctest::Approx(row.offset_largest / row.offset_smallest));
      CHECK(row.origin_spread == doctest::Approx(row.origin_largest / row.origin_smallest));
    }
  }

  TEST_CASE("experiment inputs and names") {
    CHECK_THROWS_AS(run_condition_experiment(ConditionExperiment{0, 5, {10}, Balance::none}, 1), InputError);
    CHECK(run_condition_experiment(ConditionExperiment{10, 5, {10}, Balance::none}, 1).size() == 3);
    CHECK(parse_balance("none") == Balance::none);
    CHECK(parse_balance("scaling") == Balance::scaling);
    CHECK_THROWS_AS(parse_balance("qr"), InputError);
    CHECK(to_string(Regime::local_shift) == "local-shift");
  }
}
