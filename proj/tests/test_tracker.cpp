#include <doctest.h>

#include <cstdlib>
#include <numeric>

#include "oracles.hpp"
#include "wsample/errors.hpp"
#include "wsample/linalg.hpp"
#include "wsample/solver.hpp"
#include "wsample/tracker.hpp"

using namespace wsample;

namespace {

PolySystem univariate(std::vector<Monomial> terms) { return PolySystem(1, {Polynomial(1, std::move(terms))}); }

AffineRestriction line_at(const PolySystem& f, Complex b) {
  return restrict(f, ComplexVector::Constant(1, b), ComplexMatrix::Ones(1, 1));
}

const WitnessSet& benchmark(int which) {
  static const std::vector<WitnessSet> sets = [] {
    std::vector<WitnessSet> out;
    out.push_back(witness_generate(adjacent_minors(3), 2, 7, TrackerConfig{}));
    out.push_back(witness_generate(adjacent_minors(4), 3, 8, TrackerConfig{}));
    out.push_back(witness_generate(random_sparse_hypersurface(3, 4, 2, 1), 1, 1, TrackerConfig{}));
    return out;
  }();
  return sets[which];
}

/// The plane moved by `distance` along a unit direction perpendicular to it.
AffinePlane translated(const AffinePlane& p, double distance, std::uint64_t seed) {
  Rng rng(seed);
  const ComplexVector u = project_perpendicular(oracle::random_vector(p.ambient_dim(), rng), p.basis);
  return AffinePlane{p.offset + distance * u.normalized(), p.basis};
}

double mean_iterations(const std::vector<PathStats>& stats) {
  double total = 0.0;
  for (const auto& s : stats) total += s.newton_iterations;
  return total / static_cast<double>(stats.size());
}

}  // namespace

TEST_SUITE("tracker") {
  TEST_CASE("config validation") {
    TrackerConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.h0 = 2.0;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    cfg = {};
    cfg.rho = 1.0;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    cfg = {};
    cfg.eps = 0.0;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    cfg = {};
    cfg.delta = -1.0;
    CHECK_THROWS_AS(cfg.validate(), InputError);
  }

  TEST_CASE("newton_correct at a solution does nothing") {
    const PolySystem f = univariate({{1.0, {2}}, {-1.0, {0}}});
    const auto r = newton_correct(line_at(f, 1.0), 1e-10, 6);
    CHECK(r.converged);
    CHECK(r.iterations == 0);
    CHECK(r.xi.norm() == 0.0);
  }

  TEST_CASE("newton_correct converges quadratically at a simple root") {
    const PolySystem f = univariate({{1.0, {2}}, {-1.0, {0}}});
    const auto r = newton_correct(line_at(f, 1.2), 1e-14, 10);
    REQUIRE(r.converged);
    CHECK(std::abs(r.xi[0] + 0.2) <= 1e-14);
    for (std::size_t i = 1; i < r.residuals.size(); ++i)
      if (r.residuals[i - 1] < 0.1) CHECK(r.residuals[i] <= 2.0 * r.residuals[i - 1] * r.residuals[i - 1] + 1e-16);
  }

  TEST_CASE("newton_correct gives up at a double root") {
    const PolySystem f = univariate({{1.0, {2}}});
    const auto r = newton_correct(line_at(f, 0.1), 1e-14, 6);
    CHECK_FALSE(r.converged);
    CHECK_FALSE(r.singular);
    // Linear decay: each step halves xi, so the residual drops by exactly 4.
    for (std::size_t i = 1; i < r.residuals.size(); ++i)
      CHECK(r.residuals[i] / r.residuals[i - 1] == doctest::Approx(0.25).epsilon(1e-12));
  }

  TEST_CASE("newton_correct reports singular Jacobians") {
    const PolySystem f = univariate({{1.0, {2}}, {1e-3, {0}}});
    const auto r = newton_correct(line_at(f, 0.0), 1e-10, 6);
    CHECK(r.singular);
    CHECK_FALSE(r.converged);
  }

  TEST_CASE("predictor_direction") {
    AffinePlane line{ComplexVector::Zero(2), ComplexMatrix::Identity(2, 1)};
    ComplexVector z(2);
    z << 0.0, 3.0;
    const auto p = predictor_direction(z, line);
    REQUIRE(p);
    CHECK(p->distance == doctest::Approx(3.0));
    CHECK(std::abs(p->direction[0]) <= 1e-15);
    CHECK(std::abs(p->direction[1] + 1.0) <= 1e-15);

    CHECK_FALSE(predictor_direction(ComplexVector::Ones(2) - z + z - ComplexVector::Ones(2), line));

    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
      const AffinePlane target = random_plane(7, 3, 100 + trial);
      const ComplexVector x = oracle::random_vector(7, rng, 3.0);
      const auto q = predictor_direction(x, target);
      REQUIRE(q);
      CHECK(std::abs(q->direction.norm() - 1.0) <= 1e-14);
      CHECK(target.distance(x + q->distance * q->direction) <= 1e-10);
      CHECK(project_parallel(q->direction, target.basis).norm() <= 1e-12);
    }
  }

  TEST_CASE("a priori step control") {
    int calls = 0;
    const auto linear = [&](double h) {
      ++calls;
      return 2.0 * h;
    };
    const auto keep = apriori_step_control(linear, 0.5, 3.0, 0.5, 1e-8);
    CHECK(keep.ok);
    CHECK(keep.step == 0.5);
    CHECK(calls == 1);
    CHECK(keep.evaluations == 1);

    const auto stuck = apriori_step_control([](double) { return 10.0; }, 1.0, 1.0, 0.5, 1e-3);
    CHECK_FALSE(stuck.ok);
    CHECK(stuck.reductions == 9);

    // y / h = h + 0.5 reaches delta = 1 at h = 0.5.
    const auto shrink = apriori_step_control([](double h) { return h * h + 0.5 * h; }, 2.0, 1.0, 0.5, 1e-8);
    CHECK(shrink.ok);
    CHECK(shrink.step == 0.5);
    CHECK(shrink.reductions == 2);
  }

  TEST_CASE("track_local on the target plane returns immediately") {
    const WitnessSet& w = benchmark(0);
    const auto r = track_local(w.system, w.points[0], w.plane, w.plane, TrackerConfig{});
    CHECK(r.stats.success);
    CHECK(r.stats.steps_taken == 0);
    CHECK((r.point - w.points[0]).norm() <= 1e-10);
    const auto single = track_local(w.system, w.points[0], w.plane, TrackerConfig{});
    CHECK(single.stats.steps_taken == 0);
  }

  TEST_CASE("track_local moves a minors point onto a fresh plane") {
    const WitnessSet& w = benchmark(0);
    const AffinePlane target = random_plane(6, 2, 31);
    for (const auto& z : w.points) {
      const auto r = track_local(w.system, z, w.plane, target, TrackerConfig{});
      REQUIRE(r.stats.success);
      CHECK(evaluate(w.system, r.point).norm() <= 1e-10);
      CHECK(target.distance(r.point) <= 1e-10);
      CHECK(r.stats.newton_iterations >= r.stats.steps_taken);
      CHECK(r.stats.condition_estimates.size() == static_cast<std::size_t>(r.stats.steps_taken));
    }
  }

  TEST_CASE("prediction is perpendicular and correction parallel") {
    for (int which = 0; which < 3; ++which) {
      const WitnessSet& w = benchmark(which);
      for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const AffinePlane target = random_plane(w.ambient_dim(), w.plane.dim(), 500 + seed);
        int steps = 0;
        for (const auto& z : w.points) {
          const auto r = track_local(w.system, z, w.plane, target, TrackerConfig{}, [&](const LocalStep& s) {
            ++steps;
            const double scale = 1.0 + s.from.norm();
            CHECK(project_parallel(ComplexVector(s.predicted - s.from), s.plane.basis).norm() <= 1e-12 * scale);
            CHECK(project_perpendicular(ComplexVector(s.corrected - s.predicted), s.plane.basis).norm() <=
                  1e-10 * scale);
          });
          CHECK(r.stats.success);
        }
        CHECK(steps > 0);
      }
    }
  }

  TEST_CASE("distance to the target decreases on translations") {
    for (int which = 0; which < 3; ++which) {
      const WitnessSet& w = benchmark(which);
      const AffinePlane target = translated(w.plane, 0.5, 77 + which);
      for (const auto& z : w.points) {
        std::vector<LocalStep> log;
        const auto r = track_local(w.system, z, target, TrackerConfig{}, [&](const LocalStep& s) { log.push_back(s); });
        INFO(which, " ", r.stats.failure);
        REQUIRE(r.stats.success);
        REQUIRE(!log.empty());
        double previous_t = 0.0, h_min = 1.0;
        for (const auto& s : log) {
          h_min = std::min(h_min, s.t - previous_t);
          previous_t = s.t;
        }
        for (const auto& s : log) {
          CHECK(s.distance_after < s.distance_before);
          CHECK(s.distance_after <= (1.0 - h_min / 2.0) * s.distance_before + 1e-14);
        }
      }
    }
  }

  TEST_CASE("residual grows linearly along the predictor") {
    int points = 0;
    for (int which = 0; which < 3; ++which) {
      const WitnessSet& w = benchmark(which);
      const AffinePlane target = random_plane(w.ambient_dim(), w.plane.dim(), 900 + which);
      for (const auto& z : w.points) {
        const auto p = predictor_direction(z, target);
        REQUIRE(p);
        const double a = evaluate(w.system, ComplexVector(z + 1e-4 * p->direction)).norm() / 1e-4;
        const double b = evaluate(w.system, ComplexVector(z + 2e-4 * p->direction)).norm() / 2e-4;
        CHECK(a > 0.0);
        CHECK(std::abs(a - b) < 0.25 * std::max(a, b));
        ++points;
      }
    }
    CHECK(points >= 10);
  }

  TEST_CASE("steps scale like 1/h without step control") {
    const WitnessSet& w = benchmark(0);
    const AffinePlane target = translated(w.plane, 1.0, 5);
    TrackerConfig cfg;
    cfg.apriori_control = false;
    for (double h : {0.1, 0.05, 0.02}) {
      cfg.h0 = h;
      const auto coarse = track_local(w.system, w.points[0], target, cfg);
      cfg.h0 = h / 2.0;
      const auto fine = track_local(w.system, w.points[0], target, cfg);
      REQUIRE(coarse.stats.success);
      REQUIRE(fine.stats.success);
      const double ratio = static_cast<double>(fine.stats.steps_taken) / coarse.stats.steps_taken;
      CHECK(ratio >= 1.5);
      CHECK(ratio <= 3.0);
    }
  }

  TEST_CASE("global tracker on the source plane keeps every point") {
    const WitnessSet& w = benchmark(0);
    const auto paths = track_global(w, w.plane, TrackerConfig{});
    REQUIRE(paths.size() == w.points.size());
    for (std::size_t i = 0; i < paths.size(); ++i) {
      CHECK(paths[i].stats.success);
      CHECK((paths[i].point - w.points[i]).norm() <= 1e-10);
      CHECK(paths[i].stats.newton_iterations <= 2 * paths[i].stats.steps_taken + 2);
    }
  }

  TEST_CASE("both trackers reach the same witness set") {
    for (int which = 0; which < 3; ++which) {
      const WitnessSet& w = benchmark(which);
      const AffinePlane target = random_plane(w.ambient_dim(), w.plane.dim(), 1234 + which);
      const auto local = move_witness(w, target, TrackerConfig{}, TrackMode::local);
      const auto global = move_witness(w, target, TrackerConfig{}, TrackMode::global);
      CHECK(oracle::matching_distance(local.moved.points, global.moved.points) <= 1e-8);
    }
  }

  TEST_CASE("move_witness") {
    const WitnessSet& w = benchmark(0);
    SUBCASE("to the same plane") {
      for (auto mode : {TrackMode::local, TrackMode::global}) {
        const auto r = move_witness(w, w.plane, TrackerConfig{}, mode);
        for (std::size_t i = 0; i < w.points.size(); ++i) CHECK((r.moved.points[i] - w.points[i]).norm() <= 1e-10);
      }
    }
    SUBCASE("four points in, four distinct points out") {
      const auto r = move_witness(w, random_plane(6, 2, 3), TrackerConfig{}, TrackMode::local);
      CHECK(r.moved.degree() == 4);
      CHECK(min_pairwise_distance(r.moved.points) > 1e-6);
      CHECK_NOTHROW(validate(r.moved));
    }
    SUBCASE("round trip returns a permutation") {
      const AffinePlane L = random_plane(6, 2, 44);
      for (auto mode : {TrackMode::local, TrackMode::global}) {
        const auto there = move_witness(w, L, TrackerConfig{}, mode);
        const auto back = move_witness(there.moved, w.plane, TrackerConfig{}, mode);
        CHECK(oracle::matching_distance(back.moved.points, w.points) <= 1e-8);
      }
    }
    SUBCASE("mismatched target") {
      CHECK_THROWS_AS(move_witness(w, random_plane(6, 3, 1), TrackerConfig{}, TrackMode::local), InputError);
      CHECK_THROWS_AS(move_witness(w, random_plane(7, 2, 1), TrackerConfig{}, TrackMode::local), InputError);
    }
  }

  TEST_CASE("path failures are aggregated") {
    const WitnessSet& w = benchmark(0);
    TrackerConfig cfg;
    cfg.max_steps = 2;
    try {
      move_witness(w, random_plane(6, 2, 8), cfg, TrackMode::local);
      FAIL("expected path failures");
    } catch (const PathFailureError& e) {
      CHECK_FALSE(e.failed().empty());
      CHECK(e.stats().size() == w.points.size());
      CHECK_FALSE(e.crossing());
    }
  }

  TEST_CASE("concurrent tracking is deterministic") {
    const WitnessSet& w = benchmark(1);
    const AffinePlane target = random_plane(w.ambient_dim(), w.plane.dim(), 66);
    const auto serial = move_witness(w, target, TrackerConfig{}, TrackMode::local);
    setenv("WITNESS_SAMPLER_THREADS", "3", 1);
    const auto threaded = move_witness(w, target, TrackerConfig{}, TrackMode::local);
    unsetenv("WITNESS_SAMPLER_THREADS");
    for (std::size_t i = 0; i < serial.moved.points.size(); ++i) {
      CHECK(serial.moved.points[i] == threaded.moved.points[i]);
      CHECK(serial.stats[i].newton_iterations == threaded.stats[i].newton_iterations);
    }
  }

  TEST_CASE("local and extrinsic conditioning agree") {
    for (int which = 0; which < 3; ++which) {
      const WitnessSet& w = benchmark(which);
      for (const auto& z : w.points) {
        const double kb = local_intrinsic_condition(w.system, z, w.plane);
        const double ka = extrinsic_condition(w.system, z, w.plane);
        CHECK(kb <= 100.0 * ka);
        CHECK(ka <= 100.0 * kb);
        // The k x k block is f'(z) V; check it against the oracle SVD.
        const ComplexMatrix B = jacobian(w.system, z) * w.plane.basis;
        CHECK(kb == doctest::Approx(oracle::condition_number(B)).epsilon(1e-6));
      }
    }
  }

  TEST_CASE("local mode needs fewer Newton iterations") {
    for (int which = 0; which < 2; ++which) {
      const WitnessSet& w = benchmark(which);
      std::vector<PathStats> local, global;
      for (std::uint64_t m = 0; m < 5; ++m) {
        const AffinePlane target = random_plane(w.ambient_dim(), w.plane.dim(), derive_seed(17, m));
        const auto l = move_witness(w, target, TrackerConfig{}, TrackMode::local).stats;
        const auto g = move_witness(w, target, TrackerConfig{}, TrackMode::global).stats;
        local.insert(local.end(), l.begin(), l.end());
        global.insert(global.end(), g.begin(), g.end());
      }
      CHECK(mean_iterations(local) < mean_iterations(global));
    }
  }

  TEST_CASE("mode names") {
    CHECK(parse_track_mode("local") == TrackMode::local);
    CHECK(parse_track_mode("global") == TrackMode::global);
    CHECK(to_string(TrackMode::global) == "global");
    CHECK_THROWS_AS(parse_track_mode("extrinsic"), InputError);
  }
}
