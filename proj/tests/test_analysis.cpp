#include <cmath>
#include <vector>

#include "doctest.h"
#include "nova/analysis.hpp"
#include "nova/error.hpp"

using namespace nova;

namespace {

template <class Fn>
ErrorKind kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("marginal contamination fraction") {
  CHECK(f_marg_sparse(0.0, 0.5, 1.0, 0.05) == 0.0);
  CHECK(f_marg_sparse(0.01, 0.5, 1.0, 0.05) == doctest::Approx(1.0 / 11.0).epsilon(1e-14));
  CHECK(f_marg_sparse(0.2, 0.5, 1.0, 0.0) == 1.0);
  CHECK(kind_of([] { f_marg_sparse(0.0, 0.5, 1.0, 0.0); }) == ErrorKind::UndefinedFraction);

  // Increasing in delta, decreasing in M.
  double prev = 0.0;
  for (double d = 0.001; d < 1.0; d *= 1.7) {
    const double f = f_marg_sparse(d, 0.5, 0.8, 0.05);
    CHECK(f > prev);
    prev = f;
  }
  prev = 1.0;
  for (double m = 0.001; m < 1.0; m *= 1.7) {
    const double f = f_marg_sparse(0.05, 0.5, 0.8, m);
    CHECK(f < prev);
    prev = f;
  }
}

TEST_CASE("critical false-positive rate") {
  const auto d = delta_star(1.0, 0.1, 0.5, 0.1);
  CHECK_FALSE(d.unbounded);
  CHECK(d.value == doctest::Approx(0.01 / 0.45).epsilon(1e-14));
  CHECK(delta_star(1.0, 0.0, 0.5, 0.1).value == 0.0);
  CHECK(delta_star(1.0, 0.1, 0.0, 0.1).unbounded);
  CHECK(kind_of([] { delta_star(1.0, 0.1, 0.5, 0.0); }) == ErrorKind::InvalidParameter);
  CHECK(kind_of([] { delta_star(1.0, 0.1, 0.5, 1.0); }) == ErrorKind::InvalidParameter);

  // delta_star inverts f_marg_sparse at f_critical.
  for (double r : {0.2, 0.7, 1.0}) {
    for (double m : {0.001, 0.05, 0.3}) {
      for (double u : {0.05, 0.5, 0.9}) {
        for (double fc : {0.01, 0.1, 0.5, 0.9}) {
          const double ds = delta_star(r, m, u, fc).value;
          CHECK(f_marg_sparse(ds, u, r, m) == doctest::Approx(fc).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("regime classification") {
  CHECK(classify_regime(0.0, 0.02, 0.5) == Regime::Safe);
  CHECK(classify_regime(0.02, 0.02, 0.5) == Regime::Collapse);
  CHECK(classify_regime(0.01, 0.02, 0.005) == Regime::ContaminationLimited);
  CHECK(to_string(Regime::ContaminationLimited) == "contamination_limited");
}

TEST_CASE("feasible batch under a budget") {
  CHECK(feasible_batch(100, 1, 3) == 25);
  CHECK(feasible_batch(3.9, 1, 3) == 0);
  CHECK(feasible_batch(1000, 0.01, 10) == 99);
  CHECK(kind_of([] { feasible_batch(10, 0, 0); }) == ErrorKind::InvalidParameter);
  for (double b = 0; b < 200; b += 7.3) {
    const auto n = static_cast<double>(feasible_batch(b, 0.5, 2.0));
    CHECK(n * 2.5 <= b);
    CHECK((n + 1) * 2.5 > b);
  }
}

TEST_CASE("optimal verification effort") {
  CHECK(w_star(1, 0.1, 0.5, 1, 10, 1, 0.05) == doctest::Approx(std::sqrt(10.0)).epsilon(1e-14));
  CHECK(w_star(1, 1, 1, 1, 1, 1, 1) == doctest::Approx(1.0).epsilon(1e-15));
  for (double a : {0.5, 1.0, 2.0, 3.5}) {
    const double full = w_star(a, 0.2, 0.4, 1.5, 2.0, 0.8, 0.1);
    const double half = w_star(a, 0.2, 0.4, 1.5, 2.0, 0.8, 0.05);
    CHECK(half / full == doctest::Approx(std::pow(2.0, 1.0 / (a + 1.0))).epsilon(1e-13));
  }
  CHECK(kind_of([] { w_star(1, 0.1, 0.5, 1, 10, 1, 0.0); }) == ErrorKind::FrontierDegenerate);
  CHECK(kind_of([] { w_star(-1, 0.1, 0.5, 1, 10, 1, 0.1); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("amplification factors") {
  const auto neutral = amplification(100, 0, 0.7, 0.7, 1.0, 0.2, 0.2, 0.5);
  CHECK(neutral.a_guide == 1.0);
  CHECK(neutral.a_verify == 1.0);
  CHECK(neutral.a_gen == 1.0);
  CHECK(neutral.a_h == 1.0);

  const auto plug = amplification(100, 10, 1, 1, 1, 0.1, 0.1, 0.1);
  CHECK(plug.a_gen == doctest::Approx(1.1).epsilon(1e-15));
  CHECK(plug.a_h == doctest::Approx(1.1).epsilon(1e-15));

  // a_guide = 2, a_verify = 1.25, a_gen = 1 + 10 * 0.8 * 0.5 / (100 * 1 * 0.4) = 1.1
  const auto built = amplification(100, 10, 0.8, 1.0, 0.8, 0.2, 0.4, 0.5);
  CHECK(built.a_guide == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(built.a_verify == doctest::Approx(1.25).epsilon(1e-15));
  CHECK(built.a_gen == doctest::Approx(1.1).epsilon(1e-15));
  CHECK(std::abs(built.a_h - 2.75) <= 1e-12);
  CHECK(std::abs(built.a_h - built.a_guide * built.a_verify * built.a_gen) <= 1e-12);

  CHECK(kind_of([] { amplification(100, 10, 1, 1, 1, 0.0, 0.1, 0.1); }) == ErrorKind::DegenerateBaseline);
  CHECK(kind_of([] { amplification(100, 10, 0, 1, 1, 0.1, 0.1, 0.1); }) == ErrorKind::DegenerateBaseline);
  CHECK(kind_of([] { amplification(100, 10, 1, 0, 1, 0.1, 0.1, 0.1); }) == ErrorKind::DegenerateBaseline);
}

TEST_CASE("effort allocation") {
  CHECK(effort_allocation(0.5, 0.001) == Effort::Verification);
  CHECK(effort_allocation(0.001, 0.9) == Effort::Guidance);
  CHECK(effort_allocation(0.5, 0.9) == Effort::Generation);
  CHECK(to_string(Effort::Guidance) == "guidance");
}

TEST_CASE("sustainability bound") {
  CHECK(sustainability_bound(100, 1, 2, 1, 0) == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(sustainability_bound(3, 3, 2, 1, 2) == doctest::Approx(2.0).epsilon(1e-15));
  for (double alpha : {1.05, 1.5, 2.0, 3.0}) {
    for (double tau : {0.5, 1.0, 4.0}) {
      for (double t : {0.0, 1.0, 7.5}) {
        const double b = sustainability_bound(50, 2, alpha, tau, t);
        const double later = sustainability_bound(50, 2, alpha, tau, t + alpha * tau);
        CHECK(std::abs(later - 2 * b) <= 1e-12 * later);
      }
    }
  }
  CHECK(kind_of([] { sustainability_bound(1, 1, 1.0, 1, 0); }) == ErrorKind::InvalidParameter);
  CHECK(kind_of([] { sustainability_bound(0, 1, 2.0, 1, 0); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("marginal frontier") {
  CHECK(marginal_frontier(3, 3, 2).value == 1.0);
  CHECK(marginal_frontier(100, 1, 2).value == doctest::Approx(100).epsilon(1e-14));
  CHECK(marginal_frontier(100, 1, 1.5).value == doctest::Approx(1e4).epsilon(1e-14));
  CHECK(marginal_frontier(100, 1, 1.2).value == doctest::Approx(1e10).epsilon(1e-12));
  CHECK(marginal_frontier(100, 1, 1.05).value == doctest::Approx(1e40).epsilon(1e-10));
  CHECK(marginal_frontier(100, 1, 1.0).unbounded);
  CHECK(kind_of([] { marginal_frontier(100, 1, 0.9); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("transformer generation cost") {
  CHECK(transformer_gen_cost(1, 1) == 2);
  CHECK(transformer_gen_cost(1e9, 1e3) == 2e12);
  CHECK(transformer_gen_cost(7e8, 512) * 2 == transformer_gen_cost(7e8, 1024));
}

TEST_CASE("power-law fits") {
  std::vector<Point> lin{{1, 1}, {2, 2}, {4, 4}, {8, 8}};
  auto fit = fit_power_law(lin);
  CHECK(fit.exponent == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.x_min == 1);
  CHECK(fit.x_max == 8);

  std::vector<Point> root;
  for (double x = 1; x <= 1024; x *= 2) root.push_back({x, 3 * std::sqrt(x)});
  fit = fit_power_law(root);
  CHECK(std::abs(fit.exponent - 0.5) <= 1e-9);
  CHECK(std::abs(fit.intercept - std::log(3.0)) <= 1e-9);

  Rng rng(44);
  std::vector<Point> noisy;
  for (int i = 1; i <= 20; ++i) {
    const double x = 1.5 * i;
    noisy.push_back({x, x * x * (1 + 0.01 * (2 * rng.uniform() - 1))});
  }
  fit = fit_power_law(noisy);
  CHECK(fit.exponent >= 1.9);
  CHECK(fit.exponent <= 2.1);
  CHECK(fit.r_squared >= 0.0);
  CHECK(fit.r_squared <= 1.0);

  CHECK(kind_of([] {
          std::vector<Point> two{{1, 1}, {2, 2}};
          fit_power_law(two);
        }) == ErrorKind::Underdetermined);
  CHECK(kind_of([] {
          std::vector<Point> bad{{1, 1}, {2, 0}, {3, 3}};
          fit_power_law(bad);
        }) == ErrorKind::InvalidParameter);
}

TEST_CASE("occupancy experiment") {
  OccupancyOptions opts;
  opts.n_valid = 1000;
  opts.threads = 1;
  const std::vector<std::size_t> one{1, 10, 100};
  const auto r = occupancy_experiment(2.0, one, 20, 3, opts);
  REQUIRE(r.curve.size() == 3);
  CHECK(r.curve[0].y == 1.0);
  CHECK(r.std_error[0] == 0.0);
  CHECK(r.curve[1].y <= 10.0);
  CHECK(r.curve[2].y >= r.curve[1].y);

  // Grid points above the guard are dropped with a warning.
  opts.n_valid = 1000;
  const std::vector<std::size_t> big{10, 100, 500, 5000};
  const auto g = occupancy_experiment(1.5, big, 5, 3, opts);
  CHECK(g.curve.size() == 3);
  CHECK(g.warnings.size() == 1);

  CHECK(kind_of([&] { occupancy_experiment(1.0, one, 5, 3, opts); }) == ErrorKind::InvalidParameter);

  // Results do not depend on the number of threads.
  opts.n_valid = 5000;
  const auto a = occupancy_experiment(1.5, one, 8, 9, opts);
  opts.threads = 3;
  const auto b = occupancy_experiment(1.5, one, 8, 9, opts);
  for (std::size_t i = 0; i < a.curve.size(); ++i) CHECK(a.curve[i].y == b.curve[i].y);
}

TEST_CASE("cumulative cost curves from synthetic records") {
  // Exposure exactly D^2 with cost 3 D^2: both fits recover exponent 2 and
  // the marginals recover exponent 1.
  std::vector<std::vector<IterationRecord>> reps(2);
  for (auto& recs : reps) {
    for (std::uint64_t d = 1; d <= 2000; ++d) {
      IterationRecord rec;
      rec.t = d - 1;
      rec.g = d;
      rec.e_new_total = static_cast<double>(d * d);
      rec.cost_total = 3.0 * static_cast<double>(d * d);
      recs.push_back(rec);
    }
  }
  const auto curve = cumulative_cost_curve(reps, 2.0);
  CHECK(curve.exposure_fit.exponent == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(curve.raw_cost_fit.exponent == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(curve.marginal_fit.exponent == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(curve.cost.front().y == doctest::Approx(2.0 * curve.exposure.front().y));
  // D below the window minimum stays out of the fit.
  CHECK(curve.exposure_fit.x_min >= 10.0);

  std::vector<std::vector<IterationRecord>> empty(1);
  CHECK(kind_of([&] { cumulative_cost_curve(empty, 1.0); }) == ErrorKind::Underdetermined);
}
