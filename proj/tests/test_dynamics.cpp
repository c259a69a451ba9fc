#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>

#include "confsym/dynamics.hpp"
#include "confsym/rng.hpp"
#include "confsym/systems.hpp"

using namespace confsym;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// Independent solution of xdot = -beta x + 2 y, ydot = (beta - alpha) y by
// variation of constants (oracle for the integrators).
Vec linear_oracle(double beta, double alpha, const Vec& z0, double t) {
  const double ey = std::exp((beta - alpha) * t);
  const double ex = std::exp(-beta * t);
  Vec z(2);
  z(1) = ey * z0(1);
  z(0) = ex * z0(0) + 2.0 * z0(1) * (ey - ex) / (2.0 * beta - alpha);
  return z;
}

}  // namespace

TEST_CASE("fiber contraction flow has the closed-form endpoint") {
  auto flow = make_liouville_flow();
  Point x0{flow.manifold, v2(0.3, 2.0)};
  Point x1 = integrate(flow, x0, 1.0);
  CHECK(x1.coords(0) == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(x1.coords(1) == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-10));
}

TEST_CASE("integrating for zero time returns the initial point exactly") {
  auto flow = make_liouville_flow();
  Point x0{flow.manifold, v2(0.3, 2.0)};
  Point x1 = integrate(flow, x0, 0.0);
  CHECK(x1.coords(0) == 0.3);
  CHECK(x1.coords(1) == 2.0);
}

TEST_CASE("rk4 matches the linear-system oracle") {
  auto ex = make_lecalvez_example();
  Point z0{ex.linear_flow.manifold, v2(1.0, 1.0)};
  const Vec got = integrate(ex.linear_flow, z0, 1.0).coords;
  const Vec want = linear_oracle(1.0, 1.5, v2(1.0, 1.0), 1.0);
  CHECK((got - want).lpNorm<Eigen::Infinity>() < 1e-8);

  SUBCASE("the closed-form member agrees with the oracle") {
    const Vec cf = (*ex.linear_flow.closed_flow)(1.0, v2(1.0, 1.0));
    CHECK((cf - want).lpNorm<Eigen::Infinity>() < 1e-13);
  }
}

TEST_CASE("rk4 converges at fourth order") {
  auto ex = make_lecalvez_example();
  Point z0{ex.linear_flow.manifold, v2(1.0, 1.0)};
  const Vec want = linear_oracle(1.0, 1.5, v2(1.0, 1.0), 1.0);
  std::vector<double> dts = {0.2, 0.1, 0.05, 0.025};
  std::vector<double> errs;
  for (double dt : dts) {
    IntegrationOptions opts;
    opts.dt = dt;
    errs.push_back(
        (integrate(ex.linear_flow, z0, 1.0, opts).coords - want)
            .lpNorm<Eigen::Infinity>());
  }
  for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
    const double order = std::log2(errs[i] / errs[i + 1]);
    CHECK(order > 3.5);
    CHECK(order < 4.5);
  }
}

TEST_CASE("trajectory samples are consistent with the step map") {
  auto flow = make_liouville_flow();
  Point x0{flow.manifold, v2(0.3, 2.0)};
  IntegrationOptions opts;
  opts.dt = 0.01;
  auto traj = integrate_trajectory(flow, x0, 0.2, opts);
  REQUIRE(traj.points.size() == 21);
  for (std::size_t i = 0; i + 1 < traj.points.size(); ++i) {
    const double h = traj.times[i + 1] - traj.times[i];
    const Vec expect = (*flow.closed_flow)(h, traj.points[i]);
    CHECK((traj.points[i + 1] - expect).lpNorm<Eigen::Infinity>() < 1e-10);
  }

  SUBCASE("optional tangent frames match the variational solution") {
    auto framed = integrate_trajectory(flow, x0, 0.2, opts, true);
    REQUIRE(framed.frames.size() == framed.points.size());
    for (std::size_t i = 0; i < framed.frames.size(); ++i) {
      const Mat want = tangent_map(flow, x0, framed.times[i], opts,
                                   /*use_closed_form=*/false);
      CHECK((framed.frames[i] - want).lpNorm<Eigen::Infinity>() < 1e-10);
    }
  }
}

TEST_CASE("invalid step sizes are rejected") {
  auto flow = make_liouville_flow();
  Point x0{flow.manifold, v2(0.0, 1.0)};
  IntegrationOptions opts;
  opts.dt = 0.0;
  CHECK_THROWS_AS(integrate(flow, x0, 1.0, opts), invalid_input_error);
}

TEST_CASE("trajectory blow-up raises a divergence error with the escape time") {
  auto m = ChartedManifold::euclidean(1);
  FlowSystem blowup;
  blowup.manifold = m;
  blowup.omega = DifferentialForm(
      2, m, [](const Point&, std::span<const Vec>) { return 0.0; }, "zero");
  blowup.vector_field =
      VectorField{[](const Vec& x) { return Vec(x.array().square()); }, nullptr};
  Point x0{m, Vec::Constant(1, 1.0)};
  try {
    integrate(blowup, x0, 2.0);
    FAIL("expected divergence");
  } catch (const divergence_error& e) {
    CHECK(e.escape_time() > 0.9);
    CHECK(e.escape_time() < 1.1);
  }
}

TEST_CASE("conformal splitting step preserves the contraction exactly") {
  auto lift = make_mane_lift(1, [](const Vec&) { return Vec::Zero(1); }, 1.5);
  IntegrationOptions opts;
  opts.method = IntegrationMethod::conformal_split;
  opts.dt = 0.05;
  // The fiber factor per step is exact, so omega scales by e^{-alpha t}
  // without integrator drift even at coarse steps.
  Point x0{lift.manifold, v2(0.3, 0.8)};
  const Mat J = tangent_map(lift.flow, x0, 1.0, opts, /*use_closed_form=*/false);
  // 2-form scaling equals det in dimension 2.
  CHECK(J.determinant() == doctest::Approx(std::exp(-1.5)).epsilon(1e-6));
}

TEST_CASE("conformal splitting requires splitting data") {
  auto ex = make_lecalvez_example();
  FlowSystem flow = ex.linear_flow;
  flow.split.reset();
  IntegrationOptions opts;
  opts.method = IntegrationMethod::conformal_split;
  Point x0{flow.manifold, v2(0.1, 0.1)};
  CHECK_THROWS_AS(integrate(flow, x0, 1.0, opts), invalid_input_error);
}

TEST_CASE("tangent map of the torus automorphism is its matrix") {
  auto cat = make_cat_map();
  Point x0{cat.manifold, v2(0.12, 0.77)};
  const Mat J = tangent_map(cat, x0, 1);
  CHECK(J(0, 0) == 2.0);
  CHECK(J(0, 1) == 1.0);
  CHECK(J(1, 0) == 1.0);
  CHECK(J(1, 1) == 1.0);
  CHECK(tangent_map(cat, x0, 0).isIdentity(0.0));
}

TEST_CASE("tangent map of the fiber contraction flow") {
  auto flow = make_liouville_flow();
  Point x0{flow.manifold, v2(0.4, 1.3)};
  const Mat J = tangent_map(flow, x0, 1.0);
  CHECK(std::abs(J(0, 0) - 1.0) < 1e-9);
  CHECK(std::abs(J(1, 1) - std::exp(-1.0)) < 1e-9);
  CHECK(std::abs(J(0, 1)) < 1e-9);
  CHECK(std::abs(J(1, 0)) < 1e-9);
  CHECK(tangent_map(flow, x0, 0.0).isIdentity(0.0));
}

TEST_CASE("tangent maps satisfy the cocycle identity") {
  auto t6 = make_torus6_example();
  CounterRng rng(41);
  for (int i = 0; i < 20; ++i) {
    Point x{t6.manifold, rng.vector_in_box(t6.manifold->sample_box())};
    const int n = 3, mstep = 2;
    const Mat whole = tangent_map(t6.map, x, n + mstep);
    const Point xm = iterate(t6.map, x, mstep);
    const Mat parts = tangent_map(t6.map, xm, n) * tangent_map(t6.map, x, mstep);
    CHECK((whole - parts).lpNorm<Eigen::Infinity>() /
              whole.lpNorm<Eigen::Infinity>() <
          1e-8);
  }
}

TEST_CASE("forward and inverse maps compose to the identity") {
  CounterRng rng(47);
  for (const MapSystem& sys :
       {make_cat_map(), make_torus6_example().map,
        make_model_cotangent_map(1, 0.5, 0.3).map}) {
    for (int i = 0; i < 50; ++i) {
      Vec x = rng.vector_in_box(sys.manifold->sample_box());
      const Vec back = (*sys.inverse)(sys.forward(x));
      CHECK((back - x).lpNorm<Eigen::Infinity>() < 1e-9);
    }
  }
}

TEST_CASE("closed flows differentiate to their vector fields") {
  auto susp = make_suspension_example();
  auto liouville = make_liouville_flow();
  auto lin = make_lecalvez_example().linear_flow;
  CounterRng rng(53);
  for (const FlowSystem& sys : {susp.flow, liouville, lin}) {
    const double h = 1e-6;
    for (int i = 0; i < 30; ++i) {
      Vec x = rng.vector_in_box(sys.manifold->sample_box());
      const Vec num =
          ((*sys.closed_flow)(h, x) - (*sys.closed_flow)(-h, x)) / (2.0 * h);
      const Vec field = sys.vector_field->value(x);
      CHECK((num - field).lpNorm<Eigen::Infinity>() < 1e-6);
    }
  }
}

TEST_CASE("conformality ratio of the six-dimensional example") {
  auto ex = make_torus6_example();
  auto est = conformality_ratio(ex.map, 1, {.samples = 500, .seed = 99});
  CHECK(est.estimate == doctest::Approx(0.1458980337503155).epsilon(1e-9));
  CHECK(est.max_residual < 1e-9);
}

TEST_CASE("area-preserving maps have ratio one") {
  auto cat = make_cat_map();
  auto est = conformality_ratio(cat, 1, {.samples = 400, .seed = 101});
  CHECK(std::abs(est.estimate - 1.0) < 1e-10);
}

TEST_CASE("time-1 flow of the bumped annulus model contracts area at the "
          "damping rate") {
  auto ex = make_lecalvez_example();
  auto est = conformality_ratio(ex.flow, 1.0, {.samples = 60, .seed = 103});
  CHECK(est.estimate == doctest::Approx(std::exp(-1.5)).epsilon(1e-6));
}

TEST_CASE("conformality ratios match nominal values across the catalog") {
  ConformalityOptions opts;
  opts.samples = 60;
  opts.seed = 107;

  SUBCASE("closed-form systems within 1e-6") {
    auto susp = make_suspension_example();
    auto est = conformality_ratio(susp.flow, 1.0, opts);
    CHECK(std::abs(est.estimate - std::exp(*susp.flow.nominal_rate)) < 1e-6);

    auto liouville = make_liouville_flow();
    auto est2 = conformality_ratio(liouville, 1.0, opts);
    CHECK(std::abs(est2.estimate - std::exp(-1.0)) < 1e-6);
  }
  SUBCASE("integrated systems within 1e-4") {
    auto lift = make_mane_lift(
        1,
        [](const Vec& q) {
          return Vec(Vec::Constant(1, 0.3 * std::sin(2.0 * M_PI * q(0))));
        },
        1.5);
    auto est = conformality_ratio(lift.flow, 1.0, opts);
    CHECK(std::abs(est.estimate - std::exp(-1.5)) < 1e-4);
  }
}

TEST_CASE("degenerate sampling is reported") {
  auto m = ChartedManifold::torus(2);
  MapSystem sys{
      m,
      SmoothMap::identity(m),
      std::nullopt,
      1.0,
      DifferentialForm(
          2, m, [](const Point&, std::span<const Vec>) { return 0.0; }, "zero"),
      std::nullopt,
      "degenerate"};
  CHECK_THROWS_AS(conformality_ratio(sys, 1, {.samples = 10, .seed = 1}),
                  degenerate_sampling_error);
}

TEST_CASE("iterating without an inverse is rejected") {
  auto rot = make_rotation_map(0.1, 0.2);
  MapSystem no_inverse = rot;
  no_inverse.inverse.reset();
  Point x{rot.manifold, v2(0.0, 0.0)};
  CHECK_THROWS_AS(iterate(no_inverse, x, -1), invalid_input_error);
}
