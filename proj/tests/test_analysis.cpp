#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include "confsym/analysis.hpp"
#include "confsym/rng.hpp"
#include "confsym/systems.hpp"

using namespace confsym;

namespace {

constexpr double tau = 2.0 * std::numbers::pi;

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Isotropy

TEST_CASE("zero section of a cotangent torus is isotropic of rank zero") {
  auto m = ChartedManifold::cotangent_torus(2);
  auto zs = zero_section(m, 2, 12);
  auto report = isotropy_defect(zs, cotangent_omega(m, 2));
  CHECK(report.max_abs_omega < 1e-12);
  CHECK(report.estimated_rank == 0);
}

TEST_CASE("invariant torus of the six-dimensional example has rank two") {
  auto ex = make_torus6_example();
  ParamSubmanifold torus(
      ex.manifold, 4, std::vector<bool>(4, true),
      [](const Vec& u) {
        Vec x = Vec::Zero(6);
        x.head(4) = u;
        return x;
      },
      [](const Vec&) {
        Mat J = Mat::Zero(6, 4);
        J.topRows(4) = Mat::Identity(4, 4);
        return J;
      },
      8);
  auto report = isotropy_defect(torus, ex.omega);
  CHECK(report.estimated_rank == 2);
  CHECK(report.rank_histogram.size() == 1);  // constant rank across the grid

  // Oracle: the 4x4 antisymmetric coefficient matrix of omega restricted to
  // the coordinate frame, decomposed independently.
  const double p = ex.p;
  Mat W = Mat::Zero(4, 4);
  W(0, 2) = p * p;
  W(0, 3) = -p;
  W(1, 2) = -p;
  W(1, 3) = 1.0;
  W -= Mat(W.transpose());
  Eigen::JacobiSVD<Mat> svd(W);
  int oracle_rank = 0;
  for (int i = 0; i < 4; ++i)
    if (svd.singularValues()(i) > 1e-6 * svd.singularValues()(0)) ++oracle_rank;
  CHECK(oracle_rank == 2);
  const double oracle_max = W.cwiseAbs().maxCoeff();
  CHECK(report.max_abs_omega == doctest::Approx(oracle_max).epsilon(1e-12));
  CHECK(report.max_abs_omega > 0.1);
}

TEST_CASE("graphs of exact differentials are Lagrangian") {
  auto m = ChartedManifold::cotangent_torus(2);
  auto graph = graph_submanifold(
      m, 2,
      [](const Vec& q) {
        Vec p(2);
        p(0) = tau * std::cos(tau * q(0)) / 10.0;
        p(1) = 0.0;
        return p;
      },
      16);
  auto report = isotropy_defect(graph, cotangent_omega(m, 2));
  CHECK(report.max_abs_omega < 1e-8);
}

TEST_CASE("rank-deficient embeddings are rejected") {
  auto m = ChartedManifold::cotangent_torus(1);
  ParamSubmanifold degenerate(
      m, 1, {true},
      [](const Vec&) { return Vec(v2(0.25, 0.0)); },  // constant map
      nullptr, 8);
  CHECK_THROWS_AS(isotropy_defect(degenerate, cotangent_omega(m, 1)),
                  degenerate_embedding_error);
}

TEST_CASE("isotropy defect is stable under reparametrization") {
  auto ex = make_torus6_example();
  auto embed = [](const Vec& u) {
    Vec x = Vec::Zero(6);
    x.head(4) = u;
    return x;
  };
  ParamSubmanifold plain(ex.manifold, 4, std::vector<bool>(4, true), embed,
                         nullptr, 8);
  // Shift and swap the two torus factors: same set, different chart.
  ParamSubmanifold reparam(
      ex.manifold, 4, std::vector<bool>(4, true),
      [embed](const Vec& u) {
        Vec w(4);
        w << u(2) + 0.37, u(3) + 0.11, u(0) + 0.81, u(1);
        return embed(w);
      },
      nullptr, 8);
  auto a = isotropy_defect(plain, ex.omega);
  auto b = isotropy_defect(reparam, ex.omega);
  CHECK(a.estimated_rank == b.estimated_rank);
  CHECK(std::abs(a.max_abs_omega - b.max_abs_omega) <
        0.10 * std::max(a.max_abs_omega, b.max_abs_omega));
}

TEST_CASE("zero section of the damped lift stays isotropic along the flow") {
  auto lift = make_mane_lift(
      2,
      [](const Vec& q) {
        Vec X(2);
        X << 0.2 * std::sin(tau * q(1)), 0.3 * std::cos(tau * q(0));
        return X;
      },
      1.5);
  for (double t : {0.0, 0.5, 1.0}) {
    ParamSubmanifold flowed(
        lift.manifold, 2, {true, true},
        [&lift, t](const Vec& u) {
          Vec x = Vec::Zero(4);
          x.head(2) = u;
          if (t == 0.0) return x;
          return integrate(lift.flow, Point{lift.manifold, x}, t).coords;
        },
        nullptr, 8);
    auto report = isotropy_defect(flowed, lift.flow.omega);
    CHECK(report.max_abs_omega < 1e-12);
    CHECK(report.estimated_rank == 0);
  }
}

// ---------------------------------------------------------------------------
// Liouville classes

TEST_CASE("periods of the tautological form measure graph classes") {
  auto m = ChartedManifold::cotangent_torus(1);
  const DifferentialForm lambda = cotangent_lambda(m, 1);
  auto zs = zero_section(m, 1);
  CHECK(std::abs(liouville_class(zs, lambda, coordinate_loops(zs)).periods(0)) <
        1e-12);

  auto graph = graph_submanifold(
      m, 1, [](const Vec&) { return Vec(Vec::Constant(1, 0.8)); });
  CHECK(liouville_class(graph, lambda, coordinate_loops(graph)).periods(0) ==
        doctest::Approx(0.8).epsilon(1e-10));
}

TEST_CASE("classes transform by the homothety law under the model map") {
  auto m = ChartedManifold::cotangent_torus(1);
  const DifferentialForm lambda = cotangent_lambda(m, 1);
  const double a = 0.5, c = 0.3, before = 0.4;
  auto graph = graph_submanifold(
      m, 1, [before](const Vec&) { return Vec(Vec::Constant(1, before)); });
  auto mapped = graph_submanifold(m, 1, [a, c, before](const Vec&) {
    return Vec(Vec::Constant(1, a * before + c));
  });
  const double cls =
      liouville_class(mapped, lambda, coordinate_loops(mapped)).periods(0);
  CHECK(cls == doctest::Approx(a * before + c).epsilon(1e-10));
  CHECK(cls == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("homothety holds for nonconstant graphs across the map family") {
  auto m = ChartedManifold::cotangent_torus(1);
  const DifferentialForm lambda = cotangent_lambda(m, 1);
  auto g = [](double q) { return 0.2 + 0.1 * std::cos(tau * q); };
  for (double a : {0.5, 2.0}) {
    for (double c : {0.0, 0.3}) {
      auto graph = graph_submanifold(m, 1, [g](const Vec& q) {
        return Vec(Vec::Constant(1, g(q(0))));
      });
      auto image = graph_submanifold(m, 1, [g, a, c](const Vec& q) {
        return Vec(Vec::Constant(1, a * g(q(0)) + c));
      });
      const double cls_before =
          liouville_class(graph, lambda, coordinate_loops(graph)).periods(0);
      const double cls_after =
          liouville_class(image, lambda, coordinate_loops(image)).periods(0);
      CHECK(std::abs(cls_after - (a * cls_before + c)) < 1e-8);
    }
  }
}

TEST_CASE("mapped loops that fail to close raise a topology error") {
  auto m = ChartedManifold::cotangent_torus(1);
  const DifferentialForm lambda = cotangent_lambda(m, 1);
  ParamSubmanifold arc(
      m, 1, {true},
      [](const Vec& u) { return Vec(v2(0.5 * u(0), 0.0)); },  // half circle
      nullptr, 8);
  std::vector<ParamLoop> loops = {
      ParamLoop{[](double t) { return Vec(Vec::Constant(1, t)); }}};
  CHECK_THROWS_AS(liouville_class(arc, lambda, loops), topology_error);
}

TEST_CASE("fixed class of the affine action") {
  CHECK(fixed_liouville_class(0.5, Vec::Zero(1))(0) == 0.0);
  CHECK(fixed_liouville_class(2.0, Vec::Ones(1))(0) ==
        doctest::Approx(-1.0).epsilon(1e-15));
  CHECK_THROWS_AS(fixed_liouville_class(1.0, Vec::Ones(1)),
                  not_applicable_error);

  // The graph at the fixed class is pointwise invariant.
  auto mm = make_model_cotangent_map(1, 0.5, 0.3);
  const double fix = fixed_liouville_class(0.5, Vec::Constant(1, 0.3))(0);
  CHECK(fix == doctest::Approx(0.6).epsilon(1e-15));
  for (int i = 0; i < 32; ++i) {
    Vec x = v2(i / 32.0, fix);
    CHECK((mm.map.forward(x) - x).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

// ---------------------------------------------------------------------------
// Exactness transforms

TEST_CASE("primitive correction kills the drift of the model map") {
  auto mm = make_model_cotangent_map(1, 0.5, 0.3);
  std::vector<Loop> loops;
  loops.emplace_back(mm.map.manifold, [](double t) { return Vec(v2(t, 0.4)); });
  auto tr = exactness_transform(mm.map, loops);
  CHECK(tr.residual_periods.lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK(tr.d_lambda_residual < 1e-5);

  // lambda1 = lambda - 0.6 dq: check pointwise.
  CounterRng rng(61);
  for (int i = 0; i < 100; ++i) {
    Point x{mm.map.manifold,
            rng.vector_in_box(mm.map.manifold->sample_box())};
    Vec v = rng.direction(2);
    const double want = (*mm.map.lambda_form)(x, v) - 0.6 * v(0);
    CHECK(std::abs(tr.lambda1(x, v) - want) < 1e-12);
  }
}

TEST_CASE("already-exact maps keep their primitive periods") {
  auto mm = make_model_cotangent_map(1, 0.5, 0.0);
  std::vector<Loop> loops;
  loops.emplace_back(mm.map.manifold, [](double t) { return Vec(v2(t, 0.4)); });
  auto tr = exactness_transform(mm.map, loops);
  const double l1 = line_integral(tr.lambda1, loops[0]);
  const double l = line_integral(*mm.map.lambda_form, loops[0]);
  CHECK(l1 == doctest::Approx(l).epsilon(1e-10));
}

TEST_CASE("the primitive correction needs a ratio away from one") {
  auto mm = make_model_cotangent_map(1, 1.0, 0.0);
  std::vector<Loop> loops;
  loops.emplace_back(mm.map.manifold, [](double t) { return Vec(v2(t, 0.0)); });
  CHECK_THROWS_AS(exactness_transform(mm.map, loops), not_applicable_error);
}

TEST_CASE("flow 1-form is closed and exact for the damped lift") {
  auto lift = make_mane_lift(
      1,
      [](const Vec& q) {
        return Vec(Vec::Constant(1, 0.2 * std::sin(tau * q(0))));
      },
      1.5);
  std::vector<Loop> loops;
  loops.emplace_back(lift.manifold, [](double t) { return Vec(v2(t, 0.0)); });
  auto res = flow_exactness_form(lift.flow, loops);
  CHECK(res.xi_periods.lpNorm<Eigen::Infinity>() < 1e-8);
  CHECK(res.d_xi_residual < 1e-5);

  // xi is the differential of the lift Hamiltonian: spot-check values.
  CounterRng rng(67);
  const double h = 1e-6;
  for (int i = 0; i < 50; ++i) {
    Vec x = rng.vector_in_box(lift.manifold->sample_box());
    Vec v = rng.direction(2);
    Vec xp = x + h * v, xm = x - h * v;
    const double dH =
        (lift.hamiltonian(xp) - lift.hamiltonian(xm)) / (2.0 * h);
    CHECK(std::abs(res.xi(Point{lift.manifold, x}, v) - dH) < 1e-6);
  }
}

TEST_CASE("flow correction recovers the tautological primitive for the "
          "fiber contraction") {
  auto flow = make_liouville_flow();
  std::vector<Loop> loops;
  loops.emplace_back(flow.manifold, [](double t) { return Vec(v2(t, 0.7)); });
  auto res = flow_exactness_form(flow, loops);
  CounterRng rng(71);
  for (int i = 0; i < 100; ++i) {
    Point x{flow.manifold, rng.vector_in_box(flow.manifold->sample_box())};
    Vec v = rng.direction(2);
    CHECK(std::abs(res.lambda1(x, v) - (*flow.lambda_form)(x, v)) < 1e-12);
  }
  // Periods of lambda1 match those of lambda (here: the graph loop).
  CHECK(line_integral(res.lambda1, loops[0]) ==
        doctest::Approx(line_integral(*flow.lambda_form, loops[0]))
            .epsilon(1e-10));
}

TEST_CASE("flow 1-forms are closed across the catalog") {
  std::vector<Loop> no_loops;
  auto susp = make_suspension_example();
  auto lc = make_lecalvez_example();
  for (const FlowSystem* sys : {&susp.flow, &lc.flow}) {
    auto res = flow_exactness_form(*sys, no_loops, 73, 100);
    CHECK(res.d_xi_residual < 1e-5);
  }
}

TEST_CASE("flow transform rejects symplectic (rate zero) systems") {
  auto lift = make_mane_lift(1, [](const Vec&) { return Vec::Zero(1); }, 0.0);
  std::vector<Loop> no_loops;
  CHECK_THROWS_AS(flow_exactness_form(lift.flow, no_loops),
                  not_applicable_error);
}

// ---------------------------------------------------------------------------
// Action differences

TEST_CASE("action difference of exact graphs matches its closed form") {
  auto m = ChartedManifold::cotangent_torus(1);
  const DifferentialForm lambda = cotangent_lambda(m, 1);
  auto S1 = [](double q) { return std::sin(tau * q) / tau; };
  auto L = graph_submanifold(m, 1, [](const Vec& q) {
    return Vec(Vec::Constant(1, std::cos(tau * q(0))));
  });
  auto Lp = zero_section(m, 1);
  auto pts = find_graph_intersections(L, Lp);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].coords(0) == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(pts[1].coords(0) == doctest::Approx(0.75).epsilon(1e-10));

  const double delta = action_difference(L, Lp, pts[0], pts[1], lambda);
  CHECK(delta ==
        doctest::Approx(S1(0.75) - S1(0.25)).epsilon(1e-9));
  // Antisymmetric in the two intersection points.
  const double rev = action_difference(L, Lp, pts[1], pts[0], lambda);
  CHECK(std::abs(delta + rev) < 1e-10);
  // Identical curves give zero.
  CHECK(std::abs(action_difference(L, L, pts[0], pts[1], lambda)) < 1e-12);
}

TEST_CASE("action difference scales under fiber homothety") {
  auto m = ChartedManifold::cotangent_torus(1);
  const DifferentialForm lambda = cotangent_lambda(m, 1);
  auto L = graph_submanifold(m, 1, [](const Vec& q) {
    return Vec(Vec::Constant(1, std::cos(tau * q(0))));
  });
  auto Lp = zero_section(m, 1);
  auto pts = find_graph_intersections(L, Lp);
  const double delta = action_difference(L, Lp, pts[0], pts[1], lambda);
  for (double a : {0.5, 2.0}) {
    auto La = graph_submanifold(m, 1, [a](const Vec& q) {
      return Vec(Vec::Constant(1, a * std::cos(tau * q(0))));
    });
    auto pa = find_graph_intersections(La, Lp);
    const double da = action_difference(La, Lp, pa[0], pa[1], lambda);
    CHECK(std::abs(da - a * delta) < 1e-8);
  }
}

TEST_CASE("disjoint graphs report no intersection") {
  auto m = ChartedManifold::cotangent_torus(1);
  auto L = graph_submanifold(
      m, 1, [](const Vec&) { return Vec(Vec::Constant(1, 1.0)); });
  auto Lp = zero_section(m, 1);
  CHECK_THROWS_AS(find_graph_intersections(L, Lp), no_intersection_error);
}

// ---------------------------------------------------------------------------
// Escape probe

TEST_CASE("escape probe sees exact geometric growth for expanding maps") {
  auto mm = make_model_cotangent_map(1, 2.0, 0.0);
  auto graph = graph_submanifold(
      mm.map.manifold, 1,
      [](const Vec&) { return Vec(Vec::Constant(1, 0.3)); }, 16);
  auto probe = orbit_escape_probe(mm.map, graph, 20);
  REQUIRE(probe.rows.size() == 21);
  for (const auto& row : probe.rows) {
    const double expect = 0.3 * std::pow(2.0, row.k);
    CHECK(row.max_p_norm == doctest::Approx(expect).epsilon(1e-12));
    CHECK(row.min_p_norm == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("escape probe reports zero fiber norm on the zero section") {
  auto mm = make_model_cotangent_map(1, 2.0, 0.0);
  auto zs = zero_section(mm.map.manifold, 1, 16);
  auto probe = orbit_escape_probe(mm.map, zs, 10);
  for (const auto& row : probe.rows) {
    CHECK(row.max_p_norm == 0.0);
    CHECK(row.min_p_norm == 0.0);
  }
}

TEST_CASE("contracting maps settle on the fixed class") {
  auto mm = make_model_cotangent_map(1, 0.5, 0.3);
  auto graph = graph_submanifold(
      mm.map.manifold, 1,
      [](const Vec&) { return Vec(Vec::Constant(1, 0.3)); }, 16);
  auto probe = orbit_escape_probe(mm.map, graph, 40);
  CHECK(!probe.escaped_at);
  CHECK(probe.rows.back().max_p_norm == doctest::Approx(0.6).epsilon(1e-8));
  CHECK(probe.rows.back().min_p_norm == doctest::Approx(0.6).epsilon(1e-8));
}

TEST_CASE("escape probe records divergence as an event") {
  auto mm = make_model_cotangent_map(1, 10.0, 0.0);
  auto graph = graph_submanifold(
      mm.map.manifold, 1,
      [](const Vec&) { return Vec(Vec::Constant(1, 1.0)); }, 8);
  auto probe = orbit_escape_probe(mm.map, graph, 40);
  REQUIRE(probe.escaped_at.has_value());
  CHECK(*probe.escaped_at > 10);  // 10^k reaches 1e12 after 12 steps
  CHECK(*probe.escaped_at <= 14);
}
