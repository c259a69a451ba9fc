#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include "confsym/geometry.hpp"
#include "confsym/rng.hpp"
#include "confsym/systems.hpp"

using namespace confsym;

namespace {

constexpr double tau = 2.0 * std::numbers::pi;

double rel_gap(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec v4(double a, double b, double c, double d) {
  Vec v(4);
  v << a, b, c, d;
  return v;
}

}  // namespace

TEST_CASE("normalize reduces torus coordinates mod 1") {
  auto m = ChartedManifold::torus(2);
  Vec x = v2(1.25, -0.5);
  Vec y = m->normalize(x);
  CHECK(y(0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(y(1) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("normalize applies the suspension gluing") {
  auto ex = make_suspension_example();
  // One application of (xi, z) ~ (A xi, z - 1): A(0.2, 0.3) = (0.7, 0.5).
  Vec x = v4(0.2, 0.3, 1.3, 5.0);
  Vec y = ex.manifold->normalize(x);
  CHECK(y(0) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(y(1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(y(2) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(y(3) == doctest::Approx(5.0).epsilon(1e-12));

  SUBCASE("idempotent") {
    Vec z = ex.manifold->normalize(y);
    CHECK((z - y).lpNorm<Eigen::Infinity>() == doctest::Approx(0.0));
    CHECK(ex.manifold->in_fundamental_domain(y));
  }
  SUBCASE("point already in the fundamental domain is unchanged") {
    Vec w = v4(0.4, 0.6, 0.25, -2.0);
    CHECK((ex.manifold->normalize(w) - w).lpNorm<Eigen::Infinity>() == 0.0);
  }
  SUBCASE("negative z uses the inverse gluing") {
    Vec w = v4(0.7, 0.5, -0.7, 1.0);
    Vec r = ex.manifold->normalize(w);
    CHECK(ex.manifold->in_fundamental_domain(r));
    // A^{-1}(0.7, 0.5) = (0.2, 0.3).
    CHECK(r(0) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(r(1) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(r(2) == doctest::Approx(0.3).epsilon(1e-12));
  }
  SUBCASE("non-finite input is rejected") {
    Vec w = v4(0.1, 0.2, std::nan(""), 0.0);
    CHECK_THROWS_AS(ex.manifold->normalize(w), invalid_input_error);
  }
}

TEST_CASE("wedge of a 1-form with itself vanishes") {
  auto m = ChartedManifold::torus(2);
  DifferentialForm a = DifferentialForm::covector(m, v2(0.7, -1.3));
  DifferentialForm aa = wedge(a, a);
  CounterRng rng(11);
  for (int i = 0; i < 100; ++i) {
    Point x{m, rng.vector_in_box(m->sample_box())};
    CHECK(std::abs(aa(x, rng.direction(2), rng.direction(2))) < 1e-14);
  }
}

TEST_CASE("wedge pairs coordinate forms on the standard basis") {
  auto m = ChartedManifold::cotangent_torus(1);
  DifferentialForm dq = DifferentialForm::coordinate(m, 0);
  DifferentialForm dp = DifferentialForm::coordinate(m, 1);
  DifferentialForm area = wedge(dq, dp);
  Point x{m, v2(0.3, 0.4)};
  CHECK(area(x, v2(1, 0), v2(0, 1)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(area(x, v2(0, 1), v2(1, 0)) == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("wedge rejects forms on different charts") {
  auto m1 = ChartedManifold::torus(2);
  auto m2 = ChartedManifold::torus(2);
  DifferentialForm a = DifferentialForm::covector(m1, v2(1, 0));
  DifferentialForm b = DifferentialForm::covector(m2, v2(0, 1));
  CHECK_THROWS_AS(wedge(a, b), invalid_input_error);
}

TEST_CASE("wedge past the chart dimension returns a flagged zero form") {
  auto m = ChartedManifold::torus(2);
  DifferentialForm a = DifferentialForm::covector(m, v2(1, 0));
  DifferentialForm ab = wedge(a, DifferentialForm::covector(m, v2(0, 1)));
  DifferentialForm overflow = wedge(ab, a);
  CHECK(overflow.zero_warning());
  CHECK(overflow.degree() == 3);
}

TEST_CASE("omega ^ omega of the suspension form is nonzero with the expected "
          "coefficient") {
  auto ex = make_suspension_example();
  DifferentialForm omega2 = wedge(ex.omega, ex.omega);

  // Independent evaluation of the decomposable 4-form dz ^ beta_- ^ ds ^
  // beta_+ as a Gram determinant of the four covectors.
  auto reference = [&ex](const Point& x, const std::vector<Vec>& vs) {
    Mat M(4, 4);
    for (int i = 0; i < 4; ++i) {
      M(0, i) = vs[static_cast<std::size_t>(i)](2);  // dz
      M(1, i) = ex.beta_minus(x, vs[static_cast<std::size_t>(i)]);
      M(2, i) = vs[static_cast<std::size_t>(i)](3);  // ds
      M(3, i) = ex.beta_plus(x, vs[static_cast<std::size_t>(i)]);
    }
    return M.determinant();
  };

  const double coeff = 2.0 * std::log(ex.lam_minus);
  CounterRng rng(23);
  double max_val = 0.0;
  for (int i = 0; i < 200; ++i) {
    Point x{ex.manifold, rng.vector_in_box(ex.manifold->sample_box())};
    std::vector<Vec> vs = {rng.direction(4), rng.direction(4),
                           rng.direction(4), rng.direction(4)};
    const double lhs = omega2(x, vs);
    const double rhs = coeff * reference(x, vs);
    CHECK(rel_gap(lhs, rhs) < 1e-11);
    max_val = std::max(max_val, std::abs(lhs));
  }
  // Nondegenerate: a full-rank frame sees a nonzero volume.
  Point x0{ex.manifold, v4(0.2, 0.3, 0.4, 0.7)};
  std::vector<Vec> frame = {v4(1, 0, 0, 0), v4(0, 1, 0, 0), v4(0, 0, 1, 0),
                            v4(0, 0, 0, 1)};
  CHECK(std::abs(omega2(x0, frame)) > 1e-8);
  CHECK(max_val > 1e-8);
}

TEST_CASE("exterior derivative of a coordinate form vanishes") {
  auto m = ChartedManifold::cotangent_torus(1);
  DifferentialForm ddq = exterior_derivative(DifferentialForm::coordinate(m, 0));
  CounterRng rng(5);
  for (int i = 0; i < 50; ++i) {
    Point x{m, rng.vector_in_box(m->sample_box())};
    CHECK(std::abs(ddq(x, rng.direction(2), rng.direction(2))) < 1e-6);
  }
}

TEST_CASE("exterior derivative reproduces the scaling identity of the "
          "suspension covectors") {
  auto ex = make_suspension_example();
  const DifferentialForm dbp = exterior_derivative(ex.beta_plus);
  const DifferentialForm dbm = exterior_derivative(ex.beta_minus);
  CounterRng rng(7);
  for (int i = 0; i < 200; ++i) {
    Point x{ex.manifold, rng.vector_in_box(ex.manifold->sample_box())};
    Vec u = rng.direction(4);
    Vec v = rng.direction(4);
    auto dz_wedge = [&](const DifferentialForm& beta) {
      return u(2) * beta(x, v) - v(2) * beta(x, u);
    };
    CHECK(rel_gap(dbp(x, u, v), std::log(ex.lam_plus) * dz_wedge(ex.beta_plus)) <
          1e-5);
    CHECK(rel_gap(dbm(x, u, v),
                  std::log(ex.lam_minus) * dz_wedge(ex.beta_minus)) < 1e-5);
  }
}

TEST_CASE("d of the suspension primitive matches the closed-form 2-form") {
  auto ex = make_suspension_example();
  const DifferentialForm dlam = exterior_derivative(ex.big_lambda);
  CounterRng rng(9);
  for (int i = 0; i < 200; ++i) {
    Point x{ex.manifold, rng.vector_in_box(ex.manifold->sample_box())};
    Vec u = rng.direction(4);
    Vec v = rng.direction(4);
    CHECK(std::abs(dlam(x, u, v) - ex.omega(x, u, v)) < 1e-5);
  }
}

TEST_CASE("d of d is numerically zero for the catalog 1-forms") {
  auto ex = make_suspension_example();
  auto m1 = ChartedManifold::cotangent_torus(1);
  std::vector<DifferentialForm> forms = {ex.beta_plus, ex.beta_minus,
                                         ex.big_lambda, cotangent_lambda(m1, 1)};
  CounterRng rng(13);
  for (const auto& f : forms) {
    const DifferentialForm ddf =
        exterior_derivative(exterior_derivative(f, defaults::fd_step2),
                            defaults::fd_step2);
    const auto& m = f.manifold();
    for (int i = 0; i < 40; ++i) {
      Point x{m, rng.vector_in_box(m->sample_box())};
      std::vector<Vec> vs = {rng.direction(m->dim()), rng.direction(m->dim()),
                             rng.direction(m->dim())};
      CHECK(std::abs(ddf(x, vs)) < 1e-4);
    }
  }
}

TEST_CASE("evaluation at a declared singular point raises a domain error") {
  auto m = ChartedManifold::euclidean(2);
  DifferentialForm f(
      1, m,
      [](const Point& x, std::span<const Vec> v) {
        return v[0](0) / x.coords(0);
      },
      "singular");
  f.declare_singular([](const Vec& x) { return std::abs(x(0)) < 1e-12; });
  Point origin{m, v2(0.0, 0.5)};
  CHECK_THROWS_AS(f(origin, v2(1, 0)), domain_error);
}

TEST_CASE("pullback by the identity map is the identity on forms") {
  auto ex = make_torus6_example();
  DifferentialForm back = pullback(SmoothMap::identity(ex.manifold), ex.omega);
  CounterRng rng(17);
  for (int i = 0; i < 100; ++i) {
    Point x{ex.manifold, rng.vector_in_box(ex.manifold->sample_box())};
    Vec u = rng.direction(6);
    Vec v = rng.direction(6);
    CHECK(back(x, u, v) == doctest::Approx(ex.omega(x, u, v)).epsilon(1e-15));
  }
}

TEST_CASE("pullback scaling identities of the catalog systems") {
  SUBCASE("six-dimensional map") {
    auto ex = make_torus6_example();
    DifferentialForm pulled = pullback(ex.map.forward, ex.omega);
    CounterRng rng(19);
    for (int i = 0; i < 300; ++i) {
      Point x{ex.manifold, rng.vector_in_box(ex.manifold->sample_box())};
      Vec u = rng.direction(6);
      Vec v = rng.direction(6);
      CHECK(std::abs(pulled(x, u, v) - ex.ratio * ex.omega(x, u, v)) < 1e-10);
    }
  }
  SUBCASE("suspension time-1 flow") {
    auto ex = make_suspension_example();
    SmoothMap psi1(ex.manifold, ex.manifold,
                   [&ex](const Vec& x) { return (*ex.flow.closed_flow)(1.0, x); });
    DifferentialForm pulled = pullback(psi1, ex.omega);
    CounterRng rng(29);
    for (int i = 0; i < 300; ++i) {
      Point x{ex.manifold, rng.vector_in_box(ex.manifold->sample_box())};
      Vec u = rng.direction(4);
      Vec v = rng.direction(4);
      CHECK(std::abs(pulled(x, u, v) - ex.lam_minus * ex.omega(x, u, v)) <
            1e-6);
    }
  }
}

TEST_CASE("pullback is functorial under composition") {
  auto ex = make_torus6_example();
  const SmoothMap& f = ex.map.forward;
  SmoothMap ff = f.compose_after(f);
  DifferentialForm via_composition = pullback(ff, ex.omega);
  DifferentialForm via_stages = pullback(f, pullback(f, ex.omega));
  CounterRng rng(31);
  for (int i = 0; i < 200; ++i) {
    Point x{ex.manifold, rng.vector_in_box(ex.manifold->sample_box())};
    Vec u = rng.direction(6);
    Vec v = rng.direction(6);
    CHECK(std::abs(via_composition(x, u, v) - via_stages(x, u, v)) < 1e-8);
  }
}

TEST_CASE("catalog forms are antisymmetric and multilinear on samples") {
  auto susp = make_suspension_example();
  auto t6 = make_torus6_example();
  auto m1 = ChartedManifold::cotangent_torus(2);
  std::vector<DifferentialForm> two_forms = {susp.omega, t6.omega1, t6.omega2,
                                             t6.omega, cotangent_omega(m1, 2)};
  CounterRng rng(37);
  for (const auto& f : two_forms) {
    const auto& m = f.manifold();
    for (int i = 0; i < 1000; ++i) {
      Point x{m, rng.vector_in_box(m->sample_box())};
      Vec u = rng.direction(m->dim());
      Vec v = rng.direction(m->dim());
      Vec w = rng.direction(m->dim());
      const double c = rng.uniform(-2.0, 2.0);
      CHECK(rel_gap(f(x, u, v), -f(x, v, u)) < 1e-12);
      CHECK(rel_gap(f(x, Vec(c * u + w), v), c * f(x, u, v) + f(x, w, v)) <
            1e-12);
    }
  }
}

TEST_CASE("line integral of the tautological form over a constant graph") {
  auto m = ChartedManifold::cotangent_torus(1);
  DifferentialForm lambda = cotangent_lambda(m, 1);
  const double c = 1.7;
  Loop loop(m, [c](double t) { return v2(t, c); });
  CHECK(line_integral(lambda, loop) == doctest::Approx(c).epsilon(1e-10));
}

TEST_CASE("line integral of an exact form over a loop vanishes") {
  auto m = ChartedManifold::cotangent_torus(1);
  // dS for S(q, p) = sin(2 pi q) cos(2 pi p) / 7.
  DifferentialForm dS(
      1, m,
      [](const Point& x, std::span<const Vec> v) {
        const double q = x.coords(0), p = x.coords(1);
        const double Sq = tau * std::cos(tau * q) * std::cos(tau * p) / 7.0;
        const double Sp = -tau * std::sin(tau * q) * std::sin(tau * p) / 7.0;
        return Sq * v[0](0) + Sp * v[0](1);
      },
      "dS");
  Loop loop(m, [](double t) {
    return v2(t, 0.2 + 0.1 * std::sin(tau * t));
  });
  CHECK(std::abs(line_integral(dS, loop)) < 1e-10);
}

TEST_CASE("line integral of the tautological form over the zero section "
          "vanishes") {
  auto m = ChartedManifold::cotangent_torus(1);
  DifferentialForm lambda = cotangent_lambda(m, 1);
  Loop loop(m, [](double t) { return v2(t, 0.0); });
  CHECK(std::abs(line_integral(lambda, loop)) < 1e-12);
}

TEST_CASE("line integral reports the parameter of a failing integrand") {
  auto m = ChartedManifold::cotangent_torus(1);
  DifferentialForm lambda = cotangent_lambda(m, 1);
  Curve broken(
      m, [](double t) { return v2(t, 0.0); },
      [](double t) -> Vec {
        if (t > 0.5) throw std::runtime_error("no derivative");
        return v2(1.0, 0.0);
      });
  CHECK_THROWS_WITH_AS(line_integral(lambda, broken),
                       doctest::Contains("parameter"), error);
}

TEST_CASE("loops must close in the quotient") {
  auto m = ChartedManifold::cotangent_torus(1);
  CHECK_THROWS_AS(Loop(m, [](double t) { return v2(0.5 * t, 0.0); }),
                  topology_error);
}

TEST_CASE("surface integral of the standard area over the unit square") {
  auto m = ChartedManifold::euclidean(2);
  DifferentialForm area(
      2, m,
      [](const Point&, std::span<const Vec> v) {
        return v[0](0) * v[1](1) - v[0](1) * v[1](0);
      },
      "area");
  Patch square(m, [](double u, double v) { return v2(u, v); });
  CHECK(surface_integral(area, square) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("surface integral of omega over a Lagrangian graph patch vanishes") {
  auto m = ChartedManifold::cotangent_torus(2);
  DifferentialForm omega = cotangent_omega(m, 2);
  // Graph of dS for S = sin(2 pi q1) cos(2 pi q2) / 9, restricted to a patch.
  Patch patch(m, [](double u, double v) {
    Vec x(4);
    const double q1 = 0.1 + 0.5 * u, q2 = 0.2 + 0.5 * v;
    x << q1, q2, tau * std::cos(tau * q1) * std::cos(tau * q2) / 9.0,
        -tau * std::sin(tau * q1) * std::sin(tau * q2) / 9.0;
    return x;
  });
  CHECK(std::abs(surface_integral(omega, patch)) < 1e-10);
}

TEST_CASE("surface integrals scale by the conformality ratio") {
  auto mm = make_model_cotangent_map(1, 0.5, 0.0);
  const auto& m = mm.map.manifold;
  DifferentialForm omega = cotangent_omega(m, 1);
  Patch patch(m, [](double u, double v) {
    return v2(0.2 + 0.3 * u, 0.1 + 0.4 * v + 0.2 * u * v);
  });
  const SmoothMap& f = mm.map.forward;
  Patch mapped(m, [&f, &patch](double u, double v) {
    return f(patch.at(u, v).coords);
  });
  const double before = surface_integral(omega, patch);
  const double after = surface_integral(omega, mapped);
  CHECK(after == doctest::Approx(0.5 * before).epsilon(1e-8));
  CHECK(std::abs(before) > 1e-3);
}

TEST_CASE("boundary integral agrees with the integral of the derivative") {
  auto m = ChartedManifold::cotangent_torus(1);
  DifferentialForm lambda = cotangent_lambda(m, 1);
  DifferentialForm dlambda = exterior_derivative(lambda);
  CounterRng rng(43);
  for (int trial = 0; trial < 3; ++trial) {
    const Vec base = rng.vector_in_box({{0.0, 1.0}, {-0.5, 0.5}});
    const double su = rng.uniform(0.2, 0.6);
    const double sv = rng.uniform(0.2, 0.6);
    const double shear = rng.uniform(-0.3, 0.3);
    auto chart = [=](double u, double v) {
      return v2(base(0) + su * u + shear * u * v, base(1) + sv * v);
    };
    Patch patch(m, chart);
    Curve boundary(m, [chart](double t) {
      // counterclockwise around the unit parameter square
      if (t < 0.25) return chart(4.0 * t, 0.0);
      if (t < 0.5) return chart(1.0, 4.0 * (t - 0.25));
      if (t < 0.75) return chart(1.0 - 4.0 * (t - 0.5), 1.0);
      return chart(0.0, 1.0 - 4.0 * (t - 0.75));
    });
    const double around = line_integral(lambda, boundary);
    const double inside = surface_integral(dlambda, patch);
    CHECK(std::abs(around - inside) < 1e-4);
  }

  SUBCASE("also for the suspension primitive") {
    auto ex = make_suspension_example();
    DifferentialForm dbig = exterior_derivative(ex.big_lambda);
    CounterRng rng2(47);
    for (int trial = 0; trial < 2; ++trial) {
      const Vec base = rng2.vector_in_box(ex.manifold->sample_box());
      const double su = rng2.uniform(0.1, 0.3);
      const double sv = rng2.uniform(0.1, 0.3);
      auto chart = [=, &base](double u, double v) {
        Vec x = base;
        x(0) += su * u;       // torus direction
        x(2) += sv * v * 0.5;  // transverse z direction
        x(3) += 0.2 * u * v;   // twist in s
        return x;
      };
      Patch patch(ex.manifold, chart);
      Curve boundary(ex.manifold, [chart](double t) {
        if (t < 0.25) return chart(4.0 * t, 0.0);
        if (t < 0.5) return chart(1.0, 4.0 * (t - 0.25));
        if (t < 0.75) return chart(1.0 - 4.0 * (t - 0.5), 1.0);
        return chart(0.0, 1.0 - 4.0 * (t - 0.75));
      });
      const double around = line_integral(ex.big_lambda, boundary);
      const double inside = surface_integral(dbig, patch);
      CHECK(std::abs(around - inside) < 1e-4);
    }
  }
}

TEST_CASE("pullback propagates Jacobian failures with the location") {
  auto m = ChartedManifold::torus(2);
  SmoothMap broken(
      m, m, [](const Vec& x) { return x; },
      [](const Vec&) -> Mat { throw std::runtime_error("no jacobian"); });
  DifferentialForm pulled =
      pullback(broken, DifferentialForm::covector(m, v2(1, 0)));
  Point x{m, v2(0.25, 0.75)};
  CHECK_THROWS_WITH_AS(pulled(x, v2(1, 0)), doctest::Contains("Jacobian"),
                       error);
}

TEST_CASE("slope fitting uses the last half of the range") {
  // First half constant, second half slope 2: the fit sees only the tail.
  std::vector<double> x, y;
  for (int i = 0; i < 10; ++i) {
    x.push_back(i);
    y.push_back(i < 5 ? 1.0 : 2.0 * i);
  }
  CHECK(fit_slope_last_half(x, y) == doctest::Approx(2.0).epsilon(1e-12));
}
