#include "confsym/systems.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace confsym {

double lambda_minus() { return (3.0 - std::sqrt(5.0)) / 2.0; }
double lambda_plus() { return (3.0 + std::sqrt(5.0)) / 2.0; }
double golden_p() { return (std::sqrt(5.0) - 1.0) / 2.0; }

// ---------------------------------------------------------------------------
// Suspension example

SuspensionExample make_suspension_example() {
  const double lm = lambda_minus();
  const double lp = lambda_plus();
  const double s5 = std::sqrt(5.0);
  const double p = golden_p();

  Eigen::Matrix2d A;
  A << 2, 1, 1, 1;
  Eigen::Matrix2d Ainv;
  Ainv << 1, -1, -1, 2;

  // Dual covectors of the eigenbasis v_+ = (1, p), v_- = (1, -1/p).
  const Eigen::Vector2d ap(1.0 / (p * s5), 1.0 / s5);
  const Eigen::Vector2d am(p / s5, -1.0 / s5);

  GluingRule glue;
  glue.forward = [A](const Vec& x) {
    Vec y = x;
    y(0) = A(0, 0) * x(0) + A(0, 1) * x(1);
    y(1) = A(1, 0) * x(0) + A(1, 1) * x(1);
    y(2) = x(2) - 1.0;
    return y;
  };
  glue.backward = [Ainv](const Vec& x) {
    Vec y = x;
    y(0) = Ainv(0, 0) * x(0) + Ainv(0, 1) * x(1);
    y(1) = Ainv(1, 0) * x(0) + Ainv(1, 1) * x(1);
    y(2) = x(2) + 1.0;
    return y;
  };
  glue.in_domain = [](const Vec& x) { return x(2) >= 0.0 && x(2) < 1.0; };
  glue.side = [](const Vec& x) {
    if (x(2) >= 1.0) return 1;
    if (x(2) < 0.0) return -1;
    return 0;
  };

  auto manifold = std::make_shared<ChartedManifold>(
      4, std::vector<bool>{true, true, false, false}, glue);
  manifold->set_sample_box({{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}, {-1.0, 1.0}});
  ManifoldPtr m = manifold;

  auto covector_form = [m](const Eigen::Vector2d& c, std::string name) {
    return DifferentialForm(
        1, m,
        [c](const Point&, std::span<const Vec> v) {
          return c(0) * v[0](0) + c(1) * v[0](1);
        },
        std::move(name));
  };
  DifferentialForm alpha_plus = covector_form(ap, "alpha_plus");
  DifferentialForm alpha_minus = covector_form(am, "alpha_minus");

  auto beta_form = [m](const Eigen::Vector2d& c, double lam, std::string name) {
    return DifferentialForm(
        1, m,
        [c, lam](const Point& x, std::span<const Vec> v) {
          return std::pow(lam, x.coords(2)) * (c(0) * v[0](0) + c(1) * v[0](1));
        },
        std::move(name));
  };
  DifferentialForm beta_plus = beta_form(ap, lp, "beta_plus");
  DifferentialForm beta_minus = beta_form(am, lm, "beta_minus");

  DifferentialForm big_lambda(
      1, m,
      [ap, am, lp, lm](const Point& x, std::span<const Vec> v) {
        const double bp =
            std::pow(lp, x.coords(2)) * (ap(0) * v[0](0) + ap(1) * v[0](1));
        const double bm =
            std::pow(lm, x.coords(2)) * (am(0) * v[0](0) + am(1) * v[0](1));
        return bm + x.coords(3) * bp;
      },
      "big_lambda");

  // omega = dz ^ (ln lm beta_- + s ln lp beta_+) + ds ^ beta_+  (closed form)
  DifferentialForm omega(
      2, m,
      [ap, am, lp, lm](const Point& x, std::span<const Vec> v) {
        const double s = x.coords(3);
        const double llm = std::log(lm);
        const double llp = std::log(lp);
        auto bp = [&](const Vec& w) {
          return std::pow(lp, x.coords(2)) * (ap(0) * w(0) + ap(1) * w(1));
        };
        auto bm = [&](const Vec& w) {
          return std::pow(lm, x.coords(2)) * (am(0) * w(0) + am(1) * w(1));
        };
        auto gamma = [&](const Vec& w) { return llm * bm(w) + s * llp * bp(w); };
        const Vec& u = v[0];
        const Vec& w = v[1];
        return u(2) * gamma(w) - w(2) * gamma(u) + u(3) * bp(w) - w(3) * bp(u);
      },
      "omega_suspension");

  SmoothMap gluing_map(
      m, m, glue.forward, [A](const Vec&) {
        Mat J = Mat::Identity(4, 4);
        J(0, 0) = A(0, 0);
        J(0, 1) = A(0, 1);
        J(1, 0) = A(1, 0);
        J(1, 1) = A(1, 1);
        return J;
      });

  FlowSystem flow;
  flow.manifold = m;
  flow.name = "suspension";
  flow.omega = omega;
  flow.nominal_rate = std::log(lm);
  const double two_log_lm = 2.0 * std::log(lm);
  flow.vector_field = VectorField{
      [two_log_lm](const Vec& x) {
        Vec f = Vec::Zero(4);
        f(2) = 1.0;
        f(3) = two_log_lm * x(3);
        return f;
      },
      [two_log_lm](const Vec&) {
        Mat J = Mat::Zero(4, 4);
        J(3, 3) = two_log_lm;
        return J;
      }};
  flow.closed_flow = [lm](double t, const Vec& x) {
    Vec y = x;
    y(2) = x(2) + t;
    y(3) = std::pow(lm, 2.0 * t) * x(3);
    return y;
  };
  flow.lambda_form = DifferentialForm(
      1, m,
      [big_lambda](const Point& x, std::span<const Vec> v) {
        return -big_lambda(x, v);
      },
      "minus_big_lambda");

  return SuspensionExample{m,
                           lm,
                           lp,
                           A,
                           alpha_plus,
                           alpha_minus,
                           beta_plus,
                           beta_minus,
                           big_lambda,
                           omega,
                           gluing_map,
                           std::move(flow)};
}

// ---------------------------------------------------------------------------
// 6-dimensional example

Torus6Example make_torus6_example() {
  const double p = golden_p();
  const double lm = lambda_minus();
  const double s5 = std::sqrt(5.0);
  const double scale = lm * lm * lm;

  auto manifold = std::make_shared<ChartedManifold>(
      6, std::vector<bool>{true, true, true, true, false, false});
  manifold->set_sample_box({{0.0, 1.0},
                            {0.0, 1.0},
                            {0.0, 1.0},
                            {0.0, 1.0},
                            {-1.0, 1.0},
                            {-1.0, 1.0}});
  ManifoldPtr m = manifold;

  // omega1 = (dth2 - p dth1) ^ (dth4 - p dth3), indices 0-based below.
  DifferentialForm omega1(
      2, m,
      [p](const Point&, std::span<const Vec> v) {
        auto a = [p](const Vec& w) { return w(1) - p * w(0); };
        auto b = [p](const Vec& w) { return w(3) - p * w(2); };
        return a(v[0]) * b(v[1]) - a(v[1]) * b(v[0]);
      },
      "omega1");

  // omega2 in chart coordinates: (1/sqrt5) [ (dth2 + dth1/p) ^ drho1
  //                                        + (dth4 + dth3/p) ^ drho2 ].
  DifferentialForm omega2(
      2, m,
      [p, s5](const Point&, std::span<const Vec> v) {
        auto a1 = [p](const Vec& w) { return w(1) + w(0) / p; };
        auto a2 = [p](const Vec& w) { return w(3) + w(2) / p; };
        const Vec& u = v[0];
        const Vec& w = v[1];
        double t1 = a1(u) * w(4) - a1(w) * u(4);
        double t2 = a2(u) * w(5) - a2(w) * u(5);
        return (t1 + t2) / s5;
      },
      "omega2");

  DifferentialForm omega(
      2, m,
      [omega1, omega2](const Point& x, std::span<const Vec> v) {
        return omega1(x, v) + omega2(x, v);
      },
      "omega_torus6");

  auto apply_T = [](double a, double b, double& oa, double& ob) {
    oa = 2.0 * a + b;
    ob = a + b;
  };
  auto forward_fn = [apply_T, scale](const Vec& x) {
    Vec y(6);
    apply_T(x(0), x(1), y(0), y(1));
    apply_T(x(2), x(3), y(2), y(3));
    y(4) = scale * x(4);
    y(5) = scale * x(5);
    return y;
  };
  auto inverse_fn = [scale](const Vec& x) {
    Vec y(6);
    y(0) = x(0) - x(1);
    y(1) = -x(0) + 2.0 * x(1);
    y(2) = x(2) - x(3);
    y(3) = -x(2) + 2.0 * x(3);
    y(4) = x(4) / scale;
    y(5) = x(5) / scale;
    return y;
  };
  Mat Jf = Mat::Zero(6, 6);
  Jf(0, 0) = 2;
  Jf(0, 1) = 1;
  Jf(1, 0) = 1;
  Jf(1, 1) = 1;
  Jf(2, 2) = 2;
  Jf(2, 3) = 1;
  Jf(3, 2) = 1;
  Jf(3, 3) = 1;
  Jf(4, 4) = scale;
  Jf(5, 5) = scale;
  Mat Ji = Jf.inverse();

  MapSystem map{m,
                SmoothMap(m, m, forward_fn, [Jf](const Vec&) { return Jf; }),
                SmoothMap(m, m, inverse_fn, [Ji](const Vec&) { return Ji; }),
                lm * lm,
                omega,
                std::nullopt,
                "torus6"};

  return Torus6Example{m, p, lm, lm * lm, omega1, omega2, omega,
                       std::move(map)};
}

// ---------------------------------------------------------------------------
// Cotangent structures

DifferentialForm cotangent_omega(const ManifoldPtr& m, int n) {
  return DifferentialForm(
      2, m,
      [n](const Point&, std::span<const Vec> v) {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
          s += v[0](i) * v[1](n + i) - v[0](n + i) * v[1](i);
        return s;
      },
      "omega_canonical");
}

DifferentialForm cotangent_lambda(const ManifoldPtr& m, int n) {
  return DifferentialForm(
      1, m,
      [n](const Point& x, std::span<const Vec> v) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += x.coords(n + i) * v[0](i);
        return s;
      },
      "lambda_tautological");
}

// ---------------------------------------------------------------------------
// Dissipative lift

ManeLift make_mane_lift(int base_dim, std::function<Vec(const Vec&)> X,
                        double alpha,
                        std::function<Mat(const Vec&)> X_jacobian) {
  const int n = base_dim;
  ManifoldPtr m = ChartedManifold::cotangent_torus(n);

  auto X_jac = X_jacobian;
  if (!X_jac) {
    auto Xf = X;
    X_jac = [Xf, n](const Vec& q) {
      const double h = defaults::fd_step;
      Mat J(n, n);
      Vec qp = q, qm = q;
      for (int j = 0; j < n; ++j) {
        qp(j) = q(j) + h;
        qm(j) = q(j) - h;
        J.col(j) = (Xf(qp) - Xf(qm)) / (2.0 * h);
        qp(j) = q(j);
        qm(j) = q(j);
      }
      return J;
    };
  }

  auto H = [X, n](const Vec& x) {
    Vec q = x.head(n);
    Vec pp = x.tail(n) + X(q);
    return 0.5 * pp.squaredNorm() - 0.5 * X(q).squaredNorm();
  };

  FlowSystem flow;
  flow.manifold = m;
  flow.name = "mane";
  flow.omega = cotangent_omega(m, n);
  flow.lambda_form = cotangent_lambda(m, n);
  flow.nominal_rate = -alpha;
  flow.vector_field = VectorField{
      [X, X_jac, alpha, n](const Vec& x) {
        Vec q = x.head(n);
        Vec p = x.tail(n);
        Vec f(2 * n);
        f.head(n) = p + X(q);
        f.tail(n) = -(X_jac(q).transpose() * p) - alpha * p;
        return f;
      },
      nullptr};
  flow.split = CotangentSplit{
      n,
      [X_jac, n](const Vec& x) {
        Vec q = x.head(n);
        Vec p = x.tail(n);
        return Vec(X_jac(q).transpose() * p);
      },
      [X, n](const Vec& x) { return Vec(x.tail(n) + X(x.head(n))); },
      -alpha};

  return ManeLift{n, alpha, m, X, H, std::move(flow)};
}

// ---------------------------------------------------------------------------
// Annulus example

namespace {

// Quintic smoothstep on [0, 1]; C^2 at both ends.
double smoothstep(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}
double smoothstep_d(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double omt = 1.0 - t;
  return 30.0 * t * t * omt * omt;
}
double smoothstep_dd(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
}

}  // namespace

LeCalvezExample make_lecalvez_example(const LeCalvezParams& prm) {
  auto fail = [](const std::string& ineq) {
    throw invalid_parameter_error("lecalvez parameters violate " + ineq);
  };
  if (!(prm.beta > 0.0)) fail("beta > 0");
  if (!(prm.beta < prm.alpha)) fail("beta < alpha");
  if (!(prm.alpha < 2.0 * prm.beta)) fail("alpha < 2 beta");
  if (!(0.0 < prm.A)) fail("0 < A");
  if (!(prm.A < prm.B)) fail("A < B");
  if (!(prm.B < prm.C)) fail("B < C");
  if (!(prm.C < prm.D)) fail("C < D");

  const double beta = prm.beta, alpha = prm.alpha;
  const double A = prm.A, B = prm.B, C = prm.C, D = prm.D;

  // V: even, -1 on [-A, A], ramps to 0 across [A, B], 0 beyond.
  auto V = [A, B](double x) {
    double t = (std::abs(x) - A) / (B - A);
    return -1.0 + smoothstep(t);
  };
  auto dV = [A, B](double x) {
    double ax = std::abs(x);
    double t = (ax - A) / (B - A);
    double d = smoothstep_d(t) / (B - A);
    return x >= 0.0 ? d : -d;
  };
  auto ddV = [A, B](double x) {
    double t = (std::abs(x) - A) / (B - A);
    return smoothstep_dd(t) / ((B - A) * (B - A));
  };

  // eta: even, 1 on [-B, B], ramps to 0 across [B, C], 0 beyond.
  auto eta = [B, C](double x) {
    double t = (std::abs(x) - B) / (C - B);
    return 1.0 - smoothstep(t);
  };
  auto deta = [B, C](double x) {
    double ax = std::abs(x);
    double t = (ax - B) / (C - B);
    double d = -smoothstep_d(t) / (C - B);
    return x >= 0.0 ? d : -d;
  };
  auto ddeta = [B, C](double x) {
    double t = (std::abs(x) - B) / (C - B);
    return -smoothstep_dd(t) / ((C - B) * (C - B));
  };

  // Circle field: odd, equal to -beta x up to (C+D)/2, blended into
  // beta (x - D) so that +-D are hyperbolic zeros with matching derivatives.
  const double blend_lo = 0.5 * (C + D);
  const double blend_w = 0.5 * (D - C);
  auto Xbar = [beta, blend_lo, blend_w, D](double x) {
    double ax = std::abs(x);
    double val;
    if (ax <= blend_lo) {
      val = -beta * ax;
    } else {
      double u = (ax - blend_lo) / blend_w;
      double s = smoothstep(u);
      val = (1.0 - s) * (-beta * ax) + s * beta * (ax - D);
    }
    return x >= 0.0 ? val : -val;
  };
  auto dXbar = [beta, blend_lo, blend_w, D](double x) {
    double ax = std::abs(x);
    if (ax <= blend_lo) return -beta;
    double u = (ax - blend_lo) / blend_w;
    double s = smoothstep(u);
    double sd = smoothstep_d(u) / blend_w;
    return sd * beta * (2.0 * ax - D) + beta * (2.0 * s - 1.0);
  };
  auto ddXbar = [beta, blend_lo, blend_w, D](double x) {
    double ax = std::abs(x);
    double val;
    if (ax <= blend_lo) {
      val = 0.0;
    } else {
      double u = (ax - blend_lo) / blend_w;
      double sd = smoothstep_d(u) / blend_w;
      double sdd = smoothstep_dd(u) / (blend_w * blend_w);
      val = sdd * beta * (2.0 * ax - D) + 4.0 * beta * sd;
    }
    return x >= 0.0 ? val : -val;
  };

  auto K = [V, eta, Xbar, beta](double x, double y) {
    double HX = 0.5 * y * (y + 2.0 * Xbar(x));
    double H = y * y - beta * x * y;
    double e = eta(x);
    return (1.0 - e) * HX + e * (H + V(x));
  };
  auto Ky = [eta, Xbar, beta](double x, double y) {
    double e = eta(x);
    return (1.0 - e) * (y + Xbar(x)) + e * (2.0 * y - beta * x);
  };
  auto Kx = [V, dV, eta, deta, Xbar, dXbar, beta](double x, double y) {
    double HX = 0.5 * y * (y + 2.0 * Xbar(x));
    double H = y * y - beta * x * y;
    double e = eta(x);
    double ep = deta(x);
    return -ep * HX + (1.0 - e) * y * dXbar(x) + ep * (H + V(x)) +
           e * (-beta * y + dV(x));
  };
  // Mixed and second x-derivatives feed the analytic field Jacobian.
  auto Kxy = [eta, deta, Xbar, dXbar, beta](double x, double y) {
    double e = eta(x);
    double ep = deta(x);
    return -ep * (y + Xbar(x)) + (1.0 - e) * dXbar(x) +
           ep * (2.0 * y - beta * x) + e * (-beta);
  };
  auto Kxx = [V, dV, ddV, eta, deta, ddeta, Xbar, dXbar, ddXbar, beta](
                 double x, double y) {
    double HX = 0.5 * y * (y + 2.0 * Xbar(x));
    double H = y * y - beta * x * y;
    double e = eta(x);
    double ep = deta(x);
    double epp = ddeta(x);
    return epp * (H + V(x) - HX) +
           2.0 * ep * (-beta * y + dV(x) - y * dXbar(x)) +
           (1.0 - e) * y * ddXbar(x) + e * ddV(x);
  };

  GluingRule glue;
  glue.forward = [D](const Vec& x) {
    Vec y = x;
    y(0) = x(0) - 2.0 * D;
    return y;
  };
  glue.backward = [D](const Vec& x) {
    Vec y = x;
    y(0) = x(0) + 2.0 * D;
    return y;
  };
  glue.in_domain = [D](const Vec& x) { return x(0) >= -D && x(0) < D; };
  glue.side = [D](const Vec& x) {
    if (x(0) >= D) return 1;
    if (x(0) < -D) return -1;
    return 0;
  };
  auto annulus = std::make_shared<ChartedManifold>(
      2, std::vector<bool>{false, false}, glue);
  annulus->set_sample_box({{-D, D}, {-1.0, 1.0}});
  ManifoldPtr am = annulus;

  DifferentialForm area(
      2, am,
      [](const Point&, std::span<const Vec> v) {
        return v[0](0) * v[1](1) - v[0](1) * v[1](0);
      },
      "area");
  DifferentialForm ydx(
      1, am,
      [](const Point& x, std::span<const Vec> v) {
        return x.coords(1) * v[0](0);
      },
      "y_dx");

  FlowSystem flow;
  flow.manifold = am;
  flow.name = "lecalvez";
  flow.omega = area;
  flow.lambda_form = ydx;
  flow.nominal_rate = -alpha;
  flow.vector_field = VectorField{
      [Ky, Kx, alpha](const Vec& z) {
        Vec f(2);
        f(0) = Ky(z(0), z(1));
        f(1) = -Kx(z(0), z(1)) - alpha * z(1);
        return f;
      },
      [Kxy, Kxx, eta, alpha](const Vec& z) {
        Mat J(2, 2);
        J(0, 0) = Kxy(z(0), z(1));
        J(0, 1) = 1.0 + eta(z(0));
        J(1, 0) = -Kxx(z(0), z(1));
        J(1, 1) = -Kxy(z(0), z(1)) - alpha;
        return J;
      }};
  flow.split = CotangentSplit{
      1, [Kx](const Vec& z) { return Vec::Constant(1, Kx(z(0), z(1))); },
      [Ky](const Vec& z) { return Vec::Constant(1, Ky(z(0), z(1))); }, -alpha};

  // Linear model: xdot = -beta x + 2 y, ydot = (beta - alpha) y, with its
  // closed-form flow (triangular system).
  auto planem =
      std::make_shared<ChartedManifold>(2, std::vector<bool>{false, false});
  planem->set_sample_box({{-1.0, 1.0}, {-1.0, 1.0}});
  ManifoldPtr pm = planem;

  DifferentialForm plane_area(
      2, pm,
      [](const Point&, std::span<const Vec> v) {
        return v[0](0) * v[1](1) - v[0](1) * v[1](0);
      },
      "area");
  DifferentialForm plane_ydx(
      1, pm,
      [](const Point& x, std::span<const Vec> v) {
        return x.coords(1) * v[0](0);
      },
      "y_dx");

  FlowSystem linear;
  linear.manifold = pm;
  linear.name = "lecalvez_linear";
  linear.omega = plane_area;
  linear.lambda_form = plane_ydx;
  linear.nominal_rate = -alpha;
  linear.vector_field = VectorField{
      [beta, alpha](const Vec& z) {
        Vec f(2);
        f(0) = -beta * z(0) + 2.0 * z(1);
        f(1) = (beta - alpha) * z(1);
        return f;
      },
      [beta, alpha](const Vec&) {
        Mat J(2, 2);
        J << -beta, 2.0, 0.0, beta - alpha;
        return J;
      }};
  linear.closed_flow = [beta, alpha](double t, const Vec& z) {
    const double ex = std::exp(-beta * t);
    const double ey = std::exp((beta - alpha) * t);
    Vec y(2);
    y(1) = ey * z(1);
    y(0) = ex * z(0) + 2.0 * z(1) * (ey - ex) / (2.0 * beta - alpha);
    return y;
  };

  FlowSystem bumped = linear;
  bumped.name = "lecalvez_bumped";
  bumped.closed_flow.reset();
  bumped.vector_field = VectorField{
      [beta, alpha, dV](const Vec& z) {
        Vec f(2);
        f(0) = -beta * z(0) + 2.0 * z(1);
        f(1) = -dV(z(0)) + (beta - alpha) * z(1);
        return f;
      },
      [beta, alpha, ddV](const Vec& z) {
        Mat J(2, 2);
        J << -beta, 2.0, -ddV(z(0)), beta - alpha;
        return J;
      }};

  LeCalvezExample ex;
  ex.params = prm;
  ex.annulus = am;
  ex.potential = V;
  ex.potential_deriv = dV;
  ex.cutoff = eta;
  ex.cutoff_deriv = deta;
  ex.circle_field = Xbar;
  ex.K = K;
  ex.dK_dx = Kx;
  ex.dK_dy = Ky;
  ex.d2K_dy2 = [eta](double x) { return 1.0 + eta(x); };
  ex.flow = std::move(flow);
  ex.linear_flow = std::move(linear);
  ex.bumped_flow = std::move(bumped);
  return ex;
}

double PlanarPolyline::distance(const Eigen::Vector2d& q) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& piece : pieces) {
    for (std::size_t i = 0; i + 1 < piece.size(); ++i) {
      const Eigen::Vector2d& a = piece[i];
      const Eigen::Vector2d& b = piece[i + 1];
      const Eigen::Vector2d ab = b - a;
      const double len2 = ab.squaredNorm();
      double t = len2 > 0.0 ? (q - a).dot(ab) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      best = std::min(best, (q - (a + t * ab)).norm());
    }
    if (piece.size() == 1) best = std::min(best, (q - piece[0]).norm());
  }
  return best;
}

std::size_t PlanarPolyline::point_count() const {
  std::size_t n = 0;
  for (const auto& piece : pieces) n += piece.size();
  return n;
}

PlanarPolyline invariant_curve(const LeCalvezExample& sys, double dt,
                               double t_max) {
  const double B = sys.params.B;
  const double D = sys.params.D;
  PlanarPolyline curve;

  // Axis pieces [B, D] and [-D, -B] (exactly invariant, y = 0).
  const int axis_samples = 2000;
  std::vector<Eigen::Vector2d> right, left;
  for (int i = 0; i <= axis_samples; ++i) {
    double t = static_cast<double>(i) / axis_samples;
    right.emplace_back(B + t * (D - B), 0.0);
    left.emplace_back(-B - t * (D - B), 0.0);
  }
  curve.pieces.push_back(std::move(right));
  curve.pieces.push_back(std::move(left));

  // Orbits continued from (+-B, 0); they leave the axis and limit onto the
  // origin, so integration stops once within 1e-7 of it.
  const auto& field = sys.flow.vector_field->value;
  auto continue_orbit = [&](Eigen::Vector2d z0) {
    std::vector<Eigen::Vector2d> pts;
    Vec z(2);
    z << z0(0), z0(1);
    pts.emplace_back(z(0), z(1));
    double t = 0.0;
    while (t < t_max && z.norm() > 1e-7) {
      const Vec k1 = field(z);
      const Vec k2 = field(z + 0.5 * dt * k1);
      const Vec k3 = field(z + 0.5 * dt * k2);
      const Vec k4 = field(z + dt * k3);
      z = z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      t += dt;
      pts.emplace_back(z(0), z(1));
    }
    pts.emplace_back(0.0, 0.0);
    return pts;
  };
  curve.pieces.push_back(continue_orbit({B, 0.0}));
  curve.pieces.push_back(continue_orbit({-B, 0.0}));
  return curve;
}

double non_graph_gap(const PlanarPolyline& curve, int bins) {
  // Vertical spread of the curve per x-bin.
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  for (const auto& piece : curve.pieces)
    for (const auto& pt : piece) {
      xmin = std::min(xmin, pt(0));
      xmax = std::max(xmax, pt(0));
    }
  if (!(xmax > xmin)) return 0.0;
  std::vector<double> lo(static_cast<std::size_t>(bins),
                         std::numeric_limits<double>::infinity());
  std::vector<double> hi(static_cast<std::size_t>(bins), -lo[0]);
  for (const auto& piece : curve.pieces)
    for (const auto& pt : piece) {
      int b = static_cast<int>((pt(0) - xmin) / (xmax - xmin) * bins);
      b = std::clamp(b, 0, bins - 1);
      auto ub = static_cast<std::size_t>(b);
      lo[ub] = std::min(lo[ub], pt(1));
      hi[ub] = std::max(hi[ub], pt(1));
    }
  double gap = 0.0;
  for (int b = 0; b < bins; ++b) {
    auto ub = static_cast<std::size_t>(b);
    if (hi[ub] > lo[ub]) gap = std::max(gap, hi[ub] - lo[ub]);
  }
  return gap;
}

// ---------------------------------------------------------------------------
// Model map, Liouville flow, toral maps

ModelCotangentMap make_model_cotangent_map(int n, double a, const Vec& c) {
  if (!(a > 0.0))
    throw invalid_parameter_error("model map requires ratio a > 0");
  if (c.size() != n)
    throw invalid_input_error("model map drift has wrong dimension");
  ManifoldPtr m = ChartedManifold::cotangent_torus(n);

  auto fwd = [a, c, n](const Vec& x) {
    Vec y = x;
    y.tail(n) = a * x.tail(n) + c;
    return y;
  };
  auto inv = [a, c, n](const Vec& x) {
    Vec y = x;
    y.tail(n) = (x.tail(n) - c) / a;
    return y;
  };
  Mat Jf = Mat::Identity(2 * n, 2 * n);
  Jf.bottomRightCorner(n, n) *= a;
  Mat Ji = Mat::Identity(2 * n, 2 * n);
  Ji.bottomRightCorner(n, n) /= a;

  MapSystem map{m,
                SmoothMap(m, m, fwd, [Jf](const Vec&) { return Jf; }),
                SmoothMap(m, m, inv, [Ji](const Vec&) { return Ji; }),
                a,
                cotangent_omega(m, n),
                cotangent_lambda(m, n),
                "model-map"};
  return ModelCotangentMap{n, a, c, std::move(map)};
}

ModelCotangentMap make_model_cotangent_map(int n, double a, double c) {
  return make_model_cotangent_map(n, a, Vec(Vec::Constant(n, c)));
}

FlowSystem make_liouville_flow() {
  ManifoldPtr m = ChartedManifold::cotangent_torus(1);
  FlowSystem flow;
  flow.manifold = m;
  flow.name = "liouville-flow";
  flow.omega = cotangent_omega(m, 1);
  flow.lambda_form = cotangent_lambda(m, 1);
  flow.nominal_rate = -1.0;
  flow.vector_field = VectorField{[](const Vec& x) {
                                    Vec f(2);
                                    f(0) = 0.0;
                                    f(1) = -x(1);
                                    return f;
                                  },
                                  [](const Vec&) {
                                    Mat J = Mat::Zero(2, 2);
                                    J(1, 1) = -1.0;
                                    return J;
                                  }};
  flow.closed_flow = [](double t, const Vec& x) {
    Vec y = x;
    y(1) = std::exp(-t) * x(1);
    return y;
  };
  flow.split =
      CotangentSplit{1, [](const Vec&) { return Vec::Zero(1); },
                     [](const Vec&) { return Vec::Zero(1); }, -1.0};
  return flow;
}

namespace {

DifferentialForm torus_area(const ManifoldPtr& m) {
  return DifferentialForm(
      2, m,
      [](const Point&, std::span<const Vec> v) {
        return v[0](0) * v[1](1) - v[0](1) * v[1](0);
      },
      "area");
}

}  // namespace

MapSystem make_cat_map() {
  ManifoldPtr m = ChartedManifold::torus(2);
  Mat A(2, 2), Ai(2, 2);
  A << 2, 1, 1, 1;
  Ai << 1, -1, -1, 2;
  return MapSystem{
      m,
      SmoothMap(m, m, [A](const Vec& x) { return Vec(A * x); },
                [A](const Vec&) { return A; }),
      SmoothMap(m, m, [Ai](const Vec& x) { return Vec(Ai * x); },
                [Ai](const Vec&) { return Ai; }),
      1.0,
      torus_area(m),
      std::nullopt,
      "cat"};
}

MapSystem make_cat_product_map() {
  ManifoldPtr m = ChartedManifold::torus(4);
  Mat A = Mat::Zero(4, 4), Ai = Mat::Zero(4, 4);
  A(0, 0) = 2;
  A(0, 1) = 1;
  A(1, 0) = 1;
  A(1, 1) = 1;
  A(2, 2) = 2;
  A(2, 3) = 1;
  A(3, 2) = 1;
  A(3, 3) = 1;
  Ai(0, 0) = 1;
  Ai(0, 1) = -1;
  Ai(1, 0) = -1;
  Ai(1, 1) = 2;
  Ai(2, 2) = 1;
  Ai(2, 3) = -1;
  Ai(3, 2) = -1;
  Ai(3, 3) = 2;

  const double p = golden_p();
  DifferentialForm omega1(
      2, m,
      [p](const Point&, std::span<const Vec> v) {
        auto a = [p](const Vec& w) { return w(1) - p * w(0); };
        auto b = [p](const Vec& w) { return w(3) - p * w(2); };
        return a(v[0]) * b(v[1]) - a(v[1]) * b(v[0]);
      },
      "omega1");

  return MapSystem{
      m,
      SmoothMap(m, m, [A](const Vec& x) { return Vec(A * x); },
                [A](const Vec&) { return A; }),
      SmoothMap(m, m, [Ai](const Vec& x) { return Vec(Ai * x); },
                [Ai](const Vec&) { return Ai; }),
      lambda_minus() * lambda_minus(),
      omega1,
      std::nullopt,
      "product4"};
}

MapSystem make_rotation_map(double r1, double r2) {
  ManifoldPtr m = ChartedManifold::torus(2);
  return MapSystem{
      m,
      SmoothMap(
          m, m,
          [r1, r2](const Vec& x) {
            Vec y(2);
            y << x(0) + r1, x(1) + r2;
            return y;
          },
          [](const Vec&) { return Mat(Mat::Identity(2, 2)); }),
      SmoothMap(
          m, m,
          [r1, r2](const Vec& x) {
            Vec y(2);
            y << x(0) - r1, x(1) - r2;
            return y;
          },
          [](const Vec&) { return Mat(Mat::Identity(2, 2)); }),
      1.0,
      torus_area(m),
      std::nullopt,
      "rotation"};
}

}  // namespace confsym
