#pragma once

#include <functional>
#include <vector>

#include "confsym/dynamics.hpp"
#include "confsym/geometry.hpp"

namespace confsym {

// Shared constants of the hyperbolic torus automorphism (x, y) -> (2x+y, x+y).
double lambda_minus();  // (3 - sqrt 5) / 2
double lambda_plus();   // (3 + sqrt 5) / 2
double golden_p();      // (sqrt 5 - 1) / 2, unstable slope

// ---------------------------------------------------------------------------
// Suspension attractor example (4-dimensional flow)

/// Suspension of the torus automorphism with an extra contracting factor:
/// chart (x, y, z, s), quotient (xi, z) ~ (A xi, z - 1), forms
/// beta_pm = lambda_pm^z alpha_pm, big_lambda = beta_- + s beta_+,
/// omega = d(big_lambda), and the flow psi_t(xi, z, s) =
/// (xi, z + t, lambda_-^{2t} s) on the cover.
struct SuspensionExample {
  ManifoldPtr manifold;
  double lam_minus;
  double lam_plus;
  Eigen::Matrix2d torus_matrix;
  DifferentialForm alpha_plus;
  DifferentialForm alpha_minus;
  DifferentialForm beta_plus;
  DifferentialForm beta_minus;
  DifferentialForm big_lambda;
  DifferentialForm omega;
  SmoothMap gluing_map;  // (xi, z, s) -> (A xi, z - 1, s)
  FlowSystem flow;       // rate ln(lambda_-); lambda_form = -big_lambda
};

SuspensionExample make_suspension_example();

// ---------------------------------------------------------------------------
// 6-dimensional conformal map example

/// Chart (theta_1..theta_4, rho_1, rho_2) of the bundle over T^4 cut out by
/// r_2 = p r_1, r_4 = p r_3; rho parametrizes (r_1, r_3). The map acts by the
/// torus automorphism on theta pairs and by lambda_-^3 on rho, and scales
/// omega = omega1 + omega2 by lambda_-^2.
struct Torus6Example {
  ManifoldPtr manifold;
  double p;
  double lam_minus;
  double ratio;  // lambda_-^2
  DifferentialForm omega1;
  DifferentialForm omega2;
  DifferentialForm omega;
  MapSystem map;
};

Torus6Example make_torus6_example();

// ---------------------------------------------------------------------------
// Dissipative lift of a base vector field to the cotangent bundle

/// Hamiltonian H(q, p) = |p + X(q)|^2/2 - |X(q)|^2/2 on T*T^n (flat metric)
/// plus alpha times the fiber-contracting Liouville field. The zero section
/// is invariant and carries exactly the base dynamics X.
struct ManeLift {
  int base_dim;
  double alpha;  // damping coefficient; conformality rate is -alpha
  ManifoldPtr manifold;
  std::function<Vec(const Vec&)> base_field;
  std::function<double(const Vec&)> hamiltonian;  // H(q, p)
  FlowSystem flow;
};

ManeLift make_mane_lift(int base_dim, std::function<Vec(const Vec&)> X,
                        double alpha,
                        std::function<Mat(const Vec&)> X_jacobian = nullptr);

// ---------------------------------------------------------------------------
// Annulus flow with a non-graph invariant curve

struct LeCalvezParams {
  double beta = 1.0;
  double alpha = 1.5;  // in (beta, 2 beta)
  double A = 2.0;
  double B = 3.0;
  double C = 4.0;
  double D = 5.0;
};

/// Tonelli Hamiltonian K on the annulus (x glued at +-D, y real) blending a
/// circle vector field with a bumped quadratic model, driven by the conformal
/// field (dK/dy, -dK/dx - alpha y).
struct LeCalvezExample {
  LeCalvezParams params;
  ManifoldPtr annulus;
  std::function<double(double)> potential;        // V
  std::function<double(double)> potential_deriv;  // V'
  std::function<double(double)> cutoff;           // eta
  std::function<double(double)> cutoff_deriv;     // eta'
  std::function<double(double)> circle_field;     // X on the circle
  std::function<double(double, double)> K;
  std::function<double(double, double)> dK_dx;
  std::function<double(double, double)> dK_dy;
  std::function<double(double)> d2K_dy2;  // fiber Hessian, 1 + eta(x)
  FlowSystem flow;         // on the annulus chart
  FlowSystem linear_flow;  // unbumped linear model on R^2, closed form
  FlowSystem bumped_flow;  // linear model plus potential on R^2
};

/// Throws invalid_parameter_error naming the violated inequality.
LeCalvezExample make_lecalvez_example(const LeCalvezParams& params = {});

/// Union of polyline pieces in the (x, y) chart.
struct PlanarPolyline {
  std::vector<std::vector<Eigen::Vector2d>> pieces;
  double distance(const Eigen::Vector2d& q) const;
  std::size_t point_count() const;
};

/// The invariant curve: both axis pieces, the two orbits continued from
/// (+-B, 0), and the origin.
PlanarPolyline invariant_curve(const LeCalvezExample& sys, double dt = 1e-4,
                               double t_max = 60.0);

/// Largest vertical spread of the curve over an x-bin (the failure of the
/// vertical-line test).
double non_graph_gap(const PlanarPolyline& curve, int bins = 400);

// ---------------------------------------------------------------------------
// Model cotangent map and Liouville flow

/// (q, p) -> (q, a p + c) on T*T^n, with exact inverse. The drift covector c
/// realizes a nonzero translation part on fiber classes.
struct ModelCotangentMap {
  int base_dim;
  double ratio;
  Vec drift;
  MapSystem map;
};

ModelCotangentMap make_model_cotangent_map(int n, double a, const Vec& c);
ModelCotangentMap make_model_cotangent_map(int n, double a, double c);

/// Fiber contraction flow (q, p) -> (q, e^{-t} p) on T*T^1; rate -1.
FlowSystem make_liouville_flow();

// ---------------------------------------------------------------------------
// Auxiliary toral maps used by the growth estimators

MapSystem make_cat_map();                        // (2x+y, x+y) on T^2
MapSystem make_cat_product_map();                // (T, T) on T^4
MapSystem make_rotation_map(double r1, double r2);  // rigid rotation of T^2

/// Standard structures on T*T^n: omega(u, v) = sum u_q v_p - u_p v_q and
/// lambda = p . dq.
DifferentialForm cotangent_omega(const ManifoldPtr& m, int n);
DifferentialForm cotangent_lambda(const ManifoldPtr& m, int n);

}  // namespace confsym
