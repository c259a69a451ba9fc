#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "confsym/geometry.hpp"
#include "confsym/rng.hpp"

namespace confsym {

// ---------------------------------------------------------------------------
// Systems

/// Discrete-time system: diffeomorphism of a chart with tangent data and the
/// structure forms it transforms conformally.
struct MapSystem {
  ManifoldPtr manifold;
  SmoothMap forward;
  std::optional<SmoothMap> inverse;
  std::optional<double> nominal_ratio;  // a with f* omega = a omega
  DifferentialForm omega;
  std::optional<DifferentialForm> lambda_form;
  std::string name;
};

/// Vector field on a chart, with optional analytic Jacobian for the
/// variational equation.
struct VectorField {
  std::function<Vec(const Vec&)> value;
  std::function<Mat(const Vec&)> jacobian;  // optional; FD fallback
};

/// Splitting data for cotangent systems: the conformal field decomposes into
/// a Hamiltonian part (given by its partial gradients) and an exact fiber
/// scaling p -> e^{rate dt} p.
struct CotangentSplit {
  int base_dim;
  std::function<Vec(const Vec&)> dH_dq;  // gradient in base directions
  std::function<Vec(const Vec&)> dH_dp;  // gradient in fiber directions
  double rate;                           // fiber scaling exponent per unit time
};

/// Continuous-time system: vector field and/or closed-form flow on the cover.
struct FlowSystem {
  ManifoldPtr manifold;
  std::optional<VectorField> vector_field;
  std::optional<std::function<Vec(double, const Vec&)>> closed_flow;
  std::optional<double> nominal_rate;  // alpha with L_X omega = alpha omega
  DifferentialForm omega;
  std::optional<DifferentialForm> lambda_form;
  std::optional<CotangentSplit> split;
  std::string name;
};

/// Orbit segment with optional tangent frames along it.
struct TrajectorySample {
  std::vector<double> times;  // iterate indices for maps
  std::vector<Vec> points;
  std::vector<Mat> frames;  // empty unless tangent data requested
};

// ---------------------------------------------------------------------------
// Integration

enum class IntegrationMethod { rk4, conformal_split };

struct IntegrationOptions {
  double dt = defaults::rk4_dt;
  IntegrationMethod method = IntegrationMethod::rk4;
  double divergence_threshold = defaults::divergence_threshold;
};

/// Advance x0 by time t along the system's vector field. The final partial
/// step is shortened so the endpoint lands exactly at t. Throws
/// divergence_error with the escape time when coordinates blow past the
/// threshold.
Point integrate(const FlowSystem& sys, const Point& x0, double t,
                const IntegrationOptions& opts = {});

/// Orbit sampled every step (including t = 0). With `with_frames`, the
/// variational equation is integrated alongside and the frame (derivative of
/// the time-t_i map) is stored per sample.
TrajectorySample integrate_trajectory(const FlowSystem& sys, const Point& x0,
                                      double t,
                                      const IntegrationOptions& opts = {},
                                      bool with_frames = false);

/// Derivative of the time-t flow at x0: solves the variational equation
/// alongside the base point (or differentiates the closed-form flow when
/// `use_closed_form` and one is available).
Mat tangent_map(const FlowSystem& sys, const Point& x0, double t,
                const IntegrationOptions& opts = {},
                bool use_closed_form = true);

/// Derivative of the n-th iterate: ordered product of step Jacobians along
/// the orbit. Negative n uses the inverse map.
Mat tangent_map(const MapSystem& sys, const Point& x0, int n);

/// n-th iterate of the map (negative n uses the inverse).
Point iterate(const MapSystem& sys, const Point& x0, int n,
              double divergence_threshold = defaults::divergence_threshold);

// ---------------------------------------------------------------------------
// Conformality estimation

struct ConformalityEstimate {
  double estimate;      // median of sampled ratios
  double max_residual;  // max |f* omega - estimate * omega| over samples
  int samples_used;
  int degenerate_skipped;
};

struct ConformalityOptions {
  int samples = 200;
  std::uint64_t seed = defaults::seed;
  double omega_floor = defaults::omega_floor;
  IntegrationOptions integration{};
};

/// Ratio a from samples of omega(f x; Df u, Df v) / omega(x; u, v).
ConformalityEstimate conformality_ratio(const MapSystem& sys, int iterates,
                                        const ConformalityOptions& opts = {});

/// Ratio e^{alpha t} for the time-t flow map.
ConformalityEstimate conformality_ratio(const FlowSystem& sys, double t,
                                        const ConformalityOptions& opts = {});

}  // namespace confsym
