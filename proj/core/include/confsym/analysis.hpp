#pragma once

#include <map>
#include <optional>
#include <vector>

#include "confsym/dynamics.hpp"
#include "confsym/geometry.hpp"

namespace confsym {

// ---------------------------------------------------------------------------
// Parametrized submanifolds

/// Embedding of a cube/torus parameter domain into a chart, with a derivative
/// evaluator (analytic or central differences) and a default grid resolution.
class ParamSubmanifold {
 public:
  ParamSubmanifold(ManifoldPtr target, int param_dim,
                   std::vector<bool> param_periodic,
                   std::function<Vec(const Vec&)> embedding,
                   std::function<Mat(const Vec&)> derivative = nullptr,
                   int grid_resolution = 16,
                   double fd_step = defaults::fd_step);

  const ManifoldPtr& target() const { return target_; }
  int param_dim() const { return param_dim_; }
  bool param_periodic(int i) const {
    return param_periodic_[static_cast<std::size_t>(i)];
  }
  int grid_resolution() const { return grid_; }

  Point at(const Vec& u) const { return {target_, embedding_(u)}; }
  Vec coords(const Vec& u) const { return embedding_(u); }
  /// dim x param_dim matrix of partial derivatives.
  Mat derivative(const Vec& u) const;

  /// Cell-center grid over [0,1]^s in deterministic lexicographic order.
  std::vector<Vec> grid_points() const;
  std::vector<Vec> grid_points(int resolution) const;

 private:
  ManifoldPtr target_;
  int param_dim_;
  std::vector<bool> param_periodic_;
  std::function<Vec(const Vec&)> embedding_;
  std::function<Mat(const Vec&)> derivative_;
  int grid_;
  double fd_step_;
};

/// Graph of p = g(q) over the base torus inside T*T^n.
ParamSubmanifold graph_submanifold(const ManifoldPtr& cotangent, int n,
                                   std::function<Vec(const Vec&)> g,
                                   int grid_resolution = 64);

/// The zero section of T*T^n.
ParamSubmanifold zero_section(const ManifoldPtr& cotangent, int n,
                              int grid_resolution = 64);

/// Loop in the parameter domain of a submanifold.
struct ParamLoop {
  std::function<Vec(double)> gamma;  // [0,1] -> parameter domain
};

/// The i-th coordinate loop through the domain midpoint (torus parameters).
std::vector<ParamLoop> coordinate_loops(const ParamSubmanifold& j);

// ---------------------------------------------------------------------------
// Isotropy

struct IsotropyReport {
  double max_abs_omega = 0.0;
  int estimated_rank = 0;                // max numerical rank over the grid
  std::map<int, int> rank_histogram;     // rank -> number of grid points
  double min_embedding_singular_value = 0.0;
};

/// Assembles the s x s matrix omega(d_i j, d_j j) at every grid point;
/// reports the largest entry magnitude and the numerical rank profile.
/// Throws degenerate_embedding_error when the embedding loses rank.
IsotropyReport isotropy_defect(const ParamSubmanifold& N,
                               const DifferentialForm& omega,
                               double rank_rel_tol = defaults::rank_rel_tol);

// ---------------------------------------------------------------------------
// Liouville classes

struct LiouvilleClass {
  Vec periods;  // indexed by the generating loops
};

/// Periods of the induced 1-form j^* lambda over the given parameter loops.
/// Throws topology_error when a mapped loop fails to close in the quotient.
LiouvilleClass liouville_class(const ParamSubmanifold& j,
                               const DifferentialForm& lambda,
                               const std::vector<ParamLoop>& loops,
                               const QuadratureOptions& quad = {});

/// Unique fixed point of c -> a c + eta_periods; requires a != 1
/// (not_applicable_error otherwise).
Vec fixed_liouville_class(double a, const Vec& eta_periods);

// ---------------------------------------------------------------------------
// Exactness transforms

struct ExactnessTransform {
  DifferentialForm lambda1;  // (lambda - f^* lambda) / (1 - a)
  Vec residual_periods;      // periods of f^* lambda1 - a lambda1
  double d_lambda_residual;  // max |d lambda1 - d lambda| over samples
};

/// Appendix-style primitive correction for a conformal map with a != 1.
ExactnessTransform exactness_transform(const MapSystem& f,
                                       const std::vector<Loop>& loops,
                                       std::uint64_t seed = defaults::seed,
                                       int samples = 50);

struct FlowExactnessForm {
  DifferentialForm xi;       // i_X omega + alpha lambda
  DifferentialForm lambda1;  // lambda - xi / alpha = -(i_X omega) / alpha
  Vec xi_periods;
  double d_xi_residual;  // max |d xi| over samples
};

/// Closed 1-form attached to a conformal vector field with rate alpha != 0.
FlowExactnessForm flow_exactness_form(const FlowSystem& X,
                                      const std::vector<Loop>& loops,
                                      std::uint64_t seed = defaults::seed,
                                      int samples = 50);

// ---------------------------------------------------------------------------
// Action difference of graph curves in T*T^1

/// Transverse intersection points of two graphs over T^1, located by sampled
/// sign changes of the fiber gap and refined by bisection to 1e-12.
/// Throws no_intersection_error when the sampled gap never changes sign.
std::vector<Point> find_graph_intersections(const ParamSubmanifold& L,
                                            const ParamSubmanifold& Lp,
                                            int grid = 512);

/// Action difference between intersection points x and y: the integral of
/// lambda along L from x to y and back along Lp, with base-interval parameter
/// representatives fixing the homotopy class.
double action_difference(const ParamSubmanifold& L, const ParamSubmanifold& Lp,
                         const Point& x, const Point& y,
                         const DifferentialForm& lambda,
                         const QuadratureOptions& quad = {});

// ---------------------------------------------------------------------------
// Orbit escape probe

struct EscapeRow {
  int k;
  double min_p_norm;
  double max_p_norm;
};

struct EscapeReport {
  std::vector<EscapeRow> rows;
  std::optional<int> escaped_at;  // iterate of a recorded divergence event
};

/// Fiber-norm extrema of the image grid of L under f^k, k = 0..kmax.
/// A divergence is recorded as an escape event rather than thrown.
EscapeReport orbit_escape_probe(const MapSystem& f, const ParamSubmanifold& L,
                                int kmax);

}  // namespace confsym
