#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "confsym/defaults.hpp"
#include "confsym/errors.hpp"

namespace confsym {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// Charts and points

/// Identification glued onto a cover chart, e.g. the suspension relation
/// (xi, z) ~ (A xi, z - 1). `forward` lowers the distinguished coordinate,
/// `backward` raises it, `in_domain` recognises the fundamental domain
/// (checked before periodic reduction). `side` reports which rule brings a
/// point closer: +1 apply forward, -1 apply backward, 0 already inside; it
/// must agree with `in_domain`.
struct GluingRule {
  std::function<Vec(const Vec&)> forward;
  std::function<Vec(const Vec&)> backward;
  std::function<bool(const Vec&)> in_domain;
  std::function<int(const Vec&)> side;
};

/// A single cover chart R^dim with optional per-coordinate mod-1 periodicity
/// and an optional quotient gluing. Also carries the sampling box used by
/// randomized estimators (defaults to [0,1) per coordinate).
class ChartedManifold {
 public:
  ChartedManifold(int dim, std::vector<bool> periodic);
  ChartedManifold(int dim, std::vector<bool> periodic, GluingRule gluing);

  static std::shared_ptr<const ChartedManifold> torus(int dim);
  static std::shared_ptr<const ChartedManifold> euclidean(int dim);
  /// T*T^n chart: first n coordinates periodic (base), last n fiber.
  static std::shared_ptr<const ChartedManifold> cotangent_torus(int n);

  int dim() const { return dim_; }
  bool periodic(int i) const { return periodic_[static_cast<std::size_t>(i)]; }
  bool has_gluing() const { return gluing_.has_value(); }
  const GluingRule& gluing() const { return *gluing_; }

  /// Reduce cover coordinates to the fundamental domain; idempotent.
  /// Throws invalid_input_error on non-finite coordinates.
  Vec normalize(const Vec& x) const;
  bool in_fundamental_domain(const Vec& x) const;

  /// Distance between quotient classes, with circular metric on periodic
  /// coordinates. Used for loop-closure and convergence checks.
  double quotient_distance(const Vec& a, const Vec& b) const;

  const std::vector<std::pair<double, double>>& sample_box() const {
    return sample_box_;
  }
  void set_sample_box(std::vector<std::pair<double, double>> box);

 private:
  int dim_;
  std::vector<bool> periodic_;
  std::optional<GluingRule> gluing_;
  std::vector<std::pair<double, double>> sample_box_;
};

using ManifoldPtr = std::shared_ptr<const ChartedManifold>;

/// A point of a charted manifold, stored as cover coordinates. Normalization
/// is lazy: evaluators work on the cover and callers normalize when they need
/// fundamental-domain representatives.
struct Point {
  ManifoldPtr chart;
  Vec coords;

  Point() = default;
  Point(ManifoldPtr c, Vec x) : chart(std::move(c)), coords(std::move(x)) {}

  Point normalized() const { return {chart, chart->normalize(coords)}; }
};

// ---------------------------------------------------------------------------
// Smooth maps

/// Map between charts given on cover coordinates, with analytic Jacobian when
/// available and central differences otherwise.
class SmoothMap {
 public:
  using Fn = std::function<Vec(const Vec&)>;
  using Jac = std::function<Mat(const Vec&)>;

  SmoothMap(ManifoldPtr domain, ManifoldPtr codomain, Fn fn, Jac jac = nullptr,
            double fd_step = defaults::fd_step);

  static SmoothMap identity(ManifoldPtr m);

  const ManifoldPtr& domain() const { return domain_; }
  const ManifoldPtr& codomain() const { return codomain_; }

  Vec operator()(const Vec& x) const { return fn_(x); }
  Point operator()(const Point& x) const { return {codomain_, fn_(x.coords)}; }

  Mat jacobian(const Vec& x) const;
  bool has_analytic_jacobian() const { return static_cast<bool>(jac_); }

  SmoothMap compose_after(const SmoothMap& inner) const;

 private:
  ManifoldPtr domain_;
  ManifoldPtr codomain_;
  Fn fn_;
  Jac jac_;
  double fd_step_;
};

// ---------------------------------------------------------------------------
// Differential forms

/// Degree-k alternating form given by an evaluator on (point, k tangent
/// vectors). Wedge products, numerical exterior derivatives and pullbacks all
/// produce new evaluators, so forms compose freely.
class DifferentialForm {
 public:
  using Evaluator = std::function<double(const Point&, std::span<const Vec>)>;

  /// Unset form; evaluating it throws. Lets systems be built field by field.
  DifferentialForm() = default;
  DifferentialForm(int degree, ManifoldPtr manifold, Evaluator eval,
                   std::string name = "");

  bool valid() const { return static_cast<bool>(eval_); }
  int degree() const { return degree_; }
  const ManifoldPtr& manifold() const { return manifold_; }
  const std::string& name() const { return name_; }

  /// Set when a degenerate construction (wedge past the dimension) produced
  /// an identically zero form.
  bool zero_warning() const { return zero_warning_; }
  void set_zero_warning() { zero_warning_ = true; }

  /// Points where the coefficient evaluator must not be sampled.
  void declare_singular(std::function<bool(const Vec&)> pred) {
    singular_ = std::move(pred);
  }
  bool singular_at(const Vec& x) const { return singular_ && singular_(x); }

  double operator()(const Point& x, std::span<const Vec> vectors) const;
  double operator()(const Point& x, const Vec& v) const;
  double operator()(const Point& x, const Vec& u, const Vec& v) const;

  /// Coordinate 1-form dx_i.
  static DifferentialForm coordinate(ManifoldPtr m, int i);
  /// 1-form with constant coefficients c . dx.
  static DifferentialForm covector(ManifoldPtr m, const Vec& c);

 private:
  int degree_ = -1;
  ManifoldPtr manifold_;
  Evaluator eval_;
  std::string name_;
  bool zero_warning_ = false;
  std::function<bool(const Vec&)> singular_;
};

/// Alternating product; degrees add. Wedging past the chart dimension returns
/// the zero form with its warning flag set.
DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b);

/// Numerical exterior derivative via central differences of the coefficient
/// evaluator along constant vector fields. Throws domain_error at declared
/// singular points.
DifferentialForm exterior_derivative(const DifferentialForm& a,
                                     double step = defaults::fd_step);

/// (f^* a)(x; v...) = a(f(x); Df(x) v...).
DifferentialForm pullback(const SmoothMap& f, const DifferentialForm& a);

// ---------------------------------------------------------------------------
// Curves, loops, patches, integrals

/// Parameterized curve [0,1] -> M on cover coordinates. `velocity` defaults
/// to a central difference of `gamma`.
class Curve {
 public:
  Curve(ManifoldPtr manifold, std::function<Vec(double)> gamma,
        std::function<Vec(double)> velocity = nullptr,
        double fd_step = defaults::fd_step);

  const ManifoldPtr& manifold() const { return manifold_; }
  Point at(double t) const { return {manifold_, gamma_(t)}; }
  Vec coords(double t) const { return gamma_(t); }
  Vec velocity(double t) const;

 private:
  ManifoldPtr manifold_;
  std::function<Vec(double)> gamma_;
  std::function<Vec(double)> velocity_;
  double fd_step_;
};

/// A curve whose endpoints agree in the quotient to 1e-10. Construction
/// enforces the closure invariant (topology_error otherwise).
class Loop : public Curve {
 public:
  static constexpr double closure_tolerance = 1e-10;
  Loop(ManifoldPtr manifold, std::function<Vec(double)> gamma,
       std::function<Vec(double)> velocity = nullptr,
       double fd_step = defaults::fd_step);
};

/// Parameterized patch [0,1]^2 -> M with partial-derivative evaluators.
class Patch {
 public:
  Patch(ManifoldPtr manifold, std::function<Vec(double, double)> sigma,
        std::function<Vec(double, double)> du = nullptr,
        std::function<Vec(double, double)> dv = nullptr,
        double fd_step = defaults::fd_step);

  const ManifoldPtr& manifold() const { return manifold_; }
  Point at(double u, double v) const { return {manifold_, sigma_(u, v)}; }
  Vec du(double u, double v) const;
  Vec dv(double u, double v) const;

 private:
  ManifoldPtr manifold_;
  std::function<Vec(double, double)> sigma_;
  std::function<Vec(double, double)> du_;
  std::function<Vec(double, double)> dv_;
  double fd_step_;
};

struct QuadratureOptions {
  int order = defaults::quad_order;
  int panels = defaults::quad_panels;
  int max_panels = defaults::quad_max_panels;
  double refine_tol = defaults::quad_refine_tol;
  bool adaptive = true;  // double panels until two refinements agree
};

/// Gauss-Legendre nodes/weights on [-1, 1] (cached per order).
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(
    int order);

/// Composite Gauss-Legendre integral of a 1-form along a curve; the segment
/// [t0, t1] may be traversed in either direction (signed result).
double line_integral(const DifferentialForm& a, const Curve& gamma,
                     double t0 = 0.0, double t1 = 1.0,
                     const QuadratureOptions& opts = {});

/// Tensor-product quadrature of a 2-form over a patch.
double surface_integral(const DifferentialForm& a, const Patch& patch,
                        const QuadratureOptions& opts = {});

// ---------------------------------------------------------------------------
// Shared small utilities

/// Least-squares slope of y against x over the last ceil(n/2) samples.
double fit_slope_last_half(const std::vector<double>& x,
                           const std::vector<double>& y);

}  // namespace confsym
