#include "confsym/analysis.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace confsym {

// ---------------------------------------------------------------------------
// ParamSubmanifold

ParamSubmanifold::ParamSubmanifold(ManifoldPtr target, int param_dim,
                                   std::vector<bool> param_periodic,
                                   std::function<Vec(const Vec&)> embedding,
                                   std::function<Mat(const Vec&)> derivative,
                                   int grid_resolution, double fd_step)
    : target_(std::move(target)),
      param_dim_(param_dim),
      param_periodic_(std::move(param_periodic)),
      embedding_(std::move(embedding)),
      derivative_(std::move(derivative)),
      grid_(grid_resolution),
      fd_step_(fd_step) {
  if (static_cast<int>(param_periodic_.size()) != param_dim_)
    throw invalid_input_error("parameter periodicity mask length mismatch");
}

Mat ParamSubmanifold::derivative(const Vec& u) const {
  if (derivative_) return derivative_(u);
  Mat J(target_->dim(), param_dim_);
  Vec up = u, um = u;
  for (int j = 0; j < param_dim_; ++j) {
    up(j) = u(j) + fd_step_;
    um(j) = u(j) - fd_step_;
    J.col(j) = (embedding_(up) - embedding_(um)) / (2.0 * fd_step_);
    up(j) = u(j);
    um(j) = u(j);
  }
  return J;
}

std::vector<Vec> ParamSubmanifold::grid_points() const {
  return grid_points(grid_);
}

std::vector<Vec> ParamSubmanifold::grid_points(int resolution) const {
  std::vector<Vec> pts;
  const int s = param_dim_;
  std::vector<int> idx(static_cast<std::size_t>(s), 0);
  const std::size_t total = [&] {
    std::size_t t = 1;
    for (int i = 0; i < s; ++i) t *= static_cast<std::size_t>(resolution);
    return t;
  }();
  pts.reserve(total);
  for (;;) {
    Vec u(s);
    for (int i = 0; i < s; ++i)
      u(i) = (idx[static_cast<std::size_t>(i)] + 0.5) / resolution;
    pts.push_back(u);
    int d = s - 1;
    while (d >= 0 && ++idx[static_cast<std::size_t>(d)] == resolution) {
      idx[static_cast<std::size_t>(d)] = 0;
      --d;
    }
    if (d < 0) break;
  }
  return pts;
}

ParamSubmanifold graph_submanifold(const ManifoldPtr& cotangent, int n,
                                   std::function<Vec(const Vec&)> g,
                                   int grid_resolution) {
  return ParamSubmanifold(
      cotangent, n, std::vector<bool>(static_cast<std::size_t>(n), true),
      [g, n](const Vec& u) {
        Vec x(2 * n);
        x.head(n) = u;
        x.tail(n) = g(u);
        return x;
      },
      nullptr, grid_resolution);
}

ParamSubmanifold zero_section(const ManifoldPtr& cotangent, int n,
                              int grid_resolution) {
  return ParamSubmanifold(
      cotangent, n, std::vector<bool>(static_cast<std::size_t>(n), true),
      [n](const Vec& u) {
        Vec x = Vec::Zero(2 * n);
        x.head(n) = u;
        return x;
      },
      [n](const Vec&) {
        Mat J = Mat::Zero(2 * n, n);
        J.topRows(n) = Mat::Identity(n, n);
        return J;
      },
      grid_resolution);
}

std::vector<ParamLoop> coordinate_loops(const ParamSubmanifold& j) {
  std::vector<ParamLoop> loops;
  const int s = j.param_dim();
  for (int i = 0; i < s; ++i) {
    if (!j.param_periodic(i))
      throw invalid_input_error(
          "coordinate loops need a periodic parameter direction");
    loops.push_back(ParamLoop{[s, i](double t) {
      Vec u = Vec::Constant(s, 0.5);
      u(i) = t;
      return u;
    }});
  }
  return loops;
}

// ---------------------------------------------------------------------------
// Isotropy

IsotropyReport isotropy_defect(const ParamSubmanifold& N,
                               const DifferentialForm& omega,
                               double rank_rel_tol) {
  const int s = N.param_dim();
  IsotropyReport report;
  report.min_embedding_singular_value =
      std::numeric_limits<double>::infinity();

  for (const Vec& u : N.grid_points()) {
    const Mat J = N.derivative(u);
    Eigen::JacobiSVD<Mat> embed_svd(J);
    const double smin = embed_svd.singularValues().minCoeff();
    report.min_embedding_singular_value =
        std::min(report.min_embedding_singular_value, smin);
    if (smin <= 1e-8) {
      std::ostringstream os;
      os << "embedding derivative rank-deficient at a grid point (sigma_min "
         << smin << ")";
      throw degenerate_embedding_error(os.str());
    }

    Mat W = Mat::Zero(s, s);
    const Point x = N.at(u);
    for (int a = 0; a < s; ++a)
      for (int b = a + 1; b < s; ++b) {
        const double val = omega(x, Vec(J.col(a)), Vec(J.col(b)));
        W(a, b) = val;
        W(b, a) = -val;
        report.max_abs_omega = std::max(report.max_abs_omega, std::abs(val));
      }

    Eigen::JacobiSVD<Mat> svd(W);
    const Vec sv = svd.singularValues();
    int rank = 0;
    if (sv.size() > 0 && sv(0) > 1e-12) {
      const double cutoff = rank_rel_tol * sv(0);
      for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff) ++rank;
    }
    // Singular values of an antisymmetric matrix come in equal pairs; an odd
    // count can only arise from a pair split exactly at the cutoff.
    rank -= rank % 2;
    report.rank_histogram[rank] += 1;
    report.estimated_rank = std::max(report.estimated_rank, rank);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Liouville classes

LiouvilleClass liouville_class(const ParamSubmanifold& j,
                               const DifferentialForm& lambda,
                               const std::vector<ParamLoop>& loops,
                               const QuadratureOptions& quad) {
  Vec periods(static_cast<Eigen::Index>(loops.size()));
  for (std::size_t li = 0; li < loops.size(); ++li) {
    const auto& loop = loops[li];
    auto gamma = [&j, loop](double t) { return j.coords(loop.gamma(t)); };
    // Loop construction enforces quotient closure (topology_error).
    Loop mapped(j.target(), gamma);
    periods(static_cast<Eigen::Index>(li)) =
        line_integral(lambda, mapped, 0.0, 1.0, quad);
  }
  return {periods};
}

Vec fixed_liouville_class(double a, const Vec& eta_periods) {
  if (a == 1.0)
    throw not_applicable_error(
        "no fixed class: ratio 1 acts by translation on classes");
  return Vec(eta_periods / (1.0 - a));
}

// ---------------------------------------------------------------------------
// Exactness transforms

namespace {

double max_two_form_gap(const DifferentialForm& a, const DifferentialForm& b,
                        const ManifoldPtr& m, std::uint64_t seed, int samples) {
  CounterRng rng(seed);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    Vec x = rng.vector_in_box(m->sample_box());
    Vec u = rng.direction(m->dim());
    Vec v = rng.direction(m->dim());
    Point px{m, x};
    worst = std::max(worst, std::abs(a(px, u, v) - b(px, u, v)));
  }
  return worst;
}

}  // namespace

ExactnessTransform exactness_transform(const MapSystem& f,
                                       const std::vector<Loop>& loops,
                                       std::uint64_t seed, int samples) {
  if (!f.nominal_ratio)
    throw invalid_input_error("exactness_transform: unknown conformality ratio");
  if (!f.lambda_form)
    throw invalid_input_error("exactness_transform: system carries no lambda");
  const double a = *f.nominal_ratio;
  if (a == 1.0)
    throw not_applicable_error(
        "exactness_transform undefined at ratio 1 (symplectic case)");

  const DifferentialForm lambda = *f.lambda_form;
  const DifferentialForm f_lambda = pullback(f.forward, lambda);
  DifferentialForm lambda1(
      1, f.manifold,
      [lambda, f_lambda, a](const Point& x, std::span<const Vec> v) {
        return (lambda(x, v) - f_lambda(x, v)) / (1.0 - a);
      },
      "lambda1");

  const DifferentialForm f_lambda1 = pullback(f.forward, lambda1);
  DifferentialForm defect(
      1, f.manifold,
      [f_lambda1, lambda1, a](const Point& x, std::span<const Vec> v) {
        return f_lambda1(x, v) - a * lambda1(x, v);
      },
      "f*lambda1 - a lambda1");

  Vec periods(static_cast<Eigen::Index>(loops.size()));
  for (std::size_t i = 0; i < loops.size(); ++i)
    periods(static_cast<Eigen::Index>(i)) = line_integral(defect, loops[i]);

  const double gap =
      max_two_form_gap(exterior_derivative(lambda1), exterior_derivative(lambda),
                       f.manifold, seed, samples);
  return {std::move(lambda1), std::move(periods), gap};
}

FlowExactnessForm flow_exactness_form(const FlowSystem& X,
                                      const std::vector<Loop>& loops,
                                      std::uint64_t seed, int samples) {
  if (!X.nominal_rate)
    throw invalid_input_error("flow_exactness_form: unknown conformality rate");
  if (!X.lambda_form)
    throw invalid_input_error("flow_exactness_form: system carries no lambda");
  if (!X.vector_field)
    throw invalid_input_error("flow_exactness_form: system has no vector field");
  const double alpha = *X.nominal_rate;
  if (alpha == 0.0)
    throw not_applicable_error(
        "flow_exactness_form undefined at rate 0 (symplectic case)");

  const DifferentialForm omega = X.omega;
  const DifferentialForm lambda = *X.lambda_form;
  auto field = X.vector_field->value;

  DifferentialForm xi(
      1, X.manifold,
      [omega, lambda, field, alpha](const Point& x, std::span<const Vec> v) {
        return omega(x, field(x.coords), v[0]) + alpha * lambda(x, v);
      },
      "xi");
  DifferentialForm lambda1(
      1, X.manifold,
      [omega, field, alpha](const Point& x, std::span<const Vec> v) {
        return -omega(x, field(x.coords), v[0]) / alpha;
      },
      "lambda1");

  Vec periods(static_cast<Eigen::Index>(loops.size()));
  for (std::size_t i = 0; i < loops.size(); ++i)
    periods(static_cast<Eigen::Index>(i)) = line_integral(xi, loops[i]);

  CounterRng rng(seed);
  double dxi = 0.0;
  const DifferentialForm d_xi = exterior_derivative(xi);
  for (int i = 0; i < samples; ++i) {
    Vec x = rng.vector_in_box(X.manifold->sample_box());
    Vec u = rng.direction(X.manifold->dim());
    Vec v = rng.direction(X.manifold->dim());
    dxi = std::max(dxi, std::abs(d_xi(Point{X.manifold, x}, u, v)));
  }
  return {std::move(xi), std::move(lambda1), std::move(periods), dxi};
}

// ---------------------------------------------------------------------------
// Action difference

namespace {

// Fiber value of a graph curve at parameter u (curves over T^1 in T*T^1).
double graph_fiber(const ParamSubmanifold& L, double u) {
  Vec pu(1);
  pu << u;
  return L.coords(pu)(1);
}

void require_graph_over_circle(const ParamSubmanifold& L) {
  if (L.param_dim() != 1 || L.target()->dim() != 2)
    throw invalid_input_error(
        "action_difference handles curves over T^1 in a 2-dimensional chart");
  Vec u0(1), u1(1);
  u0 << 0.25;
  u1 << 0.75;
  if (std::abs(L.coords(u0)(0) - 0.25) > 1e-9 ||
      std::abs(L.coords(u1)(0) - 0.75) > 1e-9)
    throw invalid_input_error(
        "action_difference expects graph parametrization q = u");
}

}  // namespace

std::vector<Point> find_graph_intersections(const ParamSubmanifold& L,
                                            const ParamSubmanifold& Lp,
                                            int grid) {
  require_graph_over_circle(L);
  require_graph_over_circle(Lp);
  auto gap = [&](double u) { return graph_fiber(L, u) - graph_fiber(Lp, u); };

  std::vector<Point> out;
  double prev_u = 0.0;
  double prev_g = gap(prev_u);
  for (int i = 1; i <= grid; ++i) {
    const double u = static_cast<double>(i) / grid;
    const double g = gap(u);
    if (prev_g == 0.0) {
      Vec pu(1);
      pu << prev_u;
      out.push_back(L.at(pu));
    } else if (g * prev_g < 0.0) {
      double lo = prev_u, hi = u, glo = prev_g;
      while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        const double gm = gap(mid);
        if (gm == 0.0) {
          lo = hi = mid;
          break;
        }
        if (gm * glo < 0.0) {
          hi = mid;
        } else {
          lo = mid;
          glo = gm;
        }
      }
      Vec pu(1);
      pu << 0.5 * (lo + hi);
      out.push_back(L.at(pu));
    }
    prev_u = u;
    prev_g = g;
  }
  if (out.empty())
    throw no_intersection_error(
        "no transverse intersection found on the sampled grid");
  return out;
}

double action_difference(const ParamSubmanifold& L, const ParamSubmanifold& Lp,
                         const Point& x, const Point& y,
                         const DifferentialForm& lambda,
                         const QuadratureOptions& quad) {
  require_graph_over_circle(L);
  require_graph_over_circle(Lp);

  // Base-interval parameter representatives fix the path homotopy class.
  auto param_of = [](const Point& pt) {
    double q = pt.coords(0);
    q -= std::floor(q);
    return q;
  };
  const double ux = param_of(x);
  const double uy = param_of(y);

  auto curve_of = [](const ParamSubmanifold& C) {
    return Curve(C.target(), [&C](double t) {
      Vec u(1);
      u << t;
      return C.coords(u);
    });
  };
  Curve cl = curve_of(L);
  Curve clp = curve_of(Lp);

  const double along_L = line_integral(lambda, cl, ux, uy, quad);
  const double along_Lp = line_integral(lambda, clp, uy, ux, quad);
  return along_L + along_Lp;
}

// ---------------------------------------------------------------------------
// Escape probe

EscapeReport orbit_escape_probe(const MapSystem& f, const ParamSubmanifold& L,
                                int kmax) {
  const int dim = f.manifold->dim();
  const int n = dim / 2;
  EscapeReport report;

  std::vector<Vec> pts;
  for (const Vec& u : L.grid_points()) pts.push_back(L.coords(u));

  for (int k = 0; k <= kmax; ++k) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const Vec& x : pts) {
      const double norm = x.tail(n).norm();
      lo = std::min(lo, norm);
      hi = std::max(hi, norm);
    }
    report.rows.push_back({k, lo, hi});
    if (k == kmax) break;
    try {
      for (Vec& x : pts) {
        x = f.forward(x);
        if (x.lpNorm<Eigen::Infinity>() > defaults::divergence_threshold ||
            !x.allFinite())
          throw divergence_error("escape", k + 1);
      }
    } catch (const divergence_error&) {
      report.escaped_at = k + 1;
      break;
    }
  }
  return report;
}

}  // namespace confsym
