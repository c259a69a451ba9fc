#include "confsym/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace confsym {

namespace {

void check_divergence(const Vec& x, double threshold, double when) {
  if (x.lpNorm<Eigen::Infinity>() > threshold || !x.allFinite()) {
    std::ostringstream os;
    os << "trajectory diverged at t = " << when;
    throw divergence_error(os.str(), when);
  }
}

Vec field_value(const FlowSystem& sys, const Vec& x) {
  return sys.vector_field->value(x);
}

Mat field_jacobian(const FlowSystem& sys, const Vec& x, double h) {
  if (sys.vector_field->jacobian) return sys.vector_field->jacobian(x);
  Mat J(x.size(), x.size());
  Vec xp = x, xm = x;
  for (int j = 0; j < x.size(); ++j) {
    xp(j) = x(j) + h;
    xm(j) = x(j) - h;
    J.col(j) = (field_value(sys, xp) - field_value(sys, xm)) / (2.0 * h);
    xp(j) = x(j);
    xm(j) = x(j);
  }
  return J;
}

Vec rk4_step(const FlowSystem& sys, const Vec& x, double h) {
  const Vec k1 = field_value(sys, x);
  const Vec k2 = field_value(sys, x + 0.5 * h * k1);
  const Vec k3 = field_value(sys, x + 0.5 * h * k2);
  const Vec k4 = field_value(sys, x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Strang-split step: half fiber scaling, implicit-midpoint Hamiltonian step,
// half fiber scaling. The scaling is exact, the midpoint step preserves the
// canonical form, so the conformal factor per step is e^{rate h} exactly.
Vec conformal_split_step(const FlowSystem& sys, const Vec& x, double h) {
  const auto& sp = *sys.split;
  const int n = sp.base_dim;
  auto scale_fiber = [&](Vec y, double factor) {
    y.tail(n) *= factor;
    return y;
  };
  auto ham_field = [&](const Vec& y) {
    Vec f(2 * n);
    f.head(n) = sp.dH_dp(y);
    f.tail(n) = -sp.dH_dq(y);
    return f;
  };
  Vec y = scale_fiber(x, std::exp(0.5 * sp.rate * h));
  Vec z = y + h * ham_field(y);  // predictor
  for (int it = 0; it < 50; ++it) {
    Vec znew = y + h * ham_field(0.5 * (y + z));
    if ((znew - z).lpNorm<Eigen::Infinity>() < 1e-14) {
      z = znew;
      break;
    }
    z = znew;
  }
  return scale_fiber(z, std::exp(0.5 * sp.rate * h));
}

}  // namespace

Point integrate(const FlowSystem& sys, const Point& x0, double t,
                const IntegrationOptions& opts) {
  TrajectorySample traj = integrate_trajectory(sys, x0, t, opts);
  return {sys.manifold, traj.points.back()};
}

TrajectorySample integrate_trajectory(const FlowSystem& sys, const Point& x0,
                                      double t, const IntegrationOptions& opts,
                                      bool with_frames) {
  if (!x0.coords.allFinite())
    throw invalid_input_error("integrate: non-finite initial condition");
  if (opts.dt <= 0.0) throw invalid_input_error("integrate: dt must be > 0");
  if (opts.method == IntegrationMethod::conformal_split && !sys.split)
    throw invalid_input_error(
        "conformal_split requires cotangent splitting data");
  if (!sys.vector_field)
    throw invalid_input_error("integrate: system has no vector field");
  if (with_frames && opts.method != IntegrationMethod::rk4)
    throw invalid_input_error("tangent frames are only carried by rk4");

  const int d = sys.manifold->dim();
  TrajectorySample traj;
  traj.times.push_back(0.0);
  traj.points.push_back(x0.coords);
  if (with_frames) traj.frames.push_back(Mat::Identity(d, d));
  if (t == 0.0) return traj;

  const double dir = (t > 0.0) ? 1.0 : -1.0;
  const double total = std::abs(t);
  double elapsed = 0.0;
  Vec x = x0.coords;
  Mat J = Mat::Identity(d, d);
  auto rhs = [&](const Vec& xa, const Mat& Ja, Vec& dx, Mat& dJ) {
    dx = field_value(sys, xa);
    dJ = field_jacobian(sys, xa, defaults::fd_step) * Ja;
  };
  while (elapsed < total) {
    const double h = dir * std::min(opts.dt, total - elapsed);
    if (with_frames) {
      Vec k1x, k2x, k3x, k4x;
      Mat k1J, k2J, k3J, k4J;
      rhs(x, J, k1x, k1J);
      rhs(x + 0.5 * h * k1x, J + 0.5 * h * k1J, k2x, k2J);
      rhs(x + 0.5 * h * k2x, J + 0.5 * h * k2J, k3x, k3J);
      rhs(x + h * k3x, J + h * k3J, k4x, k4J);
      x += (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
      J += (h / 6.0) * (k1J + 2.0 * k2J + 2.0 * k3J + k4J);
    } else {
      x = (opts.method == IntegrationMethod::rk4)
              ? rk4_step(sys, x, h)
              : conformal_split_step(sys, x, h);
    }
    elapsed += std::abs(h);
    check_divergence(x, opts.divergence_threshold, dir * elapsed);
    traj.times.push_back(dir * elapsed);
    traj.points.push_back(x);
    if (with_frames) traj.frames.push_back(J);
  }
  return traj;
}

Mat tangent_map(const FlowSystem& sys, const Point& x0, double t,
                const IntegrationOptions& opts, bool use_closed_form) {
  const int d = sys.manifold->dim();
  if (t == 0.0) return Mat::Identity(d, d);

  if (use_closed_form && sys.closed_flow) {
    // Differentiate the closed-form time-t map by central differences.
    const auto& flow = *sys.closed_flow;
    const double h = defaults::fd_step;
    Mat J(d, d);
    Vec xp = x0.coords, xm = x0.coords;
    for (int j = 0; j < d; ++j) {
      xp(j) = x0.coords(j) + h;
      xm(j) = x0.coords(j) - h;
      J.col(j) = (flow(t, xp) - flow(t, xm)) / (2.0 * h);
      xp(j) = x0.coords(j);
      xm(j) = x0.coords(j);
    }
    return J;
  }

  if (!sys.vector_field)
    throw invalid_input_error("tangent_map: system has no vector field");

  // Variational equation dJ/dt = DX(x(t)) J integrated with the base point.
  const double dir = (t > 0.0) ? 1.0 : -1.0;
  const double total = std::abs(t);
  double elapsed = 0.0;
  Vec x = x0.coords;
  Mat J = Mat::Identity(d, d);
  auto rhs = [&](const Vec& xa, const Mat& Ja, Vec& dx, Mat& dJ) {
    dx = field_value(sys, xa);
    dJ = field_jacobian(sys, xa, defaults::fd_step) * Ja;
  };
  while (elapsed < total) {
    const double h = dir * std::min(opts.dt, total - elapsed);
    Vec k1x, k2x, k3x, k4x;
    Mat k1J, k2J, k3J, k4J;
    rhs(x, J, k1x, k1J);
    rhs(x + 0.5 * h * k1x, J + 0.5 * h * k1J, k2x, k2J);
    rhs(x + 0.5 * h * k2x, J + 0.5 * h * k2J, k3x, k3J);
    rhs(x + h * k3x, J + h * k3J, k4x, k4J);
    x += (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    J += (h / 6.0) * (k1J + 2.0 * k2J + 2.0 * k3J + k4J);
    elapsed += std::abs(h);
    check_divergence(x, opts.divergence_threshold, dir * elapsed);
  }
  return J;
}

Point iterate(const MapSystem& sys, const Point& x0, int n,
              double divergence_threshold) {
  if (!x0.coords.allFinite())
    throw invalid_input_error("iterate: non-finite initial condition");
  if (n < 0 && !sys.inverse)
    throw invalid_input_error("iterate: inverse map not available");
  // Orbits live on the quotient: reducing each step keeps cover coordinates
  // bounded under toral winding while genuine fiber escape still trips the
  // divergence check (fiber coordinates are not periodic).
  Vec x = x0.coords;
  for (int k = 0; k < std::abs(n); ++k) {
    x = (n > 0) ? sys.forward(x) : (*sys.inverse)(x);
    check_divergence(x, divergence_threshold, static_cast<double>(k + 1));
    x = sys.manifold->normalize(x);
  }
  return {sys.manifold, x};
}

Mat tangent_map(const MapSystem& sys, const Point& x0, int n) {
  const int d = sys.manifold->dim();
  Mat J = Mat::Identity(d, d);
  if (n == 0) return J;
  if (n < 0 && !sys.inverse)
    throw invalid_input_error("tangent_map: inverse map not available");
  Vec x = x0.coords;
  for (int k = 0; k < std::abs(n); ++k) {
    const SmoothMap& step = (n > 0) ? sys.forward : *sys.inverse;
    J = step.jacobian(x) * J;
    x = step(x);
    check_divergence(x, defaults::divergence_threshold,
                     static_cast<double>(k + 1));
    x = sys.manifold->normalize(x);
  }
  return J;
}

namespace {

ConformalityEstimate estimate_from_samples(
    const DifferentialForm& omega, const ManifoldPtr& manifold,
    const std::function<Vec(const Vec&)>& map_fn,
    const std::function<Mat(const Vec&)>& jac_fn,
    const ConformalityOptions& opts) {
  CounterRng rng(opts.seed);
  std::vector<double> ratios;
  std::vector<std::tuple<Vec, Vec, Vec, double, double>> samples;
  int degenerate = 0;
  const int max_draws = opts.samples * 100;
  int draws = 0;
  while (static_cast<int>(ratios.size()) < opts.samples && draws < max_draws) {
    ++draws;
    Vec x = rng.vector_in_box(manifold->sample_box());
    Vec u = rng.direction(manifold->dim());
    Vec v = rng.direction(manifold->dim());
    Point px{manifold, x};
    double denom = omega(px, u, v);
    if (std::abs(denom) <= opts.omega_floor) {
      ++degenerate;
      continue;
    }
    Mat J = jac_fn(x);
    Point fx{manifold, map_fn(x)};
    double numer = omega(fx, Vec(J * u), Vec(J * v));
    ratios.push_back(numer / denom);
    samples.emplace_back(x, u, v, numer, denom);
  }
  if (ratios.empty())
    throw degenerate_sampling_error(
        "conformality_ratio: all sampled denominators degenerate");

  std::vector<double> sorted = ratios;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double median = (n % 2 == 1)
                            ? sorted[n / 2]
                            : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

  double max_residual = 0.0;
  for (const auto& [x, u, v, numer, denom] : samples)
    max_residual = std::max(max_residual, std::abs(numer - median * denom));
  return {median, max_residual, static_cast<int>(n), degenerate};
}

}  // namespace

ConformalityEstimate conformality_ratio(const MapSystem& sys, int iterates_n,
                                        const ConformalityOptions& opts) {
  auto map_fn = [&sys, iterates_n](const Vec& x) {
    return iterate(sys, Point{sys.manifold, x}, iterates_n).coords;
  };
  auto jac_fn = [&sys, iterates_n](const Vec& x) {
    return tangent_map(sys, Point{sys.manifold, x}, iterates_n);
  };
  return estimate_from_samples(sys.omega, sys.manifold, map_fn, jac_fn, opts);
}

ConformalityEstimate conformality_ratio(const FlowSystem& sys, double t,
                                        const ConformalityOptions& opts) {
  auto map_fn = [&sys, t, &opts](const Vec& x) {
    if (sys.closed_flow) return (*sys.closed_flow)(t, x);
    return integrate(sys, Point{sys.manifold, x}, t, opts.integration).coords;
  };
  auto jac_fn = [&sys, t, &opts](const Vec& x) {
    return tangent_map(sys, Point{sys.manifold, x}, t, opts.integration);
  };
  return estimate_from_samples(sys.omega, sys.manifold, map_fn, jac_fn, opts);
}

}  // namespace confsym
