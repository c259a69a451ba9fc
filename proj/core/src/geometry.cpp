#include "confsym/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>

namespace confsym {

namespace {

double mod1(double x) {
  double r = x - std::floor(x);
  if (r >= 1.0) r -= 1.0;  // guards x = -1e-17 style roundoff
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// ChartedManifold

ChartedManifold::ChartedManifold(int dim, std::vector<bool> periodic)
    : dim_(dim), periodic_(std::move(periodic)) {
  if (static_cast<int>(periodic_.size()) != dim_)
    throw invalid_input_error("periodic mask length does not match dimension");
  sample_box_.assign(static_cast<std::size_t>(dim_), {0.0, 1.0});
}

ChartedManifold::ChartedManifold(int dim, std::vector<bool> periodic,
                                 GluingRule gluing)
    : ChartedManifold(dim, std::move(periodic)) {
  gluing_ = std::move(gluing);
}

std::shared_ptr<const ChartedManifold> ChartedManifold::torus(int dim) {
  return std::make_shared<ChartedManifold>(dim, std::vector<bool>(dim, true));
}

std::shared_ptr<const ChartedManifold> ChartedManifold::euclidean(int dim) {
  return std::make_shared<ChartedManifold>(dim, std::vector<bool>(dim, false));
}

std::shared_ptr<const ChartedManifold> ChartedManifold::cotangent_torus(int n) {
  std::vector<bool> mask(static_cast<std::size_t>(2 * n), false);
  for (int i = 0; i < n; ++i) mask[static_cast<std::size_t>(i)] = true;
  auto m = std::make_shared<ChartedManifold>(2 * n, std::move(mask));
  std::vector<std::pair<double, double>> box;
  for (int i = 0; i < n; ++i) box.emplace_back(0.0, 1.0);
  for (int i = 0; i < n; ++i) box.emplace_back(-1.0, 1.0);
  m->set_sample_box(std::move(box));
  return m;
}

void ChartedManifold::set_sample_box(
    std::vector<std::pair<double, double>> box) {
  if (static_cast<int>(box.size()) != dim_)
    throw invalid_input_error("sample box length does not match dimension");
  sample_box_ = std::move(box);
}

Vec ChartedManifold::normalize(const Vec& x) const {
  if (x.size() != dim_)
    throw invalid_input_error("point dimension does not match chart");
  if (!x.allFinite())
    throw invalid_input_error("normalize: non-finite coordinates");

  Vec y = x;
  if (gluing_) {
    const int cap = 1000000;
    int steps = 0;
    for (int s = gluing_->side(y); s != 0; s = gluing_->side(y)) {
      y = (s > 0) ? gluing_->forward(y) : gluing_->backward(y);
      if (++steps > cap)
        throw invalid_input_error("normalize: gluing did not terminate");
    }
  }
  for (int i = 0; i < dim_; ++i)
    if (periodic_[static_cast<std::size_t>(i)]) y(i) = mod1(y(i));
  return y;
}

bool ChartedManifold::in_fundamental_domain(const Vec& x) const {
  if (gluing_ && !gluing_->in_domain(x)) return false;
  for (int i = 0; i < dim_; ++i)
    if (periodic_[static_cast<std::size_t>(i)] && (x(i) < 0.0 || x(i) >= 1.0))
      return false;
  return true;
}

double ChartedManifold::quotient_distance(const Vec& a, const Vec& b) const {
  Vec na = normalize(a);
  Vec nb = normalize(b);
  auto coord_dist = [&](const Vec& u, const Vec& v) {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) {
      double d = std::abs(u(i) - v(i));
      if (periodic_[static_cast<std::size_t>(i)]) d = std::min(d, 1.0 - d);
      s += d * d;
    }
    return std::sqrt(s);
  };
  double best = coord_dist(na, nb);
  if (gluing_) {
    // Representatives straddling the gluing seam compare through one
    // application of the rule on either side.
    for (const Vec& gb : {Vec(gluing_->forward(nb)), Vec(gluing_->backward(nb))}) {
      Vec gn = gb;
      for (int i = 0; i < dim_; ++i)
        if (periodic_[static_cast<std::size_t>(i)]) gn(i) = mod1(gn(i));
      best = std::min(best, coord_dist(na, gn));
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// SmoothMap

SmoothMap::SmoothMap(ManifoldPtr domain, ManifoldPtr codomain, Fn fn, Jac jac,
                     double fd_step)
    : domain_(std::move(domain)),
      codomain_(std::move(codomain)),
      fn_(std::move(fn)),
      jac_(std::move(jac)),
      fd_step_(fd_step) {}

SmoothMap SmoothMap::identity(ManifoldPtr m) {
  return SmoothMap(
      m, m, [](const Vec& x) { return x; },
      [](const Vec& x) {
        return Mat(Mat::Identity(x.size(), x.size()));
      });
}

Mat SmoothMap::jacobian(const Vec& x) const {
  if (jac_) return jac_(x);
  const double h = fd_step_;
  Mat J(codomain_->dim(), domain_->dim());
  Vec xp = x, xm = x;
  for (int j = 0; j < domain_->dim(); ++j) {
    xp(j) = x(j) + h;
    xm(j) = x(j) - h;
    J.col(j) = (fn_(xp) - fn_(xm)) / (2.0 * h);
    xp(j) = x(j);
    xm(j) = x(j);
  }
  return J;
}

SmoothMap SmoothMap::compose_after(const SmoothMap& inner) const {
  auto outer_fn = fn_;
  auto inner_fn = inner.fn_;
  SmoothMap::Jac jac = nullptr;
  if (jac_ && inner.jac_) {
    auto ojac = jac_;
    auto ijac = inner.jac_;
    jac = [outer_fn, inner_fn, ojac, ijac](const Vec& x) {
      return Mat(ojac(inner_fn(x)) * ijac(x));
    };
  }
  return SmoothMap(
      inner.domain_, codomain_,
      [outer_fn, inner_fn](const Vec& x) { return outer_fn(inner_fn(x)); },
      jac, fd_step_);
}

// ---------------------------------------------------------------------------
// DifferentialForm

DifferentialForm::DifferentialForm(int degree, ManifoldPtr manifold,
                                   Evaluator eval, std::string name)
    : degree_(degree),
      manifold_(std::move(manifold)),
      eval_(std::move(eval)),
      name_(std::move(name)) {
  if (degree_ < 0) throw invalid_input_error("form degree must be >= 0");
}

double DifferentialForm::operator()(const Point& x,
                                    std::span<const Vec> vectors) const {
  if (!eval_) throw invalid_input_error("evaluating an unset form");
  if (static_cast<int>(vectors.size()) != degree_)
    throw invalid_input_error("form arity mismatch: " + name_);
  if (singular_at(x.coords))
    throw domain_error("form evaluated at declared singular point: " + name_);
  return eval_(x, vectors);
}

double DifferentialForm::operator()(const Point& x, const Vec& v) const {
  return (*this)(x, std::span<const Vec>(&v, 1));
}

double DifferentialForm::operator()(const Point& x, const Vec& u,
                                    const Vec& v) const {
  const Vec uv[2] = {u, v};
  return (*this)(x, std::span<const Vec>(uv, 2));
}

DifferentialForm DifferentialForm::coordinate(ManifoldPtr m, int i) {
  return DifferentialForm(
      1, m,
      [i](const Point&, std::span<const Vec> v) { return v[0](i); },
      "dx" + std::to_string(i));
}

DifferentialForm DifferentialForm::covector(ManifoldPtr m, const Vec& c) {
  return DifferentialForm(
      1, m, [c](const Point&, std::span<const Vec> v) { return c.dot(v[0]); },
      "covector");
}

DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b) {
  if (a.manifold() != b.manifold())
    throw invalid_input_error("wedge: forms live on different charts");
  const int k = a.degree();
  const int l = b.degree();
  const int n = k + l;
  if (n > a.manifold()->dim()) {
    DifferentialForm zero(
        n, a.manifold(),
        [](const Point&, std::span<const Vec>) { return 0.0; },
        "(" + a.name() + ")^(" + b.name() + "):overflow");
    zero.set_zero_warning();
    return zero;
  }

  // Enumerate (k,l)-shuffles as sorted index subsets; the parity of a shuffle
  // with left block S = {i_1 < ... < i_k} is sum(i_j - j).
  struct Shuffle {
    std::vector<int> left, right;
    double sign;
  };
  std::vector<Shuffle> shuffles;
  std::vector<int> pick(static_cast<std::size_t>(k));
  std::iota(pick.begin(), pick.end(), 0);
  for (;;) {
    Shuffle s;
    s.left = pick;
    int inv = 0;
    for (int j = 0; j < k; ++j) inv += pick[static_cast<std::size_t>(j)] - j;
    s.sign = (inv % 2 == 0) ? 1.0 : -1.0;
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    for (int i : pick) used[static_cast<std::size_t>(i)] = true;
    for (int i = 0; i < n; ++i)
      if (!used[static_cast<std::size_t>(i)]) s.right.push_back(i);
    shuffles.push_back(std::move(s));

    // next combination
    int j = k - 1;
    while (j >= 0 && pick[static_cast<std::size_t>(j)] == j + n - k) --j;
    if (j < 0) break;
    ++pick[static_cast<std::size_t>(j)];
    for (int t = j + 1; t < k; ++t)
      pick[static_cast<std::size_t>(t)] = pick[static_cast<std::size_t>(t - 1)] + 1;
  }

  auto eval_a = a;
  auto eval_b = b;
  return DifferentialForm(
      n, a.manifold(),
      [eval_a, eval_b, shuffles, k, l](const Point& x,
                                       std::span<const Vec> v) {
        double total = 0.0;
        std::vector<Vec> va(static_cast<std::size_t>(k));
        std::vector<Vec> vb(static_cast<std::size_t>(l));
        for (const auto& s : shuffles) {
          for (int j = 0; j < k; ++j)
            va[static_cast<std::size_t>(j)] = v[static_cast<std::size_t>(
                s.left[static_cast<std::size_t>(j)])];
          for (int j = 0; j < l; ++j)
            vb[static_cast<std::size_t>(j)] = v[static_cast<std::size_t>(
                s.right[static_cast<std::size_t>(j)])];
          total += s.sign * eval_a(x, va) * eval_b(x, vb);
        }
        return total;
      },
      "(" + a.name() + ")^(" + b.name() + ")");
}

DifferentialForm exterior_derivative(const DifferentialForm& a, double step) {
  const int k = a.degree();
  auto base = a;
  DifferentialForm d(
      k + 1, a.manifold(),
      [base, k, step](const Point& x, std::span<const Vec> v) {
        // d a (v_0..v_k) = sum_i (-1)^i D_{v_i} [ a(.; v_0..hat v_i..v_k) ]
        // with constant argument fields, evaluated by central differences.
        double total = 0.0;
        std::vector<Vec> rest(static_cast<std::size_t>(k));
        for (int i = 0; i <= k; ++i) {
          int t = 0;
          for (int j = 0; j <= k; ++j)
            if (j != i) rest[static_cast<std::size_t>(t++)] = v[static_cast<std::size_t>(j)];
          Point xp{x.chart, x.coords + step * v[static_cast<std::size_t>(i)]};
          Point xm{x.chart, x.coords - step * v[static_cast<std::size_t>(i)]};
          double der = (base(xp, rest) - base(xm, rest)) / (2.0 * step);
          total += (i % 2 == 0 ? 1.0 : -1.0) * der;
        }
        return total;
      },
      "d(" + a.name() + ")");
  // The singular set propagates through evaluation: base() throws inside the
  // difference stencil whenever it touches a declared singular point.
  return d;
}

DifferentialForm pullback(const SmoothMap& f, const DifferentialForm& a) {
  if (f.codomain() != a.manifold())
    throw invalid_input_error("pullback: map codomain differs from form chart");
  const int k = a.degree();
  auto base = a;
  auto map = f;
  return DifferentialForm(
      k, f.domain(),
      [base, map, k](const Point& x, std::span<const Vec> v) {
        Mat J;
        try {
          J = map.jacobian(x.coords);
        } catch (const std::exception& e) {
          std::ostringstream os;
          os << "pullback: Jacobian evaluation failed at (";
          for (int i = 0; i < x.coords.size(); ++i)
            os << (i ? ", " : "") << x.coords(i);
          os << "): " << e.what();
          throw error(os.str());
        }
        Point fx{base.manifold(), map(x.coords)};
        std::vector<Vec> pushed(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j)
          pushed[static_cast<std::size_t>(j)] = J * v[static_cast<std::size_t>(j)];
        return base(fx, pushed);
      },
      "pullback(" + a.name() + ")");
}

// ---------------------------------------------------------------------------
// Curves, loops, patches

Curve::Curve(ManifoldPtr manifold, std::function<Vec(double)> gamma,
             std::function<Vec(double)> velocity, double fd_step)
    : manifold_(std::move(manifold)),
      gamma_(std::move(gamma)),
      velocity_(std::move(velocity)),
      fd_step_(fd_step) {}

Vec Curve::velocity(double t) const {
  if (velocity_) return velocity_(t);
  return (gamma_(t + fd_step_) - gamma_(t - fd_step_)) / (2.0 * fd_step_);
}

Loop::Loop(ManifoldPtr manifold, std::function<Vec(double)> gamma,
           std::function<Vec(double)> velocity, double fd_step)
    : Curve(std::move(manifold), std::move(gamma), std::move(velocity),
            fd_step) {
  double gap = this->manifold()->quotient_distance(coords(0.0), coords(1.0));
  if (!(gap <= closure_tolerance)) {
    std::ostringstream os;
    os << "loop does not close in the quotient (gap " << gap << ")";
    throw topology_error(os.str());
  }
}

Patch::Patch(ManifoldPtr manifold, std::function<Vec(double, double)> sigma,
             std::function<Vec(double, double)> du,
             std::function<Vec(double, double)> dv, double fd_step)
    : manifold_(std::move(manifold)),
      sigma_(std::move(sigma)),
      du_(std::move(du)),
      dv_(std::move(dv)),
      fd_step_(fd_step) {}

Vec Patch::du(double u, double v) const {
  if (du_) return du_(u, v);
  return (sigma_(u + fd_step_, v) - sigma_(u - fd_step_, v)) / (2.0 * fd_step_);
}

Vec Patch::dv(double u, double v) const {
  if (dv_) return dv_(u, v);
  return (sigma_(u, v + fd_step_) - sigma_(u, v - fd_step_)) / (2.0 * fd_step_);
}

// ---------------------------------------------------------------------------
// Quadrature

const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(
    int order) {
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>>
      cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;

  // Newton iteration on Legendre polynomials (roots of P_n on [-1, 1]).
  std::vector<double> x(static_cast<std::size_t>(order));
  std::vector<double> w(static_cast<std::size_t>(order));
  const int m = (order + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (order + 0.5));
    double pp = 0.0;
    for (int it2 = 0; it2 < 100; ++it2) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < order; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = order * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[static_cast<std::size_t>(i)] = -z;
    x[static_cast<std::size_t>(order - 1 - i)] = z;
    double wi = 2.0 / ((1.0 - z * z) * pp * pp);
    w[static_cast<std::size_t>(i)] = wi;
    w[static_cast<std::size_t>(order - 1 - i)] = wi;
  }
  auto [pos, ok] = cache.emplace(order, std::make_pair(std::move(x), std::move(w)));
  return pos->second;
}

namespace {

double line_integral_once(const DifferentialForm& a, const Curve& gamma,
                          double t0, double t1, int panels, int order) {
  const auto& [nodes, weights] = gauss_legendre(order);
  const double len = t1 - t0;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a0 = t0 + len * p / panels;
    const double a1 = t0 + len * (p + 1) / panels;
    const double mid = 0.5 * (a0 + a1);
    const double half = 0.5 * (a1 - a0);
    double panel = 0.0;
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      const double t = mid + half * nodes[q];
      double val;
      try {
        val = a(gamma.at(t), gamma.velocity(t));
      } catch (const domain_error&) {
        throw;
      } catch (const std::exception& e) {
        std::ostringstream os;
        os << "line_integral: integrand failed at parameter t = " << t << ": "
           << e.what();
        throw error(os.str());
      }
      panel += weights[q] * val;
    }
    total += panel * half;
  }
  return total;
}

}  // namespace

double line_integral(const DifferentialForm& a, const Curve& gamma, double t0,
                     double t1, const QuadratureOptions& opts) {
  if (a.degree() != 1)
    throw invalid_input_error("line_integral expects a 1-form");
  int panels = opts.panels;
  double prev = line_integral_once(a, gamma, t0, t1, panels, opts.order);
  if (!opts.adaptive) return prev;
  while (panels * 2 <= opts.max_panels) {
    panels *= 2;
    double next = line_integral_once(a, gamma, t0, t1, panels, opts.order);
    if (std::abs(next - prev) <= opts.refine_tol * (1.0 + std::abs(next)))
      return next;
    prev = next;
  }
  return prev;
}

namespace {

double surface_integral_once(const DifferentialForm& a, const Patch& patch,
                             int panels, int order) {
  const auto& [nodes, weights] = gauss_legendre(order);
  double total = 0.0;
  for (int pu = 0; pu < panels; ++pu) {
    for (int pv = 0; pv < panels; ++pv) {
      const double u0 = static_cast<double>(pu) / panels;
      const double v0 = static_cast<double>(pv) / panels;
      const double h = 0.5 / panels;
      double cell = 0.0;
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (std::size_t j = 0; j < nodes.size(); ++j) {
          const double u = u0 + h * (1.0 + nodes[i]);
          const double v = v0 + h * (1.0 + nodes[j]);
          double val;
          try {
            val = a(patch.at(u, v), patch.du(u, v), patch.dv(u, v));
          } catch (const domain_error&) {
            throw;
          } catch (const std::exception& e) {
            std::ostringstream os;
            os << "surface_integral: integrand failed at (u, v) = (" << u
               << ", " << v << "): " << e.what();
            throw error(os.str());
          }
          cell += weights[i] * weights[j] * val;
        }
      }
      total += cell * h * h;
    }
  }
  return total;
}

}  // namespace

double surface_integral(const DifferentialForm& a, const Patch& patch,
                        const QuadratureOptions& opts) {
  if (a.degree() != 2)
    throw invalid_input_error("surface_integral expects a 2-form");
  // Panel counts are per axis here; scale the caps accordingly.
  int panels = std::max(1, opts.panels / 16);
  const int max_panels = std::max(panels, opts.max_panels / 16);
  double prev = surface_integral_once(a, patch, panels, opts.order);
  if (!opts.adaptive) return prev;
  while (panels * 2 <= max_panels) {
    panels *= 2;
    double next = surface_integral_once(a, patch, panels, opts.order);
    if (std::abs(next - prev) <= opts.refine_tol * (1.0 + std::abs(next)))
      return next;
    prev = next;
  }
  return prev;
}

double fit_slope_last_half(const std::vector<double>& x,
                           const std::vector<double>& y) {
  if (x.size() != y.size() || x.empty())
    throw invalid_input_error("fit_slope_last_half: bad input lengths");
  const std::size_t n = x.size();
  const std::size_t take = (n + 1) / 2;
  const std::size_t from = n - take;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = from; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(take);
  my /= static_cast<double>(take);
  double num = 0.0, den = 0.0;
  for (std::size_t i = from; i < n; ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  if (den == 0.0) return 0.0;
  return num / den;
}

}  // namespace confsym
