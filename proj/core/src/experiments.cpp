#include "confsym/experiments.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

#include "confsym/analysis.hpp"
#include "confsym/entropy.hpp"

namespace confsym {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// max over samples of |(pullback omega) - factor * omega| on random
/// (point, u, v).
double max_conformal_residual(const DifferentialForm& omega,
                              const ManifoldPtr& m,
                              const std::function<Vec(const Vec&)>& map_fn,
                              const std::function<Mat(const Vec&)>& jac_fn,
                              double factor, int samples, std::uint64_t seed) {
  CounterRng rng(seed);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    Vec x = rng.vector_in_box(m->sample_box());
    Vec u = rng.direction(m->dim());
    Vec v = rng.direction(m->dim());
    const Mat J = jac_fn(x);
    const double lhs =
        omega(Point{m, map_fn(x)}, Vec(J * u), Vec(J * v));
    const double rhs = factor * omega(Point{m, x}, u, v);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

double max_one_form_gap(const DifferentialForm& a, const DifferentialForm& b,
                        const ManifoldPtr& m, int samples, std::uint64_t seed,
                        bool relative = false) {
  CounterRng rng(seed);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    Vec x = rng.vector_in_box(m->sample_box());
    Vec v = rng.direction(m->dim());
    Point px{m, x};
    const double va = a(px, v);
    const double vb = b(px, v);
    double gap = std::abs(va - vb);
    if (relative) gap /= std::max(std::abs(va) + std::abs(vb), 1e-8);
    worst = std::max(worst, gap);
  }
  return worst;
}

double max_two_form_gap(const DifferentialForm& a, const DifferentialForm& b,
                        const ManifoldPtr& m, int samples, std::uint64_t seed,
                        bool relative = false) {
  CounterRng rng(seed);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    Vec x = rng.vector_in_box(m->sample_box());
    Vec u = rng.direction(m->dim());
    Vec v = rng.direction(m->dim());
    Point px{m, x};
    const double va = a(px, u, v);
    const double vb = b(px, u, v);
    double gap = std::abs(va - vb);
    if (relative) gap /= std::max(std::abs(va) + std::abs(vb), 1e-8);
    worst = std::max(worst, gap);
  }
  return worst;
}

/// Coordinate loops of the base torus on a fiber graph p = g(q) in T*T^n.
std::vector<Loop> base_loops(const ManifoldPtr& m, int n,
                             std::function<Vec(const Vec&)> g) {
  std::vector<Loop> loops;
  for (int i = 0; i < n; ++i) {
    loops.emplace_back(m, [m, n, g, i](double t) {
      Vec q = Vec::Constant(n, 0.5);
      q(i) = t;
      Vec x(2 * n);
      x.head(n) = q;
      x.tail(n) = g(q);
      return x;
    });
  }
  return loops;
}

ordered_json params_json(const LeCalvezParams& p) {
  ordered_json j;
  j["beta"] = p.beta;
  j["alpha"] = p.alpha;
  j["A"] = p.A;
  j["B"] = p.B;
  j["C"] = p.C;
  j["D"] = p.D;
  return j;
}

ordered_json sequence_from_report(const GrowthReport& g) {
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < g.steps.size(); ++i)
    rows.push_back({g.steps[i], g.log_values[i]});
  return rows;
}

}  // namespace

ordered_json defaults_table() {
  ordered_json j;
  j["fd_step"] = defaults::fd_step;
  j["fd_step2"] = defaults::fd_step2;
  j["quad_order"] = defaults::quad_order;
  j["quad_panels"] = defaults::quad_panels;
  j["quad_max_panels"] = defaults::quad_max_panels;
  j["quad_refine_tol"] = defaults::quad_refine_tol;
  j["rk4_dt"] = defaults::rk4_dt;
  j["divergence_threshold"] = defaults::divergence_threshold;
  j["omega_floor"] = defaults::omega_floor;
  j["rank_rel_tol"] = defaults::rank_rel_tol;
  return j;
}

// ---------------------------------------------------------------------------
// conformality

Report run_conformality(const ConformalityConfig& cfg) {
  const auto t0 = Clock::now();
  Report report;
  report.experiment = "conformality";
  report.system = cfg.system;
  report.seed = cfg.seed;
  report.config["system"] = cfg.system;
  report.config["samples"] = cfg.samples;
  report.config["seed"] = cfg.seed;
  report.config["flow_time"] = cfg.flow_time;
  report.config["defaults"] = defaults_table();

  ConformalityOptions copts;
  copts.samples = cfg.samples;
  copts.seed = cfg.seed;

  if (cfg.system == "torus6") {
    auto ex = make_torus6_example();
    const double expected = ex.ratio;
    auto est = conformality_ratio(ex.map, 1, copts);
    report.add(CheckResult::equality("ratio_vs_lambda_minus_squared",
                                     est.estimate, expected, 1e-9));
    report.add(
        CheckResult::upper_bound("max_residual", est.max_residual, 0.0, 1e-9));
    auto fwd = [&ex](const Vec& x) { return ex.map.forward(x); };
    auto jac = [&ex](const Vec& x) { return ex.map.forward.jacobian(x); };
    report.add(CheckResult::upper_bound(
        "pullback_omega_residual",
        max_conformal_residual(ex.omega, ex.manifold, fwd, jac, expected,
                               cfg.samples, cfg.seed),
        0.0, 1e-9));
    report.add(CheckResult::upper_bound(
        "pullback_omega1_residual",
        max_conformal_residual(ex.omega1, ex.manifold, fwd, jac, expected,
                               cfg.samples, cfg.seed),
        0.0, 1e-10));
    report.add(CheckResult::upper_bound(
        "pullback_omega2_residual",
        max_conformal_residual(ex.omega2, ex.manifold, fwd, jac, expected,
                               cfg.samples, cfg.seed),
        0.0, 1e-10));
    report.add(CheckResult::upper_bound(
        "golden_p_quadratic_residual",
        std::abs(ex.p * ex.p + ex.p - 1.0), 0.0, 1e-15));
  } else if (cfg.system == "suspension") {
    auto ex = make_suspension_example();
    for (double t : {0.5, 1.0, 2.0}) {
      auto fwd = [&ex, t](const Vec& x) { return (*ex.flow.closed_flow)(t, x); };
      auto jac = [&ex, t](const Vec& x) {
        return tangent_map(ex.flow, Point{ex.manifold, x}, t);
      };
      const double factor = std::pow(ex.lam_minus, t);
      char name[64];
      std::snprintf(name, sizeof name, "pullback_omega_residual_t%.1f", t);
      report.add(CheckResult::upper_bound(
          name,
          max_conformal_residual(ex.omega, ex.manifold, fwd, jac, factor,
                                 cfg.samples, cfg.seed),
          0.0, 1e-6));
    }
    // Structure identities of the suspension forms.
    auto glue_fwd = [&ex](const Vec& x) { return ex.gluing_map(x); };
    auto glue_jac = [&ex](const Vec& x) { return ex.gluing_map.jacobian(x); };
    {
      CounterRng rng(cfg.seed);
      double worst_p = 0.0, worst_m = 0.0;
      for (int i = 0; i < 1000; ++i) {
        Vec x = rng.vector_in_box(ex.manifold->sample_box());
        Vec v = rng.direction(4);
        Point px{ex.manifold, x};
        Point gx{ex.manifold, glue_fwd(x)};
        const Mat J = glue_jac(x);
        worst_p = std::max(worst_p, std::abs(ex.beta_plus(gx, Vec(J * v)) -
                                             ex.beta_plus(px, v)));
        worst_m = std::max(worst_m, std::abs(ex.beta_minus(gx, Vec(J * v)) -
                                             ex.beta_minus(px, v)));
      }
      report.add(CheckResult::upper_bound("gluing_invariance_beta_plus",
                                          worst_p, 0.0, 1e-10));
      report.add(CheckResult::upper_bound("gluing_invariance_beta_minus",
                                          worst_m, 0.0, 1e-10));
    }
    {
      // d beta_pm = ln(lambda_pm) dz ^ beta_pm, relative on random samples.
      CounterRng rng(cfg.seed + 1);
      const DifferentialForm dbp = exterior_derivative(ex.beta_plus);
      const DifferentialForm dbm = exterior_derivative(ex.beta_minus);
      double worst = 0.0;
      for (int i = 0; i < 1000; ++i) {
        Vec x = rng.vector_in_box(ex.manifold->sample_box());
        Vec u = rng.direction(4);
        Vec v = rng.direction(4);
        Point px{ex.manifold, x};
        auto dz_wedge = [&](const DifferentialForm& beta) {
          return u(2) * beta(px, v) - v(2) * beta(px, u);
        };
        const double tp = std::log(ex.lam_plus) * dz_wedge(ex.beta_plus);
        const double tm = std::log(ex.lam_minus) * dz_wedge(ex.beta_minus);
        const double gp = std::abs(dbp(px, u, v) - tp) /
                          std::max(std::abs(tp) + std::abs(dbp(px, u, v)), 1e-8);
        const double gm = std::abs(dbm(px, u, v) - tm) /
                          std::max(std::abs(tm) + std::abs(dbm(px, u, v)), 1e-8);
        worst = std::max(worst, std::max(gp, gm));
      }
      report.add(CheckResult::upper_bound("d_beta_identity_relative", worst,
                                          0.0, 1e-5));
    }
    {
      // d(big_lambda) equals the closed-form omega.
      const DifferentialForm dlam = exterior_derivative(ex.big_lambda);
      report.add(CheckResult::upper_bound(
          "d_big_lambda_vs_omega",
          max_two_form_gap(dlam, ex.omega, ex.manifold, 500, cfg.seed + 2),
          0.0, 1e-5));
    }
    {
      // s-coordinate contraction of the time-1 flow.
      Vec x(4);
      x << 0.2, 0.3, 0.1, 1.0;
      const Vec y = (*ex.flow.closed_flow)(1.0, x);
      report.add(CheckResult::equality("s_contraction_t1", y(3),
                                       ex.lam_minus * ex.lam_minus, 1e-12));
      report.add(CheckResult::equality("lambda_minus", ex.lam_minus,
                                       0.3819660112501051, 1e-12));
      report.add(CheckResult::equality("lambda_plus", ex.lam_plus,
                                       2.618033988749895, 1e-12));
    }
  } else if (cfg.system == "mane") {
    auto lift = make_mane_lift(1, [](const Vec&) { return Vec::Zero(1); },
                               cfg.mane_alpha);
    copts.samples = std::min(cfg.samples, 100);
    auto est = conformality_ratio(lift.flow, cfg.flow_time, copts);
    report.add(CheckResult::equality(
        "ratio_vs_exp_minus_alpha_t", est.estimate,
        std::exp(-cfg.mane_alpha * cfg.flow_time), 1e-5));
  } else if (cfg.system == "lecalvez") {
    LeCalvezParams p;
    p.alpha = cfg.lecalvez_alpha;
    auto ex = make_lecalvez_example(p);
    copts.samples = std::min(cfg.samples, 100);
    auto est = conformality_ratio(ex.flow, cfg.flow_time, copts);
    report.add(CheckResult::equality(
        "ratio_vs_exp_minus_alpha_t", est.estimate,
        std::exp(-p.alpha * cfg.flow_time), 1e-6));
  } else if (cfg.system == "liouville-flow") {
    auto flow = make_liouville_flow();
    copts.samples = std::min(cfg.samples, 1000);
    auto est = conformality_ratio(flow, cfg.flow_time, copts);
    report.add(CheckResult::equality("ratio_vs_exp_minus_t", est.estimate,
                                     std::exp(-cfg.flow_time), 1e-6));
  } else if (cfg.system == "model-map") {
    auto mm = make_model_cotangent_map(1, cfg.map_a, cfg.map_c);
    report.config["a"] = cfg.map_a;
    report.config["c"] = cfg.map_c;
    copts.samples = std::min(cfg.samples, 2000);
    auto est = conformality_ratio(mm.map, 1, copts);
    report.add(
        CheckResult::equality("ratio_vs_a", est.estimate, cfg.map_a, 1e-10));
    report.add(
        CheckResult::upper_bound("max_residual", est.max_residual, 0.0, 1e-10));
    // f* lambda - a lambda equals the drift covector pointwise.
    const DifferentialForm fl = pullback(mm.map.forward, *mm.map.lambda_form);
    const DifferentialForm drift =
        DifferentialForm::covector(mm.map.manifold, [&] {
          Vec c = Vec::Zero(2);
          c(0) = cfg.map_c;
          return c;
        }());
    DifferentialForm eta(
        1, mm.map.manifold,
        [fl, lam = *mm.map.lambda_form, a = cfg.map_a](
            const Point& x, std::span<const Vec> v) {
          return fl(x, v) - a * lam(x, v);
        },
        "eta");
    report.add(CheckResult::upper_bound(
        "drift_identity",
        max_one_form_gap(eta, drift, mm.map.manifold, 200, cfg.seed), 0.0,
        1e-12));
  } else if (cfg.system == "cat") {
    auto cat = make_cat_map();
    copts.samples = std::min(cfg.samples, 2000);
    auto est = conformality_ratio(cat, 1, copts);
    report.add(CheckResult::equality("ratio_symplectic", est.estimate, 1.0,
                                     1e-10));
  } else {
    throw invalid_input_error("conformality: unknown system " + cfg.system);
  }

  report.add(CheckResult::boolean("runtime_within_budget_10s",
                                  seconds_since(t0) <= 10.0));
  report.timing_seconds = seconds_since(t0);
  return report;
}

// ---------------------------------------------------------------------------
// isotropy

Report run_isotropy(const IsotropyConfig& cfg) {
  const auto t0 = Clock::now();
  Report report;
  report.experiment = "isotropy";
  report.system = cfg.system;
  report.seed = cfg.seed;
  report.config["system"] = cfg.system;
  report.config["submanifold"] = cfg.submanifold;
  report.config["grid"] = cfg.grid;
  report.config["seed"] = cfg.seed;
  report.config["defaults"] = defaults_table();

  if (cfg.system == "mane" && cfg.submanifold == "zero-section") {
    auto lift = make_mane_lift(2, [](const Vec&) { return Vec::Zero(2); },
                               cfg.mane_alpha);
    auto zs = zero_section(lift.manifold, 2, cfg.grid);
    auto rep = isotropy_defect(zs, lift.flow.omega);
    report.add(CheckResult::upper_bound("max_abs_omega", rep.max_abs_omega,
                                        0.0, 1e-12));
    report.add(CheckResult::equality("rank", rep.estimated_rank, 0.0, 0.0));

    // Invariance: push the section through the time-t flow and re-measure.
    const double t = cfg.flow_time;
    auto flowed = ParamSubmanifold(
        lift.manifold, 2, {true, true},
        [&lift, t](const Vec& u) {
          Vec x = Vec::Zero(4);
          x.head(2) = u;
          return integrate(lift.flow, Point{lift.manifold, x}, t).coords;
        },
        nullptr, cfg.grid);
    auto rep2 = isotropy_defect(flowed, lift.flow.omega);
    report.add(CheckResult::upper_bound("max_abs_omega_along_flow",
                                        rep2.max_abs_omega, 0.0, 1e-12));
  } else if (cfg.system == "torus6" &&
             cfg.submanifold == "invariant-torus") {
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
        std::max(cfg.grid, 8));
    auto rep = isotropy_defect(torus, ex.omega);
    report.add(CheckResult::equality("rank", rep.estimated_rank, 2.0, 0.0));
    report.add(CheckResult::lower_bound("max_abs_omega", rep.max_abs_omega,
                                        0.1));
    report.add(CheckResult::boolean(
        "rank_constant_on_grid", rep.rank_histogram.size() == 1));
  } else if (cfg.system == "model-map" && cfg.submanifold == "graph-ds") {
    // Graph of dS for S(q) = sin(2 pi q_1) / 10 inside T*T^2.
    ManifoldPtr m = ChartedManifold::cotangent_torus(2);
    auto g = [](const Vec& q) {
      Vec p(2);
      p(0) = 2.0 * std::numbers::pi * std::cos(2.0 * std::numbers::pi * q(0)) / 10.0;
      p(1) = 0.0;
      return p;
    };
    auto graph = graph_submanifold(m, 2, g, cfg.grid);
    auto rep = isotropy_defect(graph, cotangent_omega(m, 2));
    report.add(CheckResult::upper_bound("max_abs_omega", rep.max_abs_omega,
                                        0.0, 1e-8));
  } else {
    throw invalid_input_error("isotropy: unknown system/submanifold " +
                              cfg.system + "/" + cfg.submanifold);
  }

  report.timing_seconds = seconds_since(t0);
  return report;
}

// ---------------------------------------------------------------------------
// entropy

namespace {

ParamSubmanifold unstable_segment(const ManifoldPtr& torus2, double length,
                                  int /*grid*/) {
  const double p = golden_p();
  const Eigen::Vector2d dir =
      Eigen::Vector2d(1.0, p).normalized() * length;
  return ParamSubmanifold(
      torus2, 1, {false},
      [dir](const Vec& u) {
        Vec x(2);
        x(0) = 0.51 + u(0) * dir(0);
        x(1) = 0.5 + u(0) * dir(1);
        return x;
      },
      [dir](const Vec&) {
        Mat J(2, 1);
        J << dir(0), dir(1);
        return J;
      });
}

ParamSubmanifold unstable_patch4(const ManifoldPtr& torus4, double length) {
  const double p = golden_p();
  const Eigen::Vector2d dir = Eigen::Vector2d(1.0, p).normalized() * length;
  return ParamSubmanifold(
      torus4, 2, {false, false},
      [dir](const Vec& u) {
        Vec x(4);
        x(0) = 0.51 + u(0) * dir(0);
        x(1) = 0.5 + u(0) * dir(1);
        x(2) = 0.13 + u(1) * dir(0);
        x(3) = 0.37 + u(1) * dir(1);
        return x;
      },
      [dir](const Vec&) {
        Mat J = Mat::Zero(4, 2);
        J(0, 0) = dir(0);
        J(1, 0) = dir(1);
        J(2, 1) = dir(0);
        J(3, 1) = dir(1);
        return J;
      });
}

}  // namespace

Report run_entropy(const EntropyConfig& cfg) {
  const auto t0 = Clock::now();
  Report report;
  report.experiment = "entropy";
  report.system = cfg.system;
  report.seed = cfg.seed;
  report.config["system"] = cfg.system;
  report.config["partition"] = cfg.partition;
  report.config["k_max"] = cfg.k_max;
  report.config["grid"] = cfg.grid;
  report.config["segment_length"] = cfg.segment_length;
  report.config["check_grid"] = cfg.check_grid;
  report.config["seed"] = cfg.seed;
  report.config["defaults"] = defaults_table();

  const double log_lambda_plus = std::log(lambda_plus());

  if (cfg.system == "cat") {
    auto cat = make_cat_map();
    auto seg = unstable_segment(cat.manifold, cfg.segment_length, 0);
    CubePartition part(cat.manifold, cfg.partition);
    ItineraryOptions opts;
    opts.k_max = cfg.k_max;
    opts.grid = cfg.grid;
    opts.check_grid = cfg.check_grid;
    auto growth = itinerary_entropy(cat, seg, part, opts);

    report.add(CheckResult::equality("slope_vs_log_lambda_plus", growth.slope,
                                     log_lambda_plus,
                                     0.15 * log_lambda_plus));
    if (cfg.check_grid)
      report.add(
          CheckResult::boolean("grid_insensitive", !growth.grid_sensitive));
    ordered_json seq = ordered_json::array();
    auto es = entropy_sequence(growth);
    for (std::size_t i = 0; i < growth.steps.size(); ++i)
      seq.push_back({growth.steps[i], es[i]});
    report.sequences["entropy_lower_bound"] = seq;
    report.sequences["log_counts"] = sequence_from_report(growth);
  } else if (cfg.system == "product4") {
    auto prod = make_cat_product_map();
    auto patch = unstable_patch4(prod.manifold, cfg.segment_length);
    CubePartition part4(prod.manifold, cfg.partition);
    ItineraryOptions opts4;
    opts4.k_max = cfg.k_max;
    opts4.grid = cfg.grid;
    auto growth4 = itinerary_entropy(prod, patch, part4, opts4);

    // 2D reference at the same k for the strict comparison.
    auto cat = make_cat_map();
    auto seg = unstable_segment(cat.manifold, cfg.segment_length, 0);
    CubePartition part2(cat.manifold, cfg.ref_partition);
    ItineraryOptions opts2;
    opts2.k_max = cfg.k_max;
    opts2.grid = cfg.ref_grid;
    auto growth2 = itinerary_entropy(cat, seg, part2, opts2);

    const double e4 = entropy_sequence(growth4).back();
    const double e2 = entropy_sequence(growth2).back();
    report.config["ref_partition"] = cfg.ref_partition;
    report.config["ref_grid"] = cfg.ref_grid;
    report.config["note"] =
        "patch orientation declared by the caller; the restricted 2-form rank "
        "is reported, transversality is not certified";
    // omega1 restricted to the expanding patch: the patch spans kernel
    // directions, so the rank is 0; its stable mirror under the inverse map
    // carries the 2-form mass and realizes the same counts by symmetry.
    auto rank_report = isotropy_defect(patch, prod.omega);
    report.config["patch_omega_rank"] = rank_report.estimated_rank;
    report.add(CheckResult::lower_bound("product_exceeds_2d_at_kmax", e4 - e2,
                                        0.0, -1e-12));
    // rank/2 * ln(1/a) = 2 ln(lambda_plus) for the restricted product map.
    report.add(CheckResult::upper_bound("presymplectic_rank_bound",
                                        2.0 * log_lambda_plus, e4, 0.1));
    ordered_json seq = ordered_json::array();
    auto es = entropy_sequence(growth4);
    for (std::size_t i = 0; i < growth4.steps.size(); ++i)
      seq.push_back({growth4.steps[i], es[i]});
    report.sequences["entropy_lower_bound"] = seq;
    report.sequences["log_counts"] = sequence_from_report(growth4);
  } else {
    throw invalid_input_error("entropy: unknown system " + cfg.system);
  }

  report.add(CheckResult::boolean("runtime_within_budget_60s",
                                  seconds_since(t0) <= 60.0));
  report.timing_seconds = seconds_since(t0);
  return report;
}

// ---------------------------------------------------------------------------
// volume growth

Report run_volume_growth(const VolumeGrowthConfig& cfg) {
  const auto t0 = Clock::now();
  Report report;
  report.experiment = "volume-growth";
  report.system = cfg.system;
  report.seed = cfg.seed;
  report.config["system"] = cfg.system;
  report.config["direction"] = cfg.direction;
  report.config["functional"] = cfg.functional;
  report.config["n_max"] = cfg.n_max;
  report.config["grid"] = cfg.grid;
  report.config["seed"] = cfg.seed;
  report.config["defaults"] = defaults_table();

  VolumeGrowthOptions opts;
  opts.n_max = cfg.n_max;
  opts.grid = cfg.grid;
  opts.direction = (cfg.direction == "backward") ? GrowthDirection::backward
                                                 : GrowthDirection::forward;
  opts.functional = (cfg.functional == "omega") ? VolumeFunctional::omega_area
                                                : VolumeFunctional::riemannian;

  const double log_lambda_plus = std::log(lambda_plus());

  if (cfg.system == "torus6") {
    auto ex = make_torus6_example();
    // 2D patch spanning (theta_2, rho_1): omega restricts symplectically.
    ParamSubmanifold patch(
        ex.manifold, 2, {false, false},
        [](const Vec& u) {
          Vec x = Vec::Zero(6);
          x(0) = 0.21;
          x(1) = 0.2 * u(0) + 0.34;
          x(2) = 0.41;
          x(3) = 0.07;
          x(4) = 0.2 * u(1);
          x(5) = 0.11;
          return x;
        },
        [](const Vec&) {
          Mat J = Mat::Zero(6, 2);
          J(1, 0) = 0.2;
          J(4, 1) = 0.2;
          return J;
        });
    auto growth = volume_growth(ex.map, patch, opts);
    const double expected = (opts.direction == GrowthDirection::backward)
                                ? 2.0 * log_lambda_plus
                                : -2.0 * log_lambda_plus;
    report.add(CheckResult::equality("omega_area_slope", growth.slope,
                                     expected, 1e-6));
    report.sequences["log_volume"] = sequence_from_report(growth);
  } else if (cfg.system == "cat") {
    auto cat = make_cat_map();
    auto seg = unstable_segment(cat.manifold, 0.5, 0);
    auto growth = volume_growth(cat, seg, opts);
    report.add(CheckResult::equality("length_slope", growth.slope,
                                     log_lambda_plus,
                                     0.02 * log_lambda_plus));
    report.sequences["log_volume"] = sequence_from_report(growth);
  } else if (cfg.system == "rotation") {
    auto rot = make_rotation_map(0.357, 0.123);
    ParamSubmanifold curve(
        rot.manifold, 1, {true},
        [](const Vec& u) {
          Vec x(2);
          x(0) = u(0);
          x(1) = 0.3 + 0.1 * std::sin(2.0 * std::numbers::pi * u(0));
          return x;
        },
        nullptr);
    auto growth = volume_growth(rot, curve, opts);
    report.add(CheckResult::equality("isometry_slope", growth.slope, 0.0,
                                     0.01));
    report.sequences["log_volume"] = sequence_from_report(growth);
  } else {
    throw invalid_input_error("volume-growth: unknown system " + cfg.system);
  }

  report.timing_seconds = seconds_since(t0);
  return report;
}

// ---------------------------------------------------------------------------
// liouville classes

Report run_liouville(const LiouvilleConfig& cfg) {
  const auto t0 = Clock::now();
  Report report;
  report.experiment = "liouville";
  report.system = "model-map";
  report.seed = cfg.seed;
  report.config["graphs"] = cfg.graphs;
  report.config["grid"] = cfg.grid;
  report.config["seed"] = cfg.seed;
  report.config["defaults"] = defaults_table();

  ManifoldPtr m = ChartedManifold::cotangent_torus(1);
  const DifferentialForm lambda = cotangent_lambda(m, 1);
  const double tau = 2.0 * std::numbers::pi;

  // Fixed family of test graphs p = g_i(q).
  std::vector<std::function<double(double)>> graph_fns;
  for (int i = 0; i < cfg.graphs; ++i) {
    const double c0 = 0.1 + 0.15 * i;
    const double c1 = 0.05 * (i + 1);
    const double c2 = 0.03 * (cfg.graphs - i);
    graph_fns.push_back([c0, c1, c2, tau](double q) {
      return c0 + c1 * std::cos(tau * q) + c2 * std::sin(tau * q);
    });
  }

  auto class_of = [&](std::function<double(double)> g) {
    auto sub = graph_submanifold(
        m, 1,
        [g](const Vec& q) { return Vec(Vec::Constant(1, g(q(0)))); },
        cfg.grid);
    return liouville_class(sub, lambda, coordinate_loops(sub)).periods(0);
  };

  for (double a : {0.5, 2.0}) {
    for (double c : {0.0, 0.3}) {
      auto mm = make_model_cotangent_map(1, a, c);
      for (int i = 0; i < cfg.graphs; ++i) {
        auto g = graph_fns[static_cast<std::size_t>(i)];
        const double before = class_of(g);
        auto mapped = [g, a, c](double q) { return a * g(q) + c; };
        const double after = class_of(mapped);
        char name[96];
        std::snprintf(name, sizeof name, "homothety_a%g_c%g_graph%d", a, c, i);
        report.add(CheckResult::equality(name, after, a * before + c, 1e-8));
      }
      // The fixed class graph is pointwise invariant.
      const double fix = fixed_liouville_class(a, Vec::Constant(1, c))(0);
      double worst = 0.0;
      for (int i = 0; i <= cfg.grid; ++i) {
        Vec x(2);
        x << static_cast<double>(i) / cfg.grid, fix;
        worst = std::max(worst,
                         (mm.map.forward(x) - x).lpNorm<Eigen::Infinity>());
      }
      char name[96];
      std::snprintf(name, sizeof name, "fixed_class_invariant_a%g_c%g", a, c);
      report.add(CheckResult::upper_bound(name, worst, 0.0, 1e-12));
    }
  }

  // Baselines: zero section has class 0; a constant graph has class c.
  const double zero_class = class_of([](double) { return 0.0; });
  report.add(
      CheckResult::upper_bound("zero_section_class", std::abs(zero_class), 0.0,
                               1e-12));
  const double const_class = class_of([](double) { return 0.4; });
  report.add(CheckResult::equality("constant_graph_class", const_class, 0.4,
                                   1e-10));

  report.timing_seconds = seconds_since(t0);
  return report;
}

// ---------------------------------------------------------------------------
// exactness transforms

Report run_exactness(const ExactnessConfig& cfg) {
  const auto t0 = Clock::now();
  Report report;
  report.experiment = "exactness";
  report.system = "catalog";
  report.seed = cfg.seed;
  report.config["samples"] = cfg.samples;
  report.config["seed"] = cfg.seed;
  report.config["note"] =
      "period residuals cover only the supplied generator loops; this is a "
      "partial check of trivial cohomology action";
  report.config["defaults"] = defaults_table();

  // Conformal maps carrying a primitive: the model-map family.
  for (double a : {0.5, 2.0}) {
    for (double c : {0.0, 0.3}) {
      auto mm = make_model_cotangent_map(1, a, c);
      auto loops = base_loops(mm.map.manifold, 1, [](const Vec&) {
        return Vec(Vec::Constant(1, 0.4));
      });
      auto tr = exactness_transform(mm.map, loops, cfg.seed, cfg.samples);
      char name[96];
      std::snprintf(name, sizeof name, "map_residual_periods_a%g_c%g", a, c);
      report.add(CheckResult::upper_bound(
          name, tr.residual_periods.lpNorm<Eigen::Infinity>(), 0.0, 1e-10));
      std::snprintf(name, sizeof name, "map_dlambda1_vs_dlambda_a%g_c%g", a, c);
      report.add(
          CheckResult::upper_bound(name, tr.d_lambda_residual, 0.0, 1e-5));
      if (c == 0.0) {
        // Already exact: the corrected primitive has the same periods.
        const double l1p = line_integral(tr.lambda1, loops[0]);
        const double lp = line_integral(*mm.map.lambda_form, loops[0]);
        std::snprintf(name, sizeof name, "map_periods_unchanged_a%g", a);
        report.add(CheckResult::equality(name, l1p, lp, 1e-10));
      }
    }
  }

  // Conformal flows: xi = i_X omega + alpha lambda is closed; compact checks
  // per catalog flow.
  struct FlowCase {
    std::string name;
    FlowSystem flow;
    std::vector<Loop> loops;
  };
  std::vector<FlowCase> cases;

  {
    auto flow = make_liouville_flow();
    auto loops = base_loops(flow.manifold, 1,
                            [](const Vec&) { return Vec(Vec::Zero(1)); });
    cases.push_back({"liouville", flow, std::move(loops)});
  }
  {
    auto lift = make_mane_lift(1, [](const Vec&) { return Vec::Zero(1); },
                               cfg.mane_alpha);
    auto loops = base_loops(lift.manifold, 1,
                            [](const Vec&) { return Vec(Vec::Zero(1)); });
    cases.push_back({"mane", lift.flow, std::move(loops)});
  }
  {
    auto ex = make_lecalvez_example();
    const double D = ex.params.D;
    std::vector<Loop> loops;
    loops.emplace_back(ex.annulus, [D](double t) {
      Vec x(2);
      x << -D + 2.0 * D * t, 0.25;
      return x;
    });
    cases.push_back({"lecalvez", ex.flow, std::move(loops)});
  }
  {
    auto ex = make_suspension_example();
    std::vector<Loop> loops;
    loops.emplace_back(ex.manifold, [](double t) {
      Vec x(4);
      x << t, 0.0, 0.3, 0.2;
      return x;
    });
    loops.emplace_back(ex.manifold, [](double t) {
      Vec x(4);
      x << 0.0, t, 0.3, 0.2;
      return x;
    });
    // The vertical loop closes because the origin is fixed by the gluing.
    loops.emplace_back(ex.manifold, [](double t) {
      Vec x(4);
      x << 0.0, 0.0, t, 0.2;
      return x;
    });
    cases.push_back({"suspension", ex.flow, std::move(loops)});
  }

  for (const auto& fc : cases) {
    auto res = flow_exactness_form(fc.flow, fc.loops, cfg.seed, cfg.samples);
    report.add(CheckResult::upper_bound("flow_dxi_" + fc.name,
                                        res.d_xi_residual, 0.0, 1e-5));
    if (fc.name == "mane" || fc.name == "suspension" || fc.name == "lecalvez")
      report.add(CheckResult::upper_bound(
          "flow_xi_periods_" + fc.name,
          res.xi_periods.lpNorm<Eigen::Infinity>(), 0.0, 1e-8));
    if (fc.name == "liouville") {
      // lambda1 recovers the tautological form pointwise.
      const double gap = max_one_form_gap(res.lambda1, *fc.flow.lambda_form,
                                          fc.flow.manifold, 200, cfg.seed);
      report.add(CheckResult::upper_bound("flow_lambda1_is_lambda_liouville",
                                          gap, 0.0, 1e-12));
    }
  }

  report.timing_seconds = seconds_since(t0);
  return report;
}

// ---------------------------------------------------------------------------
// action scaling

Report run_action_scaling(const ActionScalingConfig& cfg) {
  const auto t0 = Clock::now();
  Report report;
  report.experiment = "action-scaling";
  report.system = "graphs-on-T*T1";
  report.seed = cfg.seed;
  report.config["seed"] = cfg.seed;
  report.config["defaults"] = defaults_table();

  ManifoldPtr m = ChartedManifold::cotangent_torus(1);
  const DifferentialForm lambda = cotangent_lambda(m, 1);
  const double tau = 2.0 * std::numbers::pi;

  // Exact graphs: p = S1'(q) with S1 = sin(2 pi q) / (2 pi), and the zero
  // section. Intersections at q = 1/4 and 3/4.
  auto S1 = [tau](double q) { return std::sin(tau * q) / tau; };
  auto L = graph_submanifold(m, 1, [tau](const Vec& q) {
    return Vec(Vec::Constant(1, std::cos(tau * q(0))));
  });
  auto Lp = zero_section(m, 1);

  auto pts = find_graph_intersections(L, Lp);
  report.add(CheckResult::equality("intersection_count",
                                   static_cast<double>(pts.size()), 2.0, 0.0));
  const Point x = pts[0];
  const Point y = pts[1];
  report.add(
      CheckResult::equality("intersection_q1", x.coords(0), 0.25, 1e-10));
  report.add(
      CheckResult::equality("intersection_q2", y.coords(0), 0.75, 1e-10));

  const double delta = action_difference(L, Lp, x, y, lambda);
  const double closed_form = S1(y.coords(0)) - S1(x.coords(0));
  report.add(
      CheckResult::equality("delta_vs_closed_form", delta, closed_form, 1e-9));

  const double delta_rev = action_difference(L, Lp, y, x, lambda);
  report.add(CheckResult::upper_bound("antisymmetry",
                                      std::abs(delta + delta_rev), 0.0, 1e-10));

  // Same curves mapped through the fiber scaling (q, p) -> (q, a p).
  for (double a : {0.5, 2.0}) {
    auto La = graph_submanifold(m, 1, [tau, a](const Vec& q) {
      return Vec(Vec::Constant(1, a * std::cos(tau * q(0))));
    });
    auto Lpa = zero_section(m, 1);
    auto pa = find_graph_intersections(La, Lpa);
    const double da = action_difference(La, Lpa, pa[0], pa[1], lambda);
    char name[64];
    std::snprintf(name, sizeof name, "fiber_scaling_a%g", a);
    report.add(CheckResult::equality(name, da, a * delta, 1e-8));
  }

  // Identical curves: the difference vanishes.
  const double same = action_difference(L, L, x, y, lambda);
  report.add(CheckResult::upper_bound("identical_curves", std::abs(same), 0.0,
                                      1e-12));

  report.timing_seconds = seconds_since(t0);
  return report;
}

// ---------------------------------------------------------------------------
// escape probe

Report run_escape(const EscapeConfig& cfg) {
  const auto t0 = Clock::now();
  Report report;
  report.experiment = "escape";
  report.system = "model-map";
  report.seed = cfg.seed;
  report.config["a"] = cfg.a;
  report.config["c"] = cfg.c;
  report.config["graph_p"] = cfg.graph_p;
  report.config["kmax"] = cfg.kmax;
  report.config["grid"] = cfg.grid;
  report.config["seed"] = cfg.seed;
  report.config["defaults"] = defaults_table();

  auto mm = make_model_cotangent_map(1, cfg.a, cfg.c);
  auto graph = graph_submanifold(
      mm.map.manifold, 1,
      [&cfg](const Vec&) { return Vec(Vec::Constant(1, cfg.graph_p)); },
      cfg.grid);
  auto probe = orbit_escape_probe(mm.map, graph, cfg.kmax);

  ordered_json rows = ordered_json::array();
  for (const auto& r : probe.rows)
    rows.push_back({static_cast<double>(r.k), r.min_p_norm, r.max_p_norm});
  report.sequences["escape"] = rows;

  if (cfg.a > 1.0 && cfg.c == 0.0 && cfg.graph_p != 0.0) {
    // Pure geometric growth |p| a^k.
    double worst = 0.0;
    for (const auto& r : probe.rows) {
      const double expect = std::abs(cfg.graph_p) * std::pow(cfg.a, r.k);
      worst = std::max(worst, std::abs(r.max_p_norm - expect) / expect);
    }
    report.add(CheckResult::upper_bound("geometric_growth_relative_error",
                                        worst, 0.0, 1e-12));
  }
  if (cfg.a > 1.0) {
    const double fix = cfg.c / (1.0 - cfg.a);
    if (std::abs(cfg.graph_p - fix) > 1e-12) {
      std::vector<double> ks, logs;
      for (const auto& r : probe.rows) {
        if (r.max_p_norm > 0.0) {
          ks.push_back(static_cast<double>(r.k));
          logs.push_back(std::log(r.max_p_norm));
        }
      }
      const double slope = fit_slope_last_half(ks, logs);
      report.add(CheckResult::equality("fiber_growth_exponent", slope,
                                       std::log(cfg.a),
                                       0.02 * std::log(cfg.a)));
    }
  }
  if (cfg.a < 1.0) {
    const double fix = cfg.c / (1.0 - cfg.a);
    const auto& last = probe.rows.back();
    report.add(CheckResult::equality("convergence_to_fixed_class_max",
                                     last.max_p_norm, std::abs(fix), 1e-5));
    report.add(CheckResult::equality("convergence_to_fixed_class_min",
                                     last.min_p_norm, std::abs(fix), 1e-5));
    report.add(CheckResult::boolean("orbit_bounded", !probe.escaped_at));
  }

  report.timing_seconds = seconds_since(t0);
  return report;
}

// ---------------------------------------------------------------------------
// annulus example

Report run_lecalvez_curve(const LeCalvezConfig& cfg) {
  const auto t0 = Clock::now();
  Report report;
  report.experiment = "lecalvez-curve";
  report.system = "lecalvez";
  report.seed = cfg.seed;
  report.config["params"] = params_json(cfg.params);
  report.config["convexity_grid"] = cfg.convexity_grid;
  report.config["curve_dt"] = cfg.curve_dt;
  report.config["invariance_samples"] = cfg.invariance_samples;
  report.config["orbit_samples"] = cfg.orbit_samples;
  report.config["orbit_time"] = cfg.orbit_time;
  report.config["seed"] = cfg.seed;
  report.config["defaults"] = defaults_table();

  auto ex = make_lecalvez_example(cfg.params);
  const double D = cfg.params.D;

  // Fiber convexity over a grid: the exact fiber Hessian, plus agreement of
  // the second-difference stencil with it at the stencil's own accuracy.
  {
    const double h = defaults::fd_step2;
    double worst = std::numeric_limits<double>::infinity();
    double stencil_gap = 0.0;
    for (int i = 0; i < cfg.convexity_grid; ++i) {
      const double x = -D + 2.0 * D * (i + 0.5) / cfg.convexity_grid;
      for (int j = 0; j < cfg.convexity_grid; ++j) {
        const double y = -2.0 + 4.0 * (j + 0.5) / cfg.convexity_grid;
        worst = std::min(worst, ex.d2K_dy2(x));
        const double kyy =
            (ex.K(x, y + h) - 2.0 * ex.K(x, y) + ex.K(x, y - h)) / (h * h);
        stencil_gap = std::max(stencil_gap, std::abs(kyy - ex.d2K_dy2(x)));
      }
    }
    report.add(CheckResult::lower_bound("min_d2K_dy2", worst, 1.0, 1e-12));
    report.add(CheckResult::upper_bound("d2K_dy2_stencil_agreement",
                                        stencil_gap, 0.0, 1e-5));
  }

  // The assembled invariant curve: flow-invariance and the vertical-line
  // failure.
  auto curve = invariant_curve(ex, cfg.curve_dt);
  {
    IntegrationOptions iopts;
    std::vector<Eigen::Vector2d> samples;
    // Spread over all pieces.
    for (const auto& piece : curve.pieces) {
      const std::size_t stride =
          std::max<std::size_t>(1, piece.size() / (cfg.invariance_samples / 4));
      for (std::size_t i = 0; i < piece.size(); i += stride)
        samples.push_back(piece[i]);
    }
    double worst = 0.0;
    for (const auto& s : samples) {
      Vec x(2);
      x << s(0), s(1);
      const Vec y = integrate(ex.flow, Point{ex.annulus, x}, 1.0, iopts).coords;
      worst = std::max(worst, curve.distance({y(0), y(1)}));
    }
    report.add(
        CheckResult::upper_bound("curve_invariance", worst, 0.0, 1e-5));
    report.add(CheckResult::lower_bound("non_graph_gap",
                                        non_graph_gap(curve), 0.01));
  }

  // Sampled orbits settle onto the origin.
  {
    CounterRng rng(cfg.seed);
    double worst = 0.0;
    for (int i = 0; i < cfg.orbit_samples; ++i) {
      Vec x(2);
      x << rng.uniform(-D, D), rng.uniform(-0.5, 0.5);
      const Vec y =
          integrate(ex.flow, Point{ex.annulus, x}, cfg.orbit_time).coords;
      const Vec yn = ex.annulus->normalize(y);
      worst = std::max(worst, std::hypot(yn(0), yn(1)));
    }
    report.add(CheckResult::upper_bound("orbits_reach_origin", worst, 0.0,
                                        1e-3));
  }

  // Downsampled curve for plots.
  {
    ordered_json rows = ordered_json::array();
    for (const auto& piece : curve.pieces) {
      const std::size_t stride = std::max<std::size_t>(1, piece.size() / 500);
      for (std::size_t i = 0; i < piece.size(); i += stride)
        rows.push_back({piece[i](0), piece[i](1)});
    }
    report.sequences["invariant_curve"] = rows;
  }

  report.timing_seconds = seconds_since(t0);
  return report;
}

// ---------------------------------------------------------------------------
// reproduce-all

SuiteReport run_reproduce_all(const ReproduceAllConfig& cfg) {
  const auto t0 = Clock::now();
  SuiteReport suite;

  {
    ConformalityConfig c;
    c.system = "torus6";
    c.seed = cfg.seed;
    suite.reports.push_back(run_conformality(c));
    c.system = "suspension";
    suite.reports.push_back(run_conformality(c));
    c.system = "mane";
    suite.reports.push_back(run_conformality(c));
    c.system = "lecalvez";
    suite.reports.push_back(run_conformality(c));
    c.system = "liouville-flow";
    suite.reports.push_back(run_conformality(c));
    c.system = "model-map";
    suite.reports.push_back(run_conformality(c));
    c.system = "cat";
    suite.reports.push_back(run_conformality(c));
  }
  {
    EntropyConfig e;
    e.system = "cat";
    e.grid = cfg.entropy_grid;
    e.seed = cfg.seed;
    suite.reports.push_back(run_entropy(e));
    EntropyConfig p;
    p.system = "product4";
    p.partition = 12;
    p.k_max = 6;
    p.grid = 1000;
    p.seed = cfg.seed;
    suite.reports.push_back(run_entropy(p));
  }
  {
    VolumeGrowthConfig v;
    v.seed = cfg.seed;
    suite.reports.push_back(run_volume_growth(v));  // torus6 backward omega
    VolumeGrowthConfig vc;
    vc.system = "cat";
    vc.direction = "forward";
    vc.functional = "riemannian";
    vc.grid = 64;
    vc.seed = cfg.seed;
    suite.reports.push_back(run_volume_growth(vc));
    VolumeGrowthConfig vr;
    vr.system = "rotation";
    vr.direction = "forward";
    vr.functional = "riemannian";
    vr.grid = 64;
    vr.seed = cfg.seed;
    suite.reports.push_back(run_volume_growth(vr));
  }
  {
    IsotropyConfig i1;
    i1.seed = cfg.seed;
    suite.reports.push_back(run_isotropy(i1));  // mane zero-section
    IsotropyConfig i2;
    i2.system = "torus6";
    i2.submanifold = "invariant-torus";
    i2.grid = 8;
    i2.seed = cfg.seed;
    suite.reports.push_back(run_isotropy(i2));
    IsotropyConfig i3;
    i3.system = "model-map";
    i3.submanifold = "graph-ds";
    i3.seed = cfg.seed;
    suite.reports.push_back(run_isotropy(i3));
  }
  {
    LiouvilleConfig l;
    l.seed = cfg.seed;
    suite.reports.push_back(run_liouville(l));
    EscapeConfig e1;
    e1.a = 0.5;
    e1.c = 0.3;
    e1.kmax = 40;
    e1.seed = cfg.seed;
    suite.reports.push_back(run_escape(e1));
    EscapeConfig e2;
    e2.a = 2.0;
    e2.c = 0.3;
    e2.kmax = 20;
    e2.seed = cfg.seed;
    suite.reports.push_back(run_escape(e2));
    EscapeConfig e3;  // pure geometric growth
    e3.a = 2.0;
    e3.c = 0.0;
    e3.kmax = 20;
    e3.seed = cfg.seed;
    suite.reports.push_back(run_escape(e3));
  }
  {
    ExactnessConfig x;
    x.seed = cfg.seed;
    suite.reports.push_back(run_exactness(x));
  }
  {
    ActionScalingConfig a;
    a.seed = cfg.seed;
    suite.reports.push_back(run_action_scaling(a));
  }
  {
    LeCalvezConfig lc;
    lc.seed = cfg.seed;
    suite.reports.push_back(run_lecalvez_curve(lc));
  }

  suite.timing_seconds = seconds_since(t0);
  // Whole-suite runtime budget.
  Report meta;
  meta.experiment = "suite-runtime";
  meta.system = "all";
  meta.seed = cfg.seed;
  meta.config["defaults"] = defaults_table();
  meta.add(CheckResult::boolean("runtime_within_budget_600s",
                                suite.timing_seconds <= 600.0));
  meta.timing_seconds = 0.0;
  suite.reports.push_back(std::move(meta));
  return suite;
}

}  // namespace confsym
