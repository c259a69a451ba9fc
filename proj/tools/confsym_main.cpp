// Experiment driver: maps named experiments onto the library and emits
// machine-readable JSON reports plus plot-ready data files.
//
// Exit codes: 0 all checks pass, 1 at least one check failed, 2 usage error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "confsym/errors.hpp"
#include "confsym/experiments.hpp"

namespace {

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) return;
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw confsym::error("cannot open " + path + " for writing");
  out << text;
}

int finish(const confsym::Report& report, const std::string& out,
           bool plotdata) {
  write_text(out, report.to_string());
  if (plotdata && !out.empty()) {
    std::string prefix = out;
    if (prefix.size() > 5 && prefix.substr(prefix.size() - 5) == ".json")
      prefix = prefix.substr(0, prefix.size() - 5);
    confsym::emit_plotdata(report, prefix);
  }
  for (const auto& c : report.checks)
    std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << report.experiment << "/"
              << c.name << " measured=" << c.measured
              << " expected=" << c.expected << " tol=" << c.tolerance << "\n";
  if (!report.all_pass()) {
    for (const auto& name : report.failing())
      std::cerr << "check failed: " << name << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"confsym - conformal symplectic dynamics laboratory"};
  app.require_subcommand(1);
  app.fallthrough(true);  // --out/--seed may follow the subcommand
  app.set_config("--config");
  app.allow_config_extras(false);
  app.failure_message(CLI::FailureMessage::help);

  std::string out;
  bool plotdata = false;
  std::uint64_t seed = confsym::defaults::seed;
  app.add_option("--out", out, "report output path (JSON)");
  app.add_flag("--plotdata", plotdata,
               "also write one .dat file per report sequence");
  app.add_option("--seed", seed, "random seed recorded in the report");

  // conformality
  confsym::ConformalityConfig ccfg;
  auto* conformality =
      app.add_subcommand("conformality", "conformality-ratio checks");
  conformality->add_option("--system", ccfg.system,
                           "torus6|suspension|mane|lecalvez|model-map|"
                           "liouville-flow|cat");
  conformality->add_option("--samples", ccfg.samples, "sample count");
  conformality->add_option("--time", ccfg.flow_time, "flow time");
  conformality->add_option("--a", ccfg.map_a, "model-map ratio");
  conformality->add_option("--c", ccfg.map_c, "model-map drift");
  conformality->add_option("--alpha", ccfg.mane_alpha, "damping coefficient");

  // isotropy
  confsym::IsotropyConfig icfg;
  auto* isotropy = app.add_subcommand("isotropy", "isotropy-defect reports");
  isotropy->add_option("--system", icfg.system, "mane|torus6|model-map");
  isotropy->add_option("--submanifold", icfg.submanifold,
                       "zero-section|invariant-torus|graph-ds");
  isotropy->add_option("--grid", icfg.grid, "grid resolution per dimension");
  isotropy->add_option("--alpha", icfg.mane_alpha, "damping coefficient");

  // entropy
  confsym::EntropyConfig ecfg;
  auto* entropy =
      app.add_subcommand("entropy", "itinerary-count entropy lower bounds");
  entropy->add_option("--system", ecfg.system, "cat|product4");
  entropy->add_option("--partition", ecfg.partition, "cells per dimension");
  entropy->add_option("--kmax", ecfg.k_max, "itinerary length");
  entropy->add_option("--grid", ecfg.grid, "sample points per dimension");
  entropy->add_option("--length", ecfg.segment_length, "segment length");
  entropy->add_flag("--check-grid", ecfg.check_grid,
                    "re-run at doubled grid and flag sensitivity");

  // volume-growth
  confsym::VolumeGrowthConfig vcfg;
  auto* volume =
      app.add_subcommand("volume-growth", "pushed-volume growth rates");
  volume->add_option("--system", vcfg.system, "torus6|cat|rotation");
  volume->add_option("--direction", vcfg.direction, "forward|backward");
  volume->add_option("--functional", vcfg.functional, "omega|riemannian");
  volume->add_option("--nmax", vcfg.n_max, "iterate count");
  volume->add_option("--grid", vcfg.grid, "grid resolution per dimension");

  // liouville
  confsym::LiouvilleConfig lcfg;
  auto* liouville =
      app.add_subcommand("liouville", "fiber-class homothety checks");
  liouville->add_option("--graphs", lcfg.graphs, "number of test graphs");
  liouville->add_option("--grid", lcfg.grid, "graph grid resolution");

  // exactness
  confsym::ExactnessConfig xcfg;
  auto* exactness =
      app.add_subcommand("exactness", "primitive-correction transforms");
  exactness->add_option("--samples", xcfg.samples, "residual sample count");
  exactness->add_option("--alpha", xcfg.mane_alpha, "damping coefficient");

  // action-scaling
  confsym::ActionScalingConfig acfg;
  app.add_subcommand("action-scaling",
                     "action differences of graph intersections");

  // escape
  confsym::EscapeConfig scfg;
  std::string escape_system = "model-map";
  auto* escape = app.add_subcommand("escape", "fiber-norm escape probe");
  escape->add_option("--system", escape_system, "model-map");
  escape->add_option("--a", scfg.a, "map ratio");
  escape->add_option("--c", scfg.c, "map drift");
  escape->add_option("--graph", scfg.graph_p, "initial graph height");
  escape->add_option("--kmax", scfg.kmax, "iterate count");
  escape->add_option("--grid", scfg.grid, "graph grid resolution");

  // lecalvez-curve
  confsym::LeCalvezConfig lccfg;
  auto* lecalvez =
      app.add_subcommand("lecalvez-curve", "non-graph invariant curve checks");
  lecalvez->add_option("--beta", lccfg.params.beta, "linear rate");
  lecalvez->add_option("--alpha", lccfg.params.alpha, "damping coefficient");
  lecalvez->add_option("--A", lccfg.params.A, "inner plateau radius");
  lecalvez->add_option("--B", lccfg.params.B, "potential support radius");
  lecalvez->add_option("--C", lccfg.params.C, "cutoff support radius");
  lecalvez->add_option("--D", lccfg.params.D, "circle radius");
  lecalvez->add_option("--convexity-grid", lccfg.convexity_grid,
                       "fiber-convexity grid");

  // reproduce-all
  confsym::ReproduceAllConfig rcfg;
  auto* reproduce = app.add_subcommand(
      "reproduce-all", "run the full acceptance experiment set");
  reproduce->add_option("--entropy-grid", rcfg.entropy_grid,
                        "sample count for the itinerary run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    ccfg.seed = seed;
    icfg.seed = seed;
    ecfg.seed = seed;
    vcfg.seed = seed;
    lcfg.seed = seed;
    xcfg.seed = seed;
    acfg.seed = seed;
    scfg.seed = seed;
    lccfg.seed = seed;
    rcfg.seed = seed;

    if (conformality->parsed())
      return finish(confsym::run_conformality(ccfg), out, plotdata);
    if (isotropy->parsed())
      return finish(confsym::run_isotropy(icfg), out, plotdata);
    if (entropy->parsed())
      return finish(confsym::run_entropy(ecfg), out, plotdata);
    if (volume->parsed())
      return finish(confsym::run_volume_growth(vcfg), out, plotdata);
    if (liouville->parsed())
      return finish(confsym::run_liouville(lcfg), out, plotdata);
    if (exactness->parsed())
      return finish(confsym::run_exactness(xcfg), out, plotdata);
    if (app.get_subcommand("action-scaling")->parsed())
      return finish(confsym::run_action_scaling(acfg), out, plotdata);
    if (escape->parsed()) {
      if (escape_system != "model-map")
        throw confsym::invalid_input_error("escape: unknown system " +
                                           escape_system);
      return finish(confsym::run_escape(scfg), out, plotdata);
    }
    if (lecalvez->parsed())
      return finish(confsym::run_lecalvez_curve(lccfg), out, plotdata);
    if (reproduce->parsed()) {
      auto suite = confsym::run_reproduce_all(rcfg);
      write_text(out, suite.to_string());
      for (const auto& r : suite.reports)
        for (const auto& c : r.checks)
          std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << r.experiment << "/"
                    << c.name << "\n";
      if (!suite.all_pass()) {
        for (const auto& name : suite.failing())
          std::cerr << "check failed: " << name << "\n";
        return 1;
      }
      return 0;
    }
    std::cerr << "no subcommand selected\n";
    return 2;
  } catch (const confsym::invalid_input_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const confsym::invalid_parameter_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
