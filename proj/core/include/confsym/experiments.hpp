#pragma once

#include <cstdint>
#include <string>

#include "confsym/defaults.hpp"
#include "confsym/report.hpp"
#include "confsym/systems.hpp"

namespace confsym {

// Named experiments behind the CLI subcommands. Each function validates its
// configuration, runs the checks with pinned tolerances, and returns a
// self-describing report.

struct ConformalityConfig {
  std::string system = "torus6";  // torus6 | suspension | mane | lecalvez |
                                  // model-map | liouville-flow | cat
  int samples = 10000;
  std::uint64_t seed = defaults::seed;
  double flow_time = 1.0;     // flows: ratio of the time-t map
  double map_a = 0.5;         // model-map ratio
  double map_c = 0.3;         // model-map drift
  double mane_alpha = 1.5;    // damping of the cotangent lift
  double lecalvez_alpha = 1.5;
};
Report run_conformality(const ConformalityConfig& cfg = {});

struct IsotropyConfig {
  std::string system = "mane";  // mane | torus6 | model-map
  std::string submanifold =
      "zero-section";  // zero-section | invariant-torus | graph-ds
  int grid = 16;
  double mane_alpha = 1.5;
  double flow_time = 1.0;  // mane: also test the flowed section
  std::uint64_t seed = defaults::seed;
};
Report run_isotropy(const IsotropyConfig& cfg = {});

struct EntropyConfig {
  std::string system = "cat";  // cat | product4
  int partition = 32;          // cells per dimension
  int k_max = 12;
  std::int64_t grid = 8000000;  // sample points per parameter dimension
  double segment_length = 0.5;
  bool check_grid = false;
  std::uint64_t seed = defaults::seed;
  // product4 comparison run (2D reference at equal k)
  int ref_partition = 32;
  std::int64_t ref_grid = 200000;
};
Report run_entropy(const EntropyConfig& cfg = {});

struct VolumeGrowthConfig {
  std::string system = "torus6";     // torus6 | cat | rotation
  std::string direction = "backward";  // forward | backward
  std::string functional = "omega";    // omega | riemannian
  int n_max = 10;
  int grid = 32;
  std::uint64_t seed = defaults::seed;
};
Report run_volume_growth(const VolumeGrowthConfig& cfg = {});

struct LiouvilleConfig {
  int graphs = 5;
  int grid = 64;
  std::uint64_t seed = defaults::seed;
};
Report run_liouville(const LiouvilleConfig& cfg = {});

struct ExactnessConfig {
  std::uint64_t seed = defaults::seed;
  int samples = 200;
  double mane_alpha = 1.5;
};
Report run_exactness(const ExactnessConfig& cfg = {});

struct ActionScalingConfig {
  std::uint64_t seed = defaults::seed;
};
Report run_action_scaling(const ActionScalingConfig& cfg = {});

struct EscapeConfig {
  double a = 2.0;
  double c = 0.0;
  double graph_p = 0.3;
  int kmax = 20;
  int grid = 64;
  std::uint64_t seed = defaults::seed;
};
Report run_escape(const EscapeConfig& cfg = {});

struct LeCalvezConfig {
  LeCalvezParams params{};
  int convexity_grid = 400;
  double curve_dt = 1e-4;
  int invariance_samples = 200;
  int orbit_samples = 20;
  double orbit_time = 40.0;
  std::uint64_t seed = defaults::seed;
};
Report run_lecalvez_curve(const LeCalvezConfig& cfg = {});

struct ReproduceAllConfig {
  std::uint64_t seed = defaults::seed;
  std::int64_t entropy_grid = 8000000;
};
SuiteReport run_reproduce_all(const ReproduceAllConfig& cfg = {});

/// Echo of the numeric default table (embedded into every report config).
ordered_json defaults_table();

}  // namespace confsym
