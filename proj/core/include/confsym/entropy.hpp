#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "confsym/analysis.hpp"
#include "confsym/dynamics.hpp"

namespace confsym {

// ---------------------------------------------------------------------------
// Cube partitions

/// Decomposition of the fundamental domain into axis-aligned cells. The
/// indexer normalizes first, so representatives of the same quotient class
/// land in the same cell.
class CubePartition {
 public:
  CubePartition(ManifoldPtr manifold, std::vector<int> cells_per_dim);
  /// Same cell count along every coordinate.
  CubePartition(ManifoldPtr manifold, int cells_per_dim);

  const ManifoldPtr& manifold() const { return manifold_; }
  std::int64_t cell_count() const { return total_; }

  /// Flat cell index of the normalized representative.
  std::int64_t cell_index(const Vec& cover_coords) const;

 private:
  ManifoldPtr manifold_;
  std::vector<int> cells_;
  std::vector<std::pair<double, double>> box_;
  std::int64_t total_;
};

// ---------------------------------------------------------------------------
// Growth reports

/// Per-step log-quantities with a least-squares slope over the last half of
/// the range (transient suppression).
struct GrowthReport {
  std::vector<double> steps;
  std::vector<double> log_values;
  double slope = 0.0;
  bool clamped = false;         // log underflow/overflow clamped
  bool grid_sensitive = false;  // doubling the grid moved the endpoint > 10%
  std::vector<std::int64_t> counts;  // itinerary counts (when applicable)

  void fit();
};

// ---------------------------------------------------------------------------
// Volume growth

enum class GrowthDirection { forward, backward };
enum class VolumeFunctional {
  riemannian,  // sum of parallelepiped volumes sqrt(det G^T G)
  omega_area   // signed 2-form area of the pushed patch (2D domains)
};

struct VolumeGrowthOptions {
  int n_max = 8;
  GrowthDirection direction = GrowthDirection::forward;
  int grid = 32;  // per parameter dimension
  VolumeFunctional functional = VolumeFunctional::riemannian;
  const DifferentialForm* omega = nullptr;  // omega_area functional; defaults
                                            // to the system form
  bool check_grid = false;  // re-run at doubled grid, flag > 5% endpoint drift
};

/// Log volume of f^n(S) for n = 0..n_max, with the slope estimating the
/// logarithmic volume growth rate.
GrowthReport volume_growth(const MapSystem& sys, const ParamSubmanifold& S,
                           const VolumeGrowthOptions& opts = {});

// ---------------------------------------------------------------------------
// Itinerary entropy

struct ItineraryOptions {
  int k_max = 12;
  std::int64_t grid = 200000;  // sample points per parameter dimension
  bool check_grid = false;     // re-run at doubled grid, flag > 10% drift
};

/// N_k = number of distinct cell itineraries (j_1 .. j_k) realized by grid
/// points of S under f, f^2, ..., f^k. Reports ln N_k with its fitted slope;
/// (1/k) ln N_k is the entropy lower-bound sequence.
GrowthReport itinerary_entropy(const MapSystem& f, const ParamSubmanifold& S,
                               const CubePartition& P,
                               const ItineraryOptions& opts = {});

/// Entropy lower-bound sequence (1/k) ln N_k from a report.
std::vector<double> entropy_sequence(const GrowthReport& report);

// ---------------------------------------------------------------------------
// Volume-growth vs entropy inequality

struct YomdinCheck {
  double lhs;
  double rhs;
  bool satisfied;
};

/// logvol <= ent + log+(rad_df^{s/r}) with slack 0.05; r = 0 encodes a
/// smooth map (the correction term vanishes).
YomdinCheck yomdin_bound_check(double logvol, double ent_lower, double rad_df,
                               int s, int r, double slack = 0.05);

}  // namespace confsym
