#include "confsym/entropy.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

namespace confsym {

// ---------------------------------------------------------------------------
// CubePartition

CubePartition::CubePartition(ManifoldPtr manifold, std::vector<int> cells)
    : manifold_(std::move(manifold)), cells_(std::move(cells)) {
  if (static_cast<int>(cells_.size()) != manifold_->dim())
    throw invalid_input_error("partition cell counts length mismatch");
  box_.resize(cells_.size());
  total_ = 1;
  for (int i = 0; i < manifold_->dim(); ++i) {
    if (cells_[static_cast<std::size_t>(i)] <= 0)
      throw invalid_input_error("partition needs positive cell counts");
    // Periodic coordinates cover [0,1); others use the sampling box.
    box_[static_cast<std::size_t>(i)] =
        manifold_->periodic(i) ? std::pair<double, double>{0.0, 1.0}
                               : manifold_->sample_box()[static_cast<std::size_t>(i)];
    total_ *= cells_[static_cast<std::size_t>(i)];
  }
}

CubePartition::CubePartition(ManifoldPtr manifold, int cells_per_dim)
    : CubePartition(manifold,
                    std::vector<int>(static_cast<std::size_t>(manifold->dim()),
                                     cells_per_dim)) {}

std::int64_t CubePartition::cell_index(const Vec& cover_coords) const {
  const Vec x = manifold_->normalize(cover_coords);
  std::int64_t idx = 0;
  for (int i = 0; i < manifold_->dim(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const auto [lo, hi] = box_[ui];
    int c = static_cast<int>((x(i) - lo) / (hi - lo) * cells_[ui]);
    c = std::clamp(c, 0, cells_[ui] - 1);
    idx = idx * cells_[ui] + c;
  }
  return idx;
}

// ---------------------------------------------------------------------------
// GrowthReport

void GrowthReport::fit() { slope = fit_slope_last_half(steps, log_values); }

// ---------------------------------------------------------------------------
// Volume growth

namespace {

double measure_volume(const MapSystem& sys, const ParamSubmanifold& S, int n,
                      GrowthDirection dir, int grid,
                      VolumeFunctional functional,
                      const DifferentialForm& omega, bool& clamped) {
  const int s = S.param_dim();
  const int steps = (dir == GrowthDirection::forward) ? n : -n;
  double total = 0.0;
  double cellw = 1.0;
  for (int i = 0; i < s; ++i) cellw /= grid;

  for (const Vec& u : S.grid_points(grid)) {
    const Point x0 = S.at(u);
    const Mat T = S.derivative(u);
    const Mat J = tangent_map(sys, x0, steps);
    const Mat G = J * T;
    if (functional == VolumeFunctional::riemannian) {
      Mat gram = G.transpose() * G;
      total += std::sqrt(std::max(0.0, gram.determinant())) * cellw;
    } else {
      const Point xn = iterate(sys, x0, steps);
      total += omega(xn, Vec(G.col(0)), Vec(G.col(1))) * cellw;
    }
  }
  double mag = std::abs(total);
  if (mag < 1e-300) {
    clamped = true;
    mag = 1e-300;
  }
  if (!std::isfinite(mag)) {
    clamped = true;
    mag = 1e300;
  }
  return mag;
}

}  // namespace

GrowthReport volume_growth(const MapSystem& sys, const ParamSubmanifold& S,
                           const VolumeGrowthOptions& opts) {
  if (opts.functional == VolumeFunctional::omega_area && S.param_dim() != 2)
    throw invalid_input_error("omega_area functional needs a 2D patch");
  if (opts.direction == GrowthDirection::backward && !sys.inverse)
    throw invalid_input_error("backward growth needs an inverse map");
  const DifferentialForm& omega = opts.omega ? *opts.omega : sys.omega;

  GrowthReport report;
  for (int n = 0; n <= opts.n_max; ++n) {
    const double vol = measure_volume(sys, S, n, opts.direction, opts.grid,
                                      opts.functional, omega, report.clamped);
    report.steps.push_back(static_cast<double>(n));
    report.log_values.push_back(std::log(vol));
  }
  report.fit();

  if (opts.check_grid) {
    bool clamped2 = false;
    const double v1 = std::exp(report.log_values.back());
    const double v2 =
        measure_volume(sys, S, opts.n_max, opts.direction, 2 * opts.grid,
                       opts.functional, omega, clamped2);
    if (std::abs(v2 - v1) > 0.05 * std::max(std::abs(v1), std::abs(v2)))
      report.grid_sensitive = true;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Itinerary entropy

namespace {

struct Hash128 {
  std::uint64_t hi = 0x9e3779b97f4a7c15ULL;
  std::uint64_t lo = 0xbf58476d1ce4e5b9ULL;

  void mix(std::uint64_t value) {
    auto scramble = [](std::uint64_t z) {
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      return z ^ (z >> 31);
    };
    lo = scramble(lo ^ (value + 0x9e3779b97f4a7c15ULL));
    hi = scramble(hi ^ (value * 0xd6e8feb86659fd93ULL + 0xca5a826395121157ULL));
  }

  bool operator<(const Hash128& o) const {
    return hi != o.hi ? hi < o.hi : lo < o.lo;
  }
  bool operator==(const Hash128& o) const { return hi == o.hi && lo == o.lo; }
};

// Sorted-unique merge of per-batch hashes into the accumulated set; the
// deterministic order makes counts independent of batching.
void merge_unique(std::vector<Hash128>& acc, std::vector<Hash128>& batch) {
  std::sort(batch.begin(), batch.end());
  batch.erase(std::unique(batch.begin(), batch.end()), batch.end());
  std::vector<Hash128> merged;
  merged.reserve(acc.size() + batch.size());
  std::merge(acc.begin(), acc.end(), batch.begin(), batch.end(),
             std::back_inserter(merged));
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
  acc.swap(merged);
}

// Worker threads per batch; CONFSYM_THREADS overrides. Counts are identical
// for any thread count: workers only partition the sample multiset, and the
// per-k sets are formed by sort+unique afterwards.
int itinerary_threads() {
  if (const char* env = std::getenv("CONFSYM_THREADS")) {
    const int t = std::atoi(env);
    if (t >= 1) return std::min(t, 64);
  }
  return 1;
}

std::vector<std::int64_t> count_itineraries(const MapSystem& f,
                                            const ParamSubmanifold& S,
                                            const CubePartition& P, int k_max,
                                            std::int64_t grid) {
  const int s = S.param_dim();
  std::vector<std::vector<Hash128>> acc(static_cast<std::size_t>(k_max));

  std::int64_t total = 1;
  for (int i = 0; i < s; ++i) total *= grid;

  auto point_at = [&](std::int64_t flat) {
    Vec u(s);
    for (int i = s - 1; i >= 0; --i) {
      u(i) = (static_cast<double>(flat % grid) + 0.5) /
             static_cast<double>(grid);
      flat /= grid;
    }
    return S.coords(u);
  };

  auto scan_range = [&](std::int64_t lo, std::int64_t hi,
                        std::vector<std::vector<Hash128>>& out) {
    for (auto& o : out) o.reserve(static_cast<std::size_t>(hi - lo));
    for (std::int64_t flat = lo; flat < hi; ++flat) {
      Vec x = point_at(flat);
      Hash128 h;
      for (int k = 1; k <= k_max; ++k) {
        x = f.forward(x);
        h.mix(static_cast<std::uint64_t>(P.cell_index(x)));
        out[static_cast<std::size_t>(k - 1)].push_back(h);
      }
    }
  };

  const int threads = itinerary_threads();
  const std::int64_t batch_size = 262144;
  for (std::int64_t start = 0; start < total; start += batch_size) {
    const std::int64_t stop = std::min(total, start + batch_size);
    std::vector<std::vector<std::vector<Hash128>>> partial(
        static_cast<std::size_t>(threads),
        std::vector<std::vector<Hash128>>(static_cast<std::size_t>(k_max)));
    if (threads == 1) {
      scan_range(start, stop, partial[0]);
    } else {
      std::vector<std::thread> pool;
      const std::int64_t span = stop - start;
      for (int t = 0; t < threads; ++t) {
        const std::int64_t lo = start + span * t / threads;
        const std::int64_t hi = start + span * (t + 1) / threads;
        pool.emplace_back([&, lo, hi, t]() {
          scan_range(lo, hi, partial[static_cast<std::size_t>(t)]);
        });
      }
      for (auto& th : pool) th.join();
    }
    for (int k = 0; k < k_max; ++k) {
      std::vector<Hash128> batch;
      for (int t = 0; t < threads; ++t) {
        auto& src = partial[static_cast<std::size_t>(t)]
                           [static_cast<std::size_t>(k)];
        batch.insert(batch.end(), src.begin(), src.end());
        src.clear();
        src.shrink_to_fit();
      }
      merge_unique(acc[static_cast<std::size_t>(k)], batch);
    }
  }

  std::vector<std::int64_t> counts;
  counts.reserve(static_cast<std::size_t>(k_max));
  for (const auto& a : acc) counts.push_back(static_cast<std::int64_t>(a.size()));
  return counts;
}

}  // namespace

GrowthReport itinerary_entropy(const MapSystem& f, const ParamSubmanifold& S,
                               const CubePartition& P,
                               const ItineraryOptions& opts) {
  if (opts.k_max < 1)
    throw invalid_input_error("itinerary_entropy needs k_max >= 1");
  GrowthReport report;
  report.counts = count_itineraries(f, S, P, opts.k_max, opts.grid);
  for (int k = 1; k <= opts.k_max; ++k) {
    report.steps.push_back(static_cast<double>(k));
    report.log_values.push_back(
        std::log(static_cast<double>(report.counts[static_cast<std::size_t>(k - 1)])));
  }
  report.fit();

  if (opts.check_grid) {
    auto doubled = count_itineraries(f, S, P, opts.k_max, 2 * opts.grid);
    const double a = static_cast<double>(report.counts.back());
    const double b = static_cast<double>(doubled.back());
    if (std::abs(b - a) > 0.10 * std::max(a, b)) report.grid_sensitive = true;
  }
  return report;
}

std::vector<double> entropy_sequence(const GrowthReport& report) {
  std::vector<double> seq;
  seq.reserve(report.steps.size());
  for (std::size_t i = 0; i < report.steps.size(); ++i)
    seq.push_back(report.log_values[i] / report.steps[i]);
  return seq;
}

// ---------------------------------------------------------------------------
// Inequality check

YomdinCheck yomdin_bound_check(double logvol, double ent_lower, double rad_df,
                               int s, int r, double slack) {
  double correction = 0.0;
  if (r > 0) {
    const double t = std::pow(rad_df, static_cast<double>(s) / r);
    correction = std::max(0.0, std::log(t));
  }
  const double rhs = ent_lower + correction;
  return {logvol, rhs, logvol <= rhs + slack};
}

}  // namespace confsym
