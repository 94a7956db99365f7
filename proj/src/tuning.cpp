#include "resetloop/tuning.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "resetloop/errors.hpp"

namespace resetloop {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Removes floating residue from k * delta so grid values print and compare cleanly.
double clean(double v) { return std::round(v * 1e12) / 1e12; }

bool better(const TunePoint& a, const TunePoint& b) {
  if (a.objective != b.objective) return a.objective < b.objective;
  return a.gamma < b.gamma;
}

std::vector<double> local_axis(double center, double radius, double step) {
  std::vector<double> out;
  const auto k_max = static_cast<long>(std::floor(radius / step + 1e-9));
  for (long k = -k_max; k <= k_max; ++k) {
    const double v = clean(center + static_cast<double>(k) * step);
    if (v >= -1.0 && v <= 1.0) out.push_back(v);
  }
  return out;
}

std::vector<std::vector<double>> cartesian(const std::vector<std::vector<double>>& axes) {
  std::size_t total = 1;
  for (const auto& a : axes) total *= a.size();
  std::vector<std::vector<double>> out;
  if (total == 0) return out;
  out.reserve(total);
  std::vector<std::size_t> index(axes.size(), 0);
  for (std::size_t k = 0; k < total; ++k) {
    std::vector<double> g(axes.size());
    for (std::size_t i = 0; i < axes.size(); ++i) g[i] = axes[i][index[i]];
    out.push_back(std::move(g));
    for (std::size_t i = axes.size(); i-- > 0;) {
      if (++index[i] < axes[i].size()) break;
      index[i] = 0;
    }
  }
  return out;
}

std::vector<TunePoint> evaluate_all(const ArhoObjective& objective, const std::vector<std::vector<double>>& points,
                                    unsigned threads) {
  std::vector<TunePoint> out(points.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, points.size() / 64)));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < points.size();) out[i] = objective.evaluate(points[i]);
  };
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  return out;
}

}  // namespace

std::vector<double> gamma_axis(double delta) {
  if (!(delta > 0.0) || !(delta <= 2.0)) throw InputError("tune: delta must lie in (0, 2]");
  std::vector<double> out;
  const auto k_max = static_cast<long>(std::floor(2.0 / delta + 1e-9));
  for (long k = 0; k <= k_max; ++k) out.push_back(std::min(1.0, clean(-1.0 + static_cast<double>(k) * delta)));
  return out;
}

ArhoObjective::ArhoObjective(const CroneApprox& skeleton, SlopePair target, const TuneOptions& options)
    : target_(target),
      weights_(options.weights),
      pairs_(skeleton.poles.size()),
      band_lo_(0.0),
      band_hi_(0.0),
      kernel_([&] {
        if (!std::isfinite(target.gain_db_per_decade) || !std::isfinite(target.phase_deg_per_decade))
          throw InputError("tune: target slopes must be finite");
        const double w_sum = options.weights.gain + options.weights.phase;
        if (!(options.weights.gain >= 0.0) || !(options.weights.phase >= 0.0) || !(w_sum > 0.0) || !std::isfinite(w_sum))
          throw InputError("tune: weights must be non-negative, finite and not both zero");
        const auto band = trimmed_fit_band(skeleton, options.band_trim);
        band_lo_ = band.first;
        band_hi_ = band.second;
        grid_ = log_grid(band_lo_, band_hi_, options.points_per_decade);
        const ComplexOrderFilter shape = split_reset(skeleton, std::vector<double>(pairs_, 1.0), options.taming_factor);
        for (double w : grid_) linear_part_.push_back(shape.c_nr.at_omega(w));
        return ResetKernel(shape.c_r.base(), static_cast<int>(pairs_), grid_, 1);
      }()) {}

TunePoint ArhoObjective::evaluate(const std::vector<double>& gamma) const {
  TunePoint out{gamma, {}, kInf};
  try {
    std::vector<std::complex<double>> values(grid_.size());
    for (std::size_t i = 0; i < grid_.size(); ++i) values[i] = kernel_.first_harmonic(i, gamma) * linear_part_[i];
    const SlopeFit fit = slope_estimate(grid_, values, band_lo_, band_hi_);
    out.slopes = fit.slopes;
    const double dg = fit.slopes.gain_db_per_decade - target_.gain_db_per_decade;
    const double dp = fit.slopes.phase_deg_per_decade - target_.phase_deg_per_decade;
    const double value = weights_.gain * dg * dg + weights_.phase * dp * dp;
    if (std::isfinite(value)) out.objective = value;
  } catch (const NumericalError&) {
  }
  return out;
}

TuneResult tune_arho(const CroneApprox& skeleton, SlopePair target, const TuneOptions& options) {
  if (!(options.delta > 0.0) || !(options.delta <= 2.0)) throw InputError("tune: delta must lie in (0, 2]");
  const ArhoObjective objective(skeleton, target, options);
  const std::size_t n = objective.pairs();

  std::vector<std::vector<double>> axes;
  if (options.center) {
    if (options.center->size() != n) throw InputError("tune: center length must equal the pole count");
    if (!(options.radius >= 0.0)) throw InputError("tune: radius must be non-negative");
    for (double c : *options.center) {
      if (!(c >= -1.0 && c <= 1.0)) throw InputError("tune: center outside [-1, 1]");
      axes.push_back(local_axis(c, options.radius, options.delta));
    }
  } else {
    axes.assign(n, gamma_axis(options.delta));
  }

  std::vector<TunePoint> grid = evaluate_all(objective, cartesian(axes), options.threads);
  TuneResult result;
  result.grid_points = grid.size();
  result.band_lo = objective.band_lo();
  result.band_hi = objective.band_hi();
  if (grid.empty()) throw InputError("tune: empty search grid");

  std::vector<TunePoint> ranked = grid;
  std::sort(ranked.begin(), ranked.end(), better);
  if (!std::isfinite(ranked.front().objective))
    throw NumericalError("tune: describing function not computable at any grid point");
  result.best = ranked.front();
  result.top.assign(ranked.begin(), ranked.begin() + static_cast<long>(std::min(options.report_size, ranked.size())));

  if (options.refine && options.refine_step < options.delta) {
    const auto candidates = std::min<std::size_t>(static_cast<std::size_t>(std::max(options.refine_candidates, 0)), ranked.size());
    std::vector<std::vector<double>> points;
    for (std::size_t c = 0; c < candidates; ++c) {
      if (!std::isfinite(ranked[c].objective)) break;
      std::vector<std::vector<double>> local;
      for (double g : ranked[c].gamma) local.push_back(local_axis(g, options.delta / 2.0, options.refine_step));
      auto pts = cartesian(local);
      points.insert(points.end(), std::make_move_iterator(pts.begin()), std::make_move_iterator(pts.end()));
    }
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    result.refine_points = points.size();
    for (const auto& p : evaluate_all(objective, points, options.threads))
      if (better(p, result.best)) result.best = p;
  }

  if (options.keep_all) result.evaluated = std::move(grid);
  return result;
}

}  // namespace resetloop
