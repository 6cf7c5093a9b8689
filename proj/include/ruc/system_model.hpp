#ifndef RUC_SYSTEM_MODEL_HPP
#define RUC_SYSTEM_MODEL_HPP

// Power-system and uncertainty data: generators, wind farms, loads, the DC
// network with its shift-factor matrix, piecewise-linear cost curves, and the
// forecast-error bands that bound the wind uncertainty set.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ruc/errors.hpp"
#include "ruc/gaussian.hpp"

namespace ruc {

/// C(p) = a p^2 + b p, $/h with p in MW.
struct QuadraticCost {
  double a = 0.0;
  double b = 0.0;

  [[nodiscard]] double operator()(double p) const { return a * p * p + b * p; }
};

struct InitialState {
  bool on = false;
  int hours = 1;  ///< hours already spent in the current on/off status
  double p0 = 0.0;
};

struct Generator {
  std::string id;
  int bus = 0;
  double p_min = 0.0;
  double p_max = 0.0;
  double ramp_up = 0.0;
  double ramp_down = 0.0;
  int min_on = 1;
  int min_off = 1;
  double startup_cost = 0.0;
  double no_load_cost = 0.0;
  QuadraticCost cost;
  InitialState initial;
};

/// Explicit band limits that replace the Gaussian construction for one farm.
struct BandOverride {
  std::vector<double> upper;
  std::vector<double> lower;
};

struct WindFarm {
  std::string id;
  int bus = 0;
  double capacity = 0.0;
  std::vector<double> forecast;           ///< MW per period
  double sigma_base = 0.0;                ///< forecast-error std. dev. as a fraction
  std::vector<double> price_coefficient;  ///< $/MWh per period; empty means zero
  std::optional<BandOverride> band_override;
};

struct Load {
  std::string id;
  int bus = 0;
  std::vector<double> demand;  ///< MW per period
};

struct Line {
  std::string id;
  int from = 0;
  int to = 0;
  double reactance = 0.0;  ///< p.u.
  double capacity = 0.0;   ///< MW
};

struct Network {
  std::vector<int> buses;
  int reference_bus = 0;
  std::vector<Line> lines;
  /// lines x buses; column order follows `buses`. Filled by compute_ptdf.
  Eigen::MatrixXd ptdf;

  [[nodiscard]] std::optional<std::size_t> bus_index(int bus) const {
    const auto it = std::find(buses.begin(), buses.end(), bus);
    if (it == buses.end()) return std::nullopt;
    return static_cast<std::size_t>(it - buses.begin());
  }

  /// Shift factor of line `l` for an injection at `bus`, withdrawn at the reference bus.
  [[nodiscard]] double shift_factor(std::size_t l, int bus) const {
    const auto n = bus_index(bus);
    if (!n) throw InputError("unknown bus " + std::to_string(bus));
    return ptdf(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(*n));
  }
};

/// How the per-period forecast-error deviation scales.
enum class SigmaScaling {
  Forecast,  ///< sigma_mt = sigma_m * forecast_mt * (1 + e^{-(T-t)})
  Capacity,  ///< sigma_mt = sigma_m * capacity_m * (1 + e^{-(T-t)})
};

struct UncertaintyConfig {
  int gamma_t = 0;  ///< deviations allowed per farm over the horizon
  int gamma_s = 0;  ///< deviations allowed per period over all farms
  double band_confidence = 0.99;
  SigmaScaling sigma_scaling = SigmaScaling::Forecast;
  // Confidence levels behind the budgets. Carried along for reporting only.
  std::optional<double> beta_t;
  std::optional<double> beta_s;
};

struct UncertaintyBands {
  std::vector<double> upper;
  std::vector<double> lower;
  std::vector<double> sigma;  ///< per-period standard deviation used for sampling
};

struct SystemCase {
  std::string name;
  std::vector<Generator> generators;
  std::vector<WindFarm> wind_farms;
  std::vector<Load> loads;
  Network network;
  int horizon = 0;
  UncertaintyConfig uncertainty;
  std::vector<UncertaintyBands> bands;  ///< one entry per wind farm

  [[nodiscard]] int num_generators() const { return static_cast<int>(generators.size()); }
  [[nodiscard]] int num_farms() const { return static_cast<int>(wind_farms.size()); }
  [[nodiscard]] int num_loads() const { return static_cast<int>(loads.size()); }
  [[nodiscard]] int num_lines() const { return static_cast<int>(network.lines.size()); }

  [[nodiscard]] double total_demand(int t) const {
    double d = 0.0;
    for (const auto& load : loads) d += load.demand[static_cast<std::size_t>(t)];
    return d;
  }
};

// ---------------------------------------------------------------------------
// Uncertainty bands

/// Forecast-error bands for one farm.
///
/// sigma_mt = sigma_m * scale_mt * (1 + e^{-(T-t)}) with t counted from 1 and
/// scale_mt the forecast (or the capacity, under SigmaScaling::Capacity). The
/// band is forecast +/- z sigma_mt with z the two-sided Gaussian quantile for
/// `band_confidence`, clipped to [0, capacity].
inline UncertaintyBands build_uncertainty_bands(const WindFarm& farm, int horizon,
                                                double band_confidence,
                                                SigmaScaling scaling = SigmaScaling::Forecast) {
  if (static_cast<int>(farm.forecast.size()) != horizon) {
    throw InputError("wind farm '" + farm.id + "': forecast has " +
                     std::to_string(farm.forecast.size()) + " periods, expected " +
                     std::to_string(horizon));
  }
  if (!(farm.sigma_base >= 0.0) || !std::isfinite(farm.sigma_base)) {
    throw InputError("wind farm '" + farm.id + "': sigma_base must be finite and >= 0");
  }
  const double z = two_sided_quantile(band_confidence);
  UncertaintyBands bands;
  bands.upper.resize(farm.forecast.size());
  bands.lower.resize(farm.forecast.size());
  bands.sigma.resize(farm.forecast.size());
  for (int t = 0; t < horizon; ++t) {
    const auto i = static_cast<std::size_t>(t);
    const double w = farm.forecast[i];
    if (!std::isfinite(w)) {
      throw InputError("wind farm '" + farm.id + "': non-finite forecast at period " +
                       std::to_string(t + 1));
    }
    const double scale = scaling == SigmaScaling::Forecast ? w : farm.capacity;
    const double sigma = farm.sigma_base * scale * (1.0 + std::exp(-(horizon - (t + 1))));
    bands.sigma[i] = sigma;
    bands.upper[i] = std::min(farm.capacity, w + z * sigma);
    bands.lower[i] = std::max(0.0, w - z * sigma);
  }
  return bands;
}

/// Bands taken verbatim from an override; sigma is recovered from the wider side.
inline UncertaintyBands bands_from_override(const WindFarm& farm, const BandOverride& band,
                                            double band_confidence) {
  const double z = two_sided_quantile(band_confidence);
  UncertaintyBands bands{band.upper, band.lower, std::vector<double>(band.upper.size())};
  for (std::size_t t = 0; t < band.upper.size(); ++t) {
    const double w = farm.forecast[t];
    bands.sigma[t] = std::max(band.upper[t] - w, w - band.lower[t]) / z;
  }
  return bands;
}

/// Rebuilds `c.bands` from the farms and the uncertainty configuration.
inline void rebuild_bands(SystemCase& c) {
  c.bands.clear();
  for (const auto& farm : c.wind_farms) {
    if (farm.band_override) {
      c.bands.push_back(bands_from_override(farm, *farm.band_override,
                                            c.uncertainty.band_confidence));
    } else {
      c.bands.push_back(build_uncertainty_bands(farm, c.horizon, c.uncertainty.band_confidence,
                                                c.uncertainty.sigma_scaling));
    }
  }
}

// ---------------------------------------------------------------------------
// DC power flow

namespace detail {

inline bool network_connected(const Network& net) {
  if (net.buses.empty()) return false;
  std::map<int, std::vector<int>> adj;
  for (int b : net.buses) adj[b];
  for (const auto& l : net.lines) {
    adj[l.from].push_back(l.to);
    adj[l.to].push_back(l.from);
  }
  std::set<int> seen{net.buses.front()};
  std::queue<int> frontier;
  frontier.push(net.buses.front());
  while (!frontier.empty()) {
    const int b = frontier.front();
    frontier.pop();
    for (int n : adj[b]) {
      if (seen.insert(n).second) frontier.push(n);
    }
  }
  return seen.size() == net.buses.size();
}

}  // namespace detail

/// Shift-factor (PTDF) matrix of a DC network: lines x buses, flows oriented from -> to.
///
/// Column n holds the line flows caused by a unit injection at bus n withdrawn at the
/// reference bus, so the reference column is identically zero.
inline Eigen::MatrixXd compute_ptdf(const Network& net) {
  const auto ref = net.bus_index(net.reference_bus);
  if (!ref) throw InputError("reference bus " + std::to_string(net.reference_bus) + " not in network");
  const auto n_bus = static_cast<Eigen::Index>(net.buses.size());
  const auto n_line = static_cast<Eigen::Index>(net.lines.size());

  std::vector<std::pair<Eigen::Index, Eigen::Index>> ends;
  ends.reserve(net.lines.size());
  for (const auto& l : net.lines) {
    if (!(l.reactance > 0.0) || !std::isfinite(l.reactance)) {
      throw InputError("line '" + l.id + "': reactance must be positive and finite");
    }
    const auto f = net.bus_index(l.from);
    const auto t = net.bus_index(l.to);
    if (!f || !t) throw InputError("line '" + l.id + "': endpoint bus not in network");
    if (*f == *t) throw InputError("line '" + l.id + "': both ends on the same bus");
    ends.emplace_back(static_cast<Eigen::Index>(*f), static_cast<Eigen::Index>(*t));
  }
  if (!detail::network_connected(net)) throw InputError("network is not connected");

  Eigen::MatrixXd ptdf = Eigen::MatrixXd::Zero(n_line, n_bus);
  if (n_bus <= 1 || n_line == 0) return ptdf;

  // Reduced susceptance matrix with the reference row/column removed.
  const auto r = static_cast<Eigen::Index>(*ref);
  auto reduced = [r](Eigen::Index i) { return i < r ? i : i - 1; };
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n_bus - 1, n_bus - 1);
  for (Eigen::Index l = 0; l < n_line; ++l) {
    const double y = 1.0 / net.lines[static_cast<std::size_t>(l)].reactance;
    const auto [f, t] = ends[static_cast<std::size_t>(l)];
    if (f != r) b(reduced(f), reduced(f)) += y;
    if (t != r) b(reduced(t), reduced(t)) += y;
    if (f != r && t != r) {
      b(reduced(f), reduced(t)) -= y;
      b(reduced(t), reduced(f)) -= y;
    }
  }
  const Eigen::MatrixXd x_red = b.ldlt().solve(Eigen::MatrixXd::Identity(n_bus - 1, n_bus - 1));

  // Full reactance matrix with zero reference row/column.
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n_bus, n_bus);
  for (Eigen::Index i = 0; i < n_bus; ++i) {
    if (i == r) continue;
    for (Eigen::Index j = 0; j < n_bus; ++j) {
      if (j == r) continue;
      x(i, j) = x_red(reduced(i), reduced(j));
    }
  }
  for (Eigen::Index l = 0; l < n_line; ++l) {
    const double y = 1.0 / net.lines[static_cast<std::size_t>(l)].reactance;
    const auto [f, t] = ends[static_cast<std::size_t>(l)];
    ptdf.row(l) = y * (x.row(f) - x.row(t));
  }
  // Exact zeros on the reference column.
  ptdf.col(r).setZero();
  return ptdf;
}

// ---------------------------------------------------------------------------
// Piecewise-linear cost

/// Convex piecewise-linear approximation of a quadratic cost on [p_min, p_max].
struct PiecewiseLinearCost {
  std::vector<double> breakpoints;  ///< K+1 points, MW
  std::vector<double> slopes;       ///< K secant slopes, $/MWh
  double intercept = 0.0;           ///< C(p_min), $/h

  [[nodiscard]] int segments() const { return static_cast<int>(slopes.size()); }
  [[nodiscard]] double width(int k) const {
    const auto i = static_cast<std::size_t>(k);
    return breakpoints[i + 1] - breakpoints[i];
  }

  [[nodiscard]] double operator()(double p) const {
    double v = intercept;
    for (std::size_t k = 0; k < slopes.size(); ++k) {
      const double fill = std::clamp(p - breakpoints[k], 0.0, breakpoints[k + 1] - breakpoints[k]);
      v += slopes[k] * fill;
    }
    return v;
  }
};

inline PiecewiseLinearCost piecewise_linearize(const QuadraticCost& cost, double p_min,
                                               double p_max, int segments) {
  if (cost.a < 0.0) throw InputError("piecewise_linearize: quadratic coefficient < 0 (non-convex)");
  if (segments < 1) throw InputError("piecewise_linearize: need at least one segment");
  if (p_max < p_min) throw InputError("piecewise_linearize: p_max < p_min");
  PiecewiseLinearCost pwl;
  pwl.intercept = cost(p_min);
  if (p_max == p_min) {
    pwl.breakpoints = {p_min};
    return pwl;
  }
  const double h = (p_max - p_min) / segments;
  pwl.breakpoints.resize(static_cast<std::size_t>(segments) + 1);
  for (int k = 0; k <= segments; ++k) pwl.breakpoints[static_cast<std::size_t>(k)] = p_min + k * h;
  pwl.breakpoints.back() = p_max;
  for (int k = 0; k < segments; ++k) {
    const double lo = pwl.breakpoints[static_cast<std::size_t>(k)];
    const double hi = pwl.breakpoints[static_cast<std::size_t>(k) + 1];
    pwl.slopes.push_back((cost(hi) - cost(lo)) / (hi - lo));
  }
  return pwl;
}

// ---------------------------------------------------------------------------
// Validation

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string path;  ///< JSON-pointer-style location, e.g. /system/loads/2/demand
  std::string message;
};

[[nodiscard]] inline bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

/// All invariant violations of a case. Empty iff the case is well formed.
inline std::vector<Diagnostic> validate_case(const SystemCase& c) {
  std::vector<Diagnostic> out;
  auto error = [&](std::string path, std::string msg) {
    out.push_back({Severity::Error, std::move(path), std::move(msg)});
  };
  auto finite_nonneg = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x) && x >= 0.0; });
  };
  const int T = c.horizon;
  if (T < 1) error("/profiles/horizon", "horizon must be at least 1");
  const auto T_size = static_cast<std::size_t>(std::max(T, 0));

  std::set<int> buses;
  for (int b : c.network.buses) {
    if (!buses.insert(b).second) error("/system/buses", "duplicate bus " + std::to_string(b));
  }
  auto check_bus = [&](const std::string& path, int bus) {
    if (!buses.count(bus)) error(path + "/bus", "bus " + std::to_string(bus) + " not in network");
  };
  if (!buses.count(c.network.reference_bus)) {
    error("/system/reference_bus",
          "reference bus " + std::to_string(c.network.reference_bus) + " not in network");
  }

  std::set<std::string> ids;
  auto check_id = [&](const std::string& path, const std::string& id) {
    if (id.empty()) error(path + "/id", "empty device id");
    else if (!ids.insert(id).second) error(path + "/id", "duplicate device id '" + id + "'");
  };

  for (std::size_t i = 0; i < c.generators.size(); ++i) {
    const auto& g = c.generators[i];
    const std::string path = "/system/generators/" + std::to_string(i);
    check_id(path, g.id);
    check_bus(path, g.bus);
    if (!(g.p_min >= 0.0 && g.p_min <= g.p_max) || !std::isfinite(g.p_max)) {
      error(path, "generator '" + g.id + "': need 0 <= p_min <= p_max");
    }
    if (!(g.ramp_up > 0.0) || !(g.ramp_down > 0.0)) {
      error(path, "generator '" + g.id + "': ramp limits must be positive");
    }
    if (g.min_on < 1 || g.min_off < 1 || (T >= 1 && (g.min_on > T || g.min_off > T))) {
      error(path, "generator '" + g.id + "': minimum on/off times must lie in [1, horizon]");
    }
    if (g.cost.a < 0.0) error(path + "/cost_a", "generator '" + g.id + "': non-convex cost (a < 0)");
    if (g.startup_cost < 0.0 || g.no_load_cost < 0.0) {
      error(path, "generator '" + g.id + "': negative start-up or no-load cost");
    }
    if (g.initial.hours < 1) error(path + "/initial/hours", "generator '" + g.id + "': hours must be >= 1");
    if (g.initial.on && (g.initial.p0 < g.p_min - 1e-9 || g.initial.p0 > g.p_max + 1e-9)) {
      error(path + "/initial/p0", "generator '" + g.id + "': initial output outside [p_min, p_max]");
    }
    if (!g.initial.on && g.initial.p0 != 0.0) {
      error(path + "/initial/p0", "generator '" + g.id + "': offline unit with nonzero initial output");
    }
  }

  for (std::size_t i = 0; i < c.wind_farms.size(); ++i) {
    const auto& w = c.wind_farms[i];
    const std::string path = "/system/wind_farms/" + std::to_string(i);
    check_id(path, w.id);
    check_bus(path, w.bus);
    if (!(w.capacity >= 0.0) || !std::isfinite(w.capacity)) {
      error(path + "/capacity", "wind farm '" + w.id + "': capacity must be finite and >= 0");
    }
    if (w.forecast.size() != T_size) {
      error("/profiles/wind/" + w.id, "wind farm '" + w.id + "': forecast has " +
                                          std::to_string(w.forecast.size()) +
                                          " periods, expected " + std::to_string(T));
    } else if (!finite_nonneg(w.forecast) ||
               std::any_of(w.forecast.begin(), w.forecast.end(),
                           [&](double x) { return x > w.capacity + 1e-9; })) {
      error("/profiles/wind/" + w.id, "wind farm '" + w.id + "': forecast outside [0, capacity]");
    }
    if (!(w.sigma_base >= 0.0) || !std::isfinite(w.sigma_base)) {
      error("/uncertainty/sigma_base/" + w.id, "wind farm '" + w.id + "': sigma_base must be >= 0");
    }
    if (!w.price_coefficient.empty()) {
      if (w.price_coefficient.size() != T_size) {
        error("/profiles/price_coefficient/" + w.id,
              "wind farm '" + w.id + "': price coefficients have " +
                  std::to_string(w.price_coefficient.size()) + " periods, expected " +
                  std::to_string(T));
      } else if (!finite_nonneg(w.price_coefficient)) {
        error("/profiles/price_coefficient/" + w.id,
              "wind farm '" + w.id + "': price coefficients must be >= 0");
      }
    }
    if (w.band_override) {
      const auto& b = *w.band_override;
      const std::string bpath = "/uncertainty/bands/" + w.id;
      if (b.upper.size() != T_size || b.lower.size() != T_size) {
        error(bpath, "wind farm '" + w.id + "': band override must have " + std::to_string(T) +
                         " periods");
      } else if (w.forecast.size() == T_size) {
        for (std::size_t t = 0; t < T_size; ++t) {
          if (!(b.lower[t] >= 0.0 && b.lower[t] <= w.forecast[t] + 1e-9 &&
                w.forecast[t] <= b.upper[t] + 1e-9 && b.upper[t] <= w.capacity + 1e-9)) {
            error(bpath, "wind farm '" + w.id + "': band override violates 0 <= lower <= "
                         "forecast <= upper <= capacity at period " + std::to_string(t + 1));
            break;
          }
        }
      }
    }
  }

  for (std::size_t i = 0; i < c.loads.size(); ++i) {
    const auto& l = c.loads[i];
    const std::string path = "/system/loads/" + std::to_string(i);
    check_id(path, l.id);
    check_bus(path, l.bus);
    if (l.demand.size() != T_size) {
      error("/profiles/load/" + l.id, "load '" + l.id + "': profile has " +
                                          std::to_string(l.demand.size()) +
                                          " periods, expected " + std::to_string(T));
    } else if (!finite_nonneg(l.demand)) {
      error("/profiles/load/" + l.id, "load '" + l.id + "': demand must be finite and >= 0");
    }
  }

  bool lines_ok = true;
  for (std::size_t i = 0; i < c.network.lines.size(); ++i) {
    const auto& l = c.network.lines[i];
    const std::string path = "/system/lines/" + std::to_string(i);
    check_id(path, l.id);
    if (!buses.count(l.from) || !buses.count(l.to) || l.from == l.to) {
      error(path, "line '" + l.id + "': endpoints must be two distinct network buses");
      lines_ok = false;
    }
    if (!(l.reactance > 0.0) || !std::isfinite(l.reactance)) {
      error(path + "/reactance", "line '" + l.id + "': reactance must be positive");
      lines_ok = false;
    }
    if (!(l.capacity >= 0.0)) error(path + "/capacity", "line '" + l.id + "': capacity must be >= 0");
  }
  if (lines_ok && !buses.empty() && !detail::network_connected(c.network)) {
    error("/system/lines", "network is not connected");
  }

  const auto& u = c.uncertainty;
  if (u.gamma_t < 0 || (T >= 1 && u.gamma_t > T)) {
    error("/uncertainty/gamma_t", "gamma_t = " + std::to_string(u.gamma_t) + " outside [0, " +
                                      std::to_string(T) + "]");
  }
  if (u.gamma_s < 0 || u.gamma_s > c.num_farms()) {
    error("/uncertainty/gamma_s", "gamma_s = " + std::to_string(u.gamma_s) + " outside [0, " +
                                      std::to_string(c.num_farms()) + "]");
  }
  if (!(u.band_confidence > 0.0 && u.band_confidence < 1.0)) {
    error("/uncertainty/band_confidence", "band_confidence must lie in (0, 1)");
  }

  if (!has_errors(out) && T >= 1) {
    double capacity = 0.0;
    for (const auto& g : c.generators) capacity += g.p_max;
    for (const auto& w : c.wind_farms) capacity += w.capacity;
    double peak = 0.0;
    for (int t = 0; t < T; ++t) peak = std::max(peak, c.total_demand(t));
    if (capacity < peak) {
      out.push_back({Severity::Warning, "/system",
                     "installed capacity " + std::to_string(capacity) + " MW below peak load " +
                         std::to_string(peak) + " MW"});
    }
  }
  return out;
}

}  // namespace ruc

#endif  // RUC_SYSTEM_MODEL_HPP
