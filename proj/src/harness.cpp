#include "fsde/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "fsde/errors.hpp"
#include "fsde/fbm.hpp"
#include "fsde/stoch_integral.hpp"

namespace fsde {

std::string to_string(Method m) {
  switch (m) {
    case Method::volterra: return "volterra";
    case Method::picard: return "picard";
    case Method::exact_linear: return "exact-linear";
    case Method::embedded: return "embedded";
  }
  return "?";
}

Method method_from_string(const std::string& name) {
  if (name == "volterra") return Method::volterra;
  if (name == "picard") return Method::picard;
  if (name == "exact-linear") return Method::exact_linear;
  if (name == "embedded") return Method::embedded;
  throw DomainError("unknown method '" + name + "' (volterra, picard, exact-linear, embedded)");
}

namespace {

using PathFn = std::function<std::vector<double>(std::uint64_t)>;

struct LagPlan {
  std::size_t cells;
  std::size_t first, last;  // base indices first..last inclusive
};

struct Accumulator {
  std::vector<Moments> node;
  std::vector<Moments> lag;
  std::vector<std::uint64_t> failed;
  std::vector<std::pair<std::uint64_t, double>> terminal;
  std::vector<std::pair<std::uint64_t, std::vector<double>>> kept;

  void merge(Accumulator&& o) {
    for (std::size_t i = 0; i < node.size(); ++i) node[i].merge(o.node[i]);
    for (std::size_t i = 0; i < lag.size(); ++i) lag[i].merge(o.lag[i]);
    failed.insert(failed.end(), o.failed.begin(), o.failed.end());
    terminal.insert(terminal.end(), o.terminal.begin(), o.terminal.end());
    for (auto& k : o.kept) kept.push_back(std::move(k));
  }
};

// Runs body(chunk) for every chunk on up to `workers` threads and folds the
// per-chunk results along a fixed pairwise tree keyed by chunk index.
template <class Acc, class Body>
Acc run_chunks(std::size_t n_chunks, std::size_t workers, Body body) {
  std::vector<Acc> parts(n_chunks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      try {
        parts[c] = body(c);
      } catch (...) {
        std::lock_guard lock(fatal_mutex);
        if (!fatal) fatal = std::current_exception();
      }
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n_chunks, 1));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (fatal) std::rethrow_exception(fatal);
  for (std::size_t width = 1; width < n_chunks; width *= 2)
    for (std::size_t i = 0; i + width < n_chunks; i += 2 * width) parts[i].merge(std::move(parts[i + width]));
  return std::move(parts.front());
}

std::vector<LagPlan> plan_lags(const TimeGrid& grid, const EnsembleOptions& options) {
  if (!(options.stationary_fraction > 0.0 && options.stationary_fraction <= 1.0))
    throw DomainError("stationary_fraction must lie in (0, 1]");
  const std::size_t N = grid.n_steps();
  const auto window = static_cast<std::size_t>(std::floor(options.stationary_fraction * static_cast<double>(N)));
  const std::size_t start = N - window;
  std::vector<LagPlan> out;
  for (double lag : options.lags) {
    if (!(lag >= 0.0)) throw DomainError("covariance lags must be non-negative");
    const auto cells = static_cast<std::size_t>(std::llround(lag / grid.dt()));
    if (cells > window) continue;
    out.push_back({cells, start, N - cells});
  }
  return out;
}

EnsembleResult aggregate(const TimeGrid& grid, std::size_t n_paths, const EnsembleOptions& options,
                         const PathFn& make_path) {
  if (n_paths < 2) throw DomainError("an ensemble needs at least two paths");
  if (options.chunk_size == 0) throw DomainError("chunk_size must be positive");
  const auto lags = plan_lags(grid, options);
  const std::size_t chunks = (n_paths + options.chunk_size - 1) / options.chunk_size;

  auto acc = run_chunks<Accumulator>(chunks, options.workers, [&](std::size_t c) {
    Accumulator a;
    a.node.resize(grid.size());
    a.lag.resize(lags.size());
    const std::size_t lo = c * options.chunk_size, hi = std::min(n_paths, lo + options.chunk_size);
    for (std::size_t p = lo; p < hi; ++p) {
      std::vector<double> x;
      try {
        x = make_path(p);
      } catch (const NumericalError&) {
        a.failed.push_back(p);
        continue;
      }
      if (x.size() != grid.size()) throw ContractError("path length does not match the grid");
      bool finite = true;
      for (double v : x) finite = finite && std::isfinite(v);
      if (!finite) {
        a.failed.push_back(p);
        continue;
      }
      for (std::size_t n = 0; n < x.size(); ++n) a.node[n].push(x[n]);
      for (std::size_t l = 0; l < lags.size(); ++l) {
        const auto& lp = lags[l];
        double s = 0.0;
        for (std::size_t n = lp.first; n <= lp.last; ++n) s += x[n] * x[n + lp.cells];
        a.lag[l].push(s / static_cast<double>(lp.last - lp.first + 1));
      }
      a.terminal.emplace_back(p, x.back());
      if (p < options.keep_paths) a.kept.emplace_back(p, std::move(x));
    }
    return a;
  });

  if (!acc.failed.empty()) {
    std::sort(acc.failed.begin(), acc.failed.end());
    std::string ids;
    for (std::size_t i = 0; i < acc.failed.size() && i < 20; ++i) ids += (i ? "," : "") + std::to_string(acc.failed[i]);
    throw EnsembleError(std::to_string(acc.failed.size()) + " of " + std::to_string(n_paths) +
                            " paths failed; streams " + ids + (acc.failed.size() > 20 ? ",..." : ""),
                        acc.failed);
  }

  EnsembleResult r;
  r.n_paths = n_paths;
  r.grid = grid;
  for (const auto& m : acc.node) {
    r.mean.push_back(m.mean());
    r.mean_se.push_back(m.mean_se());
    r.variance.push_back(m.variance());
    r.variance_se.push_back(m.variance_se());
  }
  for (std::size_t l = 0; l < lags.size(); ++l) {
    const auto& lp = lags[l];
    double mm = 0.0;
    for (std::size_t n = lp.first; n <= lp.last; ++n) mm += r.mean[n] * r.mean[n + lp.cells];
    mm /= static_cast<double>(lp.last - lp.first + 1);
    r.lag_covariances.push_back(
        {static_cast<double>(lp.cells) * grid.dt(), lp.cells, acc.lag[l].mean() - mm, acc.lag[l].mean_se()});
  }
  std::sort(acc.terminal.begin(), acc.terminal.end());
  for (const auto& [p, v] : acc.terminal) r.terminal.push_back(v);
  std::sort(acc.kept.begin(), acc.kept.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [p, x] : acc.kept) r.kept_paths.push_back(std::move(x));
  return r;
}

}  // namespace

EnsembleResult run_ensemble(const ModelSpec& model, Method method, std::size_t n_paths, const TimeGrid& grid,
                            std::uint64_t seed, const EnsembleOptions& options) {
  PathFn make_path;
  std::shared_ptr<const void> keep_alive;
  switch (method) {
    case Method::volterra:
    case Method::picard: {
      auto fbm = std::make_shared<CirculantFbmGenerator>(grid, HurstParam(model.hurst));
      auto gop = std::make_shared<GOperator>(grid, model.alpha, model.hurst);
      keep_alive = fbm;
      make_path = [=, &model, &options](std::uint64_t p) {
        const RngSpec rng{seed, p};
        const auto g = gop->apply(fbm->sample(rng));
        const double x0 = model.x0.draw(rng);
        if (method == Method::volterra) return solve_volterra(model, g, x0).values;
        return solve_picard(model, g, x0, options.picard_tol, options.picard_max_iter).path.values;
      };
      break;
    }
    case Method::exact_linear: {
      if (model.potential.kind() != Potential::Kind::linear)
        throw DomainError("exact-linear needs a linear potential");
      auto fbm = std::make_shared<CirculantFbmGenerator>(grid, HurstParam(model.hurst));
      auto op = std::make_shared<LinearPathOperator>(
          LinearModel(model.potential.k(), model.alpha, model.hurst, model.x0.mean), grid);
      keep_alive = fbm;
      make_path = [=, &model](std::uint64_t p) {
        const RngSpec rng{seed, p};
        return op->apply(fbm->sample(rng), model.x0.draw(rng)).values;
      };
      break;
    }
    case Method::embedded: {
      const ModeSet modes = options.modes ? *options.modes
                                          : fit_modes(model.alpha, options.embedded_t_min, options.embedded_t_max,
                                                      options.embedded_modes);
      auto integ = std::make_shared<EmbeddedIntegrator>(model.potential, modes, grid.dt());
      make_path = [=, &model](std::uint64_t p) {
        const RngSpec rng{seed, p};
        return integ->simulate(grid, rng, model.x0.draw(rng)).values;
      };
      break;
    }
  }
  auto r = aggregate(grid, n_paths, options, make_path);
  r.method = to_string(method);
  r.seed = seed;
  return r;
}

EnsembleResult aggregate_paths(const TimeGrid& grid, std::span<const std::vector<double>> paths,
                               const EnsembleOptions& options) {
  auto r = aggregate(grid, paths.size(), options, [&](std::uint64_t p) { return paths[p]; });
  r.method = "external";
  return r;
}

ExponentFit msd_exponent(const EnsembleResult& result, double t_lo, double t_hi) {
  const auto t = result.grid.times();
  return fit_power_law(t, result.variance, t_lo, t_hi);
}

GibbsCdf::GibbsCdf(const Potential& potential, double temperature) {
  if (!(temperature > 0.0)) throw DomainError("temperature must be positive");
  if (!potential.normalizable()) throw DomainError("exp(-V) is not normalizable for " + potential.name());
  auto V = [&](double x) { return potential.value(x) / temperature; };

  // Widen until the density is negligible at both ends.
  double X = 1.0, vmin = std::min({V(0.0), V(-1.0), V(1.0)});
  for (;;) {
    for (int i = 0; i <= 2000; ++i) vmin = std::min(vmin, V(-X + 2.0 * X * i / 2000.0));
    if (V(X) - vmin > 60.0 && V(-X) - vmin > 60.0) break;
    X *= 2.0;
    if (X > 1e8) throw DomainError("exp(-V) decays too slowly to normalize");
  }
  constexpr int n = 40001;
  x_.resize(n);
  cdf_.resize(n);
  std::vector<double> dens(n);
  for (int i = 0; i < n; ++i) {
    x_[i] = -X + 2.0 * X * i / (n - 1);
    dens[i] = std::exp(-(V(x_[i]) - vmin));
  }
  cdf_[0] = 0.0;
  for (int i = 1; i < n; ++i) cdf_[i] = cdf_[i - 1] + 0.5 * (dens[i] + dens[i - 1]) * (x_[i] - x_[i - 1]);
  const double Z = cdf_.back();
  double m1 = 0.0, m2 = 0.0;
  for (int i = 1; i < n; ++i) {
    const double w = 0.5 * (x_[i] - x_[i - 1]) / Z;
    m1 += w * (x_[i] * dens[i] + x_[i - 1] * dens[i - 1]);
    m2 += w * (x_[i] * x_[i] * dens[i] + x_[i - 1] * x_[i - 1] * dens[i - 1]);
  }
  for (auto& c : cdf_) c /= Z;
  variance_ = m2 - m1 * m1;
}

double GibbsCdf::operator()(double x) const {
  if (x <= x_.front()) return 0.0;
  if (x >= x_.back()) return 1.0;
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const auto i = static_cast<std::size_t>(it - x_.begin());
  const double w = (x - x_[i - 1]) / (x_[i] - x_[i - 1]);
  return cdf_[i - 1] + w * (cdf_[i] - cdf_[i - 1]);
}

double GibbsCdf::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), p);
  const auto i = static_cast<std::size_t>(it - cdf_.begin());
  if (i == 0) return x_.front();
  const double d = cdf_[i] - cdf_[i - 1];
  return d > 0.0 ? x_[i - 1] + (p - cdf_[i - 1]) / d * (x_[i] - x_[i - 1]) : x_[i];
}

GibbsReport gibbs_test(const EnsembleResult& result, const Potential& potential, double temperature) {
  if (!(temperature > 0.0)) throw DomainError("temperature must be positive");
  if (!potential.normalizable()) throw DomainError("exp(-V) is not normalizable for " + potential.name());
  const auto& xs = result.terminal;
  if (xs.size() < 2) throw ContractError("gibbs_test needs terminal samples");
  GibbsReport rep;
  Moments m;
  for (double v : xs) m.push(v);
  rep.variance = m.variance();
  rep.variance_se = m.variance_se();
  if (potential.kind() == Potential::Kind::linear) {
    const double sd = std::sqrt(temperature / potential.k());
    rep.expected_variance = sd * sd;
    rep.gibbs = ks_test(xs, [sd](double x) { return normal_cdf(x, 0.0, sd); },
                        "N(0, " + std::to_string(sd * sd) + ")");
  } else {
    auto cdf = std::make_shared<GibbsCdf>(potential, temperature);
    rep.expected_variance = cdf->variance();
    rep.gibbs = ks_test(xs, [cdf](double x) { return (*cdf)(x); }, "exp(-V) for " + potential.name());
  }
  rep.normality = jarque_bera(xs);
  const double mu = m.mean(), sd = std::sqrt(rep.variance);
  rep.fitted_normal = ks_test(xs, [mu, sd](double x) { return normal_cdf(x, mu, sd); }, "fitted normal");
  rep.variance_mismatch = std::fabs(rep.variance - rep.expected_variance) > 4.0 * rep.variance_se;
  rep.pass = rep.gibbs.p_value > 0.01;
  rep.gaussian_pass = rep.normality.p_value > 0.01 && rep.fitted_normal.p_value > 0.01;
  return rep;
}

DistributionTest gibbs_chi_square(std::span<const double> samples, const Potential& potential, std::size_t bins,
                                  double temperature) {
  if (bins < 2) throw DomainError("need at least two bins");
  if (samples.empty()) throw ContractError("no samples");
  GibbsCdf cdf(potential, temperature);
  std::vector<double> edges;
  for (std::size_t i = 1; i < bins; ++i) edges.push_back(cdf.quantile(static_cast<double>(i) / bins));
  std::vector<double> observed(bins, 0.0), expected(bins, static_cast<double>(samples.size()) / bins);
  for (double x : samples)
    observed[static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), x) - edges.begin())] += 1.0;
  auto t = chi_square_test(observed, expected, 0);
  t.reference = "exp(-V) for " + potential.name() + ", " + std::to_string(bins) + " equiprobable bins";
  return t;
}

CovarianceReport covariance_test(const EnsembleResult& result, const LinearOracle& oracle) {
  CovarianceReport rep;
  if (result.lag_covariances.empty()) throw ContractError("ensemble carries no lag covariances");
  for (const auto& lc : result.lag_covariances) {
    const auto h = oracle.covariance(lc.lag);
    CovarianceRow row{lc.lag, lc.value, lc.se, h.value, h.abs_error, false};
    row.pass = std::fabs(lc.value - h.value) <= 4.0 * lc.se + h.abs_error;
    rep.rows.push_back(row);
  }
  rep.monotone = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    const auto& a = rep.rows[i - 1];
    const auto& b = rep.rows[i];
    if (b.lag > a.lag && b.measured > a.measured + 4.0 * std::hypot(a.se, b.se)) rep.monotone = false;
  }
  rep.pass = rep.monotone && std::all_of(rep.rows.begin(), rep.rows.end(), [](const auto& r) { return r.pass; });
  return rep;
}

FdtReport fdt_noise_check(const ModeSet& modes, std::span<const double> lags, std::size_t n_paths, double dt,
                          std::uint64_t seed, std::size_t workers) {
  if (n_paths < 2) throw DomainError("fdt_noise_check needs at least two paths");
  if (lags.empty()) throw DomainError("no lags requested");
  std::vector<std::size_t> cells;
  for (double l : lags) {
    if (!(l >= 0.0)) throw DomainError("lags must be non-negative");
    cells.push_back(static_cast<std::size_t>(std::llround(l / dt)));
  }
  const std::size_t max_cells = std::max<std::size_t>(1, *std::max_element(cells.begin(), cells.end()));
  const TimeGrid grid(dt, max_cells);
  constexpr std::size_t chunk = 64;
  const std::size_t chunks = (n_paths + chunk - 1) / chunk;

  struct Acc {
    std::vector<Moments> m;
    void merge(Acc&& o) {
      for (std::size_t i = 0; i < m.size(); ++i) m[i].merge(o.m[i]);
    }
  };
  auto acc = run_chunks<Acc>(chunks, workers, [&](std::size_t c) {
    Acc a;
    a.m.resize(cells.size());
    for (std::size_t p = c * chunk; p < std::min(n_paths, (c + 1) * chunk); ++p) {
      const auto R = simulate_free_noise(modes, grid, {seed, p});
      for (std::size_t i = 0; i < cells.size(); ++i) a.m[i].push(R[0] * R[cells[i]]);
    }
    return a;
  });

  FdtReport rep;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    FdtRow row;
    row.lag = static_cast<double>(cells[i]) * dt;
    row.measured = acc.m[i].mean();
    row.se = acc.m[i].mean_se();
    row.fitted = modes.kernel(row.lag);
    row.target = row.lag > 0.0 ? power_kernel(row.lag, modes.alpha) : std::numeric_limits<double>::quiet_NaN();
    row.mc_pass = std::fabs(row.measured - row.fitted) <= 4.0 * row.se;
    // The fit error is only recorded on [t_min, t_max].
    const bool in_range = row.lag >= modes.t_min && row.lag <= modes.t_max;
    row.fit_pass = !in_range || std::fabs(row.fitted - row.target) <= modes.fit_error * row.target * (1.0 + 1e-9);
    rep.rows.push_back(row);
  }
  rep.pass = std::all_of(rep.rows.begin(), rep.rows.end(), [](const auto& r) { return r.mc_pass && r.fit_pass; });
  return rep;
}

EquipartitionReport gle_equipartition(double m, const Potential& potential, const ModeSet& modes,
                                      const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed,
                                      std::size_t workers, double rel_band, double q0) {
  if (n_paths < 2) throw DomainError("gle_equipartition needs at least two paths");
  constexpr std::size_t chunk = 32;
  const std::size_t chunks = (n_paths + chunk - 1) / chunk;
  struct Acc {
    Moments v, q;
    std::vector<std::uint64_t> failed;
    void merge(Acc&& o) {
      v.merge(o.v);
      q.merge(o.q);
      failed.insert(failed.end(), o.failed.begin(), o.failed.end());
    }
  };
  // Surface a bad step size once, before any worker starts.
  if (grid.dt() > gle_max_dt(m, potential)) (void)simulate_gle_mass(m, potential, modes, grid, {seed, 0}, q0, 0.0);
  auto acc = run_chunks<Acc>(chunks, workers, [&](std::size_t c) {
    Acc a;
    for (std::size_t p = c * chunk; p < std::min(n_paths, (c + 1) * chunk); ++p) {
      try {
        const auto g = simulate_gle_mass(m, potential, modes, grid, {seed, p}, q0, 0.0);
        a.v.push(g.v.back());
        a.q.push(g.q.back());
      } catch (const NumericalError&) {
        a.failed.push_back(p);
      }
    }
    return a;
  });
  if (!acc.failed.empty()) {
    std::sort(acc.failed.begin(), acc.failed.end());
    throw EnsembleError(std::to_string(acc.failed.size()) + " GLE paths failed", acc.failed);
  }
  EquipartitionReport r;
  r.mass = m;
  r.var_v = acc.v.variance();
  r.var_v_se = acc.v.variance_se();
  r.var_q = acc.q.variance();
  r.var_q_se = acc.q.variance_se();
  r.expected_v = 1.0 / m;
  r.pass = std::fabs(r.var_v - r.expected_v) <= rel_band * r.expected_v;
  return r;
}

std::string claims_to_json(std::span<const Claim> claims) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : claims)
    j.push_back({{"claim", c.claim}, {"expected", c.expected}, {"measured", c.measured}, {"band", c.band},
                 {"pass", c.pass}});
  return j.dump(2);
}

}  // namespace fsde
