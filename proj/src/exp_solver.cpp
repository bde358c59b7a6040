// evolve-halfspace, evolve-wholespace, profiles, particles

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include <fmt/format.h>

#include "experiments_internal.hpp"
#include "kinfp/criteria.hpp"
#include "kinfp/errors.hpp"
#include "kinfp/particles.hpp"
#include "kinfp/svg.hpp"

namespace kinfp::detail {

namespace {

json graded(double lo, double hi, double finest, double ratio, double max_width) {
  return {{"kind", "graded"}, {"min", lo},         {"max", hi},        {"cells", 200},
          {"anchor", 0.0},    {"finest", finest}, {"ratio", ratio}, {"max_width", max_width}};
}

json bump(double x0, double v0, double sx, double sv, double cutoff) {
  return json::array({{{"x0", x0}, {"v0", v0}, {"sx", sx}, {"sv", sv}, {"amplitude", 1.0}, {"cutoff", cutoff}}});
}

std::shared_ptr<const SelfSimilarProfile> shared_profile() {
  return std::make_shared<const SelfSimilarProfile>(SelfSimilarProfile::solve());
}

// Wraps a failed run so that the CLI maps it to the numerical exit code.
Diagnostics run_solver(FokkerPlanckSolver& s, const FokkerPlanckSolver::OutputHook& hook = {}) {
  try {
    return s.run(hook);
  } catch (const SolverAbort&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw NumericalError(fmt::format("solver: {}", e.what()));
  }
}

struct Balance {
  double mass_defect = 0.0;  // |mass + outflow + truncation - mass0| / mass0
  bool mass_monotone = true;
  bool energy_monotone = true;
  bool boundary_nonneg = true;
  std::size_t clipped = 0;
};

Balance balance(const Diagnostics& d) {
  Balance b;
  const double m0 = d.rows.front().mass;
  for (std::size_t k = 0; k < d.rows.size(); ++k) {
    const auto& r = d.rows[k];
    b.mass_defect = std::max(b.mass_defect, std::fabs(r.mass + r.outflow_total + r.truncation_total - m0) / m0);
    if (k > 0) {
      b.mass_monotone = b.mass_monotone && r.mass <= d.rows[k - 1].mass * (1 + 1e-14);
      b.energy_monotone = b.energy_monotone && r.energy <= d.rows[k - 1].energy * (1 + 1e-14);
    }
    b.boundary_nonneg = b.boundary_nonneg && r.boundary_f2 >= 0.0 && r.outflux >= 0.0;
    b.clipped = std::max(b.clipped, r.clipped_total);
  }
  return b;
}

double max_drift(const Diagnostics& d) {
  const double w0 = d.rows.front().wphi;
  double m = 0.0;
  for (const auto& r : d.rows) m = std::max(m, std::fabs(r.wphi / w0 - 1.0));
  return m;
}

SolverConfig refined(SolverConfig c, double factor) {
  c.x = c.x.refined(factor);
  c.v = c.v.refined(factor);
  c.dt /= factor;
  c.fine.dt /= factor;
  return c;
}

}  // namespace

// ------------------------------------------------------------- evolve-halfspace

json halfspace_defaults() {
  json s = solver_defaults(DomainMode::HalfSpace);
  s["x"] = graded(0.0, 40.0, 4e-3, 1.06, 0.15);
  s["v"] = graded(-20.0, 20.0, 0.02, 1.06, 0.15);
  s["dt"] = 4e-3;
  s["t_end"] = 4.0;
  s["f_in"] = bump(1.5, 0.0, 0.25, 0.4, 5.0);
  s["outputs"] = {0.25, 0.5, 1.0, 2.0, 3.0};
  s["R_list"] = {0.25, 1.0};
  return {{"solver", s}, {"refine_factor", 2.0}, {"refined_run", true}};
}

void run_halfspace(Context& cx) {
  const auto cfg = solver_config(cx.p.at("solver"));
  if (cfg.mode != DomainMode::HalfSpace) throw ConfigError("evolve-halfspace: solver.mode must be half-space");
  const double factor = positive(cx.p, "refine_factor");
  if (factor < 1.0) throw ConfigError("evolve-halfspace: refine_factor must be >= 1");
  const bool do_refined = cx.p.at("refined_run").get<bool>();
  const auto rcfg = refined(cfg, factor);
  rcfg.validate();

  const auto prof = shared_profile();
  Stopwatch sw;
  FokkerPlanckSolver ref(cfg, prof);
  const auto d = run_solver(ref);
  cx.timing("reference", sw.seconds());
  const double drift = max_drift(d);
  const auto b = balance(d);
  cx.check("drift_reference", drift <= criteria::kDriftReference, drift,
           fmt::format("max |int f phi~ / t=0 value - 1| = {:.3g} over t in [0, {}] ({} x {} cells)", drift, cfg.t_end,
                       ref.state().nx(), ref.state().nv()));
  cx.check("mass_balance", b.mass_defect <= 1e-10, b.mass_defect,
           fmt::format("mass + outflow + truncation defect {:.3g}", b.mass_defect));
  cx.check("monotone", b.mass_monotone && b.energy_monotone && b.boundary_nonneg, b.clipped * 1.0,
           fmt::format("mass {}, energy {}, boundary terms {}; clipped {}", b.mass_monotone ? "non-increasing" : "grows",
                       b.energy_monotone ? "non-increasing" : "grows", b.boundary_nonneg ? ">= 0" : "negative",
                       b.clipped));
  cx.out.write("diagnostics.csv", d.csv());
  json summary = {{"drift", drift}, {"mass_defect", b.mass_defect}, {"cells", {ref.state().nx(), ref.state().nv()}},
                  {"energy_residual", d.rows.back().energy_residual}, {"outflow", d.rows.back().outflow_total}};

  std::vector<PlotSeries> series{{"reference", {}, {}, true}};
  for (const auto& r : d.rows) series[0].x.push_back(r.t), series[0].y.push_back(r.wphi / d.rows.front().wphi - 1.0);
  if (do_refined) {
    Stopwatch sr;
    FokkerPlanckSolver fine(rcfg, prof);
    const auto dr = run_solver(fine);
    cx.timing("refined", sr.seconds());
    const double rdrift = max_drift(dr);
    cx.check("drift_refined", rdrift <= criteria::kDriftRefined, rdrift,
             fmt::format("max drift {:.3g} with cells and steps refined x{} ({} x {} cells)", rdrift, factor,
                         fine.state().nx(), fine.state().nv()));
    cx.out.write("diagnostics_refined.csv", dr.csv());
    summary["refined"] = {{"drift", rdrift}, {"cells", {fine.state().nx(), fine.state().nv()}}};
    series.push_back({"refined", {}, {}, true});
    for (const auto& r : dr.rows) series[1].x.push_back(r.t), series[1].y.push_back(r.wphi / dr.rows.front().wphi - 1.0);
  }
  cx.out.write("drift.svg", svg_line_plot({"Relative drift of int f phi~", "t", "drift", false, false}, series));
  cx.summary("halfspace", summary);
}

// ------------------------------------------------------------ evolve-wholespace

json wholespace_defaults() {
  json s = solver_defaults(DomainMode::WholeSpace);
  s["x"] = graded(-220.0, 220.0, 0.02, 1.0216, 1e9);
  s["v"] = {{"kind", "uniform"}, {"min", -26.0}, {"max", 26.0}, {"cells", 512}, {"anchor", 0.0},
            {"finest", 0.01},    {"ratio", 1.0},  {"max_width", 1.0}};
  s["dt"] = 5e-3;
  s["t_end"] = 16.0;
  s["f_in"] = bump(0.0, 0.0, 0.1, 0.3, 6.0);
  s["outputs"] = {1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 11.0};
  return {{"solver", s},
          {"window", {1.0, 16.0}},
          {"variable_a", {{"kind", "sin_v"}, {"value", 1.0}, {"base", 1.0}, {"amp", 0.5}, {"freq", 1.0}}},
          {"variable_run", true}};
}

void run_wholespace(Context& cx) {
  const auto cfg = solver_config(cx.p.at("solver"));
  if (cfg.mode != DomainMode::WholeSpace) throw ConfigError("evolve-wholespace: solver.mode must be whole-space");
  const auto win = numbers(cx.p, "window", 2);
  if (win.size() != 2 || !(win[1] > win[0]) || !(win[0] > 0)) throw ConfigError("window: expected [lo, hi], 0 < lo < hi");
  auto vcfg = cfg;
  vcfg.a = coefficient(cx.p.at("variable_a"));
  vcfg.validate();
  const bool do_variable = cx.p.at("variable_run").get<bool>();

  std::string csv = "run,t,sup,sup_t2,mass\n";
  std::vector<PlotSeries> series;
  const auto decay = [&](const SolverConfig& c, const char* name, const char* stage) {
    Stopwatch sw;
    FokkerPlanckSolver s(c);
    const auto d = run_solver(s);
    cx.timing(stage, sw.seconds());
    std::vector<double> t, sup;
    PlotSeries ps{fmt::format("{} (a = {})", name, c.a.description), {}, {}, true};
    for (const auto& r : d.rows) {
      csv += fmt::format("{},{},{},{},{}\n", name, fmt_num(r.t), fmt_num(r.sup), fmt_num(r.sup * r.t * r.t),
                         fmt_num(r.mass));
      if (r.t > 0) t.push_back(r.t), sup.push_back(r.sup), ps.x.push_back(r.t), ps.y.push_back(r.sup);
    }
    series.push_back(std::move(ps));
    return std::tuple{fit_exponent(t, sup, win[0], win[1], FitKind::Power), d, s.state().nx(), s.state().nv()};
  };

  const auto [fit, d, nx, nv] = decay(cfg, "constant", "constant");
  const double mass_loss = 1.0 - d.rows.back().mass / d.rows.front().mass;
  cx.check("decay_slope", std::fabs(fit.slope - criteria::kDecaySlope) <= criteria::kDecaySlopeTol, fit.slope,
           fmt::format("sup-norm slope {:.4f} over t in [{}, {}] from {} points, rms {:.2g} ({} x {} cells)", fit.slope,
                       win[0], win[1], fit.points, fit.rms, nx, nv));
  json summary = {{"fit", fit.to_json()}, {"cells", {nx, nv}}, {"mass_loss", mass_loss}};
  if (do_variable) {
    const auto [vfit, vd, vnx, vnv] = decay(vcfg, "variable", "variable");
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& r : vd.rows)
      if (r.t >= win[0] && r.t <= win[1]) lo = std::min(lo, r.sup * r.t * r.t), hi = std::max(hi, r.sup * r.t * r.t);
    const double spread = hi / lo;
    cx.check("variable_bounded", spread <= criteria::kVariableSpread, spread,
             fmt::format("sup t^2 in [{:.4g}, {:.4g}] over the window, max/min {:.3f} (slope {:.4f})", lo, hi, spread,
                         vfit.slope));
    summary["variable"] = {{"fit", vfit.to_json()}, {"sup_t2_min", lo}, {"sup_t2_max", hi}, {"spread", spread}};
  }
  cx.out.write("decay.csv", csv);
  cx.out.write("decay.svg", svg_line_plot({"Sup-norm decay", "t", "sup f", true, true}, series));
  cx.summary("wholespace", summary);
}

// --------------------------------------------------------------------- profiles

json profiles_defaults() {
  json s = solver_defaults(DomainMode::HalfSpace);
  s["x"] = graded(0.0, 12.0, 1e-6, 1.03, 0.1);
  s["v"] = graded(-12.0, 12.0, 1e-3, 1.015, 0.1);
  s["dt"] = 1e-3;
  s["t_end"] = 1.0;
  s["fine"] = {{"length", 0.05}, {"dt", 2e-5}};
  s["f_in"] = bump(1.0, 0.0, 0.2, 0.4, 4.5);
  return {{"solver", s},
          {"x_window", {1e-5, 1e-4}},
          {"v_wall_x0", 0.0},
          {"v_window", {0.01, 0.1}},
          {"rate_v0", {0.5, 1.0}},
          {"rate_window", {5.0, 20.0}}};
}

void run_profiles(Context& cx) {
  const auto cfg = solver_config(cx.p.at("solver"));
  if (cfg.mode != DomainMode::HalfSpace) throw ConfigError("profiles: solver.mode must be half-space");
  const auto pair = [&](const char* key) {
    const auto w = numbers(cx.p, key, 2);
    if (w.size() != 2 || !(w[0] > 0) || !(w[1] > w[0])) throw ConfigError(fmt::format("{}: expected [lo, hi], 0 < lo < hi", key));
    return std::pair{w[0], w[1]};
  };
  const auto [xlo, xhi] = pair("x_window");
  const auto [vlo, vhi] = pair("v_window");
  const auto [elo, ehi] = pair("rate_window");
  const double x0 = finite(cx.p, "v_wall_x0");
  if (x0 < 0) throw ConfigError("profiles: v_wall_x0 must be >= 0");
  const auto v0s = numbers(cx.p, "rate_v0", 1);
  for (double v0 : v0s)
    if (!(v0 > 0)) throw ConfigError("profiles: rate_v0 entries must be positive");

  Stopwatch sw;
  FokkerPlanckSolver s(cfg, shared_profile());
  run_solver(s);
  cx.timing("solve", sw.seconds());
  const auto& f = s.state();

  std::string csv = "slice,fixed,coord,value\n";
  const auto dump = [&](const char* name, const ProfileTable& p) {
    for (std::size_t k = 0; k < p.coord.size(); ++k)
      csv += fmt::format("{},{},{},{}\n", name, fmt_num(p.slice.fixed), fmt_num(p.coord[k]), fmt_num(p.value[k]));
  };

  const auto px = extract_profile(f, {SliceKind::AlongX, 0.0, xlo, xhi});
  dump("x", px);
  const auto xfit = fit_exponent(px.coord, px.value, xlo, xhi, FitKind::Power);
  const double decades = std::log10(xhi / xlo);
  cx.check("x_exponent",
           std::fabs(xfit.slope - criteria::kXExponent) <= criteria::kXExponentTol && decades >= criteria::kMinDecades,
           xfit.slope,
           fmt::format("slope of log f(1, x, 0) vs log x {:.4f} over [{:g}, {:g}] ({:.2g} decades, {} points, rms {:.2g})",
                       xfit.slope, xlo, xhi, decades, xfit.points, xfit.rms));

  const auto pv = extract_profile(f, {SliceKind::AlongV, x0, -vhi, -vlo});
  dump("v", pv);
  std::vector<double> av, fv;
  for (std::size_t k = 0; k < pv.coord.size(); ++k)
    if (pv.coord[k] < 0) av.push_back(-pv.coord[k]), fv.push_back(pv.value[k]);
  const auto vfit = fit_exponent(av, fv, vlo, vhi, FitKind::Power);
  cx.check("v_exponent", std::fabs(vfit.slope - criteria::kVExponent) <= criteria::kVExponentTol, vfit.slope,
           fmt::format("slope of log f(1, {:g}, v) vs log|v| {:.4f} for -v in [{:g}, {:g}] ({} points, rms {:.2g})", x0,
                       vfit.slope, vlo, vhi, vfit.points, vfit.rms));

  json rates = json::array();
  bool rates_ok = true;
  double worst = 0.0;
  std::string detail;
  std::vector<PlotSeries> series;
  for (double v0 : v0s) {
    const double k = v0 * v0 * v0 / 9.0;
    // -log f / (v0^3 / 9x) in [elo, ehi]
    const double lo = k / ehi, hi = k / elo;
    const auto pr = extract_profile(f, {SliceKind::AlongInverseX, v0, lo, hi});
    dump("rate", pr);
    const auto rfit = fit_exponent(pr.coord, pr.value, lo, hi, FitKind::InverseRate);
    const double ratio = rfit.slope / k;
    worst = std::max(worst, std::fabs(ratio - 1.0));
    rates_ok = rates_ok && std::fabs(ratio - 1.0) <= criteria::kRateRel;
    detail += fmt::format("{}v0 = {:g}: rate {:.5f} vs {:.5f} (ratio {:.3f}, {} points)", detail.empty() ? "" : "; ", v0,
                          rfit.slope, k, ratio, rfit.points);
    rates.push_back({{"v0", v0}, {"target", k}, {"fit", rfit.to_json()}, {"ratio", ratio},
                     {"rate_with_power", pr.rate_with_power}, {"power", pr.power}});
    PlotSeries ps{fmt::format("v0 = {:g}", v0), {}, {}, true};
    for (std::size_t j = 0; j < pr.coord.size(); ++j)
      if (pr.coord[j] >= lo && pr.coord[j] <= hi && pr.value[j] > 0)
        ps.x.push_back(1.0 / pr.coord[j]), ps.y.push_back(pr.value[j]);
    series.push_back(std::move(ps));
  }
  cx.check("incoming_rate", rates_ok, worst, detail);

  cx.out.write("profiles.csv", csv);
  std::vector<PlotSeries> xs{{"f(1, x, 0)", {}, {}, true}}, vs{{"f(1, x0, v), v < 0", av, fv, true}};
  for (std::size_t k = 0; k < px.coord.size(); ++k)
    if (px.value[k] > 0) xs[0].x.push_back(px.coord[k]), xs[0].y.push_back(px.value[k]);
  cx.out.write("x_profile.svg", svg_line_plot({"Profile along x at v = 0", "x", "f", true, true}, xs));
  cx.out.write("v_profile.svg", svg_line_plot({"Profile along v at the wall", "|v|", "f", true, true}, vs));
  cx.out.write("rate_profile.svg", svg_line_plot({"Incoming profiles", "1/x", "f", false, true}, series));
  cx.summary("fits", {{"x", xfit.to_json()}, {"v", vfit.to_json()}, {"rates", rates}});
  cx.summary("cells", {f.nx(), f.nv()});
}

// -------------------------------------------------------------------- particles

json particles_defaults() {
  json s = solver_defaults(DomainMode::HalfSpace);
  s["x"] = graded(0.0, 20.0, 2e-3, 1.05, 0.1);
  s["v"] = graded(-12.0, 14.0, 0.01, 1.05, 0.1);
  s["dt"] = 4e-3;
  s["t_end"] = 1.0;
  s["f_in"] = bump(1.0, -1.0, 0.2, 0.4, 4.0);
  return {{"solver", s},
          {"n", 1000000},
          {"dt", 5e-3},
          {"bins", {{"x_min", 0.0}, {"x_max", 8.0}, {"nx", 16}, {"v_min", -6.0}, {"v_max", 6.0}, {"nv", 16}}}};
}

void run_particles(Context& cx) {
  const auto cfg = solver_config(cx.p.at("solver"));
  const std::size_t n = count(cx.p, "n");
  const double dt = positive(cx.p, "dt");
  if (dt > 1e-2) throw ConfigError("particles: dt must be <= 1e-2");
  const auto& jb = cx.p.at("bins");
  HistogramSpec bins{finite(jb, "x_min"), finite(jb, "x_max"), count(jb, "nx"),
                     finite(jb, "v_min"), finite(jb, "v_max"), count(jb, "nv")};
  if (!(bins.x_max > bins.x_min && bins.v_max > bins.v_min)) throw ConfigError("particles: empty bin box");

  Stopwatch sw;
  auto e = ParticleEnsemble::sample(cfg.f_in, n, cfg.mode, cx.cfg.seed);
  e.simulate(dt, cfg.t_end);
  cx.timing("particles", sw.seconds());
  Stopwatch ss;
  FokkerPlanckSolver s(cfg, shared_profile());
  const auto d = run_solver(s);
  cx.timing("solver", ss.seconds());

  const double frac_p = e.surviving_mass() / e.total_mass();
  const double frac_s = d.rows.back().mass / d.rows.front().mass;
  const double rel = std::fabs(frac_p / frac_s - 1.0);
  cx.check("surviving_mass", rel <= criteria::kSurvivalRel, rel,
           fmt::format("surviving fraction {:.5f} (particles, n = {}) vs {:.5f} (solver)", frac_p, n, frac_s));

  const auto h = histogram_density(e, bins, false);
  const auto g = coarse_bin(s.state(), bins);
  auto hn = h.density, gn = g;
  double mh = 0.0, mg = 0.0;
  for (double q : hn.values()) mh += q;
  for (double q : gn.values()) mg += q;
  if (!(mh > 0 && mg > 0)) throw NumericalError("particles: no mass inside the bins");
  for (double& q : hn.values()) q /= mh;
  for (double& q : gn.values()) q /= mg;
  const double l1 = relative_l1(hn, gn);
  cx.check("coarse_l1", l1 <= criteria::kCoarseL1, l1,
           fmt::format("normalized {}x{} bin L1 distance {:.4f} (mass outside the bins: {:.3g})", bins.nx, bins.nv, l1,
                       h.outside_mass));

  std::string csv = "x,v,particles,solver,error\n";
  for (std::size_t i = 0; i < bins.nx; ++i)
    for (std::size_t j = 0; j < bins.nv; ++j) {
      const double x = bins.x_min + (i + 0.5) * (bins.x_max - bins.x_min) / bins.nx;
      const double v = bins.v_min + (j + 0.5) * (bins.v_max - bins.v_min) / bins.nv;
      csv += fmt::format("{},{},{},{},{}\n", fmt_num(x), fmt_num(v), fmt_num(h.density.values()[i * bins.nv + j]),
                         fmt_num(g.values()[i * bins.nv + j]), fmt_num(h.error.values()[i * bins.nv + j]));
    }
  cx.out.write("bins.csv", csv);
  cx.summary("particles", {{"n", n}, {"surviving_particles", frac_p}, {"surviving_solver", frac_s},
                           {"relative_difference", rel}, {"coarse_l1", l1}, {"exits", e.exits().size()}});
}

}  // namespace kinfp::detail
