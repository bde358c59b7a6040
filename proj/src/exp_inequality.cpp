// nash-check, poincare-check, combined-check

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include <fmt/format.h>

#include "experiments_internal.hpp"
#include "kinfp/criteria.hpp"
#include "kinfp/errors.hpp"
#include "kinfp/inequality.hpp"
#include "kinfp/regions.hpp"
#include "kinfp/svg.hpp"
#include "kinfp/weights.hpp"

namespace kinfp::detail {

namespace {

json box_json(const PhaseBox& b) { return {b.t0, b.t1, b.x0, b.x1, b.v0, b.v1}; }

json axis_json(const char* name, double lo, double hi, std::size_t n) {
  return {{"name", name}, {"min", lo}, {"max", hi}, {"count", n}};
}

GridAxis grid_axis(const json& j, const char* name) {
  const double lo = finite(j, "min"), hi = finite(j, "max");
  if (!(hi > lo)) throw ConfigError(fmt::format("{} axis: max must exceed min", name));
  return {name, lo, hi, count(j, "count", 3)};
}

Resolution resolution(const json& j) {
  return {grid_axis(j.at("t"), "t"), grid_axis(j.at("x"), "x"), grid_axis(j.at("v"), "v")};
}

json resolution_json(const GridAxis& t, const GridAxis& x, const GridAxis& v) {
  return {{"t", axis_json("t", t.min, t.max, t.count)},
          {"x", axis_json("x", x.min, x.max, x.count)},
          {"v", axis_json("v", v.min, v.max, v.count)}};
}

json report_json(const InequalityReport& r) {
  json terms = json::object();
  for (const auto& t : r.terms) terms[t.name] = t.value;
  json j = {{"member", r.member}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"ratio", r.ratio}, {"terms", terms}};
  if (std::isfinite(r.best_parameter)) j["best_parameter"] = r.best_parameter;
  return j;
}

std::string family_csv(const FamilyReport& coarse, const FamilyReport& fine) {
  std::string csv = "member,lhs_base,rhs_base,ratio_base,lhs_refined,rhs_refined,ratio_refined\n";
  for (std::size_t k = 0; k < coarse.members.size(); ++k) {
    const auto& a = coarse.members[k];
    const auto& b = fine.members.at(k);
    csv += fmt::format("{},{},{},{},{},{},{}\n", a.member, fmt_num(a.lhs), fmt_num(a.rhs), fmt_num(a.ratio),
                       fmt_num(b.lhs), fmt_num(b.rhs), fmt_num(b.ratio));
  }
  return csv;
}

// C* finite and positive at both resolutions, and stable within the criterion.
void stability_checks(Context& cx, const FamilyReport& a, const FamilyReport& b) {
  const auto& name = a.inequality;
  cx.check(name + "_finite", a.finite() && b.finite() && a.C_star > 0 && b.C_star > 0, a.C_star,
           fmt::format("C* = {:.6g} (worst {}) on {} members; refined {:.6g} (worst {})", a.C_star, a.worst,
                       a.members.size(), b.C_star, b.worst));
  const double change = std::fabs(b.C_star / a.C_star - 1.0);
  cx.check(name + "_stable", change <= criteria::kConstantStability, change,
           fmt::format("relative change of C* under x2 refinement {:.4f}", change));
}

std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
  std::vector<double> s;
  for (std::size_t k = 0; k < n; ++k) s.push_back(lo * std::pow(hi / lo, n > 1 ? static_cast<double>(k) / (n - 1) : 0.0));
  return s;
}

}  // namespace

// ------------------------------------------------------------------- nash-check

json nash_defaults() {
  return {{"support", box_json({0.0, 2.0, -2.0, 2.0, -2.0, 2.0})},
          {"omega1", box_json({0.5, 1.5, -1.0, 1.0, -1.0, 1.0})},
          {"B", box_json({-0.1, 0.1, -0.1, 0.1, -0.1, 0.1})},
          {"grid", resolution_json({"t", -0.4, 2.4, 21}, {"x", -2.2, 2.2, 41}, {"v", -2.2, 2.2, 41})},
          {"s_min", 0.05},
          {"s_max", 1.5},
          {"s_count", 41},
          {"random_members", 30}};
}

void run_nash(Context& cx) {
  const auto& p = cx.p;
  const auto support = phase_box(p.at("support")), omega1 = phase_box(p.at("omega1")), B = phase_box(p.at("B"));
  const auto res = resolution(p.at("grid"));
  const double s_min = positive(p, "s_min"), s_max = positive(p, "s_max");
  if (!(s_max > s_min)) throw ConfigError("nash-check: s_max must exceed s_min");
  const auto s = log_spaced(s_min, s_max, count(p, "s_count", 2));
  const std::size_t randoms = count(p, "random_members", 0);

  Stopwatch sw;
  const auto fam = whole_space_family(support, cx.cfg.seed, randoms);
  std::vector<InequalityReport> coarse, fine;
  std::string curves = "member,s,rhs\n";
  for (const auto& m : fam) {
    coarse.push_back(nash_check(sample_member(m, res), omega1, support, B, s));
    coarse.back().member = m.id;
    for (std::size_t k = 0; k < s.size(); ++k)
      curves += fmt::format("{},{},{}\n", m.id, fmt_num(s[k]), fmt_num(coarse.back().rhs_curve.at(k)));
    fine.push_back(nash_check(sample_member(m, res.refined()), omega1, support, B, s));
    fine.back().member = m.id;
  }
  cx.timing("nash", sw.seconds());
  const auto a = summarize("nash", std::move(coarse)), b = summarize("nash", std::move(fine));
  stability_checks(cx, a, b);
  cx.out.write("nash_members.csv", family_csv(a, b));
  cx.out.write("nash_rhs_curves.csv", curves);
  json members = json::array();
  for (const auto& m : a.members) members.push_back(report_json(m));
  cx.out.write_json("nash_base.json", members);
  cx.summary("nash", {{"C_star", a.C_star}, {"worst", a.worst}, {"C_star_refined", b.C_star},
                      {"worst_refined", b.worst}, {"members", a.members.size()}});
}

// --------------------------------------------------------------- poincare-check

json poincare_defaults() {
  return {{"R", 0.5},
          {"T1", 1.5},
          {"T2", 2.0},
          {"support", box_json({0.2, 3.2, 0.0, 3.0, -3.0, 3.0})},
          {"grid", resolution_json({"t", 0.0, 3.3, 34}, {"x", 0.0, 3.0, 31}, {"v", -3.0, 3.0, 61})},
          {"members", 50}};
}

void run_poincare(Context& cx) {
  const auto& p = cx.p;
  const double R = positive(p, "R"), T1 = finite(p, "T1"), T2 = finite(p, "T2");
  if (!(T2 > T1) || !(T1 > 2 * R)) throw ConfigError("poincare-check: need 2R < T1 < T2");
  const auto support = phase_box(p.at("support"));
  const auto res = resolution(p.at("grid"));
  const std::size_t n = count(p, "members");

  Stopwatch sw;
  const auto fam = half_space_family(support, cx.cfg.seed, n);
  const auto rres = res.refined();
  const RegionMap map(res.x, res.v, R), rmap(rres.x, rres.v, R);
  std::vector<InequalityReport> pc, oc, pf, of;
  for (const auto& m : fam) {
    const auto g = sample_member(m, res);
    pc.push_back(poincare_check(g, R, T1, T2, &map));
    oc.push_back(outgoing_check(g, R, T1, T2, &map));
    pc.back().member = oc.back().member = m.id;
    const auto h = sample_member(m, rres);
    pf.push_back(poincare_check(h, R, T1, T2, &rmap));
    of.push_back(outgoing_check(h, R, T1, T2, &rmap));
    pf.back().member = of.back().member = m.id;
  }
  cx.timing("poincare", sw.seconds());
  const auto P = summarize("poincare", std::move(pc)), Pf = summarize("poincare", std::move(pf));
  const auto O = summarize("outgoing", std::move(oc)), Of = summarize("outgoing", std::move(of));
  stability_checks(cx, P, Pf);
  stability_checks(cx, O, Of);
  cx.out.write("poincare_members.csv", family_csv(P, Pf));
  cx.out.write("outgoing_members.csv", family_csv(O, Of));
  cx.summary("poincare", {{"C_star", P.C_star}, {"worst", P.worst}, {"C_star_refined", Pf.C_star}});
  cx.summary("outgoing", {{"C_star", O.C_star}, {"worst", O.worst}, {"C_star_refined", Of.C_star}});
}

// --------------------------------------------------------------- combined-check

json combined_defaults() {
  json a = halfspace_defaults().at("solver");
  a["t_end"] = 9.0;
  a["outputs"] = json::array();
  a["R_list"] = {0.25, 0.5, 1.0};
  json b = a;
  b["x"] = {{"kind", "graded"}, {"min", 0.0},     {"max", 12.0},   {"cells", 200},
            {"anchor", 0.0},    {"finest", 2e-3}, {"ratio", 1.05}, {"max_width", 0.04}};
  b["v"] = {{"kind", "graded"}, {"min", -14.0},   {"max", 10.0},   {"cells", 200},
            {"anchor", 0.0},    {"finest", 0.01}, {"ratio", 1.05}, {"max_width", 0.04}};
  b["dt"] = 2e-3;
  b["R_list"] = {1.0};
  b["f_in"] = json::array({{{"x0", 2.0}, {"v0", -5.0}, {"sx", 0.1}, {"sv", 0.2}, {"amplitude", 1.0}, {"cutoff", 4.0}}});
  return {{"standard", a},
          {"output_step", 0.05},
          {"times", {2.0, 4.0, 8.0}},
          {"delta", 0.05},
          {"isolated", b},
          {"isolated_R", 1.0},
          {"isolated_T1", 4.0},
          {"isolated_T2", 8.0},
          {"mu_samples", 40000}};
}

void run_combined(Context& cx) {
  const auto& p = cx.p;
  auto ca = solver_config(p.at("standard"));
  auto cb = solver_config(p.at("isolated"));
  if (ca.mode != DomainMode::HalfSpace || cb.mode != DomainMode::HalfSpace)
    throw ConfigError("combined-check: both runs must be half-space");
  const double step = positive(p, "output_step"), delta = positive(p, "delta");
  const auto times = numbers(p, "times", 1);
  const double R = positive(p, "isolated_R"), T1 = finite(p, "isolated_T1"), T2 = finite(p, "isolated_T2");
  const std::size_t mu_samples = count(p, "mu_samples");
  for (double t : times) {
    if (!(t > 0)) throw ConfigError("combined-check: times must be positive");
    if (t * 9.0 / 8.0 > ca.t_end * (1 + 1e-12)) throw ConfigError("combined-check: standard.t_end must reach 9t/8");
  }
  if (!(T2 > T1) || !(T1 > 2 * R) || T2 + R > cb.t_end * (1 + 1e-12))
    throw ConfigError("combined-check: need 2R < T1 < T2 and T2 + R <= isolated.t_end");
  if (std::find(cb.R_list.begin(), cb.R_list.end(), R) == cb.R_list.end())
    throw ConfigError("combined-check: isolated.R_list must contain isolated_R");
  const auto dense = [&](SolverConfig& c, std::vector<double> extra) {
    for (double t = step; t < c.t_end - 1e-9; t += step) extra.push_back(std::round(t / step) * step);
    std::sort(extra.begin(), extra.end());
    extra.erase(std::unique(extra.begin(), extra.end(), [](double a, double b) { return std::fabs(a - b) < 1e-12; }),
                extra.end());
    c.output_times = extra;
  };
  dense(ca, ca.output_times);
  dense(cb, {R / 4.0});
  ca.validate();
  cb.validate();

  const auto prof = std::make_shared<const SelfSimilarProfile>(SelfSimilarProfile::solve());

  // standard run: the combined estimate at t = 2, 4, 8 with R = t/8
  Stopwatch sa;
  FokkerPlanckSolver A(ca, prof);
  const auto da = A.run();
  cx.timing("standard", sa.seconds());
  std::vector<InequalityReport> reps;
  for (double t : times) {
    const double Rt = t / 8.0;
    if (std::find_if(ca.R_list.begin(), ca.R_list.end(), [&](double r) { return std::fabs(r - Rt) <= 1e-12 * Rt; }) ==
        ca.R_list.end())
      throw ConfigError(fmt::format("combined-check: standard.R_list needs R = {}", Rt));
    reps.push_back(combined_check(da, Rt, delta, t / 2.0, t));
    reps.back().member = fmt::format("t={:g}", t);
  }
  const auto F = summarize("combined", reps);
  bool all_finite = true;
  std::string detail;
  for (const auto& r : F.members) {
    all_finite = all_finite && std::isfinite(r.ratio) && r.rhs > 0;
    detail += fmt::format("{}{}: {:.4g}", detail.empty() ? "ratios " : ", ", r.member, r.ratio);
  }
  cx.check("combined_finite", all_finite, F.C_star, detail);
  cx.out.write("standard_diagnostics.csv", da.csv());

  // isolated run: data inside I_R
  const WeightSpec w(R);
  const RegionScale sc(R);
  Stopwatch sb;
  FokkerPlanckSolver Bs(cb, prof);
  const auto& f0 = Bs.state();
  std::vector<std::uint8_t> in_I(f0.size(), 0);
  for (std::size_t i = 0; i < f0.nx(); ++i)
    for (std::size_t j = 0; j < f0.nv(); ++j) {
      const double x = f0.x_axis().center(i), v = f0.v_axis().center(j);
      if (v > 0 || x > -v * v * v) continue;
      const auto c = classify(x, v, sc);
      in_I[i * f0.nv() + j] = c.region == Region::N;
    }
  const auto mass_in_I = [&](const PhaseField& f) {
    double m = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k)
      if (in_I[k]) m += f.data()[k] * f.area(k / f.nv(), k % f.nv());
    return m;
  };
  const double I0 = mass_in_I(f0), m0 = f0.mass();
  double It = 0.0, sup_t = 0.0, x_star = 0.0, v_star = 0.0;
  const double t_probe = R / 4.0;
  const auto db = Bs.run([&](const DiagnosticsRow& row, const PhaseField& f) {
    if (std::fabs(row.t - t_probe) > 1e-9) return;
    It = mass_in_I(f);
    for (std::size_t i = 0; i < f.nx(); ++i)
      for (std::size_t j = 0; j < f.nv(); ++j)
        if (f(i, j) > sup_t) sup_t = f(i, j), x_star = f.x_axis().center(i), v_star = f.v_axis().center(j);
  });
  cx.timing("isolated", sb.seconds());
  cx.out.write("isolated_diagnostics.csv", db.csv());

  const double support_frac = I0 / m0;
  cx.check("isolated_support", support_frac >= 0.99, support_frac,
           fmt::format("fraction of int f_in on cells of I_R: {:.5f}", support_frac));
  const double retention = I0 > 0 ? It / I0 : 0.0;
  cx.check("isolated_retention", retention >= criteria::kRetention, retention,
           fmt::format("int over I_R at t = R/4 is {:.4f} of its initial value", retention));
  const double phi_mass = db.rows.front().wphi;
  const double naive = phi_mass * std::pow(t_probe, -2.5) * (sup_t > 0 ? prof->phi(x_star, v_star) : 0.0);
  const double factor = naive > 0 ? sup_t / naive : std::numeric_limits<double>::infinity();
  cx.check("isolated_underestimate", factor >= criteria::kUnderestimate, factor,
           fmt::format("sup f = {:.4g} at ({:.4g}, {:.4g}); int f_in phi~ t^(-5/2) phi there = {:.4g}; factor {:.3g}", sup_t,
                       x_star, v_star, naive, factor));

  const auto mc = mu_inequality_check(w, *prof, mu_samples, cx.cfg.seed);
  const std::size_t idx =
      static_cast<std::size_t>(std::find(cb.R_list.begin(), cb.R_list.end(), R) - cb.R_list.begin());
  const double mu0 = db.rows.front().wmu.at(idx);
  double worst_margin = std::numeric_limits<double>::infinity();
  std::string csv = "t,wmu,budget\n";
  for (const auto& row : db.rows) {
    const double budget = mc.C_best * row.t * std::pow(R, -1.25) * phi_mass;
    if (row.t > 0) worst_margin = std::min(worst_margin, mu0 + budget - row.wmu.at(idx));
    csv += fmt::format("{},{},{}\n", fmt_num(row.t), fmt_num(row.wmu.at(idx)), fmt_num(mu0 + budget));
  }
  cx.out.write("mu_budget.csv", csv);
  cx.check("mu_budget", worst_margin >= 0.0, worst_margin,
           fmt::format("min over t > 0 of int f_in mu~ + C_best t R^(-5/4) int f_in phi~ - int f mu~ = {:.4g} (C_best {:.6g})",
                       worst_margin, mc.C_best));
  auto rb = combined_check(db, R, delta, T1, T2);
  rb.member = "isolated";
  cx.check("mu_dominates", rb.mu_dominates && std::isfinite(rb.ratio), rb.ratio,
           fmt::format("mu term {:.4g} vs phi term {:.4g}, ratio {:.4g}", rb.terms.at(3).value, rb.terms.at(2).value,
                       rb.ratio));

  std::vector<PlotSeries> series{{"int f mu~", {}, {}, false}, {"budget", {}, {}, false}};
  for (const auto& row : db.rows) {
    series[0].x.push_back(row.t), series[0].y.push_back(row.wmu.at(idx));
    series[1].x.push_back(row.t), series[1].y.push_back(mu0 + mc.C_best * row.t * std::pow(R, -1.25) * phi_mass);
  }
  cx.out.write("mu_budget.svg", svg_line_plot({"Weighted mass in the isolated region", "t", "mass", false, true}, series));
  json members = json::array();
  for (const auto& r : F.members) members.push_back(report_json(r));
  members.push_back(report_json(rb));
  cx.summary("combined", members);
  cx.summary("isolated", {{"support_fraction", support_frac}, {"retention", retention}, {"sup", sup_t},
                          {"argmax", {x_star, v_star}}, {"naive", naive}, {"factor", factor},
                          {"phi_mass", phi_mass}, {"mu_mass", mu0}, {"C_best", mc.C_best}});
}

}  // namespace kinfp::detail
