#include "suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "dflow/contflow.hpp"
#include "dflow/oracle.hpp"
#include "dflow/pipeline.hpp"
#include "dflow/random.hpp"
#include "dflow/routing.hpp"

namespace dflow::suites {

using nlohmann::json;

json SuiteResult::to_json() const {
  return {{"suite", name}, {"criterion", criterion}, {"pass", pass}, {"summary", summary}, {"details", details}};
}

namespace {

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// delta_i spread log-uniformly over [lo, hi].
double log_grid(double lo, double hi, int i, int count) {
  return lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
}

std::vector<int> shuffled_colors(std::size_t total, std::size_t black, CounterRng& rng) {
  std::vector<int> c(total, 0);
  std::fill(c.begin(), c.begin() + static_cast<long>(black), 1);
  for (std::size_t i = total; i > 1; --i) std::swap(c[i - 1], c[rng.below(i)]);
  return c;
}

}  // namespace

SuiteResult exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  SuiteResult r{"exactness", 1, false, {}, {}};
  const std::vector<std::pair<int, int>> shapes = {{2, 16}, {2, 32}, {2, 64}, {3, 8}, {3, 16}};
  const int per_shape = 40;
  std::size_t ok = 0, total = 0;
  json failures = json::array();
  for (std::size_t s = 0; s < shapes.size(); ++s) {
    const auto [nu, n] = shapes[s];
    const Tiling t(nu, n);
    for (int i = 0; i < per_shape; ++i) {
      const double delta = log_grid(0.02, 0.2, i % 10, 10);
      const std::uint64_t seed = 1000 * (s + 1) + static_cast<std::uint64_t>(i);
      ++total;
      try {
        const Permutation p = random_near_identity(t, delta, seed);
        const ConnectResult c = connect_to_identity(p);
        if (flow_apply_and_cost(p, c.flow).result.is_identity())
          ++ok;
        else
          failures.push_back({{"nu", nu}, {"N", n}, {"seed", seed}, {"delta", delta}});
      } catch (const std::exception& e) {
        failures.push_back({{"nu", nu}, {"N", n}, {"seed", seed}, {"delta", delta}, {"error", e.what()}});
      }
    }
  }
  r.pass = ok == total;
  r.summary = std::to_string(ok) + "/" + std::to_string(total) + " flows reach the identity";
  r.details = {{"instances", total}, {"exact", ok}, {"failures", failures}, {"seconds", seconds_since(t0)}};
  return r;
}

SuiteResult oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  SuiteResult r{"oracle-equivalence", 2, false, {}, {}};
  struct Shape {
    std::string name;
    Tiling t;
    Box region;
  };
  const std::vector<Shape> shapes = {{"2x2", Tiling(2, 2), Box({0, 0}, {1, 1})},
                                     {"1x4", Tiling(2, 4), Box({0, 0}, {0, 3})}};
  bool ineq = true, constructive = true, witness_ok = true;
  std::size_t chord_e = 0, chord_s = 0, instances = 0;
  json per_shape = json::array(), chord_cases = json::array();
  for (const auto& sh : shapes) {
    OracleLimits lim;
    lim.region = sh.region;
    const auto perms = region_permutations(sh.t, sh.region);
    const EquivalenceReport rep = equivalence_report(sh.t, perms, lim);
    ineq = ineq && rep.all_hold;
    const double unit = sh.t.cost_unit();
    double worst_chord_e = 0.0;
    for (const auto& row : rep.rows) {
      if (row.skipped) continue;
      ++instances;
      const double tol = 1e-12 * row.l2;
      if (row.l2 > row.dist_e + tol) {
        ++chord_e;
        chord_cases.push_back({{"shape", sh.name}, {"l2_units", row.l2 / unit}, {"dist_e_units", row.dist_e / unit},
                               {"dist_s_units", row.dist_s / unit}});
      }
      if (row.l2 > row.dist_s + tol) ++chord_s;
      worst_chord_e = std::max(worst_chord_e, row.l2 / row.dist_e);

      // constructive flows never beat the oracle
      const DiscreteFlow route = route_rectangle(sh.region, row.p);
      if (route.total_cost() < row.dist_s * (1 - 1e-12) || e_cost(route) < row.dist_e * (1 - 1e-12))
        constructive = false;
      const ConnectResult c = connect_to_identity(row.p);
      if (c.cost < row.dist_e * (1 - 1e-12)) constructive = false;

      const OracleResult w = exact_distance(row.p, Permutation::identity(sh.t), DistanceMode::E, lim);
      if (!flow_apply_and_cost(row.p, w.witness).result.is_identity() || w.distance != w.witness.total_cost() ||
          std::abs(w.distance - row.dist_e) > 1e-12 * row.dist_e)
        witness_ok = false;
    }
    per_shape.push_back({{"shape", sh.name},
                         {"max_ratio_s_over_e", rep.max_ratio},
                         {"e_le_2s", rep.all_hold},
                         {"max_l2_over_dist_e", worst_chord_e}});
  }
  const bool chord = chord_e == 0 && chord_s == 0;
  r.pass = ineq && constructive && witness_ok && chord;
  r.summary = std::string("dist_E <= 2 dist_S ") + (ineq ? "holds" : "FAILS") + "; constructive >= oracle " +
              (constructive ? "holds" : "FAILS") + "; witnesses " + (witness_ok ? "replay" : "FAIL") +
              "; l2 <= dist_E fails on " + std::to_string(chord_e) + "/" + std::to_string(instances) +
              ", l2 <= dist_S fails on " + std::to_string(chord_s) + "/" + std::to_string(instances);
  r.details = {{"shapes", per_shape},
               {"chord_violations_e", chord_e},
               {"chord_violations_s", chord_s},
               {"chord_cases_e", chord_cases},
               {"seconds", seconds_since(t0)}};
  return r;
}

SuiteResult duration() {
  const auto t0 = std::chrono::steady_clock::now();
  SuiteResult r{"duration", 3, false, {}, {}};
  bool arrays_ok = true;
  std::size_t array_cases = 0;
  for (int len = 1; len <= 6; ++len) {
    const Tiling t(1, len);
    const Box a({0}, {len - 1});
    std::vector<std::int32_t> tab(static_cast<std::size_t>(len));
    std::iota(tab.begin(), tab.end(), 0);
    do {
      const Permutation p(t, tab);
      const DiscreteFlow f = len > 1 ? route_array(a, p) : DiscreteFlow(t);
      ++array_cases;
      if (f.duration() > static_cast<std::size_t>(len) || !flow_apply_and_cost(p, f).result.is_identity())
        arrays_ok = false;
    } while (std::next_permutation(tab.begin(), tab.end()));
  }
  const Tiling t(2, 4);
  const Box whole = Box::whole(t);
  CounterRng rng(77);
  double worst = 0.0;
  bool exact = true;
  for (int i = 0; i < 100; ++i) {
    const Permutation p = random_permutation(t, rng);
    const DiscreteFlow f = route_rectangle(whole, p);
    worst = std::max(worst, static_cast<double>(f.duration()) / whole.extent_sum());
    if (!flow_apply_and_cost(p, f).result.is_identity()) exact = false;
  }
  const bool rect_ok = exact && worst <= kRouteDurationConstant && kRouteDurationConstant <= 3.0;
  r.pass = arrays_ok && rect_ok;
  r.summary = std::to_string(array_cases) + " array permutations within length: " + (arrays_ok ? "yes" : "NO") +
              "; 4x4 duration / side sum max " + fmt("%.3f", worst) + " (C_impl " +
              fmt("%.0f", kRouteDurationConstant) + ")";
  r.details = {{"array_cases", array_cases},
               {"arrays_ok", arrays_ok},
               {"rect_max_ratio", worst},
               {"c_impl", kRouteDurationConstant},
               {"rect_exact", exact},
               {"seconds", seconds_since(t0)}};
  return r;
}

SuiteResult coloring() {
  const auto t0 = std::chrono::steady_clock::now();
  SuiteResult r{"coloring", 4, false, {}, {}};
  struct Family {
    std::string name;
    std::vector<int> sizes;
    bool arrays;
    double constant;
  };
  const std::vector<Family> families = {{"array", {8, 16}, true, kArrayColoringConstant},
                                        {"cube", {4, 8, 16}, false, kBoxColoringConstant}};
  bool pass = true;
  json fam_json = json::array();
  for (const auto& fam : families) {
    std::vector<double> per_size;
    bool conserved = true, reached = true;
    for (int size : fam.sizes) {
      const Tiling t(2, size);
      const Box box = fam.arrays ? Box({0, 0}, {0, size - 1}) : Box::whole(t);
      const std::size_t tot = box.volume();
      CounterRng rng(static_cast<std::uint64_t>(4000 + size + (fam.arrays ? 0 : 100)));
      double worst = 0.0;
      for (int i = 0; i < 100; ++i) {
        const std::size_t b = 1 + rng.below(tot - 1);
        const Coloring from(t, box, shuffled_colors(tot, b, rng));
        const Coloring to(t, box, shuffled_colors(tot, b, rng));
        const DiscreteFlow f = fam.arrays ? color_array_flow(box, from, to) : color_cube_flow(box, from, to);
        std::vector<int> colors = from.colors();
        for (const auto& m : f.steps()) {
          for (const auto& [x, y] : transpositions(t, m))
            std::swap(colors[box.rank_of(t, x)], colors[box.rank_of(t, y)]);
          if (static_cast<std::size_t>(std::count(colors.begin(), colors.end(), 1)) != b) conserved = false;
        }
        if (colors != to.colors()) reached = false;
        const double scale = size * t.cost_unit() * std::sqrt(static_cast<double>(std::min(b, tot - b)));
        worst = std::max(worst, f.total_cost() / scale);
      }
      per_size.push_back(worst);
    }
    const double hi = *std::max_element(per_size.begin(), per_size.end());
    const double lo = *std::min_element(per_size.begin(), per_size.end());
    const bool ok = conserved && reached && hi <= fam.constant && hi <= 4.0 * lo;
    pass = pass && ok;
    fam_json.push_back({{"family", fam.name},
                        {"sizes", fam.sizes},
                        {"max_ratio_per_size", per_size},
                        {"constant", fam.constant},
                        {"spread", hi / lo},
                        {"conserved", conserved},
                        {"reached", reached}});
  }
  r.pass = pass;
  r.summary = "array C " + fmt("%.3f", fam_json[0]["max_ratio_per_size"].get<std::vector<double>>().back()) +
              " spread " + fmt("%.2f", fam_json[0]["spread"].get<double>()) + ", cube spread " +
              fmt("%.2f", fam_json[1]["spread"].get<double>()) + ", counts conserved";
  r.details = {{"families", fam_json}, {"seconds", seconds_since(t0)}};
  if (!pass) r.summary = "coloring bounds violated; see details";
  return r;
}

SuiteResult step_bounds() {
  const auto t0 = std::chrono::steady_clock::now();
  SuiteResult r{"step-bounds", 5, false, {}, {}};
  const Tiling t(2, 64);
  const int count = 50;
  std::size_t ok = 0;
  double worst[5] = {0, 0, 0, 0, 0};  // displacement, local norm, colored, cost2/bound2, cost3/bound3
  json failures = json::array();
  for (int i = 0; i < count; ++i) {
    const double delta = log_grid(0.02, 0.2, i, count);
    const std::uint64_t seed = 700 + static_cast<std::uint64_t>(i);
    const Permutation p = random_near_identity(t, delta, seed);
    const ConnectResult c = connect_to_identity(p, 2.0 / 7.0);
    const auto& cfg = c.cfg;
    const auto& s1 = c.steps[0];
    const double d = s1.max_displacement / (kConstants.displacement * cfg.scale());
    const double ln = s1.l2 / (kConstants.local_norm * std::pow(cfg.delta, 1.0 - cfg.epsilon / 2.0));
    const double col = s1.stats.at("colored") / s1.stats.at("colored_bound");
    const bool blocks = is_block_constant(c.steps[1].result, cfg.coarse);
    const bool id = c.steps[2].result.is_identity();
    worst[0] = std::max(worst[0], d);
    worst[1] = std::max(worst[1], ln);
    worst[2] = std::max(worst[2], col);
    worst[3] = std::max(worst[3], c.steps[1].cost / c.steps[1].bound);
    worst[4] = std::max(worst[4], c.steps[2].cost / c.steps[2].bound);
    if (d <= 1.0 && ln <= 1.0 && col <= 1.0 && blocks && id)
      ++ok;
    else
      failures.push_back({{"seed", seed}, {"delta", delta}, {"displacement", d}, {"local_norm", ln},
                          {"colored", col}, {"block_constant", blocks}, {"identity", id}});
  }
  r.pass = ok == static_cast<std::size_t>(count);
  r.summary = std::to_string(ok) + "/" + std::to_string(count) + " instances; worst displacement " +
              fmt("%.3f", worst[0]) + ", local norm " + fmt("%.3f", worst[1]) + ", colored " + fmt("%.3f", worst[2]) +
              " of their bounds";
  r.details = {{"displacement_ratio", worst[0]}, {"local_norm_ratio", worst[1]}, {"colored_ratio", worst[2]},
               {"step2_cost_ratio", worst[3]},    {"step3_cost_ratio", worst[4]},  {"failures", failures},
               {"constants",
                {{"displacement", kConstants.displacement},
                 {"local_norm", kConstants.local_norm},
                 {"step2", kConstants.step2},
                 {"step3", kConstants.step3}}},
               {"seconds", seconds_since(t0)}};
  return r;
}

SuiteResult exponent() {
  const auto t0 = std::chrono::steady_clock::now();
  SuiteResult r{"exponent", 6, false, {}, {}};
  const std::vector<double> deltas = {0.01, 0.02, 0.035, 0.05, 0.1, 0.2};
  const ExperimentTable tab = exponent_experiment(2, {32, 64}, deltas, {1, 2, 3, 4, 5});
  const double alpha = 2.0 / 7.0;
  double c_total = 0.0;
  for (const auto& row : tab.rows)
    if (row.delta == deltas.back()) c_total = std::max(c_total, row.total / std::pow(row.l2, alpha));
  std::size_t below_l2 = 0, above_bound = 0;
  double worst = 0.0;
  for (const auto& row : tab.rows) {
    if (row.total < row.l2) ++below_l2;
    const double ratio = row.total / (c_total * std::pow(row.l2, alpha));
    worst = std::max(worst, ratio);
    if (ratio > 1.0 + 1e-12) ++above_bound;
  }
  r.pass = below_l2 == 0 && above_bound == 0 && !tab.rows.empty();
  r.summary = std::to_string(tab.rows.size()) + " rows; C_total " + fmt("%.3f", c_total) + "; cost < l2 in " +
              std::to_string(below_l2) + ", above C_total l2^(2/7) in " + std::to_string(above_bound) +
              "; log-log slope " + fmt("%.3f", tab.slope);
  r.details = {{"rows", tab.rows.size()},    {"c_total", c_total}, {"slope", tab.slope},
               {"worst_ratio", worst},       {"below_l2", below_l2}, {"above_bound", above_bound},
               {"seconds", seconds_since(t0)}};
  return r;
}

namespace {

template <class F>
void for_grid(F&& f) {
  for (int n : {4, 8, 16})
    for (int m = 2; m <= 8; ++m) f(n, m);
}

}  // namespace

SuiteResult appendix_norm() {
  const auto t0 = std::chrono::steady_clock::now();
  SuiteResult r{"appendix-norm", 7, false, {}, {}};
  double worst_bound = 0.0, lo_l2 = 1e300, hi_l2 = 0.0;
  for_grid([&](int n, int m) {
    const FrameParams fp = make_frame(n, m);
    const double norm = l1l2_norm(build_swap_field(fp), 64);
    worst_bound = std::max(worst_bound, norm / (20.0 * m / (static_cast<double>(n) * n)));
    const double ratio = norm / discrete_swap_l2(fp);
    lo_l2 = std::min(lo_l2, ratio);
    hi_l2 = std::max(hi_l2, ratio);
  });
  r.pass = worst_bound <= 1.0 && hi_l2 <= 4.0 && lo_l2 >= 0.25;
  r.summary = "max norm / (20 M N^-2) " + fmt("%.4f", worst_bound) + "; norm / discrete l2 in [" + fmt("%.3f", lo_l2) +
              ", " + fmt("%.3f", hi_l2) + "]";
  r.details = {{"max_bound_ratio", worst_bound}, {"min_l2_ratio", lo_l2}, {"max_l2_ratio", hi_l2},
               {"seconds", seconds_since(t0)}};
  return r;
}

SuiteResult appendix_map() {
  const auto t0 = std::chrono::steady_clock::now();
  SuiteResult r{"appendix-map", 7, false, {}, {}};
  bool ok = true;
  double worst = 0.0;
  std::size_t samples = 0;
  for_grid([&](int n, int m) {
    const SwapMapReport rep = verify_swap_map(make_frame(n, m), 20, 1e-4, static_cast<std::uint64_t>(31 * n + m));
    ok = ok && rep.ok;
    worst = std::max(worst, rep.max_error * n);
    samples += rep.samples;
  });
  r.pass = ok;
  r.summary = "max time-1 displacement error " + fmt("%.3g", worst) + " N^-1 over " + std::to_string(samples) +
              " samples (tolerance 1e-3 N^-1)";
  r.details = {{"max_error_times_n", worst}, {"samples", samples}, {"seconds", seconds_since(t0)}};
  return r;
}

SuiteResult appendix_divergence() {
  const auto t0 = std::chrono::steady_clock::now();
  SuiteResult r{"appendix-divergence", 7, false, {}, {}};
  double worst = 0.0, weakest_control = 1e300;
  for_grid([&](int n, int m) {
    const FrameParams fp = make_frame(n, m);
    worst = std::max(worst, weak_divergence_residual(build_swap_field(fp), standard_bumps(fp)));
    const FrameParams bad = make_frame(n, m, 1.5 * fp.epsilon());
    weakest_control = std::min(weakest_control, weak_divergence_residual(build_swap_field(bad), {corner_bump(bad)}));
  });
  r.pass = worst <= 1e-6 && weakest_control >= 1e-3;
  r.summary = "max relative residual " + fmt("%.3g", worst) + "; perturbed frame residual at least " +
              fmt("%.3g", weakest_control);
  r.details = {{"max_residual", worst}, {"min_control_residual", weakest_control}, {"seconds", seconds_since(t0)}};
  return r;
}

const std::vector<SuiteInfo>& registry() {
  static const std::vector<SuiteInfo> suites = {
      {"exactness", 1, exactness},
      {"oracle-equivalence", 2, oracle_equivalence},
      {"duration", 3, duration},
      {"coloring", 4, coloring},
      {"step-bounds", 5, step_bounds},
      {"exponent", 6, exponent},
      {"appendix-norm", 7, appendix_norm},
      {"appendix-map", 7, appendix_map},
      {"appendix-divergence", 7, appendix_divergence},
  };
  return suites;
}

const SuiteInfo* find(const std::string& name) {
  for (const auto& s : registry())
    if (s.name == name) return &s;
  return nullptr;
}

}  // namespace dflow::suites
