#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dflow/contflow.hpp"
#include "dflow/flow_io.hpp"
#include "dflow/oracle.hpp"
#include "dflow/pipeline.hpp"
#include "dflow/random.hpp"
#include "suites.hpp"

using namespace dflow;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  int nu = 2;
  int n = 16;
  double delta = 0.05;
  std::optional<double> epsilon;
  std::uint64_t seed = 1;
  std::string out;
  std::string in;
  std::string format = "text";
};

void add_common(CLI::App* c, Common& o, bool with_delta = true) {
  c->add_option("--nu", o.nu, "dimension")->check(CLI::Range(1, 4));
  c->add_option("--N", o.n, "cubes per side")->check(CLI::PositiveNumber);
  if (with_delta) c->add_option("--delta", o.delta, "target l2 distance")->check(CLI::PositiveNumber);
  c->add_option("--epsilon", o.epsilon, "pipeline exponent");
  c->add_option("--seed", o.seed, "random seed");
  c->add_option("--out", o.out, "output file (stdout when omitted)");
  c->add_option("--in", o.in, "input file");
  c->add_option("--format", o.format, "text or json")->check(CLI::IsMember({"text", "json"}));
}

// Writes through `fn` to the --out file or stdout.
template <class F>
void emit(const std::string& path, F&& fn) {
  if (path.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream os(path);
  if (!os) throw UsageError("cannot open " + path + " for writing");
  fn(os);
}

std::ifstream open_in(const std::string& path) {
  if (path.empty()) throw UsageError("--in is required");
  std::ifstream is(path);
  if (!is) throw UsageError("cannot open " + path);
  return is;
}

Permutation load_or_generate(const Common& o) {
  if (!o.in.empty()) {
    auto is = open_in(o.in);
    return read_permutation(is);
  }
  return random_near_identity(Tiling(o.nu, o.n), o.delta, o.seed);
}

int cmd_gen(const Common& o) {
  const Permutation p = random_near_identity(Tiling(o.nu, o.n), o.delta, o.seed);
  emit(o.out, [&](std::ostream& os) { write_permutation(os, p); });
  if (!o.out.empty())
    std::cerr << "l2 " << l2_to_identity(p) << ", moved " << p.moved_count() << " cubes\n";
  return 0;
}

int cmd_cost(const Common& o) {
  auto is = open_in(o.in);
  const DiscreteFlow f = read_flow(is);
  if (o.format == "json") {
    std::cout << json{{"duration", f.duration()}, {"total", f.total_cost()}, {"e_total", e_cost(f)}}.dump() << '\n';
  } else {
    std::cout << "duration " << f.duration() << "\ntotal " << f.total_cost() << '\n';
  }
  return 0;
}

int cmd_connect(const Common& o) {
  const Permutation p = load_or_generate(o);
  const ConnectResult c = connect_to_identity(p, o.epsilon);
  const bool exact = flow_apply_and_cost(p, c.flow).result.is_identity();
  if (!o.out.empty()) emit(o.out, [&](std::ostream& os) { write_flow(os, c.flow); });
  if (o.format == "json" || o.out.empty()) {
    json steps = json::array();
    for (const auto& s : c.steps) steps.push_back({{"cost", s.cost}, {"bound", s.bound}, {"stats", s.stats}});
    const json ledger = {{"nu", c.cfg.nu},       {"N", c.cfg.n},         {"delta", c.cfg.delta},
                         {"epsilon", c.cfg.epsilon}, {"coarse", c.cfg.coarse}, {"l2", c.l2},
                         {"total", c.flow.total_cost()}, {"duration", c.flow.duration()},
                         {"exact", exact},      {"steps", steps}};
    (o.out.empty() ? std::cerr : std::cout) << ledger.dump(o.format == "json" ? 2 : -1) << '\n';
    if (o.out.empty()) emit("", [&](std::ostream& os) { write_flow(os, c.flow); });
  } else {
    std::cout << "l2 " << c.l2 << "\nepsilon " << c.cfg.epsilon << "\ncoarse " << c.cfg.coarse << '\n';
    for (std::size_t i = 0; i < c.steps.size(); ++i)
      std::cout << "step" << i + 1 << " cost " << c.steps[i].cost << " bound " << c.steps[i].bound << '\n';
    std::cout << "total " << c.flow.total_cost() << "\nexact " << (exact ? "yes" : "no") << '\n';
  }
  return exact ? 0 : 1;
}

int cmd_oracle(const Common& o, const std::string& mode, int max_array) {
  if (o.in.empty()) throw UsageError("oracle needs --in <permutation file>");
  const Permutation p = load_or_generate(o);
  OracleLimits lim;
  lim.max_array = max_array;
  const OracleResult r =
      exact_distance(p, Permutation::identity(p.tiling()), mode == "S" ? DistanceMode::S : DistanceMode::E, lim);
  if (o.format == "json") {
    std::cout << json{{"mode", mode},
                      {"distance", r.distance},
                      {"l2", l2_to_identity(p)},
                      {"steps", r.witness.duration()},
                      {"states", r.states_settled}}
                     .dump()
              << '\n';
  } else {
    std::cout << "distance " << r.distance << "\nl2 " << l2_to_identity(p) << "\nstates " << r.states_settled
              << '\n';
  }
  if (!o.out.empty()) emit(o.out, [&](std::ostream& os) { write_flow(os, r.witness); });
  return 0;
}

int cmd_verify(const std::string& name) {
  std::vector<const suites::SuiteInfo*> todo;
  if (name == "all") {
    for (const auto& s : suites::registry()) todo.push_back(&s);
  } else if (const auto* s = suites::find(name)) {
    todo.push_back(s);
  } else {
    std::string known;
    for (const auto& s : suites::registry()) known += " " + s.name;
    throw UsageError("unknown suite '" + name + "'; known:" + known + " all");
  }
  bool pass = true;
  for (const auto* s : todo) {
    const suites::SuiteResult r = s->run();
    std::cout << r.to_json().dump() << std::endl;
    pass = pass && r.pass;
  }
  return pass ? 0 : 1;
}

int cmd_field(const Common& o, int m, const std::string& action, double h, double x, double y) {
  const FrameParams fp = make_frame(o.n, m, o.epsilon);
  const PiecewiseField f = build_swap_field(fp);
  if (action == "build") {
    emit(o.out, [&](std::ostream& os) { write_field_spec(os, f); });
    return 0;
  }
  if (action == "trace") {
    const FlowTrace tr = integrate_time1_map(f, {x, y}, h, true);
    emit(o.out, [&](std::ostream& os) { write_trace_csv(os, tr); });
    return 0;
  }
  // verify
  const double norm = l1l2_norm(f);
  const double residual = weak_divergence_residual(f, standard_bumps(fp));
  const SwapMapReport map = verify_swap_map(fp, 20, h, o.seed);
  const bool ok = map.ok && residual <= 1e-6 && norm <= 20.0 * m / (static_cast<double>(o.n) * o.n);
  const json j = {{"N", o.n},
                  {"M", m},
                  {"epsilon", fp.epsilon()},
                  {"norm", norm},
                  {"norm_bound", 20.0 * m / (static_cast<double>(o.n) * o.n)},
                  {"discrete_l2", discrete_swap_l2(fp)},
                  {"residual", residual},
                  {"map", map.describe()},
                  {"ok", ok}};
  std::cout << (o.format == "json" ? j.dump() : j.dump(2)) << '\n';
  return ok ? 0 : 1;
}

int cmd_exponent(const Common& o, const std::vector<int>& ns, const std::vector<double>& deltas, int seeds,
                 unsigned threads) {
  std::vector<std::uint64_t> seed_list;
  for (int i = 0; i < seeds; ++i) seed_list.push_back(o.seed + static_cast<std::uint64_t>(i));
  const ExperimentTable tab = exponent_experiment(o.nu, ns, deltas, seed_list, threads);
  emit(o.out, [&](std::ostream& os) { write_csv(os, tab); });
  std::cerr << "rows " << tab.rows.size() << ", log-log slope " << tab.slope << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete flows of cube permutations"};
  app.require_subcommand(1);

  Common o;
  auto* gen = app.add_subcommand("gen", "random permutation at a target distance");
  add_common(gen, o);
  auto* cost = app.add_subcommand("cost", "recompute the cost of a flow file");
  add_common(cost, o, false);
  auto* connect = app.add_subcommand("connect", "connect a permutation to the identity");
  add_common(connect, o);
  auto* oracle = app.add_subcommand("oracle", "exact distance on a small tiling");
  add_common(oracle, o, false);
  std::string mode = "E";
  int max_array = 0;
  oracle->add_option("--mode", mode, "S or E")->check(CLI::IsMember({"S", "E"}));
  oracle->add_option("--max-array", max_array, "longest array in E generators (0: any)");
  auto* verify = app.add_subcommand("verify", "run an acceptance suite");
  std::string suite;
  verify->add_option("suite", suite, "suite name or 'all'")->required();
  auto* field = app.add_subcommand("field", "build, verify or trace the swap field");
  add_common(field, o, false);
  int m = 2;
  std::string action = "verify";
  double h = 1e-4, x0 = 0.0, y0 = 0.0;
  field->add_option("--M", m, "cubes in the swapped row")->check(CLI::Range(2, 1 << 20));
  field->add_option("action", action, "build, verify or trace")->check(CLI::IsMember({"build", "verify", "trace"}));
  field->add_option("--step", h, "integrator step")->check(CLI::PositiveNumber);
  field->add_option("--x", x0, "trace start x");
  field->add_option("--y", y0, "trace start y");
  auto* exponent = app.add_subcommand("exponent", "exponent experiment CSV");
  add_common(exponent, o, false);
  std::vector<int> ns = {32, 64};
  std::vector<double> deltas = {0.01, 0.02, 0.035, 0.05, 0.1, 0.2};
  int seeds = 5;
  unsigned threads = 0;
  exponent->add_option("--Ns", ns, "tiling sizes");
  exponent->add_option("--deltas", deltas, "target distances");
  exponent->add_option("--seeds", seeds, "seeds per point, starting at --seed")->check(CLI::PositiveNumber);
  exponent->add_option("--threads", threads, "worker threads (0: hardware)");

  if (argc <= 1) {
    std::cerr << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*gen) return cmd_gen(o);
    if (*cost) return cmd_cost(o);
    if (*connect) return cmd_connect(o);
    if (*oracle) return cmd_oracle(o, mode, max_array);
    if (*verify) return cmd_verify(suite);
    if (*field) return cmd_field(o, m, action, h, x0, y0);
    if (*exponent) return cmd_exponent(o, ns, deltas, seeds, threads);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
