#include <CLI11.hpp>
#include <iostream>

#include "rhp/scenario/scenario.hpp"

using namespace rhp;

namespace {

enum Exit { kOk = 0, kUsage = 1, kInfeasible = 2, kBudget = 3 };

int run_receding(const Scenario& sc, const std::string& metrics, const std::string& trace) {
  const auto& p = sc.problem;
  auto b = run_with_backtracking(p, sc.engine, sc.ordering);
  const auto& e = b.exec;
  if (!metrics.empty()) {
    std::ofstream out(metrics);
    if (!out) throw Error("cannot write '" + metrics + "'");
    write_metrics(out, p, e);
  }
  if (!trace.empty()) {
    std::ofstream out(trace);
    if (!out) throw Error("cannot write '" + trace + "'");
    write_trace(out, p, e);
  }
  std::size_t max_h = 0, max_H = 0, max_qp = 0;
  for (const auto& r : e.log)
    for (const auto& c : r.classes) {
      max_h = std::max(max_h, c.h);
      max_H = std::max(max_H, c.H);
      max_qp = std::max(max_qp, c.q_p);
    }
  std::vector<std::size_t> ordering = sc.ordering;
  if (ordering.empty())
    for (std::size_t i = 0; i < p.size(); ++i) ordering.push_back(i);
  auto stalled = stalled_windows(p, e, ordering, sc.window);
  std::cout << "receding: " << e.log.size() << " iterations, " << b.backtracks << " backtracks, max h "
            << max_h << ", max H " << max_H << ", max |Q_P| " << max_qp << "\n";
  for (std::size_t i = 0; i < p.size(); ++i)
    std::cout << "  agent " << p.agents[i].name << ": " << e.counters[i] << " accepting visits\n";
  std::cout << "  windows of " << sc.window << " without progress of the top agent: " << stalled.size() << "\n";
  return kOk;
}

int run_centralized(const Scenario& sc) {
  const auto& p = sc.problem;
  std::vector<StateId> q0;
  std::vector<std::size_t> ordering;
  for (std::size_t i = 0; i < p.size(); ++i) {
    q0.push_back(p.agents[i].spec.initial());
    ordering.push_back(i);
  }
  auto classes = dependency_partition(p, q0, kInfinity, ordering).classes;
  for (const auto& r : size_report(p, classes)) {
    std::cout << "centralized class {";
    for (std::size_t k = 0; k < r.members.size(); ++k) std::cout << (k ? "," : "") << p.agents[r.members[k]].name;
    std::cout << "}: " << static_cast<unsigned long long>(r.analytic) << " joint system states\n";
  }
  auto sol = solve_centralized(p, sc.state_cap);
  if (!sol) {
    std::cout << "centralized: no accepting lasso\n";
    return kInfeasible;
  }
  for (const auto& c : *sol) {
    std::cout << "centralized: product " << c.product_states << " states, " << c.product_transitions
              << " transitions\n";
    for (const auto& al : c.agents) {
      std::cout << "  agent " << p.agents[al.agent].name << " prefix";
      for (const auto& ev : al.prefix.events) std::cout << ' ' << format_event(ev, al.agent + 1);
      std::cout << " cycle";
      for (const auto& ev : al.cycle) std::cout << ' ' << format_event(ev, al.agent + 1);
      std::cout << '\n';
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Receding-horizon multi-agent LTL planner"};
  app.set_help_flag("--help", "print this help");
  std::string path, mode = "receding", metrics, trace;
  std::optional<std::size_t> iterations, h, H, max_h, max_H, window;
  app.add_option("--scenario", path, "scenario JSON")->required();
  app.add_option("--mode", mode, "receding, centralized or both")
      ->check(CLI::IsMember({"receding", "centralized", "both"}));
  app.add_option("--iterations", iterations);
  app.add_option("--h", h);
  app.add_option("--H", H);
  app.add_option("--max-h", max_h);
  app.add_option("--max-H", max_H);
  app.add_option("--metrics", metrics, "metrics CSV output");
  app.add_option("--trace", trace, "trace log output");
  app.add_option("--window", window, "progress window for the liveness check");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    Scenario sc = load_scenario(path);
    auto& hz = sc.engine.horizon;
    if (h) hz.h = *h;
    if (H) hz.H = *H;
    if (max_h) hz.h_max = *max_h;
    if (max_H) hz.H_max = *max_H;
    if (iterations) sc.engine.iterations = *iterations;
    if (window) sc.window = *window;
    if (hz.h < 1 || hz.H < 1 || sc.window < 1) throw ValidationError("horizons and window must be at least 1");
    if (hz.h_max < hz.h || hz.H_max < hz.H) throw ValidationError("horizon caps must not be below the horizons");
    int code = kOk;
    if (mode != "centralized") code = run_receding(sc, metrics, trace);
    if (mode != "receding") {
      int c = run_centralized(sc);
      if (code == kOk) code = c;
    }
    return code;
  } catch (const Infeasible& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return kBudget;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what();
    if (e.location) std::cerr << " (at " << e.location << ")";
    std::cerr << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
