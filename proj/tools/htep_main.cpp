#include <sys/resource.h>
#include <unistd.h>

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "htep/bench.hpp"
#include "htep/hddl.hpp"
#include "htep/log.hpp"
#include "htep/search.hpp"
#include "htep/validate.hpp"

namespace {

constexpr int kExitSolved = 0;
constexpr int kExitUnsolvable = 1;
constexpr int kExitBudget = 2;
constexpr int kExitUsage = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

htep::ProblemPtr load_problem(const std::string& domain_path, const std::string& problem_path,
                              bool prune) {
  auto dom = htep::hddl::parse_domain(read_file(domain_path));
  auto prob = htep::hddl::parse_problem(read_file(problem_path));
  htep::hddl::GroundOptions opts;
  opts.prune_unreachable = prune;
  return htep::hddl::ground(dom, prob, opts);
}

void write_or_print(const std::string& text, const std::string& path, std::ostream& fallback) {
  if (path.empty()) {
    fallback << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << text;
}

std::string self_exe_path() {
  char buf[4096];
  ssize_t n = readlink("/proc/self/exe", buf, sizeof(buf) - 1);
  if (n <= 0) return "htep";
  buf[n] = '\0';
  return buf;
}

int run_plan(const std::string& domain_path, const std::string& problem_path,
             const htep::SearchConfig& config, bool prune, const std::string& plan_out,
             const std::string& stats_out) {
  // hard address-space backstop well above the soft in-search budget
  rlimit lim{};
  lim.rlim_cur = lim.rlim_max =
      static_cast<rlim_t>(config.memory_budget_mb) * 4 * 1024 * 1024;
  setrlimit(RLIMIT_AS, &lim);

  auto problem = load_problem(domain_path, problem_path, prune);
  htep::SearchResult result = htep::htep(problem, config);
  HTEP_LOG_AT(1, "search finished: " << htep::outcome_name(result.outcome) << " in "
                                     << result.stats.wall_seconds << "s (wall)");

  std::optional<htep::Rational> makespan;
  std::string plan_text;
  if (result.outcome == htep::SearchOutcome::Solved) {
    makespan = htep::plan_makespan(*result.plan, *result.schedule);
    std::ostringstream out;
    htep::emit_plan(out, *problem, *result.plan, *result.schedule, config.epsilon);
    plan_text = out.str();
  }
  write_or_print(htep::stats_block(result, config.epsilon, makespan), stats_out, std::cerr);
  if (result.outcome == htep::SearchOutcome::Solved) {
    write_or_print(plan_text, plan_out, std::cout);
    return kExitSolved;
  }
  if (result.outcome == htep::SearchOutcome::Unsolvable) return kExitUnsolvable;
  return kExitBudget;
}

int run_validate(const std::string& domain_path, const std::string& problem_path,
                 const std::string& plan_path, const std::string& epsilon_override) {
  auto problem = load_problem(domain_path, problem_path, false);
  htep::PlanFile file = htep::parse_plan(read_file(plan_path), *problem);
  htep::Rational epsilon = file.epsilon.value_or(htep::Rational(1, 1000));
  if (!epsilon_override.empty()) {
    auto e = htep::parse_rational(epsilon_override);
    if (!e || *e <= htep::Rational(0)) throw std::runtime_error("invalid --epsilon");
    epsilon = *e;
  }
  htep::Verdict verdict = htep::validate_actions(*problem, file.actions, epsilon, file.makespan);
  std::cout << verdict.report();
  return verdict.accepted() ? kExitSolved : kExitUnsolvable;
}

int run_bench(const std::string& manifest_path, const std::string& configs_path,
              const std::string& csv_path, const std::string& plots_dir) {
  auto instances = htep::load_manifest(manifest_path);
  auto configs =
      configs_path.empty() ? htep::default_configs() : htep::load_configs(configs_path);
  auto records = htep::run_suite(instances, configs, self_exe_path());
  std::string csv = htep::to_csv(records);
  if (!csv_path.empty()) {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + csv_path);
    out << csv;
  }
  auto scores = htep::ipc_scores(records);
  std::cout << htep::score_table(scores);
  if (!plots_dir.empty()) htep::write_plot_scripts(plots_dir, records, scores);
  return kExitSolved;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"htep: temporal HTN planner with snap-action compilation"};
  app.require_subcommand(1);

  std::string domain_path, problem_path, plan_path;
  std::string heuristic = "tdgm";
  std::string strategy = "lcfr";
  std::string epsilon = "1/1000";
  htep::SearchConfig config;
  bool prune = false;
  std::string plan_out, stats_out;

  auto* plan_cmd = app.add_subcommand("plan", "search for a plan");
  plan_cmd->add_option("domain", domain_path)->required();
  plan_cmd->add_option("problem", problem_path)->required();
  plan_cmd->add_option("--heuristic", heuristic, "tdgm | f_tc | fape");
  plan_cmd->add_option("--flaw-strategy", strategy, "lcfr | fape");
  plan_cmd->add_option("--epsilon", epsilon, "separation for strict orderings (rational)");
  plan_cmd->add_option("--timeout", config.time_budget_seconds, "seconds");
  plan_cmd->add_option("--mem", config.memory_budget_mb, "MiB");
  plan_cmd->add_option("--node-cap", config.node_cap);
  plan_cmd->add_flag("--eager-metric", config.eager_metric,
                     "run the metric solver on every generated plan");
  plan_cmd->add_option("--wu", config.weights.unrefined, "h_fape weight: unrefined tasks");
  plan_cmd->add_option("--wo", config.weights.open, "h_fape weight: open preconditions");
  plan_cmd->add_option("--wt", config.weights.threat, "h_fape weight: threats");
  plan_cmd->add_option("--credit", config.weights.link_credit, "h_tdgm causal link credit");
  plan_cmd->add_flag("--prune-unreachable", prune, "delete-relaxation grounding filter");
  plan_cmd->add_option("--plan-out", plan_out);
  plan_cmd->add_option("--stats-out", stats_out);

  std::string epsilon_override;
  auto* validate_cmd = app.add_subcommand("validate", "check a plan file");
  validate_cmd->add_option("domain", domain_path)->required();
  validate_cmd->add_option("problem", problem_path)->required();
  validate_cmd->add_option("planfile", plan_path)->required();
  validate_cmd->add_option("--epsilon", epsilon_override, "override the plan file's epsilon");

  std::string manifest_path, configs_path, csv_path, plots_dir;
  auto* bench_cmd = app.add_subcommand("bench", "run a benchmark suite");
  bench_cmd->add_option("manifest", manifest_path)->required();
  bench_cmd->add_option("--configs", configs_path);
  bench_cmd->add_option("--csv", csv_path);
  bench_cmd->add_option("--plots", plots_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (plan_cmd->parsed()) {
      auto h = htep::heuristic_from(heuristic);
      if (!h) throw std::runtime_error("unknown heuristic: " + heuristic);
      config.heuristic = *h;
      auto s = htep::strategy_from(strategy);
      if (!s) throw std::runtime_error("unknown flaw strategy: " + strategy);
      config.flaw_strategy = *s;
      auto e = htep::parse_rational(epsilon);
      if (!e || *e <= htep::Rational(0)) throw std::runtime_error("invalid --epsilon");
      config.epsilon = *e;
      return run_plan(domain_path, problem_path, config, prune, plan_out, stats_out);
    }
    if (validate_cmd->parsed()) {
      return run_validate(domain_path, problem_path, plan_path, epsilon_override);
    }
    return run_bench(manifest_path, configs_path, csv_path, plots_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
