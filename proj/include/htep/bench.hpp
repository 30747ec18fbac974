#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "htep/search.hpp"
#include "htep/validate.hpp"

namespace htep {

struct PlanFileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Plan file: ';; epsilon = r' and ';; makespan = r' headers, then one line
// per snap action, '<time>: (<name> <args...>)', sorted by time then name.
struct PlanFile {
  std::optional<Rational> epsilon;
  std::optional<Rational> makespan;
  std::vector<ScheduledAction> actions;
};

void emit_plan(std::ostream& out, const GroundProblem& problem, const PartialPlan& plan,
               const Schedule& schedule, const Rational& epsilon);

PlanFile parse_plan(std::string_view text, const GroundProblem& problem);

struct BenchConfig {
  std::string id;
  SearchConfig search;
};

struct BenchInstance {
  std::string id;
  std::string domain_id;
  std::string domain_path;
  std::string problem_path;
};

struct RunRecord {
  std::string instance;
  std::string domain;
  std::string config;
  std::string outcome;  // solved | unsolvable | timeout | memory | nodecap | error
  double time = 0.0;    // deterministic effort time, see stats_block
  SearchStats stats;
  std::optional<Rational> makespan;
};

// Wall time is deliberately absent: 'time' is expanded/10000 seconds so that
// records, CSV, and IPC scores are byte-stable across reruns. Real wall time
// goes to the HTEP_LOG stderr channel only.
double effort_time(const SearchStats& stats);

std::string stats_block(const SearchResult& result, const Rational& epsilon,
                        const std::optional<Rational>& makespan);

struct IpcScores {
  std::map<std::string, double> time_total;
  std::map<std::string, double> quality_total;
  std::map<std::string, std::map<std::string, double>> time_by_domain;
  std::map<std::string, std::map<std::string, double>> quality_by_domain;
};

IpcScores ipc_scores(const std::vector<RunRecord>& records);

std::vector<BenchInstance> load_manifest(const std::string& path);
std::vector<BenchConfig> load_configs(const std::string& path);
std::vector<BenchConfig> default_configs();

// One fresh planner process per (instance, config) cell, sequential, in
// manifest x config order.
std::vector<RunRecord> run_suite(const std::vector<BenchInstance>& instances,
                                 const std::vector<BenchConfig>& configs,
                                 const std::string& self_exe);

std::string to_csv(const std::vector<RunRecord>& records);
std::string score_table(const IpcScores& scores);
void write_plot_scripts(const std::string& dir, const std::vector<RunRecord>& records,
                        const IpcScores& scores);

}  // namespace htep
