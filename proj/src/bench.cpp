#include "htep/bench.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "htep/log.hpp"
#include "json.hpp"

namespace htep {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

void emit_plan(std::ostream& out, const GroundProblem& problem, const PartialPlan& plan,
               const Schedule& schedule, const Rational& epsilon) {
  struct Line {
    Rational time;
    std::string name;
  };
  std::vector<Line> lines;
  for (TaskSym s : plan.active_tasks()) {
    if (s == plan.t0() || s == plan.tinf()) continue;
    const TaskRecord& r = plan.task(s);
    lines.push_back({schedule.times[static_cast<std::size_t>(start_var(s))],
                     problem.display_task_name(r.name)});
  }
  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    if (a.time != b.time) return a.time < b.time;
    return a.name < b.name;
  });
  out << ";; epsilon = " << to_string(epsilon) << "\n";
  out << ";; makespan = " << to_string(plan_makespan(plan, schedule)) << "\n";
  for (const Line& l : lines) {
    out << to_string(l.time) << ": (" << l.name << ")\n";
  }
}

PlanFile parse_plan(std::string_view text, const GroundProblem& problem) {
  std::map<std::string, TaskNameId> by_name;
  for (std::size_t i = 0; i < problem.task_names.size(); ++i) {
    by_name[problem.display_task_name(static_cast<TaskNameId>(i))] = static_cast<TaskNameId>(i);
  }

  PlanFile file;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw PlanFileError(msg + " at line " + std::to_string(line_no));
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    std::size_t last = line.find_last_not_of(" \t\r");
    std::string body = line.substr(first, last - first + 1);
    if (body.rfind(";;", 0) == 0) {
      std::istringstream hdr(body.substr(2));
      std::string key, eq, value;
      hdr >> key >> eq >> value;
      if (eq != "=" || value.empty()) fail("malformed header");
      auto r = parse_rational(value);
      if (!r) fail("malformed rational '" + value + "'");
      if (key == "epsilon") {
        file.epsilon = *r;
      } else if (key == "makespan") {
        file.makespan = *r;
      } else {
        fail("unknown header '" + key + "'");
      }
      continue;
    }
    std::size_t colon = body.find(':');
    if (colon == std::string::npos) fail("expected '<time>: (<name> ...)'");
    auto time = parse_rational(body.substr(0, colon));
    if (!time) fail("malformed timestamp '" + body.substr(0, colon) + "'");
    std::size_t open = body.find('(', colon);
    std::size_t close = body.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open) {
      fail("expected parenthesized action");
    }
    std::string name = body.substr(open + 1, close - open - 1);
    // collapse interior whitespace so lookup is textual
    std::istringstream parts(name);
    std::string word, canon;
    while (parts >> word) {
      if (!canon.empty()) canon += ' ';
      canon += word;
    }
    auto it = by_name.find(canon);
    if (it == by_name.end()) fail("unknown action '(" + canon + ")'");
    file.actions.push_back({*time, it->second});
  }
  return file;
}

double effort_time(const SearchStats& stats) {
  return static_cast<double>(stats.expanded) / 10000.0;
}

namespace {

std::string format_effort(double t) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", t);
  return buf;
}

}  // namespace

std::string stats_block(const SearchResult& result, const Rational& epsilon,
                        const std::optional<Rational>& makespan) {
  std::ostringstream out;
  out << "outcome=" << outcome_name(result.outcome) << "\n";
  out << "time=" << format_effort(effort_time(result.stats)) << "\n";
  out << "expanded=" << result.stats.expanded << "\n";
  out << "generated=" << result.stats.generated << "\n";
  out << "dead_qual=" << result.stats.dead_qualitative << "\n";
  out << "dead_metric=" << result.stats.dead_metric << "\n";
  out << "peak_open=" << result.stats.peak_open << "\n";
  out << "epsilon=" << to_string(epsilon) << "\n";
  if (makespan) out << "makespan=" << to_string(*makespan) << "\n";
  return out.str();
}

IpcScores ipc_scores(const std::vector<RunRecord>& records) {
  struct Best {
    double time = 0;
    Rational makespan{0};
    bool any = false;
  };
  std::map<std::string, Best> best;  // instance -> best among solvers
  for (const RunRecord& r : records) {
    if (r.outcome != "solved" || !r.makespan) continue;
    Best& b = best[r.instance];
    if (!b.any || r.time < b.time) b.time = r.time;
    if (!b.any || *r.makespan < b.makespan) b.makespan = *r.makespan;
    b.any = true;
  }

  IpcScores scores;
  for (const RunRecord& r : records) {
    double ts = 0.0;
    double qs = 0.0;
    auto it = best.find(r.instance);
    if (r.outcome == "solved" && r.makespan && it != best.end()) {
      const Best& b = it->second;
      if (r.time <= 1.0) {
        ts = 1.0;
      } else {
        double ref = std::max(b.time, 0.0001);
        ts = 1.0 / (1.0 + std::log10(r.time / ref));
      }
      if (b.makespan == Rational(0)) {
        qs = (*r.makespan == Rational(0)) ? 1.0 : 0.0;
      } else {
        qs = to_double(b.makespan) / to_double(*r.makespan);
      }
    }
    scores.time_total[r.config] += ts;
    scores.quality_total[r.config] += qs;
    scores.time_by_domain[r.config][r.domain] += ts;
    scores.quality_by_domain[r.config][r.domain] += qs;
  }
  return scores;
}

std::vector<BenchConfig> default_configs() {
  auto make = [](const std::string& id, HeuristicKind h, FlawStrategy s) {
    BenchConfig c;
    c.id = id;
    c.search.heuristic = h;
    c.search.flaw_strategy = s;
    return c;
  };
  return {
      make("tdgm-lcfr", HeuristicKind::Tdgm, FlawStrategy::Lcfr),
      make("ftc-lcfr", HeuristicKind::FTc, FlawStrategy::Lcfr),
      make("fape-fape", HeuristicKind::Fape, FlawStrategy::Fape),
  };
}

namespace {

std::string resolve_relative(const std::string& base_file, const std::string& rel) {
  std::filesystem::path p(rel);
  if (p.is_absolute()) return rel;
  return (std::filesystem::path(base_file).parent_path() / p).string();
}

}  // namespace

std::vector<BenchInstance> load_manifest(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("manifest " + path + ": " + e.what());
  }
  std::vector<BenchInstance> out;
  for (const auto& item : j.at("instances")) {
    BenchInstance inst;
    inst.id = item.at("id").get<std::string>();
    inst.domain_id = item.value("domain_id", inst.id);
    inst.domain_path = resolve_relative(path, item.at("domain").get<std::string>());
    inst.problem_path = resolve_relative(path, item.at("problem").get<std::string>());
    for (const std::string& f : {inst.domain_path, inst.problem_path}) {
      if (!std::filesystem::exists(f)) {
        throw std::runtime_error("manifest " + path + ": missing file " + f);
      }
    }
    out.push_back(std::move(inst));
  }
  if (out.empty()) throw std::runtime_error("manifest " + path + ": no instances");
  return out;
}

std::vector<BenchConfig> load_configs(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("configs " + path + ": " + e.what());
  }
  std::vector<BenchConfig> out;
  for (const auto& item : j.at("configs")) {
    BenchConfig c;
    c.id = item.at("id").get<std::string>();
    std::string h = item.value("heuristic", "tdgm");
    auto hk = heuristic_from(h);
    if (!hk) throw std::runtime_error("configs " + path + ": unknown heuristic " + h);
    c.search.heuristic = *hk;
    std::string s = item.value("flaw_strategy", "lcfr");
    auto fs = strategy_from(s);
    if (!fs) throw std::runtime_error("configs " + path + ": unknown flaw strategy " + s);
    c.search.flaw_strategy = *fs;
    if (item.contains("epsilon")) {
      auto e = parse_rational(item.at("epsilon").get<std::string>());
      if (!e || *e <= Rational(0)) throw std::runtime_error("configs " + path + ": bad epsilon");
      c.search.epsilon = *e;
    }
    c.search.time_budget_seconds = item.value("timeout", c.search.time_budget_seconds);
    c.search.memory_budget_mb = item.value("mem", c.search.memory_budget_mb);
    c.search.eager_metric = item.value("eager_metric", c.search.eager_metric);
    c.search.node_cap = item.value("node_cap", c.search.node_cap);
    if (item.contains("weights")) {
      const auto& w = item.at("weights");
      c.search.weights.unrefined = w.value("unrefined", c.search.weights.unrefined);
      c.search.weights.open = w.value("open", c.search.weights.open);
      c.search.weights.threat = w.value("threat", c.search.weights.threat);
      c.search.weights.link_credit = w.value("link_credit", c.search.weights.link_credit);
    }
    out.push_back(std::move(c));
  }
  if (out.empty()) throw std::runtime_error("configs " + path + ": no configs");
  return out;
}

namespace {

std::map<std::string, std::string> read_kv(const std::string& path) {
  std::map<std::string, std::string> kv;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

RunRecord run_one(const BenchInstance& inst, const BenchConfig& cfg, const std::string& self_exe,
                  const std::filesystem::path& tmp_dir, std::size_t cell) {
  RunRecord rec;
  rec.instance = inst.id;
  rec.domain = inst.domain_id;
  rec.config = cfg.id;
  rec.outcome = "error";

  std::string stats_path = (tmp_dir / ("stats-" + std::to_string(cell) + ".txt")).string();
  std::string plan_path = (tmp_dir / ("plan-" + std::to_string(cell) + ".txt")).string();
  char timeout_buf[32];
  std::snprintf(timeout_buf, sizeof(timeout_buf), "%.6g", cfg.search.time_budget_seconds);

  std::vector<std::string> args = {
      self_exe,
      "plan",
      inst.domain_path,
      inst.problem_path,
      "--heuristic", std::string(heuristic_name(cfg.search.heuristic)),
      "--flaw-strategy", std::string(strategy_name(cfg.search.flaw_strategy)),
      "--epsilon", to_string(cfg.search.epsilon),
      "--timeout", timeout_buf,
      "--mem", std::to_string(cfg.search.memory_budget_mb),
      "--node-cap", std::to_string(cfg.search.node_cap),
      "--wu", std::to_string(cfg.search.weights.unrefined),
      "--wo", std::to_string(cfg.search.weights.open),
      "--wt", std::to_string(cfg.search.weights.threat),
      "--credit", std::to_string(cfg.search.weights.link_credit),
      "--plan-out", plan_path,
      "--stats-out", stats_path,
  };
  if (cfg.search.eager_metric) args.push_back("--eager-metric");

  std::vector<char*> argv;
  argv.reserve(args.size() + 1);
  for (std::string& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);

  pid_t pid = fork();
  if (pid < 0) return rec;
  if (pid == 0) {
    int devnull = open("/dev/null", O_WRONLY);
    if (devnull >= 0) dup2(devnull, STDOUT_FILENO);
    execv(self_exe.c_str(), argv.data());
    _exit(127);
  }

  // hard watchdog well past the child's own budget, in case it wedges
  const double deadline = cfg.search.time_budget_seconds * 2.0 + 30.0;
  double waited = 0.0;
  int status = 0;
  for (;;) {
    pid_t done = waitpid(pid, &status, WNOHANG);
    if (done == pid) break;
    if (done < 0) return rec;
    if (waited > deadline) {
      kill(pid, SIGKILL);
      waitpid(pid, &status, 0);
      return rec;
    }
    usleep(20000);
    waited += 0.02;
  }

  auto kv = read_kv(stats_path);
  if (!kv.count("outcome")) return rec;
  rec.outcome = kv["outcome"];
  auto get_int = [&](const char* k) {
    return kv.count(k) ? std::strtoll(kv[k].c_str(), nullptr, 10) : 0;
  };
  rec.stats.expanded = get_int("expanded");
  rec.stats.generated = get_int("generated");
  rec.stats.dead_qualitative = get_int("dead_qual");
  rec.stats.dead_metric = get_int("dead_metric");
  rec.stats.peak_open = get_int("peak_open");
  rec.time = effort_time(rec.stats);
  if (kv.count("makespan")) rec.makespan = parse_rational(kv["makespan"]);
  if (rec.outcome == "solved" && !rec.makespan) rec.outcome = "error";
  return rec;
}

}  // namespace

std::vector<RunRecord> run_suite(const std::vector<BenchInstance>& instances,
                                 const std::vector<BenchConfig>& configs,
                                 const std::string& self_exe) {
  std::string tmpl = (std::filesystem::temp_directory_path() / "htep-bench-XXXXXX").string();
  std::vector<char> buf(tmpl.begin(), tmpl.end());
  buf.push_back('\0');
  if (!mkdtemp(buf.data())) throw std::runtime_error("cannot create temp dir");
  std::filesystem::path tmp_dir(buf.data());

  std::vector<RunRecord> records;
  std::size_t cell = 0;
  for (const BenchInstance& inst : instances) {
    for (const BenchConfig& cfg : configs) {
      HTEP_LOG_AT(1, "bench " << inst.id << " / " << cfg.id);
      records.push_back(run_one(inst, cfg, self_exe, tmp_dir, cell++));
    }
  }
  std::error_code ec;
  std::filesystem::remove_all(tmp_dir, ec);
  return records;
}

std::string to_csv(const std::vector<RunRecord>& records) {
  std::ostringstream out;
  out << "instance,domain,config,outcome,time,expanded,generated,dead_qual,dead_metric,peak_open,makespan\n";
  for (const RunRecord& r : records) {
    out << r.instance << ',' << r.domain << ',' << r.config << ',' << r.outcome << ','
        << format_effort(r.time) << ',' << r.stats.expanded << ',' << r.stats.generated << ','
        << r.stats.dead_qualitative << ',' << r.stats.dead_metric << ',' << r.stats.peak_open
        << ',' << (r.makespan ? to_string(*r.makespan) : "") << "\n";
  }
  return out.str();
}

std::string score_table(const IpcScores& scores) {
  std::ostringstream out;
  out << "config                time  quality\n";
  char buf[128];
  for (const auto& [config, t] : scores.time_total) {
    double q = scores.quality_total.count(config) ? scores.quality_total.at(config) : 0.0;
    std::snprintf(buf, sizeof(buf), "%-18s %7.2f  %7.2f\n", config.c_str(), t, q);
    out << buf;
  }
  out << "\nper-domain time scores:\n";
  for (const auto& [config, domains] : scores.time_by_domain) {
    for (const auto& [domain, t] : domains) {
      std::snprintf(buf, sizeof(buf), "%-18s %-12s %7.2f\n", config.c_str(), domain.c_str(), t);
      out << buf;
    }
  }
  return out.str();
}

void write_plot_scripts(const std::string& dir, const std::vector<RunRecord>& records,
                        const IpcScores& scores) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(std::filesystem::path(dir) / "records.csv");
    out << to_csv(records);
  }
  {
    std::ofstream out(std::filesystem::path(dir) / "scores.csv");
    out << "config,time_score,quality_score\n";
    for (const auto& [config, t] : scores.time_total) {
      double q = scores.quality_total.count(config) ? scores.quality_total.at(config) : 0.0;
      out << config << ',' << t << ',' << q << "\n";
    }
  }
  {
    std::ofstream out(std::filesystem::path(dir) / "ipc.gp");
    out << "set datafile separator ','\n"
        << "set style data histogram\n"
        << "set style histogram clustered gap 1\n"
        << "set style fill solid 0.8 border -1\n"
        << "set ylabel 'IPC score'\n"
        << "set xtics rotate by -30\n"
        << "set key top right\n"
        << "set terminal pngcairo size 800,500\n"
        << "set output 'ipc.png'\n"
        << "plot 'scores.csv' using 2:xtic(1) skip 1 title 'time', \\\n"
        << "     '' using 3 skip 1 title 'quality'\n";
  }
}

}  // namespace htep
