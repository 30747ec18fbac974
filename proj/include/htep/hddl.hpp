#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "htep/model.hpp"

namespace htep {
namespace hddl {

// Lifted ASTs for the shipped HDDL subset (docs/hddl-subset.md). Symbols are
// lowercased at lexing; printing and re-parsing yields an equal AST.

struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, int line, int col)
      : std::runtime_error(msg + " at " + std::to_string(line) + ":" + std::to_string(col)),
        line(line),
        col(col) {}
  int line;
  int col;
};

struct GroundError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TypedName {
  std::string name;
  std::string type;
  bool operator==(const TypedName&) const = default;
};

struct Atom {
  std::string head;
  std::vector<std::string> terms;  // objects or ?variables
  bool operator==(const Atom&) const = default;
};

enum class When : std::uint8_t { AtStart, AtEnd, OverAll };

struct TimedCondition {
  When when = When::AtStart;
  Atom atom;
  bool operator==(const TimedCondition&) const = default;
};

struct TimedEffect {
  When when = When::AtStart;
  Atom atom;
  bool negated = false;
  bool operator==(const TimedEffect&) const = default;
};

struct Predicate {
  std::string name;
  std::vector<TypedName> params;
  bool operator==(const Predicate&) const = default;
};

struct TaskDecl {
  std::string name;
  std::vector<TypedName> params;
  bool operator==(const TaskDecl&) const = default;
};

// Instantaneous action; becomes one snap task name.
struct ActionDecl {
  std::string name;
  std::vector<TypedName> params;
  std::vector<Atom> preconditions;
  std::vector<Atom> add_effects;
  std::vector<Atom> delete_effects;
  bool operator==(const ActionDecl&) const = default;
};

struct DurativeDecl {
  std::string name;
  std::vector<TypedName> params;
  Rational duration{1};
  std::vector<TimedCondition> conditions;
  std::vector<TimedEffect> effects;
  bool operator==(const DurativeDecl&) const = default;
};

struct TimeRef {
  std::string label;
  Endpoint endpoint = Endpoint::Start;
  bool operator==(const TimeRef&) const = default;
};

struct Ordering {
  TimeRef left;
  Rel relation = Rel::Lt;
  TimeRef right;
  bool operator==(const Ordering&) const = default;
};

struct Subtask {
  std::string label;
  Atom task;
  bool operator==(const Subtask&) const = default;
};

struct MethodDecl {
  std::string name;
  std::vector<TypedName> params;
  Atom task;
  std::vector<Subtask> subtasks;
  std::vector<Ordering> orderings;
  bool operator==(const MethodDecl&) const = default;
};

struct DomainAst {
  std::string name;
  std::vector<TypedName> types;  // name - parent, parent defaults to "object"
  std::vector<Predicate> predicates;
  std::vector<TaskDecl> tasks;
  std::vector<ActionDecl> actions;
  std::vector<DurativeDecl> duratives;
  std::vector<MethodDecl> methods;
  bool operator==(const DomainAst&) const = default;
};

struct ProblemAst {
  std::string name;
  std::string domain_name;
  std::vector<TypedName> objects;
  std::vector<Subtask> network;
  std::vector<Ordering> network_orderings;
  std::vector<Atom> init;
  std::vector<Atom> goal;
  bool operator==(const ProblemAst&) const = default;
};

DomainAst parse_domain(std::string_view text);
ProblemAst parse_problem(std::string_view text);

std::string print_domain(const DomainAst& d);
std::string print_problem(const ProblemAst& p);

struct GroundOptions {
  std::size_t cap = 200000;  // ground task names, actions, and methods combined
  bool prune_unreachable = false;
};

ProblemPtr ground(const DomainAst& domain, const ProblemAst& problem,
                  const GroundOptions& options = {});

}  // namespace hddl
}  // namespace htep
