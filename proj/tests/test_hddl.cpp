#include "htep/hddl.hpp"

#include <map>
#include <string>

#include "doctest.h"
#include "htep/plan.hpp"

using namespace htep;
using hddl::DomainAst;
using hddl::GroundError;
using hddl::ParseError;
using hddl::ProblemAst;

namespace {

const char* kGripperDomain = R"h((define (domain gripper)
  (:types room ball arm - object)
  (:predicates (at-robby ?r - room) (at ?b - ball ?r - room)
               (free ?a - arm) (carry ?b - ball ?a - arm))
  (:task shift :parameters (?b - ball))
  (:action pick
    :parameters (?b - ball ?r - room ?a - arm)
    :precondition (and (at ?b ?r) (at-robby ?r) (free ?a))
    :effect (and (carry ?b ?a) (not (at ?b ?r)) (not (free ?a))))
  (:action drop
    :parameters (?b - ball ?r - room ?a - arm)
    :precondition (and (carry ?b ?a) (at-robby ?r))
    :effect (and (at ?b ?r) (free ?a) (not (carry ?b ?a))))
  (:durative-action move
    :parameters (?from ?to - room)
    :duration (= ?duration 2)
    :condition (and (at start (at-robby ?from)))
    :effect (and (at start (not (at-robby ?from))) (at end (at-robby ?to))))
  (:method shift-via
    :parameters (?b - ball ?from ?to - room ?a - arm)
    :task (shift ?b)
    :subtasks (and (t1 (pick ?b ?from ?a)) (t2 (move ?from ?to)) (t3 (drop ?b ?to ?a)))
    :ordering (and (< (end t1) (start t2)) (< (end t2) (start t3))))))h";

const char* kGripperProblem = R"h((define (problem two-balls)
  (:domain gripper)
  (:objects ra rb - room b1 b2 - ball left - arm)
  (:htn :subtasks (and (shift b1)))
  (:init (at-robby ra) (at b1 ra) (at b2 ra) (free left))
  (:goal (and (at b1 rb)))))h";

std::size_t count_heads(const GroundProblem& p, std::string_view head, TaskKind kind) {
  std::size_t n = 0;
  for (const TaskNameInfo& info : p.task_names) {
    if (info.kind == kind && p.symbols.name(info.head) == head) ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("a minimal domain parses to one nullary predicate") {
  DomainAst d = hddl::parse_domain("(define (domain d) (:predicates (p)))");
  CHECK(d.name == "d");
  REQUIRE(d.predicates.size() == 1);
  CHECK(d.predicates[0].name == "p");
  CHECK(d.predicates[0].params.empty());
  CHECK(d.actions.empty());
}

TEST_CASE("keywords are case-insensitive and comments vanish") {
  const char* commented = R"h((DEFINE (Domain D) ; a domain
  ;; nothing but a predicate here
  (:PREDICATES (p)) ; trailing remark
))h";
  CHECK(hddl::parse_domain(commented) == hddl::parse_domain("(define (domain d) (:predicates (p)))"));
}

TEST_CASE("duration literals accept the rational forms") {
  auto dur_of = [](const std::string& lit) {
    std::string text = "(define (domain d) (:predicates (p)) (:durative-action w "
                       ":parameters () :duration (= ?duration " + lit + ")"
                       " :condition (and (at start (p))) :effect (and (at end (p)))))";
    return hddl::parse_domain(text).duratives.at(0).duration;
  };
  CHECK(dur_of("2") == rat(2));
  CHECK(dur_of("3/2") == rat(3, 2));
  CHECK(dur_of("2.5") == rat(5, 2));
  CHECK(dur_of("0.125") == rat(1, 8));

  CHECK_THROWS_AS(dur_of("0"), ParseError);
  CHECK_THROWS_AS(dur_of("-1"), ParseError);
  CHECK_THROWS_AS(dur_of("fast"), ParseError);
}

TEST_CASE("timed qualifiers land in the right buckets") {
  const char* text = R"h((define (domain d)
  (:predicates (p) (q) (r))
  (:durative-action w
    :parameters ()
    :duration (= ?duration 1)
    :condition (and (at start (p)) (over all (q)) (at end (r)))
    :effect (and (at start (q)) (at end (not (p)))))))h";
  DomainAst d = hddl::parse_domain(text);
  const hddl::DurativeDecl& w = d.duratives.at(0);
  REQUIRE(w.conditions.size() == 3);
  CHECK(w.conditions[0].when == hddl::When::AtStart);
  CHECK(w.conditions[1].when == hddl::When::OverAll);
  CHECK(w.conditions[2].when == hddl::When::AtEnd);
  REQUIRE(w.effects.size() == 2);
  CHECK(w.effects[0].when == hddl::When::AtStart);
  CHECK_FALSE(w.effects[0].negated);
  CHECK(w.effects[1].when == hddl::When::AtEnd);
  CHECK(w.effects[1].negated);

  // an over-all effect has no snap half to live on
  const char* bad = R"h((define (domain d)
  (:predicates (p))
  (:durative-action w
    :parameters ()
    :duration (= ?duration 1)
    :condition ()
    :effect (and (over all (p))))))h";
  CHECK_THROWS_AS(hddl::parse_domain(bad), ParseError);
}

TEST_CASE("ordering clauses map onto subtask endpoints") {
  DomainAst d = hddl::parse_domain(kGripperDomain);
  const hddl::MethodDecl& m = d.methods.at(0);
  REQUIRE(m.orderings.size() == 2);
  CHECK(m.orderings[0].left == hddl::TimeRef{"t1", Endpoint::End});
  CHECK(m.orderings[0].relation == Rel::Lt);
  CHECK(m.orderings[0].right == hddl::TimeRef{"t2", Endpoint::Start});

  SUBCASE("ordered-subtasks sugar chains end before start") {
    const char* text = R"h((define (domain d)
  (:predicates (p))
  (:task w :parameters ())
  (:action a :parameters () :effect (and (p)))
  (:method seq :parameters () :task (w)
    :ordered-subtasks (and (s1 (a)) (s2 (a)) (s3 (a))))))h";
    DomainAst parsed = hddl::parse_domain(text);
    const hddl::MethodDecl& seq = parsed.methods.at(0);
    REQUIRE(seq.orderings.size() == 2);
    CHECK(seq.orderings[0] == hddl::Ordering{{"s1", Endpoint::End}, Rel::Lt, {"s2", Endpoint::Start}});
    CHECK(seq.orderings[1] == hddl::Ordering{{"s2", Endpoint::End}, Rel::Lt, {"s3", Endpoint::Start}});
  }

  SUBCASE("bare labels abbreviate end-to-start for < and <= only") {
    const char* text = R"h((define (domain d)
  (:predicates (p))
  (:task w :parameters ())
  (:action a :parameters () :effect (and (p)))
  (:method seq :parameters () :task (w)
    :subtasks (and (s1 (a)) (s2 (a)))
    :ordering (and (< s1 s2)))))h";
    DomainAst parsed = hddl::parse_domain(text);
    const hddl::MethodDecl& seq = parsed.methods.at(0);
    REQUIRE(seq.orderings.size() == 1);
    CHECK(seq.orderings[0] == hddl::Ordering{{"s1", Endpoint::End}, Rel::Lt, {"s2", Endpoint::Start}});

    std::string eq = text;
    eq.replace(eq.find("(< s1 s2)"), 9, "(= s1 s2)");
    CHECK_THROWS_AS(hddl::parse_domain(eq), ParseError);
  }

  SUBCASE("unlabeled subtasks get positional labels") {
    const char* text = R"h((define (domain d)
  (:predicates (p))
  (:task w :parameters ())
  (:action a :parameters () :effect (and (p)))
  (:method seq :parameters () :task (w) :subtasks (and (a) (a)))))h";
    DomainAst parsed = hddl::parse_domain(text);
    const hddl::MethodDecl& seq = parsed.methods.at(0);
    REQUIRE(seq.subtasks.size() == 2);
    CHECK(seq.subtasks[0].label == "_t0");
    CHECK(seq.subtasks[1].label == "_t1");
  }
}

TEST_CASE("parse errors carry the offending position") {
  const char* text = "(define (domain d)\n  (:predicates (p))\n  (:bogus))";
  try {
    hddl::parse_domain(text);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line == 3);
    CHECK(e.col == 3);
    CHECK(std::string(e.what()).find(":bogus") != std::string::npos);
  }

  CHECK_THROWS_AS(hddl::parse_domain("(define (domain d)"), ParseError);
  CHECK_THROWS_AS(hddl::parse_domain("(define (domain d)) extra"), ParseError);
  CHECK_THROWS_AS(hddl::parse_domain(
                      "(define (domain d) (:predicates (p)) (:task w :parameters ())"
                      " (:action a :parameters () :effect (and (p)))"
                      " (:method m :parameters () :task (w)"
                      " :subtasks (and (s1 (a)) (s1 (a)))))"),
                  ParseError);
  CHECK_THROWS_AS(hddl::parse_domain(
                      "(define (domain d) (:predicates (p)) (:task w :parameters ())"
                      " (:action a :parameters () :effect (and (p)))"
                      " (:method m :parameters () :task (w)"
                      " :subtasks (and (s1 (a))) :ordering (and (< s1 s9))))"),
                  ParseError);
}

TEST_CASE("printed trees parse back to the same trees") {
  DomainAst d = hddl::parse_domain(kGripperDomain);
  CHECK(hddl::parse_domain(hddl::print_domain(d)) == d);

  ProblemAst p = hddl::parse_problem(kGripperProblem);
  CHECK(hddl::parse_problem(hddl::print_problem(p)) == p);
}

TEST_CASE("problem blocks capture objects, network, init and goal") {
  ProblemAst p = hddl::parse_problem(kGripperProblem);
  CHECK(p.name == "two-balls");
  CHECK(p.domain_name == "gripper");
  CHECK(p.objects.size() == 5);
  CHECK(p.objects[0] == hddl::TypedName{"ra", "room"});
  CHECK(p.objects[4] == hddl::TypedName{"left", "arm"});
  REQUIRE(p.network.size() == 1);
  CHECK(p.network[0].task == hddl::Atom{"shift", {"b1"}});
  CHECK(p.init.size() == 4);
  CHECK(p.goal.size() == 1);

  SUBCASE("an empty network leaves only the sentinels") {
    ProblemAst empty = hddl::parse_problem(
        "(define (problem e) (:domain gripper) (:htn :subtasks ()) (:init) (:goal (and)))");
    CHECK(empty.network.empty());
    DomainAst dom = hddl::parse_domain(kGripperDomain);
    ProblemPtr gp = hddl::ground(dom, empty);
    CHECK(gp->initial_state.empty());
    CHECK(gp->goal.empty());
    CHECK(gp->initial_network.empty());
    PartialPlan plan = initial_plan(gp);
    CHECK(plan.active_task_count() == 2);
  }

  SUBCASE("two subtasks with no ordering stay unordered") {
    ProblemAst two = hddl::parse_problem(
        "(define (problem e) (:domain gripper)"
        " (:htn :subtasks (and (shift b1) (shift b2)))"
        " (:init) (:goal (and)))");
    CHECK(two.network.size() == 2);
    CHECK(two.network_orderings.empty());
  }

  SUBCASE("ordered-subtasks sugar applies to the network too") {
    ProblemAst seq = hddl::parse_problem(
        "(define (problem e) (:domain gripper)"
        " (:htn :ordered-subtasks (and (s1 (shift b1)) (s2 (shift b2))))"
        " (:init) (:goal (and)))");
    REQUIRE(seq.network_orderings.size() == 1);
    CHECK(seq.network_orderings[0] ==
          hddl::Ordering{{"s1", Endpoint::End}, Rel::Lt, {"s2", Endpoint::Start}});
  }
}

TEST_CASE("grounding instantiates every type-correct tuple") {
  DomainAst dom = hddl::parse_domain(kGripperDomain);
  ProblemAst prob = hddl::parse_problem(kGripperProblem);
  ProblemPtr g = hddl::ground(dom, prob);

  // Independent enumeration: per-slot object counts multiplied out.
  std::map<std::string, std::size_t> objects = {{"room", 2}, {"ball", 2}, {"arm", 1}};
  auto tuples = [&](std::initializer_list<const char*> types) {
    std::size_t n = 1;
    for (const char* t : types) n *= objects.at(t);
    return n;
  };
  std::size_t picks = tuples({"ball", "room", "arm"});
  std::size_t drops = tuples({"ball", "room", "arm"});
  std::size_t moves = tuples({"room", "room"});
  std::size_t shifts = tuples({"ball"});
  std::size_t shift_vias = tuples({"ball", "room", "room", "arm"});

  CHECK(count_heads(*g, "pick", TaskKind::Snap) == picks);
  CHECK(count_heads(*g, "drop", TaskKind::Snap) == drops);
  CHECK(count_heads(*g, "move", TaskKind::Durative) == moves);
  CHECK(count_heads(*g, "move#start", TaskKind::Snap) == moves);
  CHECK(count_heads(*g, "move#end", TaskKind::Snap) == moves);
  CHECK(count_heads(*g, "shift", TaskKind::Abstract) == shifts);
  CHECK(g->methods.size() == shift_vias);
  // sentinels + snaps + three names per durative + abstracts
  CHECK(g->task_names.size() == 2 + picks + drops + 3 * moves + shifts);
  CHECK(g->snap_actions.size() == 2 + picks + drops + 2 * moves);
  CHECK(g->durative_actions.size() == moves);

  // Sentinels: effects of t0 are the initial state, preconditions of tinf the goal.
  CHECK(g->snap(g->t0_snap).add_effects == g->initial_state);
  CHECK(g->snap(g->t0_snap).preconditions.empty());
  CHECK(g->snap(g->tinf_snap).preconditions == g->goal);
  CHECK(g->initial_state.size() == 4);
  CHECK(g->goal.size() == 1);

  // The one network entry resolved to the abstract shift of b1.
  REQUIRE(g->initial_network.size() == 1);
  CHECK(g->name_info(g->initial_network[0]).kind == TaskKind::Abstract);
  CHECK(g->display_task_name(g->initial_network[0]) == "shift b1");

  // Method constraints point at subtask endpoints by position.
  const Method& m = g->method(0);
  REQUIRE(m.subtasks.size() == 3);
  REQUIRE(m.constraints.size() == 2);
  CHECK(m.constraints[0].left.subtask == 0);
  CHECK(m.constraints[0].left.endpoint == Endpoint::End);
  CHECK(m.constraints[0].relation == Rel::Lt);
  CHECK(m.constraints[0].right.subtask == 1);
  CHECK(m.constraints[0].right.endpoint == Endpoint::Start);
}

TEST_CASE("grounding is deterministic") {
  DomainAst dom = hddl::parse_domain(kGripperDomain);
  ProblemAst prob = hddl::parse_problem(kGripperProblem);
  ProblemPtr a = hddl::ground(dom, prob);
  ProblemPtr b = hddl::ground(dom, prob);
  REQUIRE(a->task_names.size() == b->task_names.size());
  for (std::size_t i = 0; i < a->task_names.size(); ++i) {
    CHECK(a->display_task_name(static_cast<TaskNameId>(i)) ==
          b->display_task_name(static_cast<TaskNameId>(i)));
  }
  CHECK(a->initial_state == b->initial_state);
  CHECK(a->methods.size() == b->methods.size());
}

TEST_CASE("subtypes inherit membership from their parents") {
  const char* dom_text = R"h((define (domain d)
  (:types vehicle - object truck - vehicle)
  (:predicates (ready ?v - vehicle))
  (:action go :parameters (?v - vehicle) :effect (and (ready ?v)))
  (:action haul :parameters (?t - truck) :effect (and (ready ?t)))))h";
  const char* prob_text = R"h((define (problem p) (:domain d)
  (:objects v1 - vehicle t1 - truck)
  (:init) (:goal (and))))h";
  ProblemPtr g = hddl::ground(hddl::parse_domain(dom_text), hddl::parse_problem(prob_text));
  CHECK(count_heads(*g, "go", TaskKind::Snap) == 2);
  CHECK(count_heads(*g, "haul", TaskKind::Snap) == 1);
}

TEST_CASE("three objects of a parameter type give three ground actions") {
  const char* dom_text = R"h((define (domain d)
  (:types thing - object)
  (:predicates (seen ?x - thing))
  (:action look :parameters (?x - thing) :effect (and (seen ?x)))))h";
  const char* prob_text = R"h((define (problem p) (:domain d)
  (:objects a b c - thing) (:init) (:goal (and))))h";
  ProblemPtr g = hddl::ground(hddl::parse_domain(dom_text), hddl::parse_problem(prob_text));
  CHECK(count_heads(*g, "look", TaskKind::Snap) == 3);
}

TEST_CASE("zero objects of a required type just drop the schema") {
  const char* dom_text = R"h((define (domain d)
  (:types thing ghost - object)
  (:predicates (seen ?x - thing) (spooked ?g - ghost))
  (:action look :parameters (?x - thing) :effect (and (seen ?x)))
  (:action haunt :parameters (?g - ghost) :effect (and (spooked ?g)))))h";
  const char* prob_text = R"h((define (problem p) (:domain d)
  (:objects a - thing) (:init) (:goal (seen a))))h";
  ProblemPtr g = hddl::ground(hddl::parse_domain(dom_text), hddl::parse_problem(prob_text));
  CHECK(count_heads(*g, "haunt", TaskKind::Snap) == 0);
  CHECK(count_heads(*g, "look", TaskKind::Snap) == 1);
}

TEST_CASE("type-incorrect method instances are skipped silently") {
  const char* dom_text = R"h((define (domain d)
  (:types thing stone - object)
  (:predicates (seen ?x - thing))
  (:task w :parameters ())
  (:action look :parameters (?x - thing) :effect (and (seen ?x)))
  (:method look-anything :parameters (?o - object) :task (w)
    :subtasks (and (s (look ?o))))))h";
  const char* prob_text = R"h((define (problem p) (:domain d)
  (:objects a - thing r - stone) (:init) (:goal (and))))h";
  ProblemPtr g = hddl::ground(hddl::parse_domain(dom_text), hddl::parse_problem(prob_text));
  // Only the binding ?o=a yields an instantiated subtask; ?o=r never existed.
  CHECK(g->methods.size() == 1);
}

TEST_CASE("grounding rejects broken references with clear messages") {
  DomainAst dom = hddl::parse_domain(kGripperDomain);

  auto prob_with = [&](const std::string& body) {
    return hddl::parse_problem("(define (problem p) (:domain gripper) " + body + ")");
  };

  SUBCASE("mismatched domain name") {
    ProblemAst p = hddl::parse_problem(
        "(define (problem p) (:domain other) (:init) (:goal (and)))");
    CHECK_THROWS_AS(hddl::ground(dom, p), GroundError);
  }
  SUBCASE("undeclared object in init") {
    CHECK_THROWS_AS(hddl::ground(dom, prob_with("(:init (at-robby nowhere)) (:goal (and))")),
                    GroundError);
  }
  SUBCASE("arity mismatch in goal") {
    CHECK_THROWS_AS(
        hddl::ground(dom, prob_with("(:objects ra - room) (:init) (:goal (at-robby ra ra))")),
        GroundError);
  }
  SUBCASE("object type does not fit the predicate slot") {
    CHECK_THROWS_AS(
        hddl::ground(dom, prob_with("(:objects b9 - ball) (:init (at-robby b9)) (:goal (and))")),
        GroundError);
  }
  SUBCASE("network task without a type-correct instance") {
    CHECK_THROWS_AS(
        hddl::ground(dom, prob_with("(:objects ra - room) (:htn :subtasks (and (shift ra)))"
                                    " (:init) (:goal (and))")),
        GroundError);
  }
  SUBCASE("undeclared predicate in an action body") {
    const char* bad = R"h((define (domain d)
  (:predicates (p))
  (:action a :parameters () :effect (and (phantom)))))h";
    ProblemAst p = hddl::parse_problem("(define (problem p) (:domain d) (:init) (:goal (and)))");
    CHECK_THROWS_AS(hddl::ground(hddl::parse_domain(bad), p), GroundError);
  }
  SUBCASE("grounding cap cuts off a blowup") {
    ProblemAst p = hddl::parse_problem(kGripperProblem);
    hddl::GroundOptions opt;
    opt.cap = 5;
    try {
      hddl::ground(dom, p, opt);
      FAIL("expected the cap to fire");
    } catch (const GroundError& e) {
      CHECK(std::string(e.what()).find("cap") != std::string::npos);
    }
  }
}

TEST_CASE("reachability pruning drops unusable actions when asked") {
  const char* dom_text = R"h((define (domain d)
  (:types thing - object)
  (:predicates (seen ?x - thing) (blessed ?x - thing))
  (:task w :parameters (?x - thing))
  (:action look :parameters (?x - thing) :effect (and (seen ?x)))
  (:action admire :parameters (?x - thing)
    :precondition (and (blessed ?x)) :effect (and (seen ?x)))
  (:method via-look :parameters (?x - thing) :task (w ?x) :subtasks (and (s (look ?x))))
  (:method via-admire :parameters (?x - thing) :task (w ?x) :subtasks (and (s (admire ?x))))))h";
  const char* prob_text = R"h((define (problem p) (:domain d)
  (:objects a - thing)
  (:htn :subtasks (and (w a)))
  (:init) (:goal (seen a))))h";
  DomainAst dom = hddl::parse_domain(dom_text);
  ProblemAst prob = hddl::parse_problem(prob_text);

  ProblemPtr plain = hddl::ground(dom, prob);
  CHECK(count_heads(*plain, "admire", TaskKind::Snap) == 1);
  CHECK(plain->methods.size() == 2);

  hddl::GroundOptions opt;
  opt.prune_unreachable = true;
  ProblemPtr pruned = hddl::ground(dom, prob, opt);
  // nothing ever makes (blessed a), so admire and its method disappear
  CHECK(count_heads(*pruned, "admire", TaskKind::Snap) == 0);
  CHECK(count_heads(*pruned, "look", TaskKind::Snap) == 1);
  CHECK(pruned->methods.size() == 1);
}
