#include "htep/hddl.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace htep {
namespace hddl {

namespace {

// ---------------------------------------------------------------- s-exprs

struct SExpr {
  bool is_list = false;
  std::string atom;
  std::vector<SExpr> children;
  int line = 1;
  int col = 1;
};

[[noreturn]] void fail(const std::string& msg, const SExpr& at) {
  throw ParseError(msg, at.line, at.col);
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  struct Token {
    enum Kind { LParen, RParen, Symbol, End } kind = End;
    std::string text;
    int line = 1;
    int col = 1;
  };

  Token next() {
    skip_space();
    Token t;
    t.line = line_;
    t.col = col_;
    if (pos_ >= text_.size()) {
      t.kind = Token::End;
      return t;
    }
    char c = text_[pos_];
    if (c == '(') {
      advance();
      t.kind = Token::LParen;
      return t;
    }
    if (c == ')') {
      advance();
      t.kind = Token::RParen;
      return t;
    }
    t.kind = Token::Symbol;
    while (pos_ < text_.size()) {
      c = text_[pos_];
      if (c == '(' || c == ')' || c == ';' || std::isspace(static_cast<unsigned char>(c))) break;
      t.text.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      advance();
    }
    return t;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

SExpr read_sexpr(Lexer& lex, const Lexer::Token& first) {
  SExpr e;
  e.line = first.line;
  e.col = first.col;
  if (first.kind == Lexer::Token::Symbol) {
    e.atom = first.text;
    return e;
  }
  if (first.kind != Lexer::Token::LParen) {
    throw ParseError("expected '(' or symbol", first.line, first.col);
  }
  e.is_list = true;
  for (;;) {
    Lexer::Token t = lex.next();
    if (t.kind == Lexer::Token::RParen) return e;
    if (t.kind == Lexer::Token::End) throw ParseError("unbalanced '('", e.line, e.col);
    e.children.push_back(read_sexpr(lex, t));
  }
}

SExpr read_top(std::string_view text) {
  Lexer lex(text);
  Lexer::Token t = lex.next();
  SExpr e = read_sexpr(lex, t);
  Lexer::Token rest = lex.next();
  if (rest.kind != Lexer::Token::End) {
    throw ParseError("trailing content after top-level form", rest.line, rest.col);
  }
  return e;
}

// --------------------------------------------------------------- helpers

// Leading '_' is legal so that generated subtask labels ("_t0") reparse.
bool is_name(const std::string& s) {
  if (s.empty()) return false;
  if (!std::islower(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::islower(static_cast<unsigned char>(c)) ||
           std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '_';
  });
}

bool is_variable(const std::string& s) { return s.size() >= 2 && s[0] == '?' && is_name(s.substr(1)); }

const std::string& atom_of(const SExpr& e, const char* what) {
  if (e.is_list) fail(std::string("expected ") + what, e);
  return e.atom;
}

std::string name_of(const SExpr& e, const char* what) {
  const std::string& s = atom_of(e, what);
  if (!is_name(s)) fail(std::string("invalid ") + what + " '" + s + "'", e);
  return s;
}

bool head_is(const SExpr& e, std::string_view kw) {
  return e.is_list && !e.children.empty() && !e.children[0].is_list && e.children[0].atom == kw;
}

// name+ [- type] groups; names after the last '-' free group default to "object"
std::vector<TypedName> parse_typed_list(const std::vector<SExpr>& items, std::size_t begin,
                                        std::size_t end, const SExpr& ctx, bool variables) {
  std::vector<TypedName> out;
  std::vector<std::string> pending;
  for (std::size_t i = begin; i < end; ++i) {
    const std::string& s = atom_of(items[i], variables ? "variable" : "name");
    if (s == "-") {
      if (pending.empty()) fail("dangling '-' in typed list", items[i]);
      if (i + 1 >= end) fail("missing type after '-'", items[i]);
      std::string type = name_of(items[i + 1], "type name");
      ++i;
      for (std::string& n : pending) out.push_back({std::move(n), type});
      pending.clear();
    } else {
      if (variables && !is_variable(s)) fail("expected variable '" + s + "'", items[i]);
      if (!variables && !is_name(s)) fail("invalid name '" + s + "'", items[i]);
      pending.push_back(s);
    }
  }
  for (std::string& n : pending) out.push_back({std::move(n), "object"});
  (void)ctx;
  return out;
}

Atom parse_atom(const SExpr& e) {
  if (!e.is_list || e.children.empty()) fail("expected atom '(pred term*)'", e);
  Atom a;
  a.head = name_of(e.children[0], "predicate name");
  for (std::size_t i = 1; i < e.children.size(); ++i) {
    const std::string& t = atom_of(e.children[i], "term");
    if (!is_name(t) && !is_variable(t)) fail("invalid term '" + t + "'", e.children[i]);
    a.terms.push_back(t);
  }
  return a;
}

// X | () | (and X*)
std::vector<SExpr> unwrap_and(const SExpr& e) {
  if (!e.is_list) fail("expected a list", e);
  if (e.children.empty()) return {};
  if (head_is(e, "and")) {
    return std::vector<SExpr>(e.children.begin() + 1, e.children.end());
  }
  return {e};
}

std::vector<Atom> parse_condition(const SExpr& e) {
  std::vector<Atom> out;
  for (const SExpr& c : unwrap_and(e)) out.push_back(parse_atom(c));
  return out;
}

std::pair<Atom, bool> parse_literal(const SExpr& e) {
  if (head_is(e, "not")) {
    if (e.children.size() != 2) fail("(not ...) takes one atom", e);
    return {parse_atom(e.children[1]), true};
  }
  return {parse_atom(e), false};
}

When parse_when(const SExpr& e, std::size_t* body_index) {
  if (!e.is_list || e.children.size() < 3) fail("expected (at start ...), (at end ...) or (over all ...)", e);
  const std::string& a = atom_of(e.children[0], "time qualifier");
  const std::string& b = atom_of(e.children[1], "time qualifier");
  *body_index = 2;
  if (a == "at" && b == "start") return When::AtStart;
  if (a == "at" && b == "end") return When::AtEnd;
  if (a == "over" && b == "all") return When::OverAll;
  fail("unknown time qualifier '(" + a + " " + b + " ...)'", e);
}

Rational parse_duration(const SExpr& e) {
  // (= ?duration <rational>)
  if (!e.is_list || e.children.size() != 3 || atom_of(e.children[0], "'='") != "=" ||
      atom_of(e.children[1], "?duration") != "?duration") {
    fail("expected (= ?duration <positive rational>)", e);
  }
  const std::string& text = atom_of(e.children[2], "duration literal");
  auto r = parse_rational(text);
  if (!r || *r <= Rational(0)) fail("duration must be a positive rational literal", e.children[2]);
  return *r;
}

std::optional<Rel> rel_from(const std::string& s) {
  if (s == "<") return Rel::Lt;
  if (s == "<=") return Rel::Le;
  if (s == ">") return Rel::Gt;
  if (s == ">=") return Rel::Ge;
  if (s == "=") return Rel::Eq;
  if (s == "!=") return Rel::Ne;
  return std::nullopt;
}

TimeRef parse_time_ref(const SExpr& e) {
  if (!e.is_list || e.children.size() != 2) fail("expected (start <label>) or (end <label>)", e);
  const std::string& which = atom_of(e.children[0], "endpoint");
  TimeRef r;
  r.label = name_of(e.children[1], "subtask label");
  if (which == "start") {
    r.endpoint = Endpoint::Start;
  } else if (which == "end") {
    r.endpoint = Endpoint::End;
  } else {
    fail("expected 'start' or 'end'", e.children[0]);
  }
  return r;
}

Ordering parse_ordering(const SExpr& e) {
  if (!e.is_list || e.children.size() != 3) fail("expected (<rel> <ref> <ref>)", e);
  auto rel = rel_from(atom_of(e.children[0], "relation"));
  if (!rel) fail("unknown relation '" + e.children[0].atom + "'", e.children[0]);
  Ordering o;
  o.relation = *rel;
  // Bare labels are whole-interval sugar, only meaningful for < and <=.
  if (!e.children[1].is_list && !e.children[2].is_list) {
    if (*rel != Rel::Lt && *rel != Rel::Le) {
      fail("bare-label ordering requires explicit (start ...)/(end ...) for this relation", e);
    }
    o.left = {name_of(e.children[1], "subtask label"), Endpoint::End};
    o.right = {name_of(e.children[2], "subtask label"), Endpoint::Start};
    return o;
  }
  o.left = parse_time_ref(e.children[1]);
  o.right = parse_time_ref(e.children[2]);
  return o;
}

std::vector<Subtask> parse_subtasks(const SExpr& e) {
  std::vector<Subtask> out;
  for (const SExpr& c : unwrap_and(e)) {
    if (!c.is_list || c.children.empty()) fail("expected subtask", c);
    Subtask st;
    if (c.children.size() == 2 && c.children[1].is_list) {
      st.label = name_of(c.children[0], "subtask label");
      st.task = parse_atom(c.children[1]);
    } else {
      st.label = "_t" + std::to_string(out.size());
      st.task = parse_atom(c);
    }
    out.push_back(std::move(st));
  }
  std::set<std::string> seen;
  for (const Subtask& st : out) {
    if (!seen.insert(st.label).second) fail("duplicate subtask label '" + st.label + "'", e);
  }
  return out;
}

void chain_ordered(const std::vector<Subtask>& subtasks, std::vector<Ordering>& orderings) {
  for (std::size_t i = 0; i + 1 < subtasks.size(); ++i) {
    Ordering o;
    o.left = {subtasks[i].label, Endpoint::End};
    o.relation = Rel::Lt;
    o.right = {subtasks[i + 1].label, Endpoint::Start};
    orderings.push_back(o);
  }
}

struct SectionReader {
  const std::vector<SExpr>& items;
  std::size_t pos;

  bool at_key() const {
    return pos < items.size() && !items[pos].is_list && !items[pos].atom.empty() &&
           items[pos].atom[0] == ':';
  }
  const std::string& key() const { return items[pos].atom; }
  const SExpr& value() {
    if (pos + 1 >= items.size() || (!items[pos + 1].is_list && items[pos + 1].atom[0] == ':')) {
      fail("missing value for " + items[pos].atom, items[pos]);
    }
    return items[++pos];
  }
};

}  // namespace

// ---------------------------------------------------------------- domain

DomainAst parse_domain(std::string_view text) {
  SExpr top = read_top(text);
  if (!head_is(top, "define") || top.children.size() < 2 || !top.children[1].is_list ||
      top.children[1].children.size() != 2 || !head_is(top.children[1], "domain")) {
    fail("expected (define (domain <name>) ...)", top);
  }
  DomainAst dom;
  dom.name = name_of(top.children[1].children[1], "domain name");

  for (std::size_t i = 2; i < top.children.size(); ++i) {
    const SExpr& sec = top.children[i];
    if (!sec.is_list || sec.children.empty() || sec.children[0].is_list) {
      fail("expected a (:keyword ...) section", sec);
    }
    const std::string& kw = sec.children[0].atom;
    if (kw == ":requirements") {
      continue;
    } else if (kw == ":types") {
      auto types = parse_typed_list(sec.children, 1, sec.children.size(), sec, false);
      dom.types.insert(dom.types.end(), types.begin(), types.end());
    } else if (kw == ":predicates") {
      for (std::size_t j = 1; j < sec.children.size(); ++j) {
        const SExpr& p = sec.children[j];
        if (!p.is_list || p.children.empty()) fail("expected (pred ?v - type ...)", p);
        Predicate pred;
        pred.name = name_of(p.children[0], "predicate name");
        pred.params = parse_typed_list(p.children, 1, p.children.size(), p, true);
        dom.predicates.push_back(std::move(pred));
      }
    } else if (kw == ":task") {
      if (sec.children.size() < 2) fail("expected (:task <name> :parameters (...))", sec);
      TaskDecl t;
      t.name = name_of(sec.children[1], "task name");
      SectionReader r{sec.children, 2};
      while (r.at_key()) {
        if (r.key() == ":parameters") {
          const SExpr& v = r.value();
          if (!v.is_list) fail("expected parameter list", v);
          t.params = parse_typed_list(v.children, 0, v.children.size(), v, true);
        } else {
          fail("unknown task section " + r.key(), sec.children[r.pos]);
        }
        ++r.pos;
      }
      dom.tasks.push_back(std::move(t));
    } else if (kw == ":action") {
      if (sec.children.size() < 2) fail("expected (:action <name> ...)", sec);
      ActionDecl a;
      a.name = name_of(sec.children[1], "action name");
      SectionReader r{sec.children, 2};
      while (r.at_key()) {
        const std::string key = r.key();
        const SExpr& v = r.value();
        if (key == ":parameters") {
          if (!v.is_list) fail("expected parameter list", v);
          a.params = parse_typed_list(v.children, 0, v.children.size(), v, true);
        } else if (key == ":precondition") {
          a.preconditions = parse_condition(v);
        } else if (key == ":effect") {
          for (const SExpr& lit : unwrap_and(v)) {
            auto [atom, neg] = parse_literal(lit);
            (neg ? a.delete_effects : a.add_effects).push_back(std::move(atom));
          }
        } else {
          fail("unknown action section " + key, v);
        }
        ++r.pos;
      }
      dom.actions.push_back(std::move(a));
    } else if (kw == ":durative-action") {
      if (sec.children.size() < 2) fail("expected (:durative-action <name> ...)", sec);
      DurativeDecl d;
      d.name = name_of(sec.children[1], "durative action name");
      bool have_duration = false;
      SectionReader r{sec.children, 2};
      while (r.at_key()) {
        const std::string key = r.key();
        const SExpr& v = r.value();
        if (key == ":parameters") {
          if (!v.is_list) fail("expected parameter list", v);
          d.params = parse_typed_list(v.children, 0, v.children.size(), v, true);
        } else if (key == ":duration") {
          d.duration = parse_duration(v);
          have_duration = true;
        } else if (key == ":condition") {
          for (const SExpr& c : unwrap_and(v)) {
            std::size_t body = 0;
            TimedCondition tc;
            tc.when = parse_when(c, &body);
            if (c.children.size() != body + 1) fail("expected one atom", c);
            tc.atom = parse_atom(c.children[body]);
            d.conditions.push_back(std::move(tc));
          }
        } else if (key == ":effect") {
          for (const SExpr& c : unwrap_and(v)) {
            std::size_t body = 0;
            TimedEffect te;
            te.when = parse_when(c, &body);
            if (te.when == When::OverAll) fail("effects cannot be 'over all'", c);
            if (c.children.size() != body + 1) fail("expected one literal", c);
            auto [atom, neg] = parse_literal(c.children[body]);
            te.atom = std::move(atom);
            te.negated = neg;
            d.effects.push_back(std::move(te));
          }
        } else {
          fail("unknown durative action section " + key, v);
        }
        ++r.pos;
      }
      if (!have_duration) fail("durative action '" + d.name + "' needs :duration", sec);
      dom.duratives.push_back(std::move(d));
    } else if (kw == ":method") {
      if (sec.children.size() < 2) fail("expected (:method <name> ...)", sec);
      MethodDecl m;
      m.name = name_of(sec.children[1], "method name");
      bool have_task = false;
      bool ordered_sugar = false;
      SectionReader r{sec.children, 2};
      while (r.at_key()) {
        const std::string key = r.key();
        const SExpr& v = r.value();
        if (key == ":parameters") {
          if (!v.is_list) fail("expected parameter list", v);
          m.params = parse_typed_list(v.children, 0, v.children.size(), v, true);
        } else if (key == ":task") {
          m.task = parse_atom(v);
          have_task = true;
        } else if (key == ":subtasks") {
          m.subtasks = parse_subtasks(v);
        } else if (key == ":ordered-subtasks") {
          m.subtasks = parse_subtasks(v);
          ordered_sugar = true;
        } else if (key == ":ordering") {
          for (const SExpr& o : unwrap_and(v)) m.orderings.push_back(parse_ordering(o));
        } else {
          fail("unknown method section " + key, v);
        }
        ++r.pos;
      }
      if (!have_task) fail("method '" + m.name + "' needs :task", sec);
      if (ordered_sugar) chain_ordered(m.subtasks, m.orderings);
      for (const Ordering& o : m.orderings) {
        for (const TimeRef& ref : {o.left, o.right}) {
          if (std::none_of(m.subtasks.begin(), m.subtasks.end(),
                           [&](const Subtask& st) { return st.label == ref.label; })) {
            fail("ordering references unknown label '" + ref.label + "'", sec);
          }
        }
      }
      dom.methods.push_back(std::move(m));
    } else {
      fail("unknown domain section " + kw, sec);
    }
  }
  return dom;
}

ProblemAst parse_problem(std::string_view text) {
  SExpr top = read_top(text);
  if (!head_is(top, "define") || top.children.size() < 2 || !top.children[1].is_list ||
      top.children[1].children.size() != 2 || !head_is(top.children[1], "problem")) {
    fail("expected (define (problem <name>) ...)", top);
  }
  ProblemAst prob;
  prob.name = name_of(top.children[1].children[1], "problem name");

  for (std::size_t i = 2; i < top.children.size(); ++i) {
    const SExpr& sec = top.children[i];
    if (!sec.is_list || sec.children.empty() || sec.children[0].is_list) {
      fail("expected a (:keyword ...) section", sec);
    }
    const std::string& kw = sec.children[0].atom;
    if (kw == ":domain") {
      if (sec.children.size() != 2) fail("expected (:domain <name>)", sec);
      prob.domain_name = name_of(sec.children[1], "domain name");
    } else if (kw == ":objects") {
      auto objs = parse_typed_list(sec.children, 1, sec.children.size(), sec, false);
      prob.objects.insert(prob.objects.end(), objs.begin(), objs.end());
    } else if (kw == ":htn") {
      bool ordered_sugar = false;
      SectionReader r{sec.children, 1};
      while (r.at_key()) {
        const std::string key = r.key();
        const SExpr& v = r.value();
        if (key == ":parameters") {
          if (!v.is_list || !v.children.empty()) fail("the :htn block takes no parameters", v);
        } else if (key == ":subtasks") {
          prob.network = parse_subtasks(v);
        } else if (key == ":ordered-subtasks") {
          prob.network = parse_subtasks(v);
          ordered_sugar = true;
        } else if (key == ":ordering") {
          for (const SExpr& o : unwrap_and(v)) prob.network_orderings.push_back(parse_ordering(o));
        } else {
          fail("unknown :htn section " + key, v);
        }
        ++r.pos;
      }
      if (ordered_sugar) chain_ordered(prob.network, prob.network_orderings);
      for (const Ordering& o : prob.network_orderings) {
        for (const TimeRef& ref : {o.left, o.right}) {
          if (std::none_of(prob.network.begin(), prob.network.end(),
                           [&](const Subtask& st) { return st.label == ref.label; })) {
            fail("ordering references unknown label '" + ref.label + "'", sec);
          }
        }
      }
    } else if (kw == ":init") {
      for (std::size_t j = 1; j < sec.children.size(); ++j) {
        prob.init.push_back(parse_atom(sec.children[j]));
      }
    } else if (kw == ":goal") {
      if (sec.children.size() != 2) fail("expected (:goal <condition>)", sec);
      prob.goal = parse_condition(sec.children[1]);
    } else {
      fail("unknown problem section " + kw, sec);
    }
  }
  if (prob.domain_name.empty()) fail("problem lacks a (:domain ...) section", top);
  return prob;
}

// --------------------------------------------------------------- printer

namespace {

void print_typed(std::ostream& out, const std::vector<TypedName>& list) {
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (i) out << " ";
    out << list[i].name << " - " << list[i].type;
  }
}

void print_atom(std::ostream& out, const Atom& a) {
  out << "(" << a.head;
  for (const std::string& t : a.terms) out << " " << t;
  out << ")";
}

void print_ref(std::ostream& out, const TimeRef& r) {
  out << "(" << (r.endpoint == Endpoint::Start ? "start " : "end ") << r.label << ")";
}

void print_orderings(std::ostream& out, const std::vector<Ordering>& os, const char* indent) {
  out << "(and";
  for (const Ordering& o : os) {
    out << "\n" << indent << "(" << rel_name(o.relation) << " ";
    print_ref(out, o.left);
    out << " ";
    print_ref(out, o.right);
    out << ")";
  }
  out << ")";
}

void print_subtasks(std::ostream& out, const std::vector<Subtask>& sts, const char* indent) {
  out << "(and";
  for (const Subtask& st : sts) {
    out << "\n" << indent << "(" << st.label << " ";
    print_atom(out, st.task);
    out << ")";
  }
  out << ")";
}

const char* when_name(When w) {
  switch (w) {
    case When::AtStart: return "at start";
    case When::AtEnd: return "at end";
    case When::OverAll: return "over all";
  }
  return "";
}

}  // namespace

std::string print_domain(const DomainAst& dom) {
  std::ostringstream out;
  out << "(define (domain " << dom.name << ")\n";
  if (!dom.types.empty()) {
    out << "  (:types ";
    print_typed(out, dom.types);
    out << ")\n";
  }
  if (!dom.predicates.empty()) {
    out << "  (:predicates";
    for (const Predicate& p : dom.predicates) {
      out << "\n    (" << p.name;
      if (!p.params.empty()) {
        out << " ";
        print_typed(out, p.params);
      }
      out << ")";
    }
    out << ")\n";
  }
  for (const TaskDecl& t : dom.tasks) {
    out << "  (:task " << t.name << " :parameters (";
    print_typed(out, t.params);
    out << "))\n";
  }
  for (const ActionDecl& a : dom.actions) {
    out << "  (:action " << a.name << "\n    :parameters (";
    print_typed(out, a.params);
    out << ")\n    :precondition (and";
    for (const Atom& c : a.preconditions) {
      out << " ";
      print_atom(out, c);
    }
    out << ")\n    :effect (and";
    for (const Atom& c : a.add_effects) {
      out << " ";
      print_atom(out, c);
    }
    for (const Atom& c : a.delete_effects) {
      out << " (not ";
      print_atom(out, c);
      out << ")";
    }
    out << "))\n";
  }
  for (const DurativeDecl& d : dom.duratives) {
    out << "  (:durative-action " << d.name << "\n    :parameters (";
    print_typed(out, d.params);
    out << ")\n    :duration (= ?duration " << to_string(d.duration) << ")";
    out << "\n    :condition (and";
    for (const TimedCondition& c : d.conditions) {
      out << "\n      (" << when_name(c.when) << " ";
      print_atom(out, c.atom);
      out << ")";
    }
    out << ")\n    :effect (and";
    for (const TimedEffect& e : d.effects) {
      out << "\n      (" << when_name(e.when) << " ";
      if (e.negated) out << "(not ";
      print_atom(out, e.atom);
      if (e.negated) out << ")";
      out << ")";
    }
    out << "))\n";
  }
  for (const MethodDecl& m : dom.methods) {
    out << "  (:method " << m.name << "\n    :parameters (";
    print_typed(out, m.params);
    out << ")\n    :task ";
    print_atom(out, m.task);
    out << "\n    :subtasks ";
    print_subtasks(out, m.subtasks, "      ");
    out << "\n    :ordering ";
    print_orderings(out, m.orderings, "      ");
    out << ")\n";
  }
  out << ")\n";
  return out.str();
}

std::string print_problem(const ProblemAst& prob) {
  std::ostringstream out;
  out << "(define (problem " << prob.name << ")\n";
  out << "  (:domain " << prob.domain_name << ")\n";
  if (!prob.objects.empty()) {
    out << "  (:objects ";
    print_typed(out, prob.objects);
    out << ")\n";
  }
  out << "  (:htn\n    :subtasks ";
  print_subtasks(out, prob.network, "      ");
  out << "\n    :ordering ";
  print_orderings(out, prob.network_orderings, "      ");
  out << ")\n";
  out << "  (:init";
  for (const Atom& a : prob.init) {
    out << "\n    ";
    print_atom(out, a);
  }
  out << ")\n";
  out << "  (:goal (and";
  for (const Atom& a : prob.goal) {
    out << " ";
    print_atom(out, a);
  }
  out << "))\n)\n";
  return out.str();
}

// -------------------------------------------------------------- grounder

namespace {

struct TypeTable {
  std::map<std::string, std::string> parent;

  void build(const DomainAst& dom) {
    parent["object"] = "";
    for (const TypedName& t : dom.types) {
      if (t.name == "object") throw GroundError("type 'object' cannot be redeclared");
      parent[t.name] = t.type;
    }
    for (const auto& [name, up] : parent) {
      if (name == "object") continue;
      if (!parent.count(up)) throw GroundError("type '" + name + "' has undeclared parent '" + up + "'");
      // cycle check: walking up must reach the root
      std::string cur = name;
      std::size_t steps = 0;
      while (cur != "object") {
        cur = parent.at(cur);
        if (++steps > parent.size()) throw GroundError("type cycle involving '" + name + "'");
      }
    }
  }

  bool declared(const std::string& t) const { return parent.count(t) != 0; }

  bool is_subtype(const std::string& t, const std::string& of) const {
    std::string cur = t;
    for (;;) {
      if (cur == of) return true;
      if (cur == "object") return false;
      cur = parent.at(cur);
    }
  }
};

struct GTask {
  TaskKind kind = TaskKind::Abstract;
  std::string head;
  std::vector<std::string> args;
  // snap
  PropSet pre, add, del;
  // durative
  PropSet pre_s, add_s, del_s, pre_e, add_e, del_e, inv;
  Rational duration{1};
};

struct GMethod {
  std::string name;
  std::vector<std::string> args;
  std::string task_key;
  std::vector<std::string> subtask_keys;
  std::vector<MethodConstraint> constraints;
};

std::string key_of(const std::string& head, const std::vector<std::string>& args) {
  std::string k = head;
  for (const std::string& a : args) {
    k += ' ';
    k += a;
  }
  return k;
}

class Grounder {
 public:
  Grounder(const DomainAst& dom, const ProblemAst& prob, const GroundOptions& opt)
      : dom_(dom), prob_(prob), opt_(opt) {}

  ProblemPtr run() {
    types_.build(dom_);
    index_declarations();
    collect_objects();
    instantiate_tasks();
    instantiate_methods();
    if (opt_.prune_unreachable) prune();
    return assemble();
  }

 private:
  using Binding = std::map<std::string, std::string>;

  const DomainAst& dom_;
  const ProblemAst& prob_;
  GroundOptions opt_;
  TypeTable types_;

  std::map<std::string, const Predicate*> predicates_;
  std::map<std::string, std::size_t> schema_arity_;  // task/action/durative namespace
  std::map<std::string, std::vector<std::string>> objects_of_;  // type -> objects
  std::vector<std::string> object_order_;
  std::map<std::string, std::string> object_type_;

  std::vector<GTask> ground_;               // deterministic emission order
  std::map<std::string, std::size_t> by_key_;
  std::vector<GMethod> methods_;
  std::size_t element_count_ = 0;

  void bump(const char* what) {
    if (++element_count_ > opt_.cap) {
      throw GroundError(std::string("grounding cap of ") + std::to_string(opt_.cap) +
                        " elements exceeded while instantiating " + what);
    }
  }

  void index_declarations() {
    for (const Predicate& p : dom_.predicates) {
      if (!predicates_.emplace(p.name, &p).second) {
        throw GroundError("duplicate predicate '" + p.name + "'");
      }
      for (const TypedName& v : p.params) {
        if (!types_.declared(v.type)) {
          throw GroundError("predicate '" + p.name + "' uses undeclared type '" + v.type + "'");
        }
      }
    }
    auto declare = [&](const std::string& name, std::size_t arity, const char* what) {
      if (!schema_arity_.emplace(name, arity).second) {
        throw GroundError(std::string("duplicate ") + what + " name '" + name + "'");
      }
    };
    for (const TaskDecl& t : dom_.tasks) declare(t.name, t.params.size(), "task");
    for (const ActionDecl& a : dom_.actions) declare(a.name, a.params.size(), "action");
    for (const DurativeDecl& d : dom_.duratives) declare(d.name, d.params.size(), "durative action");
    for (const auto& [name, arity] : schema_arity_) {
      (void)arity;
      if (predicates_.count(name)) {
        throw GroundError("'" + name + "' is both a predicate and a task name");
      }
    }
  }

  void collect_objects() {
    for (const TypedName& o : prob_.objects) {
      if (!types_.declared(o.type)) {
        throw GroundError("object '" + o.name + "' has undeclared type '" + o.type + "'");
      }
      if (object_type_.count(o.name)) throw GroundError("duplicate object '" + o.name + "'");
      object_type_[o.name] = o.type;
      object_order_.push_back(o.name);
    }
    for (const auto& [type, up] : types_.parent) {
      (void)up;
      auto& list = objects_of_[type];
      for (const std::string& o : object_order_) {
        if (types_.is_subtype(object_type_.at(o), type)) list.push_back(o);
      }
    }
  }

  // Every type-correct tuple, in declaration order of objects per slot.
  void for_each_binding(const std::vector<TypedName>& params,
                        const std::function<void(const Binding&)>& fn) {
    Binding binding;
    std::vector<std::size_t> idx(params.size(), 0);
    for (const TypedName& p : params) {
      if (!types_.declared(p.type)) {
        throw GroundError("parameter '" + p.name + "' has undeclared type '" + p.type + "'");
      }
      if (objects_of_.at(p.type).empty()) return;  // zero instances, not an error
    }
    for (;;) {
      binding.clear();
      for (std::size_t i = 0; i < params.size(); ++i) {
        binding[params[i].name] = objects_of_.at(params[i].type)[idx[i]];
      }
      fn(binding);
      std::size_t i = params.size();
      for (;;) {
        if (i == 0) return;
        --i;
        if (++idx[i] < objects_of_.at(params[i].type).size()) break;
        idx[i] = 0;
      }
    }
  }

  std::string subst(const std::string& term, const Binding& b, const char* ctx) const {
    if (!term.empty() && term[0] == '?') {
      auto it = b.find(term);
      if (it == b.end()) {
        throw GroundError(std::string("unbound variable '") + term + "' in " + ctx);
      }
      return it->second;
    }
    if (!object_type_.count(term)) {
      throw GroundError(std::string("undeclared object '") + term + "' in " + ctx);
    }
    return term;
  }

  Proposition make_prop(const Atom& atom, const Binding& b, const char* ctx) {
    auto it = predicates_.find(atom.head);
    if (it == predicates_.end()) {
      throw GroundError(std::string("undeclared predicate '") + atom.head + "' in " + ctx);
    }
    if (it->second->params.size() != atom.terms.size()) {
      throw GroundError("arity mismatch for '" + atom.head + "' in " + ctx + ": expected " +
                        std::to_string(it->second->params.size()) + " arguments");
    }
    Proposition p;
    p.predicate = symbols_.intern(atom.head);
    for (const std::string& t : atom.terms) {
      p.arguments.push_back(symbols_.intern(subst(t, b, ctx)));
    }
    return p;
  }

  PropId intern_prop(const Atom& atom, const Binding& b, const char* ctx) {
    return props_.intern(make_prop(atom, b, ctx));
  }

  PropSet prop_set(const std::vector<Atom>& atoms, const Binding& b, const char* ctx) {
    PropSet s;
    for (const Atom& a : atoms) s.push_back(intern_prop(a, b, ctx));
    normalize(s);
    return s;
  }

  std::vector<std::string> tuple_of(const std::vector<TypedName>& params, const Binding& b) {
    std::vector<std::string> out;
    out.reserve(params.size());
    for (const TypedName& p : params) out.push_back(b.at(p.name));
    return out;
  }

  void emit(GTask g) {
    bump(g.head.c_str());
    std::string key = key_of(g.head, g.args);
    if (by_key_.count(key)) throw GroundError("duplicate ground task '" + key + "'");
    by_key_[key] = ground_.size();
    ground_.push_back(std::move(g));
  }

  void instantiate_tasks() {
    for (const ActionDecl& a : dom_.actions) {
      for_each_binding(a.params, [&](const Binding& b) {
        GTask g;
        g.kind = TaskKind::Snap;
        g.head = a.name;
        g.args = tuple_of(a.params, b);
        const char* ctx = a.name.c_str();
        g.pre = prop_set(a.preconditions, b, ctx);
        g.add = prop_set(a.add_effects, b, ctx);
        g.del = prop_set(a.delete_effects, b, ctx);
        // an atom both added and deleted would make the effect ill-defined
        if (intersects(g.add, g.del)) {
          throw GroundError("action '" + key_of(g.head, g.args) + "' both adds and deletes an atom");
        }
        emit(std::move(g));
      });
    }
    for (const DurativeDecl& d : dom_.duratives) {
      for_each_binding(d.params, [&](const Binding& b) {
        GTask g;
        g.kind = TaskKind::Durative;
        g.head = d.name;
        g.args = tuple_of(d.params, b);
        g.duration = d.duration;
        const char* ctx = d.name.c_str();
        for (const TimedCondition& c : d.conditions) {
          PropId p = intern_prop(c.atom, b, ctx);
          switch (c.when) {
            case When::AtStart: g.pre_s.push_back(p); break;
            case When::AtEnd: g.pre_e.push_back(p); break;
            case When::OverAll: g.inv.push_back(p); break;
          }
        }
        for (const TimedEffect& e : d.effects) {
          PropId p = intern_prop(e.atom, b, ctx);
          if (e.when == When::AtStart) {
            (e.negated ? g.del_s : g.add_s).push_back(p);
          } else {
            (e.negated ? g.del_e : g.add_e).push_back(p);
          }
        }
        for (PropSet* s : {&g.pre_s, &g.add_s, &g.del_s, &g.pre_e, &g.add_e, &g.del_e, &g.inv}) {
          normalize(*s);
        }
        if (intersects(g.add_s, g.del_s) || intersects(g.add_e, g.del_e)) {
          throw GroundError("durative action '" + key_of(g.head, g.args) +
                            "' both adds and deletes an atom at one endpoint");
        }
        emit(std::move(g));
      });
    }
    for (const TaskDecl& t : dom_.tasks) {
      for_each_binding(t.params, [&](const Binding& b) {
        GTask g;
        g.kind = TaskKind::Abstract;
        g.head = t.name;
        g.args = tuple_of(t.params, b);
        emit(std::move(g));
      });
    }
  }

  std::optional<std::string> resolve_task_ref(const Atom& atom, const Binding& b,
                                              const char* ctx) {
    auto it = schema_arity_.find(atom.head);
    if (it == schema_arity_.end()) {
      throw GroundError(std::string("undeclared task '") + atom.head + "' in " + ctx);
    }
    if (it->second != atom.terms.size()) {
      throw GroundError("arity mismatch for task '" + atom.head + "' in " + ctx);
    }
    std::vector<std::string> args;
    for (const std::string& t : atom.terms) args.push_back(subst(t, b, ctx));
    std::string key = key_of(atom.head, args);
    // a type-incorrect tuple was simply never instantiated
    if (!by_key_.count(key)) return std::nullopt;
    return key;
  }

  void instantiate_methods() {
    std::set<std::string> abstract_names;
    for (const TaskDecl& t : dom_.tasks) abstract_names.insert(t.name);
    for (const MethodDecl& m : dom_.methods) {
      if (!abstract_names.count(m.task.head)) {
        throw GroundError("method '" + m.name + "' refines '" + m.task.head +
                          "', which is not a declared (:task ...)");
      }
      for_each_binding(m.params, [&](const Binding& b) {
        const char* ctx = m.name.c_str();
        GMethod g;
        auto task = resolve_task_ref(m.task, b, ctx);
        if (!task) return;
        g.task_key = *task;
        for (const Subtask& st : m.subtasks) {
          auto sub = resolve_task_ref(st.task, b, ctx);
          if (!sub) return;
          g.subtask_keys.push_back(*sub);
        }
        auto label_index = [&](const std::string& label) {
          for (std::size_t i = 0; i < m.subtasks.size(); ++i) {
            if (m.subtasks[i].label == label) return static_cast<std::int32_t>(i);
          }
          throw GroundError("unknown label '" + label + "' in " + m.name);
        };
        for (const Ordering& o : m.orderings) {
          MethodConstraint c;
          c.left = {label_index(o.left.label), o.left.endpoint};
          c.relation = o.relation;
          c.right = {label_index(o.right.label), o.right.endpoint};
          g.constraints.push_back(c);
        }
        g.name = m.name;
        g.args = tuple_of(m.params, b);
        bump(ctx);
        methods_.push_back(std::move(g));
      });
    }
  }

  // Delete-relaxed forward reachability from s0; drops actions whose
  // conditions cannot all be reached and methods that mention dropped names.
  void prune() {
    Binding empty;
    PropSet reached = prop_set(prob_.init, empty, ":init");
    bool grew = true;
    auto all_reached = [&](const PropSet& s) { return is_subset(s, reached); };
    std::vector<char> usable(ground_.size(), 0);
    while (grew) {
      grew = false;
      for (std::size_t i = 0; i < ground_.size(); ++i) {
        if (usable[i]) continue;
        const GTask& g = ground_[i];
        bool ok = false;
        if (g.kind == TaskKind::Snap) {
          ok = all_reached(g.pre);
          if (ok) reached = set_union(reached, g.add);
        } else if (g.kind == TaskKind::Durative) {
          ok = all_reached(g.pre_s);
          if (ok) {
            PropSet after = set_union(reached, g.add_s);
            if (is_subset(g.inv, after) && is_subset(g.pre_e, after)) {
              reached = set_union(after, g.add_e);
            } else {
              ok = false;
            }
          }
        } else {
          ok = true;  // abstract names prune through their methods
        }
        if (ok) {
          usable[i] = 1;
          grew = true;
        }
      }
    }
    std::vector<GTask> kept;
    std::map<std::string, std::size_t> kept_keys;
    for (std::size_t i = 0; i < ground_.size(); ++i) {
      if (!usable[i]) continue;
      kept_keys[key_of(ground_[i].head, ground_[i].args)] = kept.size();
      kept.push_back(std::move(ground_[i]));
    }
    std::vector<GMethod> kept_methods;
    for (GMethod& g : methods_) {
      bool ok = kept_keys.count(g.task_key) != 0;
      for (const std::string& k : g.subtask_keys) ok = ok && kept_keys.count(k) != 0;
      if (ok) kept_methods.push_back(std::move(g));
    }
    ground_ = std::move(kept);
    by_key_ = std::move(kept_keys);
    methods_ = std::move(kept_methods);
  }

  ProblemPtr assemble() {
    auto out = std::make_shared<GroundProblem>();
    out->symbols = std::move(symbols_);
    out->propositions = std::move(props_);
    out->domain_name = dom_.name;
    out->problem_name = prob_.name;

    Binding empty;
    // re-intern via the moved tables
    auto intern_atoms = [&](const std::vector<Atom>& atoms, const char* ctx) {
      PropSet s;
      for (const Atom& a : atoms) {
        auto it = predicates_.find(a.head);
        if (it == predicates_.end()) {
          throw GroundError(std::string("undeclared predicate '") + a.head + "' in " + ctx);
        }
        if (it->second->params.size() != a.terms.size()) {
          throw GroundError("arity mismatch for '" + a.head + "' in " + ctx);
        }
        Proposition p;
        p.predicate = out->symbols.intern(a.head);
        for (std::size_t i = 0; i < a.terms.size(); ++i) {
          const std::string& t = a.terms[i];
          if (t.empty() || t[0] == '?') {
            throw GroundError(std::string("variable '") + t + "' not allowed in " + ctx);
          }
          if (!object_type_.count(t)) {
            throw GroundError(std::string("undeclared object '") + t + "' in " + ctx);
          }
          if (!types_.is_subtype(object_type_.at(t), it->second->params[i].type)) {
            throw GroundError("object '" + t + "' does not fit type '" +
                              it->second->params[i].type + "' of '" + a.head + "' in " + ctx);
          }
          p.arguments.push_back(out->symbols.intern(t));
        }
        s.push_back(out->propositions.intern(p));
      }
      normalize(s);
      return s;
    };
    out->initial_state = intern_atoms(prob_.init, ":init");
    out->goal = intern_atoms(prob_.goal, ":goal");

    auto add_name = [&](const std::string& head, const std::vector<std::string>& args,
                        TaskKind kind) {
      TaskNameInfo info;
      info.head = out->symbols.intern(head);
      for (const std::string& a : args) info.args.push_back(out->symbols.intern(a));
      info.kind = kind;
      out->task_names.push_back(std::move(info));
      return static_cast<TaskNameId>(out->task_names.size() - 1);
    };
    auto add_snap = [&](TaskNameId name, PropSet pre, PropSet add, PropSet del) {
      SnapAction s;
      s.name = name;
      s.preconditions = std::move(pre);
      s.add_effects = std::move(add);
      s.delete_effects = std::move(del);
      out->snap_actions.push_back(std::move(s));
      SnapId id = static_cast<SnapId>(out->snap_actions.size() - 1);
      out->task_names[static_cast<std::size_t>(name)].snap = id;
      return id;
    };

    // sentinels first: symbols stay stable across domains
    out->t0_name = add_name("#t0", {}, TaskKind::Snap);
    out->t0_snap = add_snap(out->t0_name, {}, out->initial_state, {});
    out->tinf_name = add_name("#tinf", {}, TaskKind::Snap);
    out->tinf_snap = add_snap(out->tinf_name, out->goal, {}, {});

    std::map<std::string, TaskNameId> name_ids;
    for (const GTask& g : ground_) {
      switch (g.kind) {
        case TaskKind::Snap: {
          TaskNameId n = add_name(g.head, g.args, TaskKind::Snap);
          add_snap(n, g.pre, g.add, g.del);
          name_ids[key_of(g.head, g.args)] = n;
          break;
        }
        case TaskKind::Durative: {
          TaskNameId sn = add_name(g.head + "#start", g.args, TaskKind::Snap);
          SnapId start = add_snap(sn, g.pre_s, g.add_s, g.del_s);
          TaskNameId en = add_name(g.head + "#end", g.args, TaskKind::Snap);
          SnapId end = add_snap(en, g.pre_e, g.add_e, g.del_e);
          TaskNameId dn = add_name(g.head, g.args, TaskKind::Durative);
          DurativeAction d;
          d.name = dn;
          d.start = start;
          d.end = end;
          d.invariants = g.inv;
          d.duration = g.duration;
          out->durative_actions.push_back(std::move(d));
          out->task_names[static_cast<std::size_t>(dn)].durative =
              static_cast<DurId>(out->durative_actions.size() - 1);
          name_ids[key_of(g.head, g.args)] = dn;
          break;
        }
        case TaskKind::Abstract: {
          TaskNameId n = add_name(g.head, g.args, TaskKind::Abstract);
          name_ids[key_of(g.head, g.args)] = n;
          break;
        }
      }
    }

    for (const GMethod& g : methods_) {
      Method m;
      m.name = out->symbols.intern(key_of(g.name, g.args));
      m.task = name_ids.at(g.task_key);
      for (const std::string& k : g.subtask_keys) m.subtasks.push_back(name_ids.at(k));
      m.constraints = g.constraints;
      out->methods.push_back(std::move(m));
      MethodId id = static_cast<MethodId>(out->methods.size() - 1);
      out->task_names[static_cast<std::size_t>(m.task)].methods.push_back(id);
    }

    for (const Subtask& st : prob_.network) {
      auto it = schema_arity_.find(st.task.head);
      if (it == schema_arity_.end()) {
        throw GroundError("undeclared task '" + st.task.head + "' in :htn");
      }
      if (it->second != st.task.terms.size()) {
        throw GroundError("arity mismatch for task '" + st.task.head + "' in :htn");
      }
      std::vector<std::string> args;
      for (const std::string& t : st.task.terms) {
        if (t.empty() || t[0] == '?') throw GroundError("variable '" + t + "' not allowed in :htn");
        if (!object_type_.count(t)) throw GroundError("undeclared object '" + t + "' in :htn");
        args.push_back(t);
      }
      auto found = name_ids.find(key_of(st.task.head, args));
      if (found == name_ids.end()) {
        throw GroundError("initial task '" + key_of(st.task.head, args) +
                          "' has no type-correct instantiation");
      }
      out->initial_network.push_back(found->second);
    }
    auto label_index = [&](const std::string& label) {
      for (std::size_t i = 0; i < prob_.network.size(); ++i) {
        if (prob_.network[i].label == label) return static_cast<std::int32_t>(i);
      }
      throw GroundError("unknown label '" + label + "' in :htn ordering");
    };
    for (const Ordering& o : prob_.network_orderings) {
      MethodConstraint c;
      c.left = {label_index(o.left.label), o.left.endpoint};
      c.relation = o.relation;
      c.right = {label_index(o.right.label), o.right.endpoint};
      out->initial_constraints.push_back(c);
    }
    return out;
  }

  SymbolTable symbols_;
  PropositionTable props_;
};

}  // namespace

ProblemPtr ground(const DomainAst& domain, const ProblemAst& problem,
                  const GroundOptions& options) {
  if (domain.name != problem.domain_name) {
    throw GroundError("problem '" + problem.name + "' names domain '" + problem.domain_name +
                      "', got '" + domain.name + "'");
  }
  Grounder g(domain, problem, options);
  return g.run();
}

}  // namespace hddl
}  // namespace htep
