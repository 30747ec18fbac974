#include "htep/tpn.hpp"

#include <algorithm>
#include <cassert>
#include <deque>

namespace htep {

NetConstraint normalize_constraint(VarId left, Rel rel, VarId right,
                                   std::optional<Rational> offset) {
  assert(!offset || rel == Rel::Eq);
  switch (rel) {
    case Rel::Gt: return {right, left, Rel::Lt, std::nullopt};
    case Rel::Ge: return {right, left, Rel::Le, std::nullopt};
    default: return {left, right, rel, offset};
  }
}

namespace {

// Qualitative reading of a constraint: pairs of directed edges in the
// ordering graph. Eq contributes both directions; a metric Eq with positive
// offset is a strict order.
struct QualEdge {
  VarId from, to;
  bool strict;
};

void qualitative_edges(const NetConstraint& c, std::vector<QualEdge>& out) {
  switch (c.rel) {
    case Rel::Lt:
      out.push_back({c.left, c.right, true});
      break;
    case Rel::Le:
      out.push_back({c.left, c.right, false});
      break;
    case Rel::Eq:
      if (c.offset && *c.offset != Rational(0)) {
        if (*c.offset > Rational(0))
          out.push_back({c.left, c.right, true});
        else
          out.push_back({c.right, c.left, true});
      } else {
        out.push_back({c.left, c.right, false});
        out.push_back({c.right, c.left, false});
      }
      break;
    case Rel::Ne:
      break;
    default:
      assert(false && "constraint not normalized");
  }
}

std::shared_ptr<const Condensation> build_condensation(std::int32_t num_vars,
                                                       const std::vector<NetConstraint>& cs) {
  auto cond = std::make_shared<Condensation>();
  const std::size_t n = static_cast<std::size_t>(num_vars);

  std::vector<QualEdge> qedges;
  qedges.reserve(cs.size() + 4);
  for (const NetConstraint& c : cs) qualitative_edges(c, qedges);

  // CSR adjacency.
  std::vector<std::int32_t> head(n + 1, 0);
  for (const QualEdge& e : qedges) ++head[static_cast<std::size_t>(e.from) + 1];
  for (std::size_t i = 1; i <= n; ++i) head[i] += head[i - 1];
  std::vector<std::int32_t> next_fill(head.begin(), head.end() - 1);
  std::vector<std::int32_t> adj_to(qedges.size());
  std::vector<std::uint8_t> adj_strict(qedges.size());
  for (const QualEdge& e : qedges) {
    std::int32_t slot = next_fill[static_cast<std::size_t>(e.from)]++;
    adj_to[static_cast<std::size_t>(slot)] = e.to;
    adj_strict[static_cast<std::size_t>(slot)] = e.strict ? 1 : 0;
  }

  // Iterative Tarjan SCC.
  cond->comp.assign(n, -1);
  std::vector<std::int32_t> index(n, -1);
  std::vector<std::int32_t> lowlink(n, 0);
  std::vector<std::uint8_t> on_stack(n, 0);
  std::vector<std::int32_t> stack;
  std::vector<std::pair<std::int32_t, std::int32_t>> call;  // (vertex, next edge slot)
  std::int32_t counter = 0;
  std::int32_t comps = 0;

  for (std::int32_t root = 0; root < num_vars; ++root) {
    if (index[static_cast<std::size_t>(root)] != -1) continue;
    call.emplace_back(root, head[static_cast<std::size_t>(root)]);
    index[static_cast<std::size_t>(root)] = lowlink[static_cast<std::size_t>(root)] = counter++;
    stack.push_back(root);
    on_stack[static_cast<std::size_t>(root)] = 1;
    while (!call.empty()) {
      auto& [v, slot] = call.back();
      if (slot < head[static_cast<std::size_t>(v) + 1]) {
        std::int32_t w = adj_to[static_cast<std::size_t>(slot)];
        ++slot;
        if (index[static_cast<std::size_t>(w)] == -1) {
          index[static_cast<std::size_t>(w)] = lowlink[static_cast<std::size_t>(w)] = counter++;
          stack.push_back(w);
          on_stack[static_cast<std::size_t>(w)] = 1;
          call.emplace_back(w, head[static_cast<std::size_t>(w)]);
        } else if (on_stack[static_cast<std::size_t>(w)]) {
          lowlink[static_cast<std::size_t>(v)] =
              std::min(lowlink[static_cast<std::size_t>(v)], index[static_cast<std::size_t>(w)]);
        }
      } else {
        if (lowlink[static_cast<std::size_t>(v)] == index[static_cast<std::size_t>(v)]) {
          std::int32_t w;
          do {
            w = stack.back();
            stack.pop_back();
            on_stack[static_cast<std::size_t>(w)] = 0;
            cond->comp[static_cast<std::size_t>(w)] = comps;
          } while (w != v);
          ++comps;
        }
        std::int32_t done = v;
        call.pop_back();
        if (!call.empty()) {
          std::int32_t parent = call.back().first;
          lowlink[static_cast<std::size_t>(parent)] =
              std::min(lowlink[static_cast<std::size_t>(parent)],
                       lowlink[static_cast<std::size_t>(done)]);
        }
      }
    }
  }
  cond->num_comps = comps;

  // Component DAG and the consistency verdict: a strict edge inside a
  // component is a strict cycle, a != between equal variables is a clash.
  cond->edges.assign(static_cast<std::size_t>(comps), {});
  bool ok = true;
  for (const QualEdge& e : qedges) {
    std::int32_t cf = cond->comp[static_cast<std::size_t>(e.from)];
    std::int32_t ct = cond->comp[static_cast<std::size_t>(e.to)];
    if (cf == ct) {
      if (e.strict) ok = false;
    } else {
      cond->edges[static_cast<std::size_t>(cf)].emplace_back(ct, e.strict);
    }
  }
  for (const NetConstraint& c : cs) {
    if (c.rel != Rel::Ne) continue;
    if (cond->comp[static_cast<std::size_t>(c.left)] ==
        cond->comp[static_cast<std::size_t>(c.right)])
      ok = false;
  }
  cond->consistent = ok;
  return cond;
}

}  // namespace

bool Condensation::reaches(std::int32_t from, std::int32_t to) const {
  if (from == to) return true;
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(num_comps), 0);
  std::deque<std::int32_t> queue{from};
  seen[static_cast<std::size_t>(from)] = 1;
  while (!queue.empty()) {
    std::int32_t c = queue.front();
    queue.pop_front();
    for (auto [next, strict] : edges[static_cast<std::size_t>(c)]) {
      (void)strict;
      if (next == to) return true;
      if (!seen[static_cast<std::size_t>(next)]) {
        seen[static_cast<std::size_t>(next)] = 1;
        queue.push_back(next);
      }
    }
  }
  return false;
}

PointNetwork::PointNetwork(std::int32_t num_vars) : num_vars_(num_vars) {
  cond_ = build_condensation(num_vars_, {});
}

PointNetwork PointNetwork::extended(std::int32_t num_vars,
                                    const std::vector<NetConstraint>& added) const {
  assert(num_vars >= num_vars_);
  PointNetwork out;
  out.num_vars_ = num_vars;
  out.constraints_ = constraints_;
  for (const NetConstraint& c : added) {
    assert(c.left >= 0 && c.left < num_vars && c.right >= 0 && c.right < num_vars);
    out.constraints_ = out.constraints_.push_front(c);
  }
  out.cond_ = build_condensation(out.num_vars_, out.constraints_.to_vector());
  return out;
}

const Condensation& PointNetwork::condensation() const { return *cond_; }

bool PointNetwork::consistent() const { return cond_->consistent; }

bool PointNetwork::consistent_with(const NetConstraint& extra) const {
  if (!cond_->consistent) return false;
  const Condensation& c = *cond_;
  std::int32_t cl = c.comp[static_cast<std::size_t>(extra.left)];
  std::int32_t cr = c.comp[static_cast<std::size_t>(extra.right)];
  switch (extra.rel) {
    case Rel::Lt:
      // A new strict edge closes a cycle exactly when right already reaches left.
      return !c.reaches(cr, cl);
    case Rel::Ne:
      return cl != cr;
    default:
      // Le/Eq additions can merge components and trip distant != constraints;
      // recheck from scratch.
      return extended(num_vars_, {extra}).consistent();
  }
}

bool PointNetwork::entails(VarId left, Rel rel, VarId right) const {
  const Condensation& c = *cond_;
  std::int32_t cl = c.comp[static_cast<std::size_t>(left)];
  std::int32_t cr = c.comp[static_cast<std::size_t>(right)];
  switch (rel) {
    case Rel::Eq:
      return cl == cr;
    case Rel::Le:
      return c.reaches(cl, cr);
    case Rel::Lt:
      // left < right is entailed iff left <= right holds and right <= left
      // cannot: adding right <= left would be inconsistent.
      return c.reaches(cl, cr) && !consistent_with({right, left, Rel::Le, std::nullopt});
    default:
      assert(false && "unsupported entailment relation");
      return false;
  }
}

namespace {

struct MetricEdge {
  std::int32_t from, to;
  Rational weight;
};

// Earliest times via Bellman-Ford over lower-bound edges T(to) >= T(from) + w,
// all components starting at 0. Empty on a positive cycle.
std::optional<std::vector<Rational>> earliest_times(std::int32_t num_comps,
                                                    const std::vector<MetricEdge>& edges) {
  std::vector<Rational> t(static_cast<std::size_t>(num_comps), Rational(0));
  for (std::int32_t round = 0; round <= num_comps; ++round) {
    bool changed = false;
    for (const MetricEdge& e : edges) {
      Rational candidate = t[static_cast<std::size_t>(e.from)] + e.weight;
      if (candidate > t[static_cast<std::size_t>(e.to)]) {
        t[static_cast<std::size_t>(e.to)] = candidate;
        changed = true;
      }
    }
    if (!changed) return t;
  }
  return std::nullopt;
}

struct NePair {
  std::int32_t a, b;
};

std::optional<std::vector<Rational>> solve_with_branching(std::int32_t num_comps,
                                                          std::vector<MetricEdge>& edges,
                                                          const std::vector<NePair>& nes,
                                                          const Rational& epsilon, int& budget) {
  if (budget-- <= 0) return std::nullopt;
  auto base = earliest_times(num_comps, edges);
  if (!base) return std::nullopt;
  const NePair* violated = nullptr;
  for (const NePair& p : nes) {
    if ((*base)[static_cast<std::size_t>(p.a)] == (*base)[static_cast<std::size_t>(p.b)]) {
      violated = &p;
      break;
    }
  }
  if (!violated) return base;

  std::optional<std::vector<Rational>> best;
  Rational best_makespan{0};
  for (int dir = 0; dir < 2; ++dir) {
    std::int32_t from = dir == 0 ? violated->a : violated->b;
    std::int32_t to = dir == 0 ? violated->b : violated->a;
    edges.push_back({from, to, epsilon});
    auto sub = solve_with_branching(num_comps, edges, nes, epsilon, budget);
    edges.pop_back();
    if (sub) {
      Rational ms = sub->empty() ? Rational(0) : *std::max_element(sub->begin(), sub->end());
      if (!best || ms < best_makespan) {
        best = std::move(sub);
        best_makespan = ms;
      }
    }
  }
  return best;
}

}  // namespace

std::optional<Schedule> solve_metric(const PointNetwork& network, const Rational& epsilon) {
  if (!network.consistent()) return std::nullopt;
  const Condensation& cond = network.condensation();
  const std::vector<NetConstraint> cs = network.constraints();

  std::vector<MetricEdge> edges;
  std::vector<NePair> nes;
  edges.reserve(cs.size() * 2);
  for (const NetConstraint& c : cs) {
    std::int32_t cl = cond.comp[static_cast<std::size_t>(c.left)];
    std::int32_t cr = cond.comp[static_cast<std::size_t>(c.right)];
    switch (c.rel) {
      case Rel::Lt:
        edges.push_back({cl, cr, epsilon});
        break;
      case Rel::Le:
        if (cl != cr) edges.push_back({cl, cr, Rational(0)});
        break;
      case Rel::Eq:
        if (c.offset) {
          edges.push_back({cl, cr, *c.offset});
          edges.push_back({cr, cl, -*c.offset});
        }
        break;
      case Rel::Ne:
        nes.push_back({cl, cr});
        break;
      default:
        assert(false);
    }
  }

  int budget = 4096;
  auto comp_times = solve_with_branching(cond.num_comps, edges, nes, epsilon, budget);
  if (!comp_times) return std::nullopt;

  Schedule schedule;
  schedule.times.resize(static_cast<std::size_t>(network.num_vars()));
  Rational top{0};
  for (std::int32_t v = 0; v < network.num_vars(); ++v) {
    const Rational& t = (*comp_times)[static_cast<std::size_t>(cond.comp[static_cast<std::size_t>(v)])];
    schedule.times[static_cast<std::size_t>(v)] = t;
    if (t > top) top = t;
  }
  schedule.makespan = top;
  return schedule;
}

Rational makespan(const Schedule& schedule) {
  Rational top{0};
  for (const Rational& t : schedule.times)
    if (t > top) top = t;
  return top;
}

bool satisfies(const std::vector<NetConstraint>& constraints, const std::vector<Rational>& times,
               const Rational& epsilon) {
  for (const NetConstraint& c : constraints) {
    const Rational& l = times[static_cast<std::size_t>(c.left)];
    const Rational& r = times[static_cast<std::size_t>(c.right)];
    switch (c.rel) {
      case Rel::Lt:
        if (r - l < epsilon) return false;
        break;
      case Rel::Le:
        if (l > r) return false;
        break;
      case Rel::Eq:
        if (c.offset) {
          if (r - l != *c.offset) return false;
        } else if (l != r) {
          return false;
        }
        break;
      case Rel::Ne:
        if (l == r) return false;
        break;
      default:
        return false;
    }
  }
  return true;
}

}  // namespace htep
