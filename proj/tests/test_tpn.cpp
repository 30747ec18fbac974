#include <algorithm>
#include <random>
#include <vector>

#include "doctest.h"
#include "htep/tpn.hpp"
#include "oracles.hpp"

using namespace htep;

namespace {

Rel rel_of(int digit) {
  switch (digit) {
    case 1: return Rel::Lt;
    case 2: return Rel::Le;
    case 3: return Rel::Gt;
    case 4: return Rel::Ge;
    case 5: return Rel::Eq;
    default: return Rel::Ne;
  }
}

PointNetwork net_of(int n, const std::vector<NetConstraint>& cs) {
  return PointNetwork(n).extended(n, cs);
}

bool has_ne(const std::vector<NetConstraint>& cs) {
  return std::any_of(cs.begin(), cs.end(),
                     [](const NetConstraint& c) { return c.rel == Rel::Ne; });
}

std::vector<NetConstraint> random_net(std::mt19937& rng, int n, int max_cs) {
  std::uniform_int_distribution<int> count(0, max_cs);
  std::uniform_int_distribution<int> var(0, n - 1);
  std::uniform_int_distribution<int> rel(1, 6);
  std::vector<NetConstraint> cs;
  int k = count(rng);
  for (int i = 0; i < k; ++i) {
    int a = var(rng), b = var(rng);
    while (b == a) b = var(rng);
    cs.push_back(normalize_constraint(a, rel_of(rel(rng)), b));
  }
  return cs;
}

}  // namespace

TEST_CASE("normalization flips > and >= onto < and <=") {
  NetConstraint c = normalize_constraint(3, Rel::Gt, 1);
  CHECK(c.left == 1);
  CHECK(c.right == 3);
  CHECK(c.rel == Rel::Lt);
  c = normalize_constraint(3, Rel::Ge, 1);
  CHECK(c.left == 1);
  CHECK(c.right == 3);
  CHECK(c.rel == Rel::Le);
  c = normalize_constraint(0, Rel::Eq, 1, rat(2));
  CHECK(c.rel == Rel::Eq);
  CHECK(c.offset == rat(2));
}

TEST_CASE("the preorder oracle enumerates Fubini-many orders") {
  CHECK(oracle::total_preorders(1).size() == 1);
  CHECK(oracle::total_preorders(2).size() == 3);
  CHECK(oracle::total_preorders(3).size() == 13);
  CHECK(oracle::total_preorders(4).size() == 75);
  CHECK(oracle::total_preorders(5).size() == 541);
  CHECK(oracle::total_preorders(6).size() == 4683);
}

TEST_CASE("hand-picked qualitative verdicts") {
  auto lt = [](VarId a, VarId b) { return normalize_constraint(a, Rel::Lt, b); };
  auto le = [](VarId a, VarId b) { return normalize_constraint(a, Rel::Le, b); };
  auto ne = [](VarId a, VarId b) { return normalize_constraint(a, Rel::Ne, b); };

  CHECK(net_of(2, {le(0, 1), le(1, 0)}).consistent());
  CHECK_FALSE(net_of(2, {le(0, 1), le(1, 0), ne(0, 1)}).consistent());
  CHECK_FALSE(net_of(2, {lt(0, 1), le(1, 0)}).consistent());
  CHECK_FALSE(net_of(3, {lt(0, 1), lt(1, 2), lt(2, 0)}).consistent());
  CHECK(net_of(3, {lt(0, 1), lt(1, 2), lt(0, 2)}).consistent());
  CHECK(net_of(2, {ne(0, 1)}).consistent());

  // A duration equality with positive offset acts as a strict order.
  CHECK_FALSE(net_of(2, {normalize_constraint(0, Rel::Eq, 1, rat(2)), le(1, 0)}).consistent());
}

// Every network over <= 4 variables, one relation choice per unordered pair.
// The solver's verdict must match exhaustive search over total preorders, and
// on the metric side the earliest schedule must match exhaustive grid search.
TEST_CASE("exhaustive agreement with the total-preorder oracle up to 4 variables") {
  const Rational eps = rat(1);
  for (int n = 2; n <= 4; ++n) {
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

    std::vector<int> digit(pairs.size(), 0);
    long networks = 0, consistent_count = 0;
    for (;;) {
      std::vector<NetConstraint> cs;
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        if (digit[k] == 0) continue;
        cs.push_back(normalize_constraint(pairs[k].first, rel_of(digit[k]), pairs[k].second));
      }
      PointNetwork net = net_of(n, cs);
      bool want = oracle::preorder_consistent(n, cs);
      if (net.consistent() != want) {
        CAPTURE(n);
        CAPTURE(networks);
        REQUIRE(net.consistent() == want);
      }
      ++networks;
      if (want) {
        ++consistent_count;
        auto sched = solve_metric(net, eps);
        // Without duration offsets a qualitatively consistent network is
        // always schedulable.
        REQUIRE(sched.has_value());
        REQUIRE(oracle::eval_constraints(cs, sched->times, eps));
        if (!has_ne(cs)) {
          auto grid = oracle::grid_search(n, cs, eps);
          REQUIRE(grid.has_value());
          REQUIRE(grid->feasible);
          REQUIRE(grid->min_makespan == sched->makespan);
        }
      } else {
        REQUIRE_FALSE(solve_metric(net, eps).has_value());
      }

      std::size_t k = 0;
      while (k < digit.size() && ++digit[k] == 7) digit[k++] = 0;
      if (k == digit.size()) break;
    }
    CHECK(networks == (n == 2 ? 7L : n == 3 ? 343L : 117'649L));
    CHECK(consistent_count > 0);
  }
}

TEST_CASE("random 5- and 6-variable networks agree with the preorder oracle") {
  std::mt19937 rng(20260817);
  for (int round = 0; round < 2000; ++round) {
    int n = round < 1000 ? 5 : 6;
    auto cs = random_net(rng, n, 12);
    PointNetwork net = net_of(n, cs);
    bool want = oracle::preorder_consistent(n, cs);
    CAPTURE(round);
    REQUIRE(net.consistent() == want);
    if (want) {
      auto sched = solve_metric(net, rat(1, 1000));
      REQUIRE(sched.has_value());
      REQUIRE(oracle::eval_constraints(cs, sched->times, rat(1, 1000)));
    }
  }
}

TEST_CASE("incremental consistency matches from-scratch extension") {
  std::mt19937 rng(99);
  std::uniform_int_distribution<int> var(0, 4);
  std::uniform_int_distribution<int> rel(1, 6);
  for (int round = 0; round < 3000; ++round) {
    auto cs = random_net(rng, 5, 8);
    PointNetwork net = net_of(5, cs);
    int a = var(rng), b = var(rng);
    while (b == a) b = var(rng);
    NetConstraint extra = normalize_constraint(a, rel_of(rel(rng)), b);
    bool incremental = net.consistent_with(extra);
    bool scratch = net.extended(5, {extra}).consistent();
    CAPTURE(round);
    REQUIRE(incremental == (net.consistent() && scratch));
  }
}

TEST_CASE("entailment queries") {
  auto le = [](VarId a, VarId b) { return normalize_constraint(a, Rel::Le, b); };
  auto lt = [](VarId a, VarId b) { return normalize_constraint(a, Rel::Lt, b); };
  auto ne = [](VarId a, VarId b) { return normalize_constraint(a, Rel::Ne, b); };

  PointNetwork equal = net_of(2, {le(0, 1), le(1, 0)});
  CHECK(equal.entails(0, Rel::Eq, 1));
  CHECK(equal.entails(0, Rel::Le, 1));
  CHECK_FALSE(equal.entails(0, Rel::Lt, 1));

  PointNetwork strict = net_of(2, {lt(0, 1)});
  CHECK(strict.entails(0, Rel::Lt, 1));
  CHECK(strict.entails(0, Rel::Le, 1));
  CHECK_FALSE(strict.entails(1, Rel::Le, 0));

  // <= plus != entails <.
  PointNetwork mixed = net_of(2, {le(0, 1), ne(0, 1)});
  CHECK(mixed.entails(0, Rel::Lt, 1));

  PointNetwork chain = net_of(3, {le(0, 1), lt(1, 2)});
  CHECK(chain.entails(0, Rel::Lt, 2));
  CHECK_FALSE(chain.entails(0, Rel::Lt, 1));
}

TEST_CASE("duration equalities pin exact differences") {
  const Rational eps = rat(1, 1000);
  std::vector<NetConstraint> cs{
      normalize_constraint(0, Rel::Eq, 1, rat(2)),
      normalize_constraint(0, Rel::Lt, 2),
      normalize_constraint(2, Rel::Lt, 1),
  };
  PointNetwork net = net_of(3, cs);
  REQUIRE(net.consistent());
  auto sched = solve_metric(net, eps);
  REQUIRE(sched.has_value());
  CHECK(sched->times[1] - sched->times[0] == rat(2));
  CHECK(sched->times[0] == rat(0));
  CHECK(sched->times[2] == eps);
  CHECK(sched->makespan == rat(2));
  CHECK(satisfies(cs, sched->times, eps));
}

TEST_CASE("conflicting duration sums are metrically infeasible but qualitatively fine") {
  std::vector<NetConstraint> cs{
      normalize_constraint(0, Rel::Eq, 1, rat(2)),
      normalize_constraint(1, Rel::Eq, 2, rat(2)),
      normalize_constraint(0, Rel::Eq, 2, rat(3)),
  };
  PointNetwork net = net_of(3, cs);
  CHECK(net.consistent());
  CHECK_FALSE(solve_metric(net, rat(1, 1000)).has_value());
  // The oracle grid steps by gcd(eps, offsets); a coarse eps keeps it small.
  auto grid = oracle::grid_search(3, cs, rat(1));
  REQUIRE(grid.has_value());
  CHECK_FALSE(grid->feasible);
}

TEST_CASE("random metric networks with offsets match grid search") {
  std::mt19937 rng(4242);
  std::uniform_int_distribution<int> var(0, 3);
  std::uniform_int_distribution<int> kind(0, 3);
  std::uniform_int_distribution<int> dur(1, 3);
  const Rational eps = rat(1, 2);
  for (int round = 0; round < 400; ++round) {
    std::vector<NetConstraint> cs;
    std::uniform_int_distribution<int> count(1, 6);
    int k = count(rng);
    for (int i = 0; i < k; ++i) {
      int a = var(rng), b = var(rng);
      while (b == a) b = var(rng);
      switch (kind(rng)) {
        case 0: cs.push_back(normalize_constraint(a, Rel::Lt, b)); break;
        case 1: cs.push_back(normalize_constraint(a, Rel::Le, b)); break;
        case 2: cs.push_back(normalize_constraint(a, Rel::Eq, b, rat(dur(rng)))); break;
        default: cs.push_back(normalize_constraint(a, Rel::Eq, b)); break;
      }
    }
    PointNetwork net = net_of(4, cs);
    auto sched = solve_metric(net, eps);
    auto grid = oracle::grid_search(4, cs, eps);
    REQUIRE(grid.has_value());
    CAPTURE(round);
    REQUIRE(sched.has_value() == grid->feasible);
    if (sched) {
      REQUIRE(oracle::eval_constraints(cs, sched->times, eps));
      REQUIRE(sched->makespan == grid->min_makespan);
      REQUIRE(makespan(*sched) == sched->makespan);
    }
  }
}

TEST_CASE("strict edges keep epsilon separation") {
  const Rational eps = rat(1, 1000);
  std::vector<NetConstraint> cs{
      normalize_constraint(0, Rel::Lt, 1),
      normalize_constraint(1, Rel::Lt, 2),
      normalize_constraint(2, Rel::Lt, 3),
  };
  auto sched = solve_metric(net_of(4, cs), eps);
  REQUIRE(sched.has_value());
  for (int i = 0; i < 3; ++i)
    CHECK(sched->times[static_cast<std::size_t>(i + 1)] -
              sched->times[static_cast<std::size_t>(i)] >=
          eps);
  CHECK(sched->makespan == rat(3, 1000));

  // Sub-epsilon separation fails the independent evaluator.
  std::vector<Rational> squeezed{rat(0), rat(1, 2000), rat(1, 1000), rat(3, 2000)};
  CHECK_FALSE(satisfies(cs, squeezed, eps));
  CHECK_FALSE(oracle::eval_constraints(cs, squeezed, eps));
}

TEST_CASE("inequality branching separates exactly when nothing else does") {
  const Rational eps = rat(1, 1000);
  auto sched = solve_metric(net_of(2, {normalize_constraint(0, Rel::Ne, 1)}), eps);
  REQUIRE(sched.has_value());
  CHECK(sched->times[0] != sched->times[1]);
  CHECK(sched->makespan == eps);

  // Pairwise distinct triple.
  std::vector<NetConstraint> triple{
      normalize_constraint(0, Rel::Ne, 1),
      normalize_constraint(1, Rel::Ne, 2),
      normalize_constraint(0, Rel::Ne, 2),
  };
  auto s3 = solve_metric(net_of(3, triple), eps);
  REQUIRE(s3.has_value());
  CHECK(s3->times[0] != s3->times[1]);
  CHECK(s3->times[1] != s3->times[2]);
  CHECK(s3->times[0] != s3->times[2]);
}

TEST_CASE("solving is deterministic") {
  std::mt19937 rng(5);
  auto cs = random_net(rng, 6, 10);
  PointNetwork net = net_of(6, cs);
  auto a = solve_metric(net, rat(1, 1000));
  auto b = solve_metric(net, rat(1, 1000));
  REQUIRE(a.has_value() == b.has_value());
  if (a) {
    CHECK(a->times == b->times);
    CHECK(a->makespan == b->makespan);
  }
}

TEST_CASE("extension shares structure and grows the variable set") {
  PointNetwork base(2);
  CHECK(base.consistent());
  CHECK(base.constraint_count() == 0);
  PointNetwork one = base.extended(3, {normalize_constraint(0, Rel::Lt, 2)});
  PointNetwork two = one.extended(4, {normalize_constraint(2, Rel::Lt, 3)});
  CHECK(base.constraint_count() == 0);
  CHECK(one.constraint_count() == 1);
  CHECK(two.constraint_count() == 2);
  CHECK(two.num_vars() == 4);
  CHECK(two.consistent());
}
