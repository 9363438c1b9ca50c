#include <cmath>
#include <random>
#include <set>

#include "costorch/core.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace costorch;
using fixtures::ProblemBuilder;

namespace {

bool has_issue(const ValidationOutcome& out, IssueKind kind) {
  for (const auto& i : out.issues)
    if (i.kind == kind) return true;
  return false;
}

// Small random instance with up to 6 workflows, 3 devices, 3 configs each.
Problem random_problem(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nw(1, 6), nd(1, 3), nk(1, 3), nb(1, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ProblemBuilder b;
  const int w = nw(rng), d = nd(rng);
  for (int i = 0; i < w; ++i) {
    std::vector<Id> preds;
    for (int j = 0; j < i; ++j)
      if (unit(rng) < 0.3) preds.push_back("w" + std::to_string(j));
    const double e = 5.0 * unit(rng);
    b.workflow("w" + std::to_string(i), e, e + 1.0 + 20.0 * unit(rng), preds);
  }
  for (int k = 0; k < d; ++k) {
    const double c0 = 0.5 + 3.0 * unit(rng);
    b.device("d" + std::to_string(k), c0, c0 * (1.0 + 2.0 * unit(rng)), 10.0 * unit(rng));
    const int configs = nk(rng);
    for (int c = 0; c < configs; ++c) {
      b.config("d" + std::to_string(k), "k" + std::to_string(c), nb(rng));
      for (int i = 0; i < w; ++i)
        b.duration("w" + std::to_string(i), "d" + std::to_string(k), "k" + std::to_string(c),
                   0.1 + 4.0 * unit(rng));
    }
  }
  return b.build();
}

std::vector<std::size_t> random_options(const ValidatedProblem& vp, std::mt19937_64& rng) {
  std::vector<std::size_t> opt(vp.workflow_count());
  for (std::size_t i = 0; i < opt.size(); ++i)
    opt[i] = std::uniform_int_distribution<std::size_t>(0, vp.options(i).size() - 1)(rng);
  return opt;
}

}  // namespace

TEST_CASE("validate_problem accepts the empty instance") {
  auto out = validate_problem(Problem{});
  CHECK(out.ok());
  CHECK(out.issues.empty());
  CHECK(out.value->workflow_count() == 0);
}

TEST_CASE("validate_problem reports a two-cycle as a closed walk") {
  auto p = ProblemBuilder{}
               .workflow("a", 0, 10, {"b"})
               .workflow("b", 0, 10, {"a"})
               .device("d", 1, 2, 0)
               .config("d", "k", 1)
               .duration("a", "d", "k", 1)
               .duration("b", "d", "k", 1)
               .build();
  auto out = validate_problem(p);
  REQUIRE_FALSE(out.ok());
  REQUIRE(out.issues.size() == 1);
  CHECK(out.issues[0].kind == IssueKind::cycle_detected);
  CHECK(out.issues[0].ids == std::vector<Id>{"a", "b", "a"});
}

TEST_CASE("validate_problem rejects an empty window at the boundary") {
  auto p = ProblemBuilder{}.workflow("w", 5, 5).device("d", 1, 1, 0).config("d", "k", 1).duration("w", "d", "k", 1).build();
  auto out = validate_problem(p);
  REQUIRE_FALSE(out.ok());
  CHECK(has_issue(out, IssueKind::window_inverted));
}

TEST_CASE("validate_problem collects every violation") {
  auto p = ProblemBuilder{}
               .workflow("a", 3, 1, {"ghost"})
               .workflow("b", 0, 4)
               .workflow("c", 0, 4, {"c"})
               .device("d", 2, 1, -1)
               .config("d", "k", 0)
               .config("nope", "k", 1)
               .duration("a", "d", "k", -2)
               .duration("b", "d", "missing", 1)
               .build();
  auto out = validate_problem(p);
  REQUIRE_FALSE(out.ok());
  CHECK(has_issue(out, IssueKind::window_inverted));
  CHECK(has_issue(out, IssueKind::dangling_reference));
  CHECK(has_issue(out, IssueKind::cycle_detected));
  CHECK(has_issue(out, IssueKind::invalid_rate));
  CHECK(has_issue(out, IssueKind::invalid_device_count));
  CHECK(has_issue(out, IssueKind::non_positive_duration));
  CHECK(has_issue(out, IssueKind::empty_config_set));
  CHECK(out.issues.size() >= 9);
  CHECK_THROWS_AS(ValidatedProblem::from(p), ValidationFailed);
}

TEST_CASE("validate_problem flags workflows without any duration entry") {
  auto p = ProblemBuilder{}.workflow("w", 0, 5).device("d", 1, 1, 0).config("d", "k", 1).build();
  auto out = validate_problem(p);
  REQUIRE(out.issues.size() == 1);
  CHECK(out.issues[0].kind == IssueKind::empty_config_set);
  CHECK(out.issues[0].ids == std::vector<Id>{"w"});
}

TEST_CASE("topological order breaks ties by id") {
  auto vp = ProblemBuilder{}
                .workflow("c", 0, 10)
                .workflow("b", 0, 10, {"c"})
                .workflow("a", 0, 10)
                .device("d", 1, 1, 0)
                .config("d", "k", 1)
                .duration("a", "d", "k", 1)
                .duration("b", "d", "k", 1)
                .duration("c", "d", "k", 1)
                .validated();
  std::vector<Id> order;
  for (auto i : vp.topological_order()) order.push_back(vp.problem().workflows[i].id);
  CHECK(order == std::vector<Id>{"a", "c", "b"});
}

TEST_CASE("device_usage sums hours times device count") {
  SUBCASE("single workflow") {
    auto vp = ProblemBuilder{}.workflow("w", 0, 10).device("d", 1, 2, 0).device("idle", 1, 2, 0)
                  .config("d", "k", 3).config("idle", "k", 1)
                  .duration("w", "d", "k", 2).duration("w", "idle", "k", 1).validated();
    auto u = device_usage(vp, fixtures::assign({{"w", {"d", "k"}}}));
    CHECK(u.at("d") == doctest::Approx(6.0));
    CHECK(u.at("idle") == 0.0);
  }
  SUBCASE("two workflows on one device") {
    auto vp = ProblemBuilder{}.workflow("a", 0, 10).workflow("b", 0, 10).device("d", 1, 2, 0)
                  .config("d", "k1", 2).config("d", "k2", 1)
                  .duration("a", "d", "k1", 1).duration("b", "d", "k2", 3).validated();
    auto u = device_usage(vp, fixtures::assign({{"a", {"d", "k1"}}, {"b", {"d", "k2"}}}));
    CHECK(u.at("d") == doctest::Approx(5.0));
  }
}

TEST_CASE("evaluate_cost follows the tiered tariff") {
  auto make = [](double hours) {
    return ProblemBuilder{}.workflow("w", 0, 100).device("d", 1, 2, 10).config("d", "k", 1)
        .duration("w", "d", "k", hours).validated();
  };
  auto a = fixtures::assign({{"w", {"d", "k"}}});

  SUBCASE("all usage in the base tier") {
    auto c = evaluate_cost(make(8), a);
    CHECK(c.total == doctest::Approx(8.0));
    CHECK(c.overflow_cost == 0.0);
    CHECK(c.tier_pivot("d") == doctest::Approx(10.0));
  }
  SUBCASE("overflow billed at the higher rate") {
    auto c = evaluate_cost(make(15), a);
    CHECK(c.total == doctest::Approx(20.0));
    CHECK(c.base_cost == doctest::Approx(10.0));
    CHECK(c.overflow_cost == doctest::Approx(10.0));
    CHECK(c.tier_pivot("d") == doctest::Approx(15.0));
    CHECK(tiered_cost_pivot_form(15, 10, 1, 2) == doctest::Approx(20.0));
  }
  SUBCASE("no usage") {
    auto vp = ProblemBuilder{}.device("d", 1, 2, 10).validated();
    CHECK(evaluate_cost(vp, Assignment{}).total == 0.0);
  }
}

TEST_CASE("assignments referencing missing entries raise UnknownChoice") {
  auto vp = ProblemBuilder{}.workflow("w", 0, 10).device("d", 1, 2, 0).config("d", "k", 1)
                .config("d", "other", 1).duration("w", "d", "k", 1).validated();
  CHECK_THROWS_AS(evaluate_cost(vp, fixtures::assign({{"w", {"d", "other"}}})), UnknownChoice);
  CHECK_THROWS_AS(device_usage(vp, Assignment{}), UnknownChoice);
  CHECK_THROWS_AS(earliest_schedule(vp, fixtures::assign({{"w", {"x", "k"}}})), UnknownChoice);
}

TEST_CASE("earliest_schedule examples") {
  SUBCASE("window start binds") {
    auto vp = ProblemBuilder{}.workflow("w", 3, 10).device("d", 1, 1, 0).config("d", "k", 1)
                  .duration("w", "d", "k", 1).validated();
    auto s = std::get<Schedule>(earliest_schedule(vp, vp.default_assignment()));
    CHECK(s.start.at("w") == 3.0);
    CHECK(s.finish.at("w") == 4.0);
  }
  SUBCASE("predecessor finish binds") {
    auto vp = ProblemBuilder{}.workflow("i", 0, 10).workflow("j", 1, 10, {"i"}).device("d", 1, 1, 0)
                  .config("d", "k", 1).duration("i", "d", "k", 2).duration("j", "d", "k", 1).validated();
    auto s = std::get<Schedule>(earliest_schedule(vp, vp.default_assignment()));
    CHECK(s.start.at("j") == 2.0);
  }
  SUBCASE("window too small") {
    auto vp = ProblemBuilder{}.workflow("w", 0, 4).device("d", 1, 1, 0).config("d", "k", 1)
                  .duration("w", "d", "k", 5).validated();
    auto bad = std::get<Infeasible>(earliest_schedule(vp, vp.default_assignment()));
    REQUIRE(bad.culprits.size() == 1);
    CHECK(bad.culprits[0].workflow_id == "w");
    CHECK(bad.culprits[0].deficit_hours == doctest::Approx(1.0));
  }
}

TEST_CASE("check_schedule") {
  auto vp = ProblemBuilder{}.workflow("i", 0, 10).workflow("j", 0, 10, {"i"}).device("d", 1, 1, 0)
                .config("d", "k", 1).duration("i", "d", "k", 2).duration("j", "d", "k", 3).validated();
  auto s = std::get<Schedule>(earliest_schedule(vp, vp.default_assignment()));

  SUBCASE("earliest schedule is clean") { CHECK(check_schedule(vp, s).empty()); }
  SUBCASE("touching precedence is allowed") {
    CHECK(s.finish.at("i") == s.start.at("j"));
    CHECK(check_schedule(vp, s, 0.0).empty());
  }
  SUBCASE("planted duration defect") {
    s.duration["j"] = 4.0;
    s.finish["j"] = s.start["j"] + 4.0;
    auto v = check_schedule(vp, s);
    REQUIRE(v.size() == 1);
    CHECK(v[0].equation == 7);
    CHECK(v[0].ids == std::vector<Id>{"j"});
  }
  SUBCASE("each constraint is named") {
    s.start["i"] = -1.0;                 // eq 9, and then eq 6 breaks
    s.start["j"] = 1.0;                  // eq 8 (i finishes at 2)
    s.finish["j"] = 11.0;                // eq 10 and eq 6
    s.assignment.choice.erase("i");      // eq 2
    std::set<int> eqs;
    for (const auto& v : check_schedule(vp, s)) eqs.insert(v.equation);
    CHECK(eqs == std::set<int>{2, 6, 8, 9, 10});
  }
}

TEST_CASE("usage caps are enforced when configured") {
  auto p = ProblemBuilder{}.workflow("w", 0, 10).device("d", 1, 1, 0).config("d", "k", 2)
               .duration("w", "d", "k", 3).build();
  p.devices[0].usage_cap = 5.0;
  auto vp = ValidatedProblem::from(p);
  CHECK_FALSE(within_usage_caps(vp, vp.default_assignment()));
  auto s = std::get<Schedule>(earliest_schedule(vp, vp.default_assignment()));
  auto v = check_schedule(vp, s);
  REQUIRE(v.size() == 1);
  CHECK(v[0].equation == 4);
}

TEST_CASE("property: piecewise and pivot forms agree and are monotone") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const double u = 100.0 * unit(rng), A = 100.0 * unit(rng), c0 = 5.0 * unit(rng);
    const double c1 = c0 + 5.0 * unit(rng);
    const double a = tiered_cost(u, A, c0, c1), b = tiered_cost_pivot_form(u, A, c0, c1);
    REQUIRE(fixtures::close_rel(a, b, 1e-9));
    const double du = 10.0 * unit(rng);
    CHECK(tiered_cost(u + du, A, c0, c1) >= a);
    CHECK(tiered_cost(u, A + du, c0, c1) <= a);
  }
}

TEST_CASE("property: earliest schedules are clean and infeasibility is final") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int infeasible_seen = 0;
  for (int trial = 0; trial < 300; ++trial) {
    auto vp = ValidatedProblem::from(random_problem(rng));
    auto a = vp.to_assignment(random_options(vp, rng));
    auto out = earliest_schedule(vp, a);
    if (auto* s = std::get_if<Schedule>(&out)) {
      CHECK(check_schedule(vp, *s).empty());
      // Cost reads only the assignment.
      Schedule shifted = *s;
      for (auto& [id, st] : shifted.start) st += 1.0;
      CHECK(evaluate_cost(vp, shifted.assignment).total == evaluate_cost(vp, a).total);
      continue;
    }
    ++infeasible_seen;
    // No perturbed schedule for this assignment can satisfy every constraint.
    auto earliest_start = [&](const Id& id) {
      return vp.problem().workflows[*vp.workflow_index(id)].earliest_start;
    };
    for (int k = 0; k < 1000; ++k) {
      Schedule s;
      s.assignment = a;
      for (const auto& w : vp.problem().workflows) {
        const double g = *vp.problem().durations.find(w.id, a.choice.at(w.id).device_id,
                                                      a.choice.at(w.id).config_id);
        const double st = earliest_start(w.id) + 30.0 * std::pow(unit(rng), 3.0);
        s.start[w.id] = st;
        s.duration[w.id] = g;
        s.finish[w.id] = st + g;
      }
      REQUIRE_FALSE(check_schedule(vp, s).empty());
    }
  }
  CHECK(infeasible_seen > 10);
}
