#include <catch_amalgamated.hpp>

#include "rcs/placement.hpp"

using namespace rcs;

namespace {

const Domain& torus8() {
  static const Domain d = build_domain(DomainKind::TorusGrid, 8, 2);
  return d;
}

const GreenKernel& kernel8() {
  static const GreenKernel g = green_kernel(torus8());
  return g;
}

}  // namespace

TEST_CASE("schedules") {
  CHECK(eval_schedule(GrowthSchedule::affine(3), 5) == 8);
  CHECK(eval_schedule(GrowthSchedule::doubling(), 4) == 8);
  CHECK(eval_schedule(GrowthSchedule::doubling(), 4) >= eval_schedule(GrowthSchedule::doubling(), 3) + 2);
  CHECK(eval_schedule(GrowthSchedule::linear_ratio(3, 2), 5) == 8);
  CHECK(eval_schedule(GrowthSchedule::fixed(7), 100) == 7);
  const auto table = GrowthSchedule::custom({2, 4, 7});
  CHECK(eval_schedule(table, 0) == 0);
  CHECK(eval_schedule(table, 3) == 7);
  CHECK_THROWS_AS(eval_schedule(table, 4), OutOfRange);
  CHECK_THROWS_AS(GrowthSchedule::custom({3, 2}), InvalidArgument);
  for (const auto& s : {GrowthSchedule::affine(2), GrowthSchedule::doubling(), GrowthSchedule::linear_ratio(5, 3),
                        table, GrowthSchedule::fixed(0)}) {
    CHECK(GrowthSchedule::from_json(s.to_json()) == s);
  }
  CHECK_THROWS_AS(GrowthSchedule::from_json(nlohmann::json{{"kind", "cubic"}}), FormatError);
}

TEST_CASE("greedy first and second points") {
  const auto& g = kernel8();
  CHECK(greedy_next(std::vector<Site>{}, g) == 0);
  const auto seq = greedy_sequence(1, g);
  CHECK(seq.sites == std::vector<Site>{0});

  const auto ring = build_domain(DomainKind::TorusGrid, 8, 1);
  const auto gr = green_kernel(ring);
  CHECK(greedy_sequence(2, gr).sites == std::vector<Site>{0, 4});
}

TEST_CASE("greedy next is the row minimum") {
  const auto& g = kernel8();
  for (Site p : {Site{0}, Site{13}, Site{63}}) {
    Site best = 0;
    for (Site x = 1; x < g.size(); ++x) {
      if (g(p, x) < g(p, best) - 1e-12) best = x;
    }
    CHECK(greedy_next(std::vector<Site>{p}, g) == best);
  }
}

TEST_CASE("greedy ties go to the lowest index") {
  // On a 1-D ring with points at 0 and 4, sites 2 and 6 are symmetric.
  const auto ring = build_domain(DomainKind::TorusGrid, 8, 1);
  const auto gr = green_kernel(ring);
  CHECK(greedy_next(std::vector<Site>{0, 4}, gr) == 2);
  const std::vector<Site> allowed{3, 5, 7};
  // 3, 5 and 7 sit at equal distance from {0,4}: tie broken towards 3.
  CHECK(greedy_next(std::vector<Site>{0, 4}, gr, allowed) == 3);
  CHECK_THROWS_AS(greedy_next(std::vector<Site>{0}, gr, std::vector<Site>{}), InvalidArgument);
}

TEST_CASE("greedy sequences have the prefix property and ignore constant shifts") {
  const auto& g = kernel8();
  const auto s10 = greedy_sequence(10, g), s9 = greedy_sequence(9, g);
  CHECK(std::equal(s9.sites.begin(), s9.sites.end(), s10.sites.begin()));
  CHECK(greedy_sequence(20, g.shifted(3.5)).sites == greedy_sequence(20, g).sites);
  CHECK(greedy_sequence(20, g.shifted(-0.75)).sites == greedy_sequence(20, g).sites);
}

TEST_CASE("copy strategy layout") {
  const auto& g = kernel8();
  const PlacementSeq one{torus8().name(), {9}};
  const auto r1 = copy_strategy(one, GrowthSchedule::doubling(), g);
  REQUIRE(r1.size() == 2);
  CHECK(r1.sites[0] == 9);
  CHECK(r1.sites[1] == greedy_next(std::vector<Site>{9}, g));

  const PlacementSeq two{torus8().name(), {9, 30}};
  const auto r2 = copy_strategy(two, GrowthSchedule::doubling(), g);
  REQUIRE(r2.size() == 4);
  CHECK(r2.sites[0] == 9);
  CHECK(r2.sites[2] == 30);
  CHECK(std::equal(r1.sites.begin(), r1.sites.end(), r2.sites.begin()));

  const auto r3 = copy_strategy(two, GrowthSchedule::linear_ratio(3, 1), g);
  REQUIRE(r3.size() == 6);
  CHECK(r3.sites[0] == 9);
  CHECK(r3.sites[3] == 30);
  // Filler set J has f(N) - N entries.
  CHECK(r3.size() - two.size() == 4);

  CHECK_THROWS_AS(copy_strategy(two, GrowthSchedule::affine(3), g), PreconditionError);
  CHECK_THROWS_AS(copy_strategy(two, GrowthSchedule::fixed(4), g), PreconditionError);
  CHECK_NOTHROW(copy_strategy(two, GrowthSchedule::linear_ratio(3, 2), g));
}

TEST_CASE("headstart strategy cancels our shops") {
  const auto& g = kernel8();
  const PlacementSeq ours{torus8().name(), {9, 30, 30}};
  const auto r = headstart_strategy(ours, 2, g);
  REQUIRE(r.size() == 5);
  CHECK(r.sites[0] == 0);
  CHECK(r.sites[1] == greedy_next(std::vector<Site>{0}, g));
  CHECK(r.sites[2] == 9);
  const auto mu = competition_measure(ours, r);
  CHECK(mu.pos().empty());
  CHECK(mu.total() == -2.0 / 8.0);
  CHECK(headstart_strategy(PlacementSeq{torus8().name(), {}}, 1, g).sites == std::vector<Site>{0});
}

TEST_CASE("restricted sequences avoid the ball") {
  const auto d = build_domain(DomainKind::TorusGrid, 16, 2);
  const auto g = green_kernel(d);
  const ForbiddenRegion region{136, 0.25};
  const auto seq = restricted_sequence(64, d, g, region);
  for (Site s : seq.sites) CHECK(d.distance(s, 136) >= 0.25);
  CHECK_THROWS_AS(restricted_sequence(4, d, g, ForbiddenRegion{0, 0.75}), InvalidArgument);
  // Tiny ball around an unvisited site: identical to plain greedy.
  const auto plain = greedy_sequence(12, g);
  Site far = 0;
  for (Site s = 0; s < d.size(); ++s)
    if (std::find(plain.sites.begin(), plain.sites.end(), s) == plain.sites.end()) far = s;
  CHECK(restricted_sequence(12, d, g, ForbiddenRegion{far, 0.01}).sites == plain.sites);
}

TEST_CASE("strategy spec json") {
  const auto j = nlohmann::json::parse(R"({"kind":"restricted","region":{"p":3,"r":0.2}})");
  const auto s = StrategySpec::from_json(j);
  CHECK(s.kind == StrategySpec::Kind::Restricted);
  CHECK(s.region->center == 3);
  CHECK(StrategySpec::from_json(s.to_json()).to_json() == s.to_json());
  CHECK_THROWS_AS(StrategySpec::from_json(nlohmann::json{{"kind", "restricted"}}), FormatError);
  CHECK_THROWS_AS(StrategySpec::from_json(nlohmann::json{{"kind", "teleport"}}), FormatError);
}
