#include <catch_amalgamated.hpp>

#include <cmath>

#include "oracle/dense_lp.hpp"
#include "rcs/harness.hpp"

using namespace rcs;

namespace {

StrategySpec spec(StrategySpec::Kind k, long K = 0) {
  StrategySpec s;
  s.kind = k;
  s.k = K;
  return s;
}

}  // namespace

TEST_CASE("sandbox match: rival absent, ours wins") {
  const auto d = build_domain(DomainKind::TorusGrid, 4, 2);
  const auto g = green_kernel(d);
  const auto st = simulate(d, g, spec(StrategySpec::Kind::Greedy), spec(StrategySpec::Kind::Greedy),
                           GrowthSchedule::fixed(0), 1);
  REQUIRE(st.history.size() == 1);
  CHECK(st.rival.empty());
  const auto& r = st.history[0];
  // mu = delta_0: W(mu, dx) moves mass 1/16 per site; W(-mu, dx) = 2 (creation of both).
  const auto dx = uniform_measure(d);
  const auto mu = competition_measure(st.ours, st.rival);
  CHECK(r.w_ours == Catch::Approx(oracle::signed_w(d, mu, dx)).margin(1e-9));
  CHECK(r.winner == Winner::Ours);
}

TEST_CASE("one round against a doubling copy rival") {
  const auto d = build_domain(DomainKind::TorusGrid, 4, 2);
  const auto g = green_kernel(d);
  const auto st = simulate(d, g, spec(StrategySpec::Kind::Greedy), spec(StrategySpec::Kind::Copy),
                           GrowthSchedule::doubling(), 1);
  REQUIRE(st.rival.size() == 2);
  CHECK(st.rival.sites[0] == st.ours.sites[0]);
  const auto mu = competition_measure(st.ours, st.rival);
  CHECK(mu.pos().empty());
  CHECK(mu.neg().size() == 1);
  CHECK(mu.total() == Catch::Approx(-1.0 / 3.0));
  const auto& r = st.history[0];
  CHECK(r.w_ours == Catch::Approx(4.0 / 3.0).epsilon(1e-12));
  const auto dx = uniform_measure(d);
  CHECK(r.w_rival == Catch::Approx(oracle::signed_w(d, negate(mu), dx)).margin(1e-9));
  CHECK(r.winner == Winner::Rival);
}

TEST_CASE("mirror play ties at one") {
  const auto d = build_domain(DomainKind::TorusGrid, 3, 1);
  const PlacementSeq a{d.name(), {1, 2}};
  const auto r = score_round(d, a, a);
  CHECK(r.w_ours == Catch::Approx(1.0));
  CHECK(r.w_rival == Catch::Approx(1.0));
  CHECK(r.w_ours == Catch::Approx(oracle::signed_w(d, SignedMeasure(d.name()), uniform_measure(d))));
  CHECK(r.winner == Winner::Tie);
}

TEST_CASE("winner flag follows the scores") {
  CHECK(decide(1.0, 1.0 + 1e-13) == Winner::Tie);
  CHECK(decide(1.0, 1.1) == Winner::Ours);
  CHECK(decide(1.1, 1.0) == Winner::Rival);
}

TEST_CASE("match state invariants and preview") {
  const auto d = build_domain(DomainKind::TorusGrid, 6, 2);
  const auto g = green_kernel(d);
  Match m(d, g, spec(StrategySpec::Kind::Headstart, 3), std::nullopt);
  CHECK(m.state().rival.size() == 3);
  const auto before = m.state().to_json().dump();
  const auto p1 = m.preview(7), p2 = m.preview(7);
  CHECK(p1.w_ours == p2.w_ours);
  CHECK(m.state().to_json().dump() == before);
  for (Site s : {Site{7}, Site{7}, Site{20}}) {
    m.play(s);
    CHECK(static_cast<long>(m.state().rival.size()) == m.state().round + 3);
    CHECK(m.state().history.back().w_ours >= 1.0 + 3.0 / (2.0 * m.state().round + 3.0) - 1e-9);
  }
  CHECK(m.state().history.size() == 3);
  CHECK_THROWS_AS(m.play(36), InvalidArgument);
  CHECK_THROWS_AS(Match(d, g, spec(StrategySpec::Kind::Headstart, 2), GrowthSchedule::doubling()), PreconditionError);
  CHECK_THROWS_AS(Match(d, g, spec(StrategySpec::Kind::Copy), GrowthSchedule::affine(1)), PreconditionError);
}

TEST_CASE("myopic strategy picks the preview minimum") {
  const auto d = build_domain(DomainKind::TorusGrid, 5, 2);
  const auto g = green_kernel(d);
  Match m(d, g, spec(StrategySpec::Kind::Copy), GrowthSchedule::doubling());
  OurPlayer player(spec(StrategySpec::Kind::Myopic), d, g);
  for (int round = 0; round < 3; ++round) {
    const Site s = player.next(m);
    double best = m.preview(s).w_ours;
    for (Site x = 0; x < d.size(); ++x) CHECK(m.preview(x).w_ours >= best - 1e-12 * std::max(1.0, best));
    for (Site x = 0; x < s; ++x) CHECK(m.preview(x).w_ours > best - 1e-12 * std::max(1.0, best));
    player.observe(s);
    m.play(s);
  }
  const auto big = build_domain(DomainKind::TorusGrid, 40, 2);
  const auto c = myopic_candidates(big);
  CHECK(c.size() == 256);
  CHECK(std::is_sorted(c.begin(), c.end()));
  CHECK(c == myopic_candidates(big));
}

TEST_CASE("lemma43 checks") {
  const auto d = build_domain(DomainKind::TorusGrid, 5, 2);
  const SignedMeasure zero(d.name());
  const auto a = SignedMeasure::from_parts(d.name(), {{3, 1.0}}, {});
  const auto c1 = check_lemma43(d, a, zero);
  CHECK(c1.lhs == Catch::Approx(1.0));
  CHECK(c1.rhs == 1.0);
  CHECK(c1.satisfied);
  CHECK(check_lemma43(d, a, a).lhs == 0.0);
  for (const auto& c : lemma43_fuzz(d, 30, 1)) CHECK(c.satisfied);

  const auto g = green_kernel(d);
  const auto st = simulate(d, g, spec(StrategySpec::Kind::Greedy), spec(StrategySpec::Kind::Copy),
                           GrowthSchedule::doubling(), 1);
  const auto c3 = check_lemma43(d, competition_measure(st.ours, st.rival), uniform_measure(d));
  CHECK(c3.rhs == Catch::Approx(4.0 / 3.0));
  CHECK(c3.satisfied);
}

TEST_CASE("prop41 and the discrete ball volume") {
  const auto d = build_domain(DomainKind::TorusGrid, 16, 2);
  const auto g = green_kernel(d);
  const ForbiddenRegion region{136, 0.25};
  // Sites within 0.125 of the centre: offsets with |dx|^2+|dy|^2 < 4 in grid steps.
  CHECK(ball_volume(d, 136, 0.125) == Catch::Approx(9.0 / 256.0));
  const auto seq = restricted_sequence(64, d, g, region);
  const auto c = check_prop41(d, seq, region);
  CHECK(c.rhs == Catch::Approx(0.125 * 9.0 / 256.0));
  CHECK(c.satisfied);
  // The centre is itself a site, so even a tiny ball keeps one cell of volume.
  CHECK(check_prop41(d, seq, ForbiddenRegion{136, 0.01}).rhs == Catch::Approx(0.005 / 256.0));
  CHECK_THROWS_AS(check_prop41(d, PlacementSeq{d.name(), {136}}, region), PreconditionError);
}

TEST_CASE("cor42 crossover") {
  const auto d = build_domain(DomainKind::TorusGrid, 16, 2);
  const auto g = green_kernel(d);
  const auto half = check_cor42(d, g, 24, ForbiddenRegion{136, 0.35});
  REQUIRE(half.crossover.has_value());
  CHECK(*half.crossover <= 16);
  for (const auto& r : half.records)
    if (r.name == "cor42-round" && *r.n >= *half.crossover) CHECK(r.satisfied);

  const auto plain = greedy_sequence(12, g);
  Site far = 0;
  for (Site s = 0; s < d.size(); ++s)
    if (std::find(plain.sites.begin(), plain.sites.end(), s) == plain.sites.end()) far = s;
  CHECK_FALSE(check_cor42(d, g, 12, ForbiddenRegion{far, 0.01}).crossover.has_value());
}

TEST_CASE("fit_decay recovers exact power laws") {
  std::vector<double> ns{4, 8, 16, 32, 64}, ds;
  for (double n : ns) ds.push_back(3.0 * std::pow(n, -0.5));
  const auto f = fit_decay(ns, ds);
  CHECK(std::abs(f.slope + 0.5) <= 1e-12);
  CHECK(std::abs(f.constant - 3.0) <= 1e-12);
  CHECK(f.max_residual <= 1e-12);
  CHECK_THROWS_AS(fit_decay(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}), InvalidArgument);
  CHECK_THROWS_AS(fit_decay(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 0, 3, 4}), InvalidArgument);
}

TEST_CASE("greedy beats random points in the decay constant") {
  const auto d = build_domain(DomainKind::TorusGrid, 24, 2);
  const auto g = green_kernel(d);
  const std::vector<long> ns{8, 16, 32, 64};
  const auto sweep = decay_sweep(d, g, ns, -0.8, -0.3, 5.0);
  std::mt19937_64 rng(17);
  std::vector<double> xs, rd;
  for (long n : ns) {
    PlacementSeq p{d.name(), {}};
    for (long i = 0; i < n; ++i) p.sites.push_back(rng() % d.size());
    xs.push_back(static_cast<double>(n));
    rd.push_back(empirical_w1(d, p));
  }
  const auto rf = fit_decay(xs, rd);
  CHECK(rf.constant > sweep.fit.constant);
  CHECK(sweep.fit.slope < -0.3);
}

TEST_CASE("thm32 check on a four-site domain") {
  const auto d = build_domain(DomainKind::TorusGrid, 2, 2);
  const auto g = green_kernel(d);
  const PlacementSeq x{d.name(), {0}}, y{d.name(), {3}};
  const auto c = check_thm32(d, g, x, y, 100.0);
  const auto mu = competition_measure(x, y);
  CHECK(c.lhs == Catch::Approx(oracle::signed_w(d, mu, uniform_measure(d))).margin(1e-9));
  const double shape = 2.0 * 1 / 2 + std::pow(2.0, -0.5) + std::sqrt(std::abs(2.0 * g(0, 3))) / 2.0;
  CHECK(c.rhs == Catch::Approx(shape));
  CHECK(*c.fitted == Catch::Approx(c.lhs / shape));
  CHECK_THROWS_AS(check_thm32(d, g, x, x, 100.0), PreconditionError);
}

TEST_CASE("prop34 after calibration") {
  const auto d = build_domain(DomainKind::TorusGrid, 16, 2);
  const auto g = green_kernel(d);
  const std::vector<long> ns{8, 16, 32, 64};
  const double c = calibrate_inverse(d, g, ns);
  for (long n : ns) {
    const auto [ours, none] = split_greedy(g, n, 0);
    CHECK(check_prop34(d, ours, none, c).satisfied);
  }
  const auto [ours, rivals] = split_greedy(g, 63, 1);
  const auto r = check_prop34(d, ours, rivals, c);
  CHECK(r.satisfied);
  const auto [o2, r2] = split_greedy(g, 4, 12);
  CHECK(check_prop34(d, o2, r2, c).rhs < 0.0);
}

TEST_CASE("copy rival game on a small torus") {
  const auto d = build_domain(DomainKind::TorusGrid, 8, 2);
  const auto g = green_kernel(d);
  const auto res = check_thm44(d, g, GrowthSchedule::doubling(), 8);
  REQUIRE(res.found.has_value());
  for (const auto& c : res.records)
    if (c.enforced) CHECK(c.satisfied);
  for (const auto& r : res.rounds) CHECK(r.w_ours == Catch::Approx(4.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("headstart scan") {
  const auto d = build_domain(DomainKind::TorusGrid, 8, 2);
  const auto g = green_kernel(d);
  const auto res = check_thm46(d, g, 3, 8);
  REQUIRE(res.found.has_value());
  CHECK(*res.found >= 1);
  for (const auto& c : res.records)
    if (c.enforced) CHECK(c.satisfied);
  // K = 0 is a pure mirror: every round ties.
  StrategySpec mirror;
  mirror.kind = StrategySpec::Kind::Headstart;
  const auto st = simulate(d, g, StrategySpec{}, mirror, std::nullopt, 3);
  for (const auto& r : st.history) CHECK(r.winner == Winner::Tie);
}

TEST_CASE("report output is deterministic") {
  Report a;
  a.add(BoundCheck::upper("x", 1.0, 2.0).at(3, 6));
  a.add(BoundCheck::lower("y", 1.0, 2.0));
  a.add(BoundCheck::info("z", 5.0, 2.0, false));
  ScoreRecord s;
  s.n = 1;
  a.add(s);
  CHECK(a.failures() == 1);
  CHECK(a.csv() ==
        "name,N,fN,lhs,rhs,ratio,satisfied\nx,3,6,1,2,,true\ny,,,1,2,,false\nz,,,5,2,,false\nscore,1,0,0,0,,\n");
  CHECK(a.jsonl().find("\"type\":\"check\"") != std::string::npos);
}
