// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.
//
//   acceptance [experiments-dir]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "oracle/dense_lp.hpp"
#include "oracle/dft_green.hpp"
#include "rcs/cli.hpp"
#include "rcs/experiment.hpp"
#include "rcs/green.hpp"
#include "rcs/harness.hpp"
#include "rcs/transport.hpp"
#include "support/random_measures.hpp"

using namespace rcs;
using namespace testing_support;

namespace {

// Pinned tolerances and budgets.
constexpr double kOracleTol = 1e-9;
constexpr double kMetricTol = 1e-9;
constexpr double kGreenTol = 1e-8;
constexpr double kZeroMeanTol = 1e-9;
constexpr double kSpreadCap = 5.0;
constexpr double kOracleBudgetSeconds = 120.0;
constexpr double kMetricBudgetSeconds = 300.0;
constexpr double kDecayBudgetSeconds = 600.0;

std::filesystem::path g_experiments;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

Report check_file(const std::string& name) {
  const auto s = ExperimentSpec::load(g_experiments / name);
  const auto d = s.build_domain();
  const auto g = green_kernel(d);
  return run_checks(s, d, g);
}

std::vector<nlohmann::json> records(const Report& r) {
  std::vector<nlohmann::json> out;
  std::istringstream in(r.jsonl());
  for (std::string line; std::getline(in, line);) out.push_back(nlohmann::json::parse(line));
  return out;
}

std::vector<nlohmann::json> named(const std::vector<nlohmann::json>& rs, const std::string& name) {
  std::vector<nlohmann::json> out;
  for (const auto& r : rs) {
    if (r.value("name", "") == name) out.push_back(r);
  }
  return out;
}

bool all_satisfied(const std::vector<nlohmann::json>& rs) {
  for (const auto& r : rs) {
    if (!r.at("satisfied").get<bool>()) return false;
  }
  return !rs.empty();
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(0xA11CE);
  double worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    const auto d = random_small_domain(rng);
    const double a = 0.25 * static_cast<double>(1 + rng() % 8), b = 0.25 * static_cast<double>(1 + rng() % 8);
    const auto mu = random_positive(d, rng, 4), nu = random_positive(d, rng, 4);
    worst = std::max(worst, std::abs(gw(d, mu, nu, a, b).cost -
                                     oracle::generalized_w(d, oracle::dense(d, mu.pos()), oracle::dense(d, nu.pos()), a, b)));
    const auto sm = random_signed(d, rng, 4), sn = random_signed(d, rng, 4);
    worst = std::max(worst, std::abs(signed_w(d, sm, sn, a, b).cost - oracle::signed_w(d, sm, sn, a, b)));
  }
  return {worst <= kOracleTol, "500 instances, max |solver - LP| = " + fmt(worst)};
}

Outcome metric_suite() {
  const auto d = build_domain(DomainKind::TorusGrid, 6, 2);
  std::mt19937_64 rng(0xBEEF);
  double sym = 0.0, tri = 0.0, trans = 0.0;
  bool identity = true;
  for (int t = 0; t < 1000; ++t) {
    const auto mu = random_signed(d, rng, 4), nu = random_signed(d, rng, 4), eta = random_signed(d, rng, 4);
    const double dmn = signed_w(d, mu, nu).cost;
    sym = std::max(sym, std::abs(dmn - signed_w(d, nu, mu).cost));
    tri = std::max(tri, dmn - signed_w(d, mu, eta).cost - signed_w(d, eta, nu).cost);
    if (t < 200) trans = std::max(trans, std::abs(signed_w(d, add(mu, eta), add(nu, eta)).cost - dmn));
    // Identity: zero exactly on equal canonical forms, positive otherwise.
    std::map<Site, double> raw;
    for (const auto& [s, w] : mu.pos()) raw[s] += w;
    for (const auto& [s, w] : mu.neg()) raw[s] -= w;
    const Site extra = static_cast<Site>(rng() % d.size());
    raw[extra] += 0.5;
    raw[extra] -= 0.5;
    const auto canon = jordan(d, raw);
    if (canon != mu || signed_w(d, mu, canon).cost > kMetricTol) identity = false;
    if ((mu != nu) != (dmn > kMetricTol)) identity = false;
  }
  const bool pass = sym <= kMetricTol && tri <= kMetricTol && trans <= kMetricTol && identity;
  return {pass, "symmetry " + fmt(sym) + ", triangle excess " + fmt(tri) + " (1000 triples), translation " +
                    fmt(trans) + " (200), identity " + (identity ? "ok" : "violated")};
}

Outcome closed_forms() {
  const auto d = build_domain(DomainKind::TorusGrid, 8, 2);
  std::mt19937_64 rng(0xC10);
  const SignedMeasure zero(d.name());
  double dip = 0.0, eqv = 0.0;
  for (Site a = 0; a < d.size(); a += 3) {
    for (Site b = 0; b < d.size(); b += 5) {
      if (a == b) continue;
      const auto m = SignedMeasure::from_parts(d.name(), {{a, 1.0}}, {{b, 1.0}});
      dip = std::max(dip, std::abs(signed_w(d, m, zero).cost - std::min(d.distance(a, b), 2.0)));
    }
  }
  for (int t = 0; t < 100; ++t) {
    const auto mu = random_signed(d, rng, 5);
    const double n11 = flat_norm(d, mu);
    for (auto [a, b] : {std::pair{1.0, 1.0}, {2.0, 1.0}, {1.0, 3.0}}) {
      const double nab = flat_norm(d, mu, a, b);
      eqv = std::max({eqv, std::min(a, b) * n11 - nab, nab - std::max(a, b) * n11});
    }
  }
  return {dip <= kMetricTol && eqv <= kMetricTol,
          "dipole |err| " + fmt(dip) + ", norm-equivalence excess " + fmt(eqv) + " on 100 measures"};
}

Outcome lemma43() {
  const auto rs = records(check_file("lemma43.json"));
  const auto checks = named(rs, "lemma43");
  double worst = -1e300;
  for (const auto& r : checks) worst = std::max(worst, r.at("rhs").get<double>() - r.at("lhs").get<double>());
  return {checks.size() == 200 && all_satisfied(checks),
          std::to_string(checks.size()) + " pairs on sphere-points-50, max(|total diff| - W) = " + fmt(worst)};
}

Outcome green_oracle() {
  double err = 0.0, mean = 0.0;
  for (auto [side, dim] : {std::pair{16, 2}, {8, 3}}) {
    const auto d = build_domain(DomainKind::TorusGrid, side, dim);
    const auto g = green_kernel(d);
    const oracle::TorusGreen dft(side, dim);
    for (Site i = 0; i < g.size(); ++i) {
      double col = 0.0;
      for (Site j = 0; j < g.size(); ++j) {
        err = std::max(err, std::abs(g(i, j) - dft(static_cast<int>(i), static_cast<int>(j))));
        col += d.weights()[j] * g(j, i);
      }
      mean = std::max(mean, std::abs(col));
    }
  }
  return {err <= kGreenTol && mean <= kZeroMeanTol,
          "16x16 and 8x8x8: max |G - DFT| = " + fmt(err) + ", max |weighted column mean| = " + fmt(mean)};
}

Outcome greedy_decay() {
  std::string detail;
  bool pass = true;
  for (const char* file : {"decay-torus2.json", "decay-torus3.json"}) {
    const auto rs = records(check_file(file));
    const auto lo = named(rs, "decay-slope-min"), hi = named(rs, "decay-slope-max"), sp = named(rs, "decay-spread");
    pass = pass && all_satisfied(lo) && all_satisfied(hi) && all_satisfied(sp) &&
           sp.front().at("rhs").get<double>() <= kSpreadCap;
    detail += std::string(detail.empty() ? "" : "; ") + file + ": slope " + fmt(lo.front().at("lhs").get<double>()) +
              " in [" + fmt(lo.front().at("rhs").get<double>()) + "," + fmt(hi.front().at("rhs").get<double>()) +
              "], spread " + fmt(sp.front().at("lhs").get<double>());
  }
  return {pass, detail};
}

Outcome restricted() {
  const auto rs = records(check_file("restricted.json"));
  const auto p41 = named(rs, "prop41");
  const auto cross = named(rs, "cor42-crossover");
  // Arbitrary sequences outside the same ball must obey the bound as well.
  const auto d = build_domain(DomainKind::TorusGrid, 16, 2);
  const ForbiddenRegion region{136, 0.25};
  const auto allowed = allowed_outside(d, region);
  std::mt19937_64 rng(0x41);
  bool random_ok = true;
  for (int t = 0; t < 100; ++t) {
    PlacementSeq seq{d.name(), {}};
    const std::size_t n = 1 + rng() % 64;
    for (std::size_t i = 0; i < n; ++i) seq.sites.push_back(allowed[rng() % allowed.size()]);
    const auto c = check_prop41(d, seq, region);
    random_ok = random_ok && c.satisfied && c.lhs >= c.rhs;
  }
  bool exact = true;
  for (const auto& r : p41) exact = exact && r.at("lhs").get<double>() >= r.at("rhs").get<double>();
  const bool pass = all_satisfied(p41) && exact && random_ok && all_satisfied(cross) &&
                    cross.front().at("context").at("found").get<bool>();
  return {pass, std::to_string(p41.size()) + " greedy + 100 random restricted sequences bounded; greedy-vs-restricted crossover N0 = " +
                    fmt(cross.front().at("lhs").get<double>())};
}

Outcome copy_rival() {
  const auto rs = records(check_file("copy-rival.json"));
  const auto ours = named(rs, "thm44-ours"), cross = named(rs, "thm44-crossover");
  bool identity = true;
  for (const auto& r : ours) {
    const double n = r.at("N").get<double>(), f = r.at("fN").get<double>();
    identity = identity && f == 2.0 * n && r.at("lhs").get<double>() >= 2.0 * f / (n + f) - kMetricTol;
  }
  const bool pass = ours.size() == 64 && all_satisfied(ours) && identity && all_satisfied(cross) &&
                    cross.front().at("context").at("found").get<bool>();
  return {pass, "32x32 torus, f(N)=2N: w_ours >= 2f/(N+f) on " + std::to_string(ours.size()) +
                    " rounds; rival ahead from N0 = " + fmt(cross.front().at("lhs").get<double>())};
}

Outcome headstart_rival() {
  const auto rs = records(check_file("headstart-rival.json"));
  const auto ours = named(rs, "thm46-ours"), found = named(rs, "thm46-headstart");
  bool identity = true;
  for (const auto& r : ours) {
    const double n = r.at("N").get<double>(), k = r.at("context").at("K").get<double>();
    identity = identity && r.at("lhs").get<double>() >= 1.0 + k / (2.0 * n + k) - kMetricTol;
  }
  const bool pass = all_satisfied(ours) && identity && all_satisfied(found) &&
                    found.front().at("context").at("found").get<bool>();
  return {pass, "16x16 torus, N0=12: smallest winning K = " + fmt(found.front().at("lhs").get<double>()) +
                    "; identity held on " + std::to_string(ours.size()) + " scanned rounds"};
}

Outcome split_shape() {
  const auto rs = records(check_file("thm32.json"));
  const auto sp = named(rs, "thm32-spread");
  const auto per = named(rs, "thm32");
  return {per.size() == 15 && all_satisfied(sp) && sp.front().at("rhs").get<double>() <= kSpreadCap,
          std::to_string(per.size()) + " (N1+N2, N2) combinations on a 12^3 torus, ratio spread " +
              fmt(sp.front().at("lhs").get<double>())};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / ("rcs-acceptance-" + std::to_string(::getpid()));
  std::vector<fs::path> specs;
  for (const auto& e : fs::directory_iterator(g_experiments)) {
    if (e.path().extension() == ".json") specs.push_back(e.path());
  }
  std::sort(specs.begin(), specs.end());
  auto run_suite = [&](const fs::path& dir) {
    fs::create_directories(dir);
    std::ostringstream sink;
    for (const auto& s : specs) {
      const auto spec = ExperimentSpec::load(s);
      const auto jsonl = (dir / (s.stem().string() + ".jsonl")).string();
      const auto csv = (dir / (s.stem().string() + ".csv")).string();
      if (spec.checks.empty()) cli::cmd_simulate(s.string(), jsonl, csv, sink);
      else cli::cmd_check(s.string(), jsonl, csv, sink, sink);
    }
  };
  run_suite(root / "a");
  run_suite(root / "b");
  std::size_t files = 0, differing = 0;
  for (const auto& e : fs::directory_iterator(root / "a")) {
    ++files;
    if (read_file(e.path()) != read_file(root / "b" / e.path().filename())) ++differing;
  }
  fs::remove_all(root);
  return {files == 2 * specs.size() && differing == 0,
          std::to_string(specs.size()) + " experiments run twice, " + std::to_string(files) + " report files, " +
              std::to_string(differing) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
  g_experiments = argc > 1 ? std::filesystem::path(argv[1]) : std::filesystem::path(RCS_EXPERIMENTS_DIR);

  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    double budget_seconds;
  };
  const std::vector<Criterion> criteria{
      {"oracle-equivalence", oracle_equivalence, kOracleBudgetSeconds},
      {"metric-suite", metric_suite, kMetricBudgetSeconds},
      {"closed-forms", closed_forms, 0.0},
      {"total-mass-lower-bound", lemma43, 0.0},
      {"green-oracle", green_oracle, 0.0},
      {"greedy-decay", greedy_decay, kDecayBudgetSeconds},
      {"forbidden-ball", restricted, 0.0},
      {"copy-rival", copy_rival, 0.0},
      {"headstart-rival", headstart_rival, 0.0},
      {"split-shape", split_shape, 0.0},
      {"determinism", determinism, 0.0},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0.0 && secs > c.budget_seconds) {
      o.pass = false;
      o.detail += " (over the " + fmt(c.budget_seconds) + " s budget)";
    }
    std::printf("%s %2zu %-24s %7.2fs  %s\n", o.pass ? "PASS" : "FAIL", i + 1, c.name, secs, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
