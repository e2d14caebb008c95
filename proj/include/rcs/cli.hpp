#pragma once

// The `rcs` command line: domain, dist, greedy, simulate, check, serve.
//
// Exit status: 0 success (all checks satisfied), 1 usage or input error,
// 2 a check failed, 3 file I/O error.

#include <csignal>
#include <filesystem>
#include <iostream>
#include <optional>
#include <pthread.h>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rcs/domain.hpp"
#include "rcs/error.hpp"
#include "rcs/experiment.hpp"
#include "rcs/gamesvc.hpp"
#include "rcs/gamesvc_http.hpp"
#include "rcs/green.hpp"
#include "rcs/harness.hpp"
#include "rcs/placement.hpp"
#include "rcs/transport.hpp"

namespace rcs::cli {

enum ExitCode { kOk = 0, kUsage = 1, kCheckFailed = 2, kIo = 3 };

/// A domain argument is a domain file when such a file exists, otherwise a
/// built-in name like "torus-grid-16-d2".
inline Domain domain_arg(const std::string& arg) {
  if (std::filesystem::exists(arg)) return load_domain(nlohmann::json{{"file", arg}});
  return domain_from_name(arg);
}

inline void emit(const std::string& content, const std::optional<std::filesystem::path>& path, std::ostream& out) {
  if (path) write_file(*path, content);
  else out << content;
}

inline int cmd_domain(const std::string& kind, int resolution, int dim, const std::string& out_path, std::ostream& out) {
  const auto d = build_domain(parse_domain_kind(kind), resolution, kind == "sphere-points" ? 2 : dim);
  emit(d.to_json().dump() + "\n", out_path.empty() ? std::nullopt : std::optional<std::filesystem::path>(out_path), out);
  return kOk;
}

inline int cmd_dist(const std::string& mu_path, const std::string& nu_path, double a, double b,
                    const std::string& domain, bool plan, std::ostream& out) {
  const auto mu = SignedMeasure::from_json(parse_json(read_file(mu_path), mu_path));
  const auto nu = SignedMeasure::from_json(parse_json(read_file(nu_path), nu_path));
  if (mu.domain() != nu.domain()) {
    throw DomainMismatch("measures on different domains: '" + mu.domain() + "' and '" + nu.domain() + "'");
  }
  const auto d = domain_arg(domain.empty() ? mu.domain() : domain);
  const auto r = signed_w(d, mu, nu, a, b);
  const nlohmann::json j = plan ? r.plan.to_json(r.cost) : nlohmann::json{{"cost", r.cost}};
  out << j.dump() << "\n";
  return kOk;
}

inline int cmd_greedy(const std::string& domain, long n, std::optional<Site> forbid_site, double forbid_radius,
                      const std::string& out_path, std::ostream& out) {
  if (n < 1) throw InvalidArgument("--n must be >= 1");
  const auto d = domain_arg(domain);
  const auto g = green_kernel(d);
  PlacementSeq seq;
  if (forbid_site) {
    seq = restricted_sequence(static_cast<std::size_t>(n), d, g, ForbiddenRegion{*forbid_site, forbid_radius});
  } else {
    seq = greedy_sequence(static_cast<std::size_t>(n), g);
  }
  emit(seq.to_json().dump() + "\n", out_path.empty() ? std::nullopt : std::optional<std::filesystem::path>(out_path),
       out);
  return kOk;
}

inline std::optional<std::filesystem::path> output_path(const std::string& flag, const ExperimentSpec& s,
                                                        const std::optional<std::string>& from_spec) {
  if (!flag.empty()) return std::filesystem::path(flag);
  if (from_spec) return s.resolve(*from_spec);
  return std::nullopt;
}

inline int write_report(const Report& r, const ExperimentSpec& s, const std::string& out_flag,
                        const std::string& csv_flag, std::ostream& out) {
  emit(r.jsonl(), output_path(out_flag, s, s.output), out);
  if (auto csv = output_path(csv_flag, s, s.csv)) write_file(*csv, r.csv());
  return kOk;
}

inline int cmd_simulate(const std::string& spec_path, const std::string& out_flag, const std::string& csv_flag,
                        std::ostream& out) {
  const auto s = ExperimentSpec::load(spec_path);
  const auto d = s.build_domain();
  const auto g = green_kernel(d);
  return write_report(run_simulation(s, d, g), s, out_flag, csv_flag, out);
}

inline int cmd_check(const std::string& spec_path, const std::string& out_flag, const std::string& csv_flag,
                     std::ostream& out, std::ostream& err) {
  const auto s = ExperimentSpec::load(spec_path);
  const auto d = s.build_domain();
  const auto g = green_kernel(d);
  const auto r = run_checks(s, d, g);
  write_report(r, s, out_flag, csv_flag, out);
  if (!r.all_satisfied()) {
    err << "rcs check: " << r.failures() << " of " << r.size() << " records not satisfied\n";
    return kCheckFailed;
  }
  return kOk;
}

/// Serves until SIGINT or SIGTERM, then writes the optional snapshot.
inline int cmd_serve(const ServeOptions& opt, const std::string& domain, const std::string& snapshot,
                     std::ostream& err) {
  GameService svc(opt.max_sessions);
  if (!domain.empty()) {
    // Validate now so a bad default domain fails at startup.
    (void)domain_arg(domain);
    svc.set_default_domain(std::filesystem::exists(domain) ? load_domain(nlohmann::json{{"file", domain}}).to_json()
                                                           : nlohmann::json(domain));
  }
  httplib::Server svr;
  install_routes(svr, svc, opt.cors_origin);

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    svr.stop();
  });

  if (!svr.bind_to_port(opt.host, opt.port)) {
    err << "rcs serve: cannot bind " << opt.host << ":" << opt.port << "\n";
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    return kIo;
  }
  err << "rcs serve: listening on " << opt.host << ":" << opt.port << "\n";
  svr.listen_after_bind();
  waiter.join();
  if (!snapshot.empty()) write_file(snapshot, svc.snapshot().dump(2) + "\n");
  return kOk;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Competitive shop placement measured by signed Wasserstein distance", "rcs"};
  app.require_subcommand(1);
  app.allow_windows_style_options(false);

  std::string kind, domain, mu_path, nu_path, out_path, csv_path, spec_path, snapshot;
  int resolution = 0, dim = 2;
  double cost_a = 1.0, cost_b = 1.0, forbid_radius = 0.0;
  long n = 0;
  std::optional<Site> forbid_site;
  bool plan = false;
  ServeOptions serve;

  auto* c_domain = app.add_subcommand("domain", "Write a domain file");
  c_domain->add_option("--kind", kind, "torus-grid, square-grid or sphere-points")->required();
  c_domain->add_option("--resolution", resolution, "Points per axis, or point count for sphere-points")->required();
  c_domain->add_option("--dim", dim, "Grid dimension (1-3)");
  c_domain->add_option("--out", out_path, "Output file (default stdout)");

  auto* c_dist = app.add_subcommand("dist", "Signed distance between two measure files");
  c_dist->add_option("--mu", mu_path, "First measure file")->required();
  c_dist->add_option("--nu", nu_path, "Second measure file")->required();
  c_dist->add_option("--a", cost_a, "Creation/destruction cost");
  c_dist->add_option("--b", cost_b, "Transport cost per unit distance");
  c_dist->add_option("--domain", domain, "Domain file or name (default: the measures' domain name)");
  c_dist->add_flag("--plan", plan, "Print the transport plan as well");

  auto* c_greedy = app.add_subcommand("greedy", "Greedy Green-energy placement");
  c_greedy->add_option("--domain", domain, "Domain file or name")->required();
  c_greedy->add_option("--n", n, "Number of points")->required();
  auto* fs = c_greedy->add_option("--forbid-site", forbid_site, "Centre site of a forbidden ball");
  c_greedy->add_option("--forbid-radius", forbid_radius, "Radius of the forbidden ball")->needs(fs);
  fs->needs(c_greedy->get_option("--forbid-radius"));
  c_greedy->add_option("--out", out_path, "Output file (default stdout)");

  auto* c_sim = app.add_subcommand("simulate", "Play the match described by an experiment file");
  auto* c_check = app.add_subcommand("check", "Run the checks listed in an experiment file");
  for (auto* c : {c_sim, c_check}) {
    c->add_option("--experiment", spec_path, "Experiment file")->required();
    c->add_option("--out", out_path, "JSON-lines report (overrides the experiment file)");
    c->add_option("--csv", csv_path, "CSV report (overrides the experiment file)");
  }

  auto* c_serve = app.add_subcommand("serve", "Run the game service");
  c_serve->add_option("--port", serve.port, "Port")->check(CLI::Range(0, 65535));
  c_serve->add_option("--host", serve.host, "Bind address");
  c_serve->add_option("--domain", domain, "Default domain file or name for new sessions");
  c_serve->add_option("--max-sessions", serve.max_sessions, "Session limit")->check(CLI::PositiveNumber);
  c_serve->add_option("--cors-origin", serve.cors_origin, "Allowed browser origin");
  c_serve->add_option("--snapshot", snapshot, "Write all sessions here on shutdown");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*c_domain) return cmd_domain(kind, resolution, dim, out_path, out);
    if (*c_dist) return cmd_dist(mu_path, nu_path, cost_a, cost_b, domain, plan, out);
    if (*c_greedy) return cmd_greedy(domain, n, forbid_site, forbid_radius, out_path, out);
    if (*c_sim) return cmd_simulate(spec_path, out_path, csv_path, out);
    if (*c_check) return cmd_check(spec_path, out_path, csv_path, out, err);
    if (*c_serve) return cmd_serve(serve, domain, snapshot, err);
  } catch (const IoError& e) {
    err << "rcs: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    err << "rcs: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace rcs::cli
