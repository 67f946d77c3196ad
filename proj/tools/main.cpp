#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "hytube/errors.hpp"
#include "hytube/io.hpp"
#include "hytube/montecarlo.hpp"
#include "hytube/pipeline.hpp"

namespace fs = std::filesystem;
using namespace hytube;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kNotCertified = 2;

struct Args {
  std::string config;
  std::string gait;
  std::string cert;
  std::string out;
  std::optional<std::uint64_t> seed;
};

RunConfig resolve(const Args& a) {
  RunConfig cfg;
  if (!a.config.empty()) cfg = load_config(a.config);
  if (!a.out.empty()) cfg.out_dir = a.out;
  if (a.seed) cfg.seed = *a.seed;
  fs::create_directories(cfg.out_dir);
  write_file((fs::path(cfg.out_dir) / "resolved_config.txt").string(), format_config(cfg));
  return cfg;
}

std::string out_path(const RunConfig& cfg, const std::string& name) { return (fs::path(cfg.out_dir) / name).string(); }

GaitSpec load_gait(const Args& a) {
  if (a.gait.empty()) throw Error(ErrorKind::Config, "--gait is required");
  return gait_from_json(read_file(a.gait));
}

Certificate load_cert(const Args& a) {
  if (a.cert.empty()) throw Error(ErrorKind::Config, "--cert is required");
  return certificate_from_json(read_file(a.cert));
}

void write_tube(const RunConfig& cfg, const VerificationResult& r, const std::string& name) {
  std::ostringstream os;
  write_tube_csv(os, r);
  write_file(out_path(cfg, name), os.str());
}

int cmd_synthesize(const Args& a) {
  const RunConfig cfg = resolve(a);
  StepController sc;
  const GaitSpec gait = synthesize_controlled_gait(cfg, &sc);
  write_file(out_path(cfg, "gait.json"), gait_to_json(gait));
  std::cout << "fixed-point residual " << gait.fixed_point_residual << ", period " << gait.period
            << ", pole placement error " << sc.placement_error << "\n";
  return kOk;
}

int cmd_verify(const Args& a) {
  const RunConfig cfg = resolve(a);
  const GaitSpec gait = load_gait(a);
  Baseline b;
  try {
    b = verify_baseline(gait, cfg);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoVerifiableScale) throw;
    std::cout << "no certificate: " << e.what() << "\n";
    return kNotCertified;
  }
  const Certificate cert = make_certificate(b.rescale.result, gait.x_star, b.shape.alpha, gait.k_track);
  write_file(out_path(cfg, "certificate.json"), certificate_to_json(cert));
  write_tube(cfg, b.rescale.result, "tube.csv");
  std::cout << "verified " << cert.verified << " at scale " << cert.scale << ", gamma " << cert.gamma << ", window ["
            << cert.t_under << ", " << cert.t_over << "]\n";
  return cert.verified ? kOk : kNotCertified;
}

int cmd_design(const Args& a) {
  const RunConfig cfg = resolve(a);
  const GaitSpec gait = load_gait(a);
  const Certificate base = load_cert(a);
  if (!base.verified) throw Error(ErrorKind::InvalidState, "design needs a verified baseline certificate");
  GaitSpec g = gait;
  g.k_track = base.k_track;

  std::ofstream hist(out_path(cfg, "phi_history.csv"));
  hist << "outer,inner,phi,eta,fd_consistency,k1,k2,k3,k4\n" << std::setprecision(17);
  const DesignResult res = design_tracking_gain(g, base.alpha(), cfg.design(), [&](const DesignStep& s) {
    hist << s.outer << ',' << s.inner << ',' << s.phi << ',' << s.eta << ',' << s.fd_consistency;
    for (Eigen::Index i = 0; i < s.gain.size(); ++i) hist << ',' << s.gain(i);
    hist << '\n' << std::flush;
  });

  Certificate cert = make_certificate(res.certificate, gait.x_star, base.alpha0, res.gain);
  cert.scale = base.scale * res.enlargement;
  write_file(out_path(cfg, "design_certificate.json"), certificate_to_json(cert));
  write_tube(cfg, res.certificate, "design_tube.csv");

  json j;
  j["gain"] = std::vector<double>(res.gain.data(), res.gain.data() + res.gain.size());
  j["enlargement"] = res.enlargement;
  j["baseline_phi"] = res.baseline_phi;
  j["scales"] = res.scales;
  j["stalled"] = res.stalled;
  write_file(out_path(cfg, "gain.json"), j.dump(2) + "\n");
  std::cout << "enlargement " << res.enlargement << ", verified " << cert.verified << "\n";
  return cert.verified ? kOk : kNotCertified;
}

int cmd_montecarlo(const Args& a) {
  const RunConfig cfg = resolve(a);
  GaitSpec gait = load_gait(a);
  const Certificate cert = load_cert(a);
  gait.k_track = cert.k_track;
  const VerificationResult r = reverify(gait, cert, cfg);
  if (!r.failure.empty()) throw Error(ErrorKind::InvalidState, "tube could not be regenerated: " + r.failure);
  const auto sys = make_closed_loop(gait);
  const MonteCarloReport rep = run_montecarlo(*sys, cert.x_star, cert.alpha(), r.tube, cfg.montecarlo());

  json j;
  j["n_traj"] = cfg.n_traj;
  j["n_crossings"] = cfg.n_crossings;
  j["seed"] = cfg.seed;
  j["inflation"] = cfg.mc_inflation;
  j["escapes"] = rep.escapes;
  j["failures"] = rep.failures;
  j["max_post_norm"] = rep.max_post_norm;
  json trajs = json::array();
  for (const auto& t : rep.trajectories)
    trajs.push_back({{"index", t.index},
                     {"escaped", t.escaped},
                     {"crossings", t.crossings},
                     {"max_tube_ratio", t.max_tube_ratio},
                     {"max_post_norm", t.max_post_norm},
                     {"failure", t.failure}});
  j["trajectories"] = trajs;
  write_file(out_path(cfg, "montecarlo.json"), j.dump(2) + "\n");
  std::cout << rep.escapes << " escapes, " << rep.failures << " failures over " << cfg.n_traj << " x "
            << cfg.n_crossings << ", max post-step norm " << rep.max_post_norm << "\n";
  return rep.escapes == 0 ? kOk : kNotCertified;
}

int cmd_export(const Args& a) {
  const RunConfig cfg = resolve(a);
  const GaitSpec gait = load_gait(a);
  const Certificate cert = load_cert(a);
  const VerificationResult r = reverify(gait, cert, cfg);
  write_tube(cfg, r, "tube.csv");
  std::cout << r.tube.size() << " tube samples written\n";
  return kOk;
}

void report_error(const std::string& kind, const std::string& message, const Args& a) {
  const json j = {{"error", kind}, {"message", message}};
  std::cerr << j.dump() << "\n";
  if (!a.out.empty()) {
    std::error_code ec;
    fs::create_directories(a.out, ec);
    std::ofstream((fs::path(a.out) / "error.json").string()) << j.dump(2) << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Normotope reachable-tube verifier for a hybrid walking gait"};
  app.require_subcommand(1);
  Args args;

  auto add_common = [&](CLI::App* sub, bool gait, bool cert) {
    sub->add_option("--config", args.config, "flat key = value run configuration");
    sub->add_option("--out", args.out, "output directory");
    sub->add_option("--seed", args.seed, "random seed");
    if (gait) sub->add_option("--gait", args.gait, "gait file")->required();
    if (cert) sub->add_option("--cert", args.cert, "certificate file")->required();
  };
  auto* synth = app.add_subcommand("synthesize", "periodic gait and step-to-step controller");
  auto* verify = app.add_subcommand("verify", "baseline certificate and tube");
  auto* design = app.add_subcommand("design", "tracking gain that enlarges the certified tube");
  auto* mc = app.add_subcommand("montecarlo", "falsification runs against a certificate");
  auto* exp = app.add_subcommand("export", "tube CSV for a certificate");
  add_common(synth, false, false);
  add_common(verify, true, false);
  add_common(design, true, true);
  add_common(mc, true, true);
  add_common(exp, true, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kError;
  }

  try {
    if (*synth) return cmd_synthesize(args);
    if (*verify) return cmd_verify(args);
    if (*design) return cmd_design(args);
    if (*mc) return cmd_montecarlo(args);
    if (*exp) return cmd_export(args);
  } catch (const Error& e) {
    report_error(std::string(to_string(e.kind())), e.what(), args);
    return kError;
  } catch (const std::exception& e) {
    report_error("Internal", e.what(), args);
    return kError;
  }
  return kError;
}
