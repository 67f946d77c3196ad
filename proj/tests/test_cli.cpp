#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "json.hpp"

#include "hytube/errors.hpp"
#include "hytube/io.hpp"
#include "hytube/montecarlo.hpp"
#include "hytube/pipeline.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace hytube;
using namespace hytube::testing;
using nlohmann::json;

namespace {

std::string config_error(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_config(in);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    return e.what();
  }
  FAIL("config accepted: " << text);
  return {};
}

struct Verified {
  GaitSpec gait;
  Baseline base;
};

const Verified& verified() {
  static const Verified v = [] {
    Verified out;
    const RunConfig cfg;
    out.gait = synthesize_controlled_gait(cfg);
    out.base = verify_baseline(out.gait, cfg);
    return out;
  }();
  return v;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hytube_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(HYTUBE_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config errors name the key") {
  CHECK(config_error("bogus = 1\n").find("bogus") != std::string::npos);
  CHECK(config_error("eta = fast\n").find("eta") != std::string::npos);
  CHECK(config_error("n_traj = -3\n").find("n_traj") != std::string::npos);
  CHECK(config_error("poles = 0, x\n").find("poles") != std::string::npos);
  CHECK(config_error("h_embed\n").find("h_embed") != std::string::npos);
}

TEST_CASE("config parses comments and overrides") {
  std::istringstream in("# tuned\nseed = 7\neta = 0.25\n\npoles = 0, 0.2, 0.3, 0.4\n");
  const RunConfig c = parse_config(in);
  CHECK(c.seed == 7);
  CHECK(c.eta == 0.25);
  CHECK(c.poles == std::vector<double>{0.0, 0.2, 0.3, 0.4});
  CHECK(c.h_embed == RunConfig{}.h_embed);
}

TEST_CASE("formatted config round trips") {
  RunConfig c;
  c.seed = 99;
  c.h_embed = 3.5e-5;
  c.walker.mass = 2.25;
  c.trajopt.weights = {1.0, 10.0};
  c.out_dir = "some/dir";
  std::istringstream in(format_config(c));
  const RunConfig back = parse_config(in);
  CHECK(format_config(back) == format_config(c));
  CHECK(back.seed == 99);
  CHECK(back.h_embed == 3.5e-5);
  CHECK(back.walker.mass == 2.25);
  CHECK(back.out_dir == "some/dir");
}

TEST_CASE("gait json round trips exactly") {
  const GaitSpec& g = verified().gait;
  const std::string text = gait_to_json(g);
  const GaitSpec back = gait_from_json(text);
  CHECK(gait_to_json(back) == text);
  CHECK(back.x_star == g.x_star);
  CHECK(back.u_ff == g.u_ff);
  CHECK(back.nominal.times == g.nominal.times);
  CHECK_THROWS_AS(gait_from_json("{\"x_star\": [1, 2]}"), Error);
  CHECK_THROWS_AS(gait_from_json("not json"), Error);
}

TEST_CASE("certificate json round trips") {
  const Verified& v = verified();
  const Certificate c = make_certificate(v.base.rescale.result, v.gait.x_star, v.base.shape.alpha,
                                         Eigen::VectorXd::Zero(4));
  const Certificate back = certificate_from_json(certificate_to_json(c));
  CHECK(back.alpha0 == c.alpha0);
  CHECK(back.scale == c.scale);
  CHECK(back.gamma == c.gamma);
  CHECK(back.verified == c.verified);
  CHECK(back.t_under == c.t_under);
  CHECK((back.alpha() - v.base.shape.alpha / v.base.rescale.scale).norm() == 0.0);
}

TEST_CASE("tube csv round trips") {
  const VerificationResult& r = verified().base.rescale.result;
  std::stringstream io;
  write_tube_csv(io, r);
  const EmbeddingTrajectory back = read_tube_csv(io);
  REQUIRE(back.size() == r.tube.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < back.size(); ++i) {
    const NormotopeD& a = r.tube.states[i];
    const NormotopeD& b = back.states[i];
    worst = std::max(worst, std::abs(back.times[i] - r.tube.times[i]));
    worst = std::max(worst, (a.center() - b.center()).cwiseAbs().maxCoeff());
    worst = std::max(worst, (a.shape() - b.shape()).cwiseAbs().maxCoeff() / a.shape().cwiseAbs().maxCoeff());
    worst = std::max(worst, std::abs(a.offset() - b.offset()) / a.offset());
  }
  CHECK(worst <= 1e-12);

  std::istringstream bad("t,c1\n0.0,abc\n");
  CHECK_THROWS_AS(read_tube_csv(bad), Error);
}

TEST_CASE("monte carlo is deterministic in the seed") {
  const Verified& v = verified();
  const auto sys = make_closed_loop(v.gait);
  const Eigen::MatrixXd alpha = v.base.shape.alpha / v.base.rescale.scale;
  MonteCarloOptions o;
  o.n_traj = 4;
  o.n_crossings = 2;
  o.seed = 11;
  const MonteCarloReport a = run_montecarlo(*sys, v.gait.x_star, alpha, v.base.rescale.result.tube, o);
  const MonteCarloReport b = run_montecarlo(*sys, v.gait.x_star, alpha, v.base.rescale.result.tube, o);
  REQUIRE(a.trajectories.size() == 4);
  CHECK(a.escapes == 0);
  CHECK(a.escapes == b.escapes);
  CHECK(a.max_post_norm == b.max_post_norm);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(a.trajectories[i].max_tube_ratio == b.trajectories[i].max_tube_ratio);
    CHECK(a.trajectories[i].crossings == 2);
  }
  o.seed = 12;
  const MonteCarloReport c = run_montecarlo(*sys, v.gait.x_star, alpha, v.base.rescale.result.tube, o);
  CHECK(c.max_post_norm != a.max_post_norm);
}

TEST_CASE("boundary samples lie on the boundary") {
  Rng rng(61);
  for (int k = 0; k < 20; ++k) {
    const NormotopeD n = random_normotope(rng, uniform_int(rng, 2, 5));
    for (const Eigen::VectorXd& x : sample_boundary(n, 50, rng))
      CHECK(normalized_distance(n, x) == doctest::Approx(1.0).epsilon(1e-12));
    for (const Eigen::VectorXd& x : sample_interior(n, 50, rng)) CHECK(normalized_distance(n, x) <= 1.0 + 1e-12);
  }
}

TEST_CASE("cli synthesize is reproducible") {
  const fs::path a = scratch("synth_a"), b = scratch("synth_b");
  REQUIRE(run_cli("synthesize --out " + a.string()) == 0);
  REQUIRE(run_cli("synthesize --out " + b.string() + " --seed 5") == 0);
  CHECK(read_file((a / "gait.json").string()) == read_file((b / "gait.json").string()));
  CHECK(fs::exists(a / "resolved_config.txt"));
  CHECK(read_file((b / "resolved_config.txt").string()).find("seed = 5") != std::string::npos);
}

TEST_CASE("cli errors are reported as json with exit 1") {
  const fs::path d = scratch("errors");
  std::ofstream(d / "bad.cfg") << "no_such_key = 1\n";
  CHECK(run_cli("synthesize --out " + d.string() + " --config " + (d / "bad.cfg").string()) == 1);
  const json err = json::parse(read_file((d / "error.json").string()));
  CHECK(err["error"] == "Config");
  CHECK(err["message"].get<std::string>().find("no_such_key") != std::string::npos);

  CHECK(run_cli("verify --out " + d.string()) == 1);
  CHECK(run_cli("frobnicate") == 1);
}

TEST_CASE("cli verify, export and monte carlo") {
  const fs::path d = scratch("pipeline");
  std::ofstream(d / "small.cfg") << "n_traj = 3\nn_crossings = 2\n";
  const std::string out = " --out " + d.string();
  const std::string gait = " --gait " + (d / "gait.json").string();
  const std::string cert = " --cert " + (d / "certificate.json").string();
  REQUIRE(run_cli("synthesize" + out) == 0);
  REQUIRE(run_cli("verify" + out + gait) == 0);
  const Certificate c = certificate_from_json(read_file((d / "certificate.json").string()));
  CHECK(c.verified);
  CHECK(c.gamma <= 1.0);

  const std::string tube_csv = read_file((d / "tube.csv").string());
  fs::rename(d / "tube.csv", d / "verify_tube.csv");
  REQUIRE(run_cli("export" + out + gait + cert) == 0);
  CHECK(read_file((d / "tube.csv").string()) == tube_csv);

  const std::string small = " --config " + (d / "small.cfg").string();
  REQUIRE(run_cli("montecarlo" + out + gait + cert + small) == 0);
  const json mc = json::parse(read_file((d / "montecarlo.json").string()));
  CHECK(mc["escapes"] == 0);
}
