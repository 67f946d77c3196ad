#include "hytube/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"

#include "hytube/errors.hpp"

namespace hytube {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out))
    throw Error(ErrorKind::Config, "key '" + key + "': not a number: '" + v + "'");
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw Error(ErrorKind::Config, "key '" + key + "': not an integer: '" + v + "'");
  return out;
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  if (out.empty()) throw Error(ErrorKind::Config, "key '" + key + "': empty list");
  return out;
}

std::string list_text(const std::vector<double>& v) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  return os.str();
}

struct Field {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
std::string num_text(T v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

Field real(double RunConfig::*m) {
  return {[m](RunConfig& c, const std::string& k, const std::string& v) { c.*m = to_double(k, v); },
          [m](const RunConfig& c) { return num_text(c.*m); }};
}

template <typename Get>
Field real_at(Get get) {
  return {[get](RunConfig& c, const std::string& k, const std::string& v) { get(c) = to_double(k, v); },
          [get](const RunConfig& c) { return num_text(get(const_cast<RunConfig&>(c))); }};
}

template <typename Get>
Field count_at(Get get) {
  return {[get](RunConfig& c, const std::string& k, const std::string& v) {
            const long long n = to_int(k, v);
            if (n < 0) throw Error(ErrorKind::Config, "key '" + k + "': must be non-negative");
            get(c) = static_cast<std::remove_reference_t<decltype(get(c))>>(n);
          },
          [get](const RunConfig& c) { return num_text(get(const_cast<RunConfig&>(c))); }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      {"mass", real_at([](RunConfig& c) -> double& { return c.walker.mass; })},
      {"gravity", real_at([](RunConfig& c) -> double& { return c.walker.gravity; })},
      {"leg_length", real_at([](RunConfig& c) -> double& { return c.walker.leg_length; })},
      {"hip_angle", real_at([](RunConfig& c) -> double& { return c.walker.hip_angle; })},
      {"trajopt_samples", count_at([](RunConfig& c) -> int& { return c.trajopt.samples; })},
      {"trajopt_step", real_at([](RunConfig& c) -> double& { return c.trajopt.step; })},
      {"trajopt_guess_angle", real_at([](RunConfig& c) -> double& { return c.trajopt.guess_angle; })},
      {"trajopt_weights",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.trajopt.weights = to_list(k, v); },
        [](const RunConfig& c) { return list_text(c.trajopt.weights); }}},
      {"trajopt_margin", real_at([](RunConfig& c) -> double& { return c.trajopt.transversality_margin; })},
      {"trajopt_feasibility_tol", real_at([](RunConfig& c) -> double& { return c.trajopt.feasibility_tol; })},
      {"fixed_point_tol", real_at([](RunConfig& c) -> double& { return c.trajopt.polish_tol; })},
      {"poles",
       {[](RunConfig& c, const std::string& k, const std::string& v) { c.poles = to_list(k, v); },
        [](const RunConfig& c) { return list_text(c.poles); }}},
      {"shape_eps", real(&RunConfig::shape_eps)},
      {"h_embed", real(&RunConfig::h_embed)},
      {"h_sim", real(&RunConfig::h_sim)},
      {"ode_tol", real(&RunConfig::ode_tol)},
      {"event_tol", real(&RunConfig::event_tol)},
      {"s_tol", real(&RunConfig::s_tol)},
      {"fd_step", real(&RunConfig::fd_step)},
      {"fd_check_step", real(&RunConfig::fd_check_step)},
      {"fd_tolerance", real(&RunConfig::fd_tolerance)},
      {"grad_step", real(&RunConfig::grad_step)},
      {"grad_check_step", real(&RunConfig::grad_check_step)},
      {"grad_tolerance", real(&RunConfig::grad_tolerance)},
      {"eta", real(&RunConfig::eta)},
      {"n_grad", count_at([](RunConfig& c) -> int& { return c.n_grad; })},
      {"s_min", real(&RunConfig::s_min)},
      {"max_outer", count_at([](RunConfig& c) -> int& { return c.max_outer; })},
      {"n_traj", count_at([](RunConfig& c) -> std::size_t& { return c.n_traj; })},
      {"n_crossings", count_at([](RunConfig& c) -> std::size_t& { return c.n_crossings; })},
      {"mc_inflation", real(&RunConfig::mc_inflation)},
      {"seed", count_at([](RunConfig& c) -> std::uint64_t& { return c.seed; })},
      {"out_dir",
       {[](RunConfig& c, const std::string&, const std::string& v) { c.out_dir = v; },
        [](const RunConfig& c) { return c.out_dir; }}},
  };
  return table;
}

void check_positive(const std::string& key, double v) {
  if (!(v > 0.0)) throw Error(ErrorKind::Config, "key '" + key + "': must be positive");
}

void validate(const RunConfig& c) {
  try {
    c.walker.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, std::string("walker parameters: ") + e.what());
  }
  const std::pair<const char*, double> positive[] = {
      {"trajopt_step", c.trajopt.step},   {"trajopt_feasibility_tol", c.trajopt.feasibility_tol},
      {"fixed_point_tol", c.trajopt.polish_tol}, {"shape_eps", c.shape_eps},
      {"h_embed", c.h_embed},             {"h_sim", c.h_sim},
      {"ode_tol", c.ode_tol},             {"event_tol", c.event_tol},
      {"s_tol", c.s_tol},                 {"fd_step", c.fd_step},
      {"fd_check_step", c.fd_check_step}, {"fd_tolerance", c.fd_tolerance},
      {"grad_step", c.grad_step},         {"grad_check_step", c.grad_check_step},
      {"grad_tolerance", c.grad_tolerance}, {"eta", c.eta},
      {"s_min", c.s_min},                 {"mc_inflation", c.mc_inflation},
  };
  for (const auto& [k, v] : positive) check_positive(k, v);
  if (c.trajopt.samples < 2) throw Error(ErrorKind::Config, "key 'trajopt_samples': must be at least 2");
}

}  // namespace

OdeOptions RunConfig::ode() const {
  OdeOptions o;
  o.rel_tol = ode_tol;
  o.abs_tol = ode_tol;
  o.max_step = h_sim;
  o.event_tol = event_tol;
  return o;
}

FdOptions RunConfig::fd() const { return {fd_step, fd_check_step, fd_tolerance}; }

VerifyOptions RunConfig::verify() const {
  VerifyOptions o;
  o.embed.step = h_embed;
  return o;
}

DesignOptions RunConfig::design() const {
  DesignOptions o;
  o.eta = eta;
  o.gradient_steps = n_grad;
  o.s_min = s_min;
  o.fd_step = grad_step;
  o.fd_check_step = grad_check_step;
  o.fd_tolerance = grad_tolerance;
  o.max_outer = max_outer;
  o.s_tol = s_tol;
  o.verify = verify();
  return o;
}

MonteCarloOptions RunConfig::montecarlo() const {
  MonteCarloOptions o;
  o.n_traj = n_traj;
  o.n_crossings = n_crossings;
  o.seed = seed;
  o.inflation = mc_inflation;
  o.ode = ode();
  return o;
}

RunConfig parse_config(std::istream& in) {
  RunConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::Config, "line " + std::to_string(lineno) + ": expected key = value, got '" + body + "'");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    const auto it = fields().find(key);
    if (it == fields().end()) throw Error(ErrorKind::Config, "key '" + key + "': unknown");
    if (value.empty()) throw Error(ErrorKind::Config, "key '" + key + "': missing value");
    it->second.set(c, key, value);
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::istringstream in(read_file(path));
  return parse_config(in);
}

std::string format_config(const RunConfig& c) {
  std::ostringstream os;
  for (const auto& [key, f] : fields()) os << key << " = " << f.get(c) << "\n";
  return os.str();
}

namespace {

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json mat_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vec_json(m.row(i).transpose()));
  return rows;
}

Eigen::MatrixXd mat_from(const json& j) {
  const std::size_t n = j.size();
  if (n == 0) return {};
  Eigen::MatrixXd m(n, j[0].size());
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd r = vec_from(j[i]);
    if (r.size() != m.cols()) throw Error(ErrorKind::Io, "ragged matrix");
    m.row(static_cast<Eigen::Index>(i)) = r.transpose();
  }
  return m;
}

json vecs_json(const std::vector<Eigen::VectorXd>& vs) {
  json a = json::array();
  for (const auto& v : vs) a.push_back(vec_json(v));
  return a;
}

std::vector<Eigen::VectorXd> vecs_from(const json& j) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& v : j) out.push_back(vec_from(v));
  return out;
}

template <typename F>
auto parsed(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Io, what + ": " + e.what());
  }
}

}  // namespace

std::string gait_to_json(const GaitSpec& g) {
  json j;
  j["params"] = {{"mass", g.params.mass},
                 {"gravity", g.params.gravity},
                 {"leg_length", g.params.leg_length},
                 {"hip_angle", g.params.hip_angle}};
  j["x_star"] = vec_json(g.x_star);
  j["period"] = g.period;
  j["sample_step"] = g.sample_step;
  j["u_ff"] = g.u_ff;
  j["v_ff"] = g.v_ff;
  j["x_pre"] = vec_json(g.x_pre);
  j["k_ds"] = vec_json(g.k_ds);
  j["k_track"] = vec_json(g.k_track);
  j["nominal"] = {{"times", g.nominal.times},
                  {"states", vecs_json(g.nominal.states)},
                  {"rates", vecs_json(g.nominal.rates)},
                  {"left_rates", vecs_json(g.nominal.left_rates)}};
  j["diagnostics"] = {{"trajopt_cost", g.trajopt_cost},
                      {"trajopt_violation", g.trajopt_violation},
                      {"fixed_point_residual", g.fixed_point_residual}};
  return j.dump(2) + "\n";
}

GaitSpec gait_from_json(const std::string& text) {
  return parsed("gait file", [&] {
    const json j = json::parse(text);
    GaitSpec g;
    const json& p = j.at("params");
    g.params.mass = p.at("mass").get<double>();
    g.params.gravity = p.at("gravity").get<double>();
    g.params.leg_length = p.at("leg_length").get<double>();
    g.params.hip_angle = p.at("hip_angle").get<double>();
    g.x_star = vec_from(j.at("x_star"));
    g.period = j.at("period").get<double>();
    g.sample_step = j.at("sample_step").get<double>();
    g.u_ff = j.at("u_ff").get<std::vector<double>>();
    g.v_ff = j.at("v_ff").get<double>();
    g.x_pre = vec_from(j.at("x_pre"));
    g.k_ds = vec_from(j.at("k_ds"));
    g.k_track = vec_from(j.at("k_track"));
    const json& n = j.at("nominal");
    g.nominal.times = n.at("times").get<std::vector<double>>();
    g.nominal.states = vecs_from(n.at("states"));
    g.nominal.rates = vecs_from(n.at("rates"));
    g.nominal.left_rates = vecs_from(n.at("left_rates"));
    const json& d = j.at("diagnostics");
    g.trajopt_cost = d.at("trajopt_cost").get<double>();
    g.trajopt_violation = d.at("trajopt_violation").get<double>();
    g.fixed_point_residual = d.at("fixed_point_residual").get<double>();
    if (g.x_star.size() != 4 || g.x_pre.size() != 4 || g.k_ds.size() != 4 || g.k_track.size() != 4)
      throw Error(ErrorKind::Io, "gait file: state vectors must have 4 entries");
    return g;
  });
}

Certificate make_certificate(const VerificationResult& r, const Eigen::VectorXd& x_star, const Eigen::MatrixXd& alpha0,
                             const Eigen::VectorXd& k_track) {
  Certificate c;
  c.x_star = x_star;
  c.alpha0 = alpha0;
  c.scale = r.scale;
  c.k_track = k_track;
  c.gamma = r.gamma;
  c.t_under = r.t_under;
  c.t_over = r.t_over;
  c.cond_a = r.cond_a;
  c.cond_b = r.cond_b;
  c.cond_c = r.cond_c;
  c.cond_d = r.cond_d;
  c.verified = r.verified;
  c.failure = r.failure;
  return c;
}

std::string certificate_to_json(const Certificate& c) {
  json j;
  j["verified"] = c.verified;
  j["scale"] = c.scale;
  j["gamma"] = std::isfinite(c.gamma) ? json(c.gamma) : json(nullptr);
  j["t_under"] = c.t_under;
  j["t_over"] = c.t_over;
  j["conditions"] = {{"a", c.cond_a}, {"b", c.cond_b}, {"c", c.cond_c}, {"d", c.cond_d}};
  j["failure"] = c.failure;
  j["x_star"] = vec_json(c.x_star);
  j["alpha0"] = mat_json(c.alpha0);
  j["k_track"] = vec_json(c.k_track);
  return j.dump(2) + "\n";
}

Certificate certificate_from_json(const std::string& text) {
  return parsed("certificate file", [&] {
    const json j = json::parse(text);
    Certificate c;
    c.verified = j.at("verified").get<bool>();
    c.scale = j.at("scale").get<double>();
    c.gamma = j.at("gamma").is_null() ? std::numeric_limits<double>::infinity() : j.at("gamma").get<double>();
    c.t_under = j.at("t_under").get<double>();
    c.t_over = j.at("t_over").get<double>();
    const json& k = j.at("conditions");
    c.cond_a = k.at("a").get<bool>();
    c.cond_b = k.at("b").get<bool>();
    c.cond_c = k.at("c").get<bool>();
    c.cond_d = k.at("d").get<bool>();
    c.failure = j.at("failure").get<std::string>();
    c.x_star = vec_from(j.at("x_star"));
    c.alpha0 = mat_from(j.at("alpha0"));
    c.k_track = vec_from(j.at("k_track"));
    if (c.alpha0.rows() != c.x_star.size() || c.alpha0.cols() != c.x_star.size())
      throw Error(ErrorKind::Io, "certificate file: shape does not match x_star");
    return c;
  });
}

void write_tube_csv(std::ostream& out, const VerificationResult& r) {
  const EmbeddingTrajectory& tube = r.tube;
  const Eigen::Index n = tube.size() ? tube.states.front().dim() : 0;
  out << "t";
  for (Eigen::Index i = 0; i < n; ++i) out << ",c" << i + 1;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k) out << ",a" << i + 1 << k + 1;
  out << ",y,slice_nonempty,slice_radius\n";
  out << std::setprecision(17);
  for (std::size_t s = 0; s < tube.size(); ++s) {
    const NormotopeD& N = tube.states[s];
    out << tube.times[s];
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << N.center()(i);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index k = 0; k < n; ++k) out << ',' << N.shape()(i, k);
    const bool has = s < r.slices.size() && r.slices[s].has_value();
    out << ',' << N.offset() << ',' << (has ? 1 : 0) << ',' << (has ? r.slices[s]->radius : 0.0) << '\n';
  }
}

EmbeddingTrajectory read_tube_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Io, "tube csv: missing header");
  const auto columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',') + 1);
  // 1 + n + n^2 + 3 columns
  std::size_t n = 0;
  while (1 + n + n * n + 3 < columns) ++n;
  if (1 + n + n * n + 3 != columns) throw Error(ErrorKind::Io, "tube csv: unexpected column count");

  EmbeddingTrajectory tube;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(to_double("row " + std::to_string(row), trim(cell)));
    if (v.size() != columns) throw Error(ErrorKind::Io, "tube csv: row " + std::to_string(row) + " has wrong width");
    const auto dim = static_cast<Eigen::Index>(n);
    Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(v.data() + 1, dim);
    Eigen::MatrixXd a(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
      for (Eigen::Index k = 0; k < dim; ++k) a(i, k) = v[1 + n + static_cast<std::size_t>(i * dim + k)];
    tube.times.push_back(v[0]);
    tube.states.emplace_back(std::move(c), std::move(a), v[1 + n + n * n]);
  }
  return tube;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write to '" + path + "' failed");
}

}  // namespace hytube
