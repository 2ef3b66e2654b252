#include "hestoncal/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace hestoncal {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(std::initializer_list<std::string> cells) {
  std::string out;
  for (const auto& c : cells) {
    if (!out.empty()) out += ',';
    out += c;
  }
  return out;
}

// Runs task(i) for i < n on a pool of workers; results are written by index.
template <class Task>
void parallel_for(std::size_t n, std::size_t workers, Task task) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) task(i);
    });
  }
  for (auto& t : pool) t.join();
}

RunRecord start_record(const std::string& study, std::size_t run_id, const ExperimentSpec& spec,
                       const MarketSpec& market, const MeshSize& mesh, const HestonParams& u0, double delta) {
  RunRecord rec;
  rec.study = study;
  rec.run_id = run_id;
  rec.seed = spec.seed;
  rec.delta = delta;
  rec.mesh = mesh;
  rec.maturity = market.maturity;
  rec.u0 = project(u0, spec.calib);
  rec.u_opt = rec.u0;
  rec.j0 = rec.j_opt = rec.improvement = std::nan("");
  return rec;
}

// Calibrates against data from `data_for()` and records the outcome; any
// exception marks the run as failed.
template <class DataFn>
RunRecord calibration_run(RunRecord rec, const ExperimentSpec& spec, const MarketSpec& market,
                          const HestonParams& u0, DataFn data_for) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const auto& [grid, data] = data_for();
    const CalibrationResult res = calibrate(u0, data, market, grid, spec.calib);
    rec.u0 = res.u_start;
    rec.u_opt = res.u_opt;
    rec.j0 = res.initial_cost();
    rec.j_opt = res.final_cost();
    rec.improvement = res.improvement;
    rec.iterations = res.iterations;
    rec.status = to_string(res.status);
    rec.start_projected = res.start_projected;
    rec.steps = res.steps;
    rec.grad_norms = res.grad_norm_history;
  } catch (const std::exception& e) {
    rec.status = "error";
    rec.error = e.what();
  }
  if (spec.record_timing) {
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  }
  return rec;
}

// Calibration on its own grid with freshly generated data.
RunRecord fresh_run(const std::string& study, std::size_t run_id, const ExperimentSpec& spec,
                    const MarketSpec& market, const MeshSize& mesh, const HestonParams& u0) {
  return calibration_run(start_record(study, run_id, spec, market, mesh, u0, 0.0), spec, market, u0, [&] {
    Grid grid = build_grid(market, mesh.n_x, mesh.n_nu, mesh.n_tau, spec.truncation);
    Trajectory data = generate_data(spec.reference, market, grid, spec.calib.theta);
    return std::pair<Grid, Trajectory>(std::move(grid), std::move(data));
  });
}

// Uniform double in [0, 1) from the top 53 bits; independent of the
// standard library's distribution implementation.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// ---- JSON --------------------------------------------------------------------

void reject_unknown(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : obj.items()) {
    if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

template <class T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

json params_json(const HestonParams& p) {
  return {{"sigma", p.sigma}, {"rho", p.rho}, {"kappa", p.kappa}, {"mu", p.mu}};
}

void read_params(const json& obj, const char* key, HestonParams& p) {
  if (!obj.contains(key)) return;
  const json& o = obj.at(key);
  reject_unknown(o, {"sigma", "rho", "kappa", "mu"}, key);
  read(o, "sigma", p.sigma);
  read(o, "rho", p.rho);
  read(o, "kappa", p.kappa);
  read(o, "mu", p.mu);
}

json mesh_json(const MeshSize& m) { return {{"n_x", m.n_x}, {"n_nu", m.n_nu}, {"n_tau", m.n_tau}}; }

MeshSize read_mesh(const json& o, MeshSize m, const std::string& where) {
  reject_unknown(o, {"n_x", "n_nu", "n_tau"}, where);
  read(o, "n_x", m.n_x);
  read(o, "n_nu", m.n_nu);
  read(o, "n_tau", m.n_tau);
  return m;
}

const char* line_search_name(LineSearch l) { return l == LineSearch::kProjected ? "projected" : "plain"; }
const char* adjoint_name(AdjointScheme a) { return a == AdjointScheme::kConservative ? "conservative" : "expanded"; }
const char* gradient_name(GradientForm g) { return g == GradientForm::kLagrangian ? "lagrangian" : "printed"; }

template <class E>
E parse_enum(const std::string& s, std::initializer_list<std::pair<const char*, E>> table, const char* what) {
  for (const auto& [name, value] : table) {
    if (s == name) return value;
  }
  throw ConfigError(std::string("unknown ") + what + " '" + s + "'");
}

std::optional<double> optional_double(const json& o, const char* key, std::optional<double> current) {
  if (!o.contains(key)) return current;
  if (o.at(key).is_null()) return std::nullopt;
  double v = 0.0;
  read(o, key, v);
  return v;
}

}  // namespace

std::string to_string(StudyKind kind) {
  switch (kind) {
    case StudyKind::kSingle:
      return "single";
    case StudyKind::kMesh:
      return "mesh";
    case StudyKind::kMaturity:
      return "maturity";
    case StudyKind::kRandom:
      return "random";
  }
  return "unknown";
}

StudyKind study_kind_from_string(std::string_view name) {
  if (name == "single") return StudyKind::kSingle;
  if (name == "mesh") return StudyKind::kMesh;
  if (name == "maturity") return StudyKind::kMaturity;
  if (name == "random" || name == "random_init") return StudyKind::kRandom;
  throw ConfigError("unknown study kind '" + std::string(name) + "'");
}

std::vector<MeshSize> default_mesh_list() {
  std::vector<MeshSize> out;
  for (std::size_t nx = 80; nx <= 140; nx += 10) {
    out.push_back({nx, nx / 2, nx / 2});
    out.push_back({nx, nx, nx / 2});
  }
  return out;
}

void ExperimentSpec::validate() const {
  auto guard = [](auto&& fn) {
    try {
      fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  };
  guard([&] { market.validate(); });
  guard([&] { reference.validate(); });
  guard([&] { initial.validate(); });
  guard([&] { calib.validate(); });
  auto check_mesh = [](const MeshSize& m) {
    if (m.n_x < 4 || m.n_nu < 4 || m.n_tau < 4) throw ConfigError("mesh entries must be >= 4");
  };
  check_mesh(mesh);
  for (const auto& m : meshes) check_mesh(m);
  guard([&] { (void)build_grid(market, mesh.n_x, mesh.n_nu, mesh.n_tau, truncation); });
  if (kind == StudyKind::kMesh && meshes.empty()) throw ConfigError("mesh list is empty");
  if (kind == StudyKind::kMaturity && maturities.empty()) throw ConfigError("maturity list is empty");
  for (double t : maturities) {
    if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("maturities must be positive");
  }
  if (kind == StudyKind::kRandom && deltas.empty()) throw ConfigError("deviation list is empty");
  for (double d : deltas) {
    if (!(d >= 0.0 && d < 1.0)) throw ConfigError("deviation levels must lie in [0, 1)");
  }
  if (samples < 1) throw ConfigError("sample count must be >= 1");
  if (!(spot > 0.0) || !(nu0 >= 0.0)) throw ConfigError("spot must be > 0 and nu0 >= 0");
}

ExperimentSpec spec_from_json(std::string_view text, const ExperimentSpec& base) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(doc,
                 {"study", "market", "reference", "initial", "grid", "meshes", "maturities", "deltas", "samples",
                  "seed", "calibration", "output_dir", "workers", "record_timing", "spot", "nu0"},
                 "config");
  ExperimentSpec s = base;
  if (doc.contains("study")) {
    std::string k;
    read(doc, "study", k);
    s.kind = study_kind_from_string(k);
  }
  if (doc.contains("market")) {
    const json& m = doc.at("market");
    reject_unknown(m, {"strike", "rate", "dividend", "maturity"}, "market");
    read(m, "strike", s.market.strike);
    read(m, "rate", s.market.rate);
    read(m, "dividend", s.market.dividend);
    read(m, "maturity", s.market.maturity);
  }
  read_params(doc, "reference", s.reference);
  read_params(doc, "initial", s.initial);
  if (doc.contains("grid")) {
    const json& g = doc.at("grid");
    reject_unknown(g, {"n_x", "n_nu", "n_tau", "x_min", "x_max", "nu_max"}, "grid");
    read(g, "n_x", s.mesh.n_x);
    read(g, "n_nu", s.mesh.n_nu);
    read(g, "n_tau", s.mesh.n_tau);
    s.truncation.x_min = optional_double(g, "x_min", s.truncation.x_min);
    s.truncation.x_max = optional_double(g, "x_max", s.truncation.x_max);
    read(g, "nu_max", s.truncation.nu_max);
  }
  if (doc.contains("meshes")) {
    const json& list = doc.at("meshes");
    if (!list.is_array()) throw ConfigError("meshes must be an array");
    s.meshes.clear();
    for (const auto& e : list) s.meshes.push_back(read_mesh(e, MeshSize{}, "meshes entry"));
  }
  read(doc, "maturities", s.maturities);
  read(doc, "deltas", s.deltas);
  read(doc, "samples", s.samples);
  read(doc, "seed", s.seed);
  if (doc.contains("calibration")) {
    const json& c = doc.at("calibration");
    reject_unknown(c,
                   {"lambda", "u_ref", "gamma", "epsilon", "max_iters", "min_step", "theta", "line_search", "adjoint",
                    "gradient", "box"},
                   "calibration");
    read(c, "lambda", s.calib.lambda);
    if (c.contains("u_ref")) {
      if (c.at("u_ref").is_null()) {
        s.calib.u_ref.reset();
      } else {
        HestonParams r = s.calib.u_ref.value_or(s.reference);
        read_params(c, "u_ref", r);
        s.calib.u_ref = r;
      }
    }
    read(c, "gamma", s.calib.gamma);
    read(c, "epsilon", s.calib.epsilon);
    read(c, "max_iters", s.calib.max_iters);
    read(c, "min_step", s.calib.min_step);
    read(c, "theta", s.calib.theta);
    std::string name;
    if (c.contains("line_search")) {
      read(c, "line_search", name);
      s.calib.line_search =
          parse_enum<LineSearch>(name, {{"projected", LineSearch::kProjected}, {"plain", LineSearch::kPlain}},
                                 "line search");
    }
    if (c.contains("adjoint")) {
      read(c, "adjoint", name);
      s.calib.adjoint = parse_enum<AdjointScheme>(
          name, {{"conservative", AdjointScheme::kConservative}, {"expanded", AdjointScheme::kExpanded}},
          "adjoint scheme");
    }
    if (c.contains("gradient")) {
      read(c, "gradient", name);
      s.calib.gradient = parse_enum<GradientForm>(
          name, {{"lagrangian", GradientForm::kLagrangian}, {"printed", GradientForm::kPrinted}}, "gradient form");
    }
    if (c.contains("box")) {
      const json& b = c.at("box");
      reject_unknown(b, {"lower", "upper"}, "box");
      read(b, "lower", s.calib.box.lower);
      read(b, "upper", s.calib.box.upper);
    }
  }
  if (doc.contains("output_dir")) {
    std::string dir;
    read(doc, "output_dir", dir);
    s.output_dir = dir;
  }
  read(doc, "workers", s.workers);
  read(doc, "record_timing", s.record_timing);
  read(doc, "spot", s.spot);
  read(doc, "nu0", s.nu0);
  s.validate();
  return s;
}

ExperimentSpec load_spec(const std::filesystem::path& path, const ExperimentSpec& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return spec_from_json(buf.str(), base);
}

std::string spec_to_json(const ExperimentSpec& s) {
  json meshes = json::array();
  for (const auto& m : s.meshes) meshes.push_back(mesh_json(m));
  json grid = mesh_json(s.mesh);
  grid["x_min"] = s.truncation.x_min ? json(*s.truncation.x_min) : json(nullptr);
  grid["x_max"] = s.truncation.x_max ? json(*s.truncation.x_max) : json(nullptr);
  grid["nu_max"] = s.truncation.nu_max;
  const json calib = {
      {"lambda", s.calib.lambda},
      {"u_ref", s.calib.u_ref ? params_json(*s.calib.u_ref) : json(nullptr)},
      {"gamma", s.calib.gamma},
      {"epsilon", s.calib.epsilon},
      {"max_iters", s.calib.max_iters},
      {"min_step", s.calib.min_step},
      {"theta", s.calib.theta},
      {"line_search", line_search_name(s.calib.line_search)},
      {"adjoint", adjoint_name(s.calib.adjoint)},
      {"gradient", gradient_name(s.calib.gradient)},
      {"box", {{"lower", s.calib.box.lower}, {"upper", s.calib.box.upper}}},
  };
  const json doc = {
      {"study", to_string(s.kind)},
      {"market",
       {{"strike", s.market.strike},
        {"rate", s.market.rate},
        {"dividend", s.market.dividend},
        {"maturity", s.market.maturity}}},
      {"reference", params_json(s.reference)},
      {"initial", params_json(s.initial)},
      {"grid", grid},
      {"meshes", meshes},
      {"maturities", s.maturities},
      {"deltas", s.deltas},
      {"samples", s.samples},
      {"seed", s.seed},
      {"calibration", calib},
      {"output_dir", s.output_dir.string()},
      {"workers", s.workers},
      {"record_timing", s.record_timing},
      {"spot", s.spot},
      {"nu0", s.nu0},
  };
  return doc.dump(2) + "\n";
}

Trajectory generate_data(const HestonParams& reference, const MarketSpec& market, const Grid& grid, double theta) {
  return solve_forward(reference, market, grid, theta);
}

ParamVector RunRecord::parameter_change() const {
  const ParamVector a = u0.to_vector();
  const ParamVector b = u_opt.to_vector();
  ParamVector out{};
  for (std::size_t c = 0; c < 4; ++c) out[c] = a[c] != 0.0 ? (a[c] - b[c]) / a[c] : std::nan("");
  return out;
}

bool StudyReport::any_failed() const {
  return std::any_of(runs.begin(), runs.end(), [](const RunRecord& r) { return r.failed(); });
}

std::vector<InitialDraw> draw_initial_guesses(const ExperimentSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  const ParamVector ref = spec.reference.to_vector();
  std::vector<InitialDraw> out;
  out.reserve(spec.deltas.size() * spec.samples);
  for (double delta : spec.deltas) {
    for (std::size_t s = 0; s < spec.samples; ++s) {
      ParamVector u{};
      for (std::size_t c = 0; c < 4; ++c) {
        const double lo = ref[c] * (1.0 - delta);
        const double hi = ref[c] * (1.0 + delta);
        u[c] = lo + (hi - lo) * unit_uniform(rng);
      }
      const ParamVector p = project(u, spec.calib);
      out.push_back({delta, HestonParams::from_vector(p), p != u});
    }
  }
  return out;
}

StudyReport run_single(const ExperimentSpec& spec) {
  spec.validate();
  StudyReport rep{StudyKind::kSingle, spec, {}, 0};
  rep.runs.push_back(fresh_run("single", 0, spec, spec.market, spec.mesh, spec.initial));
  return rep;
}

StudyReport run_mesh_study(const ExperimentSpec& spec) {
  spec.validate();
  StudyReport rep{StudyKind::kMesh, spec, std::vector<RunRecord>(spec.meshes.size()), 0};
  parallel_for(spec.meshes.size(), spec.workers, [&](std::size_t i) {
    rep.runs[i] = fresh_run("mesh", i, spec, spec.market, spec.meshes[i], spec.initial);
  });
  return rep;
}

StudyReport run_maturity_study(const ExperimentSpec& spec) {
  spec.validate();
  StudyReport rep{StudyKind::kMaturity, spec, std::vector<RunRecord>(spec.maturities.size()), 0};
  const double dtau = spec.market.maturity / static_cast<double>(spec.mesh.n_tau);
  parallel_for(spec.maturities.size(), spec.workers, [&](std::size_t i) {
    MarketSpec market = spec.market;
    market.maturity = spec.maturities[i];
    MeshSize mesh = spec.mesh;
    mesh.n_tau = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(market.maturity / dtau)));
    rep.runs[i] = fresh_run("maturity", i, spec, market, mesh, spec.initial);
  });
  return rep;
}

StudyReport run_random_init_study(const ExperimentSpec& spec) {
  spec.validate();
  const std::vector<InitialDraw> draws = draw_initial_guesses(spec);
  StudyReport rep{StudyKind::kRandom, spec, std::vector<RunRecord>(draws.size()), 0};
  rep.reprojected_draws = static_cast<std::size_t>(
      std::count_if(draws.begin(), draws.end(), [](const InitialDraw& d) { return d.reprojected; }));

  // Every run shares one grid, so the data is generated once.
  const Grid grid = build_grid(spec.market, spec.mesh.n_x, spec.mesh.n_nu, spec.mesh.n_tau, spec.truncation);
  const Trajectory data = generate_data(spec.reference, spec.market, grid, spec.calib.theta);
  const std::pair<const Grid&, const Trajectory&> shared(grid, data);
  parallel_for(draws.size(), spec.workers, [&](std::size_t i) {
    RunRecord rec = start_record("random", i, spec, spec.market, spec.mesh, draws[i].u0, draws[i].delta);
    rec = calibration_run(std::move(rec), spec, spec.market, draws[i].u0, [&] { return shared; });
    rec.start_projected = draws[i].reprojected;
    rep.runs[i] = std::move(rec);
  });
  return rep;
}

StudyReport run_study(const ExperimentSpec& spec) {
  switch (spec.kind) {
    case StudyKind::kMesh:
      return run_mesh_study(spec);
    case StudyKind::kMaturity:
      return run_maturity_study(spec);
    case StudyKind::kRandom:
      return run_random_init_study(spec);
    case StudyKind::kSingle:
      break;
  }
  return run_single(spec);
}

std::string report_csv(const StudyReport& report) {
  std::string out(kReportHeader);
  out += '\n';
  for (const auto& r : report.runs) {
    out += join({r.study, std::to_string(r.run_id), std::to_string(r.seed), fmt(r.delta), std::to_string(r.mesh.n_x),
                 std::to_string(r.mesh.n_nu), std::to_string(r.mesh.n_tau), fmt(r.maturity), fmt(r.u0.sigma),
                 fmt(r.u0.rho), fmt(r.u0.kappa), fmt(r.u0.mu), fmt(r.u_opt.sigma), fmt(r.u_opt.rho),
                 fmt(r.u_opt.kappa), fmt(r.u_opt.mu), fmt(r.j0), fmt(r.j_opt), fmt(r.improvement),
                 std::to_string(r.iterations), r.status, fmt(r.wall_ms)});
    out += '\n';
  }
  return out;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

// One plot table keyed by `key` (a column name and per-run values).
struct FigureKey {
  std::string header;
  std::function<std::string(const RunRecord&)> cells;
};

std::string figure_improvement(const StudyReport& rep, const FigureKey& key) {
  std::string out = "run_id," + key.header + ",J0,Jopt,improvement\n";
  for (const auto& r : rep.runs) {
    out += join({std::to_string(r.run_id), key.cells(r), fmt(r.j0), fmt(r.j_opt), fmt(r.improvement)}) + "\n";
  }
  return out;
}

std::string figure_parameters(const StudyReport& rep, const FigureKey& key) {
  std::string out = "run_id," + key.header +
                    ",change_sigma,change_rho,change_kappa,change_mu,sigma_opt,rho_opt,kappa_opt,mu_opt,"
                    "dev_sigma,dev_rho,dev_kappa,dev_mu\n";
  const ParamVector ref = rep.spec.reference.to_vector();
  for (const auto& r : rep.runs) {
    const ParamVector ch = r.parameter_change();
    const ParamVector opt = r.u_opt.to_vector();
    std::string line = std::to_string(r.run_id) + "," + key.cells(r);
    for (double v : ch) line += "," + fmt(v);
    for (double v : opt) line += "," + fmt(v);
    for (std::size_t c = 0; c < 4; ++c) line += "," + fmt((opt[c] - ref[c]) / ref[c]);
    out += line + "\n";
  }
  return out;
}

std::string figure_iterations(const StudyReport& rep, const FigureKey& key) {
  std::string out = "run_id," + key.header + ",iters,status\n";
  for (const auto& r : rep.runs) out += join({std::to_string(r.run_id), key.cells(r), std::to_string(r.iterations), r.status}) + "\n";
  return out;
}

std::string trace_csv(const StudyReport& rep) {
  std::string out = "run_id,iteration,J,J_next,step,grad_sigma,grad_rho,grad_kappa,grad_mu,sigma,rho,kappa,mu\n";
  for (const auto& r : rep.runs) {
    for (const auto& s : r.steps) {
      out += join({std::to_string(r.run_id), std::to_string(s.iteration), fmt(s.cost), fmt(s.cost_next), fmt(s.step),
                   fmt(s.grad[0]), fmt(s.grad[1]), fmt(s.grad[2]), fmt(s.grad[3]), fmt(s.u_next[0]),
                   fmt(s.u_next[1]), fmt(s.u_next[2]), fmt(s.u_next[3])}) +
             "\n";
    }
  }
  return out;
}

std::string summary_json(const StudyReport& rep) {
  std::map<std::string, std::size_t> status;
  for (const auto& r : rep.runs) ++status[r.status];
  json levels = json::array();
  if (rep.kind == StudyKind::kRandom) {
    for (double d : rep.spec.deltas) {
      std::vector<std::size_t> it;
      for (const auto& r : rep.runs) {
        if (r.delta == d) it.push_back(r.iterations);
      }
      std::sort(it.begin(), it.end());
      double median = 0.0;
      if (!it.empty()) {
        const std::size_t m = it.size() / 2;
        median = it.size() % 2 ? static_cast<double>(it[m]) : 0.5 * static_cast<double>(it[m - 1] + it[m]);
      }
      const auto within10 = std::count_if(it.begin(), it.end(), [](std::size_t n) { return n <= 10; });
      levels.push_back({{"delta", d}, {"runs", it.size()}, {"median_iters", median}, {"runs_within_10_iters", within10}});
    }
  }
  const json doc = {{"study", to_string(rep.kind)},
                    {"runs", rep.runs.size()},
                    {"status_counts", status},
                    {"reprojected_draws", rep.reprojected_draws},
                    {"deltas", levels}};
  return doc.dump(2) + "\n";
}

}  // namespace

std::vector<std::filesystem::path> emit_report(const StudyReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::string stem = to_string(report.kind);
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& name, const std::string& text) {
    const auto path = dir / name;
    write_file(path, text);
    written.push_back(path);
  };
  emit(stem + "_runs.csv", report_csv(report));
  emit(stem + "_config.json", spec_to_json(report.spec));
  emit(stem + "_summary.json", summary_json(report));
  emit(stem + "_trace.csv", trace_csv(report));

  switch (report.kind) {
    case StudyKind::kMesh: {
      const FigureKey key{"N_x,N_nu,N_tau", [](const RunRecord& r) {
                            return join({std::to_string(r.mesh.n_x), std::to_string(r.mesh.n_nu),
                                         std::to_string(r.mesh.n_tau)});
                          }};
      emit("fig_mesh_improvement.csv", figure_improvement(report, key));
      emit("fig_mesh_parameters.csv", figure_parameters(report, key));
      emit("fig_mesh_iterations.csv", figure_iterations(report, key));
      break;
    }
    case StudyKind::kMaturity: {
      const FigureKey key{"T,N_tau", [](const RunRecord& r) { return fmt(r.maturity) + "," + std::to_string(r.mesh.n_tau); }};
      emit("fig_maturity_improvement.csv", figure_improvement(report, key));
      emit("fig_maturity_parameters.csv", figure_parameters(report, key));
      emit("fig_maturity_iterations.csv", figure_iterations(report, key));
      break;
    }
    case StudyKind::kRandom: {
      const FigureKey key{"delta", [](const RunRecord& r) { return fmt(r.delta); }};
      emit("fig_random_improvement.csv", figure_improvement(report, key));
      emit("fig_random_iterations.csv", figure_iterations(report, key));
      emit("fig_random_parameters.csv", figure_parameters(report, key));
      break;
    }
    case StudyKind::kSingle:
      break;
  }
  return written;
}

}  // namespace hestoncal
