// stokes_lab: command-line driver for the transition-layer experiments.
//
// Every subcommand writes report.json (plus CSV/SVG artifacts) into --out.
// Exit status: 0 when all checks pass, 2 on a numerical failure, 1 on a
// usage or configuration error.
#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "stokes/cylinder.hpp"
#include "stokes/entropy.hpp"
#include "stokes/io.hpp"
#include "stokes/metric.hpp"
#include "stokes/potential.hpp"
#include "stokes/profile.hpp"

using namespace stokes;
namespace fs = std::filesystem;

namespace {

constexpr int kPass = 0;
constexpr int kUsage = 1;
constexpr int kFail = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Options shared by the subcommands; not every command reads every field.
struct Params {
  std::string potential = "gl";
  std::vector<double> from, to;
  double a = 0;
  int d = 2;
  double L = 10;
  int n1 = 256;
  int np = 64;
  std::uint64_t seed = 1;
  std::string init = "perturbed";
  double amplitude = 0.2;
  std::string init_field;
  int max_iter = 5000;
  double grad_tol = 1e-6;
  std::string entropy = "wave-gl";
  int samples_grid = 21;
  int samples_random = 1000;
  double box = 2.0;
  int fields = 10;
  double f_coeff = 0.5;
  double b = 1.0;
  std::vector<double> v0{0.0, 0.0};
  double t0 = 0, t1 = 8, dt = 1e-3;
  std::string input;
  std::vector<int> subset;
  int trials = 200;
  int resolution = 81;
  bool geodesic_search = true;
  std::string space = "slice";
  int nodes = 64;
  int restarts = 5;
  double a_min = -0.9, a_max = 0.9;
  int count = 19;
  std::map<std::string, double> tolerances;
  std::string out = "out";
};

double tol_or(const Params& p, const std::string& key, double dflt) {
  auto it = p.tolerances.find(key);
  return it == p.tolerances.end() ? dflt : it->second;
}

json checked(double value, double tol, bool pass) {
  return {{"value", value}, {"tol", tol}, {"pass", pass}};
}

Vec to_vec(const std::vector<double>& v) {
  Vec r(static_cast<Eigen::Index>(v.size()));
  for (size_t k = 0; k < v.size(); ++k) r[static_cast<Eigen::Index>(k)] = v[k];
  return r;
}

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

Potential load_potential(const std::string& desc) {
  if (desc.size() > 5 && desc.substr(desc.size() - 5) == ".json")
    return potential_from_json(read_json(desc));
  if (!desc.empty() && desc.front() == '{') {
    try {
      return potential_from_json(json::parse(desc));
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("potential JSON: ") + e.what());
    }
  }
  return potential_from_json(json(desc));
}

// Wells from --from/--to, or (a, -1) -> (a, 1) style defaults on the slice.
std::pair<Vec, Vec> endpoints(const Params& prm, const Potential& p) {
  if (!prm.from.empty() || !prm.to.empty()) {
    if (prm.from.size() != static_cast<size_t>(p.dim()) ||
        prm.to.size() != static_cast<size_t>(p.dim()))
      throw UsageError("--from/--to need " + std::to_string(p.dim()) + " components");
    return {to_vec(prm.from), to_vec(prm.to)};
  }
  Vec um = Vec::Zero(p.dim()), up = Vec::Zero(p.dim());
  um[0] = up[0] = prm.a;
  if (p.dim() == 2) {
    const WellSearch ws = find_wells_on_slice(p, prm.a, SliceBox::cube(2, 3.0), 600);
    if (ws.wells.size() < 2)
      throw UsageError("fewer than two wells on the slice; pass --from/--to");
    um = ws.wells.front().point;
    up = ws.wells.back().point;
    return {um, up};
  }
  um[1] = -1;
  up[1] = 1;
  return {um, up};
}

void write_report(const Params& prm, const std::string& command, json body, bool pass) {
  json rep;
  rep["command"] = command;
  rep["seed"] = prm.seed;
  for (auto& [k, v] : body.items()) rep[k] = v;
  rep["pass"] = pass;
  write_json((fs::path(prm.out) / "report.json").string(), rep);
  std::cout << rep.dump(2) << "\n";
}

std::string out_path(const Params& prm, const std::string& name) {
  return (fs::path(prm.out) / name).string();
}

void write_profile_csv(const Params& prm, const std::string& name, const Profile1D& prof) {
  const int d = prof.values.empty() ? 0 : static_cast<int>(prof.values.front().size());
  std::vector<std::string> header{"t"};
  for (int c = 0; c < d; ++c) header.push_back("z" + std::to_string(c + 1));
  std::vector<std::vector<double>> rows;
  for (size_t k = 0; k < prof.t.size(); ++k) {
    std::vector<double> r{prof.t[k]};
    for (int c = 0; c < d; ++c) r.push_back(prof.values[k][c]);
    rows.push_back(std::move(r));
  }
  write_csv(out_path(prm, name + ".csv"), header, rows);
  std::vector<Series> series;
  for (int c = 1; c < d; ++c) {
    Series s{"z" + std::to_string(c + 1), prof.t, {}};
    for (const auto& v : prof.values) s.y.push_back(v[c]);
    series.push_back(std::move(s));
  }
  write_svg_polyline(out_path(prm, name + ".svg"), series, "transition profile", "t", "z");
}

int cmd_profile(const Params& prm) {
  const Potential p = load_potential(prm.potential);
  const auto [um, up] = endpoints(prm, p);
  // the d > 2 profile is a discretized geodesic, so only agreement to the
  // polyline resolution is expected
  const double tol = tol_or(prm, "energy", p.dim() == 2 ? 1e-6 : 1e-3);
  Profile1D prof;
  double geod;
  if (p.dim() == 2) {
    prof = solve_profile_ode(p, um[0], um[1], up[1]);
    geod = geodesic_cost_2d(p, um[0], um[1], up[1]);
  } else {
    prof = transition_profile(p, um, up);
    GeodesicOptions go;
    go.seed = prm.seed;
    geod = geodesic_cost(p, PathSpace::slice, um, up, go).cost;
  }
  const double e = energy_1d(p, prof);
  const double eq = equipartition_residual(p, prof);
  const double eq_tol = tol_or(prm, "equipartition", 1e-4);
  const bool ok_e = std::abs(e - geod) <= tol * std::max(1.0, geod);
  const bool ok_eq = eq <= eq_tol;
  write_profile_csv(prm, "profile", prof);
  json body;
  body["potential"] = p.tag();
  body["u_minus"] = to_std(um);
  body["u_plus"] = to_std(up);
  body["geodesic_cost"] = geod;
  body["energy"] = checked(e, tol, ok_e);
  body["equipartition_residual"] = checked(eq, eq_tol, ok_eq);
  if (!prof.warning.empty()) body["warning"] = prof.warning;
  write_report(prm, "profile", body, ok_e && ok_eq);
  return ok_e && ok_eq ? kPass : kFail;
}

int cmd_geodesic(const Params& prm) {
  const Potential p = load_potential(prm.potential);
  const auto [um, up] = endpoints(prm, p);
  GeodesicOptions go;
  go.seed = prm.seed;
  go.n_nodes = prm.nodes;
  go.n_restarts = prm.restarts;
  const PathSpace space = prm.space == "ambient" ? PathSpace::ambient : PathSpace::slice;
  const GeodesicResult r = geodesic_cost(p, space, um, up, go);
  std::vector<std::string> header;
  for (int c = 0; c < p.dim(); ++c) header.push_back("z" + std::to_string(c + 1));
  std::vector<std::vector<double>> rows;
  for (const auto& z : r.path.points) rows.push_back(to_std(z));
  write_csv(out_path(prm, "path.csv"), header, rows);
  if (p.dim() >= 2) {
    Series s{"path", {}, {}};
    const int cx = p.dim() == 2 ? 0 : 1, cy = p.dim() == 2 ? 1 : 2;
    for (const auto& z : r.path.points) {
      s.x.push_back(z[cx]);
      s.y.push_back(z[cy]);
    }
    write_svg_polyline(out_path(prm, "path.svg"), {s}, "geodesic path");
  }
  json body;
  body["potential"] = p.tag();
  body["space"] = prm.space;
  body["u_minus"] = to_std(um);
  body["u_plus"] = to_std(up);
  body["cost"] = checked(r.cost, go.refine_tol, r.converged);
  body["n_nodes"] = r.n_nodes;
  write_report(prm, "geodesic", body, r.converged);
  return r.converged ? kPass : kFail;
}

InitKind parse_init(const std::string& s) {
  if (s == "profile") return InitKind::profile_embed;
  if (s == "perturbed") return InitKind::perturbed;
  if (s == "random") return InitKind::random;
  if (s == "field") return InitKind::field;
  throw UsageError("unknown --init '" + s + "'");
}

void write_heatmap_component(const Params& prm, const Field& f, int comp, const std::string& name) {
  const auto& g = f.grid;
  std::vector<std::vector<double>> img;
  // rows: torus index (first periodic direction), columns: x1
  const long np = g.d == 2 ? g.n_perp() : g.np;
  for (long j = 0; j < np; ++j) {
    std::vector<double> row;
    for (int i = 0; i < g.n1; ++i) row.push_back(f.at(i, j, comp));
    img.push_back(std::move(row));
  }
  write_svg_heatmap(out_path(prm, name), img, "u" + std::to_string(comp + 1));
}

int cmd_minimize(const Params& prm) {
  const Potential p = load_potential(prm.potential);
  if (p.dim() != prm.d && prm.d != 2) throw UsageError("--d does not match the potential");
  const auto [um, up] = endpoints(prm, p);
  const CylinderGrid g(p.dim(), prm.L, prm.n1, prm.np);
  InitSpec init;
  init.kind = parse_init(prm.init);
  init.seed = prm.seed;
  init.amplitude = prm.amplitude;
  if (init.kind == InitKind::field) {
    if (prm.init_field.empty()) throw UsageError("--init field needs --init-field");
    init.field = read_field(prm.init_field);
  }
  MinimizeOptions mo;
  mo.tol = prm.grad_tol;
  mo.max_iter = prm.max_iter;
  mo.trace_every = 10;
  const auto [f, rep] = minimize(p, g, um, up, init, mo);

  std::vector<std::vector<double>> rows;
  Series es{"energy", {}, {}};
  for (const auto& t : rep.trace) {
    rows.push_back({double(t.iter), t.energy, t.grad_norm, t.slice_variance});
    es.x.push_back(t.iter);
    es.y.push_back(t.energy);
  }
  write_csv(out_path(prm, "trace.csv"), {"iter", "energy", "grad_norm", "slice_variance"}, rows);
  write_svg_polyline(out_path(prm, "trace.svg"), {es}, "energy trace", "iteration", "energy");
  write_field(out_path(prm, "field"), f);
  write_heatmap_component(prm, f, 1, "u2.svg");

  const double sv_tol = tol_or(prm, "slice_variance", 1e-3);
  const double div_tol = tol_or(prm, "divergence", 1e-8);
  const double bc_tol = tol_or(prm, "boundary", 1e-8);
  const bool ok_sv = rep.slice_variance <= sv_tol;
  const bool ok_div = rep.divergence_max <= div_tol;
  const bool ok_bc = rep.boundary_avg_error <= bc_tol;
  json body;
  body["potential"] = p.tag();
  body["grid"] = {{"d", g.d}, {"L", g.L}, {"n1", g.n1}, {"np", g.np}};
  body["init"] = prm.init;
  body["energy"] = rep.energy;
  body["iterations"] = rep.iterations;
  body["grad_norm"] = checked(rep.grad_norm, mo.tol, rep.converged);
  body["stop_reason"] = rep.stop_reason;
  body["slice_variance"] = checked(rep.slice_variance, sv_tol, ok_sv);
  body["divergence_max"] = checked(rep.divergence_max, div_tol, ok_div);
  body["boundary_avg_error"] = checked(rep.boundary_avg_error, bc_tol, ok_bc);
  const bool pass = ok_sv && ok_div && ok_bc;
  write_report(prm, "minimize", body, pass);
  return pass ? kPass : kFail;
}

struct EntropyCase {
  Entropy e;
  Potential p;
  Vec um, up;
};

EntropyCase entropy_case(const std::string& name) {
  auto v = [](std::initializer_list<double> x) { return to_vec(std::vector<double>(x)); };
  if (name == "wave-gl") {
    const auto w = polynomial_field({{1, 0, 0}, {-1, 2, 0}, {-1, 0, 2}}, "1-|z|^2");
    return {entropy_from_wave(w), builtin_ginzburg_landau(), v({0, -1}), v({0, 1})};
  }
  if (name == "harmonic") {
    const auto w = polynomial_field({{0.5, 2, 0}, {-0.5, 0, 2}}, "(z1^2-z2^2)/2");
    return {entropy_from_harmonic(w), builtin_w_squared(w, WaveKind::harmonic), v({1, -1}),
            v({1, 1})};
  }
  if (name == "tricomi") {
    const auto w = polynomial_field({{1, 0, 0}, {-0.5, 2, 0}, {-1, 0, 2}});
    const auto half = [](double) { return 0.5; };
    return {entropy_tricomi(w, half), builtin_w_squared(w, WaveKind::tricomi, half), v({0, -1}),
            v({0, 1})};
  }
  if (name.size() == 4 && name.rfind("phi", 0) == 0 && name[3] >= '2' && name[3] <= '4') {
    const int d = name[3] - '0';
    Vec um = Vec::Zero(d), up = Vec::Zero(d);
    um[1] = -1;
    up[1] = 1;
    return {entropy_phi_d(d), builtin_Wd(d), um, up};
  }
  throw UsageError("unknown --entropy '" + name + "' (wave-gl, harmonic, tricomi, phi2..phi4)");
}

int cmd_entropy_check(const Params& prm) {
  const EntropyCase c = entropy_case(prm.entropy);
  const int d = c.p.dim();
  SampleBox box = SampleBox::cube(d, prm.box);
  const auto samples = sample_box(box, d <= 2 ? prm.samples_grid : 7, prm.samples_random, prm.seed);
  const double tol = tol_or(prm, "punctual", 1e-10);
  const EntropyReport r = check_punctual(c.e, c.p, samples, c.e.kind, tol);
  const double sat_tol = tol_or(prm, "saturation", 1e-4);
  const SaturationReport s = check_saturation_detail(c.e, c.p, c.um[0], c.um, c.up, sat_tol);
  json body;
  body["entropy"] = prm.entropy;
  body["kind"] = to_string(r.kind);
  body["c"] = r.c;
  body["n_samples"] = r.n_samples;
  body["box_half_width"] = prm.box;
  body["max_violation"] = checked(r.max_violation, tol, r.criterion_ok);
  body["symmetry_residual"] = r.symmetry_residual;
  body["bv_constant"] = r.bv_constant;
  body["saturation"] = {{"u_minus", to_std(c.um)},
                        {"u_plus", to_std(c.up)},
                        {"phi_jump", s.phi_jump},
                        {"geod", s.geod},
                        {"gap", checked(s.gap, s.tol, s.saturated)}};
  // saturation is informational: it is expected to fail for some wells
  write_report(prm, "entropy-check", body, r.criterion_ok);
  return r.criterion_ok ? kPass : kFail;
}

int cmd_tricomi_check(const Params& prm) {
  const double fc = prm.f_coeff;
  if (std::abs(fc) > 1) throw UsageError("--f must lie in [-1, 1]");
  // w = 1 - f z1^2 - z2^2 satisfies w_11 = f w_22 for constant f
  const auto w = polynomial_field({{1, 0, 0}, {-fc, 2, 0}, {-1, 0, 2}});
  const auto f = [fc](double) { return fc; };
  const Potential p = builtin_w_squared(w, WaveKind::tricomi, f);
  const CylinderGrid g(2, prm.L, prm.n1, prm.np);
  const double h = std::max(g.h1(), g.hp());
  const double tol = tol_or(prm, "residual_h2", 10.0) * h * h;
  Vec um(2), up(2);
  um << 0, -1;
  up << 0, 1;
  const Profile1D prof = transition_profile(p, um, up);
  std::vector<std::vector<double>> rows;
  double worst = 0;
  for (int k = 0; k < prm.fields; ++k) {
    const Field fld = random_div_free_field(prof, g, um, up, prm.seed + k, prm.amplitude);
    const TricomiCheck t = tricomi_identity_check(w, f, fld);
    rows.push_back({double(k), t.lhs, t.energy, t.rhs, t.residual});
    worst = std::max(worst, std::abs(t.residual));
  }
  write_csv(out_path(prm, "tricomi.csv"), {"field", "lhs", "energy", "rhs", "residual"}, rows);
  const bool pass = worst <= tol;
  json body;
  body["f"] = fc;
  body["grid"] = {{"d", 2}, {"L", g.L}, {"n1", g.n1}, {"np", g.np}};
  body["fields"] = prm.fields;
  body["h"] = h;
  body["max_residual"] = checked(worst, tol, pass);
  write_report(prm, "tricomi-check", body, pass);
  return pass ? kPass : kFail;
}

int cmd_ode3d(const Params& prm) {
  if (prm.v0.size() != 2) throw UsageError("--v0 needs two components");
  const auto tr = ode3d_solve(prm.b, Eigen::Vector2d(prm.v0[0], prm.v0[1]), prm.t0, prm.t1, prm.dt);
  std::vector<std::vector<double>> rows;
  Series s2{"v2", {}, {}}, s3{"v3", {}, {}};
  for (size_t k = 0; k < tr.t.size(); ++k) {
    rows.push_back({tr.t[k], tr.v[k][0], tr.v[k][1]});
    s2.x.push_back(tr.t[k]);
    s2.y.push_back(tr.v[k][0]);
    s3.x.push_back(tr.t[k]);
    s3.y.push_back(tr.v[k][1]);
  }
  write_csv(out_path(prm, "trajectory.csv"), {"t", "v2", "v3"}, rows);
  write_svg_polyline(out_path(prm, "trajectory.svg"), {s2, s3}, "ode3d trajectory", "t", "v");
  json body;
  body["b"] = prm.b;
  body["v0"] = prm.v0;
  body["t0"] = prm.t0;
  body["t1"] = prm.t1;
  body["dt"] = prm.dt;
  body["steps"] = tr.t.size();
  body["blew_up"] = tr.blew_up;
  body["omega_limit"] = tr.omega_limit;
  if (!tr.v.empty()) body["v_final"] = {tr.v.back()[0], tr.v.back()[1]};
  write_report(prm, "ode3d", body, !tr.blew_up);
  return tr.blew_up ? kFail : kPass;
}

FiniteMetric load_metric(const Params& prm) {
  if (prm.input.empty()) throw UsageError("--input metric.json is required");
  return metric_from_json(read_json(prm.input));
}

int cmd_decompose(const Params& prm) {
  const FiniteMetric m = load_metric(prm);
  const int n = static_cast<int>(m.delta.rows());
  const CutDecomposition dec = decompose_cuts(m.delta);
  json body;
  body["n"] = n;
  body["decomposition"] = to_json(dec, n);
  write_report(prm, "decompose", body, dec.feasible);
  return dec.feasible ? kPass : kFail;
}

int cmd_calibrate(const Params& prm) {
  const FiniteMetric m = load_metric(prm);
  const int n = static_cast<int>(m.points.size());
  Subset Y = 0;
  for (int i : prm.subset) {
    if (i < 0 || i >= n) throw UsageError("subset index out of range");
    Y |= Subset(1) << i;
  }
  const CalibrationFn phi(m.points, Y);
  const double tol = tol_or(prm, "value", 1e-10);
  double worst = 0;
  json values = json::array();
  for (int i = 0; i < n; ++i) {
    const double v = phi.value(m.points[i]);
    const double expect = phi.in_Y(i) ? 0.0 : 1.0;
    worst = std::max(worst, std::abs(v - expect));
    values.push_back(v);
  }
  if (m.points.front().size() == 2) {
    Vec lo = m.points.front(), hi = lo;
    for (const auto& x : m.points) {
      lo = lo.cwiseMin(x);
      hi = hi.cwiseMax(x);
    }
    lo.array() -= 0.5;
    hi.array() += 0.5;
    const int r = prm.resolution;
    std::vector<std::vector<double>> rows, img;
    for (int iy = r - 1; iy >= 0; --iy) {
      std::vector<double> line;
      for (int ix = 0; ix < r; ++ix) {
        Vec z(2);
        z << lo[0] + (hi[0] - lo[0]) * ix / (r - 1), lo[1] + (hi[1] - lo[1]) * iy / (r - 1);
        const double v = phi.value(z);
        rows.push_back({z[0], z[1], v});
        line.push_back(v);
      }
      img.push_back(std::move(line));
    }
    write_csv(out_path(prm, "phi_grid.csv"), {"x", "y", "phi"}, rows);
    write_svg_heatmap(out_path(prm, "phi.svg"), img, "calibration phi");
  }
  const bool pass = worst <= tol;
  json body;
  body["subset"] = prm.subset;
  body["lambda0"] = phi.lambda0();
  body["values_at_points"] = values;
  body["value_error"] = checked(worst, tol, pass);
  body["gradient_bound"] = phi.gradient_bound(20000, prm.seed);
  write_report(prm, "calibrate", body, pass);
  return pass ? kPass : kFail;
}

int cmd_metric_build(const Params& prm) {
  const FiniteMetric m = load_metric(prm);
  const WeightFunction w(m);
  const OptimalityReport rep = verify_segment_optimality(w, m, prm.trials, prm.seed, prm.geodesic_search);
  const int dim = static_cast<int>(m.points.front().size());
  Vec lo = m.points.front(), hi = lo;
  for (const auto& x : m.points) {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  const Vec mid = 0.5 * (lo + hi);
  lo.array() -= 0.5;
  hi.array() += 0.5;
  // planar grid over the first two coordinates, others fixed at the centre
  const int r = prm.resolution;
  std::vector<std::vector<double>> rows, img;
  for (int iy = r - 1; iy >= 0; --iy) {
    std::vector<double> line;
    for (int ix = 0; ix < r; ++ix) {
      Vec z = mid;
      z[0] = lo[0] + (hi[0] - lo[0]) * ix / (r - 1);
      z[1] = lo[1] + (hi[1] - lo[1]) * iy / (r - 1);
      const double v = w.value(z);
      rows.push_back({z[0], z[1], v});
      line.push_back(v);
    }
    img.push_back(std::move(line));
  }
  write_csv(out_path(prm, "weight_grid.csv"), {"x", "y", "w"}, rows);
  write_svg_heatmap(out_path(prm, "weight.svg"), img, "weight w");

  const double seg_tol = 1e-6;
  json pairs = json::array();
  for (const auto& pa : rep.pairs) {
    pairs.push_back({{"i", pa.i},
                     {"j", pa.j},
                     {"delta", pa.delta},
                     {"segment", checked(pa.segment, seg_tol, std::abs(pa.segment - pa.delta) <= seg_tol)},
                     {"best_perturbed", pa.best_perturbed},
                     {"geodesic_search", pa.geodesic_search},
                     {"defeats", pa.defeats}});
  }
  json audit;
  audit["n"] = m.points.size();
  audit["dim"] = dim;
  audit["lambda0"] = w.lambda0();
  audit["rho"] = w.rho();
  audit["decomposition"] = to_json(w.decomposition(), static_cast<int>(m.points.size()));
  audit["trials"] = rep.trials;
  audit["geodesic_search"] = prm.geodesic_search;
  audit["pairs"] = pairs;
  audit["pass"] = rep.pass;
  write_json(out_path(prm, "audit.json"), audit);
  write_report(prm, "metric-build", audit, rep.pass);
  return rep.pass ? kPass : kFail;
}

int cmd_sweep(const Params& prm) {
  const Potential p = load_potential(prm.potential);
  if (p.dim() != 2) throw UsageError("sweep works on planar potentials");
  const bool is_gl = p.tag() == builtin_ginzburg_landau().tag();
  const double tol = tol_or(prm, "reference", 1e-8);
  std::vector<std::vector<double>> rows;
  Series s{"cost", {}, {}};
  json points = json::array();
  bool pass = true;
  for (int k = 0; k < prm.count; ++k) {
    const double a = prm.count == 1 ? prm.a_min : prm.a_min + (prm.a_max - prm.a_min) * k / (prm.count - 1);
    const WellSearch ws = find_wells_on_slice(p, a, SliceBox::cube(2, 3.0), 600);
    if (ws.wells.size() < 2) {
      points.push_back({{"a", a}, {"wells", ws.wells.size()}});
      continue;
    }
    const double ym = ws.wells.front().point[1], yp = ws.wells.back().point[1];
    const double cost = geodesic_cost_2d(p, a, ym, yp);
    json row{{"a", a}, {"y_minus", ym}, {"y_plus", yp}};
    if (is_gl) {
      // wells at +-sqrt(1-a^2), cost scales with the cube of the half gap
      const double ref = 4.0 / 3.0 * std::pow(1 - a * a, 1.5);
      const bool ok = std::abs(cost - ref) <= tol;
      pass = pass && ok;
      row["cost"] = checked(cost, tol, ok);
      row["reference"] = ref;
    } else {
      row["cost"] = cost;
    }
    points.push_back(row);
    rows.push_back({a, ym, yp, cost});
    s.x.push_back(a);
    s.y.push_back(cost);
  }
  write_csv(out_path(prm, "sweep.csv"), {"a", "y_minus", "y_plus", "cost"}, rows);
  write_svg_polyline(out_path(prm, "sweep.svg"), {s}, "slice cost", "a", "geod");
  json body;
  body["potential"] = p.tag();
  body["points"] = points;
  write_report(prm, "sweep", body, pass);
  return pass ? kPass : kFail;
}

const std::map<std::string, std::function<int(const Params&)>>& commands() {
  static const std::map<std::string, std::function<int(const Params&)>> table{
      {"profile", cmd_profile},           {"geodesic", cmd_geodesic},
      {"minimize", cmd_minimize},         {"entropy-check", cmd_entropy_check},
      {"tricomi-check", cmd_tricomi_check}, {"ode3d", cmd_ode3d},
      {"metric-build", cmd_metric_build}, {"calibrate", cmd_calibrate},
      {"decompose", cmd_decompose},       {"sweep", cmd_sweep}};
  return table;
}

// A config file fills the shared fields; the remaining options keep their defaults.
Params params_from_config(const ExperimentConfig& c) {
  Params p;
  p.potential = c.potential.is_string() ? c.potential.get<std::string>() : c.potential.dump();
  if (c.wells.size() == 2) {
    p.from = c.wells[0];
    p.to = c.wells[1];
  } else if (!c.wells.empty()) {
    throw ConfigError("wells must list exactly two points");
  }
  p.d = c.grid.d;
  p.L = c.grid.L;
  p.n1 = c.grid.n1;
  p.np = c.grid.np;
  p.seed = c.seed;
  p.tolerances = c.tolerances;
  p.out = c.output_dir;
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stokes_lab: transition layers, entropies and metric weights"};
  app.require_subcommand(1);
  Params prm;
  std::vector<std::string> tol_pairs;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", prm.out, "output directory");
    sub->add_option("--seed", prm.seed, "random seed");
    sub->add_option("--tol", tol_pairs, "tolerance override name=value")->take_all();
  };
  auto add_potential = [&](CLI::App* sub) {
    sub->add_option("--potential", prm.potential, "builtin tag or potential JSON file");
    sub->add_option("--a", prm.a, "slice coordinate");
    sub->add_option("--from", prm.from, "start well")->delimiter(',');
    sub->add_option("--to", prm.to, "end well")->delimiter(',');
  };

  auto* profile = app.add_subcommand("profile", "1D transition profile and its energy");
  add_common(profile);
  add_potential(profile);

  auto* geodesic = app.add_subcommand("geodesic", "degenerate geodesic cost between wells");
  add_common(geodesic);
  add_potential(geodesic);
  geodesic->add_option("--space", prm.space, "slice or ambient")
      ->check(CLI::IsMember({"slice", "ambient"}));
  geodesic->add_option("--nodes", prm.nodes, "polyline nodes");
  geodesic->add_option("--restarts", prm.restarts, "random restarts");

  auto* minimize_cmd = app.add_subcommand("minimize", "energy minimization on the cylinder");
  add_common(minimize_cmd);
  add_potential(minimize_cmd);
  minimize_cmd->add_option("--d", prm.d, "target dimension");
  minimize_cmd->add_option("--L", prm.L, "half length in x1");
  minimize_cmd->add_option("--n1", prm.n1, "nodes in x1 (even)");
  minimize_cmd->add_option("--np", prm.np, "nodes per periodic direction");
  minimize_cmd->add_option("--init", prm.init, "profile, perturbed, random or field")
      ->check(CLI::IsMember({"profile", "perturbed", "random", "field"}));
  minimize_cmd->add_option("--amplitude", prm.amplitude, "relative noise amplitude");
  minimize_cmd->add_option("--init-field", prm.init_field, "field snapshot stem for --init field");
  minimize_cmd->add_option("--max-iter", prm.max_iter, "L-BFGS iteration cap");
  minimize_cmd->add_option("--grad-tol", prm.grad_tol, "gradient tolerance");

  auto* entropy = app.add_subcommand("entropy-check", "pointwise entropy criterion and saturation");
  add_common(entropy);
  entropy->add_option("--entropy", prm.entropy, "wave-gl, harmonic, tricomi, phi2, phi3, phi4");
  entropy->add_option("--box", prm.box, "half width of the sample box");
  entropy->add_option("--grid", prm.samples_grid, "grid nodes per axis");
  entropy->add_option("--random", prm.samples_random, "random samples");

  auto* tricomi = app.add_subcommand("tricomi-check", "Tricomi identity on random fields");
  add_common(tricomi);
  tricomi->add_option("--f", prm.f_coeff, "constant f in w = 1 - f z1^2 - z2^2");
  tricomi->add_option("--L", prm.L, "half length in x1");
  tricomi->add_option("--n1", prm.n1, "nodes in x1 (even)");
  tricomi->add_option("--np", prm.np, "nodes per periodic direction");
  tricomi->add_option("--fields", prm.fields, "number of random fields");
  tricomi->add_option("--amplitude", prm.amplitude, "relative noise amplitude");

  auto* ode = app.add_subcommand("ode3d", "reduced ODE for 3D transitions");
  add_common(ode);
  ode->add_option("--b", prm.b, "parameter b");
  ode->add_option("--v0", prm.v0, "initial (v2,v3)")->delimiter(',');
  ode->add_option("--t0", prm.t0, "start time");
  ode->add_option("--t1", prm.t1, "end time");
  ode->add_option("--dt", prm.dt, "step");

  auto* mbuild = app.add_subcommand("metric-build", "weight for a finite metric plus optimality audit");
  add_common(mbuild);
  mbuild->add_option("--input", prm.input, "metric JSON {points, delta}")->required();
  mbuild->add_option("--trials", prm.trials, "perturbed paths per pair");
  mbuild->add_option("--resolution", prm.resolution, "weight grid resolution");
  mbuild->add_flag("!--no-geodesic-search", prm.geodesic_search, "skip the geodesic search");

  auto* calib = app.add_subcommand("calibrate", "calibration function for one cut");
  add_common(calib);
  calib->add_option("--input", prm.input, "metric JSON {points, delta}")->required();
  calib->add_option("--subset", prm.subset, "indices of Y")->delimiter(',')->required();
  calib->add_option("--resolution", prm.resolution, "grid resolution");

  auto* decomp = app.add_subcommand("decompose", "cut decomposition of a finite metric");
  add_common(decomp);
  decomp->add_option("--input", prm.input, "metric JSON {points, delta}")->required();

  auto* sweep = app.add_subcommand("sweep", "slice cost over a range of slice coordinates");
  add_common(sweep);
  sweep->add_option("--potential", prm.potential, "builtin tag or potential JSON file");
  sweep->add_option("--a-min", prm.a_min, "first slice");
  sweep->add_option("--a-max", prm.a_max, "last slice");
  sweep->add_option("--count", prm.count, "number of slices");

  std::string config_path;
  auto* run = app.add_subcommand("run", "run an experiment config file");
  run->add_option("config", config_path, "config JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kPass : kUsage;
  }

  try {
    std::string name;
    if (run->parsed()) {
      const ExperimentConfig cfg = config_from_json(read_json(config_path));
      if (!commands().count(cfg.command)) throw ConfigError("unknown command '" + cfg.command + "'");
      name = cfg.command;
      prm = params_from_config(cfg);
    } else {
      name = app.get_subcommands().front()->get_name();
      for (const auto& kv : tol_pairs) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw UsageError("--tol expects name=value");
        prm.tolerances[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
      }
    }
    fs::create_directories(prm.out);
    return commands().at(name)(prm);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const MetricError& e) {
    std::cerr << "metric error: " << e.what() << "\n";
    return kUsage;
  } catch (const ProfileError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kFail;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  }
}
