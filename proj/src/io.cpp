#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "stokes/io.hpp"

namespace stokes {

namespace {

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream os(path, mode);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  return os;
}

void require_known(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw ConfigError("unknown field '" + it.key() + "' in " + where);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  auto os = open_out(path);
  for (size_t k = 0; k < header.size(); ++k) os << (k ? "," : "") << header[k];
  os << '\n' << std::setprecision(17);
  for (const auto& r : rows) {
    for (size_t k = 0; k < r.size(); ++k) os << (k ? "," : "") << r[k];
    os << '\n';
  }
}

void write_json(const std::string& path, const json& j) {
  auto os = open_out(path);
  os << j.dump(2) << '\n';
}

json read_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read " + path);
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void write_svg_polyline(const std::string& path, const std::vector<Series>& series,
                        const std::string& title, const std::string& xlabel,
                        const std::string& ylabel) {
  const double W = 640, H = 400, m = 50;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series)
    for (size_t k = 0; k < s.x.size(); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
      x0 = std::min(x0, s.x[k]);
      x1 = std::max(x1, s.x[k]);
      y0 = std::min(y0, s.y[k]);
      y1 = std::max(y1, s.y[k]);
    }
  if (!(x1 > x0)) x0 -= 1, x1 += 1;
  if (!(y1 > y0)) y0 -= 1, y1 += 1;
  auto px = [&](double x) { return m + (x - x0) / (x1 - x0) * (W - 2 * m); };
  auto py = [&](double y) { return H - m - (y - y0) / (y1 - y0) * (H - 2 * m); };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  auto os = open_out(path);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\">" << title << "</text>\n";
  os << "<rect x=\"" << m << "\" y=\"" << m << "\" width=\"" << W - 2 * m << "\" height=\""
     << H - 2 * m << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << m << "\" y=\"" << H - m + 15 << "\">" << fmt(x0) << "</text>\n";
  os << "<text x=\"" << W - m << "\" y=\"" << H - m + 15 << "\" text-anchor=\"end\">" << fmt(x1)
     << "</text>\n";
  os << "<text x=\"" << m - 5 << "\" y=\"" << H - m << "\" text-anchor=\"end\">" << fmt(y0)
     << "</text>\n";
  os << "<text x=\"" << m - 5 << "\" y=\"" << m + 10 << "\" text-anchor=\"end\">" << fmt(y1)
     << "</text>\n";
  if (!xlabel.empty())
    os << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">" << xlabel
       << "</text>\n";
  if (!ylabel.empty())
    os << "<text x=\"12\" y=\"" << H / 2 << "\" transform=\"rotate(-90 12 " << H / 2
       << ")\" text-anchor=\"middle\">" << ylabel << "</text>\n";
  for (size_t s = 0; s < series.size(); ++s) {
    const char* c = colors[s % 5];
    os << "<polyline fill=\"none\" stroke=\"" << c << "\" points=\"";
    for (size_t k = 0; k < series[s].x.size(); ++k) {
      if (!std::isfinite(series[s].x[k]) || !std::isfinite(series[s].y[k])) continue;
      os << std::fixed << std::setprecision(2) << px(series[s].x[k]) << ','
         << py(series[s].y[k]) << ' ';
    }
    os << "\"/>\n";
    os << std::defaultfloat;
    if (!series[s].name.empty())
      os << "<text x=\"" << W - m - 5 << "\" y=\"" << m + 15 + 15 * s << "\" fill=\"" << c
         << "\" text-anchor=\"end\">" << series[s].name << "</text>\n";
  }
  os << "</svg>\n";
}

void write_svg_heatmap(const std::string& path, const std::vector<std::vector<double>>& values,
                       const std::string& title) {
  const int rows = static_cast<int>(values.size());
  const int cols = rows ? static_cast<int>(values[0].size()) : 0;
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& r : values)
    for (double v : r)
      if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
  if (!(hi > lo)) hi = lo + 1;
  const double cell = std::max(1.0, std::min(8.0, 600.0 / std::max(1, std::max(rows, cols))));
  auto os = open_out(path);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << cols * cell + 20
     << "\" height=\"" << rows * cell + 40 << "\">\n";
  os << "<text x=\"10\" y=\"20\">" << title << " [" << fmt(lo) << ", " << fmt(hi) << "]</text>\n";
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const double t = std::isfinite(values[i][j]) ? (values[i][j] - lo) / (hi - lo) : 0;
      const int r = static_cast<int>(255 * t), b = 255 - r;
      os << "<rect x=\"" << 10 + j * cell << "\" y=\"" << 30 + i * cell << "\" width=\"" << cell
         << "\" height=\"" << cell << "\" fill=\"rgb(" << r << ",0," << b << ")\"/>\n";
    }
  os << "</svg>\n";
}

void write_field(const std::string& stem, const Field& f) {
  {
    auto os = open_out(stem + ".bin", std::ios::binary);
    os.write(reinterpret_cast<const char*>(f.values.data()),
             static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  }
  json h;
  h["format"] = "float64-le";
  h["layout"] = "node-major, component fastest";
  h["d"] = f.grid.d;
  h["L"] = f.grid.L;
  h["n1"] = f.grid.n1;
  h["np"] = f.grid.np;
  h["u_minus"] = std::vector<double>(f.u_minus.data(), f.u_minus.data() + f.u_minus.size());
  h["u_plus"] = std::vector<double>(f.u_plus.data(), f.u_plus.data() + f.u_plus.size());
  h["count"] = f.values.size();
  write_json(stem + ".json", h);
}

Field read_field(const std::string& stem) {
  const json h = read_json(stem + ".json");
  const CylinderGrid g(h.at("d").get<int>(), h.at("L").get<double>(), h.at("n1").get<int>(),
                       h.at("np").get<int>());
  const auto um = h.at("u_minus").get<std::vector<double>>();
  const auto up = h.at("u_plus").get<std::vector<double>>();
  Field f(g, Eigen::Map<const Vec>(um.data(), um.size()),
          Eigen::Map<const Vec>(up.data(), up.size()));
  if (h.at("count").get<size_t>() != f.values.size())
    throw ConfigError("field sidecar count does not match the grid");
  std::ifstream is(stem + ".bin", std::ios::binary);
  if (!is) throw ConfigError("cannot read " + stem + ".bin");
  is.read(reinterpret_cast<char*>(f.values.data()),
          static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!is) throw ConfigError(stem + ".bin is truncated");
  return f;
}

Potential potential_from_json(const json& desc) {
  if (desc.is_string()) {
    auto p = builtin_by_tag(desc.get<std::string>());
    if (!p) throw ConfigError("unknown potential tag '" + desc.get<std::string>() + "'");
    return *p;
  }
  if (!desc.is_object()) throw ConfigError("potential must be a tag or an object");
  const std::string kind = desc.value("kind", "");
  if (kind == "tag") {
    require_known(desc, {"kind", "tag"}, "potential");
    return potential_from_json(desc.at("tag"));
  }
  if (kind != "w_squared") throw ConfigError("unknown potential kind '" + kind + "'");
  require_known(desc, {"kind", "w", "coeffs", "f"}, "potential");
  if (desc.value("w", "poly") != "poly") throw ConfigError("only polynomial w is supported");
  std::vector<PolyTerm> terms;
  for (const auto& t : desc.at("coeffs")) {
    if (!t.is_array() || t.size() != 3) throw ConfigError("coeffs entries are [c, i, j]");
    terms.push_back({t[0].get<double>(), t[1].get<int>(), t[2].get<int>()});
  }
  const PlanarField w = polynomial_field(terms);
  const json f = desc.value("f", json("harmonic"));
  if (f.is_string()) {
    if (f == "harmonic") return builtin_w_squared(w, WaveKind::harmonic);
    if (f == "wave") return builtin_w_squared(w, WaveKind::wave);
    throw ConfigError("f must be 'wave', 'harmonic' or a number");
  }
  const double c = f.get<double>();
  try {
    return builtin_w_squared(w, WaveKind::tricomi, [c](double) { return c; });
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["schema"] = c.schema;
  j["command"] = c.command;
  j["potential"] = c.potential;
  j["wells"] = c.wells;
  j["grid"] = {{"d", c.grid.d}, {"L", c.grid.L}, {"n1", c.grid.n1}, {"np", c.grid.np}};
  j["seed"] = c.seed;
  j["tolerances"] = c.tolerances;
  j["output_dir"] = c.output_dir;
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  require_known(j, {"schema", "command", "potential", "wells", "grid", "seed", "tolerances",
                    "output_dir"},
                "config");
  ExperimentConfig c;
  try {
    c.schema = j.value("schema", 0);
    if (c.schema != 1) throw ConfigError("unsupported config schema " + std::to_string(c.schema));
    c.command = j.value("command", "");
    if (j.contains("potential")) c.potential = j["potential"];
    if (j.contains("wells")) c.wells = j["wells"].get<std::vector<std::vector<double>>>();
    if (j.contains("grid")) {
      const auto& g = j["grid"];
      require_known(g, {"d", "L", "n1", "np"}, "grid");
      c.grid.d = g.value("d", c.grid.d);
      c.grid.L = g.value("L", c.grid.L);
      c.grid.n1 = g.value("n1", c.grid.n1);
      c.grid.np = g.value("np", c.grid.np);
    }
    c.seed = j.value("seed", c.seed);
    if (j.contains("tolerances")) c.tolerances = j["tolerances"].get<std::map<std::string, double>>();
    c.output_dir = j.value("output_dir", c.output_dir);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return c;
}

FiniteMetric metric_from_json(const json& j) {
  require_known(j, {"points", "delta"}, "metric");
  FiniteMetric m;
  try {
    for (const auto& p : j.at("points")) {
      const auto v = p.get<std::vector<double>>();
      m.points.push_back(Eigen::Map<const Vec>(v.data(), v.size()));
    }
    const auto rows = j.at("delta").get<std::vector<std::vector<double>>>();
    const int n = static_cast<int>(rows.size());
    m.delta.resize(n, n);
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(rows[i].size()) != n) throw ConfigError("delta must be square");
      for (int k = 0; k < n; ++k) m.delta(i, k) = rows[i][k];
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed metric: ") + e.what());
  }
  if (static_cast<int>(m.points.size()) != m.delta.rows())
    throw ConfigError("points and delta sizes differ");
  return m;
}

json to_json(const CutDecomposition& dec, int n) {
  json w = json::array();
  for (const auto& [Y, lam] : dec.weights) {
    std::vector<int> members;
    for (int i = 0; i < n; ++i)
      if ((Y >> i) & 1u) members.push_back(i);
    w.push_back({{"Y", members}, {"lambda", lam}});
  }
  return {{"feasible", dec.feasible},
          {"residual", dec.residual},
          {"residual_tol", 1e-9},
          {"weights", w}};
}

}  // namespace stokes
