#pragma once

#include <json.hpp>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stokes/cylinder.hpp"
#include "stokes/metric.hpp"
#include "stokes/potential.hpp"

namespace stokes {

using json = nlohmann::ordered_json;

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);
void write_json(const std::string& path, const json& j);
json read_json(const std::string& path);

struct Series {
  std::string name;
  std::vector<double> x, y;
};

// Minimal static line plot.
void write_svg_polyline(const std::string& path, const std::vector<Series>& series,
                        const std::string& title, const std::string& xlabel = "",
                        const std::string& ylabel = "");
// Row-major values, rows drawn top to bottom.
void write_svg_heatmap(const std::string& path, const std::vector<std::vector<double>>& values,
                       const std::string& title);

// <stem>.bin holds raw little-endian doubles; <stem>.json describes the layout.
void write_field(const std::string& stem, const Field& f);
Field read_field(const std::string& stem);

// Accepts a builtin tag ("gl", "wd3", ...) or an object:
//   {"kind": "tag", "tag": "gl"}
//   {"kind": "w_squared", "w": "poly", "coeffs": [[c, i, j], ...],
//    "f": "wave" | "harmonic" | number}
Potential potential_from_json(const json& desc);

struct ExperimentConfig {
  int schema = 1;
  std::string command;
  json potential = "gl";
  std::vector<std::vector<double>> wells;
  struct Grid {
    int d = 2;
    double L = 10;
    int n1 = 256;
    int np = 64;
  } grid;
  std::uint64_t seed = 1;
  std::map<std::string, double> tolerances;
  std::string output_dir = ".";
};

json to_json(const ExperimentConfig& c);
// Rejects unknown fields and schema versions other than 1.
ExperimentConfig config_from_json(const json& j);

FiniteMetric metric_from_json(const json& j);
json to_json(const CutDecomposition& dec, int n);

}  // namespace stokes
