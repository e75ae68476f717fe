#include <stacklq/model.hpp>

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace stacklq {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void structure_error(const std::string& where, const std::string& what) {
  throw ParseError(where + ": " + what);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) structure_error(where, "expected a number");
  return j.get<double>();
}

// Nested row-major array -> matrix. A flat array of numbers is read as a column
// when `allow_flat` is set (vectors are written flat).
Mat matrix(const json& j, const std::string& where, bool allow_flat) {
  if (!j.is_array()) structure_error(where, "expected an array");
  if (j.empty()) return Mat(0, 0);
  if (j.front().is_number()) {
    if (!allow_flat) structure_error(where, "expected a nested array (matrix)");
    Mat m(static_cast<Eigen::Index>(j.size()), 1);
    for (std::size_t i = 0; i < j.size(); ++i) {
      m(static_cast<Eigen::Index>(i), 0) = number(j[i], where);
    }
    return m;
  }
  const std::size_t rows = j.size();
  if (!j.front().is_array()) structure_error(where, "expected an array of rows");
  const std::size_t cols = j.front().size();
  Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const json& row = j[r];
    if (!row.is_array() || row.size() != cols) {
      structure_error(where, "ragged matrix row " + std::to_string(r));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number(row[c], where);
    }
  }
  return m;
}

TimeFunction time_function(const json& j, const std::string& where, bool vector) {
  if (!j.is_object()) structure_error(where, "expected an object with a \"kind\" field");
  auto kind_it = j.find("kind");
  if (kind_it == j.end() || !kind_it->is_string()) structure_error(where, "missing \"kind\"");
  const std::string kind = kind_it->get<std::string>();
  if (kind == "constant") {
    auto v = j.find("value");
    if (v == j.end()) structure_error(where, "missing \"value\"");
    return TimeFunction::constant(matrix(*v, where + ".value", vector));
  }
  if (kind == "piecewise") {
    auto b = j.find("breaks");
    auto v = j.find("values");
    if (b == j.end() || !b->is_array()) structure_error(where, "missing \"breaks\" array");
    if (v == j.end() || !v->is_array()) structure_error(where, "missing \"values\" array");
    std::vector<double> breaks;
    for (const auto& x : *b) breaks.push_back(number(x, where + ".breaks"));
    std::vector<Mat> values;
    for (std::size_t i = 0; i < v->size(); ++i) {
      values.push_back(matrix((*v)[i], where + ".values[" + std::to_string(i) + "]", vector));
    }
    if (values.size() != breaks.size() + 1) {
      structure_error(where, "\"values\" must have one more entry than \"breaks\"");
    }
    return TimeFunction::piecewise(std::move(breaks), std::move(values));
  }
  structure_error(where, "unknown kind \"" + kind + "\"");
}

TimeFunction optional_function(const json& obj, const char* key, const std::string& where,
                               bool vector, int n) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    return TimeFunction::constant(vector ? Mat::Zero(n, 1) : Mat::Zero(n, n));
  }
  return time_function(*it, where + "." + key, vector);
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  const std::size_t end = std::min(byte == 0 ? 0 : byte - 1, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

ordered_json to_json(const Mat& m, bool vector) {
  ordered_json out = ordered_json::array();
  if (vector && m.cols() == 1) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(m(i, 0));
    return out;
  }
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

ordered_json to_json(const TimeFunction& f, bool vector) {
  ordered_json out;
  if (f.is_constant()) {
    out["kind"] = "constant";
    out["value"] = to_json(f.values().front(), vector);
  } else {
    out["kind"] = "piecewise";
    out["breaks"] = f.breaks();
    ordered_json values = ordered_json::array();
    for (const Mat& v : f.values()) values.push_back(to_json(v, vector));
    out["values"] = std::move(values);
  }
  return out;
}

}  // namespace

GameSpec parse_spec(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    auto [line, col] = line_column(text, e.byte);
    std::ostringstream os;
    os << "malformed spec at line " << line << ", column " << col << ": " << e.what();
    throw ParseError(os.str(), line, col);
  }
  if (!doc.is_object()) structure_error("document", "top level must be an object");

  auto require = [&](const char* key) -> const json& {
    auto it = doc.find(key);
    if (it == doc.end()) structure_error("document", std::string("missing \"") + key + "\"");
    return *it;
  };

  GameSpec s;
  const json& jn = require("n");
  if (!jn.is_number_integer()) structure_error("n", "expected an integer");
  s.n = jn.get<int>();
  const double T = number(require("T"), "T");
  const json& js = require("steps");
  if (!js.is_number_integer() || js.get<long long>() < 1) {
    structure_error("steps", "expected a positive integer");
  }
  try {
    s.grid = TimeGrid::uniform(T, js.get<std::size_t>());
  } catch (const DomainError& e) {
    structure_error("T", e.what());
  }
  s.x0 = matrix(require("x0"), "x0", true).col(0);
  if (auto it = doc.find("rho_min"); it != doc.end()) s.rho_min = number(*it, "rho_min");

  const int n = s.n;
  const json& coeffs = require("coeffs");
  if (!coeffs.is_object()) structure_error("coeffs", "expected an object");
  s.coeffs.A = optional_function(coeffs, "A", "coeffs", false, n);
  s.coeffs.b = optional_function(coeffs, "b", "coeffs", true, n);
  for (int i = 0; i < 3; ++i) {
    const std::string k = std::to_string(i + 1);
    s.coeffs.B[i] = optional_function(coeffs, ("B" + k).c_str(), "coeffs", false, n);
    s.coeffs.C[i] = optional_function(coeffs, ("C" + k).c_str(), "coeffs", false, n);
    s.coeffs.sigma[i] = optional_function(coeffs, ("sigma" + k).c_str(), "coeffs", true, n);
  }

  const json& costs = require("costs");
  if (!costs.is_object()) structure_error("costs", "expected an object");
  for (int i = 0; i < 3; ++i) {
    const std::string key = "player" + std::to_string(i + 1);
    auto it = costs.find(key);
    if (it == costs.end() || !it->is_object()) {
      structure_error("costs", "missing object \"" + key + "\"");
    }
    const json& pj = *it;
    const std::string where = "costs." + key;
    PlayerCost& pc = s.costs.player[i];
    pc.Q = optional_function(pj, "Q", where, false, n);
    pc.R = optional_function(pj, "R", where, false, n);
    pc.m = optional_function(pj, "m", where, true, n);
    pc.n = optional_function(pj, "n", where, true, n);
    if (auto g = pj.find("G"); g == pj.end()) {
      pc.G = Mat::Zero(n, n);
    } else if (g->is_object()) {
      TimeFunction f = time_function(*g, where + ".G", false);
      if (!f.is_constant()) structure_error(where + ".G", "terminal weight must be constant");
      pc.G = f.values().front();
    } else {
      pc.G = matrix(*g, where + ".G", false);
    }
  }

  if (auto it = doc.find("adjacency"); it != doc.end()) {
    if (!it->is_array() || it->size() != 3) structure_error("adjacency", "expected a 3x3 array");
    for (std::size_t r = 0; r < 3; ++r) {
      const json& row = (*it)[r];
      if (!row.is_array() || row.size() != 3) structure_error("adjacency", "expected a 3x3 array");
      for (std::size_t c = 0; c < 3; ++c) {
        if (!row[c].is_number_integer()) structure_error("adjacency", "entries must be 0 or 1");
        s.info.adjacency[r][c] = row[c].get<int>();
      }
    }
  }
  return s;
}

GameSpec load_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open spec file " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_spec(os.str());
}

std::string serialize_spec(const GameSpec& spec) {
  ordered_json doc;
  doc["n"] = spec.n;
  doc["T"] = spec.grid.horizon();
  doc["steps"] = spec.grid.steps();
  doc["x0"] = to_json(Mat(spec.x0), true);
  doc["rho_min"] = spec.rho_min;
  ordered_json coeffs;
  coeffs["A"] = to_json(spec.coeffs.A, false);
  for (int i = 0; i < 3; ++i) coeffs["B" + std::to_string(i + 1)] = to_json(spec.coeffs.B[i], false);
  for (int i = 0; i < 3; ++i) coeffs["C" + std::to_string(i + 1)] = to_json(spec.coeffs.C[i], false);
  coeffs["b"] = to_json(spec.coeffs.b, true);
  for (int i = 0; i < 3; ++i) {
    coeffs["sigma" + std::to_string(i + 1)] = to_json(spec.coeffs.sigma[i], true);
  }
  doc["coeffs"] = std::move(coeffs);
  ordered_json costs;
  for (int i = 0; i < 3; ++i) {
    const PlayerCost& pc = spec.costs.player[i];
    ordered_json pj;
    pj["Q"] = to_json(pc.Q, false);
    pj["R"] = to_json(pc.R, false);
    pj["G"] = to_json(pc.G, false);
    pj["m"] = to_json(pc.m, true);
    pj["n"] = to_json(pc.n, true);
    costs["player" + std::to_string(i + 1)] = std::move(pj);
  }
  doc["costs"] = std::move(costs);
  ordered_json adj = ordered_json::array();
  for (const auto& row : spec.info.adjacency) adj.push_back(row);
  doc["adjacency"] = std::move(adj);
  return doc.dump(2) + "\n";
}

}  // namespace stacklq
