#pragma once

// Instance files and report formatting for the command-line tool. Instances
// are JSON objects; tables are row-major flat lists.
//
// Base instance:     {"x_size", "y_size", "xhat_size", "pxy", "dd", "de"?}
// Extended instance: {"x_size", "y_size", "xhat_d_size", "xhat_e_size",
//                     "pxy", "dk": [table, ...], "targets": [...]}
// Witness (reduce-u): "witness": {"z_size", "u_size", "pz_given_x",
//                     "pu_given_xz", "phi", "psi"}

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <locale>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "rdsi/caratheodory.hpp"
#include "rdsi/discrete_model.hpp"
#include "rdsi/error.hpp"

namespace rdsi::io {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSpecVersion = "1.0";

// ---------------------------------------------------------------------------
// Numbers

/// 12 significant digits, '.' separator regardless of locale.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  std::string s(buf);
  for (char& c : s)
    if (c == ',') c = '.';
  return s;
}

/// JSON number rounded to 12 significant digits; null if not finite.
inline Json jnum(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::strtod(fmt(v).c_str(), nullptr);
}

inline double parse_double(const std::string& s, const std::string& what) {
  std::istringstream in(s);
  in.imbue(std::locale::classic());
  double v = 0.0;
  in >> v;
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (in.fail() || !in.eof()) fail(ErrorKind::parse, "cannot parse '" + s + "' as a number for " + what);
  return v;
}

inline long parse_long(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != s.size()) fail(ErrorKind::parse, "cannot parse '" + s + "' as an integer for " + what);
  return v;
}

inline std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) out.push_back(parse_double(item, what));
  if (out.empty()) fail(ErrorKind::parse, "empty list for " + what);
  return out;
}

// ---------------------------------------------------------------------------
// --config KEY=VALUE overrides

class Config {
 public:
  Config(const std::vector<std::string>& pairs, std::vector<std::string> allowed)
      : allowed_(std::move(allowed)) {
    for (const std::string& p : pairs) {
      const auto eq = p.find('=');
      if (eq == std::string::npos || eq == 0) fail(ErrorKind::parse, "--config expects KEY=VALUE, got '" + p + "'");
      const std::string key = p.substr(0, eq);
      if (std::find(allowed_.begin(), allowed_.end(), key) == allowed_.end())
        fail(ErrorKind::parse, "unknown config key '" + key + "'");
      values_[key] = p.substr(eq + 1);
    }
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::string& raw(const std::string& key) const { return values_.at(key); }

  std::optional<double> real(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return parse_double(raw(key), key);
  }
  std::optional<long> integer(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return parse_long(raw(key), key);
  }
  std::optional<std::vector<double>> list(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return parse_list(raw(key), key);
  }

 private:
  std::vector<std::string> allowed_;
  std::map<std::string, std::string> values_;
};

// ---------------------------------------------------------------------------
// Reading

inline Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::parse, "cannot open input file '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, "invalid JSON in '" + path + "': " + e.what());
  }
}

namespace detail {

inline const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorKind::parse, std::string("missing field '") + key + "'");
  return j.at(key);
}

inline int size_field(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number_integer() || v.get<long>() < 1 || v.get<long>() > 4096)
    fail(ErrorKind::parse, std::string("field '") + key + "' must be a positive integer");
  return v.get<int>();
}

inline std::vector<double> numbers(const Json& v, const std::string& key, std::size_t expected) {
  if (!v.is_array()) fail(ErrorKind::parse, "field '" + key + "' must be a list of numbers");
  std::vector<double> out;
  for (const Json& e : v) {
    if (!e.is_number()) fail(ErrorKind::parse, "field '" + key + "' must contain only numbers");
    out.push_back(e.get<double>());
  }
  if (expected && out.size() != expected)
    fail(ErrorKind::parse, "field '" + key + "' has " + std::to_string(out.size()) + " entries, expected " +
                               std::to_string(expected));
  return out;
}

inline Matrix matrix(const Json& j, const char* key, int rows, int cols) {
  const auto v = numbers(field(j, key), key, static_cast<std::size_t>(rows) * cols);
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = v[static_cast<std::size_t>(r) * cols + c];
  return m;
}

inline IndexTable index_table(const Json& j, const char* key, int rows, int cols, int bound) {
  const Matrix m = matrix(j, key, rows, cols);
  IndexTable t(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const double v = m(r, c);
      if (v != std::floor(v) || v < 0 || v >= bound)
        fail(ErrorKind::parse, std::string("field '") + key + "' must hold symbols in [0, " + std::to_string(bound) + ")");
      t(r, c) = static_cast<int>(v);
    }
  return t;
}

inline Tensor3 tensor(const Json& v, const std::string& key, int d0, int d1, int d2) {
  const auto flat = numbers(v, key, static_cast<std::size_t>(d0) * d1 * d2);
  Tensor3 t(d0, d1, d2);
  t.data() = flat;
  return t;
}

}  // namespace detail

inline JointSource parse_source(const Json& j) {
  const int xs = detail::size_field(j, "x_size"), ys = detail::size_field(j, "y_size");
  Matrix p = detail::matrix(j, "pxy", xs, ys);
  const ValidationReport rep = validate_source(p);
  if (!rep.ok()) fail(ErrorKind::domain, "pxy: " + rep.violations.front().message);
  return JointSource(std::move(p));
}

struct BaseInstance {
  JointSource src;
  Matrix dd;
  std::optional<Matrix> de;

  DistortionSpec spec() const {
    if (!de) fail(ErrorKind::parse, "instance has no 'de' table");
    return DistortionSpec(dd, *de);
  }
};

inline BaseInstance parse_base(const Json& j) {
  JointSource src = parse_source(j);
  const int xh = detail::size_field(j, "xhat_size");
  Matrix dd = detail::matrix(j, "dd", src.x_size(), xh);
  std::optional<Matrix> de;
  if (j.contains("de")) de = detail::matrix(j, "de", xh, xh);
  return {std::move(src), std::move(dd), std::move(de)};
}

struct ExtInstance {
  JointSource src;
  ExtendedInstance ext;
};

inline ExtInstance parse_extended(const Json& j) {
  JointSource src = parse_source(j);
  ExtendedInstance ext;
  ext.xhat_d_size = detail::size_field(j, "xhat_d_size");
  ext.xhat_e_size = detail::size_field(j, "xhat_e_size");
  const Json& dk = detail::field(j, "dk");
  if (!dk.is_array() || dk.empty()) fail(ErrorKind::parse, "field 'dk' must be a nonempty list of tables");
  for (std::size_t k = 0; k < dk.size(); ++k)
    ext.dk.push_back(detail::tensor(dk[k], "dk[" + std::to_string(k) + "]", src.x_size(), ext.xhat_d_size,
                                    ext.xhat_e_size));
  if (j.contains("targets")) ext.targets = detail::numbers(j.at("targets"), "targets", dk.size());
  return {std::move(src), std::move(ext)};
}

inline ExtWitness parse_witness(const Json& j, const JointSource& src, const ExtendedInstance& ext) {
  const Json& w = detail::field(j, "witness");
  const int zs = detail::size_field(w, "z_size"), us = detail::size_field(w, "u_size");
  const int xs = src.x_size(), ys = src.y_size();
  ExtWitness out;
  out.pz_given_x = detail::matrix(w, "pz_given_x", xs, zs);
  out.pu_given_xz = detail::tensor(detail::field(w, "pu_given_xz"), "pu_given_xz", xs, zs, us);
  out.phi = detail::index_table(w, "phi", ys, zs, ext.xhat_d_size);
  const Tensor3 psi = detail::tensor(detail::field(w, "psi"), "psi", xs, zs, us);
  out.psi = IndexTensor3(xs, zs, us);
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double v = psi.data()[i];
    if (v != std::floor(v) || v < 0 || v >= ext.xhat_e_size)
      fail(ErrorKind::parse, "field 'psi' must hold symbols in [0, " + std::to_string(ext.xhat_e_size) + ")");
    out.psi.data()[i] = static_cast<int>(v);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Writing

inline Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(jnum(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json table_json(const IndexTable& t) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < t.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < t.cols(); ++c) row.push_back(t(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename T>
Json array3_json(const Array3<T>& a) {
  Json out = Json::array();
  for (int i = 0; i < a.dim0(); ++i) {
    Json mid = Json::array();
    for (int j = 0; j < a.dim1(); ++j) {
      Json row = Json::array();
      for (int k = 0; k < a.dim2(); ++k) {
        if constexpr (std::is_floating_point_v<T>)
          row.push_back(jnum(a(i, j, k)));
        else
          row.push_back(a(i, j, k));
      }
      mid.push_back(std::move(row));
    }
    out.push_back(std::move(mid));
  }
  return out;
}

inline Json witness_json(const ExtWitness& w) {
  return Json{{"z_size", w.z_size()},
              {"u_size", w.u_size()},
              {"pz_given_x", matrix_json(w.pz_given_x)},
              {"pu_given_xz", array3_json(w.pu_given_xz)},
              {"phi", table_json(w.phi)},
              {"psi", array3_json(w.psi)}};
}

/// Rows of already-formatted cells; serialized as CSV or as a JSON array of objects.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;

  std::string csv() const {
    std::string out;
    for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + columns[c];
    out += '\n';
    for (const auto& row : rows) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) out += ',';
        out += cell(row[c]);
      }
      out += '\n';
    }
    return out;
  }

  Json json() const {
    Json out = Json::array();
    for (const auto& row : rows) {
      Json obj = Json::object();
      for (std::size_t c = 0; c < columns.size(); ++c) obj[columns[c]] = row[c];
      out.push_back(std::move(obj));
    }
    return out;
  }

 private:
  static std::string cell(const Json& v) {
    if (v.is_null()) return "";
    if (v.is_number_float()) return fmt(v.get<double>());
    if (v.is_string()) return quote(v.get<std::string>());
    return v.dump();
  }

  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
};

}  // namespace rdsi::io
