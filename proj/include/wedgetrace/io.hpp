// SPDX-License-Identifier: Apache-2.0
#pragma once

// File formats and configuration ingestion for the command-line driver:
// RFC-4180 CSV with full-precision floats, ordered JSON documents, atomic
// output files (write to a sibling temp file, then rename), single-line JSON
// diagnostics, and an NDJSON event stream for stage timings. Parsers validate
// strictly: unknown keys and wrong shapes raise ConfigError before any
// computation starts.

#include <cstdio>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wedgetrace/errors.hpp"
#include "wedgetrace/family.hpp"
#include "wedgetrace/types.hpp"
#include "wedgetrace/wedge.hpp"

namespace wedgetrace {

using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

// Shortest round-trip representation is locale-dependent with iostreams;
// %.17g is not, and always reparses to the same double.
inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

inline std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  out += "\r\n";
  return out;
}

// Minimal RFC-4180 reader: quoted fields with doubled quotes, CRLF or LF rows.
inline std::vector<std::vector<std::string>> csv_parse(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        any = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        any = true;
        break;
      case '\r':
        break;
      case '\n':
        if (any || !field.empty() || !row.empty()) {
          row.push_back(std::move(field));
          rows.push_back(std::move(row));
        }
        field.clear();
        row.clear();
        any = false;
        break;
      default:
        field += c;
        any = true;
    }
  }
  if (quoted) throw ConfigError("unterminated quote in CSV input");
  if (any || !field.empty() || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Atomic output files
// ---------------------------------------------------------------------------

inline void atomic_write_file(const std::filesystem::path& path,
                              const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec)
      throw Error("cannot create " + path.parent_path().string() + ": " +
                  ec.message());
  }
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw Error("short write to " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot finalize " + path.string() + ": " + ec.message());
  }
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// ---------------------------------------------------------------------------
// Diagnostics and event log
// ---------------------------------------------------------------------------

// One line per failure, machine-parseable alongside the NDJSON events.
inline void emit_diagnostic(std::ostream& err, const std::string& kind,
                            const std::string& message) {
  ojson j;
  j["error"] = kind;
  j["message"] = message;
  err << j.dump() << '\n';
}

class EventLog {
 public:
  explicit EventLog(std::ostream* sink) : sink_(sink), start_(now()) {}

  void emit(const std::string& stage, ojson extra = ojson::object()) {
    if (!sink_) return;
    ojson j;
    j["event"] = stage;
    j["wall_ms"] = std::chrono::duration<double, std::milli>(now() - start_)
                       .count();
    for (auto& [k, v] : extra.items()) j[k] = v;
    (*sink_) << j.dump() << '\n';
  }

 private:
  static std::chrono::steady_clock::time_point now() {
    return std::chrono::steady_clock::now();
  }
  std::ostream* sink_;
  std::chrono::steady_clock::time_point start_;
};

// ---------------------------------------------------------------------------
// JSON configuration
// ---------------------------------------------------------------------------

inline ojson load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  try {
    return ojson::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
}

namespace detail {

inline void require_keys(const ojson& j, const char* where,
                         std::initializer_list<const char*> allowed) {
  if (!j.is_object())
    throw ConfigError(std::string(where) + " must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok)
      throw ConfigError(std::string(where) + " has an unknown key \"" + k +
                        "\"");
  }
}

inline double number_at(const ojson& j, const char* key, const char* where) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw ConfigError(std::string(where) + " needs a numeric \"" + key + "\"");
  return j.at(key).get<double>();
}

inline int int_at(const ojson& j, const char* key, const char* where) {
  if (!j.contains(key) || !j.at(key).is_number_integer())
    throw ConfigError(std::string(where) + " needs an integer \"" + key + "\"");
  return j.at(key).get<int>();
}

inline cx complex_at(const ojson& j, const char* where) {
  if (j.is_number()) return cx(j.get<double>(), 0.0);
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError(std::string(where) + " must be [re, im]");
  return cx(j[0].get<double>(), j[1].get<double>());
}

}  // namespace detail

inline Strip strip_from_json(const ojson& j) {
  detail::require_keys(j, "strip", {"gamma", "order"});
  Strip s;
  s.gamma = detail::number_at(j, "gamma", "strip");
  s.order = detail::number_at(j, "order", "strip");
  if (!(s.order > 0.0)) throw ConfigError("strip order must be positive");
  return s;
}

inline Contour contour_from_json(const ojson& j) {
  detail::require_keys(j, "contour", {"kind", "center", "radius", "nodes"});
  if (!j.contains("kind") || !j.at("kind").is_string())
    throw ConfigError("contour needs a string \"kind\"");
  const std::string kind = j.at("kind").get<std::string>();
  const cx center = j.contains("center")
                        ? detail::complex_at(j.at("center"), "contour center")
                        : cx(0.0);
  const int nodes = j.contains("nodes") ? detail::int_at(j, "nodes", "contour")
                                        : 256;
  const ojson& r = j.contains("radius") ? j.at("radius") : ojson(1.0);
  if (kind == "circle") {
    if (!r.is_number()) throw ConfigError("circle radius must be a number");
    return Contour::circle(center, r.get<double>(), nodes);
  }
  const auto pair_of = [&](const char* what) {
    if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number())
      throw ConfigError(std::string(what) + " radius must be [rx, ry]");
    return std::pair<double, double>(r[0].get<double>(), r[1].get<double>());
  };
  if (kind == "ellipse") {
    const auto [rx, ry] = pair_of("ellipse");
    return Contour::ellipse(center, rx, ry, nodes);
  }
  if (kind == "rectangle") {
    const auto [hx, hy] = pair_of("rectangle");
    return Contour::rectangle(center, hx, hy, nodes);
  }
  throw ConfigError("contour kind must be circle, ellipse or rectangle");
}

inline void apply_tolerances(const ojson& j, RunConfig& cfg) {
  detail::require_keys(j, "tolerances",
                       {"rank_tol", "residual_tol", "match_tol",
                        "contour_nodes", "delta", "cutoff_a", "cutoff_b",
                        "pairing_cond_bound"});
  const auto num = [&](const char* key, double& slot) {
    if (j.contains(key)) slot = detail::number_at(j, key, "tolerances");
  };
  num("rank_tol", cfg.rank_tol);
  num("residual_tol", cfg.residual_tol);
  num("match_tol", cfg.match_tol);
  num("delta", cfg.delta);
  num("cutoff_a", cfg.cutoff_a);
  num("cutoff_b", cfg.cutoff_b);
  num("pairing_cond_bound", cfg.pairing_cond_bound);
  if (j.contains("contour_nodes"))
    cfg.contour_nodes = detail::int_at(j, "contour_nodes", "tolerances");
}

// Trig polynomial descriptors: {"const": c}, {"affine_sin": [a, b]},
// {"affine_cos": [a, b]} or {"harmonics": [[n, c], ...]} with c either a
// number or [re, im]. Exactly one form per entry.
inline TrigPoly trig_from_json(const ojson& j) {
  detail::require_keys(j, "trig entry",
                       {"const", "affine_sin", "affine_cos", "harmonics"});
  if (j.size() != 1)
    throw ConfigError("trig entry must use exactly one descriptor");
  if (j.contains("const"))
    return TrigPoly::constant(detail::complex_at(j.at("const"), "const"));
  const auto real_pair = [&](const char* key) {
    const ojson& a = j.at(key);
    if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
      throw ConfigError(std::string(key) + " takes [a, b]");
    return std::pair<double, double>(a[0].get<double>(), a[1].get<double>());
  };
  if (j.contains("affine_sin")) {
    const auto [a, b] = real_pair("affine_sin");
    return TrigPoly::affine_sin(a, b);
  }
  if (j.contains("affine_cos")) {
    const auto [a, b] = real_pair("affine_cos");
    return TrigPoly::affine_cos(a, b);
  }
  const ojson& h = j.at("harmonics");
  if (!h.is_array()) throw ConfigError("harmonics takes [[n, c], ...]");
  TrigPoly p;
  for (const ojson& term : h) {
    if (!term.is_array() || term.size() != 2 || !term[0].is_number_integer())
      throw ConfigError("harmonics takes [[n, c], ...]");
    p.add_term(term[0].get<int>(), detail::complex_at(term[1], "harmonic"));
  }
  return p;
}

inline ojson trig_to_json(const TrigPoly& p) {
  ojson h = ojson::array();
  for (const auto& [n, c] : p.coefficients())
    h.push_back(ojson::array({n, ojson::array({c.real(), c.imag()})}));
  ojson j;
  j["harmonics"] = std::move(h);
  return j;
}

inline TrigMat trig_matrix_from_json(const ojson& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty())
    throw ConfigError("matrix entries must be a non-empty array of rows");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  TrigMat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != cols)
      throw ConfigError("matrix rows must all have the same length");
    for (int k = 0; k < cols; ++k) m(i, k) = trig_from_json(j[i][k]);
  }
  return m;
}

// Operator description:
//   {"m": .., "rankE": .., "rankF": .., "gamma": .., "fiber": {..},
//    "coeffs": [{"k": .., "alpha": [..], "beta": [..], "matrix": ..}]}
// alpha and beta are multi-indices; the edge and the fiber are each
// one-dimensional here, so the lists hold at most one entry. The matrix slot
// is a list of {"xpow", "zfreq", "entries"} slices.
inline WedgeOperatorSpec operator_from_json(const ojson& j) {
  detail::require_keys(j, "operator",
                       {"m", "rankE", "rankF", "gamma", "fiber", "coeffs"});
  WedgeOperatorSpec spec;
  spec.m = detail::int_at(j, "m", "operator");
  spec.rank_e = detail::int_at(j, "rankE", "operator");
  spec.rank_f = detail::int_at(j, "rankF", "operator");
  spec.gamma = j.contains("gamma") ? detail::number_at(j, "gamma", "operator")
                                   : 0.0;
  if (j.contains("fiber")) {
    const ojson& f = j.at("fiber");
    detail::require_keys(f, "fiber", {"kind", "K", "c"});
    if (!f.contains("kind") || !f.at("kind").is_string())
      throw ConfigError("fiber needs a string \"kind\"");
    const std::string kind = f.at("kind").get<std::string>();
    if (kind == "point") {
      spec.fiber = FiberBasis::point();
    } else if (kind == "circle") {
      spec.fiber = FiberBasis::circle(detail::int_at(f, "K", "fiber"),
                                      detail::number_at(f, "c", "fiber"));
    } else {
      throw ConfigError("fiber kind must be point or circle");
    }
  }
  if (!j.contains("coeffs") || !j.at("coeffs").is_array())
    throw ConfigError("operator needs a \"coeffs\" array");
  const auto multi_index = [](const ojson& t, const char* key) {
    if (!t.contains(key)) return 0;
    const ojson& a = t.at(key);
    if (!a.is_array() || a.size() > 1)
      throw ConfigError(std::string(key) +
                        " must be a multi-index with at most one slot");
    if (a.empty()) return 0;
    if (!a[0].is_number_integer())
      throw ConfigError(std::string(key) + " entries must be integers");
    return a[0].get<int>();
  };
  for (const ojson& t : j.at("coeffs")) {
    detail::require_keys(t, "coefficient term", {"k", "alpha", "beta", "matrix"});
    WedgeTerm term;
    term.k = detail::int_at(t, "k", "coefficient term");
    term.alpha = multi_index(t, "alpha");
    term.beta = multi_index(t, "beta");
    if (!t.contains("matrix") || !t.at("matrix").is_array())
      throw ConfigError("coefficient term needs a \"matrix\" slice list");
    for (const ojson& slice : t.at("matrix")) {
      detail::require_keys(slice, "matrix slice", {"xpow", "zfreq", "entries"});
      const int xpow = slice.contains("xpow")
                           ? detail::int_at(slice, "xpow", "matrix slice")
                           : 0;
      const int zfreq = slice.contains("zfreq")
                            ? detail::int_at(slice, "zfreq", "matrix slice")
                            : 0;
      if (!slice.contains("entries"))
        throw ConfigError("matrix slice needs \"entries\"");
      const TrigMat m = trig_matrix_from_json(slice.at("entries"));
      if (m.rows() != spec.rank_f || m.cols() != spec.rank_e)
        throw ConfigError("matrix slice shape must be rankF x rankE");
      term.coeff.add(xpow, zfreq, m);
    }
    spec.terms.push_back(std::move(term));
  }
  spec.validate();
  return spec;
}

// ---------------------------------------------------------------------------
// Grid sample tables
// ---------------------------------------------------------------------------

// Columns: y, then one (re_j, im_j) pair per component. Rows must sit on the
// uniform grid y_j = 2 pi j / N in order; the norm routines require that.
struct SampleTable {
  std::vector<double> y;
  std::vector<Vec> u;

  int components() const { return u.empty() ? 0 : static_cast<int>(u[0].size()); }
};

inline SampleTable parse_samples_csv(const std::string& text) {
  const auto rows = csv_parse(text);
  if (rows.size() < 2) throw ConfigError("sample table needs a header and rows");
  const auto& header = rows[0];
  if (header.empty() || header[0] != "y" || header.size() % 2 == 0)
    throw ConfigError("sample table header must be y, re_0, im_0, ...");
  const int comp = static_cast<int>(header.size() / 2);
  const auto parse_num = [](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("sample table holds a non-numeric field \"" + s + "\"");
    }
  };
  SampleTable table;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != header.size())
      throw ConfigError("sample table row width does not match the header");
    table.y.push_back(parse_num(rows[r][0]));
    Vec v(comp);
    for (int c = 0; c < comp; ++c)
      v(c) = cx(parse_num(rows[r][1 + 2 * c]), parse_num(rows[r][2 + 2 * c]));
    table.u.push_back(std::move(v));
  }
  const int n = static_cast<int>(table.y.size());
  for (int j = 0; j < n; ++j)
    if (std::abs(table.y[j] - 2.0 * kPi * j / n) > 1e-9)
      throw ConfigError("sample rows must sit on the uniform circle grid");
  return table;
}

inline SampleTable load_samples_csv(const std::filesystem::path& path) {
  return parse_samples_csv(read_text_file(path));
}

}  // namespace wedgetrace
