// SPDX-License-Identifier: Apache-2.0
#pragma once

// Renderers behind the CLI subcommands. Each one maps resolved inputs to the
// final file content as a plain string, so outputs can be compared byte for
// byte across runs and thread counts; all parallelism goes through
// parallel_map with per-index slots and sequential emission.

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "wedgetrace/fixtures.hpp"
#include "wedgetrace/io.hpp"
#include "wedgetrace/pairing.hpp"
#include "wedgetrace/spectra.hpp"
#include "wedgetrace/trace.hpp"
#include "wedgetrace/varorder.hpp"

namespace wedgetrace {

// A named boundary family with everything the commands need: the strip, the
// operator order and a contour that encloses the strip spectrum for every y.
struct FamilyBundle {
  std::string label;
  MatrixPolyFamily family;
  Strip strip;
  int m = 1;
  Contour frame_contour = Contour::circle(cx(0.0), 1.0, 512);
};

inline FamilyBundle family_for_fixture(const std::string& name) {
  FamilyBundle out;
  out.label = name;
  if (name == "classical-m1" || name == "classical-m2") {
    const int m = name.back() - '0';
    const ClassicalExample ex = fixture_classical(m);
    out.family = classical_family(ex);
    out.strip = ex.strip();
    out.m = m;
    out.frame_contour = Contour::circle(cx(0.0, -0.5 * (m - 1)),
                                        0.4 + 0.5 * (m - 1), 512);
    return out;
  }
  if (name == "linebundle-generic" || name == "linebundle-crossing") {
    const LineBundleExample ex = name == "linebundle-generic"
                                     ? fixture_linebundle_generic()
                                     : fixture_linebundle_crossing();
    out.family = line_bundle_family(ex);
    out.strip = ex.strip();
    out.m = ex.m;
    out.frame_contour = Contour::circle(cx(0.0), 0.95, 512);
    return out;
  }
  if (name == "disk-witness")
    throw ConfigError(
        "disk-witness has no boundary family; use the fixture command");
  throw ConfigError("unknown fixture \"" + name + "\"");
}

// ---------------------------------------------------------------------------
// spectrum
// ---------------------------------------------------------------------------

inline std::string spectrum_csv(const FamilyBundle& fb, int grid_n,
                                const RunConfig& cfg) {
  const auto curves = spectrum_curve(fb.family, grid_n, fb.strip, cfg);
  std::string out = csv_row({"y", "re_sigma", "im_sigma", "mult", "partials",
                             "residual", "method", "curve_id",
                             "collision_flag"});
  for (const auto& c : curves)
    for (const auto& p : c.samples) {
      std::string partials;
      for (std::size_t i = 0; i < p.partials.size(); ++i) {
        if (i) partials += ';';
        partials += std::to_string(p.partials[i]);
      }
      bool collided = false;
      for (double yc : c.collisions)
        collided = collided || std::abs(yc - p.y) <= 1e-9;
      out += csv_row({fmt_g17(p.y), fmt_g17(p.sigma.real()),
                      fmt_g17(p.sigma.imag()), std::to_string(p.mult), partials,
                      fmt_g17(p.residual), p.method, std::to_string(c.curve_id),
                      collided ? "1" : "0"});
    }
  return out;
}

// ---------------------------------------------------------------------------
// frame
// ---------------------------------------------------------------------------

struct FrameArtifacts {
  std::string frame_json;
  std::string xdx_csv;
};

inline FrameArtifacts frame_artifacts(const FamilyBundle& fb, int grid_n,
                                      const RunConfig& cfg) {
  if (grid_n < 1) throw ConfigError("frame grid needs at least one point");
  const auto bases = parallel_map<std::vector<TraceElement>>(
      grid_n, cfg.threads, [&](std::size_t j) {
        return trace_fiber_basis(fb.family, 2.0 * kPi * j / grid_n, fb.strip,
                                 cfg);
      });

  ojson root;
  root["label"] = fb.label;
  root["grid"] = grid_n;
  ojson frames = ojson::array();
  std::string csv = csv_row({"y", "slot", "re_eig", "im_eig"});
  for (int j = 0; j < grid_n; ++j) {
    const double y = 2.0 * kPi * j / grid_n;
    ojson elements = ojson::array();
    for (const TraceElement& e : bases[j]) {
      ojson terms = ojson::array();
      for (const auto& t : e.terms) {
        ojson term;
        term["sigma"] = ojson::array({t.sigma.real(), t.sigma.imag()});
        term["ell"] = t.ell;
        ojson coeff = ojson::array();
        for (int i = 0; i < t.coeff.size(); ++i)
          coeff.push_back(ojson::array({t.coeff(i).real(), t.coeff(i).imag()}));
        term["coeff"] = std::move(coeff);
        terms.push_back(std::move(term));
      }
      elements.push_back(std::move(terms));
    }
    ojson frame;
    frame["y"] = y;
    frame["elements"] = std::move(elements);
    frames.push_back(std::move(frame));

    const Mat gen = xdx_endomorphism(bases[j], cfg.rank_tol);
    Eigen::ComplexEigenSolver<Mat> eig(gen, false);
    if (eig.info() != Eigen::Success)
      throw DegenerateFamily("eigenvalue iteration failed on the x d/dx action");
    std::vector<cx> vals(eig.eigenvalues().data(),
                         eig.eigenvalues().data() + gen.rows());
    std::sort(vals.begin(), vals.end(), [](cx a, cx b) {
      return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    for (std::size_t k = 0; k < vals.size(); ++k)
      csv += csv_row({fmt_g17(y), std::to_string(k), fmt_g17(vals[k].real()),
                      fmt_g17(vals[k].imag())});
  }
  root["frames"] = std::move(frames);

  FrameArtifacts out;
  out.frame_json = root.dump(2) + "\n";
  out.xdx_csv = std::move(csv);
  return out;
}

// ---------------------------------------------------------------------------
// pairing
// ---------------------------------------------------------------------------

struct PairingArtifacts {
  std::string pairing_csv;
  std::string smoothness_json;
};

inline PairingArtifacts pairing_artifacts(const FamilyBundle& fb, int grid_n,
                                          const RunConfig& cfg) {
  if (grid_n < 3) throw ConfigError("pairing grid needs at least three points");
  const MatrixPolyFamily adj = adjoint_family(fb.family, fb.m);
  const Strip adj_strip = adjoint_strip(fb.strip);
  const Cutoff w(cfg.cutoff_a, cfg.cutoff_b);
  const LogGrid grid(0.02, std::max(1.0, cfg.cutoff_b + 0.1), 24, 8);

  // The pointwise frames double as the second frame of the smoothness test,
  // against the frame continued from the first grid angle past a collision.
  TraceFrame assembled, adjoint_frame;
  assembled.provenance = "pointwise";
  struct Row {
    std::vector<TraceElement> basis, adj;
    PairingMatrix pm;
  };
  const auto rows = parallel_map<Row>(grid_n, cfg.threads, [&](std::size_t j) {
    const double y = 2.0 * kPi * j / grid_n;
    Row r;
    r.basis = trace_fiber_basis(fb.family, y, fb.strip, cfg);
    r.adj = trace_fiber_basis(adj, y, adj_strip, cfg);
    r.pm = pairing_matrix(fb.family, y, r.basis, r.adj, w, grid);
    return r;
  });

  std::string csv = csv_row({"y", "row", "col", "re_g", "im_g", "cond"});
  for (int j = 0; j < grid_n; ++j) {
    const double y = 2.0 * kPi * j / grid_n;
    const Mat& g = rows[j].pm.G;
    for (int r = 0; r < g.rows(); ++r)
      for (int c = 0; c < g.cols(); ++c)
        csv += csv_row({fmt_g17(y), std::to_string(r), std::to_string(c),
                        fmt_g17(g(r, c).real()), fmt_g17(g(r, c).imag()),
                        fmt_g17(rows[j].pm.cond)});
    assembled.y.push_back(y);
    assembled.elements.push_back(rows[j].basis);
    adjoint_frame.y.push_back(y);
    adjoint_frame.elements.push_back(rows[j].adj);
  }

  const TraceFrame cont = frame_continuation(fb.family, 2.0 * kPi / grid_n,
                                             grid_n, fb.frame_contour, cfg);
  const SmoothnessReport rep = transition_smoothness(
      fb.family, assembled, cont, adjoint_frame, w, grid, cfg);

  ojson j;
  j["label"] = fb.label;
  j["grid"] = grid_n;
  j["max_second_diff"] = rep.max_second_diff;
  ojson entry = ojson::array();
  for (int r = 0; r < rep.second_diff.rows(); ++r) {
    ojson row = ojson::array();
    for (int c = 0; c < rep.second_diff.cols(); ++c)
      row.push_back(rep.second_diff(r, c));
    entry.push_back(std::move(row));
  }
  j["entry_second_diff"] = std::move(entry);
  ojson conds = ojson::array();
  for (int k = 0; k < grid_n; ++k) conds.push_back(rows[k].pm.cond);
  j["condition_numbers"] = std::move(conds);

  PairingArtifacts out;
  out.pairing_csv = std::move(csv);
  out.smoothness_json = j.dump(2) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// symbol estimates and variable-order norms
// ---------------------------------------------------------------------------

inline EndomorphismField field_from_json(const ojson& j) {
  detail::require_keys(j, "field", {"entries"});
  if (!j.contains("entries"))
    throw ConfigError("field needs an \"entries\" matrix");
  const TrigMat m = trig_matrix_from_json(j.at("entries"));
  if (m.rows() != m.cols())
    throw ConfigError("field entries must form a square matrix");
  return EndomorphismField(m);
}

inline BracketMetric metric_from_json(const ojson& j) {
  detail::require_keys(j, "metric", {"g"});
  if (!j.contains("g")) throw ConfigError("metric needs a \"g\" entry");
  return BracketMetric(trig_from_json(j.at("g")));
}

inline std::string estimate_csv(const EndomorphismField& field,
                                const BracketMetric& metric, double delta,
                                int alpha_max, int beta_max, double y0,
                                int nodes) {
  const auto rows =
      symbol_estimate_check(field, metric, delta, alpha_max, beta_max, y0,
                            nodes);
  std::string out =
      csv_row({"alpha", "beta", "fitted_slope", "bound", "constant", "pass"});
  for (const auto& r : rows)
    out += csv_row({std::to_string(r.alpha), std::to_string(r.beta),
                    fmt_g17(r.slope), fmt_g17(r.bound), fmt_g17(r.constant),
                    r.pass ? "1" : "0"});
  return out;
}

inline std::string norm_json(const SampleTable& samples,
                             const EndomorphismField& field,
                             const BracketMetric& metric, double s,
                             bool trace_scale, int nodes) {
  const double norm =
      trace_scale ? trace_sobolev_norm(samples.u, field, metric, s, nodes)
                  : varorder_norm(samples.u, field, metric, s, nodes);
  ojson j;
  j["kind"] = trace_scale ? "trace" : "varorder";
  j["samples"] = static_cast<int>(samples.u.size());
  j["components"] = samples.components();
  j["s"] = s;
  j["norm"] = norm;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// fixture descriptions
// ---------------------------------------------------------------------------

namespace detail {

inline ojson trig_mat_to_json(const TrigMat& m) {
  ojson rows = ojson::array();
  for (int i = 0; i < m.rows(); ++i) {
    ojson row = ojson::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(trig_to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

inline std::string fixture_json(const std::string& name) {
  ojson j;
  j["name"] = name;
  if (name == "classical-m1" || name == "classical-m2") {
    const ClassicalExample ex = fixture_classical(name.back() - '0');
    j["kind"] = "classical";
    j["m"] = ex.m;
    j["r"] = ex.r;
    j["gamma"] = ex.gamma;
    j["top"] = detail::trig_mat_to_json(ex.a);
  } else if (name == "linebundle-generic" || name == "linebundle-crossing") {
    const LineBundleExample ex = name == "linebundle-generic"
                                     ? fixture_linebundle_generic()
                                     : fixture_linebundle_crossing();
    j["kind"] = "linebundle";
    j["m"] = ex.m;
    j["gamma"] = ex.gamma;
    j["lambda"] = ex.lambda;
    ojson phi;
    phi["phi11"] = trig_to_json(ex.phi11);
    phi["phi12"] = trig_to_json(ex.phi12);
    phi["phi21"] = trig_to_json(ex.phi21);
    phi["phi22"] = trig_to_json(ex.phi22);
    j["phi"] = std::move(phi);
    j["validated_regime"] = ex.in_validated_regime();
  } else if (name == "disk-witness") {
    j["kind"] = "disk-witness";
    ojson rayleigh = ojson::array();
    for (int N : {8, 16, 32, 64}) {
      const DiskWitnessResult w = disk_norm_witness(N);
      ojson row;
      row["N"] = N;
      row["c_min"] = w.c_min;
      row["c_max"] = w.c_max;
      rayleigh.push_back(std::move(row));
    }
    j["rayleigh"] = std::move(rayleigh);
    ojson ratios = ojson::array();
    for (int n : {1, 2, 4, 8, 16, 32}) {
      ojson row;
      row["n"] = n;
      row["ratio"] = disk_graph_ratio(n);
      ratios.push_back(std::move(row));
    }
    j["graph_ratio"] = std::move(ratios);
  } else {
    throw ConfigError("unknown fixture \"" + name + "\"");
  }
  return j.dump(2) + "\n";
}

}  // namespace wedgetrace
