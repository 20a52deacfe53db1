#pragma once

// Robust focal-length estimation over many minimal samples, plus the text and
// JSON formats the command-line tool reads and writes.

#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "twoac/error.hpp"
#include "twoac/geometry.hpp"
#include "twoac/root_gate.hpp"
#include "twoac/selection.hpp"
#include "twoac/solver.hpp"
#include "twoac/synth.hpp"

namespace twoac {

enum class VotingDomain {
  Focal,     // pixels
  Relative,  // percent error against a known focal length
};

struct EstimationConfig {
  int iterations = 100;
  SelectionConfig selection;
  FocalLimits limits;
  // Subtracted from both images' coordinates before solving.
  double cx = 0.0, cy = 0.0;
  std::uint64_t seed = 0;
  VotingDomain domain = VotingDomain::Focal;
  std::optional<double> ground_truth_focal;
  // Sampson distance (px) below which a correspondence supports a candidate F.
  double inlier_threshold = 3.0;

  double to_domain(double f) const {
    return domain == VotingDomain::Focal ? f : 100.0 * (f - *ground_truth_focal) / *ground_truth_focal;
  }
  double from_domain(double v) const {
    return domain == VotingDomain::Focal ? v : *ground_truth_focal * (1.0 + v / 100.0);
  }
  void validate() const {
    if (iterations < 1) throw Error(ErrorCode::InvalidArgument, "iteration limit must be at least 1");
    if (!(inlier_threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "inlier threshold must be positive");
    selection.validate();
    if (domain == VotingDomain::Relative && !(ground_truth_focal && *ground_truth_focal > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "relative voting needs a positive ground-truth focal length");
    }
  }
};

struct SampleDiagnostic {
  std::size_t sample = 0;
  std::size_t first = 0, second = 0;
  std::size_t roots = 0;
  std::size_t physical = 0;
  std::size_t survivors = 0;
  std::optional<ErrorCode> error;
  std::string message;
};

struct DensityPoint {
  double x = 0.0;  // voting domain
  double density = 0.0;
};

struct EstimationResult {
  double focal = 0.0;
  FundamentalMatrix F;
  CandidateSolution selected;
  // Median-Shift mode before ascent, and the kernel-voting baseline, in
  // pixels.
  double median_shift_focal = 0.0;
  double kernel_voting_focal = 0.0;
  CandidatePool pool;
  std::vector<SampleDiagnostic> diagnostics;
  std::vector<DensityPoint> density;
};

namespace detail {

inline std::vector<DensityPoint> density_curve(std::span<const double> values, double h, std::size_t count = 512) {
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  double lo = *mn, hi = *mx;
  if (hi - lo < 1e-12 * std::max(1.0, std::abs(lo))) {
    lo -= 3.0 * h;
    hi += 3.0 * h;
  }
  std::vector<DensityPoint> curve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    curve[i] = {x, kde(values, x, h)};
  }
  return curve;
}

inline std::size_t support(const FundamentalMatrix& F, std::span<const AffineCorrespondence> acs, double threshold) {
  std::size_t n = 0;
  for (const AffineCorrespondence& ac : acs) n += sampson_distance(F, ac.points) <= threshold ? 1 : 0;
  return n;
}

inline AffineCorrespondence centered(AffineCorrespondence ac, double cx, double cy) {
  ac.points.u1 -= cx;
  ac.points.v1 -= cy;
  ac.points.u2 -= cx;
  ac.points.v2 -= cy;
  return ac;
}

}  // namespace detail

// Draws `iterations` pairs of distinct correspondences, solves and gates each
// one, pools the survivors, and selects the focal length by Median-Shift
// followed by kernel-density ascent. Samples run in index order, so the result
// is a pure function of the inputs and the seed.
inline EstimationResult estimate(std::span<const AffineCorrespondence> input, const EstimationConfig& cfg = {}) {
  cfg.validate();
  if (input.size() < 2) {
    throw Error(ErrorCode::InsufficientCorrespondences, "need at least two correspondences");
  }
  std::vector<AffineCorrespondence> acs;
  acs.reserve(input.size());
  for (const auto& ac : input) acs.push_back(detail::centered(ac, cfg.cx, cfg.cy));

  EstimationResult result;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> pick_first(0, acs.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_second(0, acs.size() - 2);

  for (int s = 0; s < cfg.iterations; ++s) {
    SampleDiagnostic diag;
    diag.sample = static_cast<std::size_t>(s);
    diag.first = pick_first(rng);
    diag.second = pick_second(rng);
    if (diag.second >= diag.first) ++diag.second;

    const std::array<AffineCorrespondence, 2> pair{acs[diag.first], acs[diag.second]};
    try {
      const std::vector<CandidateSolution> roots = solve_two_ac(pair[0], pair[1]);
      diag.roots = roots.size();
      diag.physical = gate_physical(roots, cfg.limits).size();
      for (CandidateSolution& c : gate_candidates(roots, pair, cfg.limits)) {
        result.pool.entries.push_back({c.f, cfg.to_domain(c.f), diag.sample, c});
        ++diag.survivors;
      }
    } catch (const Error& err) {
      diag.error = err.code();
      diag.message = err.what();
    }
    result.diagnostics.push_back(std::move(diag));
  }

  if (result.pool.empty()) {
    throw Error(ErrorCode::NoSurvivingRoots, "no candidate survived the gates");
  }

  const std::vector<double> values = result.pool.values();
  const double mode = median_shift(values, cfg.selection);
  const double refined = kde_gradient_ascent(mode, values, cfg.selection);
  result.median_shift_focal = cfg.from_domain(mode);
  result.focal = std::clamp(cfg.from_domain(refined), cfg.limits.min_f, cfg.limits.max_f);
  result.kernel_voting_focal = cfg.from_domain(kernel_voting(values, cfg.selection));
  result.density = detail::density_curve(values, cfg.selection.bandwidth);

  // F comes from the candidate within one bandwidth of the estimate that the
  // most correspondences support; ties go to the nearest focal, then to the
  // lower trace residual. With no candidate in range the nearest one is used.
  const double centre = cfg.to_domain(result.focal);
  const PoolEntry* chosen = nullptr;
  std::size_t best_support = 0;
  for (const PoolEntry& e : result.pool.entries) {
    const bool in_window = std::abs(e.value - centre) <= cfg.selection.bandwidth;
    const std::size_t support = in_window ? detail::support(e.candidate.F, acs, cfg.inlier_threshold) : 0;
    if (chosen == nullptr) {
      chosen = &e;
      best_support = support;
      continue;
    }
    const double de = std::abs(e.focal - result.focal);
    const double db = std::abs(chosen->focal - result.focal);
    if (support != best_support) {
      if (support > best_support) {
        chosen = &e;
        best_support = support;
      }
    } else if (de < db || (de == db && e.candidate.trace_residual < chosen->candidate.trace_residual)) {
      chosen = &e;
    }
  }
  result.selected = chosen->candidate;
  result.F = chosen->candidate.F;
  return result;
}

// Iterations needed to draw one all-inlier sample of size m with the given
// confidence. Inlier probabilities indistinguishable from 1 give 1; ones that
// underflow give the largest representable budget.
inline std::int64_t ransac_iterations(int sample_size, double outlier_ratio, double confidence = 0.95) {
  if (sample_size < 1) throw Error(ErrorCode::InvalidArgument, "sample size must be at least 1");
  if (!(outlier_ratio >= 0.0 && outlier_ratio < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "outlier ratio must lie in [0, 1)");
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "confidence must lie in (0, 1)");
  }
  constexpr auto saturated = std::numeric_limits<std::int64_t>::max();
  const double good = std::exp(sample_size * std::log1p(-outlier_ratio));
  if (good >= 1.0 - 1e-15) return 1;
  const double denom = std::log1p(-good);
  if (!(good > 0.0) || denom == 0.0) return saturated;
  const double n = std::ceil(std::log1p(-confidence) / denom);
  if (!(n < static_cast<double>(saturated))) return saturated;
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(n));
}

// ---------------------------------------------------------------------------
// Text and JSON I/O

struct LoadedCorrespondences {
  std::vector<AffineCorrespondence> correspondences;
  // 1-based lines whose affinity was singular; those lines are skipped.
  std::vector<std::size_t> singular_lines;
};

namespace detail {

inline double parse_double(std::string_view token, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(line, "not a number: '" + std::string(token) + "'");
  }
  if (!std::isfinite(v)) throw ParseError(line, "non-finite value: '" + std::string(token) + "'");
  return v;
}

inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace detail

// One correspondence per line: u1 v1 u2 v2 a1 a2 a3 a4. Blank lines and lines
// starting with '#' are ignored; CRLF endings are accepted.
inline LoadedCorrespondences parse_correspondences(std::istream& in, double cx = 0.0, double cy = 0.0) {
  LoadedCorrespondences out;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    const auto start = text.find_first_not_of(" \t");
    if (start == std::string::npos || text[start] == '#') continue;

    std::array<double, 8> v{};
    std::size_t count = 0;
    std::size_t pos = start;
    while (pos < text.size()) {
      const auto end = text.find_first_of(" \t", pos);
      const std::string_view token(text.data() + pos, (end == std::string::npos ? text.size() : end) - pos);
      if (count == v.size()) throw ParseError(line_no, "more than 8 fields");
      v[count++] = detail::parse_double(token, line_no);
      pos = text.find_first_not_of(" \t", token.size() + pos);
      if (pos == std::string::npos) break;
    }
    if (count != v.size()) throw ParseError(line_no, "expected 8 fields, found " + std::to_string(count));

    AffineCorrespondence ac{{v[0] - cx, v[1] - cy, v[2] - cx, v[3] - cy}, {v[4], v[5], v[6], v[7]}};
    if (!ac.affinity.invertible()) {
      out.singular_lines.push_back(line_no);
      continue;
    }
    out.correspondences.push_back(ac);
  }
  return out;
}

inline LoadedCorrespondences load_correspondences(const std::filesystem::path& path, double cx = 0.0,
                                                  double cy = 0.0) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return parse_correspondences(in, cx, cy);
}

// Shortest round-trip decimal form, so a reload reproduces every bit.
inline void write_correspondences(std::ostream& out, std::span<const AffineCorrespondence> acs) {
  out << "# u1 v1 u2 v2 a1 a2 a3 a4\n";
  for (const AffineCorrespondence& ac : acs) {
    const std::array<double, 8> v{ac.points.u1, ac.points.v1, ac.points.u2, ac.points.v2,
                                  ac.affinity.a1, ac.affinity.a2, ac.affinity.a3, ac.affinity.a4};
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << detail::format_double(v[i]);
    out << '\n';
  }
}

inline void save_correspondences(const std::filesystem::path& path, std::span<const AffineCorrespondence> acs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_correspondences(out, acs);
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

namespace detail {

inline nlohmann::json row_major_json(const Mat3& m) {
  nlohmann::json a = nlohmann::json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) a.push_back(m(r, c));
  return a;
}

inline nlohmann::json vec_json(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace detail

// {"f", "F" (row-major), "pose": {"R", "t"}, "normals", "points", "outliers"}
// for a synthetic scene; normals and points are per correspondence in camera-1
// coordinates with unit baseline.
inline nlohmann::json ground_truth_json(const SyntheticScene& scene) {
  nlohmann::json j;
  j["f"] = scene.K.f;
  j["F"] = detail::row_major_json(scene.F.matrix());
  j["pose"] = {{"R", detail::row_major_json(scene.pose.rotation)}, {"t", detail::vec_json(scene.pose.translation)}};
  nlohmann::json normals = nlohmann::json::array(), points = nlohmann::json::array(),
                 outliers = nlohmann::json::array();
  for (std::size_t i = 0; i < scene.correspondences.size(); ++i) {
    const auto& c = scene.correspondences[i];
    normals.push_back(detail::vec_json(c.truth.n));
    points.push_back(detail::vec_json(c.truth.q));
    if (c.outlier) outliers.push_back(i);
  }
  j["normals"] = std::move(normals);
  j["points"] = std::move(points);
  j["outliers"] = std::move(outliers);
  j["seed"] = scene.config.seed;
  j["noise_sigma"] = scene.config.noise_sigma;
  return j;
}

inline nlohmann::json report_json(const EstimationResult& result, const EstimationConfig& cfg) {
  if (result.pool.empty()) throw Error(ErrorCode::EmptyPool, "nothing to report");
  nlohmann::json j;
  j["focal"] = result.focal;
  j["F"] = detail::row_major_json(result.F.matrix());
  j["median_shift_focal"] = result.median_shift_focal;
  j["kernel_voting_focal"] = result.kernel_voting_focal;
  j["seed"] = cfg.seed;

  nlohmann::json config;
  config["iterations"] = cfg.iterations;
  config["bandwidth"] = cfg.selection.bandwidth;
  config["max_ascent_iterations"] = cfg.selection.max_iterations;
  config["min_focal"] = cfg.limits.min_f;
  config["max_focal"] = cfg.limits.max_f;
  config["principal_point"] = {cfg.cx, cfg.cy};
  config["inlier_threshold"] = cfg.inlier_threshold;
  config["domain"] = cfg.domain == VotingDomain::Focal ? "focal" : "relative";
  if (cfg.ground_truth_focal) config["ground_truth_focal"] = *cfg.ground_truth_focal;
  j["config"] = std::move(config);

  nlohmann::json pool = nlohmann::json::array();
  for (const PoolEntry& e : result.pool.entries) {
    pool.push_back({{"sample", e.sample},
                    {"focal", e.focal},
                    {"value", e.value},
                    {"trace_residual", e.candidate.trace_residual}});
  }
  j["pool"] = std::move(pool);

  std::size_t failed = 0;
  for (const SampleDiagnostic& d : result.diagnostics) failed += d.error ? 1 : 0;
  j["samples"] = {{"total", result.diagnostics.size()}, {"failed", failed}};
  return j;
}

inline std::string density_csv(const EstimationResult& result) {
  std::string out = "x,density\n";
  for (const DensityPoint& p : result.density) {
    out += detail::format_double(p.x) + "," + detail::format_double(p.density) + "\n";
  }
  return out;
}

// Writes the JSON report and, if a path is given, the density CSV. Nothing is
// written when the pool is empty.
inline void emit_report(const EstimationResult& result, const EstimationConfig& cfg,
                        const std::filesystem::path& json_path, const std::filesystem::path& csv_path = {}) {
  const std::string json = report_json(result, cfg).dump(2) + "\n";
  const std::string csv = density_csv(result);
  detail::write_text(json_path, json);
  if (!csv_path.empty()) detail::write_text(csv_path, csv);
}

}  // namespace twoac
