// Command-line front end: synthetic scene export, single two-correspondence
// solves, the full estimation loop, and RANSAC budgets.
//
// Exit codes: 0 success, 2 bad arguments or unreadable input, 3 estimation
// failure.

#include <CLI11.hpp>

#include <array>
#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "twoac/harness.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kParseFailure = 2;
constexpr int kEstimationFailure = 3;

struct SynthArgs {
  twoac::SceneConfig scene;
  std::string out;
  std::string truth;
};

struct InputArgs {
  std::string path;
  std::array<double, 2> principal_point{0.0, 0.0};
};

struct SolveArgs {
  InputArgs input;
  std::array<std::size_t, 2> pair{0, 1};
  double min_focal = twoac::FocalLimits{}.min_f;
  double max_focal = twoac::FocalLimits{}.max_f;
};

struct EstimateArgs {
  InputArgs input;
  twoac::EstimationConfig cfg;
  double min_focal = twoac::FocalLimits{}.min_f;
  double max_focal = twoac::FocalLimits{}.max_f;
  double ground_truth = 0.0;
  std::string report;
  std::string density;
};

struct RansacArgs {
  std::vector<int> sizes{2, 5, 6, 7, 8};
  std::vector<double> ratios{0.25, 0.5, 0.75, 0.8};
  double confidence = 0.95;
};

void add_input(CLI::App* cmd, InputArgs& in) {
  cmd->add_option("-i,--input", in.path, "Correspondence file: u1 v1 u2 v2 a1 a2 a3 a4 per line")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--principal-point", in.principal_point, "Principal point (cx cy) subtracted from every point");
}

// Loads the input; parse and I/O problems are reported and mapped to exit 2.
bool load(const InputArgs& in, std::vector<twoac::AffineCorrespondence>& out) {
  try {
    auto loaded = twoac::load_correspondences(in.path, in.principal_point[0], in.principal_point[1]);
    if (!loaded.singular_lines.empty()) {
      std::cerr << "warning: skipped " << loaded.singular_lines.size() << " line(s) with a singular affinity\n";
    }
    out = std::move(loaded.correspondences);
    return true;
  } catch (const twoac::Error& e) {
    std::cerr << "error: " << in.path << ": " << e.what() << '\n';
    return false;
  }
}

void print_matrix(const twoac::Mat3& m) {
  for (int r = 0; r < 3; ++r) std::printf("  % .12e % .12e % .12e\n", m(r, 0), m(r, 1), m(r, 2));
}

int run_synth(const SynthArgs& args) {
  const twoac::SyntheticScene scene = twoac::generate(args.scene);
  const auto acs = scene.measured();
  if (args.out.empty() || args.out == "-") {
    twoac::write_correspondences(std::cout, acs);
  } else {
    twoac::save_correspondences(args.out, acs);
  }
  if (!args.truth.empty()) twoac::detail::write_text(args.truth, twoac::ground_truth_json(scene).dump(2) + "\n");
  return kOk;
}

int run_solve(const SolveArgs& args) {
  std::vector<twoac::AffineCorrespondence> acs;
  if (!load(args.input, acs)) return kParseFailure;
  const auto [i, j] = args.pair;
  if (i >= acs.size() || j >= acs.size() || i == j) {
    std::cerr << "error: --pair needs two distinct indices below " << acs.size() << '\n';
    return kParseFailure;
  }
  const twoac::FocalLimits limits(args.min_focal, args.max_focal);
  const std::array<twoac::AffineCorrespondence, 2> pair{acs[i], acs[j]};
  const auto candidates = twoac::solve_two_ac(pair[0], pair[1]);
  const auto survivors = twoac::gate_candidates(candidates, pair, limits);

  std::printf("%-4s %-18s %-14s %-9s %-9s\n", "#", "focal", "trace_res", "physical", "observed");
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const auto& c = candidates[k];
    bool observed = false;
    if (limits.contains(c.f)) {
      try {
        observed = twoac::gate_observability(c, pair).pass;
      } catch (const twoac::Error&) {
      }
    }
    std::printf("%-4zu %-18.10f %-14.3e %-9s %-9s\n", k, c.f, c.trace_residual, limits.contains(c.f) ? "yes" : "no",
                observed ? "yes" : "no");
  }
  std::printf("%zu of %zu candidates pass both gates\n", survivors.size(), candidates.size());
  return kOk;
}

int run_estimate(EstimateArgs& args) {
  std::vector<twoac::AffineCorrespondence> acs;
  if (!load(args.input, acs)) return kParseFailure;
  args.cfg.limits = twoac::FocalLimits(args.min_focal, args.max_focal);
  if (args.ground_truth > 0.0) args.cfg.ground_truth_focal = args.ground_truth;

  const twoac::EstimationResult r = twoac::estimate(acs, args.cfg);
  std::printf("focal %.10f\n", r.focal);
  std::printf("median_shift %.10f\n", r.median_shift_focal);
  std::printf("kernel_voting %.10f\n", r.kernel_voting_focal);
  std::printf("pool %zu\n", r.pool.size());
  std::printf("F\n");
  print_matrix(r.F.matrix());
  if (!args.report.empty()) twoac::emit_report(r, args.cfg, args.report, args.density);
  return kOk;
}

int run_ransac(const RansacArgs& args) {
  std::printf("%-8s", "outliers");
  for (int m : args.sizes) std::printf(" %12d", m);
  std::printf("\n");
  for (double eps : args.ratios) {
    std::printf("%-8.2f", eps);
    for (int m : args.sizes) {
      std::printf(" %12lld", static_cast<long long>(twoac::ransac_iterations(m, eps, args.confidence)));
    }
    std::printf("\n");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Focal length and fundamental matrix from two affine correspondences"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic scene and export its correspondences");
  synth_cmd->add_option("--seed", synth.scene.seed, "RNG seed");
  synth_cmd->add_option("--focal", synth.scene.focal, "Ground-truth focal length (px)")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--sigma", synth.scene.noise_sigma, "Point noise standard deviation (px)")
      ->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--outliers", synth.scene.outlier_fraction, "Outlier fraction in [0, 1)")
      ->check(CLI::Range(0.0, 0.999999));
  synth_cmd->add_option("--planes", synth.scene.plane_count, "Number of planes")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--samples-per-plane", synth.scene.samples_per_plane, "Correspondences per plane")
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--aspect", synth.scene.aspect_ratio, "Vertical scale applied to image 2")
      ->check(CLI::PositiveNumber);
  const std::map<std::string, twoac::AffinityNoise> noise_modes{{"recompute", twoac::AffinityNoise::Recompute},
                                                                {"additive", twoac::AffinityNoise::Additive},
                                                                {"both", twoac::AffinityNoise::Both}};
  synth_cmd->add_option("--affinity-noise", synth.scene.affinity_noise, "recompute, additive or both")
      ->transform(CLI::CheckedTransformer(noise_modes, CLI::ignore_case));
  synth_cmd->add_option("--affinity-noise-scale", synth.scene.affinity_noise_scale,
                        "Additive affinity noise per pixel of sigma");
  synth_cmd->add_option("-o,--out", synth.out, "Correspondence output file (default stdout)");
  synth_cmd->add_option("--truth", synth.truth, "Ground-truth JSON output file");

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Solve one pair and list every candidate with its gate flags");
  add_input(solve_cmd, solve.input);
  solve_cmd->add_option("--pair", solve.pair, "Zero-based indices of the two correspondences");
  solve_cmd->add_option("--min-focal", solve.min_focal, "Smallest plausible focal length (px)");
  solve_cmd->add_option("--max-focal", solve.max_focal, "Largest plausible focal length (px)");

  EstimateArgs est;
  auto* est_cmd = app.add_subcommand("estimate", "Run the sampling loop and select the focal length");
  add_input(est_cmd, est.input);
  est_cmd->add_option("--iterations", est.cfg.iterations, "Number of sampled pairs")->check(CLI::PositiveNumber);
  est_cmd->add_option("--bandwidth", est.cfg.selection.bandwidth, "Kernel bandwidth in the voting domain")
      ->check(CLI::PositiveNumber);
  est_cmd->add_option("--ascent-iterations", est.cfg.selection.max_iterations, "Density ascent iteration cap")
      ->check(CLI::PositiveNumber);
  est_cmd->add_option("--seed", est.cfg.seed, "RNG seed");
  est_cmd->add_option("--min-focal", est.min_focal, "Smallest plausible focal length (px)");
  est_cmd->add_option("--max-focal", est.max_focal, "Largest plausible focal length (px)");
  est_cmd->add_option("--inlier-threshold", est.cfg.inlier_threshold, "Sampson distance for supporting F (px)")
      ->check(CLI::PositiveNumber);
  const std::map<std::string, twoac::VotingDomain> domains{{"focal", twoac::VotingDomain::Focal},
                                                           {"relative", twoac::VotingDomain::Relative}};
  est_cmd->add_option("--domain", est.cfg.domain, "Voting domain: focal (px) or relative (% error)")
      ->transform(CLI::CheckedTransformer(domains, CLI::ignore_case));
  est_cmd->add_option("--ground-truth-focal", est.ground_truth, "Reference focal length for the relative domain")
      ->check(CLI::PositiveNumber);
  est_cmd->add_option("--report", est.report, "JSON report output file");
  est_cmd->add_option("--density", est.density, "Density curve CSV output file")->needs("--report");

  RansacArgs ransac;
  auto* ransac_cmd = app.add_subcommand("ransac-iters", "Print RANSAC iteration budgets");
  ransac_cmd->add_option("-m,--sample-size", ransac.sizes, "Minimal sample sizes (columns)")
      ->check(CLI::PositiveNumber);
  ransac_cmd->add_option("-e,--outlier-ratio", ransac.ratios, "Outlier ratios (rows)")->check(CLI::Range(0.0, 0.999999));
  ransac_cmd->add_option("-c,--confidence", ransac.confidence, "Success probability")->check(CLI::Range(1e-9, 1.0 - 1e-9));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kParseFailure;
  }

  try {
    if (*synth_cmd) return run_synth(synth);
    if (*solve_cmd) return run_solve(solve);
    if (*est_cmd) return run_estimate(est);
    return run_ransac(ransac);
  } catch (const twoac::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == twoac::ErrorCode::InvalidArgument ? kParseFailure : kEstimationFailure;
  }
}
