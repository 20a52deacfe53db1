#pragma once

// Candidate elimination. A root survives if its focal length is physically
// plausible and, for every correspondence of the sample, the surface patch
// implied by the candidate is seen from the front by both cameras.

#include <span>
#include <vector>

#include "twoac/error.hpp"
#include "twoac/geometry.hpp"
#include "twoac/solver.hpp"

namespace twoac {

struct FocalLimits {
  double min_f = 100.0;
  double max_f = 500000.0;

  FocalLimits() = default;
  FocalLimits(double lo, double hi) : min_f(lo), max_f(hi) {
    if (!(lo > 0.0) || !(lo < hi)) {
      throw Error(ErrorCode::InvalidArgument, "focal limits need 0 < min < max");
    }
  }

  bool contains(double f) const { return f >= min_f && f <= max_f; }
};

struct ObservabilityEntry {
  Vec3 q = Vec3::Zero();
  Vec3 n = Vec3::Zero();
  double dot1 = 0.0;  // n . (c1 - q)
  double dot2 = 0.0;  // n . (c2 - q)
  double depth1 = 0.0;
  double depth2 = 0.0;
  bool pass = false;
};

struct ObservabilityReport {
  std::vector<ObservabilityEntry> entries;
  bool cheirality_failed = false;
  bool pass = true;
};

inline std::vector<CandidateSolution> gate_physical(const std::vector<CandidateSolution>& candidates,
                                                    const FocalLimits& limits = {}) {
  std::vector<CandidateSolution> kept;
  kept.reserve(candidates.size());
  for (const CandidateSolution& c : candidates) {
    if (limits.contains(c.f)) kept.push_back(c);
  }
  return kept;
}

// The per-correspondence test for a known pose. A point behind either camera
// fails regardless of its normal: negating t mirrors both q and n, which
// leaves the two dot products unchanged.
inline ObservabilityEntry observe(const RelativePose& pose, const CameraIntrinsics& K,
                                  const AffineCorrespondence& ac) {
  ObservabilityEntry e;
  e.q = triangulate(pose, K, ac.points);
  e.n = estimate_normal(pose, K, ac, e.q);
  e.dot1 = e.n.dot(pose.center1() - e.q);
  e.dot2 = e.n.dot(pose.center2() - e.q);
  e.depth1 = e.q.z();
  e.depth2 = (pose.rotation * e.q + pose.translation).z();
  e.pass = e.dot1 > 0.0 && e.dot2 > 0.0 && e.depth1 > 0.0 && e.depth2 > 0.0;
  return e;
}

inline ObservabilityReport observability_report(const RelativePose& pose, const CameraIntrinsics& K,
                                                std::span<const AffineCorrespondence> acs) {
  ObservabilityReport report;
  for (const AffineCorrespondence& ac : acs) {
    report.entries.push_back(observe(pose, K, ac));
    report.pass = report.pass && report.entries.back().pass;
  }
  return report;
}

// Recovers the pose implied by (F, f) and tests each correspondence. An empty
// list passes vacuously; a pose with no point in front of both cameras fails.
inline ObservabilityReport gate_observability(const CandidateSolution& candidate,
                                              std::span<const AffineCorrespondence> acs) {
  if (acs.empty()) return {};
  const CameraIntrinsics K(candidate.f);
  std::vector<PointPair> points;
  points.reserve(acs.size());
  for (const AffineCorrespondence& ac : acs) points.push_back(ac.points);

  RelativePose pose;
  try {
    pose = decompose_essential(f_to_e(candidate.F, K), points, K);
  } catch (const Error& err) {
    if (err.code() != ErrorCode::AllCheiralityFail) throw;
    ObservabilityReport report;
    report.cheirality_failed = true;
    report.pass = false;
    return report;
  }
  return observability_report(pose, K, acs);
}

// Applies both gates and records the outcome on each candidate; only
// candidates that pass everything are returned.
inline std::vector<CandidateSolution> gate_candidates(std::vector<CandidateSolution> candidates,
                                                      std::span<const AffineCorrespondence> acs,
                                                      const FocalLimits& limits = {}) {
  std::vector<CandidateSolution> kept;
  for (CandidateSolution& c : candidates) {
    c.gates.physical_checked = true;
    c.gates.physical = limits.contains(c.f);
    if (!c.gates.physical) continue;
    c.gates.observability_checked = true;
    try {
      c.gates.observability = gate_observability(c, acs).pass;
    } catch (const Error&) {
      c.gates.observability = false;
    }
    if (c.gates.observability) kept.push_back(c);
  }
  return kept;
}

}  // namespace twoac
