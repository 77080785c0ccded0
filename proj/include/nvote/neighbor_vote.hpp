#pragma once

// Neighbor voting in bird's-eye view.
//
// Every voter (a BEV feature-map cell center) names the nearest object in
// front (z_c <= z_v) and the nearest object behind (z_c > z_v), measured by
// planar Euclidean distance. Each choice is stored as the direction of the
// voter->object vector against +X, (sin, cos), plus the z offset magnitude dz.
// Six channels per voter:
//
//   sin_f, cos_f, dz_f, sin_b, cos_b, dz_b
//
// Decoding walks dz / |sin| along the stored direction. A candidate box's
// support is the number of votes landing on it from voters within r_voter,
// divided by the number of such voters.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nvote/bev_grid.hpp"
#include "nvote/error.hpp"
#include "nvote/kitti_io.hpp"
#include "nvote/point_cloud.hpp"

namespace nvote {

struct VoterGrid {
  std::vector<BevPoint> positions;

  std::size_t size() const { return positions.size(); }
};

// Feature-map cell centers at the configured stride, ordered z-major
// (row iz, then column ix).
inline VoterGrid make_voter_grid(const GridConfig& cfg) {
  cfg.validate();
  const int stride = cfg.downsample_rate;
  const double step_x = cfg.cell_x * stride;
  const double step_z = cfg.cell_z * stride;
  VoterGrid grid;
  grid.positions.reserve(static_cast<std::size_t>(cfg.feature_n_x()) * cfg.feature_n_z());
  for (int jz = 0; jz < cfg.feature_n_z(); ++jz) {
    for (int jx = 0; jx < cfg.feature_n_x(); ++jx) {
      grid.positions.push_back({cfg.x_min + (jx + 0.5) * step_x, cfg.z_min + (jz + 0.5) * step_z});
    }
  }
  return grid;
}

struct ObjectSet {
  std::vector<BevPoint> centers;

  std::size_t size() const { return centers.size(); }
  bool empty() const { return centers.empty(); }
};

struct VoteSide {
  double sin_theta = 0.0;
  double cos_theta = 1.0;
  double dz = 0.0;
  int object = -1;  // index into the ObjectSet; -1 when unknown (e.g. read from disk)
};

struct VoteRecord {
  std::optional<VoteSide> front;
  std::optional<VoteSide> back;
};

struct NeighborDistanceMap {
  std::vector<VoteRecord> records;

  std::size_t size() const { return records.size(); }
};

enum class VoteMode {
  training,   // sides farther than r_valid are marked absent
  inference,  // no distance restriction at target generation
};

inline constexpr double kDefaultValidRadius = 15.0;
inline constexpr double kDegenerateSin = 1e-6;

inline double bev_distance(BevPoint a, BevPoint b) { return std::hypot(a.x - b.x, a.z - b.z); }

// Direction and z offset of the voter->target vector. dz is a magnitude.
inline VoteSide encode_vote_side(BevPoint voter, BevPoint target, int object = -1) {
  const double dx = target.x - voter.x;
  const double dz = target.z - voter.z;
  const double dist = std::hypot(dx, dz);
  VoteSide side;
  side.object = object;
  side.dz = std::abs(dz);
  if (dist > 0.0) {
    side.sin_theta = dz / dist;
    side.cos_theta = dx / dist;
  }
  return side;
}

inline NeighborDistanceMap compute_vote_targets(const VoterGrid& voters, const ObjectSet& objects, VoteMode mode,
                                                double r_valid = kDefaultValidRadius) {
  if (mode == VoteMode::training && !(r_valid > 0.0)) throw ValidationError("r_valid must be positive");
  NeighborDistanceMap map;
  map.records.resize(voters.size());
  for (std::size_t v = 0; v < voters.size(); ++v) {
    const BevPoint voter = voters.positions[v];
    int best_front = -1, best_back = -1;
    double d_front = std::numeric_limits<double>::infinity();
    double d_back = d_front;
    for (std::size_t c = 0; c < objects.size(); ++c) {
      const BevPoint obj = objects.centers[c];
      const double d = bev_distance(voter, obj);
      // Strict < keeps the lowest index on exact ties.
      if (obj.z <= voter.z) {
        if (d < d_front) d_front = d, best_front = static_cast<int>(c);
      } else if (d < d_back) {
        d_back = d, best_back = static_cast<int>(c);
      }
    }
    const bool limit = mode == VoteMode::training;
    auto& rec = map.records[v];
    if (best_front >= 0 && !(limit && d_front > r_valid)) {
      rec.front = encode_vote_side(voter, objects.centers[best_front], best_front);
    }
    if (best_back >= 0 && !(limit && d_back > r_valid)) {
      rec.back = encode_vote_side(voter, objects.centers[best_back], best_back);
    }
  }
  return map;
}

// Training-target form with the validity radius.
inline NeighborDistanceMap compute_vote_targets(const VoterGrid& voters, const ObjectSet& objects, double r_valid) {
  return compute_vote_targets(voters, objects, VoteMode::training, r_valid);
}

// Recovers the voted position, or nullopt when |sin| is too small for the z
// offset to pin it down.
inline std::optional<BevPoint> decode_vote(BevPoint voter, const VoteSide& side) {
  if (side.dz < 0.0) throw ValidationError("vote dz must be non-negative");
  const double s = std::abs(side.sin_theta);
  if (s < kDegenerateSin) return std::nullopt;
  const double t = side.dz / s;
  return BevPoint{voter.x + t * side.cos_theta, voter.z + t * side.sin_theta};
}

struct CandidateTally {
  int eligible_voters = 0;
  int votes_received = 0;
  double support = 0.0;
};

struct VoteTally {
  std::vector<CandidateTally> candidates;

  std::vector<double> supports() const {
    std::vector<double> s;
    s.reserve(candidates.size());
    for (const auto& c : candidates) s.push_back(c.support);
    return s;
  }
};

inline constexpr double kDefaultVoterRadius = 6.0;
inline constexpr double kDefaultAssignRadius = 2.0;

// Index of the nearest candidate within `radius` of p (lowest index on ties).
inline int nearest_candidate(BevPoint p, const ObjectSet& candidates, double radius) {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const double d = bev_distance(p, candidates.centers[c]);
    if (d <= radius && d < best_d) best_d = d, best = static_cast<int>(c);
  }
  return best;
}

// Voters within r_voter of a candidate are its electorate. Each decoded vote
// goes to the nearest candidate within r_assign of the decoded position and
// counts only if the voter belongs to that candidate's electorate.
inline VoteTally tally_votes(const NeighborDistanceMap& map, const VoterGrid& voters, const ObjectSet& candidates,
                             double r_voter = kDefaultVoterRadius, double r_assign = kDefaultAssignRadius) {
  if (!(r_voter > 0.0) || !(r_assign > 0.0)) throw ValidationError("tally radii must be positive");
  if (map.size() != voters.size()) throw ValidationError("distance map and voter grid sizes differ");
  VoteTally tally;
  tally.candidates.resize(candidates.size());
  for (std::size_t v = 0; v < voters.size(); ++v) {
    const BevPoint voter = voters.positions[v];
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (bev_distance(voter, candidates.centers[c]) <= r_voter) ++tally.candidates[c].eligible_voters;
    }
    for (const auto* side : {&map.records[v].front, &map.records[v].back}) {
      if (!side->has_value()) continue;
      const auto pos = decode_vote(voter, **side);
      if (!pos) continue;
      const int c = nearest_candidate(*pos, candidates, r_assign);
      if (c >= 0 && bev_distance(voter, candidates.centers[c]) <= r_voter) ++tally.candidates[c].votes_received;
    }
  }
  for (auto& c : tally.candidates) {
    c.support = static_cast<double>(c.votes_received) / std::max(1, c.eligible_voters);
  }
  return tally;
}

// Keeps entries whose support reaches tau; order and content untouched.
template <class Det>
std::vector<Det> filter_by_votes(std::span<const Det> dets, const VoteTally& tally, double tau) {
  if (tally.candidates.size() != dets.size()) throw ValidationError("tally is not aligned with detections");
  if (!(tau >= 0.0)) throw ValidationError("support threshold must be non-negative");
  std::vector<Det> kept;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (tally.candidates[i].support >= tau) kept.push_back(dets[i]);
  }
  return kept;
}

template <class Det>
std::vector<Det> filter_by_votes(const std::vector<Det>& dets, const VoteTally& tally, double tau) {
  return filter_by_votes(std::span<const Det>(dets), tally, tau);
}

struct SupportStats {
  std::optional<double> mean_tp;
  std::optional<double> mean_fp;
};

inline SupportStats vote_support_stats(const VoteTally& tally, std::span<const bool> is_tp) {
  if (is_tp.size() != tally.candidates.size()) throw ValidationError("TP flags are not aligned with tally");
  double sum[2] = {0.0, 0.0};
  int n[2] = {0, 0};
  for (std::size_t i = 0; i < is_tp.size(); ++i) {
    const int k = is_tp[i] ? 0 : 1;
    sum[k] += tally.candidates[i].support;
    ++n[k];
  }
  SupportStats s;
  if (n[0] > 0) s.mean_tp = sum[0] / n[0];
  if (n[1] > 0) s.mean_fp = sum[1] / n[1];
  return s;
}

inline ObjectSet centers_of(std::span<const Detection> dets) {
  ObjectSet set;
  set.centers.reserve(dets.size());
  for (const auto& d : dets) set.centers.push_back({d.x, d.z});
  return set;
}

// NVDM layout (little endian):
//   bytes 0..3   magic "NVDM"
//   bytes 4..7   u32 voter count n
//   bytes 8..11  u32 channel count (6)
//   bytes 12..15 u32 format version (1)
//   n * 6 f32    sin_f, cos_f, dz_f, sin_b, cos_b, dz_b
//   ceil(2n/8)   validity bits; bit 2i = front of voter i, bit 2i+1 = back
// Absent sides hold the sentinel sin = cos = 0, dz = -1.
inline constexpr std::array<char, 4> kVoteMapMagic{'N', 'V', 'D', 'M'};
inline constexpr std::uint32_t kVoteMapChannels = 6;
inline constexpr std::uint32_t kVoteMapVersion = 1;

inline std::vector<std::uint8_t> write_distance_map(const NeighborDistanceMap& map) {
  const std::size_t n = map.size();
  std::vector<std::uint8_t> out;
  out.reserve(16 + n * 24 + (2 * n + 7) / 8);
  out.insert(out.end(), kVoteMapMagic.begin(), kVoteMapMagic.end());
  detail::put_u32(out, static_cast<std::uint32_t>(n));
  detail::put_u32(out, kVoteMapChannels);
  detail::put_u32(out, kVoteMapVersion);
  std::vector<std::uint8_t> mask((2 * n + 7) / 8, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& rec = map.records[i];
    int bit = 0;
    for (const auto* side : {&rec.front, &rec.back}) {
      if (side->has_value()) {
        detail::put_f32(out, static_cast<float>((*side)->sin_theta));
        detail::put_f32(out, static_cast<float>((*side)->cos_theta));
        detail::put_f32(out, static_cast<float>((*side)->dz));
        const std::size_t b = 2 * i + bit;
        mask[b / 8] |= static_cast<std::uint8_t>(1u << (b % 8));
      } else {
        detail::put_f32(out, 0.0f);
        detail::put_f32(out, 0.0f);
        detail::put_f32(out, -1.0f);
      }
      ++bit;
    }
  }
  out.insert(out.end(), mask.begin(), mask.end());
  return out;
}

inline NeighborDistanceMap read_distance_map(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 16) throw FormatError("distance map buffer shorter than header");
  if (std::memcmp(bytes.data(), kVoteMapMagic.data(), 4) != 0) throw FormatError("bad distance map magic");
  const std::size_t n = detail::get_u32(bytes, 4);
  if (detail::get_u32(bytes, 8) != kVoteMapChannels) throw FormatError("distance map must have 6 channels");
  if (detail::get_u32(bytes, 12) != kVoteMapVersion) throw FormatError("unsupported distance map version");
  const std::size_t mask_at = 16 + n * 24;
  if (bytes.size() < mask_at + (2 * n + 7) / 8) throw FormatError("truncated distance map");
  NeighborDistanceMap map;
  map.records.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int bit = 0; bit < 2; ++bit) {
      const std::size_t b = 2 * i + bit;
      if (!((bytes[mask_at + b / 8] >> (b % 8)) & 1u)) continue;
      const std::size_t at = 16 + i * 24 + bit * 12;
      VoteSide side{detail::get_f32(bytes, at), detail::get_f32(bytes, at + 4), detail::get_f32(bytes, at + 8), -1};
      const double norm = side.sin_theta * side.sin_theta + side.cos_theta * side.cos_theta;
      if (std::abs(norm - 1.0) > 1e-6 || side.dz < 0.0) {
        throw FormatError("voter " + std::to_string(i) + ": malformed vote record");
      }
      (bit == 0 ? map.records[i].front : map.records[i].back) = side;
    }
  }
  return map;
}

inline NeighborDistanceMap read_distance_map(std::string_view bytes) {
  return read_distance_map(
      std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

}  // namespace nvote
