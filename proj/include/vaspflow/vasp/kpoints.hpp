#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>
#include <vector>

namespace vaspflow::vasp {

enum class KpointsMode { GammaCentered, MonkhorstPack, ExplicitLine };

struct LabeledKpoint {
  Eigen::Vector3d coords = Eigen::Vector3d::Zero();
  std::string label;

  bool operator==(const LabeledKpoint& o) const {
    return coords == o.coords && label == o.label;
  }
};

struct KpointsSpec {
  std::string comment;
  KpointsMode mode = KpointsMode::GammaCentered;
  Eigen::Vector3i mesh = Eigen::Vector3i::Ones();
  Eigen::Vector3d shift = Eigen::Vector3d::Zero();
  // ExplicitLine only: segment endpoints in file order (2 per segment) and
  // the per-segment division count from line 2.
  std::vector<LabeledKpoint> line_path;
  int line_divisions = 0;
  bool path_cartesian = false;
};

/// Mode comes from line 3's first character: G/g GammaCentered,
/// M/m MonkhorstPack, L/l ExplicitLine. Explicit k-point lists (line 2
/// nonzero outside line mode) are unsupported.
KpointsSpec parse_kpoints(std::string_view text);

std::string write_kpoints(const KpointsSpec& spec);

}  // namespace vaspflow::vasp
