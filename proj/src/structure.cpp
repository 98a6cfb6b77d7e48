#include "vaspflow/vasp/structure.hpp"

#include <cmath>
#include <numeric>

#include "vaspflow/errors.hpp"

namespace vaspflow::vasp {

int atom_count(const CrystalStructure& s) {
  return std::accumulate(s.counts.begin(), s.counts.end(), 0);
}

Eigen::Matrix3d effective_lattice(const CrystalStructure& s) {
  return s.scale * s.lattice;
}

double cell_volume(const CrystalStructure& s) {
  return std::abs(effective_lattice(s).determinant());
}

Eigen::Vector3d cell_heights(const CrystalStructure& s) {
  const Eigen::Matrix3d lat = effective_lattice(s);
  const double vol = std::abs(lat.determinant());
  Eigen::Vector3d heights;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector3d b = lat.row((i + 1) % 3);
    const Eigen::Vector3d c = lat.row((i + 2) % 3);
    const double face = b.cross(c).norm();
    heights(i) = face > 0.0 ? vol / face : 0.0;
  }
  return heights;
}

Eigen::Matrix3Xd cartesian_positions(const CrystalStructure& s) {
  if (s.mode == CoordinateMode::Cartesian) return s.scale * s.positions;
  return effective_lattice(s).transpose() * s.positions;
}

Eigen::Matrix3Xd fractional_positions(const CrystalStructure& s) {
  if (s.mode == CoordinateMode::Direct) return s.positions;
  const Eigen::Matrix3d lat_t = effective_lattice(s).transpose();
  return lat_t.partialPivLu().solve(s.scale * s.positions);
}

const std::string& species_of(const CrystalStructure& s, int index) {
  int cursor = 0;
  for (std::size_t b = 0; b < s.counts.size(); ++b) {
    cursor += s.counts[b];
    if (index < cursor) return s.species[b];
  }
  throw Error(ErrorKind::CountMismatch,
              "atom index " + std::to_string(index) + " out of range");
}

std::vector<std::string> atom_species(const CrystalStructure& s) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(atom_count(s)));
  for (std::size_t b = 0; b < s.counts.size(); ++b)
    for (int i = 0; i < s.counts[b]; ++i) out.push_back(s.species[b]);
  return out;
}

void validate(const CrystalStructure& s) {
  if (!(s.scale > 0.0) || !std::isfinite(s.scale))
    throw Error(ErrorKind::MalformedScale, "scale must be finite and positive");
  if (!s.lattice.allFinite())
    throw Error(ErrorKind::MalformedLattice, "lattice has non-finite entries");
  if (std::abs(s.lattice.determinant()) < 1e-12)
    throw Error(ErrorKind::MalformedLattice, "lattice is singular");
  if (s.species.size() != s.counts.size())
    throw Error(ErrorKind::MalformedSpecies,
                "species and count blocks differ in length");
  for (int c : s.counts)
    if (c <= 0)
      throw Error(ErrorKind::CountMismatch, "species count must be positive");
  const int n = atom_count(s);
  if (s.positions.cols() != n)
    throw Error(ErrorKind::CountMismatch,
                "position rows do not match declared atom count");
  if (!s.positions.allFinite())
    throw Error(ErrorKind::MalformedCoordinates,
                "positions have non-finite entries");
  if (s.selective_dynamics && s.move_flags.cols() != n)
    throw Error(ErrorKind::CountMismatch,
                "selective dynamics flags do not match atom count");
}

Eigen::Matrix3Xd wrap_fractional(const Eigen::Matrix3Xd& frac) {
  Eigen::Matrix3Xd out = frac.array() - frac.array().floor();
  // floor(x) == x for exact integers, keep those at zero rather than 1.0
  for (Eigen::Index j = 0; j < out.cols(); ++j)
    for (int i = 0; i < 3; ++i)
      if (out(i, j) >= 1.0) out(i, j) -= 1.0;
  return out;
}

bool structurally_equal(const CrystalStructure& a, const CrystalStructure& b,
                        double tol) {
  if (a.species != b.species || a.counts != b.counts) return false;
  if (((effective_lattice(a) - effective_lattice(b)).array().abs() > tol).any())
    return false;
  if (atom_count(a) != atom_count(b)) return false;
  const Eigen::Matrix3Xd pa = cartesian_positions(a);
  const Eigen::Matrix3Xd pb = cartesian_positions(b);
  if (((pa - pb).array().abs() > tol).any()) return false;
  if (a.selective_dynamics != b.selective_dynamics) return false;
  if (a.selective_dynamics && (a.move_flags != b.move_flags).any()) return false;
  return true;
}

}  // namespace vaspflow::vasp
