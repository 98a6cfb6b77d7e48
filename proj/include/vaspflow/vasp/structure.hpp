#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace vaspflow::vasp {

enum class CoordinateMode { Direct, Cartesian };

/// Periodic crystal in VASP conventions. Lattice rows are the basis vectors
/// in angstrom before applying the global scale; positions are stored one
/// atom per column, in the declared coordinate mode.
struct CrystalStructure {
  std::string comment;
  double scale = 1.0;
  Eigen::Matrix3d lattice = Eigen::Matrix3d::Identity();
  std::vector<std::string> species;
  std::vector<int> counts;
  bool selective_dynamics = false;
  CoordinateMode mode = CoordinateMode::Direct;
  Eigen::Matrix3Xd positions;
  // Per-component move flags, only meaningful when selective_dynamics is set.
  // true means the component is free to move (VASP "T").
  Eigen::Array<bool, 3, Eigen::Dynamic> move_flags;
};

int atom_count(const CrystalStructure& s);

/// Lattice with the global scale folded in; rows are basis vectors in angstrom.
Eigen::Matrix3d effective_lattice(const CrystalStructure& s);

double cell_volume(const CrystalStructure& s);

/// Distance between opposite faces of the cell along each lattice direction.
Eigen::Vector3d cell_heights(const CrystalStructure& s);

/// Positions in angstrom regardless of the stored mode.
Eigen::Matrix3Xd cartesian_positions(const CrystalStructure& s);

/// Positions in fractional coordinates regardless of the stored mode.
Eigen::Matrix3Xd fractional_positions(const CrystalStructure& s);

/// Chemical symbol of atom `index` following the species/count blocks.
const std::string& species_of(const CrystalStructure& s, int index);

/// Expanded per-atom symbol list, length atom_count.
std::vector<std::string> atom_species(const CrystalStructure& s);

/// Throws vaspflow::Error when the structure violates its own invariants
/// (count/position size mismatch, singular lattice, non-positive scale).
void validate(const CrystalStructure& s);

/// Explicitly wraps fractional coordinates into [0, 1). Never called
/// implicitly by parsers or writers.
Eigen::Matrix3Xd wrap_fractional(const Eigen::Matrix3Xd& frac);

/// Componentwise equality of lattice, species, counts and positions within
/// tol (angstrom for cartesian comparisons). Comments are ignored.
bool structurally_equal(const CrystalStructure& a, const CrystalStructure& b,
                        double tol);

}  // namespace vaspflow::vasp
