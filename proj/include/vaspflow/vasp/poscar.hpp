#pragma once

#include <string>
#include <string_view>

#include "vaspflow/vasp/structure.hpp"

namespace vaspflow::vasp {

/// Parses VASP-5 POSCAR/CONTCAR content. The species-symbol line is
/// mandatory; VASP-4 files without it are rejected. Content after the
/// coordinate block (velocities, predictor data) is ignored.
CrystalStructure parse_poscar(std::string_view text);

/// Canonical POSCAR serialization: coordinates and lattice rows at fixed
/// 16-decimal precision, right-aligned columns.
std::string write_poscar(const CrystalStructure& s);

}  // namespace vaspflow::vasp
