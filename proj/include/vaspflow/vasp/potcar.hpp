#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace vaspflow::vasp {

/// POTCAR is treated as opaque metadata: the concatenated element order plus
/// a content hash, enough for POSCAR consistency checks.
struct PotcarInfo {
  std::vector<std::string> species;
  std::string header_hash;  // 16 hex chars, FNV-1a over the raw bytes
};

PotcarInfo parse_potcar(std::string_view text);

/// Minimal synthetic POTCAR block per species, one TITEL line each.
std::string write_potcar_stub(const std::vector<std::string>& species);

}  // namespace vaspflow::vasp
