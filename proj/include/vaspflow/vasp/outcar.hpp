#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vaspflow::vasp {

enum class CaptureType { Real, Int, Text, Flag };

/// A named line-oriented extraction rule. `pattern` is an ECMAScript regex
/// applied per line; capture group 1 supplies the value for non-Flag types.
struct ExtractionPattern {
  std::string name;
  std::string pattern;
  CaptureType capture_type = CaptureType::Real;
};

struct EigenvalueRow {
  int kpoint_index = 0;  // 1-based as printed
  int band_index = 0;
  double energy_ev = 0.0;
  double occupancy = 0.0;
};

struct OutcarSummary {
  double final_energy_ev = 0.0;
  bool converged = false;
  int n_ionic_steps = 0;
  std::optional<double> max_force_ev_per_a;
  std::optional<double> fermi_energy_ev;
  std::optional<std::vector<EigenvalueRow>> eigenvalue_table;
};

/// The standard pattern set: TOTEN, the convergence sentinel, E-fermi and the
/// max-force summary line, matching the backend's OUTCAR grammar verbatim.
const std::vector<ExtractionPattern>& default_outcar_patterns();

/// Applies the pattern set line by line; the last numeric match wins (final
/// ionic step). The eigenvalue block is parsed structurally when present.
/// Requires patterns named "toten" and "converged" in the set.
OutcarSummary extract_outcar_summary(std::string_view text,
                                     const std::vector<ExtractionPattern>& patterns);

/// Generic form of the same per-line sweep for arbitrary pattern sets. Flag
/// patterns are always present in the result as "true"/"false"; for other
/// types the last match whose capture group parses as the declared kind wins,
/// and a name that never matched is simply absent. Captured text is kept
/// verbatim.
std::map<std::string, std::string> apply_extraction_patterns(
    std::string_view text, const std::vector<ExtractionPattern>& patterns);

/// Gap between the lowest unoccupied and highest occupied states over the
/// eigenvalue table, clamped at zero; direct when VBM and CBM share the
/// k-index. A band straddling the Fermi level makes the system metallic.
struct BandGap {
  double gap_ev = 0.0;
  bool direct = false;
  int vbm_kpoint = 0;
  int cbm_kpoint = 0;
};

BandGap band_gap_from_eigenvalues(const OutcarSummary& summary);

}  // namespace vaspflow::vasp
