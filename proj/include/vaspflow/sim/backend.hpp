#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vaspflow/sim/neb.hpp"
#include "vaspflow/sim/potential.hpp"
#include "vaspflow/sim/registry.hpp"
#include "vaspflow/sim/relax.hpp"
#include "vaspflow/vasp/structure.hpp"

namespace vaspflow::sim {

/// One reference material for band-structure mode: a pair potential cannot
/// produce eigenvalues, so BS runs synthesize a two-band table around these
/// reference values. Hybrid-tag mistakes degrade the emitted gap by a
/// documented factor instead of failing, letting accuracy scoring separate
/// good decks from bad ones.
struct BsRecord {
  std::string identifier;  // matched against the first POSCAR comment token
  double gap_ev = 0.0;
  bool direct = false;
  int vbm_k = 1;  // 1-based k-indices in the emitted table
  int cbm_k = 1;
};

/// Text fixture format: one record per line,
/// `identifier gap_ev direct|indirect vbm_k cbm_k`, '#' comments.
std::vector<BsRecord> parse_bs_fixtures(const std::string& text);

struct BackendConfig {
  ToyPotentialParams potential;
  TagRegistry registry = TagRegistry::builtin();
  std::vector<BsRecord> bs_fixtures;
  double default_force_tol = 0.05;  // eV/A, EDIFFG absent
  double default_potim = 0.5;
  int default_neb_steps = 250;  // NSW absent on an NEB deck
};

/// The potential table used by the shipped fixtures: stable FCC metals plus
/// adsorbate pairs tuned so the benchmark structures relax cleanly.
BackendConfig default_backend_config();

enum class SimStatus { ConvergedOk, NotConverged, ValidationFailed, Crashed };

const char* to_string(SimStatus status);

struct SimOutcome {
  SimStatus status = SimStatus::Crashed;
  std::string mode;  // relaxation | static | band_structure | neb
  std::vector<std::string> failed_rules;  // ValidationFailed only
  std::string reason;                     // Crashed only
  std::optional<vasp::CrystalStructure> final_structure;
  std::vector<double> energy_trace;
  std::optional<double> barrier_ev;  // neb only
  std::optional<double> delta_e_ev;  // neb only
  std::vector<std::string> notes;    // e.g. ISIF=3 handled ions-only
  std::vector<std::string> files_written;  // relative to the working dir
};

/// Runs the deck in `dir` (INCAR, KPOINTS, POSCAR or NEB subdirectories,
/// POTCAR). Dispatch: IMAGES set → NEB over 00..NN; ICHARG=11 or line-mode
/// KPOINTS → band-structure fixture emission; NSW>0 → relaxation; otherwise
/// a single static evaluation. Writes OUTCAR (and CONTCAR on relaxation) in
/// the vasp_files grammar with no timestamps, so identical inputs produce
/// byte-identical outputs. All failures are folded into the returned status.
SimOutcome run_simulation(const std::filesystem::path& dir,
                          const BackendConfig& config);

/// Reads the energies of a finished NEB run (per-image OUTCARs in the
/// numbered subdirectories) and recomputes barrier and delta_e.
struct NebProfile {
  std::vector<double> energies;
  double barrier_ev = 0.0;
  double delta_e_ev = 0.0;
};
NebProfile read_neb_profile(const std::filesystem::path& dir);

}  // namespace vaspflow::sim
