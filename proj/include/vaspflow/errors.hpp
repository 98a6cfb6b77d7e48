#pragma once

#include <stdexcept>
#include <string>

namespace vaspflow {

// Every failure the library raises deliberately carries one of these kinds so
// callers can branch on the condition instead of parsing what() text.
enum class ErrorKind {
  // structure / POSCAR
  MalformedScale,
  MalformedLattice,
  MalformedSpecies,
  CountMismatch,
  UnknownCoordinateMode,
  MalformedCoordinates,
  // INCAR
  DuplicateTag,
  MalformedLine,
  // KPOINTS
  UnsupportedMode,
  MalformedMesh,
  MalformedPath,
  // POTCAR / OUTCAR
  MalformedPotcar,
  MissingRequiredQuantity,
  NoEigenvalues,
  // potential / relaxation / NEB
  CellTooSmall,
  BadPotentialParams,
  NonFiniteEnergy,
  CellMismatch,
  SpeciesMismatch,
  BadImageCount,
  // descriptors / scoring
  EmptyStructure,
  LayoutMismatch,
  ZeroNormDescriptor,
  DuplicateTaskType,
  BadScoreInput,
  // LLM gateway
  UnresolvedSlot,
  UnknownTemplate,
  FormatViolation,
  ProviderError,
  Timeout,
  // workflow engine
  PathEscape,
  DisallowedCommand,
  BackendCrash,
  MissingInputs,
  NoMatchingWorkflow,
  ManifestError,
  ContextKeyError,
  // harness / IO
  IoError,
  ConfigError,
  OutputExists,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace vaspflow
