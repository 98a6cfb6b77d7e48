#include "vaspflow/errors.hpp"

namespace vaspflow {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedScale: return "MalformedScale";
    case ErrorKind::MalformedLattice: return "MalformedLattice";
    case ErrorKind::MalformedSpecies: return "MalformedSpecies";
    case ErrorKind::CountMismatch: return "CountMismatch";
    case ErrorKind::UnknownCoordinateMode: return "UnknownCoordinateMode";
    case ErrorKind::MalformedCoordinates: return "MalformedCoordinates";
    case ErrorKind::DuplicateTag: return "DuplicateTag";
    case ErrorKind::MalformedLine: return "MalformedLine";
    case ErrorKind::UnsupportedMode: return "UnsupportedMode";
    case ErrorKind::MalformedMesh: return "MalformedMesh";
    case ErrorKind::MalformedPath: return "MalformedPath";
    case ErrorKind::MalformedPotcar: return "MalformedPotcar";
    case ErrorKind::MissingRequiredQuantity: return "MissingRequiredQuantity";
    case ErrorKind::NoEigenvalues: return "NoEigenvalues";
    case ErrorKind::CellTooSmall: return "CellTooSmall";
    case ErrorKind::BadPotentialParams: return "BadPotentialParams";
    case ErrorKind::NonFiniteEnergy: return "NonFiniteEnergy";
    case ErrorKind::CellMismatch: return "CellMismatch";
    case ErrorKind::SpeciesMismatch: return "SpeciesMismatch";
    case ErrorKind::BadImageCount: return "BadImageCount";
    case ErrorKind::EmptyStructure: return "EmptyStructure";
    case ErrorKind::LayoutMismatch: return "LayoutMismatch";
    case ErrorKind::ZeroNormDescriptor: return "ZeroNormDescriptor";
    case ErrorKind::DuplicateTaskType: return "DuplicateTaskType";
    case ErrorKind::BadScoreInput: return "BadScoreInput";
    case ErrorKind::UnresolvedSlot: return "UnresolvedSlot";
    case ErrorKind::UnknownTemplate: return "UnknownTemplate";
    case ErrorKind::FormatViolation: return "FormatViolation";
    case ErrorKind::ProviderError: return "ProviderError";
    case ErrorKind::Timeout: return "Timeout";
    case ErrorKind::PathEscape: return "PathEscape";
    case ErrorKind::DisallowedCommand: return "DisallowedCommand";
    case ErrorKind::BackendCrash: return "BackendCrash";
    case ErrorKind::MissingInputs: return "MissingInputs";
    case ErrorKind::NoMatchingWorkflow: return "NoMatchingWorkflow";
    case ErrorKind::ManifestError: return "ManifestError";
    case ErrorKind::ContextKeyError: return "ContextKeyError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::OutputExists: return "OutputExists";
  }
  return "UnknownError";
}

}  // namespace vaspflow
