#include "kmeasure/error.hpp"

namespace kmeasure {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NegativeLocation: return "NegativeLocation";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::EmptyMeasure: return "EmptyMeasure";
    case ErrorCode::MassOutOfTolerance: return "MassOutOfTolerance";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::AtomOverflow: return "AtomOverflow";
    case ErrorCode::POutOfRange: return "POutOfRange";
    case ErrorCode::InfiniteSeminorm: return "InfiniteSeminorm";
    case ErrorCode::LpFailure: return "LpFailure";
    case ErrorCode::InvalidInitial: return "InvalidInitial";
    case ErrorCode::StepOutOfRange: return "StepOutOfRange";
    case ErrorCode::WindowTooShort: return "WindowTooShort";
    case ErrorCode::ModelInvalid: return "ModelInvalid";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

}  // namespace kmeasure
