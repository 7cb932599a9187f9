#pragma once

#include <stdexcept>
#include <string>

namespace beurling {

enum class ErrorKind {
  NoSignChange,
  NonFinite,
  NoConvergence,
  DerivativeVanished,
  InsufficientPrecision,
  ToleranceNotMet,
  MassAtOne,
  GridMismatch,
  DivergentTail,
  Overflow,
  SearchFailed,
  PoleAt1,
  PoleAtITau,
  BranchCut,
  MethodsDisagree,
  NewtonFailed,
  WindingNot1,
  PathLost,
  TailTooLarge,
  ConditionViolated,
  PhaseViolation,
  TailDivergent,
  DepthExceeded,
  InvalidArgument,
  SegmentDominates,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::NoSignChange: return "NoSignChange";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::DerivativeVanished: return "DerivativeVanished";
    case ErrorKind::InsufficientPrecision: return "InsufficientPrecision";
    case ErrorKind::ToleranceNotMet: return "ToleranceNotMet";
    case ErrorKind::MassAtOne: return "MassAtOne";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::DivergentTail: return "DivergentTail";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::SearchFailed: return "SearchFailed";
    case ErrorKind::PoleAt1: return "PoleAt1";
    case ErrorKind::PoleAtITau: return "PoleAtITau";
    case ErrorKind::BranchCut: return "BranchCut";
    case ErrorKind::MethodsDisagree: return "MethodsDisagree";
    case ErrorKind::NewtonFailed: return "NewtonFailed";
    case ErrorKind::WindingNot1: return "WindingNot1";
    case ErrorKind::PathLost: return "PathLost";
    case ErrorKind::TailTooLarge: return "TailTooLarge";
    case ErrorKind::ConditionViolated: return "ConditionViolated";
    case ErrorKind::PhaseViolation: return "PhaseViolation";
    case ErrorKind::TailDivergent: return "TailDivergent";
    case ErrorKind::DepthExceeded: return "DepthExceeded";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::SegmentDominates: return "SegmentDominates";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace beurling
