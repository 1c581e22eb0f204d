#pragma once
#include <stdexcept>
#include <string>

namespace mf {

// every failure the library can signal; the cli maps these onto exit codes
enum class Err {
  DivisionByZero,
  PrecisionExhausted,
  NotOrdinary,
  Indistinguishable,
  WrongSplitting,
  RingMismatch,
  InsufficientTruncation,
  NonUnitSupport,
  NotInSpan,
  IndistinguishableSystems,
  RecursionStuck,
  MissingEigenvalue,
  ZeroDenominator,
  BalancedViolation,
  UnbalancedViolation,
  NonSplitPrime,
  NonTrivialCharacter,
  PrimeDividesLevel,
  ZeroElement,
  Schema,
  Internal,
};

class MfError : public std::runtime_error {
 public:
  MfError(Err k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
  Err kind;
};

[[noreturn]] inline void fail(Err k, const std::string& msg) { throw MfError(k, msg); }

inline const char* err_name(Err k) {
  switch (k) {
    case Err::DivisionByZero: return "DivisionByZero";
    case Err::PrecisionExhausted: return "PrecisionExhausted";
    case Err::NotOrdinary: return "NotOrdinary";
    case Err::Indistinguishable: return "Indistinguishable";
    case Err::WrongSplitting: return "WrongSplitting";
    case Err::RingMismatch: return "RingMismatch";
    case Err::InsufficientTruncation: return "InsufficientTruncation";
    case Err::NonUnitSupport: return "NonUnitSupport";
    case Err::NotInSpan: return "NotInSpan";
    case Err::IndistinguishableSystems: return "IndistinguishableSystems";
    case Err::RecursionStuck: return "RecursionStuck";
    case Err::MissingEigenvalue: return "MissingEigenvalue";
    case Err::ZeroDenominator: return "ZeroDenominator";
    case Err::BalancedViolation: return "BalancedViolation";
    case Err::UnbalancedViolation: return "UnbalancedViolation";
    case Err::NonSplitPrime: return "NonSplitPrime";
    case Err::NonTrivialCharacter: return "NonTrivialCharacter";
    case Err::PrimeDividesLevel: return "PrimeDividesLevel";
    case Err::ZeroElement: return "ZeroElement";
    case Err::Schema: return "Schema";
    case Err::Internal: return "Internal";
  }
  return "?";
}

}  // namespace mf
