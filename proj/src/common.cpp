#include "rbmm/common.hpp"

namespace rbmm {

DetInfo DetInfo::of(Determinism d) {
  switch (d) {
    case Determinism::Det: return {false, false, false};
    case Determinism::Semidet: return {true, false, false};
    case Determinism::Multi: return {false, true, false};
    case Determinism::Nondet: return {true, true, false};
    case Determinism::Failure: return {true, false, true};
  }
  return {};
}

Determinism DetInfo::to_det() const {
  if (never_succeeds) return Determinism::Failure;
  if (many) return can_fail ? Determinism::Nondet : Determinism::Multi;
  return can_fail ? Determinism::Semidet : Determinism::Det;
}

const char *det_name(Determinism d) {
  switch (d) {
    case Determinism::Det: return "det";
    case Determinism::Semidet: return "semidet";
    case Determinism::Multi: return "multi";
    case Determinism::Nondet: return "nondet";
    case Determinism::Failure: return "failure";
  }
  return "?";
}

}  // namespace rbmm
