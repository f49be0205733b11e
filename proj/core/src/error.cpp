#include "mtd/error.hpp"

namespace mtd {

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kConfig:
    case ErrorCode::kPacking:
      return 2;
    case ErrorCode::kDivergence:
    case ErrorCode::kNumeric:
      return 3;
    case ErrorCode::kFormat:
    case ErrorCode::kIo:
      return 4;
  }
  return 1;
}

}  // namespace mtd
