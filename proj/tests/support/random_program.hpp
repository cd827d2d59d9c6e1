#pragma once

#include <cstdint>
#include <string>

namespace rbmm::testing {

// Source text of a small well-moded program over lists and trees of
// integers. Procedures call earlier ones and themselves; some are multi.
std::string random_program(uint64_t seed);

}  // namespace rbmm::testing
