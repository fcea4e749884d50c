#pragma once

#include <string>

#include "json.hpp"
#include "stigsim/sha256.hpp"

namespace stigsim {

using json = nlohmann::json;

// Canonical JSON: object keys sorted lexicographically, no whitespace,
// integers in base 10, fixed-point quantities carried as scaled integers.
// nlohmann::json already stores object keys sorted, so a compact dump is
// canonical as long as no floating-point values are present. All simulator
// quantities are integers by construction; serialize() enforces that.
std::string canonical_dump(const json& value);

inline std::string canonical_digest(const json& value) { return Sha256::hex(canonical_dump(value)); }

}  // namespace stigsim
