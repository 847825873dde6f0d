#pragma once

#include <string>

#include "qki/state.hpp"

namespace qki {

// On-disk state format:
//   {"dims": [["A", 2], ["R", 2]], "matrix_re": [[...]], "matrix_im": [[...]]}
// Row-major matrix entries, flat basis index with the first label most
// significant. Doubles are written with full round-trip precision.
std::string state_to_json(const MultipartiteState& s);
MultipartiteState state_from_json(const std::string& text);

void save_state(const MultipartiteState& s, const std::string& path);
// Runs full validation (hermiticity, positivity, trace) on load and throws
// InvariantViolation naming the failing invariant.
MultipartiteState load_state(const std::string& path);

}  // namespace qki
