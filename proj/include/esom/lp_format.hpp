#pragma once

#include <string>

#include "esom/instance.hpp"

namespace esom {

// CPLEX-style LP text format: Minimize / Subject To / Bounds / Generals / End.
// write_lp_file + parse_lp_file round-trip an instance exactly (names, bounds,
// coefficients at full precision). A nonzero objective offset is preserved in
// a comment line that foreign parsers ignore.
void write_lp_file(const LinearProgram& lp, const std::string& path);
LinearProgram parse_lp_file(const std::string& path);

std::string lp_to_string(const LinearProgram& lp);
LinearProgram lp_from_string(const std::string& text);

}  // namespace esom
