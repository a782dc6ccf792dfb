#pragma once

#include <iosfwd>
#include <string>

#include "dflow/movements.hpp"

namespace dflow {

// Text form: header line, one movement per line, then a `total: <cost>` line.
// The total is recomputed on load and must match.
void write_flow(std::ostream& os, const DiscreteFlow& f);
DiscreteFlow read_flow(std::istream& is);

std::string format_movement(const Tiling& t, const Movement& m);
Movement parse_movement(const Tiling& t, const std::string& line);

}  // namespace dflow
