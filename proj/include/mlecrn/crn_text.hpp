#pragma once

// Line-oriented text format for reaction networks.
//
//   species X1 X2 X3 T1 T2          (optional; fixes species order)
//   X1 + X3 <-> 2 X2 @ 1,1          ("<->" expands to forward and reverse)
//   2 T1 -> 0 @ 1
//
// Whitespace is insignificant and '#' starts a comment. Without a species
// line, species are ordered by first appearance.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "mlecrn/crn.hpp"

namespace mlecrn {

struct ParsedNetwork {
  ReactionNetwork network;
  std::vector<std::string> warnings;
};

// Throws ParseError (message carries line:column) or UndeclaredCoefficient.
ParsedNetwork parse_crn(std::string_view text);

// Canonical text: a species line, then one line per reaction, with adjacent
// mutually reverse reactions folded into a single "<->" line.
std::string emit_crn(const ReactionNetwork& net);

std::string format_double(double v);

}  // namespace mlecrn
