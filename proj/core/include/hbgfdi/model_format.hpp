#pragma once

// Line-oriented textual model format. UTF-8, '#' comments, one directive per
// line:
//
//   model <name>
//   element <kind> <id> [param=<name>] [value=<real>] [signal=<name>]
//   junction <0|1> <id> [mode=<alpha-name>] [clamp=<real>]
//   bond <id> from=<node-id> to=<node-id>
//   mode <alpha-name> guard="<predicate>"
//   sensor <De|Df> <id> at=<junction-id> signal=<name>
//
// Sensor lines attach a detector to a junction; the connecting bond id is
// assigned automatically above the largest explicit id, in file order.
// Guard predicates compare detector signals with real literals, combined
// with && and || and parentheses.

#include <string>

#include "hbgfdi/bondgraph.hpp"

namespace hbgfdi {

/// Parses and validates. Throws ModelError with a line number on syntax
/// errors, dangling references, duplicate ids and user-supplied Rs elements.
BondGraph parse_model(const std::string& text);

BondGraph load_model_file(const std::string& path);

/// Canonical rendering; parse_model(render_model(bg)) == bg holds for graphs
/// already in canonical form.
std::string render_model(const BondGraph& bg);

/// The shipped three-tank model file contents (canonical form).
std::string builtin_three_tank_text();

}  // namespace hbgfdi
