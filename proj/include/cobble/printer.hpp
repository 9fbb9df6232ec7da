#pragma once

#include <string>

#include "cobble/ast.hpp"

namespace cobble {

// Renders the unit in normalized form: four-space indents, one statement
// per line, braced control bodies, canonical spacing, minimal parentheses
// (plus the few extra pairs gcc's -Wparentheses asks for). Printing a
// reparsed print is byte-identical (print . parse . print fixed point).
std::string print_unit(const SourceUnit& u);

// Canonical one-line rendering of an expression subtree.
std::string print_expr(const Expr* e);

}  // namespace cobble
