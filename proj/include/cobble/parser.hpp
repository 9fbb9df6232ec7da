#pragma once

#include <string_view>

#include "cobble/ast.hpp"

namespace cobble {

// Parses one snippet: an optional preamble (allowlisted includes, struct
// definitions, typedefs, file-scope variables) and exactly one function
// definition. The subset is C99 minus variadics, VLAs, unions, enums,
// function pointers, volatile/restrict, preprocessor beyond includes,
// anonymous structs, designated initializers and compound literals;
// those come back as Unsupported diagnostics. Fail-fast: on any
// diagnostic no unit is produced.
ParseResult parse_function(std::string_view src);

// True when hdr ("stdlib.h") is one of the includes the subset admits.
bool include_allowlisted(std::string_view hdr);

}  // namespace cobble
