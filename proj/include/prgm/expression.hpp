#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "prgm/numerics.hpp"

namespace prgm {

/// Compiles a one-variable arithmetic expression into a callable.
///
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' unary)?        right-associative
///   primary := number | variable | ('exp' | 'log') '(' expr ')' | '(' expr ')'
///
/// Every name in `variables` denotes the single argument. Throws ParseError
/// with the byte offset of the first offending token.
ScalarMap parse_expression(std::string_view text, const std::vector<std::string>& variables);

/// Variable names accepted for the natural parameter: theta, θ, t.
const std::vector<std::string>& theta_variables();

}  // namespace prgm
