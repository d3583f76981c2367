#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "mobkit/error.hpp"
#include "mobkit/text_io.hpp"

namespace mobkit::workbench {

/// Unknown function, wrong arity, or an argument of the wrong type.
class EvalError : public Error {
 public:
  using Error::Error;
};

/// Evaluates one expression:
///
///   expr    := operand [('&&' | '@>') operand]
///   operand := call | tag 'text' | 'text' ['::' tag] | number | true | false
///   call    := name '(' [expr {',' expr}] ')'
///
/// An optional leading SELECT and trailing ';' are ignored. Untyped quoted
/// strings take the type the function expects. Returns nullopt for NULL.
/// Throws ParseError (offset into `expr`) or EvalError.
std::optional<Literal> eval_expression(std::string_view expr);

/// Canonical text of a result; text values print bare, NULL prints NULL.
std::string format_result(const std::optional<Literal>& result);

}  // namespace mobkit::workbench
