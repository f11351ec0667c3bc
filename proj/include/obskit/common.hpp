/**
 * @file common.hpp
 * @brief Error taxonomy shared by every obskit layer.
 *
 * Model-level problems (bad file, undeclared names, non-affine structure)
 * derive from ModelError; numeric-degeneracy problems from the rank engine
 * derive from DegenerateEvaluation. The CLI maps these families to distinct
 * exit codes.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace obskit {

/// Base class for every obskit-specific failure.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string &what) : std::runtime_error(what) {}
};

/// Division by a symbolically-zero expression or a zero rational.
class DivisionByZero : public Error {
  public:
    explicit DivisionByZero(const std::string &ctx = "division by zero")
      : Error(ctx) {}
};

/// Exact evaluation reached an exp/ln/non-integer-power node.
class NonRationalNode : public Error {
  public:
    explicit NonRationalNode(const std::string &ctx = "non-rational node in exact evaluation")
      : Error(ctx) {}
};

/// int64 rational arithmetic left the representable range.
class OverflowError : public Error {
  public:
    explicit OverflowError(const std::string &ctx = "rational overflow") : Error(ctx) {}
};

/// Any reason a model cannot be loaded or transformed as requested.
class ModelError : public Error {
  public:
    explicit ModelError(const std::string &what) : Error(what) {}
};

/// Malformed model text; carries the 1-based source line.
class ParseError : public ModelError {
  public:
    ParseError(int line, const std::string &reason)
      : ModelError("parse error at line " + std::to_string(line) + ": " + reason), line_(line) {}
    int line() const { return line_; }

  private:
    int line_;
};

/// An expression refers to a symbol no section declared.
class UndeclaredSymbol : public ModelError {
  public:
    UndeclaredSymbol(int line, const std::string &name)
      : ModelError("undeclared symbol '" + name + "' at line " + std::to_string(line)) {}
};

/// The same name declared twice (or a replication suffix collides).
class DuplicateSymbol : public ModelError {
  public:
    explicit DuplicateSymbol(const std::string &name)
      : ModelError("duplicate symbol '" + name + "'") {}
};

/// Dynamics or outputs are not affine in the declared inputs.
class NotAffine : public ModelError {
  public:
    explicit NotAffine(const std::string &offending)
      : ModelError("model is not affine in its inputs: " + offending) {}
};

/// Every randomized evaluation point was singular, repeatedly.
class DegenerateEvaluation : public Error {
  public:
    explicit DegenerateEvaluation(const std::string &ctx = "all random evaluation points degenerate")
      : Error(ctx) {}
};

} // namespace obskit
