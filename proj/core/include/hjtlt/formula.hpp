#pragma once

#include <memory>
#include <set>
#include <string>

namespace hjtlt {

// Finite-trace LTL without a next operator.
//
// Concrete syntax accepted by parse():
//   formula := or ('->' or)*            right associative, sugar: a -> b == !a | b
//   or      := and ('|' and)*
//   and     := until ('&' until)*
//   until   := unary ('U' until)?       right associative
//   unary   := ('!' | 'F' | 'G') unary | primary
//   primary := 'true' | 'false' | atom | '(' formula ')'
//   atom    := [A-Za-z_][A-Za-z0-9_]*
//
// 'F p' is sugar for 'true U p' and is expanded during parsing; 'G' and '|'
// are kept as first-class nodes. Eventually/Always constructors exist for
// programmatic use; the parser never returns an Eventually node.
class Formula {
 public:
  enum class Kind { True, False, Atom, Not, And, Or, Until, Eventually, Always };

  Formula() : Formula(make_true()) {}

  static Formula make_true();
  static Formula make_false();
  static Formula atom(std::string name);
  static Formula negation(Formula f);
  static Formula conjunction(Formula lhs, Formula rhs);
  static Formula disjunction(Formula lhs, Formula rhs);
  static Formula until(Formula lhs, Formula rhs);
  static Formula eventually(Formula f);
  static Formula always(Formula f);

  Kind kind() const { return node_->kind; }
  const std::string& atom_name() const;
  Formula lhs() const;  // unary operand, or left operand of a binary node
  Formula rhs() const;

  bool operator==(const Formula& other) const;
  bool operator!=(const Formula& other) const { return !(*this == other); }

  // Canonical text form; parse(to_string(f)) == f for any parser-producible f.
  std::string to_string() const;

  // Stable identity of the shared syntax node, usable as a cache key.
  // Formulas that compare equal may still have distinct identities.
  const void* identity() const { return node_.get(); }

 private:
  struct Node {
    Kind kind;
    std::string atom;
    std::shared_ptr<const Node> lhs, rhs;
  };
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;

  friend struct FormulaAccess;
};

// Throws ParseError with a character position on bad input.
Formula parse_formula(const std::string& text);

std::set<std::string> atoms(const Formula& f);

// True iff every negation in the tree applies to an atom or a literal.
bool negations_atomic_only(const Formula& f);

// True iff the tree contains an Always node.  Formulas without one have
// irrevocable satisfaction: once a trace prefix satisfies them, every
// extension of that trace does too.
bool contains_always(const Formula& f);

}  // namespace hjtlt
