#include "hjtlt/formula.hpp"

#include <cctype>
#include <utility>
#include <vector>

#include "hjtlt/errors.hpp"

namespace hjtlt {

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool is_reserved(const std::string& s) {
  return s == "true" || s == "false" || s == "U" || s == "F" || s == "G";
}

}  // namespace

struct FormulaAccess {
  using Node = Formula::Node;
  static Formula wrap(std::shared_ptr<const Node> n) { return Formula(std::move(n)); }
  static std::shared_ptr<const Node> leaf(Formula::Kind k, std::string atom = {}) {
    return std::make_shared<Node>(Node{k, std::move(atom), nullptr, nullptr});
  }
  static std::shared_ptr<const Node> unary(Formula::Kind k, const Formula& f) {
    return std::make_shared<Node>(Node{k, {}, f.node_, nullptr});
  }
  static std::shared_ptr<const Node> binary(Formula::Kind k, const Formula& l, const Formula& r) {
    return std::make_shared<Node>(Node{k, {}, l.node_, r.node_});
  }
  static const Node& node(const Formula& f) { return *f.node_; }
  static std::shared_ptr<const Node> ptr(const Formula& f) { return f.node_; }
};

using FA = FormulaAccess;

Formula Formula::make_true() { return FA::wrap(FA::leaf(Kind::True)); }
Formula Formula::make_false() { return FA::wrap(FA::leaf(Kind::False)); }

Formula Formula::atom(std::string name) {
  if (name.empty() || !is_ident_start(name[0]))
    throw ValidationError("atom name must match [A-Za-z_][A-Za-z0-9_]*: '" + name + "'");
  for (char c : name)
    if (!is_ident_char(c))
      throw ValidationError("atom name must match [A-Za-z_][A-Za-z0-9_]*: '" + name + "'");
  if (is_reserved(name))
    throw ValidationError("'" + name + "' is a reserved word and cannot name an atom");
  return FA::wrap(FA::leaf(Kind::Atom, std::move(name)));
}

Formula Formula::negation(Formula f) { return FA::wrap(FA::unary(Kind::Not, f)); }
Formula Formula::conjunction(Formula l, Formula r) { return FA::wrap(FA::binary(Kind::And, l, r)); }
Formula Formula::disjunction(Formula l, Formula r) { return FA::wrap(FA::binary(Kind::Or, l, r)); }
Formula Formula::until(Formula l, Formula r) { return FA::wrap(FA::binary(Kind::Until, l, r)); }
Formula Formula::eventually(Formula f) { return FA::wrap(FA::unary(Kind::Eventually, f)); }
Formula Formula::always(Formula f) { return FA::wrap(FA::unary(Kind::Always, f)); }

const std::string& Formula::atom_name() const {
  if (kind() != Kind::Atom) throw Error("atom_name() on a non-atom node");
  return node_->atom;
}

Formula Formula::lhs() const {
  if (!node_->lhs) throw Error("lhs() on a leaf node");
  return FA::wrap(node_->lhs);
}

Formula Formula::rhs() const {
  if (!node_->rhs) throw Error("rhs() on a non-binary node");
  return FA::wrap(node_->rhs);
}

bool Formula::operator==(const Formula& other) const {
  struct Cmp {
    static bool equal(const Node* a, const Node* b) {
      if (a == b) return true;
      if (!a || !b) return false;
      if (a->kind != b->kind || a->atom != b->atom) return false;
      return equal(a->lhs.get(), b->lhs.get()) && equal(a->rhs.get(), b->rhs.get());
    }
  };
  return Cmp::equal(node_.get(), other.node_.get());
}

// ---------------------------------------------------------------------------
// Lexer / recursive-descent parser

namespace {

enum class Tok { End, Ident, True, False, Not, And, Or, Implies, Until, Ev, Alw, LParen, RParen };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) ++i_;
    std::size_t start = i_;
    if (i_ >= src_.size()) {
      tok_ = {Tok::End, "", start};
      return;
    }
    char c = src_[i_];
    if (is_ident_start(c)) {
      std::size_t j = i_;
      while (j < src_.size() && is_ident_char(src_[j])) ++j;
      std::string word = src_.substr(i_, j - i_);
      i_ = j;
      Tok k = Tok::Ident;
      if (word == "true") k = Tok::True;
      else if (word == "false") k = Tok::False;
      else if (word == "U") k = Tok::Until;
      else if (word == "F") k = Tok::Ev;
      else if (word == "G") k = Tok::Alw;
      tok_ = {k, std::move(word), start};
      return;
    }
    switch (c) {
      case '!': tok_ = {Tok::Not, "!", start}; ++i_; return;
      case '&': tok_ = {Tok::And, "&", start}; ++i_; return;
      case '|': tok_ = {Tok::Or, "|", start}; ++i_; return;
      case '(': tok_ = {Tok::LParen, "(", start}; ++i_; return;
      case ')': tok_ = {Tok::RParen, ")", start}; ++i_; return;
      case '-':
        if (i_ + 1 < src_.size() && src_[i_ + 1] == '>') {
          tok_ = {Tok::Implies, "->", start};
          i_ += 2;
          return;
        }
        throw ParseError("unknown token '-'", start);
      default:
        throw ParseError(std::string("unknown token '") + c + "'", start);
    }
  }

  const std::string& src_;
  std::size_t i_ = 0;
  Token tok_{Tok::End, "", 0};
};

class Parser {
 public:
  explicit Parser(const std::string& src) : lex_(src) {}

  Formula parse() {
    Formula f = parse_implies();
    if (lex_.peek().kind != Tok::End)
      throw ParseError("unexpected '" + lex_.peek().text + "'", lex_.peek().pos);
    return f;
  }

 private:
  Formula parse_implies() {
    Formula lhs = parse_or();
    if (lex_.peek().kind == Tok::Implies) {
      lex_.take();
      Formula rhs = parse_implies();
      return Formula::disjunction(Formula::negation(lhs), rhs);
    }
    return lhs;
  }

  Formula parse_or() {
    Formula f = parse_and();
    while (lex_.peek().kind == Tok::Or) {
      lex_.take();
      f = Formula::disjunction(f, parse_and());
    }
    return f;
  }

  Formula parse_and() {
    Formula f = parse_until();
    while (lex_.peek().kind == Tok::And) {
      lex_.take();
      f = Formula::conjunction(f, parse_until());
    }
    return f;
  }

  Formula parse_until() {
    Formula lhs = parse_unary();
    if (lex_.peek().kind == Tok::Until) {
      lex_.take();
      return Formula::until(lhs, parse_until());
    }
    return lhs;
  }

  Formula parse_unary() {
    const Token& t = lex_.peek();
    switch (t.kind) {
      case Tok::Not:
        lex_.take();
        return Formula::negation(parse_unary());
      case Tok::Ev:
        lex_.take();
        return Formula::until(Formula::make_true(), parse_unary());
      case Tok::Alw:
        lex_.take();
        return Formula::always(parse_unary());
      default:
        return parse_primary();
    }
  }

  Formula parse_primary() {
    Token t = lex_.take();
    switch (t.kind) {
      case Tok::True: return Formula::make_true();
      case Tok::False: return Formula::make_false();
      case Tok::Ident: return Formula::atom(t.text);
      case Tok::LParen: {
        Formula f = parse_implies();
        Token close = lex_.take();
        if (close.kind != Tok::RParen) throw ParseError("expected ')'", close.pos);
        return f;
      }
      case Tok::End: throw ParseError("unexpected end of input", t.pos);
      default: throw ParseError("unexpected '" + t.text + "'", t.pos);
    }
  }

  Lexer lex_;
};

// Binding strength used by the canonical printer; larger binds tighter.
constexpr int kPrecOr = 1;
constexpr int kPrecAnd = 2;
constexpr int kPrecUntil = 3;
constexpr int kPrecUnary = 4;
constexpr int kPrecAtom = 5;

int precedence(Formula::Kind k) {
  switch (k) {
    case Formula::Kind::Or: return kPrecOr;
    case Formula::Kind::And: return kPrecAnd;
    case Formula::Kind::Until: return kPrecUntil;
    case Formula::Kind::Not:
    case Formula::Kind::Eventually:
    case Formula::Kind::Always: return kPrecUnary;
    default: return kPrecAtom;
  }
}

void print_into(const Formula& f, int required, std::string& out) {
  const int prec = precedence(f.kind());
  const bool parens = prec < required;
  if (parens) out += '(';
  switch (f.kind()) {
    case Formula::Kind::True: out += "true"; break;
    case Formula::Kind::False: out += "false"; break;
    case Formula::Kind::Atom: out += f.atom_name(); break;
    case Formula::Kind::Not:
      out += '!';
      print_into(f.lhs(), kPrecUnary, out);
      break;
    case Formula::Kind::Eventually:
      out += "F ";
      print_into(f.lhs(), kPrecUnary, out);
      break;
    case Formula::Kind::Always:
      out += "G ";
      print_into(f.lhs(), kPrecUnary, out);
      break;
    case Formula::Kind::And:
      print_into(f.lhs(), kPrecAnd, out);
      out += " & ";
      print_into(f.rhs(), kPrecAnd + 1, out);
      break;
    case Formula::Kind::Or:
      print_into(f.lhs(), kPrecOr, out);
      out += " | ";
      print_into(f.rhs(), kPrecOr + 1, out);
      break;
    case Formula::Kind::Until:
      print_into(f.lhs(), kPrecUntil + 1, out);
      out += " U ";
      print_into(f.rhs(), kPrecUntil, out);
      break;
  }
  if (parens) out += ')';
}

}  // namespace

std::string Formula::to_string() const {
  std::string out;
  print_into(*this, 0, out);
  return out;
}

Formula parse_formula(const std::string& text) { return Parser(text).parse(); }

namespace {

void collect_atoms(const Formula& f, std::set<std::string>& out) {
  switch (f.kind()) {
    case Formula::Kind::Atom: out.insert(f.atom_name()); break;
    case Formula::Kind::True:
    case Formula::Kind::False: break;
    case Formula::Kind::Not:
    case Formula::Kind::Eventually:
    case Formula::Kind::Always: collect_atoms(f.lhs(), out); break;
    default:
      collect_atoms(f.lhs(), out);
      collect_atoms(f.rhs(), out);
  }
}

}  // namespace

std::set<std::string> atoms(const Formula& f) {
  std::set<std::string> out;
  collect_atoms(f, out);
  return out;
}

bool negations_atomic_only(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::True:
    case Formula::Kind::False:
    case Formula::Kind::Atom: return true;
    case Formula::Kind::Not: {
      auto k = f.lhs().kind();
      return k == Formula::Kind::Atom || k == Formula::Kind::True || k == Formula::Kind::False;
    }
    case Formula::Kind::Eventually:
    case Formula::Kind::Always: return negations_atomic_only(f.lhs());
    default:
      return negations_atomic_only(f.lhs()) && negations_atomic_only(f.rhs());
  }
}

bool contains_always(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::True:
    case Formula::Kind::False:
    case Formula::Kind::Atom: return false;
    case Formula::Kind::Always: return true;
    case Formula::Kind::Not:
    case Formula::Kind::Eventually: return contains_always(f.lhs());
    default:
      return contains_always(f.lhs()) || contains_always(f.rhs());
  }
}

}  // namespace hjtlt
