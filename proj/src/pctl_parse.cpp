#include <cctype>
#include <charconv>
#include <sstream>

#include "rlsafe/pctl.hpp"

namespace rlsafe::pctl {

namespace {

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct Token {
  enum class Kind {
    Ident, Number, LParen, RParen, LBracket, RBracket, Not, And, Or,
    Less, LessEq, Greater, GreaterEq, Eq, Query, Quote, End
  };
  Kind kind = Kind::End;
  std::string text;
  double number = 0.0;
  std::size_t pos = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) { advance(); }

  const Token& peek() const { return current_; }

  Token take() {
    Token t = current_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    current_ = Token{};
    current_.pos = pos_;
    if (pos_ >= text_.size()) { current_.kind = Token::Kind::End; return; }
    const char c = text_[pos_];
    auto two = [&](char second) {
      return pos_ + 1 < text_.size() && text_[pos_ + 1] == second;
    };
    switch (c) {
      case '(': current_.kind = Token::Kind::LParen; ++pos_; return;
      case ')': current_.kind = Token::Kind::RParen; ++pos_; return;
      case '[': current_.kind = Token::Kind::LBracket; ++pos_; return;
      case ']': current_.kind = Token::Kind::RBracket; ++pos_; return;
      case '!': current_.kind = Token::Kind::Not; ++pos_; return;
      case '&': current_.kind = Token::Kind::And; ++pos_; return;
      case '|': current_.kind = Token::Kind::Or; ++pos_; return;
      case '"': current_.kind = Token::Kind::Quote; ++pos_; return;
      case '<':
        current_.kind = two('=') ? (pos_ += 2, Token::Kind::LessEq)
                                 : (++pos_, Token::Kind::Less);
        return;
      case '>':
        current_.kind = two('=') ? (pos_ += 2, Token::Kind::GreaterEq)
                                 : (++pos_, Token::Kind::Greater);
        return;
      case '=':
        if (two('?')) { current_.kind = Token::Kind::Query; pos_ += 2; return; }
        current_.kind = Token::Kind::Eq; ++pos_; return;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t end = pos_;
      while (end < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[end])) || text_[end] == '.' ||
              text_[end] == 'e' || text_[end] == 'E' ||
              ((text_[end] == '+' || text_[end] == '-') && end > pos_ &&
               (text_[end - 1] == 'e' || text_[end - 1] == 'E'))))
        ++end;
      current_.kind = Token::Kind::Number;
      current_.text = std::string(text_.substr(pos_, end - pos_));
      try {
        current_.number = std::stod(current_.text);
      } catch (const std::exception&) {
        throw ParseError("bad number '" + current_.text + "'", pos_);
      }
      pos_ = end;
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_;
      while (end < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_'))
        ++end;
      current_.kind = Token::Kind::Ident;
      current_.text = std::string(text_.substr(pos_, end - pos_));
      pos_ = end;
      return;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  Token current_;
};

FormulaPtr make_atom(std::string name) {
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::Atom;
  f->atom = std::move(name);
  return f;
}

FormulaPtr make_true() {
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::True;
  return f;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : lex_(text) {}

  FormulaPtr parse_all() {
    FormulaPtr f = parse_or();
    const Token& t = lex_.peek();
    if (t.kind != Token::Kind::End)
      throw ParseError("trailing input after formula", t.pos);
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& what, const Token& t) const {
    throw ParseError(what, t.pos);
  }

  void expect(Token::Kind kind, const char* what) {
    const Token t = lex_.take();
    if (t.kind != kind) fail(std::string("expected ") + what, t);
  }

  FormulaPtr parse_or() {
    FormulaPtr lhs = parse_and();
    while (lex_.peek().kind == Token::Kind::Or) {
      lex_.take();
      auto f = std::make_shared<Formula>();
      f->kind = Formula::Kind::Or;
      f->lhs = lhs;
      f->rhs = parse_and();
      lhs = f;
    }
    return lhs;
  }

  FormulaPtr parse_and() {
    FormulaPtr lhs = parse_unary();
    while (lex_.peek().kind == Token::Kind::And) {
      lex_.take();
      auto f = std::make_shared<Formula>();
      f->kind = Formula::Kind::And;
      f->lhs = lhs;
      f->rhs = parse_unary();
      lhs = f;
    }
    return lhs;
  }

  FormulaPtr parse_unary() {
    if (lex_.peek().kind == Token::Kind::Not) {
      const Token t = lex_.take();
      (void)t;
      auto f = std::make_shared<Formula>();
      f->kind = Formula::Kind::Not;
      f->lhs = parse_unary();
      return f;
    }
    return parse_primary();
  }

  FormulaPtr parse_primary() {
    const Token t = lex_.peek();
    switch (t.kind) {
      case Token::Kind::LParen: {
        lex_.take();
        FormulaPtr f = parse_or();
        expect(Token::Kind::RParen, "')'");
        return f;
      }
      case Token::Kind::Quote: {
        lex_.take();
        const Token name = lex_.take();
        if (name.kind != Token::Kind::Ident) fail("expected label name after '\"'", name);
        expect(Token::Kind::Quote, "closing '\"'");
        return make_atom(name.text);
      }
      case Token::Kind::Ident:
        if (t.text == "true") { lex_.take(); return make_true(); }
        if (t.text == "P") return parse_prob();
        return parse_atom();
      default:
        fail("expected a state formula", t);
    }
  }

  /// Identifier, or the "Agent=g" goal alias.
  FormulaPtr parse_atom() {
    const Token name = lex_.take();
    if (lex_.peek().kind == Token::Kind::Eq) {
      lex_.take();
      const Token rhs = lex_.take();
      if (name.text == "Agent" && rhs.kind == Token::Kind::Ident && rhs.text == "g")
        return make_atom("goal");
      fail("unsupported atom comparison '" + name.text + "='", name);
    }
    return make_atom(name.text);
  }

  FormulaPtr parse_prob() {
    lex_.take();  // 'P'
    auto f = std::make_shared<Formula>();
    f->kind = Formula::Kind::Prob;
    const Token op = lex_.take();
    switch (op.kind) {
      case Token::Kind::Query: f->bound = Bound::Query; break;
      case Token::Kind::Less: f->bound = Bound::Less; break;
      case Token::Kind::LessEq: f->bound = Bound::LessEq; break;
      case Token::Kind::Greater: f->bound = Bound::Greater; break;
      case Token::Kind::GreaterEq: f->bound = Bound::GreaterEq; break;
      default: fail("expected a probability bound after P", op);
    }
    if (f->bound != Bound::Query) {
      const Token num = lex_.take();
      if (num.kind != Token::Kind::Number) fail("expected a probability value", num);
      if (num.number < 0.0 || num.number > 1.0)
        fail("probability bound outside [0,1]", num);
      f->bound_value = num.number;
    }
    expect(Token::Kind::LBracket, "'['");
    f->path = parse_path(*f);
    expect(Token::Kind::RBracket, "']'");
    return f;
  }

  PathFormula parse_path(const Formula& owner) {
    const Token t = lex_.peek();
    PathFormula path;
    if (t.kind == Token::Kind::Ident && t.text == "X") {
      lex_.take();
      path.kind = PathKind::Next;
      path.right = parse_or();
      return path;
    }
    if (t.kind == Token::Kind::Ident && t.text == "G") {
      lex_.take();
      const Token f = lex_.take();
      if (f.kind != Token::Kind::Ident || f.text != "F")
        fail("G is only supported as G F", f);
      if (!(owner.bound == Bound::Query ||
            (owner.bound == Bound::GreaterEq && owner.bound_value == 1.0)))
        fail("G F is only supported under P>=1 or P=?", t);
      path.kind = PathKind::GloballyEventually;
      path.right = parse_or();
      return path;
    }
    if (t.kind == Token::Kind::Ident && t.text == "F") {
      lex_.take();
      path.left = make_true();
      path.kind = PathKind::Until;
      if (lex_.peek().kind == Token::Kind::LessEq) {
        lex_.take();
        path.kind = PathKind::BoundedUntil;
        path.step_bound = take_step_bound();
      }
      path.right = parse_or();
      return path;
    }
    // phi U [<=k] phi
    path.left = parse_or();
    const Token u = lex_.take();
    if (u.kind != Token::Kind::Ident || u.text != "U")
      fail("expected a path operator (X, F, G F or U)", u);
    path.kind = PathKind::Until;
    if (lex_.peek().kind == Token::Kind::LessEq) {
      lex_.take();
      path.kind = PathKind::BoundedUntil;
      path.step_bound = take_step_bound();
    }
    path.right = parse_or();
    return path;
  }

  int take_step_bound() {
    const Token num = lex_.take();
    if (num.kind != Token::Kind::Number) fail("expected a step bound", num);
    const double v = num.number;
    if (v < 0.0 || v != static_cast<double>(static_cast<int>(v)))
      fail("step bound must be a non-negative integer", num);
    return static_cast<int>(v);
  }

  Lexer lex_;
};

void print_formula(std::ostream& os, const Formula& f);

void print_path(std::ostream& os, const PathFormula& p) {
  switch (p.kind) {
    case PathKind::Next:
      os << "X ";
      print_formula(os, *p.right);
      break;
    case PathKind::GloballyEventually:
      os << "G F ";
      print_formula(os, *p.right);
      break;
    case PathKind::Until:
    case PathKind::BoundedUntil: {
      const bool sugar_f = p.left && p.left->kind == Formula::Kind::True;
      if (sugar_f) {
        os << "F";
      } else {
        print_formula(os, *p.left);
        os << " U";
      }
      if (p.kind == PathKind::BoundedUntil) os << "<=" << p.step_bound;
      os << ' ';
      print_formula(os, *p.right);
      break;
    }
  }
}

void print_formula(std::ostream& os, const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::True: os << "true"; break;
    case Formula::Kind::Atom: os << f.atom; break;
    case Formula::Kind::Not:
      os << "!(";
      print_formula(os, *f.lhs);
      os << ')';
      break;
    case Formula::Kind::And:
    case Formula::Kind::Or:
      os << '(';
      print_formula(os, *f.lhs);
      os << (f.kind == Formula::Kind::And ? " & " : " | ");
      print_formula(os, *f.rhs);
      os << ')';
      break;
    case Formula::Kind::Prob:
      os << 'P';
      switch (f.bound) {
        case Bound::Query: os << "=?"; break;
        case Bound::Less: os << '<' << shortest(f.bound_value); break;
        case Bound::LessEq: os << "<=" << shortest(f.bound_value); break;
        case Bound::Greater: os << '>' << shortest(f.bound_value); break;
        case Bound::GreaterEq: os << ">=" << shortest(f.bound_value); break;
      }
      os << " [ ";
      print_path(os, f.path);
      os << " ]";
      break;
  }
}

}  // namespace

FormulaPtr parse(std::string_view text) { return Parser(text).parse_all(); }

std::string to_string(const Formula& f) {
  std::ostringstream os;
  print_formula(os, f);
  return os.str();
}

bool equal(const Formula& a, const Formula& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Formula::Kind::True: return true;
    case Formula::Kind::Atom: return a.atom == b.atom;
    case Formula::Kind::Not: return equal(*a.lhs, *b.lhs);
    case Formula::Kind::And:
    case Formula::Kind::Or: return equal(*a.lhs, *b.lhs) && equal(*a.rhs, *b.rhs);
    case Formula::Kind::Prob: {
      if (a.bound != b.bound || a.bound_value != b.bound_value) return false;
      const PathFormula& pa = a.path;
      const PathFormula& pb = b.path;
      if (pa.kind != pb.kind || pa.step_bound != pb.step_bound) return false;
      if (static_cast<bool>(pa.left) != static_cast<bool>(pb.left)) return false;
      if (pa.left && !equal(*pa.left, *pb.left)) return false;
      return equal(*pa.right, *pb.right);
    }
  }
  return false;
}

}  // namespace rlsafe::pctl
