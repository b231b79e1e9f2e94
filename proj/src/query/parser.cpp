// Recursive-descent parser and canonical printer for the hybrid query DSL.

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "hmgi/errors.hpp"
#include "hmgi/query/ast.hpp"

namespace hmgi::query {

namespace {

enum class Tok {
  Ident, Int, Float, String, Param,
  LParen, RParen, LBrace, RBrace, LBracket, RBracket,
  Comma, Colon, Dot,
  Eq, Ne, Lt, Le, Gt, Ge,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::size_t line = 1;
  std::size_t column = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return current_; }

  Token take() {
    Token t = current_;
    advance();
    return t;
  }

  [[noreturn]] void fail(const Token& at, const std::string& expected) const {
    throw SyntaxError(at.line, at.column, expected,
                      at.kind == Tok::End ? "unexpected end of query"
                                          : "unexpected '" + at.text + "'");
  }

 private:
  void advance() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_])))
      bump();
    current_.line = line_;
    current_.column = col_;
    if (pos_ >= src_.size()) {
      current_.kind = Tok::End;
      current_.text.clear();
      return;
    }
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string word;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '_'))
        word.push_back(take_char());
      current_.kind = Tok::Ident;
      current_.text = std::move(word);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+') {
      std::string num;
      num.push_back(take_char());
      bool is_float = false;
      while (pos_ < src_.size()) {
        char d = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(d))) {
          num.push_back(take_char());
        } else if (d == '.' || d == 'e' || d == 'E') {
          is_float = true;
          num.push_back(take_char());
          if ((d == 'e' || d == 'E') && pos_ < src_.size() &&
              (src_[pos_] == '-' || src_[pos_] == '+'))
            num.push_back(take_char());
        } else {
          break;
        }
      }
      if (num == "-" || num == "+")
        throw SyntaxError(current_.line, current_.column, "number",
                          "stray sign");
      current_.kind = is_float ? Tok::Float : Tok::Int;
      current_.text = std::move(num);
      return;
    }
    if (c == '$') {
      bump();
      std::string name;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '_'))
        name.push_back(take_char());
      if (name.empty())
        throw SyntaxError(current_.line, current_.column, "parameter name",
                          "bare '$'");
      current_.kind = Tok::Param;
      current_.text = std::move(name);
      return;
    }
    if (c == '\'' || c == '"') {
      char quote = take_char();
      std::string s;
      while (pos_ < src_.size() && src_[pos_] != quote) {
        if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) bump();
        s.push_back(take_char());
      }
      if (pos_ >= src_.size())
        throw SyntaxError(current_.line, current_.column, "closing quote",
                          "unterminated string");
      bump();  // closing quote
      current_.kind = Tok::String;
      current_.text = std::move(s);
      return;
    }
    switch (c) {
      case '(': single(Tok::LParen); return;
      case ')': single(Tok::RParen); return;
      case '{': single(Tok::LBrace); return;
      case '}': single(Tok::RBrace); return;
      case '[': single(Tok::LBracket); return;
      case ']': single(Tok::RBracket); return;
      case ',': single(Tok::Comma); return;
      case ':': single(Tok::Colon); return;
      case '.': single(Tok::Dot); return;
      case '=': single(Tok::Eq); return;
      case '!':
        bump();
        if (pos_ < src_.size() && src_[pos_] == '=') {
          bump();
          current_.kind = Tok::Ne;
          current_.text = "!=";
          return;
        }
        throw SyntaxError(current_.line, current_.column, "'='",
                          "stray '!'");
      case '<':
        bump();
        if (pos_ < src_.size() && src_[pos_] == '=') {
          bump();
          current_.kind = Tok::Le;
          current_.text = "<=";
        } else {
          current_.kind = Tok::Lt;
          current_.text = "<";
        }
        return;
      case '>':
        bump();
        if (pos_ < src_.size() && src_[pos_] == '=') {
          bump();
          current_.kind = Tok::Ge;
          current_.text = ">=";
        } else {
          current_.kind = Tok::Gt;
          current_.text = ">";
        }
        return;
      default:
        throw SyntaxError(line_, col_, "token",
                          std::string("unrecognized character '") + c + "'");
    }
  }

  void single(Tok kind) {
    current_.kind = kind;
    current_.text = src_[pos_];
    bump();
  }

  char take_char() {
    char c = src_[pos_];
    bump();
    return c;
  }

  void bump() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
  Token current_;
};

class Parser {
 public:
  explicit Parser(const std::string& src) : lex_(src) {}

  HybridQueryAst parse_query() {
    HybridQueryAst ast;
    if (is_keyword("MATCH")) {
      lex_.take();
      ast.pattern = parse_pattern();
      if (is_keyword("WHERE")) {
        lex_.take();
        ast.predicates.push_back(parse_predicate());
        while (is_keyword("AND")) {
          lex_.take();
          ast.predicates.push_back(parse_predicate());
        }
      }
    }
    expect_keyword("VECTOR_SEARCH");
    parse_vector_clause(ast.vector);
    if (is_keyword("TRAVERSE")) {
      lex_.take();
      parse_traverse_clause(ast.traverse);
      // hops=0 means a pure vector query; drop meaningless modifiers so
      // the canonical form is unique.
      if (ast.traverse.hops == 0) ast.traverse = TraverseClause{};
    }
    bool have_weights = false;
    if (is_keyword("SIMILARITY_WEIGHT")) {
      lex_.take();
      parse_weights(ast);
      have_weights = true;
    }
    if (!have_weights) {
      if (ast.traverse.hops > 0) {
        ast.w_v = 0.5;
        ast.w_g = 0.5;
      } else {
        ast.w_v = 1.0;
        ast.w_g = 0.0;
      }
    }
    if (is_keyword("BUDGET")) {
      lex_.take();
      ast.budget_ms = parse_number("budget in milliseconds");
      if (*ast.budget_ms <= 0)
        lex_.fail(lex_.peek(), "positive budget");
    }
    expect_keyword("RETURN");
    expect_keyword("TOP");
    ast.top_n = parse_uint("result count");
    if (lex_.peek().kind != Tok::End) lex_.fail(lex_.peek(), "end of query");
    return ast;
  }

 private:
  bool is_keyword(const char* kw) const {
    return lex_.peek().kind == Tok::Ident && lex_.peek().text == kw;
  }

  void expect_keyword(const char* kw) {
    if (!is_keyword(kw)) lex_.fail(lex_.peek(), std::string("'") + kw + "'");
    lex_.take();
  }

  Token expect(Tok kind, const char* what) {
    if (lex_.peek().kind != kind) lex_.fail(lex_.peek(), what);
    return lex_.take();
  }

  std::string expect_ident(const char* what) {
    return expect(Tok::Ident, what).text;
  }

  double parse_number(const char* what) {
    const Token& t = lex_.peek();
    if (t.kind != Tok::Int && t.kind != Tok::Float) lex_.fail(t, what);
    double value = 0.0;
    auto [p, ec] =
        std::from_chars(t.text.data(), t.text.data() + t.text.size(), value);
    if (ec != std::errc() || p != t.text.data() + t.text.size())
      lex_.fail(t, what);
    lex_.take();
    return value;
  }

  std::uint32_t parse_uint(const char* what) {
    const Token& t = lex_.peek();
    if (t.kind != Tok::Int) lex_.fail(t, what);
    if (!t.text.empty() && t.text[0] == '-') lex_.fail(t, what);
    std::uint32_t value = 0;
    auto [p, ec] =
        std::from_chars(t.text.data(), t.text.data() + t.text.size(), value);
    if (ec != std::errc() || p != t.text.data() + t.text.size())
      lex_.fail(t, what);
    lex_.take();
    return value;
  }

  PropertyValue parse_literal() {
    const Token& t = lex_.peek();
    switch (t.kind) {
      case Tok::String: return PropertyValue(lex_.take().text);
      case Tok::Int: {
        std::int64_t v = 0;
        std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        lex_.take();
        return PropertyValue(v);
      }
      case Tok::Float: {
        double v = parse_number("number");
        return PropertyValue(v);
      }
      case Tok::Ident:
        if (t.text == "true") {
          lex_.take();
          return PropertyValue(true);
        }
        if (t.text == "false") {
          lex_.take();
          return PropertyValue(false);
        }
        [[fallthrough]];
      default:
        lex_.fail(t, "literal (string, number, true, false)");
    }
  }

  MatchPattern parse_pattern() {
    MatchPattern pat;
    expect(Tok::LParen, "'('");
    pat.var = expect_ident("pattern variable");
    if (lex_.peek().kind == Tok::Colon) {
      lex_.take();
      pat.label = expect_ident("label");
    }
    if (lex_.peek().kind == Tok::LBrace) {
      lex_.take();
      while (true) {
        std::string key = expect_ident("property name");
        expect(Tok::Colon, "':'");
        pat.equals[key] = parse_literal();
        if (lex_.peek().kind == Tok::Comma) {
          lex_.take();
          continue;
        }
        break;
      }
      expect(Tok::RBrace, "'}'");
    }
    expect(Tok::RParen, "')'");
    return pat;
  }

  PropertyPredicate parse_predicate() {
    PropertyPredicate pred;
    pred.var = expect_ident("pattern variable");
    expect(Tok::Dot, "'.'");
    pred.property = expect_ident("property name");
    switch (lex_.peek().kind) {
      case Tok::Eq: pred.op = CompareOp::Eq; break;
      case Tok::Ne: pred.op = CompareOp::Ne; break;
      case Tok::Lt: pred.op = CompareOp::Lt; break;
      case Tok::Le: pred.op = CompareOp::Le; break;
      case Tok::Gt: pred.op = CompareOp::Gt; break;
      case Tok::Ge: pred.op = CompareOp::Ge; break;
      default: lex_.fail(lex_.peek(), "comparison operator");
    }
    lex_.take();
    pred.value = parse_literal();
    return pred;
  }

  void parse_vector_clause(VectorClause& vc) {
    expect(Tok::LParen, "'('");
    vc.modality = Modality::from_name(expect_ident("modality name"));
    expect(Tok::Comma, "','");
    const Token& t = lex_.peek();
    if (t.kind == Tok::Param) {
      vc.source = lex_.take().text;
    } else if (t.kind == Tok::LBracket) {
      lex_.take();
      std::vector<float> lits;
      if (lex_.peek().kind != Tok::RBracket) {
        while (true) {
          lits.push_back(static_cast<float>(parse_number("vector component")));
          if (lex_.peek().kind == Tok::Comma) {
            lex_.take();
            continue;
          }
          break;
        }
      }
      expect(Tok::RBracket, "']'");
      vc.source = std::move(lits);
    } else if (t.kind == Tok::Ident && t.text == "node") {
      lex_.take();
      expect(Tok::LParen, "'('");
      vc.source = static_cast<NodeId>(parse_uint("node id"));
      expect(Tok::RParen, "')'");
    } else {
      lex_.fail(t, "$param, [vector literal], or node(id)");
    }
    expect(Tok::Comma, "','");
    expect_key("k");
    vc.k = parse_uint("k");
    if (vc.k < 1) lex_.fail(lex_.peek(), "k >= 1");
    if (lex_.peek().kind == Tok::Comma) {
      lex_.take();
      expect_key("ef");
      vc.ef = parse_uint("ef");
    }
    expect(Tok::RParen, "')'");
  }

  void expect_key(const char* name) {
    if (!is_keyword(name)) lex_.fail(lex_.peek(), std::string(name) + "=");
    lex_.take();
    expect(Tok::Eq, "'='");
  }

  void parse_traverse_clause(TraverseClause& tc) {
    expect_key("hops");
    tc.hops = parse_uint("hop count");
    if (is_keyword("types")) {
      lex_.take();
      expect(Tok::Eq, "'='");
      expect(Tok::LParen, "'('");
      std::set<std::string> types;
      while (true) {
        types.insert(expect_ident("edge type"));
        if (lex_.peek().kind == Tok::Comma) {
          lex_.take();
          continue;
        }
        break;
      }
      expect(Tok::RParen, "')'");
      tc.types = std::move(types);
    }
    if (is_keyword("dir")) {
      lex_.take();
      expect(Tok::Eq, "'='");
      std::string d = expect_ident("out, in, or both");
      if (d == "out") tc.dir = Direction::Out;
      else if (d == "in") tc.dir = Direction::In;
      else if (d == "both") tc.dir = Direction::Both;
      else lex_.fail(lex_.peek(), "out, in, or both");
    }
  }

  void parse_weights(HybridQueryAst& ast) {
    if (is_keyword("auto")) {
      lex_.take();
      ast.auto_weights = true;
      ast.w_v = 0.5;
      ast.w_g = 0.5;
      return;
    }
    expect_key("v");
    double v = parse_number("vector weight");
    expect_key("g");
    double g = parse_number("graph weight");
    if (v < 0 || g < 0)
      throw NegativeWeight("v=" + std::to_string(v) + " g=" + std::to_string(g));
    if (v + g <= 0)
      throw NegativeWeight("weights must not both be zero");
    // Normalization must be idempotent so printed queries reparse to the
    // same AST: already-normalized pairs pass through, and w_g is derived
    // as 1 - w_v so the reparsed sum is exactly 1.0.
    if (v + g == 1.0) {
      ast.w_v = v;
      ast.w_g = g;
    } else {
      ast.w_v = v / (v + g);
      ast.w_g = 1.0 - ast.w_v;
    }
  }

  Lexer lex_;
};

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string format_float(float v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

void print_literal(std::ostringstream& os, const PropertyValue& v) {
  switch (v.index()) {
    case 0: os << (std::get<bool>(v) ? "true" : "false"); break;
    case 1: os << std::get<std::int64_t>(v); break;
    case 2: os << format_double(std::get<double>(v)); break;
    case 3: {
      os << '\'';
      for (char c : std::get<std::string>(v)) {
        if (c == '\'' || c == '\\') os << '\\';
        os << c;
      }
      os << '\'';
      break;
    }
  }
}

const char* op_text(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "=";
    case CompareOp::Ne: return "!=";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
  }
  return "=";
}

}  // namespace

HybridQueryAst parse(const std::string& text) {
  Parser parser(text);
  return parser.parse_query();
}

std::string print(const HybridQueryAst& ast) {
  std::ostringstream os;
  os << "MATCH (" << ast.pattern.var;
  if (ast.pattern.label) os << ":" << *ast.pattern.label;
  if (!ast.pattern.equals.empty()) {
    os << " {";
    bool first = true;
    for (const auto& [k, v] : ast.pattern.equals) {
      if (!first) os << ", ";
      first = false;
      os << k << ": ";
      print_literal(os, v);
    }
    os << "}";
  }
  os << ")";
  if (!ast.predicates.empty()) {
    os << " WHERE ";
    bool first = true;
    for (const PropertyPredicate& p : ast.predicates) {
      if (!first) os << " AND ";
      first = false;
      os << p.var << "." << p.property << " " << op_text(p.op) << " ";
      print_literal(os, p.value);
    }
  }
  os << " VECTOR_SEARCH(" << ast.vector.modality.name() << ", ";
  if (std::holds_alternative<std::string>(ast.vector.source)) {
    os << "$" << std::get<std::string>(ast.vector.source);
  } else if (std::holds_alternative<NodeId>(ast.vector.source)) {
    os << "node(" << std::get<NodeId>(ast.vector.source) << ")";
  } else {
    const auto& lits = std::get<std::vector<float>>(ast.vector.source);
    os << "[";
    for (std::size_t i = 0; i < lits.size(); ++i) {
      if (i > 0) os << ", ";
      os << format_float(lits[i]);
    }
    os << "]";
  }
  os << ", k=" << ast.vector.k;
  if (ast.vector.ef) os << ", ef=" << *ast.vector.ef;
  os << ")";
  if (ast.traverse.hops > 0) {
    os << " TRAVERSE hops=" << ast.traverse.hops;
    if (ast.traverse.types) {
      os << " types=(";
      bool first = true;
      for (const std::string& t : *ast.traverse.types) {
        if (!first) os << ", ";
        first = false;
        os << t;
      }
      os << ")";
    }
    switch (ast.traverse.dir) {
      case Direction::Out: os << " dir=out"; break;
      case Direction::In: os << " dir=in"; break;
      case Direction::Both: os << " dir=both"; break;
    }
  }
  if (ast.auto_weights) {
    os << " SIMILARITY_WEIGHT auto";
  } else {
    os << " SIMILARITY_WEIGHT v=" << format_double(ast.w_v)
       << " g=" << format_double(ast.w_g);
  }
  if (ast.budget_ms) os << " BUDGET " << format_double(*ast.budget_ms);
  os << " RETURN TOP " << ast.top_n;
  return os.str();
}

}  // namespace hmgi::query
