// Copyright 2026 The Shardhouse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "shardhouse/sql.h"

#include <algorithm>
#include <cctype>

#include "shardhouse/errors.h"

namespace shardhouse {

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += '\'';
    out += c;
  }
  return out + "'";
}

std::string literal_text(const Value& v) {
  if (is_null(v)) return "NULL";
  if (auto s = std::get_if<std::string>(&v)) return quote(*s);
  if (auto d = std::get_if<Date>(&v)) return "DATE " + quote(format_date(*d));
  return format_value(v);
}

}  // namespace

std::string Expr::text() const {
  switch (kind) {
    case Kind::kColumn: return table.empty() ? column : table + "." + column;
    case Kind::kLiteral: return literal_text(literal);
    case Kind::kBinary: return "(" + lhs->text() + " " + op + " " + rhs->text() + ")";
    case Kind::kAggregate: return func + "(" + (lhs ? lhs->text() : "*") + ")";
  }
  return "?";
}

bool Expr::contains_aggregate() const {
  if (kind == Kind::kAggregate) return true;
  return (lhs && lhs->contains_aggregate()) || (rhs && rhs->contains_aggregate());
}

ExprPtr make_column(std::string table, std::string column) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::kColumn;
  e->table = std::move(table);
  e->column = std::move(column);
  return e;
}

ExprPtr make_literal(Value v) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::kLiteral;
  e->literal = std::move(v);
  return e;
}

std::string Condition::text() const {
  const std::string no = negated ? "NOT " : "";
  switch (kind) {
    case Kind::kCompare: return lhs->text() + " " + cmp + " " + rhs->text();
    case Kind::kBetween:
      return lhs->text() + " " + no + "BETWEEN " + lo->text() + " AND " + hi->text();
    case Kind::kIn: {
      std::string out = lhs->text() + " " + no + "IN (";
      for (std::size_t i = 0; i < list.size(); ++i) out += (i ? ", " : "") + list[i]->text();
      return out + ")";
    }
    case Kind::kLike: return lhs->text() + " " + no + "LIKE " + quote(pattern);
    case Kind::kIsNull: return lhs->text() + (negated ? " IS NOT NULL" : " IS NULL");
    case Kind::kAnd:
    case Kind::kOr: {
      std::string out = "(";
      for (std::size_t i = 0; i < children.size(); ++i) {
        if (i) out += kind == Kind::kAnd ? " AND " : " OR ";
        out += children[i].text();
      }
      return out + ")";
    }
  }
  return "?";
}

bool SelectStmt::is_aggregate() const {
  if (!group_by.empty() || !having.empty()) return true;
  return std::any_of(items.begin(), items.end(),
                     [](const SelectItem& i) { return i.expr->contains_aggregate(); });
}

namespace {

struct Token {
  enum class Kind { kIdent, kNumber, kString, kSymbol, kEnd };
  Kind kind = Kind::kEnd;
  std::string text;  // identifiers keep case; keywords compare upper-cased
  std::size_t pos = 0;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '-' && i + 1 < s.size() && s[i + 1] == '-') {
      while (i < s.size() && s[i] != '\n') ++i;
      continue;
    }
    Token t;
    t.pos = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      t.kind = Token::Kind::kIdent;
      t.text = std::string(s.substr(i, j - i));
      i = j;
    } else if (c == '"') {
      std::size_t j = s.find('"', i + 1);
      if (j == std::string_view::npos) throw QueryError("unterminated quoted identifier");
      t.kind = Token::Kind::kIdent;
      t.text = std::string(s.substr(i + 1, j - i - 1));
      i = j + 1;
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      std::size_t j = i;
      bool dot = false;
      while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || (s[j] == '.' && !dot))) {
        if (s[j] == '.') dot = true;
        ++j;
      }
      t.kind = Token::Kind::kNumber;
      t.text = std::string(s.substr(i, j - i));
      i = j;
    } else if (c == '\'') {
      std::string text;
      std::size_t j = i + 1;
      for (;; ++j) {
        if (j >= s.size()) throw QueryError("unterminated string literal at " + std::to_string(i));
        if (s[j] == '\'') {
          if (j + 1 < s.size() && s[j + 1] == '\'') {
            text += '\'';
            ++j;
            continue;
          }
          break;
        }
        text += s[j];
      }
      t.kind = Token::Kind::kString;
      t.text = std::move(text);
      i = j + 1;
    } else {
      static const char* two[] = {"<>", "!=", "<=", ">="};
      t.kind = Token::Kind::kSymbol;
      t.text = std::string(1, c);
      for (const char* op : two) {
        if (s.substr(i, 2) == op) t.text = op;
      }
      if (std::string("(),*+-/=<>;.").find(c) == std::string::npos) {
        throw QueryError("unexpected character '" + std::string(1, c) + "' at " + std::to_string(i));
      }
      i += t.text.size();
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.pos = s.size();
  out.push_back(end);
  return out;
}

const char* const kReserved[] = {"SELECT", "FROM",  "WHERE", "GROUP", "BY",      "HAVING",
                                 "ORDER",  "LIMIT", "AND",   "OR",    "NOT",     "AS",
                                 "ON",     "JOIN",  "INNER", "IN",    "BETWEEN", "LIKE",
                                 "IS",     "NULL",  "ASC",   "DESC",  "DISTINCT"};

bool reserved(const std::string& word) {
  const std::string u = upper(word);
  return std::any_of(std::begin(kReserved), std::end(kReserved),
                     [&](const char* k) { return u == k; });
}

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(tokenize(text)) {}

  SelectStmt parse() {
    SelectStmt st;
    expect_kw("SELECT");
    if (accept_kw("DISTINCT")) st.distinct = true;
    if (accept_sym("*")) {
      st.star = true;
    } else {
      do {
        SelectItem item;
        item.expr = expr();
        if (accept_kw("AS")) {
          item.alias = ident();
        } else if (peek().kind == Token::Kind::kIdent && !reserved(peek().text)) {
          item.alias = ident();
        }
        st.items.push_back(std::move(item));
      } while (accept_sym(","));
    }
    expect_kw("FROM");
    do {
      st.from.push_back(table_ref());
      while (accept_kw("JOIN") || (accept_kw("INNER") && (expect_kw("JOIN"), true))) {
        st.from.push_back(table_ref());
        expect_kw("ON");
        add_conjuncts(st.where, or_cond());
      }
    } while (accept_sym(","));
    if (accept_kw("WHERE")) add_conjuncts(st.where, or_cond());
    if (accept_kw("GROUP")) {
      expect_kw("BY");
      do st.group_by.push_back(expr());
      while (accept_sym(","));
    }
    if (accept_kw("HAVING")) add_conjuncts(st.having, or_cond());
    if (accept_kw("ORDER")) {
      expect_kw("BY");
      do {
        OrderItem o;
        o.expr = expr();
        if (accept_kw("DESC")) {
          o.desc = true;
        } else {
          accept_kw("ASC");
        }
        st.order_by.push_back(std::move(o));
      } while (accept_sym(","));
    }
    if (accept_kw("LIMIT")) {
      const Token& t = next();
      if (t.kind != Token::Kind::kNumber || t.text.find('.') != std::string::npos) {
        fail("LIMIT expects an integer", t);
      }
      st.limit = std::stoll(t.text);
    }
    accept_sym(";");
    if (peek().kind != Token::Kind::kEnd) fail("unexpected trailing input", peek());
    return st;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  [[noreturn]] void fail(const std::string& msg, const Token& at) const {
    throw QueryError(msg + " at position " + std::to_string(at.pos) +
                     (at.text.empty() ? "" : " near '" + at.text + "'"));
  }
  bool is_kw(const Token& t, const char* kw) const {
    return t.kind == Token::Kind::kIdent && upper(t.text) == kw;
  }
  bool accept_kw(const char* kw) {
    if (is_kw(peek(), kw)) {
      next();
      return true;
    }
    return false;
  }
  void expect_kw(const char* kw) {
    if (!accept_kw(kw)) fail(std::string("expected ") + kw, peek());
  }
  bool accept_sym(const char* sym) {
    if (peek().kind == Token::Kind::kSymbol && peek().text == sym) {
      next();
      return true;
    }
    return false;
  }
  void expect_sym(const char* sym) {
    if (!accept_sym(sym)) fail(std::string("expected '") + sym + "'", peek());
  }
  std::string ident() {
    const Token& t = next();
    if (t.kind != Token::Kind::kIdent || reserved(t.text)) fail("expected an identifier", t);
    return t.text;
  }

  TableRef table_ref() {
    TableRef r;
    r.name = ident();
    if (accept_kw("AS")) {
      r.alias = ident();
    } else if (peek().kind == Token::Kind::kIdent && !reserved(peek().text)) {
      r.alias = ident();
    } else {
      r.alias = r.name;
    }
    return r;
  }

  static void add_conjuncts(std::vector<Condition>& out, Condition c) {
    if (c.kind == Condition::Kind::kAnd) {
      for (auto& ch : c.children) add_conjuncts(out, std::move(ch));
    } else {
      out.push_back(std::move(c));
    }
  }

  Condition or_cond() {
    Condition first = and_cond();
    if (!is_kw(peek(), "OR")) return first;
    Condition c;
    c.kind = Condition::Kind::kOr;
    c.children.push_back(std::move(first));
    while (accept_kw("OR")) c.children.push_back(and_cond());
    return fold_or(std::move(c));
  }

  // col = a OR col = b OR ... becomes col IN (a, b, ...).
  static Condition fold_or(Condition c) {
    const Condition& head = c.children.front();
    auto simple_eq = [](const Condition& x) {
      return x.kind == Condition::Kind::kCompare && x.cmp == "=" && x.lhs->is_column() &&
             x.rhs->is_literal() && !is_null(x.rhs->literal);
    };
    for (const auto& ch : c.children) {
      if (!simple_eq(ch) || ch.lhs->text() != head.lhs->text()) return c;
    }
    Condition in;
    in.kind = Condition::Kind::kIn;
    in.lhs = head.lhs;
    for (const auto& ch : c.children) in.list.push_back(ch.rhs);
    return in;
  }

  Condition and_cond() {
    Condition first = primary_cond();
    if (!is_kw(peek(), "AND")) return first;
    Condition c;
    c.kind = Condition::Kind::kAnd;
    c.children.push_back(std::move(first));
    while (accept_kw("AND")) c.children.push_back(primary_cond());
    return c;
  }

  // NOT is pushed down to the leaves; flipping comparisons and De Morgan
  // both hold under three-valued logic.
  static Condition negate(Condition c) {
    using K = Condition::Kind;
    switch (c.kind) {
      case K::kCompare: {
        static const std::pair<const char*, const char*> flips[] = {
            {"=", "<>"}, {"<>", "="}, {"<", ">="}, {">=", "<"}, {">", "<="}, {"<=", ">"}};
        for (const auto& [from, to] : flips) {
          if (c.cmp == from) {
            c.cmp = to;
            break;
          }
        }
        return c;
      }
      case K::kAnd:
      case K::kOr:
        c.kind = c.kind == K::kAnd ? K::kOr : K::kAnd;
        for (auto& ch : c.children) ch = negate(std::move(ch));
        return c;
      default:
        c.negated = !c.negated;
        return c;
    }
  }

  Condition primary_cond() {
    if (accept_kw("NOT")) return negate(primary_cond());
    if (peek().kind == Token::Kind::kSymbol && peek().text == "(") {
      // Either a parenthesised condition or an expression such as (a + b) > 3.
      const std::size_t save = pos_;
      try {
        next();
        Condition c = or_cond();
        expect_sym(")");
        if (!starts_predicate_tail()) return c;
      } catch (const QueryError&) {
      }
      pos_ = save;
    }
    return predicate();
  }

  bool starts_predicate_tail() const {
    const Token& t = peek();
    if (t.kind == Token::Kind::kSymbol) {
      return t.text == "=" || t.text == "<>" || t.text == "!=" || t.text == "<" ||
             t.text == "<=" || t.text == ">" || t.text == ">=" || t.text == "+" ||
             t.text == "-" || t.text == "*" || t.text == "/";
    }
    return is_kw(t, "BETWEEN") || is_kw(t, "IN") || is_kw(t, "LIKE") || is_kw(t, "IS") ||
           is_kw(t, "NOT");
  }

  Condition predicate() {
    Condition c;
    c.lhs = expr();
    if (accept_kw("IS")) {
      c.kind = Condition::Kind::kIsNull;
      c.negated = accept_kw("NOT");
      expect_kw("NULL");
      return c;
    }
    const bool negated = accept_kw("NOT");
    if (accept_kw("BETWEEN")) {
      c.kind = Condition::Kind::kBetween;
      c.lo = expr();
      expect_kw("AND");
      c.hi = expr();
    } else if (accept_kw("IN")) {
      c.kind = Condition::Kind::kIn;
      expect_sym("(");
      do c.list.push_back(expr());
      while (accept_sym(","));
      expect_sym(")");
    } else if (accept_kw("LIKE")) {
      c.kind = Condition::Kind::kLike;
      const Token& t = next();
      if (t.kind != Token::Kind::kString) fail("LIKE expects a string pattern", t);
      c.pattern = t.text;
    } else if (negated) {
      fail("expected BETWEEN, IN or LIKE after NOT", peek());
    } else {
      const Token& t = next();
      static const char* ops[] = {"=", "<>", "!=", "<", "<=", ">", ">="};
      if (t.kind != Token::Kind::kSymbol ||
          std::none_of(std::begin(ops), std::end(ops), [&](const char* o) { return t.text == o; })) {
        fail("expected a comparison operator", t);
      }
      c.kind = Condition::Kind::kCompare;
      c.cmp = t.text == "!=" ? "<>" : t.text;
      c.rhs = expr();
      // The cube-query idiom "x = null" selects superaggregate rows.
      if (c.rhs->is_literal() && is_null(c.rhs->literal) && (c.cmp == "=" || c.cmp == "<>")) {
        c.kind = Condition::Kind::kIsNull;
        c.negated = c.cmp == "<>";
        c.rhs = nullptr;
      }
      return c;
    }
    c.negated = negated;
    return c;
  }

  ExprPtr expr() {
    ExprPtr e = term();
    while (peek().kind == Token::Kind::kSymbol && (peek().text == "+" || peek().text == "-")) {
      const char op = next().text[0];
      e = binary(op, e, term());
    }
    return e;
  }

  ExprPtr term() {
    ExprPtr e = factor();
    while (peek().kind == Token::Kind::kSymbol && (peek().text == "*" || peek().text == "/")) {
      const char op = next().text[0];
      e = binary(op, e, factor());
    }
    return e;
  }

  static ExprPtr binary(char op, ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::kBinary;
    e->op = op;
    e->lhs = std::move(a);
    e->rhs = std::move(b);
    return e;
  }

  static Value number(const std::string& text, bool neg) {
    const std::string s = neg ? "-" + text : text;
    auto dot = s.find('.');
    if (dot == std::string::npos) {
      try {
        return std::stoll(s);
      } catch (const std::out_of_range&) {
        throw QueryError("integer literal out of range: " + s);
      }
    }
    return parse_decimal(s, static_cast<int>(s.size() - dot - 1));
  }

  ExprPtr factor() {
    const Token& t = peek();
    if (t.kind == Token::Kind::kSymbol && t.text == "-") {
      next();
      const Token& n = peek();
      if (n.kind == Token::Kind::kNumber) return make_literal(number(next().text, true));
      return binary('-', make_literal(std::int64_t{0}), factor());
    }
    if (t.kind == Token::Kind::kSymbol && t.text == "(") {
      next();
      ExprPtr e = expr();
      expect_sym(")");
      return e;
    }
    if (t.kind == Token::Kind::kNumber) return make_literal(number(next().text, false));
    if (t.kind == Token::Kind::kString) return make_literal(next().text);
    if (t.kind != Token::Kind::kIdent) fail("expected an expression", t);
    const std::string word = upper(t.text);
    if (word == "NULL") {
      next();
      return make_literal(std::monostate{});
    }
    if (word == "TRUE" || word == "FALSE") {
      next();
      return make_literal(word == "TRUE");
    }
    if (word == "DATE" && peek(1).kind == Token::Kind::kString) {
      next();
      return make_literal(parse_date(next().text));
    }
    if ((word == "SUM" || word == "COUNT" || word == "AVG" || word == "MIN" || word == "MAX") &&
        peek(1).kind == Token::Kind::kSymbol && peek(1).text == "(") {
      next();
      next();
      auto e = std::make_shared<Expr>();
      e->kind = Expr::Kind::kAggregate;
      e->func = word;
      if (accept_kw("DISTINCT")) fail("DISTINCT aggregates are not supported", peek());
      if (word == "COUNT" && accept_sym("*")) {
        e->lhs = nullptr;
      } else {
        e->lhs = expr();
        if (e->lhs->contains_aggregate()) fail("nested aggregate", peek());
      }
      expect_sym(")");
      return e;
    }
    std::string first = ident();
    if (accept_sym(".")) return make_column(first, ident());
    return make_column("", first);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

SelectStmt parse_sql(std::string_view text) { return Parser(text).parse(); }

}  // namespace shardhouse
