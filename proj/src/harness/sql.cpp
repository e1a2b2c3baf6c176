#include "umjoin/harness/sql.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>

#include "umjoin/core/error.hpp"

namespace umjoin::harness {

namespace {

enum class Tok { kIdent, kStar, kComma, kDot, kEq, kSemi, kOtherOp, kLiteral, kOther, kEnd };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::vector<Token> tokenize(std::string_view sql) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < sql.size()) {
    const char c = sql[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '-' && i + 1 < sql.size() && sql[i + 1] == '-') {
      while (i < sql.size() && sql[i] != '\n') ++i;
      continue;
    }
    const std::size_t start = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < sql.size() && (std::isalnum(static_cast<unsigned char>(sql[i])) || sql[i] == '_')) ++i;
      out.push_back({Tok::kIdent, std::string(sql.substr(start, i - start)), start});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '\'') {
      if (c == '\'') {
        ++i;
        while (i < sql.size() && sql[i] != '\'') ++i;
        ++i;
      } else {
        while (i < sql.size() && std::isalnum(static_cast<unsigned char>(sql[i]))) ++i;
      }
      out.push_back({Tok::kLiteral, std::string(sql.substr(start, std::min(i, sql.size()) - start)), start});
      continue;
    }
    switch (c) {
      case '*': out.push_back({Tok::kStar, "*", start}); ++i; continue;
      case ',': out.push_back({Tok::kComma, ",", start}); ++i; continue;
      case '.': out.push_back({Tok::kDot, ".", start}); ++i; continue;
      case ';': out.push_back({Tok::kSemi, ";", start}); ++i; continue;
      case '=': out.push_back({Tok::kEq, "=", start}); ++i; continue;
      case '<':
      case '>':
      case '!':
        ++i;
        while (i < sql.size() && (sql[i] == '=' || sql[i] == '>')) ++i;
        out.push_back({Tok::kOtherOp, std::string(sql.substr(start, i - start)), start});
        continue;
      default: out.push_back({Tok::kOther, std::string(1, c), start}); ++i; continue;
    }
  }
  out.push_back({Tok::kEnd, "", sql.size()});
  return out;
}

struct TableRef {
  std::string table;
  std::string alias;
  std::size_t pos;
};

struct Column {
  std::string alias;
  std::string field;
  std::size_t pos;
  std::string qualified() const { return alias + "." + field; }
};

struct Predicate {
  Column a;
  Column b;
  std::size_t pos;
};

const std::set<std::string> kKeywords{"SELECT", "FROM", "WHERE", "AND", "OR", "AS", "ON", "JOIN", "NOT"};

class Parser {
 public:
  explicit Parser(std::string_view sql) : toks_(tokenize(sql)) {}

  void parse(std::vector<TableRef>& tables, std::vector<Predicate>& preds) {
    keyword("SELECT");
    if (peek().kind != Tok::kStar) fail(peek(), "only SELECT * is supported");
    ++at_;
    keyword("FROM");
    tables.push_back(table_ref());
    while (peek().kind == Tok::kComma) {
      ++at_;
      tables.push_back(table_ref());
    }
    if (is_keyword(peek(), "JOIN") || is_keyword(peek(), "ON")) fail(peek(), "explicit JOIN syntax is not supported; list tables with commas");
    if (is_keyword(peek(), "WHERE")) {
      ++at_;
      preds.push_back(predicate());
      while (is_keyword(peek(), "AND")) {
        ++at_;
        preds.push_back(predicate());
      }
      if (is_keyword(peek(), "OR")) fail(peek(), "OR is not supported; predicates must be a conjunction");
    }
    if (peek().kind == Tok::kSemi) ++at_;
    if (peek().kind != Tok::kEnd) fail(peek(), "unexpected '" + peek().text + "'");
  }

 private:
  const Token& peek() const { return toks_[at_]; }

  [[noreturn]] static void fail(const Token& t, const std::string& why) { throw SqlError(t.pos, why); }

  static bool is_keyword(const Token& t, const char* kw) { return t.kind == Tok::kIdent && upper(t.text) == kw; }

  void keyword(const char* kw) {
    if (!is_keyword(peek(), kw)) fail(peek(), std::string("expected ") + kw);
    ++at_;
  }

  std::string identifier(const char* what) {
    const Token& t = peek();
    if (t.kind != Tok::kIdent || kKeywords.contains(upper(t.text))) fail(t, std::string("expected ") + what);
    ++at_;
    return t.text;
  }

  TableRef table_ref() {
    TableRef r;
    r.pos = peek().pos;
    r.table = identifier("table name");
    if (is_keyword(peek(), "AS")) {
      ++at_;
      r.alias = identifier("alias");
    } else if (peek().kind == Tok::kIdent && !kKeywords.contains(upper(peek().text))) {
      r.alias = identifier("alias");
    } else {
      r.alias = r.table;
    }
    return r;
  }

  Column column() {
    Column c;
    c.pos = peek().pos;
    if (peek().kind == Tok::kLiteral) fail(peek(), "literal predicates are not supported");
    const Token start = peek();
    c.alias = identifier("column");
    if (peek().kind != Tok::kDot) fail(start, "columns must be qualified as alias.column");
    ++at_;
    c.field = identifier("column name");
    return c;
  }

  Predicate predicate() {
    Predicate p;
    p.pos = peek().pos;
    p.a = column();
    if (peek().kind == Tok::kOtherOp) fail(peek(), "only equality predicates are supported, found '" + peek().text + "'");
    if (peek().kind != Tok::kEq) fail(peek(), "expected '='");
    ++at_;
    p.b = column();
    return p;
  }

  std::vector<Token> toks_;
  std::size_t at_ = 0;
};

}  // namespace

plan::Plan parse_query(std::string_view sql) {
  std::vector<TableRef> tables;
  std::vector<Predicate> preds;
  Parser(sql).parse(tables, preds);

  std::map<std::string, std::size_t> position;  // alias -> FROM index
  for (std::size_t i = 0; i < tables.size(); ++i) {
    if (!position.emplace(tables[i].alias, i).second) {
      throw SqlError(tables[i].pos, "duplicate alias '" + tables[i].alias + "'");
    }
  }
  // Each predicate joins at the FROM index of its later side.
  std::vector<std::vector<const Predicate*>> at_step(tables.size());
  for (const auto& p : preds) {
    for (const auto* c : {&p.a, &p.b}) {
      if (!position.contains(c->alias)) throw SqlError(c->pos, "unknown alias '" + c->alias + "'");
    }
    const auto ia = position[p.a.alias];
    const auto ib = position[p.b.alias];
    if (ia == ib) throw SqlError(p.pos, "single-table filter predicates are not supported");
    at_step[std::max(ia, ib)].push_back(&p);
  }

  plan::Plan out;
  auto scan = [&](const TableRef& t) {
    plan::PlanNode n;
    n.id = "scan_" + t.alias;
    n.kind = plan::NodeKind::kScan;
    n.table = t.table;
    n.alias = t.alias;
    return out.add(std::move(n));
  };
  std::size_t hashes = 0;
  auto hash = [&](plan::PlanNode* in) {
    plan::PlanNode n;
    n.id = "hash_" + std::to_string(++hashes);
    n.kind = plan::NodeKind::kHash;
    n.inputs = {in};
    return out.add(std::move(n));
  };

  plan::PlanNode* left = scan(tables[0]);
  for (std::size_t i = 1; i < tables.size(); ++i) {
    if (at_step[i].empty()) {
      throw SqlError(tables[i].pos, "no equality predicate connects '" + tables[i].alias + "' to the tables before it");
    }
    plan::PlanNode j;
    j.id = "join_" + std::to_string(i);
    j.kind = plan::NodeKind::kJoin;
    plan::PlanNode* l = hash(left);
    plan::PlanNode* r = hash(scan(tables[i]));
    j.inputs = {l, r};
    for (const auto* p : at_step[i]) {
      const bool a_is_new = position[p->a.alias] == i;
      const Column& lc = a_is_new ? p->b : p->a;
      const Column& rc = a_is_new ? p->a : p->b;
      j.join_keys.push_back({{0, lc.qualified()}, {1, rc.qualified()}});
    }
    left = out.add(std::move(j));
  }
  out.set_root(left);
  out.validate();
  return out;
}

}  // namespace umjoin::harness
