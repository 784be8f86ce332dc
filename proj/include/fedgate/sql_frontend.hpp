#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace fedgate::sql {

enum class StatementClass { kSelect, kCreate, kUpdate, kOther };

std::string_view to_string(StatementClass cls);
std::optional<StatementClass> statement_class_from_string(std::string_view s);

enum class ZoneDirective { kAuto, kOnprem, kCloud };

std::string_view to_string(ZoneDirective directive);
std::optional<ZoneDirective> zone_directive_from_string(std::string_view s);

/// A possibly qualified table name. Parts are kept as written (quotes
/// stripped); ordering and equality ignore case.
struct TableRef {
  std::optional<std::string> catalog;
  std::optional<std::string> schema;
  std::string table;

  /// Dotted name, e.g. "hive.logs.partly_cloudy".
  std::string qualified_name() const;
  /// Lower-cased qualified name.
  std::string key() const;

  /// Builds a ref from a dotted name; fills parts from the right.
  static TableRef from_qualified(std::string_view dotted);

  friend bool operator==(const TableRef& a, const TableRef& b) {
    return a.key() == b.key();
  }
  friend bool operator<(const TableRef& a, const TableRef& b) {
    return a.key() < b.key();
  }
};

using TableSet = std::set<TableRef>;

enum class TokenKind { kWord, kQuotedIdent, kString, kNumber, kSymbol };

struct Token {
  TokenKind kind;
  std::string_view text; // view into the tokenized input
  std::size_t offset;
};

/// Splits SQL into tokens, dropping whitespace and comments.
/// Throws ParseError on an unterminated string, quoted identifier or block
/// comment.
std::vector<Token> tokenize(std::string_view sql);

struct DirectiveSplit {
  ZoneDirective directive = ZoneDirective::kAuto;
  std::string clean_sql;
};

/// Recognizes a leading `-- zone: onprem|cloud|auto` line.
///
/// Only the first non-blank line is inspected. The value is matched
/// case-insensitively and internal whitespace is free. A `-- zone:` line
/// with any other value, or a second directive line directly after the
/// first, raises MalformedDirective.
DirectiveSplit parse_zone_directive(std::string_view sql);

/// Classifies by the first significant keyword. Never fails on garbage;
/// raises EmptyStatement only when nothing but comments/whitespace remain.
StatementClass classify_statement(std::string_view sql);

/// Everything the router and the cost model read off one statement.
struct StatementShape {
  TableSet tables;
  /// Relations beyond the first in each FROM list (explicit JOINs and
  /// comma joins alike).
  int join_count = 0;
  /// GROUP BY clauses plus aggregate function calls.
  int aggregate_count = 0;
};

StatementShape analyze_statement(std::string_view sql);

/// Base tables referenced after FROM/JOIN/INTO/UPDATE/TABLE, excluding CTE
/// names, derived-table aliases and table functions.
TableSet extract_tables(std::string_view sql);

struct ParsedQuery {
  std::string raw_sql;
  std::string clean_sql;
  StatementClass statement_class = StatementClass::kOther;
  TableSet tables;
  ZoneDirective directive = ZoneDirective::kAuto;
  int join_count = 0;
  int aggregate_count = 0;
};

ParsedQuery parse_query(std::string_view sql);

} // namespace fedgate::sql
