#include "fedgate/sql_frontend.hpp"

#include <array>
#include <cctype>
#include <regex>
#include <unordered_set>

#include "fedgate/error.hpp"
#include "fedgate/strings.hpp"

namespace fedgate::sql {

std::string_view to_string(StatementClass cls) {
  switch (cls) {
    case StatementClass::kSelect:
      return "SELECT";
    case StatementClass::kCreate:
      return "CREATE";
    case StatementClass::kUpdate:
      return "UPDATE";
    case StatementClass::kOther:
      return "OTHER";
  }
  return "OTHER";
}

std::optional<StatementClass> statement_class_from_string(std::string_view s) {
  for (auto cls : {StatementClass::kSelect, StatementClass::kCreate,
                   StatementClass::kUpdate, StatementClass::kOther}) {
    if (iequals(s, to_string(cls))) {
      return cls;
    }
  }
  return std::nullopt;
}

std::string_view to_string(ZoneDirective directive) {
  switch (directive) {
    case ZoneDirective::kAuto:
      return "auto";
    case ZoneDirective::kOnprem:
      return "onprem";
    case ZoneDirective::kCloud:
      return "cloud";
  }
  return "auto";
}

std::optional<ZoneDirective> zone_directive_from_string(std::string_view s) {
  s = trim(s);
  for (auto d :
       {ZoneDirective::kAuto, ZoneDirective::kOnprem, ZoneDirective::kCloud}) {
    if (iequals(s, to_string(d))) {
      return d;
    }
  }
  return std::nullopt;
}

std::string TableRef::qualified_name() const {
  std::string out;
  if (catalog) {
    out += *catalog + ".";
  }
  if (schema) {
    out += *schema + ".";
  }
  return out + table;
}

std::string TableRef::key() const {
  return to_lower(qualified_name());
}

TableRef TableRef::from_qualified(std::string_view dotted) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    auto dot = dotted.find('.', start);
    parts.emplace_back(dotted.substr(start, dot - start));
    if (dot == std::string_view::npos) {
      break;
    }
    start = dot + 1;
  }
  TableRef ref;
  ref.table = parts.back();
  if (parts.size() >= 2) {
    ref.schema = parts[parts.size() - 2];
  }
  if (parts.size() >= 3) {
    ref.catalog = parts[parts.size() - 3];
  }
  return ref;
}

namespace {

bool is_word_start(char c) {
  auto u = static_cast<unsigned char>(c);
  return std::isalpha(u) || c == '_' || u >= 0x80;
}

bool is_word_char(char c) {
  auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '_' || c == '$' || u >= 0x80;
}

bool is_digit(char c) {
  return std::isdigit(static_cast<unsigned char>(c)) != 0;
}

constexpr std::array<std::string_view, 10> kTwoCharSymbols = {
    "<=", ">=", "<>", "!=", "||", "::", "->", "=>", "==", ".."};

// Skips a quoted run starting at `pos` (which holds the opening quote).
// Doubled quote characters escape themselves. Returns one past the closing
// quote or npos.
std::size_t skip_quoted(std::string_view sql, std::size_t pos, char quote) {
  std::size_t i = pos + 1;
  while (i < sql.size()) {
    if (sql[i] == quote) {
      if (i + 1 < sql.size() && sql[i + 1] == quote) {
        i += 2;
        continue;
      }
      return i + 1;
    }
    ++i;
  }
  return std::string_view::npos;
}

} // namespace

std::vector<Token> tokenize(std::string_view sql) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  const std::size_t n = sql.size();
  while (i < n) {
    char c = sql[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '-' && i + 1 < n && sql[i + 1] == '-') {
      auto eol = sql.find('\n', i);
      i = eol == std::string_view::npos ? n : eol + 1;
      continue;
    }
    if (c == '/' && i + 1 < n && sql[i + 1] == '*') {
      auto end = sql.find("*/", i + 2);
      if (end == std::string_view::npos) {
        throw ParseError(i, "unterminated block comment");
      }
      i = end + 2;
      continue;
    }
    const std::size_t start = i;
    if (c == '\'' || c == '"' || c == '`') {
      auto end = skip_quoted(sql, i, c);
      if (end == std::string_view::npos) {
        throw ParseError(start, c == '\'' ? "unterminated string literal"
                                          : "unterminated quoted identifier");
      }
      tokens.push_back({c == '\'' ? TokenKind::kString : TokenKind::kQuotedIdent,
                        sql.substr(start, end - start), start});
      i = end;
      continue;
    }
    if (is_word_start(c)) {
      while (i < n && is_word_char(sql[i])) {
        ++i;
      }
      tokens.push_back({TokenKind::kWord, sql.substr(start, i - start), start});
      continue;
    }
    if (is_digit(c) || (c == '.' && i + 1 < n && is_digit(sql[i + 1]))) {
      while (i < n && (is_digit(sql[i]) || sql[i] == '.')) {
        ++i;
      }
      if (i < n && (sql[i] == 'e' || sql[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < n && (sql[j] == '+' || sql[j] == '-')) {
          ++j;
        }
        if (j < n && is_digit(sql[j])) {
          i = j;
          while (i < n && is_digit(sql[i])) {
            ++i;
          }
        }
      }
      tokens.push_back({TokenKind::kNumber, sql.substr(start, i - start), start});
      continue;
    }
    std::size_t len = 1;
    if (i + 1 < n) {
      auto two = sql.substr(i, 2);
      for (auto sym : kTwoCharSymbols) {
        if (two == sym) {
          len = 2;
          break;
        }
      }
    }
    tokens.push_back({TokenKind::kSymbol, sql.substr(start, len), start});
    i += len;
  }
  return tokens;
}

DirectiveSplit parse_zone_directive(std::string_view sql) {
  static const std::regex kDirectiveLine(
      R"(^[ \t]*--[ \t]*zone[ \t]*:(.*)$)", std::regex::icase);

  // Locates the first non-blank line as [begin, end) with `next` the start
  // of the following line.
  struct Line {
    std::size_t begin;
    std::size_t end;
    std::size_t next;
  };
  auto first_non_blank = [](std::string_view text,
                            std::size_t from) -> std::optional<Line> {
    std::size_t pos = from;
    while (pos < text.size()) {
      auto eol = text.find('\n', pos);
      std::size_t end = eol == std::string_view::npos ? text.size() : eol;
      std::size_t next = eol == std::string_view::npos ? text.size() : eol + 1;
      if (!trim(text.substr(pos, end - pos)).empty()) {
        return Line{pos, end, next};
      }
      pos = next;
    }
    return std::nullopt;
  };
  auto match_directive = [&](std::string_view line_text)
      -> std::optional<std::optional<ZoneDirective>> {
    std::string line(line_text);
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    std::smatch m;
    if (!std::regex_match(line, m, kDirectiveLine)) {
      return std::nullopt;
    }
    return zone_directive_from_string(m[1].str());
  };

  auto line = first_non_blank(sql, 0);
  if (!line) {
    return {ZoneDirective::kAuto, std::string(sql)};
  }
  auto line_text = sql.substr(line->begin, line->end - line->begin);
  auto matched = match_directive(line_text);
  if (!matched) {
    return {ZoneDirective::kAuto, std::string(sql)};
  }
  if (!*matched) {
    throw Error(ErrorCode::kMalformedDirective,
                "unknown zone directive: " + std::string(trim(line_text)));
  }
  std::string clean(sql.substr(0, line->begin));
  clean.append(sql.substr(line->next));
  if (auto again = first_non_blank(clean, 0)) {
    auto again_text =
        std::string_view(clean).substr(again->begin, again->end - again->begin);
    if (match_directive(again_text)) {
      throw Error(ErrorCode::kMalformedDirective,
                  "duplicate zone directive: " + std::string(trim(again_text)));
    }
  }
  return {**matched, std::move(clean)};
}

StatementClass classify_statement(std::string_view sql) {
  std::size_t i = 0;
  const std::size_t n = sql.size();
  while (i < n) {
    char c = sql[i];
    if (std::isspace(static_cast<unsigned char>(c)) || c == '(') {
      ++i;
    } else if (c == '-' && i + 1 < n && sql[i + 1] == '-') {
      auto eol = sql.find('\n', i);
      i = eol == std::string_view::npos ? n : eol + 1;
    } else if (c == '/' && i + 1 < n && sql[i + 1] == '*') {
      auto end = sql.find("*/", i + 2);
      i = end == std::string_view::npos ? n : end + 2;
    } else {
      break;
    }
  }
  if (i >= n) {
    throw Error(ErrorCode::kEmptyStatement, "statement is empty");
  }
  std::size_t end = i;
  while (end < n && is_word_char(sql[end])) {
    ++end;
  }
  auto word = sql.substr(i, end - i);
  if (iequals(word, "SELECT") || iequals(word, "WITH")) {
    return StatementClass::kSelect;
  }
  if (iequals(word, "CREATE")) {
    return StatementClass::kCreate;
  }
  if (iequals(word, "UPDATE") || iequals(word, "INSERT") ||
      iequals(word, "DELETE")) {
    return StatementClass::kUpdate;
  }
  return StatementClass::kOther;
}

namespace {

// Keywords that end a FROM list at the current nesting level.
const std::unordered_set<std::string>& from_list_terminators() {
  static const std::unordered_set<std::string> kWords = {
      "where",  "group",   "having", "order",     "limit",  "offset",
      "fetch",  "union",   "intersect", "except", "window", "qualify",
      "select", "set",     "values", "returning", "into",   "for"};
  return kWords;
}

const std::unordered_set<std::string>& aggregate_functions() {
  static const std::unordered_set<std::string> kWords = {
      "count",           "sum",          "avg",       "min",
      "max",             "stddev",       "stddev_pop", "stddev_samp",
      "variance",        "var_pop",      "var_samp",  "approx_distinct",
      "approx_percentile", "array_agg",  "count_if",  "bool_and",
      "bool_or",         "arbitrary",    "any_value", "string_agg",
      "listagg",         "group_concat", "median"};
  return kWords;
}

std::string unquote_identifier(const Token& tok) {
  if (tok.kind != TokenKind::kQuotedIdent) {
    return std::string(tok.text);
  }
  const char quote = tok.text.front();
  std::string out;
  auto body = tok.text.substr(1, tok.text.size() - 2);
  for (std::size_t i = 0; i < body.size(); ++i) {
    out.push_back(body[i]);
    if (body[i] == quote && i + 1 < body.size() && body[i + 1] == quote) {
      ++i;
    }
  }
  return out;
}

class StatementAnalyzer {
 public:
  explicit StatementAnalyzer(std::string_view sql) : tokens_(tokenize(sql)) {
    match_parens();
  }

  StatementShape run() {
    levels_.push_back({});
    std::size_t i = 0;
    while (i < tokens_.size()) {
      i = step(i);
    }
    return std::move(shape_);
  }

 private:
  struct Level {
    bool saw_select = false;
    bool in_from_list = false;
    // Set when the next token should start a relation.
    bool expect_relation = false;
    bool joining = false;
  };

  bool is_word(std::size_t i, std::string_view w) const {
    return i < tokens_.size() && tokens_[i].kind == TokenKind::kWord &&
        iequals(tokens_[i].text, w);
  }
  bool is_symbol(std::size_t i, std::string_view s) const {
    return i < tokens_.size() && tokens_[i].kind == TokenKind::kSymbol &&
        tokens_[i].text == s;
  }
  bool is_identifier(std::size_t i) const {
    return i < tokens_.size() &&
        (tokens_[i].kind == TokenKind::kWord ||
         tokens_[i].kind == TokenKind::kQuotedIdent);
  }
  void match_parens() {
    close_of_.assign(tokens_.size(), 0);
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (is_symbol(i, "(")) {
        open.push_back(i);
      } else if (is_symbol(i, ")")) {
        if (open.empty()) {
          throw ParseError(tokens_[i].offset, "unbalanced ')'");
        }
        close_of_[open.back()] = i;
        open.pop_back();
      }
    }
    if (!open.empty()) {
      throw ParseError(tokens_[open.back()].offset, "unbalanced '('");
    }
  }

  // Reads a dotted name starting at i. Returns the index after it.
  std::size_t read_name(std::size_t i, std::vector<std::string>& parts) const {
    parts.push_back(unquote_identifier(tokens_[i]));
    ++i;
    while (is_symbol(i, ".") && is_identifier(i + 1)) {
      parts.push_back(unquote_identifier(tokens_[i + 1]));
      i += 2;
    }
    return i;
  }

  void record_table(const std::vector<std::string>& parts) {
    if (parts.empty()) {
      return;
    }
    if (parts.size() == 1 && cte_names_.count(to_lower(parts[0])) != 0) {
      return;
    }
    TableRef ref;
    const std::size_t n = parts.size();
    ref.table = parts[n - 1];
    if (n >= 2) {
      ref.schema = parts[n - 2];
    }
    if (n >= 3) {
      ref.catalog = parts[n - 3];
    }
    shape_.tables.insert(std::move(ref));
  }

  // Names introduced by WITH [RECURSIVE] a [(cols)] AS (...), b AS (...).
  void collect_ctes(std::size_t i) {
    if (is_word(i, "recursive")) {
      ++i;
    }
    while (is_identifier(i)) {
      cte_names_.insert(to_lower(unquote_identifier(tokens_[i])));
      ++i;
      if (is_symbol(i, "(")) {
        i = close_of_[i] + 1;
      }
      if (!is_word(i, "as")) {
        return;
      }
      ++i;
      while (is_word(i, "not") || is_word(i, "materialized")) {
        ++i;
      }
      if (!is_symbol(i, "(")) {
        return;
      }
      i = close_of_[i] + 1;
      if (!is_symbol(i, ",")) {
        return;
      }
      ++i;
    }
  }

  // Target of INTO/UPDATE/TABLE: a plain name, optionally followed by a
  // column list.
  void take_target(std::size_t i) {
    if (is_word(i, "if")) {
      ++i;
      if (is_word(i, "not")) {
        ++i;
      }
      if (is_word(i, "exists")) {
        ++i;
      }
    }
    if (!is_identifier(i)) {
      return;
    }
    std::vector<std::string> parts;
    read_name(i, parts);
    record_table(parts);
  }

  // Consumes a relation in a FROM list. Returns the next index to scan.
  std::size_t take_relation(std::size_t i) {
    Level& level = levels_.back();
    level.expect_relation = false;
    if (level.joining) {
      ++shape_.join_count;
      level.joining = false;
    }
    while (is_word(i, "lateral") || is_word(i, "only")) {
      ++i;
    }
    if (is_symbol(i, "(")) {
      if (is_word(i + 1, "select") || is_word(i + 1, "with") ||
          is_word(i + 1, "values")) {
        return i; // derived table; scanned as a nested level
      }
      // Parenthesized join: the nested level starts its own FROM list.
      pending_nested_from_ = true;
      return i;
    }
    if (!is_identifier(i)) {
      return i;
    }
    if (is_word(i, "unnest") || is_word(i, "values")) {
      return i;
    }
    std::vector<std::string> parts;
    std::size_t next = read_name(i, parts);
    if (is_symbol(next, "(")) {
      return next; // table function
    }
    record_table(parts);
    return next;
  }

  std::size_t step(std::size_t i) {
    Level& level = levels_.back();
    if (level.expect_relation) {
      return take_relation(i);
    }
    const Token& tok = tokens_[i];
    if (tok.kind == TokenKind::kSymbol) {
      if (tok.text == "(") {
        const bool nested_from = pending_nested_from_;
        pending_nested_from_ = false;
        Level inner;
        if (nested_from) {
          inner.saw_select = true;
          inner.in_from_list = true;
          inner.expect_relation = true;
        }
        levels_.push_back(inner);
      } else if (tok.text == ")") {
        if (levels_.size() > 1) {
          levels_.pop_back();
        }
      } else if (tok.text == "," && level.in_from_list) {
        level.expect_relation = true;
        level.joining = true;
      } else if (tok.text == ";") {
        level = Level{};
      }
      return i + 1;
    }
    if (tok.kind != TokenKind::kWord) {
      return i + 1;
    }
    const std::string word = to_lower(tok.text);
    if (word == "with") {
      if (!is_word(i + 1, "time") && !is_word(i + 1, "ordinality")) {
        collect_ctes(i + 1);
      }
    } else if (word == "select" || word == "delete") {
      level.saw_select = true;
      level.in_from_list = false;
    } else if (word == "from") {
      // EXTRACT(x FROM y) and SUBSTRING(s FROM 1) open a level with no
      // SELECT, so their FROM is argument syntax.
      const bool distinct_from = i >= 2 && is_word(i - 1, "distinct") &&
          (is_word(i - 2, "is") || is_word(i - 2, "not"));
      if (level.saw_select && !distinct_from) {
        level.in_from_list = true;
        level.expect_relation = true;
        level.joining = false;
      }
    } else if (word == "join") {
      level.in_from_list = true;
      level.expect_relation = true;
      level.joining = true;
    } else if (word == "into") {
      level.in_from_list = false;
      take_target(i + 1);
    } else if (word == "update") {
      if (!(i >= 1 && (is_word(i - 1, "for") || is_word(i - 1, "on")))) {
        take_target(i + 1);
      }
    } else if (word == "table") {
      if (!is_symbol(i + 1, "(")) {
        take_target(i + 1);
      }
    } else if (word == "group" && is_word(i + 1, "by")) {
      ++shape_.aggregate_count;
      level.in_from_list = false;
    } else if (aggregate_functions().count(word) != 0 &&
               is_symbol(i + 1, "(") && !(i >= 1 && is_symbol(i - 1, "."))) {
      ++shape_.aggregate_count;
    } else if (from_list_terminators().count(word) != 0) {
      level.in_from_list = false;
    }
    return i + 1;
  }

  std::vector<Token> tokens_;
  std::vector<std::size_t> close_of_;
  std::vector<Level> levels_;
  std::unordered_set<std::string> cte_names_;
  bool pending_nested_from_ = false;
  StatementShape shape_;
};

} // namespace

StatementShape analyze_statement(std::string_view sql) {
  return StatementAnalyzer(sql).run();
}

TableSet extract_tables(std::string_view sql) {
  return analyze_statement(sql).tables;
}

ParsedQuery parse_query(std::string_view sql) {
  auto split = parse_zone_directive(sql);
  ParsedQuery q;
  q.raw_sql = std::string(sql);
  q.directive = split.directive;
  q.statement_class = classify_statement(split.clean_sql);
  auto shape = analyze_statement(split.clean_sql);
  q.clean_sql = std::move(split.clean_sql);
  q.tables = std::move(shape.tables);
  q.join_count = shape.join_count;
  q.aggregate_count = shape.aggregate_count;
  return q;
}

} // namespace fedgate::sql
