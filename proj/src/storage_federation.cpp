#include "fedgate/storage_federation.hpp"

#include <algorithm>
#include <map>
#include <mutex>

#include <boost/regex.hpp>

#include "fedgate/error.hpp"
#include "fedgate/strings.hpp"

namespace fedgate::storage {

std::string_view to_string(ZoneKind kind) {
  return kind == ZoneKind::kCloud ? "cloud" : "onprem";
}

std::optional<ZoneKind> zone_kind_from_string(std::string_view s) {
  if (iequals(s, "cloud")) {
    return ZoneKind::kCloud;
  }
  if (iequals(s, "onprem")) {
    return ZoneKind::kOnprem;
  }
  return std::nullopt;
}

namespace {

// Drops trailing '/' but keeps a bare root ("/") or scheme ("gs://").
std::string strip_trailing_slash(std::string s) {
  auto scheme = s.find("://");
  const std::size_t keep =
      scheme == std::string::npos ? 1 : scheme + 3;
  while (s.size() > keep && s.back() == '/') {
    s.pop_back();
  }
  return s;
}

// `s` lies under `prefix` on a path-segment boundary.
bool under_prefix(std::string_view s, std::string_view prefix) {
  if (s.substr(0, prefix.size()) != prefix) {
    return false;
  }
  return s.size() == prefix.size() || prefix.back() == '/' ||
      s[prefix.size()] == '/';
}

bool is_meta(char c) {
  return std::string_view(".[]{}()*+?|^$\\").find(c) != std::string_view::npos;
}

std::string escape_regex(std::string_view literal) {
  std::string out;
  for (char c : literal) {
    if (is_meta(c)) {
      out.push_back('\\');
    }
    out.push_back(c);
  }
  return out;
}

// Index one past the ')' closing the group opened at `open`.
std::size_t skip_group(std::string_view pattern, std::size_t open) {
  int depth = 0;
  bool in_class = false;
  for (std::size_t i = open; i < pattern.size(); ++i) {
    char c = pattern[i];
    if (c == '\\') {
      ++i;
      continue;
    }
    if (in_class) {
      in_class = c != ']';
      continue;
    }
    if (c == '[') {
      in_class = true;
    } else if (c == '(') {
      ++depth;
    } else if (c == ')' && --depth == 0) {
      return i + 1;
    }
  }
  return std::string_view::npos;
}

// Pieces of a regex rule's physical pattern when it is a plain sequence of
// literals and named groups, which makes it invertible.
struct PatternPiece {
  bool is_group;
  std::string text; // literal text or group name
  std::string body; // group sub-pattern
};

std::optional<std::vector<PatternPiece>> decompose_pattern(
    std::string_view pattern) {
  std::vector<PatternPiece> pieces;
  auto add_literal = [&](char c) {
    if (pieces.empty() || pieces.back().is_group) {
      pieces.push_back({false, {}, {}});
    }
    pieces.back().text.push_back(c);
  };
  std::size_t i = 0;
  if (!pattern.empty() && pattern.front() == '^') {
    ++i;
  }
  std::size_t end = pattern.size();
  if (end > i && pattern.back() == '$' &&
      !(end >= 2 && pattern[end - 2] == '\\')) {
    --end;
  }
  while (i < end) {
    char c = pattern[i];
    if (c == '\\') {
      if (i + 1 >= end ||
          std::isalnum(static_cast<unsigned char>(pattern[i + 1]))) {
        return std::nullopt;
      }
      add_literal(pattern[i + 1]);
      i += 2;
    } else if (pattern.substr(i, 3) == "(?<" && i + 3 < end &&
               pattern[i + 3] != '=' && pattern[i + 3] != '!') {
      auto close_name = pattern.find('>', i + 3);
      auto close = skip_group(pattern, i);
      if (close_name == std::string_view::npos ||
          close == std::string_view::npos || close > end) {
        return std::nullopt;
      }
      pieces.push_back({true,
                        std::string(pattern.substr(i + 3, close_name - i - 3)),
                        std::string(pattern.substr(
                            close_name + 1, close - 1 - (close_name + 1)))});
      i = close;
    } else if (is_meta(c)) {
      return std::nullopt;
    } else {
      add_literal(c);
      ++i;
    }
  }
  return pieces;
}

std::set<std::string> capture_names(std::string_view pattern) {
  static const boost::regex kName(R"(\(\?<([A-Za-z_][A-Za-z0-9_]*)>)");
  std::set<std::string> names;
  std::string p(pattern);
  for (boost::sregex_iterator it(p.begin(), p.end(), kName), last; it != last;
       ++it) {
    names.insert((*it)[1].str());
  }
  return names;
}

// Splits "/gcs/{ns}/{ds}" into literal and placeholder pieces.
std::optional<std::vector<PatternPiece>> parse_template(std::string_view tmpl) {
  std::vector<PatternPiece> pieces;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    auto open = tmpl.find('{', i);
    if (open == std::string_view::npos) {
      pieces.push_back({false, std::string(tmpl.substr(i)), {}});
      break;
    }
    if (open > i) {
      pieces.push_back({false, std::string(tmpl.substr(i, open - i)), {}});
    }
    auto close = tmpl.find('}', open);
    if (close == std::string_view::npos || close == open + 1) {
      return std::nullopt;
    }
    pieces.push_back({true, std::string(tmpl.substr(open + 1, close - open - 1)),
                      {}});
    i = close + 1;
  }
  return pieces;
}

} // namespace

struct StorageFederation::CompiledRegexRule {
  RegexRule rule;
  boost::regex forward;
  std::vector<PatternPiece> unified_pieces;
  // Present only when the physical pattern is invertible.
  std::optional<std::vector<PatternPiece>> physical_pieces;
  std::optional<boost::regex> inverse;
};

StorageFederation::StorageFederation() = default;
StorageFederation::~StorageFederation() = default;

void StorageFederation::add_zone(Zone zone) {
  std::unique_lock lock(mu_);
  if (zone.name.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "zone name is empty");
  }
  for (const auto& z : zones_) {
    if (iequals(z.name, zone.name)) {
      throw Error(ErrorCode::kDuplicateZone, "zone already defined: " + zone.name);
    }
  }
  zones_.push_back(std::move(zone));
}

std::vector<Zone> StorageFederation::zones() const {
  std::shared_lock lock(mu_);
  return zones_;
}

std::optional<Zone> StorageFederation::find_zone(std::string_view name) const {
  std::shared_lock lock(mu_);
  for (const auto& z : zones_) {
    if (z.name == name) {
      return z;
    }
  }
  return std::nullopt;
}

void StorageFederation::require_zone_locked(std::string_view zone) const {
  for (const auto& z : zones_) {
    if (z.name == zone) {
      return;
    }
  }
  throw Error(ErrorCode::kUnknownZone, "unknown zone: " + std::string(zone));
}

void StorageFederation::add_mount_rule(MountRule rule) {
  rule.physical_prefix = strip_trailing_slash(std::move(rule.physical_prefix));
  rule.unified_prefix = strip_trailing_slash(std::move(rule.unified_prefix));
  if (rule.physical_prefix.empty() || rule.unified_prefix.empty() ||
      rule.unified_prefix.front() != '/') {
    throw Error(ErrorCode::kInvalidRule,
                "mount rule needs a physical prefix and an absolute unified "
                "prefix: " + rule.physical_prefix + " -> " + rule.unified_prefix);
  }
  std::unique_lock lock(mu_);
  require_zone_locked(rule.zone);
  for (const auto& m : mounts_) {
    if (m.physical_prefix == rule.physical_prefix) {
      throw Error(ErrorCode::kDuplicatePrefix,
                  "physical prefix already mounted: " + rule.physical_prefix);
    }
    if (m.unified_prefix != rule.unified_prefix &&
        (under_prefix(m.unified_prefix, rule.unified_prefix) ||
         under_prefix(rule.unified_prefix, m.unified_prefix))) {
      throw Error(ErrorCode::kConflictingMount,
                  "unified prefix " + rule.unified_prefix + " nests with " +
                      m.unified_prefix);
    }
  }
  mounts_.push_back(std::move(rule));
}

void StorageFederation::add_regex_rule(RegexRule rule) {
  auto compiled = std::make_unique<CompiledRegexRule>();
  try {
    compiled->forward = boost::regex(rule.pattern, boost::regex::perl);
  } catch (const boost::regex_error& e) {
    throw Error(ErrorCode::kInvalidRule,
                "bad pattern " + rule.pattern + ": " + e.what());
  }
  auto unified = parse_template(rule.unified_template);
  if (!unified || rule.unified_template.empty() ||
      rule.unified_template.front() != '/') {
    throw Error(ErrorCode::kInvalidRule,
                "template must be an absolute path with {name} placeholders: " +
                    rule.unified_template);
  }
  const auto names = capture_names(rule.pattern);
  for (const auto& piece : *unified) {
    if (piece.is_group && names.count(piece.text) == 0) {
      throw Error(ErrorCode::kInvalidRule,
                  "template placeholder {" + piece.text +
                      "} has no named capture in " + rule.pattern);
    }
  }
  compiled->unified_pieces = *unified;

  if (auto physical = decompose_pattern(rule.pattern)) {
    std::map<std::string, std::string> bodies;
    for (const auto& piece : *physical) {
      if (piece.is_group) {
        bodies[piece.text] = piece.body;
      }
    }
    bool covers = true;
    for (const auto& [name, body] : bodies) {
      bool used = std::any_of(
          unified->begin(), unified->end(),
          [&](const PatternPiece& p) { return p.is_group && p.text == name; });
      covers = covers && used;
    }
    if (covers) {
      std::string inverse = "^";
      std::set<std::string> seen;
      for (const auto& piece : *unified) {
        if (!piece.is_group) {
          inverse += escape_regex(piece.text);
        } else if (seen.insert(piece.text).second) {
          inverse += "(?<" + piece.text + ">" + bodies[piece.text] + ")";
        } else {
          inverse += "\\k<" + piece.text + ">";
        }
      }
      inverse += "$";
      compiled->physical_pieces = std::move(physical);
      compiled->inverse = boost::regex(inverse, boost::regex::perl);
    }
  }

  compiled->rule = std::move(rule);
  std::unique_lock lock(mu_);
  require_zone_locked(compiled->rule.zone);
  regex_rules_.push_back(std::move(compiled));
}

Resolution StorageFederation::resolve_physical(std::string_view uri) const {
  std::shared_lock lock(mu_);
  return resolve_physical_locked(uri);
}

Resolution StorageFederation::resolve_physical_locked(
    std::string_view uri) const {
  const MountRule* best = nullptr;
  for (const auto& m : mounts_) {
    if (under_prefix(uri, m.physical_prefix) &&
        (best == nullptr ||
         m.physical_prefix.size() > best->physical_prefix.size())) {
      best = &m;
    }
  }
  if (best != nullptr) {
    auto rest = uri.substr(best->physical_prefix.size());
    std::string path = best->unified_prefix;
    if (!rest.empty() && rest.front() != '/' && path.back() != '/') {
      path.push_back('/');
    }
    path.append(rest);
    return {std::move(path), best->zone};
  }
  const std::string subject(uri);
  for (const auto& r : regex_rules_) {
    boost::smatch m;
    if (!boost::regex_match(subject, m, r->forward)) {
      continue;
    }
    std::string path;
    for (const auto& piece : r->unified_pieces) {
      path += piece.is_group ? m[piece.text].str() : piece.text;
    }
    return {std::move(path), r->rule.zone};
  }
  throw Error(ErrorCode::kUnresolvablePath,
              "no rule resolves " + std::string(uri));
}

std::string StorageFederation::resolve_unified(std::string_view path) const {
  std::shared_lock lock(mu_);
  return resolve_unified_locked(path);
}

std::string StorageFederation::resolve_unified_locked(
    std::string_view path) const {
  auto round_trips = [&](const std::string& uri) {
    try {
      return resolve_physical_locked(uri).unified_path == path;
    } catch (const Error&) {
      return false;
    }
  };

  std::vector<const MountRule*> matches;
  for (const auto& m : mounts_) {
    if (under_prefix(path, m.unified_prefix)) {
      matches.push_back(&m);
    }
  }
  std::stable_sort(matches.begin(), matches.end(),
                   [](const MountRule* a, const MountRule* b) {
                     return a->unified_prefix.size() > b->unified_prefix.size();
                   });
  for (const auto* m : matches) {
    auto rest = path.substr(m->unified_prefix.size());
    std::string uri = m->physical_prefix;
    if (!rest.empty() && rest.front() != '/' && uri.back() != '/') {
      uri.push_back('/');
    }
    uri.append(rest);
    if (round_trips(uri)) {
      return uri;
    }
  }

  const std::string subject(path);
  for (const auto& r : regex_rules_) {
    if (!r->inverse) {
      continue;
    }
    boost::smatch m;
    if (!boost::regex_match(subject, m, *r->inverse)) {
      continue;
    }
    std::string uri;
    for (const auto& piece : *r->physical_pieces) {
      uri += piece.is_group ? m[piece.text].str() : piece.text;
    }
    if (round_trips(uri)) {
      return uri;
    }
  }
  throw Error(ErrorCode::kUnresolvablePath,
              "no rule maps unified path " + std::string(path));
}

const DatasetCatalogEntry* StorageFederation::find_dataset_locked(
    std::string_view dataset) const {
  for (const auto& entry : catalog_) {
    if (iequals(entry.dataset, dataset)) {
      return &entry;
    }
  }
  return nullptr;
}

void StorageFederation::register_replica(std::string_view dataset,
                                         std::string_view zone,
                                         std::string_view physical_uri,
                                         std::uint64_t size_bytes) {
  std::unique_lock lock(mu_);
  require_zone_locked(zone);
  auto resolved = resolve_physical_locked(physical_uri);
  if (resolved.zone != zone) {
    throw Error(ErrorCode::kZoneMismatch,
                std::string(physical_uri) + " resolves into zone " +
                    resolved.zone + ", not " + std::string(zone));
  }
  auto canonical = resolve_unified_locked(resolved.unified_path);

  DatasetCatalogEntry* entry = nullptr;
  for (auto& e : catalog_) {
    if (iequals(e.dataset, dataset)) {
      entry = &e;
    }
  }
  if (entry == nullptr) {
    catalog_.push_back({std::string(dataset), {}, size_bytes});
    entry = &catalog_.back();
  }
  for (const auto& r : entry->replicas) {
    if (r.zone == zone) {
      throw Error(ErrorCode::kReplicaExists,
                  std::string(dataset) + " already has a replica in " +
                      std::string(zone));
    }
  }
  entry->size_bytes = std::max(entry->size_bytes, size_bytes);
  entry->replicas.push_back(
      {std::string(zone), std::move(canonical), std::move(resolved.unified_path)});
}

std::set<std::string> StorageFederation::locate(std::string_view dataset) const {
  std::shared_lock lock(mu_);
  std::set<std::string> out;
  if (const auto* entry = find_dataset_locked(dataset)) {
    for (const auto& r : entry->replicas) {
      out.insert(r.zone);
    }
  }
  return out;
}

Resolution StorageFederation::nearest_replica(
    std::string_view dataset, std::string_view requester_zone) const {
  std::shared_lock lock(mu_);
  const auto* entry = find_dataset_locked(dataset);
  if (entry == nullptr || entry->replicas.empty()) {
    throw Error(ErrorCode::kUnknownDataset,
                "no replicas for dataset " + std::string(dataset));
  }
  auto is_cloud = [&](const std::string& zone) {
    for (const auto& z : zones_) {
      if (z.name == zone) {
        return z.kind == ZoneKind::kCloud;
      }
    }
    return false;
  };
  const Replica* chosen = nullptr;
  for (const auto& r : entry->replicas) {
    if (r.zone == requester_zone) {
      chosen = &r;
      break;
    }
    if (chosen == nullptr || (is_cloud(r.zone) && !is_cloud(chosen->zone))) {
      chosen = &r;
    }
  }
  return {chosen->unified_path, chosen->zone};
}

std::optional<DatasetCatalogEntry> StorageFederation::find_dataset(
    std::string_view dataset) const {
  std::shared_lock lock(mu_);
  if (const auto* entry = find_dataset_locked(dataset)) {
    return *entry;
  }
  return std::nullopt;
}

std::optional<DatasetCatalogEntry> StorageFederation::find_table(
    const sql::TableRef& ref) const {
  std::shared_lock lock(mu_);
  if (const auto* entry = find_dataset_locked(ref.qualified_name())) {
    return *entry;
  }
  if (ref.catalog) {
    sql::TableRef without_catalog{std::nullopt, ref.schema, ref.table};
    if (const auto* entry =
            find_dataset_locked(without_catalog.qualified_name())) {
      return *entry;
    }
  }
  return std::nullopt;
}

std::vector<DatasetCatalogEntry> StorageFederation::datasets() const {
  std::shared_lock lock(mu_);
  return catalog_;
}

} // namespace fedgate::storage
