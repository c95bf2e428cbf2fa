#include "firelog/ingestion.hpp"

#include <time.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

namespace firelog {

std::vector<std::string> default_timestamp_formats() {
  return {"iso8601", "%Y-%m-%d %H:%M:%S", "%d/%b/%Y %H:%M:%S", "%m/%d/%Y %H:%M:%S",
          "%b %d %Y %H:%M:%S"};
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  using namespace std::chrono;
  return sys_days{year{y} / month{m} / day{d}}.time_since_epoch().count();
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(),
                                   [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

std::optional<int> read_int(std::string_view s) {
  if (!all_digits(s)) return std::nullopt;
  int v = 0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

// YYYY-MM-DD[T ]HH:MM:SS[.fff][Z|+HH:MM|-HH:MM|+HHMM]
std::optional<Instant> parse_iso8601(std::string_view s) {
  if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') ||
      s[13] != ':' || s[16] != ':') {
    return std::nullopt;
  }
  auto y = read_int(s.substr(0, 4)), mo = read_int(s.substr(5, 2)), d = read_int(s.substr(8, 2));
  auto h = read_int(s.substr(11, 2)), mi = read_int(s.substr(14, 2)),
       se = read_int(s.substr(17, 2));
  if (!y || !mo || !d || !h || !mi || !se) return std::nullopt;
  if (*mo < 1 || *mo > 12 || *d < 1 || *d > 31 || *h > 23 || *mi > 59 || *se > 60) {
    return std::nullopt;
  }
  {
    using namespace std::chrono;
    if (!year_month_day{year{*y} / month{static_cast<unsigned>(*mo)} /
                        day{static_cast<unsigned>(*d)}}
             .ok()) {
      return std::nullopt;
    }
  }
  std::int64_t ms = 0;
  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    std::size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos == start) return std::nullopt;
    auto frac = s.substr(start, std::min<std::size_t>(3, pos - start));
    ms = *read_int(frac);
    for (std::size_t i = frac.size(); i < 3; ++i) ms *= 10;
  }
  std::int64_t offset_min = 0;
  if (pos < s.size()) {
    auto tz = s.substr(pos);
    if (tz == "Z" || tz == "z") {
    } else if ((tz[0] == '+' || tz[0] == '-') && (tz.size() == 6 || tz.size() == 5 || tz.size() == 3)) {
      auto oh = read_int(tz.substr(1, 2));
      std::optional<int> om = 0;
      if (tz.size() == 6) {
        if (tz[3] != ':') return std::nullopt;
        om = read_int(tz.substr(4, 2));
      } else if (tz.size() == 5) {
        om = read_int(tz.substr(3, 2));
      }
      if (!oh || !om) return std::nullopt;
      offset_min = (*oh * 60 + *om) * (tz[0] == '-' ? -1 : 1);
    } else {
      return std::nullopt;
    }
  }
  const std::int64_t secs = days_from_civil(*y, static_cast<unsigned>(*mo), static_cast<unsigned>(*d)) * 86400 +
                            *h * 3600 + *mi * 60 + *se - offset_min * 60;
  return Instant{secs * 1000 + ms};
}

std::optional<Instant> parse_epoch(std::string_view s, std::int64_t scale) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return Instant{v * scale};
}

std::optional<Instant> parse_strptime(std::string_view s, const std::string& format) {
  const std::string text(s);
  std::tm tm{};
  const char* end = ::strptime(text.c_str(), format.c_str(), &tm);
  if (end == nullptr || *end != '\0') return std::nullopt;
  const time_t t = ::timegm(&tm);
  return Instant{static_cast<std::int64_t>(t) * 1000};
}

bool is_epoch_format(const std::string& f) { return f == "epoch-ms" || f == "epoch-s"; }

std::optional<std::int64_t> parse_integer(std::string_view s) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<double> parse_real(std::string_view s) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

struct Record {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

// RFC-4180 reader. Quoted fields may contain delimiters, doubled quotes and
// line breaks; blank lines are skipped.
class CsvReader {
 public:
  CsvReader(std::string_view data, char delim) : data_(data), delim_(delim) {
    if (data_.substr(0, 3) == "\xEF\xBB\xBF") data_.remove_prefix(3);
  }

  std::optional<Record> next() {
    while (pos_ < data_.size()) {
      Record rec;
      rec.line = line_;
      std::string field;
      bool any = false;
      bool quoted_field = false;
      while (true) {
        if (pos_ >= data_.size()) {
          rec.fields.push_back(std::move(field));
          break;
        }
        char c = data_[pos_];
        if (c == '"' && field.empty() && !quoted_field) {
          quoted_field = true;
          any = true;
          ++pos_;
          while (pos_ < data_.size()) {
            char q = data_[pos_++];
            if (q == '"') {
              if (pos_ < data_.size() && data_[pos_] == '"') {
                field += '"';
                ++pos_;
              } else {
                break;
              }
            } else {
              if (q == '\n') ++line_;
              field += q;
            }
          }
          continue;
        }
        if (c == delim_) {
          rec.fields.push_back(std::move(field));
          field.clear();
          quoted_field = false;
          any = true;
          ++pos_;
          continue;
        }
        if (c == '\r' || c == '\n') {
          ++pos_;
          if (c == '\r' && pos_ < data_.size() && data_[pos_] == '\n') ++pos_;
          ++line_;
          rec.fields.push_back(std::move(field));
          break;
        }
        field += c;
        any = true;
        ++pos_;
      }
      if (!any && rec.fields.size() == 1 && rec.fields[0].empty()) continue;
      return rec;
    }
    return std::nullopt;
  }

 private:
  std::string_view data_;
  char delim_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

const std::array<std::vector<std::string_view>, 4>& role_aliases() {
  static const std::array<std::vector<std::string_view>, 4> aliases{{
      {"timestamp", "ts", "time", "date/time", "datetime", "date_time", "time_generated"},
      {"source-ip", "src", "source", "srcip", "src_ip", "source ip", "source_ip", "sourceip",
       "src ip", "saddr"},
      {"destination-ip", "dst", "destination", "dstip", "dst_ip", "destination ip",
       "destination_ip", "destinationip", "dst ip", "daddr"},
      {"action", "operation", "verdict", "disposition"},
  }};
  return aliases;
}

enum class Vote { ip = 0, timestamp = 1, numeric = 2, categorical = 3 };

Vote classify(std::string_view v, const std::vector<std::string>& ts_formats) {
  if (IpAddress::parse(v)) return Vote::ip;
  for (const auto& f : ts_formats) {
    if (is_epoch_format(f)) continue;
    if (parse_timestamp(v, {f})) return Vote::timestamp;
  }
  if (parse_integer(v) || parse_real(v)) return Vote::numeric;
  return Vote::categorical;
}

Cell parse_cell(std::string_view raw, AttributeKind kind, const ParseConfig& config) {
  const auto v = trim(raw);
  if (v.empty()) return Cell::null();
  switch (kind) {
    case AttributeKind::timestamp:
      if (auto t = parse_timestamp(v, config.timestamp_formats)) return Cell::instant(t->epoch_ms);
      return Cell::null();
    case AttributeKind::ip_address:
      if (auto ip = IpAddress::parse(v)) return Cell::ip(std::move(*ip));
      return Cell::null();
    case AttributeKind::ordinal_numeric:
      if (auto i = parse_integer(v)) return Cell::integer(*i);
      if (auto d = parse_real(v)) return Cell::real(*d);
      return Cell::null();
    case AttributeKind::categorical:
      return Cell::text(std::string(v));
    case AttributeKind::free_text:
      return Cell::text(std::string(raw));
  }
  return Cell::null();
}

bool needs_quotes(std::string_view s, char delim) {
  return s.find_first_of(std::string{delim, '"', '\r', '\n'}) != std::string_view::npos;
}

void append_field(std::string& out, std::string_view s, char delim) {
  if (!needs_quotes(s, delim)) {
    out += s;
    return;
  }
  out += '"';
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

}  // namespace

std::optional<Instant> parse_timestamp(std::string_view text,
                                       const std::vector<std::string>& formats) {
  const auto s = trim(text);
  if (s.empty()) return std::nullopt;
  for (const auto& f : formats) {
    std::optional<Instant> t;
    if (f == "iso8601") {
      t = parse_iso8601(s);
    } else if (f == "epoch-ms") {
      t = parse_epoch(s, 1);
    } else if (f == "epoch-s") {
      t = parse_epoch(s, 1000);
    } else {
      t = parse_strptime(s, f);
    }
    if (t) return t;
  }
  return std::nullopt;
}

nlohmann::json ParseConfig::to_json() const {
  nlohmann::json j;
  j["delimiter"] = std::string(1, delimiter);
  j["timestamp-formats"] = timestamp_formats;
  nlohmann::json overrides = nlohmann::json::object();
  for (const auto& [name, kind] : kind_overrides) overrides[name] = std::string(to_string(kind));
  j["column-kind-overrides"] = overrides;
  nlohmann::json mapping = nlohmann::json::object();
  for (auto r : kAllRoles) {
    if (const auto& m = required_mapping[static_cast<std::size_t>(r)]) {
      mapping[std::string(to_string(r))] = *m;
    }
  }
  j["required-mapping"] = mapping;
  if (sample_limit) j["sample-limit"] = sample_limit;
  if (row_limit) j["row-limit"] = *row_limit;
  if (time_range) {
    j["time-range"] = {time_range->first.epoch_ms, time_range->second.epoch_ms};
  }
  j["max-rejection-ratio"] = max_rejection_ratio;
  return j;
}

ParseConfig ParseConfig::from_json(const nlohmann::json& j) {
  ParseConfig c;
  if (j.is_null()) return c;
  if (!j.is_object()) throw Error(Errc::invalid_config, "parse config must be an object");
  try {
    if (j.contains("delimiter")) {
      const auto d = j.at("delimiter").get<std::string>();
      if (d.size() != 1) throw Error(Errc::invalid_config, "delimiter must be one character");
      c.delimiter = d == "\\t" ? '\t' : d[0];
    }
    if (j.contains("timestamp-formats")) {
      c.timestamp_formats = j.at("timestamp-formats").get<std::vector<std::string>>();
    }
    if (j.contains("column-kind-overrides")) {
      for (const auto& [name, kind] : j.at("column-kind-overrides").items()) {
        auto k = parse_attribute_kind(kind.get<std::string>());
        if (!k) throw Error(Errc::invalid_config, "unknown attribute kind for '" + name + "'");
        c.kind_overrides[name] = *k;
      }
    }
    if (j.contains("required-mapping")) {
      for (const auto& [role, col] : j.at("required-mapping").items()) {
        bool found = false;
        for (auto r : kAllRoles) {
          if (to_string(r) == role) {
            c.required_mapping[static_cast<std::size_t>(r)] = col.get<std::string>();
            found = true;
          }
        }
        if (!found) throw Error(Errc::invalid_config, "unknown required role '" + role + "'");
      }
    }
    if (j.contains("sample-limit")) c.sample_limit = j.at("sample-limit").get<std::size_t>();
    if (j.contains("row-limit")) c.row_limit = j.at("row-limit").get<std::size_t>();
    if (j.contains("time-range")) {
      const auto& tr = j.at("time-range");
      c.time_range = {{tr.at(0).get<std::int64_t>()}, {tr.at(1).get<std::int64_t>()}};
    }
    if (j.contains("max-rejection-ratio")) {
      c.max_rejection_ratio = j.at("max-rejection-ratio").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_config, std::string("bad parse config: ") + e.what());
  }
  return c;
}

std::string ParseResult::report() const {
  std::string out;
  for (const auto& r : rejections) {
    out += "line " + std::to_string(r.line) + ": " + r.reason + "\n";
  }
  return out;
}

Schema::RoleMap resolve_roles(const std::vector<std::string>& header, const ParseConfig& config) {
  Schema::RoleMap roles{};
  for (auto r : kAllRoles) {
    const auto ri = static_cast<std::size_t>(r);
    if (const auto& explicit_name = config.required_mapping[ri]) {
      for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == *explicit_name) roles[ri] = i;
      }
      continue;
    }
    for (auto alias : role_aliases()[ri]) {
      for (std::size_t i = 0; i < header.size() && !roles[ri]; ++i) {
        if (lower(header[i]) == alias) roles[ri] = i;
      }
      if (roles[ri]) break;
    }
  }
  // One column cannot serve two roles.
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = a + 1; b < 4; ++b) {
      if (roles[a] && roles[a] == roles[b]) {
        throw Error(Errc::unmapped_required_column,
                    "column '" + header[*roles[a]] + "' mapped to two required roles");
      }
    }
  }
  return roles;
}

Schema infer_schema(const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& sample_rows,
                    const ParseConfig& config) {
  if (sample_rows.empty()) throw Error(Errc::empty_sample, "no sample rows for schema inference");
  const auto roles = resolve_roles(header, config);
  std::vector<Column> cols;
  cols.reserve(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    Column col{header[c], AttributeKind::categorical, false};
    for (const auto& r : roles) col.required = col.required || r == c;
    if (roles[static_cast<std::size_t>(Role::timestamp)] == c) {
      col.kind = AttributeKind::timestamp;
    } else if (roles[static_cast<std::size_t>(Role::source_ip)] == c ||
               roles[static_cast<std::size_t>(Role::destination_ip)] == c) {
      col.kind = AttributeKind::ip_address;
    } else if (roles[static_cast<std::size_t>(Role::action)] == c) {
      col.kind = AttributeKind::categorical;
    } else if (auto it = config.kind_overrides.find(header[c]); it != config.kind_overrides.end()) {
      col.kind = it->second;
    } else {
      std::array<std::size_t, 4> votes{};
      for (const auto& row : sample_rows) {
        if (c >= row.size()) continue;
        const auto v = trim(row[c]);
        if (v.empty()) continue;
        ++votes[static_cast<std::size_t>(classify(v, config.timestamp_formats))];
      }
      const auto best = *std::max_element(votes.begin(), votes.end());
      if (best > 0 && std::count(votes.begin(), votes.end(), best) == 1) {
        switch (static_cast<Vote>(std::max_element(votes.begin(), votes.end()) - votes.begin())) {
          case Vote::ip: col.kind = AttributeKind::ip_address; break;
          case Vote::timestamp: col.kind = AttributeKind::timestamp; break;
          case Vote::numeric: col.kind = AttributeKind::ordinal_numeric; break;
          case Vote::categorical: col.kind = AttributeKind::categorical; break;
        }
      }
    }
    cols.push_back(std::move(col));
  }
  return Schema(std::move(cols), roles);
}

bool CsvParser::accepts(std::string_view signature) const {
  if (signature.find('\0') != std::string_view::npos) return false;
  // Reject bytes that cannot start or continue UTF-8; a sequence cut off at
  // the end of the signature is tolerated.
  std::size_t i = 0;
  while (i < signature.size()) {
    const auto b = static_cast<unsigned char>(signature[i]);
    std::size_t len = b < 0x80 ? 1 : (b >> 5) == 0x6 ? 2 : (b >> 4) == 0xE ? 3 : (b >> 3) == 0x1E ? 4 : 0;
    if (len == 0) return false;
    for (std::size_t k = 1; k < len; ++k) {
      if (i + k >= signature.size()) return true;
      if ((static_cast<unsigned char>(signature[i + k]) >> 6) != 0x2) return false;
    }
    i += len;
  }
  return true;
}

ParseResult CsvParser::parse(std::string_view bytes, const ParseConfig& config) const {
  return parse_csv(bytes, config);
}

bool PcapStubParser::accepts(std::string_view sig) const {
  if (sig.size() < 4) return false;
  const auto m = sig.substr(0, 4);
  return m == "\xD4\xC3\xB2\xA1" || m == "\xA1\xB2\xC3\xD4" || m == "\x4D\x3C\xB2\xA1" ||
         m == "\xA1\xB2\x3C\x4D" || m == std::string_view("\x0A\x0D\x0D\x0A", 4);
}

ParseResult PcapStubParser::parse(std::string_view, const ParseConfig&) const {
  throw Error(Errc::unsupported_format,
              "parser '" + name_ + "' recognizes packet captures but cannot decode them");
}

ParserRegistry::ParserRegistry() { plugins_.push_back(std::make_shared<CsvParser>()); }

void ParserRegistry::register_parser(std::shared_ptr<const ParserPlugin> plugin) {
  std::lock_guard lock(mutex_);
  for (const auto& p : plugins_) {
    if (p->name() == plugin->name()) {
      throw Error(Errc::duplicate_parser_name, "parser '" + plugin->name() + "' already registered");
    }
  }
  plugins_.push_back(std::move(plugin));
}

std::shared_ptr<const ParserPlugin> ParserRegistry::select(std::string_view bytes) const {
  std::lock_guard lock(mutex_);
  const auto signature = bytes.substr(0, 4096);
  for (const auto& p : plugins_) {
    if (p->accepts(signature)) return p;
  }
  return plugins_.front();
}

ParseResult ParserRegistry::parse(std::string_view bytes, const ParseConfig& config) const {
  return select(bytes)->parse(bytes, config);
}

std::vector<std::string> ParserRegistry::names() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& p : plugins_) out.push_back(p->name());
  return out;
}

ParseResult parse_csv(std::string_view bytes, const ParseConfig& config) {
  CsvReader reader(bytes, config.delimiter);
  auto header_rec = reader.next();
  if (!header_rec) throw Error(Errc::missing_header, "input has no header row");
  std::vector<std::string> header;
  for (const auto& f : header_rec->fields) header.emplace_back(trim(f));
  if (std::all_of(header.begin(), header.end(), [](const auto& h) { return h.empty(); })) {
    throw Error(Errc::missing_header, "header row is empty");
  }
  {
    std::vector<std::string> sorted = header;
    std::sort(sorted.begin(), sorted.end());
    if (auto it = std::adjacent_find(sorted.begin(), sorted.end()); it != sorted.end()) {
      throw Error(Errc::missing_header, "duplicate header column '" + *it + "'");
    }
  }
  const auto roles = resolve_roles(header, config);
  for (auto r : kAllRoles) {
    const auto ri = static_cast<std::size_t>(r);
    if (!roles[ri]) {
      const auto& m = config.required_mapping[ri];
      throw Error(Errc::unmapped_required_column,
                  m ? "required " + std::string(to_string(r)) + " column '" + *m +
                          "' not found in header"
                    : "no column mapped to required " + std::string(to_string(r)) +
                          " (use --map-" +
                          std::string(r == Role::timestamp        ? "ts"
                                      : r == Role::source_ip      ? "src"
                                      : r == Role::destination_ip ? "dst"
                                                                  : "action") +
                          ")");
    }
  }

  ParseResult result;
  std::vector<Record> records;
  while (auto rec = reader.next()) {
    ++result.data_lines;
    if (rec->fields.size() != header.size()) {
      result.rejections.push_back({rec->line, "expected " + std::to_string(header.size()) +
                                                  " fields, got " +
                                                  std::to_string(rec->fields.size())});
      continue;
    }
    records.push_back(std::move(*rec));
  }

  Schema schema;
  if (records.empty()) {
    std::vector<Column> cols;
    for (std::size_t c = 0; c < header.size(); ++c) {
      AttributeKind k = AttributeKind::categorical;
      if (auto it = config.kind_overrides.find(header[c]); it != config.kind_overrides.end()) {
        k = it->second;
      }
      if (roles[0] == c) k = AttributeKind::timestamp;
      if (roles[1] == c || roles[2] == c) k = AttributeKind::ip_address;
      if (roles[3] == c) k = AttributeKind::categorical;
      bool required = false;
      for (const auto& r : roles) required = required || r == c;
      cols.push_back({header[c], k, required});
    }
    schema = Schema(std::move(cols), roles);
  } else {
    const std::size_t n_sample =
        config.sample_limit == 0 ? records.size() : std::min(config.sample_limit, records.size());
    std::vector<std::vector<std::string>> sample;
    sample.reserve(n_sample);
    for (std::size_t i = 0; i < n_sample; ++i) sample.push_back(records[i].fields);
    schema = infer_schema(header, sample, config);
  }

  std::vector<std::vector<Cell>> cols(header.size());
  for (auto& c : cols) c.reserve(records.size());
  std::vector<Cell> row(header.size());
  for (const auto& rec : records) {
    std::string reason;
    for (std::size_t c = 0; c < header.size(); ++c) {
      const auto& col = schema.column(c);
      row[c] = parse_cell(rec.fields[c], col.kind, config);
      if (col.required && row[c].is_null() && reason.empty()) {
        reason = trim(rec.fields[c]).empty()
                     ? "missing required value in column '" + col.name + "'"
                     : "malformed " + std::string(to_string(col.kind)) + " '" +
                           std::string(trim(rec.fields[c])) + "' in column '" + col.name + "'";
      }
    }
    if (!reason.empty()) {
      result.rejections.push_back({rec.line, std::move(reason)});
      continue;
    }
    for (std::size_t c = 0; c < header.size(); ++c) cols[c].push_back(std::move(row[c]));
  }
  std::stable_sort(result.rejections.begin(), result.rejections.end(),
                   [](const Rejection& a, const Rejection& b) { return a.line < b.line; });

  if (result.data_lines > 0 &&
      static_cast<double>(result.rejections.size()) >
          config.max_rejection_ratio * static_cast<double>(result.data_lines)) {
    std::string msg = std::to_string(result.rejections.size()) + " of " +
                      std::to_string(result.data_lines) +
                      " lines rejected (wrong delimiter or mapping?)\n";
    std::size_t shown = 0;
    for (const auto& r : result.rejections) {
      if (++shown > 10) break;
      msg += "line " + std::to_string(r.line) + ": " + r.reason + "\n";
    }
    const bool only_malformed =
        std::all_of(result.rejections.begin(), result.rejections.end(),
                    [](const Rejection& r) { return r.reason.rfind("expected ", 0) != 0; });
    throw Error(only_malformed ? Errc::malformed_required_cell : Errc::too_many_rejections, msg);
  }

  LogTable table(std::move(schema), std::move(cols), {}, "csv");

  if (config.time_range || config.row_limit) {
    const auto ts = table.schema().require_role(Role::timestamp);
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < table.row_count(); ++r) {
      if (config.row_limit && keep.size() >= *config.row_limit) break;
      if (config.time_range) {
        const auto t = *table.at(r, ts).as_instant();
        if (t < config.time_range->first || !(t < config.time_range->second)) continue;
      }
      keep.push_back(r);
    }
    // Subset of a freshly loaded table: renumber so row ids stay 0..n-1.
    auto sub = table.select_rows(keep, "csv");
    std::vector<std::vector<Cell>> data(sub.column_count());
    for (std::size_t c = 0; c < sub.column_count(); ++c) {
      data[c].assign(sub.column(c).begin(), sub.column(c).end());
    }
    table = LogTable(sub.schema(), std::move(data), {}, "csv");
  }
  result.table = std::make_shared<const LogTable>(std::move(table));
  return result;
}

std::string serialize_csv(const LogTable& table, char delimiter) {
  std::string out;
  const auto& cols = table.schema().columns();
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (c) out += delimiter;
    append_field(out, cols[c].name, delimiter);
  }
  out += '\n';
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c) out += delimiter;
      append_field(out, table.at(r, c).to_text(), delimiter);
    }
    out += '\n';
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot write '" + path + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(Errc::io_error, "write failed for '" + path + "'");
}

}  // namespace firelog
