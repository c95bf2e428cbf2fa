#include "firelog/log_model.hpp"

#include <arpa/inet.h>

#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <unordered_set>

namespace firelog {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::unknown_column: return "unknown-column";
    case Errc::missing_required_column: return "missing-required-column";
    case Errc::missing_header: return "missing-header";
    case Errc::unmapped_required_column: return "unmapped-required-column";
    case Errc::malformed_required_cell: return "malformed-required-cell";
    case Errc::too_many_rejections: return "too-many-rejections";
    case Errc::empty_sample: return "empty-sample";
    case Errc::duplicate_parser_name: return "duplicate-parser-name";
    case Errc::unsupported_format: return "unsupported-format";
    case Errc::unknown_node_kind: return "unknown-node-kind";
    case Errc::invalid_config: return "invalid-config";
    case Errc::type_mismatch: return "type-mismatch";
    case Errc::cycle_detected: return "cycle-detected";
    case Errc::port_occupied: return "port-occupied";
    case Errc::invalid_port: return "invalid-port";
    case Errc::unknown_node: return "unknown-node";
    case Errc::duplicate_kind: return "duplicate-kind";
    case Errc::duplicate_node: return "duplicate-node";
    case Errc::unconnected_input: return "unconnected-input";
    case Errc::empty_table: return "empty-table";
    case Errc::no_attributes_selected: return "no-attributes-selected";
    case Errc::k_out_of_range: return "k-out-of-range";
    case Errc::insufficient_rows: return "insufficient-rows";
    case Errc::insufficient_dims: return "insufficient-dims";
    case Errc::length_mismatch: return "length-mismatch";
    case Errc::invalid_cidr: return "invalid-cidr";
    case Errc::unknown_cluster: return "unknown-cluster";
    case Errc::non_leaf_split: return "non-leaf-split";
    case Errc::unknown_attribute: return "unknown-attribute";
    case Errc::unknown_ip: return "unknown-ip";
    case Errc::invalid_range: return "invalid-range";
    case Errc::empty_model: return "empty-model";
    case Errc::column_collision: return "column-collision";
    case Errc::working_set_exceeded: return "working-set-exceeded";
    case Errc::unknown_subscription: return "unknown-subscription";
    case Errc::unknown_log: return "unknown-log";
    case Errc::unknown_workflow: return "unknown-workflow";
    case Errc::unknown_model: return "unknown-model";
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::io_error: return "io-error";
  }
  return "unknown";
}

std::string_view to_string(AttributeKind kind) noexcept {
  switch (kind) {
    case AttributeKind::timestamp: return "timestamp";
    case AttributeKind::ip_address: return "ip-address";
    case AttributeKind::categorical: return "categorical";
    case AttributeKind::ordinal_numeric: return "ordinal-numeric";
    case AttributeKind::free_text: return "free-text";
  }
  return "categorical";
}

std::optional<AttributeKind> parse_attribute_kind(std::string_view text) noexcept {
  for (auto k : {AttributeKind::timestamp, AttributeKind::ip_address, AttributeKind::categorical,
                 AttributeKind::ordinal_numeric, AttributeKind::free_text}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::string_view to_string(Role role) noexcept {
  switch (role) {
    case Role::timestamp: return "timestamp";
    case Role::source_ip: return "source-ip";
    case Role::destination_ip: return "destination-ip";
    case Role::action: return "action";
  }
  return "";
}

std::string format_iso8601(Instant t) {
  using namespace std::chrono;
  const sys_time<milliseconds> tp{milliseconds{t.epoch_ms}};
  const auto day = floor<days>(tp);
  const year_month_day ymd{day};
  const hh_mm_ss hms{tp - day};
  char buf[40];
  const auto ms = hms.subseconds().count();
  if (ms == 0) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                  static_cast<long>(hms.seconds().count()));
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ld.%03ldZ",
                  static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()), static_cast<long>(hms.hours().count()),
                  static_cast<long>(hms.minutes().count()), static_cast<long>(hms.seconds().count()),
                  static_cast<long>(ms));
  }
  return buf;
}

std::optional<IpAddress> IpAddress::parse(std::string_view text) {
  if (text.empty() || text.size() > INET6_ADDRSTRLEN) return std::nullopt;
  const std::string s(text);
  IpAddress ip;
  char out[INET6_ADDRSTRLEN];
  if (s.find(':') == std::string::npos) {
    in_addr a{};
    if (inet_pton(AF_INET, s.c_str(), &a) != 1) return std::nullopt;
    std::memcpy(ip.bytes_.data(), &a, 4);
    inet_ntop(AF_INET, &a, out, sizeof out);
  } else {
    in6_addr a{};
    if (inet_pton(AF_INET6, s.c_str(), &a) != 1) return std::nullopt;
    ip.v6_ = true;
    std::memcpy(ip.bytes_.data(), &a, 16);
    inet_ntop(AF_INET6, &a, out, sizeof out);
  }
  ip.text_ = out;
  return ip;
}

std::size_t IpAddressHash::operator()(const IpAddress& ip) const noexcept {
  return std::hash<std::string>{}(ip.str());
}

std::optional<double> Cell::as_number() const noexcept {
  if (auto p = as_integer()) return static_cast<double>(*p);
  if (auto p = as_real()) return *p;
  if (auto p = as_instant()) return static_cast<double>(p->epoch_ms);
  return std::nullopt;
}

namespace {

std::string format_real(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, end);
  // Keep reals distinguishable from integers so they re-parse as reals.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

}  // namespace

std::string Cell::to_text() const {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return {};
        } else if constexpr (std::is_same_v<T, Instant>) {
          return format_iso8601(v);
        } else if constexpr (std::is_same_v<T, IpAddress>) {
          return v.str();
        } else if constexpr (std::is_same_v<T, std::string>) {
          return v;
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else {
          return format_real(v);
        }
      },
      value_);
}

bool Cell::matches(AttributeKind kind) const noexcept {
  if (is_null()) return true;
  switch (kind) {
    case AttributeKind::timestamp: return as_instant() != nullptr;
    case AttributeKind::ip_address: return as_ip() != nullptr;
    case AttributeKind::categorical:
    case AttributeKind::free_text: return as_string() != nullptr;
    case AttributeKind::ordinal_numeric: return as_integer() != nullptr || as_real() != nullptr;
  }
  return false;
}

std::strong_ordering compare_cells(const Cell& a, const Cell& b) {
  if (a.is_null() || b.is_null()) {
    return static_cast<int>(a.is_null()) <=> static_cast<int>(b.is_null());
  }
  const bool an = a.as_integer() || a.as_real();
  const bool bn = b.as_integer() || b.as_real();
  if (an && bn) {
    if (a.as_integer() && b.as_integer()) return *a.as_integer() <=> *b.as_integer();
    const double x = *a.as_number(), y = *b.as_number();
    if (x < y) return std::strong_ordering::less;
    if (y < x) return std::strong_ordering::greater;
    // Equal numerically; order integer before real for a total order.
    return static_cast<int>(a.as_real() != nullptr) <=> static_cast<int>(b.as_real() != nullptr);
  }
  if (auto c = a.value().index() <=> b.value().index(); c != 0) return c;
  if (auto p = a.as_instant()) return *p <=> *b.as_instant();
  if (auto p = a.as_ip()) return *p <=> *b.as_ip();
  return a.as_string()->compare(*b.as_string()) <=> 0;
}

Schema::Schema(std::vector<Column> columns, RoleMap roles)
    : columns_(std::move(columns)), roles_(roles) {
  std::unordered_set<std::string_view> seen;
  for (const auto& c : columns_) {
    if (!seen.insert(c.name).second) {
      throw Error(Errc::invalid_argument, "duplicate column name '" + c.name + "'");
    }
  }
  for (auto r : kAllRoles) {
    if (auto i = roles_[static_cast<std::size_t>(r)]) {
      if (*i >= columns_.size()) {
        throw Error(Errc::invalid_argument, "role index out of range");
      }
    }
  }
}

std::optional<std::size_t> Schema::find(std::string_view name) const noexcept {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Schema::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw Error(Errc::unknown_column, "unknown column '" + std::string(name) + "'");
}

std::size_t Schema::require_role(Role r) const {
  if (auto i = role(r)) return *i;
  throw Error(Errc::missing_required_column,
              "table has no " + std::string(to_string(r)) + " column");
}

bool Schema::has_all_roles() const noexcept {
  for (const auto& r : roles_) {
    if (!r) return false;
  }
  return true;
}

LogTable::LogTable(Schema schema, std::vector<std::vector<Cell>> columns,
                   std::vector<std::uint64_t> row_ids, std::string provenance)
    : schema_(std::move(schema)),
      columns_(std::move(columns)),
      row_ids_(std::move(row_ids)),
      provenance_(std::move(provenance)) {
  if (columns_.size() != schema_.size()) {
    throw Error(Errc::invalid_argument, "column count does not match schema");
  }
  std::size_t n = columns_.empty() ? row_ids_.size() : columns_.front().size();
  if (row_ids_.empty() && n > 0) {
    row_ids_.resize(n);
    for (std::size_t i = 0; i < n; ++i) row_ids_[i] = i;
  }
  n = row_ids_.size();
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    const auto& col = schema_.column(c);
    if (columns_[c].size() != n) {
      throw Error(Errc::invalid_argument, "column '" + col.name + "' has wrong length");
    }
    for (std::size_t r = 0; r < n; ++r) {
      const Cell& cell = columns_[c][r];
      if (!cell.matches(col.kind)) {
        throw Error(Errc::invalid_argument, "cell kind mismatch in column '" + col.name +
                                                "' at row " + std::to_string(r));
      }
      if (col.required && cell.is_null()) {
        throw Error(Errc::invalid_argument, "null in required column '" + col.name +
                                                "' at row " + std::to_string(r));
      }
    }
  }
}

LogTable LogTable::from_rows(Schema schema, const std::vector<std::vector<Cell>>& rows,
                             std::string provenance) {
  std::vector<std::vector<Cell>> cols(schema.size());
  for (auto& c : cols) c.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != schema.size()) {
      throw Error(Errc::invalid_argument, "row " + std::to_string(r) + " has " +
                                              std::to_string(rows[r].size()) + " cells, expected " +
                                              std::to_string(schema.size()));
    }
    for (std::size_t c = 0; c < schema.size(); ++c) cols[c].push_back(rows[r][c]);
  }
  std::vector<std::uint64_t> ids(rows.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  return LogTable(std::move(schema), std::move(cols), std::move(ids), std::move(provenance));
}

std::vector<Cell> LogTable::row(std::size_t r) const {
  std::vector<Cell> out;
  out.reserve(columns_.size());
  for (const auto& c : columns_) out.push_back(c.at(r));
  return out;
}

LogTable LogTable::select_rows(std::span<const std::size_t> rows, std::string provenance) const {
  std::vector<std::vector<Cell>> cols(columns_.size());
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    cols[c].reserve(rows.size());
    for (auto r : rows) cols[c].push_back(columns_[c].at(r));
  }
  std::vector<std::uint64_t> ids;
  ids.reserve(rows.size());
  for (auto r : rows) ids.push_back(row_ids_.at(r));
  LogTable out;
  out.schema_ = schema_;
  out.columns_ = std::move(cols);
  out.row_ids_ = std::move(ids);
  out.provenance_ = std::move(provenance);
  return out;
}

LogTable LogTable::select_columns(std::span<const std::size_t> cols,
                                  std::string provenance) const {
  std::vector<Column> schema_cols;
  std::vector<std::vector<Cell>> data;
  Schema::RoleMap roles{};
  for (std::size_t i = 0; i < cols.size(); ++i) {
    const std::size_t c = cols[i];
    schema_cols.push_back(schema_.column(c));
    data.push_back(columns_.at(c));
    for (auto r : kAllRoles) {
      if (schema_.role(r) == c) roles[static_cast<std::size_t>(r)] = i;
    }
  }
  return LogTable(Schema(std::move(schema_cols), roles), std::move(data), row_ids_,
                  std::move(provenance));
}

LogTable LogTable::with_column(Column column, std::vector<Cell> cells,
                               std::string provenance) const {
  if (schema_.find(column.name)) {
    throw Error(Errc::column_collision, "column '" + column.name + "' already exists");
  }
  if (cells.size() != row_count()) {
    throw Error(Errc::length_mismatch, "new column has " + std::to_string(cells.size()) +
                                           " cells for " + std::to_string(row_count()) + " rows");
  }
  auto cols = schema_.columns();
  cols.push_back(std::move(column));
  auto data = columns_;
  data.push_back(std::move(cells));
  return LogTable(Schema(std::move(cols), schema_.roles()), std::move(data), row_ids_,
                  std::move(provenance));
}

std::uint64_t LogTable::content_hash() const {
  // FNV-1a over schema, row ids and canonical cell text.
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::string_view s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 1099511628211ULL;
    }
    h ^= 0xff;
    h *= 1099511628211ULL;
  };
  for (const auto& c : schema_.columns()) {
    mix(c.name);
    mix(to_string(c.kind));
  }
  for (auto id : row_ids_) mix(std::to_string(id));
  for (const auto& col : columns_) {
    for (const auto& cell : col) {
      mix(std::to_string(cell.value().index()));
      mix(cell.to_text());
    }
  }
  return h;
}

std::span<const Cell> column(const LogTable& table, std::string_view name) {
  return table.column(table.schema().index_of(name));
}

std::vector<Edge> as_edge_list(const LogTable& table) {
  const auto src = table.schema().require_role(Role::source_ip);
  const auto dst = table.schema().require_role(Role::destination_ip);
  std::vector<Edge> edges;
  edges.reserve(table.row_count());
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    const auto* s = table.at(r, src).as_ip();
    const auto* d = table.at(r, dst).as_ip();
    if (s && d) edges.push_back(Edge{*s, *d, r});
  }
  return edges;
}

}  // namespace firelog
