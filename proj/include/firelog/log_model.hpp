#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "firelog/error.hpp"

namespace firelog {

enum class AttributeKind { timestamp, ip_address, categorical, ordinal_numeric, free_text };

std::string_view to_string(AttributeKind kind) noexcept;
std::optional<AttributeKind> parse_attribute_kind(std::string_view text) noexcept;

// The four attributes every firewall log entry carries.
enum class Role { timestamp = 0, source_ip = 1, destination_ip = 2, action = 3 };
inline constexpr std::array<Role, 4> kAllRoles{Role::timestamp, Role::source_ip,
                                               Role::destination_ip, Role::action};

std::string_view to_string(Role role) noexcept;

struct Instant {
  std::int64_t epoch_ms = 0;
  friend auto operator<=>(const Instant&, const Instant&) = default;
};

// UTC, millisecond precision: 2012-04-05T17:51:26Z or 2012-04-05T17:51:26.250Z
std::string format_iso8601(Instant t);

// IPv4 or IPv6 address. The normalized textual form (inet_ntop) is the
// identity key; ordering is numeric with all IPv4 before IPv6.
class IpAddress {
 public:
  static std::optional<IpAddress> parse(std::string_view text);

  const std::string& str() const noexcept { return text_; }
  bool is_v6() const noexcept { return v6_; }
  // IPv4 uses the first 4 bytes.
  const std::array<std::uint8_t, 16>& bytes() const noexcept { return bytes_; }

  friend bool operator==(const IpAddress& a, const IpAddress& b) noexcept {
    return a.v6_ == b.v6_ && a.bytes_ == b.bytes_;
  }
  friend std::strong_ordering operator<=>(const IpAddress& a, const IpAddress& b) noexcept {
    if (auto c = a.v6_ <=> b.v6_; c != 0) return c;
    return a.bytes_ <=> b.bytes_;
  }

 private:
  IpAddress() = default;
  std::array<std::uint8_t, 16> bytes_{};
  bool v6_ = false;
  std::string text_;
};

struct IpAddressHash {
  std::size_t operator()(const IpAddress& ip) const noexcept;
};

// One typed, nullable table value. A missing value is always null; there is
// no empty-string sentinel (Cell::text("") yields null).
class Cell {
 public:
  using Value = std::variant<std::monostate, Instant, IpAddress, std::string, std::int64_t, double>;

  Cell() = default;

  static Cell null() { return Cell(); }
  static Cell instant(std::int64_t epoch_ms) { return Cell(Value(Instant{epoch_ms})); }
  static Cell ip(IpAddress address) { return Cell(Value(std::move(address))); }
  static Cell text(std::string s) {
    if (s.empty()) return Cell();
    return Cell(Value(std::move(s)));
  }
  static Cell integer(std::int64_t v) { return Cell(Value(v)); }
  static Cell real(double v) { return Cell(Value(v)); }

  bool is_null() const noexcept { return std::holds_alternative<std::monostate>(value_); }
  const Value& value() const noexcept { return value_; }

  const Instant* as_instant() const noexcept { return std::get_if<Instant>(&value_); }
  const IpAddress* as_ip() const noexcept { return std::get_if<IpAddress>(&value_); }
  const std::string* as_string() const noexcept { return std::get_if<std::string>(&value_); }
  const std::int64_t* as_integer() const noexcept { return std::get_if<std::int64_t>(&value_); }
  const double* as_real() const noexcept { return std::get_if<double>(&value_); }
  // Integer, real and instant cells as double.
  std::optional<double> as_number() const noexcept;

  // Canonical text form used by CSV serialization; null is "".
  std::string to_text() const;

  bool matches(AttributeKind kind) const noexcept;

  friend bool operator==(const Cell&, const Cell&) = default;

 private:
  explicit Cell(Value v) : value_(std::move(v)) {}
  Value value_;
};

// Total order used for sorting and deterministic grouping: numbers compare
// numerically, other values by type then natural order, nulls last.
std::strong_ordering compare_cells(const Cell& a, const Cell& b);

struct Column {
  std::string name;
  AttributeKind kind = AttributeKind::categorical;
  bool required = false;
  friend bool operator==(const Column&, const Column&) = default;
};

class Schema {
 public:
  using RoleMap = std::array<std::optional<std::size_t>, 4>;

  Schema() = default;
  // Throws invalid_argument on duplicate column names or bad role indices.
  // Parsed logs mark their role columns required; derived tables may not.
  explicit Schema(std::vector<Column> columns, RoleMap roles = {});

  const std::vector<Column>& columns() const noexcept { return columns_; }
  std::size_t size() const noexcept { return columns_.size(); }
  const Column& column(std::size_t i) const { return columns_.at(i); }

  std::optional<std::size_t> find(std::string_view name) const noexcept;
  std::size_t index_of(std::string_view name) const;  // unknown_column

  std::optional<std::size_t> role(Role r) const noexcept {
    return roles_[static_cast<std::size_t>(r)];
  }
  std::size_t require_role(Role r) const;  // missing_required_column
  bool has_all_roles() const noexcept;
  const RoleMap& roles() const noexcept { return roles_; }

  friend bool operator==(const Schema&, const Schema&) = default;

 private:
  std::vector<Column> columns_;
  RoleMap roles_{};
};

// Immutable columnar table. Every row keeps the id it had in the table that
// was originally loaded, so derived subsets can be matched back to it.
class LogTable {
 public:
  LogTable() = default;
  // columns[c][r]; row_ids empty means 0..n-1. Validates shape, kinds and
  // non-null required cells.
  LogTable(Schema schema, std::vector<std::vector<Cell>> columns,
           std::vector<std::uint64_t> row_ids = {}, std::string provenance = {});

  static LogTable from_rows(Schema schema, const std::vector<std::vector<Cell>>& rows,
                            std::string provenance = {});

  const Schema& schema() const noexcept { return schema_; }
  std::size_t row_count() const noexcept { return row_ids_.size(); }
  std::size_t column_count() const noexcept { return schema_.size(); }
  const std::string& provenance() const noexcept { return provenance_; }

  const Cell& at(std::size_t row, std::size_t col) const { return columns_[col][row]; }
  std::span<const Cell> column(std::size_t col) const { return columns_.at(col); }
  std::span<const std::uint64_t> row_ids() const noexcept { return row_ids_; }
  std::vector<Cell> row(std::size_t r) const;

  LogTable select_rows(std::span<const std::size_t> rows, std::string provenance) const;
  LogTable select_columns(std::span<const std::size_t> cols, std::string provenance) const;
  // column_collision when the name already exists.
  LogTable with_column(Column column, std::vector<Cell> cells, std::string provenance) const;

  std::uint64_t content_hash() const;

  // Provenance is descriptive metadata and not part of equality.
  friend bool operator==(const LogTable& a, const LogTable& b) {
    return a.schema_ == b.schema_ && a.row_ids_ == b.row_ids_ && a.columns_ == b.columns_;
  }

 private:
  Schema schema_;
  std::vector<std::vector<Cell>> columns_;
  std::vector<std::uint64_t> row_ids_;
  std::string provenance_;
};

using TablePtr = std::shared_ptr<const LogTable>;

std::span<const Cell> column(const LogTable& table, std::string_view name);

struct Edge {
  IpAddress source;
  IpAddress destination;
  std::size_t row;
};

// One edge per row whose endpoints are both non-null, in row order.
std::vector<Edge> as_edge_list(const LogTable& table);

}  // namespace firelog
