#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "firelog/log_model.hpp"

namespace firelog {

std::vector<std::string> default_timestamp_formats();

struct ParseConfig {
  char delimiter = ',';
  // Tried in order. Besides strptime patterns ("%d/%b/%Y %H:%M:%S") the names
  // "iso8601", "epoch-ms" and "epoch-s" are understood.
  std::vector<std::string> timestamp_formats = default_timestamp_formats();
  std::map<std::string, AttributeKind> kind_overrides;
  // Header name per Role; unset entries are resolved through common aliases.
  std::array<std::optional<std::string>, 4> required_mapping{};
  // Rows used for kind inference; 0 means all rows.
  std::size_t sample_limit = 0;
  std::optional<std::size_t> row_limit;
  // [start, end) on the timestamp column, applied after parsing.
  std::optional<std::pair<Instant, Instant>> time_range;
  // Parse aborts when more than this fraction of data lines is rejected.
  double max_rejection_ratio = 0.10;

  nlohmann::json to_json() const;
  static ParseConfig from_json(const nlohmann::json& j);  // invalid_config
};

std::optional<Instant> parse_timestamp(std::string_view text,
                                       const std::vector<std::string>& formats);

struct Rejection {
  std::size_t line = 0;
  std::string reason;
};

struct ParseResult {
  TablePtr table;
  std::vector<Rejection> rejections;
  std::size_t data_lines = 0;

  // "line <n>: <reason>" per rejected line.
  std::string report() const;
};

class ParserPlugin {
 public:
  virtual ~ParserPlugin() = default;
  virtual std::string name() const = 0;
  // signature is a prefix of the file contents.
  virtual bool accepts(std::string_view signature) const = 0;
  virtual ParseResult parse(std::string_view bytes, const ParseConfig& config) const = 0;
};

class CsvParser final : public ParserPlugin {
 public:
  std::string name() const override { return "csv"; }
  bool accepts(std::string_view signature) const override;
  ParseResult parse(std::string_view bytes, const ParseConfig& config) const override;
};

// Recognizes pcap/pcapng magic numbers. Packet decoding is not implemented;
// parse() raises unsupported-format.
class PcapStubParser final : public ParserPlugin {
 public:
  explicit PcapStubParser(std::string name = "pcap-stub") : name_(std::move(name)) {}
  std::string name() const override { return name_; }
  bool accepts(std::string_view signature) const override;
  ParseResult parse(std::string_view bytes, const ParseConfig& config) const override;

 private:
  std::string name_;
};

// Plugins are consulted in registration order; the CSV parser is always
// first. Input no plugin accepts is handed to the CSV parser so its errors
// surface.
class ParserRegistry {
 public:
  ParserRegistry();

  void register_parser(std::shared_ptr<const ParserPlugin> plugin);  // duplicate_parser_name
  std::shared_ptr<const ParserPlugin> select(std::string_view bytes) const;
  ParseResult parse(std::string_view bytes, const ParseConfig& config) const;
  std::vector<std::string> names() const;

 private:
  mutable std::mutex mutex_;
  std::vector<std::shared_ptr<const ParserPlugin>> plugins_;
};

ParseResult parse_csv(std::string_view bytes, const ParseConfig& config);

// Best-effort role resolution: explicit mapping entries must name a header
// column; unmapped roles are looked up by alias. Missing roles stay unset.
Schema::RoleMap resolve_roles(const std::vector<std::string>& header, const ParseConfig& config);

Schema infer_schema(const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& sample_rows,
                    const ParseConfig& config);

// RFC-4180 records; fields containing the delimiter, quotes or line breaks
// are quoted. Null cells are written as empty fields.
std::string serialize_csv(const LogTable& table, char delimiter = ',');

std::string read_file(const std::string& path);  // io_error
void write_file(const std::string& path, std::string_view contents);  // io_error

}  // namespace firelog
