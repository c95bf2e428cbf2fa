#include <arpa/inet.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_set>

#include "firelog/dataflow.hpp"
#include "firelog/ingestion.hpp"

namespace firelog::dataflow {

namespace {

using Inputs = std::span<const std::optional<Payload>>;

[[noreturn]] void bad_config(const std::string& msg) { throw Error(Errc::invalid_config, msg); }

const TablePtr& table_at(Inputs in, std::size_t i) { return std::get<TablePtr>(*in[i]); }

std::string string_field(const json& c, const char* key) {
  if (!c.contains(key) || !c.at(key).is_string() || c.at(key).get<std::string>().empty()) {
    bad_config(std::string("'") + key + "' must be a non-empty string");
  }
  return c.at(key).get<std::string>();
}

std::vector<std::string> string_list(const json& c, const char* key, bool required) {
  if (!c.contains(key)) {
    if (required) bad_config(std::string("'") + key + "' is required");
    return {};
  }
  const auto& v = c.at(key);
  if (!v.is_array()) bad_config(std::string("'") + key + "' must be an array of strings");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) bad_config(std::string("'") + key + "' must be an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::int64_t int_field(const json& c, const char* key, std::int64_t fallback, std::int64_t min) {
  if (!c.contains(key)) return fallback;
  const auto& v = c.at(key);
  if (!v.is_number_integer()) bad_config(std::string("'") + key + "' must be an integer");
  const auto x = v.get<std::int64_t>();
  if (x < min) bad_config(std::string("'") + key + "' must be at least " + std::to_string(min));
  return x;
}

double number_field(const json& c, const char* key, double fallback) {
  if (!c.contains(key)) return fallback;
  if (!c.at(key).is_number()) bad_config(std::string("'") + key + "' must be a number");
  return c.at(key).get<double>();
}

bool bool_field(const json& c, const char* key, bool fallback) {
  if (!c.contains(key)) return fallback;
  if (!c.at(key).is_boolean()) bad_config(std::string("'") + key + "' must be a boolean");
  return c.at(key).get<bool>();
}

// Interprets a JSON literal in the type of the column it is compared with.
Cell cell_from_json(const json& v, AttributeKind kind) {
  if (v.is_null()) return Cell::null();
  const std::string text = v.is_string() ? v.get<std::string>() : v.dump();
  switch (kind) {
    case AttributeKind::timestamp:
      if (v.is_number_integer()) return Cell::instant(v.get<std::int64_t>());
      if (auto t = parse_timestamp(text, default_timestamp_formats())) return Cell::instant(t->epoch_ms);
      break;
    case AttributeKind::ip_address:
      if (auto ip = IpAddress::parse(text)) return Cell::ip(*ip);
      break;
    case AttributeKind::ordinal_numeric: {
      if (v.is_number_integer()) return Cell::integer(v.get<std::int64_t>());
      if (v.is_number()) return Cell::real(v.get<double>());
      std::int64_t i = 0;
      if (auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), i);
          ec == std::errc() && p == text.data() + text.size()) {
        return Cell::integer(i);
      }
      double d = 0;
      if (auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), d);
          ec == std::errc() && p == text.data() + text.size()) {
        return Cell::real(d);
      }
      break;
    }
    case AttributeKind::categorical:
    case AttributeKind::free_text:
      return Cell::text(text);
  }
  throw Error(Errc::invalid_config,
              "value " + v.dump() + " is not a valid " + std::string(to_string(kind)));
}

Payload table_payload(LogTable t) { return std::make_shared<const LogTable>(std::move(t)); }

std::vector<std::string> attributes_or_default(const json& config, const LogTable& t) {
  auto attrs = string_list(config, "attributes", false);
  return attrs.empty() ? default_feature_attributes(t) : attrs;
}

// ---- csv-loader ------------------------------------------------------------

TablePtr load_from_path(const json& config) {
  if (!config.contains("path")) {
    throw Error(Errc::invalid_config, "csv-loader has no log bound (set 'path' or 'log-id')");
  }
  const auto cfg = ParseConfig::from_json(config.value("parse", json::object()));
  return parse_csv(read_file(config.at("path").get<std::string>()), cfg).table;
}

NodeKindPtr csv_loader() {
  return make_kind(
      "csv-loader", {}, {{"table", PortType::table}},
      [](const EvalContext& ctx, Inputs, const json& c) -> std::vector<Payload> {
        TablePtr t = ctx.load ? ctx.load(c) : load_from_path(c);
        if (!t) throw Error(Errc::invalid_config, "csv-loader could not resolve its log");
        return {t};
      },
      [](const json& c) {
        if (c.contains("path") && !c.at("path").is_string()) bad_config("'path' must be a string");
        if (c.contains("log-id") && !c.at("log-id").is_string()) {
          bad_config("'log-id' must be a string");
        }
        if (c.contains("parse")) ParseConfig::from_json(c.at("parse"));
      });
}

// ---- row-filter ------------------------------------------------------------

const std::set<std::string>& filter_ops() {
  static const std::set<std::string> ops{"eq", "ne", "lt", "le", "gt", "ge", "contains", "is-null",
                                         "not-null"};
  return ops;
}

std::vector<json> predicates_of(const json& c) {
  if (c.contains("predicates")) {
    if (!c.at("predicates").is_array()) bad_config("'predicates' must be an array");
    return c.at("predicates").get<std::vector<json>>();
  }
  if (c.contains("column")) return {c};
  return {};
}

void validate_filter(const json& c) {
  for (const auto& p : predicates_of(c)) {
    if (!p.is_object()) bad_config("each predicate must be an object");
    string_field(p, "column");
    const auto op = string_field(p, "op");
    if (!filter_ops().count(op)) bad_config("unknown filter op '" + op + "'");
    if (op != "is-null" && op != "not-null" && !p.contains("value")) {
      bad_config("filter op '" + op + "' needs a 'value'");
    }
  }
  if (c.contains("mode") && c.at("mode") != "all" && c.at("mode") != "any") {
    bad_config("'mode' must be \"all\" or \"any\"");
  }
}

bool test_cell(const Cell& cell, const std::string& op, const Cell& value) {
  if (op == "is-null") return cell.is_null();
  if (op == "not-null") return !cell.is_null();
  if (cell.is_null()) return false;
  if (op == "contains") return cell.to_text().find(value.to_text()) != std::string::npos;
  if (value.is_null()) return false;
  const auto c = compare_cells(cell, value);
  if (op == "eq") return c == 0;
  if (op == "ne") return c != 0;
  if (op == "lt") return c < 0;
  if (op == "le") return c <= 0;
  if (op == "gt") return c > 0;
  return c >= 0;
}

NodeKindPtr row_filter() {
  return make_kind(
      "row-filter", {{"table", PortType::table}}, {{"table", PortType::table}},
      [](const EvalContext&, Inputs in, const json& c) -> std::vector<Payload> {
        const auto& t = *table_at(in, 0);
        struct Pred {
          std::size_t col;
          std::string op;
          Cell value;
        };
        std::vector<Pred> preds;
        for (const auto& p : predicates_of(c)) {
          const auto col = t.schema().index_of(p.at("column").get<std::string>());
          const auto op = p.at("op").get<std::string>();
          Cell v;
          if (p.contains("value")) {
            v = op == "contains" ? Cell::text(p.at("value").is_string()
                                                  ? p.at("value").get<std::string>()
                                                  : p.at("value").dump())
                                 : cell_from_json(p.at("value"), t.schema().column(col).kind);
          }
          preds.push_back({col, op, v});
        }
        const bool any = c.value("mode", "all") == "any";
        std::vector<std::size_t> keep;
        for (std::size_t r = 0; r < t.row_count(); ++r) {
          bool ok = !any || preds.empty();
          for (const auto& p : preds) {
            const bool hit = test_cell(t.at(r, p.col), p.op, p.value);
            if (any && hit) {
              ok = true;
              break;
            }
            if (!any && !hit) {
              ok = false;
              break;
            }
          }
          if (ok) keep.push_back(r);
        }
        return {table_payload(t.select_rows(keep, "row-filter"))};
      },
      validate_filter);
}

// ---- column-select ---------------------------------------------------------

NodeKindPtr column_select() {
  return make_kind(
      "column-select", {{"table", PortType::table}}, {{"table", PortType::table}},
      [](const EvalContext&, Inputs in, const json& c) -> std::vector<Payload> {
        const auto& t = *table_at(in, 0);
        std::vector<std::size_t> cols;
        for (const auto& name : string_list(c, "columns", true)) cols.push_back(t.schema().index_of(name));
        return {table_payload(t.select_columns(cols, "column-select"))};
      },
      [](const json& c) {
        const auto cols = string_list(c, "columns", true);
        if (cols.empty()) bad_config("'columns' must not be empty");
        if (std::set<std::string>(cols.begin(), cols.end()).size() != cols.size()) {
          bad_config("'columns' must not repeat a column");
        }
      });
}

// ---- derive-column ---------------------------------------------------------

const std::set<std::string>& derive_ops() {
  static const std::set<std::string> ops{"add", "sub", "mul", "div", "hour", "subnet", "concat"};
  return ops;
}

bool is_arith(const std::string& op) {
  return op == "add" || op == "sub" || op == "mul" || op == "div";
}

void validate_derive(const json& c) {
  string_field(c, "name");
  const auto op = string_field(c, "op");
  if (!derive_ops().count(op)) bad_config("unknown derive op '" + op + "'");
  if (is_arith(op)) {
    string_field(c, "left");
    if (c.contains("right") == c.contains("right-value")) {
      bad_config("arithmetic needs exactly one of 'right' or 'right-value'");
    }
    if (c.contains("right")) string_field(c, "right");
    if (c.contains("right-value")) number_field(c, "right-value", 0);
  } else if (op == "hour") {
    string_field(c, "column");
  } else if (op == "subnet") {
    string_field(c, "column");
    if (int_field(c, "prefix", 24, 0) > 128) bad_config("'prefix' must be at most 128");
  } else {
    if (string_list(c, "columns", true).empty()) bad_config("'columns' must not be empty");
    if (c.contains("separator") && !c.at("separator").is_string()) {
      bad_config("'separator' must be a string");
    }
  }
}

Cell arith(const std::string& op, const Cell& a, const Cell& b) {
  const auto x = a.as_number();
  const auto y = b.as_number();
  if (!x || !y) return Cell::null();
  if (a.as_integer() && b.as_integer() && op != "div") {
    const auto i = *a.as_integer(), j = *b.as_integer();
    if (op == "add") return Cell::integer(i + j);
    if (op == "sub") return Cell::integer(i - j);
    return Cell::integer(i * j);
  }
  double r = 0;
  if (op == "add") r = *x + *y;
  if (op == "sub") r = *x - *y;
  if (op == "mul") r = *x * *y;
  if (op == "div") {
    if (*y == 0) return Cell::null();
    r = *x / *y;
  }
  return std::isfinite(r) ? Cell::real(r) : Cell::null();
}

Cell subnet_of(const IpAddress& ip, std::int64_t prefix) {
  auto bytes = ip.bytes();
  const unsigned width = ip.is_v6() ? 128 : 32;
  const auto bits = static_cast<unsigned>(std::min<std::int64_t>(prefix, width));
  for (unsigned i = 0; i < width / 8; ++i) {
    const unsigned lo = i * 8;
    if (lo >= bits) {
      bytes[i] = 0;
    } else if (lo + 8 > bits) {
      bytes[i] &= static_cast<std::uint8_t>(0xFFu << (8 - (bits - lo)));
    }
  }
  char buf[INET6_ADDRSTRLEN] = {};
  inet_ntop(ip.is_v6() ? AF_INET6 : AF_INET, bytes.data(), buf, sizeof buf);
  return Cell::text(std::string(buf) + "/" + std::to_string(bits));
}

NodeKindPtr derive_column() {
  return make_kind(
      "derive-column", {{"table", PortType::table}}, {{"table", PortType::table}},
      [](const EvalContext&, Inputs in, const json& c) -> std::vector<Payload> {
        const auto& t = *table_at(in, 0);
        const auto op = c.at("op").get<std::string>();
        const auto n = t.row_count();
        std::vector<Cell> out(n);
        AttributeKind kind = AttributeKind::categorical;
        if (is_arith(op)) {
          kind = AttributeKind::ordinal_numeric;
          const auto left = t.schema().index_of(c.at("left").get<std::string>());
          std::optional<std::size_t> right;
          Cell constant;
          if (c.contains("right")) {
            right = t.schema().index_of(c.at("right").get<std::string>());
          } else {
            const auto& v = c.at("right-value");
            constant = v.is_number_integer() ? Cell::integer(v.get<std::int64_t>())
                                             : Cell::real(v.get<double>());
          }
          for (std::size_t r = 0; r < n; ++r) {
            out[r] = arith(op, t.at(r, left), right ? t.at(r, *right) : constant);
          }
        } else if (op == "hour") {
          kind = AttributeKind::ordinal_numeric;
          const auto col = t.schema().index_of(c.at("column").get<std::string>());
          for (std::size_t r = 0; r < n; ++r) {
            if (const auto* ts = t.at(r, col).as_instant()) {
              const std::int64_t day_ms = 86'400'000;
              const auto in_day = ((ts->epoch_ms % day_ms) + day_ms) % day_ms;
              out[r] = Cell::integer(in_day / 3'600'000);
            }
          }
        } else if (op == "subnet") {
          const auto col = t.schema().index_of(c.at("column").get<std::string>());
          const auto prefix = c.value("prefix", std::int64_t{24});
          for (std::size_t r = 0; r < n; ++r) {
            if (const auto* ip = t.at(r, col).as_ip()) out[r] = subnet_of(*ip, prefix);
          }
        } else {
          std::vector<std::size_t> cols;
          for (const auto& name : string_list(c, "columns", true)) {
            cols.push_back(t.schema().index_of(name));
          }
          const auto sep = c.value("separator", std::string("|"));
          for (std::size_t r = 0; r < n; ++r) {
            std::string s;
            bool any = false;
            for (std::size_t i = 0; i < cols.size(); ++i) {
              if (i) s += sep;
              const auto& cell = t.at(r, cols[i]);
              any = any || !cell.is_null();
              s += cell.to_text();
            }
            if (any) out[r] = Cell::text(std::move(s));
          }
        }
        return {table_payload(t.with_column({c.at("name").get<std::string>(), kind},
                                            std::move(out), "derive-column"))};
      },
      validate_derive);
}

// ---- aggregate -------------------------------------------------------------

const std::set<std::string>& aggregate_ops() {
  static const std::set<std::string> ops{"count", "sum", "mean", "min", "max", "distinct"};
  return ops;
}

std::vector<json> aggregates_of(const json& c) {
  if (!c.contains("aggregates")) return {json{{"op", "count"}}};
  if (!c.at("aggregates").is_array()) bad_config("'aggregates' must be an array");
  return c.at("aggregates").get<std::vector<json>>();
}

void validate_aggregate(const json& c) {
  string_list(c, "group-by", false);
  std::set<std::string> names;
  for (const auto& g : string_list(c, "group-by", false)) names.insert(g);
  for (const auto& a : aggregates_of(c)) {
    if (!a.is_object()) bad_config("each aggregate must be an object");
    const auto op = string_field(a, "op");
    if (!aggregate_ops().count(op)) bad_config("unknown aggregate op '" + op + "'");
    if (op != "count") string_field(a, "column");
    if (a.contains("column") && !a.at("column").is_string()) bad_config("'column' must be a string");
    if (a.contains("as")) string_field(a, "as");
  }
}

NodeKindPtr aggregate() {
  return make_kind(
      "aggregate", {{"table", PortType::table}}, {{"table", PortType::table}},
      [](const EvalContext&, Inputs in, const json& c) -> std::vector<Payload> {
        const auto& t = *table_at(in, 0);
        std::vector<std::size_t> keys;
        std::vector<Column> columns;
        for (const auto& g : string_list(c, "group-by", false)) {
          keys.push_back(t.schema().index_of(g));
          columns.push_back({g, t.schema().column(keys.back()).kind});
        }
        struct Agg {
          std::string op;
          std::optional<std::size_t> col;
        };
        std::vector<Agg> aggs;
        for (const auto& a : aggregates_of(c)) {
          Agg g{a.at("op").get<std::string>(), std::nullopt};
          if (a.contains("column")) g.col = t.schema().index_of(a.at("column").get<std::string>());
          std::string name =
              a.value("as", g.col ? g.op + "_" + t.schema().column(*g.col).name : g.op);
          AttributeKind kind = AttributeKind::ordinal_numeric;
          if ((g.op == "min" || g.op == "max") && g.col) kind = t.schema().column(*g.col).kind;
          columns.push_back({std::move(name), kind});
          aggs.push_back(std::move(g));
        }

        std::vector<std::size_t> order(t.row_count());
        std::iota(order.begin(), order.end(), 0);
        auto key_cmp = [&](std::size_t a, std::size_t b) {
          for (auto k : keys) {
            if (const auto o = compare_cells(t.at(a, k), t.at(b, k)); o != 0) return o < 0;
          }
          return false;
        };
        std::stable_sort(order.begin(), order.end(), key_cmp);

        std::vector<std::vector<Cell>> rows;
        for (std::size_t i = 0; i < order.size();) {
          std::size_t j = i;
          while (j < order.size() && !key_cmp(order[i], order[j]) && !key_cmp(order[j], order[i])) ++j;
          std::vector<Cell> row;
          for (auto k : keys) row.push_back(t.at(order[i], k));
          for (const auto& g : aggs) {
            if (g.op == "count") {
              std::int64_t n = 0;
              for (auto r = i; r < j; ++r) n += (!g.col || !t.at(order[r], *g.col).is_null()) ? 1 : 0;
              row.push_back(Cell::integer(n));
            } else if (g.op == "distinct") {
              std::unordered_set<std::string> seen;
              for (auto r = i; r < j; ++r) {
                const auto& cell = t.at(order[r], *g.col);
                if (!cell.is_null()) seen.insert(cell.to_text());
              }
              row.push_back(Cell::integer(static_cast<std::int64_t>(seen.size())));
            } else if (g.op == "sum" || g.op == "mean") {
              double s = 0;
              std::size_t n = 0;
              for (auto r = i; r < j; ++r) {
                if (auto v = t.at(order[r], *g.col).as_number()) {
                  s += *v;
                  ++n;
                }
              }
              if (n == 0) {
                row.push_back(Cell::null());
              } else {
                row.push_back(Cell::real(g.op == "sum" ? s : s / static_cast<double>(n)));
              }
            } else {
              Cell best;
              for (auto r = i; r < j; ++r) {
                const auto& cell = t.at(order[r], *g.col);
                if (cell.is_null()) continue;
                const auto o = compare_cells(cell, best);
                if (best.is_null() || (g.op == "min" ? o < 0 : o > 0)) best = cell;
              }
              row.push_back(best);
            }
          }
          rows.push_back(std::move(row));
          i = j;
        }
        // Without group keys an empty table still yields one summary row.
        if (keys.empty() && rows.empty()) {
          std::vector<Cell> row;
          for (const auto& g : aggs) {
            row.push_back(g.op == "count" || g.op == "distinct" ? Cell::integer(0) : Cell::null());
          }
          rows.push_back(std::move(row));
        }
        return {table_payload(LogTable::from_rows(Schema(columns), rows, "aggregate"))};
      },
      validate_aggregate);
}

// ---- sort / head -----------------------------------------------------------

std::vector<json> sort_keys_of(const json& c) {
  if (c.contains("by")) {
    if (!c.at("by").is_array()) bad_config("'by' must be an array");
    return c.at("by").get<std::vector<json>>();
  }
  if (c.contains("column")) return {c};
  return {};
}

NodeKindPtr sort_node() {
  return make_kind(
      "sort", {{"table", PortType::table}}, {{"table", PortType::table}},
      [](const EvalContext&, Inputs in, const json& c) -> std::vector<Payload> {
        const auto& t = *table_at(in, 0);
        std::vector<std::pair<std::size_t, bool>> keys;
        for (const auto& k : sort_keys_of(c)) {
          keys.emplace_back(t.schema().index_of(k.at("column").get<std::string>()),
                            k.value("descending", false));
        }
        std::vector<std::size_t> order(t.row_count());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
          for (const auto& [col, desc] : keys) {
            const auto& x = t.at(a, col);
            const auto& y = t.at(b, col);
            // Nulls stay last in both directions.
            if (x.is_null() != y.is_null()) return y.is_null();
            const auto o = compare_cells(x, y);
            if (o != 0) return desc ? o > 0 : o < 0;
          }
          return false;
        });
        return {table_payload(t.select_rows(order, "sort"))};
      },
      [](const json& c) {
        const auto keys = sort_keys_of(c);
        if (keys.empty()) bad_config("sort needs 'by' or 'column'");
        for (const auto& k : keys) {
          if (!k.is_object()) bad_config("each sort key must be an object");
          string_field(k, "column");
          bool_field(k, "descending", false);
        }
      });
}

NodeKindPtr head() {
  return make_kind(
      "head", {{"table", PortType::table}}, {{"table", PortType::table}},
      [](const EvalContext&, Inputs in, const json& c) -> std::vector<Payload> {
        const auto& t = *table_at(in, 0);
        const auto n = std::min<std::size_t>(t.row_count(),
                                             static_cast<std::size_t>(c.value("n", std::int64_t{10})));
        std::vector<std::size_t> rows(n);
        std::iota(rows.begin(), rows.end(), 0);
        return {table_payload(t.select_rows(rows, "head"))};
      },
      [](const json& c) { int_field(c, "n", 10, 0); });
}

// ---- subset-extract / table-view -------------------------------------------

NodeKindPtr subset_extract() {
  return make_kind("subset-extract", {{"table", PortType::table}, {"selection", PortType::selection_mask}},
                   {{"table", PortType::table}},
                   [](const EvalContext&, Inputs in, const json&) -> std::vector<Payload> {
                     const auto& t = *table_at(in, 0);
                     const auto& mask = *std::get<MaskPtr>(*in[1]);
                     if (mask.selected.size() != t.row_count()) {
                       throw Error(Errc::length_mismatch,
                                   "selection has " + std::to_string(mask.selected.size()) +
                                       " entries for " + std::to_string(t.row_count()) + " rows");
                     }
                     std::vector<std::size_t> keep;
                     for (std::size_t r = 0; r < t.row_count(); ++r) {
                       if (mask.selected[r]) keep.push_back(r);
                     }
                     return {table_payload(t.select_rows(keep, "subset-extract"))};
                   });
}

NodeKindPtr table_view() {
  return make_kind(
      "table-view", {{"table", PortType::table}}, {{"table", PortType::table}},
      [](const EvalContext&, Inputs in, const json&) -> std::vector<Payload> { return {*in[0]}; },
      {}, true);
}

// ---- chart data ------------------------------------------------------------

void validate_chart(const json& c) {
  string_field(c, "column");
  if (c.contains("value")) string_field(c, "value");
  int_field(c, "limit", 0, 0);
}

// label/value rows, largest value first, ties by label.
std::vector<std::pair<std::string, Cell>> chart_rows(const LogTable& t, const json& c) {
  const auto col = t.schema().index_of(c.at("column").get<std::string>());
  std::optional<std::size_t> value_col;
  if (c.contains("value")) value_col = t.schema().index_of(c.at("value").get<std::string>());
  std::map<std::string, double> acc;
  for (std::size_t r = 0; r < t.row_count(); ++r) {
    const auto label = clustervis::cluster_label(t.at(r, col));
    if (value_col) {
      acc[label] += t.at(r, *value_col).as_number().value_or(0.0);
    } else {
      acc[label] += 1.0;
    }
  }
  std::vector<std::pair<std::string, double>> sorted(acc.begin(), acc.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  const auto limit = static_cast<std::size_t>(c.value("limit", std::int64_t{0}));
  if (limit > 0 && sorted.size() > limit) sorted.resize(limit);
  std::vector<std::pair<std::string, Cell>> out;
  for (const auto& [label, v] : sorted) {
    out.emplace_back(label, value_col ? Cell::real(v) : Cell::integer(static_cast<std::int64_t>(v)));
  }
  return out;
}

NodeKindPtr bar_chart() {
  return make_kind(
      "bar-chart-data", {{"table", PortType::table}}, {{"bars", PortType::table}},
      [](const EvalContext&, Inputs in, const json& c) -> std::vector<Payload> {
        std::vector<std::vector<Cell>> rows;
        for (auto& [label, v] : chart_rows(*table_at(in, 0), c)) rows.push_back({Cell::text(label), v});
        return {table_payload(LogTable::from_rows(
            Schema({{"label", AttributeKind::categorical}, {"value", AttributeKind::ordinal_numeric}}),
            rows, "bar-chart-data"))};
      },
      validate_chart, true);
}

NodeKindPtr pie_chart() {
  return make_kind(
      "pie-chart-data", {{"table", PortType::table}}, {{"slices", PortType::table}},
      [](const EvalContext&, Inputs in, const json& c) -> std::vector<Payload> {
        const auto data = chart_rows(*table_at(in, 0), c);
        double total = 0;
        for (const auto& [label, v] : data) total += *v.as_number();
        std::vector<std::vector<Cell>> rows;
        for (const auto& [label, v] : data) {
          rows.push_back({Cell::text(label), v, Cell::real(total > 0 ? *v.as_number() / total : 0.0)});
        }
        return {table_payload(LogTable::from_rows(
            Schema({{"label", AttributeKind::categorical},
                    {"value", AttributeKind::ordinal_numeric},
                    {"share", AttributeKind::ordinal_numeric}}),
            rows, "pie-chart-data"))};
      },
      validate_chart, true);
}

// ---- scatterplot-select / pca-project --------------------------------------

void validate_scatter(const json& c) {
  if (c.contains("rectangles")) {
    const auto& rs = c.at("rectangles");
    if (!rs.is_array()) bad_config("'rectangles' must be an array");
    for (const auto& r : rs) {
      if (!r.is_array() || r.size() != 4 ||
          !std::all_of(r.begin(), r.end(), [](const json& x) { return x.is_number(); })) {
        bad_config("each rectangle must be [x0, y0, x1, y1]");
      }
    }
  }
  if (c.contains("indices")) {
    const auto& is = c.at("indices");
    if (!is.is_array() || !std::all_of(is.begin(), is.end(), [](const json& x) {
          return x.is_number_unsigned() || (x.is_number_integer() && x.get<std::int64_t>() >= 0);
        })) {
      bad_config("'indices' must be an array of row indices");
    }
  }
}

NodeKindPtr scatterplot_select() {
  return make_kind(
      "scatterplot-select",
      {{"table", PortType::table}, {"projection", PortType::projection_2d, true}},
      {{"selection", PortType::selection_mask}, {"table", PortType::table}},
      [](const EvalContext&, Inputs in, const json& c) -> std::vector<Payload> {
        const auto& t = *table_at(in, 0);
        const auto n = t.row_count();
        const bool has_rects = c.contains("rectangles");
        const bool has_indices = c.contains("indices");
        SelectionMask mask;
        mask.selected.assign(n, !has_rects && !has_indices);
        if (has_rects) {
          if (!in[1]) throw Error(Errc::unconnected_input, "rectangle selection needs a projection");
          const auto& p = *std::get<ProjectionPtr>(*in[1]);
          if (static_cast<std::size_t>(p.coords.rows()) != n) {
            throw Error(Errc::length_mismatch, "projection and table differ in length");
          }
          for (const auto& r : c.at("rectangles")) {
            const double x0 = std::min(r[0].get<double>(), r[2].get<double>());
            const double x1 = std::max(r[0].get<double>(), r[2].get<double>());
            const double y0 = std::min(r[1].get<double>(), r[3].get<double>());
            const double y1 = std::max(r[1].get<double>(), r[3].get<double>());
            for (std::size_t i = 0; i < n; ++i) {
              const double x = p.coords(static_cast<Eigen::Index>(i), 0);
              const double y = p.coords(static_cast<Eigen::Index>(i), 1);
              if (x >= x0 && x <= x1 && y >= y0 && y <= y1) mask.selected[i] = true;
            }
          }
        }
        if (has_indices) {
          for (const auto& x : c.at("indices")) {
            const auto i = x.get<std::size_t>();
            if (i >= n) throw Error(Errc::invalid_argument, "selected index " + std::to_string(i) + " out of range");
            mask.selected[i] = true;
          }
        }
        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i < n; ++i) {
          if (mask.selected[i]) keep.push_back(i);
        }
        auto selected = table_payload(t.select_rows(keep, "scatterplot-select"));
        return {std::make_shared<const SelectionMask>(std::move(mask)), selected};
      },
      validate_scatter);
}

void validate_attributes(const json& c) {
  if (c.contains("attributes")) string_list(c, "attributes", false);
}

NodeKindPtr pca_project() {
  return make_kind(
      "pca-project", {{"table", PortType::table}}, {{"projection", PortType::projection_2d}},
      [](const EvalContext&, Inputs in, const json& c) -> std::vector<Payload> {
        const auto& t = *table_at(in, 0);
        const auto attrs = attributes_or_default(c, t);
        return {std::make_shared<const Projection2D>(pca_2d(encode_features(t, attrs)))};
      },
      validate_attributes);
}

// ---- LOF and extraction ----------------------------------------------------

NodeKindPtr lof_detector() {
  return make_kind(
      "lof-detector", {{"table", PortType::table}}, {{"scores", PortType::score_vector}},
      [](const EvalContext&, Inputs in, const json& c) -> std::vector<Payload> {
        const auto& t = *table_at(in, 0);
        if (t.row_count() < 2) {
          throw Error(Errc::insufficient_rows, "LOF needs at least 2 rows");
        }
        const auto attrs = attributes_or_default(c, t);
        const auto m = encode_features(t, attrs);
        const auto k = clip_k(static_cast<std::size_t>(c.value("k", std::int64_t(kDefaultLofK))), m.rows());
        return {std::make_shared<const LofScores>(lof(m, LofParams{k}))};
      },
      [](const json& c) {
        int_field(c, "k", static_cast<std::int64_t>(kDefaultLofK), 1);
        validate_attributes(c);
      });
}

NodeKindPtr threshold_node() {
  return make_kind(
      "threshold-extract", {{"table", PortType::table}, {"scores", PortType::score_vector}},
      {{"table", PortType::table}},
      [](const EvalContext&, Inputs in, const json& c) -> std::vector<Payload> {
        const auto& scores = *std::get<ScoresPtr>(*in[1]);
        return {table_payload(threshold_extract(*table_at(in, 0), scores,
                                                number_field(c, "threshold", kDefaultAnomalyThreshold),
                                                "threshold-extract"))};
      },
      [](const json& c) {
        if (std::isnan(number_field(c, "threshold", kDefaultAnomalyThreshold))) {
          bad_config("'threshold' must not be NaN");
        }
      });
}

NodeKindPtr attach_scores() {
  return make_kind(
      "attach-scores", {{"table", PortType::table}, {"scores", PortType::score_vector}},
      {{"table", PortType::table}},
      [](const EvalContext&, Inputs in, const json& c) -> std::vector<Payload> {
        const auto& t = *table_at(in, 0);
        const auto& s = std::get<ScoresPtr>(*in[1])->scores;
        if (s.size() != t.row_count()) {
          throw Error(Errc::length_mismatch, "scores and table differ in length");
        }
        std::vector<Cell> cells;
        for (double v : s) cells.push_back(Cell::real(v));
        return {table_payload(t.with_column({c.value("column", std::string("lof-score")),
                                             AttributeKind::ordinal_numeric},
                                            std::move(cells), "attach-scores"))};
      },
      [](const json& c) {
        if (c.contains("column")) string_field(c, "column");
      });
}

std::vector<bool> flags_by_row_id(const LogTable& full, const LogTable& flagged) {
  const auto ids = flagged.row_ids();
  const std::unordered_set<std::uint64_t> hit(ids.begin(), ids.end());
  std::vector<bool> flags;
  flags.reserve(full.row_count());
  for (auto id : full.row_ids()) flags.push_back(hit.count(id) > 0);
  return flags;
}

NodeKindPtr anomaly_export() {
  return make_kind(
      "anomaly-export", {{"table", PortType::table}, {"anomalies", PortType::table}},
      {{"table", PortType::table}},
      [](const EvalContext&, Inputs in, const json& c) -> std::vector<Payload> {
        const auto& full = *table_at(in, 0);
        const auto flags = flags_by_row_id(full, *table_at(in, 1));
        return {table_payload(clustervis::export_with_anomaly(
            full, flags, c.value("column", std::string(clustervis::kDefaultAnomalyColumn))))};
      },
      [](const json& c) {
        if (c.contains("column")) string_field(c, "column");
      },
      true);
}

// ---- clustervis-preview ----------------------------------------------------

NodeKindPtr clustervis_preview() {
  return make_kind(
      "clustervis-preview",
      {{"table", PortType::table}, {"anomalies", PortType::table, true}},
      {{"model", PortType::cluster_model}},
      [](const EvalContext&, Inputs in, const json& c) -> std::vector<Payload> {
        TablePtr t = table_at(in, 0);
        const auto cidr_text = string_list(c, "inside-cidrs", false);
        const auto col = c.value("anomaly-column", std::string(clustervis::kDefaultAnomalyColumn));
        std::optional<std::string> anomaly;
        if (in[1]) {
          t = std::make_shared<const LogTable>(
              clustervis::export_with_anomaly(*t, flags_by_row_id(*t, *table_at(in, 1)), col));
          anomaly = col;
        } else if (t->schema().find(col)) {
          anomaly = col;
        }
        auto model = std::make_shared<clustervis::ClusterModel>(t, clustervis::parse_cidrs(cidr_text),
                                                                anomaly);
        for (const auto& attr : string_list(c, "splits", false)) {
          for (auto leaf : model->leaves()) model->split(leaf, attr);
        }
        return {ModelPtr(std::move(model))};
      },
      [](const json& c) {
        clustervis::parse_cidrs(string_list(c, "inside-cidrs", false));
        string_list(c, "splits", false);
        if (c.contains("anomaly-column")) string_field(c, "anomaly-column");
      },
      true);
}

}  // namespace

void register_core_kinds(NodeRegistry& registry) {
  for (auto k : {csv_loader(), row_filter(), column_select(), derive_column(), aggregate(),
                 sort_node(), head(), subset_extract(), table_view(), bar_chart(), pie_chart(),
                 scatterplot_select(), pca_project(), lof_detector(), threshold_node(),
                 attach_scores(), anomaly_export(), clustervis_preview()}) {
    registry.register_kind(std::move(k));
  }
}

}  // namespace firelog::dataflow
