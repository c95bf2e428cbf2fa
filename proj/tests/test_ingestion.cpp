#include <doctest.h>

#include "firelog/ingestion.hpp"
#include "support/synthetic_log.hpp"

using namespace firelog;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::invalid_argument;
}

}  // namespace

TEST_CASE("single row maps directly") {
  const auto r = parse_csv("ts,src,dst,action\n2012-04-05T17:51:26Z,172.23.0.10,10.32.5.51,deny\n",
                           ParseConfig{});
  REQUIRE(r.table->row_count() == 1);
  CHECK(r.rejections.empty());
  const auto& t = *r.table;
  CHECK(*column(t, "action")[0].as_string() == "deny");
  CHECK(column(t, "ts")[0].as_instant()->epoch_ms == 1333648286000);
  CHECK(column(t, "src")[0].as_ip()->str() == "172.23.0.10");
  CHECK(t.schema().role(Role::destination_ip) == 2u);
  for (std::size_t c = 0; c < 4; ++c) CHECK(t.schema().column(c).required);
}

TEST_CASE("empty optional field becomes null") {
  const auto r = parse_csv(
      "ts,src,dst,action,port\n"
      "2012-04-05T17:51:26Z,1.1.1.1,2.2.2.2,deny,\n"
      "2012-04-05T17:51:27Z,1.1.1.1,2.2.2.2,accept,443\n",
      ParseConfig{});
  const auto port = column(*r.table, "port");
  CHECK(port[0].is_null());
  CHECK(*port[1].as_integer() == 443);
  CHECK(r.table->schema().column(4).kind == AttributeKind::ordinal_numeric);
  CHECK_FALSE(r.table->schema().column(4).required);
}

TEST_CASE("50,000-line file parses completely") {
  testing::SyntheticLogOptions opt;
  opt.rows = 50000;
  const auto csv = testing::synthetic_firewall_csv(opt);
  const auto r = parse_csv(csv, ParseConfig{});
  CHECK(r.table->row_count() == 50000);
  CHECK(r.data_lines == 50000);
  CHECK(r.rejections.empty());
}

TEST_CASE("infer_schema votes per column") {
  const std::vector<std::string> header{"port", "proto", "mixed"};
  const std::vector<std::vector<std::string>> rows{
      {"80", "tcp", "80"}, {"443", "udp", "http"}, {"8080", "tcp", ""}};
  const auto s = infer_schema(header, rows, ParseConfig{});
  CHECK(s.column(0).kind == AttributeKind::ordinal_numeric);
  CHECK(s.column(1).kind == AttributeKind::categorical);
  // One numeric vote against one categorical vote: tie goes to categorical.
  CHECK(s.column(2).kind == AttributeKind::categorical);
  CHECK_FALSE(s.role(Role::timestamp));
}

TEST_CASE("infer_schema recognizes ips, timestamps, reals and overrides") {
  const std::vector<std::string> header{"peer", "seen", "ratio", "note"};
  const std::vector<std::vector<std::string>> rows{
      {"10.0.0.1", "2012-04-05 17:51:26", "0.5", "12"},
      {"::1", "05/Apr/2012 17:51:27", "2", "13"},
      {"10.0.0.2", "2012-04-05T17:51:28Z", "1e3", "x"}};
  ParseConfig cfg;
  cfg.kind_overrides["note"] = AttributeKind::free_text;
  const auto s = infer_schema(header, rows, cfg);
  CHECK(s.column(0).kind == AttributeKind::ip_address);
  CHECK(s.column(1).kind == AttributeKind::timestamp);
  CHECK(s.column(2).kind == AttributeKind::ordinal_numeric);
  CHECK(s.column(3).kind == AttributeKind::free_text);
}

TEST_CASE("infer_schema needs a sample") {
  CHECK(code_of([] { infer_schema({"a"}, {}, ParseConfig{}); }) == Errc::empty_sample);
}

TEST_CASE("parser registry routes by signature") {
  ParserRegistry reg;
  reg.register_parser(std::make_shared<PcapStubParser>());
  const std::string pcap("\xD4\xC3\xB2\xA1\x02\x00\x04\x00\x00\x00\x00\x00", 12);
  CHECK(reg.select(pcap)->name() == "pcap-stub");
  CHECK(code_of([&] { reg.parse(pcap, ParseConfig{}); }) == Errc::unsupported_format);
  CHECK(reg.select("ts,src,dst,action\n")->name() == "csv");
  CHECK(reg.names() == std::vector<std::string>{"csv", "pcap-stub"});
}

TEST_CASE("duplicate parser names are rejected") {
  ParserRegistry reg;
  reg.register_parser(std::make_shared<PcapStubParser>());
  CHECK(code_of([&] { reg.register_parser(std::make_shared<PcapStubParser>()); }) ==
        Errc::duplicate_parser_name);
  CHECK(code_of([&] { reg.register_parser(std::make_shared<CsvParser>()); }) ==
        Errc::duplicate_parser_name);
}

TEST_CASE("unknown binary signature falls back to CSV and surfaces its errors") {
  ParserRegistry reg;
  reg.register_parser(std::make_shared<PcapStubParser>());
  const std::string junk("\x89PNG\r\n\x1a\n\x00\x00", 10);
  CHECK(reg.select(junk)->name() == "csv");
  CHECK(code_of([&] { reg.parse(junk, ParseConfig{}); }) == Errc::unmapped_required_column);
  CHECK(code_of([&] { reg.parse("", ParseConfig{}); }) == Errc::missing_header);
}

TEST_CASE("missing mapping names the role") {
  try {
    parse_csv("ts,src,dst,verdict_code\n2012-04-05T17:51:26Z,1.1.1.1,2.2.2.2,deny\n", ParseConfig{});
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unmapped_required_column);
    CHECK(std::string(e.what()).find("action") != std::string::npos);
  }
  ParseConfig cfg;
  cfg.required_mapping[static_cast<std::size_t>(Role::action)] = "verdict_code";
  const auto r =
      parse_csv("ts,src,dst,verdict_code\n2012-04-05T17:51:26Z,1.1.1.1,2.2.2.2,deny\n", cfg);
  CHECK(r.table->schema().role(Role::action) == 3u);
  cfg.required_mapping[static_cast<std::size_t>(Role::action)] = "nope";
  CHECK(code_of([&] {
          parse_csv("ts,src,dst,verdict_code\n2012-04-05T17:51:26Z,1.1.1.1,2.2.2.2,deny\n", cfg);
        }) == Errc::unmapped_required_column);
}

TEST_CASE("malformed required cells are rejected with line numbers") {
  std::string csv = "ts,src,dst,action\n";
  for (int i = 0; i < 30; ++i) {
    csv += "2012-04-05T17:51:" + std::to_string(10 + i) + "Z,1.1.1." + std::to_string(i) +
           ",2.2.2.2,accept\n";
  }
  csv += "garbage,1.1.1.1,2.2.2.2,deny\n";        // line 32
  csv += "2012-04-05T17:52:00Z,1.1.1.999,2.2.2.2,deny\n";  // line 33
  csv += "2012-04-05T17:52:00Z,1.1.1.1,2.2.2.2\n";         // line 34
  const auto r = parse_csv(csv, ParseConfig{});
  CHECK(r.data_lines == 33);
  CHECK(r.table->row_count() == 30);
  REQUIRE(r.rejections.size() == 3);
  CHECK(r.rejections[0].line == 32);
  CHECK(r.rejections[1].line == 33);
  CHECK(r.rejections[2].line == 34);
  CHECK(r.report().find("line 32: malformed timestamp 'garbage'") == 0);
  CHECK(r.table->row_count() == r.data_lines - r.rejections.size());
}

TEST_CASE("more than 10% rejected lines abort the parse") {
  std::string csv = "ts,src,dst,action\n";
  for (int i = 0; i < 8; ++i) csv += "2012-04-05T17:51:26Z,1.1.1.1,2.2.2.2,accept\n";
  csv += "yesterday,1.1.1.1,2.2.2.2,deny\n";
  csv += "yesterday,1.1.1.1,2.2.2.2,deny\n";
  CHECK(code_of([&] { parse_csv(csv, ParseConfig{}); }) == Errc::malformed_required_cell);

  // Wrong delimiter: every line has the wrong field count.
  ParseConfig semi;
  semi.delimiter = ';';
  CHECK(code_of([&] {
          parse_csv("ts;src;dst;action\n2012-04-05T17:51:26Z,1.1.1.1,2.2.2.2,accept\n", semi);
        }) == Errc::too_many_rejections);
}

TEST_CASE("rows keep file order even when timestamps interleave") {
  const auto r = parse_csv(
      "ts,src,dst,action\n"
      "2012-04-05T17:51:30Z,1.1.1.1,2.2.2.2,a\n"
      "2012-04-05T17:51:10Z,1.1.1.2,2.2.2.2,b\n"
      "2012-04-05T17:51:20Z,1.1.1.3,2.2.2.2,c\n",
      ParseConfig{});
  const auto action = column(*r.table, "action");
  CHECK(*action[0].as_string() == "a");
  CHECK(*action[1].as_string() == "b");
  CHECK(*action[2].as_string() == "c");
}

TEST_CASE("quoted fields, CRLF and custom delimiters") {
  const auto r = parse_csv(
      "ts;src;dst;action;msg\r\n"
      "2012-04-05T17:51:26Z;1.1.1.1;2.2.2.2;deny;\"multi\nline; \"\"quoted\"\"\"\r\n",
      [] {
        ParseConfig c;
        c.delimiter = ';';
        return c;
      }());
  REQUIRE(r.table->row_count() == 1);
  CHECK(*column(*r.table, "msg")[0].as_string() == "multi\nline; \"quoted\"");
  const auto out = serialize_csv(*r.table, ';');
  CHECK(out.find("\"multi\nline; \"\"quoted\"\"\"") != std::string::npos);
}

TEST_CASE("timestamp formats are tried in order") {
  const std::vector<std::string> f{"iso8601", "%d/%b/%Y %H:%M:%S", "epoch-ms"};
  CHECK(parse_timestamp("05/Apr/2012 17:51:26", f)->epoch_ms == 1333648286000);
  CHECK(parse_timestamp("2012-04-05T19:51:26+02:00", f)->epoch_ms == 1333648286000);
  CHECK(parse_timestamp("2012-04-05T17:51:26.5Z", f)->epoch_ms == 1333648286500);
  CHECK(parse_timestamp("1333648286000", f)->epoch_ms == 1333648286000);
  CHECK_FALSE(parse_timestamp("2012-02-30T00:00:00Z", f));
  CHECK_FALSE(parse_timestamp("1333648286000", {"iso8601"}));
}

TEST_CASE("row limit and time range restrict the loaded subset") {
  testing::SyntheticLogOptions opt;
  opt.rows = 200;
  const auto csv = testing::synthetic_firewall_csv(opt);
  ParseConfig cfg;
  cfg.row_limit = 50;
  const auto limited = parse_csv(csv, cfg);
  CHECK(limited.table->row_count() == 50);
  CHECK(limited.table->row_ids()[49] == 49);

  ParseConfig window;
  window.time_range = {{1333645200000}, {1333645300000}};
  const auto r = parse_csv(csv, window);
  CHECK(r.table->row_count() > 0);
  CHECK(r.table->row_count() < 200);
  for (const auto& c : column(*r.table, "timestamp")) {
    CHECK(c.as_instant()->epoch_ms >= 1333645200000);
    CHECK(c.as_instant()->epoch_ms < 1333645300000);
  }
}

TEST_CASE("parsing is deterministic") {
  testing::SyntheticLogOptions opt;
  opt.rows = 500;
  opt.seed = 11;
  const auto csv = testing::synthetic_firewall_csv(opt);
  const auto a = parse_csv(csv, ParseConfig{});
  const auto b = parse_csv(csv, ParseConfig{});
  CHECK(serialize_csv(*a.table) == serialize_csv(*b.table));
  CHECK(a.table->content_hash() == b.table->content_hash());
}

TEST_CASE("parse config survives JSON") {
  ParseConfig c;
  c.delimiter = ';';
  c.kind_overrides["port"] = AttributeKind::categorical;
  c.required_mapping[static_cast<std::size_t>(Role::action)] = "verdict";
  c.row_limit = 10;
  const auto back = ParseConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  CHECK(code_of([] { ParseConfig::from_json({{"delimiter", ",,"}}); }) == Errc::invalid_config);
}
