#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "firelog/clustervis.hpp"
#include "firelog/ingestion.hpp"
#include "support/synthetic_log.hpp"

using namespace firelog;
using namespace firelog::clustervis;

namespace {

TablePtr csv(const std::string& text) { return parse_csv(text, ParseConfig{}).table; }

IpAddress ip(const char* s) { return *IpAddress::parse(s); }

std::vector<Cidr> cidrs(std::initializer_list<const char*> list) {
  std::vector<Cidr> out;
  for (const char* c : list) out.push_back(Cidr::parse(c));
  return out;
}

// A=1.0.0.1, B=1.0.0.2, C=1.0.0.3, D=1.0.0.4
const char* kAbcd =
    "ts,src,dst,action,Anomaly\n"
    "2012-04-05T10:00:00Z,1.0.0.1,1.0.0.2,accept,false\n"
    "2012-04-05T10:00:10Z,1.0.0.1,1.0.0.2,accept,false\n"
    "2012-04-05T10:00:20Z,1.0.0.1,1.0.0.3,deny,true\n"
    "2012-04-05T10:00:30Z,1.0.0.4,1.0.0.5,drop,false\n"
    "2012-04-05T10:00:40Z,1.0.0.6,1.0.0.2,deny,true\n";

TablePtr synthetic(std::size_t rows, std::uint64_t seed, std::size_t outliers = 0) {
  testing::SyntheticLogOptions o;
  o.rows = rows;
  o.seed = seed;
  o.outliers = outliers;
  return csv(testing::synthetic_firewall_csv(o));
}

// Every ip ends up in exactly one leaf and leaves hold nothing else.
void check_partition(const ClusterModel& m) {
  std::map<IpAddress, int> seen;
  for (auto id : m.leaves()) {
    for (const auto& member : m.cluster(id).members) ++seen[member];
  }
  for (const auto& [id, c] : m.clusters()) {
    if (!(c.is_leaf() && !c.split_attribute)) CHECK(c.members.empty());
  }
  CHECK(seen.size() == m.summaries().size());
  for (const auto& [member, n] : seen) {
    CHECK(n == 1);
    CHECK(m.summaries().count(member) == 1);
  }
}

}  // namespace

TEST_CASE("cidr membership") {
  const auto c = Cidr::parse("10.0.0.0/8");
  CHECK(c.contains(ip("10.32.1.2")));
  CHECK_FALSE(c.contains(ip("11.0.0.1")));
  CHECK_FALSE(c.contains(ip("::1")));
  CHECK(Cidr::parse("192.168.1.7").contains(ip("192.168.1.7")));
  CHECK_FALSE(Cidr::parse("192.168.1.7").contains(ip("192.168.1.8")));
  CHECK(Cidr::parse("2001:db8::/32").contains(ip("2001:db8:1::5")));
  CHECK(Cidr::parse("0.0.0.0/0").contains(ip("8.8.8.8")));
  CHECK(Cidr::parse("10.1.2.3/12").contains(ip("10.15.0.0")));
  for (const char* bad : {"10.0.0.0/33", "nonsense", "10.0.0.0/", "10.0.0.0/x", "::/129"}) {
    try {
      Cidr::parse(bad);
      FAIL("expected error for " << bad);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::invalid_cidr);
    }
  }
}

TEST_CASE("summaries count rows and roles") {
  const auto t = csv(
      "ts,src,dst,action\n"
      "2012-04-05T10:00:00Z,1.0.0.1,1.0.0.2,accept\n"
      "2012-04-05T10:00:01Z,1.0.0.1,1.0.0.2,accept\n"
      "2012-04-05T10:00:02Z,1.0.0.1,1.0.0.3,deny\n");
  const auto s = derive_summaries(*t, {});
  REQUIRE(s.size() == 3);
  CHECK(s.at(ip("1.0.0.1")).connection_count == 3);
  CHECK(s.at(ip("1.0.0.2")).connection_count == 2);
  CHECK(s.at(ip("1.0.0.3")).connection_count == 1);
  CHECK(s.at(ip("1.0.0.1")).role == IpRole::source_only);
  CHECK(s.at(ip("1.0.0.2")).role == IpRole::destination_only);
  CHECK(*s.at(ip("1.0.0.1")).most_common.at("action").as_string() == "accept");
  CHECK_FALSE(s.at(ip("1.0.0.1")).most_common.count("src"));
  CHECK_FALSE(s.at(ip("1.0.0.1")).most_common.count("ts"));
}

TEST_CASE("most common ties go to the lexicographically smallest value") {
  const auto t = csv(
      "ts,src,dst,action,port\n"
      "2012-04-05T10:00:00Z,1.0.0.1,1.0.0.2,deny,80\n"
      "2012-04-05T10:00:01Z,1.0.0.1,1.0.0.2,accept,443\n"
      "2012-04-05T10:00:02Z,1.0.0.1,1.0.0.2,drop,\n");
  const auto s = derive_summaries(*t, {});
  CHECK(*s.at(ip("1.0.0.1")).most_common.at("action").as_string() == "accept");
  CHECK(*s.at(ip("1.0.0.1")).most_common.at("port").as_integer() == 443);
}

TEST_CASE("anomaly column marks incident ips") {
  const auto t = csv(kAbcd);
  const auto s = derive_summaries(*t, {}, std::string("Anomaly"));
  CHECK(s.at(ip("1.0.0.1")).anomalous);
  CHECK(s.at(ip("1.0.0.3")).anomalous);
  CHECK(s.at(ip("1.0.0.2")).anomalous);
  CHECK(s.at(ip("1.0.0.6")).anomalous);
  CHECK_FALSE(s.at(ip("1.0.0.4")).anomalous);
  CHECK_FALSE(s.at(ip("1.0.0.5")).anomalous);
  CHECK(is_truthy(Cell::text("YES")));
  CHECK(is_truthy(Cell::integer(1)));
  CHECK_FALSE(is_truthy(Cell::text("false")));
  CHECK_FALSE(is_truthy(Cell::null()));
}

TEST_CASE("summaries need both endpoint roles") {
  const LogTable t(Schema({{"a", AttributeKind::categorical}}), {{Cell::text("x")}});
  try {
    derive_summaries(t, {});
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::missing_required_column);
  }
}

TEST_CASE("summaries match a row-scan oracle") {
  const auto t = synthetic(3000, 11);
  const auto inside = cidrs({"10.0.0.0/8"});
  const auto s = derive_summaries(*t, inside);
  const auto src = t->schema().require_role(Role::source_ip);
  const auto dst = t->schema().require_role(Role::destination_ip);
  std::map<IpAddress, std::size_t> count, cross;
  std::map<IpAddress, std::set<int>> roles;
  auto in = [&](const IpAddress& a) { return inside[0].contains(a); };
  for (std::size_t r = 0; r < t->row_count(); ++r) {
    const auto a = *t->at(r, src).as_ip();
    const auto b = *t->at(r, dst).as_ip();
    ++count[a];
    if (!(a == b)) ++count[b];
    roles[a].insert(0);
    roles[b].insert(1);
    if (in(a) != in(b)) {
      ++cross[a];
      ++cross[b];
    }
  }
  REQUIRE(s.size() == count.size());
  std::size_t by_role[3] = {0, 0, 0};
  for (const auto& [addr, sum] : s) {
    CHECK(sum.connection_count == count[addr]);
    CHECK(sum.cross_perimeter_count == cross[addr]);
    CHECK(sum.side == (in(addr) ? Side::inside : Side::outside));
    const auto& r = roles[addr];
    const IpRole expect = r.size() == 2 ? IpRole::both
                          : r.count(0)  ? IpRole::source_only
                                        : IpRole::destination_only;
    CHECK(sum.role == expect);
    ++by_role[static_cast<int>(sum.role)];
  }
  CHECK(by_role[0] + by_role[1] + by_role[2] == s.size());
}

TEST_CASE("split by anomalous then by action") {
  const auto t = csv(
      "ts,src,dst,action,Anomaly\n"
      "2012-04-05T10:00:00Z,1.0.0.1,9.0.0.1,accept,false\n"
      "2012-04-05T10:00:01Z,1.0.0.2,9.0.0.2,accept,true\n"
      "2012-04-05T10:00:02Z,1.0.0.3,9.0.0.3,deny,true\n"
      "2012-04-05T10:00:03Z,1.0.0.4,9.0.0.4,drop,true\n");
  ClusterModel m(t, cidrs({"1.0.0.0/24"}), std::string("Anomaly"));
  check_partition(m);
  m.split(m.root(), "anomalous");
  const auto& root = m.cluster(m.root());
  REQUIRE(root.children.size() == 2);
  const auto& no = m.cluster(root.children[0]);
  const auto& yes = m.cluster(root.children[1]);
  CHECK(no.label == "false");
  CHECK(yes.label == "true");
  CHECK(no.members == std::vector<IpAddress>{ip("1.0.0.1"), ip("9.0.0.1")});
  CHECK(yes.members.size() == 6);
  m.split(yes.id, "action");
  const auto& kids = m.cluster(root.children[1]).children;
  REQUIRE(kids.size() == 3);
  CHECK(m.cluster(kids[0]).label == "accept");
  CHECK(m.cluster(kids[1]).label == "deny");
  CHECK(m.cluster(kids[2]).label == "drop");
  check_partition(m);
}

TEST_CASE("split errors and constant attributes") {
  ClusterModel m(csv(kAbcd), {});
  try {
    m.split(99, "action");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unknown_cluster);
  }
  try {
    m.split(m.root(), "nope");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unknown_attribute);
  }
  m.split(m.root(), "side");
  REQUIRE(m.cluster(m.root()).children.size() == 1);
  CHECK(m.cluster(m.cluster(m.root()).children[0]).members.size() == m.summaries().size());
  try {
    m.split(m.root(), "action");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::non_leaf_split);
  }
}

TEST_CASE("missing values split into a (null) cluster last") {
  const auto t = csv(
      "ts,src,dst,action,rule\n"
      "2012-04-05T10:00:00Z,1.0.0.1,1.0.0.2,accept,r2\n"
      "2012-04-05T10:00:01Z,1.0.0.3,1.0.0.4,accept,\n"
      "2012-04-05T10:00:02Z,1.0.0.5,1.0.0.6,accept,r1\n");
  ClusterModel m(t, {});
  m.split(m.root(), "rule");
  const auto& kids = m.cluster(m.root()).children;
  REQUIRE(kids.size() == 3);
  CHECK(m.cluster(kids[0]).label == "r1");
  CHECK(m.cluster(kids[1]).label == "r2");
  CHECK(m.cluster(kids[2]).label == "(null)");
}

TEST_CASE("manual moves take precedence over later splits") {
  ClusterModel m(csv(kAbcd), {});
  m.split(m.root(), "action");
  const auto watch = m.create_cluster("watchlist");
  const auto x = ip("1.0.0.6");
  const auto deny = *m.leaf_of(x);
  CHECK(m.cluster(deny).label == "deny");
  m.move_ip(x, watch);
  CHECK(m.leaf_of(x) == watch);
  CHECK(m.cluster(watch).members == std::vector<IpAddress>{x});
  m.split(deny, "role");
  for (auto k : m.cluster(deny).children) {
    const auto& mem = m.cluster(k).members;
    CHECK(std::find(mem.begin(), mem.end(), x) == mem.end());
  }
  check_partition(m);
  try {
    m.move_ip(x, deny);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unknown_cluster);
  }
  try {
    m.move_ip(ip("8.8.8.8"), watch);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unknown_ip);
  }
}

TEST_CASE("created clusters start empty and get distinct ids") {
  ClusterModel m(csv(kAbcd), {});
  const auto a = m.create_cluster("watchlist");
  const auto b = m.create_cluster("watchlist");
  CHECK(a != b);
  CHECK(m.cluster(a).members.empty());
  CHECK(m.cluster(a).kind == ClusterKind::manual);
  // The root's members moved into the rest cluster.
  const auto& root = m.cluster(m.root());
  REQUIRE(root.children.size() == 3);
  CHECK(m.cluster(root.children[0]).kind == ClusterKind::rest);
  CHECK(m.cluster(root.children[0]).members.size() == m.summaries().size());
  m.move_ip(ip("1.0.0.1"), a);
  check_partition(m);
}

TEST_CASE("highlights are idempotent and clearable") {
  ClusterModel m(csv(kAbcd), {});
  const std::vector<IpAddress> xy{ip("1.0.0.1"), ip("1.0.0.2")};
  m.set_highlight(xy, std::string("green"));
  const auto once = m.to_json();
  m.set_highlight(xy, std::string("green"));
  CHECK(m.to_json() == once);
  CHECK(m.summaries().at(xy[0]).highlight == "green");
  m.set_highlight(xy, std::nullopt);
  CHECK_FALSE(m.summaries().at(xy[1]).highlight);
  const std::vector<IpAddress> bad{ip("7.7.7.7")};
  CHECK_THROWS_AS(m.set_highlight(bad, std::string("red")), Error);
}

TEST_CASE("time bins") {
  const auto t = csv(
      "ts,src,dst,action\n"
      "1970-01-01T00:00:00Z,1.0.0.1,1.0.0.2,accept\n"
      "1970-01-01T00:01:30Z,1.0.0.1,1.0.0.2,accept\n");
  const auto bins = time_bins(*t, 60000);
  REQUIRE(bins.size() == 2);
  CHECK(bins[0].start_ms == 0);
  CHECK(bins[1].start_ms == 60000);
  CHECK(bins[0].source_only == 1);
  CHECK(bins[0].destination_only == 1);
  CHECK(bins[1].total() == 2);
  CHECK_THROWS_AS(time_bins(*t, 0), Error);
  const LogTable empty(t->schema(), std::vector<std::vector<Cell>>(4));
  try {
    time_bins(empty, 1000);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_table);
  }
  CHECK(default_bin_width(*t) == 2000);
}

TEST_CASE("time bins match per-bin set construction") {
  const auto t = synthetic(2000, 4);
  const std::int64_t width = 7000;
  const auto bins = time_bins(*t, width);
  const auto ts = t->schema().require_role(Role::timestamp);
  const auto src = t->schema().require_role(Role::source_ip);
  const auto dst = t->schema().require_role(Role::destination_ip);
  std::int64_t lo = INT64_MAX, hi = INT64_MIN;
  for (std::size_t r = 0; r < t->row_count(); ++r) {
    lo = std::min(lo, t->at(r, ts).as_instant()->epoch_ms);
    hi = std::max(hi, t->at(r, ts).as_instant()->epoch_ms);
  }
  const auto summaries = derive_summaries(*t, {});
  std::map<std::int64_t, std::set<IpAddress>> sets;
  for (std::size_t r = 0; r < t->row_count(); ++r) {
    const auto b = (t->at(r, ts).as_instant()->epoch_ms - lo) / width;
    sets[b].insert(*t->at(r, src).as_ip());
    sets[b].insert(*t->at(r, dst).as_ip());
  }
  REQUIRE(bins.size() == static_cast<std::size_t>((hi - lo) / width + 1));
  for (std::size_t b = 0; b < bins.size(); ++b) {
    std::size_t per_role[3] = {0, 0, 0};
    for (const auto& a : sets[static_cast<std::int64_t>(b)]) {
      ++per_role[static_cast<int>(summaries.at(a).role)];
    }
    CHECK(bins[b].source_only == per_role[0]);
    CHECK(bins[b].destination_only == per_role[1]);
    CHECK(bins[b].both == per_role[2]);
  }
}

TEST_CASE("time filter") {
  const auto t = csv(
      "ts,src,dst,action\n"
      "1970-01-01T00:00:00Z,1.0.0.1,1.0.0.2,accept\n"
      "1970-01-01T00:01:30Z,1.0.0.3,1.0.0.4,deny\n");
  ClusterModel m(t, {}, std::nullopt, 60000);
  const auto unfiltered = m.summaries();
  m.split(m.root(), "action");
  const auto w = m.create_cluster("w");
  CHECK(m.cluster(m.root()).children.size() == 3);
  m.move_ip(ip("1.0.0.3"), w);
  m.apply_time_filter(0, 60000);
  CHECK(m.summaries().size() == 2);
  CHECK(m.summaries().count(ip("1.0.0.1")));
  CHECK(m.manual_moves().empty());
  check_partition(m);
  m.apply_time_filter(0, 120000);
  CHECK(m.summaries() == unfiltered);
  check_partition(m);
  m.apply_time_filter(500000, 600000);
  CHECK(m.summaries().empty());
  for (auto id : m.leaves()) CHECK(m.cluster(id).members.empty());
  try {
    m.apply_time_filter(10, 5);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_range);
  }
  try {
    m.situation_layout();
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_model);
  }
  m.clear_time_filter();
  CHECK(m.summaries() == unfiltered);
}

TEST_CASE("filter over the full range equals the unfiltered model") {
  ClusterModel a(synthetic(500, 9), cidrs({"10.0.0.0/8"}));
  ClusterModel b = a;
  b.split(b.root(), "action");
  a.split(a.root(), "action");
  b.apply_time_filter(INT64_MIN, INT64_MAX);
  CHECK(a.summaries() == b.summaries());
  CHECK(a.clusters() == b.clusters());
}

TEST_CASE("situation affinities") {
  // Inside 10.0.0.1 crosses 5 times, 10.0.0.2 once.
  std::string text = "ts,src,dst,action\n";
  for (int i = 0; i < 5; ++i) text += "2012-04-05T10:00:00Z,10.0.0.1,8.8.8.8,accept\n";
  text += "2012-04-05T10:00:00Z,10.0.0.2,8.8.4.4,accept\n";
  text += "2012-04-05T10:00:00Z,10.0.0.2,10.0.0.3,accept\n";
  ClusterModel m(csv(text), cidrs({"10.0.0.0/8"}));
  const auto s = m.situation_layout();
  CHECK(s.at(ip("10.0.0.1")).affinity == doctest::Approx(1.0));
  CHECK(s.at(ip("10.0.0.2")).affinity == doctest::Approx(0.2));
  CHECK(s.at(ip("10.0.0.3")).affinity == 0.0);
  CHECK(s.at(ip("8.8.8.8")).affinity == 1.0);
  CHECK(s.at(ip("8.8.4.4")).affinity == doctest::Approx(0.2));
  CHECK(s.at(ip("8.8.8.8")).side == Side::outside);

  ClusterModel outside_only(csv("ts,src,dst,action\n2012-04-05T10:00:00Z,8.8.8.8,1.1.1.1,deny\n"),
                            cidrs({"10.0.0.0/8"}));
  for (const auto& [a, e] : outside_only.situation_layout()) CHECK(e.affinity == 0.0);

  ClusterModel pair(csv("ts,src,dst,action\n2012-04-05T10:00:00Z,10.1.1.1,8.8.8.8,deny\n"),
                    cidrs({"10.0.0.0/8"}));
  for (const auto& [a, e] : pair.situation_layout()) CHECK(e.affinity == 1.0);
}

TEST_CASE("connections aggregate per counterpart and direction") {
  const auto t = csv(
      "ts,src,dst,action\n"
      "2012-04-05T10:00:00Z,1.0.0.1,1.0.0.2,accept\n"
      "2012-04-05T10:00:01Z,1.0.0.1,1.0.0.2,accept\n"
      "2012-04-05T10:00:02Z,1.0.0.2,1.0.0.1,deny\n"
      "2012-04-05T10:00:03Z,1.0.0.5,1.0.0.3,deny\n");
  const auto a = connections_of(*t, ip("1.0.0.1"));
  REQUIRE(a.size() == 2);
  CHECK(a[0] == Connection{ip("1.0.0.2"), Direction::out, 2});
  CHECK(a[1] == Connection{ip("1.0.0.2"), Direction::in, 1});
  const auto c = connections_of(*t, ip("1.0.0.3"));
  REQUIRE(c.size() == 1);
  CHECK(c[0].direction == Direction::in);
  CHECK_THROWS_AS(connections_of(*t, ip("9.9.9.9")), Error);
}

TEST_CASE("connections match a pair-scan oracle") {
  const auto t = synthetic(1500, 21);
  const auto src = t->schema().require_role(Role::source_ip);
  const auto dst = t->schema().require_role(Role::destination_ip);
  const auto s = derive_summaries(*t, {});
  int checked = 0;
  for (const auto& [who, sum] : s) {
    if (++checked > 25) break;
    std::map<std::pair<IpAddress, int>, std::size_t> expect;
    for (std::size_t r = 0; r < t->row_count(); ++r) {
      const auto a = *t->at(r, src).as_ip();
      const auto b = *t->at(r, dst).as_ip();
      if (a == who) ++expect[{b, 0}];
      if (b == who) ++expect[{a, 1}];
    }
    const auto got = connections_of(*t, who);
    REQUIRE(got.size() == expect.size());
    std::size_t i = 0;
    for (const auto& [key, n] : expect) {
      CHECK(got[i].counterpart == key.first);
      CHECK(static_cast<int>(got[i].direction) == key.second);
      CHECK(got[i].count == n);
      ++i;
    }
  }
}

TEST_CASE("anomaly export round trips and drives summaries") {
  const auto t = csv(
      "ts,src,dst,action\n"
      "2012-04-05T10:00:00Z,1.0.0.1,1.0.0.2,accept\n"
      "2012-04-05T10:00:01Z,1.0.0.3,1.0.0.4,deny\n"
      "2012-04-05T10:00:02Z,1.0.0.5,1.0.0.6,accept\n");
  const auto out = export_with_anomaly(*t, {false, true, false});
  const auto text = serialize_csv(out);
  CHECK(text.find("ts,src,dst,action,Anomaly\n") == 0);
  const auto anomaly = column(out, "Anomaly");
  CHECK(*anomaly[0].as_string() == "false");
  CHECK(*anomaly[1].as_string() == "true");
  const auto back = parse_csv(text, ParseConfig{}).table;
  CHECK(*back == out);
  const auto s = derive_summaries(*back, {}, std::string("Anomaly"));
  for (const auto& [a, sum] : s) {
    CHECK(sum.anomalous == (a == ip("1.0.0.3") || a == ip("1.0.0.4")));
  }
  try {
    export_with_anomaly(out, {true, true, true});
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::column_collision);
  }
  try {
    export_with_anomaly(*t, {true});
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::length_mismatch);
  }
}

TEST_CASE("random operation sequences keep the partition invariant") {
  const auto t = synthetic(600, 33, 3);
  std::mt19937_64 rng(123);
  for (int seq = 0; seq < 40; ++seq) {
    ClusterModel m(t, cidrs({"10.0.0.0/8"}));
    const auto attrs = m.split_attributes();
    for (int step = 0; step < 15; ++step) {
      const int op = std::uniform_int_distribution<int>(0, 4)(rng);
      const auto leaves = m.leaves();
      const auto leaf = leaves[std::uniform_int_distribution<std::size_t>(0, leaves.size() - 1)(rng)];
      try {
        if (op == 0) {
          m.split(leaf, attrs[std::uniform_int_distribution<std::size_t>(0, attrs.size() - 1)(rng)]);
        } else if (op == 1) {
          m.create_cluster("c" + std::to_string(step));
        } else if (op == 2 && !m.summaries().empty()) {
          auto it = m.summaries().begin();
          std::advance(it, std::uniform_int_distribution<std::size_t>(0, m.summaries().size() - 1)(rng));
          m.move_ip(it->first, leaf);
        } else if (op == 3 && !m.summaries().empty()) {
          const std::vector<IpAddress> one{m.summaries().begin()->first};
          m.set_highlight(one, std::string("green"));
        } else if (op == 4) {
          const auto& bins = m.time_bins();
          const auto a = std::uniform_int_distribution<std::size_t>(0, bins.size() - 1)(rng);
          const auto b = std::uniform_int_distribution<std::size_t>(a, bins.size() - 1)(rng);
          m.apply_time_filter(bins[a].start_ms, bins[b].start_ms + m.bin_width_ms());
        }
      } catch (const Error& e) {
        FAIL("unexpected error: " << e.what());
      }
      check_partition(m);
    }
  }
}

TEST_CASE("model JSON and text rendering") {
  ClusterModel m(csv(kAbcd), cidrs({"1.0.0.0/30"}), std::string("Anomaly"));
  m.split(m.root(), "anomalous");
  const auto j = m.to_json();
  CHECK(j["clusters"].size() == 3);
  CHECK(j["summaries"].size() == 6);
  CHECK(j["clusters"][0]["split-attribute"] == "anomalous");
  CHECK(j["time-bins"]["bins"].size() >= 1);
  const auto tree = render_tree(m);
  CHECK(tree.find("all #0 (6) split by anomalous\n") == 0);
  CHECK(tree.find("  false #") != std::string::npos);
  const auto sit = render_situation(m);
  CHECK(sit.find("1.0.0.1 inside ") == 0);
}
