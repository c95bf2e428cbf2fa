#include "firelog/clustervis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace firelog::clustervis {

namespace {

constexpr const char* kAnomalous = "anomalous";
constexpr const char* kRole = "role";
constexpr const char* kSide = "side";

void guard_working_set(const LogTable& table) {
  if (table.row_count() > kWorkingSetLimit) {
    throw Error(Errc::working_set_exceeded,
                "table has " + std::to_string(table.row_count()) + " rows; the limit is " +
                    std::to_string(kWorkingSetLimit));
  }
}

const IpAddress* ip_at(const LogTable& t, std::size_t row, std::size_t col) {
  return t.at(row, col).as_ip();
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

IpRole role_of(bool as_src, bool as_dst) {
  if (as_src && as_dst) return IpRole::both;
  return as_src ? IpRole::source_only : IpRole::destination_only;
}

struct Appearance {
  bool as_src = false;
  bool as_dst = false;
};

std::unordered_map<IpAddress, Appearance, IpAddressHash> appearances(const LogTable& t,
                                                                     std::size_t src,
                                                                     std::size_t dst) {
  std::unordered_map<IpAddress, Appearance, IpAddressHash> out;
  for (std::size_t r = 0; r < t.row_count(); ++r) {
    if (const auto* s = ip_at(t, r, src)) out[*s].as_src = true;
    if (const auto* d = ip_at(t, r, dst)) out[*d].as_dst = true;
  }
  return out;
}

}  // namespace

Cidr Cidr::parse(std::string_view text) {
  const auto slash = text.find('/');
  const auto addr = IpAddress::parse(text.substr(0, slash));
  if (!addr) throw Error(Errc::invalid_cidr, "invalid CIDR '" + std::string(text) + "'");
  const unsigned max_bits = addr->is_v6() ? 128 : 32;
  unsigned prefix = max_bits;
  if (slash != std::string_view::npos) {
    const auto bits = text.substr(slash + 1);
    const auto [p, ec] = std::from_chars(bits.data(), bits.data() + bits.size(), prefix);
    if (ec != std::errc() || p != bits.data() + bits.size() || bits.empty() || prefix > max_bits) {
      throw Error(Errc::invalid_cidr, "invalid CIDR '" + std::string(text) + "'");
    }
  }
  Cidr c;
  c.network_ = *addr;
  c.prefix_ = prefix;
  return c;
}

bool Cidr::contains(const IpAddress& ip) const noexcept {
  if (ip.is_v6() != network_.is_v6()) return false;
  const auto& a = ip.bytes();
  const auto& b = network_.bytes();
  unsigned bits = prefix_;
  for (std::size_t i = 0; bits > 0; ++i) {
    const unsigned take = std::min(bits, 8u);
    const auto mask = static_cast<std::uint8_t>(0xFFu << (8 - take));
    if ((a[i] & mask) != (b[i] & mask)) return false;
    bits -= take;
  }
  return true;
}

std::string Cidr::str() const { return network_.str() + "/" + std::to_string(prefix_); }

std::vector<Cidr> parse_cidrs(std::span<const std::string> texts) {
  std::vector<Cidr> out;
  for (const auto& t : texts) out.push_back(Cidr::parse(t));
  return out;
}

std::string_view to_string(IpRole r) noexcept {
  switch (r) {
    case IpRole::source_only: return "source-only";
    case IpRole::destination_only: return "destination-only";
    case IpRole::both: return "both";
  }
  return "both";
}

std::string_view to_string(Side s) noexcept { return s == Side::inside ? "inside" : "outside"; }

std::string_view to_string(Direction d) noexcept { return d == Direction::out ? "out" : "in"; }

std::string_view to_string(ClusterKind k) noexcept {
  switch (k) {
    case ClusterKind::root: return "root";
    case ClusterKind::value: return "value";
    case ClusterKind::manual: return "manual";
    case ClusterKind::rest: return "rest";
  }
  return "root";
}

bool is_truthy(const Cell& c) {
  if (c.is_null()) return false;
  const auto t = lower(c.to_text());
  return t == "true" || t == "1" || t == "yes";
}

std::vector<std::string> summarized_attributes(const Schema& schema) {
  const auto src = schema.role(Role::source_ip);
  const auto dst = schema.role(Role::destination_ip);
  std::vector<std::string> out;
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (c == src || c == dst) continue;
    if (schema.column(c).kind == AttributeKind::timestamp) continue;
    out.push_back(schema.column(c).name);
  }
  return out;
}

SummaryMap derive_summaries(const LogTable& table, std::span<const Cidr> inside,
                            const std::optional<std::string>& anomaly_column) {
  guard_working_set(table);
  const auto& schema = table.schema();
  const std::size_t src = schema.require_role(Role::source_ip);
  const std::size_t dst = schema.require_role(Role::destination_ip);
  std::optional<std::size_t> flag_col;
  if (anomaly_column) flag_col = schema.index_of(*anomaly_column);

  const auto attrs = summarized_attributes(schema);
  std::vector<std::size_t> attr_cols;
  for (const auto& a : attrs) attr_cols.push_back(schema.index_of(a));

  // Dictionary-encode each attribute column; code 0 is null.
  std::vector<std::vector<std::uint32_t>> codes(attrs.size());
  std::vector<std::vector<Cell>> reps(attrs.size());
  std::vector<std::vector<std::string>> rep_text(attrs.size());
  for (std::size_t a = 0; a < attrs.size(); ++a) {
    std::unordered_map<std::string, std::uint32_t> dict;
    reps[a].push_back(Cell::null());
    rep_text[a].emplace_back();
    codes[a].reserve(table.row_count());
    for (const auto& cell : table.column(attr_cols[a])) {
      if (cell.is_null()) {
        codes[a].push_back(0);
        continue;
      }
      auto text = cell.to_text();
      auto [it, inserted] = dict.try_emplace(text, static_cast<std::uint32_t>(reps[a].size()));
      if (inserted) {
        reps[a].push_back(cell);
        rep_text[a].push_back(std::move(text));
      }
      codes[a].push_back(it->second);
    }
  }

  struct Acc {
    std::size_t count = 0;
    bool as_src = false;
    bool as_dst = false;
    bool anomalous = false;
    std::size_t cross = 0;
    Side side = Side::outside;
    std::vector<std::unordered_map<std::uint32_t, std::size_t>> values;
  };
  std::unordered_map<IpAddress, Acc, IpAddressHash> acc;
  auto touch = [&](const IpAddress& ip) -> Acc& {
    auto [it, inserted] = acc.try_emplace(ip);
    if (inserted) {
      it->second.values.resize(attrs.size());
      const bool in = std::any_of(inside.begin(), inside.end(),
                                  [&](const Cidr& c) { return c.contains(ip); });
      it->second.side = in ? Side::inside : Side::outside;
    }
    return it->second;
  };

  for (std::size_t r = 0; r < table.row_count(); ++r) {
    const IpAddress* s = ip_at(table, r, src);
    const IpAddress* d = ip_at(table, r, dst);
    const bool flagged = flag_col && is_truthy(table.at(r, *flag_col));
    Acc* sa = s ? &touch(*s) : nullptr;
    Acc* da = d ? &touch(*d) : nullptr;
    if (sa) sa->as_src = true;
    if (da) da->as_dst = true;
    if (sa && da && sa != da && sa->side != da->side) {
      ++sa->cross;
      ++da->cross;
    }
    for (Acc* x : {sa, da == sa ? nullptr : da}) {
      if (!x) continue;
      ++x->count;
      x->anomalous = x->anomalous || flagged;
      for (std::size_t a = 0; a < attrs.size(); ++a) {
        if (const auto code = codes[a][r]; code != 0) ++x->values[a][code];
      }
    }
  }

  SummaryMap out;
  for (auto& [ip, a] : acc) {
    IpSummary s{ip, 0, IpRole::both, {}, false, std::nullopt, 0, Side::outside};
    s.connection_count = a.count;
    s.role = role_of(a.as_src, a.as_dst);
    s.anomalous = a.anomalous;
    s.cross_perimeter_count = a.cross;
    s.side = a.side;
    for (std::size_t i = 0; i < attrs.size(); ++i) {
      std::uint32_t best = 0;
      std::size_t best_count = 0;
      for (const auto& [code, n] : a.values[i]) {
        if (n > best_count || (n == best_count && rep_text[i][code] < rep_text[i][best])) {
          best = code;
          best_count = n;
        }
      }
      s.most_common.emplace(attrs[i], reps[i][best]);
    }
    out.emplace(ip, std::move(s));
  }
  return out;
}

std::vector<TimeBin> time_bins(const LogTable& table, std::int64_t width_ms) {
  if (width_ms <= 0) throw Error(Errc::invalid_argument, "bin width must be positive");
  if (table.row_count() == 0) throw Error(Errc::empty_table, "no rows to bin");
  guard_working_set(table);
  const auto& schema = table.schema();
  const std::size_t ts = schema.require_role(Role::timestamp);
  const std::size_t src = schema.require_role(Role::source_ip);
  const std::size_t dst = schema.require_role(Role::destination_ip);

  std::int64_t lo = 0, hi = 0;
  bool any = false;
  for (const auto& c : table.column(ts)) {
    if (const auto* t = c.as_instant()) {
      lo = any ? std::min(lo, t->epoch_ms) : t->epoch_ms;
      hi = any ? std::max(hi, t->epoch_ms) : t->epoch_ms;
      any = true;
    }
  }
  if (!any) throw Error(Errc::empty_table, "no timestamps to bin");

  const auto seen = appearances(table, src, dst);
  const auto n = static_cast<std::size_t>((hi - lo) / width_ms) + 1;
  std::vector<std::unordered_set<IpAddress, IpAddressHash>> active(n);
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    const auto* t = table.at(r, ts).as_instant();
    if (!t) continue;
    auto& bin = active[static_cast<std::size_t>((t->epoch_ms - lo) / width_ms)];
    if (const auto* s = ip_at(table, r, src)) bin.insert(*s);
    if (const auto* d = ip_at(table, r, dst)) bin.insert(*d);
  }
  std::vector<TimeBin> out(n);
  for (std::size_t b = 0; b < n; ++b) {
    out[b].start_ms = lo + static_cast<std::int64_t>(b) * width_ms;
    for (const auto& ip : active[b]) {
      const auto& a = seen.at(ip);
      switch (role_of(a.as_src, a.as_dst)) {
        case IpRole::source_only: ++out[b].source_only; break;
        case IpRole::destination_only: ++out[b].destination_only; break;
        case IpRole::both: ++out[b].both; break;
      }
    }
  }
  return out;
}

std::int64_t default_bin_width(const LogTable& table) {
  const auto ts = table.schema().role(Role::timestamp);
  if (!ts) return 1000;
  std::optional<std::int64_t> lo, hi;
  for (const auto& c : table.column(*ts)) {
    if (const auto* t = c.as_instant()) {
      lo = lo ? std::min(*lo, t->epoch_ms) : t->epoch_ms;
      hi = hi ? std::max(*hi, t->epoch_ms) : t->epoch_ms;
    }
  }
  if (!lo) return 1000;
  const std::int64_t span = *hi - *lo;
  const std::int64_t per_bin_ms = (span + 49) / 50;
  const std::int64_t seconds = (per_bin_ms + 999) / 1000;
  return std::max<std::int64_t>(1, seconds) * 1000;
}

std::vector<Connection> connections_of(const LogTable& table, const IpAddress& ip) {
  const auto& schema = table.schema();
  const std::size_t src = schema.require_role(Role::source_ip);
  const std::size_t dst = schema.require_role(Role::destination_ip);
  std::map<std::pair<IpAddress, Direction>, std::size_t> counts;
  bool present = false;
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    const auto* s = ip_at(table, r, src);
    const auto* d = ip_at(table, r, dst);
    const bool is_src = s && *s == ip;
    const bool is_dst = d && *d == ip;
    present = present || is_src || is_dst;
    if (is_src && d) ++counts[{*d, Direction::out}];
    if (is_dst && s) ++counts[{*s, Direction::in}];
  }
  if (!present) throw Error(Errc::unknown_ip, "ip " + ip.str() + " does not occur in the log");
  std::vector<Connection> out;
  for (const auto& [key, n] : counts) out.push_back({key.first, key.second, n});
  return out;
}

LogTable export_with_anomaly(const LogTable& table, const std::vector<bool>& flags,
                             const std::string& column_name) {
  if (flags.size() != table.row_count()) {
    throw Error(Errc::length_mismatch, std::to_string(flags.size()) + " flags for " +
                                           std::to_string(table.row_count()) + " rows");
  }
  std::vector<Cell> cells;
  cells.reserve(flags.size());
  for (bool f : flags) cells.push_back(Cell::text(f ? "true" : "false"));
  return table.with_column({column_name, AttributeKind::categorical}, std::move(cells),
                           "anomaly-export");
}

std::string cluster_label(const Cell& value) {
  return value.is_null() ? std::string("(null)") : value.to_text();
}

ClusterModel::ClusterModel(TablePtr table, std::vector<Cidr> inside,
                           std::optional<std::string> anomaly_column,
                           std::optional<std::int64_t> bin_width_ms)
    : table_(std::move(table)), inside_(std::move(inside)), anomaly_column_(std::move(anomaly_column)) {
  if (!table_) throw Error(Errc::invalid_argument, "cluster model needs a table");
  guard_working_set(*table_);
  table_->schema().require_role(Role::source_ip);
  table_->schema().require_role(Role::destination_ip);
  if (anomaly_column_) table_->schema().index_of(*anomaly_column_);
  bin_width_ = bin_width_ms ? *bin_width_ms : default_bin_width(*table_);
  if (bin_width_ <= 0) throw Error(Errc::invalid_argument, "bin width must be positive");
  if (table_->row_count() > 0 && table_->schema().role(Role::timestamp)) {
    bins_ = clustervis::time_bins(*table_, bin_width_);
  }
  Cluster root;
  root.id = 0;
  root.label = "all";
  root.kind = ClusterKind::root;
  clusters_.emplace(0, std::move(root));
  recompute_summaries();
  rederive();
}

const Cluster& ClusterModel::cluster(ClusterId id) const {
  const auto it = clusters_.find(id);
  if (it == clusters_.end()) throw Error(Errc::unknown_cluster, "no cluster " + std::to_string(id));
  return it->second;
}

std::vector<ClusterId> ClusterModel::leaves() const {
  std::vector<ClusterId> out;
  std::vector<ClusterId> stack{0};
  while (!stack.empty()) {
    const auto id = stack.back();
    stack.pop_back();
    const auto& c = clusters_.at(id);
    if (c.is_leaf() && !c.split_attribute) out.push_back(id);
    for (auto it = c.children.rbegin(); it != c.children.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

std::optional<ClusterId> ClusterModel::leaf_of(const IpAddress& ip) const {
  for (const auto& [id, c] : clusters_) {
    if (std::binary_search(c.members.begin(), c.members.end(), ip)) return id;
  }
  return std::nullopt;
}

std::vector<std::string> ClusterModel::split_attributes() const {
  auto out = summarized_attributes(table_->schema());
  for (const char* d : {kAnomalous, kRole, kSide}) {
    if (std::find(out.begin(), out.end(), d) == out.end()) out.emplace_back(d);
  }
  return out;
}

Cell ClusterModel::attribute_value(const IpSummary& s, const std::string& attribute) const {
  if (attribute == kAnomalous) return Cell::text(s.anomalous ? "true" : "false");
  if (attribute == kRole) return Cell::text(std::string(to_string(s.role)));
  if (attribute == kSide) return Cell::text(std::string(to_string(s.side)));
  const auto it = s.most_common.find(attribute);
  return it == s.most_common.end() ? Cell::null() : it->second;
}

void ClusterModel::recompute_summaries() {
  if (filter_) {
    const std::size_t ts = table_->schema().require_role(Role::timestamp);
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < table_->row_count(); ++r) {
      const auto* t = table_->at(r, ts).as_instant();
      if (t && t->epoch_ms >= filter_->first && t->epoch_ms < filter_->second) keep.push_back(r);
    }
    summaries_ = derive_summaries(table_->select_rows(keep, "time-filter"), inside_, anomaly_column_);
  } else {
    summaries_ = derive_summaries(*table_, inside_, anomaly_column_);
  }
  for (auto& [ip, s] : summaries_) {
    if (const auto it = highlights_.find(ip); it != highlights_.end()) s.highlight = it->second;
  }
}

ClusterId ClusterModel::add_child(ClusterId parent, Cluster c) {
  c.id = next_id_++;
  c.parent = parent;
  const auto id = c.id;
  const bool is_value = c.kind == ClusterKind::value;
  const Cell value = c.value;
  clusters_.emplace(id, std::move(c));
  auto& kids = clusters_.at(parent).children;
  auto pos = kids.end();
  if (is_value) {
    pos = std::find_if(kids.begin(), kids.end(), [&](ClusterId k) {
      const auto& other = clusters_.at(k);
      return other.kind != ClusterKind::value || compare_cells(other.value, value) > 0;
    });
  }
  kids.insert(pos, id);
  return id;
}

ClusterId ClusterModel::descend(ClusterId from, const IpSummary& s) {
  ClusterId id = from;
  for (;;) {
    const auto& c = clusters_.at(id);
    if (c.split_attribute) {
      const Cell v = attribute_value(s, *c.split_attribute);
      const auto it = std::find_if(c.children.begin(), c.children.end(), [&](ClusterId k) {
        const auto& child = clusters_.at(k);
        return child.kind == ClusterKind::value && child.value == v;
      });
      if (it != c.children.end()) {
        id = *it;
      } else {
        Cluster child;
        child.kind = ClusterKind::value;
        child.value = v;
        child.label = cluster_label(v);
        id = add_child(id, std::move(child));
      }
    } else if (c.children.empty()) {
      return id;
    } else {
      const auto it = std::find_if(c.children.begin(), c.children.end(), [&](ClusterId k) {
        return clusters_.at(k).kind == ClusterKind::rest;
      });
      if (it == c.children.end()) {
        throw Error(Errc::invalid_argument, "cluster " + std::to_string(id) + " has no rest child");
      }
      id = *it;
    }
  }
}

void ClusterModel::rederive() {
  for (auto& [id, c] : clusters_) c.members.clear();
  for (const auto& [ip, s] : summaries_) {
    const auto mv = moves_.find(ip);
    const ClusterId leaf = descend(mv == moves_.end() ? 0 : mv->second, s);
    clusters_.at(leaf).members.push_back(ip);
  }
}

void ClusterModel::split(ClusterId id, const std::string& attribute) {
  const auto& c = cluster(id);
  if (!c.is_leaf() || c.split_attribute) {
    throw Error(Errc::non_leaf_split, "cluster " + std::to_string(id) + " is not a leaf");
  }
  const auto attrs = split_attributes();
  if (std::find(attrs.begin(), attrs.end(), attribute) == attrs.end()) {
    throw Error(Errc::unknown_attribute, "unknown attribute '" + attribute + "'");
  }
  clusters_.at(id).split_attribute = attribute;
  rederive();
}

void ClusterModel::move_ip(const IpAddress& ip, ClusterId target) {
  if (!summaries_.count(ip)) throw Error(Errc::unknown_ip, "unknown ip " + ip.str());
  const auto& c = cluster(target);
  if (!c.is_leaf() || c.split_attribute) {
    throw Error(Errc::unknown_cluster, "cluster " + std::to_string(target) + " is not a leaf");
  }
  moves_[ip] = target;
  rederive();
}

ClusterId ClusterModel::create_cluster(const std::string& label) {
  if (label.empty()) throw Error(Errc::invalid_argument, "cluster label must not be empty");
  const auto& root = clusters_.at(0);
  if (root.children.empty() && !root.split_attribute) {
    Cluster rest;
    rest.kind = ClusterKind::rest;
    rest.label = "unclustered";
    add_child(0, std::move(rest));
  }
  Cluster c;
  c.kind = ClusterKind::manual;
  c.label = label;
  const auto id = add_child(0, std::move(c));
  rederive();
  return id;
}

void ClusterModel::set_highlight(std::span<const IpAddress> ips,
                                 const std::optional<std::string>& tag) {
  for (const auto& ip : ips) {
    if (!summaries_.count(ip)) throw Error(Errc::unknown_ip, "unknown ip " + ip.str());
  }
  for (const auto& ip : ips) {
    if (tag) {
      highlights_[ip] = *tag;
    } else {
      highlights_.erase(ip);
    }
    summaries_.at(ip).highlight = tag;
  }
}

void ClusterModel::apply_time_filter(std::int64_t start_ms, std::int64_t end_ms) {
  if (start_ms > end_ms) throw Error(Errc::invalid_range, "time filter start is after its end");
  table_->schema().require_role(Role::timestamp);
  filter_ = std::make_pair(start_ms, end_ms);
  recompute_summaries();
  std::erase_if(moves_, [&](const auto& kv) { return !summaries_.count(kv.first); });
  rederive();
}

void ClusterModel::clear_time_filter() {
  filter_.reset();
  recompute_summaries();
  rederive();
}

SituationLayout ClusterModel::situation_layout() const {
  if (summaries_.empty()) throw Error(Errc::empty_model, "model has no ip addresses");
  std::size_t max_in = 0, max_out = 0;
  for (const auto& [ip, s] : summaries_) {
    auto& m = s.side == Side::inside ? max_in : max_out;
    m = std::max(m, s.cross_perimeter_count);
  }
  SituationLayout out;
  for (const auto& [ip, s] : summaries_) {
    const auto m = s.side == Side::inside ? max_in : max_out;
    const double a = m == 0 ? 0.0 : static_cast<double>(s.cross_perimeter_count) / double(m);
    out.emplace(ip, SituationEntry{s.side, a});
  }
  return out;
}

nlohmann::json ClusterModel::to_json() const {
  using nlohmann::json;
  json clusters = json::array();
  for (const auto& [id, c] : clusters_) {
    json members = json::array();
    for (const auto& ip : c.members) members.push_back(ip.str());
    clusters.push_back({{"id", id},
                        {"label", c.label},
                        {"kind", to_string(c.kind)},
                        {"parent", c.parent ? json(*c.parent) : json(nullptr)},
                        {"children", c.children},
                        {"split-attribute", c.split_attribute ? json(*c.split_attribute) : json(nullptr)},
                        {"value", c.kind == ClusterKind::value && !c.value.is_null()
                                      ? json(c.value.to_text())
                                      : json(nullptr)},
                        {"leaf", c.is_leaf() && !c.split_attribute},
                        {"members", std::move(members)}});
  }
  json summaries = json::array();
  for (const auto& [ip, s] : summaries_) {
    json mc = json::object();
    for (const auto& [a, v] : s.most_common) mc[a] = v.is_null() ? json(nullptr) : json(v.to_text());
    summaries.push_back({{"ip", ip.str()},
                         {"connection-count", s.connection_count},
                         {"role", to_string(s.role)},
                         {"most-common", std::move(mc)},
                         {"anomalous", s.anomalous},
                         {"highlight", s.highlight ? json(*s.highlight) : json(nullptr)},
                         {"cross-perimeter-count", s.cross_perimeter_count},
                         {"side", to_string(s.side)}});
  }
  json moves = json::object();
  for (const auto& [ip, id] : moves_) moves[ip.str()] = id;
  json bins = json::array();
  for (const auto& b : bins_) {
    bins.push_back({{"start", b.start_ms},
                    {"source-only", b.source_only},
                    {"destination-only", b.destination_only},
                    {"both", b.both}});
  }
  json cidrs = json::array();
  for (const auto& c : inside_) cidrs.push_back(c.str());
  return {{"root", 0},
          {"clusters", std::move(clusters)},
          {"summaries", std::move(summaries)},
          {"manual-moves", std::move(moves)},
          {"time-filter", filter_ ? json{{"start", filter_->first}, {"end", filter_->second}}
                                  : json(nullptr)},
          {"time-bins", {{"width-ms", bin_width_}, {"bins", std::move(bins)}}},
          {"split-attributes", split_attributes()},
          {"inside-cidrs", std::move(cidrs)},
          {"anomaly-column", anomaly_column_ ? json(*anomaly_column_) : json(nullptr)}};
}

std::string render_tree(const ClusterModel& model) {
  std::ostringstream out;
  auto count = [&](auto&& self, ClusterId id) -> std::size_t {
    const auto& c = model.cluster(id);
    std::size_t n = c.members.size();
    for (auto k : c.children) n += self(self, k);
    return n;
  };
  auto walk = [&](auto&& self, ClusterId id, int depth) -> void {
    const auto& c = model.cluster(id);
    out << std::string(static_cast<std::size_t>(depth) * 2, ' ') << c.label << " #" << id << " ("
        << count(count, id) << ")";
    if (c.split_attribute) out << " split by " << *c.split_attribute;
    out << '\n';
    for (auto k : c.children) self(self, k, depth + 1);
  };
  walk(walk, model.root(), 0);
  return out.str();
}

std::string render_situation(const ClusterModel& model) {
  std::ostringstream out;
  const auto layout = model.situation_layout();
  for (const auto& [ip, e] : layout) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", e.affinity);
    out << ip.str() << ' ' << to_string(e.side) << ' ' << buf << ' '
        << model.summaries().at(ip).cross_perimeter_count << '\n';
  }
  return out.str();
}

}  // namespace firelog::clustervis
