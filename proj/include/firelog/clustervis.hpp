#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "firelog/log_model.hpp"

namespace firelog::clustervis {

// Tables above this many rows are refused instead of degrading silently.
inline constexpr std::size_t kWorkingSetLimit = 1'000'000;
inline constexpr const char* kDefaultAnomalyColumn = "Anomaly";

class Cidr {
 public:
  // "10.0.0.0/8", "2001:db8::/32" or a bare address. invalid_cidr otherwise.
  static Cidr parse(std::string_view text);
  bool contains(const IpAddress& ip) const noexcept;
  std::string str() const;

 private:
  Cidr() = default;
  IpAddress network_ = *IpAddress::parse("0.0.0.0");
  unsigned prefix_ = 0;
};

std::vector<Cidr> parse_cidrs(std::span<const std::string> texts);

enum class IpRole { source_only, destination_only, both };
enum class Side { inside, outside };

std::string_view to_string(IpRole r) noexcept;
std::string_view to_string(Side s) noexcept;

struct IpSummary {
  IpAddress ip;
  std::size_t connection_count = 0;
  IpRole role = IpRole::both;
  // Modal value per attribute over the rows touching this ip; ties go to the
  // lexicographically smallest text. Attributes with only nulls map to null.
  std::map<std::string, Cell> most_common;
  bool anomalous = false;
  std::optional<std::string> highlight;
  std::size_t cross_perimeter_count = 0;
  Side side = Side::outside;

  friend bool operator==(const IpSummary&, const IpSummary&) = default;
};

using SummaryMap = std::map<IpAddress, IpSummary>;

// "true", "1" or "yes", case-insensitive.
bool is_truthy(const Cell& c);

SummaryMap derive_summaries(const LogTable& table, std::span<const Cidr> inside,
                            const std::optional<std::string>& anomaly_column = std::nullopt);

// Columns summarized into most_common: everything except the endpoint role
// columns and timestamp columns.
std::vector<std::string> summarized_attributes(const Schema& schema);

struct TimeBin {
  std::int64_t start_ms = 0;
  std::size_t source_only = 0;
  std::size_t destination_only = 0;
  std::size_t both = 0;
  std::size_t total() const noexcept { return source_only + destination_only + both; }
  friend bool operator==(const TimeBin&, const TimeBin&) = default;
};

// Bins of width_ms starting at the earliest timestamp. Each ip counts once per
// bin it is active in, stacked by its role over the whole table.
std::vector<TimeBin> time_bins(const LogTable& table, std::int64_t width_ms);
// (max - min) / 50 rounded up to whole seconds, at least one second.
std::int64_t default_bin_width(const LogTable& table);

enum class Direction { out, in };
std::string_view to_string(Direction d) noexcept;

struct Connection {
  IpAddress counterpart;
  Direction direction;
  std::size_t count;
  friend bool operator==(const Connection&, const Connection&) = default;
};

// Sorted by counterpart, outgoing before incoming. unknown_ip when absent.
std::vector<Connection> connections_of(const LogTable& table, const IpAddress& ip);

LogTable export_with_anomaly(const LogTable& table, const std::vector<bool>& flags,
                             const std::string& column_name = kDefaultAnomalyColumn);

using ClusterId = std::uint64_t;

enum class ClusterKind { root, value, manual, rest };
std::string_view to_string(ClusterKind k) noexcept;

struct Cluster {
  ClusterId id = 0;
  std::string label;
  ClusterKind kind = ClusterKind::root;
  std::optional<ClusterId> parent;
  std::vector<ClusterId> children;
  std::optional<std::string> split_attribute;
  Cell value;  // value clusters only; null is labeled "(null)"
  std::vector<IpAddress> members;  // leaves only, ascending

  bool is_leaf() const noexcept { return children.empty(); }
  friend bool operator==(const Cluster&, const Cluster&) = default;
};

struct SituationEntry {
  Side side;
  double affinity;  // in [0, 1]
};
using SituationLayout = std::map<IpAddress, SituationEntry>;

class ClusterModel {
 public:
  ClusterModel(TablePtr table, std::vector<Cidr> inside,
               std::optional<std::string> anomaly_column = std::nullopt,
               std::optional<std::int64_t> bin_width_ms = std::nullopt);

  const SummaryMap& summaries() const noexcept { return summaries_; }
  const std::map<ClusterId, Cluster>& clusters() const noexcept { return clusters_; }
  const Cluster& cluster(ClusterId id) const;  // unknown_cluster
  ClusterId root() const noexcept { return 0; }
  std::vector<ClusterId> leaves() const;
  std::optional<ClusterId> leaf_of(const IpAddress& ip) const;
  const std::map<IpAddress, ClusterId>& manual_moves() const noexcept { return moves_; }
  const std::optional<std::pair<std::int64_t, std::int64_t>>& time_filter() const noexcept {
    return filter_;
  }
  const std::vector<TimeBin>& time_bins() const noexcept { return bins_; }
  std::int64_t bin_width_ms() const noexcept { return bin_width_; }
  const TablePtr& table() const noexcept { return table_; }

  // Attributes accepted by split: summarized columns plus anomalous, role, side.
  std::vector<std::string> split_attributes() const;
  Cell attribute_value(const IpSummary& s, const std::string& attribute) const;

  void split(ClusterId id, const std::string& attribute);
  void move_ip(const IpAddress& ip, ClusterId target);
  ClusterId create_cluster(const std::string& label);
  void set_highlight(std::span<const IpAddress> ips, const std::optional<std::string>& tag);
  // [start, end) in epoch ms.
  void apply_time_filter(std::int64_t start_ms, std::int64_t end_ms);
  void clear_time_filter();

  SituationLayout situation_layout() const;  // empty_model

  nlohmann::json to_json() const;

 private:
  void recompute_summaries();
  void rederive();
  ClusterId descend(ClusterId from, const IpSummary& s);
  ClusterId add_child(ClusterId parent, Cluster c);

  TablePtr table_;
  std::vector<Cidr> inside_;
  std::optional<std::string> anomaly_column_;
  std::optional<std::pair<std::int64_t, std::int64_t>> filter_;
  SummaryMap summaries_;
  std::map<ClusterId, Cluster> clusters_;
  ClusterId next_id_ = 1;
  std::map<IpAddress, ClusterId> moves_;
  std::map<IpAddress, std::string> highlights_;
  std::int64_t bin_width_ = 1000;
  std::vector<TimeBin> bins_;
};

std::string cluster_label(const Cell& value);

// Indented partition tree, one line per cluster with its member count.
std::string render_tree(const ClusterModel& model);
// One line per ip: address, side, affinity, cross-perimeter count.
std::string render_situation(const ClusterModel& model);

}  // namespace firelog::clustervis
