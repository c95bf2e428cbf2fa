#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "firelog/analytics.hpp"
#include "firelog/clustervis.hpp"
#include "firelog/log_model.hpp"

namespace firelog::dataflow {

using nlohmann::json;

enum class PortType { table, score_vector, projection_2d, selection_mask, cluster_model };

std::string_view to_string(PortType t) noexcept;

struct SelectionMask {
  std::vector<bool> selected;
  friend bool operator==(const SelectionMask&, const SelectionMask&) = default;
};

using ScoresPtr = std::shared_ptr<const LofScores>;
using ProjectionPtr = std::shared_ptr<const Projection2D>;
using MaskPtr = std::shared_ptr<const SelectionMask>;
using ModelPtr = std::shared_ptr<const clustervis::ClusterModel>;

// Immutable once published; shared between nodes and readers.
using Payload = std::variant<TablePtr, ScoresPtr, ProjectionPtr, MaskPtr, ModelPtr>;

PortType port_type(const Payload& p) noexcept;
// Deep value equality.
bool payload_equal(const Payload& a, const Payload& b);

// Tables are paginated by [offset, offset + limit); limit 0 means all rows.
json payload_to_json(const Payload& p, std::size_t offset = 0, std::size_t limit = 0);
json cell_to_json(const Cell& c);

struct InputPort {
  std::string name;
  PortType type;
  bool optional = false;
};

struct OutputPort {
  std::string name;
  PortType type;
};

struct EvalContext {
  // Resolves a csv-loader config to a table. Without one, loaders read
  // config["path"] from disk.
  std::function<TablePtr(const json& loader_config)> load;
};

class NodeKind {
 public:
  virtual ~NodeKind() = default;
  virtual std::string name() const = 0;
  virtual std::vector<InputPort> inputs() const = 0;
  virtual std::vector<OutputPort> outputs() const = 0;
  // Throws invalid_config.
  virtual void validate(const json& config) const { (void)config; }
  // inputs[i] is empty only for unconnected optional ports.
  virtual std::vector<Payload> evaluate(const EvalContext& ctx,
                                        std::span<const std::optional<Payload>> inputs,
                                        const json& config) const = 0;
  // Sinks define what headless runs write out.
  virtual bool is_sink() const { return false; }
};

using NodeKindPtr = std::shared_ptr<const NodeKind>;

using EvaluateFn = std::function<std::vector<Payload>(
    const EvalContext&, std::span<const std::optional<Payload>>, const json&)>;

// Builds a kind from a plain function, for user-defined nodes.
NodeKindPtr make_kind(std::string name, std::vector<InputPort> inputs,
                      std::vector<OutputPort> outputs, EvaluateFn evaluate,
                      std::function<void(const json&)> validate = {}, bool sink = false);

class NodeRegistry {
 public:
  static std::shared_ptr<NodeRegistry> with_core_kinds();

  void register_kind(NodeKindPtr kind);  // duplicate_kind
  NodeKindPtr find(std::string_view name) const;
  NodeKindPtr get(std::string_view name) const;  // unknown_node_kind
  std::vector<std::string> names() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, NodeKindPtr, std::less<>> kinds_;
};

void register_core_kinds(NodeRegistry& registry);

struct NodeSpec {
  std::string id;
  std::string kind;
  json config = json::object();
  double x = 0.0;
  double y = 0.0;
};

struct EdgeSpec {
  std::string from;
  std::size_t from_port = 0;
  std::string to;
  std::size_t to_port = 0;
  friend bool operator==(const EdgeSpec&, const EdgeSpec&) = default;
};

enum class Status { clean, stale, error };
std::string_view to_string(Status s) noexcept;

struct NodeOutput {
  std::vector<Payload> payloads;
  std::uint64_t version = 0;
  Status status = Status::stale;
  std::string error;
};

struct ExecutionEvent {
  std::string node;
  std::uint64_t version;
  Status status;
  std::string error;
};

struct ExecutionReport {
  std::vector<ExecutionEvent> events;  // evaluated nodes, in topological order
  std::size_t evaluations = 0;
};

inline constexpr int kWorkflowFormatVersion = 1;

// A DAG of typed nodes. Mutations mark affected nodes stale; execute()
// re-evaluates only nodes whose config or input versions changed, and a
// node's version advances only when its payload actually changes.
class Workflow {
 public:
  explicit Workflow(std::shared_ptr<const NodeRegistry> registry);

  // unknown_node_kind, invalid_config, duplicate_node. Returns the node id.
  std::string add_node(const std::string& kind, json config = json::object(), double x = 0,
                       double y = 0, std::optional<std::string> id = std::nullopt);
  void remove_node(const std::string& id);  // unknown_node
  // unknown_node, invalid_port, type_mismatch, cycle_detected, port_occupied
  void connect(const EdgeSpec& edge);
  void disconnect(const EdgeSpec& edge);  // invalid_argument when absent
  // Identical configs are a no-op. unknown_node, invalid_config
  void set_config(const std::string& id, json config);
  void move_node(const std::string& id, double x, double y);

  ExecutionReport execute(const EvalContext& ctx = {});

  const std::vector<NodeSpec>& nodes() const noexcept { return nodes_; }
  const std::vector<EdgeSpec>& edges() const noexcept { return edges_; }
  const NodeSpec& node(const std::string& id) const;  // unknown_node
  const NodeOutput& output(const std::string& id) const;  // unknown_node
  NodeKindPtr kind_of(const std::string& id) const;
  std::vector<std::string> topological_order() const;
  std::vector<std::string> downstream_of(const std::string& id) const;  // includes id
  std::uint64_t evaluation_count() const noexcept { return evaluations_; }
  const std::shared_ptr<const NodeRegistry>& registry() const noexcept { return registry_; }

  json to_json() const;
  // Rebuilds through add_node/connect so every invariant is checked.
  static Workflow from_json(const json& doc, std::shared_ptr<const NodeRegistry> registry);

 private:
  struct MemoKey {
    std::string config;
    std::vector<std::uint64_t> input_versions;
    friend bool operator==(const MemoKey&, const MemoKey&) = default;
  };
  struct State {
    NodeOutput output;
    std::optional<MemoKey> key;
  };

  std::size_t index_of(const std::string& id) const;
  void mark_stale(const std::string& id);

  std::shared_ptr<const NodeRegistry> registry_;
  std::vector<NodeSpec> nodes_;
  std::vector<EdgeSpec> edges_;
  std::map<std::string, State> state_;
  std::uint64_t next_version_ = 1;
  std::uint64_t evaluations_ = 0;
  std::size_t auto_id_ = 1;
};

}  // namespace firelog::dataflow
