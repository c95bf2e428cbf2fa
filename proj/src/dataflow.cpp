#include "firelog/dataflow.hpp"

#include <algorithm>
#include <deque>
#include <queue>
#include <set>

namespace firelog::dataflow {

std::string_view to_string(PortType t) noexcept {
  switch (t) {
    case PortType::table: return "table";
    case PortType::score_vector: return "score-vector";
    case PortType::projection_2d: return "projection-2d";
    case PortType::selection_mask: return "selection-mask";
    case PortType::cluster_model: return "cluster-model";
  }
  return "table";
}

std::string_view to_string(Status s) noexcept {
  switch (s) {
    case Status::clean: return "clean";
    case Status::stale: return "stale";
    case Status::error: return "error";
  }
  return "stale";
}

PortType port_type(const Payload& p) noexcept { return static_cast<PortType>(p.index()); }

bool payload_equal(const Payload& a, const Payload& b) {
  if (a.index() != b.index()) return false;
  return std::visit(
      [&](const auto& pa) -> bool {
        using T = std::decay_t<decltype(pa)>;
        const auto& pb = std::get<T>(b);
        if (pa == pb) return true;
        if (!pa || !pb) return false;
        if constexpr (std::is_same_v<T, TablePtr>) {
          return *pa == *pb;
        } else if constexpr (std::is_same_v<T, ScoresPtr>) {
          return pa->scores == pb->scores;
        } else if constexpr (std::is_same_v<T, ProjectionPtr>) {
          auto same = [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
            return x.rows() == y.rows() && x.cols() == y.cols() && (x.array() == y.array()).all();
          };
          return same(pa->coords, pb->coords) && same(pa->components, pb->components) &&
                 pa->explained_variance == pb->explained_variance;
        } else if constexpr (std::is_same_v<T, MaskPtr>) {
          return *pa == *pb;
        } else {
          return pa->to_json() == pb->to_json();
        }
      },
      a);
}

json cell_to_json(const Cell& c) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return nullptr;
        } else if constexpr (std::is_same_v<T, Instant>) {
          return format_iso8601(v);
        } else if constexpr (std::is_same_v<T, IpAddress>) {
          return v.str();
        } else {
          return v;
        }
      },
      c.value());
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json table_to_json(const LogTable& t, std::size_t offset, std::size_t limit) {
  json columns = json::array();
  const auto& schema = t.schema();
  for (std::size_t c = 0; c < schema.size(); ++c) {
    json col{{"name", schema.column(c).name},
             {"kind", to_string(schema.column(c).kind)},
             {"required", schema.column(c).required}};
    for (Role r : kAllRoles) {
      if (schema.role(r) == c) col["role"] = to_string(r);
    }
    columns.push_back(std::move(col));
  }
  const std::size_t begin = std::min(offset, t.row_count());
  const std::size_t end = limit == 0 ? t.row_count() : std::min(t.row_count(), begin + limit);
  json rows = json::array();
  json ids = json::array();
  for (std::size_t r = begin; r < end; ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < t.column_count(); ++c) row.push_back(cell_to_json(t.at(r, c)));
    rows.push_back(std::move(row));
    ids.push_back(t.row_ids()[r]);
  }
  return {{"type", "table"},   {"columns", std::move(columns)}, {"row-count", t.row_count()},
          {"offset", begin},   {"rows", std::move(rows)},       {"row-ids", std::move(ids)},
          {"provenance", t.provenance()}};
}

}  // namespace

json payload_to_json(const Payload& p, std::size_t offset, std::size_t limit) {
  return std::visit(
      [&](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, TablePtr>) {
          return table_to_json(*v, offset, limit);
        } else if constexpr (std::is_same_v<T, ScoresPtr>) {
          return {{"type", "score-vector"}, {"scores", v->scores}};
        } else if constexpr (std::is_same_v<T, ProjectionPtr>) {
          return {{"type", "projection-2d"},
                  {"coords", matrix_to_json(v->coords)},
                  {"components", matrix_to_json(v->components)},
                  {"explained-variance", {v->explained_variance[0], v->explained_variance[1]}}};
        } else if constexpr (std::is_same_v<T, MaskPtr>) {
          json idx = json::array();
          for (std::size_t i = 0; i < v->selected.size(); ++i) {
            if (v->selected[i]) idx.push_back(i);
          }
          return {{"type", "selection-mask"}, {"size", v->selected.size()}, {"selected", idx}};
        } else {
          json j = v->to_json();
          j["type"] = "cluster-model";
          return j;
        }
      },
      p);
}

namespace {

class FunctionKind final : public NodeKind {
 public:
  FunctionKind(std::string name, std::vector<InputPort> in, std::vector<OutputPort> out,
               EvaluateFn fn, std::function<void(const json&)> validate, bool sink)
      : name_(std::move(name)),
        in_(std::move(in)),
        out_(std::move(out)),
        fn_(std::move(fn)),
        validate_(std::move(validate)),
        sink_(sink) {}

  std::string name() const override { return name_; }
  std::vector<InputPort> inputs() const override { return in_; }
  std::vector<OutputPort> outputs() const override { return out_; }
  void validate(const json& config) const override {
    if (validate_) validate_(config);
  }
  std::vector<Payload> evaluate(const EvalContext& ctx,
                                std::span<const std::optional<Payload>> inputs,
                                const json& config) const override {
    return fn_(ctx, inputs, config);
  }
  bool is_sink() const override { return sink_; }

 private:
  std::string name_;
  std::vector<InputPort> in_;
  std::vector<OutputPort> out_;
  EvaluateFn fn_;
  std::function<void(const json&)> validate_;
  bool sink_;
};

}  // namespace

NodeKindPtr make_kind(std::string name, std::vector<InputPort> inputs,
                      std::vector<OutputPort> outputs, EvaluateFn evaluate,
                      std::function<void(const json&)> validate, bool sink) {
  return std::make_shared<FunctionKind>(std::move(name), std::move(inputs), std::move(outputs),
                                        std::move(evaluate), std::move(validate), sink);
}

std::shared_ptr<NodeRegistry> NodeRegistry::with_core_kinds() {
  auto r = std::make_shared<NodeRegistry>();
  register_core_kinds(*r);
  return r;
}

void NodeRegistry::register_kind(NodeKindPtr kind) {
  if (!kind) throw Error(Errc::invalid_argument, "null node kind");
  std::lock_guard lock(mu_);
  auto name = kind->name();
  if (!kinds_.emplace(name, std::move(kind)).second) {
    throw Error(Errc::duplicate_kind, "node kind '" + name + "' is already registered");
  }
}

NodeKindPtr NodeRegistry::find(std::string_view name) const {
  std::lock_guard lock(mu_);
  const auto it = kinds_.find(name);
  return it == kinds_.end() ? nullptr : it->second;
}

NodeKindPtr NodeRegistry::get(std::string_view name) const {
  auto k = find(name);
  if (!k) throw Error(Errc::unknown_node_kind, "unknown node kind '" + std::string(name) + "'");
  return k;
}

std::vector<std::string> NodeRegistry::names() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [n, k] : kinds_) out.push_back(n);
  return out;
}

Workflow::Workflow(std::shared_ptr<const NodeRegistry> registry) : registry_(std::move(registry)) {
  if (!registry_) throw Error(Errc::invalid_argument, "workflow needs a node registry");
}

std::size_t Workflow::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id == id) return i;
  }
  throw Error(Errc::unknown_node, "unknown node '" + id + "'");
}

const NodeSpec& Workflow::node(const std::string& id) const { return nodes_[index_of(id)]; }

const NodeOutput& Workflow::output(const std::string& id) const {
  const auto it = state_.find(id);
  if (it == state_.end()) throw Error(Errc::unknown_node, "unknown node '" + id + "'");
  return it->second.output;
}

NodeKindPtr Workflow::kind_of(const std::string& id) const { return registry_->get(node(id).kind); }

std::string Workflow::add_node(const std::string& kind, json config, double x, double y,
                               std::optional<std::string> id) {
  const auto k = registry_->get(kind);
  if (config.is_null()) config = json::object();
  if (!config.is_object()) throw Error(Errc::invalid_config, "node config must be an object");
  k->validate(config);
  if (id) {
    if (id->empty()) throw Error(Errc::invalid_argument, "node id must not be empty");
    if (state_.count(*id)) throw Error(Errc::duplicate_node, "node '" + *id + "' already exists");
  } else {
    do {
      id = "n" + std::to_string(auto_id_++);
    } while (state_.count(*id));
  }
  nodes_.push_back({*id, kind, std::move(config), x, y});
  state_[*id] = State{};
  return *id;
}

void Workflow::remove_node(const std::string& node_id) {
  const std::string id = node_id;  // node_id may alias an element of nodes_
  const auto idx = index_of(id);
  const auto down = downstream_of(id);
  for (const auto& d : down) {
    if (d != id) mark_stale(d);
  }
  std::erase_if(edges_, [&](const EdgeSpec& e) { return e.from == id || e.to == id; });
  nodes_.erase(nodes_.begin() + static_cast<std::ptrdiff_t>(idx));
  state_.erase(id);
}

void Workflow::connect(const EdgeSpec& e) {
  const auto from_kind = kind_of(e.from);
  const auto to_kind = kind_of(e.to);
  const auto outs = from_kind->outputs();
  const auto ins = to_kind->inputs();
  if (e.from_port >= outs.size()) {
    throw Error(Errc::invalid_port, "node '" + e.from + "' has no output port " +
                                        std::to_string(e.from_port));
  }
  if (e.to_port >= ins.size()) {
    throw Error(Errc::invalid_port,
                "node '" + e.to + "' has no input port " + std::to_string(e.to_port));
  }
  if (outs[e.from_port].type != ins[e.to_port].type) {
    throw Error(Errc::type_mismatch, "cannot connect " + std::string(to_string(outs[e.from_port].type)) +
                                         " output to " + std::string(to_string(ins[e.to_port].type)) +
                                         " input");
  }
  const auto reach = downstream_of(e.to);
  if (std::find(reach.begin(), reach.end(), e.from) != reach.end()) {
    throw Error(Errc::cycle_detected,
                "connecting '" + e.from + "' to '" + e.to + "' would create a cycle");
  }
  for (const auto& x : edges_) {
    if (x.to == e.to && x.to_port == e.to_port) {
      throw Error(Errc::port_occupied, "input port " + std::to_string(e.to_port) + " of '" + e.to +
                                           "' is already connected");
    }
  }
  edges_.push_back(e);
  mark_stale(e.to);
}

void Workflow::disconnect(const EdgeSpec& edge) {
  const EdgeSpec e = edge;  // edge may alias an element of edges_
  const auto it = std::find(edges_.begin(), edges_.end(), e);
  if (it == edges_.end()) throw Error(Errc::invalid_argument, "no such edge");
  edges_.erase(it);
  mark_stale(e.to);
}

void Workflow::set_config(const std::string& id, json config) {
  auto& n = nodes_[index_of(id)];
  if (config.is_null()) config = json::object();
  if (!config.is_object()) throw Error(Errc::invalid_config, "node config must be an object");
  registry_->get(n.kind)->validate(config);
  if (config == n.config) return;
  n.config = std::move(config);
  mark_stale(id);
}

void Workflow::move_node(const std::string& id, double x, double y) {
  auto& n = nodes_[index_of(id)];
  n.x = x;
  n.y = y;
}

void Workflow::mark_stale(const std::string& id) {
  for (const auto& d : downstream_of(id)) state_.at(d).output.status = Status::stale;
}

std::vector<std::string> Workflow::downstream_of(const std::string& id) const {
  index_of(id);
  std::vector<std::string> out{id};
  std::set<std::string> seen{id};
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (const auto& e : edges_) {
      if (e.from == out[i] && seen.insert(e.to).second) out.push_back(e.to);
    }
  }
  return out;
}

std::vector<std::string> Workflow::topological_order() const {
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < nodes_.size(); ++i) pos[nodes_[i].id] = i;
  std::vector<std::size_t> indeg(nodes_.size(), 0);
  for (const auto& e : edges_) ++indeg[pos.at(e.to)];
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (indeg[i] == 0) ready.push(i);
  }
  std::vector<std::string> order;
  while (!ready.empty()) {
    const auto i = ready.top();
    ready.pop();
    order.push_back(nodes_[i].id);
    for (const auto& e : edges_) {
      if (e.from == nodes_[i].id && --indeg[pos.at(e.to)] == 0) ready.push(pos.at(e.to));
    }
  }
  return order;
}

ExecutionReport Workflow::execute(const EvalContext& ctx) {
  ExecutionReport report;
  for (const auto& id : topological_order()) {
    auto& st = state_.at(id);
    if (st.output.status != Status::stale) continue;
    const auto& spec = node(id);
    const auto kind = registry_->get(spec.kind);
    const auto in_ports = kind->inputs();

    MemoKey key{spec.config.dump(), std::vector<std::uint64_t>(in_ports.size(), 0)};
    std::vector<std::optional<Payload>> inputs(in_ports.size());
    std::string failure;
    for (std::size_t p = 0; p < in_ports.size(); ++p) {
      const auto e = std::find_if(edges_.begin(), edges_.end(),
                                  [&](const EdgeSpec& x) { return x.to == id && x.to_port == p; });
      if (e == edges_.end()) {
        if (!in_ports[p].optional && failure.empty()) {
          failure = std::string(to_string(Errc::unconnected_input)) + ": input port " +
                    std::to_string(p) + " (" + in_ports[p].name + ") is not connected";
        }
        continue;
      }
      const auto& up = state_.at(e->from).output;
      key.input_versions[p] = up.version;
      if (up.status == Status::error) {
        if (failure.empty()) failure = "upstream node '" + e->from + "' failed";
      } else if (e->from_port < up.payloads.size()) {
        inputs[p] = up.payloads[e->from_port];
      }
    }

    // Same config and same input versions: the previous result still holds.
    if (st.key && *st.key == key && st.output.version != 0) {
      st.output.status = st.output.error.empty() ? Status::clean : Status::error;
      continue;
    }

    std::vector<Payload> result;
    if (failure.empty()) {
      ++evaluations_;
      ++report.evaluations;
      try {
        result = kind->evaluate(ctx, inputs, spec.config);
        const auto outs = kind->outputs();
        if (result.size() != outs.size()) {
          throw Error(Errc::invalid_argument, "node produced " + std::to_string(result.size()) +
                                                  " outputs, expected " +
                                                  std::to_string(outs.size()));
        }
        for (std::size_t p = 0; p < outs.size(); ++p) {
          if (port_type(result[p]) != outs[p].type) {
            throw Error(Errc::type_mismatch, "output port " + std::to_string(p) + " has wrong type");
          }
        }
      } catch (const Error& err) {
        failure = std::string(to_string(err.code())) + ": " + err.what();
      } catch (const std::exception& err) {
        failure = err.what();
      }
    }
    if (!failure.empty()) result.clear();

    auto& out = st.output;
    const bool was_error = !out.error.empty();
    bool changed = out.version == 0 || was_error != !failure.empty() ||
                   result.size() != out.payloads.size();
    for (std::size_t p = 0; !changed && p < result.size(); ++p) {
      changed = !payload_equal(result[p], out.payloads[p]);
    }
    if (changed) {
      out.payloads = std::move(result);
      out.version = next_version_++;
    }
    out.error = failure;
    out.status = failure.empty() ? Status::clean : Status::error;
    st.key = std::move(key);
    report.events.push_back({id, out.version, out.status, out.error});
  }
  return report;
}

json Workflow::to_json() const {
  json nodes = json::array();
  for (const auto& n : nodes_) {
    nodes.push_back({{"id", n.id}, {"kind", n.kind}, {"config", n.config}, {"x", n.x}, {"y", n.y}});
  }
  json edges = json::array();
  for (const auto& e : edges_) {
    edges.push_back({{"from", e.from}, {"fromPort", e.from_port}, {"to", e.to}, {"toPort", e.to_port}});
  }
  return {{"workflow-version", kWorkflowFormatVersion}, {"nodes", nodes}, {"edges", edges}};
}

Workflow Workflow::from_json(const json& doc, std::shared_ptr<const NodeRegistry> registry) {
  Workflow w(std::move(registry));
  try {
    if (!doc.is_object()) throw Error(Errc::invalid_config, "workflow document must be an object");
    if (doc.contains("workflow-version") && doc.at("workflow-version") != kWorkflowFormatVersion) {
      throw Error(Errc::invalid_config, "unsupported workflow-version");
    }
    for (const auto& n : doc.value("nodes", json::array())) {
      w.add_node(n.at("kind").get<std::string>(), n.value("config", json::object()),
                 n.value("x", 0.0), n.value("y", 0.0), n.at("id").get<std::string>());
    }
    for (const auto& e : doc.value("edges", json::array())) {
      w.connect({e.at("from").get<std::string>(), e.value("fromPort", std::size_t{0}),
                 e.at("to").get<std::string>(), e.value("toPort", std::size_t{0})});
    }
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_config, std::string("malformed workflow document: ") + e.what());
  }
  return w;
}

}  // namespace firelog::dataflow
