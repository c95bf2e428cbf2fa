#include <algorithm>
#include <fstream>
#include <regex>

#include <spdlog/spdlog.h>

#include "firelog/service.hpp"

namespace firelog::service {

namespace fs = std::filesystem;
using clustervis::ClusterModel;
using dataflow::Workflow;

std::string workflow_topic(const std::string& id) { return "workflow:" + id; }
std::string model_topic(const std::string& id) { return "model:" + id; }

// ---- events ----------------------------------------------------------------

std::optional<json> Subscription::next(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return closed_ || !queue_.empty(); });
  if (queue_.empty()) return std::nullopt;
  json ev = std::move(queue_.front());
  queue_.pop_front();
  return ev;
}

void Subscription::push(json event) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    queue_.push_back(std::move(event));
  }
  cv_.notify_all();
}

void Subscription::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool Subscription::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

std::shared_ptr<Subscription> EventHub::subscribe(const std::string& topic) {
  auto sub = std::make_shared<Subscription>(topic);
  std::lock_guard lock(mu_);
  subs_.emplace(topic, sub);
  return sub;
}

void EventHub::unsubscribe(const std::shared_ptr<Subscription>& sub) {
  std::lock_guard lock(mu_);
  auto [lo, hi] = subs_.equal_range(sub->topic());
  for (auto it = lo; it != hi; ++it) {
    if (it->second == sub) {
      subs_.erase(it);
      break;
    }
  }
  sub->close();
}

void EventHub::publish(const std::string& topic, const json& event) {
  std::lock_guard lock(mu_);
  auto [lo, hi] = subs_.equal_range(topic);
  for (auto it = lo; it != hi; ++it) it->second->push(event);
}

std::size_t EventHub::subscriber_count(const std::string& topic) const {
  std::lock_guard lock(mu_);
  return subs_.count(topic);
}

void EventHub::close_all() {
  std::lock_guard lock(mu_);
  for (auto& [topic, sub] : subs_) sub->close();
  subs_.clear();
}

// ---- helpers -----------------------------------------------------------------

namespace {

json schema_json(const Schema& schema) {
  json cols = json::array();
  for (std::size_t c = 0; c < schema.size(); ++c) {
    const auto& col = schema.column(c);
    json j{{"name", col.name}, {"kind", to_string(col.kind)}, {"required", col.required}};
    for (auto r : kAllRoles) {
      if (schema.role(r) == c) j["role"] = to_string(r);
    }
    cols.push_back(std::move(j));
  }
  return cols;
}

json rejections_json(const ParseResult& r) {
  json out = json::array();
  for (const auto& rej : r.rejections) out.push_back({{"line", rej.line}, {"reason", rej.reason}});
  return out;
}

// Parse settings that reproduce `table` from serialize_csv output.
json reparse_config(const LogTable& table) {
  ParseConfig cfg;
  const auto& schema = table.schema();
  for (const auto& col : schema.columns()) cfg.kind_overrides[col.name] = col.kind;
  for (auto r : kAllRoles) {
    if (const auto idx = schema.role(r)) {
      cfg.required_mapping[static_cast<std::size_t>(r)] = schema.column(*idx).name;
    }
  }
  cfg.max_rejection_ratio = 1.0;
  return cfg.to_json();
}

void check_id(const std::string& id) {
  static const std::regex ok("[A-Za-z0-9_.-]{1,64}");
  if (!std::regex_match(id, ok) || id == "." || id == "..") {
    throw Error(Errc::invalid_argument, "invalid id '" + id + "'");
  }
}

std::uint64_t numeric_suffix(const std::string& id, std::string_view prefix) {
  if (id.rfind(prefix, 0) != 0) return 0;
  try {
    return std::stoull(id.substr(prefix.size()));
  } catch (const std::exception&) {
    return 0;
  }
}

template <typename Map>
std::string fresh_id(const Map& m, std::string_view prefix, std::uint64_t& counter) {
  std::string id;
  do {
    id = std::string(prefix) + std::to_string(counter++);
  } while (m.count(id));
  return id;
}

json read_json(const fs::path& p) { return json::parse(read_file(p.string())); }

const json& require(const json& body, const char* key) {
  if (!body.is_object() || !body.contains(key)) {
    throw Error(Errc::invalid_argument, std::string("request is missing '") + key + "'");
  }
  return body.at(key);
}

IpAddress parse_ip(const json& v) {
  if (!v.is_string()) throw Error(Errc::invalid_argument, "ip must be a string");
  auto ip = IpAddress::parse(v.get<std::string>());
  if (!ip) throw Error(Errc::invalid_argument, "'" + v.get<std::string>() + "' is not an ip address");
  return *ip;
}

std::int64_t time_value(const json& v, const char* what) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_string()) {
    if (auto t = parse_timestamp(v.get<std::string>(), default_timestamp_formats())) return t->epoch_ms;
  }
  throw Error(Errc::invalid_argument, std::string("'") + what + "' must be epoch ms or a timestamp");
}

}  // namespace

// ---- session -------------------------------------------------------------------

Session::Session(std::optional<fs::path> data_dir, std::shared_ptr<const dataflow::NodeRegistry> registry)
    : dir_(std::move(data_dir)), registry_(std::move(registry)) {
  if (dir_) {
    for (const char* sub : {"logs", "workflows", "models"}) fs::create_directories(*dir_ / sub);
    load_from_disk();
  }
}

const Session::LogEntry& Session::log_entry(const std::string& id) const {
  const auto it = logs_.find(id);
  if (it == logs_.end()) throw Error(Errc::unknown_log, "unknown log '" + id + "'");
  return it->second;
}

Workflow& Session::graph(const std::string& wf) {
  const auto it = workflows_.find(wf);
  if (it == workflows_.end()) throw Error(Errc::unknown_workflow, "unknown workflow '" + wf + "'");
  return *it->second.graph;
}

const Workflow& Session::graph(const std::string& wf) const {
  return const_cast<Session*>(this)->graph(wf);
}

Session::ModelEntry& Session::model_entry(const std::string& id) {
  const auto it = models_.find(id);
  if (it == models_.end()) throw Error(Errc::unknown_model, "unknown model '" + id + "'");
  return it->second;
}

const Session::ModelEntry& Session::model_entry(const std::string& id) const {
  return const_cast<Session*>(this)->model_entry(id);
}

// Callers hold mu_.
dataflow::EvalContext Session::context() const {
  dataflow::EvalContext ctx;
  ctx.load = [this](const json& config) -> TablePtr {
    if (!config.contains("log-id")) {
      throw Error(Errc::invalid_config, "csv-loader needs a 'log-id' naming an uploaded log");
    }
    return log_entry(config.at("log-id").get<std::string>()).result.table;
  };
  return ctx;
}

// ---- logs ------------------------------------------------------------------------

json Session::upload_log(std::string_view csv, const json& parse, std::string name) {
  const auto cfg = ParseConfig::from_json(parse.is_null() ? json::object() : parse);
  auto result = parse_csv(csv, cfg);
  std::lock_guard lock(mu_);
  const auto id = fresh_id(logs_, "log-", next_log_);
  if (dir_) {
    write_file((*dir_ / "logs" / (id + ".csv")).string(), csv);
    write_file((*dir_ / "logs" / (id + ".json")).string(),
               json{{"name", name}, {"parse", cfg.to_json()}}.dump(2));
  }
  logs_[id] = LogEntry{std::move(name), cfg.to_json(), std::string(csv), std::move(result)};
  spdlog::info("log {} uploaded: {} rows", id, logs_[id].result.table->row_count());
  return log_json(id);
}

json Session::log_info(const std::string& log_id) const {
  std::lock_guard lock(mu_);
  return log_json(log_id);
}

json Session::log_json(const std::string& log_id) const {
  const auto& e = log_entry(log_id);
  return {{"log-id", log_id},
          {"name", e.name},
          {"row-count", e.result.table->row_count()},
          {"data-lines", e.result.data_lines},
          {"schema", schema_json(e.result.table->schema())},
          {"rejections", rejections_json(e.result)},
          {"parse", e.parse}};
}

json Session::list_logs() const {
  std::lock_guard lock(mu_);
  json out = json::array();
  for (const auto& [id, e] : logs_) {
    out.push_back({{"log-id", id}, {"name", e.name}, {"row-count", e.result.table->row_count()}});
  }
  return out;
}

TablePtr Session::log_table(const std::string& log_id) const {
  std::lock_guard lock(mu_);
  return log_entry(log_id).result.table;
}

// ---- workflows ---------------------------------------------------------------------

json Session::run_locked(const std::string& wf) {
  auto& g = graph(wf);
  const auto report = g.execute(context());
  json events = json::array();
  for (const auto& ev : report.events) {
    json j{{"workflow-id", wf},
           {"node-id", ev.node},
           {"version", ev.version},
           {"status", to_string(ev.status)}};
    if (!ev.error.empty()) j["error"] = ev.error;
    events_.publish(workflow_topic(wf), j);
    events.push_back(std::move(j));
  }
  return {{"workflow-id", wf}, {"evaluations", report.evaluations}, {"events", events}};
}

void Session::persist_workflow(const std::string& wf) const {
  if (!dir_) return;
  write_file((*dir_ / "workflows" / (wf + ".json")).string(), graph(wf).to_json().dump(2));
}

json Session::list_workflows() const {
  std::lock_guard lock(mu_);
  json out = json::array();
  for (const auto& [id, e] : workflows_) {
    out.push_back({{"workflow-id", id}, {"node-count", e.graph->nodes().size()},
                   {"edge-count", e.graph->edges().size()}});
  }
  return out;
}

std::string Session::create_workflow(const json& doc) {
  auto g = std::make_unique<Workflow>(doc.is_null() || doc.empty()
                                          ? Workflow(registry_)
                                          : Workflow::from_json(doc, registry_));
  std::lock_guard lock(mu_);
  const auto id = fresh_id(workflows_, "wf-", next_workflow_);
  workflows_[id].graph = std::move(g);
  persist_workflow(id);
  run_locked(id);
  return id;
}

json Session::workflow_document(const std::string& wf) const {
  std::lock_guard lock(mu_);
  return graph(wf).to_json();
}

json Session::put_workflow(const std::string& wf, const json& doc) {
  check_id(wf);
  auto g = std::make_unique<Workflow>(Workflow::from_json(doc, registry_));
  std::lock_guard lock(mu_);
  workflows_[wf].graph = std::move(g);
  persist_workflow(wf);
  return run_locked(wf);
}

void Session::delete_workflow(const std::string& wf) {
  std::lock_guard lock(mu_);
  graph(wf);
  workflows_.erase(wf);
  if (dir_) fs::remove(*dir_ / "workflows" / (wf + ".json"));
}

json Session::add_node(const std::string& wf, const json& body) {
  std::lock_guard lock(mu_);
  auto& g = graph(wf);
  const auto kind = require(body, "kind").get<std::string>();
  std::optional<std::string> id;
  if (body.contains("id")) {
    id = body.at("id").get<std::string>();
    check_id(*id);
  }
  const auto node = g.add_node(kind, body.value("config", json::object()), body.value("x", 0.0),
                               body.value("y", 0.0), id);
  persist_workflow(wf);
  auto out = run_locked(wf);
  out["node-id"] = node;
  return out;
}

json Session::remove_node(const std::string& wf, const std::string& node) {
  std::lock_guard lock(mu_);
  graph(wf).remove_node(node);
  persist_workflow(wf);
  return run_locked(wf);
}

namespace {
dataflow::EdgeSpec edge_of(const json& e) {
  return {require(e, "from").get<std::string>(), e.value("fromPort", std::size_t{0}),
          require(e, "to").get<std::string>(), e.value("toPort", std::size_t{0})};
}
}  // namespace

json Session::connect(const std::string& wf, const json& edge) {
  const auto e = edge_of(edge);
  std::lock_guard lock(mu_);
  graph(wf).connect(e);
  persist_workflow(wf);
  return run_locked(wf);
}

json Session::disconnect(const std::string& wf, const json& edge) {
  const auto e = edge_of(edge);
  std::lock_guard lock(mu_);
  graph(wf).disconnect(e);
  persist_workflow(wf);
  return run_locked(wf);
}

json Session::set_config(const std::string& wf, const std::string& node, const json& config) {
  std::lock_guard lock(mu_);
  graph(wf).set_config(node, config);
  persist_workflow(wf);
  return run_locked(wf);
}

json Session::move_node(const std::string& wf, const std::string& node, double x, double y) {
  std::lock_guard lock(mu_);
  graph(wf).move_node(node, x, y);
  persist_workflow(wf);
  return {{"workflow-id", wf}, {"node-id", node}, {"x", x}, {"y", y}};
}

json Session::execute(const std::string& wf) {
  std::lock_guard lock(mu_);
  return run_locked(wf);
}

json Session::workflow_status(const std::string& wf) {
  std::lock_guard lock(mu_);
  run_locked(wf);
  const auto& g = graph(wf);
  json nodes = json::array();
  for (const auto& n : g.nodes()) {
    const auto& o = g.output(n.id);
    json j{{"id", n.id}, {"kind", n.kind}, {"status", to_string(o.status)}, {"version", o.version}};
    if (!o.error.empty()) j["error"] = o.error;
    nodes.push_back(std::move(j));
  }
  return {{"workflow-id", wf}, {"nodes", nodes}};
}

dataflow::NodeOutput Session::node_result(const std::string& wf, const std::string& node) {
  std::lock_guard lock(mu_);
  run_locked(wf);
  return graph(wf).output(node);
}

json Session::node_output(const std::string& wf, const std::string& node, std::size_t port,
                          std::size_t offset, std::size_t limit) {
  std::lock_guard lock(mu_);
  run_locked(wf);
  const auto& g = graph(wf);
  const auto& o = g.output(node);
  json out{{"workflow-id", wf}, {"node-id", node}, {"status", to_string(o.status)},
           {"version", o.version}, {"port", port}};
  if (o.status == dataflow::Status::error) {
    out["error"] = o.error;
    return out;
  }
  if (port >= o.payloads.size()) {
    throw Error(Errc::invalid_port, "node '" + node + "' has no output port " + std::to_string(port));
  }
  out["payload"] = dataflow::payload_to_json(o.payloads[port], offset, limit);
  return out;
}

bool Session::has_workflow(const std::string& wf) const {
  std::lock_guard lock(mu_);
  return workflows_.count(wf) > 0;
}

// ---- ClusterVis models -------------------------------------------------------------

namespace {

std::unique_ptr<ClusterModel> build_model(TablePtr table, const json& params) {
  std::vector<std::string> cidr_text;
  if (params.contains("inside-cidrs")) cidr_text = params.at("inside-cidrs").get<std::vector<std::string>>();
  std::optional<std::string> anomaly;
  if (params.contains("anomaly-column") && !params.at("anomaly-column").is_null()) {
    anomaly = params.at("anomaly-column").get<std::string>();
  }
  std::optional<std::int64_t> width;
  if (params.contains("bin-width-ms") && !params.at("bin-width-ms").is_null()) {
    width = params.at("bin-width-ms").get<std::int64_t>();
  }
  return std::make_unique<ClusterModel>(std::move(table), clustervis::parse_cidrs(cidr_text), anomaly, width);
}

}  // namespace

std::string Session::create_model(const json& body) {
  if (!body.is_object()) throw Error(Errc::invalid_argument, "request body must be an object");
  std::lock_guard lock(mu_);
  TablePtr table;
  if (body.contains("log-id")) {
    table = log_entry(body.at("log-id").get<std::string>()).result.table;
  } else {
    const auto wf = require(body, "workflow-id").get<std::string>();
    const auto node = require(body, "node-id").get<std::string>();
    run_locked(wf);
    const auto& o = graph(wf).output(node);
    if (o.status != dataflow::Status::clean) {
      throw Error(Errc::invalid_argument, "node '" + node + "' has no clean output: " + o.error);
    }
    const auto port = body.value("port", std::size_t{0});
    if (port >= o.payloads.size() || !std::holds_alternative<TablePtr>(o.payloads[port])) {
      throw Error(Errc::type_mismatch, "node '" + node + "' port " + std::to_string(port) +
                                           " is not a table");
    }
    table = std::get<TablePtr>(o.payloads[port]);
  }
  json params{{"inside-cidrs", body.value("inside-cidrs", json::array())},
              {"anomaly-column", body.value("anomaly-column", json())},
              {"bin-width-ms", body.value("bin-width-ms", json())}};
  ModelEntry entry;
  entry.model = build_model(table, params);
  entry.params = params;
  entry.params["parse"] = reparse_config(*table);
  entry.csv = dir_ ? serialize_csv(*table) : std::string();
  const auto id = fresh_id(models_, "cv-", next_model_);
  models_[id] = std::move(entry);
  persist_model(id);
  return id;
}

void Session::persist_model(const std::string& id) const {
  if (!dir_) return;
  const auto& e = model_entry(id);
  const auto base = *dir_ / "models" / id;
  if (!fs::exists(base.string() + ".csv")) write_file(base.string() + ".csv", e.csv);
  write_file(base.string() + ".json",
             json{{"params", e.params}, {"operations", e.operations}, {"version", e.version}}.dump(2));
}

json Session::model_json(const std::string& id) const {
  std::lock_guard lock(mu_);
  const auto& e = model_entry(id);
  json j = e.model->to_json();
  j["model-id"] = id;
  j["version"] = e.version;
  return j;
}

json Session::replay(ModelEntry& entry, const json& op) {
  auto& m = *entry.model;
  const auto kind = require(op, "op").get<std::string>();
  if (kind == "split") {
    m.split(op.value("cluster", m.root()), require(op, "attribute").get<std::string>());
  } else if (kind == "move") {
    m.move_ip(parse_ip(require(op, "ip")), require(op, "cluster").get<clustervis::ClusterId>());
  } else if (kind == "highlight") {
    std::vector<IpAddress> ips;
    if (op.contains("ips")) {
      for (const auto& v : op.at("ips")) ips.push_back(parse_ip(v));
    } else {
      ips.push_back(parse_ip(require(op, "ip")));
    }
    std::optional<std::string> tag;
    const auto& t = op.contains("tag") ? op.at("tag") : op.value("color", json());
    if (!t.is_null()) tag = t.get<std::string>();
    m.set_highlight(ips, tag);
  } else if (kind == "filter") {
    if (op.value("clear", false)) {
      m.clear_time_filter();
    } else {
      m.apply_time_filter(time_value(require(op, "start"), "start"), time_value(require(op, "end"), "end"));
    }
  } else if (kind == "create-cluster") {
    const auto& label = require(op, "label");
    if (!label.is_string()) throw Error(Errc::invalid_argument, "'label' must be a string");
    return {{"cluster-id", m.create_cluster(label.get<std::string>())}};
  } else {
    throw Error(Errc::invalid_argument, "unknown model operation '" + kind + "'");
  }
  return json::object();
}

json Session::apply_model_op(const std::string& id, const json& op) {
  std::lock_guard lock(mu_);
  auto& e = model_entry(id);
  // Operations either apply fully or throw before mutating the model.
  const json extra = replay(e, op);
  e.operations.push_back(op);
  ++e.version;
  persist_model(id);
  events_.publish(model_topic(id), {{"model-id", id}, {"version", e.version}, {"operation", op.at("op")}});
  json j = e.model->to_json();
  j["model-id"] = id;
  j["version"] = e.version;
  for (const auto& [k, v] : extra.items()) j[k] = v;
  return j;
}

namespace {
json with_op(json body, const char* op) {
  if (!body.is_object()) throw Error(Errc::invalid_argument, "request body must be an object");
  body["op"] = op;
  return body;
}
}  // namespace

json Session::split(const std::string& id, const json& body) {
  return apply_model_op(id, with_op(body, "split"));
}
json Session::move_ip(const std::string& id, const json& body) {
  return apply_model_op(id, with_op(body, "move"));
}
json Session::highlight(const std::string& id, const json& body) {
  return apply_model_op(id, with_op(body, "highlight"));
}
json Session::filter(const std::string& id, const json& body) {
  auto op = with_op(body, "filter");
  if (op.contains("start-ms")) op["start"] = op["start-ms"];
  if (op.contains("end-ms")) op["end"] = op["end-ms"];
  op.erase("start-ms");
  op.erase("end-ms");
  return apply_model_op(id, op);
}
json Session::create_cluster(const std::string& id, const json& body) {
  return apply_model_op(id, with_op(body, "create-cluster"));
}

json Session::situation(const std::string& id) const {
  std::lock_guard lock(mu_);
  const auto& m = *model_entry(id).model;
  json entries = json::array();
  for (const auto& [ip, s] : m.situation_layout()) {
    entries.push_back({{"ip", ip.str()},
                       {"side", to_string(s.side)},
                       {"affinity", s.affinity},
                       {"cross-perimeter-count", m.summaries().at(ip).cross_perimeter_count}});
  }
  return {{"model-id", id}, {"entries", entries}};
}

json Session::connections(const std::string& id, const std::string& ip) const {
  const auto addr = parse_ip(json(ip));
  std::lock_guard lock(mu_);
  const auto& m = *model_entry(id).model;
  if (!m.summaries().count(addr)) throw Error(Errc::unknown_ip, "ip " + ip + " is not in the model");
  json out = json::array();
  for (const auto& c : clustervis::connections_of(*m.table(), addr)) {
    out.push_back({{"counterpart", c.counterpart.str()},
                   {"direction", c.direction == clustervis::Direction::out ? "out" : "in"},
                   {"count", c.count}});
  }
  return {{"model-id", id}, {"ip", ip}, {"connections", out}};
}

std::string Session::export_csv(const std::string& id) const {
  std::lock_guard lock(mu_);
  const auto& m = *model_entry(id).model;
  const auto& t = *m.table();
  const auto src = t.schema().require_role(Role::source_ip);
  const auto dst = t.schema().require_role(Role::destination_ip);
  auto flagged = [&](const Cell& c) {
    const auto* ip = c.as_ip();
    if (!ip) return false;
    const auto it = m.summaries().find(*ip);
    return it != m.summaries().end() && (it->second.anomalous || it->second.highlight.has_value());
  };
  std::vector<bool> flags(t.row_count());
  for (std::size_t r = 0; r < t.row_count(); ++r) flags[r] = flagged(t.at(r, src)) || flagged(t.at(r, dst));
  const std::string name(clustervis::kDefaultAnomalyColumn);
  if (const auto existing = t.schema().find(name)) {
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < t.column_count(); ++c) {
      if (c != *existing) keep.push_back(c);
    }
    return serialize_csv(clustervis::export_with_anomaly(t.select_columns(keep, t.provenance()), flags, name));
  }
  return serialize_csv(clustervis::export_with_anomaly(t, flags, name));
}

bool Session::has_model(const std::string& id) const {
  std::lock_guard lock(mu_);
  return models_.count(id) > 0;
}

ClusterModel Session::model_copy(const std::string& id) const {
  std::lock_guard lock(mu_);
  return *model_entry(id).model;
}

// ---- persistence -------------------------------------------------------------------

void Session::load_from_disk() {
  auto stems = [&](const char* sub, const char* ext) {
    std::vector<std::string> out;
    for (const auto& f : fs::directory_iterator(*dir_ / sub)) {
      if (f.path().extension() == ext) out.push_back(f.path().stem().string());
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  for (const auto& id : stems("logs", ".json")) {
    try {
      const auto meta = read_json(*dir_ / "logs" / (id + ".json"));
      auto csv = read_file((*dir_ / "logs" / (id + ".csv")).string());
      const auto cfg = ParseConfig::from_json(meta.value("parse", json::object()));
      auto result = parse_csv(csv, cfg);
      logs_[id] = LogEntry{meta.value("name", ""), cfg.to_json(), std::move(csv), std::move(result)};
      next_log_ = std::max(next_log_, numeric_suffix(id, "log-") + 1);
    } catch (const std::exception& e) {
      spdlog::warn("skipping stored log {}: {}", id, e.what());
    }
  }
  for (const auto& id : stems("models", ".json")) {
    try {
      const auto doc = read_json(*dir_ / "models" / (id + ".json"));
      ModelEntry entry;
      entry.csv = read_file((*dir_ / "models" / (id + ".csv")).string());
      entry.params = doc.at("params");
      const auto cfg = ParseConfig::from_json(entry.params.value("parse", json::object()));
      entry.model = build_model(parse_csv(entry.csv, cfg).table, entry.params);
      for (const auto& op : doc.value("operations", json::array())) {
        replay(entry, op);
        entry.operations.push_back(op);
      }
      entry.version = doc.value("version", std::uint64_t{0});
      models_[id] = std::move(entry);
      next_model_ = std::max(next_model_, numeric_suffix(id, "cv-") + 1);
    } catch (const std::exception& e) {
      spdlog::warn("skipping stored model {}: {}", id, e.what());
    }
  }
  for (const auto& id : stems("workflows", ".json")) {
    try {
      workflows_[id].graph =
          std::make_unique<Workflow>(Workflow::from_json(read_json(*dir_ / "workflows" / (id + ".json")), registry_));
      next_workflow_ = std::max(next_workflow_, numeric_suffix(id, "wf-") + 1);
    } catch (const std::exception& e) {
      workflows_.erase(id);
      spdlog::warn("skipping stored workflow {}: {}", id, e.what());
    }
  }
}

int http_status(Errc code) noexcept {
  switch (code) {
    case Errc::unknown_node:
    case Errc::unknown_cluster:
    case Errc::unknown_ip:
    case Errc::unknown_subscription:
    case Errc::unknown_log:
    case Errc::unknown_workflow:
    case Errc::unknown_model:
      return 404;
    case Errc::cycle_detected:
    case Errc::type_mismatch:
    case Errc::port_occupied:
    case Errc::invalid_port:
    case Errc::duplicate_node:
    case Errc::non_leaf_split:
      return 409;
    case Errc::missing_header:
    case Errc::unmapped_required_column:
    case Errc::malformed_required_cell:
    case Errc::too_many_rejections:
    case Errc::empty_sample:
    case Errc::unsupported_format:
    case Errc::missing_required_column:
    case Errc::empty_model:
      return 422;
    default:
      return 400;
  }
}

}  // namespace firelog::service
