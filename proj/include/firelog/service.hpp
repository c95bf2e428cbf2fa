#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "firelog/clustervis.hpp"
#include "firelog/dataflow.hpp"
#include "firelog/ingestion.hpp"

namespace firelog::service {

using json = nlohmann::json;

// Topics are "workflow:<id>" and "model:<id>".
std::string workflow_topic(const std::string& id);
std::string model_topic(const std::string& id);

class Subscription {
 public:
  explicit Subscription(std::string topic) : topic_(std::move(topic)) {}

  const std::string& topic() const noexcept { return topic_; }
  // Blocks up to `timeout`; nullopt on timeout or once closed and drained.
  std::optional<json> next(std::chrono::milliseconds timeout);
  void push(json event);
  void close();
  bool closed() const;

 private:
  std::string topic_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<json> queue_;
  bool closed_ = false;
};

// Fan-out of execution and model events to any number of subscribers.
class EventHub {
 public:
  std::shared_ptr<Subscription> subscribe(const std::string& topic);
  void unsubscribe(const std::shared_ptr<Subscription>& sub);
  void publish(const std::string& topic, const json& event);
  std::size_t subscriber_count(const std::string& topic) const;
  void close_all();

 private:
  mutable std::mutex mu_;
  std::multimap<std::string, std::shared_ptr<Subscription>> subs_;
};

// All service state: uploaded logs, workflows and ClusterVis models. Every
// public call is serialized on one mutex. With a data directory, state is
// written through to disk and reloaded by the constructor.
class Session {
 public:
  explicit Session(std::optional<std::filesystem::path> data_dir = std::nullopt,
                   std::shared_ptr<const dataflow::NodeRegistry> registry =
                       dataflow::NodeRegistry::with_core_kinds());

  EventHub& events() noexcept { return events_; }
  const dataflow::NodeRegistry& registry() const noexcept { return *registry_; }

  // Logs. `parse` is a ParseConfig document.
  json upload_log(std::string_view csv, const json& parse = json::object(), std::string name = {});
  json log_info(const std::string& log_id) const;  // unknown_log
  json list_logs() const;
  TablePtr log_table(const std::string& log_id) const;  // unknown_log

  // Workflows. Mutations execute the graph and return the execution report.
  json list_workflows() const;
  std::string create_workflow(const json& doc);
  json workflow_document(const std::string& wf) const;  // unknown_workflow
  json put_workflow(const std::string& wf, const json& doc);
  void delete_workflow(const std::string& wf);
  json add_node(const std::string& wf, const json& body);
  json remove_node(const std::string& wf, const std::string& node);
  json connect(const std::string& wf, const json& edge);
  json disconnect(const std::string& wf, const json& edge);
  json set_config(const std::string& wf, const std::string& node, const json& config);
  json move_node(const std::string& wf, const std::string& node, double x, double y);
  json execute(const std::string& wf);
  json workflow_status(const std::string& wf);
  // Output payload of one port; limit 0 means all rows.
  json node_output(const std::string& wf, const std::string& node, std::size_t port,
                   std::size_t offset, std::size_t limit);
  dataflow::NodeOutput node_result(const std::string& wf, const std::string& node);
  bool has_workflow(const std::string& wf) const;

  // ClusterVis models. Body: {"log-id"} or {"workflow-id", "node-id", "port"},
  // plus "inside-cidrs", optional "anomaly-column" and "bin-width-ms".
  std::string create_model(const json& body);
  json model_json(const std::string& id) const;  // unknown_model
  json split(const std::string& id, const json& body);
  json move_ip(const std::string& id, const json& body);
  json highlight(const std::string& id, const json& body);
  json filter(const std::string& id, const json& body);
  json create_cluster(const std::string& id, const json& body);
  json situation(const std::string& id) const;
  json connections(const std::string& id, const std::string& ip) const;
  // Model table with an "Anomaly" column flagging rows that touch an
  // anomalous or highlighted ip.
  std::string export_csv(const std::string& id) const;
  bool has_model(const std::string& id) const;
  // Snapshot for in-process comparison.
  clustervis::ClusterModel model_copy(const std::string& id) const;

 private:
  struct LogEntry {
    std::string name;
    json parse;
    std::string csv;
    ParseResult result;
  };
  struct WorkflowEntry {
    std::unique_ptr<dataflow::Workflow> graph;
  };
  struct ModelEntry {
    std::unique_ptr<clustervis::ClusterModel> model;
    json params;
    json operations = json::array();
    std::string csv;
    std::uint64_t version = 0;
  };

  const LogEntry& log_entry(const std::string& id) const;
  dataflow::Workflow& graph(const std::string& wf);
  const dataflow::Workflow& graph(const std::string& wf) const;
  ModelEntry& model_entry(const std::string& id);
  const ModelEntry& model_entry(const std::string& id) const;
  dataflow::EvalContext context() const;
  json run_locked(const std::string& wf);
  void persist_workflow(const std::string& wf) const;
  void persist_model(const std::string& id) const;
  json apply_model_op(const std::string& id, const json& op);
  static json replay(ModelEntry& entry, const json& op);
  json log_json(const std::string& log_id) const;
  void load_from_disk();

  std::optional<std::filesystem::path> dir_;
  std::shared_ptr<const dataflow::NodeRegistry> registry_;
  mutable std::mutex mu_;
  EventHub events_;
  std::map<std::string, LogEntry> logs_;
  std::map<std::string, WorkflowEntry> workflows_;
  std::map<std::string, ModelEntry> models_;
  std::uint64_t next_log_ = 1, next_workflow_ = 1, next_model_ = 1;
};

// HTTP status for an error kind: 404 unknown ids, 409 graph violations,
// 422 unprocessable log content, 400 otherwise.
int http_status(Errc code) noexcept;

// HTTP front end serving /api/v1 over a Session.
class Server {
 public:
  explicit Server(std::shared_ptr<Session> session);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and serves on a background thread. Port 0 picks a free port; the
  // bound port is returned.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Binds and serves on the calling thread until stop().
  bool run(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace firelog::service
