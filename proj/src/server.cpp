// Eigen (via the firelog headers) must precede httplib, whose <resolv.h>
// defines a `_res` macro that collides with Eigen parameter names.
#include "firelog/service.hpp"

#include <atomic>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

namespace firelog::service {

namespace {

constexpr std::size_t kDefaultPageSize = 1000;

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view reason, const std::string& message) {
  send_json(res, {{"reason", reason}, {"error", message}}, status);
}

json body_json(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_argument, std::string("request body is not valid JSON: ") + e.what());
  }
}

std::size_t query_size(const httplib::Request& req, const char* key, std::size_t fallback) {
  if (!req.has_param(key)) return fallback;
  const auto text = req.get_param_value(key);
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used == text.size()) return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
  }
  throw Error(Errc::invalid_argument, std::string("query parameter '") + key + "' must be a non-negative integer");
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

// Maps library errors onto HTTP statuses with a machine-readable reason.
Handler guarded(Handler h) {
  return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
    try {
      h(req, res);
    } catch (const Error& e) {
      send_error(res, http_status(e.code()), to_string(e.code()), e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, to_string(Errc::invalid_argument), e.what());
    } catch (const std::exception& e) {
      spdlog::error("{} {}: {}", req.method, req.path, e.what());
      send_error(res, 500, "internal-error", e.what());
    }
  };
}

}  // namespace

struct Server::Impl {
  std::shared_ptr<Session> session;
  httplib::Server http;
  std::thread thread;
  std::atomic<bool> stopping{false};

  explicit Impl(std::shared_ptr<Session> s) : session(std::move(s)) { routes(); }

  void stream(const httplib::Request&, httplib::Response& res, const std::string& topic) {
    auto sub = session->events().subscribe(topic);
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream",
        [this, sub, first = true](std::size_t, httplib::DataSink& sink) mutable {
          if (first) {
            first = false;
            const std::string hello = ": subscribed " + sub->topic() + "\n\n";
            return sink.write(hello.data(), hello.size());
          }
          for (int idle = 0; !stopping && sink.is_writable(); ++idle) {
            if (auto ev = sub->next(std::chrono::milliseconds(200))) {
              const std::string msg = "event: update\ndata: " + ev->dump() + "\n\n";
              return sink.write(msg.data(), msg.size());
            }
            if (sub->closed()) break;
            if (idle == 75) {
              const std::string ping = ": ping\n\n";
              return sink.write(ping.data(), ping.size());
            }
          }
          sink.done();
          return true;
        },
        [this, sub](bool) { session->events().unsubscribe(sub); });
  }

  void routes() {
    auto& s = *session;
    const std::string api = "/api/v1";

    http.set_post_routing_handler([](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", "*");
    });
    http.Options(R"(/api/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, PUT, DELETE, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });

    http.Get(api + "/health", guarded([](const auto&, auto& res) { send_json(res, {{"status", "ok"}}); }));

    http.Get(api + "/node-kinds", guarded([&s](const auto&, auto& res) {
      json kinds = json::array();
      for (const auto& name : s.registry().names()) {
        const auto k = s.registry().get(name);
        json ins = json::array(), outs = json::array();
        for (const auto& p : k->inputs()) {
          ins.push_back({{"name", p.name}, {"type", dataflow::to_string(p.type)}, {"optional", p.optional}});
        }
        for (const auto& p : k->outputs()) {
          outs.push_back({{"name", p.name}, {"type", dataflow::to_string(p.type)}});
        }
        kinds.push_back({{"kind", name}, {"inputs", ins}, {"outputs", outs}, {"sink", k->is_sink()}});
      }
      send_json(res, kinds);
    }));

    // ---- logs
    http.Post(api + "/logs", guarded([&s](const httplib::Request& req, auto& res) {
      json parse = json::object();
      std::string csv, name;
      if (req.is_multipart_form_data()) {
        if (!req.has_file("file")) throw Error(Errc::invalid_argument, "multipart upload needs a 'file' part");
        const auto file = req.get_file_value("file");
        csv = file.content;
        name = file.filename;
        if (req.has_file("config")) parse = json::parse(req.get_file_value("config").content);
      } else {
        csv = req.body;
        if (req.has_param("config")) parse = json::parse(req.get_param_value("config"));
        if (req.has_param("name")) name = req.get_param_value("name");
      }
      send_json(res, s.upload_log(csv, parse, name));
    }));
    http.Get(api + "/logs", guarded([&s](const auto&, auto& res) { send_json(res, s.list_logs()); }));
    http.Get(api + R"(/logs/([^/]+))", guarded([&s](const httplib::Request& req, auto& res) {
      send_json(res, s.log_info(req.matches[1]));
    }));
    http.Get(api + R"(/logs/([^/]+)/table)", guarded([&s](const httplib::Request& req, auto& res) {
      const auto t = s.log_table(req.matches[1]);
      send_json(res, dataflow::payload_to_json(t, query_size(req, "offset", 0),
                                               query_size(req, "limit", kDefaultPageSize)));
    }));

    // ---- workflows
    http.Get(api + "/workflows", guarded([&s](const auto&, auto& res) { send_json(res, s.list_workflows()); }));
    http.Post(api + "/workflows", guarded([&s](const httplib::Request& req, auto& res) {
      const auto id = s.create_workflow(body_json(req));
      send_json(res, {{"workflow-id", id}, {"workflow", s.workflow_document(id)}}, 201);
    }));
    http.Get(api + R"(/workflows/([^/]+))", guarded([&s](const httplib::Request& req, auto& res) {
      send_json(res, s.workflow_document(req.matches[1]));
    }));
    http.Put(api + R"(/workflows/([^/]+))", guarded([&s](const httplib::Request& req, auto& res) {
      send_json(res, s.put_workflow(req.matches[1], body_json(req)));
    }));
    http.Delete(api + R"(/workflows/([^/]+))", guarded([&s](const httplib::Request& req, auto& res) {
      s.delete_workflow(req.matches[1]);
      res.status = 204;
    }));
    http.Post(api + R"(/workflows/([^/]+)/nodes)", guarded([&s](const httplib::Request& req, auto& res) {
      send_json(res, s.add_node(req.matches[1], body_json(req)), 201);
    }));
    http.Delete(api + R"(/workflows/([^/]+)/nodes/([^/]+))", guarded([&s](const httplib::Request& req, auto& res) {
      send_json(res, s.remove_node(req.matches[1], req.matches[2]));
    }));
    http.Post(api + R"(/workflows/([^/]+)/nodes/([^/]+)/move)", guarded([&s](const httplib::Request& req, auto& res) {
      const auto b = body_json(req);
      send_json(res, s.move_node(req.matches[1], req.matches[2], b.at("x").get<double>(), b.at("y").get<double>()));
    }));
    http.Post(api + R"(/workflows/([^/]+)/edges)", guarded([&s](const httplib::Request& req, auto& res) {
      send_json(res, s.connect(req.matches[1], body_json(req)), 201);
    }));
    http.Delete(api + R"(/workflows/([^/]+)/edges)", guarded([&s](const httplib::Request& req, auto& res) {
      send_json(res, s.disconnect(req.matches[1], body_json(req)));
    }));
    http.Post(api + R"(/workflows/([^/]+)/config)", guarded([&s](const httplib::Request& req, auto& res) {
      const auto b = body_json(req);
      if (!b.contains("node") || !b.at("node").is_string()) {
        throw Error(Errc::invalid_argument, "request is missing 'node'");
      }
      send_json(res, s.set_config(req.matches[1], b.at("node"), b.value("config", json::object())));
    }));
    http.Post(api + R"(/workflows/([^/]+)/execute)", guarded([&s](const httplib::Request& req, auto& res) {
      send_json(res, s.execute(req.matches[1]));
    }));
    http.Get(api + R"(/workflows/([^/]+)/status)", guarded([&s](const httplib::Request& req, auto& res) {
      send_json(res, s.workflow_status(req.matches[1]));
    }));
    http.Get(api + R"(/workflows/([^/]+)/outputs/([^/]+))", guarded([&s](const httplib::Request& req, auto& res) {
      const auto out = s.node_output(req.matches[1], req.matches[2], query_size(req, "port", 0),
                                     query_size(req, "offset", 0), query_size(req, "limit", kDefaultPageSize));
      send_json(res, out, out.at("status") == "error" ? 422 : 200);
    }));
    http.Get(api + R"(/workflows/([^/]+)/events)", [this, &s](const httplib::Request& req, httplib::Response& res) {
      if (!s.has_workflow(req.matches[1])) {
        return send_error(res, 404, to_string(Errc::unknown_subscription),
                          "no workflow '" + req.matches[1].str() + "' to subscribe to");
      }
      stream(req, res, workflow_topic(req.matches[1]));
    });

    // ---- ClusterVis
    http.Post(api + "/clustervis", guarded([&s](const httplib::Request& req, auto& res) {
      const auto id = s.create_model(body_json(req));
      send_json(res, s.model_json(id), 201);
    }));
    http.Get(api + R"(/clustervis/([^/]+))", guarded([&s](const httplib::Request& req, auto& res) {
      send_json(res, s.model_json(req.matches[1]));
    }));
    using Op = json (Session::*)(const std::string&, const json&);
    for (const auto& [path, op] : std::vector<std::pair<std::string, Op>>{
             {"split", &Session::split},
             {"move", &Session::move_ip},
             {"highlight", &Session::highlight},
             {"filter", &Session::filter},
             {"create-cluster", &Session::create_cluster}}) {
      http.Post(api + R"(/clustervis/([^/]+)/)" + path,
                guarded([&s, op = op](const httplib::Request& req, auto& res) {
                  send_json(res, (s.*op)(req.matches[1], body_json(req)));
                }));
    }
    http.Get(api + R"(/clustervis/([^/]+)/situation)", guarded([&s](const httplib::Request& req, auto& res) {
      send_json(res, s.situation(req.matches[1]));
    }));
    http.Get(api + R"(/clustervis/([^/]+)/connections)", guarded([&s](const httplib::Request& req, auto& res) {
      if (!req.has_param("ip")) throw Error(Errc::invalid_argument, "query parameter 'ip' is required");
      send_json(res, s.connections(req.matches[1], req.get_param_value("ip")));
    }));
    http.Get(api + R"(/clustervis/([^/]+)/export)", guarded([&s](const httplib::Request& req, auto& res) {
      const std::string id = req.matches[1];
      res.set_content(s.export_csv(id), "text/csv");
      res.set_header("Content-Disposition", "attachment; filename=\"" + id + "-anomalies.csv\"");
    }));
    http.Get(api + R"(/clustervis/([^/]+)/events)", [this, &s](const httplib::Request& req, httplib::Response& res) {
      if (!s.has_model(req.matches[1])) {
        return send_error(res, 404, to_string(Errc::unknown_subscription),
                          "no model '" + req.matches[1].str() + "' to subscribe to");
      }
      stream(req, res, model_topic(req.matches[1]));
    });

    http.set_logger([](const httplib::Request& req, const httplib::Response& res) {
      spdlog::debug("{} {} -> {}", req.method, req.path, res.status);
    });
  }
};

Server::Server(std::shared_ptr<Session> session) : impl_(std::make_unique<Impl>(std::move(session))) {}

Server::~Server() { stop(); }

int Server::start(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->http.bind_to_any_port(host) : (impl_->http.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(Errc::io_error, "cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
  spdlog::info("serving /api/v1 on {}:{}", host, bound);
  return bound;
}

bool Server::run(const std::string& host, int port) {
  spdlog::info("serving /api/v1 on {}:{}", host, port);
  return impl_->http.listen(host, port);
}

void Server::stop() {
  if (!impl_) return;
  impl_->stopping = true;
  impl_->session->events().close_all();
  impl_->http.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace firelog::service
