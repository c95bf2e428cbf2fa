#pragma once

// Random workflow mutation sequences checked against the always-recompute
// oracle after every execution.

#include <random>
#include <sstream>
#include <string>

#include "firelog/dataflow.hpp"
#include "firelog/ingestion.hpp"
#include "support/recompute_oracle.hpp"
#include "support/synthetic_log.hpp"

namespace firelog::testing {

struct FuzzOutcome {
  bool ok = true;
  std::string failure;
  std::size_t executions = 0;
  std::size_t mutations = 0;
  std::size_t rejected = 0;           // mutations refused with an Error
  std::size_t noop_evaluations = 0;   // evaluations during repeated execute()
};

inline dataflow::EvalContext fuzz_context() {
  static const TablePtr a = [] {
    SyntheticLogOptions o;
    o.rows = 60;
    o.seed = 1;
    o.inside_hosts = 6;
    o.outside_hosts = 12;
    return parse_csv(synthetic_firewall_csv(o), ParseConfig{}).table;
  }();
  static const TablePtr b = [] {
    SyntheticLogOptions o;
    o.rows = 40;
    o.seed = 2;
    o.outliers = 3;
    o.inside_hosts = 5;
    o.outside_hosts = 9;
    return parse_csv(synthetic_firewall_csv(o), ParseConfig{}).table;
  }();
  dataflow::EvalContext ctx;
  ctx.load = [](const nlohmann::json& c) -> TablePtr {
    const auto id = c.value("log-id", std::string("a"));
    if (id == "a") return a;
    if (id == "b") return b;
    throw Error(Errc::invalid_config, "unknown log-id " + id);
  };
  return ctx;
}

class WorkflowFuzzer {
 public:
  WorkflowFuzzer(std::shared_ptr<const dataflow::NodeRegistry> registry, std::uint64_t seed)
      : registry_(std::move(registry)), wf_(registry_), rng_(seed), ctx_(fuzz_context()) {}

  FuzzOutcome run(std::size_t steps) {
    FuzzOutcome out;
    for (std::size_t s = 0; s < steps && out.ok; ++s) {
      mutate(out);
      if (!acyclic()) return fail(out, "graph became cyclic");
      if (pick(0, 2) == 0) check_execute(out);
    }
    if (out.ok) check_execute(out);
    if (out.ok) {
      const auto again = wf_.execute(ctx_);
      out.noop_evaluations += again.evaluations;
      if (again.evaluations != 0 || !again.events.empty()) fail(out, "no-op re-execution evaluated nodes");
    }
    return out;
  }

  const dataflow::Workflow& workflow() const { return wf_; }

 private:
  using json = nlohmann::json;

  std::size_t pick(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }

  FuzzOutcome& fail(FuzzOutcome& out, const std::string& why) {
    out.ok = false;
    if (out.failure.empty()) out.failure = why;
    return out;
  }

  bool acyclic() const { return wf_.topological_order().size() == wf_.nodes().size(); }

  json random_config(const std::string& kind) {
    if (kind == "csv-loader") return {{"log-id", pick(0, 1) ? "a" : "b"}};
    if (kind == "row-filter") {
      switch (pick(0, 4)) {
        case 0: return {{"column", "action"}, {"op", "eq"}, {"value", "deny"}};
        case 1: return {{"column", "protocol"}, {"op", "ne"}, {"value", "tcp"}};
        case 2: return {{"column", "bytes"}, {"op", "gt"}, {"value", pick(300, 3000)}};
        case 3: return {{"column", "rule"}, {"op", "is-null"}};
        default: return {{"column", "no-such-column"}, {"op", "eq"}, {"value", 1}};
      }
    }
    if (kind == "head") return {{"n", pick(0, 70)}};
    if (kind == "sort") {
      const char* cols[] = {"bytes", "action", "duration"};
      return {{"column", cols[pick(0, 2)]}, {"descending", pick(0, 1) == 1}};
    }
    if (kind == "derive-column") {
      switch (pick(0, 2)) {
        case 0: return {{"name", "double_bytes"}, {"op", "mul"}, {"left", "bytes"}, {"right-value", 2}};
        case 1: return {{"name", "hour"}, {"op", "hour"}, {"column", "timestamp"}};
        default: return {{"name", "src_net"}, {"op", "subnet"}, {"column", "source-ip"}, {"prefix", 16}};
      }
    }
    if (kind == "aggregate") {
      return {{"group-by", {pick(0, 1) ? "action" : "protocol"}},
              {"aggregates", {{{"op", "count"}}, {{"op", "mean"}, {"column", "bytes"}}}}};
    }
    if (kind == "column-select") {
      return pick(0, 1) ? json{{"columns", {"action", "bytes"}}}
                        : json{{"columns", {"timestamp", "source-ip", "destination-ip", "action", "bytes",
                                            "duration"}}};
    }
    if (kind == "lof-detector") {
      json c{{"k", pick(1, 25)}};
      if (pick(0, 1)) c["attributes"] = {"bytes", "duration"};
      return c;
    }
    if (kind == "threshold-extract") return {{"threshold", 1.0 + 0.1 * static_cast<double>(pick(0, 10))}};
    if (kind == "pca-project") {
      return pick(0, 1) ? json::object() : json{{"attributes", {"bytes", "duration", "dst_port"}}};
    }
    if (kind == "scatterplot-select") {
      switch (pick(0, 2)) {
        case 0: return json::object();
        case 1: return {{"indices", {pick(0, 5), pick(0, 30)}}};
        default: {
          const double x = -1.0 + 0.5 * static_cast<double>(pick(0, 4));
          return {{"rectangles", {{x, -2.0, x + 1.5, 2.0}}}};
        }
      }
    }
    if (kind == "bar-chart-data" || kind == "pie-chart-data") {
      return {{"column", pick(0, 1) ? "action" : "protocol"}};
    }
    if (kind == "clustervis-preview") {
      json c{{"inside-cidrs", {"10.0.0.0/8"}}};
      if (pick(0, 1)) c["splits"] = {"action"};
      return c;
    }
    return json::object();
  }

  void mutate(FuzzOutcome& out) {
    static const char* kinds[] = {"csv-loader",     "row-filter",         "head",
                                  "sort",           "derive-column",      "aggregate",
                                  "column-select",  "lof-detector",       "threshold-extract",
                                  "pca-project",    "scatterplot-select", "subset-extract",
                                  "anomaly-export", "table-view",         "bar-chart-data",
                                  "pie-chart-data", "attach-scores",      "clustervis-preview"};
    ++out.mutations;
    const auto& nodes = wf_.nodes();
    const std::size_t r = nodes.empty() ? 0 : pick(0, 99);
    try {
      if (r < 30 || nodes.size() < 2) {
        const std::string kind = kinds[pick(0, std::size(kinds) - 1)];
        wf_.add_node(kind, random_config(kind), static_cast<double>(pick(0, 800)),
                     static_cast<double>(pick(0, 600)));
      } else if (r < 70) {
        connect_random();
      } else if (r < 85) {
        const auto& n = nodes[pick(0, nodes.size() - 1)];
        wf_.set_config(n.id, random_config(n.kind));
      } else if (r < 90) {
        wf_.remove_node(nodes[pick(0, nodes.size() - 1)].id);
      } else if (r < 95 && !wf_.edges().empty()) {
        wf_.disconnect(wf_.edges()[pick(0, wf_.edges().size() - 1)]);
      } else {
        const auto& n = nodes[pick(0, nodes.size() - 1)];
        wf_.move_node(n.id, n.x + 5, n.y - 5);
      }
    } catch (const Error&) {
      ++out.rejected;
    }
  }

  // Prefers type-compatible pairs; cycles and occupied ports are left to
  // the engine to refuse.
  void connect_random() {
    const auto& nodes = wf_.nodes();
    const auto& from = nodes[pick(0, nodes.size() - 1)];
    const auto& to = nodes[pick(0, nodes.size() - 1)];
    const auto outs = registry_->get(from.kind)->outputs();
    const auto ins = registry_->get(to.kind)->inputs();
    if (outs.empty() || ins.empty()) {
      wf_.connect({from.id, 0, to.id, 0});
      return;
    }
    std::vector<std::pair<std::size_t, std::size_t>> compatible;
    for (std::size_t o = 0; o < outs.size(); ++o) {
      for (std::size_t i = 0; i < ins.size(); ++i) {
        if (outs[o].type == ins[i].type) compatible.emplace_back(o, i);
      }
    }
    if (compatible.empty() || pick(0, 9) == 0) {
      wf_.connect({from.id, pick(0, outs.size() - 1), to.id, pick(0, ins.size() - 1)});
      return;
    }
    const auto [o, i] = compatible[pick(0, compatible.size() - 1)];
    wf_.connect({from.id, o, to.id, i});
  }

  void check_execute(FuzzOutcome& out) {
    ++out.executions;
    const auto report = wf_.execute(ctx_);
    const auto order = wf_.topological_order();
    std::size_t last = 0;
    for (const auto& ev : report.events) {
      const auto pos = static_cast<std::size_t>(std::find(order.begin(), order.end(), ev.node) - order.begin());
      if (pos < last) {
        fail(out, "events out of topological order");
        return;
      }
      last = pos;
    }
    const auto expect = recompute_all(wf_.nodes(), wf_.edges(), *registry_, ctx_);
    for (const auto& n : wf_.nodes()) {
      const auto& got = wf_.output(n.id);
      const auto& want = expect.at(n.id);
      if (got.status == dataflow::Status::stale) {
        fail(out, "node " + n.id + " left stale after execute");
        return;
      }
      if ((got.status == dataflow::Status::error) != !want.has_value()) {
        fail(out, "node " + n.id + " (" + n.kind + ") status " +
                      std::string(dataflow::to_string(got.status)) + " disagrees with oracle: " +
                      got.error);
        return;
      }
      if (!want) continue;
      if (got.payloads.size() != want->size()) {
        fail(out, "node " + n.id + " output count differs");
        return;
      }
      for (std::size_t p = 0; p < want->size(); ++p) {
        if (!dataflow::payload_equal(got.payloads[p], (*want)[p])) {
          fail(out, "node " + n.id + " (" + n.kind + ") port " + std::to_string(p) +
                        " payload differs from oracle");
          return;
        }
      }
    }
  }

  std::shared_ptr<const dataflow::NodeRegistry> registry_;
  dataflow::Workflow wf_;
  std::mt19937_64 rng_;
  dataflow::EvalContext ctx_;
};

}  // namespace firelog::testing
