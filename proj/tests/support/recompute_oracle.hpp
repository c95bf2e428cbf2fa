#pragma once

// Reference executor: evaluates every node from scratch on each call, with no
// memoization, versions or staleness.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "firelog/dataflow.hpp"

namespace firelog::testing {

// nullopt marks a node that ends in error.
using OracleResult = std::map<std::string, std::optional<std::vector<dataflow::Payload>>>;

inline OracleResult recompute_all(const std::vector<dataflow::NodeSpec>& nodes,
                                  const std::vector<dataflow::EdgeSpec>& edges,
                                  const dataflow::NodeRegistry& registry,
                                  const dataflow::EvalContext& ctx) {
  OracleResult done;
  // Repeatedly evaluate any node whose predecessors are all done.
  while (done.size() < nodes.size()) {
    bool progressed = false;
    for (const auto& n : nodes) {
      if (done.count(n.id)) continue;
      bool ready = true;
      for (const auto& e : edges) {
        if (e.to == n.id && !done.count(e.from)) ready = false;
      }
      if (!ready) continue;
      progressed = true;
      const auto kind = registry.get(n.kind);
      const auto ports = kind->inputs();
      std::vector<std::optional<dataflow::Payload>> inputs(ports.size());
      bool failed = false;
      for (std::size_t p = 0; p < ports.size(); ++p) {
        const dataflow::EdgeSpec* edge = nullptr;
        for (const auto& e : edges) {
          if (e.to == n.id && e.to_port == p) edge = &e;
        }
        if (!edge) {
          failed = failed || !ports[p].optional;
          continue;
        }
        const auto& up = done.at(edge->from);
        if (!up) {
          failed = true;
          continue;
        }
        inputs[p] = (*up)[edge->from_port];
      }
      if (failed) {
        done[n.id] = std::nullopt;
        continue;
      }
      try {
        done[n.id] = kind->evaluate(ctx, inputs, n.config);
      } catch (const std::exception&) {
        done[n.id] = std::nullopt;
      }
    }
    if (!progressed) throw std::logic_error("graph has a cycle");
  }
  return done;
}

}  // namespace firelog::testing
