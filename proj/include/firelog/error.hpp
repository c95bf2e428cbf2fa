#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace firelog {

// Machine-readable error kinds. The string form (see to_string) is what the
// HTTP API reports as "reason" and what the CLI prints.
enum class Errc {
  unknown_column,
  missing_required_column,
  missing_header,
  unmapped_required_column,
  malformed_required_cell,
  too_many_rejections,
  empty_sample,
  duplicate_parser_name,
  unsupported_format,
  unknown_node_kind,
  invalid_config,
  type_mismatch,
  cycle_detected,
  port_occupied,
  invalid_port,
  unknown_node,
  duplicate_kind,
  duplicate_node,
  unconnected_input,
  empty_table,
  no_attributes_selected,
  k_out_of_range,
  insufficient_rows,
  insufficient_dims,
  length_mismatch,
  invalid_cidr,
  unknown_cluster,
  non_leaf_split,
  unknown_attribute,
  unknown_ip,
  invalid_range,
  empty_model,
  column_collision,
  working_set_exceeded,
  unknown_subscription,
  unknown_log,
  unknown_workflow,
  unknown_model,
  invalid_argument,
  io_error,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace firelog
