#include "firelog/cli.hpp"

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "firelog/clustervis.hpp"
#include "firelog/dataflow.hpp"
#include "firelog/ingestion.hpp"
#include "firelog/service.hpp"

namespace firelog::cli {

namespace fs = std::filesystem;
using dataflow::Workflow;
using nlohmann::json;

int exit_code_for(Errc code) noexcept {
  switch (code) {
    case Errc::missing_header:
    case Errc::unmapped_required_column:
    case Errc::malformed_required_cell:
    case Errc::too_many_rejections:
    case Errc::empty_sample:
    case Errc::unsupported_format:
      return kParse;
    case Errc::unknown_node_kind:
    case Errc::invalid_config:
    case Errc::type_mismatch:
    case Errc::cycle_detected:
    case Errc::port_occupied:
    case Errc::invalid_port:
    case Errc::unknown_node:
    case Errc::duplicate_node:
    case Errc::duplicate_kind:
      return kGraph;
    case Errc::unconnected_input:
    case Errc::empty_table:
    case Errc::no_attributes_selected:
    case Errc::k_out_of_range:
    case Errc::insufficient_rows:
    case Errc::insufficient_dims:
    case Errc::length_mismatch:
    case Errc::unknown_column:
    case Errc::missing_required_column:
    case Errc::unknown_cluster:
    case Errc::non_leaf_split:
    case Errc::unknown_attribute:
    case Errc::unknown_ip:
    case Errc::invalid_range:
    case Errc::empty_model:
    case Errc::column_collision:
    case Errc::working_set_exceeded:
      return kEvaluation;
    default:
      return kOther;
  }
}

void configure_logging() {
  static const auto logger = [] {
    auto l = spdlog::stderr_color_mt("firelog");
    spdlog::set_default_logger(l);
    return l;
  }();
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("FIRELOG_LOG_LEVEL")) {
    const std::string v = env;
    if (v == "error") level = spdlog::level::err;
    else if (v == "warn") level = spdlog::level::warn;
    else if (v == "info") level = spdlog::level::info;
    else if (v == "debug") level = spdlog::level::debug;
  }
  logger->set_level(level);
}

namespace {

struct ParseFlags {
  std::string delimiter = ",";
  std::string map_ts, map_src, map_dst, map_action;
  std::string config_file;
  std::vector<std::string> timestamp_formats;

  void add_to(CLI::App& app) {
    app.add_option("--delimiter", delimiter, "Field delimiter (single character or 'tab')");
    app.add_option("--map-ts", map_ts, "Header name of the timestamp column");
    app.add_option("--map-src", map_src, "Header name of the source ip column");
    app.add_option("--map-dst", map_dst, "Header name of the destination ip column");
    app.add_option("--map-action", map_action, "Header name of the action column");
    app.add_option("--parse-config", config_file, "JSON parse configuration file")->check(CLI::ExistingFile);
    app.add_option("--timestamp-format", timestamp_formats, "Timestamp pattern, tried in order");
  }

  ParseConfig config() const {
    ParseConfig c = config_file.empty() ? ParseConfig{} : ParseConfig::from_json(json::parse(read_file(config_file)));
    if (delimiter == "tab" || delimiter == "\\t") {
      c.delimiter = '\t';
    } else if (delimiter.size() == 1) {
      c.delimiter = delimiter[0];
    } else {
      throw Error(Errc::invalid_argument, "--delimiter must be a single character");
    }
    const std::string* maps[] = {&map_ts, &map_src, &map_dst, &map_action};
    for (std::size_t r = 0; r < 4; ++r) {
      if (!maps[r]->empty()) c.required_mapping[r] = *maps[r];
    }
    if (!timestamp_formats.empty()) c.timestamp_formats = timestamp_formats;
    return c;
  }
};

ParseResult parse_file(const std::string& path, const ParseConfig& cfg) {
  auto result = parse_csv(read_file(path), cfg);
  spdlog::info("{}: {} rows, {} rejected", path, result.table->row_count(), result.rejections.size());
  return result;
}

void print_schema(std::ostream& out, const Schema& schema) {
  for (std::size_t c = 0; c < schema.size(); ++c) {
    const auto& col = schema.column(c);
    out << "  " << col.name << "  " << to_string(col.kind);
    for (auto r : kAllRoles) {
      if (schema.role(r) == c) out << "  [" << to_string(r) << "]";
    }
    out << '\n';
  }
}

std::string output_file(const std::string& node, std::size_t port, std::size_t ports, const char* ext) {
  return ports > 1 ? node + "." + std::to_string(port) + ext : node + ext;
}

// ---- parse ------------------------------------------------------------------

int cmd_parse(const std::string& file, const ParseFlags& flags, std::ostream& out) {
  const auto result = parse_file(file, flags.config());
  out << "file: " << file << '\n';
  out << "rows: " << result.table->row_count() << '\n';
  out << "data-lines: " << result.data_lines << '\n';
  out << "schema:\n";
  print_schema(out, result.table->schema());
  out << "rejected: " << result.rejections.size() << '\n';
  out << result.report();
  return kOk;
}

// ---- run --------------------------------------------------------------------

struct RunFlags {
  std::string workflow;
  std::vector<std::string> logs;
  std::string out_dir = ".";
  bool dump_all = false;
  bool json_payloads = false;
};

int cmd_run(const RunFlags& flags, const ParseFlags& pflags, std::ostream& out, std::ostream& err) {
  const auto cfg = pflags.config();
  // "--log file" binds loaders without a log of their own; "--log id=file"
  // binds loaders whose config names that log-id.
  std::map<std::string, TablePtr> by_id;
  TablePtr fallback;
  for (const auto& spec : flags.logs) {
    const auto eq = spec.find('=');
    if (eq != std::string::npos && !fs::exists(spec)) {
      by_id[spec.substr(0, eq)] = parse_file(spec.substr(eq + 1), cfg).table;
    } else {
      fallback = parse_file(spec, cfg).table;
    }
  }

  json doc;
  try {
    doc = json::parse(read_file(flags.workflow));
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_config, "workflow file is not valid JSON: " + std::string(e.what()));
  }
  auto wf = Workflow::from_json(doc, dataflow::NodeRegistry::with_core_kinds());

  const fs::path base = fs::path(flags.workflow).parent_path();
  std::map<std::string, TablePtr> by_path;
  dataflow::EvalContext ctx;
  ctx.load = [&](const json& c) -> TablePtr {
    if (c.contains("log-id")) {
      const auto id = c.at("log-id").get<std::string>();
      if (const auto it = by_id.find(id); it != by_id.end()) return it->second;
    }
    if (c.contains("path")) {
      fs::path p = c.at("path").get<std::string>();
      if (p.is_relative()) p = base / p;
      const auto parse = c.contains("parse") ? ParseConfig::from_json(c.at("parse")) : cfg;
      const auto key = p.string() + "\n" + parse.to_json().dump();
      auto& slot = by_path[key];
      if (!slot) slot = parse_file(p.string(), parse).table;
      return slot;
    }
    if (fallback) return fallback;
    throw Error(Errc::invalid_config, "no log bound to this csv-loader (pass --log)");
  };
  const auto report = wf.execute(ctx);
  spdlog::info("{} evaluations", report.evaluations);

  fs::create_directories(flags.out_dir);
  bool failed = false;
  for (const auto& id : wf.topological_order()) {
    const auto& spec = wf.node(id);
    const auto kind = wf.kind_of(id);
    const auto& o = wf.output(id);
    out << id << '\t' << spec.kind << '\t' << to_string(o.status);
    if (o.status == dataflow::Status::error) {
      failed = true;
      out << '\t' << o.error << '\n';
      err << "node " << id << " (" << spec.kind << ") failed: " << o.error << '\n';
      continue;
    }
    for (const auto& p : o.payloads) {
      if (const auto* t = std::get_if<TablePtr>(&p)) out << '\t' << (*t)->row_count() << " rows";
    }
    out << '\n';
    if (!kind->is_sink() && !flags.dump_all) continue;
    const bool chart = spec.kind.ends_with("-chart-data");
    for (std::size_t port = 0; port < o.payloads.size(); ++port) {
      const auto& p = o.payloads[port];
      const auto* t = std::get_if<TablePtr>(&p);
      if (t && !chart && !flags.json_payloads) {
        write_file((fs::path(flags.out_dir) / output_file(id, port, o.payloads.size(), ".csv")).string(),
                   serialize_csv(**t));
      } else {
        write_file((fs::path(flags.out_dir) / output_file(id, port, o.payloads.size(), ".json")).string(),
                   dataflow::payload_to_json(p).dump(2) + "\n");
      }
    }
  }
  return failed ? kEvaluation : kOk;
}

// ---- lof ----------------------------------------------------------------------

struct LofFlags {
  std::string file;
  std::vector<std::string> attrs;
  int k = 20;
  double threshold = 1.5;
  std::string export_path;
  std::string column = std::string(clustervis::kDefaultAnomalyColumn);
};

int cmd_lof(const LofFlags& flags, const ParseFlags& pflags, std::ostream& out, std::ostream& err) {
  const auto table = parse_file(flags.file, pflags.config()).table;
  Workflow wf(dataflow::NodeRegistry::with_core_kinds());
  json lof_cfg{{"k", flags.k}};
  if (!flags.attrs.empty()) lof_cfg["attributes"] = flags.attrs;
  const auto load = wf.add_node("csv-loader");
  const auto lof = wf.add_node("lof-detector", lof_cfg);
  const auto thr = wf.add_node("threshold-extract", {{"threshold", flags.threshold}});
  const auto exp = wf.add_node("anomaly-export", {{"column", flags.column}});
  wf.connect({load, 0, lof, 0});
  wf.connect({load, 0, thr, 0});
  wf.connect({lof, 0, thr, 1});
  wf.connect({load, 0, exp, 0});
  wf.connect({thr, 0, exp, 1});
  dataflow::EvalContext ctx;
  ctx.load = [&](const json&) { return table; };
  wf.execute(ctx);
  for (const auto& id : {lof, thr, exp}) {
    if (wf.output(id).status == dataflow::Status::error) {
      err << "lof: " << wf.output(id).error << '\n';
      return kEvaluation;
    }
  }
  const auto& flagged = *std::get<TablePtr>(wf.output(thr).payloads[0]);
  const auto& exported = *std::get<TablePtr>(wf.output(exp).payloads[0]);
  if (!flags.export_path.empty()) write_file(flags.export_path, serialize_csv(exported));
  out << "rows: " << table->row_count() << '\n';
  out << "k: " << std::min<std::size_t>(static_cast<std::size_t>(flags.k), table->row_count() - 1) << '\n';
  out << "threshold: " << flags.threshold << '\n';
  out << "flagged: " << flagged.row_count() << '\n';
  const auto& scores = std::get<dataflow::ScoresPtr>(wf.output(lof).payloads[0])->scores;
  for (std::size_t r = 0; r < table->row_count(); ++r) {
    if (scores[r] > flags.threshold) {
      out << "  row " << table->row_ids()[r] << "  lof " << scores[r] << '\n';
    }
  }
  return kOk;
}

// ---- clustervis -------------------------------------------------------------------

struct ClusterFlags {
  std::string file;
  std::vector<std::string> cidrs;
  std::vector<std::string> splits;
  std::string anomaly_column;
  bool situation = false;
  bool json_out = false;
};

int cmd_clustervis(const ClusterFlags& flags, const ParseFlags& pflags, std::ostream& out) {
  const auto table = parse_file(flags.file, pflags.config()).table;
  std::optional<std::string> anomaly;
  if (!flags.anomaly_column.empty()) {
    anomaly = flags.anomaly_column;
  } else if (table->schema().find(clustervis::kDefaultAnomalyColumn)) {
    anomaly = std::string(clustervis::kDefaultAnomalyColumn);
  }
  clustervis::ClusterModel model(table, clustervis::parse_cidrs(flags.cidrs), anomaly);
  for (const auto& attr : flags.splits) {
    for (auto leaf : model.leaves()) {
      const auto& c = model.cluster(leaf);
      if (c.is_leaf() && !c.split_attribute) model.split(leaf, attr);
    }
  }
  if (flags.json_out) {
    out << model.to_json().dump(2) << '\n';
    return kOk;
  }
  out << clustervis::render_tree(model);
  if (flags.situation) {
    out << "situation:\n" << clustervis::render_situation(model);
  }
  return kOk;
}

// ---- serve ---------------------------------------------------------------------------

int cmd_serve(const std::string& data_dir, const std::string& host, int port, std::ostream& out) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  auto session = std::make_shared<service::Session>(data_dir.empty() ? std::nullopt
                                                                     : std::optional<fs::path>(data_dir));
  service::Server server(session);
  const int bound = server.start(host, port);
  out << "listening on http://" << host << ':' << bound << "/api/v1" << std::endl;
  int sig = 0;
  sigwait(&set, &sig);
  spdlog::info("signal {}, shutting down", sig);
  server.stop();
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Firewall log analysis workbench", "firelog"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "firelog 1.0");

  ParseFlags pflags;

  std::string parse_file_arg;
  auto* parse = app.add_subcommand("parse", "Parse a log and print schema, row count and rejections");
  parse->add_option("file", parse_file_arg, "CSV log")->required()->check(CLI::ExistingFile);
  pflags.add_to(*parse);

  RunFlags rflags;
  auto* runc = app.add_subcommand("run", "Execute a workflow file and write its sink outputs");
  runc->add_option("workflow", rflags.workflow, "Workflow JSON")->required()->check(CLI::ExistingFile);
  runc->add_option("--log", rflags.logs, "Log for csv-loader nodes: FILE or LOG-ID=FILE");
  runc->add_option("--out-dir", rflags.out_dir, "Directory for outputs");
  runc->add_flag("--dump-all", rflags.dump_all, "Also write outputs of non-sink nodes");
  runc->add_flag("--json", rflags.json_payloads, "Write every output as its JSON payload");
  pflags.add_to(*runc);

  LofFlags lflags;
  auto* lofc = app.add_subcommand("lof", "LOF anomaly detection with Anomaly export");
  lofc->add_option("file", lflags.file, "CSV log")->required()->check(CLI::ExistingFile);
  lofc->add_option("--attrs", lflags.attrs, "Feature columns (comma separated)")->delimiter(',');
  lofc->add_option("--k", lflags.k, "Neighbourhood size")->check(CLI::PositiveNumber);
  lofc->add_option("--threshold", lflags.threshold, "Rows with LOF above this are anomalies");
  lofc->add_option("--export", lflags.export_path, "Write the log with an Anomaly column here");
  lofc->add_option("--column", lflags.column, "Name of the added column");
  pflags.add_to(*lofc);

  ClusterFlags cflags;
  auto* cv = app.add_subcommand("clustervis", "Build an IP cluster model and print the partition");
  cv->add_option("file", cflags.file, "CSV log")->required()->check(CLI::ExistingFile);
  cv->add_option("--inside-cidrs", cflags.cidrs, "Networks inside the perimeter")->delimiter(',');
  cv->add_option("--split", cflags.splits, "Split every leaf by this attribute (repeatable)");
  cv->add_option("--anomaly-column", cflags.anomaly_column, "Boolean column marking anomalous rows");
  cv->add_flag("--situation", cflags.situation, "Print situation-mode affinities");
  cv->add_flag("--json", cflags.json_out, "Print the model as JSON");
  pflags.add_to(*cv);

  std::string data_dir = "firelog-data", host = "127.0.0.1";
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  serve->add_option("--data-dir", data_dir, "Persistence directory (empty for memory only)");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (0 picks a free one)");

  std::vector<std::string> argv_store{"firelog"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      app.exit(e, out, err);
      return kOk;
    }
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (*parse) return cmd_parse(parse_file_arg, pflags, out);
    if (*runc) return cmd_run(rflags, pflags, out, err);
    if (*lofc) return cmd_lof(lflags, pflags, out, err);
    if (*cv) return cmd_clustervis(cflags, pflags, out);
    if (*serve) return cmd_serve(data_dir, host, port, out);
  } catch (const Error& e) {
    err << "firelog: " << to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "firelog: " << e.what() << '\n';
    return kOther;
  }
  return kUsage;
}

}  // namespace firelog::cli
