#include "reservoir/config.hpp"

#include "reservoir/sim.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace reservoir {

std::string
format_diagnostic(const Diagnostic& d, const std::string& source)
{
  std::string where = source;
  if (d.line > 0) {
    where += (where.empty() ? "line " : ":") + std::to_string(d.line);
  }
  if (!where.empty()) {
    where += ": ";
  }
  return where + (d.path.empty() ? "" : d.path + ": ") + d.message;
}

namespace {

std::string
join_diagnostics(const std::vector<Diagnostic>& diags, const std::string& source)
{
  std::string out = "invalid configuration";
  for (const auto& d : diags) {
    out += "\n  " + format_diagnostic(d, source);
  }
  return out;
}

} // namespace

ConfigDiagnostics::ConfigDiagnostics(std::vector<Diagnostic> diagnostics, std::string source)
  : ConfigError(join_diagnostics(diagnostics, source))
  , diagnostics_(std::move(diagnostics))
{
}

namespace {

/// Reads typed fields out of a YAML mapping, recording problems instead of throwing.
class Reader
{
public:
  Reader(std::vector<Diagnostic>& diags, std::map<std::string, int>& lines)
    : diags_(diags)
    , lines_(lines)
  {
  }

  void
  error(const std::string& path, const YAML::Node& node, const std::string& message)
  {
    const int line = node.IsDefined() && node.Mark().line >= 0 ? node.Mark().line + 1 : line_of(path);
    diags_.push_back({path, line, message});
  }

  int
  line_of(const std::string& path) const
  {
    std::string p = path;
    while (!p.empty()) {
      if (auto it = lines_.find(p); it != lines_.end()) {
        return it->second;
      }
      auto dot = p.find_last_of(".[");
      p = dot == std::string::npos ? std::string{} : p.substr(0, dot);
    }
    return 0;
  }

  /// Records the line of every key below `node` and flags keys not in `allowed`.
  void
  check_keys(const YAML::Node& node, const std::string& path, std::set<std::string> allowed)
  {
    if (!node.IsMap()) {
      error(path, node, "expected a mapping");
      return;
    }
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      const std::string child = path.empty() ? key : path + "." + key;
      lines_[child] = kv.first.Mark().line + 1;
      if (allowed.count(key) == 0) {
        error(child, kv.first, "unknown key");
      }
    }
  }

  template<typename T>
  bool
  read(const YAML::Node& map, const std::string& key, const std::string& path, T& out)
  {
    const YAML::Node n = map[key];
    if (!n.IsDefined() || n.IsNull()) {
      return false;
    }
    const std::string p = path.empty() ? key : path + "." + key;
    try {
      out = n.as<T>();
      return true;
    }
    catch (const YAML::Exception&) {
      error(p, n, "cannot read value '" + scalar(n) + "'");
      return false;
    }
  }

  template<typename T>
  bool
  read_optional(const YAML::Node& map, const std::string& key, const std::string& path,
                std::optional<T>& out)
  {
    T value{};
    if (read(map, key, path, value)) {
      out = value;
      return true;
    }
    return false;
  }

  bool
  read_ms(const YAML::Node& map, const std::string& key, const std::string& path, Duration& out)
  {
    double ms = 0;
    if (!read(map, key, path, ms)) {
      return false;
    }
    if (!std::isfinite(ms) || ms < 0) {
      error(path + "." + key, map[key], "must be a non-negative number of milliseconds");
      return false;
    }
    out = from_ms(ms);
    return true;
  }

  bool
  read_us_range(const YAML::Node& map, const std::string& key, const std::string& path,
                Duration& lo, Duration& hi)
  {
    const YAML::Node n = map[key];
    if (!n.IsDefined()) {
      return false;
    }
    const std::string p = path + "." + key;
    try {
      auto v = n.as<std::vector<std::int64_t>>();
      if (v.size() != 2) {
        error(p, n, "expected [min, max]");
        return false;
      }
      lo = Duration{v[0]};
      hi = Duration{v[1]};
      return true;
    }
    catch (const YAML::Exception&) {
      error(p, n, "expected [min, max] integers");
      return false;
    }
  }

  static std::string
  scalar(const YAML::Node& n)
  {
    if (n.IsScalar()) {
      return n.Scalar();
    }
    YAML::Emitter e;
    e << YAML::Flow << n;
    return e.c_str();
  }

private:
  std::vector<Diagnostic>& diags_;
  std::map<std::string, int>& lines_;
};

Name
read_name(Reader& r, const YAML::Node& map, const std::string& key, const std::string& path)
{
  std::string s;
  if (!r.read(map, key, path, s)) {
    return Name();
  }
  if (s.empty() || s.front() != '/') {
    r.error(path + "." + key, map[key], "names start with '/'");
  }
  return Name(s);
}

void
parse_topology(Reader& r, const YAML::Node& n, SimConfig& c)
{
  r.check_keys(n, "topology",
               {"kind", "routers", "ens", "devices", "attachment", "link_delay_ms",
                "access_delay_ms", "nodes", "links"});
  if (!n.IsMap()) {
    return;
  }
  std::string kind = "generated";
  r.read(n, "kind", "topology", kind);
  auto& p = c.topology.params;
  r.read(n, "routers", "topology", p.routers);
  r.read(n, "ens", "topology", p.ens);
  r.read(n, "devices", "topology", p.devices);
  r.read(n, "attachment", "topology", p.attachment);
  r.read_ms(n, "link_delay_ms", "topology", p.link_delay);
  r.read_ms(n, "access_delay_ms", "topology", p.access_delay);
  if (kind == "generated") {
    c.topology.generated = true;
    return;
  }
  if (kind != "explicit") {
    r.error("topology.kind", n["kind"], "expected 'generated' or 'explicit'");
    return;
  }
  c.topology.generated = false;
  auto& t = c.topology.explicit_topology;
  const YAML::Node nodes = n["nodes"];
  if (!nodes.IsSequence()) {
    r.error("topology.nodes", n, "explicit topologies need a node list");
    return;
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string path = fmt::format("topology.nodes[{}]", i);
    const YAML::Node nn = nodes[i];
    r.check_keys(nn, path, {"id", "en", "device"});
    if (!nn.IsMap()) {
      continue;
    }
    TopoNode node;
    r.read(nn, "id", path, node.id);
    if (node.id.empty()) {
      r.error(path + ".id", nn, "node id is required");
    }
    if (nn["en"]) {
      node.en_prefix = read_name(r, nn, "en", path);
    }
    if (nn["device"]) {
      node.kind = NodeKind::Device;
      node.device_prefix = read_name(r, nn, "device", path);
    }
    t.add_node(std::move(node));
  }
  const YAML::Node links = n["links"];
  if (!links.IsDefined()) {
    return;
  }
  if (!links.IsSequence()) {
    r.error("topology.links", links, "expected a list");
    return;
  }
  for (std::size_t i = 0; i < links.size(); ++i) {
    const std::string path = fmt::format("topology.links[{}]", i);
    const YAML::Node ln = links[i];
    r.check_keys(ln, path, {"a", "b", "delay_ms"});
    if (!ln.IsMap()) {
      continue;
    }
    std::string a;
    std::string b;
    r.read(ln, "a", path, a);
    r.read(ln, "b", path, b);
    Duration d = p.link_delay;
    r.read_ms(ln, "delay_ms", path, d);
    auto ia = t.find(a);
    auto ib = t.find(b);
    if (!ia || !ib) {
      r.error(path, ln, "link endpoint '" + (!ia ? a : b) + "' is not a declared node");
      continue;
    }
    t.add_link(*ia, *ib, d);
  }
}

void
parse_rfib(Reader& r, const YAML::Node& n, SimConfig& c)
{
  if (!n.IsSequence()) {
    r.error("rfib", n, "expected a list of services");
    return;
  }
  for (std::size_t i = 0; i < n.size(); ++i) {
    const std::string path = fmt::format("rfib[{}]", i);
    const YAML::Node sn = n[i];
    r.check_keys(sn, path, {"service", "entries"});
    if (!sn.IsMap()) {
      continue;
    }
    const Name service = read_name(r, sn, "service", path);
    const YAML::Node entries = sn["entries"];
    if (!entries.IsSequence()) {
      r.error(path + ".entries", sn, "expected a list");
      continue;
    }
    std::vector<RfibEntry> out;
    for (std::size_t j = 0; j < entries.size(); ++j) {
      const std::string ep = fmt::format("{}.entries[{}]", path, j);
      const YAML::Node en = entries[j];
      r.check_keys(en, ep, {"en", "ranges"});
      if (!en.IsMap()) {
        continue;
      }
      RfibEntry e;
      e.service = service;
      e.en_prefix = read_name(r, en, "en", ep);
      e.bits_per_table = c.hash.bits_per_table;
      e.index_size_bytes = c.hash.index_size_bytes;
      try {
        for (const auto& range : en["ranges"].as<std::vector<std::vector<std::uint64_t>>>()) {
          if (range.size() != 2) {
            throw YAML::Exception(YAML::Mark::null_mark(), "range");
          }
          e.bucket_ranges.push_back({range[0], range[1]});
        }
      }
      catch (const YAML::Exception&) {
        r.error(ep + ".ranges", en["ranges"], "expected a list of [lo, hi] pairs, one per table");
      }
      out.push_back(std::move(e));
    }
    c.explicit_rfib[service] = std::move(out);
  }
}

} // namespace

SimConfig
parse_config(const std::string& text, const std::string& source)
{
  YAML::Node root;
  try {
    root = YAML::Load(text);
  }
  catch (const YAML::ParserException& e) {
    throw ConfigDiagnostics({{"", e.mark.line + 1, e.msg}}, source);
  }

  std::vector<Diagnostic> diags;
  std::map<std::string, int> lines;
  Reader r(diags, lines);
  SimConfig c;
  if (root.IsNull()) {
    root = YAML::Node(YAML::NodeType::Map);
  }
  r.check_keys(root, "",
               {"seed", "trace", "hash", "topology", "services", "workload", "forwarder", "edge",
                "device", "offload", "loss", "rebalance", "rfib"});
  if (!root.IsMap()) {
    throw ConfigDiagnostics(std::move(diags), source);
  }

  r.read(root, "seed", "", c.seed);
  r.read(root, "trace", "", c.trace);

  if (const auto h = root["hash"]) {
    r.check_keys(h, "hash",
                 {"num_tables", "bits_per_table", "index_size_bytes", "dimension", "seed",
                  "probe_radius"});
    r.read(h, "num_tables", "hash", c.hash.num_tables);
    r.read(h, "bits_per_table", "hash", c.hash.bits_per_table);
    if (!r.read(h, "index_size_bytes", "hash", c.hash.index_size_bytes)) {
      c.hash.index_size_bytes = index_size_for_bits(std::clamp<std::uint32_t>(c.hash.bits_per_table, 1, 32));
    }
    r.read(h, "dimension", "hash", c.hash.dimension);
    r.read(h, "seed", "hash", c.hash.seed);
    r.read(h, "probe_radius", "hash", c.probe_radius);
  }

  if (const auto t = root["topology"]) {
    parse_topology(r, t, c);
  }

  if (const auto s = root["services"]) {
    if (!s.IsSequence()) {
      r.error("services", s, "expected a list");
    }
    else {
      for (std::size_t i = 0; i < s.size(); ++i) {
        const std::string path = fmt::format("services[{}]", i);
        const YAML::Node sn = s[i];
        ServiceConfig svc;
        if (sn.IsScalar()) {
          svc.name = Name(sn.Scalar());
          c.services.push_back(std::move(svc));
          continue;
        }
        r.check_keys(sn, path, {"name", "ens", "reuse"});
        if (!sn.IsMap()) {
          continue;
        }
        svc.name = read_name(r, sn, "name", path);
        std::vector<std::string> ens;
        if (r.read(sn, "ens", path, ens)) {
          for (const auto& e : ens) {
            svc.ens.emplace_back(e);
          }
        }
        r.read(sn, "reuse", path, svc.reuse);
        c.services.push_back(std::move(svc));
      }
    }
  }

  if (const auto w = root["workload"]) {
    r.check_keys(w, "workload",
                 {"count", "correlation", "num_clusters", "sigma", "hot_fraction", "hot_clusters",
                  "mean_interarrival_ms", "threshold", "deadline_ms", "services", "tasks"});
    auto& p = c.workload;
    r.read(w, "count", "workload", p.count);
    std::string corr;
    if (r.read(w, "correlation", "workload", corr)) {
      try {
        p.correlation = parse_correlation(corr);
      }
      catch (const ConfigError& e) {
        r.error("workload.correlation", w["correlation"], e.what());
      }
    }
    r.read_optional(w, "num_clusters", "workload", p.num_clusters);
    r.read_optional(w, "sigma", "workload", p.sigma);
    r.read_optional(w, "hot_fraction", "workload", p.hot_fraction);
    r.read(w, "hot_clusters", "workload", p.hot_clusters);
    r.read_ms(w, "mean_interarrival_ms", "workload", p.mean_interarrival);
    r.read(w, "threshold", "workload", p.threshold);
    Duration deadline{0};
    if (r.read_ms(w, "deadline_ms", "workload", deadline)) {
      p.deadline = deadline;
    }
    std::vector<std::string> services;
    if (r.read(w, "services", "workload", services)) {
      for (const auto& s : services) {
        p.services.emplace_back(s);
      }
    }
    if (const auto tasks = w["tasks"]) {
      if (!tasks.IsSequence()) {
        r.error("workload.tasks", tasks, "expected a list");
      }
      else {
        for (std::size_t i = 0; i < tasks.size(); ++i) {
          const std::string path = fmt::format("workload.tasks[{}]", i);
          const YAML::Node tn = tasks[i];
          r.check_keys(tn, path, {"at_ms", "device", "service", "cluster", "threshold"});
          if (!tn.IsMap()) {
            continue;
          }
          ExplicitTask et;
          r.read_ms(tn, "at_ms", path, et.at);
          r.read(tn, "device", path, et.device);
          if (tn["service"]) {
            et.service = read_name(r, tn, "service", path);
          }
          r.read(tn, "cluster", path, et.cluster);
          r.read_optional(tn, "threshold", path, et.threshold);
          c.explicit_tasks.push_back(std::move(et));
        }
      }
    }
  }

  if (const auto f = root["forwarder"]) {
    r.check_keys(f, "forwarder", {"cs_capacity", "pit_lifetime_ms", "fib_delay_us", "rfib_delay_us"});
    r.read(f, "cs_capacity", "forwarder", c.forwarder.cs_capacity);
    r.read_ms(f, "pit_lifetime_ms", "forwarder", c.forwarder.pit_lifetime);
    r.read_us_range(f, "fib_delay_us", "forwarder", c.forwarder.delays.fib_min,
                    c.forwarder.delays.fib_max);
    r.read_us_range(f, "rfib_delay_us", "forwarder", c.forwarder.delays.rfib_min,
                    c.forwarder.delays.rfib_max);
  }

  if (const auto e = root["edge"]) {
    r.check_keys(e, "edge",
                 {"store_capacity", "execution_ms", "nominal_execution_ms", "ewma_alpha",
                  "search_delay_ms"});
    r.read(e, "store_capacity", "edge", c.edge.store_capacity);
    if (const auto ex = e["execution_ms"]) {
      try {
        auto v = ex.as<std::vector<double>>();
        if (v.size() != 2 || v[0] < 0 || v[1] < 0) {
          throw YAML::Exception(YAML::Mark::null_mark(), "range");
        }
        c.edge.execution.min = from_ms(v[0]);
        c.edge.execution.max = from_ms(v[1]);
        c.edge.execution.nominal = from_ms((v[0] + v[1]) / 2.0);
      }
      catch (const YAML::Exception&) {
        r.error("edge.execution_ms", ex, "expected [min, max] milliseconds");
      }
    }
    r.read_ms(e, "nominal_execution_ms", "edge", c.edge.execution.nominal);
    r.read(e, "ewma_alpha", "edge", c.edge.ewma_alpha);
    Duration search{0};
    if (r.read_ms(e, "search_delay_ms", "edge", search)) {
      c.edge.search_delay = search;
    }
  }

  if (const auto d = root["device"]) {
    r.check_keys(d, "device",
                 {"cs_capacity", "hashing_delay_ms", "interest_timeout_ms", "max_retransmissions"});
    r.read(d, "cs_capacity", "device", c.device.cs_capacity);
    Duration hashing{0};
    if (r.read_ms(d, "hashing_delay_ms", "device", hashing)) {
      c.device.hashing_delay = hashing;
    }
    r.read_ms(d, "interest_timeout_ms", "device", c.device.interest_timeout);
    r.read(d, "max_retransmissions", "device", c.device.max_retransmissions);
  }

  if (const auto o = root["offload"]) {
    r.check_keys(o, "offload", {"mode", "declared_input_bytes", "segment_bytes"});
    std::string mode;
    if (r.read(o, "mode", "offload", mode)) {
      try {
        c.offload.mode = parse_offload_mode(mode);
      }
      catch (const ConfigError& e) {
        r.error("offload.mode", o["mode"], e.what());
      }
    }
    r.read(o, "declared_input_bytes", "offload", c.offload.declared_input_bytes);
    r.read(o, "segment_bytes", "offload", c.offload.segment_bytes);
  }

  if (const auto l = root["loss"]) {
    r.check_keys(l, "loss", {"rate"});
    r.read(l, "rate", "loss", c.loss.rate);
  }

  if (const auto rb = root["rebalance"]) {
    r.check_keys(rb, "rebalance", {"enabled", "window_ms", "skew"});
    r.read(rb, "enabled", "rebalance", c.rebalance.enabled);
    r.read_ms(rb, "window_ms", "rebalance", c.rebalance.window);
    r.read(rb, "skew", "rebalance", c.rebalance.skew);
  }

  if (const auto rf = root["rfib"]) {
    parse_rfib(r, rf, c);
  }

  if (diags.empty()) {
    for (auto d : validate_config(c)) {
      if (d.line == 0) {
        d.line = r.line_of(d.path);
      }
      diags.push_back(std::move(d));
    }
  }
  if (!diags.empty()) {
    throw ConfigDiagnostics(std::move(diags), source);
  }
  return c;
}

SimConfig
load_config(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::vector<Diagnostic>
validate_config(const SimConfig& c)
{
  std::vector<Diagnostic> d;
  auto add = [&](std::string path, std::string msg) { d.push_back({std::move(path), 0, std::move(msg)}); };

  try {
    c.hash.validate();
  }
  catch (const ConfigError& e) {
    add("hash", e.what());
    return d;
  }
  if (c.probe_radius > c.hash.bits_per_table) {
    add("hash.probe_radius", "probe radius exceeds bits_per_table");
  }

  if (c.services.empty()) {
    add("services", "at least one service is required");
  }
  std::set<Name> names;
  for (std::size_t i = 0; i < c.services.size(); ++i) {
    const auto& s = c.services[i];
    if (s.name.empty()) {
      add(fmt::format("services[{}].name", i), "service name is empty");
    }
    if (!names.insert(s.name).second) {
      add(fmt::format("services[{}].name", i), "duplicate service " + s.name.to_uri());
    }
  }

  if (c.topology.generated) {
    const auto& p = c.topology.params;
    if (p.attachment == 0) {
      add("topology.attachment", "must be at least 1");
    }
    if (p.routers < p.attachment + 1) {
      add("topology.routers", fmt::format("need at least {} routers", p.attachment + 1));
    }
    if (p.ens == 0) {
      add("topology.ens", "at least one EN is required");
    }
    if (p.ens > p.routers) {
      add("topology.ens", "more ENs than routers");
    }
  }
  if (!d.empty()) {
    return d;
  }

  Topology topo;
  try {
    topo = build_topology(c);
  }
  catch (const ConfigError& e) {
    add("topology", e.what());
    return d;
  }
  if (topo.en_nodes().empty()) {
    add("topology", "no node hosts an EN");
  }
  std::set<Name> en_prefixes;
  for (auto i : topo.en_nodes()) {
    if (!en_prefixes.insert(*topo.nodes[i].en_prefix).second) {
      add("topology", "duplicate EN prefix " + topo.nodes[i].en_prefix->to_uri());
    }
  }

  for (std::size_t i = 0; i < c.services.size(); ++i) {
    const auto& s = c.services[i];
    for (const auto& en : s.ens) {
      if (en_prefixes.count(en) == 0) {
        add(fmt::format("services[{}].ens", i), "unknown EN " + en.to_uri());
      }
    }
    if (s.reuse) {
      const std::size_t n = s.ens.empty() ? en_prefixes.size() : s.ens.size();
      if ((std::uint64_t{1} << c.hash.bits_per_table) < n) {
        add(fmt::format("services[{}]", i), "fewer buckets than offering ENs");
      }
    }
  }

  for (const auto& [service, entries] : c.explicit_rfib) {
    const std::string path = "rfib";
    auto it = std::find_if(c.services.begin(), c.services.end(),
                           [&](const auto& s) { return s.name == service; });
    if (it == c.services.end()) {
      add(path, "rFIB for undeclared service " + service.to_uri());
      continue;
    }
    try {
      validate_partition(entries);
    }
    catch (const ConfigError& e) {
      add(path, service.to_uri() + ": " + e.what());
      continue;
    }
    for (const auto& e : entries) {
      if (e.bucket_ranges.size() != c.hash.num_tables) {
        add(path, service.to_uri() + ": " + e.en_prefix.to_uri() + " needs one range per table");
      }
      if (e.bits_per_table != c.hash.bits_per_table ||
          e.index_size_bytes != c.hash.index_size_bytes) {
        add(path, service.to_uri() + ": widths differ from the hash family");
      }
      const bool offers = it->ens.empty() ? en_prefixes.count(e.en_prefix) > 0
                                          : std::find(it->ens.begin(), it->ens.end(),
                                                      e.en_prefix) != it->ens.end();
      if (!offers) {
        add(path, service.to_uri() + ": " + e.en_prefix.to_uri() + " does not offer the service");
      }
    }
  }

  const auto& w = c.workload;
  if (!(w.threshold >= -1.0 && w.threshold <= 1.0)) {
    add("workload.threshold", "must be in [-1, 1]");
  }
  if (w.mean_interarrival <= Duration{0}) {
    add("workload.mean_interarrival_ms", "must be positive");
  }
  if (w.sigma && (*w.sigma < 0 || !std::isfinite(*w.sigma))) {
    add("workload.sigma", "must be finite and non-negative");
  }
  if (w.hot_fraction && (*w.hot_fraction < 0 || *w.hot_fraction > 1)) {
    add("workload.hot_fraction", "must be in [0, 1]");
  }
  if (w.num_clusters && *w.num_clusters == 0) {
    add("workload.num_clusters", "must be at least 1");
  }
  for (const auto& s : w.services) {
    if (names.count(s) == 0) {
      add("workload.services", "undeclared service " + s.to_uri());
    }
  }
  if (w.count > 0 && topo.device_nodes().empty() && c.explicit_tasks.empty()) {
    add("topology", "the workload needs at least one device");
  }
  for (std::size_t i = 0; i < c.explicit_tasks.size(); ++i) {
    const auto& t = c.explicit_tasks[i];
    auto node = topo.find(t.device);
    if (!node || topo.nodes[*node].kind != NodeKind::Device) {
      add(fmt::format("workload.tasks[{}].device", i), "unknown device '" + t.device + "'");
    }
    if (!t.service.empty() && names.count(t.service) == 0) {
      add(fmt::format("workload.tasks[{}].service", i), "undeclared service " + t.service.to_uri());
    }
  }

  try {
    c.forwarder.delays.validate();
  }
  catch (const ConfigError& e) {
    add("forwarder", e.what());
  }
  if (c.forwarder.pit_lifetime <= Duration{0}) {
    add("forwarder.pit_lifetime_ms", "must be positive");
  }
  if (c.edge.store_capacity == 0) {
    add("edge.store_capacity", "must be positive");
  }
  if (c.edge.execution.min > c.edge.execution.max) {
    add("edge.execution_ms", "min exceeds max");
  }
  if (!(c.edge.ewma_alpha > 0.0 && c.edge.ewma_alpha <= 1.0)) {
    add("edge.ewma_alpha", "must be in (0, 1]");
  }
  if (c.offload.segment_bytes == 0) {
    add("offload.segment_bytes", "must be positive");
  }
  if (c.device.interest_timeout <= Duration{0}) {
    add("device.interest_timeout_ms", "must be positive");
  }
  if (!(c.loss.rate >= 0.0 && c.loss.rate < 1.0)) {
    add("loss.rate", "must be in [0, 1)");
  }
  if (c.rebalance.window <= Duration{0}) {
    add("rebalance.window_ms", "must be positive");
  }
  if (!(c.rebalance.skew >= 1.0)) {
    add("rebalance.skew", "must be at least 1");
  }
  return d;
}

const std::vector<std::string>&
sweepable_keys()
{
  static const std::vector<std::string> keys{
    "similarity_threshold", "num_tables",   "bits_per_table", "probe_radius",
    "en_capacity",          "cs_capacity",  "correlation",    "sigma",
    "workload_count",       "offload_mode", "rebalance_skew", "loss_rate",
    "routers",
  };
  return keys;
}

namespace {

template<typename T>
T
parse_number(const std::string& key, const std::string& value)
{
  std::istringstream in(value);
  T out{};
  in >> out;
  if (in.fail() || !in.eof()) {
    throw ConfigError(fmt::format("cannot parse '{}' for {}", value, key));
  }
  return out;
}

} // namespace

void
set_parameter(SimConfig& c, const std::string& key, const std::string& value)
{
  if (key == "similarity_threshold") {
    c.workload.threshold = parse_number<double>(key, value);
  }
  else if (key == "num_tables") {
    c.hash.num_tables = parse_number<std::uint32_t>(key, value);
  }
  else if (key == "bits_per_table") {
    c.hash.bits_per_table = parse_number<std::uint32_t>(key, value);
    c.hash.index_size_bytes = index_size_for_bits(c.hash.bits_per_table);
  }
  else if (key == "probe_radius") {
    c.probe_radius = parse_number<std::uint32_t>(key, value);
  }
  else if (key == "en_capacity") {
    c.edge.store_capacity = parse_number<std::size_t>(key, value);
  }
  else if (key == "cs_capacity") {
    c.forwarder.cs_capacity = parse_number<std::size_t>(key, value);
  }
  else if (key == "correlation") {
    c.workload.correlation = parse_correlation(value);
  }
  else if (key == "sigma") {
    c.workload.sigma = parse_number<double>(key, value);
  }
  else if (key == "workload_count") {
    c.workload.count = parse_number<std::size_t>(key, value);
  }
  else if (key == "offload_mode") {
    c.offload.mode = parse_offload_mode(value);
  }
  else if (key == "rebalance_skew") {
    c.rebalance.skew = parse_number<double>(key, value);
    c.rebalance.enabled = true;
  }
  else if (key == "loss_rate") {
    c.loss.rate = parse_number<double>(key, value);
  }
  else if (key == "routers") {
    c.topology.params.routers = parse_number<std::size_t>(key, value);
  }
  else {
    std::string known;
    for (const auto& k : sweepable_keys()) {
      known += (known.empty() ? "" : ", ") + k;
    }
    throw ConfigError("'" + key + "' is not sweepable (known: " + known + ")");
  }
}

} // namespace reservoir
