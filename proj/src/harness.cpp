#include "objstore/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "objstore/workloads.hpp"

namespace objstore::harness {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(std::uint64_t v) { return std::to_string(v); }

// Cells are plain tokens in practice; quote defensively anyway.
std::string cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  q += '"';
  return q;
}

PrefetchPriority parsePriority(const std::string& s) {
  if (s == "high") return PrefetchPriority::High;
  if (s == "low_bfs") return PrefetchPriority::LowBfs;
  if (s == "low_dfs") return PrefetchPriority::LowDfs;
  throw std::invalid_argument("unknown prefetch priority: " + s);
}

MovementContext parseContext(const std::string& s) {
  if (s == "single") return MovementContext::Single;
  if (s == "segment") return MovementContext::Segment;
  throw std::invalid_argument("unknown movement context: " + s);
}

} // namespace

RunConfig RunConfig::defaults() {
  RunConfig c;
  c.kv_ = {
      {"workload", "btree"},
      {"servers", "2"},
      {"clients", "1"},
      {"cache_bytes", "3000000"},
      {"strategy", "simple_lru"},
      {"prefetch_priority", "high"},
      {"segment_bytes", "50000"},
      {"directory_entries", "50"},
      {"latency_ticks", "1350"},
      {"per_byte_cost", "0.45"},
      {"recover_scale", "15"},
      {"recover_hi", "0.25"},
      {"recover_lo", "0.125"},
      {"return_buffer", "500000"},
      {"seed", "1"},
      {"btree.nodes", "500"},
      {"btree.searches", "200"},
      {"btree.fill", "40"},
      {"btree.width", "1"},
      {"btree.prefetch_depth", "0"},
      {"btree.context", "single"},
      {"nbody.particles", "48"},
      {"nbody.steps", "3"},
      {"nbody.fill", "0"},
      {"nbody.width", "1"},
      {"nbody.prefetch_depth", "0"},
      {"nbody.context", "single"},
      {"oct.particles", "64"},
      {"oct.theta", "0.5"},
      {"oct.fill", "0"},
      {"oct.width", "1"},
      {"oct.prefetch_depth", "0"},
      {"oct.context", "single"},
      {"oct.force_samples", "10"},
      {"pluck.elements", "64"},
      {"pluck.steps", "24"},
      {"pluck.fill", "40"},
      {"pluck.width", "1"},
      {"pluck.prefetch_depth", "0"},
      {"pluck.context", "single"},
      {"pluck.spring_k", "0.25"},
      {"pluck.pluck_at", "-1"},
      {"pluck.height", "1"},
  };
  return c;
}

RunConfig RunConfig::fromFile(const std::string& path) {
  RunConfig c = defaults();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key=value");
    c.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return c;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw std::invalid_argument("unknown configuration key: " + key);
  it->second = value;
}

void RunConfig::setPair(const std::string& keyEqValue) {
  auto eq = keyEqValue.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("expected key=value, got: " + keyEqValue);
  set(trim(keyEqValue.substr(0, eq)), trim(keyEqValue.substr(eq + 1)));
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw std::invalid_argument("unknown configuration key: " + key);
  return it->second;
}

long long RunConfig::getInt(const std::string& key) const {
  const std::string& v = get(key);
  std::size_t pos = 0;
  long long r = std::stoll(v, &pos);
  if (pos != v.size()) throw std::invalid_argument(key + ": not an integer: " + v);
  return r;
}

double RunConfig::getDouble(const std::string& key) const {
  const std::string& v = get(key);
  std::size_t pos = 0;
  double r = std::stod(v, &pos);
  if (pos != v.size()) throw std::invalid_argument(key + ": not a number: " + v);
  return r;
}

SimConfig RunConfig::simConfig() const {
  SimConfig s;
  s.numServers = int(getInt("servers"));
  s.numClients = int(getInt("clients"));
  s.fabric.latencyTicks = Tick(getInt("latency_ticks"));
  s.fabric.perByteCost = getDouble("per_byte_cost");
  s.storage.segmentDataBytes = std::uint32_t(getInt("segment_bytes"));
  s.storage.directoryEntries = std::uint32_t(getInt("directory_entries"));
  s.prefetchPriority = parsePriority(get("prefetch_priority"));
  s.cacheBytes = std::uint64_t(getInt("cache_bytes"));
  auto strat = parseStrategy(get("strategy"));
  if (!strat) throw std::invalid_argument("unknown strategy: " + get("strategy"));
  s.strategy = *strat;
  s.recoverScale = getDouble("recover_scale");
  s.recoverHiFrac = getDouble("recover_hi");
  s.recoverLoFrac = getDouble("recover_lo");
  s.returnBufferBytes = std::size_t(getInt("return_buffer"));
  return s;
}

std::vector<ClientBody> RunConfig::clientBodies() const {
  int clients = int(getInt("clients"));
  std::uint64_t seed = std::uint64_t(getInt("seed"));
  const std::string& w = get("workload");
  ClientBody body;
  if (w == "btree") {
    workloads::BtreeParams p;
    p.nodes = int(getInt("btree.nodes"));
    p.searches = int(getInt("btree.searches"));
    p.fill = std::uint32_t(getInt("btree.fill"));
    p.width = int(getInt("btree.width"));
    p.prefetchDepth = int(getInt("btree.prefetch_depth"));
    p.context = parseContext(get("btree.context"));
    p.seed = seed;
    body = workloads::btreeBody(p);
  } else if (w == "nbody2") {
    workloads::Nbody2Params p;
    p.particles = int(getInt("nbody.particles"));
    p.steps = int(getInt("nbody.steps"));
    p.fill = std::uint32_t(getInt("nbody.fill"));
    p.width = int(getInt("nbody.width"));
    p.prefetchDepth = int(getInt("nbody.prefetch_depth"));
    p.context = parseContext(get("nbody.context"));
    p.seed = seed;
    body = workloads::nbody2Body(p);
  } else if (w == "oct") {
    workloads::OctParams p;
    p.particles = int(getInt("oct.particles"));
    p.theta = getDouble("oct.theta");
    p.fill = std::uint32_t(getInt("oct.fill"));
    p.width = int(getInt("oct.width"));
    p.prefetchDepth = int(getInt("oct.prefetch_depth"));
    p.context = parseContext(get("oct.context"));
    p.clients = clients;
    p.forceSamples = int(getInt("oct.force_samples"));
    p.seed = seed;
    body = workloads::octBody(p);
  } else if (w == "pluck") {
    workloads::PluckParams p;
    p.elements = int(getInt("pluck.elements"));
    p.steps = int(getInt("pluck.steps"));
    p.fill = std::uint32_t(getInt("pluck.fill"));
    p.clients = clients;
    p.width = int(getInt("pluck.width"));
    p.prefetchDepth = int(getInt("pluck.prefetch_depth"));
    p.context = parseContext(get("pluck.context"));
    p.springK = getDouble("pluck.spring_k");
    p.pluckAt = int(getInt("pluck.pluck_at"));
    p.height = getDouble("pluck.height");
    p.seed = seed;
    body = workloads::pluckBody(p);
  } else {
    throw std::invalid_argument("unknown workload: " + w);
  }
  return std::vector<ClientBody>(std::size_t(clients), body);
}

void Table::append(const Table& other) {
  if (header.empty()) {
    *this = other;
    return;
  }
  if (header != other.header)
    throw std::runtime_error("cannot combine runs with different result columns");
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
}

std::string Table::csv() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out << ',';
    out << cell(header[i]);
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << cell(row[i]);
    }
    out << '\n';
  }
  return out.str();
}

Table runOnce(const RunConfig& cfg) {
  SimResult res = runSim(cfg.simConfig(), cfg.clientBodies());

  std::set<std::string> metricKeys;
  for (const auto& c : res.clients)
    for (const auto& [k, v] : c.metrics) metricKeys.insert(k);

  Table t;
  for (const auto& [k, v] : cfg.entries()) t.header.push_back(k);
  t.header.push_back("actor");
  for (const auto& c : StatsRecord::columnNames()) t.header.push_back(c);
  t.header.push_back("accessedBytes");
  t.header.push_back("elapsedTicks");
  for (const auto& k : metricKeys) t.header.push_back(k);

  auto statsCells = [](const StatsRecord& s) {
    std::vector<std::string> v;
    const OpStat* ops[] = {&s.fetch,       &s.createObject,    &s.createGroup,
                           &s.spaceRecovery, &s.rotSearch,     &s.incomingMessage,
                           &s.wait,        &s.signal,          &s.synchronise};
    for (const OpStat* o : ops) {
      v.push_back(fmt(o->count));
      v.push_back(fmt(o->totalTicks));
      v.push_back(fmt(std::uint64_t(o->minTicks)));
      v.push_back(fmt(std::uint64_t(o->maxTicks)));
    }
    for (std::uint64_t c : {s.messagesReceived, s.idleTicks, s.replicasDiscardedClean,
                            s.replicasDiscardedDirty, s.prefetchedAccepted,
                            s.prefetchedUnused, s.executionTicks})
      v.push_back(fmt(c));
    return v;
  };

  auto emit = [&](const std::string& actor, const StatsRecord& s, std::uint64_t accessed,
                  const std::map<std::string, double>* metrics) {
    std::vector<std::string> row;
    for (const auto& [k, v] : cfg.entries()) row.push_back(v);
    row.push_back(actor);
    for (auto& c : statsCells(s)) row.push_back(std::move(c));
    row.push_back(fmt(accessed));
    row.push_back(fmt(std::uint64_t(res.elapsedTicks)));
    for (const auto& k : metricKeys) {
      if (metrics) {
        auto it = metrics->find(k);
        row.push_back(it == metrics->end() ? std::string() : fmt(it->second));
      } else {
        row.push_back(std::string());
      }
    }
    t.rows.push_back(std::move(row));
  };

  for (std::size_t r = 0; r < res.serverStats.size(); ++r)
    emit("server" + std::to_string(r), res.serverStats[r], 0, nullptr);
  for (std::size_t c = 0; c < res.clients.size(); ++c)
    emit("client" + std::to_string(c), res.clients[c].stats, res.clients[c].accessedBytes,
         &res.clients[c].metrics);
  return t;
}

Table sweep(const RunConfig& cfg, const std::string& axis,
            const std::vector<std::string>& values) {
  if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
  Table all;
  for (const auto& v : values) {
    RunConfig c = cfg;
    c.set(axis, v);
    all.append(runOnce(c));
  }
  return all;
}

} // namespace objstore::harness
