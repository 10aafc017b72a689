#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "objstore/api.hpp"
#include "objstore/fabric.hpp"
#include "objstore/gom.hpp"
#include "objstore/lom.hpp"

namespace objstore {

// Everything needed to stand up one simulated run: the fabric, the servers,
// and the per-client cache configuration.
struct SimConfig {
  int numServers = 2;
  int numClients = 1;
  FabricConfig fabric;
  StorageConfig storage;
  ProcessingCosts costs;
  PrefetchPriority prefetchPriority = PrefetchPriority::High;
  std::uint64_t cacheBytes = 3'000'000;
  RecoveryStrategy strategy = RecoveryStrategy::SimpleLru;
  double recoverScale = 15.0;
  double recoverHiFrac = 0.25;
  double recoverLoFrac = 0.125;
  std::size_t returnBufferBytes = 500'000;
  int mainServer = 0;
  TraceSink* trace = nullptr; // optional; observes every send and delivery

  LomConfig lomConfig() const;
};

// Per-client outcome: protocol statistics plus whatever named figures the
// workload wants surfaced into the CSV.
struct ClientResult {
  StatsRecord stats;
  std::uint64_t accessedBytes = 0;
  std::map<std::string, double> metrics;
};

struct SimResult {
  std::vector<StatsRecord> serverStats;
  std::vector<Tick> serverIdleTicks;
  std::vector<ClientResult> clients;
  Tick elapsedTicks = 0; // latest actor-local completion time

  StatsRecord clientTotals() const;
  StatsRecord serverTotals() const;
  std::uint64_t totalMessages() const;
};

using ClientBody = std::function<void(Space& space, int rank, ClientResult& out)>;

// Runs the configured cluster to completion. The client list length must
// equal cfg.numClients; each body gets its own Space and must not outlive it.
SimResult runSim(const SimConfig& cfg, const std::vector<ClientBody>& bodies);

} // namespace objstore
