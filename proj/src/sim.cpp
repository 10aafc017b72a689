#include "objstore/sim.hpp"

#include <memory>
#include <stdexcept>

namespace objstore {

LomConfig SimConfig::lomConfig() const {
  LomConfig lc;
  lc.cacheBytes = cacheBytes;
  lc.strategy = strategy;
  lc.recoverScale = recoverScale;
  lc.recoverHiFrac = recoverHiFrac;
  lc.recoverLoFrac = recoverLoFrac;
  lc.returnBufferBytes = returnBufferBytes;
  lc.storage = storage;
  lc.costs = costs;
  lc.mainServer = mainServer;
  return lc;
}

StatsRecord SimResult::clientTotals() const {
  StatsRecord total;
  for (const ClientResult& c : clients) total = total.plus(c.stats);
  return total;
}

StatsRecord SimResult::serverTotals() const {
  StatsRecord total;
  for (const StatsRecord& s : serverStats) total = total.plus(s);
  return total;
}

std::uint64_t SimResult::totalMessages() const {
  return clientTotals().messagesReceived + serverTotals().messagesReceived;
}

SimResult runSim(const SimConfig& cfg, const std::vector<ClientBody>& bodies) {
  if (int(bodies.size()) != cfg.numClients)
    throw std::invalid_argument("client body count does not match numClients");

  Fabric fabric(cfg.fabric, cfg.numServers, cfg.numClients);
  if (cfg.trace) fabric.setTrace(cfg.trace);
  std::vector<std::unique_ptr<Gom>> servers;
  servers.reserve(std::size_t(cfg.numServers));
  for (int s = 0; s < cfg.numServers; ++s) {
    servers.push_back(std::make_unique<Gom>(s, cfg.numServers, cfg.numClients, cfg.storage,
                                            cfg.costs, cfg.prefetchPriority, cfg.mainServer));
    fabric.attachServer(s, servers.back().get());
  }

  SimResult result;
  result.clients.resize(std::size_t(cfg.numClients));
  for (int c = 0; c < cfg.numClients; ++c) {
    const ClientBody& body = bodies[std::size_t(c)];
    ClientResult& out = result.clients[std::size_t(c)];
    fabric.attachClient(c, [&, c](ActorContext& ctx) {
      Space space(ctx, cfg.lomConfig());
      body(space, c, out);
      space.close();
      out.stats = space.lom().stats();
      out.accessedBytes = space.lom().accessedBytes();
    });
  }

  fabric.run();

  for (int s = 0; s < cfg.numServers; ++s) {
    result.serverStats.push_back(servers[std::size_t(s)]->stats());
    result.serverStats.back().idleTicks = fabric.serverIdleTicks(s);
    result.serverIdleTicks.push_back(fabric.serverIdleTicks(s));
    if (!servers[std::size_t(s)]->terminated())
      throw std::runtime_error("server ended without seeing every close");
  }
  for (const ClientResult& c : result.clients)
    result.elapsedTicks = std::max(result.elapsedTicks, c.stats.executionTicks);
  for (const StatsRecord& s : result.serverStats)
    result.elapsedTicks = std::max(result.elapsedTicks, s.executionTicks);
  return result;
}

} // namespace objstore
