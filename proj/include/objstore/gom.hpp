#pragma once

#include <deque>
#include <set>

#include "objstore/fabric.hpp"
#include "objstore/protocol.hpp"
#include "objstore/stats.hpp"
#include "objstore/storage.hpp"

namespace objstore {

// Simulated processing charges, in ticks (1 tick = 1 microsecond).
struct ProcessingCosts {
  Tick serverMessage = 600;      // server handling of one incoming message
  Tick clientMessage = 100;      // client handling of one incoming message
  Tick rotSearch = 20;           // one resident-table lookup
  Tick recoveryBase = 200;       // fixed cost of a space-recovery pass
  Tick recoveryPerReplica = 10;  // per replica discarded or returned
};

enum class PrefetchPriority { High, LowBfs, LowDfs };

const char* prefetchPriorityName(PrefetchPriority p);

// The global object manager: one per server process. Owns the master copies
// and answers the whole client protocol. Purely reactive; the only
// self-initiated work is draining the low-priority prefetch queue.
class Gom : public ServerHandler {
public:
  Gom(int rank, int numServers, int numClients, StorageConfig storageCfg,
      ProcessingCosts costs, PrefetchPriority prefetch, int mainServer = 0);

  void onMessage(ActorContext& ctx, Envelope env) override;
  bool idleWork(ActorContext& ctx) override;

  bool terminated() const { return terminated_; }
  const StatsRecord& stats() const { return stats_; }
  ServerStorage& storage() { return store_; }

private:
  struct QueuedPrefetch {
    msg::PrefetchReq req;
  };

  void handleCreateGroup(ActorContext& ctx, const Envelope& env);
  void handleCreateObject(ActorContext& ctx, const Envelope& env);
  void handleFetch(ActorContext& ctx, const Envelope& env);
  void handleReturnObjects(ActorContext& ctx, const Envelope& env);
  void handleReturnSegment(ActorContext& ctx, const Envelope& env);
  void handleDiscardNotice(const Envelope& env);
  void handleWait(ActorContext& ctx, const Envelope& env);
  void handleSignal(ActorContext& ctx, const Envelope& env);
  void handleSync(ActorContext& ctx);
  void handleClose(ActorContext& ctx, const Envelope& env);
  void handlePrefetchReq(ActorContext& ctx, const Envelope& env);

  void sendCreateReply(ActorContext& ctx, int client, Segment& seg, Oid oid,
                       std::uint32_t offset, const GroupDescriptor& g);
  void servePrefetch(ActorContext& ctx, const msg::PrefetchReq& req);
  void generatePrefetch(ActorContext& ctx, const Segment& seg,
                        const DirectoryEntry& de, int client,
                        std::uint32_t remainingDepth);
  void grantNext(ActorContext& ctx, Segment& seg, UniqueId semId);

  int groupRing(const GroupDescriptor& g, int position) const;

  int rank_;
  int numServers_;
  int numClients_;
  int mainServer_;
  ProcessingCosts costs_;
  PrefetchPriority prefetchPriority_;
  ServerStorage store_;
  NamedObjectList names_;                     // main server only
  std::map<GroupId, int> nomineeCursor_;      // base server only, cyclic nomination
  std::deque<QueuedPrefetch> prefetchQueue_;  // served one per idle poll
  int syncCount_ = 0;
  std::set<int> closedClients_;
  bool terminated_ = false;
  StatsRecord stats_;
};

} // namespace objstore
