#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "objstore/fabric.hpp"
#include "objstore/gom.hpp"
#include "objstore/protocol.hpp"
#include "objstore/rot.hpp"
#include "objstore/stats.hpp"
#include "objstore/storage.hpp"

namespace objstore {

enum class RecoveryStrategy { Dump, SimpleLru, Classified };

const char* strategyName(RecoveryStrategy s);
std::optional<RecoveryStrategy> parseStrategy(const std::string& s);

// A segment replica in client memory. Wrappers of contained objects point
// straight into image.data; entries[i] belongs to image.directory[i].
struct LocalSegment {
  SegmentImage image;
  std::vector<RotEntry*> entries;
  int dirtyCount = 0;   // contained entries currently dirty
  int refTotal = 0;     // sum of contained entries' reference counts
  int protectTotal = 0; // sum of contained entries' protect counts
  bool marked = false;  // scratch flag for one recovery pass
};

struct LomConfig {
  std::uint64_t cacheBytes = 3'000'000;
  RecoveryStrategy strategy = RecoveryStrategy::SimpleLru;
  // Recovery frees max(x, min(hi*T, max(lo*T, scale*x))) for a request of x.
  double recoverScale = 15.0;
  double recoverHiFrac = 0.25;
  double recoverLoFrac = 0.125;
  std::size_t returnBufferBytes = 500'000;
  StorageConfig storage; // segment geometry, for fetch reservations
  ProcessingCosts costs;
  int mainServer = 0;
};

// Thrown when space recovery cannot free enough for the current operation.
struct CacheStarvation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// How much free space a recovery pass aims for when `request` bytes are
// needed: at least the request, at most the whole cache, otherwise the scaled
// request clamped between the lo and hi fractions of the cache.
std::uint64_t recoveryTarget(const LomConfig& cfg, std::uint64_t request);

// The local object manager: one per client. Owns the resident object table,
// the cache budget, and the client half of the protocol. All public calls
// run on the client's fiber and may block in the fabric.
class Lom {
public:
  Lom(ActorContext& ctx, LomConfig cfg);
  ~Lom();

  Lom(const Lom&) = delete;
  Lom& operator=(const Lom&) = delete;

  // --- lifecycle -----------------------------------------------------------
  void close(); // dump the cache, drain receipts, then notify every server

  // --- groups and objects --------------------------------------------------
  GroupId createGroup(MovementContext context, int width, int prefetchDepth);
  RotEntry* createObject(GroupId gid, std::uint32_t dataSize, std::uint32_t refCount);

  // Lookup or create the entry for an oid; never fetches.
  RotEntry* handleOf(Oid oid);
  // Fetch on miss; on return the wrapper is resident.
  void ensureResident(RotEntry* e);

  // --- data access (data part only; reference part goes through slots) -----
  void read(RotEntry* e, std::uint32_t offset, void* out, std::uint32_t n);
  void write(RotEntry* e, std::uint32_t offset, const void* in, std::uint32_t n);

  // Reading a slot swizzles it in place and returns the target entry
  // (nullptr for a null reference). The target is not fetched.
  RotEntry* refTarget(RotEntry* container, std::uint32_t slot);
  // Stores target (or null) into the slot, swizzled, and marks the container
  // dirty. Reference counts of old and new targets are adjusted.
  void setRefTarget(RotEntry* container, std::uint32_t slot, RotEntry* target);

  // Transient reference-count and recovery-protection management.
  void addRef(RotEntry* e, int delta);
  void protect(RotEntry* e);
  void unprotect(RotEntry* e);

  // --- coherence -----------------------------------------------------------
  void wait(RotEntry* e);
  void signal(RotEntry* e);
  void synchronise();

  // --- naming (registration is fire-and-forget, lookup blocks) -------------
  void nameObject(const std::string& name, Oid oid);
  Oid objectNamed(const std::string& name);

  // --- space recovery ------------------------------------------------------
  void setStrategy(RecoveryStrategy s) { cfg_.strategy = s; }
  RecoveryStrategy strategy() const { return cfg_.strategy; }
  // Evict every unprotected replica now, returning updates to their masters.
  void dumpCache() {
    drainDelivered();
    recoverWith(RecoveryStrategy::Dump, cfg_.cacheBytes);
  }
  std::uint64_t freeBytes() const { return cfg_.cacheBytes - usedBytes_; }
  std::uint64_t usedBytes() const { return usedBytes_; }
  std::uint64_t targetBytes(std::uint64_t request) const;

  // --- instrumentation -----------------------------------------------------
  StatsRecord& stats() { return stats_; }
  std::uint64_t accessedBytes() const { return accessedBytes_; }
  ResidentObjectTable& rot() { return rot_; }
  ActorContext& ctx() { return ctx_; }
  const LomConfig& config() const { return cfg_; }
  const GroupDescriptor* groupInfo(GroupId gid);

private:
  struct Plan {
    std::vector<RotEntry*> objects;
    std::vector<LocalSegment*> segments;
    std::vector<RotEntry*> deletable;
    std::uint64_t projectedFree = 0;
  };

  static std::uint32_t segKey(Location loc) {
    return (std::uint32_t(loc.group) << 16) | loc.segment;
  }
  std::uint64_t segmentReserveBytes() const;

  void handleIncoming(const Envelope& env);
  template <class Pred>
  void pumpUntil(Pred done, const std::string& why) {
    while (!done()) handleIncoming(ctx_.receive(why));
  }
  // Process everything already delivered by the client's clock (prefetched
  // replicas, receipts) without advancing time. Call only between operations,
  // never mid-install.
  void drainDelivered();

  void ensureGroupKnown(GroupId gid);
  int ownerOf(Oid oid);

  void touchAccess(RotEntry* e);
  void markDirty(RotEntry* e);
  void clearDirty(RotEntry* e);

  // Replica installation. Both may run space recovery for budget.
  void installObject(const msg::ReplicaObject& m, bool viaPrefetch);
  LocalSegment* installSegment(SegmentImage image);
  void mirrorCreate(LocalSegment& ls, const msg::CreateReply& m, std::uint32_t dataSize,
                    std::uint32_t refCount);
  RotEntry* attachWrapper(LocalSegment& ls, std::size_t dirIndex);
  void repointWrappers(LocalSegment& ls);

  // Slot plumbing. Unswizzling writes the oid form back into the replica.
  void unswizzleSlots(RotEntry* e);
  std::vector<std::uint8_t> normalizedBytes(const RotEntry* e) const;
  SegmentImage normalizedImage(const LocalSegment& ls) const;

  void applyReceipt(const msg::Receipt& m, int fromServer);
  bool receiptsOutstanding() const;
  bool receiptPendingFor(UniqueId id) const { return pendingOids_.count(id) > 0; }

  // Space recovery.
  void ensureBudget(std::uint64_t need);
  void recoverWith(RecoveryStrategy strategy, std::uint64_t targetFree);
  void planSimpleLru(Plan& plan, std::uint64_t targetFree);
  void planClassified(Plan& plan, std::uint64_t targetFree);
  bool planEntry(Plan& plan, RotEntry* e); // shared victim/deletable triage
  std::size_t executePlan(Plan& plan);
  void flushDirtyObject(RotEntry* e, std::map<int, msg::ReturnObjects>& batches,
                        std::map<int, std::vector<Oid>>& batchOids,
                        std::map<int, std::size_t>& batchBytes);
  void sendObjectBatch(int server, msg::ReturnObjects& batch, std::vector<Oid>& oids);
  void dropWrapper(RotEntry* e); // accounting + prefetched-unused bookkeeping
  void unswizzleRetained();

  ActorContext& ctx_;
  LomConfig cfg_;
  GroupTable groups_;
  ResidentObjectTable rot_;
  std::map<std::uint32_t, LocalSegment> segments_;
  std::uint64_t usedBytes_ = 0;

  StatsRecord stats_;
  std::uint64_t accessedBytes_ = 0;
  std::set<UniqueId> accessedIds_;

  // Blocking-operation rendezvous state.
  RotEntry* fetchPending_ = nullptr;
  bool demandAnswered_ = false; // current fetch consumed its own reply
  // Fetches satisfied by a racing prefetched replica leave their demand reply
  // in flight; one token per abandoned fetch lets the stray reply be dropped.
  std::multiset<UniqueId> forsakenFetches_;
  std::optional<msg::CreateReply> createReply_;
  std::optional<GroupId> groupReady_;
  std::uint64_t groupToken_ = 0;
  std::uint64_t nextToken_ = 1;
  std::optional<Oid> grantedOid_;
  std::optional<Oid> namedReply_;
  int syncPending_ = 0;
  std::set<UniqueId> heldSemaphores_;

  // Outstanding return receipts, FIFO per server.
  std::map<int, std::deque<std::vector<Oid>>> pendingObjectReceipts_;
  std::map<int, std::deque<Location>> pendingSegmentReceipts_;
  std::multiset<UniqueId> pendingOids_;

  bool closed_ = false;
};

} // namespace objstore
