#include "objstore/lom.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <cstring>
#include <sstream>

namespace objstore {

namespace {

constexpr std::uint64_t kEntryOverhead = 64; // resident-table entry bookkeeping

std::uint64_t loadSlot(const std::uint8_t* p) {
  std::uint64_t v;
  std::memcpy(&v, p, 8);
  return v;
}

void storeSlot(std::uint8_t* p, std::uint64_t v) { std::memcpy(p, &v, 8); }

// Swizzled slots hold an entry pointer (aligned, so the low bit is clear);
// unswizzled slots hold oid bits, whose low bit is always set.
bool slotSwizzled(std::uint64_t bits) { return (bits & 1) == 0; }

} // namespace

const char* strategyName(RecoveryStrategy s) {
  switch (s) {
    case RecoveryStrategy::Dump: return "dump";
    case RecoveryStrategy::SimpleLru: return "simple_lru";
    case RecoveryStrategy::Classified: return "classified";
  }
  return "?";
}

std::optional<RecoveryStrategy> parseStrategy(const std::string& s) {
  if (s == "dump") return RecoveryStrategy::Dump;
  if (s == "simple_lru") return RecoveryStrategy::SimpleLru;
  if (s == "classified") return RecoveryStrategy::Classified;
  return std::nullopt;
}

Lom::Lom(ActorContext& ctx, LomConfig cfg) : ctx_(ctx), cfg_(cfg) {
  if (cfg_.cacheBytes < segmentReserveBytes())
    throw std::invalid_argument("cache smaller than one segment replica");
}

Lom::~Lom() = default;

std::uint64_t Lom::segmentReserveBytes() const {
  // Worst-case cost of installing one segment replica: full image plus an
  // entry for every directory slot.
  return 20 + 28ull * cfg_.storage.directoryEntries + cfg_.storage.segmentDataBytes +
         kEntryOverhead * cfg_.storage.directoryEntries;
}

// --- bookkeeping helpers -----------------------------------------------------

void Lom::addRef(RotEntry* e, int delta) {
  e->refCount += delta;
  if (e->refCount < 0) throw std::logic_error("reference count underflow");
  if (e->segment) e->segment->refTotal += delta;
}

void Lom::protect(RotEntry* e) {
  e->protectCount++;
  if (e->segment) e->segment->protectTotal++;
}

void Lom::unprotect(RotEntry* e) {
  if (e->protectCount <= 0) throw std::logic_error("protection underflow");
  e->protectCount--;
  if (e->segment) e->segment->protectTotal--;
}

void Lom::markDirty(RotEntry* e) {
  if (e->dirty) return;
  e->dirty = true;
  if (e->segment) e->segment->dirtyCount++;
}

void Lom::clearDirty(RotEntry* e) {
  if (!e->dirty) return;
  e->dirty = false;
  if (e->segment) e->segment->dirtyCount--;
}

void Lom::touchAccess(RotEntry* e) {
  if (!e->wrapper) return;
  if (accessedIds_.insert(e->oid.unique()).second) accessedBytes_ += e->wrapper->extent();
}

RotEntry* Lom::handleOf(Oid oid) {
  if (oid.isNull()) throw std::logic_error("null object reference dereferenced");
  ctx_.advance(cfg_.costs.rotSearch);
  stats_.rotSearch.record(cfg_.costs.rotSearch);
  RotEntry* e = rot_.find(oid.unique());
  if (!e) {
    ensureBudget(kEntryOverhead);
    e = rot_.insert(oid);
    usedBytes_ += kEntryOverhead;
  }
  return e;
}

const GroupDescriptor* Lom::groupInfo(GroupId gid) {
  ensureGroupKnown(gid);
  return groups_.find(gid);
}

void Lom::ensureGroupKnown(GroupId gid) {
  if (groups_.find(gid)) return;
  // The descriptor was broadcast when the group was made; it just has not
  // arrived yet.
  std::ostringstream why;
  why << "descriptor of group " << gid;
  pumpUntil([&] { return groups_.find(gid) != nullptr; }, why.str());
}

int Lom::ownerOf(Oid oid) {
  ensureGroupKnown(oid.location().group);
  const GroupDescriptor* g = groups_.find(oid.location().group);
  return g->ownerRank(oid.location().segment, ctx_.numServers());
}

// --- groups and objects ------------------------------------------------------

GroupId Lom::createGroup(MovementContext context, int width, int prefetchDepth) {
  if (width < 1 || width > ctx_.numServers())
    throw std::invalid_argument("group width out of range");
  Tick t0 = ctx_.now();
  std::uint64_t token = nextToken_++;
  groupToken_ = token;
  groupReady_.reset();
  msg::CreateGroup m{context, std::uint32_t(width), std::uint32_t(prefetchDepth), token};
  ctx_.send({ActorKind::Server, cfg_.mainServer}, Tag::CreateGroup, m.encode());
  pumpUntil([&] { return groupReady_.has_value(); }, "group creation reply");
  GroupId gid = *groupReady_;
  groupReady_.reset();
  stats_.createGroup.record(ctx_.now() - t0);
  return gid;
}

RotEntry* Lom::createObject(GroupId gid, std::uint32_t dataSize, std::uint32_t refCount) {
  Tick t0 = ctx_.now();
  ensureGroupKnown(gid);
  const GroupDescriptor* g = groups_.find(gid);
  std::uint32_t extent = objectExtent(dataSize, refCount);
  if (extent == 0 || extent > cfg_.storage.segmentDataBytes)
    throw std::invalid_argument("object extent exceeds segment capacity");

  if (g->context == MovementContext::Segment)
    ensureBudget(segmentReserveBytes());
  else
    ensureBudget(extent + kEntryOverhead);

  msg::CreateObject m;
  m.gid = gid;
  m.dataSize = dataSize;
  m.refCount = refCount;
  m.requester = std::uint32_t(ctx_.self().rank);
  ctx_.send({ActorKind::Server, g->baseServer}, Tag::CreateObject, m.encode());
  createReply_.reset();
  pumpUntil([&] { return createReply_.has_value(); }, "object creation reply");
  msg::CreateReply reply = std::move(*createReply_);
  createReply_.reset();

  RotEntry* e = nullptr;
  if (g->context == MovementContext::Single) {
    e = handleOf(reply.oid);
    protect(e); // the budget check must not delete the entry it serves
    ensureBudget(extent);
    unprotect(e);
    auto w = std::make_unique<ObjectWrapper>();
    w->dataSize = dataSize;
    w->refCount = refCount;
    w->ts = reply.segTs; // object and segment stamps coincide at creation
    w->owned.assign(extent, 0);
    for (std::uint32_t i = 0; i < refCount; ++i)
      storeSlot(w->owned.data() + dataSize + 8 * i, kNullOid.bits);
    w->bytes = w->owned.data();
    e->wrapper = std::move(w);
    usedBytes_ += extent;
  } else {
    if (reply.image) installSegment(std::move(*reply.image));
    auto it = segments_.find(segKey(reply.oid.location()));
    if (it == segments_.end()) {
      // Our copy was evicted while the request was in flight; fetch brings a
      // fresh image that already contains the new object.
      e = handleOf(reply.oid);
      ensureResident(e);
    } else if (!it->second.image.find(reply.oid.unique())) {
      mirrorCreate(it->second, reply, dataSize, refCount);
      e = rot_.find(reply.oid.unique());
    } else {
      e = handleOf(reply.oid); // the attached image already carried it
    }
  }
  // Fresh objects count as updated until first returned.
  markDirty(e);
  e->wrapper->usedSinceInstall = true;
  touchAccess(e);
  stats_.createObject.record(ctx_.now() - t0);
  return e;
}

void Lom::mirrorCreate(LocalSegment& ls, const msg::CreateReply& m, std::uint32_t dataSize,
                       std::uint32_t refCount) {
  // Pin the image across the budget check; the directory entry goes into it.
  ls.protectTotal++;
  ensureBudget(28 + kEntryOverhead);
  ls.protectTotal--;
  auto it = segments_.find(segKey(m.oid.location()));
  if (it == segments_.end() || &it->second != &ls)
    throw std::logic_error("segment vanished during local creation");

  std::uint32_t extent = objectExtent(dataSize, refCount);
  if (ls.image.freeBytes < extent)
    throw std::logic_error("local image disagrees with master about free space");
  DirectoryEntry de;
  de.oid = m.oid;
  de.offset = m.offset;
  de.dataSize = dataSize;
  de.refCount = refCount;
  de.ts = m.segTs;

  auto pos = std::lower_bound(ls.image.directory.begin(), ls.image.directory.end(),
                              m.oid.unique(), [](const DirectoryEntry& d, UniqueId id) {
                                return d.oid.unique() < id;
                              });
  std::size_t idx = std::size_t(pos - ls.image.directory.begin());
  ls.image.directory.insert(pos, de);
  ls.image.freeBytes -= extent;
  ls.image.ts = m.segTs;
  usedBytes_ += 28; // directory growth in the image's wire footprint

  std::uint8_t* bytes = ls.image.data.data() + m.offset;
  std::memset(bytes, 0, extent);
  for (std::uint32_t i = 0; i < refCount; ++i) storeSlot(bytes + dataSize + 8 * i, kNullOid.bits);

  RotEntry* e = handleOf(m.oid);
  ls.entries.insert(ls.entries.begin() + std::ptrdiff_t(idx), e);
  e->segment = &ls;
  if (e->refCount) ls.refTotal += e->refCount;
  if (e->protectCount) ls.protectTotal += e->protectCount;
  auto w = std::make_unique<ObjectWrapper>();
  w->dataSize = dataSize;
  w->refCount = refCount;
  w->ts = m.segTs;
  w->bytes = bytes;
  e->wrapper = std::move(w);
}

void Lom::drainDelivered() {
  while (std::optional<Envelope> env = ctx_.tryReceive()) handleIncoming(*env);
}

void Lom::ensureResident(RotEntry* e) {
  // A prefetched copy may already be delivered but unprocessed; consume it
  // before deciding that a demand fetch is needed.
  drainDelivered();
  if (e->resident()) return;
  Tick t0 = ctx_.now();
  ensureGroupKnown(e->oid.location().group);
  const GroupDescriptor* g = groups_.find(e->oid.location().group);
  protect(e);
  // Reserve room up front so the replica never triggers recovery mid-install.
  // An object's size never changes, so a refetch can reserve exactly what the
  // last replica occupied; only a first fetch has to assume the worst case.
  if (g->context == MovementContext::Segment)
    ensureBudget(segmentReserveBytes());
  else if (e->lastExtent)
    ensureBudget(e->lastExtent);
  else
    ensureBudget(cfg_.storage.segmentDataBytes);
  fetchPending_ = e;
  demandAnswered_ = false;
  ctx_.send({ActorKind::Server, ownerOf(e->oid)}, Tag::Fetch, msg::Fetch{e->oid}.encode());
  pumpUntil([&] { return e->resident(); }, "replica of " + toString(e->oid));
  if (!demandAnswered_) forsakenFetches_.insert(e->oid.unique());
  fetchPending_ = nullptr;
  unprotect(e);
  stats_.fetch.record(ctx_.now() - t0);
}

// --- data access ---------------------------------------------------------------

void Lom::read(RotEntry* e, std::uint32_t offset, void* out, std::uint32_t n) {
  ensureResident(e);
  ObjectWrapper* w = e->wrapper.get();
  if (std::uint64_t(offset) + n > w->dataSize) throw std::out_of_range("read past data part");
  rot_.touch(e);
  w->usedSinceInstall = true;
  touchAccess(e);
  std::memcpy(out, w->bytes + offset, n);
}

void Lom::write(RotEntry* e, std::uint32_t offset, const void* in, std::uint32_t n) {
  ensureResident(e);
  ObjectWrapper* w = e->wrapper.get();
  if (std::uint64_t(offset) + n > w->dataSize) throw std::out_of_range("write past data part");
  rot_.touch(e);
  w->usedSinceInstall = true;
  touchAccess(e);
  std::memcpy(w->bytes + offset, in, n);
  markDirty(e);
}

RotEntry* Lom::refTarget(RotEntry* container, std::uint32_t slot) {
  ensureResident(container);
  ObjectWrapper* w = container->wrapper.get();
  if (slot >= w->refCount) throw std::out_of_range("reference slot out of range");
  rot_.touch(container);
  w->usedSinceInstall = true;
  touchAccess(container);
  std::uint64_t bits = loadSlot(w->refSlot(slot));
  if (slotSwizzled(bits)) return reinterpret_cast<RotEntry*>(std::uintptr_t(bits));
  Oid oid{bits};
  if (oid.isNull()) return nullptr;
  // The lookup may charge the budget for a fresh entry; recovery must not
  // take the container out from under the slot we are about to write.
  protect(container);
  RotEntry* target = handleOf(oid);
  unprotect(container);
  // Swizzle in place: a view change only, so the container stays clean.
  storeSlot(w->refSlot(slot), std::uint64_t(reinterpret_cast<std::uintptr_t>(target)));
  addRef(target, 1);
  return target;
}

void Lom::setRefTarget(RotEntry* container, std::uint32_t slot, RotEntry* target) {
  ensureResident(container);
  ObjectWrapper* w = container->wrapper.get();
  if (slot >= w->refCount) throw std::out_of_range("reference slot out of range");
  rot_.touch(container);
  w->usedSinceInstall = true;
  touchAccess(container);
  std::uint64_t bits = loadSlot(w->refSlot(slot));
  if (slotSwizzled(bits)) addRef(reinterpret_cast<RotEntry*>(std::uintptr_t(bits)), -1);
  if (target) {
    storeSlot(w->refSlot(slot), std::uint64_t(reinterpret_cast<std::uintptr_t>(target)));
    addRef(target, 1);
  } else {
    storeSlot(w->refSlot(slot), kNullOid.bits);
  }
  markDirty(container);
}

// --- replica installation ------------------------------------------------------

void Lom::installObject(const msg::ReplicaObject& m, bool viaPrefetch) {
  RotEntry* e = handleOf(m.oid);
  if (e->segment) throw std::logic_error("object replica for a segment-context object");
  if (e->wrapper) {
    ObjectWrapper* w = e->wrapper.get();
    if (m.ts <= w->ts) return; // nothing newer than what we hold
    // A pending local update supersedes any master image; it overwrites the
    // master when eventually returned.
    if (e->dirty) return;
    unswizzleSlots(e);
    if (w->extent() != m.bytes.size())
      throw std::logic_error("replica extent changed across refreshes");
    std::memcpy(w->bytes, m.bytes.data(), m.bytes.size());
    w->ts = m.ts;
    if (viaPrefetch) {
      w->prefetched = true;
      w->usedSinceInstall = false;
    }
    return;
  }
  // A fresh unreferenced entry is fair game for the recovery the budget call
  // may run; pin it until the wrapper is attached.
  protect(e);
  ensureBudget(m.bytes.size());
  unprotect(e);
  auto w = std::make_unique<ObjectWrapper>();
  w->dataSize = m.dataSize;
  w->refCount = m.refCount;
  w->ts = m.ts;
  w->owned = m.bytes;
  w->bytes = w->owned.data();
  w->prefetched = viaPrefetch;
  e->wrapper = std::move(w);
  usedBytes_ += m.bytes.size();
}

RotEntry* Lom::attachWrapper(LocalSegment& ls, std::size_t dirIndex) {
  DirectoryEntry& de = ls.image.directory[dirIndex];
  RotEntry* e = handleOf(de.oid);
  if (!e->wrapper) e->wrapper = std::make_unique<ObjectWrapper>();
  ObjectWrapper* w = e->wrapper.get();
  w->dataSize = de.dataSize;
  w->refCount = de.refCount;
  w->ts = de.ts;
  w->owned.clear();
  w->bytes = ls.image.data.data() + de.offset;
  if (e->segment != &ls) {
    if (e->segment) throw std::logic_error("object claimed by two segments");
    e->segment = &ls;
    if (e->refCount) ls.refTotal += e->refCount;
    if (e->protectCount) ls.protectTotal += e->protectCount;
  }
  return e;
}

void Lom::repointWrappers(LocalSegment& ls) {
  for (std::size_t i = 0; i < ls.image.directory.size(); ++i) {
    DirectoryEntry& de = ls.image.directory[i];
    ObjectWrapper* w = ls.entries[i]->wrapper.get();
    w->bytes = ls.image.data.data() + de.offset;
    w->ts = de.ts;
  }
}

LocalSegment* Lom::installSegment(SegmentImage image) {
  std::uint32_t key = segKey(image.loc);
  std::uint64_t wire = image.wireBytes();
  auto it = segments_.find(key);
  if (it != segments_.end()) {
    // Refresh: master content replaces ours member by member. Offsets of
    // existing objects are stable (allocation only appends), so wrappers
    // survive. A locally updated member is strictly newer than anything the
    // master can send — our update has not been returned yet — so its bytes,
    // swizzled slots and dirty flag carry over unchanged.
    LocalSegment& ls = it->second;
    std::uint64_t old = ls.image.wireBytes();
    std::uint64_t need = wire + kEntryOverhead * image.directory.size();
    if (need > old) {
      // Pin the segment across the budget check: recovery must not return
      // the very copy whose dirty members are merged below.
      ls.protectTotal++;
      ensureBudget(need - old);
      ls.protectTotal--;
    }
    if (image.directory.size() < ls.entries.size())
      throw std::logic_error("segment refresh lost members");
    for (std::size_t i = 0; i < ls.entries.size(); ++i) {
      RotEntry* e = ls.entries[i];
      const DirectoryEntry& od = ls.image.directory[i];
      DirectoryEntry& nd = image.directory[i];
      if (nd.oid.bits != od.oid.bits || nd.offset != od.offset)
        throw std::logic_error("segment member moved across refresh");
      if (e->dirty) {
        std::memcpy(image.data.data() + nd.offset, ls.image.data.data() + od.offset,
                    od.dataSize + 8ull * od.refCount);
        nd.ts = std::max(nd.ts, od.ts);
      } else {
        unswizzleSlots(e);
      }
    }
    usedBytes_ -= old;
    ls.image = std::move(image);
    usedBytes_ += wire;
    ls.entries.resize(ls.image.directory.size());
    for (std::size_t i = 0; i < ls.image.directory.size(); ++i) ls.entries[i] = attachWrapper(ls, i);
    repointWrappers(ls);
    return &ls;
  }

  ensureBudget(wire + kEntryOverhead * image.directory.size());
  LocalSegment& ls = segments_[key];
  ls.image = std::move(image);
  usedBytes_ += wire;
  ls.entries.resize(ls.image.directory.size());
  for (std::size_t i = 0; i < ls.image.directory.size(); ++i) ls.entries[i] = attachWrapper(ls, i);
  ctx_.send({ActorKind::Server, ownerOf(Oid(ls.image.loc, 1))}, Tag::AcceptSegment,
            msg::AcceptSegment{ls.image.loc}.encode());
  return &ls;
}

// --- slot normalisation ----------------------------------------------------------

void Lom::unswizzleSlots(RotEntry* e) {
  ObjectWrapper* w = e->wrapper.get();
  if (!w) return;
  for (std::uint32_t i = 0; i < w->refCount; ++i) {
    std::uint64_t bits = loadSlot(w->refSlot(i));
    if (!slotSwizzled(bits)) continue;
    RotEntry* target = reinterpret_cast<RotEntry*>(std::uintptr_t(bits));
    storeSlot(w->refSlot(i), target->oid.bits);
    addRef(target, -1);
  }
}

std::vector<std::uint8_t> Lom::normalizedBytes(const RotEntry* e) const {
  const ObjectWrapper* w = e->wrapper.get();
  std::vector<std::uint8_t> out(w->bytes, w->bytes + w->extent());
  for (std::uint32_t i = 0; i < w->refCount; ++i) {
    std::uint64_t bits = loadSlot(out.data() + w->dataSize + 8 * i);
    if (!slotSwizzled(bits)) continue;
    storeSlot(out.data() + w->dataSize + 8 * i,
              reinterpret_cast<RotEntry*>(std::uintptr_t(bits))->oid.bits);
  }
  return out;
}

SegmentImage Lom::normalizedImage(const LocalSegment& ls) const {
  SegmentImage out = ls.image;
  for (const DirectoryEntry& de : out.directory) {
    for (std::uint32_t i = 0; i < de.refCount; ++i) {
      std::uint8_t* slot = out.data.data() + de.offset + de.dataSize + 8 * i;
      std::uint64_t bits = loadSlot(slot);
      if (!slotSwizzled(bits)) continue;
      storeSlot(slot, reinterpret_cast<RotEntry*>(std::uintptr_t(bits))->oid.bits);
    }
  }
  return out;
}

// --- coherence -------------------------------------------------------------------

void Lom::wait(RotEntry* e) {
  Tick t0 = ctx_.now();
  ensureGroupKnown(e->oid.location().group);
  const GroupDescriptor* g = groups_.find(e->oid.location().group);
  protect(e);
  msg::Wait m;
  m.oid = e->oid;
  if (g->context == MovementContext::Segment) {
    auto it = segments_.find(segKey(e->oid.location()));
    if (it != segments_.end()) m.replicaTs = it->second.image.ts;
  } else if (e->wrapper) {
    m.replicaTs = e->wrapper->ts;
  }
  ctx_.send({ActorKind::Server, ownerOf(e->oid)}, Tag::Wait, m.encode());
  pumpUntil([&] { return grantedOid_ && grantedOid_->bits == e->oid.bits; },
            "semaphore grant of " + toString(e->oid));
  grantedOid_.reset();
  heldSemaphores_.insert(e->oid.unique());
  unprotect(e);
  stats_.wait.record(ctx_.now() - t0);
}

void Lom::signal(RotEntry* e) {
  Tick t0 = ctx_.now();
  if (!heldSemaphores_.count(e->oid.unique()))
    throw std::logic_error("signal on a semaphore this client does not hold");
  const GroupDescriptor* g = groups_.find(e->oid.location().group);
  int owner = ownerOf(e->oid);
  // Updates travel ahead of the signal on the same channel, so the next
  // holder is granted a current replica.
  if (g->context == MovementContext::Segment) {
    auto it = segments_.find(segKey(e->oid.location()));
    if (it != segments_.end() && it->second.dirtyCount > 0) {
      LocalSegment& ls = it->second;
      msg::ReturnSegment ret;
      ret.discard = 0;
      for (std::size_t i = 0; i < ls.entries.size(); ++i)
        if (ls.entries[i]->dirty) ret.dirty.push_back(ls.image.directory[i].oid.unique());
      ret.image = normalizedImage(ls);
      ctx_.send({ActorKind::Server, owner}, Tag::ReturnSegment, ret.encode());
      pendingSegmentReceipts_[owner].push_back(ls.image.loc);
      for (RotEntry* entry : ls.entries) clearDirty(entry);
    }
  } else if (e->dirty && e->wrapper) {
    msg::ReturnObjects ret;
    ret.objects.push_back({e->oid, normalizedBytes(e)});
    ctx_.send({ActorKind::Server, owner}, Tag::ReturnObjects, ret.encode());
    pendingObjectReceipts_[owner].push_back({e->oid});
    pendingOids_.insert(e->oid.unique());
    clearDirty(e);
  }
  ctx_.send({ActorKind::Server, owner}, Tag::Signal, msg::Signal{e->oid}.encode());
  heldSemaphores_.erase(e->oid.unique());
  stats_.signal.record(ctx_.now() - t0);
}

void Lom::synchronise() {
  Tick t0 = ctx_.now();
  syncPending_ = ctx_.numServers();
  for (int s = 0; s < ctx_.numServers(); ++s)
    ctx_.send({ActorKind::Server, s}, Tag::Sync, {});
  pumpUntil([&] { return syncPending_ == 0; }, "barrier acknowledgements");
  stats_.synchronise.record(ctx_.now() - t0);
}

// --- naming ----------------------------------------------------------------------

void Lom::nameObject(const std::string& name, Oid oid) {
  ctx_.send({ActorKind::Server, cfg_.mainServer}, Tag::Name, msg::Name{name, oid}.encode());
}

Oid Lom::objectNamed(const std::string& name) {
  namedReply_.reset();
  ctx_.send({ActorKind::Server, cfg_.mainServer}, Tag::NamedQuery,
            msg::NamedQuery{name}.encode());
  pumpUntil([&] { return namedReply_.has_value(); }, "name lookup of \"" + name + "\"");
  Oid oid = *namedReply_;
  namedReply_.reset();
  return oid;
}

// --- incoming messages -------------------------------------------------------------

void Lom::handleIncoming(const Envelope& env) {
  ctx_.advance(cfg_.costs.clientMessage);
  stats_.messagesReceived++;
  stats_.incomingMessage.record(cfg_.costs.clientMessage);
  switch (env.tag) {
    case Tag::GroupNotify: {
      auto m = msg::GroupNotify::decode(env.payload);
      groups_.insert(m.desc);
      if (int(m.requester) == ctx_.self().rank && m.token == groupToken_)
        groupReady_ = m.desc.gid;
      break;
    }
    case Tag::CreateReply:
      createReply_ = msg::CreateReply::decode(env.payload);
      break;
    case Tag::ReplicaObject: {
      auto m = msg::ReplicaObject::decode(env.payload);
      bool solicited = fetchPending_ && fetchPending_->oid.unique() == m.oid.unique();
      if (solicited) {
        if (!m.prefetched) demandAnswered_ = true;
        installObject(m, m.prefetched != 0);
        if (m.prefetched) stats_.prefetchedAccepted++;
        break;
      }
      if (!m.prefetched) {
        // The fetch this reply answers was satisfied by a racing prefetched
        // replica; the copy in hand is at least as fresh, so drop this one.
        auto it = forsakenFetches_.find(m.oid.unique());
        if (it == forsakenFetches_.end())
          throw std::logic_error("unsolicited demand replica");
        forsakenFetches_.erase(it);
        break;
      }
      RotEntry* e = rot_.peek(m.oid.unique());
      std::uint64_t need = m.bytes.size() + (e ? 0 : kEntryOverhead);
      bool stale = e && e->wrapper && (e->dirty || m.ts <= e->wrapper->ts);
      if (receiptPendingFor(m.oid.unique()) || freeBytes() < need || stale) break;
      installObject(m, true);
      stats_.prefetchedAccepted++;
      break;
    }
    case Tag::ReplicaSegment: {
      if (!fetchPending_) throw std::logic_error("unsolicited segment replica");
      demandAnswered_ = true;
      auto m = msg::ReplicaSegment::decode(env.payload);
      installSegment(std::move(m.image));
      break;
    }
    case Tag::Grant: {
      auto m = msg::Grant::decode(env.payload);
      if (m.replicaKind == 1)
        installObject(*m.object, false);
      else if (m.replicaKind == 2)
        installSegment(std::move(*m.segment));
      grantedOid_ = m.oid;
      break;
    }
    case Tag::Receipt:
      applyReceipt(msg::Receipt::decode(env.payload), env.src.rank);
      break;
    case Tag::NamedReply:
      namedReply_ = msg::NamedReply::decode(env.payload).oid;
      break;
    case Tag::SyncAck:
      if (syncPending_ <= 0) throw std::logic_error("barrier acknowledgement out of turn");
      --syncPending_;
      break;
    default:
      throw std::logic_error(std::string("client cannot handle ") + tagName(env.tag));
  }
}

void Lom::applyReceipt(const msg::Receipt& m, int fromServer) {
  if (m.kind == 0) {
    auto& dq = pendingObjectReceipts_[fromServer];
    if (dq.empty()) throw std::logic_error("receipt with no return outstanding");
    const std::vector<Oid>& expected = dq.front();
    if (expected.size() != m.objects.size())
      throw std::logic_error("receipt does not match the outstanding return");
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (expected[i].bits != m.objects[i].first.bits)
        throw std::logic_error("receipts arrived out of order");
      UniqueId id = expected[i].unique();
      pendingOids_.erase(pendingOids_.find(id));
      RotEntry* e = rot_.peek(id);
      if (e && e->wrapper && !e->segment)
        e->wrapper->ts = std::max(e->wrapper->ts, m.objects[i].second);
    }
    dq.pop_front();
  } else {
    auto& dq = pendingSegmentReceipts_[fromServer];
    if (dq.empty() || !(dq.front() == m.loc))
      throw std::logic_error("segment receipt does not match the outstanding return");
    dq.pop_front();
    auto it = segments_.find(segKey(m.loc));
    if (it == segments_.end()) return; // replica was evicted, nothing to refresh
    LocalSegment& ls = it->second;
    ls.image.ts = std::max(ls.image.ts, m.segTs);
    for (const auto& [oid, ts] : m.objects) {
      DirectoryEntry* de = ls.image.find(oid.unique());
      if (!de) continue;
      de->ts = std::max(de->ts, ts);
      RotEntry* e = rot_.peek(oid.unique());
      if (e && e->wrapper) e->wrapper->ts = std::max(e->wrapper->ts, ts);
    }
  }
}

bool Lom::receiptsOutstanding() const {
  for (const auto& [srv, dq] : pendingObjectReceipts_)
    if (!dq.empty()) return true;
  for (const auto& [srv, dq] : pendingSegmentReceipts_)
    if (!dq.empty()) return true;
  return false;
}

// --- space recovery ---------------------------------------------------------------

std::uint64_t recoveryTarget(const LomConfig& cfg, std::uint64_t request) {
  std::uint64_t hi = std::uint64_t(cfg.recoverHiFrac * double(cfg.cacheBytes));
  std::uint64_t lo = std::uint64_t(cfg.recoverLoFrac * double(cfg.cacheBytes));
  std::uint64_t scaled = std::uint64_t(cfg.recoverScale * double(request));
  std::uint64_t t = std::max(request, std::min(hi, std::max(lo, scaled)));
  return std::min(t, cfg.cacheBytes);
}

std::uint64_t Lom::targetBytes(std::uint64_t request) const {
  return recoveryTarget(cfg_, request);
}

void Lom::ensureBudget(std::uint64_t need) {
  if (freeBytes() >= need) return;
  recoverWith(cfg_.strategy, targetBytes(need));
  if (freeBytes() < need) {
    std::ostringstream what;
    what << "space recovery left " << freeBytes() << " free of " << need << " needed";
    throw CacheStarvation(what.str());
  }
}

void Lom::recoverWith(RecoveryStrategy strategy, std::uint64_t targetFree) {
  Plan plan;
  plan.projectedFree = freeBytes();
  switch (strategy) {
    case RecoveryStrategy::Dump:
      planSimpleLru(plan, cfg_.cacheBytes); // unreachable target: dump everything
      break;
    case RecoveryStrategy::SimpleLru:
      planSimpleLru(plan, targetFree);
      break;
    case RecoveryStrategy::Classified:
      planClassified(plan, targetFree);
      break;
  }
  std::size_t discarded = executePlan(plan);
  // Surviving replicas drop their swizzled slots: reference counts now mean
  // "accessed since the last recovery", which is what classification reads.
  unswizzleRetained();
  Tick cost = cfg_.costs.recoveryBase + cfg_.costs.recoveryPerReplica * Tick(discarded);
  ctx_.advance(cost);
  stats_.spaceRecovery.record(cost);
}

bool Lom::planEntry(Plan& plan, RotEntry* e) {
  if (!e->resident()) {
    if (e->refCount == 0 && e->protectCount == 0) plan.deletable.push_back(e);
    return false;
  }
  if (e->segment) {
    LocalSegment* ls = e->segment;
    if (ls->marked || ls->protectTotal > 0) return false;
    ls->marked = true;
    plan.segments.push_back(ls);
    plan.projectedFree += ls->image.wireBytes();
    return true;
  }
  if (e->protectCount > 0) return false;
  plan.objects.push_back(e);
  plan.projectedFree += e->wrapper->extent();
  return true;
}

void Lom::planSimpleLru(Plan& plan, std::uint64_t targetFree) {
  for (RotEntry* e = rot_.lru(); e; e = e->newer) {
    planEntry(plan, e);
    if (plan.projectedFree >= targetFree) break;
  }
}

void Lom::planClassified(Plan& plan, std::uint64_t targetFree) {
  // Classes, least valuable first. Clean beats dirty, unreferenced beats
  // referenced, and whether a segment outranks an object flips as classes
  // grow more precious.
  //   1 seg clean unref   2 obj clean unref   3 seg dirty unref
  //   4 obj dirty unref   5 obj clean ref     6 seg clean ref
  //   7 obj dirty ref     8 seg dirty ref
  std::array<std::vector<RotEntry*>, 9> cls;
  for (RotEntry* e = rot_.mru(); e; e = e->older) {
    if (!e->resident()) {
      if (e->refCount == 0 && e->protectCount == 0) plan.deletable.push_back(e);
      continue;
    }
    if (e->segment) {
      LocalSegment* ls = e->segment;
      if (ls->marked || ls->protectTotal > 0) continue;
      ls->marked = true; // dedupe: the most recent member stands for the segment
      int c = ls->dirtyCount ? (ls->refTotal ? 8 : 3) : (ls->refTotal ? 6 : 1);
      cls[std::size_t(c)].push_back(e);
    } else {
      if (e->protectCount > 0) continue;
      int c = e->dirty ? (e->refCount ? 7 : 4) : (e->refCount ? 5 : 2);
      cls[std::size_t(c)].push_back(e);
    }
  }
  for (int c = 1; c <= 8 && plan.projectedFree < targetFree; ++c) {
    auto& list = cls[std::size_t(c)];
    // Walk from the least recently used end of the class.
    for (auto it = list.rbegin(); it != list.rend() && plan.projectedFree < targetFree; ++it) {
      RotEntry* e = *it;
      if (e->segment) {
        plan.segments.push_back(e->segment);
        plan.projectedFree += e->segment->image.wireBytes();
      } else {
        plan.objects.push_back(e);
        plan.projectedFree += e->wrapper->extent();
      }
    }
  }
  for (int c : {1, 3, 6, 8})
    for (RotEntry* e : cls[std::size_t(c)]) e->segment->marked = false;
}

void Lom::sendObjectBatch(int server, msg::ReturnObjects& batch, std::vector<Oid>& oids) {
  if (batch.objects.empty()) return;
  ctx_.send({ActorKind::Server, server}, Tag::ReturnObjects, batch.encode());
  for (Oid oid : oids) pendingOids_.insert(oid.unique());
  pendingObjectReceipts_[server].push_back(std::move(oids));
  batch.objects.clear();
  oids = {};
}

void Lom::flushDirtyObject(RotEntry* e, std::map<int, msg::ReturnObjects>& batches,
                           std::map<int, std::vector<Oid>>& batchOids,
                           std::map<int, std::size_t>& batchBytes) {
  int server = ownerOf(e->oid);
  const ObjectWrapper* w = e->wrapper.get();
  std::size_t recordBytes = 12 + w->extent(); // oid + length prefix + body
  if (batchBytes[server] + recordBytes > cfg_.returnBufferBytes) {
    sendObjectBatch(server, batches[server], batchOids[server]);
    batchBytes[server] = 0;
  }
  // Slots were unswizzled in place already, so the bytes are wire-ready.
  batches[server].objects.push_back({e->oid, std::vector<std::uint8_t>(w->bytes, w->bytes + w->extent())});
  batchOids[server].push_back(e->oid);
  batchBytes[server] += recordBytes;
}

void Lom::dropWrapper(RotEntry* e) {
  ObjectWrapper* w = e->wrapper.get();
  if (w->prefetched && !w->usedSinceInstall) stats_.prefetchedUnused++;
  if (!e->segment) usedBytes_ -= w->extent();
  e->lastExtent = w->extent();
  e->wrapper.reset();
}

std::size_t Lom::executePlan(Plan& plan) {
  std::size_t discarded = 0;
  std::map<int, msg::ReturnObjects> batches;
  std::map<int, std::vector<Oid>> batchOids;
  std::map<int, std::size_t> batchBytes;

  for (RotEntry* e : plan.objects) {
    unswizzleSlots(e);
    if (e->dirty) {
      flushDirtyObject(e, batches, batchOids, batchBytes);
      clearDirty(e);
      stats_.replicasDiscardedDirty++;
    } else {
      stats_.replicasDiscardedClean++;
    }
    dropWrapper(e);
    discarded++;
  }
  for (auto& [server, batch] : batches) sendObjectBatch(server, batch, batchOids[server]);

  for (LocalSegment* ls : plan.segments) {
    for (RotEntry* e : ls->entries) unswizzleSlots(e);
    int server = ownerOf(Oid(ls->image.loc, 1));
    if (ls->dirtyCount > 0) {
      msg::ReturnSegment ret;
      ret.discard = 1;
      for (std::size_t i = 0; i < ls->entries.size(); ++i)
        if (ls->entries[i]->dirty) ret.dirty.push_back(ls->image.directory[i].oid.unique());
      ret.image = ls->image; // already normalised in place
      ctx_.send({ActorKind::Server, server}, Tag::ReturnSegment, ret.encode());
      pendingSegmentReceipts_[server].push_back(ls->image.loc);
      stats_.replicasDiscardedDirty++;
    } else {
      ctx_.send({ActorKind::Server, server}, Tag::DiscardNotice,
                msg::DiscardNotice{ls->image.loc}.encode());
      stats_.replicasDiscardedClean++;
    }
    usedBytes_ -= ls->image.wireBytes();
    for (RotEntry* e : ls->entries) {
      clearDirty(e);
      dropWrapper(e);
      e->segment = nullptr;
    }
    segments_.erase(segKey(ls->image.loc));
    discarded++;
  }

  // Entries noticed dead during planning go last; counts may have changed.
  for (RotEntry* e : plan.deletable) {
    if (e->refCount == 0 && e->protectCount == 0 && !e->wrapper) {
      usedBytes_ -= kEntryOverhead;
      rot_.erase(e);
    }
  }
  return discarded;
}

void Lom::unswizzleRetained() {
  for (RotEntry* e = rot_.lru(); e; e = e->newer)
    if (e->wrapper) unswizzleSlots(e);
}

// --- shutdown ----------------------------------------------------------------------

void Lom::close() {
  if (closed_) return;
  // Dump everything unprotected; updated replicas travel home.
  Plan plan;
  plan.projectedFree = freeBytes();
  planSimpleLru(plan, cfg_.cacheBytes);
  executePlan(plan);
  pumpUntil([&] { return !receiptsOutstanding(); }, "return receipts before close");
  for (int s = 0; s < ctx_.numServers(); ++s)
    ctx_.send({ActorKind::Server, s}, Tag::Close, {});
  closed_ = true;
  stats_.executionTicks = ctx_.now();
}

} // namespace objstore
