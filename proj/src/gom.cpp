#include "objstore/gom.hpp"

#include <cstring>
#include <stdexcept>

namespace objstore {

const char* prefetchPriorityName(PrefetchPriority p) {
  switch (p) {
    case PrefetchPriority::High: return "high";
    case PrefetchPriority::LowBfs: return "low_bfs";
    case PrefetchPriority::LowDfs: return "low_dfs";
  }
  return "?";
}

Gom::Gom(int rank, int numServers, int numClients, StorageConfig storageCfg,
         ProcessingCosts costs, PrefetchPriority prefetch, int mainServer)
    : rank_(rank),
      numServers_(numServers),
      numClients_(numClients),
      mainServer_(mainServer),
      costs_(costs),
      prefetchPriority_(prefetch),
      store_(rank, numServers, storageCfg) {}

int Gom::groupRing(const GroupDescriptor& g, int position) const {
  return (g.baseServer + position) % numServers_;
}

void Gom::onMessage(ActorContext& ctx, Envelope env) {
  ctx.advance(costs_.serverMessage);
  stats_.messagesReceived++;
  stats_.incomingMessage.record(costs_.serverMessage);
  switch (env.tag) {
    case Tag::CreateGroup: handleCreateGroup(ctx, env); break;
    case Tag::GroupNotify: store_.groups().insert(msg::GroupNotify::decode(env.payload).desc); break;
    case Tag::CreateObject: handleCreateObject(ctx, env); break;
    case Tag::Fetch: handleFetch(ctx, env); break;
    case Tag::ReturnObjects: handleReturnObjects(ctx, env); break;
    case Tag::ReturnSegment: handleReturnSegment(ctx, env); break;
    case Tag::DiscardNotice: handleDiscardNotice(env); break;
    case Tag::AcceptSegment: {
      // Holder was recorded when the replica left; this finalises it.
      auto m = msg::AcceptSegment::decode(env.payload);
      Segment* seg = store_.findSegment(m.loc);
      if (!seg) throw std::runtime_error("accept for unknown segment");
      seg->addHolder(env.src.rank);
      break;
    }
    case Tag::Name: {
      if (rank_ != mainServer_) throw std::runtime_error("name sent to non-main server");
      auto m = msg::Name::decode(env.payload);
      names_.add(m.name, m.oid);
      break;
    }
    case Tag::NamedQuery: {
      if (rank_ != mainServer_) throw std::runtime_error("query sent to non-main server");
      auto m = msg::NamedQuery::decode(env.payload);
      ctx.send(env.src, Tag::NamedReply, msg::NamedReply{names_.lookup(m.name)}.encode());
      break;
    }
    case Tag::Wait: handleWait(ctx, env); break;
    case Tag::Signal: handleSignal(ctx, env); break;
    case Tag::Sync: handleSync(ctx); break;
    case Tag::Close: handleClose(ctx, env); break;
    case Tag::Prefetch: handlePrefetchReq(ctx, env); break;
    default:
      throw std::runtime_error(std::string("server cannot handle ") + tagName(env.tag));
  }
}

bool Gom::idleWork(ActorContext& ctx) {
  if (terminated_ || prefetchQueue_.empty()) return false;
  QueuedPrefetch item = prefetchQueue_.front();
  prefetchQueue_.pop_front();
  ctx.advance(costs_.serverMessage);
  servePrefetch(ctx, item.req);
  return true;
}

void Gom::handleCreateGroup(ActorContext& ctx, const Envelope& env) {
  if (rank_ != mainServer_) throw std::runtime_error("create group sent to non-main server");
  auto m = msg::CreateGroup::decode(env.payload);
  GroupDescriptor desc = store_.createGroup(m.context, int(m.width), int(m.prefetchDepth));
  msg::GroupNotify note{desc, std::uint32_t(env.src.rank), m.token};
  Payload payload = note.encode();
  ctx.send(env.src, Tag::GroupNotify, payload);
  for (int s = 0; s < ctx.numServers(); ++s)
    if (s != rank_) ctx.send({ActorKind::Server, s}, Tag::GroupNotify, payload);
  for (int c = 0; c < ctx.numClients(); ++c)
    if (c != env.src.rank) ctx.send({ActorKind::Client, c}, Tag::GroupNotify, payload);
  stats_.createGroup.record(costs_.serverMessage);
}

void Gom::sendCreateReply(ActorContext& ctx, int client, Segment& seg, Oid oid,
                          std::uint32_t offset, const GroupDescriptor& g) {
  msg::CreateReply reply;
  reply.oid = oid;
  reply.offset = offset;
  reply.segTs = seg.ts();
  if (g.context == MovementContext::Segment && !seg.isHeldBy(client)) {
    reply.image = seg.replicaImage();
    seg.addHolder(client);
  }
  ctx.send({ActorKind::Client, client}, Tag::CreateReply, reply.encode());
}

void Gom::handleCreateObject(ActorContext& ctx, const Envelope& env) {
  auto m = msg::CreateObject::decode(env.payload);
  const GroupDescriptor* g = store_.groups().find(m.gid);
  if (!g) throw std::runtime_error("create into unknown group");

  if (m.nominated) {
    Segment& seg = store_.newSegment(*g);
    DirectoryEntry& de =
        seg.createObject(Oid(seg.location(), store_.nextUniqueId()), m.dataSize, m.refCount);
    sendCreateReply(ctx, int(m.requester), seg, de.oid, de.offset, *g);
    stats_.createObject.record(costs_.serverMessage);
    return;
  }

  // Not nominated: try to place it in an owned segment, otherwise circulate.
  Segment* seg = nullptr;
  std::optional<Oid> oid = store_.createObject(*g, m.dataSize, m.refCount, int(m.requester), &seg);
  if (oid) {
    const DirectoryEntry* de = seg->findObject(oid->unique());
    sendCreateReply(ctx, int(m.requester), *seg, *oid, de->offset, *g);
    stats_.createObject.record(costs_.serverMessage);
    return;
  }

  bool backAtBase = rank_ == g->baseServer && m.hops > 0;
  if (g->width == 1 || backAtBase) {
    // Whole group is out of room: the base nominates the next server in the
    // ring (possibly itself) to open a fresh segment.
    int cursor = nomineeCursor_[g->gid];
    nomineeCursor_[g->gid] = (cursor + 1) % g->width;
    msg::CreateObject fwd = m;
    fwd.nominated = 1;
    ctx.send({ActorKind::Server, groupRing(*g, cursor)}, Tag::CreateObject, fwd.encode());
    return;
  }

  int myIndex = (rank_ - g->baseServer + numServers_) % numServers_;
  if (myIndex >= g->width) throw std::runtime_error("create circulated outside its group");
  msg::CreateObject fwd = m;
  fwd.hops = m.hops + 1;
  ctx.send({ActorKind::Server, groupRing(*g, (myIndex + 1) % g->width)}, Tag::CreateObject,
           fwd.encode());
}

void Gom::handleFetch(ActorContext& ctx, const Envelope& env) {
  auto m = msg::Fetch::decode(env.payload);
  const GroupDescriptor* g = store_.groups().find(m.oid.location().group);
  if (!g) throw std::runtime_error("fetch into unknown group");
  Segment* seg = store_.findSegment(m.oid.location());
  if (!seg) throw std::runtime_error("fetch for unknown segment");
  const DirectoryEntry* de = seg->findObject(m.oid.unique());
  if (!de) throw std::runtime_error("fetch for unknown object");

  if (g->context == MovementContext::Segment) {
    msg::ReplicaSegment reply{seg->replicaImage()};
    seg->addHolder(env.src.rank);
    ctx.send(env.src, Tag::ReplicaSegment, reply.encode());
  } else {
    msg::ReplicaObject reply;
    reply.prefetched = 0;
    reply.oid = de->oid;
    reply.ts = de->ts;
    reply.dataSize = de->dataSize;
    reply.refCount = de->refCount;
    const std::uint8_t* bytes = seg->objectBytes(*de);
    reply.bytes.assign(bytes, bytes + objectExtent(de->dataSize, de->refCount));
    ctx.send(env.src, Tag::ReplicaObject, reply.encode());
    if (g->prefetchDepth > 0)
      generatePrefetch(ctx, *seg, *de, env.src.rank, std::uint32_t(g->prefetchDepth) - 1);
  }
  stats_.fetch.record(costs_.serverMessage);
}

void Gom::generatePrefetch(ActorContext& ctx, const Segment& seg, const DirectoryEntry& de,
                           int client, std::uint32_t remainingDepth) {
  const std::uint8_t* refs = seg.objectBytes(de) + de.dataSize;
  for (std::uint32_t i = 0; i < de.refCount; ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, refs + 8 * i, 8);
    Oid child{bits};
    if (child.isNull()) continue;
    const GroupDescriptor* cg = store_.groups().find(child.location().group);
    if (!cg || cg->context != MovementContext::Single) continue;
    msg::PrefetchReq req{child, std::uint32_t(client), remainingDepth};
    int owner = cg->ownerRank(child.location().segment, numServers_);
    if (owner != rank_) {
      ctx.send({ActorKind::Server, owner}, Tag::Prefetch, req.encode());
    } else if (prefetchPriority_ == PrefetchPriority::High) {
      // Serve now: the replica departs right behind the demand reply, so the
      // client sees it before its next access can miss.
      servePrefetch(ctx, req);
    } else if (prefetchPriority_ == PrefetchPriority::LowBfs) {
      prefetchQueue_.push_back({req});
    } else {
      prefetchQueue_.push_front({req});
    }
  }
}

void Gom::handlePrefetchReq(ActorContext& ctx, const Envelope& env) {
  auto req = msg::PrefetchReq::decode(env.payload);
  if (prefetchPriority_ == PrefetchPriority::High) {
    servePrefetch(ctx, req);
  } else if (prefetchPriority_ == PrefetchPriority::LowBfs) {
    prefetchQueue_.push_back({req});
  } else {
    prefetchQueue_.push_front({req});
  }
}

void Gom::servePrefetch(ActorContext& ctx, const msg::PrefetchReq& req) {
  Segment* seg = store_.findSegment(req.oid.location());
  if (!seg) throw std::runtime_error("prefetch for unknown segment");
  const DirectoryEntry* de = seg->findObject(req.oid.unique());
  if (!de) throw std::runtime_error("prefetch for unknown object");
  msg::ReplicaObject reply;
  reply.prefetched = 1;
  reply.oid = de->oid;
  reply.ts = de->ts;
  reply.dataSize = de->dataSize;
  reply.refCount = de->refCount;
  const std::uint8_t* bytes = seg->objectBytes(*de);
  reply.bytes.assign(bytes, bytes + objectExtent(de->dataSize, de->refCount));
  ctx.send({ActorKind::Client, int(req.client)}, Tag::ReplicaObject, reply.encode());
  if (req.remainingDepth > 0)
    generatePrefetch(ctx, *seg, *de, int(req.client), req.remainingDepth - 1);
}

void Gom::handleReturnObjects(ActorContext& ctx, const Envelope& env) {
  auto m = msg::ReturnObjects::decode(env.payload);
  msg::Receipt receipt;
  receipt.kind = 0;
  for (const msg::ReturnedObject& o : m.objects) {
    Segment* seg = store_.findSegment(o.oid.location());
    if (!seg) throw std::runtime_error("return for unknown segment");
    seg->returnObject(o.oid.unique(), o.bytes.data(), o.bytes.size());
    receipt.objects.emplace_back(o.oid, seg->findObject(o.oid.unique())->ts);
  }
  ctx.send(env.src, Tag::Receipt, receipt.encode());
}

void Gom::handleReturnSegment(ActorContext& ctx, const Envelope& env) {
  auto m = msg::ReturnSegment::decode(env.payload);
  Segment* seg = store_.findSegment(m.image.loc);
  if (!seg) throw std::runtime_error("segment return for unknown segment");
  seg->returnSegment(m.image, m.dirty);
  msg::Receipt receipt;
  receipt.kind = 1;
  receipt.loc = m.image.loc;
  receipt.segTs = seg->ts();
  for (UniqueId id : m.dirty)
    receipt.objects.emplace_back(Oid::encode(m.image.loc, id), seg->findObject(id)->ts);
  if (m.discard) seg->removeHolder(env.src.rank);
  ctx.send(env.src, Tag::Receipt, receipt.encode());
}

void Gom::handleDiscardNotice(const Envelope& env) {
  auto m = msg::DiscardNotice::decode(env.payload);
  Segment* seg = store_.findSegment(m.loc);
  if (!seg) throw std::runtime_error("discard notice for unknown segment");
  seg->removeHolder(env.src.rank);
}

void Gom::handleWait(ActorContext& ctx, const Envelope& env) {
  auto m = msg::Wait::decode(env.payload);
  Segment* seg = store_.findSegment(m.oid.location());
  if (!seg) throw std::runtime_error("wait for unknown segment");
  if (!seg->findObject(m.oid.unique())) throw std::runtime_error("wait for unknown object");
  SemaphoreState& sem = seg->semaphore(m.oid.unique());
  sem.queue.emplace_back(env.src.rank, m.replicaTs);
  grantNext(ctx, *seg, m.oid.unique());
  stats_.wait.record(costs_.serverMessage);
}

void Gom::grantNext(ActorContext& ctx, Segment& seg, UniqueId semId) {
  SemaphoreState& sem = seg.semaphore(semId);
  if (sem.value <= 0 || sem.queue.empty()) return;
  sem.value--;
  auto [client, reported] = sem.queue.front();
  sem.queue.pop_front();
  sem.heldBy = client;

  const DirectoryEntry* de = seg.findObject(semId);
  const GroupDescriptor* g = store_.groups().find(seg.location().group);
  msg::Grant grant;
  grant.oid = de->oid;
  // Attach a replica unless the waiter already holds the current state.
  if (g->context == MovementContext::Segment) {
    if (!reported || *reported < seg.ts()) {
      grant.replicaKind = 2;
      grant.segment = seg.replicaImage();
      seg.addHolder(client);
    }
  } else {
    if (!reported || *reported < de->ts) {
      grant.replicaKind = 1;
      msg::ReplicaObject obj;
      obj.oid = de->oid;
      obj.ts = de->ts;
      obj.dataSize = de->dataSize;
      obj.refCount = de->refCount;
      const std::uint8_t* bytes = seg.objectBytes(*de);
      obj.bytes.assign(bytes, bytes + objectExtent(de->dataSize, de->refCount));
      grant.object = std::move(obj);
    }
  }
  ctx.send({ActorKind::Client, client}, Tag::Grant, grant.encode());
}

void Gom::handleSignal(ActorContext& ctx, const Envelope& env) {
  auto m = msg::Signal::decode(env.payload);
  Segment* seg = store_.findSegment(m.oid.location());
  if (!seg) throw std::runtime_error("signal for unknown segment");
  SemaphoreState& sem = seg->semaphore(m.oid.unique());
  if (sem.heldBy != env.src.rank)
    throw std::runtime_error("signal from a client that does not hold the semaphore");
  sem.heldBy = -1;
  sem.value++;
  if (sem.value > 1) throw std::runtime_error("semaphore over-signalled");
  grantNext(ctx, *seg, m.oid.unique());
  stats_.signal.record(costs_.serverMessage);
}

void Gom::handleSync(ActorContext& ctx) {
  if (++syncCount_ < numClients_) return;
  syncCount_ = 0;
  for (int c = 0; c < ctx.numClients(); ++c)
    ctx.send({ActorKind::Client, c}, Tag::SyncAck, {});
  stats_.synchronise.record(costs_.serverMessage);
}

void Gom::handleClose(ActorContext& ctx, const Envelope& env) {
  if (!closedClients_.insert(env.src.rank).second)
    throw std::runtime_error("duplicate close from one client");
  if (int(closedClients_.size()) == numClients_) {
    terminated_ = true;
    stats_.executionTicks = ctx.now();
  }
}

} // namespace objstore
