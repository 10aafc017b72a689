#include "objstore/storage.hpp"

#include <stdexcept>

namespace objstore {

void GroupTable::insert(const GroupDescriptor& g) {
  if (g.gid == kNullGroup) throw std::invalid_argument("group table: null gid");
  if (slots_.size() <= g.gid) slots_.resize(g.gid + 1);
  if (!slots_[g.gid]) {
    slots_[g.gid] = g;
    ++count_;
  }
}

const GroupDescriptor* GroupTable::find(GroupId gid) const {
  if (gid >= slots_.size() || !slots_[gid]) return nullptr;
  return &*slots_[gid];
}

ServerStorage::ServerStorage(int rank, int numServers, StorageConfig cfg)
    : rank_(rank), numServers_(numServers), cfg_(cfg), ids_(rank, numServers) {}

GroupDescriptor ServerStorage::createGroup(MovementContext context, int width,
                                           int prefetchDepth) {
  if (width < 1 || width > numServers_)
    throw std::invalid_argument("create group: width out of range");
  if (nextGid_ == kNullGroup) throw std::runtime_error("group id space exhausted");
  GroupDescriptor g;
  g.gid = nextGid_++;
  g.context = context;
  g.width = width;
  g.prefetchDepth = prefetchDepth;
  g.baseServer = baseCursor_;
  baseCursor_ = (baseCursor_ + width) % numServers_;
  groups_.insert(g);
  return g;
}

Segment& ServerStorage::newSegment(const GroupDescriptor& g) {
  auto it = nextSegId_.find(g.gid);
  SegmentId sid;
  if (it == nextSegId_.end()) {
    // first id in this rank's stream for the group
    int r = (rank_ - g.baseServer) % g.width;
    if (r < 0) r += g.width;
    sid = SegmentId(r);
  } else {
    sid = it->second;
  }
  if (sid >= kNullSegment) throw std::runtime_error("segment id space exhausted");
  nextSegId_[g.gid] = SegmentId(sid + g.width);
  Location loc{g.gid, sid};
  auto [pos, inserted] =
      segments_.try_emplace(key(loc), loc, cfg_.segmentDataBytes, cfg_.directoryEntries);
  if (!inserted) throw std::logic_error("segment already exists");
  return pos->second;
}

Segment* ServerStorage::findSegment(Location loc) {
  auto it = segments_.find(key(loc));
  return it == segments_.end() ? nullptr : &it->second;
}

const Segment* ServerStorage::findSegment(Location loc) const {
  auto it = segments_.find(key(loc));
  return it == segments_.end() ? nullptr : &it->second;
}

std::optional<Oid> ServerStorage::createObject(const GroupDescriptor& g,
                                               std::uint32_t dataSize,
                                               std::uint32_t refCount, int requesterRank,
                                               Segment** outSeg) {
  for (auto& [k, seg] : segments_) {
    if (seg.location().group != g.gid) continue;
    if (!seg.fits(dataSize, refCount)) continue;
    if (g.context == MovementContext::Segment && seg.heldByOther(requesterRank)) continue;
    Oid oid(seg.location(), ids_.next());
    seg.createObject(oid, dataSize, refCount);
    if (outSeg) *outSeg = &seg;
    return oid;
  }
  return std::nullopt;
}

} // namespace objstore
