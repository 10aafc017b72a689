#include "objstore/segment.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

namespace objstore {

void SegmentImage::serialize(WireWriter& w) const {
  w.location(loc);
  w.u64(ts);
  w.u32(std::uint32_t(directory.size()));
  w.u32(freeBytes);
  for (const DirectoryEntry& e : directory) {
    w.oid(e.oid);
    w.u32(e.offset);
    w.u32(e.dataSize);
    w.u32(e.refCount);
    w.u64(e.ts);
  }
  w.bytes(data.data(), data.size());
}

SegmentImage SegmentImage::deserialize(WireReader& r) {
  SegmentImage img;
  img.loc = r.location();
  img.ts = r.u64();
  std::uint32_t count = r.u32();
  img.freeBytes = r.u32();
  img.directory.resize(count);
  for (DirectoryEntry& e : img.directory) {
    e.oid = r.oid();
    e.offset = r.u32();
    e.dataSize = r.u32();
    e.refCount = r.u32();
    e.ts = r.u64();
  }
  std::uint32_t used = 0;
  for (const DirectoryEntry& e : img.directory)
    used = std::max(used, e.offset + objectExtent(e.dataSize, e.refCount));
  img.data.resize(used + img.freeBytes);
  r.bytes(img.data.data(), img.data.size());
  return img;
}

static auto dirLower(std::vector<DirectoryEntry>& d, UniqueId id) {
  return std::lower_bound(d.begin(), d.end(), id,
                          [](const DirectoryEntry& e, UniqueId v) { return e.oid.unique() < v; });
}

const DirectoryEntry* SegmentImage::find(UniqueId id) const {
  return const_cast<SegmentImage*>(this)->find(id);
}

DirectoryEntry* SegmentImage::find(UniqueId id) {
  auto it = dirLower(directory, id);
  if (it == directory.end() || it->oid.unique() != id) return nullptr;
  return &*it;
}

Segment::Segment(Location loc, std::uint32_t dataCapacity, std::uint32_t directoryCapacity)
    : dirCapacity_(directoryCapacity) {
  image_.loc = loc;
  image_.freeBytes = dataCapacity;
  image_.data.assign(dataCapacity, 0);
}

DirectoryEntry& Segment::createObject(Oid oid, std::uint32_t dataSize,
                                      std::uint32_t refCount) {
  if (!fits(dataSize, refCount)) throw std::runtime_error("segment: object does not fit");
  std::uint32_t extent = objectExtent(dataSize, refCount);
  ++image_.ts; // creation mutates the segment; stale holders must notice
  DirectoryEntry e;
  e.oid = oid;
  e.offset = bump_;
  e.dataSize = dataSize;
  e.refCount = refCount;
  e.ts = image_.ts;
  bump_ += extent;
  image_.freeBytes -= extent;
  // data part is already zeroed; reference slots start null
  std::uint8_t* refs = image_.data.data() + e.offset + dataSize;
  for (std::uint32_t i = 0; i < refCount; ++i) {
    std::uint64_t null = kNullOid.bits;
    std::memcpy(refs + 8 * i, &null, 8);
  }
  auto it = dirLower(image_.directory, oid.unique());
  if (it != image_.directory.end() && it->oid.unique() == oid.unique())
    throw std::runtime_error("segment: duplicate unique id");
  return *image_.directory.insert(it, e);
}

void Segment::returnObject(UniqueId id, const std::uint8_t* bytes, std::size_t n) {
  DirectoryEntry* e = findObject(id);
  if (!e) throw std::runtime_error("segment: returned object not present");
  if (n != objectExtent(e->dataSize, e->refCount))
    throw std::runtime_error("segment: returned object has wrong extent");
  std::memcpy(image_.data.data() + e->offset, bytes, n);
  ++e->ts;
  ++image_.ts;
}

void Segment::returnSegment(const SegmentImage& replica, const std::vector<UniqueId>& dirty) {
  for (UniqueId id : dirty) {
    const DirectoryEntry* from = replica.find(id);
    DirectoryEntry* to = findObject(id);
    if (!from || !to) throw std::runtime_error("segment: dirty object not present");
    std::memcpy(image_.data.data() + to->offset, replica.data.data() + from->offset,
                objectExtent(to->dataSize, to->refCount));
    ++to->ts;
  }
  ++image_.ts;
}

SemaphoreState& Segment::semaphore(UniqueId id) {
  auto it = std::lower_bound(
      sems_.begin(), sems_.end(), id,
      [](const std::pair<UniqueId, SemaphoreState>& p, UniqueId v) { return p.first < v; });
  if (it == sems_.end() || it->first != id)
    it = sems_.insert(it, {id, SemaphoreState{}});
  return it->second;
}

void Segment::removeHolder(int clientRank) {
  auto it = holders_.find(clientRank);
  if (it == holders_.end())
    throw std::runtime_error("segment: removing a holder that is not recorded");
  holders_.erase(it);
}

bool Segment::heldByOther(int clientRank) const {
  for (int h : holders_)
    if (h != clientRank) return true;
  return false;
}

} // namespace objstore
