#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <vector>

#include "objstore/ids.hpp"
#include "objstore/wire.hpp"

namespace objstore {

// Bytes an object occupies in a segment's data area: data part followed by
// the reference part, 8 bytes per declared reference.
inline std::uint32_t objectExtent(std::uint32_t dataSize, std::uint32_t refCount) {
  return dataSize + 8 * refCount;
}

struct DirectoryEntry {
  Oid oid;
  std::uint32_t offset = 0;
  std::uint32_t dataSize = 0;
  std::uint32_t refCount = 0; // declared reference slots
  Timestamp ts = 0;
};

// Replica content as it travels on the wire and sits in client memory.
struct SegmentImage {
  Location loc;
  Timestamp ts = 0;
  std::uint32_t freeBytes = 0;
  std::vector<DirectoryEntry> directory; // sorted by unique id
  std::vector<std::uint8_t> data;        // full data area

  std::size_t wireBytes() const { return 20 + 28 * directory.size() + data.size(); }
  void serialize(WireWriter& w) const;
  static SegmentImage deserialize(WireReader& r);

  const DirectoryEntry* find(UniqueId id) const;
  DirectoryEntry* find(UniqueId id);
};

// Master semaphore state kept per object, never replicated.
struct SemaphoreState {
  int value = 1;
  int heldBy = -1; // client rank while granted
  // waiting client rank plus the replica timestamp it reported (or none)
  std::deque<std::pair<int, std::optional<Timestamp>>> queue;
};

// A master segment on a server: fixed-capacity data area with bump-pointer
// allocation (objects are never deleted) and a directory sorted by unique id
// so lookups can binary search. Free space is always one suffix of the area.
class Segment {
public:
  Segment(Location loc, std::uint32_t dataCapacity, std::uint32_t directoryCapacity);

  Location location() const { return image_.loc; }
  Timestamp ts() const { return image_.ts; }
  void bumpTs() { ++image_.ts; }

  std::uint32_t freeBytes() const { return image_.freeBytes; }
  std::uint32_t directoryRoom() const {
    return dirCapacity_ - std::uint32_t(image_.directory.size());
  }
  std::size_t objectCount() const { return image_.directory.size(); }

  bool fits(std::uint32_t dataSize, std::uint32_t refCount) const {
    return objectExtent(dataSize, refCount) <= freeBytes() && directoryRoom() > 0;
  }

  // Allocates and zero-fills; reference slots start as null oids.
  DirectoryEntry& createObject(Oid oid, std::uint32_t dataSize, std::uint32_t refCount);

  const DirectoryEntry* findObject(UniqueId id) const { return image_.find(id); }
  DirectoryEntry* findObject(UniqueId id) { return image_.find(id); }

  // Overwrites one object's bytes from a returned replica; timestamps move
  // forward so holders of the old state can be recognised as stale.
  void returnObject(UniqueId id, const std::uint8_t* bytes, std::size_t n);
  // Copies the listed dirty objects out of a returned replica image.
  void returnSegment(const SegmentImage& replica, const std::vector<UniqueId>& dirty);

  const std::uint8_t* objectBytes(const DirectoryEntry& e) const {
    return image_.data.data() + e.offset;
  }
  std::uint8_t* objectBytes(const DirectoryEntry& e) { return image_.data.data() + e.offset; }

  SegmentImage replicaImage() const { return image_; }
  std::size_t wireBytes() const { return image_.wireBytes(); }

  SemaphoreState& semaphore(UniqueId id);

  // Clients currently holding a replica of this segment, plus ones a replica
  // is in flight to. Removing an absent holder is a protocol error.
  void addHolder(int clientRank) { holders_.insert(clientRank); }
  void removeHolder(int clientRank);
  bool isHeldBy(int clientRank) const { return holders_.count(clientRank) > 0; }
  bool heldByOther(int clientRank) const;
  const std::set<int>& holders() const { return holders_; }

private:
  SegmentImage image_;
  std::uint32_t dirCapacity_;
  std::uint32_t bump_ = 0; // next free offset
  std::vector<std::pair<UniqueId, SemaphoreState>> sems_; // sorted by id
  std::set<int> holders_;
};

} // namespace objstore
