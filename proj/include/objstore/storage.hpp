#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "objstore/ids.hpp"
#include "objstore/segment.hpp"

namespace objstore {

// Group descriptors indexed by gid. Grows as notifications arrive; inserts
// are idempotent since the main server both replies and broadcasts.
class GroupTable {
public:
  void insert(const GroupDescriptor& g);
  const GroupDescriptor* find(GroupId gid) const;
  std::size_t size() const { return count_; }

private:
  std::vector<std::optional<GroupDescriptor>> slots_;
  std::size_t count_ = 0;
};

struct StorageConfig {
  std::uint32_t segmentDataBytes = 50000;
  std::uint32_t directoryEntries = 50;
};

// Per-server persistent side: the master segments this rank owns, its slice
// of the segment id space for each group, and the unique id stream.
class ServerStorage {
public:
  ServerStorage(int rank, int numServers, StorageConfig cfg);

  GroupTable& groups() { return groups_; }
  const GroupTable& groups() const { return groups_; }

  // Main server only: allocate the next group. The base cursor advances by
  // the requested width so consecutive groups tile the server ring.
  GroupDescriptor createGroup(MovementContext context, int width, int prefetchDepth);

  // This rank's next segment id for the group: congruent to
  // (rank - base) mod width, stepping by width.
  Segment& newSegment(const GroupDescriptor& g);

  Segment* findSegment(Location loc);
  const Segment* findSegment(Location loc) const;

  // Tries each owned segment of the group in segment id order. In segment
  // context a segment already replicated at another client is ineligible.
  // Returns the created oid, or nullopt if no owned segment can take it.
  std::optional<Oid> createObject(const GroupDescriptor& g, std::uint32_t dataSize,
                                  std::uint32_t refCount, int requesterRank,
                                  Segment** outSeg = nullptr);

  UniqueId nextUniqueId() { return ids_.next(); }
  int rank() const { return rank_; }
  const StorageConfig& config() const { return cfg_; }

  std::size_t segmentCount() const { return segments_.size(); }

private:
  int rank_;
  int numServers_;
  StorageConfig cfg_;
  GroupTable groups_;
  UniqueIdGenerator ids_;
  std::map<std::uint32_t, Segment> segments_; // keyed by (gid<<16)|sid
  std::map<GroupId, SegmentId> nextSegId_;
  GroupId nextGid_ = 0;   // main server cursor
  int baseCursor_ = 0;    // main server cursor

  static std::uint32_t key(Location loc) {
    return (std::uint32_t(loc.group) << 16) | loc.segment;
  }
};

// Name registry on the main server.
class NamedObjectList {
public:
  // Last registration wins, matching lookup expectations after a barrier.
  void add(const std::string& name, Oid oid) { names_[name] = oid; }
  Oid lookup(const std::string& name) const {
    auto it = names_.find(name);
    return it == names_.end() ? kNullOid : it->second;
  }

private:
  std::map<std::string, Oid> names_;
};

} // namespace objstore
