#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "objstore/ids.hpp"

namespace objstore {

struct LocalSegment; // owned by the local object manager

// Replica of one object, resident in client memory. In segment context the
// bytes point into the owning LocalSegment's image; otherwise they are owned
// here. Layout is data part then reference part, as in the master copy.
struct ObjectWrapper {
  std::uint32_t dataSize = 0;
  std::uint32_t refCount = 0; // declared reference slots
  Timestamp ts = 0;
  bool prefetched = false;
  bool usedSinceInstall = false;
  std::uint8_t* bytes = nullptr;
  std::vector<std::uint8_t> owned;

  std::uint32_t extent() const { return dataSize + 8 * refCount; }
  std::uint8_t* refSlot(std::uint32_t i) { return bytes + dataSize + 8 * i; }
  const std::uint8_t* refSlot(std::uint32_t i) const { return bytes + dataSize + 8 * i; }
};

struct RotEntry {
  Oid oid;
  bool dirty = false;
  int protectCount = 0;         // nonzero entries are exempt from space recovery
  int refCount = 0;             // swizzled references currently pointing here
  std::uint32_t lastExtent = 0; // extent of the last replica seen; 0 = unknown
  LocalSegment* segment = nullptr;
  std::unique_ptr<ObjectWrapper> wrapper;

  bool isProtected() const { return protectCount > 0; }
  bool resident() const { return wrapper != nullptr; }

  // red-black tree, keyed by oid.unique()
  RotEntry* left = nullptr;
  RotEntry* right = nullptr;
  RotEntry* parent = nullptr;
  bool red = false;

  // recency list threaded through the same nodes
  RotEntry* newer = nullptr;
  RotEntry* older = nullptr;
};

// Resident object table: a red-black tree over unique ids whose nodes are
// also threaded onto a most-recently-used list. Every search that hits moves
// the entry to the MRU end, so the list order is the eviction order.
class ResidentObjectTable {
public:
  ResidentObjectTable() = default;
  ~ResidentObjectTable();

  ResidentObjectTable(const ResidentObjectTable&) = delete;
  ResidentObjectTable& operator=(const ResidentObjectTable&) = delete;

  // nullptr on miss. A hit counts as an access and refreshes recency.
  RotEntry* find(UniqueId id);
  // Peek without touching recency (instrumentation and recovery walks).
  RotEntry* peek(UniqueId id) const;

  RotEntry* insert(Oid oid); // entry must not already exist
  void erase(RotEntry* e);   // caller guarantees no wrapper, refs or protection

  void touch(RotEntry* e); // move to MRU end

  std::size_t size() const { return size_; }
  RotEntry* mru() const { return mru_; }
  RotEntry* lru() const { return lru_; }

  // Test hooks: throws std::logic_error describing the first violated
  // red-black or list invariant; depth bound is checked against 2*log2(n+1).
  void validate() const;
  int maxDepth() const;

private:
  void rotateLeft(RotEntry* x);
  void rotateRight(RotEntry* x);
  void insertFixup(RotEntry* z);
  void transplant(RotEntry* u, RotEntry* v);
  void eraseFixup(RotEntry* x, RotEntry* xParent);
  void listUnlink(RotEntry* e);
  void listPushMru(RotEntry* e);

  RotEntry* root_ = nullptr;
  RotEntry* mru_ = nullptr;
  RotEntry* lru_ = nullptr;
  std::size_t size_ = 0;
};

} // namespace objstore
