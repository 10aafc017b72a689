#pragma once

#include <cstdint>
#include <string>

namespace objstore {

using GroupId = std::uint16_t;
using SegmentId = std::uint16_t;
using UniqueId = std::uint32_t; // issued ids always have the low bit set
using Timestamp = std::uint64_t;
using Tick = std::uint64_t;

constexpr GroupId kNullGroup = 0xFFFF;
constexpr SegmentId kNullSegment = 0xFFFF;
constexpr UniqueId kNullUnique = 3;

// Where an object lives: owning group and segment within it.
struct Location {
  GroupId group = kNullGroup;
  SegmentId segment = kNullSegment;

  bool operator==(const Location&) const = default;
  bool isNull() const { return group == kNullGroup && segment == kNullSegment; }
};

// 64-bit object identifier. Low 32 bits hold the unique id (low bit always 1
// for issued ids, which is what lets a reference cell be told apart from a
// swizzled pointer). High 32 bits hold the location, group in the top 16.
struct Oid {
  std::uint64_t bits;

  constexpr Oid() : bits(encode({kNullGroup, kNullSegment}, kNullUnique)) {}
  constexpr explicit Oid(std::uint64_t raw) : bits(raw) {}
  Oid(Location loc, UniqueId id) : bits(encode(loc, id)) {}

  static constexpr std::uint64_t encode(Location loc, UniqueId id) {
    return (std::uint64_t(loc.group) << 48) | (std::uint64_t(loc.segment) << 32) |
           std::uint64_t(id);
  }

  UniqueId unique() const { return UniqueId(bits & 0xFFFFFFFFu); }
  Location location() const {
    return {GroupId(bits >> 48), SegmentId((bits >> 32) & 0xFFFFu)};
  }
  bool isNull() const { return unique() == kNullUnique; }

  bool operator==(const Oid&) const = default;
  auto operator<=>(const Oid&) const = default;
};

constexpr Oid kNullOid{};

std::string toString(Oid oid);

// Rank of the server holding a segment's master copy. Segments of a group are
// spread across `width` consecutive ranks starting at the group's base.
inline int serverRank(SegmentId segment, int width, int baseServer, int numServers) {
  return ((segment % width) + baseServer) % numServers;
}

enum class MovementContext : std::uint8_t { Single = 0, Segment = 1 };

struct GroupDescriptor {
  GroupId gid = kNullGroup;
  MovementContext context = MovementContext::Single;
  int width = 1;          // servers the group spans
  int prefetchDepth = 0;  // transitive reference prefetch on fetch
  int baseServer = 0;

  int ownerRank(SegmentId segment, int numServers) const {
    return serverRank(segment, width, baseServer, numServers);
  }
};

// Issues 32-bit unique ids that are disjoint across servers: the server rank
// is interleaved above the mandatory low 1-bit, the per-server counter above
// that. The null id (3) is unreachable because counters start past it.
class UniqueIdGenerator {
public:
  UniqueIdGenerator(int rank, int numServers);

  UniqueId next();
  std::uint32_t issued() const { return counter_ - start_; }

  static int rankBitsFor(int numServers);

private:
  std::uint32_t counter_;
  std::uint32_t start_;
  std::uint32_t rank_;
  int rankBits_;
};

} // namespace objstore
