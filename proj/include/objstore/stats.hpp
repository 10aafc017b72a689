#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "objstore/ids.hpp"

namespace objstore {

// Aggregate for one operation kind. Addition and subtraction work on counts
// and totals only; min and max are kept from the left-hand operand since the
// extremes of a difference are not recoverable.
struct OpStat {
  std::uint64_t count = 0;
  std::uint64_t totalTicks = 0;
  Tick minTicks = 0;
  Tick maxTicks = 0;

  void record(Tick ticks) {
    if (count == 0 || ticks < minTicks) minTicks = ticks;
    if (count == 0 || ticks > maxTicks) maxTicks = ticks;
    ++count;
    totalTicks += ticks;
  }

  OpStat plus(const OpStat& o) const {
    return {count + o.count, totalTicks + o.totalTicks, minTicks, maxTicks};
  }
  OpStat minus(const OpStat& o) const {
    return {count - o.count, totalTicks - o.totalTicks, minTicks, maxTicks};
  }

  bool operator==(const OpStat&) const = default;
};

struct StatsRecord {
  OpStat fetch;
  OpStat createObject;
  OpStat createGroup;
  OpStat spaceRecovery;
  OpStat rotSearch;
  OpStat incomingMessage;
  OpStat wait;
  OpStat signal;
  OpStat synchronise;

  std::uint64_t messagesReceived = 0;
  std::uint64_t idleTicks = 0;
  std::uint64_t replicasDiscardedClean = 0;
  std::uint64_t replicasDiscardedDirty = 0;
  std::uint64_t prefetchedAccepted = 0;
  std::uint64_t prefetchedUnused = 0;
  std::uint64_t executionTicks = 0;

  StatsRecord plus(const StatsRecord& o) const;
  StatsRecord minus(const StatsRecord& o) const;

  bool operator==(const StatsRecord&) const = default;

  // Stable column layout shared by the CSV writer and its tests.
  static const std::vector<std::string>& columnNames();
  void appendCsv(std::ostream& out) const;
};

} // namespace objstore
