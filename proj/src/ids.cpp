#include "objstore/ids.hpp"

#include <cstdio>
#include <stdexcept>

namespace objstore {

std::string toString(Oid oid) {
  char buf[48];
  Location loc = oid.location();
  std::snprintf(buf, sizeof buf, "%u.%u:%u", unsigned(loc.group), unsigned(loc.segment),
                unsigned(oid.unique()));
  return buf;
}

int UniqueIdGenerator::rankBitsFor(int numServers) {
  int bits = 0;
  while ((1 << bits) < numServers) ++bits;
  return bits;
}

UniqueIdGenerator::UniqueIdGenerator(int rank, int numServers)
    : rank_(std::uint32_t(rank)), rankBits_(rankBitsFor(numServers)) {
  if (rank < 0 || rank >= numServers)
    throw std::invalid_argument("unique id generator: rank out of range");
  // With zero rank bits the first counter value would produce id 3, the null
  // id, so start one further along.
  start_ = (rankBits_ == 0) ? 2 : 1;
  counter_ = start_;
}

UniqueId UniqueIdGenerator::next() {
  int shift = 1 + rankBits_;
  if (counter_ >= (std::uint32_t(1) << (31 - rankBits_)))
    throw std::runtime_error("unique id space exhausted");
  UniqueId id = (counter_ << shift) | (rank_ << 1) | 1u;
  ++counter_;
  return id;
}

} // namespace objstore
