#pragma once

#include <cstdint>

#include "objstore/sim.hpp"

namespace objstore::workloads {

// Binary search tree: build then look up keys, descending through reference
// slots. Each client builds an independent tree. Metrics: btree_checksum and
// btree_oracle fold (key, depth) of every search; they must agree.
struct BtreeParams {
  int nodes = 500;
  int searches = 200;
  std::uint32_t fill = 40; // data bytes beyond the 8-byte key
  int width = 1;
  int prefetchDepth = 0;
  MovementContext context = MovementContext::Single;
  std::uint64_t seed = 1;
};
ClientBody btreeBody(BtreeParams p);

// All-pairs gravity over two particle copies reached through index objects;
// copies swap roles every step. Each client runs an independent instance.
// Metrics: n2_checksum / n2_oracle fold the final positions bit-exactly.
struct Nbody2Params {
  int particles = 48;
  int steps = 3;
  std::uint32_t fill = 0; // data bytes beyond the 56-byte particle record
  int width = 1;
  int prefetchDepth = 0;
  MovementContext context = MovementContext::Single;
  std::uint64_t seed = 2;
};
ClientBody nbody2Body(Nbody2Params p);

// Barnes-Hut oct-tree built cooperatively under hand-over-hand semaphores,
// then walked read-only for forces on sample particles. Metrics per client:
// oct_theta0_relerr (exact walk vs direct sum), oct_theta_relerr, and
// oct_checksum folding every walked force component.
struct OctParams {
  int particles = 64;
  double theta = 0.5;
  std::uint32_t fill = 0; // data bytes beyond the 112-byte node record
  int width = 1;
  int prefetchDepth = 0;
  MovementContext context = MovementContext::Single;
  int clients = 1;
  int forceSamples = 10;
  // The exact-tree pass walks every node for each sample; turn it off to
  // measure the pruned traversal's locality on its own.
  bool oracleWalk = true;
  std::uint64_t seed = 3;
};
ClientBody octBody(OctParams p);

// Plucked string: blocks of elements per client, boundary elements guarded
// by semaphores, two position copies alternating roles each step. Metrics:
// pluck_checksum / pluck_oracle fold the client's final block bit-exactly.
struct PluckParams {
  int elements = 64;
  int steps = 24;
  std::uint32_t fill = 40; // data bytes beyond the 8-byte displacement
  int clients = 1;
  int width = 1;
  int prefetchDepth = 0;
  MovementContext context = MovementContext::Single;
  double springK = 0.25;
  int pluckAt = -1; // default: elements / 4
  double height = 1.0;
  std::uint64_t seed = 4; // unused; kept for config uniformity
};
ClientBody pluckBody(PluckParams p);

} // namespace objstore::workloads
