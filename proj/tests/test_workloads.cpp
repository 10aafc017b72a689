#include <doctest.h>

#include "objstore/harness.hpp"
#include "objstore/workloads.hpp"

using namespace objstore;

TEST_CASE("tree searches through the heap match the in-memory tree exactly") {
  workloads::BtreeParams p;
  p.nodes = 300;
  p.searches = 120;
  p.seed = 11;
  SimConfig cfg;
  cfg.numServers = 2;
  SimResult res = runSim(cfg, {workloads::btreeBody(p)});
  const auto& m = res.clients[0].metrics;
  CHECK(m.at("btree_checksum") == m.at("btree_oracle"));
}

TEST_CASE("tree search agreement survives cache pressure and prefetch") {
  workloads::BtreeParams p;
  p.nodes = 400;
  p.searches = 150;
  p.fill = 600;
  p.width = 2;
  p.prefetchDepth = 3;
  p.seed = 5;
  SimConfig cfg;
  cfg.numServers = 3;
  cfg.cacheBytes = 160'000; // far less than the tree needs
  cfg.strategy = RecoveryStrategy::Classified;
  SimResult res = runSim(cfg, {workloads::btreeBody(p)});
  const auto& m = res.clients[0].metrics;
  CHECK(m.at("btree_checksum") == m.at("btree_oracle"));
  CHECK(res.clients[0].stats.spaceRecovery.count > 0);
  CHECK(res.clients[0].stats.prefetchedAccepted > 0);
}

TEST_CASE("all-pairs gravity through the heap is bit-identical to memory") {
  workloads::Nbody2Params p;
  p.particles = 24;
  p.steps = 3;
  p.seed = 9;
  SimConfig cfg;
  cfg.numServers = 2;
  SimResult res = runSim(cfg, {workloads::nbody2Body(p)});
  const auto& m = res.clients[0].metrics;
  CHECK(m.at("n2_checksum") == m.at("n2_oracle"));
}

TEST_CASE("oct-tree forces agree with the direct sum") {
  workloads::OctParams p;
  p.particles = 96;
  p.clients = 2;
  p.theta = 0.5;
  p.forceSamples = 8;
  p.seed = 3;
  SimConfig cfg;
  cfg.numServers = 2;
  cfg.numClients = 2;
  SimResult res = runSim(cfg, {workloads::octBody(p), workloads::octBody(p)});
  for (const auto& c : res.clients) {
    CHECK(c.metrics.at("oct_theta0_relerr") <= 1e-12);
    CHECK(c.metrics.at("oct_theta_relerr") < 0.02);
  }
}

TEST_CASE("plucked string blocks match the sequential solution bit for bit") {
  workloads::PluckParams p;
  p.elements = 48;
  p.steps = 20;
  p.clients = 3;
  SimConfig cfg;
  cfg.numServers = 2;
  cfg.numClients = 3;
  std::vector<ClientBody> bodies(3, workloads::pluckBody(p));
  SimResult res = runSim(cfg, bodies);
  for (const auto& c : res.clients)
    CHECK(c.metrics.at("pluck_checksum") == c.metrics.at("pluck_oracle"));
}

TEST_CASE("a single-client string behaves like the oracle too") {
  workloads::PluckParams p;
  p.elements = 32;
  p.steps = 12;
  p.clients = 1;
  SimConfig cfg;
  SimResult res = runSim(cfg, {workloads::pluckBody(p)});
  CHECK(res.clients[0].metrics.at("pluck_checksum") ==
        res.clients[0].metrics.at("pluck_oracle"));
}

TEST_CASE("config files and overrides feed the harness") {
  harness::RunConfig cfg = harness::RunConfig::defaults();
  CHECK(cfg.getInt("servers") == 2);
  cfg.setPair("servers=5");
  CHECK(cfg.getInt("servers") == 5);
  CHECK_THROWS(cfg.setPair("serverz=5"));
  CHECK_THROWS(cfg.setPair("no-equals-sign"));
  CHECK(cfg.getDouble("per_byte_cost") == doctest::Approx(0.45));
}

TEST_CASE("identical runs emit identical tables") {
  harness::RunConfig cfg = harness::RunConfig::defaults();
  cfg.setPair("workload=btree");
  cfg.setPair("btree.nodes=120");
  cfg.setPair("btree.searches=40");
  cfg.setPair("clients=2");
  harness::Table a = harness::runOnce(cfg);
  harness::Table b = harness::runOnce(cfg);
  CHECK(a.csv() == b.csv());
  CHECK(a.rows.size() == 4); // two servers and two clients
  REQUIRE(!a.header.empty());
  CHECK(a.header.back() == "btree_oracle"); // metric columns are sorted last
}

TEST_CASE("sweeps vary exactly the requested axis") {
  harness::RunConfig cfg = harness::RunConfig::defaults();
  cfg.setPair("workload=pluck");
  cfg.setPair("pluck.elements=24");
  cfg.setPair("pluck.steps=6");
  harness::Table t = harness::sweep(cfg, "pluck.steps", {"4", "6"});
  CHECK(t.rows.size() == 2 * 3); // two runs, each two servers plus one client

  std::size_t stepsCol = 0;
  while (t.header[stepsCol] != "pluck.steps") ++stepsCol;
  CHECK(t.rows.front()[stepsCol] == "4");
  CHECK(t.rows.back()[stepsCol] == "6");
}
