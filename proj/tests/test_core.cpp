#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "objstore/ids.hpp"
#include "objstore/lom.hpp"
#include "objstore/stats.hpp"

using namespace objstore;

TEST_CASE("oid encoding round-trips and flags nulls") {
  Oid oid({7, 12}, 0x21);
  CHECK(oid.location().group == 7);
  CHECK(oid.location().segment == 12);
  CHECK(oid.unique() == 0x21);
  CHECK_FALSE(oid.isNull());

  CHECK(kNullOid.isNull());
  CHECK(kNullOid.location().isNull());
  CHECK(kNullOid.unique() == kNullUnique);

  // The low bit of an issued id distinguishes a reference cell from a
  // swizzled pointer, which must be even.
  CHECK((oid.bits & 1) == 1);
}

TEST_CASE("segment owner rank wraps around the ring") {
  CHECK(serverRank(5, 4, 6, 8) == 7);
  CHECK(serverRank(3, 2, 7, 8) == 0);
  CHECK(serverRank(0, 1, 3, 4) == 3);
  GroupDescriptor g{2, MovementContext::Single, 4, 0, 6};
  CHECK(g.ownerRank(5, 8) == 7);
}

TEST_CASE("unique ids stay odd, start at the documented origin, never collide") {
  UniqueIdGenerator g0(0, 8);
  CHECK(g0.next() == 17); // counter 1, three rank bits, rank 0, low bit set

  UniqueIdGenerator solo(0, 1);
  CHECK(solo.next() == 5); // counter starts at 2 when no rank bits are needed

  std::set<UniqueId> seen;
  for (int rank = 0; rank < 4; ++rank) {
    UniqueIdGenerator g(rank, 4);
    for (int i = 0; i < 1000; ++i) {
      UniqueId id = g.next();
      CHECK((id & 1) == 1);
      CHECK(id != kNullUnique);
      CHECK(seen.insert(id).second);
    }
  }
}

TEST_CASE("op stats fold and subtract") {
  OpStat a;
  a.record(5);
  a.record(15);
  CHECK(a.count == 2);
  CHECK(a.totalTicks == 20);
  CHECK(a.minTicks == 5);
  CHECK(a.maxTicks == 15);

  OpStat b;
  b.record(100);
  OpStat sum = a.plus(b);
  CHECK(sum.count == 3);
  CHECK(sum.totalTicks == 120);
  OpStat back = sum.minus(b);
  CHECK(back.count == a.count);
  CHECK(back.totalTicks == a.totalTicks);
}

TEST_CASE("stats records have one column per csv cell") {
  StatsRecord r;
  r.fetch.record(10);
  r.messagesReceived = 3;
  std::ostringstream out;
  r.appendCsv(out);
  std::string s = out.str();
  std::size_t cells = std::count(s.begin(), s.end(), ',') + 1;
  CHECK(cells == StatsRecord::columnNames().size());
}

TEST_CASE("recovery target interpolates between the bounds") {
  // cache 3,000,000 at defaults: floor 375,000, ceiling 750,000, scale 15.
  LomConfig cfg;
  cfg.cacheBytes = 3'000'000;
  CHECK(recoveryTarget(cfg, 10'000) == 375'000);   // below the floor
  CHECK(recoveryTarget(cfg, 40'000) == 600'000);   // scaled, inside the band
  CHECK(recoveryTarget(cfg, 60'000) == 750'000);   // clipped at the ceiling
  CHECK(recoveryTarget(cfg, 2'000'000) == 2'000'000); // the request itself wins
  CHECK(recoveryTarget(cfg, 4'000'000) == 3'000'000); // never beyond the cache
}
