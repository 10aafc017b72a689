#include <doctest.h>

#include <cstring>

#include "objstore/storage.hpp"

using namespace objstore;

TEST_CASE("segment allocation packs objects and keeps the directory sorted") {
  Segment seg({1, 0}, 1000, 4);
  Oid a({1, 0}, 9), b({1, 0}, 5), c({1, 0}, 7);

  DirectoryEntry& ea = seg.createObject(a, 100, 2);
  CHECK(ea.offset == 0);
  CHECK(seg.freeBytes() == 1000 - 116);

  DirectoryEntry& eb = seg.createObject(b, 50, 0);
  CHECK(eb.offset == 116);
  seg.createObject(c, 10, 1);

  // Sorted by unique id regardless of creation order.
  auto img = seg.replicaImage();
  REQUIRE(img.directory.size() == 3);
  CHECK(img.directory[0].oid.bits == b.bits);
  CHECK(img.directory[1].oid.bits == c.bits);
  CHECK(img.directory[2].oid.bits == a.bits);
  CHECK(seg.findObject(7)->dataSize == 10);

  // Reference slots start null, data starts zeroed.
  const DirectoryEntry* pa = seg.findObject(9);
  const std::uint8_t* bytes = seg.objectBytes(*pa);
  for (std::uint32_t i = 0; i < 100; ++i) CHECK(bytes[i] == 0);
  std::uint64_t slot;
  std::memcpy(&slot, bytes + 100, 8);
  CHECK(Oid(slot).bits == kNullOid.bits);

  CHECK_FALSE(seg.fits(2000, 0));        // data area exhausted
  seg.createObject(Oid({1, 0}, 11), 1, 0);
  CHECK_FALSE(seg.fits(1, 0));           // directory exhausted
  CHECK_THROWS(seg.createObject(Oid({1, 0}, 9), 1, 0)); // duplicate id
}

TEST_CASE("creation and returns both advance the timestamps") {
  Segment seg({1, 0}, 1000, 4);
  Timestamp t0 = seg.ts();
  DirectoryEntry& e = seg.createObject(Oid({1, 0}, 5), 16, 0);
  CHECK(seg.ts() == t0 + 1);
  CHECK(e.ts == seg.ts()); // a fresh object carries the creation stamp

  std::uint8_t buf[16] = {1, 2, 3};
  seg.returnObject(5, buf, 16);
  CHECK(seg.findObject(5)->ts == t0 + 2);
  CHECK(seg.ts() == t0 + 2);
  CHECK(seg.objectBytes(*seg.findObject(5))[1] == 2);

  // Returning a whole replica bumps each dirty object once, the segment once.
  seg.createObject(Oid({1, 0}, 7), 16, 0);
  SegmentImage replica = seg.replicaImage();
  replica.data[replica.find(5)->offset] = 42;
  replica.data[replica.find(7)->offset] = 43;
  Timestamp seg5 = seg.findObject(5)->ts, seg7 = seg.findObject(7)->ts;
  Timestamp before = seg.ts();
  seg.returnSegment(replica, {5, 7});
  CHECK(seg.objectBytes(*seg.findObject(5))[0] == 42);
  CHECK(seg.objectBytes(*seg.findObject(7))[0] == 43);
  CHECK(seg.findObject(5)->ts == seg5 + 1);
  CHECK(seg.findObject(7)->ts == seg7 + 1);
  CHECK(seg.ts() == before + 1);
}

TEST_CASE("segment images survive the wire") {
  Segment seg({3, 2}, 500, 4);
  seg.createObject(Oid({3, 2}, 5), 40, 3);
  seg.createObject(Oid({3, 2}, 9), 10, 0);
  SegmentImage img = seg.replicaImage();

  WireWriter w;
  img.serialize(w);
  Payload p = w.take();
  CHECK(p.size() == img.wireBytes());

  WireReader r(p);
  SegmentImage back = SegmentImage::deserialize(r);
  CHECK(r.done());
  CHECK(back.loc == img.loc);
  CHECK(back.ts == img.ts);
  CHECK(back.freeBytes == img.freeBytes);
  REQUIRE(back.directory.size() == 2);
  CHECK(back.directory[0].oid.bits == img.directory[0].oid.bits);
  CHECK(back.directory[1].refCount == 0);
  CHECK(back.data == img.data);
}

TEST_CASE("semaphores are per object and start free") {
  Segment seg({1, 0}, 500, 4);
  seg.createObject(Oid({1, 0}, 5), 8, 0);
  SemaphoreState& s = seg.semaphore(5);
  CHECK(s.value == 1);
  CHECK(s.heldBy == -1);
  s.value = 0;
  s.heldBy = 2;
  CHECK(seg.semaphore(5).heldBy == 2); // same state on re-lookup
  CHECK(seg.semaphore(9).value == 1);  // distinct object, distinct semaphore
}

TEST_CASE("holders track replica distribution") {
  Segment seg({1, 0}, 500, 4);
  seg.addHolder(1);
  seg.addHolder(3);
  CHECK(seg.isHeldBy(1));
  CHECK(seg.heldByOther(1));
  seg.removeHolder(3);
  CHECK_FALSE(seg.heldByOther(1));
  CHECK_THROWS(seg.removeHolder(3));
}

TEST_CASE("group creation tiles the ring and spreads segment ids") {
  ServerStorage s0(0, 8, {});
  GroupDescriptor g1 = s0.createGroup(MovementContext::Single, 3, 0);
  GroupDescriptor g2 = s0.createGroup(MovementContext::Segment, 2, 1);
  CHECK(g1.gid == 0);
  CHECK(g2.gid == 1);
  CHECK(g1.baseServer == 0);
  CHECK(g2.baseServer == 3); // advanced by the previous group's width

  // Segment id streams: rank r of the group takes ids congruent to
  // (r - base) mod width, stepping by width.
  ServerStorage s3(3, 8, {});
  s3.groups().insert(g2);
  Segment& a = s3.newSegment(g2);
  Segment& b = s3.newSegment(g2);
  CHECK(a.location().segment == 0);
  CHECK(b.location().segment == 2);

  ServerStorage s4(4, 8, {});
  s4.groups().insert(g2);
  CHECK(s4.newSegment(g2).location().segment == 1);
  CHECK(s4.newSegment(g2).location().segment == 3);
}

TEST_CASE("object creation fills owned segments in id order") {
  StorageConfig cfg;
  cfg.segmentDataBytes = 100;
  cfg.directoryEntries = 2;
  ServerStorage s(0, 1, cfg);
  GroupDescriptor g = s.createGroup(MovementContext::Single, 1, 0);
  // Placement never opens segments on its own; that is the nomination path.
  CHECK(!s.createObject(g, 40, 0, 0).has_value());

  s.newSegment(g);
  Segment* seg = nullptr;
  auto o1 = s.createObject(g, 40, 0, 0, &seg);
  REQUIRE(o1.has_value());
  CHECK(o1->location() == Location{0, 0});
  auto o2 = s.createObject(g, 40, 0, 0);
  REQUIRE(o2.has_value());
  CHECK(!s.createObject(g, 40, 0, 0).has_value()); // directory full
  s.newSegment(g);
  auto o3 = s.createObject(g, 40, 0, 0);
  REQUIRE(o3.has_value());
  CHECK(o3->location() == Location{0, 1}); // overflow lands in the new segment
  CHECK(o1->unique() != o2->unique());

  // In segment context a replica held elsewhere blocks further placement.
  GroupDescriptor gs = s.createGroup(MovementContext::Segment, 1, 0);
  s.newSegment(gs);
  auto c1 = s.createObject(gs, 10, 0, /*requesterRank=*/0);
  REQUIRE(c1.has_value());
  s.findSegment(c1->location())->addHolder(2);
  CHECK(!s.createObject(gs, 10, 0, 0).has_value()); // held elsewhere
  s.newSegment(gs);
  auto c2 = s.createObject(gs, 10, 0, 0);
  REQUIRE(c2.has_value());
  CHECK(c2->location().segment != c1->location().segment);
}
