#pragma once

#include <optional>
#include <string>
#include <vector>

#include "objstore/ids.hpp"
#include "objstore/segment.hpp"
#include "objstore/wire.hpp"

// Payload layouts for every message tag. Sizes follow the field widths here,
// and payload size drives simulated transit cost, so keep fields honest.
namespace objstore::msg {

struct CreateGroup {
  MovementContext context = MovementContext::Single;
  std::uint32_t width = 1;
  std::uint32_t prefetchDepth = 0;
  std::uint64_t token = 0; // echoes back in the notify so the creator can match it

  Payload encode() const {
    WireWriter w;
    w.u8(std::uint8_t(context));
    w.u32(width);
    w.u32(prefetchDepth);
    w.u64(token);
    return w.take();
  }
  static CreateGroup decode(const Payload& p) {
    WireReader r(p);
    CreateGroup m;
    m.context = MovementContext(r.u8());
    m.width = r.u32();
    m.prefetchDepth = r.u32();
    m.token = r.u64();
    return m;
  }
};

struct GroupNotify {
  GroupDescriptor desc;
  std::uint32_t requester = 0; // client rank that asked for the group
  std::uint64_t token = 0;

  Payload encode() const {
    WireWriter w;
    w.u16(desc.gid);
    w.u8(std::uint8_t(desc.context));
    w.u32(std::uint32_t(desc.width));
    w.u32(std::uint32_t(desc.prefetchDepth));
    w.u32(std::uint32_t(desc.baseServer));
    w.u32(requester);
    w.u64(token);
    return w.take();
  }
  static GroupNotify decode(const Payload& p) {
    WireReader r(p);
    GroupNotify m;
    m.desc.gid = r.u16();
    m.desc.context = MovementContext(r.u8());
    m.desc.width = int(r.u32());
    m.desc.prefetchDepth = int(r.u32());
    m.desc.baseServer = int(r.u32());
    m.requester = r.u32();
    m.token = r.u64();
    return m;
  }
};

struct CreateObject {
  GroupId gid = kNullGroup;
  std::uint32_t dataSize = 0;
  std::uint32_t refCount = 0;
  std::uint32_t requester = 0; // client rank awaiting the reply
  std::uint32_t hops = 0;      // servers visited while circulating
  std::uint8_t nominated = 0;  // base ordered this server to open a segment

  Payload encode() const {
    WireWriter w;
    w.u16(gid);
    w.u32(dataSize);
    w.u32(refCount);
    w.u32(requester);
    w.u32(hops);
    w.u8(nominated);
    return w.take();
  }
  static CreateObject decode(const Payload& p) {
    WireReader r(p);
    CreateObject m;
    m.gid = r.u16();
    m.dataSize = r.u32();
    m.refCount = r.u32();
    m.requester = r.u32();
    m.hops = r.u32();
    m.nominated = r.u8();
    return m;
  }
};

struct CreateReply {
  Oid oid;
  std::uint32_t offset = 0; // allocation offset, lets a holder mirror the master
  Timestamp segTs = 0;
  std::optional<SegmentImage> image;

  Payload encode() const {
    WireWriter w;
    w.oid(oid);
    w.u32(offset);
    w.u64(segTs);
    w.u8(image ? 1 : 0);
    if (image) image->serialize(w);
    return w.take();
  }
  static CreateReply decode(const Payload& p) {
    WireReader r(p);
    CreateReply m;
    m.oid = r.oid();
    m.offset = r.u32();
    m.segTs = r.u64();
    if (r.u8()) m.image = SegmentImage::deserialize(r);
    return m;
  }
};

struct Fetch {
  Oid oid;

  Payload encode() const {
    WireWriter w;
    w.oid(oid);
    return w.take();
  }
  static Fetch decode(const Payload& p) {
    WireReader r(p);
    return Fetch{r.oid()};
  }
};

struct ReplicaObject {
  std::uint8_t prefetched = 0;
  Oid oid;
  Timestamp ts = 0;
  std::uint32_t dataSize = 0;
  std::uint32_t refCount = 0;
  std::vector<std::uint8_t> bytes; // data part then reference part

  Payload encode() const {
    WireWriter w;
    w.u8(prefetched);
    w.oid(oid);
    w.u64(ts);
    w.u32(dataSize);
    w.u32(refCount);
    w.bytes(bytes.data(), bytes.size());
    return w.take();
  }
  static ReplicaObject decode(const Payload& p) {
    WireReader r(p);
    ReplicaObject m;
    m.prefetched = r.u8();
    m.oid = r.oid();
    m.ts = r.u64();
    m.dataSize = r.u32();
    m.refCount = r.u32();
    m.bytes.resize(objectExtent(m.dataSize, m.refCount));
    r.bytes(m.bytes.data(), m.bytes.size());
    return m;
  }
};

struct ReplicaSegment {
  SegmentImage image;

  Payload encode() const {
    WireWriter w;
    image.serialize(w);
    return w.take();
  }
  static ReplicaSegment decode(const Payload& p) {
    WireReader r(p);
    return ReplicaSegment{SegmentImage::deserialize(r)};
  }
};

struct ReturnedObject {
  Oid oid;
  std::vector<std::uint8_t> bytes;
};

struct ReturnObjects {
  std::vector<ReturnedObject> objects;

  Payload encode() const {
    WireWriter w;
    w.u32(std::uint32_t(objects.size()));
    for (const ReturnedObject& o : objects) {
      w.oid(o.oid);
      w.u32(std::uint32_t(o.bytes.size()));
      w.bytes(o.bytes.data(), o.bytes.size());
    }
    return w.take();
  }
  static ReturnObjects decode(const Payload& p) {
    WireReader r(p);
    ReturnObjects m;
    m.objects.resize(r.u32());
    for (ReturnedObject& o : m.objects) {
      o.oid = r.oid();
      o.bytes.resize(r.u32());
      r.bytes(o.bytes.data(), o.bytes.size());
    }
    return m;
  }
};

struct ReturnSegment {
  std::uint8_t discard = 0; // eviction return: server should drop us as holder
  std::vector<UniqueId> dirty;
  SegmentImage image;

  Payload encode() const {
    WireWriter w;
    w.u8(discard);
    w.u32(std::uint32_t(dirty.size()));
    for (UniqueId id : dirty) w.u32(id);
    image.serialize(w);
    return w.take();
  }
  static ReturnSegment decode(const Payload& p) {
    WireReader r(p);
    ReturnSegment m;
    m.discard = r.u8();
    m.dirty.resize(r.u32());
    for (UniqueId& id : m.dirty) id = r.u32();
    m.image = SegmentImage::deserialize(r);
    return m;
  }
};

struct DiscardNotice {
  Location loc;

  Payload encode() const {
    WireWriter w;
    w.location(loc);
    return w.take();
  }
  static DiscardNotice decode(const Payload& p) {
    WireReader r(p);
    return DiscardNotice{r.location()};
  }
};

// One receipt acknowledges one return message. New master timestamps ride
// along so a client that kept its replica can stay current.
struct Receipt {
  std::uint8_t kind = 0; // 0 objects, 1 segment
  Location loc;
  Timestamp segTs = 0;
  std::vector<std::pair<Oid, Timestamp>> objects;

  Payload encode() const {
    WireWriter w;
    w.u8(kind);
    w.location(loc);
    w.u64(segTs);
    w.u32(std::uint32_t(objects.size()));
    for (auto& [oid, ts] : objects) {
      w.oid(oid);
      w.u64(ts);
    }
    return w.take();
  }
  static Receipt decode(const Payload& p) {
    WireReader r(p);
    Receipt m;
    m.kind = r.u8();
    m.loc = r.location();
    m.segTs = r.u64();
    m.objects.resize(r.u32());
    for (auto& [oid, ts] : m.objects) {
      oid = r.oid();
      ts = r.u64();
    }
    return m;
  }
};

struct AcceptSegment {
  Location loc;

  Payload encode() const {
    WireWriter w;
    w.location(loc);
    return w.take();
  }
  static AcceptSegment decode(const Payload& p) {
    WireReader r(p);
    return AcceptSegment{r.location()};
  }
};

struct Name {
  std::string name;
  Oid oid;

  Payload encode() const {
    WireWriter w;
    w.str(name);
    w.oid(oid);
    return w.take();
  }
  static Name decode(const Payload& p) {
    WireReader r(p);
    Name m;
    m.name = r.str();
    m.oid = r.oid();
    return m;
  }
};

struct NamedQuery {
  std::string name;

  Payload encode() const {
    WireWriter w;
    w.str(name);
    return w.take();
  }
  static NamedQuery decode(const Payload& p) {
    WireReader r(p);
    return NamedQuery{r.str()};
  }
};

struct NamedReply {
  Oid oid;

  Payload encode() const {
    WireWriter w;
    w.oid(oid);
    return w.take();
  }
  static NamedReply decode(const Payload& p) {
    WireReader r(p);
    return NamedReply{r.oid()};
  }
};

struct Wait {
  Oid oid;
  std::optional<Timestamp> replicaTs; // absent: client holds no replica

  Payload encode() const {
    WireWriter w;
    w.oid(oid);
    w.u8(replicaTs ? 1 : 0);
    w.u64(replicaTs.value_or(0));
    return w.take();
  }
  static Wait decode(const Payload& p) {
    WireReader r(p);
    Wait m;
    m.oid = r.oid();
    bool has = r.u8() != 0;
    Timestamp ts = r.u64();
    if (has) m.replicaTs = ts;
    return m;
  }
};

struct Grant {
  Oid oid;
  std::uint8_t replicaKind = 0; // 0 none, 1 object, 2 segment
  std::optional<ReplicaObject> object;
  std::optional<SegmentImage> segment;

  Payload encode() const {
    WireWriter w;
    w.oid(oid);
    w.u8(replicaKind);
    if (replicaKind == 1) {
      Payload obj = object->encode();
      w.u32(std::uint32_t(obj.size()));
      w.bytes(obj.data(), obj.size());
    } else if (replicaKind == 2) {
      segment->serialize(w);
    }
    return w.take();
  }
  static Grant decode(const Payload& p) {
    WireReader r(p);
    Grant m;
    m.oid = r.oid();
    m.replicaKind = r.u8();
    if (m.replicaKind == 1) {
      Payload obj(r.u32());
      r.bytes(obj.data(), obj.size());
      m.object = ReplicaObject::decode(obj);
    } else if (m.replicaKind == 2) {
      m.segment = SegmentImage::deserialize(r);
    }
    return m;
  }
};

struct Signal {
  Oid oid;

  Payload encode() const {
    WireWriter w;
    w.oid(oid);
    return w.take();
  }
  static Signal decode(const Payload& p) {
    WireReader r(p);
    return Signal{r.oid()};
  }
};

struct PrefetchReq {
  Oid oid;
  std::uint32_t client = 0;
  std::uint32_t remainingDepth = 0;

  Payload encode() const {
    WireWriter w;
    w.oid(oid);
    w.u32(client);
    w.u32(remainingDepth);
    return w.take();
  }
  static PrefetchReq decode(const Payload& p) {
    WireReader r(p);
    PrefetchReq m;
    m.oid = r.oid();
    m.client = r.u32();
    m.remainingDepth = r.u32();
    return m;
  }
};

} // namespace objstore::msg
