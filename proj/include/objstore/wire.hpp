#pragma once

#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include "objstore/ids.hpp"

namespace objstore {

// Stable tag codes; trace files and tests rely on the numbering.
enum class Tag : std::uint8_t {
  CreateGroup = 0,
  GroupNotify = 1,
  CreateObject = 2,
  CreateReply = 3,
  Fetch = 4,
  ReplicaObject = 5,
  ReplicaSegment = 6,
  ReturnObjects = 7,
  ReturnSegment = 8,
  DiscardNotice = 9,
  Receipt = 10,
  AcceptSegment = 11,
  Name = 12,
  NamedQuery = 13,
  NamedReply = 14,
  Wait = 15,
  Grant = 16,
  Signal = 17,
  Sync = 18,
  SyncAck = 19,
  Prefetch = 20,
  Close = 21,
};

const char* tagName(Tag t);

using Payload = std::vector<std::uint8_t>;

// Little-endian scalar packing. Payload length drives simulated transit cost,
// so writers should reflect realistic field sizes.
class WireWriter {
public:
  Payload take() { return std::move(buf_); }
  std::size_t size() const { return buf_.size(); }

  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) { raw(&v, 2); }
  void u32(std::uint32_t v) { raw(&v, 4); }
  void u64(std::uint64_t v) { raw(&v, 8); }
  void f64(double v) { raw(&v, 8); }
  void oid(Oid o) { u64(o.bits); }
  void location(Location l) {
    u16(l.group);
    u16(l.segment);
  }
  void bytes(const std::uint8_t* p, std::size_t n) {
    buf_.insert(buf_.end(), p, p + n);
  }
  void str(const std::string& s) {
    u32(std::uint32_t(s.size()));
    bytes(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
  }

private:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  Payload buf_;
};

class WireReader {
public:
  explicit WireReader(const Payload& p) : buf_(p.data()), size_(p.size()) {}

  std::uint8_t u8() { return *ptr(1); }
  std::uint16_t u16() { return scalar<std::uint16_t>(); }
  std::uint32_t u32() { return scalar<std::uint32_t>(); }
  std::uint64_t u64() { return scalar<std::uint64_t>(); }
  double f64() { return scalar<double>(); }
  Oid oid() { return Oid(u64()); }
  Location location() {
    GroupId g = u16();
    SegmentId s = u16();
    return {g, s};
  }
  void bytes(std::uint8_t* out, std::size_t n) { std::memcpy(out, ptr(n), n); }
  std::string str() {
    std::uint32_t n = u32();
    const std::uint8_t* p = ptr(n);
    return std::string(reinterpret_cast<const char*>(p), n);
  }
  bool done() const { return pos_ == size_; }

private:
  template <typename T>
  T scalar() {
    T v;
    std::memcpy(&v, ptr(sizeof(T)), sizeof(T));
    return v;
  }
  const std::uint8_t* ptr(std::size_t n) {
    if (pos_ + n > size_) throw std::runtime_error("wire: truncated payload");
    const std::uint8_t* p = buf_ + pos_;
    pos_ += n;
    return p;
  }
  const std::uint8_t* buf_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

} // namespace objstore
