#pragma once

#include <cstring>
#include <string>
#include <type_traits>

#include "objstore/lom.hpp"

namespace objstore {

class Space;

// A counted handle to an object. While any Ref points at an entry the entry
// itself survives space recovery (its replica may still be discarded and
// refetched on the next access).
class Ref {
public:
  Ref() = default;
  Ref(Lom* lom, RotEntry* e) : lom_(lom), e_(e) {
    if (e_) lom_->addRef(e_, 1);
  }
  Ref(const Ref& o) : Ref(o.lom_, o.e_) {}
  Ref(Ref&& o) noexcept : lom_(o.lom_), e_(o.e_) {
    o.lom_ = nullptr;
    o.e_ = nullptr;
  }
  Ref& operator=(const Ref& o) {
    if (this != &o) {
      release();
      lom_ = o.lom_;
      e_ = o.e_;
      if (e_) lom_->addRef(e_, 1);
    }
    return *this;
  }
  Ref& operator=(Ref&& o) noexcept {
    if (this != &o) {
      release();
      lom_ = o.lom_;
      e_ = o.e_;
      o.lom_ = nullptr;
      o.e_ = nullptr;
    }
    return *this;
  }
  ~Ref() { release(); }

  explicit operator bool() const { return e_ != nullptr; }
  Oid oid() const { return e_ ? e_->oid : kNullOid; }
  RotEntry* entry() const { return e_; }

private:
  void release() {
    if (e_) lom_->addRef(e_, -1);
    lom_ = nullptr;
    e_ = nullptr;
  }

  Lom* lom_ = nullptr;
  RotEntry* e_ = nullptr;
};

// Facade over one client's local object manager, the surface workloads are
// written against.
class Space {
public:
  Space(ActorContext& ctx, LomConfig cfg) : lom_(ctx, cfg) {}

  GroupId createGroup(MovementContext context, int width, int prefetchDepth = 0) {
    return lom_.createGroup(context, width, prefetchDepth);
  }
  Ref create(GroupId gid, std::uint32_t dataSize, std::uint32_t refCount) {
    return Ref(&lom_, lom_.createObject(gid, dataSize, refCount));
  }

  void readBytes(const Ref& r, std::uint32_t offset, void* out, std::uint32_t n) {
    lom_.read(require(r), offset, out, n);
  }
  void writeBytes(const Ref& r, std::uint32_t offset, const void* in, std::uint32_t n) {
    lom_.write(require(r), offset, in, n);
  }
  template <class T>
  T get(const Ref& r, std::uint32_t offset) {
    static_assert(std::is_trivially_copyable_v<T>);
    T v;
    lom_.read(require(r), offset, &v, sizeof v);
    return v;
  }
  template <class T>
  void put(const Ref& r, std::uint32_t offset, const T& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    lom_.write(require(r), offset, &v, sizeof v);
  }

  Ref slot(const Ref& r, std::uint32_t i) {
    return Ref(&lom_, lom_.refTarget(require(r), i));
  }
  void setSlot(const Ref& r, std::uint32_t i, const Ref& v) {
    lom_.setRefTarget(require(r), i, v.entry());
  }

  // Deferred slot l-value: the right-hand side is fully evaluated before the
  // slot is resolved, so `sp(a, i) = sp.create(...)` is safe.
  class SlotProxy {
  public:
    SlotProxy(Space* s, Ref container, std::uint32_t index)
        : space_(s), container_(std::move(container)), index_(index) {}
    SlotProxy& operator=(const Ref& v) {
      space_->setSlot(container_, index_, v);
      return *this;
    }
    operator Ref() { return space_->slot(container_, index_); }

  private:
    Space* space_;
    Ref container_;
    std::uint32_t index_;
  };
  SlotProxy operator()(const Ref& r, std::uint32_t i) { return SlotProxy(this, r, i); }

  void wait(const Ref& r) { lom_.wait(require(r)); }
  void signal(const Ref& r) { lom_.signal(require(r)); }
  void barrier() { lom_.synchronise(); }

  void name(const std::string& n, const Ref& r) { lom_.nameObject(n, r.oid()); }
  // Blocking; a null Ref means nothing is registered under the name.
  Ref named(const std::string& n) {
    Oid oid = lom_.objectNamed(n);
    return oid.isNull() ? Ref() : Ref(&lom_, lom_.handleOf(oid));
  }
  Ref fromOid(Oid oid) { return oid.isNull() ? Ref() : Ref(&lom_, lom_.handleOf(oid)); }

  void setStrategy(RecoveryStrategy s) { lom_.setStrategy(s); }
  void dumpCache() { lom_.dumpCache(); }
  void close() { lom_.close(); }

  Lom& lom() { return lom_; }

private:
  static RotEntry* require(const Ref& r) {
    if (!r) throw std::logic_error("operation on a null reference");
    return r.entry();
  }

  Lom lom_;
};

} // namespace objstore
