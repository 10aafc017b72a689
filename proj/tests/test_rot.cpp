#include <doctest.h>

#include <map>
#include <random>
#include <vector>

#include "objstore/rot.hpp"

using namespace objstore;

namespace {

std::vector<UniqueId> lruOrder(const ResidentObjectTable& t) {
  std::vector<UniqueId> v;
  for (RotEntry* e = t.lru(); e; e = e->newer) v.push_back(e->oid.unique());
  return v;
}

} // namespace

TEST_CASE("find refreshes recency, peek does not") {
  ResidentObjectTable t;
  t.insert(Oid({0, 0}, 1));
  t.insert(Oid({0, 0}, 3));
  t.insert(Oid({0, 0}, 5));
  CHECK(lruOrder(t) == std::vector<UniqueId>{1, 3, 5});

  CHECK(t.find(1) != nullptr);
  CHECK(lruOrder(t) == std::vector<UniqueId>{3, 5, 1});

  CHECK(t.peek(3) != nullptr);
  CHECK(lruOrder(t) == std::vector<UniqueId>{3, 5, 1});

  CHECK(t.find(999) == nullptr);
  t.validate();
}

TEST_CASE("erase keeps both structures consistent") {
  ResidentObjectTable t;
  for (UniqueId id : {9u, 1u, 5u, 13u, 3u}) t.insert(Oid({0, 0}, id));
  t.erase(t.peek(5));
  t.validate();
  CHECK(t.size() == 4);
  CHECK(t.peek(5) == nullptr);
  CHECK(lruOrder(t) == std::vector<UniqueId>{9, 1, 13, 3});
}

TEST_CASE("randomised table agrees with a reference map") {
  ResidentObjectTable t;
  std::map<UniqueId, bool> ref; // id -> present
  std::vector<UniqueId> present;
  std::mt19937_64 rng(7);

  for (int step = 0; step < 100'000; ++step) {
    std::uint32_t action = std::uint32_t(rng() % 100);
    if (action < 45 || present.empty()) {
      UniqueId id = UniqueId((rng() % 50'000) * 2 + 1);
      if (ref.count(id)) {
        CHECK(t.peek(id) != nullptr);
      } else {
        t.insert(Oid({0, 0}, id));
        ref[id] = true;
        present.push_back(id);
      }
    } else if (action < 75) {
      UniqueId id = present[rng() % present.size()];
      RotEntry* e = t.find(id);
      REQUIRE(e != nullptr);
      CHECK(e->oid.unique() == id);
      CHECK(t.mru() == e);
    } else if (action < 90) {
      std::size_t i = rng() % present.size();
      UniqueId id = present[i];
      t.erase(t.peek(id));
      ref.erase(id);
      present[i] = present.back();
      present.pop_back();
    } else {
      UniqueId probe = UniqueId((rng() % 50'000) * 2 + 1);
      CHECK((t.peek(probe) != nullptr) == (ref.count(probe) > 0));
    }
    if (step % 5'000 == 0) t.validate();
  }
  t.validate();
  CHECK(t.size() == ref.size());

  // Balanced enough: depth within the red-black bound for this population.
  int n = int(t.size());
  int bound = 1;
  while ((1 << bound) < n + 1) ++bound;
  CHECK(t.maxDepth() <= 2 * bound + 1);
}
