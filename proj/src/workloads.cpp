#include "objstore/workloads.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <sstream>
#include <vector>

namespace objstore::workloads {

namespace {

// Order-sensitive fold of raw double bits, reduced below 2^52 so the value
// survives a trip through a double-typed metric unchanged.
struct BitFold {
  std::uint64_t h = 1469598103934665603ull;
  void add(std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ull;
  }
  void add(double d) {
    std::uint64_t v;
    std::memcpy(&v, &d, 8);
    add(v);
  }
  double value() const { return double(h & ((1ull << 52) - 1)); }
};

// Shared force kernels. noinline pins one code sequence, so the cached run
// and its in-memory oracle round identically and compare bit for bit.
[[gnu::noinline]] void pairAccSoft(double xi, double yi, double zi, double xj, double yj,
                                   double zj, double mj, double& ax, double& ay, double& az) {
  double dx = xj - xi, dy = yj - yi, dz = zj - zi;
  double r2 = dx * dx + dy * dy + dz * dz + 1e-6;
  double inv = mj / (r2 * std::sqrt(r2));
  ax += dx * inv;
  ay += dy * inv;
  az += dz * inv;
}

[[gnu::noinline]] void pairForce(double xi, double yi, double zi, double xj, double yj,
                                 double zj, double mj, double& fx, double& fy, double& fz) {
  double dx = xj - xi, dy = yj - yi, dz = zj - zi;
  double r2 = dx * dx + dy * dy + dz * dz;
  double inv = mj / (r2 * std::sqrt(r2));
  fx += dx * inv;
  fy += dy * inv;
  fz += dz * inv;
}

} // namespace

// --- binary search tree -------------------------------------------------------

ClientBody btreeBody(BtreeParams p) {
  return [p](Space& sp, int rank, ClientResult& out) {
    std::mt19937_64 rng(p.seed + 1000003ull * std::uint64_t(rank));
    int n = p.nodes;
    std::vector<std::uint64_t> keys(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) keys[std::size_t(i)] = std::uint64_t(i) * 2654435761ull + 12345;
    std::shuffle(keys.begin(), keys.end(), rng);

    GroupId gid = sp.createGroup(p.context, p.width, p.prefetchDepth);
    std::uint32_t dataSize = 8 + p.fill;

    struct ONode {
      std::uint64_t key;
      int child[2] = {-1, -1};
    };
    std::vector<ONode> oracle;
    oracle.reserve(std::size_t(n));

    Ref root = sp.create(gid, dataSize, 2);
    sp.put<std::uint64_t>(root, 0, keys[0]);
    oracle.push_back({keys[0], {-1, -1}});

    for (int i = 1; i < n; ++i) {
      std::uint64_t key = keys[std::size_t(i)];
      Ref node = root;
      int oi = 0;
      for (;;) {
        std::uint64_t nodeKey = sp.get<std::uint64_t>(node, 0);
        std::uint32_t side = key < nodeKey ? 0 : 1;
        Ref child = sp.slot(node, side);
        if (!child) {
          Ref leaf = sp.create(gid, dataSize, 2);
          sp.put<std::uint64_t>(leaf, 0, key);
          sp.setSlot(node, side, leaf);
          oracle.push_back({key, {-1, -1}});
          oracle[std::size_t(oi)].child[side] = int(oracle.size()) - 1;
          break;
        }
        oi = oracle[std::size_t(oi)].child[side];
        node = child;
      }
    }

    BitFold fold, ofold;
    std::mt19937_64 searchRng(p.seed * 7919 + std::uint64_t(rank));
    for (int s = 0; s < p.searches; ++s) {
      std::uint64_t target = keys[std::size_t(searchRng() % std::uint64_t(n))];

      Ref node = root;
      std::uint64_t depth = 0;
      for (;;) {
        std::uint64_t nodeKey = sp.get<std::uint64_t>(node, 0);
        if (nodeKey == target) break;
        node = sp.slot(node, target < nodeKey ? 0 : 1);
        if (!node) throw std::logic_error("search fell off the tree");
        ++depth;
      }
      fold.add(target);
      fold.add(depth);

      int oi = 0;
      std::uint64_t odepth = 0;
      while (oracle[std::size_t(oi)].key != target) {
        oi = oracle[std::size_t(oi)].child[target < oracle[std::size_t(oi)].key ? 0 : 1];
        ++odepth;
      }
      ofold.add(target);
      ofold.add(odepth);
    }
    out.metrics["btree_checksum"] = fold.value();
    out.metrics["btree_oracle"] = ofold.value();
  };
}

// --- all-pairs gravity ----------------------------------------------------------

ClientBody nbody2Body(Nbody2Params p) {
  return [p](Space& sp, int rank, ClientResult& out) {
    std::mt19937_64 rng(p.seed + 1000003ull * std::uint64_t(rank));
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    int n = p.particles;

    std::vector<double> m(static_cast<std::size_t>(n)), x(static_cast<std::size_t>(n)),
        y(static_cast<std::size_t>(n)), z(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      m[std::size_t(i)] = 0.5 + uni(rng);
      x[std::size_t(i)] = uni(rng);
      y[std::size_t(i)] = uni(rng);
      z[std::size_t(i)] = uni(rng);
    }

    // Record: m, x, y, z, vx, vy, vz.
    std::uint32_t dataSize = 56 + p.fill;
    GroupId gidA = sp.createGroup(p.context, p.width, p.prefetchDepth);
    GroupId gidB = sp.createGroup(p.context, p.width, p.prefetchDepth);

    auto makeCopy = [&](GroupId gid) {
      std::vector<Ref> objs;
      objs.reserve(std::size_t(n));
      for (int i = 0; i < n; ++i) {
        Ref r = sp.create(gid, dataSize, 0);
        sp.put<double>(r, 0, m[std::size_t(i)]);
        sp.put<double>(r, 8, x[std::size_t(i)]);
        sp.put<double>(r, 16, y[std::size_t(i)]);
        sp.put<double>(r, 24, z[std::size_t(i)]);
        sp.put<double>(r, 32, 0.0);
        sp.put<double>(r, 40, 0.0);
        sp.put<double>(r, 48, 0.0);
        objs.push_back(std::move(r));
      }
      Ref idx = sp.create(gid, 8, std::uint32_t(n));
      for (int i = 0; i < n; ++i) sp.setSlot(idx, std::uint32_t(i), objs[std::size_t(i)]);
      return idx;
    };
    // The first step scans the copy made last: it is the one still (mostly)
    // in memory after the creation phase, so the scan starts against a warm
    // working set instead of faulting the cold copy back one by one.
    Ref nxt = makeCopy(gidA);
    Ref cur = makeCopy(gidB);

    // Oracle state: two plain copies updated with the identical kernel.
    struct OState {
      std::vector<double> m, x, y, z, vx, vy, vz;
    };
    OState oc{m, x, y, z, std::vector<double>(std::size_t(n), 0.0),
              std::vector<double>(std::size_t(n), 0.0), std::vector<double>(std::size_t(n), 0.0)};
    OState on = oc;

    for (int step = 0; step < p.steps; ++step) {
      for (int i = 0; i < n; ++i) {
        Ref pi = sp.slot(cur, std::uint32_t(i));
        double xi = sp.get<double>(pi, 8);
        double yi = sp.get<double>(pi, 16);
        double zi = sp.get<double>(pi, 24);
        double ax = 0, ay = 0, az = 0;
        for (int j = 0; j < n; ++j) {
          if (j == i) continue;
          Ref pj = sp.slot(cur, std::uint32_t(j));
          double xj = sp.get<double>(pj, 8);
          double yj = sp.get<double>(pj, 16);
          double zj = sp.get<double>(pj, 24);
          double mj = sp.get<double>(pj, 0);
          pairAccSoft(xi, yi, zi, xj, yj, zj, mj, ax, ay, az);
        }
        double vx = sp.get<double>(pi, 32) + ax;
        double vy = sp.get<double>(pi, 40) + ay;
        double vz = sp.get<double>(pi, 48) + az;
        Ref qi = sp.slot(nxt, std::uint32_t(i));
        sp.put<double>(qi, 0, sp.get<double>(pi, 0));
        sp.put<double>(qi, 8, xi + vx);
        sp.put<double>(qi, 16, yi + vy);
        sp.put<double>(qi, 24, zi + vz);
        sp.put<double>(qi, 32, vx);
        sp.put<double>(qi, 40, vy);
        sp.put<double>(qi, 48, vz);
      }
      std::swap(cur, nxt);

      for (int i = 0; i < n; ++i) {
        double xi = oc.x[std::size_t(i)], yi = oc.y[std::size_t(i)], zi = oc.z[std::size_t(i)];
        double ax = 0, ay = 0, az = 0;
        for (int j = 0; j < n; ++j) {
          if (j == i) continue;
          pairAccSoft(xi, yi, zi, oc.x[std::size_t(j)], oc.y[std::size_t(j)],
                      oc.z[std::size_t(j)], oc.m[std::size_t(j)], ax, ay, az);
        }
        double vx = oc.vx[std::size_t(i)] + ax;
        double vy = oc.vy[std::size_t(i)] + ay;
        double vz = oc.vz[std::size_t(i)] + az;
        on.m[std::size_t(i)] = oc.m[std::size_t(i)];
        on.x[std::size_t(i)] = xi + vx;
        on.y[std::size_t(i)] = yi + vy;
        on.z[std::size_t(i)] = zi + vz;
        on.vx[std::size_t(i)] = vx;
        on.vy[std::size_t(i)] = vy;
        on.vz[std::size_t(i)] = vz;
      }
      std::swap(oc, on);
    }

    BitFold fold, ofold;
    for (int i = 0; i < n; ++i) {
      Ref pi = sp.slot(cur, std::uint32_t(i));
      fold.add(sp.get<double>(pi, 8));
      fold.add(sp.get<double>(pi, 16));
      fold.add(sp.get<double>(pi, 24));
      ofold.add(oc.x[std::size_t(i)]);
      ofold.add(oc.y[std::size_t(i)]);
      ofold.add(oc.z[std::size_t(i)]);
    }
    out.metrics["n2_checksum"] = fold.value();
    out.metrics["n2_oracle"] = ofold.value();
  };
}

// --- Barnes-Hut oct-tree -----------------------------------------------------------

namespace {

// Node record, doubles at fixed offsets:
//   0 cx   8 cy  16 cz  24 half  32 mass  40 sx  48 sy  56 sz
//  64 count  72 leaf  80 px  88 py  96 pz  104 pad
// followed by p.fill bytes; 8 child reference slots.
constexpr std::uint32_t kOctData = 112;

struct OctWork {
  OctParams p;
  std::vector<double> px, py, pz, pm;

  void generate() {
    std::mt19937_64 rng(p.seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    int n = p.particles;
    px.resize(std::size_t(n));
    py.resize(std::size_t(n));
    pz.resize(std::size_t(n));
    pm.resize(std::size_t(n));
    for (int i = 0; i < n; ++i) {
      px[std::size_t(i)] = uni(rng);
      py[std::size_t(i)] = uni(rng);
      pz[std::size_t(i)] = uni(rng);
      pm[std::size_t(i)] = 0.5 + uni(rng);
    }
  }

  static std::uint32_t octant(double x, double y, double z, double cx, double cy, double cz) {
    return (x > cx ? 1u : 0u) | (y > cy ? 2u : 0u) | (z > cz ? 4u : 0u);
  }

  // Child cell geometry for an octant of (cx, cy, cz, half).
  static void childCell(std::uint32_t o, double cx, double cy, double cz, double half,
                        double& ox, double& oy, double& oz, double& oh) {
    oh = half / 2;
    ox = cx + ((o & 1) ? oh : -oh);
    oy = cy + ((o & 2) ? oh : -oh);
    oz = cz + ((o & 4) ? oh : -oh);
  }

  Ref makeLeaf(Space& sp, GroupId gid, double cx, double cy, double cz, double half, int i) {
    Ref node = sp.create(gid, kOctData + p.fill, 8);
    sp.put<double>(node, 0, cx);
    sp.put<double>(node, 8, cy);
    sp.put<double>(node, 16, cz);
    sp.put<double>(node, 24, half);
    sp.put<double>(node, 32, pm[std::size_t(i)]);
    sp.put<double>(node, 40, pm[std::size_t(i)] * px[std::size_t(i)]);
    sp.put<double>(node, 48, pm[std::size_t(i)] * py[std::size_t(i)]);
    sp.put<double>(node, 56, pm[std::size_t(i)] * pz[std::size_t(i)]);
    sp.put<double>(node, 64, 1.0);
    sp.put<double>(node, 72, 1.0);
    sp.put<double>(node, 80, px[std::size_t(i)]);
    sp.put<double>(node, 88, py[std::size_t(i)]);
    sp.put<double>(node, 96, pz[std::size_t(i)]);
    // A fresh node must reach its master before another client can see a
    // reference to it; an uncontended wait/signal pair flushes it.
    sp.wait(node);
    sp.signal(node);
    return node;
  }

  // Hand-over-hand insertion: a node is only read or written while its
  // semaphore is held, and signalling flushes the update to the master.
  void insert(Space& sp, GroupId gid, const Ref& root, int i) {
    double x = px[std::size_t(i)], y = py[std::size_t(i)], z = pz[std::size_t(i)];
    double mass = pm[std::size_t(i)];
    Ref cur = root;
    sp.wait(cur);
    for (;;) {
      double count = sp.get<double>(cur, 64);
      double cx = sp.get<double>(cur, 0);
      double cy = sp.get<double>(cur, 8);
      double cz = sp.get<double>(cur, 16);
      double half = sp.get<double>(cur, 24);
      if (count == 0.0) { // only an untouched root
        sp.put<double>(cur, 32, mass);
        sp.put<double>(cur, 40, mass * x);
        sp.put<double>(cur, 48, mass * y);
        sp.put<double>(cur, 56, mass * z);
        sp.put<double>(cur, 64, 1.0);
        sp.put<double>(cur, 72, 1.0);
        sp.put<double>(cur, 80, x);
        sp.put<double>(cur, 88, y);
        sp.put<double>(cur, 96, z);
        sp.signal(cur);
        return;
      }
      if (sp.get<double>(cur, 72) == 1.0) {
        // Split: push the resident particle one level down, keep aggregates.
        double qx = sp.get<double>(cur, 80);
        double qy = sp.get<double>(cur, 88);
        double qz = sp.get<double>(cur, 96);
        double qm = sp.get<double>(cur, 32);
        int qi = -1;
        for (int v = 0; v < p.particles; ++v) {
          if (px[std::size_t(v)] == qx && py[std::size_t(v)] == qy && pz[std::size_t(v)] == qz &&
              pm[std::size_t(v)] == qm) {
            qi = v;
            break;
          }
        }
        if (qi < 0) throw std::logic_error("resident particle not in the generated set");
        std::uint32_t qo = octant(qx, qy, qz, cx, cy, cz);
        double ox, oy, oz, oh;
        childCell(qo, cx, cy, cz, half, ox, oy, oz, oh);
        Ref child = makeLeaf(sp, gid, ox, oy, oz, oh, qi);
        sp.put<double>(cur, 72, 0.0);
        sp.setSlot(cur, qo, child);
      }
      // Internal node: fold the new particle into the aggregates.
      sp.put<double>(cur, 32, sp.get<double>(cur, 32) + mass);
      sp.put<double>(cur, 40, sp.get<double>(cur, 40) + mass * x);
      sp.put<double>(cur, 48, sp.get<double>(cur, 48) + mass * y);
      sp.put<double>(cur, 56, sp.get<double>(cur, 56) + mass * z);
      sp.put<double>(cur, 64, count + 1.0);
      std::uint32_t o = octant(x, y, z, cx, cy, cz);
      Ref child = sp.slot(cur, o);
      if (!child) {
        double ox, oy, oz, oh;
        childCell(o, cx, cy, cz, half, ox, oy, oz, oh);
        Ref leaf = makeLeaf(sp, gid, ox, oy, oz, oh, i);
        sp.setSlot(cur, o, leaf);
        sp.signal(cur);
        return;
      }
      sp.wait(child);
      sp.signal(cur);
      cur = child;
    }
  }

  void walk(Space& sp, const Ref& node, int target, double theta, double& fx, double& fy,
            double& fz) {
    double count = sp.get<double>(node, 64);
    if (count == 0.0) return;
    double tx = px[std::size_t(target)], ty = py[std::size_t(target)],
           tz = pz[std::size_t(target)];
    if (sp.get<double>(node, 72) == 1.0) {
      double qx = sp.get<double>(node, 80);
      double qy = sp.get<double>(node, 88);
      double qz = sp.get<double>(node, 96);
      if (qx == tx && qy == ty && qz == tz) return;
      pairForce(tx, ty, tz, qx, qy, qz, sp.get<double>(node, 32), fx, fy, fz);
      return;
    }
    double mass = sp.get<double>(node, 32);
    double comx = sp.get<double>(node, 40) / mass;
    double comy = sp.get<double>(node, 48) / mass;
    double comz = sp.get<double>(node, 56) / mass;
    double half = sp.get<double>(node, 24);
    double dx = comx - tx, dy = comy - ty, dz = comz - tz;
    double d2 = dx * dx + dy * dy + dz * dz;
    double size = 2 * half;
    if (size * size < theta * theta * d2) {
      pairForce(tx, ty, tz, comx, comy, comz, mass, fx, fy, fz);
      return;
    }
    for (std::uint32_t o = 0; o < 8; ++o) {
      Ref child = sp.slot(node, o);
      if (child) walk(sp, child, target, theta, fx, fy, fz);
    }
  }
};

} // namespace

ClientBody octBody(OctParams p) {
  return [p](Space& sp, int rank, ClientResult& out) {
    OctWork w{p, {}, {}, {}, {}};
    w.generate();

    Ref root;
    GroupId gid;
    if (rank == 0) {
      gid = sp.createGroup(p.context, p.width, p.prefetchDepth);
      root = sp.create(gid, kOctData + p.fill, 8);
      sp.put<double>(root, 0, 0.5);
      sp.put<double>(root, 8, 0.5);
      sp.put<double>(root, 16, 0.5);
      sp.put<double>(root, 24, 0.5);
      sp.put<double>(root, 64, 0.0);
      sp.put<double>(root, 72, 1.0);
      sp.wait(root);
      sp.signal(root);
      sp.name("oct.root", root);
    }
    sp.barrier();
    if (rank != 0) {
      root = sp.named("oct.root");
      if (!root) throw std::logic_error("tree root was never registered");
      gid = root.oid().location().group;
    }

    for (int i = 0; i < p.particles; ++i)
      if (i % p.clients == rank) w.insert(sp, gid, root, i);

    // Everyone returns their updates and starts the read phase from masters.
    sp.barrier();
    sp.dumpCache();
    sp.barrier();

    double errExact = 0.0, errApprox = 0.0;
    BitFold fold;
    for (int s = 0; s < std::min(p.forceSamples, p.particles); ++s) {
      if (s % p.clients != rank) continue;
      double ax = 0, ay = 0, az = 0;
      w.walk(sp, root, s, p.theta, ax, ay, az);
      fold.add(ax);
      fold.add(ay);
      fold.add(az);
      if (!p.oracleWalk) continue;
      double fx = 0, fy = 0, fz = 0;
      w.walk(sp, root, s, 0.0, fx, fy, fz);
      fold.add(fx);
      fold.add(fy);
      fold.add(fz);
      double dx = 0, dy = 0, dz = 0;
      for (int j = 0; j < p.particles; ++j) {
        if (j == s) continue;
        pairForce(w.px[std::size_t(s)], w.py[std::size_t(s)], w.pz[std::size_t(s)],
                  w.px[std::size_t(j)], w.py[std::size_t(j)], w.pz[std::size_t(j)],
                  w.pm[std::size_t(j)], dx, dy, dz);
      }
      double norm = std::sqrt(dx * dx + dy * dy + dz * dz);
      double de = std::sqrt((fx - dx) * (fx - dx) + (fy - dy) * (fy - dy) + (fz - dz) * (fz - dz));
      double da = std::sqrt((ax - dx) * (ax - dx) + (ay - dy) * (ay - dy) + (az - dz) * (az - dz));
      errExact = std::max(errExact, de / norm);
      errApprox = std::max(errApprox, da / norm);
    }
    out.metrics["oct_checksum"] = fold.value();
    out.metrics["oct_theta0_relerr"] = errExact;
    out.metrics["oct_theta_relerr"] = errApprox;
  };
}

// --- plucked string -----------------------------------------------------------------

ClientBody pluckBody(PluckParams p) {
  return [p](Space& sp, int rank, ClientResult& out) {
    int M = p.elements, k = p.clients;
    int lo = rank * M / k, hi = (rank + 1) * M / k;
    if (hi - lo < 2) throw std::invalid_argument("pluck blocks need at least two elements");
    int pk = p.pluckAt >= 0 ? p.pluckAt : M / 4;
    if (pk < 1) pk = 1;
    if (pk > M - 2) pk = M - 2;
    auto shape = [&](int i) {
      return i <= pk ? p.height * double(i) / double(pk)
                     : p.height * double(M - 1 - i) / double(M - 1 - pk);
    };

    GroupId gid = sp.createGroup(p.context, p.width, p.prefetchDepth);
    std::uint32_t dataSize = 8 + p.fill;

    // Two copies of the block: even steps read copy 0, odd steps read copy 1.
    std::vector<Ref> own[2];
    for (int c = 0; c < 2; ++c) {
      own[c].reserve(std::size_t(hi - lo));
      for (int i = lo; i < hi; ++i) {
        Ref r = sp.create(gid, dataSize, 0);
        sp.put<double>(r, 0, shape(i));
        own[c].push_back(std::move(r));
      }
    }
    auto endName = [&](int client, int copy, char side) {
      std::ostringstream s;
      s << "pluck." << client << "." << copy << "." << side;
      return s.str();
    };
    for (int c = 0; c < 2; ++c) {
      sp.name(endName(rank, c, 'L'), own[c].front());
      sp.name(endName(rank, c, 'R'), own[c].back());
    }
    // Flush the ends neighbours read first (copy 0) so masters carry the
    // initial shape.
    sp.wait(own[0].front());
    sp.signal(own[0].front());
    sp.wait(own[0].back());
    sp.signal(own[0].back());

    sp.barrier();
    Ref nbrL[2], nbrR[2];
    if (rank > 0)
      for (int c = 0; c < 2; ++c) {
        nbrL[c] = sp.named(endName(rank - 1, c, 'R'));
        if (!nbrL[c]) throw std::logic_error("left neighbour ends were never registered");
      }
    if (rank < k - 1)
      for (int c = 0; c < 2; ++c) {
        nbrR[c] = sp.named(endName(rank + 1, c, 'L'));
        if (!nbrR[c]) throw std::logic_error("right neighbour ends were never registered");
      }
    sp.barrier(); // name lookups vary per rank; realign before the timed loop

    // Oracle: the whole string, stepped sequentially with the same stencil.
    std::vector<double> arr[2];
    arr[0].resize(std::size_t(M));
    arr[1].resize(std::size_t(M));
    for (int i = 0; i < M; ++i) arr[0][std::size_t(i)] = arr[1][std::size_t(i)] = shape(i);

    for (int t = 1; t <= p.steps; ++t) {
      int rc = (t + 1) % 2; // copy holding x(t)
      int wc = t % 2;       // copy holding x(t-1), overwritten with x(t+1)

      if (rank > 0) sp.wait(nbrL[rc]);
      if (rank < k - 1) sp.wait(nbrR[rc]);
      // Acquire the copy about to be written.  Its last readers were the
      // neighbours one whole step ago, so their reads are already signalled
      // by the time this wait can reach the server.
      sp.wait(own[wc].front());
      sp.wait(own[wc].back());
      double xL = rank > 0 ? sp.get<double>(nbrL[rc], 0) : 0.0;
      double xR = rank < k - 1 ? sp.get<double>(nbrR[rc], 0) : 0.0;

      for (int i = lo; i < hi; ++i) {
        if (i == 0 || i == M - 1) continue; // fixed string ends
        double ri = sp.get<double>(own[rc][std::size_t(i - lo)], 0);
        double rim1 = i - 1 < lo ? xL : sp.get<double>(own[rc][std::size_t(i - 1 - lo)], 0);
        double rip1 = i + 1 >= hi ? xR : sp.get<double>(own[rc][std::size_t(i + 1 - lo)], 0);
        double wi = sp.get<double>(own[wc][std::size_t(i - lo)], 0);
        double next = 2 * ri - wi + p.springK * (rim1 - 2 * ri + rip1);
        sp.put<double>(own[wc][std::size_t(i - lo)], 0, next);
      }

      if (rank > 0) sp.signal(nbrL[rc]);
      if (rank < k - 1) sp.signal(nbrR[rc]);
      // Publish the boundary values just written.
      sp.signal(own[wc].front());
      sp.signal(own[wc].back());

      for (int i = 1; i < M - 1; ++i) {
        double ri = arr[rc][std::size_t(i)];
        double next = 2 * ri - arr[wc][std::size_t(i)] +
                      p.springK * (arr[rc][std::size_t(i - 1)] - 2 * ri + arr[rc][std::size_t(i + 1)]);
        arr[wc][std::size_t(i)] = next;
      }
    }

    int fin = p.steps % 2;
    BitFold fold, ofold;
    for (int i = lo; i < hi; ++i) {
      fold.add(sp.get<double>(own[fin][std::size_t(i - lo)], 0));
      ofold.add(arr[fin][std::size_t(i)]);
    }
    out.metrics["pluck_checksum"] = fold.value();
    out.metrics["pluck_oracle"] = ofold.value();
  };
}

} // namespace objstore::workloads
