#include "objstore/rot.hpp"

#include <cmath>
#include <stdexcept>

namespace objstore {

ResidentObjectTable::~ResidentObjectTable() {
  RotEntry* e = mru_;
  while (e) {
    RotEntry* next = e->older;
    delete e;
    e = next;
  }
}

RotEntry* ResidentObjectTable::peek(UniqueId id) const {
  RotEntry* n = root_;
  while (n) {
    UniqueId k = n->oid.unique();
    if (id == k) return n;
    n = id < k ? n->left : n->right;
  }
  return nullptr;
}

RotEntry* ResidentObjectTable::find(UniqueId id) {
  RotEntry* e = peek(id);
  if (e) touch(e);
  return e;
}

void ResidentObjectTable::listUnlink(RotEntry* e) {
  if (e->newer)
    e->newer->older = e->older;
  else
    mru_ = e->older;
  if (e->older)
    e->older->newer = e->newer;
  else
    lru_ = e->newer;
  e->newer = e->older = nullptr;
}

void ResidentObjectTable::listPushMru(RotEntry* e) {
  e->newer = nullptr;
  e->older = mru_;
  if (mru_) mru_->newer = e;
  mru_ = e;
  if (!lru_) lru_ = e;
}

void ResidentObjectTable::touch(RotEntry* e) {
  if (mru_ == e) return;
  listUnlink(e);
  listPushMru(e);
}

void ResidentObjectTable::rotateLeft(RotEntry* x) {
  RotEntry* y = x->right;
  x->right = y->left;
  if (y->left) y->left->parent = x;
  y->parent = x->parent;
  if (!x->parent)
    root_ = y;
  else if (x == x->parent->left)
    x->parent->left = y;
  else
    x->parent->right = y;
  y->left = x;
  x->parent = y;
}

void ResidentObjectTable::rotateRight(RotEntry* x) {
  RotEntry* y = x->left;
  x->left = y->right;
  if (y->right) y->right->parent = x;
  y->parent = x->parent;
  if (!x->parent)
    root_ = y;
  else if (x == x->parent->right)
    x->parent->right = y;
  else
    x->parent->left = y;
  y->right = x;
  x->parent = y;
}

RotEntry* ResidentObjectTable::insert(Oid oid) {
  RotEntry* z = new RotEntry;
  z->oid = oid;
  RotEntry* y = nullptr;
  RotEntry* x = root_;
  while (x) {
    y = x;
    if (oid.unique() == x->oid.unique()) {
      delete z;
      throw std::logic_error("rot: duplicate unique id");
    }
    x = oid.unique() < x->oid.unique() ? x->left : x->right;
  }
  z->parent = y;
  if (!y)
    root_ = z;
  else if (oid.unique() < y->oid.unique())
    y->left = z;
  else
    y->right = z;
  z->red = true;
  insertFixup(z);
  listPushMru(z);
  ++size_;
  return z;
}

void ResidentObjectTable::insertFixup(RotEntry* z) {
  while (z->parent && z->parent->red) {
    RotEntry* gp = z->parent->parent;
    if (z->parent == gp->left) {
      RotEntry* uncle = gp->right;
      if (uncle && uncle->red) {
        z->parent->red = false;
        uncle->red = false;
        gp->red = true;
        z = gp;
      } else {
        if (z == z->parent->right) {
          z = z->parent;
          rotateLeft(z);
        }
        z->parent->red = false;
        gp->red = true;
        rotateRight(gp);
      }
    } else {
      RotEntry* uncle = gp->left;
      if (uncle && uncle->red) {
        z->parent->red = false;
        uncle->red = false;
        gp->red = true;
        z = gp;
      } else {
        if (z == z->parent->left) {
          z = z->parent;
          rotateRight(z);
        }
        z->parent->red = false;
        gp->red = true;
        rotateLeft(gp);
      }
    }
  }
  root_->red = false;
}

void ResidentObjectTable::transplant(RotEntry* u, RotEntry* v) {
  if (!u->parent)
    root_ = v;
  else if (u == u->parent->left)
    u->parent->left = v;
  else
    u->parent->right = v;
  if (v) v->parent = u->parent;
}

static RotEntry* treeMin(RotEntry* n) {
  while (n->left) n = n->left;
  return n;
}

void ResidentObjectTable::erase(RotEntry* z) {
  RotEntry* y = z;
  bool yWasRed = y->red;
  RotEntry* x = nullptr;
  RotEntry* xParent = nullptr;

  if (!z->left) {
    x = z->right;
    xParent = z->parent;
    transplant(z, z->right);
  } else if (!z->right) {
    x = z->left;
    xParent = z->parent;
    transplant(z, z->left);
  } else {
    y = treeMin(z->right);
    yWasRed = y->red;
    x = y->right;
    if (y->parent == z) {
      xParent = y;
    } else {
      xParent = y->parent;
      transplant(y, y->right);
      y->right = z->right;
      y->right->parent = y;
    }
    transplant(z, y);
    y->left = z->left;
    y->left->parent = y;
    y->red = z->red;
  }
  if (!yWasRed) eraseFixup(x, xParent);

  listUnlink(z);
  --size_;
  delete z;
}

void ResidentObjectTable::eraseFixup(RotEntry* x, RotEntry* xParent) {
  while (x != root_ && (!x || !x->red)) {
    if (!xParent) break;
    if (x == xParent->left) {
      RotEntry* w = xParent->right;
      if (w && w->red) {
        w->red = false;
        xParent->red = true;
        rotateLeft(xParent);
        w = xParent->right;
      }
      if (w && (!w->left || !w->left->red) && (!w->right || !w->right->red)) {
        w->red = true;
        x = xParent;
        xParent = x->parent;
      } else if (w) {
        if (!w->right || !w->right->red) {
          if (w->left) w->left->red = false;
          w->red = true;
          rotateRight(w);
          w = xParent->right;
        }
        w->red = xParent->red;
        xParent->red = false;
        if (w->right) w->right->red = false;
        rotateLeft(xParent);
        x = root_;
        xParent = nullptr;
      } else {
        x = xParent;
        xParent = x->parent;
      }
    } else {
      RotEntry* w = xParent->left;
      if (w && w->red) {
        w->red = false;
        xParent->red = true;
        rotateRight(xParent);
        w = xParent->left;
      }
      if (w && (!w->right || !w->right->red) && (!w->left || !w->left->red)) {
        w->red = true;
        x = xParent;
        xParent = x->parent;
      } else if (w) {
        if (!w->left || !w->left->red) {
          if (w->right) w->right->red = false;
          w->red = true;
          rotateLeft(w);
          w = xParent->left;
        }
        w->red = xParent->red;
        xParent->red = false;
        if (w->left) w->left->red = false;
        rotateRight(xParent);
        x = root_;
        xParent = nullptr;
      } else {
        x = xParent;
        xParent = x->parent;
      }
    }
  }
  if (x) x->red = false;
}

static int checkTree(const RotEntry* n, const RotEntry* parent, UniqueId lo, UniqueId hi,
                     int depth, int& maxDepth) {
  if (!n) return 1;
  if (n->parent != parent) throw std::logic_error("rot: bad parent link");
  UniqueId k = n->oid.unique();
  if (k < lo || k > hi) throw std::logic_error("rot: key order violated");
  if (n->red && ((n->left && n->left->red) || (n->right && n->right->red)))
    throw std::logic_error("rot: red node with red child");
  if (depth > maxDepth) maxDepth = depth;
  int lb = checkTree(n->left, n, lo, k == 0 ? 0 : k - 1, depth + 1, maxDepth);
  int rb = checkTree(n->right, n, k + 1, hi, depth + 1, maxDepth);
  if (lb != rb) throw std::logic_error("rot: black height mismatch");
  return lb + (n->red ? 0 : 1);
}

void ResidentObjectTable::validate() const {
  if (root_ && root_->red) throw std::logic_error("rot: red root");
  int depth = 0;
  checkTree(root_, nullptr, 0, ~UniqueId(0), 1, depth);

  // list and tree must contain the same entries
  std::size_t listCount = 0;
  const RotEntry* prev = nullptr;
  for (const RotEntry* e = mru_; e; e = e->older) {
    if (e->newer != prev) throw std::logic_error("rot: recency list broken");
    if (peek(e->oid.unique()) != e) throw std::logic_error("rot: list entry not in tree");
    prev = e;
    ++listCount;
  }
  if (prev != lru_) throw std::logic_error("rot: lru tail mismatch");
  if (listCount != size_) throw std::logic_error("rot: size mismatch");
  if (size_ > 0 && depth > 2 * int(std::log2(double(size_ + 1))) + 1)
    throw std::logic_error("rot: depth exceeds red-black bound");
}

int ResidentObjectTable::maxDepth() const {
  int depth = 0;
  try {
    checkTree(root_, nullptr, 0, ~UniqueId(0), 1, depth);
  } catch (const std::logic_error&) {
  }
  return depth;
}

} // namespace objstore
