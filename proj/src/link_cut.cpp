#include "partcolor/link_cut.hpp"

#include <algorithm>

#include "partcolor/errors.hpp"

namespace partcolor {

namespace {

LinkCutForest::PathMin pick(const LinkCutForest::PathMin& a, const LinkCutForest::PathMin& b) {
  return b.value < a.value ? b : a;
}

}  // namespace

LinkCutForest::LinkCutForest(int vertices, int edge_capacity) : n_(vertices), nodes_(vertices + edge_capacity) {}

bool LinkCutForest::is_root(int x) const {
  const int p = nodes_[x].parent;
  return p < 0 || (nodes_[p].ch[0] != x && nodes_[p].ch[1] != x);
}

void LinkCutForest::apply_flip(int x) {
  Node& nd = nodes_[x];
  std::swap(nd.ch[0], nd.ch[1]);
  nd.sign = -nd.sign;
  std::swap(nd.agg.up[0], nd.agg.up[1]);
  std::swap(nd.agg.lo[0], nd.agg.lo[1]);
  nd.add = -nd.add;
  nd.flip = !nd.flip;
}

void LinkCutForest::apply_add(int x, double d) {
  Node& nd = nodes_[x];
  if (nd.sign != 0) nd.w += nd.sign * d;
  nd.agg.up[0].value -= d;
  nd.agg.lo[0].value += d;
  nd.agg.up[1].value += d;
  nd.agg.lo[1].value -= d;
  nd.add += d;
}

void LinkCutForest::push(int x) {
  Node& nd = nodes_[x];
  if (nd.flip) {
    for (int c : nd.ch)
      if (c >= 0) apply_flip(c);
    nd.flip = false;
  }
  if (nd.add != 0.0) {
    for (int c : nd.ch)
      if (c >= 0) apply_add(c, nd.add);
    nd.add = 0.0;
  }
}

void LinkCutForest::pull(int x) {
  Node& nd = nodes_[x];
  PathSummary s;
  if (nd.sign != 0) {
    const int k = nd.sign > 0 ? 0 : 1;
    s.up[k] = {nd.u - nd.w, x};
    s.lo[k] = {nd.w, x};
  }
  for (int c : nd.ch) {
    if (c < 0) continue;
    const PathSummary& cs = nodes_[c].agg;
    for (int k = 0; k < 2; ++k) {
      s.up[k] = pick(s.up[k], cs.up[k]);
      s.lo[k] = pick(s.lo[k], cs.lo[k]);
    }
  }
  nd.agg = s;
}

void LinkCutForest::rotate(int x) {
  const int p = nodes_[x].parent, g = nodes_[p].parent;
  const int dir = nodes_[p].ch[1] == x ? 1 : 0;
  const int b = nodes_[x].ch[dir ^ 1];
  if (!is_root(p)) nodes_[g].ch[nodes_[g].ch[1] == p ? 1 : 0] = x;
  nodes_[x].parent = g;
  nodes_[x].ch[dir ^ 1] = p;
  nodes_[p].parent = x;
  nodes_[p].ch[dir] = b;
  if (b >= 0) nodes_[b].parent = p;
  pull(p);
  pull(x);
}

void LinkCutForest::splay(int x) {
  std::vector<int> stack{x};
  for (int y = x; !is_root(y); y = nodes_[y].parent) stack.push_back(nodes_[y].parent);
  for (auto it = stack.rbegin(); it != stack.rend(); ++it) push(*it);
  while (!is_root(x)) {
    const int p = nodes_[x].parent;
    if (!is_root(p)) {
      const int g = nodes_[p].parent;
      const bool zigzig = (nodes_[g].ch[1] == p) == (nodes_[p].ch[1] == x);
      rotate(zigzig ? p : x);
    }
    rotate(x);
  }
}

int LinkCutForest::access(int x) {
  int last = -1;
  for (int y = x; y >= 0; y = nodes_[y].parent) {
    splay(y);
    nodes_[y].ch[1] = last;
    pull(y);
    last = y;
  }
  splay(x);
  return last;
}

void LinkCutForest::evert(int x) {
  access(x);
  apply_flip(x);
}

int LinkCutForest::find_root(int x) {
  access(x);
  int r = x;
  for (;;) {
    push(r);
    if (nodes_[r].ch[0] < 0) break;
    r = nodes_[r].ch[0];
  }
  splay(r);
  return r;
}

bool LinkCutForest::connected(int x, int y) { return x == y || find_root(x) == find_root(y); }

LinkCutForest::PathSummary LinkCutForest::expose(int x) {
  access(x);
  return nodes_[x].agg;
}

void LinkCutForest::path_add(int x, double delta) {
  access(x);
  apply_add(x, delta);
}

void LinkCutForest::link(int child_root, int parent) {
  evert(child_root);
  nodes_[child_root].parent = parent;
}

void LinkCutForest::link_edge(int e, int a, int b, double w, double u) {
  const int en = edge_node(e);
  if (en >= num_nodes()) throw ArgumentError("link_edge: edge id beyond capacity");
  Node& nd = nodes_[en];
  nd = Node{};
  nd.sign = 1;
  nd.w = w;
  nd.u = u;
  pull(en);
  access(a);
  nodes_[en].parent = a;  // en is a one-node tree, so a becomes its parent directly
  link(b, en);
}

void LinkCutForest::cut_child(int x, int y) {
  // x and y adjacent in the represented tree
  evert(x);
  access(y);
  if (nodes_[y].ch[0] != x || nodes_[x].ch[1] >= 0) throw ContractViolation("link/cut: nodes are not adjacent");
  nodes_[y].ch[0] = -1;
  nodes_[x].parent = -1;
  pull(y);
}

void LinkCutForest::cut_edge(int e, int a, int b) {
  const int en = edge_node(e);
  cut_child(a, en);
  cut_child(en, b);
}

double LinkCutForest::weight(int e) {
  access(edge_node(e));
  return nodes_[edge_node(e)].w;
}

void LinkCutForest::set_weight(int e, double w) {
  const int en = edge_node(e);
  access(en);
  nodes_[en].w = w;
  pull(en);
}

int LinkCutForest::orientation(int e) {
  access(edge_node(e));
  return nodes_[edge_node(e)].sign;
}

std::vector<std::pair<int, int>> LinkCutForest::path_edges(int x) {
  access(x);
  std::vector<std::pair<int, int>> out;
  std::vector<int> stack;
  int cur = x;
  while (cur >= 0 || !stack.empty()) {
    while (cur >= 0) {
      push(cur);
      stack.push_back(cur);
      cur = nodes_[cur].ch[0];
    }
    cur = stack.back();
    stack.pop_back();
    if (cur >= n_) out.push_back({cur - n_, nodes_[cur].sign});
    cur = nodes_[cur].ch[1];
  }
  return out;
}

}  // namespace partcolor
