#pragma once

#include <limits>
#include <utility>
#include <vector>

namespace partcolor {

// Splay-based link/cut forest over vertex nodes and edge nodes. Edge nodes carry a weight
// w ∈ [0, u] and an orientation sign relative to the current root: +1 when the edge's anchor
// endpoint is the one nearer the root. path_add(Δ) adds +Δ to positively oriented edges and −Δ
// to negatively oriented ones, so along a root path of a bipartite forest the update alternates.
// Every node keeps the four path minima (upper slack u − w and lower slack w, for each
// orientation) with their argmins; evert() reverses a path and swaps the orientation classes.
class LinkCutForest {
 public:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  struct PathMin {
    double value = kInf;
    int node = -1;
  };
  struct PathSummary {
    PathMin up[2];  // [0] positive orientation, [1] negative: min of u − w
    PathMin lo[2];  // min of w
  };

  explicit LinkCutForest(int vertices, int edge_capacity);

  int vertex_node(int v) const { return v; }
  int edge_node(int e) const { return n_ + e; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }

  // Creates edge e between vertex nodes a (anchor) and b, with weight w and bound u. The edge
  // is oriented positively from a to b once linked.
  void link_edge(int e, int a, int b, double w, double u);
  void cut_edge(int e, int a, int b);
  bool connected(int x, int y);
  // Makes x the root of its tree.
  void evert(int x);
  // Exposes the root-to-x path; its summary covers exactly that path.
  PathSummary expose(int x);
  void path_add(int x, double delta);  // on the root-to-x path
  double weight(int e);                // pushes pending updates for edge e
  void set_weight(int e, double w);
  int find_root(int x);
  int orientation(int e);              // +1 or −1 relative to the current root
  // Edge ids on the root-to-x path in root-first order, with orientations.
  std::vector<std::pair<int, int>> path_edges(int x);

 private:
  struct Node {
    int ch[2] = {-1, -1};
    int parent = -1;
    bool flip = false;
    double add = 0.0;
    int sign = 0;  // 0 for vertex nodes
    double w = 0.0, u = 0.0;
    PathSummary agg;
  };

  bool is_root(int x) const;
  void push(int x);
  void pull(int x);
  void apply_flip(int x);
  void apply_add(int x, double d);
  void rotate(int x);
  void splay(int x);
  int access(int x);
  void link(int child_root, int parent);
  void cut_child(int x, int y);
  void collect(int x, std::vector<std::pair<int, int>>& out);

  int n_;
  std::vector<Node> nodes_;
};

}  // namespace partcolor
