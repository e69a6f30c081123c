#pragma once

// Maximum-weight matching on a general graph (Edmonds' blossom algorithm with
// primal-dual updates, O(V^3)). Integer weights keep every slack exact, which
// the tie-breaking pass in matching.cpp relies on.

#include <cstdint>
#include <vector>

namespace pairdesign::detail {

struct WeightedEdge {
    int u;
    int v;
    std::int64_t weight;
};

class BlossomMatcher {
   public:
    /// Solves for a maximum-weight matching; with `max_cardinality` the
    /// matching is maximum-weight among maximum-cardinality matchings.
    BlossomMatcher(int n_vertices, std::vector<WeightedEdge> edges, bool max_cardinality);

    /// mate()[v] is the vertex matched to v or -1.
    const std::vector<int>& mate() const { return mate_vertex_; }

    /// Reduced cost of edge k under the final dual solution (weights doubled):
    /// y_u + y_v + sum over blossoms containing both ends of z_B, minus 2 w.
    /// Zero on every edge of every optimal matching.
    std::int64_t slack_with_blossoms(int k) const;

    /// Checks the complementary slackness conditions of the final solution.
    bool verify_optimum() const;

    const std::vector<WeightedEdge>& edges() const { return edges_; }

   private:
    void solve();
    std::int64_t slack(int k) const;
    void blossom_leaves(int b, std::vector<int>& out) const;
    void assign_label(int w, int t, int p);
    int scan_blossom(int v, int w);
    void add_blossom(int base, int k);
    void expand_blossom(int b, bool endstage);
    void augment_blossom(int b, int v);
    void augment_matching(int k);
    int child_index(int b, int t) const;

    int nvertex_;
    std::vector<WeightedEdge> edges_;
    bool max_cardinality_;

    std::vector<int> endpoint_;
    std::vector<std::vector<int>> neighbend_;
    std::vector<int> mate_;
    std::vector<int> label_;
    std::vector<int> labelend_;
    std::vector<int> inblossom_;
    std::vector<int> blossomparent_;
    std::vector<std::vector<int>> blossomchilds_;
    std::vector<int> blossombase_;
    std::vector<std::vector<int>> blossomendps_;
    std::vector<int> bestedge_;
    std::vector<std::vector<int>> blossombestedges_;
    std::vector<bool> has_bestedges_;
    std::vector<int> unusedblossoms_;
    std::vector<std::int64_t> dualvar_;
    std::vector<bool> allowedge_;
    std::vector<int> queue_;

    std::vector<int> mate_vertex_;
};

}  // namespace pairdesign::detail
