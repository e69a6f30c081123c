#include "blossom.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace pairdesign::detail {

namespace {

/// Python-style index: negative j counts from the back.
template <class T>
T& wrap(std::vector<T>& v, int j) {
    const int n = static_cast<int>(v.size());
    return v[static_cast<std::size_t>(((j % n) + n) % n)];
}

template <class T>
const T& wrap(const std::vector<T>& v, int j) {
    const int n = static_cast<int>(v.size());
    return v[static_cast<std::size_t>(((j % n) + n) % n)];
}

}  // namespace

BlossomMatcher::BlossomMatcher(int n_vertices, std::vector<WeightedEdge> edges,
                               bool max_cardinality)
    : nvertex_(n_vertices), edges_(std::move(edges)), max_cardinality_(max_cardinality) {
    for (const auto& e : edges_) {
        if (e.u < 0 || e.v < 0 || e.u >= nvertex_ || e.v >= nvertex_ || e.u == e.v) {
            throw std::invalid_argument("BlossomMatcher: bad edge");
        }
    }
    solve();
}

std::int64_t BlossomMatcher::slack(int k) const {
    const auto& e = edges_[static_cast<std::size_t>(k)];
    return dualvar_[static_cast<std::size_t>(e.u)] + dualvar_[static_cast<std::size_t>(e.v)] -
           2 * e.weight;
}

void BlossomMatcher::blossom_leaves(int b, std::vector<int>& out) const {
    if (b < nvertex_) {
        out.push_back(b);
        return;
    }
    for (int t : blossomchilds_[static_cast<std::size_t>(b)]) {
        if (t < nvertex_) {
            out.push_back(t);
        } else {
            blossom_leaves(t, out);
        }
    }
}

void BlossomMatcher::assign_label(int w, int t, int p) {
    const int b = inblossom_[w];
    assert(label_[w] == 0 && label_[b] == 0);
    label_[w] = label_[b] = t;
    labelend_[w] = labelend_[b] = p;
    bestedge_[w] = bestedge_[b] = -1;
    if (t == 1) {
        blossom_leaves(b, queue_);
    } else if (t == 2) {
        const int base = blossombase_[b];
        assert(mate_[base] >= 0);
        assign_label(endpoint_[mate_[base]], 1, mate_[base] ^ 1);
    }
}

int BlossomMatcher::scan_blossom(int v, int w) {
    std::vector<int> path;
    int base = -1;
    while (v != -1 || w != -1) {
        int b = inblossom_[v];
        if (label_[b] & 4) {
            base = blossombase_[b];
            break;
        }
        assert(label_[b] == 1);
        path.push_back(b);
        label_[b] = 5;
        if (labelend_[b] == -1) {
            v = -1;
        } else {
            v = endpoint_[labelend_[b]];
            b = inblossom_[v];
            assert(label_[b] == 2);
            v = endpoint_[labelend_[b]];
        }
        if (w != -1) std::swap(v, w);
    }
    for (int b : path) label_[b] = 1;
    return base;
}

void BlossomMatcher::add_blossom(int base, int k) {
    int v = edges_[k].u;
    int w = edges_[k].v;
    const int bb = inblossom_[base];
    int bv = inblossom_[v];
    int bw = inblossom_[w];
    const int b = unusedblossoms_.back();
    unusedblossoms_.pop_back();
    blossombase_[b] = base;
    blossomparent_[b] = -1;
    blossomparent_[bb] = b;
    auto& path = blossomchilds_[b];
    auto& endps = blossomendps_[b];
    path.clear();
    endps.clear();
    while (bv != bb) {
        blossomparent_[bv] = b;
        path.push_back(bv);
        endps.push_back(labelend_[bv]);
        v = endpoint_[labelend_[bv]];
        bv = inblossom_[v];
    }
    path.push_back(bb);
    std::reverse(path.begin(), path.end());
    std::reverse(endps.begin(), endps.end());
    endps.push_back(2 * k);
    while (bw != bb) {
        blossomparent_[bw] = b;
        path.push_back(bw);
        endps.push_back(labelend_[bw] ^ 1);
        w = endpoint_[labelend_[bw]];
        bw = inblossom_[w];
    }
    assert(label_[bb] == 1);
    label_[b] = 1;
    labelend_[b] = labelend_[bb];
    dualvar_[b] = 0;
    std::vector<int> leaves;
    blossom_leaves(b, leaves);
    for (int leaf : leaves) {
        if (label_[inblossom_[leaf]] == 2) queue_.push_back(leaf);
        inblossom_[leaf] = b;
    }

    std::vector<int> bestedgeto(static_cast<std::size_t>(2 * nvertex_), -1);
    for (int child : path) {
        std::vector<int> candidates;
        if (!has_bestedges_[child]) {
            std::vector<int> child_leaves;
            blossom_leaves(child, child_leaves);
            for (int leaf : child_leaves) {
                for (int p : neighbend_[leaf]) candidates.push_back(p / 2);
            }
        } else {
            candidates = blossombestedges_[child];
        }
        for (int kk : candidates) {
            int i = edges_[kk].u;
            int j = edges_[kk].v;
            if (inblossom_[j] == b) std::swap(i, j);
            const int bj = inblossom_[j];
            if (bj != b && label_[bj] == 1 &&
                (bestedgeto[bj] == -1 || slack(kk) < slack(bestedgeto[bj]))) {
                bestedgeto[bj] = kk;
            }
        }
        blossombestedges_[child].clear();
        has_bestedges_[child] = false;
        bestedge_[child] = -1;
    }
    auto& best = blossombestedges_[b];
    best.clear();
    for (int kk : bestedgeto) {
        if (kk != -1) best.push_back(kk);
    }
    has_bestedges_[b] = true;
    bestedge_[b] = -1;
    for (int kk : best) {
        if (bestedge_[b] == -1 || slack(kk) < slack(bestedge_[b])) bestedge_[b] = kk;
    }
}

int BlossomMatcher::child_index(int b, int t) const {
    const auto& ch = blossomchilds_[b];
    return static_cast<int>(std::find(ch.begin(), ch.end(), t) - ch.begin());
}

void BlossomMatcher::expand_blossom(int b, bool endstage) {
    const std::vector<int> children = blossomchilds_[b];
    for (int s : children) {
        blossomparent_[s] = -1;
        if (s < nvertex_) {
            inblossom_[s] = s;
        } else if (endstage && dualvar_[s] == 0) {
            expand_blossom(s, endstage);
        } else {
            std::vector<int> leaves;
            blossom_leaves(s, leaves);
            for (int leaf : leaves) inblossom_[leaf] = s;
        }
    }
    if (!endstage && label_[b] == 2) {
        const int entrychild = inblossom_[endpoint_[labelend_[b] ^ 1]];
        int j = child_index(b, entrychild);
        int jstep;
        int endptrick;
        const int len = static_cast<int>(blossomchilds_[b].size());
        if (j & 1) {
            j -= len;
            jstep = 1;
            endptrick = 0;
        } else {
            jstep = -1;
            endptrick = 1;
        }
        int p = labelend_[b];
        auto& childs = blossomchilds_[b];
        auto& endps = blossomendps_[b];
        while (j != 0) {
            label_[endpoint_[p ^ 1]] = 0;
            label_[endpoint_[wrap(endps, j - endptrick) ^ endptrick ^ 1]] = 0;
            assign_label(endpoint_[p ^ 1], 2, p);
            allowedge_[wrap(endps, j - endptrick) / 2] = true;
            j += jstep;
            p = wrap(endps, j - endptrick) ^ endptrick;
            allowedge_[p / 2] = true;
            j += jstep;
        }
        int bv = wrap(childs, j);
        label_[endpoint_[p ^ 1]] = label_[bv] = 2;
        labelend_[endpoint_[p ^ 1]] = labelend_[bv] = p;
        bestedge_[bv] = -1;
        j += jstep;
        while (wrap(childs, j) != entrychild) {
            bv = wrap(childs, j);
            if (label_[bv] == 1) {
                j += jstep;
                continue;
            }
            std::vector<int> leaves;
            blossom_leaves(bv, leaves);
            int labelled = -1;
            for (int leaf : leaves) {
                if (label_[leaf] != 0) {
                    labelled = leaf;
                    break;
                }
            }
            if (labelled != -1) {
                assert(label_[labelled] == 2);
                assert(inblossom_[labelled] == bv);
                label_[labelled] = 0;
                label_[endpoint_[mate_[blossombase_[bv]]]] = 0;
                assign_label(labelled, 2, labelend_[labelled]);
            }
            j += jstep;
        }
    }
    label_[b] = labelend_[b] = -1;
    blossomchilds_[b].clear();
    blossomendps_[b].clear();
    blossombase_[b] = -1;
    blossombestedges_[b].clear();
    has_bestedges_[b] = false;
    bestedge_[b] = -1;
    unusedblossoms_.push_back(b);
}

void BlossomMatcher::augment_blossom(int b, int v) {
    int t = v;
    while (blossomparent_[t] != b) t = blossomparent_[t];
    if (t >= nvertex_) augment_blossom(t, v);
    const int i = child_index(b, t);
    int j = i;
    int jstep;
    int endptrick;
    const int len = static_cast<int>(blossomchilds_[b].size());
    if (i & 1) {
        j -= len;
        jstep = 1;
        endptrick = 0;
    } else {
        jstep = -1;
        endptrick = 1;
    }
    while (j != 0) {
        j += jstep;
        t = wrap(blossomchilds_[b], j);
        const int p = wrap(blossomendps_[b], j - endptrick) ^ endptrick;
        if (t >= nvertex_) augment_blossom(t, endpoint_[p]);
        j += jstep;
        t = wrap(blossomchilds_[b], j);
        if (t >= nvertex_) augment_blossom(t, endpoint_[p ^ 1]);
        mate_[endpoint_[p]] = p ^ 1;
        mate_[endpoint_[p ^ 1]] = p;
    }
    auto& childs = blossomchilds_[b];
    auto& endps = blossomendps_[b];
    std::rotate(childs.begin(), childs.begin() + i, childs.end());
    std::rotate(endps.begin(), endps.begin() + i, endps.end());
    blossombase_[b] = blossombase_[childs[0]];
    assert(blossombase_[b] == v);
}

void BlossomMatcher::augment_matching(int k) {
    const int v = edges_[k].u;
    const int w = edges_[k].v;
    const std::pair<int, int> starts[2] = {{v, 2 * k + 1}, {w, 2 * k}};
    for (auto [s, p] : starts) {
        while (true) {
            const int bs = inblossom_[s];
            assert(label_[bs] == 1);
            if (bs >= nvertex_) augment_blossom(bs, s);
            mate_[s] = p;
            if (labelend_[bs] == -1) break;
            const int t = endpoint_[labelend_[bs]];
            const int bt = inblossom_[t];
            assert(label_[bt] == 2);
            s = endpoint_[labelend_[bt]];
            const int j = endpoint_[labelend_[bt] ^ 1];
            assert(blossombase_[bt] == t);
            if (bt >= nvertex_) augment_blossom(bt, j);
            mate_[j] = labelend_[bt];
            p = labelend_[bt] ^ 1;
        }
    }
}

void BlossomMatcher::solve() {
    const int n = nvertex_;
    const int nedge = static_cast<int>(edges_.size());
    const auto n2 = static_cast<std::size_t>(2 * n);

    std::int64_t maxweight = 0;
    for (const auto& e : edges_) maxweight = std::max(maxweight, e.weight);

    endpoint_.resize(static_cast<std::size_t>(2 * nedge));
    for (int p = 0; p < 2 * nedge; ++p) endpoint_[p] = p % 2 == 0 ? edges_[p / 2].u : edges_[p / 2].v;
    neighbend_.assign(static_cast<std::size_t>(n), {});
    for (int k = 0; k < nedge; ++k) {
        neighbend_[edges_[k].u].push_back(2 * k + 1);
        neighbend_[edges_[k].v].push_back(2 * k);
    }
    mate_.assign(static_cast<std::size_t>(n), -1);
    label_.assign(n2, 0);
    labelend_.assign(n2, -1);
    inblossom_.resize(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) inblossom_[v] = v;
    blossomparent_.assign(n2, -1);
    blossomchilds_.assign(n2, {});
    blossombase_.assign(n2, -1);
    for (int v = 0; v < n; ++v) blossombase_[v] = v;
    blossomendps_.assign(n2, {});
    bestedge_.assign(n2, -1);
    blossombestedges_.assign(n2, {});
    has_bestedges_.assign(n2, false);
    unusedblossoms_.clear();
    for (int b = n; b < 2 * n; ++b) unusedblossoms_.push_back(b);
    dualvar_.assign(n2, 0);
    for (int v = 0; v < n; ++v) dualvar_[v] = maxweight;
    allowedge_.assign(static_cast<std::size_t>(nedge), false);
    queue_.clear();

    for (int stage = 0; stage < n; ++stage) {
        std::fill(label_.begin(), label_.end(), 0);
        std::fill(bestedge_.begin(), bestedge_.end(), -1);
        for (int b = n; b < 2 * n; ++b) {
            blossombestedges_[b].clear();
            has_bestedges_[b] = false;
        }
        std::fill(allowedge_.begin(), allowedge_.end(), false);
        queue_.clear();
        for (int v = 0; v < n; ++v) {
            if (mate_[v] == -1 && label_[inblossom_[v]] == 0) assign_label(v, 1, -1);
        }
        bool augmented = false;
        while (true) {
            while (!queue_.empty() && !augmented) {
                const int v = queue_.back();
                queue_.pop_back();
                assert(label_[inblossom_[v]] == 1);
                for (int p : neighbend_[v]) {
                    const int k = p / 2;
                    const int w = endpoint_[p];
                    if (inblossom_[v] == inblossom_[w]) continue;
                    std::int64_t kslack = 0;
                    if (!allowedge_[k]) {
                        kslack = slack(k);
                        if (kslack <= 0) allowedge_[k] = true;
                    }
                    if (allowedge_[k]) {
                        if (label_[inblossom_[w]] == 0) {
                            assign_label(w, 2, p ^ 1);
                        } else if (label_[inblossom_[w]] == 1) {
                            const int base = scan_blossom(v, w);
                            if (base >= 0) {
                                add_blossom(base, k);
                            } else {
                                augment_matching(k);
                                augmented = true;
                                break;
                            }
                        } else if (label_[w] == 0) {
                            assert(label_[inblossom_[w]] == 2);
                            label_[w] = 2;
                            labelend_[w] = p ^ 1;
                        }
                    } else if (label_[inblossom_[w]] == 1) {
                        const int b = inblossom_[v];
                        if (bestedge_[b] == -1 || kslack < slack(bestedge_[b])) bestedge_[b] = k;
                    } else if (label_[w] == 0) {
                        if (bestedge_[w] == -1 || kslack < slack(bestedge_[w])) bestedge_[w] = k;
                    }
                }
            }
            if (augmented) break;

            int deltatype = -1;
            std::int64_t delta = 0;
            int deltaedge = -1;
            int deltablossom = -1;
            if (!max_cardinality_) {
                deltatype = 1;
                delta = *std::min_element(dualvar_.begin(), dualvar_.begin() + n);
            }
            for (int v = 0; v < n; ++v) {
                if (label_[inblossom_[v]] == 0 && bestedge_[v] != -1) {
                    const std::int64_t d = slack(bestedge_[v]);
                    if (deltatype == -1 || d < delta) {
                        delta = d;
                        deltatype = 2;
                        deltaedge = bestedge_[v];
                    }
                }
            }
            for (int b = 0; b < 2 * n; ++b) {
                if (blossomparent_[b] == -1 && label_[b] == 1 && bestedge_[b] != -1) {
                    const std::int64_t ks = slack(bestedge_[b]);
                    assert(ks % 2 == 0);
                    const std::int64_t d = ks / 2;
                    if (deltatype == -1 || d < delta) {
                        delta = d;
                        deltatype = 3;
                        deltaedge = bestedge_[b];
                    }
                }
            }
            for (int b = n; b < 2 * n; ++b) {
                if (blossombase_[b] >= 0 && blossomparent_[b] == -1 && label_[b] == 2 &&
                    (deltatype == -1 || dualvar_[b] < delta)) {
                    delta = dualvar_[b];
                    deltatype = 4;
                    deltablossom = b;
                }
            }
            if (deltatype == -1) {
                // No further improvement possible; max-cardinality optimum reached.
                deltatype = 1;
                delta = std::max<std::int64_t>(
                    0, *std::min_element(dualvar_.begin(), dualvar_.begin() + n));
            }

            for (int v = 0; v < n; ++v) {
                if (label_[inblossom_[v]] == 1) {
                    dualvar_[v] -= delta;
                } else if (label_[inblossom_[v]] == 2) {
                    dualvar_[v] += delta;
                }
            }
            for (int b = n; b < 2 * n; ++b) {
                if (blossombase_[b] >= 0 && blossomparent_[b] == -1) {
                    if (label_[b] == 1) {
                        dualvar_[b] += delta;
                    } else if (label_[b] == 2) {
                        dualvar_[b] -= delta;
                    }
                }
            }

            if (deltatype == 1) {
                break;
            } else if (deltatype == 2) {
                allowedge_[deltaedge] = true;
                int i = edges_[deltaedge].u;
                int j = edges_[deltaedge].v;
                if (label_[inblossom_[i]] == 0) std::swap(i, j);
                assert(label_[inblossom_[i]] == 1);
                queue_.push_back(i);
            } else if (deltatype == 3) {
                allowedge_[deltaedge] = true;
                const int i = edges_[deltaedge].u;
                assert(label_[inblossom_[i]] == 1);
                queue_.push_back(i);
            } else {
                expand_blossom(deltablossom, false);
            }
        }
        if (!augmented) break;
        for (int b = n; b < 2 * n; ++b) {
            if (blossomparent_[b] == -1 && blossombase_[b] >= 0 && label_[b] == 1 &&
                dualvar_[b] == 0) {
                expand_blossom(b, true);
            }
        }
    }

    mate_vertex_.assign(static_cast<std::size_t>(n), -1);
    for (int v = 0; v < n; ++v) {
        if (mate_[v] >= 0) mate_vertex_[v] = endpoint_[mate_[v]];
    }
}

std::int64_t BlossomMatcher::slack_with_blossoms(int k) const {
    const auto& e = edges_[static_cast<std::size_t>(k)];
    std::int64_t s = slack(k);
    std::vector<int> ib{e.u};
    std::vector<int> jb{e.v};
    while (blossomparent_[ib.back()] != -1) ib.push_back(blossomparent_[ib.back()]);
    while (blossomparent_[jb.back()] != -1) jb.push_back(blossomparent_[jb.back()]);
    std::reverse(ib.begin(), ib.end());
    std::reverse(jb.begin(), jb.end());
    for (std::size_t a = 0; a < std::min(ib.size(), jb.size()); ++a) {
        if (ib[a] != jb[a]) break;
        s += 2 * dualvar_[ib[a]];
    }
    return s;
}

bool BlossomMatcher::verify_optimum() const {
    const int n = nvertex_;
    for (int b = n; b < 2 * n; ++b) {
        if (blossombase_[b] >= 0 && dualvar_[b] < 0) return false;
    }
    for (int k = 0; k < static_cast<int>(edges_.size()); ++k) {
        const auto& e = edges_[k];
        const std::int64_t s = slack_with_blossoms(k);
        if (s < 0) return false;
        const bool matched = mate_vertex_[e.u] == e.v;
        if (matched && s != 0) return false;
    }
    // Blossoms with positive dual must be full: (|B| - 1) / 2 matched edges inside.
    for (int b = n; b < 2 * n; ++b) {
        if (blossombase_[b] < 0 || dualvar_[b] <= 0) continue;
        std::vector<int> leaves;
        blossom_leaves(b, leaves);
        std::vector<bool> inside(static_cast<std::size_t>(n), false);
        for (int leaf : leaves) inside[leaf] = true;
        int internal = 0;
        for (int leaf : leaves) {
            const int m = mate_vertex_[leaf];
            if (m >= 0 && inside[m]) ++internal;
        }
        if (internal / 2 != static_cast<int>(leaves.size() - 1) / 2) return false;
    }
    if (!max_cardinality_) {
        for (int v = 0; v < n; ++v) {
            if (mate_vertex_[v] < 0 && dualvar_[v] != 0) return false;
        }
    }
    return true;
}

}  // namespace pairdesign::detail
