#pragma once

// Maximum-weight matching on general graphs (Edmonds' blossom algorithm with
// dual variables, O(V^3)). Follows the primal-dual formulation of Galil,
// "Efficient algorithms for finding maximum matching in graphs" (1986).
//
// Weights are integers so that every slack comparison is exact.

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace qab::blossom {

template <std::integral Weight>
struct Edge {
    std::size_t u;
    std::size_t v;
    Weight weight;
};

namespace detail {

template <std::integral Weight>
class Solver {
public:
    Solver(std::size_t num_vertices, const std::vector<Edge<Weight>>& edges, bool max_cardinality)
        : n_(num_vertices), edges_(edges), max_cardinality_(max_cardinality) {}

    std::vector<long> solve() {
        mate_.assign(n_, -1);
        if (edges_.empty() || n_ == 0) return mate_;
        init();
        for (std::size_t stage = 0; stage < n_; ++stage) {
            if (!run_stage()) break;
        }
        std::vector<long> result(n_, -1);
        for (std::size_t v = 0; v < n_; ++v) {
            if (mate_[v] >= 0) result[v] = static_cast<long>(endpoint_[mate_[v]]);
        }
        return result;
    }

private:
    static constexpr long kNone = -1;

    std::size_t n_;
    const std::vector<Edge<Weight>>& edges_;
    bool max_cardinality_;

    std::vector<std::size_t> endpoint_;
    std::vector<std::vector<long>> neighbend_;
    std::vector<long> mate_;
    std::vector<int> label_;
    std::vector<long> labelend_;
    std::vector<long> inblossom_;
    std::vector<long> blossomparent_;
    std::vector<std::vector<long>> blossomchilds_;
    std::vector<long> blossombase_;
    std::vector<std::vector<long>> blossomendps_;
    std::vector<long> bestedge_;
    std::vector<std::vector<long>> blossombestedges_;
    std::vector<bool> has_bestedges_;
    std::vector<long> unusedblossoms_;
    std::vector<Weight> dualvar_;
    std::vector<bool> allowedge_;
    std::vector<long> queue_;

    void init() {
        for (const auto& e : edges_) {
            if (e.u == e.v) throw std::invalid_argument("blossom: self-loop edge");
            if (e.u >= n_ || e.v >= n_) throw std::invalid_argument("blossom: edge endpoint out of range");
        }
        const std::size_t m = edges_.size();
        Weight maxweight = 0;
        for (const auto& e : edges_) maxweight = std::max(maxweight, e.weight);

        endpoint_.resize(2 * m);
        for (std::size_t p = 0; p < 2 * m; ++p) {
            endpoint_[p] = (p % 2 == 0) ? edges_[p / 2].u : edges_[p / 2].v;
        }
        neighbend_.assign(n_, {});
        for (std::size_t k = 0; k < m; ++k) {
            neighbend_[edges_[k].u].push_back(static_cast<long>(2 * k + 1));
            neighbend_[edges_[k].v].push_back(static_cast<long>(2 * k));
        }
        label_.assign(2 * n_, 0);
        labelend_.assign(2 * n_, kNone);
        inblossom_.resize(n_);
        for (std::size_t v = 0; v < n_; ++v) inblossom_[v] = static_cast<long>(v);
        blossomparent_.assign(2 * n_, kNone);
        blossomchilds_.assign(2 * n_, {});
        blossombase_.assign(2 * n_, kNone);
        for (std::size_t v = 0; v < n_; ++v) blossombase_[v] = static_cast<long>(v);
        blossomendps_.assign(2 * n_, {});
        bestedge_.assign(2 * n_, kNone);
        blossombestedges_.assign(2 * n_, {});
        has_bestedges_.assign(2 * n_, false);
        unusedblossoms_.clear();
        for (std::size_t b = n_; b < 2 * n_; ++b) unusedblossoms_.push_back(static_cast<long>(b));
        dualvar_.assign(2 * n_, 0);
        for (std::size_t v = 0; v < n_; ++v) dualvar_[v] = maxweight;
        allowedge_.assign(m, false);
    }

    Weight slack(long k) const {
        const auto& e = edges_[static_cast<std::size_t>(k)];
        return dualvar_[e.u] + dualvar_[e.v] - 2 * e.weight;
    }

    std::size_t ep(long p) const { return endpoint_[static_cast<std::size_t>(p)]; }
    long inb(std::size_t v) const { return inblossom_[v]; }
    std::size_t sz(long x) const { return static_cast<std::size_t>(x); }

    void leaves(long b, std::vector<long>& out) const {
        if (b < static_cast<long>(n_)) {
            out.push_back(b);
            return;
        }
        for (long t : blossomchilds_[sz(b)]) leaves(t, out);
    }

    std::vector<long> leaves(long b) const {
        std::vector<long> out;
        leaves(b, out);
        return out;
    }

    void assign_label(std::size_t w, int t, long p) {
        const long b = inb(w);
        label_[w] = label_[sz(b)] = t;
        labelend_[w] = labelend_[sz(b)] = p;
        bestedge_[w] = bestedge_[sz(b)] = kNone;
        if (t == 1) {
            leaves(b, queue_);
        } else if (t == 2) {
            const long base = blossombase_[sz(b)];
            const long mb = mate_[sz(base)];
            assign_label(ep(mb), 1, mb ^ 1);
        }
    }

    // Returns the base of a new blossom, or -1 when an augmenting path exists.
    long scan_blossom(long v, long w) {
        std::vector<long> path;
        long base = kNone;
        while (v != kNone || w != kNone) {
            long b = inb(sz(v));
            if (label_[sz(b)] & 4) {
                base = blossombase_[sz(b)];
                break;
            }
            path.push_back(b);
            label_[sz(b)] = 5;
            if (labelend_[sz(b)] == kNone) {
                v = kNone;
            } else {
                v = static_cast<long>(ep(labelend_[sz(b)]));
                b = inb(sz(v));
                v = static_cast<long>(ep(labelend_[sz(b)]));
            }
            if (w != kNone) std::swap(v, w);
        }
        for (long b : path) label_[sz(b)] = 1;
        return base;
    }

    void add_blossom(long base, long k) {
        long v = static_cast<long>(edges_[sz(k)].u);
        long w = static_cast<long>(edges_[sz(k)].v);
        const long bb = inb(sz(base));
        long bv = inb(sz(v));
        long bw = inb(sz(w));
        const long b = unusedblossoms_.back();
        unusedblossoms_.pop_back();
        blossombase_[sz(b)] = base;
        blossomparent_[sz(b)] = kNone;
        blossomparent_[sz(bb)] = b;
        std::vector<long> path;
        std::vector<long> endps;
        while (bv != bb) {
            blossomparent_[sz(bv)] = b;
            path.push_back(bv);
            endps.push_back(labelend_[sz(bv)]);
            v = static_cast<long>(ep(labelend_[sz(bv)]));
            bv = inb(sz(v));
        }
        path.push_back(bb);
        std::reverse(path.begin(), path.end());
        std::reverse(endps.begin(), endps.end());
        endps.push_back(2 * k);
        while (bw != bb) {
            blossomparent_[sz(bw)] = b;
            path.push_back(bw);
            endps.push_back(labelend_[sz(bw)] ^ 1);
            w = static_cast<long>(ep(labelend_[sz(bw)]));
            bw = inb(sz(w));
        }
        blossomchilds_[sz(b)] = path;
        blossomendps_[sz(b)] = std::move(endps);
        label_[sz(b)] = 1;
        labelend_[sz(b)] = labelend_[sz(bb)];
        dualvar_[sz(b)] = 0;
        for (long leaf : leaves(b)) {
            if (label_[sz(inb(sz(leaf)))] == 2) queue_.push_back(leaf);
            inblossom_[sz(leaf)] = b;
        }
        std::vector<long> bestedgeto(2 * n_, kNone);
        for (long sub : path) {
            std::vector<std::vector<long>> nblists;
            if (!has_bestedges_[sz(sub)]) {
                for (long leaf : leaves(sub)) {
                    std::vector<long> list;
                    for (long p : neighbend_[sz(leaf)]) list.push_back(p / 2);
                    nblists.push_back(std::move(list));
                }
            } else {
                nblists.push_back(blossombestedges_[sz(sub)]);
            }
            for (const auto& nblist : nblists) {
                for (long kk : nblist) {
                    long i = static_cast<long>(edges_[sz(kk)].u);
                    long j = static_cast<long>(edges_[sz(kk)].v);
                    if (inb(sz(j)) == b) std::swap(i, j);
                    const long bj = inb(sz(j));
                    if (bj != b && label_[sz(bj)] == 1 &&
                        (bestedgeto[sz(bj)] == kNone || slack(kk) < slack(bestedgeto[sz(bj)]))) {
                        bestedgeto[sz(bj)] = kk;
                    }
                }
            }
            blossombestedges_[sz(sub)].clear();
            has_bestedges_[sz(sub)] = false;
            bestedge_[sz(sub)] = kNone;
        }
        auto& best = blossombestedges_[sz(b)];
        best.clear();
        for (long kk : bestedgeto) {
            if (kk != kNone) best.push_back(kk);
        }
        has_bestedges_[sz(b)] = true;
        bestedge_[sz(b)] = kNone;
        for (long kk : best) {
            if (bestedge_[sz(b)] == kNone || slack(kk) < slack(bestedge_[sz(b)])) bestedge_[sz(b)] = kk;
        }
    }

    static long index_of(const std::vector<long>& xs, long x) {
        return static_cast<long>(std::find(xs.begin(), xs.end(), x) - xs.begin());
    }

    // Python-style indexing into a cyclic child list.
    static long at(const std::vector<long>& xs, long j) {
        const long len = static_cast<long>(xs.size());
        return xs[static_cast<std::size_t>(j < 0 ? j + len : j)];
    }

    void expand_blossom(long b, bool endstage) {
        const std::vector<long> childs = blossomchilds_[sz(b)];
        for (long s : childs) {
            blossomparent_[sz(s)] = kNone;
            if (s < static_cast<long>(n_)) {
                inblossom_[sz(s)] = s;
            } else if (endstage && dualvar_[sz(s)] == 0) {
                expand_blossom(s, endstage);
            } else {
                for (long leaf : leaves(s)) inblossom_[sz(leaf)] = s;
            }
        }
        if (!endstage && label_[sz(b)] == 2) {
            const auto& endps = blossomendps_[sz(b)];
            const long entrychild = inb(ep(labelend_[sz(b)] ^ 1));
            long j = index_of(childs, entrychild);
            long jstep;
            long endptrick;
            if (j & 1) {
                j -= static_cast<long>(childs.size());
                jstep = 1;
                endptrick = 0;
            } else {
                jstep = -1;
                endptrick = 1;
            }
            long p = labelend_[sz(b)];
            while (j != 0) {
                label_[ep(p ^ 1)] = 0;
                label_[ep(at(endps, j - endptrick) ^ endptrick ^ 1)] = 0;
                assign_label(ep(p ^ 1), 2, p);
                allowedge_[sz(at(endps, j - endptrick) / 2)] = true;
                j += jstep;
                p = at(endps, j - endptrick) ^ endptrick;
                allowedge_[sz(p / 2)] = true;
                j += jstep;
            }
            long bv = at(childs, j);
            label_[ep(p ^ 1)] = label_[sz(bv)] = 2;
            labelend_[ep(p ^ 1)] = labelend_[sz(bv)] = p;
            bestedge_[sz(bv)] = kNone;
            j += jstep;
            while (at(childs, j) != entrychild) {
                bv = at(childs, j);
                if (label_[sz(bv)] == 1) {
                    j += jstep;
                    continue;
                }
                long found = kNone;
                for (long leaf : leaves(bv)) {
                    if (label_[sz(leaf)] != 0) {
                        found = leaf;
                        break;
                    }
                }
                if (found != kNone) {
                    label_[sz(found)] = 0;
                    label_[ep(mate_[sz(blossombase_[sz(bv)])])] = 0;
                    assign_label(sz(found), 2, labelend_[sz(found)]);
                }
                j += jstep;
            }
        }
        label_[sz(b)] = -1;
        labelend_[sz(b)] = kNone;
        blossomchilds_[sz(b)].clear();
        blossomendps_[sz(b)].clear();
        blossombase_[sz(b)] = kNone;
        blossombestedges_[sz(b)].clear();
        has_bestedges_[sz(b)] = false;
        bestedge_[sz(b)] = kNone;
        unusedblossoms_.push_back(b);
    }

    void augment_blossom(long b, long v) {
        long t = v;
        while (blossomparent_[sz(t)] != b) t = blossomparent_[sz(t)];
        if (t >= static_cast<long>(n_)) augment_blossom(t, v);
        auto& childs = blossomchilds_[sz(b)];
        auto& endps = blossomendps_[sz(b)];
        const long i = index_of(childs, t);
        long j = i;
        long jstep;
        long endptrick;
        if (i & 1) {
            j -= static_cast<long>(childs.size());
            jstep = 1;
            endptrick = 0;
        } else {
            jstep = -1;
            endptrick = 1;
        }
        while (j != 0) {
            j += jstep;
            t = at(childs, j);
            const long p = at(endps, j - endptrick) ^ endptrick;
            if (t >= static_cast<long>(n_)) augment_blossom(t, static_cast<long>(ep(p)));
            j += jstep;
            t = at(childs, j);
            if (t >= static_cast<long>(n_)) augment_blossom(t, static_cast<long>(ep(p ^ 1)));
            mate_[ep(p)] = p ^ 1;
            mate_[ep(p ^ 1)] = p;
        }
        std::rotate(childs.begin(), childs.begin() + i, childs.end());
        std::rotate(endps.begin(), endps.begin() + i, endps.end());
        blossombase_[sz(b)] = blossombase_[sz(childs[0])];
    }

    void augment_matching(long k) {
        const long v = static_cast<long>(edges_[sz(k)].u);
        const long w = static_cast<long>(edges_[sz(k)].v);
        const std::pair<long, long> starts[2] = {{v, 2 * k + 1}, {w, 2 * k}};
        for (auto [s, p] : starts) {
            while (true) {
                const long bs = inb(sz(s));
                if (bs >= static_cast<long>(n_)) augment_blossom(bs, s);
                mate_[sz(s)] = p;
                if (labelend_[sz(bs)] == kNone) break;
                const long t = static_cast<long>(ep(labelend_[sz(bs)]));
                const long bt = inb(sz(t));
                s = static_cast<long>(ep(labelend_[sz(bt)]));
                const long j = static_cast<long>(ep(labelend_[sz(bt)] ^ 1));
                if (bt >= static_cast<long>(n_)) augment_blossom(bt, j);
                mate_[sz(j)] = labelend_[sz(bt)];
                p = labelend_[sz(bt)] ^ 1;
            }
        }
    }

    // One stage: grow alternating trees until an augmentation or proof of optimality.
    bool run_stage() {
        std::fill(label_.begin(), label_.end(), 0);
        std::fill(bestedge_.begin(), bestedge_.end(), kNone);
        for (std::size_t b = n_; b < 2 * n_; ++b) {
            blossombestedges_[b].clear();
            has_bestedges_[b] = false;
        }
        std::fill(allowedge_.begin(), allowedge_.end(), false);
        queue_.clear();
        for (std::size_t v = 0; v < n_; ++v) {
            if (mate_[v] == kNone && label_[sz(inb(v))] == 0) assign_label(v, 1, kNone);
        }

        bool augmented = false;
        while (true) {
            while (!queue_.empty() && !augmented) {
                const long v = queue_.back();
                queue_.pop_back();
                for (long p : neighbend_[sz(v)]) {
                    const long k = p / 2;
                    const long w = static_cast<long>(ep(p));
                    if (inb(sz(v)) == inb(sz(w))) continue;
                    Weight kslack = 0;
                    if (!allowedge_[sz(k)]) {
                        kslack = slack(k);
                        if (kslack <= 0) allowedge_[sz(k)] = true;
                    }
                    if (allowedge_[sz(k)]) {
                        if (label_[sz(inb(sz(w)))] == 0) {
                            assign_label(sz(w), 2, p ^ 1);
                        } else if (label_[sz(inb(sz(w)))] == 1) {
                            const long base = scan_blossom(v, w);
                            if (base >= 0) {
                                add_blossom(base, k);
                            } else {
                                augment_matching(k);
                                augmented = true;
                                break;
                            }
                        } else if (label_[sz(w)] == 0) {
                            label_[sz(w)] = 2;
                            labelend_[sz(w)] = p ^ 1;
                        }
                    } else if (label_[sz(inb(sz(w)))] == 1) {
                        const long b = inb(sz(v));
                        if (bestedge_[sz(b)] == kNone || kslack < slack(bestedge_[sz(b)])) bestedge_[sz(b)] = k;
                    } else if (label_[sz(w)] == 0) {
                        if (bestedge_[sz(w)] == kNone || kslack < slack(bestedge_[sz(w)])) bestedge_[sz(w)] = k;
                    }
                }
            }
            if (augmented) break;

            int deltatype = -1;
            Weight delta = 0;
            long deltaedge = kNone;
            long deltablossom = kNone;
            if (!max_cardinality_) {
                deltatype = 1;
                delta = *std::min_element(dualvar_.begin(), dualvar_.begin() + static_cast<long>(n_));
            }
            for (std::size_t v = 0; v < n_; ++v) {
                if (label_[sz(inb(v))] == 0 && bestedge_[v] != kNone) {
                    const Weight d = slack(bestedge_[v]);
                    if (deltatype == -1 || d < delta) {
                        delta = d;
                        deltatype = 2;
                        deltaedge = bestedge_[v];
                    }
                }
            }
            for (std::size_t b = 0; b < 2 * n_; ++b) {
                if (blossomparent_[b] == kNone && label_[b] == 1 && bestedge_[b] != kNone) {
                    const Weight d = slack(bestedge_[b]) / 2;
                    if (deltatype == -1 || d < delta) {
                        delta = d;
                        deltatype = 3;
                        deltaedge = bestedge_[b];
                    }
                }
            }
            for (std::size_t b = n_; b < 2 * n_; ++b) {
                if (blossombase_[b] >= 0 && blossomparent_[b] == kNone && label_[b] == 2 &&
                    (deltatype == -1 || dualvar_[b] < delta)) {
                    delta = dualvar_[b];
                    deltatype = 4;
                    deltablossom = static_cast<long>(b);
                }
            }
            if (deltatype == -1) {
                // No further progress possible; only reachable in max-cardinality mode.
                deltatype = 1;
                delta = std::max<Weight>(
                    0, *std::min_element(dualvar_.begin(), dualvar_.begin() + static_cast<long>(n_)));
            }

            for (std::size_t v = 0; v < n_; ++v) {
                const int l = label_[sz(inb(v))];
                if (l == 1) {
                    dualvar_[v] -= delta;
                } else if (l == 2) {
                    dualvar_[v] += delta;
                }
            }
            for (std::size_t b = n_; b < 2 * n_; ++b) {
                if (blossombase_[b] >= 0 && blossomparent_[b] == kNone) {
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
                allowedge_[sz(deltaedge)] = true;
                std::size_t i = edges_[sz(deltaedge)].u;
                std::size_t j = edges_[sz(deltaedge)].v;
                if (label_[sz(inb(i))] == 0) std::swap(i, j);
                queue_.push_back(static_cast<long>(i));
            } else if (deltatype == 3) {
                allowedge_[sz(deltaedge)] = true;
                queue_.push_back(static_cast<long>(edges_[sz(deltaedge)].u));
            } else {
                expand_blossom(deltablossom, false);
            }
        }
        if (!augmented) return false;

        for (std::size_t b = n_; b < 2 * n_; ++b) {
            if (blossomparent_[b] == kNone && blossombase_[b] >= 0 && label_[b] == 1 && dualvar_[b] == 0) {
                expand_blossom(static_cast<long>(b), true);
            }
        }
        return true;
    }
};

}  // namespace detail

/// Computes a maximum-weight matching. With `max_cardinality`, only
/// maximum-cardinality matchings are considered. Returns mate[v], or -1 for
/// an unmatched vertex.
///
/// Edge weights should stay well below 2^(digits-3) of Weight; dual
/// variables are bounded by the largest edge weight.
template <std::integral Weight>
std::vector<long> max_weight_matching(std::size_t num_vertices, const std::vector<Edge<Weight>>& edges,
                                      bool max_cardinality = false) {
    detail::Solver<Weight> solver(num_vertices, edges, max_cardinality);
    return solver.solve();
}

}  // namespace qab::blossom
