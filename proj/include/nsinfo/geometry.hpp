#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nsinfo/errors.hpp"

namespace nsinfo {

// ---------------------------------------------------------------------------
// Interval
// ---------------------------------------------------------------------------

struct Interval {
    double lo = 0.0, hi = 0.0;

    Interval() = default;
    Interval(double l, double h) : lo(l), hi(h) {
        if (!(lo <= hi)) throw InputError("interval: lo > hi");
    }
    static Interval point(double v) { return Interval(v, v); }

    double length() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    bool degenerate() const { return lo == hi; }
    bool contains(double x) const { return lo <= x && x <= hi; }
    bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
    bool intersects(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }

    friend bool operator==(const Interval& a, const Interval& b) {
        return a.lo == b.lo && a.hi == b.hi;
    }
};

inline Interval hull(const Interval& a, const Interval& b) {
    return Interval(std::min(a.lo, b.lo), std::max(a.hi, b.hi));
}

// Intersection of closed intervals; empty is signalled by the bool.
inline bool intersect(const Interval& a, const Interval& b, Interval& out) {
    double lo = std::max(a.lo, b.lo), hi = std::min(a.hi, b.hi);
    if (lo > hi) return false;
    out = Interval(lo, hi);
    return true;
}

// Interval arithmetic. Standard outward-inclusive rules; results contain the
// exact range of the operation over the operand intervals.
inline Interval operator+(const Interval& a, const Interval& b) { return {a.lo + b.lo, a.hi + b.hi}; }
inline Interval operator-(const Interval& a, const Interval& b) { return {a.lo - b.hi, a.hi - b.lo}; }
inline Interval operator-(const Interval& a) { return {-a.hi, -a.lo}; }

inline Interval operator*(const Interval& a, const Interval& b) {
    double p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
    return {std::min(std::min(p1, p2), std::min(p3, p4)),
            std::max(std::max(p1, p2), std::max(p3, p4))};
}

inline Interval interval_div(const Interval& a, const Interval& b) {
    if (b.lo <= 0.0 && 0.0 <= b.hi)
        throw ComputeError("interval division: divisor range contains zero");
    double p1 = a.lo / b.lo, p2 = a.lo / b.hi, p3 = a.hi / b.lo, p4 = a.hi / b.hi;
    return {std::min(std::min(p1, p2), std::min(p3, p4)),
            std::max(std::max(p1, p2), std::max(p3, p4))};
}

inline Interval interval_pow(const Interval& a, int k) {
    if (k < 0) return interval_div(Interval(1.0, 1.0), interval_pow(a, -k));
    if (k == 0) return Interval(1.0, 1.0);
    if (k == 1) return a;
    double plo = std::pow(a.lo, k), phi = std::pow(a.hi, k);
    if (k % 2 == 1) return {plo, phi};
    // even power
    if (a.lo >= 0.0) return {plo, phi};
    if (a.hi <= 0.0) return {phi, plo};
    return {0.0, std::max(plo, phi)};
}

// ---------------------------------------------------------------------------
// Box: axis-aligned box in R^n (closed; zero-width sides allowed)
// ---------------------------------------------------------------------------

struct Box {
    std::vector<Interval> sides;

    Box() = default;
    explicit Box(std::vector<Interval> s) : sides(std::move(s)) {}
    Box(std::initializer_list<Interval> s) : sides(s) {}

    int dim() const { return static_cast<int>(sides.size()); }

    double volume() const {
        double v = 1.0;
        for (const auto& s : sides) v *= s.length();
        return v;
    }

    bool contains(std::span<const double> x) const {
        if (static_cast<int>(x.size()) != dim()) return false;
        for (int d = 0; d < dim(); ++d)
            if (!sides[static_cast<size_t>(d)].contains(x[static_cast<size_t>(d)])) return false;
        return true;
    }
};

// Max Euclidean distance between a point of A and a point of B. Extreme over
// two boxes, computed per-coordinate without enumerating corners.
inline double max_dist2(std::span<const Interval> a, std::span<const Interval> b) {
    double s = 0.0;
    for (size_t d = 0; d < a.size(); ++d) {
        double m = std::max(a[d].hi - b[d].lo, b[d].hi - a[d].lo);
        s += m * m;
    }
    return s;
}

inline double point_box_max_dist2(std::span<const double> p, std::span<const Interval> b) {
    double s = 0.0;
    for (size_t d = 0; d < p.size(); ++d) {
        double m = std::max(std::abs(p[d] - b[d].lo), std::abs(p[d] - b[d].hi));
        s += m * m;
    }
    return s;
}

// ---------------------------------------------------------------------------
// BoxUnion: finite union of axis-aligned boxes, stored flat.
// Boxes may overlap; measure/diameter/containment are representation
// independent. The empty list is the empty set.
// ---------------------------------------------------------------------------

class BoxUnion {
public:
    BoxUnion() = default;
    explicit BoxUnion(int dim) : dim_(dim) {
        if (dim < 1) throw InputError("box union: dimension must be >= 1");
    }

    static BoxUnion single(const Box& b) {
        BoxUnion u(b.dim());
        u.push_box(b);
        return u;
    }
    static BoxUnion single(const Interval& iv) {
        BoxUnion u(1);
        u.push_box(std::span<const Interval>(&iv, 1));
        return u;
    }

    int dim() const { return dim_; }
    size_t size() const { return dim_ == 0 ? 0 : flat_.size() / static_cast<size_t>(dim_); }
    bool empty() const { return flat_.empty(); }

    std::span<const Interval> box(size_t i) const {
        return {flat_.data() + i * static_cast<size_t>(dim_), static_cast<size_t>(dim_)};
    }
    Box box_copy(size_t i) const {
        auto s = box(i);
        return Box(std::vector<Interval>(s.begin(), s.end()));
    }

    void push_box(std::span<const Interval> sides) {
        if (static_cast<int>(sides.size()) != dim_)
            throw InputError("box union: box dimension mismatch");
        flat_.insert(flat_.end(), sides.begin(), sides.end());
    }
    void push_box(const Box& b) { push_box(std::span<const Interval>(b.sides)); }

    void append(const BoxUnion& other) {
        if (other.dim_ != dim_) throw InputError("box union: dimension mismatch");
        flat_.insert(flat_.end(), other.flat_.begin(), other.flat_.end());
    }

    void clear() { flat_.clear(); }
    void reserve_boxes(size_t n) { flat_.reserve(n * static_cast<size_t>(dim_)); }

    Box bounding_box() const {
        if (empty()) throw ComputeError("bounding box of empty set");
        std::vector<Interval> sides(box(0).begin(), box(0).end());
        for (size_t i = 1; i < size(); ++i) {
            auto b = box(i);
            for (int d = 0; d < dim_; ++d) sides[static_cast<size_t>(d)] = hull(sides[static_cast<size_t>(d)], b[static_cast<size_t>(d)]);
        }
        return Box(std::move(sides));
    }

    bool contains_point(std::span<const double> x) const {
        for (size_t i = 0; i < size(); ++i) {
            auto b = box(i);
            bool in = true;
            for (int d = 0; d < dim_ && in; ++d)
                in = b[static_cast<size_t>(d)].contains(x[static_cast<size_t>(d)]);
            if (in) return true;
        }
        return false;
    }

    double volume_sum() const {
        double t = 0.0;
        for (size_t i = 0; i < size(); ++i) {
            double v = 1.0;
            auto b = box(i);
            for (int d = 0; d < dim_; ++d) v *= b[static_cast<size_t>(d)].length();
            t += v;
        }
        return t;
    }

private:
    int dim_ = 0;
    std::vector<Interval> flat_;
};

// ---------------------------------------------------------------------------
// Measure: exact Lebesgue measure of the union, overlaps counted once.
// Recursive coordinate sweep: slice along dimension k at all box endpoints,
// recurse on the boxes active in each slab. Exact up to FP rounding.
// ---------------------------------------------------------------------------

namespace detail {

inline double measure_rec(const BoxUnion& u, int k, const std::vector<size_t>& active) {
    const int n = u.dim();
    if (k == n - 1) {
        // merge the 1-D intervals of the last coordinate
        std::vector<Interval> ivs;
        ivs.reserve(active.size());
        for (size_t i : active) ivs.push_back(u.box(i)[static_cast<size_t>(k)]);
        std::sort(ivs.begin(), ivs.end(), [](const Interval& a, const Interval& b) {
            return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
        });
        double total = 0.0, curLo = 0.0, curHi = 0.0;
        bool open = false;
        for (const auto& iv : ivs) {
            if (!open) { curLo = iv.lo; curHi = iv.hi; open = true; }
            else if (iv.lo <= curHi) { curHi = std::max(curHi, iv.hi); }
            else { total += curHi - curLo; curLo = iv.lo; curHi = iv.hi; }
        }
        if (open) total += curHi - curLo;
        return total;
    }

    std::vector<double> cuts;
    cuts.reserve(active.size() * 2);
    for (size_t i : active) {
        const auto& s = u.box(i)[static_cast<size_t>(k)];
        cuts.push_back(s.lo);
        cuts.push_back(s.hi);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    double total = 0.0;
    std::vector<size_t> sub;
    for (size_t j = 0; j + 1 < cuts.size(); ++j) {
        double a = cuts[j], b = cuts[j + 1];
        if (!(b > a)) continue;
        sub.clear();
        for (size_t i : active) {
            const auto& s = u.box(i)[static_cast<size_t>(k)];
            if (s.lo <= a && b <= s.hi) sub.push_back(i);
        }
        if (!sub.empty()) total += (b - a) * measure_rec(u, k + 1, sub);
    }
    return total;
}

} // namespace detail

inline double measure(const BoxUnion& u) {
    if (u.empty()) return 0.0;
    std::vector<size_t> all(u.size());
    for (size_t i = 0; i < all.size(); ++i) all[i] = i;
    return detail::measure_rec(u, 0, all);
}

// ---------------------------------------------------------------------------
// Diameter: max Euclidean distance between two points of the union.
// Extreme points of a union of convex sets are box corners, so the maximum
// over box pairs of the per-coordinate corner formula is exact. In 2-D with
// many boxes we go through the convex hull of the corner set.
// ---------------------------------------------------------------------------

namespace detail {

struct CornerPt {
    double x, y;
    size_t box;
};

inline double cross(const CornerPt& o, const CornerPt& a, const CornerPt& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Monotone-chain convex hull over tagged corner points.
inline std::vector<CornerPt> convex_hull(std::vector<CornerPt> pts) {
    std::sort(pts.begin(), pts.end(), [](const CornerPt& a, const CornerPt& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(), [](const CornerPt& a, const CornerPt& b) {
                  return a.x == b.x && a.y == b.y;
              }), pts.end());
    if (pts.size() <= 2) return pts;
    std::vector<CornerPt> h(2 * pts.size());
    size_t k = 0;
    for (size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    size_t lower = k + 1;
    for (size_t i = pts.size() - 1; i-- > 0;) {
        while (k >= lower && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    return h;
}

struct DiameterWitness {
    double dist2 = 0.0;
    size_t box_a = 0, box_b = 0;
};

// Farthest pair on a convex polygon. Rotating calipers above a size cutoff
// (staircase hulls along curved boundaries can hold most of the corners).
inline DiameterWitness hull_diameter(const std::vector<CornerPt>& h) {
    DiameterWitness w;
    const size_t n = h.size();
    auto consider = [&](const CornerPt& a, const CornerPt& b) {
        double dx = a.x - b.x, dy = a.y - b.y, d2 = dx * dx + dy * dy;
        if (d2 > w.dist2) w = {d2, a.box, b.box};
    };
    if (n <= 256) {
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i + 1; j < n; ++j) consider(h[i], h[j]);
        return w;
    }
    auto area2 = [&](size_t i, size_t k, size_t m) {
        return std::abs((h[k].x - h[i].x) * (h[m].y - h[i].y) -
                        (h[k].y - h[i].y) * (h[m].x - h[i].x));
    };
    size_t j = 1, guard = 4 * n;
    for (size_t i = 0; i < n; ++i) {
        size_t ni = (i + 1) % n;
        while (guard > 0 && area2(i, ni, (j + 1) % n) > area2(i, ni, j)) {
            j = (j + 1) % n;
            --guard;
        }
        consider(h[i], h[j]);
        consider(h[ni], h[j]);
        consider(h[ni], h[(j + 1) % n]);
    }
    return w;
}

inline DiameterWitness diameter_witness(const BoxUnion& u) {
    DiameterWitness w;
    const size_t m = u.size();
    if (u.dim() == 2 && m > 48) {
        std::vector<CornerPt> pts;
        pts.reserve(4 * m);
        for (size_t i = 0; i < m; ++i) {
            auto b = u.box(i);
            pts.push_back({b[0].lo, b[1].lo, i});
            pts.push_back({b[0].lo, b[1].hi, i});
            pts.push_back({b[0].hi, b[1].lo, i});
            pts.push_back({b[0].hi, b[1].hi, i});
        }
        return hull_diameter(convex_hull(std::move(pts)));
    }
    for (size_t i = 0; i < m; ++i)
        for (size_t j = i; j < m; ++j) {
            double d2 = max_dist2(u.box(i), u.box(j));
            if (d2 > w.dist2) w = {d2, i, j};
        }
    return w;
}

} // namespace detail

inline double diameter(const BoxUnion& u) {
    if (u.empty()) throw ComputeError("diameter of empty set");
    return std::sqrt(detail::diameter_witness(u).dist2);
}

// ---------------------------------------------------------------------------
// Enclosing center: center of the minimum bounding box, snapped into the set
// when it falls outside (the estimate must be a point of the set), together
// with the worst-case distance from that point to the set.
// ---------------------------------------------------------------------------

struct EnclosingCenter {
    std::vector<double> point;
    double radius = 0.0;
};

inline EnclosingCenter enclosing_center(const BoxUnion& u) {
    if (u.empty()) throw ComputeError("enclosing center of empty set");
    const int n = u.dim();
    Box bb = u.bounding_box();
    std::vector<double> c(static_cast<size_t>(n));
    for (int d = 0; d < n; ++d) c[static_cast<size_t>(d)] = bb.sides[static_cast<size_t>(d)].mid();

    if (!u.contains_point(c)) {
        // nearest point of the union: clamp the center into each box,
        // keep the closest candidate (ties: lexicographically smallest)
        std::vector<double> best;
        double bestDist2 = std::numeric_limits<double>::infinity();
        std::vector<double> cand(static_cast<size_t>(n));
        for (size_t i = 0; i < u.size(); ++i) {
            auto b = u.box(i);
            double d2 = 0.0;
            for (int d = 0; d < n; ++d) {
                double v = std::clamp(c[static_cast<size_t>(d)], b[static_cast<size_t>(d)].lo, b[static_cast<size_t>(d)].hi);
                cand[static_cast<size_t>(d)] = v;
                double diff = v - c[static_cast<size_t>(d)];
                d2 += diff * diff;
            }
            if (d2 < bestDist2 || (d2 == bestDist2 && cand < best)) {
                bestDist2 = d2;
                best = cand;
            }
        }
        c = best;
    }

    double r2 = 0.0;
    for (size_t i = 0; i < u.size(); ++i)
        r2 = std::max(r2, point_box_max_dist2(c, u.box(i)));
    return {std::move(c), std::sqrt(r2)};
}

// ---------------------------------------------------------------------------
// 1-D covering number: minimal count of closed intervals of length 2*eps
// covering the set. Greedy left-to-right placement is optimal in 1-D.
// ---------------------------------------------------------------------------

inline long covering_number_1d(const BoxUnion& u, double eps) {
    if (u.dim() != 1) throw InputError("covering number: set must be 1-D");
    if (u.empty()) throw InputError("covering number: empty set");
    if (!(eps > 0.0)) throw InputError("covering number: eps must be positive");

    std::vector<Interval> ivs;
    ivs.reserve(u.size());
    for (size_t i = 0; i < u.size(); ++i) ivs.push_back(u.box(i)[0]);
    std::sort(ivs.begin(), ivs.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });

    long count = 0;
    double covered = -std::numeric_limits<double>::infinity();
    for (const auto& iv : ivs) {
        if (iv.hi <= covered) continue;
        double start = std::max(iv.lo, covered);
        // k covers of length 2*eps from `start`; ceil with a small slack so
        // exact multiples do not round up
        double need = iv.hi - start;
        long k = std::max<long>(1, static_cast<long>(std::ceil(need / (2.0 * eps) - 1e-12)));
        count += k;
        covered = start + 2.0 * eps * static_cast<double>(k);
    }
    return count;
}

// ---------------------------------------------------------------------------
// Set algebra. All results are closed box unions; set difference returns the
// closure of the true difference (boundary slivers of measure zero are kept
// inside the subtrahend, never emitted as fragments).
// ---------------------------------------------------------------------------

namespace detail {

// Fragments of box P outside box B, appended to `out`. Emits nothing when P
// is covered by B.
inline void subtract_box(const std::vector<Interval>& p, std::span<const Interval> b,
                         std::vector<std::vector<Interval>>& out) {
    const size_t n = p.size();
    bool inside = true, disjoint = false;
    for (size_t d = 0; d < n; ++d) {
        if (!(b[d].lo <= p[d].lo && p[d].hi <= b[d].hi)) inside = false;
        if (p[d].hi < b[d].lo || p[d].lo > b[d].hi) disjoint = true;
    }
    if (inside) return;
    if (disjoint) {
        out.push_back(p);
        return;
    }
    std::vector<Interval> cur = p;
    for (size_t d = 0; d < n; ++d) {
        if (cur[d].lo < b[d].lo) {
            auto frag = cur;
            frag[d] = Interval(cur[d].lo, std::min(cur[d].hi, b[d].lo));
            out.push_back(std::move(frag));
            cur[d] = Interval(b[d].lo, cur[d].hi);
        }
        if (cur[d].hi > b[d].hi) {
            auto frag = cur;
            frag[d] = Interval(std::max(cur[d].lo, b[d].hi), cur[d].hi);
            out.push_back(std::move(frag));
            cur[d] = Interval(cur[d].lo, b[d].hi);
        }
    }
    // what remains of cur lies inside b
}

} // namespace detail

inline BoxUnion intersect(const BoxUnion& a, const BoxUnion& b) {
    if (a.dim() != b.dim()) throw InputError("intersect: dimension mismatch");
    BoxUnion out(a.dim());
    std::vector<Interval> sides(static_cast<size_t>(a.dim()));
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) {
            auto ba = a.box(i);
            auto bb = b.box(j);
            bool ok = true;
            for (int d = 0; d < a.dim() && ok; ++d)
                ok = intersect(ba[static_cast<size_t>(d)], bb[static_cast<size_t>(d)], sides[static_cast<size_t>(d)]);
            if (ok) out.push_box(sides);
        }
    return out;
}

inline BoxUnion unite(const BoxUnion& a, const BoxUnion& b) {
    if (a.dim() != b.dim()) throw InputError("unite: dimension mismatch");
    BoxUnion out = a;
    out.append(b);
    return out;
}

inline BoxUnion subtract(const BoxUnion& a, const BoxUnion& b) {
    if (a.dim() != b.dim()) throw InputError("subtract: dimension mismatch");
    BoxUnion out(a.dim());
    std::vector<std::vector<Interval>> pieces, next;
    for (size_t i = 0; i < a.size(); ++i) {
        auto s = a.box(i);
        pieces.assign(1, std::vector<Interval>(s.begin(), s.end()));
        for (size_t j = 0; j < b.size() && !pieces.empty(); ++j) {
            next.clear();
            for (const auto& p : pieces) detail::subtract_box(p, b.box(j), next);
            pieces.swap(next);
        }
        for (auto& p : pieces) out.push_box(p);
    }
    return out;
}

// inner subset of outer, as closed point sets
inline bool contains(const BoxUnion& outer, const BoxUnion& inner) {
    return subtract(inner, outer).empty();
}

inline bool same_point_set(const BoxUnion& a, const BoxUnion& b) {
    return contains(b, a) && contains(a, b);
}

// Rewrite as pairwise interior-disjoint boxes covering the same point set.
inline BoxUnion disjointify(const BoxUnion& u) {
    BoxUnion out(u.dim());
    std::vector<std::vector<Interval>> pieces, next;
    for (size_t i = 0; i < u.size(); ++i) {
        auto s = u.box(i);
        pieces.assign(1, std::vector<Interval>(s.begin(), s.end()));
        for (size_t j = 0; j < out.size() && !pieces.empty(); ++j) {
            next.clear();
            for (const auto& p : pieces) detail::subtract_box(p, out.box(j), next);
            pieces.swap(next);
        }
        for (auto& p : pieces) out.push_box(p);
    }
    return out;
}

// Keep a contiguous block of coordinates, dropping the rest.
inline BoxUnion project(const BoxUnion& u, int from, int count) {
    if (from < 0 || count < 1 || from + count > u.dim())
        throw InputError("project: coordinate range out of bounds");
    BoxUnion out(count);
    for (size_t i = 0; i < u.size(); ++i) {
        auto b = u.box(i);
        out.push_box(b.subspan(static_cast<size_t>(from), static_cast<size_t>(count)));
    }
    return out;
}

// Cartesian product (coordinates of a first, then b).
inline BoxUnion cartesian_product(const BoxUnion& a, const BoxUnion& b) {
    BoxUnion out(a.dim() + b.dim());
    std::vector<Interval> sides;
    sides.reserve(static_cast<size_t>(a.dim() + b.dim()));
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) {
            sides.clear();
            auto ba = a.box(i);
            auto bb = b.box(j);
            sides.insert(sides.end(), ba.begin(), ba.end());
            sides.insert(sides.end(), bb.begin(), bb.end());
            out.push_box(sides);
        }
    return out;
}

// ---------------------------------------------------------------------------
// Geometric connected components of a box union (closed boxes; touching
// faces connect). Union-find over pairwise box intersection.
// ---------------------------------------------------------------------------

namespace detail {

class UnionFind {
public:
    explicit UnionFind(size_t n) : parent_(n), rank_(n, 0) {
        for (size_t i = 0; i < n; ++i) parent_[i] = i;
    }
    size_t find(size_t a) {
        while (parent_[a] != a) {
            parent_[a] = parent_[parent_[a]];
            a = parent_[a];
        }
        return a;
    }
    void merge(size_t a, size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent_[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
    }

private:
    std::vector<size_t> parent_;
    std::vector<size_t> rank_;
};

} // namespace detail

inline std::vector<std::vector<size_t>> geometric_components(const BoxUnion& u) {
    const size_t m = u.size();
    detail::UnionFind uf(m);
    // sweep along the first coordinate so far-apart boxes are never compared
    std::vector<size_t> order(m);
    for (size_t i = 0; i < m; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return u.box(a)[0].lo < u.box(b)[0].lo; });
    for (size_t oi = 0; oi < m; ++oi) {
        size_t i = order[oi];
        auto a = u.box(i);
        for (size_t oj = oi + 1; oj < m; ++oj) {
            size_t j = order[oj];
            auto b = u.box(j);
            if (b[0].lo > a[0].hi) break;
            bool touch = true;
            for (int d = 1; d < u.dim() && touch; ++d)
                touch = a[static_cast<size_t>(d)].intersects(b[static_cast<size_t>(d)]);
            if (touch) uf.merge(i, j);
        }
    }
    std::vector<std::vector<size_t>> comps;
    std::vector<long> label(m, -1);
    for (size_t i = 0; i < m; ++i) {
        size_t r = uf.find(i);
        if (label[r] < 0) {
            label[r] = static_cast<long>(comps.size());
            comps.emplace_back();
        }
        comps[static_cast<size_t>(label[r])].push_back(i);
    }
    return comps;
}

} // namespace nsinfo
