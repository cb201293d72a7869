#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "nsinfo/errors.hpp"
#include "nsinfo/geometry.hpp"
#include "nsinfo/query.hpp"

namespace nsinfo {

// ---------------------------------------------------------------------------
// DomainSpec: the range of the private uncertain variable, as a box union.
// ---------------------------------------------------------------------------

struct DomainSpec {
    int dim = 0;
    BoxUnion domain;

    DomainSpec() = default;
    DomainSpec(int d, BoxUnion u) : dim(d), domain(std::move(u)) {
        if (domain.dim() != dim) throw InputError("domain: dimension mismatch");
        if (domain.empty()) throw InputError("domain: must be nonempty");
    }
};

struct Tolerances {
    double eps_img = 1e-9;
    double eps_vol = -1.0;  // <=0: 1e-4 * measure(domain)
    double delta_a = -1.0;  // <=0: image width / 1e4 (1-D), / 200 otherwise
    int max_depth = 40;
    double diam_gap = -1.0; // <=0: 1e-3 * diameter(domain)

    double resolve_eps_vol(const DomainSpec& X) const {
        if (eps_vol > 0.0) return eps_vol;
        double m = measure(X.domain);
        return m > 0.0 ? 1e-4 * m : 1e-12;
    }
    double resolve_delta_a(const DomainSpec& X, double image_width) const {
        if (delta_a > 0.0) return delta_a;
        double denom = X.dim == 1 ? 1e4 : 200.0;
        return std::max(image_width / denom, 1e-12);
    }
    double resolve_diam_gap(const DomainSpec& X) const {
        if (diam_gap > 0.0) return diam_gap;
        return 1e-3 * diameter(X.domain);
    }
};

// ---------------------------------------------------------------------------
// SetApprox: certified inner/outer approximation of a set.
// inner and undetermined are pairwise interior-disjoint by construction;
// outer = inner + undetermined.
// ---------------------------------------------------------------------------

struct SetApprox {
    BoxUnion inner;
    BoxUnion undetermined;
    bool disjoint = true; // boxes known pairwise interior-disjoint

    SetApprox() = default;
    explicit SetApprox(int dim) : inner(dim), undetermined(dim) {}

    static SetApprox exact(const BoxUnion& set) {
        SetApprox s(set.dim());
        s.inner = set;
        s.undetermined = BoxUnion(set.dim());
        s.disjoint = false; // caller's boxes may overlap
        return s;
    }

    int dim() const { return inner.dim(); }
    bool outer_empty() const { return inner.empty() && undetermined.empty(); }

    BoxUnion outer() const { return unite(inner, undetermined); }

    double inner_measure() const { return disjoint ? inner.volume_sum() : measure(inner); }
    double outer_measure() const {
        if (disjoint) return inner.volume_sum() + undetermined.volume_sum();
        return measure(outer());
    }
    double gap() const { return outer_measure() - inner_measure(); }

    void merge_with(const SetApprox& o) {
        inner.append(o.inner);
        undetermined.append(o.undetermined);
        // boxes of the two operands may overlap (shared boundary boxes of a
        // partition, arbitrary user cells): fall back to exact measure
        disjoint = false;
    }
};

namespace detail {

inline void bisect_widest(std::span<const Interval> box, std::vector<Interval>& left,
                          std::vector<Interval>& right) {
    // deterministic split: widest side, ties to the lowest index
    size_t split = 0;
    double w = box[0].length();
    for (size_t d = 1; d < box.size(); ++d)
        if (box[d].length() > w) {
            w = box[d].length();
            split = d;
        }
    left.assign(box.begin(), box.end());
    right.assign(box.begin(), box.end());
    double m = box[split].mid();
    left[split] = Interval(box[split].lo, m);
    right[split] = Interval(m, box[split].hi);
}

inline double box_volume(std::span<const Interval> b) {
    double v = 1.0;
    for (const auto& s : b) v *= s.length();
    return v;
}

inline double box_max_width(std::span<const Interval> b) {
    double w = 0.0;
    for (const auto& s : b) w = std::max(w, s.length());
    return w;
}

} // namespace detail

// ---------------------------------------------------------------------------
// image_interval: certified enclosure [lo, hi] of the range of f over X with
// hi - sup f <= eps_img and inf f - lo <= eps_img. Exact for separable forms.
// ---------------------------------------------------------------------------

inline Interval image_interval(const Query& f, const DomainSpec& X, double eps_img = 1e-9,
                               bool force_generic = false) {
    if (f.dim() != X.dim) throw InputError("image: query/domain dimension mismatch");
    if (!(eps_img > 0.0)) throw InputError("image: eps_img must be positive");

    if (f.separable() && !force_generic) {
        Interval img = f.separable()->range_on(X.domain.box(0));
        for (size_t i = 1; i < X.domain.size(); ++i)
            img = hull(img, f.separable()->range_on(X.domain.box(i)));
        return img;
    }

    // Branch and bound, one direction at a time. `best` is a realized value
    // (box midpoints), the queue bound converges onto it. Boxes too small to
    // split keep their range bound in the result so it stays an enclosure.
    auto solve = [&](bool maximize) {
        double best = -std::numeric_limits<double>::infinity();
        std::deque<std::vector<Interval>> queue;
        std::vector<double> mid;
        for (size_t i = 0; i < X.domain.size(); ++i) {
            auto b = X.domain.box(i);
            queue.emplace_back(b.begin(), b.end());
            mid.assign(b.size(), 0.0);
            for (size_t d = 0; d < b.size(); ++d) mid[d] = b[d].mid();
            double v = f.eval(mid);
            best = std::max(best, maximize ? v : -v);
        }
        double floorBound = -std::numeric_limits<double>::infinity();
        size_t budget = 4'000'000;
        std::vector<Interval> left, right;
        while (!queue.empty()) {
            if (budget-- == 0) throw ComputeError("image: branch-and-bound budget exhausted");
            auto box = std::move(queue.front());
            queue.pop_front();
            Interval r = f.eval_interval(box, force_generic);
            double boxBound = maximize ? r.hi : -r.lo;
            if (boxBound <= best + eps_img) continue;
            mid.assign(box.size(), 0.0);
            for (size_t d = 0; d < box.size(); ++d) mid[d] = box[d].mid();
            double v = f.eval(mid);
            best = std::max(best, maximize ? v : -v);
            if (detail::box_max_width(box) < 1e-13 * std::max(1.0, std::abs(mid[0]))) {
                floorBound = std::max(floorBound, boxBound);
                continue;
            }
            detail::bisect_widest(box, left, right);
            queue.emplace_back(left);
            queue.emplace_back(right);
        }
        return std::max(best + eps_img, floorBound);
    };

    double hi = solve(true);
    double lo = -solve(false);
    return Interval(std::min(lo, hi), std::max(lo, hi));
}

// ---------------------------------------------------------------------------
// preimage: SIVIA. Certified inner/outer approximation of
// {x in X : f(x) in target}. Boxes whose range bound lies inside `target` go
// to inner; boxes missing it are discarded; boundary boxes are bisected until
// their total volume is <= eps_vol or max_depth is reached (the remaining gap
// is reported as-is). Bins are treated as closed; the half-open convention
// only matters on measure-zero boundaries.
// ---------------------------------------------------------------------------

inline SetApprox preimage(const Query& f, const Interval& target, const DomainSpec& X,
                          double eps_vol, int max_depth, bool force_generic = false) {
    if (f.dim() != X.dim) throw InputError("preimage: query/domain dimension mismatch");
    if (!(eps_vol > 0.0)) throw InputError("preimage: eps_vol must be positive");

    SetApprox out(X.dim);
    BoxUnion dom = disjointify(X.domain);

    std::vector<std::vector<Interval>> wave;
    for (size_t i = 0; i < dom.size(); ++i) {
        auto b = dom.box(i);
        wave.emplace_back(b.begin(), b.end());
    }

    std::vector<Interval> left, right;
    for (int depth = 0; depth <= max_depth; ++depth) {
        std::vector<std::vector<Interval>> boundary;
        double boundaryVol = 0.0;
        for (auto& box : wave) {
            Interval r = f.eval_interval(box, force_generic);
            if (target.contains(r)) {
                out.inner.push_box(box);
            } else if (r.intersects(target)) {
                boundaryVol += detail::box_volume(box);
                boundary.push_back(std::move(box));
            }
        }
        if (boundary.empty()) break;
        if (boundaryVol <= eps_vol || depth == max_depth) {
            for (auto& box : boundary) out.undetermined.push_box(box);
            break;
        }
        wave.clear();
        wave.reserve(boundary.size() * 2);
        for (auto& box : boundary) {
            detail::bisect_widest(box, left, right);
            wave.emplace_back(left);
            wave.emplace_back(right);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// classify_partition: one shared subdivision pass assigning domain boxes to
// the bins of a breakpoint partition. Cheaper than one SIVIA run per bin and
// guarantees the cells cover the domain. A straddling box counts toward the
// outer approximation of every bin its range bound intersects. Refinement
// stops once every bin's undetermined volume is <= eps_vol.
// ---------------------------------------------------------------------------

inline std::vector<SetApprox> classify_partition(const Query& f, std::span<const double> breakpoints,
                                                 const DomainSpec& X, double eps_vol, int max_depth) {
    if (breakpoints.size() < 2) throw InputError("partition: need at least two breakpoints");
    const size_t q = breakpoints.size() - 1;
    std::vector<SetApprox> cells(q, SetApprox(X.dim));

    const double fuzz = 1e-9 * std::max(1.0, std::abs(breakpoints.back() - breakpoints.front()));

    // First/last bin index whose closed interval intersects r. A range bound
    // sticking past the outermost breakpoints clamps into the end bins: the
    // bound over-approximates, so only a bound entirely outside proves that
    // the box really maps off the partition.
    auto bin_span = [&](const Interval& r, size_t& lo, size_t& hi) -> bool {
        if (r.hi < breakpoints.front() - fuzz || r.lo > breakpoints.back() + fuzz)
            return false;
        lo = 0;
        while (lo + 1 < q && r.lo > breakpoints[lo + 1]) ++lo;
        hi = lo;
        while (hi + 1 < q && r.hi > breakpoints[hi + 1]) ++hi;
        return true;
    };

    BoxUnion dom = disjointify(X.domain);
    std::vector<std::vector<Interval>> wave;
    for (size_t i = 0; i < dom.size(); ++i) {
        auto b = dom.box(i);
        wave.emplace_back(b.begin(), b.end());
    }

    struct Pending {
        std::vector<Interval> box;
        size_t lo, hi;
    };

    std::vector<Interval> left, right;
    for (int depth = 0; depth <= max_depth; ++depth) {
        std::vector<Pending> boundary;
        std::vector<double> binVol(q, 0.0);
        for (auto& box : wave) {
            Interval r = f.eval_interval(box);
            size_t lo, hi;
            if (!bin_span(r, lo, hi))
                throw InputError("partition: query range escapes the policy bins");
            if (lo == hi) {
                cells[lo].inner.push_box(box);
            } else {
                double v = detail::box_volume(box);
                for (size_t k = lo; k <= hi; ++k) binVol[k] += v;
                boundary.push_back({std::move(box), lo, hi});
            }
        }
        if (boundary.empty()) break;
        double worst = *std::max_element(binVol.begin(), binVol.end());
        if (worst <= eps_vol || depth == max_depth) {
            for (auto& p : boundary) {
                for (size_t k = p.lo; k <= p.hi; ++k) cells[k].undetermined.push_box(p.box);
            }
            break;
        }
        wave.clear();
        wave.reserve(boundary.size() * 2);
        for (auto& p : boundary) {
            detail::bisect_widest(p.box, left, right);
            wave.emplace_back(left);
            wave.emplace_back(right);
        }
    }
    return cells;
}

// ---------------------------------------------------------------------------
// refine_for_diameter: shrink the halfdiameter gap of a preimage SetApprox by
// splitting only the undetermined boxes that realize the outer diameter.
// Volume-uniform refinement would waste effort on boundary far from the
// extreme points; this loop touches O(log) boxes per extreme corner.
// ---------------------------------------------------------------------------

// Returns the final {inner diameter, outer diameter} so callers need not
// recompute them. Each round splits the undetermined boxes that could pair
// with one of the current extreme anchors to beat the inner diameter: those
// are exactly the boxes whose overshoot keeps dOut high and whose
// unclassified interiors keep dIn low.
inline std::pair<double, double> refine_for_diameter(SetApprox& s, const Query& f,
                                                     const Interval& target,
                                                     double halfdiam_gap_tol,
                                                     long split_budget = 200000) {
    if (s.outer_empty()) return {0.0, 0.0};
    std::vector<Interval> left, right;
    for (;;) {
        BoxUnion outer = s.outer();
        auto w = detail::diameter_witness(outer);
        double dOut = std::sqrt(w.dist2);
        double dIn = s.inner.empty() ? 0.0 : diameter(s.inner);
        if (0.5 * (dOut - dIn) <= halfdiam_gap_tol || split_budget <= 0) return {dIn, dOut};

        std::vector<Interval> anchorA(outer.box(w.box_a).begin(), outer.box(w.box_a).end());
        std::vector<Interval> anchorB(outer.box(w.box_b).begin(), outer.box(w.box_b).end());
        const double dIn2 = dIn * dIn;

        bool progressed = false;
        BoxUnion und(s.undetermined.dim());
        und.reserve_boxes(s.undetermined.size() + 8);
        for (size_t i = 0; i < s.undetermined.size(); ++i) {
            auto box = s.undetermined.box(i);
            bool nearExtreme = max_dist2(box, anchorA) >= dIn2 || max_dist2(box, anchorB) >= dIn2;
            if (!nearExtreme || detail::box_max_width(box) <= 1e-13 || split_budget <= 0) {
                und.push_box(box);
                continue;
            }
            detail::bisect_widest(box, left, right);
            for (auto* child : {&left, &right}) {
                Interval r = f.eval_interval(*child);
                if (target.contains(r)) s.inner.push_box(*child);
                else if (r.intersects(target)) und.push_box(*child);
            }
            --split_budget;
            progressed = true;
        }
        s.undetermined = std::move(und);
        if (!progressed) return {dIn, dOut}; // nothing refinable near the extremes
    }
}

// ---------------------------------------------------------------------------
// check_unrelated: joint range equals the Cartesian product of the marginals
// (as point sets).
// ---------------------------------------------------------------------------

inline bool check_unrelated(const BoxUnion& a, const BoxUnion& b, const BoxUnion& joint) {
    if (joint.dim() != a.dim() + b.dim())
        throw InputError("check_unrelated: joint dimension must be dim(a)+dim(b)");
    return same_point_set(joint, cartesian_product(a, b));
}

// ---------------------------------------------------------------------------
// fibers_connected: sample thin level sets of f across its image and test
// whether each preimage is geometrically connected. Supports the pull-back
// optimality argument; a disconnected fiber disables it.
// ---------------------------------------------------------------------------

inline bool fibers_connected(const Query& f, const DomainSpec& X, const Interval& image,
                             std::span<const double> sample_ys, int depth = 12) {
    double width = image.length();
    if (width <= 0.0) return true;
    double delta = std::max(1e-9, 1e-3 * width);
    for (double y : sample_ys) {
        Interval band(std::max(image.lo, y - delta), std::min(image.hi, y + delta));
        // depth-capped, coarse cover of the level set: box count stays small
        // and a connected fiber keeps a connected cover
        SetApprox pre = preimage(f, band, X, 1e-300, depth);
        if (pre.outer_empty()) continue;
        if (geometric_components(pre.outer()).size() > 1) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Non-constancy test for a raw query piece restricted to a cell: interval
// evaluation of the gradient components, bisecting a few levels. Returns
// true when some component excludes zero on a positive-volume sub-box;
// an expression whose gradient bound is identically [0,0] is constant.
// Ambiguous cases count as non-constant (the leak-reporting direction).
// ---------------------------------------------------------------------------

inline bool piece_is_nonconstant(const Query& f, const BoxUnion& cell, int bisect_depth = 8) {
    std::vector<Query> grad;
    grad.reserve(static_cast<size_t>(f.dim()));
    for (int d = 0; d < f.dim(); ++d) grad.push_back(f.derivative(d));

    bool ambiguous = false;
    std::vector<Interval> left, right;
    for (size_t i = 0; i < cell.size(); ++i) {
        auto b = cell.box(i);
        std::vector<std::vector<Interval>> wave;
        wave.emplace_back(b.begin(), b.end());
        for (int depth = 0; depth <= bisect_depth && !wave.empty(); ++depth) {
            std::vector<std::vector<Interval>> next;
            for (auto& box : wave) {
                bool allZero = true, excluded = false;
                for (const auto& g : grad) {
                    Interval r;
                    try {
                        r = g.eval_interval(box);
                    } catch (const ComputeError&) {
                        ambiguous = true;
                        continue;
                    }
                    if (!(r.lo == 0.0 && r.hi == 0.0)) allZero = false;
                    if (r.lo > 0.0 || r.hi < 0.0) excluded = true;
                }
                if (excluded && detail::box_volume(box) > 0.0) return true;
                if (allZero) continue; // constant on this sub-box
                if (depth == bisect_depth) {
                    ambiguous = true;
                } else {
                    detail::bisect_widest(box, left, right);
                    next.emplace_back(left);
                    next.emplace_back(right);
                }
            }
            wave.swap(next);
        }
    }
    return ambiguous;
}

} // namespace nsinfo
