#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <vector>

#include "nsinfo/errors.hpp"
#include "nsinfo/ext_real.hpp"
#include "nsinfo/geometry.hpp"
#include "nsinfo/policy.hpp"
#include "nsinfo/set_inversion.hpp"

namespace nsinfo {

// ---------------------------------------------------------------------------
// ConditionalFamily: the family of conditional ranges induced by a
// piecewise-constant release. One constant cell per distinct report value;
// non-constant pieces (raw queries) are kept separately since they induce a
// continuum of measure-zero conditional ranges.
// ---------------------------------------------------------------------------

struct ConditionalFamily {
    struct Cell {
        SetApprox set;
        double y = 0.0;
        std::optional<Interval> bin; // level-set origin, enables lazy refinement
    };
    struct RawPiece {
        BoxUnion cell;
        Query query;
    };

    int dim = 0;
    std::vector<Cell> cells;         // sorted by y, outer-nonempty, distinct y
    std::vector<RawPiece> raw_pieces; // verified non-constant on their cells
    std::optional<Query> query;      // level-set rule, when the family came from one

    bool has_nonconstant() const { return !raw_pieces.empty(); }
};

inline ConditionalFamily family_from_cells(int dim, std::vector<ConditionalFamily::Cell> cells,
                                           std::vector<ConditionalFamily::RawPiece> raw = {},
                                           std::optional<Query> query = std::nullopt) {
    // merge cells sharing a report value, drop certainly-empty ones
    std::map<double, ConditionalFamily::Cell> byValue;
    for (auto& c : cells) {
        if (c.set.outer_empty()) continue;
        auto it = byValue.find(c.y);
        if (it == byValue.end()) {
            byValue.emplace(c.y, std::move(c));
        } else {
            it->second.set.merge_with(c.set);
            it->second.bin.reset(); // merged cells lose a single-bin origin
        }
    }
    ConditionalFamily fam;
    fam.dim = dim;
    fam.query = std::move(query);
    fam.raw_pieces = std::move(raw);
    fam.cells.reserve(byValue.size());
    for (auto& [y, cell] : byValue) fam.cells.push_back(std::move(cell));
    return fam;
}

inline ConditionalFamily conditional_family(const PiecewiseConstantPolicy& p, const DomainSpec& X,
                                            const Tolerances& tol = {}) {
    std::vector<ConditionalFamily::Cell> cells;
    std::vector<ConditionalFamily::RawPiece> raw;
    std::optional<Query> rule;

    if (p.has_level_set_rule()) {
        rule = p.query;
        double evol = tol.resolve_eps_vol(X);
        auto parts = classify_partition(*p.query, p.breakpoints, X, evol, tol.max_depth);
        for (size_t i = 0; i < parts.size(); ++i) {
            ConditionalFamily::Cell c;
            c.set = std::move(parts[i]);
            c.y = p.values[i];
            c.bin = Interval(p.breakpoints[i], p.breakpoints[i + 1]);
            cells.push_back(std::move(c));
        }
    } else {
        BoxUnion covered(X.dim);
        size_t totalBoxes = 0;
        for (const auto& piece : p.pieces) totalBoxes += piece.cell.size();
        covered.reserve_boxes(totalBoxes);
        for (const auto& piece : p.pieces) {
            if (piece.cell.dim() != X.dim) throw InputError("policy: cell dimension mismatch");
            covered.append(piece.cell);
            if (piece.raw) {
                if (piece_is_nonconstant(*piece.raw, piece.cell)) {
                    raw.push_back({piece.cell, *piece.raw});
                } else {
                    // gradient identically zero: the piece is constant after all
                    std::vector<double> pt(static_cast<size_t>(X.dim));
                    auto b = piece.cell.box(0);
                    for (int d = 0; d < X.dim; ++d) pt[static_cast<size_t>(d)] = b[static_cast<size_t>(d)].mid();
                    ConditionalFamily::Cell c;
                    c.set = SetApprox::exact(piece.cell);
                    c.y = piece.raw->eval(pt);
                    cells.push_back(std::move(c));
                }
            } else {
                ConditionalFamily::Cell c;
                c.set = SetApprox::exact(piece.cell);
                c.y = piece.value;
                cells.push_back(std::move(c));
            }
        }
        // Exact set containment fragments quadratically in the box count;
        // large explicit policies are validated on a deterministic point
        // grid instead (a failed sample is a definite violation, and
        // classification still errors at run time on uncovered points).
        if (covered.size() <= 4096) {
            if (!contains(covered, X.domain))
                throw InputError("policy: cells do not cover the domain");
        } else {
            std::vector<double> pt(static_cast<size_t>(X.dim));
            const int per_dim = X.dim == 1 ? 128 : X.dim == 2 ? 11 : 5;
            for (size_t b = 0; b < X.domain.size(); ++b) {
                auto box = X.domain.box(b);
                std::vector<int> idx(static_cast<size_t>(X.dim), 0);
                for (;;) {
                    for (int d = 0; d < X.dim; ++d) {
                        const auto& s = box[static_cast<size_t>(d)];
                        pt[static_cast<size_t>(d)] =
                            s.lo + s.length() * (idx[static_cast<size_t>(d)] + 0.5) / per_dim;
                    }
                    if (!covered.contains_point(pt))
                        throw InputError("policy: cells do not cover the domain");
                    int d = 0;
                    while (d < X.dim && ++idx[static_cast<size_t>(d)] == per_dim) {
                        idx[static_cast<size_t>(d)] = 0;
                        ++d;
                    }
                    if (d == X.dim) break;
                }
            }
        }
    }
    return family_from_cells(X.dim, std::move(cells), std::move(raw), std::move(rule));
}

// ---------------------------------------------------------------------------
// Entropy functionals. All logarithms are natural.
//
// Conventions over finitely many cells:
//   h0(X|Y)  ess-sup -> max over cells of positive measure (measure-zero
//            conditional ranges are discarded by the essential supremum);
//   d0(X|Y)  plain inf -> min over all cells, measure-zero ones included;
//            any non-constant piece contributes -inf (its fibers are
//            lower-dimensional, hence Lebesgue-null).
// ---------------------------------------------------------------------------

inline ExtReal entropy_h0(const DomainSpec& X) {
    return ExtReal::log_measure(measure(X.domain));
}

inline ExtInterval conditional_entropy(const ConditionalFamily& fam) {
    if (fam.cells.empty() && fam.raw_pieces.empty())
        throw InputError("conditional entropy: empty family");
    ExtReal lo = ExtReal::neg_inf(), hi = ExtReal::neg_inf();
    for (const auto& c : fam.cells) {
        double om = c.set.outer_measure();
        if (om <= 0.0) continue; // certainly measure-zero: excluded by ess-sup
        lo = ext_max(lo, ExtReal::log_measure(c.set.inner_measure()));
        hi = ext_max(hi, ExtReal::log_measure(om));
    }
    return {lo, hi};
}

inline ExtInterval disarray_d0(const ConditionalFamily& fam) {
    if (fam.cells.empty() && fam.raw_pieces.empty())
        throw InputError("disarray: empty family");
    if (fam.has_nonconstant())
        return ExtInterval::exact(ExtReal::neg_inf());
    ExtReal lo = ExtReal::pos_inf(), hi = ExtReal::pos_inf();
    for (const auto& c : fam.cells) {
        lo = ext_min(lo, ExtReal::log_measure(c.set.inner_measure()));
        hi = ext_min(hi, ExtReal::log_measure(c.set.outer_measure()));
    }
    return {lo, hi};
}

inline ExtInterval info_I0(const DomainSpec& X, const ConditionalFamily& fam) {
    ExtReal h = entropy_h0(X);
    ExtInterval hc = conditional_entropy(fam);
    return {ext_sub(h, hc.hi), ext_sub(h, hc.lo)};
}

inline ExtInterval leakage_L0(const DomainSpec& X, const ConditionalFamily& fam) {
    ExtReal h = entropy_h0(X);
    ExtInterval d = disarray_d0(fam);
    auto sub = [&](ExtReal dv) {
        if (dv.is_neg_inf()) return ExtReal::pos_inf();
        return ext_sub(h, dv);
    };
    return {sub(d.hi), sub(d.lo)};
}

// ---------------------------------------------------------------------------
// Information transmission T0 = h0(X) + h0(Y) - h0(X,Y). For any
// piecewise-constant release the range of Y is finite, so mu(range(Y)) = 0
// and the measure degenerates; the marker records that.
// ---------------------------------------------------------------------------

struct T0Result {
    bool degenerate = true;
    ExtReal value = ExtReal::neg_inf();
};

inline T0Result transmission_T0(const DomainSpec&, const ConditionalFamily&) {
    return {true, ExtReal::neg_inf()};
}

inline ExtReal transmission_T0_joint(const BoxUnion& joint, int nx) {
    if (nx < 1 || nx >= joint.dim()) throw InputError("transmission: bad coordinate split");
    ExtReal hx = ExtReal::log_measure(measure(project(joint, 0, nx)));
    ExtReal hy = ExtReal::log_measure(measure(project(joint, nx, joint.dim() - nx)));
    ExtReal hxy = ExtReal::log_measure(measure(joint));
    return ext_sub(ExtReal(hx.v + hy.v), hxy);
}

// ---------------------------------------------------------------------------
// Maximin information. For a deterministic piecewise-constant release the
// taxicab classes of the joint range are exactly the distinct report values:
// cells sharing a value connect through it, distinct values cannot connect
// because their cells are disjoint in x. A non-constant piece of positive
// measure forces infinitely many classes.
// ---------------------------------------------------------------------------

struct TaxicabResult {
    bool unbounded = false;
    std::uint64_t count = 0;
    std::vector<std::vector<size_t>> classes; // family cell indices per class
    ExtReal i_star() const {
        if (unbounded) return ExtReal::pos_inf();
        return ExtReal::log_measure(static_cast<double>(count));
    }
};

inline TaxicabResult maximin_istar(const ConditionalFamily& fam) {
    TaxicabResult r;
    if (fam.has_nonconstant()) {
        r.unbounded = true;
        return r;
    }
    // family cells are merged by value already: one class per cell
    r.count = fam.cells.size();
    r.classes.reserve(fam.cells.size());
    for (size_t i = 0; i < fam.cells.size(); ++i) r.classes.push_back({i});
    return r;
}

inline TaxicabResult maximin_istar(const PiecewiseConstantPolicy& p, const DomainSpec& X,
                                   const Tolerances& tol = {}) {
    return maximin_istar(conditional_family(p, X, tol));
}

// Independent oracle: taxicab-connected components of an explicit planar
// joint range. Two boxes join when a projection overlaps: a shared
// coordinate is enough for a taxicab jump (the connecting segment need not
// lie in the set). Closed boxes touching only at an endpoint represent
// half-open true cells, so a single shared point counts only when one of
// the projections is itself degenerate.
inline int taxicab_grid_oracle(const BoxUnion& joint) {
    if (joint.dim() != 2) throw InputError("taxicab oracle: joint must be 2-D");
    if (joint.empty()) return 0;

    auto linked = [](const Interval& a, const Interval& b) {
        double lo = std::max(a.lo, b.lo), hi = std::min(a.hi, b.hi);
        if (lo > hi) return false;
        if (hi > lo) return true;
        return a.degenerate() || b.degenerate();
    };

    const size_t m = joint.size();
    detail::UnionFind uf(m);
    for (size_t i = 0; i < m; ++i)
        for (size_t j = i + 1; j < m; ++j) {
            auto a = joint.box(i);
            auto b = joint.box(j);
            if (linked(a[0], b[0]) || linked(a[1], b[1])) uf.merge(i, j);
        }
    std::vector<bool> seen(m, false);
    int count = 0;
    for (size_t i = 0; i < m; ++i) {
        size_t r = uf.find(i);
        if (!seen[r]) {
            seen[r] = true;
            ++count;
        }
    }
    return count;
}

// ---------------------------------------------------------------------------
// Fano-type lower bound  Gamma(n/2+1)^{1/n} / sqrt(pi) * exp(h/n)  on the
// worst-case error of any unbiased estimator (isodiametric constant).
// ---------------------------------------------------------------------------

inline double fano_bound(ExtReal h, int nx) {
    if (nx < 1) throw InputError("fano bound: dimension must be >= 1");
    if (h.is_neg_inf()) return 0.0;
    if (h.is_pos_inf()) return std::numeric_limits<double>::infinity();
    double n = static_cast<double>(nx);
    return std::exp(std::lgamma(n / 2.0 + 1.0) / n + h.v / n) / std::sqrt(std::numbers::pi);
}

// ---------------------------------------------------------------------------
// Estimator quality metrics. For the optimal unbiased estimator the
// worst-case error on a conditional range equals half its diameter:
//   d_max = max over positive-measure cells (ess-sup),
//   d_min = min over all cells, non-constant pieces included.
// A 1-D non-constant piece has singleton fibers (exact 0); in higher
// dimension its fibers are only bounded by the cell's half-diameter.
// The realized enclosing-center estimator is reported alongside.
// ---------------------------------------------------------------------------

struct EstimatorMetrics {
    CertInterval d_min, d_max;
    double realized_d_min = 0.0, realized_d_max = 0.0;
};

inline EstimatorMetrics estimator_metrics(ConditionalFamily& fam, double diam_gap_tol = -1.0) {
    if (fam.cells.empty() && fam.raw_pieces.empty())
        throw InputError("estimator metrics: empty family");

    double minLo = std::numeric_limits<double>::infinity(), minHi = minLo;
    double maxLo = 0.0, maxHi = 0.0;
    double realMin = std::numeric_limits<double>::infinity(), realMax = 0.0;
    bool anyMax = false;

    for (auto& c : fam.cells) {
        if (c.set.outer_empty()) continue;
        double dIn, dOut;
        if (diam_gap_tol > 0.0 && fam.query && c.bin) {
            auto d = refine_for_diameter(c.set, *fam.query, *c.bin, diam_gap_tol);
            dIn = d.first;
            dOut = d.second;
        } else {
            dIn = c.set.inner.empty() ? 0.0 : diameter(c.set.inner);
            dOut = diameter(c.set.outer());
        }
        double lo = 0.5 * dIn, hi = 0.5 * dOut;
        minLo = std::min(minLo, lo);
        minHi = std::min(minHi, hi);
        if (c.set.outer_measure() > 0.0) {
            maxLo = std::max(maxLo, lo);
            maxHi = std::max(maxHi, hi);
            anyMax = true;
        }
        auto ec = enclosing_center(c.set.outer());
        realMin = std::min(realMin, ec.radius);
        realMax = std::max(realMax, ec.radius);
    }
    for (const auto& rp : fam.raw_pieces) {
        if (fam.dim == 1) {
            minLo = 0.0;
            minHi = 0.0;
            maxLo = std::max(maxLo, 0.0);
            maxHi = std::max(maxHi, 0.0);
            realMin = 0.0;
        } else {
            double hd = 0.5 * diameter(rp.cell);
            minLo = 0.0;
            minHi = std::min(minHi, hd);
            realMin = std::min(realMin, hd);
        }
        anyMax = anyMax || fam.dim == 1;
    }

    if (!std::isfinite(minLo) && !std::isfinite(minHi))
        throw InputError("estimator metrics: all cells empty");
    if (!anyMax) {
        maxLo = 0.0;
        maxHi = 0.0;
    }

    EstimatorMetrics m;
    m.d_min = {minLo, minHi};
    m.d_max = {maxLo, maxHi};
    m.realized_d_min = realMin;
    m.realized_d_max = realMax;
    return m;
}

// ---------------------------------------------------------------------------
// InfoReport: every information functional for one (X, Y) pair, with
// certified enclosures for the measure-derived ones.
// ---------------------------------------------------------------------------

struct InfoReport {
    ExtReal h0;
    ExtInterval h0_cond, i0, d0, l0;
    T0Result t0;
    TaxicabResult taxicab;

    ExtReal i_star() const { return taxicab.i_star(); }
};

inline InfoReport info_report(const DomainSpec& X, const ConditionalFamily& fam) {
    InfoReport r;
    r.h0 = entropy_h0(X);
    r.h0_cond = conditional_entropy(fam);
    r.d0 = disarray_d0(fam);
    r.i0 = info_I0(X, fam);
    r.l0 = leakage_L0(X, fam);
    r.t0 = transmission_T0(X, fam);
    r.taxicab = maximin_istar(fam);
    return r;
}

} // namespace nsinfo
