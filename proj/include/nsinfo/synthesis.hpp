#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nsinfo/errors.hpp"
#include "nsinfo/ext_real.hpp"
#include "nsinfo/infotheory.hpp"
#include "nsinfo/policy.hpp"
#include "nsinfo/query.hpp"
#include "nsinfo/set_inversion.hpp"

namespace nsinfo {

// ---------------------------------------------------------------------------
// Uniform quantizer: q equal bins over [lo, hi], midpoint report values.
// ---------------------------------------------------------------------------

// ceiling with a slack guard so FP noise on exact multiples does not add a bin
inline int ceil_bins(double v) {
    return std::max(1, static_cast<int>(std::ceil(v - 1e-12)));
}

struct UniformQuantizer {
    double lo = 0.0, hi = 0.0;
    int q = 1;

    double width() const { return (hi - lo) / static_cast<double>(q); }

    std::vector<double> breakpoints() const {
        std::vector<double> bp(static_cast<size_t>(q) + 1);
        for (int i = 0; i <= q; ++i)
            bp[static_cast<size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(q);
        bp.back() = hi;
        return bp;
    }

    std::vector<double> values() const {
        auto bp = breakpoints();
        std::vector<double> b(static_cast<size_t>(q));
        for (int i = 0; i < q; ++i)
            b[static_cast<size_t>(i)] = 0.5 * (bp[static_cast<size_t>(i)] + bp[static_cast<size_t>(i) + 1]);
        return b;
    }
};

inline UniformQuantizer uniform_quantizer(double lo, double hi, double gamma) {
    if (!(hi > lo)) throw InputError("quantizer: hi must exceed lo");
    if (!(gamma > 0.0)) throw InputError("quantizer: gamma must be positive");
    return {lo, hi, ceil_bins(gamma * (hi - lo) / 2.0)};
}

// ---------------------------------------------------------------------------
// Synthesis request / report
// ---------------------------------------------------------------------------

enum class PrivacyMetric { P1, P2 };

struct SynthesisRequest {
    Query query;
    DomainSpec domain;
    double gamma = 1.0;
    PrivacyMetric metric = PrivacyMetric::P2;
    Tolerances tol;
};

struct PolicyReport {
    PiecewiseConstantPolicy policy;
    int q = 0;
    std::optional<CertInterval> quality; // 1 / sup |f - f~|
    InfoReport info;
    EstimatorMetrics estimator;
    double fano_dmin = 0.0, fano_dmax = 0.0;
    bool feasible = true;
    bool warning_nonoptimal = false;
    std::optional<double> gamma;
    std::vector<std::string> notes;
};

// ---------------------------------------------------------------------------
// Quality  Q = 1 / ess-sup_x |f(x) - f~(x)|  as a certified enclosure.
// Per cell the deviation is |f - b| bounded over outer boxes; the lower
// witness comes from inner boxes (exact for separable queries, whose range
// bounds are attained).
// ---------------------------------------------------------------------------

inline CertInterval quality_from_family(const ConditionalFamily& fam, const Query& f) {
    double supLo = 0.0, supHi = 0.0;
    const bool exactRange = f.separable().has_value();
    std::vector<double> pt(static_cast<size_t>(f.dim()));

    auto dev_hi = [](const Interval& r, double b) {
        return std::max(std::abs(r.lo - b), std::abs(r.hi - b));
    };

    for (const auto& c : fam.cells) {
        for (size_t i = 0; i < c.set.undetermined.size(); ++i)
            supHi = std::max(supHi, dev_hi(f.eval_interval(c.set.undetermined.box(i)), c.y));
        for (size_t i = 0; i < c.set.inner.size(); ++i) {
            auto box = c.set.inner.box(i);
            Interval r = f.eval_interval(box);
            supHi = std::max(supHi, dev_hi(r, c.y));
            if (exactRange) {
                supLo = std::max(supLo, dev_hi(r, c.y));
            } else {
                for (size_t d = 0; d < box.size(); ++d) pt[d] = box[d].mid();
                supLo = std::max(supLo, std::abs(f.eval(pt) - c.y));
            }
        }
    }
    for (const auto& rp : fam.raw_pieces) {
        Query diff = query_difference(f, rp.query);
        const bool diffExact = diff.separable().has_value();
        for (size_t i = 0; i < rp.cell.size(); ++i) {
            auto box = rp.cell.box(i);
            Interval r = diff.eval_interval(box);
            supHi = std::max(supHi, std::max(std::abs(r.lo), std::abs(r.hi)));
            if (diffExact) {
                supLo = std::max(supLo, std::max(std::abs(r.lo), std::abs(r.hi)));
            } else {
                for (size_t d = 0; d < box.size(); ++d) pt[d] = box[d].mid();
                supLo = std::max(supLo, std::abs(diff.eval(pt)));
            }
        }
    }

    double qLo = supHi > 0.0 ? 1.0 / supHi : std::numeric_limits<double>::infinity();
    double qHi = supLo > 0.0 ? 1.0 / supLo : std::numeric_limits<double>::infinity();
    return {qLo, qHi};
}

inline CertInterval quality_q(const PiecewiseConstantPolicy& p, const Query& f, const DomainSpec& X,
                              const Tolerances& tol = {}) {
    ConditionalFamily fam = conditional_family(p, X, tol);
    return quality_from_family(fam, f);
}

// ---------------------------------------------------------------------------
// Report assembly shared by the synthesis paths and the measure command.
// ---------------------------------------------------------------------------

namespace detail {

inline PolicyReport assemble_report(PiecewiseConstantPolicy policy, ConditionalFamily& fam,
                                    const Query* f, const DomainSpec& X,
                                    std::optional<double> gamma, const Tolerances& tol) {
    PolicyReport rep;
    rep.estimator = estimator_metrics(fam, tol.resolve_diam_gap(X));
    rep.info = info_report(X, fam);
    rep.q = static_cast<int>(fam.cells.size());
    rep.fano_dmin = fano_bound(rep.info.d0.nominal(), X.dim);
    rep.fano_dmax = fano_bound(rep.info.h0_cond.nominal(), X.dim);
    rep.gamma = gamma;
    if (f) {
        rep.quality = quality_from_family(fam, *f);
        if (gamma) {
            double supLo = rep.quality->hi > 0.0 && std::isfinite(rep.quality->hi)
                               ? 1.0 / rep.quality->hi
                               : 0.0;
            rep.feasible = supLo <= 1.0 / *gamma + 1e-9;
        }
    }
    if (X.dim > 2)
        rep.notes.push_back("worst-case estimator distances validated for dimensions 1 and 2 only");
    rep.policy = std::move(policy);
    return rep;
}

inline PolicyReport single_cell_report(const Query& f, const DomainSpec& X, std::optional<double> gamma,
                                       const Tolerances& tol, double value) {
    PolicyPiece piece;
    piece.cell = X.domain;
    piece.value = value;
    auto policy = PiecewiseConstantPolicy::explicit_cells({piece});
    ConditionalFamily fam = conditional_family(policy, X, tol);
    return assemble_report(std::move(policy), fam, &f, X, gamma, tol);
}

// Pull-back of the uniform quantizer through the query: shared by the
// relaxed solution and the P2 optimum. Bins whose preimage is certainly
// empty (non-surjective queries) are fused into their right neighbour.
inline PolicyReport synth_pullback(const SynthesisRequest& req, bool check_fibers) {
    const Query& f = req.query;
    const DomainSpec& X = req.domain;
    Interval img = image_interval(f, X, req.tol.eps_img);
    if (!(img.length() > 1e-12 * std::max(1.0, std::abs(img.mid()))))
        return single_cell_report(f, X, req.gamma, req.tol, img.mid());

    UniformQuantizer quant = uniform_quantizer(img.lo, img.hi, req.gamma);
    auto bp = quant.breakpoints();
    auto vals = quant.values();
    double evol = req.tol.resolve_eps_vol(X);
    auto parts = classify_partition(f, bp, X, evol, req.tol.max_depth);

    std::vector<double> keptBp{bp.front()}, keptVals;
    std::vector<ConditionalFamily::Cell> cells;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (parts[i].outer_empty()) continue; // fused into the next kept bin
        ConditionalFamily::Cell c;
        c.set = std::move(parts[i]);
        c.y = vals[i];
        c.bin = Interval(keptBp.back(), bp[i + 1]);
        cells.push_back(std::move(c));
        keptBp.push_back(bp[i + 1]);
        keptVals.push_back(vals[i]);
    }
    if (keptVals.empty()) throw ComputeError("synthesis: no nonempty bins");
    keptBp.back() = bp.back();

    bool connected = true;
    if (check_fibers) {
        std::vector<double> ys;
        for (size_t i = 0; i + 1 < keptBp.size() && ys.size() < 24; ++i)
            ys.push_back(0.5 * (keptBp[i] + keptBp[i + 1]));
        connected = fibers_connected(f, X, img, ys);
    }

    PiecewiseConstantPolicy policy;
    if (connected) {
        policy = PiecewiseConstantPolicy::level_set(f, keptBp, keptVals);
    } else {
        // pulled-back quantizer reported as explicit cells; the level-set
        // rule is retained so points still classify exactly
        std::vector<PolicyPiece> pieces;
        for (auto& c : cells) pieces.push_back({c.set.outer(), c.y, std::nullopt});
        policy = PiecewiseConstantPolicy::explicit_cells(std::move(pieces));
        policy.query = f;
        policy.breakpoints = keptBp;
        policy.values = keptVals;
    }

    ConditionalFamily fam = family_from_cells(X.dim, std::move(cells), {}, f);
    PolicyReport rep = assemble_report(std::move(policy), fam, &f, X, req.gamma, req.tol);
    if (!connected) {
        rep.warning_nonoptimal = true;
        rep.notes.push_back("query has disconnected level sets; pulled-back quantizer may not be optimal");
    }
    return rep;
}

} // namespace detail

inline PolicyReport synthesize_relaxed(const SynthesisRequest& req) {
    if (req.metric == PrivacyMetric::P1)
        throw InputError("the relaxed problem applies to the maximin metric (P2) only; "
                         "use synthesize_optimal for P1");
    return detail::synth_pullback(req, false);
}

// Full report for a user-supplied policy (the measure command).
inline PolicyReport analyze_policy(const PiecewiseConstantPolicy& policy, const DomainSpec& X,
                                   const Query* f = nullptr, std::optional<double> gamma = std::nullopt,
                                   const Tolerances& tol = {}) {
    ConditionalFamily fam = conditional_family(policy, X, tol);
    return detail::assemble_report(policy, fam, f, X, gamma, tol);
}

// ---------------------------------------------------------------------------
// P1: maximize the smallest cell measure over level-set policies with the
// P2-minimal bin count, bin widths capped at 2/gamma, breakpoints on a grid.
// Bisection on the target measure t with a greedy left-to-right sweep; each
// breakpoint advances until the bin holds measure t, but never so little
// that the remaining width cannot be covered by the remaining bins.
// ---------------------------------------------------------------------------

namespace detail {

struct P1Grid {
    std::vector<double> g;      // grid points, g.front()=ylo, g.back()=yhi
    std::vector<double> prefix; // prefix[k] = measure of f^-1([g0, gk]), midpoint estimate
    std::vector<size_t> reach;  // reach[b]: leftmost grid index from which b
                                // bins of width <= cap can still cover to the end
    double cap = 0.0, fuzz = 0.0;

    void build_reach(int q, double cap_) {
        cap = cap_;
        fuzz = 1e-9 * (g.back() - g.front());
        reach.assign(static_cast<size_t>(q) + 1, g.size() - 1);
        for (int b = 1; b <= q; ++b) {
            double need = g[reach[static_cast<size_t>(b) - 1]] - cap - fuzz;
            size_t i = static_cast<size_t>(
                std::lower_bound(g.begin(), g.end(), need) - g.begin());
            reach[static_cast<size_t>(b)] = i;
        }
    }
};

// Greedy sweep: each breakpoint advances until its bin holds measure t, but
// never past the width cap and never so little that the remaining bins
// cannot reach the end of the grid. Returns interior breakpoint indices.
inline bool p1_sweep(const P1Grid& grid, int q, double t, std::vector<size_t>* out) {
    const auto& g = grid.g;
    const auto& F = grid.prefix;
    const size_t G = g.size() - 1;
    if (out) out->clear();
    if (grid.reach[static_cast<size_t>(q)] > 0) return false; // width alone unsatisfiable
    size_t idx = 0;
    for (int bin = 1; bin < q; ++bin) {
        size_t j = std::max(idx + 1, grid.reach[static_cast<size_t>(q - bin)]);
        while (j < G && F[j] - F[idx] < t - 1e-12) ++j;
        if (j >= G) return false;
        if (g[j] - g[idx] > grid.cap + grid.fuzz) return false;
        if (out) out->push_back(j);
        idx = j;
    }
    if (g.back() - g[idx] > grid.cap + grid.fuzz) return false;
    return F[G] - F[idx] >= t - 1e-12;
}

} // namespace detail

inline PolicyReport synthesize_optimal(const SynthesisRequest& req) {
    if (req.metric == PrivacyMetric::P2) return detail::synth_pullback(req, true);

    const Query& f = req.query;
    const DomainSpec& X = req.domain;
    Interval img = image_interval(f, X, req.tol.eps_img);
    if (!(img.length() > 1e-12 * std::max(1.0, std::abs(img.mid()))))
        return detail::single_cell_report(f, X, req.gamma, req.tol, img.mid());

    const int q = uniform_quantizer(img.lo, img.hi, req.gamma).q;
    const double cap = 2.0 / req.gamma;
    const double delta = req.tol.resolve_delta_a(X, img.length());
    const size_t G = std::max<size_t>(q, static_cast<size_t>(std::ceil(img.length() / delta)));

    detail::P1Grid grid;
    grid.g.resize(G + 1);
    for (size_t k = 0; k <= G; ++k)
        grid.g[k] = img.lo + img.length() * static_cast<double>(k) / static_cast<double>(G);
    grid.g.back() = img.hi;

    double evol = req.tol.resolve_eps_vol(X);
    auto gridCells = classify_partition(f, grid.g, X, evol, req.tol.max_depth);
    grid.prefix.assign(G + 1, 0.0);
    for (size_t k = 0; k < G; ++k)
        grid.prefix[k + 1] =
            grid.prefix[k] + 0.5 * (gridCells[k].inner_measure() + gridCells[k].outer_measure());
    grid.build_reach(q, cap);

    double lo = 0.0, hi = grid.prefix.back();
    if (!detail::p1_sweep(grid, q, 0.0, nullptr))
        throw ComputeError("synthesis: width constraint unsatisfiable on the breakpoint grid");
    for (int it = 0; it < 64; ++it) {
        double mid = 0.5 * (lo + hi);
        if (detail::p1_sweep(grid, q, mid, nullptr)) lo = mid;
        else hi = mid;
    }
    std::vector<size_t> cuts;
    detail::p1_sweep(grid, q, lo, &cuts);

    std::vector<double> bp{img.lo};
    for (size_t j : cuts) bp.push_back(grid.g[j]);
    bp.push_back(img.hi);

    // report value: Chebyshev center of each cell's image, clamped to the
    // bin (the true image lies inside it; the bound may overshoot)
    std::vector<ConditionalFamily::Cell> cells;
    std::vector<double> vals;
    int maxDepth = req.tol.max_depth;
    for (size_t i = 0; i + 1 < bp.size(); ++i) {
        Interval bin(bp[i], bp[i + 1]);
        SetApprox pre = preimage(f, bin, X, evol, maxDepth);
        double b = bin.mid();
        if (!pre.outer_empty()) {
            DomainSpec cellDom(X.dim, pre.outer());
            Interval cellImg = image_interval(f, cellDom, req.tol.eps_img);
            double clo = std::max(cellImg.lo, bin.lo), chi = std::min(cellImg.hi, bin.hi);
            if (clo <= chi) b = 0.5 * (clo + chi);
        }
        ConditionalFamily::Cell c;
        c.set = std::move(pre);
        c.y = b;
        c.bin = bin;
        cells.push_back(std::move(c));
        vals.push_back(b);
    }

    auto policy = PiecewiseConstantPolicy::level_set(f, bp, vals);
    ConditionalFamily fam = family_from_cells(X.dim, std::move(cells), {}, f);
    return detail::assemble_report(std::move(policy), fam, &f, X, req.gamma, req.tol);
}

// ---------------------------------------------------------------------------
// Trade-off sweep: one synthesized policy per gamma.
// ---------------------------------------------------------------------------

struct TradeoffRow {
    double gamma = 0.0;
    int q = 0;
    ExtInterval l0;
    ExtReal i_star;
    CertInterval d_min, d_max, quality;
    bool feasible = true;
};

struct TradeoffTable {
    std::vector<TradeoffRow> rows;
    bool istar_nondecreasing = true;
    bool dmin_nonincreasing = true;
};

inline TradeoffTable tradeoff_sweep(const Query& f, const DomainSpec& X,
                                    std::span<const double> gammas, PrivacyMetric metric,
                                    const Tolerances& tol = {}) {
    if (gammas.empty()) throw InputError("tradeoff: no gamma values");
    TradeoffTable table;
    for (double g : gammas) {
        if (!(g > 0.0)) throw InputError("tradeoff: gamma values must be positive");
        SynthesisRequest req{f, X, g, metric, tol};
        PolicyReport rep = synthesize_optimal(req);
        TradeoffRow row;
        row.gamma = g;
        row.q = rep.q;
        row.l0 = rep.info.l0;
        row.i_star = rep.info.i_star();
        row.d_min = rep.estimator.d_min;
        row.d_max = rep.estimator.d_max;
        row.quality = rep.quality.value_or(CertInterval{0.0, 0.0});
        row.feasible = rep.feasible;
        table.rows.push_back(row);
    }
    for (size_t i = 1; i < table.rows.size(); ++i) {
        const auto& prev = table.rows[i - 1];
        const auto& cur = table.rows[i];
        if (cur.i_star.v < prev.i_star.v - 1e-12) table.istar_nondecreasing = false;
        double slack = (prev.d_min.width() + cur.d_min.width()) + 1e-9;
        if (cur.d_min.mid() > prev.d_min.mid() + slack) table.dmin_nonincreasing = false;
    }
    return table;
}

} // namespace nsinfo
