#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nsinfo/errors.hpp"
#include "nsinfo/geometry.hpp"
#include "nsinfo/query.hpp"
#include "nsinfo/set_inversion.hpp"

namespace nsinfo {

// ---------------------------------------------------------------------------
// Piecewise-constant release policies.
//
// LevelSet:  f~(x) = b_i  when  query(x) in [a_i, a_{i+1})   (last bin closed)
// Explicit:  f~(x) = b_i  when  x in cell_i
// Hybrid:    explicit cells where a piece may carry a raw restricted query
//            instead of a constant; models non-private mechanisms.
//
// An Explicit policy derived from a level-set rule keeps that rule so points
// classify exactly even when the cells are certified approximations.
// ---------------------------------------------------------------------------

struct PolicyPiece {
    BoxUnion cell;
    double value = 0.0;
    std::optional<Query> raw; // set: the piece releases raw(x), not `value`
};

struct PiecewiseConstantPolicy {
    enum class Form { LevelSet, Explicit, Hybrid };

    Form form = Form::LevelSet;

    // level-set rule (present for LevelSet; retained on Explicit when derived)
    std::optional<Query> query;
    std::vector<double> breakpoints; // a_1 <= ... <= a_{q+1}
    std::vector<double> values;      // b_1 ... b_q

    // explicit cells, sorted by value (Explicit / Hybrid)
    std::vector<PolicyPiece> pieces;

    static PiecewiseConstantPolicy level_set(Query q, std::vector<double> bp, std::vector<double> vals) {
        if (bp.size() != vals.size() + 1)
            throw InputError("policy: breakpoints must be one longer than values");
        if (!std::is_sorted(bp.begin(), bp.end()))
            throw InputError("policy: breakpoints must be nondecreasing");
        for (size_t i = 0; i + 1 < bp.size(); ++i)
            if (!(bp[i] < bp[i + 1])) throw InputError("policy: empty bin in breakpoints");
        PiecewiseConstantPolicy p;
        p.form = Form::LevelSet;
        p.query = std::move(q);
        p.breakpoints = std::move(bp);
        p.values = std::move(vals);
        return p;
    }

    static PiecewiseConstantPolicy explicit_cells(std::vector<PolicyPiece> cells) {
        if (cells.empty()) throw InputError("policy: no cells");
        bool hybrid = false;
        for (const auto& c : cells) {
            if (c.cell.empty()) throw InputError("policy: empty cell");
            if (c.raw) hybrid = true;
        }
        std::stable_sort(cells.begin(), cells.end(), [](const PolicyPiece& a, const PolicyPiece& b) {
            return a.value < b.value;
        });
        PiecewiseConstantPolicy p;
        p.form = hybrid ? Form::Hybrid : Form::Explicit;
        p.pieces = std::move(cells);
        return p;
    }

    bool has_level_set_rule() const { return query.has_value() && breakpoints.size() >= 2; }

    size_t bin_count() const {
        return has_level_set_rule() ? values.size() : pieces.size();
    }

    // bin index for a release value y under the left-closed convention
    size_t level_set_bin(double y) const {
        const auto& bp = breakpoints;
        double fuzz = 1e-9 * std::max(1.0, std::abs(bp.back() - bp.front()));
        if (y < bp.front() - fuzz || y > bp.back() + fuzz)
            throw ComputeError("policy: release value outside quantizer range");
        size_t i = static_cast<size_t>(std::upper_bound(bp.begin(), bp.end(), y) - bp.begin());
        if (i == 0) return 0;
        if (i >= bp.size()) return values.size() - 1; // y at/above the last breakpoint
        return i - 1;
    }
};

// Classification result: 1-based cell index plus the released value.
struct PolicyCell {
    size_t index = 0;
    double value = 0.0;
};

inline PolicyCell classify_point(const PiecewiseConstantPolicy& p, const DomainSpec& X,
                                 std::span<const double> x) {
    if (static_cast<int>(x.size()) != X.dim) throw InputError("policy: point dimension mismatch");
    if (!X.domain.contains_point(x)) throw InputError("policy: point outside domain");

    if (p.has_level_set_rule()) {
        double y = p.query->eval(x);
        size_t bin = p.level_set_bin(y);
        return {bin + 1, p.values[bin]};
    }
    for (size_t i = 0; i < p.pieces.size(); ++i) {
        const auto& piece = p.pieces[i];
        if (piece.cell.contains_point(x)) {
            double v = piece.raw ? piece.raw->eval(x) : piece.value;
            return {i + 1, v};
        }
    }
    throw ComputeError("policy: cells do not cover the point");
}

inline double apply_policy(const PiecewiseConstantPolicy& p, const DomainSpec& X,
                           std::span<const double> x) {
    return classify_point(p, X, x).value;
}

} // namespace nsinfo
