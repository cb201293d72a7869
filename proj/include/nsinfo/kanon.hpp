#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "nsinfo/errors.hpp"
#include "nsinfo/ext_real.hpp"
#include "nsinfo/geometry.hpp"

namespace nsinfo {

// ---------------------------------------------------------------------------
// Numeric tables with per-column declared domains, released via per-column
// generalization (interval bins), suppression, or verbatim passthrough.
// The uncertain dataset is the product box of all entry domains; a release
// fixes each entry to a singleton, a bin, or leaves the full column range.
// ---------------------------------------------------------------------------

struct Table {
    std::vector<std::string> columns;
    std::vector<Interval> domains; // one per column
    std::vector<std::vector<double>> rows;

    size_t n_rows() const { return rows.size(); }
    size_t n_cols() const { return columns.size(); }

    void validate() const {
        if (domains.size() != columns.size())
            throw InputError("table: one domain per column required");
        for (size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != columns.size())
                throw InputError("table: ragged row " + std::to_string(r + 1));
            for (size_t c = 0; c < columns.size(); ++c)
                if (!domains[c].contains(rows[r][c]))
                    throw InputError("table: entry at row " + std::to_string(r + 1) + ", column '" +
                                     columns[c] + "' outside its declared domain");
        }
    }
};

enum class RuleKind { Passthrough, Bins, Suppress };

struct ColumnRule {
    RuleKind kind = RuleKind::Passthrough;
    std::vector<double> breakpoints; // Bins: strictly increasing, spans the domain

    void validate(const Interval& domain) const {
        if (kind != RuleKind::Bins) return;
        if (breakpoints.size() < 2) throw InputError("scheme: bins need at least two breakpoints");
        for (size_t i = 0; i + 1 < breakpoints.size(); ++i)
            if (!(breakpoints[i] < breakpoints[i + 1]))
                throw InputError("scheme: breakpoints must be strictly increasing");
        if (breakpoints.front() > domain.lo || breakpoints.back() < domain.hi)
            throw InputError("scheme: breakpoints must span the column domain");
    }

    // left-closed bins; the top value falls into the last bin
    Interval bin_of(double v) const {
        auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), v);
        size_t i = static_cast<size_t>(it - breakpoints.begin());
        if (i == 0) i = 1;
        if (i >= breakpoints.size()) i = breakpoints.size() - 1;
        return Interval(breakpoints[i - 1], breakpoints[i]);
    }

    double min_bin_width() const {
        double w = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i + 1 < breakpoints.size(); ++i)
            w = std::min(w, breakpoints[i + 1] - breakpoints[i]);
        return w;
    }
};

struct GeneralizationScheme {
    std::vector<ColumnRule> columns;

    void validate(const Table& t) const {
        if (columns.size() != t.n_cols())
            throw InputError("scheme: one rule per column required");
        for (size_t c = 0; c < columns.size(); ++c) columns[c].validate(t.domains[c]);
    }
};

// A mechanism applies the scheme, except that the first `passthrough_rows`
// rows are released verbatim.
struct Mechanism {
    GeneralizationScheme scheme;
    size_t passthrough_rows = 0;
};

// ---------------------------------------------------------------------------
// Released tables
// ---------------------------------------------------------------------------

struct ReleasedCell {
    enum class Kind { Value, Bin, Suppressed } kind = Kind::Suppressed;
    double value = 0.0;
    Interval bin;

    std::string label() const {
        std::ostringstream os;
        os.precision(12);
        switch (kind) {
        case Kind::Value: os << value; break;
        case Kind::Bin: os << "[" << bin.lo << "," << bin.hi << ")"; break;
        case Kind::Suppressed: os << "*"; break;
        }
        return os.str();
    }
};

struct ReleasedTable {
    std::vector<std::string> columns;
    std::vector<std::vector<ReleasedCell>> rows;
};

inline ReleasedTable apply_mechanism(const Table& t, const Mechanism& mech) {
    t.validate();
    mech.scheme.validate(t);
    if (mech.passthrough_rows > t.n_rows())
        throw InputError("mechanism: more passthrough rows than table rows");

    ReleasedTable out;
    out.columns = t.columns;
    out.rows.resize(t.n_rows());
    for (size_t r = 0; r < t.n_rows(); ++r) {
        out.rows[r].resize(t.n_cols());
        for (size_t c = 0; c < t.n_cols(); ++c) {
            ReleasedCell& cell = out.rows[r][c];
            const ColumnRule& rule = mech.scheme.columns[c];
            if (r < mech.passthrough_rows || rule.kind == RuleKind::Passthrough) {
                cell.kind = ReleasedCell::Kind::Value;
                cell.value = t.rows[r][c];
            } else if (rule.kind == RuleKind::Bins) {
                cell.kind = ReleasedCell::Kind::Bin;
                cell.bin = rule.bin_of(t.rows[r][c]);
            } else {
                cell.kind = ReleasedCell::Kind::Suppressed;
            }
        }
    }
    return out;
}

inline ReleasedTable anonymize(const Table& t, const GeneralizationScheme& scheme) {
    return apply_mechanism(t, Mechanism{scheme, 0});
}

// ---------------------------------------------------------------------------
// k-anonymity check: the multiplicity of each released tuple.
// ---------------------------------------------------------------------------

struct KVerify {
    bool is_k_anon = false;
    size_t k_achieved = 0;
};

inline KVerify verify_k(const ReleasedTable& rt, size_t k) {
    if (rt.rows.empty()) throw InputError("verify_k: empty release");
    std::map<std::string, size_t> counts;
    std::vector<std::string> keys;
    keys.reserve(rt.rows.size());
    for (const auto& row : rt.rows) {
        std::string key;
        for (const auto& cell : row) {
            key += cell.label();
            key += '\x1f';
        }
        ++counts[key];
        keys.push_back(std::move(key));
    }
    size_t kmin = rt.rows.size();
    for (const auto& key : keys) kmin = std::min(kmin, counts[key]);
    return {kmin >= k, kmin};
}

// ---------------------------------------------------------------------------
// Information analysis of a release. The dataset is one uncertain variable
// over the product box of all n*m entry domains; conditional ranges factor
// entrywise, so every functional reduces to sums over entries.
// ---------------------------------------------------------------------------

struct KAnonReport {
    size_t k_requested = 0, k_achieved = 0;
    bool is_k_anon = false;
    ExtReal h0;
    double cond_measure = 0.0;
    ExtReal d0, l0;
    bool i_star_unbounded = false;
    std::uint64_t i_star_count = 1;
    ExtReal i_star;
};

inline KAnonReport analyze_release(const Table& t, const Mechanism& mech, size_t k) {
    ReleasedTable rt = apply_mechanism(t, mech);
    KVerify kv = verify_k(rt, k);

    KAnonReport rep;
    rep.k_requested = k;
    rep.k_achieved = kv.k_achieved;
    rep.is_k_anon = kv.is_k_anon;

    double h0 = 0.0, d0 = 0.0, istar = 0.0;
    double condMeasure = 1.0;
    bool anyPassthrough = false;
    bool overflow = false;
    std::uint64_t count = 1;

    for (size_t r = 0; r < t.n_rows(); ++r) {
        for (size_t c = 0; c < t.n_cols(); ++c) {
            const ColumnRule& rule = mech.scheme.columns[c];
            const double colWidth = t.domains[c].length();
            h0 += std::log(colWidth);

            bool passthrough = r < mech.passthrough_rows || rule.kind == RuleKind::Passthrough;
            if (passthrough) {
                anyPassthrough = true;
                condMeasure = 0.0;
            } else if (rule.kind == RuleKind::Bins) {
                condMeasure *= rule.bin_of(t.rows[r][c]).length();
                d0 += std::log(rule.min_bin_width());
                size_t bins = rule.breakpoints.size() - 1;
                istar += std::log(static_cast<double>(bins));
                if (count > std::numeric_limits<std::uint64_t>::max() / bins) overflow = true;
                else count *= bins;
            } else {
                condMeasure *= colWidth;
                d0 += std::log(colWidth);
            }
        }
    }

    rep.h0 = ExtReal(h0);
    rep.cond_measure = condMeasure;
    if (anyPassthrough) {
        rep.d0 = ExtReal::neg_inf();
        rep.l0 = ExtReal::pos_inf();
        rep.i_star_unbounded = true;
        rep.i_star = ExtReal::pos_inf();
        rep.i_star_count = 0;
    } else {
        rep.d0 = ExtReal(d0);
        rep.l0 = ext_sub(rep.h0, rep.d0);
        rep.i_star_unbounded = false;
        rep.i_star = ExtReal(istar);
        rep.i_star_count = overflow ? 0 : count;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// CSV: header row of column names, numeric body.
// ---------------------------------------------------------------------------

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

inline Table read_table_csv(std::istream& in, std::vector<Interval> domains) {
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw InputError("csv: missing header row");
    t.columns = split_csv_line(line);
    t.domains = std::move(domains);
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != t.columns.size())
            throw InputError("csv: wrong field count on line " + std::to_string(lineno));
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) {
            try {
                size_t used = 0;
                row.push_back(std::stod(f, &used));
                if (used != f.size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw InputError("csv: bad numeric value '" + f + "' on line " + std::to_string(lineno));
            }
        }
        t.rows.push_back(std::move(row));
    }
    t.validate();
    return t;
}

inline Table read_table_csv_file(const std::string& path, std::vector<Interval> domains) {
    std::ifstream in(path);
    if (!in) throw InputError("csv: cannot open '" + path + "'");
    return read_table_csv(in, std::move(domains));
}

inline void write_released_csv(std::ostream& out, const ReleasedTable& rt) {
    for (size_t c = 0; c < rt.columns.size(); ++c)
        out << (c ? "," : "") << rt.columns[c];
    out << "\n";
    for (const auto& row : rt.rows) {
        for (size_t c = 0; c < row.size(); ++c)
            out << (c ? "," : "") << row[c].label();
        out << "\n";
    }
}

} // namespace nsinfo
