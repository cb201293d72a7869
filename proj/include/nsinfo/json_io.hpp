#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nsinfo/errors.hpp"
#include "nsinfo/ext_real.hpp"
#include "nsinfo/infotheory.hpp"
#include "nsinfo/kanon.hpp"
#include "nsinfo/policy.hpp"
#include "nsinfo/synthesis.hpp"

namespace nsinfo {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Scalar encodings. JSON has no infinities: extended reals serialize as
// number | "+inf" | "-inf"; the transmission marker as "degenerate".
// ---------------------------------------------------------------------------

inline json ext_to_json(ExtReal x) {
    if (x.is_pos_inf()) return "+inf";
    if (x.is_neg_inf()) return "-inf";
    return x.v;
}

inline ExtReal ext_from_json(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "+inf" || s == "inf") return ExtReal::pos_inf();
        if (s == "-inf") return ExtReal::neg_inf();
        throw InputError("expected number, \"+inf\" or \"-inf\", got \"" + s + "\"");
    }
    if (!j.is_number()) throw InputError("expected an extended real");
    return ExtReal(j.get<double>());
}

inline json num_to_json(double x) { return ext_to_json(ExtReal(x)); }

inline void put_ext_interval(json& obj, const std::string& name, const ExtInterval& iv) {
    obj[name] = ext_to_json(iv.nominal());
    obj[name + "_lo"] = ext_to_json(iv.lo);
    obj[name + "_hi"] = ext_to_json(iv.hi);
}

inline void put_cert_interval(json& obj, const std::string& name, const CertInterval& iv) {
    obj[name] = num_to_json(iv.mid());
    obj[name + "_lo"] = num_to_json(iv.lo);
    obj[name + "_hi"] = num_to_json(iv.hi);
}

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

inline json box_union_to_json(const BoxUnion& u) {
    json boxes = json::array();
    for (size_t i = 0; i < u.size(); ++i) {
        json box = json::array();
        for (const auto& s : u.box(i)) box.push_back({s.lo, s.hi});
        boxes.push_back(std::move(box));
    }
    return boxes;
}

inline Interval interval_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw InputError("interval must be a [lo, hi] pair");
    double lo = j[0].get<double>(), hi = j[1].get<double>();
    if (!(lo <= hi)) throw InputError("interval: lo > hi");
    return Interval(lo, hi);
}

inline BoxUnion box_union_from_json(const json& j, int dim) {
    if (!j.is_array()) throw InputError("box list must be an array");
    BoxUnion u(dim);
    for (const auto& jb : j) {
        if (!jb.is_array() || static_cast<int>(jb.size()) != dim)
            throw InputError("each box must list one [lo, hi] pair per dimension");
        std::vector<Interval> sides;
        sides.reserve(static_cast<size_t>(dim));
        for (const auto& js : jb) sides.push_back(interval_from_json(js));
        u.push_box(sides);
    }
    return u;
}

// ---------------------------------------------------------------------------
// Policies
// ---------------------------------------------------------------------------

inline json policy_to_json(const PiecewiseConstantPolicy& p) {
    json j;
    switch (p.form) {
    case PiecewiseConstantPolicy::Form::LevelSet: j["form"] = "level_set"; break;
    case PiecewiseConstantPolicy::Form::Explicit: j["form"] = "explicit"; break;
    case PiecewiseConstantPolicy::Form::Hybrid: j["form"] = "hybrid"; break;
    }
    if (p.has_level_set_rule()) {
        j["query"] = p.query->text();
        j["breakpoints"] = p.breakpoints;
        j["values"] = p.values;
    }
    if (!p.pieces.empty()) {
        json pieces = json::array();
        for (const auto& piece : p.pieces) {
            json jp;
            jp["boxes"] = box_union_to_json(piece.cell);
            if (piece.raw) jp["query"] = piece.raw->text();
            else jp["value"] = piece.value;
            pieces.push_back(std::move(jp));
        }
        j["pieces"] = std::move(pieces);
    }
    return j;
}

inline PiecewiseConstantPolicy policy_from_json(const json& j, int dim) {
    if (!j.is_object() || !j.contains("form")) throw InputError("policy: missing \"form\"");
    const std::string form = j["form"].get<std::string>();

    auto parse_rule = [&](PiecewiseConstantPolicy& p) {
        p.query = parse_query(j.at("query").get<std::string>(), dim);
        p.breakpoints = j.at("breakpoints").get<std::vector<double>>();
        p.values = j.at("values").get<std::vector<double>>();
        if (p.breakpoints.size() != p.values.size() + 1)
            throw InputError("policy: breakpoints must be one longer than values");
        if (!std::is_sorted(p.breakpoints.begin(), p.breakpoints.end()))
            throw InputError("policy: breakpoints must be nondecreasing");
    };

    if (form == "level_set") {
        PiecewiseConstantPolicy p;
        parse_rule(p);
        return PiecewiseConstantPolicy::level_set(*p.query, p.breakpoints, p.values);
    }
    if (form == "explicit" || form == "hybrid") {
        if (!j.contains("pieces")) throw InputError("policy: missing \"pieces\"");
        std::vector<PolicyPiece> pieces;
        for (const auto& jp : j.at("pieces")) {
            PolicyPiece piece;
            piece.cell = box_union_from_json(jp.at("boxes"), dim);
            if (jp.contains("query")) piece.raw = parse_query(jp["query"].get<std::string>(), dim);
            else piece.value = jp.at("value").get<double>();
            pieces.push_back(std::move(piece));
        }
        auto p = PiecewiseConstantPolicy::explicit_cells(std::move(pieces));
        if (j.contains("query") && j.contains("breakpoints")) {
            PiecewiseConstantPolicy rule;
            parse_rule(rule);
            p.query = rule.query;
            p.breakpoints = rule.breakpoints;
            p.values = rule.values;
        }
        return p;
    }
    throw InputError("policy: unknown form \"" + form + "\"");
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline json info_report_to_json(const InfoReport& r) {
    json j;
    j["h0"] = ext_to_json(r.h0);
    put_ext_interval(j, "h0_cond", r.h0_cond);
    put_ext_interval(j, "i0", r.i0);
    put_ext_interval(j, "d0", r.d0);
    put_ext_interval(j, "l0", r.l0);
    j["t0"] = r.t0.degenerate ? json("degenerate") : ext_to_json(r.t0.value);
    j["i_star"] = ext_to_json(r.taxicab.i_star());
    j["i_star_unbounded"] = r.taxicab.unbounded;
    if (!r.taxicab.unbounded) j["i_star_count"] = r.taxicab.count;
    return j;
}

inline json policy_report_to_json(const PolicyReport& r) {
    json j;
    j["policy"] = policy_to_json(r.policy);
    j["q"] = r.q;
    j["info"] = info_report_to_json(r.info);
    if (r.quality) put_cert_interval(j, "quality_Q", *r.quality);
    put_cert_interval(j, "d_min", r.estimator.d_min);
    put_cert_interval(j, "d_max", r.estimator.d_max);
    j["realized_d_min"] = num_to_json(r.estimator.realized_d_min);
    j["realized_d_max"] = num_to_json(r.estimator.realized_d_max);
    j["fano_dmin_bound"] = num_to_json(r.fano_dmin);
    j["fano_dmax_bound"] = num_to_json(r.fano_dmax);
    j["feasible"] = r.feasible;
    j["warning_nonoptimal"] = r.warning_nonoptimal;
    if (r.gamma) j["gamma"] = *r.gamma;
    if (!r.notes.empty()) j["notes"] = r.notes;
    return j;
}

inline json kanon_report_to_json(const KAnonReport& r) {
    json j;
    j["k_requested"] = r.k_requested;
    j["k_achieved"] = r.k_achieved;
    j["is_k_anon"] = r.is_k_anon;
    j["h0"] = ext_to_json(r.h0);
    j["cond_measure"] = r.cond_measure;
    j["d0"] = ext_to_json(r.d0);
    j["l0"] = ext_to_json(r.l0);
    j["i_star"] = ext_to_json(r.i_star);
    j["i_star_unbounded"] = r.i_star_unbounded;
    if (!r.i_star_unbounded) j["i_star_count"] = r.i_star_count;
    return j;
}

// ---------------------------------------------------------------------------
// ProblemSpec: the JSON input consumed by every CLI command.
// ---------------------------------------------------------------------------

struct ProblemSpec {
    int dim = 0;
    std::optional<DomainSpec> domain;
    std::optional<Query> query;
    std::optional<double> gamma;
    PrivacyMetric metric = PrivacyMetric::P2;
    Tolerances tol;
    std::optional<PiecewiseConstantPolicy> policy;

    struct KanonSpec {
        std::string csv_path;
        std::vector<Interval> column_domains;
        GeneralizationScheme scheme;
        size_t passthrough_rows = 0;
        size_t k = 1;
    };
    std::optional<KanonSpec> kanon;
};

inline ProblemSpec problem_spec_from_json(const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw InputError("spec: top level must be an object");
    ProblemSpec spec;

    if (j.contains("dim")) {
        spec.dim = j["dim"].get<int>();
        if (spec.dim < 1) throw InputError("spec: dim must be >= 1");
    }
    if (j.contains("domain")) {
        if (spec.dim == 0) throw InputError("spec: domain requires dim");
        spec.domain = DomainSpec(spec.dim, box_union_from_json(j["domain"], spec.dim));
    }
    if (j.contains("query")) {
        if (spec.dim == 0) throw InputError("spec: query requires dim");
        spec.query = parse_query(j["query"].get<std::string>(), spec.dim);
    }
    if (j.contains("gamma")) {
        spec.gamma = j["gamma"].get<double>();
        if (!(*spec.gamma > 0.0)) throw InputError("spec: gamma must be positive");
    }
    if (j.contains("metric")) {
        const std::string m = j["metric"].get<std::string>();
        if (m == "P1") spec.metric = PrivacyMetric::P1;
        else if (m == "P2") spec.metric = PrivacyMetric::P2;
        else throw InputError("spec: metric must be \"P1\" or \"P2\"");
    }
    if (j.contains("tolerances")) {
        const auto& t = j["tolerances"];
        if (t.contains("eps_img")) spec.tol.eps_img = t["eps_img"].get<double>();
        if (t.contains("eps_vol")) spec.tol.eps_vol = t["eps_vol"].get<double>();
        if (t.contains("delta_a")) spec.tol.delta_a = t["delta_a"].get<double>();
        if (t.contains("max_depth")) spec.tol.max_depth = t["max_depth"].get<int>();
        if (t.contains("diam_gap")) spec.tol.diam_gap = t["diam_gap"].get<double>();
    }
    if (j.contains("policy")) {
        if (spec.dim == 0) throw InputError("spec: policy requires dim");
        spec.policy = policy_from_json(j["policy"], spec.dim);
    }
    if (j.contains("kanon")) {
        const auto& k = j["kanon"];
        ProblemSpec::KanonSpec ks;
        std::filesystem::path p = k.at("csv").get<std::string>();
        if (p.is_relative()) p = base_dir / p;
        ks.csv_path = p.string();
        for (const auto& d : k.at("column_domains")) ks.column_domains.push_back(interval_from_json(d));
        for (const auto& r : k.at("scheme")) {
            ColumnRule rule;
            const std::string kind = r.at("type").get<std::string>();
            if (kind == "passthrough") rule.kind = RuleKind::Passthrough;
            else if (kind == "suppress") rule.kind = RuleKind::Suppress;
            else if (kind == "bins") {
                rule.kind = RuleKind::Bins;
                rule.breakpoints = r.at("breakpoints").get<std::vector<double>>();
            } else {
                throw InputError("spec: scheme type must be passthrough, bins or suppress");
            }
            ks.scheme.columns.push_back(std::move(rule));
        }
        if (k.contains("passthrough_rows")) ks.passthrough_rows = k["passthrough_rows"].get<size_t>();
        if (k.contains("k")) ks.k = k["k"].get<size_t>();
        spec.kanon = std::move(ks);
    }
    return spec;
}

inline ProblemSpec load_problem_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("spec: cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError(std::string("spec: invalid JSON: ") + e.what());
    }
    return problem_spec_from_json(j, std::filesystem::path(path).parent_path());
}

} // namespace nsinfo
