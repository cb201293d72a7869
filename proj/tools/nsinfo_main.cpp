// nsinfo: analyze and synthesize deterministic privacy-preserving policies
// over set-valued uncertain data.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nsinfo/json_io.hpp"

namespace {

using namespace nsinfo;

struct CommonOpts {
    std::string spec_path;
    std::string out_path; // empty: stdout
    double eps_img = -1.0, eps_vol = -1.0, delta_a = -1.0, diam_gap = -1.0;
    int max_depth = -1;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--spec", o.spec_path, "problem spec JSON file")->required();
    cmd->add_option("--out", o.out_path, "output path (default: stdout)");
    cmd->add_option("--eps-img", o.eps_img, "image extremum tolerance override");
    cmd->add_option("--eps-vol", o.eps_vol, "preimage volume gap override");
    cmd->add_option("--delta-a", o.delta_a, "breakpoint grid resolution override");
    cmd->add_option("--max-depth", o.max_depth, "subdivision depth override");
    cmd->add_option("--diam-gap", o.diam_gap, "estimator half-diameter gap override");
}

ProblemSpec load_spec(const CommonOpts& o) {
    ProblemSpec spec = load_problem_spec(o.spec_path);
    if (o.eps_img > 0) spec.tol.eps_img = o.eps_img;
    if (o.eps_vol > 0) spec.tol.eps_vol = o.eps_vol;
    if (o.delta_a > 0) spec.tol.delta_a = o.delta_a;
    if (o.diam_gap > 0) spec.tol.diam_gap = o.diam_gap;
    if (o.max_depth > 0) spec.tol.max_depth = o.max_depth;
    return spec;
}

void write_output(const CommonOpts& o, const std::string& content) {
    if (o.out_path.empty()) {
        std::fwrite(content.data(), 1, content.size(), stdout);
        return;
    }
    std::ofstream out(o.out_path, std::ios::binary);
    if (!out) throw InputError("cannot open output file '" + o.out_path + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string fmt(double v, const char* spec = "%.12g") {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

const DomainSpec& require_domain(const ProblemSpec& spec) {
    if (!spec.domain) throw InputError("spec: a domain is required for this command");
    return *spec.domain;
}

PolicyReport make_report(const ProblemSpec& spec, bool relaxed) {
    const DomainSpec& X = require_domain(spec);
    if (spec.policy) {
        const Query* f = spec.query ? &*spec.query : nullptr;
        return analyze_policy(*spec.policy, X, f, spec.gamma, spec.tol);
    }
    if (!spec.query || !spec.gamma)
        throw InputError("spec: needs either a policy or a query plus gamma");
    SynthesisRequest req{*spec.query, X, *spec.gamma, spec.metric, spec.tol};
    return relaxed ? synthesize_relaxed(req) : synthesize_optimal(req);
}

std::string report_json(const PolicyReport& rep) {
    json j = policy_report_to_json(rep);
    j["version"] = kVersion;
    return j.dump(2) + "\n";
}

int cmd_measure(const CommonOpts& o) {
    ProblemSpec spec = load_spec(o);
    write_output(o, report_json(make_report(spec, false)));
    return 0;
}

int cmd_synthesize(const CommonOpts& o, bool relaxed) {
    ProblemSpec spec = load_spec(o);
    if (spec.policy) throw InputError("synthesize: spec already provides a policy");
    write_output(o, report_json(make_report(spec, relaxed)));
    return 0;
}

int cmd_regions(const CommonOpts& o, int grid) {
    ProblemSpec spec = load_spec(o);
    const DomainSpec& X = require_domain(spec);
    if (X.dim != 2) throw InputError("regions: domain must be 2-D");
    if (grid < 2) throw InputError("regions: grid must be >= 2");

    PolicyReport rep = make_report(spec, false);
    Box bb = X.domain.bounding_box();

    std::ostringstream os;
    os << "# nsinfo-version: " << kVersion << "\n";
    os << "x1,x2,cell,b\n";
    std::vector<double> pt(2);
    for (int i = 0; i < grid; ++i) {
        pt[0] = bb.sides[0].lo + bb.sides[0].length() * i / static_cast<double>(grid - 1);
        for (int j = 0; j < grid; ++j) {
            pt[1] = bb.sides[1].lo + bb.sides[1].length() * j / static_cast<double>(grid - 1);
            long cell = -1;
            std::string b = "nan";
            if (X.domain.contains_point(pt)) {
                PolicyCell pc = classify_point(rep.policy, X, pt);
                cell = static_cast<long>(pc.index);
                b = fmt(pc.value);
            }
            os << fmt(pt[0], "%.17g") << ',' << fmt(pt[1], "%.17g") << ',' << cell << ',' << b << "\n";
        }
    }
    write_output(o, os.str());
    return 0;
}

std::vector<double> parse_gammas(const std::string& s) {
    std::vector<double> out;
    if (s.rfind("log:", 0) == 0) {
        double lo = 0, hi = 0;
        int steps = 0;
        if (std::sscanf(s.c_str(), "log:%lf:%lf:%d", &lo, &hi, &steps) != 3 || steps < 1 ||
            !(lo > 0) || !(hi > 0))
            throw InputError("gammas: expected log:lo:hi:steps with positive bounds");
        if (steps == 1) return {lo};
        for (int k = 0; k < steps; ++k)
            out.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / (steps - 1)));
        return out;
    }
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        try {
            size_t used = 0;
            double v = std::stod(tok, &used);
            if (used != tok.size()) throw std::invalid_argument("trailing");
            out.push_back(v);
        } catch (const std::exception&) {
            throw InputError("gammas: bad value '" + tok + "'");
        }
    }
    if (out.empty()) throw InputError("gammas: empty list");
    return out;
}

int cmd_tradeoff(const CommonOpts& o, const std::string& gammas_arg) {
    ProblemSpec spec = load_spec(o);
    const DomainSpec& X = require_domain(spec);
    if (!spec.query) throw InputError("tradeoff: spec must provide a query");
    auto gammas = parse_gammas(gammas_arg);

    TradeoffTable table = tradeoff_sweep(*spec.query, X, gammas, spec.metric, spec.tol);

    std::ostringstream os;
    os << "# nsinfo-version: " << kVersion << "\n";
    os << "gamma,q,L0,Istar,dmin,dmax,Q\n";
    for (const auto& r : table.rows) {
        os << fmt(r.gamma) << ',' << r.q << ',' << fmt(r.l0.nominal().v) << ','
           << fmt(r.i_star.v) << ',' << fmt(r.d_min.mid()) << ',' << fmt(r.d_max.mid()) << ','
           << fmt(r.quality.mid()) << "\n";
    }
    os << "# istar_nondecreasing=" << (table.istar_nondecreasing ? 1 : 0)
       << " dmin_nonincreasing=" << (table.dmin_nonincreasing ? 1 : 0) << "\n";
    write_output(o, os.str());
    return 0;
}

int cmd_kanon(const CommonOpts& o) {
    ProblemSpec spec = load_spec(o);
    if (!spec.kanon) throw InputError("kanon: spec must provide a \"kanon\" section");
    const auto& ks = *spec.kanon;
    Table t = read_table_csv_file(ks.csv_path, ks.column_domains);
    Mechanism mech{ks.scheme, ks.passthrough_rows};
    KAnonReport rep = analyze_release(t, mech, ks.k);
    json j = kanon_report_to_json(rep);
    j["version"] = kVersion;
    write_output(o, j.dump(2) + "\n");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"non-stochastic information analysis and privacy policy synthesis"};
    app.require_subcommand(1);

    CommonOpts measureOpts, synthOpts, regionOpts, tradeOpts, kanonOpts;
    bool relaxed = false, optimal = false;
    int grid = 200;
    std::string gammas;

    auto* measure = app.add_subcommand("measure", "information functionals of a policy");
    add_common(measure, measureOpts);

    auto* synth = app.add_subcommand("synthesize", "synthesize an optimal policy");
    add_common(synth, synthOpts);
    auto* relFlag = synth->add_flag("--relaxed", relaxed, "solve the relaxed (quantizer) problem");
    synth->add_flag("--optimal", optimal, "solve the full problem (default)")->excludes(relFlag);

    auto* regions = app.add_subcommand("regions", "raster the policy cells on a 2-D grid");
    add_common(regions, regionOpts);
    regions->add_option("--grid", grid, "grid points per axis (default 200)");

    auto* trade = app.add_subcommand("tradeoff", "utility/privacy sweep over gamma");
    add_common(trade, tradeOpts);
    trade->add_option("--gammas", gammas, "comma list or log:lo:hi:steps")->required();

    auto* kanon = app.add_subcommand("kanon", "k-anonymity verification and leakage analysis");
    add_common(kanon, kanonOpts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (measure->parsed()) return cmd_measure(measureOpts);
        if (synth->parsed()) return cmd_synthesize(synthOpts, relaxed);
        if (regions->parsed()) return cmd_regions(regionOpts, grid);
        if (trade->parsed()) return cmd_tradeoff(tradeOpts, gammas);
        if (kanon->parsed()) return cmd_kanon(kanonOpts);
    } catch (const nsinfo::InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const nsinfo::ComputeError& e) {
        std::cerr << "computation error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
