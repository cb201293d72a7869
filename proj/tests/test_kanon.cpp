#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "nsinfo/infotheory.hpp"
#include "nsinfo/kanon.hpp"

using namespace nsinfo;
using Catch::Approx;

namespace {

Table one_column(std::vector<double> values, Interval domain) {
    Table t;
    t.columns = {"v"};
    t.domains = {domain};
    for (double v : values) t.rows.push_back({v});
    return t;
}

GeneralizationScheme bins_0_5_10() {
    ColumnRule r;
    r.kind = RuleKind::Bins;
    r.breakpoints = {0.0, 5.0, 10.0};
    return GeneralizationScheme{{r}};
}

GeneralizationScheme suppress_all(size_t cols) {
    GeneralizationScheme s;
    s.columns.assign(cols, ColumnRule{RuleKind::Suppress, {}});
    return s;
}

} // namespace

TEST_CASE("generalization labels") {
    Table t = one_column({1.0, 2.0, 3.0, 9.0}, Interval(0.0, 10.0));
    auto released = anonymize(t, bins_0_5_10());
    CHECK(released.rows[0][0].label() == "[0,5)");
    CHECK(released.rows[1][0].label() == "[0,5)");
    CHECK(released.rows[2][0].label() == "[0,5)");
    CHECK(released.rows[3][0].label() == "[5,10)");
    // top of the range falls into the last bin
    Table top = one_column({10.0}, Interval(0.0, 10.0));
    CHECK(anonymize(top, bins_0_5_10()).rows[0][0].label() == "[5,10)");
}

TEST_CASE("suppression yields full anonymity") {
    Table t = one_column({1.0, 4.0, 9.0, 2.0, 7.0}, Interval(0.0, 10.0));
    auto released = anonymize(t, suppress_all(1));
    auto kv = verify_k(released, 3);
    CHECK(kv.is_k_anon);
    CHECK(kv.k_achieved == 5);
}

TEST_CASE("k verification counts tuple multiplicities") {
    Table t = one_column({1.0, 2.0, 3.0, 6.0, 7.0, 8.0}, Interval(0.0, 10.0));
    auto released = anonymize(t, bins_0_5_10());
    auto kv = verify_k(released, 3);
    CHECK(kv.k_achieved == 3);
    CHECK(kv.is_k_anon);

    // all rows distinct after a passthrough release
    GeneralizationScheme pass;
    pass.columns = {ColumnRule{RuleKind::Passthrough, {}}};
    auto kv2 = verify_k(anonymize(t, pass), 2);
    CHECK(kv2.k_achieved == 1);
    CHECK_FALSE(kv2.is_k_anon);
}

TEST_CASE("entries outside the declared domain are rejected") {
    Table t = one_column({11.0}, Interval(0.0, 10.0));
    CHECK_THROWS_AS(anonymize(t, bins_0_5_10()), InputError);
}

TEST_CASE("homogeneous-prefix release: k-anonymous yet fully leaking") {
    // three identical leading rows are passed through verbatim, the rest
    // are generalized into one bin: the release is 3-anonymous while the
    // conditional range collapses to measure zero
    Table t = one_column({7.0, 7.0, 7.0, 1.0, 2.0, 3.0}, Interval(0.0, 10.0));
    Mechanism mech{bins_0_5_10(), 3};

    auto released = apply_mechanism(t, mech);
    auto kv = verify_k(released, 3);
    CHECK(kv.is_k_anon);
    CHECK(kv.k_achieved == 3);

    auto rep = analyze_release(t, mech, 3);
    CHECK(rep.is_k_anon);
    CHECK(rep.cond_measure == 0.0);
    CHECK(rep.d0.is_neg_inf());
    CHECK(rep.l0.is_pos_inf());
    CHECK(rep.i_star_unbounded);
}

TEST_CASE("all-suppressed release leaks nothing") {
    Table t = one_column({1.0, 4.0, 9.0}, Interval(0.0, 10.0));
    auto rep = analyze_release(t, Mechanism{suppress_all(1), 0}, 2);
    CHECK(rep.cond_measure == Approx(1000.0)); // 10^3: full box
    CHECK(rep.l0.v == Approx(0.0).margin(1e-12));
    CHECK_FALSE(rep.i_star_unbounded);
    CHECK(rep.i_star_count == 1);
}

TEST_CASE("bins-only single-entry table") {
    Table t = one_column({2.5}, Interval(0.0, 10.0));
    auto rep = analyze_release(t, Mechanism{bins_0_5_10(), 0}, 1);
    CHECK(rep.cond_measure == Approx(5.0));
    CHECK(rep.l0.v == Approx(std::log(2.0)).margin(1e-12));
    CHECK(rep.i_star_count == 2);
    CHECK(rep.i_star.v == Approx(std::log(2.0)).margin(1e-12));
}

TEST_CASE("coarsening bins never shrinks the conditional range") {
    Table t = one_column({2.5, 6.0}, Interval(0.0, 10.0));
    ColumnRule fine{RuleKind::Bins, {0.0, 2.0, 4.0, 6.0, 8.0, 10.0}};
    ColumnRule coarse{RuleKind::Bins, {0.0, 4.0, 10.0}};
    auto repF = analyze_release(t, Mechanism{GeneralizationScheme{{fine}}, 0}, 1);
    auto repC = analyze_release(t, Mechanism{GeneralizationScheme{{coarse}}, 0}, 1);
    CHECK(repC.cond_measure >= repF.cond_measure - 1e-12);
    CHECK(repC.l0.v <= repF.l0.v + 1e-12);
}

TEST_CASE("bins-only analysis agrees with the general conditional family") {
    // 1x2 table: the release mechanism factors into a product of bins, so
    // the general machinery over the 2-D entry box must agree entrywise
    Table t;
    t.columns = {"a", "b"};
    t.domains = {Interval(0.0, 10.0), Interval(0.0, 4.0)};
    t.rows = {{2.5, 3.0}};
    ColumnRule ra{RuleKind::Bins, {0.0, 5.0, 10.0}};
    ColumnRule rb{RuleKind::Bins, {0.0, 2.0, 4.0}};
    Mechanism mech{GeneralizationScheme{{ra, rb}}, 0};
    auto rep = analyze_release(t, mech, 1);

    BoxUnion dom(2);
    dom.push_box(Box{{0.0, 10.0}, {0.0, 4.0}});
    DomainSpec X(2, dom);
    std::vector<PolicyPiece> pieces;
    int v = 0;
    for (double a0 : {0.0, 5.0})
        for (double b0 : {0.0, 2.0}) {
            PolicyPiece p;
            p.cell = BoxUnion::single(Box{{a0, a0 + 5.0}, {b0, b0 + 2.0}});
            p.value = v++;
            pieces.push_back(std::move(p));
        }
    auto fam = conditional_family(PiecewiseConstantPolicy::explicit_cells(std::move(pieces)), X);
    CHECK(disarray_d0(fam).nominal().v == Approx(rep.d0.v).margin(1e-12));
    CHECK(leakage_L0(X, fam).nominal().v == Approx(rep.l0.v).margin(1e-12));
    CHECK(maximin_istar(fam).count == rep.i_star_count);
}

TEST_CASE("csv round trip") {
    std::istringstream in("a,b\n1.5,2\n3,4.25\n");
    Table t = read_table_csv(in, {Interval(0.0, 10.0), Interval(0.0, 10.0)});
    REQUIRE(t.n_rows() == 2);
    CHECK(t.columns == std::vector<std::string>{"a", "b"});
    CHECK(t.rows[1][1] == Approx(4.25));

    std::ostringstream out;
    write_released_csv(out, anonymize(t, suppress_all(2)));
    CHECK(out.str() == "a,b\n*,*\n*,*\n");

    std::istringstream bad("a\nnot-a-number\n");
    CHECK_THROWS_AS(read_table_csv(bad, {Interval(0.0, 1.0)}), InputError);

    std::istringstream ragged("a,b\n1\n");
    CHECK_THROWS_AS(read_table_csv(ragged, {Interval(0.0, 1.0), Interval(0.0, 1.0)}), InputError);
}
