#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "nsinfo/infotheory.hpp"
#include "test_support.hpp"

using namespace nsinfo;
using Catch::Approx;

namespace {

DomainSpec square2(double lo, double hi) {
    BoxUnion u(2);
    u.push_box(Box{{lo, hi}, {lo, hi}});
    return DomainSpec(2, u);
}

DomainSpec seg1(double lo, double hi) {
    BoxUnion u(1);
    u.push_box(Box{{lo, hi}});
    return DomainSpec(1, u);
}

// release that forwards the value below 1/2 and reports 1 otherwise
PiecewiseConstantPolicy identity_below_half() {
    PolicyPiece raw;
    raw.cell = BoxUnion::single(Interval(0.0, 0.5));
    raw.raw = parse_query("x1", 1);
    PolicyPiece constant;
    constant.cell = BoxUnion::single(Interval(0.5, 1.0));
    constant.value = 1.0;
    return PiecewiseConstantPolicy::explicit_cells({raw, constant});
}

PiecewiseConstantPolicy four_slabs() {
    return PiecewiseConstantPolicy::level_set(parse_query("(x1 + x2)/2", 2),
                                              {-2.0, -1.0, 0.0, 1.0, 2.0},
                                              {-1.5, -0.5, 0.5, 1.5});
}

// random explicit policy on a checkerboard of the square, exact cells
PiecewiseConstantPolicy random_grid_policy(std::mt19937_64& rng, int n, int valueCount) {
    std::uniform_int_distribution<int> val(0, valueCount - 1);
    std::vector<PolicyPiece> pieces;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            PolicyPiece p;
            double w = 2.0 / n;
            p.cell = BoxUnion::single(Box{{-1.0 + i * w, -1.0 + (i + 1) * w},
                                          {-1.0 + j * w, -1.0 + (j + 1) * w}});
            p.value = 0.1 * val(rng);
            pieces.push_back(std::move(p));
        }
    return PiecewiseConstantPolicy::explicit_cells(std::move(pieces));
}

} // namespace

TEST_CASE("entropy of box domains") {
    CHECK(entropy_h0(seg1(0, 1)).v == Approx(0.0).margin(1e-15));
    CHECK(entropy_h0(square2(-2, 2)).v == Approx(std::log(16.0)));
    DomainSpec degenerate(1, BoxUnion::single(Interval::point(0.5)));
    CHECK(entropy_h0(degenerate).is_neg_inf());
}

TEST_CASE("identity-piece release: all functionals") {
    DomainSpec X = seg1(0, 1);
    auto fam = conditional_family(identity_below_half(), X);

    REQUIRE(fam.has_nonconstant());
    REQUIRE(fam.cells.size() == 1);

    auto hc = conditional_entropy(fam);
    CHECK(hc.lo.v == Approx(std::log(0.5)).margin(1e-12));
    CHECK(hc.hi.v == Approx(std::log(0.5)).margin(1e-12));

    CHECK(disarray_d0(fam).lo.is_neg_inf());
    CHECK(disarray_d0(fam).hi.is_neg_inf());
    CHECK(leakage_L0(X, fam).lo.is_pos_inf());

    auto i0 = info_I0(X, fam);
    CHECK(i0.nominal().v == Approx(std::log(2.0)).margin(1e-12));

    auto tax = maximin_istar(fam);
    CHECK(tax.unbounded);
    CHECK(tax.i_star().is_pos_inf());

    auto est = estimator_metrics(fam);
    CHECK(est.d_max.lo == Approx(0.25).margin(1e-12));
    CHECK(est.d_max.hi == Approx(0.25).margin(1e-12));
    CHECK(est.d_min.lo == 0.0);
    CHECK(est.d_min.hi == 0.0);
    CHECK(est.realized_d_max == Approx(0.25).margin(1e-12));

    CHECK(fano_bound(hc.nominal(), 1) == Approx(0.25).margin(1e-12));
    CHECK(fano_bound(disarray_d0(fam).nominal(), 1) == 0.0);
}

TEST_CASE("four-slab release on the square") {
    DomainSpec X = square2(-2, 2);
    Tolerances tol;
    tol.eps_vol = 1e-3 * 16.0;
    auto fam = conditional_family(four_slabs(), X, tol);
    REQUIRE(fam.cells.size() == 4);

    // outer slabs are corner triangles of area 2, inner slabs trapezoids of
    // area 6; leakage follows from those two numbers
    auto hc = conditional_entropy(fam);
    CHECK(hc.lo.v <= std::log(6.0) + 1e-12);
    CHECK(hc.hi.v >= std::log(6.0) - 1e-12);
    CHECK(hc.hi.v - hc.lo.v < 2e-3);

    auto d0 = disarray_d0(fam);
    CHECK(d0.lo.v <= std::log(2.0) + 1e-12);
    CHECK(d0.hi.v >= std::log(2.0) - 1e-12);

    auto l0 = leakage_L0(X, fam);
    CHECK(l0.lo.v <= std::log(8.0) + 1e-12);
    CHECK(l0.hi.v >= std::log(8.0) - 1e-12);

    auto i0 = info_I0(X, fam);
    CHECK(i0.lo.v <= std::log(16.0 / 6.0) + 1e-12);
    CHECK(i0.hi.v >= std::log(16.0 / 6.0) - 1e-12);

    auto tax = maximin_istar(fam);
    CHECK_FALSE(tax.unbounded);
    CHECK(tax.count == 4);
    CHECK(tax.i_star().v == Approx(std::log(4.0)));

    auto est = estimator_metrics(fam, 1e-3);
    CHECK(est.d_min.contains(std::sqrt(2.0)));
    CHECK(est.d_max.contains(2.0 * std::sqrt(2.0)));
    CHECK(est.d_min.width() <= 2e-3);
    CHECK(est.realized_d_min >= est.d_min.lo - 1e-12);
    CHECK(est.realized_d_max >= est.d_max.lo - 1e-12);
}

TEST_CASE("single-cell release carries no information") {
    DomainSpec X = square2(0, 1);
    PolicyPiece p;
    p.cell = X.domain;
    p.value = 0.5;
    auto fam = conditional_family(PiecewiseConstantPolicy::explicit_cells({p}), X);
    CHECK(conditional_entropy(fam).nominal().v == Approx(entropy_h0(X).v));
    CHECK(disarray_d0(fam).nominal().v == Approx(entropy_h0(X).v));
    CHECK(info_I0(X, fam).nominal().v == Approx(0.0).margin(1e-12));
    CHECK(leakage_L0(X, fam).nominal().v == Approx(0.0).margin(1e-12));
    CHECK(maximin_istar(fam).count == 1);
    CHECK(maximin_istar(fam).i_star().v == Approx(0.0).margin(1e-15));
}

TEST_CASE("measure-zero cells: dropped by the ess-sup, kept by the infimum") {
    // a degenerate segment cell on the shared boundary has measure zero:
    // it cannot raise h0(X|Y) but it drives d0 to -inf and L0 to +inf
    DomainSpec X = square2(0, 1);
    PolicyPiece a, b, seam;
    a.cell = BoxUnion::single(Box{{0.0, 0.5}, {0.0, 1.0}});
    a.value = 1.0;
    b.cell = BoxUnion::single(Box{{0.5, 1.0}, {0.0, 1.0}});
    b.value = 2.0;
    seam.cell = BoxUnion::single(Box{{0.5, 0.5}, {0.0, 1.0}});
    seam.value = 3.0;
    auto fam = conditional_family(PiecewiseConstantPolicy::explicit_cells({a, b, seam}), X);

    CHECK(conditional_entropy(fam).nominal().v == Approx(std::log(0.5)).margin(1e-12));
    CHECK(disarray_d0(fam).nominal().is_neg_inf());
    CHECK(leakage_L0(X, fam).nominal().is_pos_inf());
    CHECK(maximin_istar(fam).count == 3);

    // the segment also bounds d_min from above while d_max ignores it
    auto est = estimator_metrics(fam);
    CHECK(est.d_min.hi == Approx(0.5).margin(1e-12)); // half the segment length
    CHECK(est.d_max.lo == Approx(std::sqrt(1.25) / 2.0).margin(1e-12));
}

TEST_CASE("transmission measure") {
    DomainSpec X = seg1(0, 1);
    auto fam = conditional_family(identity_below_half(), X);
    CHECK(transmission_T0(X, fam).degenerate);

    // full-dimensional unrelated pair: T0 = 0
    BoxUnion prod(2);
    prod.push_box(Box{{0.0, 1.0}, {0.0, 1.0}});
    CHECK(transmission_T0_joint(prod, 1).v == Approx(0.0).margin(1e-12));

    // diagonal blocks: marginals are full, joint holds 4 of 16 blocks
    BoxUnion blocks(2);
    for (int k = 0; k < 4; ++k)
        blocks.push_box(Box{{k * 0.25, (k + 1) * 0.25}, {k * 0.25, (k + 1) * 0.25}});
    CHECK(transmission_T0_joint(blocks, 1).v == Approx(std::log(4.0)).margin(1e-12));
}

TEST_CASE("cells sharing a report value form one taxicab class") {
    DomainSpec X = square2(0, 1);
    PolicyPiece a, b;
    a.cell = BoxUnion::single(Box{{0.0, 0.4}, {0.0, 1.0}});
    a.value = 7.0;
    b.cell = BoxUnion::single(Box{{0.4, 1.0}, {0.0, 1.0}});
    b.value = 7.0;
    auto tax = maximin_istar(PiecewiseConstantPolicy::explicit_cells({a, b}), X);
    CHECK(tax.count == 1);
    CHECK(tax.i_star().v == Approx(0.0).margin(1e-15));
}

TEST_CASE("taxicab oracle on explicit joints") {
    // graph of a 4-value quantizer: thin boxes at distinct heights
    BoxUnion graph(2);
    for (int i = 0; i < 4; ++i)
        graph.push_box(Box{{i * 1.0, i * 1.0 + 1.0}, {0.1 * i - 0.001, 0.1 * i + 0.001}});
    CHECK(taxicab_grid_oracle(graph) == 4);

    BoxUnion one(2);
    one.push_box(Box{{0.0, 1.0}, {0.0, 1.0}});
    CHECK(taxicab_grid_oracle(one) == 1);

    // shared x-slab links two boxes regardless of their y separation
    BoxUnion shared(2);
    shared.push_box(Box{{0.0, 1.0}, {0.0, 1.0}});
    shared.push_box(Box{{0.5, 1.5}, {5.0, 6.0}});
    CHECK(taxicab_grid_oracle(shared) == 1);

    CHECK_THROWS_AS(taxicab_grid_oracle(BoxUnion(3)), InputError);
}

TEST_CASE("maximin count equals the grid oracle on thickened policy graphs") {
    std::mt19937_64 rng(404);
    std::uniform_int_distribution<int> bins(2, 8), values(1, 5);
    DomainSpec X = seg1(0, 1);
    for (int trial = 0; trial < 50; ++trial) {
        int q = bins(rng);
        std::vector<double> bp{0.0};
        for (int i = 1; i < q; ++i) bp.push_back(static_cast<double>(i) / q);
        bp.push_back(1.0);
        std::vector<double> vals;
        for (int i = 0; i < q; ++i) vals.push_back(0.1 * values(rng));
        auto policy = PiecewiseConstantPolicy::level_set(parse_query("x1", 1), bp, vals);
        auto tax = maximin_istar(policy, X);

        BoxUnion graph(2);
        const double thick = 0.004; // below half the value grid spacing
        for (int i = 0; i < q; ++i)
            graph.push_box(Box{{bp[static_cast<size_t>(i)], bp[static_cast<size_t>(i) + 1]},
                               {vals[static_cast<size_t>(i)] - thick, vals[static_cast<size_t>(i)] + thick}});
        REQUIRE_FALSE(tax.unbounded);
        CHECK(static_cast<int>(tax.count) == taxicab_grid_oracle(graph));

        // |F(X,Y)| = |F(Y,X)|: transposing the joint preserves the count
        BoxUnion transposed(2);
        for (size_t i = 0; i < graph.size(); ++i) {
            auto b = graph.box(i);
            transposed.push_box(Box{b[1], b[0]});
        }
        CHECK(taxicab_grid_oracle(graph) == taxicab_grid_oracle(transposed));
    }
}

TEST_CASE("fano bound closed forms") {
    CHECK(fano_bound(ExtReal(std::log(0.5)), 1) == Approx(0.25).margin(1e-12));
    CHECK(fano_bound(ExtReal::neg_inf(), 1) == 0.0);
    // disk of radius r in the plane: bound equals r
    for (double r : {0.5, 1.0, 3.0})
        CHECK(fano_bound(ExtReal(std::log(std::numbers::pi * r * r)), 2) == Approx(r).margin(1e-12));
}

TEST_CASE("estimator metrics of a cube cell") {
    BoxUnion cube(3);
    cube.push_box(Box{{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}});
    DomainSpec X(3, cube);
    PolicyPiece p;
    p.cell = cube;
    p.value = 0.0;
    auto fam = conditional_family(PiecewiseConstantPolicy::explicit_cells({p}), X);
    auto est = estimator_metrics(fam);
    CHECK(est.d_min.lo == Approx(std::sqrt(3.0) / 2.0));
    CHECK(est.d_max.hi == Approx(std::sqrt(3.0) / 2.0));

    ConditionalFamily empty;
    CHECK_THROWS_AS(estimator_metrics(empty), InputError);
}

TEST_CASE("leakage dominates information on random releases") {
    std::mt19937_64 rng(1234);
    DomainSpec X = square2(-1, 1);
    std::uniform_int_distribution<int> n(1, 4), k(1, 6);
    for (int trial = 0; trial < 100; ++trial) {
        auto fam = conditional_family(random_grid_policy(rng, n(rng), k(rng)), X);
        auto l0 = leakage_L0(X, fam);
        auto i0 = info_I0(X, fam);
        CHECK(l0.nominal().v >= i0.nominal().v - 1e-9);
    }
}

TEST_CASE("fano bounds sit below the certified estimator metrics") {
    std::mt19937_64 rng(777);
    DomainSpec X = square2(-1, 1);
    std::uniform_int_distribution<int> n(1, 4), k(1, 6);
    for (int trial = 0; trial < 100; ++trial) {
        auto fam = conditional_family(random_grid_policy(rng, n(rng), k(rng)), X);
        auto est = estimator_metrics(fam);
        CHECK(fano_bound(disarray_d0(fam).nominal(), 2) <= est.d_min.lo + 1e-9);
        CHECK(fano_bound(conditional_entropy(fam).nominal(), 2) <= est.d_max.lo + 1e-9);
    }
}

TEST_CASE("post-processing can only reduce leakage and maximin information") {
    std::mt19937_64 rng(31337);
    DomainSpec X = square2(-1, 1);
    std::uniform_int_distribution<int> n(2, 4), k(2, 6);
    for (int trial = 0; trial < 100; ++trial) {
        auto policy = random_grid_policy(rng, n(rng), k(rng));
        auto fam = conditional_family(policy, X);

        // g merges adjacent report values pairwise: a deterministic map of
        // the released value only
        auto merged = policy;
        for (auto& piece : merged.pieces) {
            long bucket = std::lround(piece.value / 0.1);
            piece.value = 0.1 * static_cast<double>(bucket / 2);
        }
        auto famG = conditional_family(merged, X);

        CHECK(leakage_L0(X, famG).nominal().v <= leakage_L0(X, fam).nominal().v + 1e-9);
        CHECK(maximin_istar(famG).count <= maximin_istar(fam).count);
    }
}

TEST_CASE("certified enclosures are ordered and tighten under refinement") {
    DomainSpec X = square2(-2, 2);
    auto policy = four_slabs();
    double lastWidth = std::numeric_limits<double>::infinity();
    for (double eps : {0.1, 0.05, 0.025}) {
        Tolerances tol;
        tol.eps_vol = eps * 16.0;
        auto fam = conditional_family(policy, X, tol);
        auto hc = conditional_entropy(fam);
        auto d0 = disarray_d0(fam);
        CHECK(hc.lo.v <= hc.hi.v);
        CHECK(d0.lo.v <= d0.hi.v);
        double width = hc.hi.v - hc.lo.v;
        CHECK(width <= lastWidth + 1e-12);
        lastWidth = width;
    }
}
