#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "kflow/balance.hpp"
#include "test_support.hpp"

using namespace kflow;

namespace {

struct ScRow {
    std::string sc;
    std::int64_t first, second, printed;
};

std::vector<ScRow> load_rows(const std::string &file, std::vector<std::string> header,
                             std::size_t first_col) {
    auto in = io::open_input(test::fixture(file));
    std::vector<ScRow> rows;
    text::read_csv(in, header, [&](const std::vector<std::string> &f, std::size_t) {
        rows.push_back({f[0], std::stoll(f[first_col]), std::stoll(f[first_col + 1]),
                        std::stoll(f[first_col + 2])});
    });
    return rows;
}

CountMatrix two_by_two(std::int64_t xy, std::int64_t yx, std::string sc) {
    CountMatrix m(2, std::move(sc));
    m(0, 1) = xy;
    m(1, 0) = yx;
    return m;
}

} // namespace

TEST(Rbkf, LatiumRowFromPublishedAggregates) {
    RBKFEntry<> e{RegionId{0}, std::nullopt, 61876, 55862};
    EXPECT_EQ(e.rbkf(), 6014);
    EXPECT_TRUE(e.surplus());
}

TEST(Rbkf, SymmetricMatrixIsBalanced) {
    CountMatrix m(3);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 3; ++c)
            m(r, c) = static_cast<std::int64_t>(r + c + 1);
    for (const auto &e : rbkf_overall(m))
        EXPECT_EQ(e.rbkf(), 0);
}

TEST(Rbkf, TwoRegionExample) {
    CountMatrix m(2);
    m(0, 1) = 5;
    m(1, 0) = 2;
    const auto e = rbkf_overall(m);
    EXPECT_EQ(e[0].rbkf(), 3);
    EXPECT_EQ(e[1].rbkf(), -3);
    EXPECT_EQ(e[0].generated, 5);
    EXPECT_EQ(e[0].earned, 2);
}

TEST(Rbkf, DiagonalIsIgnored) {
    CountMatrix m(2);
    m(0, 0) = 1000;
    m(0, 1) = 1;
    const auto e = rbkf_overall(m);
    EXPECT_EQ(e[0].generated, 1);
    EXPECT_EQ(e[0].earned, 0);
    EXPECT_EQ(e[1].earned, 1);
}

TEST(Rbkf, SumsToZeroOnRandomMatrices) {
    std::mt19937_64 rng{5};
    std::uniform_int_distribution<std::int64_t> v(0, 5000);
    for (int t = 0; t < 200; ++t) {
        CountMatrix m(20);
        for (std::size_t r = 0; r < 20; ++r)
            for (std::size_t c = 0; c < 20; ++c)
                m(r, c) = v(rng);
        std::int64_t sum = 0;
        for (const auto &e : rbkf_overall(m))
            sum += e.rbkf();
        ASSERT_EQ(sum, 0);
    }
}

TEST(Rbkf, TuscanyBiomedicalTable) {
    const auto rows = load_rows("tuscany_biomedical.csv", {"sc", "a", "b", "rbkf"}, 1);
    ASSERT_EQ(rows.size(), 14u);
    // One per-SC matrix with Tuscany (0) against an aggregated rest of the country (1).
    std::map<std::string, CountMatrix> by_sc;
    SCMap scmap;
    std::vector<std::string> scs;
    for (const auto &r : rows) {
        by_sc.emplace(r.sc, two_by_two(r.first, r.second, r.sc));
        scmap.add(r.sc, "Biomedical Research");
        scs.push_back(r.sc);
    }
    scmap.add("Absent SC", "Biomedical Research");
    scs.push_back("Absent SC");

    const auto entries = rbkf_by_sc(by_sc, RegionId{0}, scs, scmap);
    std::int64_t a = 0, b = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(entries[i].rbkf(), rows[i].printed) << rows[i].sc;
        a += entries[i].generated;
        b += entries[i].earned;
        if (rows[i].sc == "Virology") {
            EXPECT_EQ(entries[i].rbkf(), 0);
        }
    }
    EXPECT_EQ(a, 9421);
    EXPECT_EQ(b, 8492);
    EXPECT_EQ(entries.back().rbkf(), 0);
    EXPECT_FALSE(entries.back().surplus());

    const auto areas = rbkf_area_totals(std::span<const RBKFEntry<>>(entries), scmap);
    ASSERT_EQ(areas.size(), 1u);
    EXPECT_EQ(areas.at("Biomedical Research").rbkf(), 929);

    const std::vector<std::string> bogus{"Nope"};
    EXPECT_THROW(rbkf_by_sc(by_sc, RegionId{0}, bogus, scmap), ConfigError);
}

TEST(Rbkf, ScSummedNeedNotBeZero) {
    std::map<std::string, CountMatrix> by_sc;
    by_sc.emplace("X", two_by_two(3, 1, "X"));
    by_sc.emplace("Y", two_by_two(3, 0, "Y"));
    const auto summed = rbkf_sc_summed(by_sc, 2);
    EXPECT_EQ(summed[0].generated, 6);
    EXPECT_EQ(summed[0].earned, 1);
    EXPECT_EQ(summed[0].rbkf() + summed[1].rbkf(), 0); // per-matrix zero sums still add to zero
}

namespace {

void check_pairwise_fixture(const std::vector<ScRow> &rows) {
    std::map<std::string, CountMatrix> by_sc;
    for (const auto &r : rows) {
        CountMatrix m(3, r.sc);
        m(0, 2) = r.first; // x = 0, y = 2; region 1 adds noise that must be ignored
        m(2, 0) = r.second;
        m(1, 0) = 11;
        m(0, 1) = 13;
        by_sc.emplace(r.sc, m);
    }
    const auto out = rbkf_pairwise(by_sc, RegionId{0}, RegionId{2});
    ASSERT_EQ(out.size(), rows.size());
    std::map<std::string, std::int64_t> printed;
    for (const auto &r : rows)
        printed[r.sc] = r.printed;
    for (std::size_t i = 0; i < out.size(); ++i) {
        EXPECT_EQ(out[i].balance(), printed.at(out[i].sc)) << out[i].sc;
        if (i) {
            EXPECT_LE(out[i - 1].balance(), out[i].balance());
        }
    }
    // Antisymmetry
    const auto flipped = rbkf_pairwise(by_sc, RegionId{2}, RegionId{0});
    std::map<std::string, std::int64_t> back;
    for (const auto &p : flipped)
        back[p.sc] = p.balance();
    for (const auto &p : out)
        EXPECT_EQ(back.at(p.sc), -p.balance());
}

} // namespace

TEST(Pairwise, LatiumVersusPiedmont) {
    const auto rows = load_rows("latium_piedmont.csv", {"sc", "x_to_y", "y_to_x", "balance"}, 1);
    ASSERT_FALSE(rows.empty());
    EXPECT_EQ(rows.front().sc, "Geosciences, multidisciplinary");
    EXPECT_EQ(rows.front().printed, -38);
    check_pairwise_fixture(rows);
}

TEST(Pairwise, LombardyVersusEmiliaRomagna) {
    const auto rows = load_rows("lombardy_emilia.csv",
                                {"sc", "area", "x_to_y", "y_to_x", "balance"}, 2);
    bool found = false;
    for (const auto &r : rows)
        if (r.sc == "Physics, particles & fields") {
            found = true;
            EXPECT_EQ(r.first, 496);
            EXPECT_EQ(r.second, 64);
            EXPECT_EQ(r.printed, 432);
        }
    EXPECT_TRUE(found);
    check_pairwise_fixture(rows);
}

TEST(Pairwise, SameRegionRejected) {
    std::map<std::string, CountMatrix> by_sc;
    EXPECT_THROW(rbkf_pairwise(by_sc, RegionId{1}, RegionId{1}), ConfigError);
}

TEST(MaxFlow, SolidWhenImportAndExportPartnerCoincide) {
    CountMatrix m(3);
    m(0, 1) = 10;
    m(1, 0) = 8;
    m(0, 2) = 1;
    m(2, 0) = 1;
    const auto res = max_flow_edges(m);
    ASSERT_FALSE(res.edges.empty());
    EXPECT_EQ(res.edges[0].region_a, RegionId{0});
    EXPECT_EQ(res.edges[0].region_b, RegionId{1});
    EXPECT_EQ(res.edges[0].style, EdgeStyle::Solid);
}

TEST(MaxFlow, DottedWhenPartnersDiffer) {
    CountMatrix m(3);
    m(0, 1) = 10; // A exports most to B
    m(2, 0) = 9;  // A imports most from C
    const auto res = max_flow_edges(m);
    std::vector<MaxFlowEdge> for_a;
    for (const auto &e : res.edges)
        if (e.top_export == RegionId{1} && e.top_import == RegionId{2})
            for_a.push_back(e);
    ASSERT_EQ(for_a.size(), 2u);
    EXPECT_EQ(for_a[0].style, EdgeStyle::Dotted);
    EXPECT_EQ(for_a[0].region_a, RegionId{0});
    EXPECT_EQ(for_a[0].region_b, RegionId{1});
    EXPECT_EQ(for_a[1].region_a, RegionId{2});
    EXPECT_EQ(for_a[1].region_b, RegionId{0});
}

TEST(MaxFlow, HubAndSpoke) {
    CountMatrix m(5);
    for (std::size_t k = 1; k < 5; ++k) {
        m(0, k) = static_cast<std::int64_t>(10 + k);
        m(k, 0) = static_cast<std::int64_t>(20 + k);
    }
    const auto res = max_flow_edges(m);
    for (const auto &e : res.edges) {
        if (e.region_a == RegionId{0} || e.region_b == RegionId{0})
            continue;
        ADD_FAILURE() << "spoke-to-spoke edge";
    }
    // Every spoke trades only with the hub: one solid edge each.
    std::size_t solid = 0;
    for (const auto &e : res.edges)
        solid += e.style == EdgeStyle::Solid;
    EXPECT_EQ(solid, 5u);
    EXPECT_TRUE(res.omitted.empty());
}

TEST(MaxFlow, TiesGoToLowestIdAndAreFlagged) {
    CountMatrix m(3);
    m(0, 1) = 4;
    m(0, 2) = 4;
    m(1, 0) = 4;
    m(2, 0) = 4;
    const auto res = max_flow_edges(m);
    EXPECT_EQ(res.edges[0].region_b, RegionId{1});
    EXPECT_TRUE(res.edges[0].tied);
}

TEST(MaxFlow, ScalingInvarianceAndOmittedRegions) {
    std::mt19937_64 rng{17};
    std::uniform_int_distribution<std::int64_t> v(0, 50);
    for (int t = 0; t < 100; ++t) {
        CountMatrix m(6);
        for (std::size_t r = 0; r < 5; ++r) // region 5 never trades
            for (std::size_t c = 0; c < 5; ++c)
                m(r, c) = v(rng);
        const auto a = max_flow_edges(m);
        const auto b = max_flow_edges(m.scaled(1000));
        ASSERT_EQ(a.edges, b.edges);
        ASSERT_EQ(a.omitted, b.omitted);
        ASSERT_FALSE(a.omitted.empty());
        ASSERT_EQ(a.omitted.back(), RegionId{5});
    }
}

TEST(MaxFlow, DotOutputCollapsesMutualSolidPairs) {
    const auto gz = test::letter_gazetteer(2);
    CountMatrix m(2);
    m(0, 1) = 3;
    m(1, 0) = 2;
    std::ostringstream out;
    io::write_edges_dot(out, gz, max_flow_edges(m));
    EXPECT_EQ(out.str(), "digraph max_flows {\n  \"A\";\n  \"B\";\n"
                         "  \"A\" -> \"B\" [style=solid, dir=none];\n}\n");
}

TEST(Spearman, PerfectAndReversed) {
    const std::vector<double> x{1, 2, 3, 4, 5};
    const std::vector<double> up{2, 4, 6, 8, 100};
    const std::vector<double> down{5, 4, 3, 2, 1};
    EXPECT_DOUBLE_EQ(*spearman(x, up), 1.0);
    EXPECT_DOUBLE_EQ(*spearman(x, down), -1.0);
}

TEST(Spearman, AverageRanksForTies) {
    const std::vector<double> v{10, 20, 20, 30};
    EXPECT_EQ(average_ranks(v), (std::vector<double>{1, 2.5, 2.5, 4}));
    // Hand computation: ranks x = 1..4, y = 1, 2.5, 2.5, 4 -> rho = 4.5 / sqrt(5 * 4.5).
    const std::vector<double> x{1, 2, 3, 4};
    EXPECT_NEAR(*spearman(x, v), 4.5 / std::sqrt(5.0 * 4.5), 1e-12);
}

TEST(Spearman, InvariantUnderMonotoneTransforms) {
    std::mt19937_64 rng{8};
    std::normal_distribution<double> d;
    for (int t = 0; t < 50; ++t) {
        std::vector<double> x(20), y(20), tx(20);
        for (std::size_t i = 0; i < 20; ++i) {
            x[i] = d(rng);
            y[i] = x[i] + d(rng);
            tx[i] = std::exp(3 * x[i]) + 7;
        }
        ASSERT_DOUBLE_EQ(*spearman(x, y), *spearman(tx, y));
    }
}

TEST(Spearman, UndefinedAndBadInput) {
    const std::vector<double> flat{3, 3, 3};
    const std::vector<double> x{1, 2, 3};
    EXPECT_FALSE(spearman(flat, x).has_value());
    const std::vector<double> one{1};
    EXPECT_THROW(spearman(one, one), std::invalid_argument);
    const std::vector<double> two{1, 2};
    EXPECT_THROW(spearman(x, two), std::invalid_argument);
}

TEST(RbkfExport, Format) {
    const auto gz = test::letter_gazetteer(2);
    CountMatrix m(2);
    m(0, 1) = 5;
    m(1, 0) = 2;
    const auto e = rbkf_overall(m);
    std::ostringstream out;
    io::write_rbkf(out, gz, std::span<const RBKFEntry<>>(e));
    EXPECT_EQ(out.str(), "region,sc,a,b,rbkf\nA,ALL,5,2,+3\nB,ALL,2,5,-3\n");
}
