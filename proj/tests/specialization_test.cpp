#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "kflow/specialization.hpp"
#include "test_support.hpp"

using namespace kflow;

namespace {

GainTensor tensor(std::vector<std::vector<std::int64_t>> rows,
                  Orientation o = Orientation::Generated) {
    std::vector<std::string> scs;
    for (std::size_t j = 0; j < rows.at(0).size(); ++j)
        scs.push_back("SC" + std::to_string(j));
    GainTensor g(rows.size(), scs, o);
    for (std::size_t k = 0; k < rows.size(); ++k)
        for (std::size_t j = 0; j < rows[k].size(); ++j)
            g(k, j) = rows[k][j];
    return g;
}

} // namespace

TEST(SpecIndex, FixedPointsOfTheTransform) {
    EXPECT_DOUBLE_EQ(spec_index_from_ratio(1.0), 0.0);
    EXPECT_DOUBLE_EQ(spec_index_from_ratio(0.0), -100.0);
    EXPECT_DOUBLE_EQ(spec_index_from_ratio(std::numeric_limits<double>::infinity()), 100.0);
    EXPECT_TRUE(std::isnan(spec_index_from_ratio(std::nan(""))));
}

TEST(SpecIndex, ClosedFormMatchesTanhOfLog) {
    for (double e = -6; e <= 6; e += 0.01) {
        const double r = std::pow(10.0, e);
        ASSERT_NEAR(spec_index_from_ratio(r), 100.0 * std::tanh(std::log(r)), 1e-12) << r;
        ASSERT_NEAR(spec_index_from_ratio(r), -spec_index_from_ratio(1.0 / r), 1e-12);
    }
}

TEST(SpecIndex, TwoByTwoHandComputation) {
    // Region 0 in SC0: focal share 4/1, reference share 1/4, R = 16.
    const auto g = tensor({{4, 1}, {1, 4}});
    const auto r = balassa_ratio(g, 0, 0);
    ASSERT_EQ(r.state, BalassaRatio::State::Finite);
    EXPECT_DOUBLE_EQ(r.value(), 16.0);
    EXPECT_NEAR(*spec_index(g, 0, 0), 100.0 * 255.0 / 257.0, 1e-12);
    EXPECT_NEAR(*spec_index(g, 0, 1), -100.0 * 255.0 / 257.0, 1e-12);
}

TEST(SpecIndex, IncludeFocalUsesFullSums) {
    // Full sums: (4/5) / (5/10) = 1.6
    const auto g = tensor({{4, 1}, {1, 4}});
    EXPECT_DOUBLE_EQ(balassa_ratio(g, 0, 0, BalassaMode::IncludeFocal).value(), 1.6);
    EXPECT_NEAR(*spec_index(g, 0, 0, BalassaMode::IncludeFocal),
                100.0 * std::tanh(std::log(1.6)), 1e-12);
}

TEST(SpecIndex, ZeroAndInfiniteRatios) {
    const auto g = tensor({{0, 5}, {3, 3}});
    EXPECT_DOUBLE_EQ(*spec_index(g, 0, 0), -100.0);
    const auto h = tensor({{5, 0}, {3, 3}});
    EXPECT_EQ(balassa_ratio(h, 0, 0).state, BalassaRatio::State::Infinite);
    EXPECT_DOUBLE_EQ(*spec_index(h, 0, 0), 100.0);
}

TEST(SpecIndex, SingleRegionIsUndefined) {
    const auto g = tensor({{3, 4, 5}});
    for (std::size_t j = 0; j < 3; ++j)
        EXPECT_FALSE(spec_index(g, 0, j).has_value());
    EXPECT_FALSE(field_extremes(g, "SC1").has_value());
}

TEST(SpecIndex, UniformTensorGivesZeroEverywhere) {
    const auto g = tensor({{7, 7, 7}, {7, 7, 7}, {7, 7, 7}});
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t j = 0; j < 3; ++j)
            EXPECT_DOUBLE_EQ(*spec_index(g, k, j), 0.0);
    const auto top = top_specializations(g, 1, 2);
    ASSERT_EQ(top.size(), 2u);
    EXPECT_EQ(top[0].sc, "SC0");
    EXPECT_EQ(top[1].sc, "SC1");
    const auto ext = field_extremes(g, "SC2");
    ASSERT_TRUE(ext);
    EXPECT_EQ(ext->max_region, RegionId{0});
    EXPECT_TRUE(ext->max_tied);
    EXPECT_TRUE(ext->min_tied);
}

TEST(SpecIndex, PlantedSpecializationRanksFirst) {
    std::vector<std::vector<std::int64_t>> rows(4, std::vector<std::int64_t>(6, 20));
    rows[2][4] = 400;
    const auto g = tensor(rows);
    const auto top = top_specializations(g, 2, 3);
    ASSERT_EQ(top.size(), 3u);
    EXPECT_EQ(top[0].sc, "SC4");
    EXPECT_GT(top[0].value, 90.0);
    for (std::size_t i = 1; i < top.size(); ++i)
        EXPECT_GE(top[i - 1].value, top[i].value);
    const auto ext = field_extremes(g, "SC4");
    EXPECT_EQ(ext->max_region, RegionId{2});
    EXPECT_FALSE(ext->max_tied);
    EXPECT_THROW(top_specializations(g, 2, 0), ConfigError);
    EXPECT_THROW(field_extremes(g, "missing"), ConfigError);
    EXPECT_THROW(spec_index(g, 9, 0), ConfigError);
}

TEST(SpecIndex, RandomTensorsRangeScaleAndSymmetry) {
    std::mt19937_64 rng{31};
    std::uniform_int_distribution<std::int64_t> v(0, 300);
    for (int t = 0; t < 300; ++t) {
        GainTensor g(5, {"a", "b", "c", "d"});
        for (std::size_t k = 0; k < 5; ++k)
            for (std::size_t j = 0; j < 4; ++j)
                g(k, j) = v(rng);
        const auto big = g.scaled(7);
        for (auto mode : {BalassaMode::ExcludeFocal, BalassaMode::IncludeFocal})
            for (std::size_t k = 0; k < 5; ++k)
                for (std::size_t j = 0; j < 4; ++j) {
                    const auto r = balassa_ratio(g, k, j, mode);
                    const auto s = spec_index(r);
                    const auto scaled = spec_index(big, k, j, mode);
                    ASSERT_EQ(s.has_value(), scaled.has_value());
                    if (!s)
                        continue;
                    ASSERT_GE(*s, -100.0);
                    ASSERT_LE(*s, 100.0);
                    ASSERT_EQ(*s, *scaled);
                    if (r.state == BalassaRatio::State::Finite && r.focal_share > 0) {
                        const BalassaRatio swapped{r.state, r.reference_share, r.focal_share};
                        ASSERT_EQ(*spec_index(swapped), -*s);
                        ASSERT_NEAR(*s, spec_index_from_ratio(r.value()), 1e-9);
                    }
                }
    }
}

TEST(SpecIndex, OrientationDoesNotChangeTheArithmetic) {
    const auto kosi = tensor({{9, 2, 4}, {1, 6, 3}, {2, 2, 8}}, Orientation::Generated);
    const auto kisi = tensor({{9, 2, 4}, {1, 6, 3}, {2, 2, 8}}, Orientation::Earned);
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t j = 0; j < 3; ++j)
            EXPECT_EQ(spec_index(kosi, k, j), spec_index(kisi, k, j));
}

TEST(GainTensorBuild, WorkedExample) {
    const auto c = test::worked_corpus();
    const auto gains = compute_gains(c, attribute_corpus(c)).gains;
    const auto gen = build_gain_tensor(gains, c, Orientation::Generated);
    const auto earned = build_gain_tensor(gains, c, Orientation::Earned);
    const auto extra = build_gain_tensor(gains, c, Orientation::Generated, GainScope::ExtraOnly);
    const auto tuscany = c.gazetteer().require("Tuscany").value;
    const auto &cited = c.publication(*c.find("000209048200010"));
    for (const auto &sc : cited.sc_codes) {
        const auto j = gen.require_sc(sc);
        EXPECT_EQ(gen(tuscany, j), 20);
        EXPECT_EQ(extra(tuscany, j), 16);
        EXPECT_EQ(earned(tuscany, j), 4);
        std::int64_t column = 0;
        for (std::size_t k = 0; k < earned.regions(); ++k)
            column += earned(k, j);
        EXPECT_EQ(column, 20);
    }
}

TEST(IndexExport, Format) {
    const auto gz = test::letter_gazetteer(2);
    const auto g = tensor({{4, 1}, {1, 4}});
    std::ostringstream out;
    io::write_index_table(out, gz, g, BalassaMode::ExcludeFocal);
    EXPECT_EQ(out.str(), "region,sc,orientation,mode,value\n"
                         "A,SC0,generated,exclude_focal,99.2218\n"
                         "A,SC1,generated,exclude_focal,-99.2218\n"
                         "B,SC0,generated,exclude_focal,-99.2218\n"
                         "B,SC1,generated,exclude_focal,99.2218\n");
}
