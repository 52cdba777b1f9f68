#include <algorithm>

#include <gtest/gtest.h>

#include "kflow/synthkit.hpp"
#include "test_support.hpp"

using namespace kflow;
using synth::GeneratorConfig;

namespace {

GeneratorConfig clean(double locality, std::size_t regions = 5) {
    GeneratorConfig cfg;
    cfg.n_regions = regions;
    cfg.n_pubs = 800;
    cfg.locality = locality;
    cfg.cross_region_prob = 0;
    cfg.foreign_author_prob = 0;
    cfg.multi_affiliation_prob = 0;
    cfg.unlinked_prob = 0;
    cfg.unresolved_prob = 0;
    return cfg;
}

double intra_share(const GeneratorConfig &cfg) {
    const auto c = synth::generate_corpus(cfg).corpus();
    const auto gains = compute_gains(c, attribute_corpus(c)).gains;
    if (gains.empty())
        return 0;
    const auto intra = std::count_if(gains.begin(), gains.end(), [](const Gain &g) { return g.intra; });
    return static_cast<double>(intra) / static_cast<double>(gains.size());
}

std::string serialize(const synth::SyntheticCorpus &s) {
    std::ostringstream out;
    io::write_publications(out, s.publications);
    synth::io::write_raw_citations(out, s);
    synth::io::write_gazetteer(out, s);
    synth::io::write_scmap(out, s);
    out << synth::io::to_json(s.truth).dump();
    return out.str();
}

} // namespace

TEST(Synth, SameSeedSameBytes) {
    GeneratorConfig cfg;
    cfg.seed = 77;
    EXPECT_EQ(serialize(synth::generate_corpus(cfg)), serialize(synth::generate_corpus(cfg)));
    GeneratorConfig other = cfg;
    other.seed = 78;
    EXPECT_NE(serialize(synth::generate_corpus(cfg)), serialize(synth::generate_corpus(other)));
}

TEST(Synth, ConfigValidation) {
    GeneratorConfig cfg;
    cfg.locality = 1.5;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.n_regions = 1;
    EXPECT_THROW(synth::generate_corpus(cfg), ConfigError);
    cfg = {};
    cfg.authors_per_pub = {0, 0};
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Synth, FullLocalityMakesEveryGainIntra) {
    EXPECT_DOUBLE_EQ(intra_share(clean(1.0)), 1.0);
}

TEST(Synth, ZeroLocalityMakesNoGainIntra) {
    EXPECT_DOUBLE_EQ(intra_share(clean(0.0, 2)), 0.0);
}

TEST(Synth, IntraShareGrowsWithLocality) {
    double last = -1;
    for (double loc : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const double s = intra_share(clean(loc));
        EXPECT_GT(s, last) << "locality " << loc;
        last = s;
    }
}

TEST(Synth, GroundTruthMatchesEngine) {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        GeneratorConfig cfg;
        cfg.seed = seed;
        cfg.n_pubs = 600;
        cfg.unlinked_prob = 0.1;
        cfg.unresolved_prob = 0.1;
        const auto s = synth::generate_corpus(cfg);
        const auto c = s.corpus();
        const auto made = attribute_corpus(c);
        ASSERT_EQ(made.size(), s.truth.pubs.size());
        for (PubIndex i = 0; i < c.size(); ++i) {
            const auto &t = s.truth.pubs[i];
            ASSERT_EQ(c.publication(i).id, t.id);
            const char *kind = made[i].kind == MadeIn::Kind::Single ? "Single"
                               : made[i].kind == MadeIn::Kind::Dual ? "Dual"
                                                                    : "Excluded";
            ASSERT_EQ(kind, t.classification) << t.id;
            std::vector<std::string> regions;
            for (auto r : made[i].regions())
                regions.push_back(c.gazetteer().name(r));
            ASSERT_EQ(regions, t.regions) << t.id;
            if (!made[i].attributed()) {
                ASSERT_EQ(to_string(made[i].reason), t.reason) << t.id;
            }
        }
        auto truth = s.truth.gains;
        std::sort(truth.begin(), truth.end());
        ASSERT_EQ(synth::as_tuples(c, compute_gains(c, made).gains), truth);
    }
}

TEST(Synth, OracleAgreesWithEngine) {
    for (std::uint64_t seed : {10u, 20u, 30u}) {
        GeneratorConfig cfg;
        cfg.seed = seed;
        cfg.n_pubs = 500;
        cfg.multi_affiliation_prob = 0.4;
        const auto c = synth::generate_corpus(cfg).corpus();
        const auto made = attribute_corpus(c);
        const auto flows = compute_gains(c, made);
        auto engine = flows.gains;
        auto oracle = synth::brute_force_gains(c);
        std::sort(engine.begin(), engine.end());
        std::sort(oracle.begin(), oracle.end());
        ASSERT_EQ(engine, oracle);

        const auto summary = region_summary(c, made, flows);
        const auto expected = synth::brute_force_region_summary(c);
        for (std::size_t r = 0; r < summary.size(); ++r) {
            const auto &row = summary[r];
            const std::array<std::int64_t, 6> got{row.total_pubs, row.made_in_pubs, row.cited_made_in,
                                                  row.benefits,   row.gains,        row.intra_gains};
            ASSERT_EQ(got, expected[r]) << "region " << r;
        }
    }
}

TEST(Synth, GroundTruthJsonRoundTrip) {
    const auto s = synth::generate_corpus(GeneratorConfig{});
    const auto back = synth::io::ground_truth_from_json(synth::io::to_json(s.truth));
    EXPECT_EQ(back.gains, s.truth.gains);
    ASSERT_EQ(back.pubs.size(), s.truth.pubs.size());
    EXPECT_EQ(back.pubs[3].regions, s.truth.pubs[3].regions);
}
