#ifndef KFLOW_SYNTHKIT_HPP
#define KFLOW_SYNTHKIT_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "kflow/corpus.hpp"
#include "kflow/flows.hpp"

namespace kflow::synth {

/// Synthetic corpus parameters. The generator is std::mt19937_64 driven
/// through the helpers below only, so output is identical on every platform.
struct GeneratorConfig {
    std::size_t n_regions = 5;
    std::size_t n_pubs = 500;
    std::vector<double> authors_per_pub{0.15, 0.25, 0.25, 0.2, 0.15}; // P(1), P(2), ...
    double multi_affiliation_prob = 0.15;
    double foreign_author_prob = 0.1;
    double cross_region_prob = 0.3; // an affiliation lies outside the pub's home region
    double unlinked_prob = 0.02;    // a multi-authored pub loses one author's links
    double unresolved_prob = 0.02;  // a domestic address the gazetteer cannot place
    std::size_t n_scs = 10;
    std::size_t max_scs_per_pub = 2;
    double citation_density = 3.0;
    double locality = 0.5;
    double region_skew = 1.3; // region weight ∝ (rank + 1)^-skew
    std::uint64_t seed = 1;

    void validate() const {
        auto prob = [](double p, const char *name) {
            if (!(p >= 0.0 && p <= 1.0))
                throw ConfigError(std::string{name} + " must lie in [0, 1]");
        };
        prob(multi_affiliation_prob, "multi_affiliation_prob");
        prob(foreign_author_prob, "foreign_author_prob");
        prob(cross_region_prob, "cross_region_prob");
        prob(unlinked_prob, "unlinked_prob");
        prob(unresolved_prob, "unresolved_prob");
        prob(locality, "locality");
        if (n_regions < 2)
            throw ConfigError("n_regions must be >= 2");
        if (n_pubs == 0 || n_scs == 0 || max_scs_per_pub == 0)
            throw ConfigError("n_pubs, n_scs and max_scs_per_pub must be positive");
        if (authors_per_pub.empty() ||
            std::any_of(authors_per_pub.begin(), authors_per_pub.end(),
                        [](double w) { return !(w >= 0.0); }) ||
            std::accumulate(authors_per_pub.begin(), authors_per_pub.end(), 0.0) <= 0.0)
            throw ConfigError("authors_per_pub must be non-negative weights with positive sum");
        if (!(citation_density >= 0.0) || !(region_skew >= 0.0))
            throw ConfigError("citation_density and region_skew must be non-negative");
    }
};

/// What the generator intended: each pub's made-in classification and each
/// edge's gain tuples, by id and region name.
struct GroundTruth {
    struct Pub {
        std::string id;
        std::string classification; // Single | Dual | Excluded
        std::vector<std::string> regions;
        std::string reason;
    };
    struct GainTuple {
        std::string cited;
        std::string citing;
        std::string producing;
        std::string citing_region;
        bool intra;
        auto operator<=>(const GainTuple &) const = default;
    };
    std::vector<Pub> pubs;
    std::vector<GainTuple> gains;
};

struct SyntheticCorpus {
    std::vector<Publication> publications;
    std::vector<Corpus::RawEdge> edges;
    std::vector<Gazetteer::Entry> gazetteer_entries;
    std::vector<std::string> region_names;
    std::vector<std::pair<std::string, std::string>> scmap_rows;
    GroundTruth truth;

    Gazetteer gazetteer() const { return Gazetteer{gazetteer_entries, region_names}; }

    SCMap scmap() const {
        SCMap m;
        for (const auto &[sc, area] : scmap_rows)
            m.add(sc, area);
        return m;
    }

    Corpus corpus() const { return Corpus{publications, edges, gazetteer(), scmap()}; }
};

namespace detail {

class Random {
public:
    explicit Random(std::uint64_t seed) : engine_{seed} {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    bool chance(double p) { return uniform() < p; }

    /// Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
    std::size_t below(std::size_t n) {
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return static_cast<std::size_t>(x % bound);
    }

    std::size_t weighted(const std::vector<double> &cumulative) {
        const double u = uniform() * cumulative.back();
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                                     cumulative.size() - 1);
    }

private:
    std::mt19937_64 engine_;
};

inline std::vector<double> cumulative(const std::vector<double> &w) {
    std::vector<double> c(w.size());
    std::partial_sum(w.begin(), w.end(), c.begin());
    return c;
}

inline std::string padded(const char *prefix, std::size_t i, int width = 2) {
    std::string n = std::to_string(i);
    if (static_cast<int>(n.size()) < width)
        n.insert(0, static_cast<std::size_t>(width) - n.size(), '0');
    return std::string{prefix} + n;
}

inline constexpr const char *foreign_countries[] = {"FR", "DE", "US", "CN"};
inline constexpr long kUnresolved = -100;

// Location codes: >= 0 domestic region, -1..-4 foreign country, kUnresolved.
struct PlannedPub {
    std::vector<long> address_location;
    std::vector<std::vector<std::size_t>> author_refs;
    bool unlinked = false;
    std::vector<long> made_in;      // planted made-in regions
    std::string reason;             // when excluded
    std::set<long> domestic_regions; // citing-side regions
};

// Made-in from planted locations, in half-author units (every author holds
// two units, split 2 or 1+1 over their affiliations).
inline void plant_made_in(PlannedPub &p) {
    if (p.unlinked) {
        p.reason = "UnlinkedAuthors";
        return;
    }
    std::map<long, long> units;
    long total = 0, foreign = 0;
    for (const auto &refs : p.author_refs) {
        const long each = refs.size() == 1 ? 2 : 1;
        for (auto ref : refs) {
            const long loc = p.address_location[ref];
            total += each;
            if (loc >= 0)
                units[loc] += each;
            else if (loc != kUnresolved)
                foreign += each;
        }
    }
    if (2 * foreign > total) {
        p.reason = "ForeignMajority";
        return;
    }
    std::vector<long> winners;
    for (const auto &[loc, u] : units)
        if (2 * u >= total)
            winners.push_back(loc);
    if (winners.size() == 1 ||
        (winners.size() == 2 && 2 * units[winners[0]] == total && 2 * units[winners[1]] == total))
        p.made_in = winners;
    else
        p.reason = "NoMajorityRegion";
}

} // namespace detail

inline SyntheticCorpus generate_corpus(const GeneratorConfig &config) {
    config.validate();
    detail::Random rng{config.seed};
    SyntheticCorpus out;

    std::vector<double> region_weight(config.n_regions);
    for (std::size_t r = 0; r < config.n_regions; ++r) {
        region_weight[r] = std::pow(static_cast<double>(r + 1), -config.region_skew);
        out.region_names.push_back(detail::padded("Region ", r));
    }
    const auto region_cdf = detail::cumulative(region_weight);
    const auto author_cdf = detail::cumulative(config.authors_per_pub);

    for (std::size_t r = 0; r < config.n_regions; ++r) {
        const auto &name = out.region_names[r];
        out.gazetteer_entries.push_back({Gazetteer::Kind::Zip, detail::padded("9", r, 3) + "00", "", name});
        out.gazetteer_entries.push_back({Gazetteer::Kind::City, detail::padded("City ", r), detail::padded("P", r), name});
        out.gazetteer_entries.push_back({Gazetteer::Kind::Province, detail::padded("P", r), "", name});
    }
    std::vector<std::string> scs;
    const std::size_t n_areas = std::max<std::size_t>(1, (config.n_scs + 2) / 3);
    for (std::size_t j = 0; j < config.n_scs; ++j) {
        scs.push_back(detail::padded("SC ", j));
        out.scmap_rows.emplace_back(scs.back(), detail::padded("Area ", j % n_areas));
    }

    std::vector<detail::PlannedPub> planned(config.n_pubs);
    for (std::size_t i = 0; i < config.n_pubs; ++i) {
        auto &plan = planned[i];
        const long home = static_cast<long>(rng.weighted(region_cdf));
        const std::size_t n_authors = rng.weighted(author_cdf) + 1;

        std::map<std::pair<long, std::size_t>, std::size_t> address_of;
        auto pick_location = [&]() -> long {
            if (rng.chance(config.foreign_author_prob))
                return -1 - static_cast<long>(rng.below(std::size(detail::foreign_countries)));
            if (rng.chance(config.unresolved_prob))
                return detail::kUnresolved;
            if (rng.chance(config.cross_region_prob))
                return static_cast<long>(rng.weighted(region_cdf));
            return home;
        };
        for (std::size_t a = 0; a < n_authors; ++a) {
            const std::size_t affiliations = rng.chance(config.multi_affiliation_prob) ? 2 : 1;
            std::vector<std::size_t> refs;
            for (std::size_t slot = 0; slot < affiliations; ++slot) {
                const auto key = std::make_pair(pick_location(), slot);
                auto [it, inserted] = address_of.emplace(key, plan.address_location.size());
                if (inserted)
                    plan.address_location.push_back(key.first);
                refs.push_back(it->second);
            }
            plan.author_refs.push_back(std::move(refs));
        }
        if (n_authors > 1 && rng.chance(config.unlinked_prob))
            plan.unlinked = true;
        detail::plant_made_in(plan);
        for (long loc : plan.address_location)
            if (loc >= 0)
                plan.domestic_regions.insert(loc);

        Publication pub;
        pub.id = detail::padded("SYN", i, 6);
        pub.year = 2010 + static_cast<int>(rng.below(3));
        for (std::size_t k = 0; k < plan.address_location.size(); ++k) {
            const long loc = plan.address_location[k];
            Address addr;
            addr.institution = "Institute " + std::to_string(k);
            if (loc == detail::kUnresolved) {
                addr.city = "Nowhere";
                addr.province = "XX";
                addr.country = "IT";
            } else if (loc < 0) {
                addr.city = "Abroad";
                addr.country = detail::foreign_countries[-1 - loc];
            } else {
                const auto r = static_cast<std::size_t>(loc);
                addr.country = "IT";
                switch (rng.below(3)) {
                case 0:
                    addr.zip = "I-" + detail::padded("9", r, 3) + "00";
                    break;
                case 1:
                    addr.city = detail::padded("CITY ", r);
                    addr.province = detail::padded("p", r);
                    break;
                default:
                    addr.province = detail::padded("P", r);
                    break;
                }
            }
            pub.addresses.push_back(std::move(addr));
        }
        for (std::size_t a = 0; a < plan.author_refs.size(); ++a)
            pub.authors.push_back({"Author " + std::to_string(a), plan.author_refs[a]});
        if (plan.unlinked)
            pub.authors[rng.below(pub.authors.size())].address_refs.clear();

        const std::size_t n_sc = 1 + rng.below(std::min(config.max_scs_per_pub, config.n_scs));
        std::set<std::size_t> chosen;
        while (chosen.size() < n_sc)
            chosen.insert(rng.below(config.n_scs));
        for (auto j : chosen)
            pub.sc_codes.push_back(scs[j]);

        GroundTruth::Pub truth{pub.id, "Excluded", {}, plan.reason};
        if (plan.made_in.size() == 1)
            truth.classification = "Single";
        else if (plan.made_in.size() == 2)
            truth.classification = "Dual";
        for (long r : plan.made_in)
            truth.regions.push_back(out.region_names[static_cast<std::size_t>(r)]);
        out.truth.pubs.push_back(std::move(truth));
        out.publications.push_back(std::move(pub));
    }

    auto overlaps = [](const std::vector<long> &made_in, const std::set<long> &regions) {
        return std::any_of(made_in.begin(), made_in.end(),
                           [&](long r) { return regions.count(r) > 0; });
    };
    std::set<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t citing = 0; citing < config.n_pubs; ++citing) {
        const auto &regions = planned[citing].domestic_regions;
        const auto refs = static_cast<std::size_t>(
            std::floor(rng.uniform() * (2.0 * config.citation_density + 1.0)));
        for (std::size_t n = 0; n < refs; ++n) {
            const bool local = rng.chance(config.locality);
            for (int attempt = 0; attempt < 64; ++attempt) {
                const auto cited = rng.below(config.n_pubs);
                if (cited == citing)
                    continue;
                if (!regions.empty() && overlaps(planned[cited].made_in, regions) != local)
                    continue;
                edges.emplace(cited, citing);
                break;
            }
        }
    }
    for (const auto &[cited, citing] : edges) {
        out.edges.emplace_back(out.publications[citing].id, out.publications[cited].id);
        for (long p : planned[cited].made_in)
            for (long c : planned[citing].domestic_regions)
                out.truth.gains.push_back({out.publications[cited].id,
                                           out.publications[citing].id,
                                           out.region_names[static_cast<std::size_t>(p)],
                                           out.region_names[static_cast<std::size_t>(c)], p == c});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Brute-force oracle. Deliberately shares no code with attribution or flows.

/// Made-in regions by literal enumeration with integer weights over the lcm
/// of all affiliation multiplicities. Empty when the publication is excluded.
inline std::vector<RegionId> brute_force_made_in(const Publication &pub, const Gazetteer &gz) {
    const bool multi = pub.authors.size() > 1;
    std::int64_t lcm = 1;
    for (const auto &a : pub.authors) {
        if (a.address_refs.empty() && multi)
            return {};
        const std::int64_t m = a.address_refs.empty()
                                   ? static_cast<std::int64_t>(pub.addresses.size())
                                   : static_cast<std::int64_t>(a.address_refs.size());
        lcm = std::lcm(lcm, m);
    }
    std::map<std::uint32_t, std::int64_t> regional;
    std::int64_t foreign = 0;
    const std::int64_t total = lcm * static_cast<std::int64_t>(pub.authors.size());
    for (const auto &a : pub.authors) {
        std::vector<std::size_t> refs = a.address_refs;
        if (refs.empty())
            for (std::size_t k = 0; k < pub.addresses.size(); ++k)
                refs.push_back(k);
        for (auto ref : refs) {
            const auto res = gz.resolve(pub.addresses[ref]);
            const std::int64_t w = lcm / static_cast<std::int64_t>(refs.size());
            if (res.kind == Resolution::Kind::Foreign)
                foreign += w;
            else if (res.kind == Resolution::Kind::Domestic)
                regional[res.region.value] += w;
        }
    }
    if (2 * foreign > total)
        return {};
    std::vector<RegionId> hit;
    for (const auto &[r, w] : regional)
        if (2 * w >= total)
            hit.push_back(RegionId{r});
    if (hit.size() == 1)
        return hit;
    if (hit.size() == 2 && 2 * regional[hit[0].value] == total && 2 * regional[hit[1].value] == total)
        return hit;
    return {};
}

inline std::vector<Gain> brute_force_gains(const Corpus &corpus) {
    const auto &gz = corpus.gazetteer();
    std::vector<Gain> out;
    for (const auto &edge : corpus.edges()) {
        const auto producers = brute_force_made_in(corpus.publication(edge.cited), gz);
        std::set<std::uint32_t> citers;
        for (const auto &addr : corpus.publication(edge.citing).addresses) {
            const auto res = gz.resolve(addr);
            if (res.kind == Resolution::Kind::Domestic)
                citers.insert(res.region.value);
        }
        for (RegionId p : producers)
            for (std::uint32_t c : citers)
                out.push_back({edge.cited, edge.citing, p, RegionId{c}, p.value == c,
                               producers.size() == 2});
    }
    return out;
}

/// Per-region (total pubs, made-in pubs, cited made-in, benefits, gains,
/// intra gains), straight from the oracle's own made-in and gain lists.
inline std::vector<std::array<std::int64_t, 6>> brute_force_region_summary(const Corpus &corpus) {
    const auto &gz = corpus.gazetteer();
    std::vector<std::array<std::int64_t, 6>> rows(gz.region_count(), {0, 0, 0, 0, 0, 0});
    std::vector<std::vector<RegionId>> made(corpus.size());
    for (PubIndex i = 0; i < corpus.size(); ++i) {
        made[i] = brute_force_made_in(corpus.publication(i), gz);
        std::set<std::uint32_t> present;
        for (const auto &addr : corpus.publication(i).addresses)
            if (auto res = gz.resolve(addr); res.kind == Resolution::Kind::Domestic)
                present.insert(res.region.value);
        for (auto r : present)
            ++rows[r][0];
        for (auto r : made[i])
            ++rows[r.value][1];
    }
    const auto gains = brute_force_gains(corpus);
    std::set<std::pair<PubIndex, PubIndex>> benefits;
    std::set<PubIndex> cited;
    for (const auto &g : gains) {
        benefits.emplace(g.cited, g.citing);
        cited.insert(g.cited);
        ++rows[g.producing_region.value][4];
        rows[g.producing_region.value][5] += g.intra;
    }
    for (const auto &[cd, ct] : benefits)
        for (auto r : made[cd])
            ++rows[r.value][3];
    for (auto c : cited)
        for (auto r : made[c])
            ++rows[r.value][2];
    return rows;
}

/// Gains expressed as ground-truth tuples (ids and region names), sorted.
inline std::vector<GroundTruth::GainTuple> as_tuples(const Corpus &corpus,
                                                     std::span<const Gain> gains) {
    std::vector<GroundTruth::GainTuple> out;
    out.reserve(gains.size());
    for (const auto &g : gains)
        out.push_back({corpus.publication(g.cited).id, corpus.publication(g.citing).id,
                       corpus.gazetteer().name(g.producing_region),
                       corpus.gazetteer().name(g.citing_region), g.intra});
    std::sort(out.begin(), out.end());
    return out;
}

namespace io {

inline nlohmann::json to_json(const GroundTruth &truth) {
    nlohmann::json j;
    auto &pubs = j["publications"] = nlohmann::json::array();
    for (const auto &p : truth.pubs)
        pubs.push_back({{"id", p.id},
                        {"classification", p.classification},
                        {"regions", p.regions},
                        {"reason", p.reason}});
    auto &gains = j["gains"] = nlohmann::json::array();
    for (const auto &g : truth.gains)
        gains.push_back({g.cited, g.citing, g.producing, g.citing_region, g.intra});
    return j;
}

inline GroundTruth ground_truth_from_json(const nlohmann::json &j) {
    GroundTruth t;
    for (const auto &p : j.at("publications"))
        t.pubs.push_back({p.at("id"), p.at("classification"),
                          p.at("regions").get<std::vector<std::string>>(), p.at("reason")});
    for (const auto &g : j.at("gains"))
        t.gains.push_back({g.at(0), g.at(1), g.at(2), g.at(3), g.at(4).get<bool>()});
    return t;
}

inline void write_gazetteer(std::ostream &out, const SyntheticCorpus &s) {
    out << "kind,key1,key2,region\n";
    for (const auto &name : s.region_names)
        out << text::csv_join({"region", "", "", name}) << '\n';
    for (const auto &e : s.gazetteer_entries) {
        const char *kind = e.kind == Gazetteer::Kind::Zip    ? "zip"
                           : e.kind == Gazetteer::Kind::City ? "city"
                                                             : "province";
        out << text::csv_join({kind, e.key1, e.key2, e.region}) << '\n';
    }
}

inline void write_scmap(std::ostream &out, const SyntheticCorpus &s) {
    out << "sc_code,macro_area\n";
    for (const auto &[sc, area] : s.scmap_rows)
        out << text::csv_join({sc, area}) << '\n';
}

inline void write_raw_citations(std::ostream &out, const SyntheticCorpus &s) {
    out << "citing_id,cited_id\n";
    for (const auto &[citing, cited] : s.edges)
        out << text::csv_join({citing, cited}) << '\n';
}

} // namespace io
} // namespace kflow::synth

#endif // KFLOW_SYNTHKIT_HPP
