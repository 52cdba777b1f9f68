#ifndef KFLOW_ATTRIBUTION_HPP
#define KFLOW_ATTRIBUTION_HPP

#include <array>
#include <cstdint>
#include <map>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "kflow/corpus.hpp"

namespace kflow {

using Rational = boost::rational<std::int64_t>;

/// Fractional authorship of one publication. Each author carries weight 1,
/// split evenly over their linked addresses.
struct RegionShares {
    std::string pub_id;
    std::map<RegionId, Rational> shares;
    Rational foreign_weight{0};
    Rational unresolved_weight{0};
    std::int64_t total_authors = 0;
    std::size_t unlinked_authors = 0; // weight of these lands in unresolved_weight

    Rational share(RegionId r) const {
        auto it = shares.find(r);
        return it == shares.end() ? Rational{0} : it->second;
    }

    Rational total_weight() const {
        Rational sum = foreign_weight + unresolved_weight;
        for (const auto &[r, w] : shares)
            sum += w;
        return sum;
    }

    bool has_unlinked_multi_author() const noexcept {
        return total_authors > 1 && unlinked_authors > 0;
    }
};

inline RegionShares compute_shares(const Publication &pub, const Gazetteer &gazetteer) {
    RegionShares out;
    out.pub_id = pub.id;
    out.total_authors = static_cast<std::int64_t>(pub.authors.size());

    std::vector<Resolution> resolved;
    resolved.reserve(pub.addresses.size());
    for (const auto &a : pub.addresses)
        resolved.push_back(gazetteer.resolve(a));

    auto credit = [&](std::size_t address, Rational w) {
        const auto &res = resolved[address];
        switch (res.kind) {
        case Resolution::Kind::Domestic:
            out.shares[res.region] += w;
            break;
        case Resolution::Kind::Foreign:
            out.foreign_weight += w;
            break;
        case Resolution::Kind::Unresolved:
            out.unresolved_weight += w;
            break;
        }
    };

    for (const auto &author : pub.authors) {
        if (!author.address_refs.empty()) {
            const Rational w{1, static_cast<std::int64_t>(author.address_refs.size())};
            for (auto ref : author.address_refs)
                credit(ref, w);
        } else if (pub.authors.size() == 1) {
            const Rational w{1, static_cast<std::int64_t>(pub.addresses.size())};
            for (std::size_t i = 0; i < pub.addresses.size(); ++i)
                credit(i, w);
        } else {
            ++out.unlinked_authors;
            out.unresolved_weight += 1;
        }
    }
    return out;
}

enum class ExclusionReason { ForeignMajority, NoMajorityRegion, UnlinkedAuthors };

inline const char *to_string(ExclusionReason r) {
    switch (r) {
    case ExclusionReason::ForeignMajority:
        return "ForeignMajority";
    case ExclusionReason::NoMajorityRegion:
        return "NoMajorityRegion";
    case ExclusionReason::UnlinkedAuthors:
        return "UnlinkedAuthors";
    }
    return "?";
}

/// Region-of-production classification of one publication.
struct MadeIn {
    enum class Kind { Single, Dual, Excluded };

    Kind kind = Kind::Excluded;
    std::array<RegionId, 2> region{}; // [0] for Single; both for Dual, ascending
    ExclusionReason reason = ExclusionReason::NoMajorityRegion;
    bool foreign_exactly_half = false;

    static MadeIn single(RegionId r) { return {Kind::Single, {r, r}}; }
    static MadeIn dual(RegionId a, RegionId b) {
        if (b < a)
            std::swap(a, b);
        return {Kind::Dual, {a, b}};
    }
    static MadeIn excluded(ExclusionReason why) { return {Kind::Excluded, {}, why}; }

    bool attributed() const noexcept { return kind != Kind::Excluded; }

    /// The made-in regions: one for Single, two for Dual, none when excluded.
    std::span<const RegionId> regions() const noexcept {
        switch (kind) {
        case Kind::Single:
            return {region.data(), 1};
        case Kind::Dual:
            return {region.data(), 2};
        default:
            return {};
        }
    }

    bool contains(RegionId r) const noexcept {
        for (auto x : regions())
            if (x == r)
                return true;
        return false;
    }

    friend bool operator==(const MadeIn &a, const MadeIn &b) {
        if (a.kind != b.kind)
            return false;
        switch (a.kind) {
        case Kind::Single:
            return a.region[0] == b.region[0];
        case Kind::Dual:
            return a.region == b.region;
        default:
            return a.reason == b.reason;
        }
    }
};

inline const char *to_string(MadeIn::Kind k) {
    switch (k) {
    case MadeIn::Kind::Single:
        return "Single";
    case MadeIn::Kind::Dual:
        return "Dual";
    case MadeIn::Kind::Excluded:
        return "Excluded";
    }
    return "?";
}

/// Applies the exclusion rules in order (unlinked authors, foreign majority),
/// then the regional threshold test on share / total_authors.
inline MadeIn classify_made_in(const RegionShares &shares, Rational threshold = Rational{1, 2}) {
    if (shares.has_unlinked_multi_author())
        return MadeIn::excluded(ExclusionReason::UnlinkedAuthors);
    const Rational total{shares.total_authors};
    const Rational half = total / 2;
    if (shares.foreign_weight > half)
        return MadeIn::excluded(ExclusionReason::ForeignMajority);

    std::vector<RegionId> winners;
    bool all_exact = true;
    for (const auto &[r, w] : shares.shares) {
        const Rational frac = w / total;
        if (frac >= threshold) {
            winners.push_back(r);
            all_exact = all_exact && frac == threshold;
        }
    }
    MadeIn out = MadeIn::excluded(ExclusionReason::NoMajorityRegion);
    if (winners.size() == 1)
        out = MadeIn::single(winners[0]);
    else if (winners.size() == 2 && all_exact)
        out = MadeIn::dual(winners[0], winners[1]);
    out.foreign_exactly_half = shares.foreign_weight == half;
    return out;
}

/// Classification for every publication, aligned with corpus order.
inline std::vector<MadeIn> attribute_corpus(const Corpus &corpus,
                                            Rational threshold = Rational{1, 2}) {
    std::vector<MadeIn> out;
    out.reserve(corpus.size());
    for (const auto &pub : corpus.publications())
        out.push_back(classify_made_in(compute_shares(pub, corpus.gazetteer()), threshold));
    return out;
}

struct AttributionCounts {
    std::size_t single = 0;
    std::size_t dual = 0;
    std::size_t foreign_majority = 0;
    std::size_t no_majority = 0;
    std::size_t unlinked = 0;
    std::size_t foreign_exactly_half = 0;

    std::size_t excluded() const noexcept { return foreign_majority + no_majority + unlinked; }
};

inline AttributionCounts count_attribution(std::span<const MadeIn> made_in) {
    AttributionCounts c;
    for (const auto &m : made_in) {
        c.foreign_exactly_half += m.foreign_exactly_half;
        switch (m.kind) {
        case MadeIn::Kind::Single:
            ++c.single;
            break;
        case MadeIn::Kind::Dual:
            ++c.dual;
            break;
        case MadeIn::Kind::Excluded:
            switch (m.reason) {
            case ExclusionReason::ForeignMajority:
                ++c.foreign_majority;
                break;
            case ExclusionReason::NoMajorityRegion:
                ++c.no_majority;
                break;
            case ExclusionReason::UnlinkedAuthors:
                ++c.unlinked;
                break;
            }
            break;
        }
    }
    return c;
}

namespace io {

inline void write_attribution(std::ostream &out, const Corpus &corpus,
                              std::span<const MadeIn> made_in) {
    out << "pub_id,classification,region1,region2,reason\n";
    const auto &gz = corpus.gazetteer();
    for (PubIndex i = 0; i < made_in.size(); ++i) {
        const auto &m = made_in[i];
        std::vector<std::string> row{corpus.publication(i).id, to_string(m.kind), "", "", ""};
        if (m.kind == MadeIn::Kind::Single) {
            row[2] = gz.name(m.region[0]);
        } else if (m.kind == MadeIn::Kind::Dual) {
            row[2] = gz.name(m.region[0]);
            row[3] = gz.name(m.region[1]);
        } else {
            row[4] = to_string(m.reason);
        }
        out << text::csv_join(row) << '\n';
    }
}

} // namespace io
} // namespace kflow

#endif // KFLOW_ATTRIBUTION_HPP
