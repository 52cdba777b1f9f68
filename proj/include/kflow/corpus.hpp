#ifndef KFLOW_CORPUS_HPP
#define KFLOW_CORPUS_HPP

#include <algorithm>
#include <compare>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kflow/text.hpp"

namespace kflow {

/// Index into a gazetteer's region set. Region sets are kept sorted by name,
/// so comparing ids compares names.
struct RegionId {
    std::uint32_t value = 0;
    auto operator<=>(const RegionId &) const = default;
};

using PubIndex = std::size_t;

struct Address {
    std::string institution;
    std::string city;     // empty when absent
    std::string province; // empty when absent
    std::string zip;      // empty when absent
    std::string country;  // ISO 3166-1 alpha-2
};

struct Author {
    std::string name;
    std::vector<std::size_t> address_refs; // empty = unlinked

    std::size_t multiplicity() const noexcept { return address_refs.size(); }
};

struct Publication {
    std::string id;
    int year = 0;
    std::vector<Address> addresses;
    std::vector<Author> authors;
    std::vector<std::string> sc_codes;

    bool multi_authored() const noexcept { return authors.size() > 1; }
};

/// A deduplicated citation link between two loaded publications.
struct CitationEdge {
    PubIndex citing;
    PubIndex cited;
    auto operator<=>(const CitationEdge &) const = default;
};

/// Outcome of resolving one address against a gazetteer.
struct Resolution {
    enum class Kind { Domestic, Foreign, Unresolved };
    Kind kind = Kind::Unresolved;
    RegionId region{};

    bool domestic() const noexcept { return kind == Kind::Domestic; }
    friend bool operator==(const Resolution &, const Resolution &) = default;
};

/// Lookup tables from postal code, (city, province) and province to regions.
class Gazetteer {
public:
    enum class Kind { Zip, City, Province };

    struct Entry {
        Kind kind;
        std::string key1;
        std::string key2;
        std::string region;
    };

    Gazetteer() = default;

    /// Builds from raw entries. `extra_regions` declares regions that have no
    /// lookup key of their own. Region ids follow lexicographic name order.
    Gazetteer(const std::vector<Entry> &entries, const std::vector<std::string> &extra_regions = {},
              std::string domestic_country = "IT")
        : domestic_country_{std::move(domestic_country)} {
        std::vector<std::string> names = extra_regions;
        for (const auto &e : entries)
            names.push_back(e.region);
        for (auto &n : names)
            n = text::trim(n);
        std::sort(names.begin(), names.end());
        names.erase(std::unique(names.begin(), names.end()), names.end());
        names.erase(std::remove(names.begin(), names.end(), std::string{}), names.end());
        regions_ = std::move(names);
        for (std::size_t i = 0; i < regions_.size(); ++i)
            by_name_.emplace(regions_[i], RegionId{static_cast<std::uint32_t>(i)});

        for (const auto &e : entries) {
            const RegionId id = by_name_.at(text::trim(e.region));
            switch (e.kind) {
            case Kind::Zip:
                insert(zip_map_, text::strip_zip_prefix(e.key1), id, "zip");
                break;
            case Kind::City:
                insert(city_map_, city_key(e.key1, e.key2), id, "city");
                break;
            case Kind::Province:
                insert(province_map_, text::normalize_key(e.key1), id, "province");
                break;
            }
        }
    }

    const std::vector<std::string> &regions() const noexcept { return regions_; }
    std::size_t region_count() const noexcept { return regions_.size(); }
    const std::string &name(RegionId id) const { return regions_.at(id.value); }
    const std::string &domestic_country() const noexcept { return domestic_country_; }

    std::optional<RegionId> find(std::string_view region_name) const {
        auto it = by_name_.find(text::trim(region_name));
        if (it == by_name_.end())
            return std::nullopt;
        return it->second;
    }

    /// Like find(), but unknown names are a ConfigError.
    RegionId require(std::string_view region_name) const {
        if (auto id = find(region_name))
            return *id;
        throw ConfigError("unknown region '" + std::string{region_name} + "'");
    }

    /// Precedence zip > (city, province) > province; first hit wins. A city
    /// entry with an empty province matches the city under any province.
    Resolution resolve(const Address &address) const {
        if (text::trim(address.country) != domestic_country_)
            return {Resolution::Kind::Foreign, {}};
        if (!address.zip.empty()) {
            if (auto it = zip_map_.find(text::strip_zip_prefix(address.zip)); it != zip_map_.end())
                return {Resolution::Kind::Domestic, it->second};
        }
        if (!address.city.empty()) {
            if (auto it = city_map_.find(city_key(address.city, address.province));
                it != city_map_.end())
                return {Resolution::Kind::Domestic, it->second};
            if (auto it = city_map_.find(city_key(address.city, {})); it != city_map_.end())
                return {Resolution::Kind::Domestic, it->second};
        }
        if (!address.province.empty()) {
            if (auto it = province_map_.find(text::normalize_key(address.province));
                it != province_map_.end())
                return {Resolution::Kind::Domestic, it->second};
        }
        return {Resolution::Kind::Unresolved, {}};
    }

private:
    static std::string city_key(std::string_view city, std::string_view province) {
        return text::normalize_key(city) + '\x1f' + text::normalize_key(province);
    }

    static void insert(std::unordered_map<std::string, RegionId> &map, std::string key,
                       RegionId id, const char *kind) {
        auto [it, inserted] = map.emplace(key, id);
        if (!inserted && it->second != id)
            throw InputError(std::string{"conflicting gazetteer "} + kind + " entry '" + key + "'");
    }

    std::string domestic_country_ = "IT";
    std::vector<std::string> regions_;
    std::map<std::string, RegionId, std::less<>> by_name_;
    std::unordered_map<std::string, RegionId> zip_map_;
    std::unordered_map<std::string, RegionId> city_map_;
    std::unordered_map<std::string, RegionId> province_map_;
};

inline Resolution resolve_region(const Address &address, const Gazetteer &gazetteer) {
    return gazetteer.resolve(address);
}

/// Subject category to macro-area mapping. Each SC maps to exactly one area.
class SCMap {
public:
    SCMap() = default;

    void add(const std::string &sc, const std::string &area) {
        auto [it, inserted] = areas_.emplace(sc, area);
        if (!inserted && it->second != area)
            throw InputError("subject category '" + sc + "' assigned to two macro-areas");
    }

    bool contains(std::string_view sc) const { return areas_.find(sc) != areas_.end(); }

    const std::string &area(std::string_view sc) const {
        auto it = areas_.find(sc);
        if (it == areas_.end())
            throw ConfigError("unknown subject category '" + std::string{sc} + "'");
        return it->second;
    }

    /// All SC codes in lexicographic order.
    std::vector<std::string> codes() const {
        std::vector<std::string> out;
        out.reserve(areas_.size());
        for (const auto &[sc, area] : areas_)
            out.push_back(sc);
        return out;
    }

    std::vector<std::string> members(std::string_view area) const {
        std::vector<std::string> out;
        for (const auto &[sc, a] : areas_)
            if (a == area)
                out.push_back(sc);
        return out;
    }

    std::size_t size() const noexcept { return areas_.size(); }

private:
    std::map<std::string, std::string, std::less<>> areas_;
};

struct LoadOptions {
    std::optional<int> cited_year_min;
    std::optional<int> cited_year_max;
};

/// Counters for edges dropped while building a corpus.
struct LoadStats {
    std::size_t edge_lines = 0;
    std::size_t duplicate_edges = 0;
    std::size_t self_edges = 0;
    std::size_t unknown_citing = 0;
    std::size_t unknown_cited = 0;
    std::size_t out_of_window = 0;
};

/// Immutable publication and citation store.
class Corpus {
public:
    using RawEdge = std::pair<std::string, std::string>; // (citing_id, cited_id)

    Corpus(std::vector<Publication> publications, const std::vector<RawEdge> &edges,
           Gazetteer gazetteer, SCMap scmap, const LoadOptions &options = {})
        : publications_{std::move(publications)}, gazetteer_{std::move(gazetteer)},
          scmap_{std::move(scmap)} {
        for (PubIndex i = 0; i < publications_.size(); ++i) {
            const auto &pub = publications_[i];
            if (!index_.emplace(pub.id, i).second)
                throw InputError("duplicate publication id '" + pub.id + "'");
            for (const auto &sc : pub.sc_codes)
                if (!scmap_.contains(sc))
                    throw InputError("publication '" + pub.id +
                                     "' has subject category missing from the SC map: '" + sc +
                                     "'");
        }
        stats_.edge_lines = edges.size();
        for (const auto &[citing_id, cited_id] : edges) {
            const auto citing = index_.find(citing_id);
            const auto cited = index_.find(cited_id);
            if (citing == index_.end()) {
                ++stats_.unknown_citing;
                continue;
            }
            if (cited == index_.end()) {
                ++stats_.unknown_cited;
                continue;
            }
            if (citing->second == cited->second) {
                ++stats_.self_edges;
                continue;
            }
            const int year = publications_[cited->second].year;
            if ((options.cited_year_min && year < *options.cited_year_min) ||
                (options.cited_year_max && year > *options.cited_year_max)) {
                ++stats_.out_of_window;
                continue;
            }
            edges_.push_back({citing->second, cited->second});
        }
        std::sort(edges_.begin(), edges_.end(), [](const CitationEdge &a, const CitationEdge &b) {
            return std::tie(a.cited, a.citing) < std::tie(b.cited, b.citing);
        });
        const auto before = edges_.size();
        edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
        stats_.duplicate_edges = before - edges_.size();
    }

    const std::vector<Publication> &publications() const noexcept { return publications_; }
    const Publication &publication(PubIndex i) const { return publications_.at(i); }
    std::size_t size() const noexcept { return publications_.size(); }

    /// Edges sorted by (cited, citing) publication index.
    const std::vector<CitationEdge> &edges() const noexcept { return edges_; }

    const Gazetteer &gazetteer() const noexcept { return gazetteer_; }
    const SCMap &scmap() const noexcept { return scmap_; }
    const LoadStats &stats() const noexcept { return stats_; }

    std::optional<PubIndex> find(std::string_view id) const {
        auto it = index_.find(std::string{id});
        if (it == index_.end())
            return std::nullopt;
        return it->second;
    }

private:
    std::vector<Publication> publications_;
    std::unordered_map<std::string, PubIndex> index_;
    std::vector<CitationEdge> edges_;
    Gazetteer gazetteer_;
    SCMap scmap_;
    LoadStats stats_;
};

// ---------------------------------------------------------------------------
// File formats

namespace io {

inline std::ifstream open_input(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot open '" + path + "'");
    return in;
}

namespace detail {

inline std::string opt_string(const nlohmann::json &obj, const char *key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null())
        return {};
    if (!it->is_string())
        throw InputError(std::string{"field '"} + key + "' must be a string", line);
    return it->get<std::string>();
}

inline const nlohmann::json &required(const nlohmann::json &obj, const char *key,
                                      std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end())
        throw InputError(std::string{"missing field '"} + key + "'", line);
    return *it;
}

} // namespace detail

/// Parses and checks one publication record. `domestic_country` drives the
/// rule that domestic addresses carry at least one of city / province / zip.
inline Publication parse_publication(std::string_view json_line, std::size_t line = 0,
                                     std::string_view domestic_country = "IT") {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_line);
    } catch (const nlohmann::json::parse_error &e) {
        throw InputError(std::string{"malformed JSON: "} + e.what(), line);
    }
    if (!j.is_object())
        throw InputError("record is not a JSON object", line);

    Publication pub;
    try {
        const auto &id = detail::required(j, "id", line);
        if (!id.is_string() || id.get<std::string>().empty())
            throw InputError("'id' must be a non-empty string", line);
        pub.id = id.get<std::string>();
        const auto &year = detail::required(j, "year", line);
        if (!year.is_number_integer())
            throw InputError("'year' must be an integer", line);
        pub.year = year.get<int>();

        const auto &addresses = detail::required(j, "addresses", line);
        if (!addresses.is_array() || addresses.empty())
            throw InputError("'addresses' must be a non-empty array", line);
        for (const auto &a : addresses) {
            if (!a.is_object())
                throw InputError("address is not an object", line);
            Address addr{detail::opt_string(a, "institution", line),
                         detail::opt_string(a, "city", line),
                         detail::opt_string(a, "province", line),
                         detail::opt_string(a, "zip", line),
                         text::trim(detail::opt_string(a, "country", line))};
            if (addr.country.empty())
                throw InputError("address without country", line);
            if (addr.country == domestic_country && addr.city.empty() && addr.province.empty() &&
                addr.zip.empty())
                throw InputError("domestic address needs one of city, province, zip", line);
            pub.addresses.push_back(std::move(addr));
        }

        const auto &authors = detail::required(j, "authors", line);
        if (!authors.is_array() || authors.empty())
            throw InputError("'authors' must be a non-empty array", line);
        for (const auto &a : authors) {
            if (!a.is_object())
                throw InputError("author is not an object", line);
            Author author{detail::opt_string(a, "name", line), {}};
            if (auto refs = a.find("address_refs"); refs != a.end() && !refs->is_null()) {
                if (!refs->is_array())
                    throw InputError("'address_refs' must be an array", line);
                for (const auto &r : *refs) {
                    if (!r.is_number_unsigned() && !r.is_number_integer())
                        throw InputError("address reference is not an integer", line);
                    const auto v = r.get<std::int64_t>();
                    if (v < 0 || static_cast<std::size_t>(v) >= pub.addresses.size())
                        throw InputError("address reference " + std::to_string(v) +
                                             " out of range",
                                         line);
                    const auto ref = static_cast<std::size_t>(v);
                    if (std::find(author.address_refs.begin(), author.address_refs.end(), ref) !=
                        author.address_refs.end())
                        throw InputError("duplicate address reference " + std::to_string(ref),
                                         line);
                    author.address_refs.push_back(ref);
                }
            }
            pub.authors.push_back(std::move(author));
        }

        const auto &scs = detail::required(j, "sc_codes", line);
        if (!scs.is_array() || scs.empty())
            throw InputError("'sc_codes' must be a non-empty array", line);
        for (const auto &sc : scs) {
            if (!sc.is_string())
                throw InputError("subject category is not a string", line);
            pub.sc_codes.push_back(sc.get<std::string>());
        }
    } catch (const nlohmann::json::exception &e) {
        throw InputError(e.what(), line);
    }
    return pub;
}

inline std::vector<Publication> read_publications(std::istream &in,
                                                  std::string_view domestic_country = "IT") {
    std::vector<Publication> pubs;
    std::unordered_map<std::string, std::size_t> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty())
            continue;
        auto pub = parse_publication(line, line_no, domestic_country);
        if (auto [it, inserted] = seen.emplace(pub.id, line_no); !inserted)
            throw InputError("duplicate publication id '" + pub.id + "' (first on line " +
                                 std::to_string(it->second) + ")",
                             line_no);
        pubs.push_back(std::move(pub));
    }
    return pubs;
}

inline std::vector<Corpus::RawEdge> read_citations(std::istream &in) {
    std::vector<Corpus::RawEdge> edges;
    text::read_csv(in, {"citing_id", "cited_id"},
                   [&](const std::vector<std::string> &f, std::size_t line) {
                       auto citing = text::trim(f[0]);
                       auto cited = text::trim(f[1]);
                       if (citing.empty() || cited.empty())
                           throw InputError("empty publication id", line);
                       edges.emplace_back(std::move(citing), std::move(cited));
                   });
    return edges;
}

/// Gazetteer rows: kind ∈ {zip, city, province, region}. `region` rows only
/// declare a region name (key columns empty).
inline Gazetteer read_gazetteer(std::istream &in, std::string domestic_country = "IT") {
    std::vector<Gazetteer::Entry> entries;
    std::vector<std::string> declared;
    text::read_csv(in, {"kind", "key1", "key2", "region"},
                   [&](const std::vector<std::string> &f, std::size_t line) {
                       const auto kind = text::trim(f[0]);
                       const auto region = text::trim(f[3]);
                       if (region.empty())
                           throw InputError("empty region name", line);
                       if (kind == "region") {
                           declared.push_back(region);
                           return;
                       }
                       Gazetteer::Kind k;
                       if (kind == "zip")
                           k = Gazetteer::Kind::Zip;
                       else if (kind == "city")
                           k = Gazetteer::Kind::City;
                       else if (kind == "province")
                           k = Gazetteer::Kind::Province;
                       else
                           throw InputError("unknown gazetteer kind '" + kind + "'", line);
                       if (text::trim(f[1]).empty())
                           throw InputError("empty gazetteer key", line);
                       entries.push_back({k, f[1], f[2], region});
                   });
    return Gazetteer{entries, declared, std::move(domestic_country)};
}

inline SCMap read_scmap(std::istream &in) {
    SCMap map;
    text::read_csv(in, {"sc_code", "macro_area"},
                   [&](const std::vector<std::string> &f, std::size_t line) {
                       const auto sc = text::trim(f[0]);
                       const auto area = text::trim(f[1]);
                       if (sc.empty() || area.empty())
                           throw InputError("empty SC code or macro-area", line);
                       try {
                           map.add(sc, area);
                       } catch (const InputError &e) {
                           throw InputError(e.what(), line);
                       }
                   });
    return map;
}

inline nlohmann::json to_json(const Publication &pub) {
    nlohmann::json j;
    j["id"] = pub.id;
    j["year"] = pub.year;
    auto &addrs = j["addresses"] = nlohmann::json::array();
    for (const auto &a : pub.addresses) {
        nlohmann::json aj;
        aj["institution"] = a.institution;
        if (!a.city.empty())
            aj["city"] = a.city;
        if (!a.province.empty())
            aj["province"] = a.province;
        if (!a.zip.empty())
            aj["zip"] = a.zip;
        aj["country"] = a.country;
        addrs.push_back(std::move(aj));
    }
    auto &authors = j["authors"] = nlohmann::json::array();
    for (const auto &a : pub.authors)
        authors.push_back({{"name", a.name}, {"address_refs", a.address_refs}});
    j["sc_codes"] = pub.sc_codes;
    return j;
}

inline void write_publications(std::ostream &out, const std::vector<Publication> &pubs) {
    for (const auto &pub : pubs)
        out << to_json(pub).dump() << '\n';
}

inline void write_citations(std::ostream &out, const Corpus &corpus) {
    out << "citing_id,cited_id\n";
    for (const auto &e : corpus.edges())
        out << text::csv_join({corpus.publication(e.citing).id, corpus.publication(e.cited).id})
            << '\n';
}

} // namespace io

struct CorpusPaths {
    std::string publications;
    std::string citations;
    std::string gazetteer;
    std::string scmap;
};

inline Corpus load_corpus(const CorpusPaths &paths, const LoadOptions &options = {},
                          const std::string &domestic_country = "IT") {
    auto with_path = [](const std::string &path, auto &&fn) {
        auto in = io::open_input(path);
        try {
            return fn(in);
        } catch (const InputError &e) {
            throw InputError(path + ": " + e.what());
        }
    };
    auto gazetteer = with_path(paths.gazetteer, [&](std::istream &in) {
        return io::read_gazetteer(in, domestic_country);
    });
    auto scmap = with_path(paths.scmap, [](std::istream &in) { return io::read_scmap(in); });
    auto pubs = with_path(paths.publications, [&](std::istream &in) {
        return io::read_publications(in, domestic_country);
    });
    auto edges =
        with_path(paths.citations, [](std::istream &in) { return io::read_citations(in); });
    return Corpus{std::move(pubs), edges, std::move(gazetteer), std::move(scmap), options};
}

// ---------------------------------------------------------------------------
// Validation

enum class LinkStatus {
    Linked,        // every author has at least one address
    AutoLinked,    // single author without links; linked to all addresses
    Unlinked,      // multi-authored with an unlinked author; excluded
};

struct PublicationCheck {
    PubIndex pub;
    std::size_t unlinked_authors = 0;
    std::size_t unresolved_domestic = 0;
    LinkStatus status = LinkStatus::Linked;

    bool flagged() const noexcept {
        return unlinked_authors > 0 || unresolved_domestic > 0 || status != LinkStatus::Linked;
    }
};

struct ValidationReport {
    std::vector<PublicationCheck> checks; // one per publication, corpus order
    std::size_t excluded = 0;
    std::size_t auto_linked = 0;
    std::size_t unresolved_addresses = 0;
    LoadStats load;
};

inline LinkStatus link_status(const Publication &pub) {
    const bool any_unlinked = std::any_of(pub.authors.begin(), pub.authors.end(),
                                          [](const Author &a) { return a.address_refs.empty(); });
    if (!any_unlinked)
        return LinkStatus::Linked;
    return pub.multi_authored() ? LinkStatus::Unlinked : LinkStatus::AutoLinked;
}

inline ValidationReport validate_corpus(const Corpus &corpus) {
    ValidationReport report;
    report.load = corpus.stats();
    for (PubIndex i = 0; i < corpus.size(); ++i) {
        const auto &pub = corpus.publication(i);
        PublicationCheck check{i};
        for (const auto &a : pub.authors)
            if (a.address_refs.empty())
                ++check.unlinked_authors;
        for (const auto &addr : pub.addresses)
            if (corpus.gazetteer().resolve(addr).kind == Resolution::Kind::Unresolved)
                ++check.unresolved_domestic;
        check.status = link_status(pub);
        report.excluded += check.status == LinkStatus::Unlinked;
        report.auto_linked += check.status == LinkStatus::AutoLinked;
        report.unresolved_addresses += check.unresolved_domestic;
        report.checks.push_back(check);
    }
    return report;
}

} // namespace kflow

#endif // KFLOW_CORPUS_HPP
