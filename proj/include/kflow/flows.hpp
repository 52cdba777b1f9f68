#ifndef KFLOW_FLOWS_HPP
#define KFLOW_FLOWS_HPP

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "kflow/attribution.hpp"
#include "kflow/corpus.hpp"

namespace kflow {

/// One citation of a made-in publication by a publication with at least one
/// resolvable domestic address.
struct Benefit {
    PubIndex cited;
    PubIndex citing;
    auto operator<=>(const Benefit &) const = default;
};

/// One (producing region, citing region) instance of a benefit.
struct Gain {
    PubIndex cited;
    PubIndex citing;
    RegionId producing_region;
    RegionId citing_region;
    bool intra = false;
    bool cited_dual = false;

    auto operator<=>(const Gain &) const = default;
};

struct GainSet {
    std::vector<Benefit> benefits;
    std::vector<Gain> gains;
};

/// Deduplicated, ascending set of regions among a publication's addresses.
/// Foreign and unresolved addresses contribute nothing.
inline std::vector<RegionId> citing_regions(const Publication &pub, const Gazetteer &gazetteer) {
    std::vector<RegionId> out;
    for (const auto &addr : pub.addresses) {
        const auto res = gazetteer.resolve(addr);
        if (res.domestic())
            out.push_back(res.region);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace detail {

inline void gains_for_edges(std::span<const CitationEdge> edges, std::span<const MadeIn> made_in,
                            const std::vector<std::vector<RegionId>> &regions_of, GainSet &out) {
    for (const auto &edge : edges) {
        const auto &producer = made_in[edge.cited];
        const auto &citers = regions_of[edge.citing];
        if (!producer.attributed() || citers.empty())
            continue;
        out.benefits.push_back({edge.cited, edge.citing});
        const bool dual = producer.kind == MadeIn::Kind::Dual;
        for (RegionId p : producer.regions())
            for (RegionId c : citers)
                out.gains.push_back({edge.cited, edge.citing, p, c, p == c, dual});
    }
}

} // namespace detail

/// Benefits and gains for every citation edge. Edges are split into at most
/// `threads` contiguous ranges on cited-publication boundaries; the result is
/// identical for any thread count.
inline GainSet compute_gains(const Corpus &corpus, std::span<const MadeIn> made_in,
                             unsigned threads = 1) {
    if (made_in.size() != corpus.size())
        throw std::invalid_argument("attribution does not match corpus size");

    std::vector<std::vector<RegionId>> regions_of(corpus.size());
    for (PubIndex i = 0; i < corpus.size(); ++i)
        regions_of[i] = citing_regions(corpus.publication(i), corpus.gazetteer());

    const auto &edges = corpus.edges();
    threads = std::max(1u, threads);
    if (threads == 1 || edges.size() < 2) {
        GainSet out;
        detail::gains_for_edges(edges, made_in, regions_of, out);
        return out;
    }

    std::vector<std::size_t> cuts{0};
    for (unsigned t = 1; t < threads; ++t) {
        std::size_t cut = std::max(cuts.back(), edges.size() * t / threads);
        while (cut > 0 && cut < edges.size() && edges[cut].cited == edges[cut - 1].cited)
            ++cut;
        cuts.push_back(cut);
    }
    cuts.push_back(edges.size());

    std::vector<GainSet> parts(threads);
    {
        std::vector<std::jthread> workers;
        for (unsigned t = 0; t < threads; ++t) {
            const std::span<const CitationEdge> slice{edges.data() + cuts[t],
                                                      cuts[t + 1] - cuts[t]};
            workers.emplace_back([&, slice, t] {
                detail::gains_for_edges(slice, made_in, regions_of, parts[t]);
            });
        }
    }
    GainSet out;
    for (auto &p : parts) {
        out.benefits.insert(out.benefits.end(), p.benefits.begin(), p.benefits.end());
        out.gains.insert(out.gains.end(), p.gains.begin(), p.gains.end());
    }
    return out;
}

/// Square region×region matrix; rows are producing regions, columns citing.
template <typename T>
class FlowMatrix {
public:
    using value_type = T;

    FlowMatrix() = default;
    explicit FlowMatrix(std::size_t regions, std::optional<std::string> sc = std::nullopt)
        : n_{regions}, cells_(regions * regions, T{}), sc_{std::move(sc)} {}

    std::size_t size() const noexcept { return n_; }
    const std::optional<std::string> &sc() const noexcept { return sc_; }

    T &operator()(std::size_t row, std::size_t col) { return cells_.at(row * n_ + col); }
    const T &operator()(std::size_t row, std::size_t col) const { return cells_.at(row * n_ + col); }
    T &operator()(RegionId row, RegionId col) { return (*this)(row.value, col.value); }
    const T &operator()(RegionId row, RegionId col) const { return (*this)(row.value, col.value); }

    T row_total(std::size_t r) const {
        T sum{};
        for (std::size_t c = 0; c < n_; ++c)
            sum += (*this)(r, c);
        return sum;
    }

    T col_total(std::size_t c) const {
        T sum{};
        for (std::size_t r = 0; r < n_; ++r)
            sum += (*this)(r, c);
        return sum;
    }

    T diagonal(std::size_t r) const { return (*this)(r, r); }

    T grand_total() const {
        T sum{};
        for (const auto &v : cells_)
            sum += v;
        return sum;
    }

    /// Entrywise multiplication by a constant.
    FlowMatrix scaled(T factor) const {
        FlowMatrix out = *this;
        for (auto &v : out.cells_)
            v *= factor;
        return out;
    }

    FlowMatrix &operator+=(const FlowMatrix &other) {
        if (other.n_ != n_)
            throw std::invalid_argument("flow matrix size mismatch");
        for (std::size_t i = 0; i < cells_.size(); ++i)
            cells_[i] += other.cells_[i];
        return *this;
    }

    friend bool operator==(const FlowMatrix &, const FlowMatrix &) = default;

private:
    std::size_t n_ = 0;
    std::vector<T> cells_;
    std::optional<std::string> sc_;
};

using CountMatrix = FlowMatrix<std::int64_t>;

/// How gains of a publication made in two regions enter a matrix.
enum class DualGainWeight { Full, Half };

namespace detail {

template <typename T>
T gain_weight(const Gain &g, DualGainWeight weighting) {
    if (weighting == DualGainWeight::Half && g.cited_dual) {
        if constexpr (std::is_integral_v<T>)
            throw ConfigError("half weighting of dual gains needs a real-valued matrix");
        else
            return T{1} / T{2};
    }
    return T{1};
}

} // namespace detail

/// Counts gains by (producing, citing) region.
template <typename T = std::int64_t>
FlowMatrix<T> flow_matrix(std::span<const Gain> gains, std::size_t regions,
                          DualGainWeight weighting = DualGainWeight::Full) {
    FlowMatrix<T> m(regions);
    for (const auto &g : gains)
        m(g.producing_region, g.citing_region) += detail::gain_weight<T>(g, weighting);
    return m;
}

/// Same, restricted to gains whose cited publication carries `sc`. Full
/// counting: a publication in k categories contributes to k matrices.
template <typename T = std::int64_t>
FlowMatrix<T> flow_matrix(std::span<const Gain> gains, const Corpus &corpus, std::string_view sc,
                          DualGainWeight weighting = DualGainWeight::Full) {
    if (!corpus.scmap().contains(sc))
        throw ConfigError("unknown subject category '" + std::string{sc} + "'");
    FlowMatrix<T> m(corpus.gazetteer().region_count(), std::string{sc});
    for (const auto &g : gains) {
        const auto &codes = corpus.publication(g.cited).sc_codes;
        if (std::find(codes.begin(), codes.end(), sc) != codes.end())
            m(g.producing_region, g.citing_region) += detail::gain_weight<T>(g, weighting);
    }
    return m;
}

/// One matrix per SC code of the SC map, built in a single pass.
template <typename T = std::int64_t>
std::map<std::string, FlowMatrix<T>> sc_flow_matrices(std::span<const Gain> gains,
                                                      const Corpus &corpus,
                                                      DualGainWeight weighting = DualGainWeight::Full) {
    const auto n = corpus.gazetteer().region_count();
    std::map<std::string, FlowMatrix<T>> out;
    for (const auto &sc : corpus.scmap().codes())
        out.emplace(sc, FlowMatrix<T>(n, sc));
    for (const auto &g : gains) {
        const T w = detail::gain_weight<T>(g, weighting);
        for (const auto &sc : corpus.publication(g.cited).sc_codes)
            out.at(sc)(g.producing_region, g.citing_region) += w;
    }
    return out;
}

/// Each row rescaled to sum to 100; all-zero rows stay zero.
template <typename T>
FlowMatrix<double> row_percentages(const FlowMatrix<T> &m) {
    FlowMatrix<double> out(m.size(), m.sc());
    for (std::size_t r = 0; r < m.size(); ++r) {
        const double total = static_cast<double>(m.row_total(r));
        if (total == 0.0)
            continue;
        for (std::size_t c = 0; c < m.size(); ++c)
            out(r, c) = 100.0 * static_cast<double>(m(r, c)) / total;
    }
    return out;
}

/// Per-region publication, citation, benefit and gain statistics.
struct RegionSummaryRow {
    RegionId region;
    std::int64_t total_pubs = 0;    // publications with any address in the region
    std::int64_t made_in_pubs = 0;  // Single or Dual including the region
    std::int64_t cited_made_in = 0; // made-in publications with at least one benefit
    std::int64_t benefits = 0;
    std::int64_t gains = 0;
    std::int64_t intra_gains = 0;

    Rational made_in_share() const { return ratio(made_in_pubs, total_pubs); }
    Rational cited_share() const { return ratio(cited_made_in, made_in_pubs); }
    Rational benefits_per_cited() const { return ratio(benefits, cited_made_in); }
    Rational gains_per_benefit() const { return ratio(gains, benefits); }
    Rational intra_share() const { return ratio(intra_gains, gains); }

private:
    static Rational ratio(std::int64_t num, std::int64_t den) {
        return den == 0 ? Rational{0} : Rational{num, den};
    }
};

inline std::vector<RegionSummaryRow> region_summary(const Corpus &corpus,
                                                    std::span<const MadeIn> made_in,
                                                    const GainSet &flows) {
    const auto n = corpus.gazetteer().region_count();
    std::vector<RegionSummaryRow> rows(n);
    for (std::size_t r = 0; r < n; ++r)
        rows[r].region = RegionId{static_cast<std::uint32_t>(r)};

    for (PubIndex i = 0; i < corpus.size(); ++i) {
        for (RegionId r : citing_regions(corpus.publication(i), corpus.gazetteer()))
            ++rows[r.value].total_pubs;
        for (RegionId r : made_in[i].regions())
            ++rows[r.value].made_in_pubs;
    }

    std::vector<char> cited(corpus.size(), 0);
    for (const auto &b : flows.benefits) {
        cited[b.cited] = 1;
        for (RegionId r : made_in[b.cited].regions())
            ++rows[r.value].benefits;
    }
    for (PubIndex i = 0; i < corpus.size(); ++i)
        if (cited[i])
            for (RegionId r : made_in[i].regions())
                ++rows[r.value].cited_made_in;

    for (const auto &g : flows.gains) {
        ++rows[g.producing_region.value].gains;
        rows[g.producing_region.value].intra_gains += g.intra;
    }
    return rows;
}

namespace io {

inline void write_gains(std::ostream &out, const Corpus &corpus, std::span<const Gain> gains) {
    out << "cited_id,citing_id,producing_region,citing_region,intra\n";
    const auto &gz = corpus.gazetteer();
    for (const auto &g : gains)
        out << text::csv_join({corpus.publication(g.cited).id, corpus.publication(g.citing).id,
                               gz.name(g.producing_region), gz.name(g.citing_region),
                               g.intra ? "1" : "0"})
            << '\n';
}

/// Matrix as delimited text: header row and first column carry region names.
/// Integer cells are written as-is; real cells with `decimals` places.
template <typename T>
void write_matrix(std::ostream &out, const FlowMatrix<T> &m, const std::vector<std::string> &names,
                  int decimals = 1) {
    std::vector<std::string> header{"region"};
    header.insert(header.end(), names.begin(), names.end());
    out << text::csv_join(header) << '\n';
    for (std::size_t r = 0; r < m.size(); ++r) {
        std::vector<std::string> row{names.at(r)};
        for (std::size_t c = 0; c < m.size(); ++c) {
            if constexpr (std::is_integral_v<T>)
                row.push_back(std::to_string(m(r, c)));
            else
                row.push_back(text::fixed(m(r, c), decimals));
        }
        out << text::csv_join(row) << '\n';
    }
}

} // namespace io
} // namespace kflow

#endif // KFLOW_FLOWS_HPP
