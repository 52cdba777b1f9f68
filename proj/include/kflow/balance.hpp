#ifndef KFLOW_BALANCE_HPP
#define KFLOW_BALANCE_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "kflow/flows.hpp"

namespace kflow {

/// Regional balance of knowledge flows for one region (optionally one SC).
/// a: extra-regional gains generated; b: gains earned from other regions.
template <typename T = std::int64_t>
struct RBKFEntry {
    RegionId region;
    std::optional<std::string> sc;
    T generated{};
    T earned{};

    T rbkf() const { return generated - earned; }
    bool surplus() const { return rbkf() > T{}; }

    friend bool operator==(const RBKFEntry &, const RBKFEntry &) = default;
};

template <typename T>
RBKFEntry<T> rbkf_entry(const FlowMatrix<T> &m, RegionId r) {
    const auto i = r.value;
    return {r, m.sc(), m.row_total(i) - m.diagonal(i), m.col_total(i) - m.diagonal(i)};
}

/// One entry per region of the matrix. On a single matrix the balances sum to zero.
template <typename T>
std::vector<RBKFEntry<T>> rbkf_overall(const FlowMatrix<T> &m) {
    std::vector<RBKFEntry<T>> out;
    out.reserve(m.size());
    for (std::size_t r = 0; r < m.size(); ++r)
        out.push_back(rbkf_entry(m, RegionId{static_cast<std::uint32_t>(r)}));
    return out;
}

/// Region balance summed over per-SC matrices. Under full counting this
/// differs from the single-matrix balance and need not sum to zero.
template <typename T>
std::vector<RBKFEntry<T>> rbkf_sc_summed(const std::map<std::string, FlowMatrix<T>> &by_sc,
                                         std::size_t regions) {
    std::vector<RBKFEntry<T>> out(regions);
    for (std::size_t r = 0; r < regions; ++r)
        out[r].region = RegionId{static_cast<std::uint32_t>(r)};
    for (const auto &[sc, m] : by_sc) {
        for (std::size_t r = 0; r < regions; ++r) {
            const auto e = rbkf_entry(m, RegionId{static_cast<std::uint32_t>(r)});
            out[r].generated += e.generated;
            out[r].earned += e.earned;
        }
    }
    return out;
}

/// Balance of `region` in each requested SC. SCs known to the SC map but
/// without a matrix yield zero entries; SCs unknown to the map are an error.
template <typename T>
std::vector<RBKFEntry<T>> rbkf_by_sc(const std::map<std::string, FlowMatrix<T>> &by_sc,
                                     RegionId region, std::span<const std::string> scs,
                                     const SCMap &scmap) {
    std::vector<RBKFEntry<T>> out;
    for (const auto &sc : scs) {
        if (!scmap.contains(sc))
            throw ConfigError("unknown subject category '" + sc + "'");
        if (auto it = by_sc.find(sc); it != by_sc.end()) {
            auto e = rbkf_entry(it->second, region);
            e.sc = sc;
            out.push_back(std::move(e));
        } else {
            out.push_back({region, sc, T{}, T{}});
        }
    }
    return out;
}

/// Sums SC-level entries into macro-area totals; the sc label becomes the area.
template <typename T>
std::map<std::string, RBKFEntry<T>> rbkf_area_totals(std::span<const RBKFEntry<T>> entries,
                                                     const SCMap &scmap) {
    std::map<std::string, RBKFEntry<T>> out;
    for (const auto &e : entries) {
        if (!e.sc)
            continue;
        const auto &area = scmap.area(*e.sc);
        auto [it, inserted] = out.try_emplace(area, RBKFEntry<T>{e.region, area, T{}, T{}});
        it->second.generated += e.generated;
        it->second.earned += e.earned;
    }
    return out;
}

/// Bilateral flows between two regions in one SC, from x's perspective.
template <typename T = std::int64_t>
struct PairwiseBalance {
    std::string sc;
    T x_to_y{}; // produced in x, cited from y
    T y_to_x{};

    T balance() const { return x_to_y - y_to_x; }
};

/// Per-SC bilateral balances ordered ascending by balance, then SC name.
template <typename T>
std::vector<PairwiseBalance<T>> rbkf_pairwise(const std::map<std::string, FlowMatrix<T>> &by_sc,
                                              RegionId x, RegionId y) {
    if (x == y)
        throw ConfigError("pairwise balance needs two distinct regions");
    std::vector<PairwiseBalance<T>> out;
    for (const auto &[sc, m] : by_sc)
        out.push_back({sc, m(x, y), m(y, x)});
    std::stable_sort(out.begin(), out.end(), [](const auto &a, const auto &b) {
        if (a.balance() != b.balance())
            return a.balance() < b.balance();
        return a.sc < b.sc;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Maximum-flow edges

enum class EdgeStyle { Solid, Dotted };

/// Solid: region_b is both the top import source and the top export
/// destination of region_a. Dotted: a directed flow region_a -> region_b.
struct MaxFlowEdge {
    RegionId region_a;
    RegionId region_b;
    EdgeStyle style = EdgeStyle::Dotted;
    std::optional<RegionId> top_import; // of the focal region
    std::optional<RegionId> top_export; // of the focal region
    bool tied = false;

    friend bool operator==(const MaxFlowEdge &, const MaxFlowEdge &) = default;
};

struct MaxFlowResult {
    std::vector<MaxFlowEdge> edges;
    std::vector<RegionId> omitted; // regions with no off-diagonal flow at all
};

namespace detail {

struct Argmax {
    std::optional<RegionId> best;
    bool tied = false;
};

// Largest positive off-diagonal entry; lowest region id wins ties.
template <typename T, typename Get>
Argmax off_diagonal_argmax(std::size_t n, std::size_t focal, Get &&get) {
    Argmax out;
    T best{};
    for (std::size_t k = 0; k < n; ++k) {
        if (k == focal)
            continue;
        const T v = get(k);
        if (v <= T{})
            continue;
        if (!out.best || v > best) {
            out.best = RegionId{static_cast<std::uint32_t>(k)};
            out.tied = false;
            best = v;
        } else if (v == best) {
            out.tied = true;
        }
    }
    return out;
}

} // namespace detail

/// For each region A: if A exports most to B and imports most from B, a Solid
/// edge (A, B); otherwise Dotted edges A -> top export and top import -> A.
template <typename T>
MaxFlowResult max_flow_edges(const FlowMatrix<T> &m) {
    MaxFlowResult out;
    const auto n = m.size();
    for (std::size_t a = 0; a < n; ++a) {
        const auto exp = detail::off_diagonal_argmax<T>(n, a, [&](std::size_t b) { return m(a, b); });
        const auto imp = detail::off_diagonal_argmax<T>(n, a, [&](std::size_t b) { return m(b, a); });
        const RegionId focal{static_cast<std::uint32_t>(a)};
        if (!exp.best && !imp.best) {
            out.omitted.push_back(focal);
            continue;
        }
        const bool tied = exp.tied || imp.tied;
        if (exp.best && imp.best && *exp.best == *imp.best) {
            out.edges.push_back({focal, *exp.best, EdgeStyle::Solid, imp.best, exp.best, tied});
            continue;
        }
        if (exp.best)
            out.edges.push_back({focal, *exp.best, EdgeStyle::Dotted, imp.best, exp.best, exp.tied});
        if (imp.best)
            out.edges.push_back({*imp.best, focal, EdgeStyle::Dotted, imp.best, exp.best, imp.tied});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rank correlation

/// Ranks starting at 1; tied values share the average of their ranks.
inline std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]])
            ++j;
        const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k)
            ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

/// Spearman rank correlation (Pearson correlation of average ranks).
/// nullopt when either rank vector has zero variance.
inline std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("spearman needs two equally sized samples of size >= 2");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0)
        return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// Exports

namespace io {

template <typename T>
std::string format_value(T v) {
    if constexpr (std::is_integral_v<T>)
        return std::to_string(v);
    else
        return text::fixed(v, 1);
}

template <typename T>
std::string format_signed(T v) {
    return (v > T{} ? "+" : "") + format_value(v);
}

/// `region,sc,a,b,rbkf`; entries without an SC label are written as "ALL".
template <typename T>
void write_rbkf(std::ostream &out, const Gazetteer &gz, std::span<const RBKFEntry<T>> entries,
                bool header = true) {
    if (header)
        out << "region,sc,a,b,rbkf\n";
    for (const auto &e : entries)
        out << text::csv_join({gz.name(e.region), e.sc.value_or("ALL"), format_value(e.generated),
                               format_value(e.earned), format_signed(e.rbkf())})
            << '\n';
}

template <typename T>
void write_pairwise(std::ostream &out, std::span<const PairwiseBalance<T>> rows) {
    out << "sc,x_to_y,y_to_x,balance\n";
    for (const auto &r : rows)
        out << text::csv_join({r.sc, format_value(r.x_to_y), format_value(r.y_to_x),
                               format_signed(r.balance())})
            << '\n';
}

/// Graphviz text. Mutual solid pairs collapse into one undirected edge.
inline void write_edges_dot(std::ostream &out, const Gazetteer &gz, const MaxFlowResult &result) {
    out << "digraph max_flows {\n";
    for (const auto &name : gz.regions())
        out << "  \"" << name << "\";\n";
    std::set<std::tuple<std::uint32_t, std::uint32_t, int>> seen;
    for (const auto &e : result.edges) {
        auto a = e.region_a.value, b = e.region_b.value;
        if (e.style == EdgeStyle::Solid && b < a)
            std::swap(a, b);
        if (!seen.emplace(a, b, static_cast<int>(e.style)).second)
            continue;
        out << "  \"" << gz.name(RegionId{a}) << "\" -> \"" << gz.name(RegionId{b}) << "\" [style="
            << (e.style == EdgeStyle::Solid ? "solid, dir=none" : "dotted")
            << (e.tied ? ", tied=true" : "") << "];\n";
    }
    out << "}\n";
}

} // namespace io
} // namespace kflow

#endif // KFLOW_BALANCE_HPP
