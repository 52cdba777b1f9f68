#ifndef KFLOW_SPECIALIZATION_HPP
#define KFLOW_SPECIALIZATION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "kflow/flows.hpp"

namespace kflow {

enum class Orientation { Generated, Earned };
enum class BalassaMode { ExcludeFocal, IncludeFocal };
enum class GainScope { All, ExtraOnly };

inline const char *to_string(Orientation o) {
    return o == Orientation::Generated ? "generated" : "earned";
}
inline const char *to_string(BalassaMode m) {
    return m == BalassaMode::ExcludeFocal ? "exclude_focal" : "include_focal";
}
inline const char *to_string(GainScope s) { return s == GainScope::All ? "all" : "extra_only"; }

/// Region × SC gain counts. Generated tensors count gains by producing region,
/// earned tensors by citing region.
class GainTensor {
public:
    GainTensor(std::size_t regions, std::vector<std::string> scs,
               Orientation orientation = Orientation::Generated)
        : regions_{regions}, scs_{std::move(scs)}, orientation_{orientation},
          values_(regions_ * scs_.size(), 0) {}

    std::size_t regions() const noexcept { return regions_; }
    std::size_t scs() const noexcept { return scs_.size(); }
    const std::vector<std::string> &sc_names() const noexcept { return scs_; }
    Orientation orientation() const noexcept { return orientation_; }

    std::int64_t &operator()(std::size_t k, std::size_t j) { return values_.at(k * scs_.size() + j); }
    std::int64_t operator()(std::size_t k, std::size_t j) const {
        return values_.at(k * scs_.size() + j);
    }

    std::optional<std::size_t> sc_index(std::string_view sc) const {
        auto it = std::find(scs_.begin(), scs_.end(), sc);
        if (it == scs_.end())
            return std::nullopt;
        return static_cast<std::size_t>(it - scs_.begin());
    }

    std::size_t require_sc(std::string_view sc) const {
        if (auto j = sc_index(sc))
            return *j;
        throw ConfigError("unknown subject category '" + std::string{sc} + "'");
    }

    void require_region(std::size_t k) const {
        if (k >= regions_)
            throw ConfigError("region index " + std::to_string(k) + " out of range");
    }

    GainTensor scaled(std::int64_t factor) const {
        GainTensor out = *this;
        for (auto &v : out.values_)
            v *= factor;
        return out;
    }

private:
    std::size_t regions_;
    std::vector<std::string> scs_;
    Orientation orientation_;
    std::vector<std::int64_t> values_;
};

/// Full counting over the cited publication's SC codes. With ExtraOnly,
/// intra-regional gains are left out.
inline GainTensor build_gain_tensor(std::span<const Gain> gains, const Corpus &corpus,
                                    Orientation orientation, GainScope scope = GainScope::All) {
    GainTensor t(corpus.gazetteer().region_count(), corpus.scmap().codes(), orientation);
    std::map<std::string_view, std::size_t> col;
    for (std::size_t j = 0; j < t.scs(); ++j)
        col.emplace(t.sc_names()[j], j);
    for (const auto &g : gains) {
        if (scope == GainScope::ExtraOnly && g.intra)
            continue;
        const auto k = orientation == Orientation::Generated ? g.producing_region.value
                                                             : g.citing_region.value;
        for (const auto &sc : corpus.publication(g.cited).sc_codes)
            ++t(k, col.at(sc));
    }
    return t;
}

/// Balassa ratio kept as its two shares, R = focal / reference, so that
/// swapping the shares negates the index exactly.
struct BalassaRatio {
    enum class State { Finite, Infinite, Undefined };

    State state = State::Undefined;
    double focal_share = 0;     // region's share of SC j
    double reference_share = 0; // comparison group's share of SC j

    bool defined() const noexcept { return state != State::Undefined; }

    double value() const {
        switch (state) {
        case State::Finite:
            return focal_share / reference_share;
        case State::Infinite:
            return std::numeric_limits<double>::infinity();
        default:
            return std::numeric_limits<double>::quiet_NaN();
        }
    }
};

namespace detail {

struct Share {
    enum class Kind { Finite, Infinite, Undefined } kind;
    double value = 0;
};

inline Share make_share(std::int64_t num, std::int64_t den) {
    if (den == 0)
        return {num == 0 ? Share::Kind::Undefined : Share::Kind::Infinite};
    return {Share::Kind::Finite, static_cast<double>(num) / static_cast<double>(den)};
}

} // namespace detail

/// ExcludeFocal: (G_kj / Σ_{i≠j} G_ki) / (Σ_{z≠k} G_zj / Σ_{z≠k} Σ_{i≠j} G_zi).
/// IncludeFocal: the classic index, every sum over all rows and columns.
inline BalassaRatio balassa_ratio(const GainTensor &g, std::size_t k, std::size_t j,
                                  BalassaMode mode = BalassaMode::ExcludeFocal) {
    g.require_region(k);
    if (j >= g.scs())
        throw ConfigError("SC index " + std::to_string(j) + " out of range");
    const bool exclude = mode == BalassaMode::ExcludeFocal;

    std::int64_t row_rest = 0, col_ref = 0, ref_rest = 0;
    for (std::size_t i = 0; i < g.scs(); ++i)
        if (!exclude || i != j)
            row_rest += g(k, i);
    for (std::size_t z = 0; z < g.regions(); ++z) {
        if (exclude && z == k)
            continue;
        col_ref += g(z, j);
        for (std::size_t i = 0; i < g.scs(); ++i)
            if (!exclude || i != j)
                ref_rest += g(z, i);
    }

    using K = detail::Share::Kind;
    const auto focal = detail::make_share(g(k, j), row_rest);
    const auto ref = detail::make_share(col_ref, ref_rest);
    BalassaRatio r{BalassaRatio::State::Undefined, focal.value, ref.value};
    if (focal.kind == K::Undefined || ref.kind == K::Undefined)
        return r;
    if (focal.kind == K::Infinite) {
        if (ref.kind != K::Infinite)
            r.state = BalassaRatio::State::Infinite;
        return r;
    }
    if (ref.kind == K::Infinite) { // finite / infinite
        r.state = BalassaRatio::State::Finite;
        r.focal_share = 0;
        r.reference_share = 1;
        return r;
    }
    if (ref.value == 0.0) {
        if (focal.value > 0.0)
            r.state = BalassaRatio::State::Infinite;
        return r;
    }
    r.state = BalassaRatio::State::Finite;
    return r;
}

/// 100 · tanh(ln R) in the closed form 100 · (R² − 1) / (R² + 1).
inline double spec_index_from_ratio(double ratio) {
    if (std::isnan(ratio) || ratio < 0)
        return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(ratio))
        return 100.0;
    if (ratio > 1.0) {
        const double inv = 1.0 / ratio;
        return 100.0 * ((1.0 - inv) * (1.0 + inv)) / (1.0 + inv * inv);
    }
    return 100.0 * ((ratio - 1.0) * (ratio + 1.0)) / (ratio * ratio + 1.0);
}

/// Index for a ratio given as two shares p / q: 100 · (p² − q²) / (p² + q²).
/// nullopt when the ratio is undefined.
inline std::optional<double> spec_index(const BalassaRatio &r) {
    switch (r.state) {
    case BalassaRatio::State::Undefined:
        return std::nullopt;
    case BalassaRatio::State::Infinite:
        return 100.0;
    case BalassaRatio::State::Finite:
        break;
    }
    const double p = r.focal_share, q = r.reference_share;
    if (p == 0.0)
        return -100.0;
    return 100.0 * ((p - q) * (p + q)) / (p * p + q * q);
}

inline std::optional<double> spec_index(const GainTensor &g, std::size_t k, std::size_t j,
                                        BalassaMode mode = BalassaMode::ExcludeFocal) {
    return spec_index(balassa_ratio(g, k, j, mode));
}

struct SCValue {
    std::string sc;
    double value;
};

/// The n highest defined index values of a region, descending, ties by SC name.
inline std::vector<SCValue> top_specializations(const GainTensor &g, std::size_t region,
                                                std::size_t n,
                                                BalassaMode mode = BalassaMode::ExcludeFocal) {
    if (n == 0)
        throw ConfigError("top-n needs n >= 1");
    g.require_region(region);
    std::vector<SCValue> all;
    for (std::size_t j = 0; j < g.scs(); ++j)
        if (auto v = spec_index(g, region, j, mode))
            all.push_back({g.sc_names()[j], *v});
    std::sort(all.begin(), all.end(), [](const SCValue &a, const SCValue &b) {
        if (a.value != b.value)
            return a.value > b.value;
        return a.sc < b.sc;
    });
    if (all.size() > n)
        all.resize(n);
    return all;
}

struct FieldExtremes {
    RegionId max_region;
    double max_value;
    bool max_tied;
    RegionId min_region;
    double min_value;
    bool min_tied;
};

/// Regions with the highest and lowest index in one SC. Lowest region id wins
/// ties. nullopt when no region has a defined value.
inline std::optional<FieldExtremes> field_extremes(const GainTensor &g, std::string_view sc,
                                                   BalassaMode mode = BalassaMode::ExcludeFocal) {
    const auto j = g.require_sc(sc);
    std::optional<FieldExtremes> out;
    for (std::size_t k = 0; k < g.regions(); ++k) {
        const auto v = spec_index(g, k, j, mode);
        if (!v)
            continue;
        const RegionId r{static_cast<std::uint32_t>(k)};
        if (!out) {
            out = FieldExtremes{r, *v, false, r, *v, false};
            continue;
        }
        if (*v > out->max_value) {
            out->max_region = r;
            out->max_value = *v;
            out->max_tied = false;
        } else if (*v == out->max_value) {
            out->max_tied = true;
        }
        if (*v < out->min_value) {
            out->min_region = r;
            out->min_value = *v;
            out->min_tied = false;
        } else if (*v == out->min_value) {
            out->min_tied = true;
        }
    }
    return out;
}

namespace io {

/// `region,sc,orientation,mode,value`, NA for undefined values.
inline void write_index_table(std::ostream &out, const Gazetteer &gz, const GainTensor &g,
                              BalassaMode mode, bool header = true) {
    if (header)
        out << "region,sc,orientation,mode,value\n";
    for (std::size_t k = 0; k < g.regions(); ++k)
        for (std::size_t j = 0; j < g.scs(); ++j) {
            const auto v = spec_index(g, k, j, mode);
            out << text::csv_join({gz.name(RegionId{static_cast<std::uint32_t>(k)}),
                                   g.sc_names()[j], to_string(g.orientation()), to_string(mode),
                                   v ? text::fixed(*v, 4) : "NA"})
                << '\n';
        }
}

} // namespace io
} // namespace kflow

#endif // KFLOW_SPECIALIZATION_HPP
