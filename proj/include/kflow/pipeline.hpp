#ifndef KFLOW_PIPELINE_HPP
#define KFLOW_PIPELINE_HPP

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kflow/attribution.hpp"
#include "kflow/balance.hpp"
#include "kflow/corpus.hpp"
#include "kflow/flows.hpp"
#include "kflow/specialization.hpp"
#include "kflow/synthkit.hpp"

namespace kflow {

/// An internal consistency check failed (exit status 3).
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Parses "1/2", "0.5" or "1" into an exact rational.
inline Rational parse_rational(std::string_view s) {
    const auto str = text::trim(s);
    auto digits = [](std::string_view d) {
        return !d.empty() && std::all_of(d.begin(), d.end(), [](char c) { return c >= '0' && c <= '9'; });
    };
    try {
        if (auto slash = str.find('/'); slash != std::string::npos) {
            const auto num = str.substr(0, slash), den = str.substr(slash + 1);
            if (digits(num) && digits(den) && std::stoll(den) != 0)
                return Rational{std::stoll(num), std::stoll(den)};
        } else if (auto dot = str.find('.'); dot != std::string::npos) {
            const auto whole = str.substr(0, dot), frac = str.substr(dot + 1);
            if ((whole.empty() || digits(whole)) && digits(frac) && frac.size() <= 15) {
                std::int64_t den = 1;
                for (std::size_t i = 0; i < frac.size(); ++i)
                    den *= 10;
                return Rational{(whole.empty() ? 0 : std::stoll(whole)) * den + std::stoll(frac),
                                den};
            }
        } else if (digits(str)) {
            return Rational{std::stoll(str)};
        }
    } catch (const std::out_of_range &) {
    }
    throw ConfigError("cannot parse '" + str + "' as a fraction");
}

inline std::string to_string(const Rational &r) {
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

struct RunConfig {
    CorpusPaths inputs;
    std::optional<int> cited_year_min;
    std::optional<int> cited_year_max;
    Rational threshold{1, 2};
    DualGainWeight dual_gain_weight = DualGainWeight::Full;
    BalassaMode balassa_mode = BalassaMode::ExcludeFocal;
    GainScope gain_scope = GainScope::All;
    std::string domestic_country = "IT";
    std::string output_dir = "out";
    unsigned threads = 1;

    void validate() const {
        if (cited_year_min && cited_year_max && *cited_year_min > *cited_year_max)
            throw ConfigError("cited-year range is empty");
        if (threshold <= Rational{0} || threshold > Rational{1})
            throw ConfigError("threshold must lie in (0, 1]");
        if (threads == 0)
            throw ConfigError("threads must be >= 1");
        if (domestic_country.empty())
            throw ConfigError("domestic country must be non-empty");
    }

    /// Canonical echo of every setting that influences outputs.
    nlohmann::json to_json() const {
        nlohmann::json j;
        j["publications"] = inputs.publications;
        j["citations"] = inputs.citations;
        j["gazetteer"] = inputs.gazetteer;
        j["scmap"] = inputs.scmap;
        j["cited_year_min"] = cited_year_min ? nlohmann::json(*cited_year_min) : nlohmann::json();
        j["cited_year_max"] = cited_year_max ? nlohmann::json(*cited_year_max) : nlohmann::json();
        j["threshold"] = to_string(threshold);
        j["dual_gain_weight"] = dual_gain_weight == DualGainWeight::Full ? "full" : "half";
        j["balassa_mode"] = to_string(balassa_mode);
        j["gain_scope"] = to_string(gain_scope);
        j["domestic_country"] = domestic_country;
        return j;
    }

    std::string hash() const {
        std::ostringstream os;
        os << std::hex << std::setw(16) << std::setfill('0') << text::fnv1a64(to_json().dump());
        return os.str();
    }
};

/// Loaded corpus plus every derived quantity, computed once.
struct Analysis {
    Corpus corpus;
    std::vector<MadeIn> made_in;
    GainSet flows;
    CountMatrix matrix;

    static Analysis run(const RunConfig &config) {
        config.validate();
        LoadOptions opts{config.cited_year_min, config.cited_year_max};
        Corpus corpus = load_corpus(config.inputs, opts, config.domestic_country);
        auto made_in = attribute_corpus(corpus, config.threshold);
        auto flows = compute_gains(corpus, made_in, config.threads);
        auto matrix = flow_matrix(flows.gains, corpus.gazetteer().region_count());
        Analysis a{std::move(corpus), std::move(made_in), std::move(flows), std::move(matrix)};
        a.check_invariants();
        return a;
    }

    void check_invariants() const {
        for (const auto &pub : corpus.publications()) {
            const auto shares = compute_shares(pub, corpus.gazetteer());
            if (shares.total_weight() != Rational{shares.total_authors})
                throw InvariantError("authorship weight not conserved for '" + pub.id + "'");
        }
        if (matrix.grand_total() != static_cast<std::int64_t>(flows.gains.size()))
            throw InvariantError("flow matrix total differs from gain count");
        std::int64_t balance = 0;
        for (const auto &e : rbkf_overall(matrix))
            balance += e.rbkf();
        if (balance != 0)
            throw InvariantError("regional balances do not sum to zero");
    }

    const Gazetteer &gazetteer() const { return corpus.gazetteer(); }
};

namespace detail {

inline std::ofstream open_output(const std::filesystem::path &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InputError("cannot write '" + path.string() + "'");
    return out;
}

inline std::filesystem::path output_dir(const RunConfig &config) {
    std::filesystem::path dir{config.output_dir};
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw InputError("cannot create output directory '" + dir.string() + "'");
    return dir;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Commands. Each writes its exports into config.output_dir and returns a
// one-paragraph text summary.

inline std::string cmd_validate(const RunConfig &config) {
    config.validate();
    const auto corpus = load_corpus(config.inputs, {config.cited_year_min, config.cited_year_max},
                                    config.domestic_country);
    const auto report = validate_corpus(corpus);
    auto out = detail::open_output(detail::output_dir(config) / "validation.csv");
    out << "pub_id,unlinked_authors,unresolved_addresses,status\n";
    for (const auto &c : report.checks) {
        if (!c.flagged())
            continue;
        const char *status = c.status == LinkStatus::Unlinked     ? "unlinked_excluded"
                             : c.status == LinkStatus::AutoLinked ? "auto_linked"
                                                                  : "linked";
        out << text::csv_join({corpus.publication(c.pub).id, std::to_string(c.unlinked_authors),
                               std::to_string(c.unresolved_domestic), status})
            << '\n';
    }
    std::ostringstream msg;
    msg << "publications: " << corpus.size() << "\nedges: " << corpus.edges().size()
        << "\nexcluded (unlinked authors): " << report.excluded
        << "\nauto-linked single authors: " << report.auto_linked
        << "\nunresolved domestic addresses: " << report.unresolved_addresses
        << "\ndropped edges: unknown citing " << report.load.unknown_citing << ", unknown cited "
        << report.load.unknown_cited << ", duplicate " << report.load.duplicate_edges << ", self "
        << report.load.self_edges << ", out of window " << report.load.out_of_window << '\n';
    return msg.str();
}

inline std::string cmd_assign(const RunConfig &config) {
    const auto a = Analysis::run(config);
    auto out = detail::open_output(detail::output_dir(config) / "attribution.csv");
    io::write_attribution(out, a.corpus, a.made_in);
    const auto c = count_attribution(a.made_in);
    std::ostringstream msg;
    msg << "single: " << c.single << "\ndual: " << c.dual << "\nexcluded: " << c.excluded()
        << " (foreign majority " << c.foreign_majority << ", no majority region "
        << c.no_majority << ", unlinked authors " << c.unlinked << ")\n"
        << "foreign weight exactly one half: " << c.foreign_exactly_half << '\n';
    return msg.str();
}

inline std::string cmd_flows(const RunConfig &config) {
    const auto a = Analysis::run(config);
    const auto dir = detail::output_dir(config);
    const auto &names = a.gazetteer().regions();
    {
        auto out = detail::open_output(dir / "gains.csv");
        io::write_gains(out, a.corpus, a.flows.gains);
    }
    if (config.dual_gain_weight == DualGainWeight::Full) {
        auto out = detail::open_output(dir / "matrix.csv");
        io::write_matrix(out, a.matrix, names);
        auto pct = detail::open_output(dir / "matrix_pct.csv");
        io::write_matrix(pct, row_percentages(a.matrix), names, 1);
    } else {
        const auto weighted =
            flow_matrix<double>(a.flows.gains, names.size(), DualGainWeight::Half);
        auto out = detail::open_output(dir / "matrix.csv");
        io::write_matrix(out, weighted, names, 1);
        auto pct = detail::open_output(dir / "matrix_pct.csv");
        io::write_matrix(pct, row_percentages(weighted), names, 1);
    }
    {
        auto out = detail::open_output(dir / "matrices_by_sc.csv");
        out << "sc,producing_region,citing_region,gains\n";
        for (const auto &[sc, m] : sc_flow_matrices(a.flows.gains, a.corpus))
            for (std::size_t r = 0; r < m.size(); ++r)
                for (std::size_t c = 0; c < m.size(); ++c)
                    if (m(r, c) != 0)
                        out << text::csv_join({sc, names[r], names[c], std::to_string(m(r, c))})
                            << '\n';
    }
    std::int64_t intra = 0;
    for (const auto &g : a.flows.gains)
        intra += g.intra;
    std::ostringstream msg;
    msg << "benefits: " << a.flows.benefits.size() << "\ngains: " << a.flows.gains.size()
        << "\nintra-regional gains: " << intra << '\n';
    return msg.str();
}

inline std::string cmd_balance(const RunConfig &config) {
    const auto a = Analysis::run(config);
    const auto dir = detail::output_dir(config);
    const auto by_sc = sc_flow_matrices(a.flows.gains, a.corpus);
    const auto overall = rbkf_overall(a.matrix);
    {
        auto out = detail::open_output(dir / "rbkf.csv");
        io::write_rbkf<std::int64_t>(out, a.gazetteer(), overall);
    }
    {
        auto out = detail::open_output(dir / "rbkf_sc_summed.csv");
        io::write_rbkf<std::int64_t>(out, a.gazetteer(),
                                     rbkf_sc_summed(by_sc, a.gazetteer().region_count()));
    }
    {
        auto out = detail::open_output(dir / "rbkf_by_sc.csv");
        const auto codes = a.corpus.scmap().codes();
        bool header = true;
        for (std::size_t r = 0; r < a.gazetteer().region_count(); ++r) {
            io::write_rbkf<std::int64_t>(
                out, a.gazetteer(),
                rbkf_by_sc(by_sc, RegionId{static_cast<std::uint32_t>(r)}, codes, a.corpus.scmap()),
                header);
            header = false;
        }
    }
    std::ostringstream msg;
    for (const auto &e : overall)
        msg << a.gazetteer().name(e.region) << ": " << io::format_signed(e.rbkf()) << '\n';
    return msg.str();
}

inline std::string cmd_pairwise(const RunConfig &config, const std::string &region_x,
                                const std::string &region_y) {
    const auto a = Analysis::run(config);
    const auto x = a.gazetteer().require(region_x);
    const auto y = a.gazetteer().require(region_y);
    const auto rows = rbkf_pairwise(sc_flow_matrices(a.flows.gains, a.corpus), x, y);
    auto out = detail::open_output(detail::output_dir(config) / "pairwise.csv");
    io::write_pairwise<std::int64_t>(out, rows);
    std::int64_t xy = 0, yx = 0;
    for (const auto &r : rows) {
        xy += r.x_to_y;
        yx += r.y_to_x;
    }
    std::ostringstream msg;
    msg << region_x << " -> " << region_y << ": " << xy << "\n" << region_y << " -> " << region_x
        << ": " << yx << '\n';
    return msg.str();
}

inline std::string cmd_specialize(const RunConfig &config, std::size_t top_n) {
    const auto a = Analysis::run(config);
    const auto dir = detail::output_dir(config);
    std::ostringstream msg;
    auto out = detail::open_output(dir / "spec_index.csv");
    auto top = detail::open_output(dir / "spec_top.csv");
    top << "region,orientation,rank,sc,value\n";
    bool header = true;
    for (auto orientation : {Orientation::Generated, Orientation::Earned}) {
        const auto tensor = build_gain_tensor(a.flows.gains, a.corpus, orientation, config.gain_scope);
        io::write_index_table(out, a.gazetteer(), tensor, config.balassa_mode, header);
        header = false;
        for (std::size_t k = 0; k < tensor.regions(); ++k) {
            const auto best = top_specializations(tensor, k, top_n, config.balassa_mode);
            for (std::size_t i = 0; i < best.size(); ++i)
                top << text::csv_join({a.gazetteer().name(RegionId{static_cast<std::uint32_t>(k)}),
                                       to_string(orientation), std::to_string(i + 1), best[i].sc,
                                       text::fixed(best[i].value, 1)})
                    << '\n';
        }
    }
    msg << "index table: " << (dir / "spec_index.csv").string() << '\n';
    return msg.str();
}

inline std::string cmd_edges(const RunConfig &config) {
    const auto a = Analysis::run(config);
    const auto result = max_flow_edges(a.matrix);
    auto out = detail::open_output(detail::output_dir(config) / "edges.dot");
    io::write_edges_dot(out, a.gazetteer(), result);
    std::ostringstream msg;
    msg << "edges: " << result.edges.size() << '\n';
    for (auto r : result.omitted)
        msg << "warning: region '" << a.gazetteer().name(r) << "' has no inter-regional flows\n";
    return msg.str();
}

/// Writes a synthetic corpus in the input formats, plus its ground truth.
inline std::string cmd_synth(const synth::GeneratorConfig &gen, const std::string &output_dir) {
    const auto s = synth::generate_corpus(gen);
    RunConfig rc;
    rc.output_dir = output_dir;
    const auto dir = detail::output_dir(rc);
    {
        auto out = detail::open_output(dir / "publications.jsonl");
        io::write_publications(out, s.publications);
    }
    {
        auto out = detail::open_output(dir / "citations.csv");
        synth::io::write_raw_citations(out, s);
    }
    {
        auto out = detail::open_output(dir / "gazetteer.csv");
        synth::io::write_gazetteer(out, s);
    }
    {
        auto out = detail::open_output(dir / "scmap.csv");
        synth::io::write_scmap(out, s);
    }
    {
        auto out = detail::open_output(dir / "ground_truth.json");
        out << synth::io::to_json(s.truth).dump(1) << '\n';
    }
    std::ostringstream msg;
    msg << "publications: " << s.publications.size() << "\nedges: " << s.edges.size()
        << "\nplanted gains: " << s.truth.gains.size() << '\n';
    return msg.str();
}

namespace detail {

inline std::string pct(const Rational &r) {
    return text::fixed(100.0 * boost::rational_cast<double>(r), 1) + "%";
}

inline std::string ratio2(const Rational &r) {
    return text::fixed(boost::rational_cast<double>(r), 2);
}

} // namespace detail

/// Region summary, RBKF and percentage matrix as tab-separated tables in
/// report.txt, and a run manifest in manifest.json.
inline std::string cmd_report(const RunConfig &config) {
    const auto a = Analysis::run(config);
    const auto dir = detail::output_dir(config);
    const auto &gz = a.gazetteer();
    const auto summary = region_summary(a.corpus, a.made_in, a.flows);
    const auto overall = rbkf_overall(a.matrix);
    const auto by_sc = sc_flow_matrices(a.flows.gains, a.corpus);
    const auto sc_summed = rbkf_sc_summed(by_sc, gz.region_count());
    const auto counts = count_attribution(a.made_in);
    std::int64_t intra = 0;
    for (const auto &g : a.flows.gains)
        intra += g.intra;

    std::ostringstream rep;
    rep << "# Totals\n"
        << "publications\t" << a.corpus.size() << "\n"
        << "made_in_single\t" << counts.single << "\n"
        << "made_in_dual\t" << counts.dual << "\n"
        << "excluded\t" << counts.excluded() << "\n"
        << "benefits\t" << a.flows.benefits.size() << "\n"
        << "gains\t" << a.flows.gains.size() << "\n"
        << "intra_gains\t" << intra << "\n\n";

    rep << "# Region summary (total publications by any-address presence)\n"
        << "region\ttotal_pubs\tmade_in\tmade_in_pct\tcited_a\tcited_pct\tbenefits_b\tb_over_a"
           "\tgains_c\tintra\tintra_pct\tc_over_b\n";
    for (const auto &row : summary)
        rep << gz.name(row.region) << '\t' << row.total_pubs << '\t' << row.made_in_pubs << '\t'
            << detail::pct(row.made_in_share()) << '\t' << row.cited_made_in << '\t'
            << detail::pct(row.cited_share()) << '\t' << row.benefits << '\t'
            << detail::ratio2(row.benefits_per_cited()) << '\t' << row.gains << '\t'
            << row.intra_gains << '\t' << detail::pct(row.intra_share()) << '\t'
            << detail::ratio2(row.gains_per_benefit()) << '\n';

    rep << "\n# Regional balance of knowledge flows\n"
        << "region\ta\ta_pct\tcited_rest\tgains_rest\tb\trbkf\ta_sc_summed\tb_sc_summed"
           "\trbkf_sc_summed\n";
    std::int64_t cited_all = 0, gains_all = 0;
    for (const auto &row : summary) {
        cited_all += row.cited_made_in;
        gains_all += row.gains;
    }
    for (std::size_t r = 0; r < overall.size(); ++r) {
        const auto &e = overall[r];
        const auto &row = summary[r];
        const Rational a_share = row.gains ? Rational{e.generated, row.gains} : Rational{0};
        rep << gz.name(e.region) << '\t' << e.generated << '\t' << detail::pct(a_share) << '\t'
            << cited_all - row.cited_made_in << '\t' << gains_all - row.gains << '\t' << e.earned
            << '\t' << io::format_signed(e.rbkf()) << '\t' << sc_summed[r].generated << '\t'
            << sc_summed[r].earned << '\t' << io::format_signed(sc_summed[r].rbkf()) << '\n';
    }

    rep << "\n# Import-export matrix (row percentages; rows generate, columns earn)\n";
    {
        std::ostringstream m;
        io::write_matrix(m, row_percentages(a.matrix), gz.regions(), 1);
        rep << m.str();
    }
    rep << "\n# Import-export matrix (gain counts)\n";
    {
        std::ostringstream m;
        io::write_matrix(m, a.matrix, gz.regions());
        rep << m.str();
    }
    {
        auto out = detail::open_output(dir / "report.txt");
        out << rep.str();
    }

    nlohmann::json manifest;
    manifest["config"] = config.to_json();
    manifest["config_hash"] = config.hash();
    const auto &st = a.corpus.stats();
    manifest["corpus"] = {{"publications", a.corpus.size()},
                          {"edges", a.corpus.edges().size()},
                          {"regions", gz.region_count()},
                          {"subject_categories", a.corpus.scmap().size()}};
    manifest["attribution"] = {{"single", counts.single},
                               {"dual", counts.dual},
                               {"foreign_majority", counts.foreign_majority},
                               {"no_majority_region", counts.no_majority},
                               {"unlinked_authors", counts.unlinked},
                               {"foreign_exactly_half", counts.foreign_exactly_half}};
    manifest["flows"] = {{"benefits", a.flows.benefits.size()},
                         {"gains", a.flows.gains.size()},
                         {"intra_gains", intra}};
    manifest["warnings"] = {{"edges_unknown_citing", st.unknown_citing},
                            {"edges_unknown_cited", st.unknown_cited},
                            {"edges_duplicate", st.duplicate_edges},
                            {"edges_self", st.self_edges},
                            {"edges_out_of_window", st.out_of_window}};
    manifest["notes"] = {"total publications count any-address presence in a region",
                         "rest-of-country columns are informational sums over other regions"};
    {
        auto out = detail::open_output(dir / "manifest.json");
        out << manifest.dump(2) << '\n';
    }

    std::ostringstream msg;
    msg << "benefits: " << a.flows.benefits.size() << "\ngains: " << a.flows.gains.size()
        << "\nintra-regional gains: " << intra << '\n';
    return msg.str();
}

} // namespace kflow

#endif // KFLOW_PIPELINE_HPP
