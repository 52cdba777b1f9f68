// kflow: regional knowledge-flow analytics from publication citations.

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "kflow/pipeline.hpp"

namespace {

enum ExitCode { kOk = 0, kInputError = 1, kConfigError = 2, kInvariantError = 3 };

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Regional knowledge flows from citation linkages: attribution, gains, "
                 "balances (RBKF) and specialization indexes (KOSI/KISI)."};
    app.set_config("--config", "", "key = value configuration file; flags override it");
    app.require_subcommand(1);
    app.fallthrough();

    kflow::RunConfig rc;
    std::string threshold = "1/2";
    std::string dual = "full";
    std::string mode = "exclude_focal";
    std::string scope = "all";
    int year_min = 0, year_max = 0;

    app.add_option("--publications", rc.inputs.publications, "Publications file (JSON lines)");
    app.add_option("--citations", rc.inputs.citations, "Citations file (citing_id,cited_id)");
    app.add_option("--gazetteer", rc.inputs.gazetteer, "Gazetteer file (kind,key1,key2,region)");
    app.add_option("--scmap", rc.inputs.scmap, "Subject category map (sc_code,macro_area)");
    auto *ymin = app.add_option("--cited-year-min", year_min, "Earliest cited publication year");
    auto *ymax = app.add_option("--cited-year-max", year_max, "Latest cited publication year");
    app.add_option("--threshold", threshold, "Made-in share threshold, fraction or decimal")
        ->capture_default_str();
    app.add_option("--dual-gain-weight", dual, "Gains of dual made-in publications: full|half")
        ->check(CLI::IsMember({"full", "half"}))
        ->capture_default_str();
    app.add_option("--balassa-mode", mode, "Balassa sums: exclude_focal|include_focal")
        ->check(CLI::IsMember({"exclude_focal", "include_focal"}))
        ->capture_default_str();
    app.add_option("--gain-scope", scope, "Gains in specialization tensors: all|extra_only")
        ->check(CLI::IsMember({"all", "extra_only"}))
        ->capture_default_str();
    app.add_option("--domestic-country", rc.domestic_country, "ISO country code treated as domestic")
        ->capture_default_str();
    app.add_option("-o,--out", rc.output_dir, "Output directory")->capture_default_str();
    app.add_option("--threads", rc.threads, "Worker threads for the gain computation")
        ->capture_default_str();

    auto *validate = app.add_subcommand("validate", "Check corpus integrity and report exclusions");
    auto *assign = app.add_subcommand("assign", "Classify made-in regions (attribution.csv)");
    auto *flows = app.add_subcommand("flows", "Benefits, gains and flow matrices");
    auto *balance = app.add_subcommand("balance", "Regional balance of knowledge flows");
    auto *pairwise = app.add_subcommand("pairwise", "Bilateral per-SC balance of two regions");
    std::string region_x, region_y;
    pairwise->add_option("--x", region_x, "First region (perspective)")->required();
    pairwise->add_option("--y", region_y, "Second region")->required();
    auto *specialize = app.add_subcommand("specialize", "KOSI / KISI specialization indexes");
    std::size_t top_n = 10;
    specialize->add_option("--top", top_n, "Entries per region in spec_top.csv")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    auto *edges = app.add_subcommand("edges", "Maximum-flow graph edges (Graphviz)");
    auto *report = app.add_subcommand("report", "Summary tables and run manifest");

    auto *synth = app.add_subcommand("synth", "Generate a synthetic corpus with ground truth");
    kflow::synth::GeneratorConfig gen;
    synth->add_option("--seed", gen.seed)->capture_default_str();
    synth->add_option("--pubs", gen.n_pubs)->capture_default_str();
    synth->add_option("--regions", gen.n_regions)->capture_default_str();
    synth->add_option("--scs", gen.n_scs)->capture_default_str();
    synth->add_option("--authors-per-pub", gen.authors_per_pub,
                      "Weights of 1, 2, ... authors per publication")
        ->capture_default_str();
    synth->add_option("--multi-affiliation", gen.multi_affiliation_prob)->capture_default_str();
    synth->add_option("--foreign", gen.foreign_author_prob)->capture_default_str();
    synth->add_option("--cross-region", gen.cross_region_prob)->capture_default_str();
    synth->add_option("--unlinked", gen.unlinked_prob)->capture_default_str();
    synth->add_option("--unresolved", gen.unresolved_prob)->capture_default_str();
    synth->add_option("--citation-density", gen.citation_density)->capture_default_str();
    synth->add_option("--locality", gen.locality)->capture_default_str();
    synth->add_option("--region-skew", gen.region_skew)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (*ymin)
            rc.cited_year_min = year_min;
        if (*ymax)
            rc.cited_year_max = year_max;
        rc.threshold = kflow::parse_rational(threshold);
        rc.dual_gain_weight =
            dual == "half" ? kflow::DualGainWeight::Half : kflow::DualGainWeight::Full;
        rc.balassa_mode = mode == "include_focal" ? kflow::BalassaMode::IncludeFocal
                                                  : kflow::BalassaMode::ExcludeFocal;
        rc.gain_scope = scope == "extra_only" ? kflow::GainScope::ExtraOnly : kflow::GainScope::All;

        if (!synth->parsed()) {
            const std::map<std::string, const std::string *> inputs{
                {"--publications", &rc.inputs.publications},
                {"--citations", &rc.inputs.citations},
                {"--gazetteer", &rc.inputs.gazetteer},
                {"--scmap", &rc.inputs.scmap}};
            for (const auto &[flag, value] : inputs)
                if (value->empty())
                    throw kflow::ConfigError("missing required input " + flag);
        }

        std::string summary;
        if (validate->parsed())
            summary = kflow::cmd_validate(rc);
        else if (assign->parsed())
            summary = kflow::cmd_assign(rc);
        else if (flows->parsed())
            summary = kflow::cmd_flows(rc);
        else if (balance->parsed())
            summary = kflow::cmd_balance(rc);
        else if (pairwise->parsed())
            summary = kflow::cmd_pairwise(rc, region_x, region_y);
        else if (specialize->parsed())
            summary = kflow::cmd_specialize(rc, top_n);
        else if (edges->parsed())
            summary = kflow::cmd_edges(rc);
        else if (report->parsed())
            summary = kflow::cmd_report(rc);
        else if (synth->parsed())
            summary = kflow::cmd_synth(gen, rc.output_dir);
        std::cout << summary;
        return kOk;
    } catch (const kflow::InputError &e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kInputError;
    } catch (const kflow::ConfigError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const kflow::InvariantError &e) {
        std::cerr << "invariant violation: " << e.what() << '\n';
        return kInvariantError;
    } catch (const std::exception &e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInvariantError;
    }
}
