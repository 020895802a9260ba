#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "dtspp/pipeline.hpp"

namespace {

// Exit codes: 0 success, 1 usage, 2 data error, 3 numeric failure.
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mobility-change analysis pipeline: rolling-window change measures, "
                 "latent-component extraction, clustering, spatial autocorrelation, and "
                 "covariate correlation"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config");

    dtspp::PipelineConfig config;
    std::string standardization = "row";
    std::string inference = "randomization";
    std::string delimiter = ",";

    app.add_option("--panel", config.panels, "Panel CSV path (repeatable)");
    app.add_option("--geometry", config.geometry, "GeoJSON polygon file");
    app.add_option("--covariates", config.covariates, "Covariate CSV keyed by region_id");
    app.add_option("--out-dir", config.out_dir, "Output directory")->capture_default_str();

    app.add_option("--date-column", config.schema.date_column)->capture_default_str();
    app.add_option("--subregion-column", config.schema.subregion_column)->capture_default_str();
    app.add_option("--value-column", config.schema.value_column)->capture_default_str();
    app.add_option("--region-column", config.schema.region_column,
                   "Take region ids from this column instead of the subregion prefix");
    app.add_option("--date-format", config.schema.date_format)->capture_default_str();
    app.add_option("--region-prefix", config.schema.region_prefix,
                   "Leading characters of the subregion id that form the region id")
        ->capture_default_str();
    app.add_option("--delimiter", delimiter, "Panel field delimiter")->capture_default_str();

    app.add_option("--reference-year", config.reference_year)->capture_default_str();
    app.add_option("--target-year", config.target_year)->capture_default_str();

    app.add_option("-K,--K", config.n_components, "Latent components")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("-k,--k", config.n_clusters, "Clusters")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--window-radius", config.window_radius)
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app.add_option("--outlier-std", config.outlier_std)
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--max-gap", config.max_gap, "Longest repairable masked-day gap")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app.add_option("--permutations", config.permutations)
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--alpha", config.alpha)
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    app.add_option("--standardization", standardization, "Weights standardization")
        ->check(CLI::IsMember({"row", "binary"}))
        ->capture_default_str();
    app.add_option("--inference", inference, "Global Moran inference")
        ->check(CLI::IsMember({"normality", "randomization", "permutation"}))
        ->capture_default_str();
    app.add_option("--seed", config.seed)->capture_default_str();
    app.add_option("--n-init", config.n_init, "k-means restarts")->capture_default_str();
    app.add_option("--max-iter", config.max_iter)->capture_default_str();
    app.add_option("--id-property", config.id_property, "GeoJSON property carrying the region id")
        ->capture_default_str();
    app.add_option("--hierarchical", config.hierarchical_spec,
                   "Also run hierarchical clustering, metric:linkage (e.g. euclidean:ward)");

    dtspp::SynthConfig synth_config;
    std::string mixing = "corner";

    app.add_subcommand("ingest", "Parse panels into per-region daily series and coverage");
    app.add_subcommand("tspp", "Rolling-window smoothing of the ingested series");
    app.add_subcommand("delta", "Year-over-year change series per region");
    app.add_subcommand("decompose",
                       "Outlier screen, truncated SVD, loadings, fit quality, colors");
    app.add_subcommand("cluster", "k-means on normalized loadings");
    app.add_subcommand("weights", "Queen contiguity weights from polygons");
    app.add_subcommand("moran", "Global Moran's I per component");
    app.add_subcommand("lisa", "Local Moran's I per component");
    app.add_subcommand("correlate", "Pearson correlation of loadings vs covariates");
    app.add_subcommand("export", "Join results onto the polygon file");
    auto* synth = app.add_subcommand("synth", "Generate a synthetic panel with planted truth");
    app.add_subcommand("pipeline", "Run the whole chain");

    synth->add_option("--n-regions", synth_config.n_regions)->capture_default_str();
    synth->add_option("--n-days", synth_config.n_days)->capture_default_str();
    synth->add_option("--sigma", synth_config.noise_sigma, "Daily noise, minutes")
        ->capture_default_str();
    synth->add_option("--smoothing-passes", synth_config.smoothing_passes)->capture_default_str();
    synth->add_option("--subregions", synth_config.subregions_per_region)->capture_default_str();
    synth->add_flag("--orthogonalize", synth_config.orthogonalize,
                    "Orthogonalize archetypes in the centered post-window space");
    synth->add_option("--mixing", mixing)->check(CLI::IsMember({"corner", "uniform"}))
        ->capture_default_str();
    synth->add_option("--corner-concentration", synth_config.corner_concentration)
        ->capture_default_str();
    synth->add_option("--jitter", synth_config.weight_jitter)->capture_default_str();
    synth->add_option("--baseline-level", synth_config.baseline_level)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    config.schema.delimiter = delimiter.empty() ? ',' : delimiter[0];
    config.standardization =
        standardization == "row" ? dtspp::WeightsMode::row : dtspp::WeightsMode::binary;
    config.inference = dtspp::inference_from_name(inference);

    synth_config.mixing = mixing == "corner" ? dtspp::MixingLaw::simplex_corner
                                             : dtspp::MixingLaw::simplex_uniform;
    synth_config.seed = config.seed;
    synth_config.reference_year = config.reference_year;
    synth_config.target_year = config.target_year;
    synth_config.window_radius = config.window_radius;

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        if (name == "ingest") {
            dtspp::run_ingest(config);
        } else if (name == "tspp") {
            dtspp::run_tspp(config);
        } else if (name == "delta") {
            dtspp::run_delta(config);
        } else if (name == "decompose") {
            dtspp::run_decompose(config);
        } else if (name == "cluster") {
            dtspp::run_cluster(config);
        } else if (name == "weights") {
            dtspp::run_weights(config);
        } else if (name == "moran") {
            dtspp::run_moran(config);
        } else if (name == "lisa") {
            dtspp::run_lisa(config);
        } else if (name == "correlate") {
            dtspp::run_correlate(config);
        } else if (name == "export") {
            dtspp::run_export(config);
        } else if (name == "synth") {
            dtspp::run_synth(synth_config, config.out_dir);
        } else if (name == "pipeline") {
            dtspp::run_pipeline(config);
        }
    } catch (const dtspp::numeric_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const dtspp::data_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return 0;
}
