#include "dtspp/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "dtspp/csv.hpp"
#include "dtspp/decompose.hpp"
#include "dtspp/geojson.hpp"
#include "dtspp/mobility.hpp"
#include "dtspp/rng.hpp"

namespace dtspp {

namespace fs = std::filesystem;

namespace {

void ensure_out_dir(const PipelineConfig& config) {
    fs::create_directories(config.out_dir);
}

std::ifstream open_input(const std::string& path, const std::string& producer) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::string hint = producer.empty() ? "" : " (produced by the `" + producer + "` subcommand)";
        throw data_error("missing input " + path + hint);
    }
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write " + path);
    return out;
}

void log_warnings(const Warnings& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

void finish(const PipelineConfig& config, Manifest& manifest) {
    manifest.seed = config.seed;
    write_manifest(artifact_path(config, "manifest_" + manifest.command + ".json"), manifest);
}

std::map<std::string, std::string> base_parameters(const PipelineConfig& config) {
    return {
        {"K", std::to_string(config.n_components)},
        {"k", std::to_string(config.n_clusters)},
        {"window_radius", std::to_string(config.window_radius)},
        {"outlier_std", format_double(config.outlier_std)},
        {"max_gap", std::to_string(config.max_gap)},
        {"standardization", config.standardization == WeightsMode::row ? "row" : "binary"},
        {"inference", to_string(config.inference)},
        {"permutations", std::to_string(config.permutations)},
        {"alpha", format_double(config.alpha)},
        {"reference_year", std::to_string(config.reference_year)},
        {"target_year", std::to_string(config.target_year)},
    };
}

std::string series_path(const PipelineConfig& config, int year) {
    return artifact_path(config, "series_" + std::to_string(year) + ".csv");
}

std::string tspp_path(const PipelineConfig& config, int year) {
    return artifact_path(config, "tspp_" + std::to_string(year) + ".csv");
}

/// Loadings aligned onto the weights graph: subset to common regions, then
/// drop islands to fixpoint. Returns the reduced weights (standardized per
/// config) plus per-component value vectors in weights order.
struct AlignedField {
    SpatialWeights weights;
    std::vector<std::string> removed_islands;
    std::vector<std::vector<double>> component_values;  // K vectors
};

AlignedField align_loadings_to_weights(const PipelineConfig& config,
                                       const LoadingsTable& loadings,
                                       const SpatialWeights& raw_weights) {
    std::map<std::string, Eigen::Index> row_of;
    for (std::size_t i = 0; i < loadings.region_ids.size(); ++i)
        row_of[loadings.region_ids[i]] = static_cast<Eigen::Index>(i);

    std::vector<std::string> keep;
    for (const auto& id : raw_weights.ids) {
        if (row_of.count(id)) keep.push_back(id);
    }
    if (keep.size() < 3)
        throw data_error("fewer than 3 regions are present in both loadings and geometry");

    SpatialWeights matched = subset(raw_weights, keep);
    std::vector<double> first(matched.size());
    for (std::size_t i = 0; i < matched.size(); ++i)
        first[i] = loadings.raw(row_of.at(matched.ids[i]), 0);

    IslandDropResult dropped = drop_islands(matched, first);

    AlignedField out;
    out.weights = standardize(dropped.weights, config.standardization);
    out.removed_islands = dropped.removed;
    const Eigen::Index K = loadings.raw.cols();
    out.component_values.resize(static_cast<std::size_t>(K));
    for (Eigen::Index k = 0; k < K; ++k) {
        auto& vals = out.component_values[static_cast<std::size_t>(k)];
        vals.resize(out.weights.size());
        for (std::size_t i = 0; i < out.weights.size(); ++i)
            vals[i] = loadings.raw(row_of.at(out.weights.ids[i]), k);
    }
    return out;
}

}  // namespace

std::string artifact_path(const PipelineConfig& config, const std::string& name) {
    return (fs::path(config.out_dir) / name).string();
}

Manifest run_ingest(const PipelineConfig& config) {
    ensure_out_dir(config);
    if (config.panels.empty()) throw data_error("ingest: no panel files configured");

    PanelSchema schema = config.schema;
    schema.study_years = {config.reference_year, config.target_year};

    std::vector<DailyRecord> records;
    ParseReport report;
    for (const auto& path : config.panels) {
        auto in = open_input(path, "");
        auto part = parse_panel(in, schema, report);
        records.insert(records.end(), part.begin(), part.end());
    }
    for (const auto& err : report.row_errors)
        std::cerr << "row error (line " << err.line_no << "): " << err.message << '\n';
    std::cerr << "parsed " << report.rows_parsed << " rows, " << report.row_errors.size()
              << " malformed, " << report.rows_skipped_year << " outside study years\n";

    CoverageReport coverage = coverage_report(records);
    auto aggregated = aggregate_to_region(records);

    Warnings warnings;
    std::map<int, std::vector<RegionSeries>> per_year;
    for (auto& [region, years] : aggregated) {
        std::vector<std::pair<int, RegionSeries>> prepared;
        bool dropped = false;
        for (const int year : {config.reference_year, config.target_year}) {
            const auto it = years.find(year);
            if (it == years.end()) {
                coverage.mark_dropped(region, "no data for year " + std::to_string(year));
                dropped = true;
                break;
            }
            RegionSeries series =
                is_leap_year(year) ? normalize_leap_year(it->second, &warnings) : it->second;
            if (auto reason = repair_gaps(series, config.max_gap)) {
                coverage.mark_dropped(region, std::to_string(year) + ": " + *reason);
                dropped = true;
                break;
            }
            prepared.emplace_back(year, std::move(series));
        }
        if (dropped) continue;
        for (auto& [year, series] : prepared) per_year[year].push_back(std::move(series));
    }
    log_warnings(warnings);

    Manifest manifest;
    manifest.command = "ingest";
    manifest.parameters = base_parameters(config);
    manifest.inputs = config.panels;

    for (const int year : {config.reference_year, config.target_year}) {
        const std::string matrix_path = series_path(config, year);
        const std::string index_path =
            artifact_path(config, "series_" + std::to_string(year) + ".index.csv");
        auto matrix = open_output(matrix_path);
        auto index = open_output(index_path);
        write_series_bundle(per_year[year], matrix, index);
        manifest.outputs.push_back(matrix_path);
        manifest.outputs.push_back(index_path);
    }

    const std::string coverage_path = artifact_path(config, "coverage.csv");
    auto cov = open_output(coverage_path);
    cov << "region_id,record_count,mean,min,max,stddev,status,reason\n";
    for (const auto& [region, stats] : coverage.per_region) {
        const auto it = coverage.dropped.find(region);
        cov << region << ',' << stats.record_count << ',' << format_double(stats.mean) << ','
            << format_double(stats.min) << ',' << format_double(stats.max) << ','
            << format_double(stats.stddev) << ',' << (it == coverage.dropped.end() ? "kept" : "dropped")
            << ',' << (it == coverage.dropped.end() ? "" : it->second) << '\n';
    }
    cov.close();
    manifest.outputs.push_back(coverage_path);
    std::cerr << "coverage: " << coverage.regions_seen() << " regions seen, "
              << coverage.regions_kept() << " kept\n";

    finish(config, manifest);
    return manifest;
}

Manifest run_tspp(const PipelineConfig& config) {
    ensure_out_dir(config);
    Manifest manifest;
    manifest.command = "tspp";
    manifest.parameters = base_parameters(config);

    for (const int year : {config.reference_year, config.target_year}) {
        const std::string in_path = series_path(config, year);
        auto in = open_input(in_path, "ingest");
        manifest.inputs.push_back(in_path);
        const auto series = read_series_bundle(in);

        std::vector<TsppSeries> smoothed;
        smoothed.reserve(series.size());
        for (const auto& s : series) smoothed.push_back(tspp(s, config.window_radius));

        const std::string out_path = tspp_path(config, year);
        auto out = open_output(out_path);
        write_tspp_csv(out, smoothed);
        manifest.outputs.push_back(out_path);
    }
    finish(config, manifest);
    return manifest;
}

Manifest run_delta(const PipelineConfig& config) {
    ensure_out_dir(config);
    Manifest manifest;
    manifest.command = "delta";
    manifest.parameters = base_parameters(config);

    const std::string ref_path = tspp_path(config, config.reference_year);
    const std::string tgt_path = tspp_path(config, config.target_year);
    auto ref_in = open_input(ref_path, "tspp");
    auto tgt_in = open_input(tgt_path, "tspp");
    manifest.inputs = {ref_path, tgt_path};

    const auto reference = read_tspp_csv(ref_in);
    const auto target = read_tspp_csv(tgt_in);

    std::map<std::string, const TsppSeries*> ref_of;
    for (const auto& s : reference) ref_of[s.region_id] = &s;

    std::vector<DeltaSeries> deltas;
    deltas.reserve(target.size());
    for (const auto& t : target) {
        const auto it = ref_of.find(t.region_id);
        if (it == ref_of.end()) {
            std::cerr << "warning: region " << t.region_id << " has no reference-year series\n";
            continue;
        }
        deltas.push_back(delta_tspp(t, *it->second));
    }
    if (deltas.empty()) throw data_error("delta: no region present in both years");
    std::sort(deltas.begin(), deltas.end(),
              [](const DeltaSeries& a, const DeltaSeries& b) { return a.region_id < b.region_id; });

    const std::string delta_path = artifact_path(config, "delta.csv");
    auto out = open_output(delta_path);
    write_delta_csv(out, deltas);
    manifest.outputs.push_back(delta_path);

    const DeltaSeries overall = aggregate_delta(deltas, "ALL");
    const std::string agg_path = artifact_path(config, "delta_aggregate.csv");
    auto agg_out = open_output(agg_path);
    write_delta_csv(agg_out, std::span<const DeltaSeries>(&overall, 1));
    manifest.outputs.push_back(agg_path);

    finish(config, manifest);
    return manifest;
}

Manifest run_decompose(const PipelineConfig& config) {
    ensure_out_dir(config);
    Manifest manifest;
    manifest.command = "decompose";
    manifest.parameters = base_parameters(config);

    const std::string delta_path = artifact_path(config, "delta.csv");
    auto in = open_input(delta_path, "delta");
    manifest.inputs.push_back(delta_path);
    const auto deltas = read_delta_csv(in);

    DeltaMatrix matrix = assemble_matrix(deltas);
    OutlierResult screened = remove_outliers(matrix, config.outlier_std);
    if (!screened.removed.empty()) {
        std::cerr << "outliers removed (" << screened.removed.size() << "): ";
        for (const auto& id : screened.removed) std::cerr << id << ' ';
        std::cerr << '\n';
    }

    const Decomposition dec = truncated_svd(screened.filtered, config.n_components);
    Warnings warnings;
    const Eigen::MatrixXd normalized = normalize_loadings(dec, &warnings);
    log_warnings(warnings);

    const std::string outliers_path = artifact_path(config, "outliers.csv");
    {
        auto out = open_output(outliers_path);
        out << "region_id\n";
        for (const auto& id : screened.removed) out << id << '\n';
    }
    const std::string components_path = artifact_path(config, "components.csv");
    {
        auto out = open_output(components_path);
        write_components_csv(out, dec, screened.filtered.day_index);
    }
    const std::string loadings_path = artifact_path(config, "loadings.csv");
    {
        auto out = open_output(loadings_path);
        write_loadings_csv(out, screened.filtered.region_index, dec.loadings, normalized);
    }
    const std::string r2_path = artifact_path(config, "r_squared.csv");
    {
        auto out = open_output(r2_path);
        write_r_squared_csv(out, region_r_squared(screened.filtered, dec));
    }
    const std::string colors_path = artifact_path(config, "colors.csv");
    {
        auto out = open_output(colors_path);
        write_colors_csv(out, screened.filtered.region_index, normalized);
    }
    const std::string curve_path = artifact_path(config, "explained_variance.csv");
    {
        const int k_max = static_cast<int>(
            std::min<Eigen::Index>(10, std::min(screened.filtered.days(), screened.filtered.regions())));
        auto out = open_output(curve_path);
        write_variance_curve_csv(out, explained_variance_curve(screened.filtered, k_max));
    }

    std::cerr << "explained variance (K=" << dec.K << "): " << dec.total_explained << '\n';

    manifest.outputs = {outliers_path, components_path, loadings_path,
                        r2_path,       colors_path,     curve_path};
    finish(config, manifest);
    return manifest;
}

Manifest run_cluster(const PipelineConfig& config) {
    ensure_out_dir(config);
    Manifest manifest;
    manifest.command = "cluster";
    manifest.parameters = base_parameters(config);

    const std::string loadings_path = artifact_path(config, "loadings.csv");
    auto in = open_input(loadings_path, "decompose");
    manifest.inputs.push_back(loadings_path);
    const LoadingsTable loadings = read_loadings_csv(in);

    KMeansOptions options;
    options.n_init = config.n_init;
    options.max_iter = config.max_iter;
    const ClusterAssignment assignment =
        kmeans(loadings.normalized, config.n_clusters, config.seed, options);
    std::cerr << "kmeans: inertia " << assignment.inertia << " after "
              << assignment.iterations_run << " iterations\n";

    const std::string clusters_path = artifact_path(config, "clusters.csv");
    {
        auto out = open_output(clusters_path);
        write_clusters_csv(out, loadings.region_ids, assignment.labels);
    }
    const std::string centroids_path = artifact_path(config, "centroids.csv");
    {
        auto out = open_output(centroids_path);
        write_centroids_csv(out, assignment.centroids);
    }
    manifest.outputs = {clusters_path, centroids_path};

    if (!config.hierarchical_spec.empty()) {
        const auto colon = config.hierarchical_spec.find(':');
        if (colon == std::string::npos)
            throw data_error("hierarchical spec must be metric:linkage");
        const Metric metric = metric_from_name(config.hierarchical_spec.substr(0, colon));
        const Linkage linkage = linkage_from_name(config.hierarchical_spec.substr(colon + 1));
        const Dendrogram dendrogram = hierarchical(loadings.normalized, metric, linkage);
        const auto labels = cut_dendrogram(dendrogram, config.n_clusters);

        const std::string dendro_path = artifact_path(config, "dendrogram.txt");
        {
            auto out = open_output(dendro_path);
            out << to_newick(dendrogram) << '\n';
        }
        const std::string hier_path = artifact_path(config, "hier_clusters.csv");
        {
            auto out = open_output(hier_path);
            write_clusters_csv(out, loadings.region_ids, labels);
        }
        manifest.outputs.push_back(dendro_path);
        manifest.outputs.push_back(hier_path);
    }

    finish(config, manifest);
    return manifest;
}

Manifest run_weights(const PipelineConfig& config) {
    ensure_out_dir(config);
    if (config.geometry.empty()) throw data_error("weights: no geometry file configured");

    Manifest manifest;
    manifest.command = "weights";
    manifest.parameters = base_parameters(config);
    manifest.inputs.push_back(config.geometry);

    auto in = open_input(config.geometry, "");
    const auto geometries = read_geojson(in, config.id_property);
    const SpatialWeights w = queen_weights(geometries);
    const auto islands = w.islands();
    if (!islands.empty()) {
        std::cerr << "islands (" << islands.size() << "): ";
        for (const auto& id : islands) std::cerr << id << ' ';
        std::cerr << '\n';
    }

    const std::string weights_path = artifact_path(config, "weights.gal");
    auto out = open_output(weights_path);
    write_adjacency(out, w);
    manifest.outputs = {weights_path};
    finish(config, manifest);
    return manifest;
}

Manifest run_moran(const PipelineConfig& config) {
    ensure_out_dir(config);
    Manifest manifest;
    manifest.command = "moran";
    manifest.parameters = base_parameters(config);

    const std::string loadings_path = artifact_path(config, "loadings.csv");
    const std::string weights_path = artifact_path(config, "weights.gal");
    auto lin = open_input(loadings_path, "decompose");
    auto win = open_input(weights_path, "weights");
    manifest.inputs = {loadings_path, weights_path};

    const LoadingsTable loadings = read_loadings_csv(lin);
    const SpatialWeights raw = read_adjacency(win);
    const AlignedField field = align_loadings_to_weights(config, loadings, raw);
    if (!field.removed_islands.empty()) {
        std::cerr << "islands dropped: ";
        for (const auto& id : field.removed_islands) std::cerr << id << ' ';
        std::cerr << '\n';
    }

    std::map<std::string, MoranResult> results;
    for (std::size_t k = 0; k < field.component_values.size(); ++k) {
        results["pc" + std::to_string(k + 1)] =
            global_moran(field.component_values[k], field.weights, config.inference,
                         config.permutations, derive_seed(config.seed, 500 + k));
    }

    const std::string moran_path = artifact_path(config, "moran.json");
    {
        auto out = open_output(moran_path);
        out << moran_to_json(results);
    }
    manifest.outputs = {moran_path};
    finish(config, manifest);
    return manifest;
}

Manifest run_lisa(const PipelineConfig& config) {
    ensure_out_dir(config);
    Manifest manifest;
    manifest.command = "lisa";
    manifest.parameters = base_parameters(config);

    const std::string loadings_path = artifact_path(config, "loadings.csv");
    const std::string weights_path = artifact_path(config, "weights.gal");
    auto lin = open_input(loadings_path, "decompose");
    auto win = open_input(weights_path, "weights");
    manifest.inputs = {loadings_path, weights_path};

    const LoadingsTable loadings = read_loadings_csv(lin);
    const SpatialWeights raw = read_adjacency(win);
    const AlignedField field = align_loadings_to_weights(config, loadings, raw);

    for (std::size_t k = 0; k < field.component_values.size(); ++k) {
        const LisaResult lisa =
            local_moran(field.component_values[k], field.weights, config.permutations,
                        derive_seed(config.seed, 600 + k), config.alpha);
        const std::string lisa_path =
            artifact_path(config, "lisa_pc" + std::to_string(k + 1) + ".csv");
        auto out = open_output(lisa_path);
        write_lisa_csv(out, field.weights.ids, lisa);
        manifest.outputs.push_back(lisa_path);
    }
    finish(config, manifest);
    return manifest;
}

Manifest run_correlate(const PipelineConfig& config) {
    ensure_out_dir(config);
    if (config.covariates.empty()) throw data_error("correlate: no covariates file configured");

    Manifest manifest;
    manifest.command = "correlate";
    manifest.parameters = base_parameters(config);

    const std::string loadings_path = artifact_path(config, "loadings.csv");
    auto lin = open_input(loadings_path, "decompose");
    auto cin = open_input(config.covariates, "");
    manifest.inputs = {loadings_path, config.covariates};

    const LoadingsTable loadings = read_loadings_csv(lin);
    const CovariateTable covariates = read_covariates(cin);

    Warnings warnings;
    const auto results =
        correlate_all(loadings.raw, loadings.region_ids, covariates, &warnings);
    log_warnings(warnings);

    const std::string corr_path = artifact_path(config, "correlations.csv");
    {
        auto out = open_output(corr_path);
        write_correlations_csv(out, results, static_cast<int>(loadings.raw.cols()));
    }
    manifest.outputs = {corr_path};
    finish(config, manifest);
    return manifest;
}

Manifest run_export(const PipelineConfig& config) {
    ensure_out_dir(config);
    if (config.geometry.empty()) throw data_error("export: no geometry file configured");

    Manifest manifest;
    manifest.command = "export";
    manifest.parameters = base_parameters(config);

    const std::string loadings_path = artifact_path(config, "loadings.csv");
    auto lin = open_input(loadings_path, "decompose");
    manifest.inputs = {config.geometry, loadings_path};
    const LoadingsTable loadings = read_loadings_csv(lin);

    std::vector<PropertyJoin> joins;
    for (Eigen::Index k = 0; k < loadings.normalized.cols(); ++k) {
        PropertyJoin join;
        join.name = "pc" + std::to_string(k + 1);
        for (std::size_t i = 0; i < loadings.region_ids.size(); ++i)
            join.numeric[loadings.region_ids[i]] = loadings.normalized(static_cast<Eigen::Index>(i), k);
        joins.push_back(std::move(join));
    }
    {
        PropertyJoin rgb;
        rgb.name = "rgb";
        for (std::size_t i = 0; i < loadings.region_ids.size(); ++i) {
            std::array<double, 3> channels{0.0, 0.0, 0.0};
            for (Eigen::Index k = 0; k < std::min<Eigen::Index>(3, loadings.normalized.cols()); ++k)
                channels[static_cast<std::size_t>(k)] =
                    loadings.normalized(static_cast<Eigen::Index>(i), k);
            rgb.text[loadings.region_ids[i]] = rgb_to_hex(rgb_encode(channels));
        }
        joins.push_back(std::move(rgb));
    }

    // Optional layers: present when their producing steps ran.
    const std::string r2_path = artifact_path(config, "r_squared.csv");
    if (fs::exists(r2_path)) {
        std::ifstream in(r2_path);
        std::string line;
        read_line(in, line);
        PropertyJoin join;
        join.name = "r_squared";
        while (read_line(in, line)) {
            if (line.empty()) continue;
            const auto fields = split_fields(line);
            const auto v = parse_double(fields[1]);
            join.numeric[fields[0]] = v ? *v : std::numeric_limits<double>::quiet_NaN();
        }
        manifest.inputs.push_back(r2_path);
        joins.push_back(std::move(join));
    }
    const std::string clusters_path = artifact_path(config, "clusters.csv");
    if (fs::exists(clusters_path)) {
        std::ifstream in(clusters_path);
        std::string line;
        read_line(in, line);
        PropertyJoin join;
        join.name = "cluster";
        while (read_line(in, line)) {
            if (line.empty()) continue;
            const auto fields = split_fields(line);
            join.numeric[fields[0]] = static_cast<double>(parse_long(fields[1], "cluster label"));
        }
        manifest.inputs.push_back(clusters_path);
        joins.push_back(std::move(join));
    }
    for (int k = 1; k <= config.n_components; ++k) {
        const std::string lisa_path = artifact_path(config, "lisa_pc" + std::to_string(k) + ".csv");
        if (!fs::exists(lisa_path)) continue;
        std::ifstream in(lisa_path);
        std::string line;
        read_line(in, line);
        PropertyJoin join;
        join.name = "lisa_pc" + std::to_string(k);
        while (read_line(in, line)) {
            if (line.empty()) continue;
            const auto fields = split_fields(line);
            join.text[fields[0]] = fields[4] == "true" ? fields[3] : "ns";
        }
        manifest.inputs.push_back(lisa_path);
        joins.push_back(std::move(join));
    }

    auto gin = open_input(config.geometry, "");
    const std::string map_path = artifact_path(config, "map.geojson");
    {
        auto out = open_output(map_path);
        join_properties(gin, out, config.id_property, joins);
    }
    manifest.outputs = {map_path};
    finish(config, manifest);
    return manifest;
}

Manifest run_synth(const SynthConfig& synth_config, const std::string& out_dir) {
    fs::create_directories(out_dir);
    const SynthPanel panel = generate(synth_config);

    Manifest manifest;
    manifest.command = "synth";
    manifest.seed = synth_config.seed;
    manifest.parameters = {
        {"n_regions", std::to_string(synth_config.n_regions)},
        {"n_days", std::to_string(synth_config.n_days)},
        {"noise_sigma", format_double(synth_config.noise_sigma)},
        {"smoothing_passes", std::to_string(synth_config.smoothing_passes)},
        {"subregions_per_region", std::to_string(synth_config.subregions_per_region)},
        {"orthogonalize", synth_config.orthogonalize ? "true" : "false"},
        {"corner_concentration", format_double(synth_config.corner_concentration)},
    };

    auto path = [&](const std::string& name) { return (fs::path(out_dir) / name).string(); };

    const std::string ref_path =
        path("panel_" + std::to_string(synth_config.reference_year) + ".csv");
    {
        std::ofstream out(ref_path, std::ios::binary);
        write_panel_csv(out, panel.reference_records);
    }
    const std::string tgt_path = path("panel_" + std::to_string(synth_config.target_year) + ".csv");
    {
        std::ofstream out(tgt_path, std::ios::binary);
        write_panel_csv(out, panel.target_records);
    }
    const std::string grid_path = path("grid.geojson");
    {
        std::ofstream out(grid_path, std::ios::binary);
        write_geojson(out, panel.truth.grid, "GEOID");
    }
    const std::string cov_path = path("covariates.csv");
    {
        std::ofstream out(cov_path, std::ios::binary);
        out << "region_id";
        for (const auto& name : panel.truth.covariates.names) out << ',' << name;
        out << '\n';
        for (std::size_t i = 0; i < panel.truth.covariates.region_ids.size(); ++i) {
            out << panel.truth.covariates.region_ids[i];
            for (Eigen::Index c = 0; c < panel.truth.covariates.values.cols(); ++c)
                out << ','
                    << format_double(panel.truth.covariates.values(static_cast<Eigen::Index>(i), c));
            out << '\n';
        }
    }
    const std::string weights_path = path("truth_weights.csv");
    {
        std::ofstream out(weights_path, std::ios::binary);
        out << "region_id";
        for (Eigen::Index k = 1; k <= panel.truth.weights.cols(); ++k) out << ",w" << k;
        out << ",label\n";
        for (std::size_t i = 0; i < panel.truth.region_ids.size(); ++i) {
            out << panel.truth.region_ids[i];
            for (Eigen::Index k = 0; k < panel.truth.weights.cols(); ++k)
                out << ',' << format_double(panel.truth.weights(static_cast<Eigen::Index>(i), k));
            out << ',' << panel.truth.labels[i] << '\n';
        }
    }
    const std::string arch_path = path("truth_archetypes.csv");
    {
        std::ofstream out(arch_path, std::ios::binary);
        out << "day_index";
        for (Eigen::Index k = 1; k <= panel.truth.archetypes_delta.cols(); ++k) out << ",a" << k;
        out << '\n';
        for (Eigen::Index i = 0; i < panel.truth.archetypes_delta.rows(); ++i) {
            out << (i + synth_config.window_radius + 1);
            for (Eigen::Index k = 0; k < panel.truth.archetypes_delta.cols(); ++k)
                out << ',' << format_double(panel.truth.archetypes_delta(i, k));
            out << '\n';
        }
    }

    manifest.outputs = {ref_path, tgt_path, grid_path, cov_path, weights_path, arch_path};
    write_manifest((fs::path(out_dir) / "manifest_synth.json").string(), manifest);
    return manifest;
}

Manifest run_pipeline(const PipelineConfig& config) {
    ensure_out_dir(config);

    // Validate every referenced input up front; a missing file should fail
    // the run before any artifact is written.
    std::vector<std::string> referenced = config.panels;
    if (!config.geometry.empty()) referenced.push_back(config.geometry);
    if (!config.covariates.empty()) referenced.push_back(config.covariates);
    for (const auto& path : referenced) {
        if (!fs::exists(path)) throw data_error("missing input " + path);
    }

    Manifest manifest;
    manifest.command = "pipeline";
    manifest.parameters = base_parameters(config);

    auto absorb = [&manifest](const Manifest& step) {
        for (const auto& p : step.inputs) {
            if (std::find(manifest.inputs.begin(), manifest.inputs.end(), p) ==
                    manifest.inputs.end() &&
                std::find(manifest.outputs.begin(), manifest.outputs.end(), p) ==
                    manifest.outputs.end())
                manifest.inputs.push_back(p);
        }
        for (const auto& p : step.outputs) manifest.outputs.push_back(p);
    };

    absorb(run_ingest(config));
    absorb(run_tspp(config));
    absorb(run_delta(config));
    absorb(run_decompose(config));
    absorb(run_cluster(config));
    if (!config.geometry.empty()) {
        absorb(run_weights(config));
        absorb(run_moran(config));
        absorb(run_lisa(config));
    }
    if (!config.covariates.empty()) absorb(run_correlate(config));
    if (!config.geometry.empty()) absorb(run_export(config));

    finish(config, manifest);
    return manifest;
}

}  // namespace dtspp
