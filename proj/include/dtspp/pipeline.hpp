#ifndef DTSPP_PIPELINE_HPP
#define DTSPP_PIPELINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dtspp/artifacts.hpp"
#include "dtspp/cluster.hpp"
#include "dtspp/ingest.hpp"
#include "dtspp/spatial.hpp"
#include "dtspp/synth.hpp"

namespace dtspp {

/// Everything a run needs: input paths, schema, analysis parameters, and
/// the output directory. CLI flags and the config file both populate this.
struct PipelineConfig {
    std::vector<std::string> panels;
    std::string geometry;
    std::string covariates;

    PanelSchema schema;
    int reference_year = 2019;
    int target_year = 2020;
    std::string id_property = "GEOID";

    int n_components = 3;  // K
    int n_clusters = 3;    // k
    int window_radius = 3;
    double outlier_std = 4.0;
    int max_gap = 3;
    WeightsMode standardization = WeightsMode::row;
    MoranInference inference = MoranInference::randomization;
    int permutations = 999;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    int n_init = 10;
    int max_iter = 300;
    /// Optional hierarchical comparison in the cluster step, e.g.
    /// "euclidean:ward"; empty disables it.
    std::string hierarchical_spec;

    std::string out_dir = "out";
};

std::string artifact_path(const PipelineConfig& config, const std::string& name);

// Each step reads its documented inputs, writes its artifacts under
// out_dir, and records a manifest_<step>.json. A missing upstream artifact
// raises a data_error naming the subcommand that produces it.
Manifest run_ingest(const PipelineConfig& config);
Manifest run_tspp(const PipelineConfig& config);
Manifest run_delta(const PipelineConfig& config);
Manifest run_decompose(const PipelineConfig& config);
Manifest run_cluster(const PipelineConfig& config);
Manifest run_weights(const PipelineConfig& config);
Manifest run_moran(const PipelineConfig& config);
Manifest run_lisa(const PipelineConfig& config);
Manifest run_correlate(const PipelineConfig& config);
Manifest run_export(const PipelineConfig& config);
Manifest run_synth(const SynthConfig& synth_config, const std::string& out_dir);

/// The full chain: ingest, tspp, delta, decompose, cluster, weights, moran,
/// lisa, correlate, export. Skips the spatial and correlation steps when
/// their inputs are not configured.
Manifest run_pipeline(const PipelineConfig& config);

}  // namespace dtspp

#endif
