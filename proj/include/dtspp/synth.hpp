#ifndef DTSPP_SYNTH_HPP
#define DTSPP_SYNTH_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dtspp/correlate.hpp"
#include "dtspp/ingest.hpp"
#include "dtspp/spatial.hpp"

namespace dtspp {

/// Piecewise-linear day-of-year template: linear between anchor days, flat
/// before the first and after the last anchor. Day indices are 1-based.
struct ArchetypeSpec {
    std::string name;
    std::vector<std::pair<int, double>> anchors;

    double value_at(int day_of_year) const;

    /// Drop in early spring that persists through year end.
    static ArchetypeSpec long_term_drop(double depth = 60.0);
    /// No drop; mobility runs slightly below early in the year and above
    /// from spring onward.
    static ArchetypeSpec no_drop(double lift = 25.0);
    /// Spring drop that recovers by early summer and overshoots slightly.
    static ArchetypeSpec short_term_drop(double depth = 50.0);
};

enum class MixingLaw {
    /// Each region sits near one simplex corner (dominant archetype),
    /// groups laid out in contiguous bands of the grid.
    simplex_corner,
    /// Weights drawn uniformly on the simplex.
    simplex_uniform,
};

struct SynthConfig {
    int n_regions = 300;
    int n_days = 365;
    std::vector<ArchetypeSpec> archetypes = {ArchetypeSpec::long_term_drop(),
                                             ArchetypeSpec::no_drop(),
                                             ArchetypeSpec::short_term_drop()};
    MixingLaw mixing = MixingLaw::simplex_corner;
    double corner_concentration = 0.9;  // dominant weight under corner mixing
    double weight_jitter = 0.02;        // simplex-preserving perturbation
    int smoothing_passes = 0;           // grid-neighbor averaging of weights
    double noise_sigma = 0.0;           // daily gaussian noise, minutes
    std::uint64_t seed = 0;
    int subregions_per_region = 1;
    /// Orthogonalize archetypes in the centered post-window space (applied
    /// to the raw templates, so linearity carries the property through the
    /// pipeline). Used by recovery fixtures.
    bool orthogonalize = false;
    int reference_year = 2019;
    int target_year = 2020;
    double baseline_level = 200.0;
    double baseline_seasonal_amp = 20.0;
    int window_radius = 3;
};

struct SynthTruth {
    Eigen::MatrixXd archetypes_delta;  // (n_days - 2*radius) x K, post-window shapes
    Eigen::MatrixXd archetypes_raw;    // n_days x K daily templates
    Eigen::MatrixXd weights;           // n x K, rows on the simplex
    std::vector<int> labels;           // argmax weight per region
    std::vector<std::string> region_ids;
    std::vector<RegionGeometry> grid;
    CovariateTable covariates;
    int grid_rows = 0;
    int grid_cols = 0;
    double signal_rms = 0.0;  // RMS of the noiseless planted delta signal
};

struct SynthPanel {
    std::vector<DailyRecord> reference_records;  // reference-year rows
    std::vector<DailyRecord> target_records;     // target-year rows
    SynthTruth truth;
};

/// Generate a two-year panel with planted latent structure: the reference
/// year is baseline + noise; the target year adds the per-region archetype
/// mixture. Regions are unit squares on a near-square grid so spatial tests
/// have ground truth. Deterministic for a given (config, seed).
SynthPanel generate(const SynthConfig& config);

/// Records rendered as the panel CSV rows the ingest module reads.
void write_panel_csv(std::ostream& out, std::span<const DailyRecord> records);

}  // namespace dtspp

#endif
