#include "dtspp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "dtspp/csv.hpp"
#include "dtspp/rng.hpp"

namespace dtspp {

namespace {

std::string region_code(int index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%05d", index + 1);
    return buf;
}

std::string subregion_code(const std::string& region, int sub) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%06d1", sub + 1);
    return region + buf;
}

/// Rolling mean with window 2*radius+1 applied to one template column.
Eigen::VectorXd window_smooth(const Eigen::VectorXd& raw, int radius) {
    const int window = 2 * radius + 1;
    const Eigen::Index m = raw.size() - 2 * radius;
    Eigen::VectorXd out(m);
    for (Eigen::Index k = 0; k < m; ++k) out(k) = raw.segment(k, window).mean();
    return out;
}

Eigen::VectorXd center(const Eigen::VectorXd& v) {
    return v.array() - v.mean();
}

std::vector<double> simplex_jitter(std::vector<double> w, double jitter, std::mt19937_64& eng) {
    if (jitter <= 0.0) return w;
    double sum = 0.0;
    for (auto& v : w) {
        v = std::max(0.0, v + (uniform_open(eng) * 2.0 - 1.0) * jitter);
        sum += v;
    }
    if (sum <= 0.0) return w;
    for (auto& v : w) v /= sum;
    return w;
}

}  // namespace

double ArchetypeSpec::value_at(int day_of_year) const {
    if (anchors.empty()) return 0.0;
    if (day_of_year <= anchors.front().first) return anchors.front().second;
    if (day_of_year >= anchors.back().first) return anchors.back().second;
    for (std::size_t a = 1; a < anchors.size(); ++a) {
        if (day_of_year <= anchors[a].first) {
            const auto& [d0, v0] = anchors[a - 1];
            const auto& [d1, v1] = anchors[a];
            const double frac = static_cast<double>(day_of_year - d0) / static_cast<double>(d1 - d0);
            return v0 + (v1 - v0) * frac;
        }
    }
    return anchors.back().second;
}

ArchetypeSpec ArchetypeSpec::long_term_drop(double depth) {
    return {"long_term_drop", {{1, 2.0}, {70, 2.0}, {85, -depth}, {365, -depth}}};
}

ArchetypeSpec ArchetypeSpec::no_drop(double lift) {
    return {"no_drop", {{1, -6.0}, {60, -4.0}, {110, lift}, {365, lift + 4.0}}};
}

ArchetypeSpec ArchetypeSpec::short_term_drop(double depth) {
    return {"short_term_drop",
            {{1, 3.0}, {70, 3.0}, {85, -depth}, {120, -depth * 0.8}, {165, 0.0}, {230, 9.0}, {365, 7.0}}};
}

SynthPanel generate(const SynthConfig& config) {
    const int n = config.n_regions;
    const int K = static_cast<int>(config.archetypes.size());
    if (n < 1) throw numeric_error("synth: n_regions must be >= 1");
    if (K < 1) throw numeric_error("synth: need at least one archetype");
    if (config.n_days < 2 * config.window_radius + 1)
        throw numeric_error("synth: n_days too short for the smoothing window");
    if (config.noise_sigma < 0.0) throw numeric_error("synth: noise sigma must be >= 0");
    if (config.subregions_per_region < 1)
        throw numeric_error("synth: subregions_per_region must be >= 1");

    SynthPanel panel;
    SynthTruth& truth = panel.truth;

    // Grid layout: near-square; cells beyond n_regions stay empty.
    truth.grid_rows = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(n)))));
    truth.grid_cols = (n + truth.grid_rows - 1) / truth.grid_rows;

    truth.region_ids.reserve(static_cast<std::size_t>(n));
    truth.grid.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const std::string id = region_code(i);
        truth.region_ids.push_back(id);
        const double col = static_cast<double>(i % truth.grid_cols);
        const double row = static_cast<double>(i / truth.grid_cols);
        RegionGeometry geom;
        geom.region_id = id;
        geom.polygons.push_back(Polygon{
            {{col, row}, {col + 1, row}, {col + 1, row + 1}, {col, row + 1}, {col, row}}, {}});
        truth.grid.push_back(std::move(geom));
    }

    // Raw daily templates, optionally orthogonalized in the centered
    // post-window space (the space the factorization sees). Gram-Schmidt
    // coefficients are computed there and applied to the raw templates, so
    // linearity carries orthogonality through smoothing and centering.
    truth.archetypes_raw.resize(config.n_days, K);
    for (int k = 0; k < K; ++k) {
        for (int d = 0; d < config.n_days; ++d)
            truth.archetypes_raw(d, k) = config.archetypes[static_cast<std::size_t>(k)].value_at(d + 1);
    }
    if (config.orthogonalize && K > 1) {
        std::vector<Eigen::VectorXd> cs(static_cast<std::size_t>(K));
        for (int k = 0; k < K; ++k)
            cs[static_cast<std::size_t>(k)] =
                center(window_smooth(truth.archetypes_raw.col(k), config.window_radius));
        for (int k = 0; k < K; ++k) {
            const double norm0 = cs[static_cast<std::size_t>(k)].norm();
            for (int j = 0; j < k; ++j) {
                const auto& cj = cs[static_cast<std::size_t>(j)];
                const double alpha = cs[static_cast<std::size_t>(k)].dot(cj) / cj.squaredNorm();
                truth.archetypes_raw.col(k) -= alpha * truth.archetypes_raw.col(j);
                cs[static_cast<std::size_t>(k)] -= alpha * cj;
            }
            const double norm1 = cs[static_cast<std::size_t>(k)].norm();
            if (norm1 < 1e-9 * norm0)
                throw numeric_error("synth: archetype " + std::to_string(k + 1) +
                                    " is linearly dependent on earlier archetypes");
            const double scale = norm0 / norm1;
            truth.archetypes_raw.col(k) *= scale;
            cs[static_cast<std::size_t>(k)] *= scale;
        }
    }

    truth.archetypes_delta.resize(config.n_days - 2 * config.window_radius, K);
    for (int k = 0; k < K; ++k)
        truth.archetypes_delta.col(k) = window_smooth(truth.archetypes_raw.col(k), config.window_radius);

    // Mixing weights on the simplex. Corner mixing assigns contiguous
    // index bands (row-major on the grid, hence spatially contiguous) with
    // deliberately unequal band sizes. Larger bands go to larger-magnitude
    // archetypes so planted component strengths stay well separated.
    truth.weights.resize(n, K);
    truth.labels.resize(static_cast<std::size_t>(n));
    {
        std::mt19937_64 eng(derive_seed(config.seed, 0x77656967687473ULL));
        std::vector<int> rank_of(static_cast<std::size_t>(K), 0);
        {
            std::vector<std::pair<double, int>> by_norm(static_cast<std::size_t>(K));
            for (int k = 0; k < K; ++k) {
                by_norm[static_cast<std::size_t>(k)] = {
                    -center(truth.archetypes_delta.col(k)).norm(), k};
            }
            std::sort(by_norm.begin(), by_norm.end());
            for (int r = 0; r < K; ++r)
                rank_of[static_cast<std::size_t>(by_norm[static_cast<std::size_t>(r)].second)] = r;
        }
        std::vector<double> band_start(static_cast<std::size_t>(K) + 1, 0.0);
        double cum = 0.0;
        const double denom = static_cast<double>(K) * (K + 1) / 2.0;
        for (int g = 0; g < K; ++g) {
            cum += static_cast<double>(K - rank_of[static_cast<std::size_t>(g)]) / denom;
            band_start[static_cast<std::size_t>(g) + 1] = cum;
        }
        for (int i = 0; i < n; ++i) {
            std::vector<double> w(static_cast<std::size_t>(K), 0.0);
            if (config.mixing == MixingLaw::simplex_corner) {
                const double frac = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
                int group = 0;
                while (group + 1 < K && frac >= band_start[static_cast<std::size_t>(group) + 1])
                    ++group;
                const double rest = K > 1 ? (1.0 - config.corner_concentration) / (K - 1) : 0.0;
                for (int k = 0; k < K; ++k) w[static_cast<std::size_t>(k)] = rest;
                w[static_cast<std::size_t>(group)] = K > 1 ? config.corner_concentration : 1.0;
            } else {
                double sum = 0.0;
                for (int k = 0; k < K; ++k) {
                    w[static_cast<std::size_t>(k)] = -std::log(uniform_open(eng));
                    sum += w[static_cast<std::size_t>(k)];
                }
                for (int k = 0; k < K; ++k) w[static_cast<std::size_t>(k)] /= sum;
            }
            w = simplex_jitter(std::move(w), config.weight_jitter, eng);
            for (int k = 0; k < K; ++k) truth.weights(i, k) = w[static_cast<std::size_t>(k)];
        }
    }

    // Optional spatial smoothing: replace each region's weights by the mean
    // over itself and its rook grid neighbors, renormalized to the simplex.
    for (int pass = 0; pass < config.smoothing_passes; ++pass) {
        Eigen::MatrixXd smoothed = truth.weights;
        for (int i = 0; i < n; ++i) {
            const int row = i / truth.grid_cols;
            const int col = i % truth.grid_cols;
            Eigen::RowVectorXd acc = truth.weights.row(i);
            int count = 1;
            const int deltas[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
            for (const auto& d : deltas) {
                const int r2 = row + d[0];
                const int c2 = col + d[1];
                const int j = r2 * truth.grid_cols + c2;
                if (r2 < 0 || c2 < 0 || c2 >= truth.grid_cols || j >= n) continue;
                acc += truth.weights.row(j);
                ++count;
            }
            smoothed.row(i) = acc / static_cast<double>(count);
            const double sum = smoothed.row(i).sum();
            if (sum > 0.0) smoothed.row(i) /= sum;
        }
        truth.weights = std::move(smoothed);
    }
    for (int i = 0; i < n; ++i) {
        Eigen::Index arg = 0;
        truth.weights.row(i).maxCoeff(&arg);
        truth.labels[static_cast<std::size_t>(i)] = static_cast<int>(arg);
    }

    // Planted signal RMS in delta space (drives the sigma-as-fraction knob).
    {
        const Eigen::MatrixXd signal = truth.archetypes_delta * truth.weights.transpose();
        truth.signal_rms = std::sqrt(signal.squaredNorm() /
                                     static_cast<double>(signal.rows() * signal.cols()));
    }

    // Covariates with known linkage to the planted weights.
    {
        std::mt19937_64 eng(derive_seed(config.seed, 0xC0FFEEULL));
        truth.covariates.region_ids = truth.region_ids;
        truth.covariates.names = {"income", "population", "noise_cov"};
        truth.covariates.values.resize(n, 3);
        for (int i = 0; i < n; ++i) {
            truth.covariates.values(i, 0) = 50.0 + 40.0 * truth.weights(i, 0) + 2.0 * gaussian(eng);
            truth.covariates.values(i, 1) =
                10.0 + 30.0 * truth.weights(i, std::min(1, K - 1)) + 2.0 * gaussian(eng);
            truth.covariates.values(i, 2) = gaussian(eng);
        }
    }

    // Daily panels. The target year carries the archetype mixture; noise is
    // drawn per region-year from derived seeds so generation order is free.
    const bool target_leap = is_leap_year(config.target_year);
    auto baseline = [&](int j) {
        return config.baseline_level +
               config.baseline_seasonal_amp *
                   std::sin(6.283185307179586 * static_cast<double>(j) / 365.0);
    };

    for (int i = 0; i < n; ++i) {
        const std::string& region = truth.region_ids[static_cast<std::size_t>(i)];
        std::mt19937_64 eng_ref(derive_seed(config.seed, 2 * static_cast<std::uint64_t>(i)));
        std::mt19937_64 eng_tgt(derive_seed(config.seed, 2 * static_cast<std::uint64_t>(i) + 1));

        std::vector<double> ref_vals, tgt_vals;
        ref_vals.reserve(static_cast<std::size_t>(config.n_days));
        for (int j = 0; j < config.n_days; ++j)
            ref_vals.push_back(baseline(j) + config.noise_sigma * gaussian(eng_ref));

        const int target_days = target_leap ? config.n_days + 1 : config.n_days;
        tgt_vals.reserve(static_cast<std::size_t>(target_days));
        for (int d = 0; d < target_days; ++d) {
            // Normalized day index: Feb 29 (day-of-year 60 of a leap year)
            // reuses the previous day's planted value and is discarded by
            // leap normalization downstream.
            int j;
            if (target_leap && d == 59) {
                j = 58;
            } else if (target_leap && d > 59) {
                j = d - 1;
            } else {
                j = d;
            }
            double mixture = 0.0;
            for (int k = 0; k < K; ++k) mixture += truth.weights(i, k) * truth.archetypes_raw(j, k);
            tgt_vals.push_back(baseline(j) + mixture + config.noise_sigma * gaussian(eng_tgt));
        }

        auto emit = [&](std::vector<DailyRecord>& sink, int year, const std::vector<double>& vals) {
            for (int d = 0; d < static_cast<int>(vals.size()); ++d) {
                if (vals[static_cast<std::size_t>(d)] < 0.0)
                    throw numeric_error(
                        "synth: negative dwell minutes generated; raise baseline_level or lower "
                        "noise/archetype depth");
                // Day-of-year -> calendar date.
                int doy = d + 1;
                int month = 1;
                int remaining = doy;
                while (remaining > days_in_month(year, month)) {
                    remaining -= days_in_month(year, month);
                    ++month;
                }
                const Date date{year, month, remaining};
                for (int s = 0; s < config.subregions_per_region; ++s) {
                    sink.push_back(
                        {date, subregion_code(region, s), region, vals[static_cast<std::size_t>(d)]});
                }
            }
        };
        emit(panel.reference_records, config.reference_year, ref_vals);
        emit(panel.target_records, config.target_year, tgt_vals);
    }
    return panel;
}

void write_panel_csv(std::ostream& out, std::span<const DailyRecord> records) {
    out << "date,subregion,value\n";
    for (const auto& rec : records) {
        out << format_date(rec.date) << ',' << rec.subregion_id << ',' << format_double(rec.value)
            << '\n';
    }
}

}  // namespace dtspp
