#include "dtspp/artifacts.hpp"

#include <cstdio>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "dtspp/csv.hpp"

namespace dtspp {

namespace {

std::string padded(const char* prefix, std::size_t i) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%s%04zu", prefix, i);
    return buf;
}

}  // namespace

void write_delta_csv(std::ostream& out, std::span<const DeltaSeries> deltas) {
    if (deltas.empty()) throw data_error("write_delta_csv: nothing to write");
    const std::size_t m = deltas.front().values.size();
    out << "region_id";
    for (std::size_t i = 1; i <= m; ++i) out << ',' << padded("delta_", i);
    out << '\n';
    for (const auto& d : deltas) {
        out << d.region_id;
        for (double v : d.values) out << ',' << format_double(v);
        out << '\n';
    }
}

std::vector<DeltaSeries> read_delta_csv(std::istream& in) {
    std::string line;
    if (!read_line(in, line)) throw data_error("delta CSV is empty");
    const auto header = split_fields(line);
    if (header.size() < 2 || header[0] != "region_id")
        throw data_error("delta CSV: unexpected header");

    std::vector<DeltaSeries> out;
    std::size_t line_no = 1;
    while (read_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != header.size())
            throw data_error("delta CSV line " + std::to_string(line_no) + ": field count mismatch");
        DeltaSeries d;
        d.region_id = fields[0];
        d.values.reserve(fields.size() - 1);
        for (std::size_t i = 1; i < fields.size(); ++i) {
            const auto v = parse_double(fields[i]);
            if (!v)
                throw data_error("delta CSV line " + std::to_string(line_no) +
                                 ": unparseable value '" + fields[i] + "'");
            d.values.push_back(*v);
        }
        out.push_back(std::move(d));
    }
    return out;
}

void write_tspp_csv(std::ostream& out, std::span<const TsppSeries> series) {
    if (series.empty()) throw data_error("write_tspp_csv: nothing to write");
    const std::size_t m = series.front().values.size();
    out << "region_id,year,start_day";
    for (std::size_t i = 1; i <= m; ++i) out << ',' << padded("tspp_", i);
    out << '\n';
    for (const auto& s : series) {
        out << s.region_id << ',' << s.year << ',' << s.start_day_of_year;
        for (double v : s.values) out << ',' << format_double(v);
        out << '\n';
    }
}

std::vector<TsppSeries> read_tspp_csv(std::istream& in) {
    std::string line;
    if (!read_line(in, line)) throw data_error("tspp CSV is empty");
    const auto header = split_fields(line);
    if (header.size() < 4 || header[0] != "region_id")
        throw data_error("tspp CSV: unexpected header");

    std::vector<TsppSeries> out;
    std::size_t line_no = 1;
    while (read_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != header.size())
            throw data_error("tspp CSV line " + std::to_string(line_no) + ": field count mismatch");
        TsppSeries s;
        s.region_id = fields[0];
        s.year = static_cast<int>(parse_long(fields[1], "year"));
        s.start_day_of_year = static_cast<int>(parse_long(fields[2], "start_day"));
        for (std::size_t i = 3; i < fields.size(); ++i) {
            const auto v = parse_double(fields[i]);
            if (!v)
                throw data_error("tspp CSV line " + std::to_string(line_no) +
                                 ": unparseable value '" + fields[i] + "'");
            s.values.push_back(*v);
        }
        out.push_back(std::move(s));
    }
    return out;
}

void write_components_csv(std::ostream& out, const Decomposition& dec,
                          std::span<const int> day_index) {
    out << "day";
    for (int k = 1; k <= dec.K; ++k) out << ",pc" << k;
    out << '\n';
    for (Eigen::Index i = 0; i < dec.components.rows(); ++i) {
        out << day_index[static_cast<std::size_t>(i)];
        for (Eigen::Index k = 0; k < dec.components.cols(); ++k)
            out << ',' << format_double(dec.components(i, k));
        out << '\n';
    }
}

void write_loadings_csv(std::ostream& out, std::span<const std::string> region_index,
                        const Eigen::MatrixXd& raw, const Eigen::MatrixXd& normalized) {
    const Eigen::Index K = raw.cols();
    out << "region_id";
    for (Eigen::Index k = 1; k <= K; ++k) out << ",pc" << k;
    for (Eigen::Index k = 1; k <= K; ++k) out << ",pc" << k << "_norm";
    out << '\n';
    for (Eigen::Index i = 0; i < raw.rows(); ++i) {
        out << region_index[static_cast<std::size_t>(i)];
        for (Eigen::Index k = 0; k < K; ++k) out << ',' << format_double(raw(i, k));
        for (Eigen::Index k = 0; k < K; ++k) out << ',' << format_double(normalized(i, k));
        out << '\n';
    }
}

LoadingsTable read_loadings_csv(std::istream& in) {
    std::string line;
    if (!read_line(in, line)) throw data_error("loadings CSV is empty");
    const auto header = split_fields(line);
    if (header.size() < 3 || header[0] != "region_id" || (header.size() - 1) % 2 != 0)
        throw data_error("loadings CSV: unexpected header");
    const std::size_t K = (header.size() - 1) / 2;

    LoadingsTable table;
    std::vector<std::vector<double>> raw_rows, norm_rows;
    std::size_t line_no = 1;
    while (read_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != header.size())
            throw data_error("loadings CSV line " + std::to_string(line_no) +
                             ": field count mismatch");
        table.region_ids.push_back(fields[0]);
        std::vector<double> raw(K), norm(K);
        for (std::size_t k = 0; k < K; ++k) {
            const auto rv = parse_double(fields[1 + k]);
            const auto nv = parse_double(fields[1 + K + k]);
            if (!rv || !nv)
                throw data_error("loadings CSV line " + std::to_string(line_no) +
                                 ": unparseable value");
            raw[k] = *rv;
            norm[k] = *nv;
        }
        raw_rows.push_back(std::move(raw));
        norm_rows.push_back(std::move(norm));
    }

    table.raw.resize(static_cast<Eigen::Index>(raw_rows.size()), static_cast<Eigen::Index>(K));
    table.normalized.resize(table.raw.rows(), table.raw.cols());
    for (std::size_t i = 0; i < raw_rows.size(); ++i) {
        for (std::size_t k = 0; k < K; ++k) {
            table.raw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = raw_rows[i][k];
            table.normalized(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                norm_rows[i][k];
        }
    }
    return table;
}

void write_r_squared_csv(std::ostream& out, const std::map<std::string, double>& r2) {
    out << "region_id,r_squared\n";
    for (const auto& [region, value] : r2) out << region << ',' << format_double(value) << '\n';
}

void write_colors_csv(std::ostream& out, std::span<const std::string> region_index,
                      const Eigen::MatrixXd& normalized) {
    out << "region_id,hex\n";
    for (Eigen::Index i = 0; i < normalized.rows(); ++i) {
        std::array<double, 3> channels{0.0, 0.0, 0.0};
        for (Eigen::Index k = 0; k < std::min<Eigen::Index>(3, normalized.cols()); ++k)
            channels[static_cast<std::size_t>(k)] = normalized(i, k);
        out << region_index[static_cast<std::size_t>(i)] << ',' << rgb_to_hex(rgb_encode(channels))
            << '\n';
    }
}

void write_variance_curve_csv(std::ostream& out,
                              std::span<const std::pair<int, double>> curve) {
    out << "K,cumulative_explained\n";
    for (const auto& [k, frac] : curve) out << k << ',' << format_double(frac) << '\n';
}

void write_clusters_csv(std::ostream& out, std::span<const std::string> region_index,
                        std::span<const int> labels) {
    out << "region_id,cluster\n";
    for (std::size_t i = 0; i < region_index.size(); ++i)
        out << region_index[i] << ',' << labels[i] << '\n';
}

void write_centroids_csv(std::ostream& out, const Eigen::MatrixXd& centroids) {
    out << "cluster";
    for (Eigen::Index k = 1; k <= centroids.cols(); ++k) out << ",pc" << k << "_norm";
    out << '\n';
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
        out << c;
        for (Eigen::Index k = 0; k < centroids.cols(); ++k)
            out << ',' << format_double(centroids(c, k));
        out << '\n';
    }
}

void write_lisa_csv(std::ostream& out, std::span<const std::string> ids, const LisaResult& lisa) {
    out << "region_id,local_i,pseudo_p,quadrant,significant\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out << ids[i] << ',' << format_double(lisa.local_i[i]) << ','
            << format_double(lisa.pseudo_p[i]) << ',' << to_string(lisa.quadrant[i]) << ','
            << (lisa.significant[i] ? "true" : "false") << '\n';
    }
}

std::string moran_to_json(const std::map<std::string, MoranResult>& results) {
    nlohmann::json doc;
    for (const auto& [name, res] : results) {
        nlohmann::json entry = {
            {"I", res.I},
            {"expected_I", res.expected_I},
            {"variance", res.variance},
            {"z_score", res.z_score},
            {"p_value", res.p_value},
            {"inference", to_string(res.inference)},
        };
        if (res.inference == MoranInference::permutation) entry["permutations"] = res.permutations;
        doc[name] = entry;
    }
    return doc.dump(2) + "\n";
}

void write_correlations_csv(std::ostream& out, std::span<const CorrelationResult> results,
                            int n_components) {
    // Wide table mirroring the usual report layout: one covariate per row,
    // r and p per component, ordered by |r| on the first component.
    struct Row {
        std::vector<double> r;
        std::vector<double> p;
        int n_used = 0;
    };
    std::map<std::string, Row> rows;
    std::vector<std::string> order;
    for (const auto& res : results) {
        auto [it, inserted] = rows.try_emplace(res.covariate);
        if (inserted) {
            it->second.r.assign(static_cast<std::size_t>(n_components),
                                std::numeric_limits<double>::quiet_NaN());
            it->second.p.assign(static_cast<std::size_t>(n_components),
                                std::numeric_limits<double>::quiet_NaN());
        }
        it->second.r[static_cast<std::size_t>(res.component - 1)] = res.r;
        it->second.p[static_cast<std::size_t>(res.component - 1)] = res.p_value;
        it->second.n_used = res.n_used;
        if (res.component == 1) order.push_back(res.covariate);
    }
    // Covariates that were skipped for component 1 still get a row.
    for (const auto& [name, row] : rows) {
        if (std::find(order.begin(), order.end(), name) == order.end()) order.push_back(name);
    }

    out << "covariate";
    for (int k = 1; k <= n_components; ++k) out << ",pc" << k << "_r,pc" << k << "_p";
    out << ",n_used\n";
    for (const auto& name : order) {
        const Row& row = rows.at(name);
        out << name;
        for (int k = 0; k < n_components; ++k) {
            out << ',' << format_double(row.r[static_cast<std::size_t>(k)]) << ','
                << format_scientific(row.p[static_cast<std::size_t>(k)]);
        }
        out << ',' << row.n_used << '\n';
    }
}

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open file for hashing: " + path);
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    char buf[8192];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 0x100000001b3ULL;
        }
        if (got < static_cast<std::streamsize>(sizeof buf)) break;
    }
    return hash;
}

void write_manifest(const std::string& path, const Manifest& manifest) {
    nlohmann::json doc;
    doc["command"] = manifest.command;
    doc["version"] = "0.1.0";
    doc["seed"] = manifest.seed;
    doc["parameters"] = manifest.parameters;
    nlohmann::json inputs;
    for (const auto& p : manifest.inputs) {
        char hex[32];
        std::snprintf(hex, sizeof hex, "fnv1a64:%016llx",
                      static_cast<unsigned long long>(fnv1a64_file(p)));
        inputs[p] = hex;
    }
    doc["inputs"] = inputs;
    nlohmann::json outputs;
    for (const auto& p : manifest.outputs) {
        char hex[32];
        std::snprintf(hex, sizeof hex, "fnv1a64:%016llx",
                      static_cast<unsigned long long>(fnv1a64_file(p)));
        outputs[p] = hex;
    }
    doc["outputs"] = outputs;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write manifest: " + path);
    out << doc.dump(2) << '\n';
}

}  // namespace dtspp
