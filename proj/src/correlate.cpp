#include "dtspp/correlate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "dtspp/csv.hpp"
#include "dtspp/stats.hpp"

namespace dtspp {

PearsonResult pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw data_error("pearson: input lengths differ");

    std::vector<double> xs, ys;
    xs.reserve(x.size());
    ys.reserve(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::isnan(x[i]) || std::isnan(y[i])) continue;
        xs.push_back(x[i]);
        ys.push_back(y[i]);
    }
    const std::size_t n = xs.size();
    if (n < 3) throw numeric_error("pearson: fewer than 3 usable pairs");

    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += xs[i];
        mean_y += ys[i];
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);

    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mean_x;
        const double dy = ys[i] - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw numeric_error("pearson: undefined correlation (constant input)");

    PearsonResult res;
    res.n_used = static_cast<int>(n);
    res.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);

    const double df = static_cast<double>(n - 2);
    const double one_minus_r2 = 1.0 - res.r * res.r;
    if (one_minus_r2 <= 0.0) {
        res.p_value = 0.0;
    } else {
        const double t = res.r * std::sqrt(df / one_minus_r2);
        res.p_value = student_t_two_sided_p(t, df);
    }
    return res;
}

CovariateTable read_covariates(std::istream& in) {
    std::string line;
    if (!read_line(in, line)) throw data_error("covariates file is empty");
    const auto header = split_fields(line);
    if (header.size() < 2) throw data_error("covariates file needs an id column plus covariates");

    CovariateTable table;
    table.names.assign(header.begin() + 1, header.end());

    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (read_line(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != header.size())
            throw data_error("covariates line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        table.region_ids.push_back(fields[0]);
        std::vector<double> row(table.names.size());
        for (std::size_t c = 0; c < table.names.size(); ++c) {
            const auto v = parse_double(fields[c + 1]);
            row[c] = v ? *v : std::numeric_limits<double>::quiet_NaN();
        }
        rows.push_back(std::move(row));
    }

    table.values.resize(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(table.names.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < table.names.size(); ++c)
            table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
    }
    return table;
}

std::vector<CorrelationResult> correlate_all(const Eigen::MatrixXd& loadings,
                                             std::span<const std::string> region_index,
                                             const CovariateTable& covariates,
                                             Warnings* warnings) {
    if (loadings.rows() != static_cast<Eigen::Index>(region_index.size()))
        throw data_error("correlate_all: loadings rows do not match region index");

    std::map<std::string, Eigen::Index> cov_row;
    for (std::size_t i = 0; i < covariates.region_ids.size(); ++i)
        cov_row[covariates.region_ids[i]] = static_cast<Eigen::Index>(i);

    std::vector<CorrelationResult> results;
    const int K = static_cast<int>(loadings.cols());
    for (int k = 0; k < K; ++k) {
        std::vector<CorrelationResult> per_component;
        for (std::size_t c = 0; c < covariates.names.size(); ++c) {
            std::vector<double> x, y;
            x.reserve(region_index.size());
            y.reserve(region_index.size());
            for (std::size_t i = 0; i < region_index.size(); ++i) {
                const auto it = cov_row.find(region_index[i]);
                if (it == cov_row.end()) continue;
                x.push_back(loadings(static_cast<Eigen::Index>(i), k));
                y.push_back(covariates.values(it->second, static_cast<Eigen::Index>(c)));
            }
            try {
                const PearsonResult p = pearson(x, y);
                per_component.push_back(
                    {covariates.names[c], k + 1, p.r, p.p_value, p.n_used});
            } catch (const numeric_error& e) {
                warn(warnings, "covariate '" + covariates.names[c] + "' vs pc" +
                                   std::to_string(k + 1) + " skipped: " + e.what());
            }
        }
        std::stable_sort(per_component.begin(), per_component.end(),
                         [](const CorrelationResult& a, const CorrelationResult& b) {
                             return std::abs(a.r) > std::abs(b.r);
                         });
        results.insert(results.end(), per_component.begin(), per_component.end());
    }
    return results;
}

}  // namespace dtspp
