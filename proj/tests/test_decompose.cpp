#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "dtspp/decompose.hpp"
#include "dtspp/rng.hpp"

using namespace dtspp;

namespace {

DeltaMatrix matrix_from(const Eigen::MatrixXd& values) {
    DeltaMatrix m;
    m.values = values;
    for (Eigen::Index i = 0; i < values.rows(); ++i)
        m.day_index.push_back(static_cast<int>(i) + 4);
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%05d", static_cast<int>(j) + 1);
        m.region_index.emplace_back(buf);
    }
    return m;
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = gaussian(eng);
    return m;
}

DeltaSeries series(const std::string& id, std::initializer_list<double> values) {
    DeltaSeries d;
    d.region_id = id;
    d.values = values;
    return d;
}

}  // namespace

TEST_CASE("assemble_matrix sorts regions and copies columns") {
    std::vector<DeltaSeries> deltas = {series("00002", {3, 4}), series("00001", {1, 2})};
    const DeltaMatrix m = assemble_matrix(deltas);
    REQUIRE(m.regions() == 2);
    CHECK(m.region_index[0] == "00001");
    CHECK(m.region_index[1] == "00002");
    CHECK(m.values(0, 0) == 1.0);
    CHECK(m.values(1, 1) == 4.0);
    CHECK(m.day_index[0] == 4);
}

TEST_CASE("assemble_matrix: single region is the identity column") {
    std::vector<DeltaSeries> deltas = {series("00009", {5, 6, 7})};
    const DeltaMatrix m = assemble_matrix(deltas);
    CHECK(m.values.col(0)(2) == 7.0);
}

TEST_CASE("assemble_matrix rejects duplicates and spot-checks random entries") {
    std::vector<DeltaSeries> dup = {series("00001", {1}), series("00001", {2})};
    CHECK_THROWS_AS(assemble_matrix(dup), data_error);

    std::mt19937_64 eng(99);
    std::vector<DeltaSeries> many;
    for (int r = 0; r < 100; ++r) {
        DeltaSeries d;
        char buf[16];
        std::snprintf(buf, sizeof buf, "%05d", r + 1);
        d.region_id = buf;
        for (int i = 0; i < 12; ++i) d.values.push_back(uniform_open(eng));
        many.push_back(std::move(d));
    }
    const DeltaMatrix m = assemble_matrix(many);
    for (int probe = 0; probe < 25; ++probe) {
        const auto r = bounded_uint(eng, 100);
        const auto i = bounded_uint(eng, 12);
        CHECK(m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r)) ==
              many[r].values[i]);
    }
}

TEST_CASE("rank-1 matrix explains everything at K=1") {
    std::mt19937_64 eng(5);
    Eigen::VectorXd u(20), v(8);
    for (Eigen::Index i = 0; i < 20; ++i) u(i) = gaussian(eng);
    for (Eigen::Index j = 0; j < 8; ++j) v(j) = gaussian(eng);
    const DeltaMatrix m = matrix_from(u * v.transpose());

    for (const bool center : {true, false}) {
        const Decomposition dec = truncated_svd(m, 1, {center});
        REQUIRE(dec.explained_variance_ratio.size() == 1);
        CHECK(dec.explained_variance_ratio(0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(dec.total_explained == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("diagonal 3x3, uncentered: singular values and explained shares") {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
    d(0, 0) = 3.0;
    d(1, 1) = 2.0;
    d(2, 2) = 1.0;
    const Decomposition dec = truncated_svd(matrix_from(d), 2, {.center = false});
    CHECK(dec.singular_values(0) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(dec.singular_values(1) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(dec.total_explained == doctest::Approx(13.0 / 14.0).epsilon(1e-12));
}

TEST_CASE("truncated_svd validates K and finiteness") {
    const DeltaMatrix m = matrix_from(random_matrix(6, 4, 1));
    CHECK_THROWS_AS(truncated_svd(m, 0), numeric_error);
    CHECK_THROWS_AS(truncated_svd(m, 5), numeric_error);
    DeltaMatrix bad = m;
    bad.values(2, 2) = std::nan("");
    CHECK_THROWS_AS(truncated_svd(bad, 2), numeric_error);
}

TEST_CASE("reconstruction error is non-increasing in K") {
    const DeltaMatrix m = matrix_from(random_matrix(30, 15, 77));
    Eigen::VectorXd means;
    const Eigen::MatrixXd centered = m.values.rowwise() - m.values.colwise().mean();
    double prev = std::numeric_limits<double>::infinity();
    for (int K = 1; K <= 10; ++K) {
        const Decomposition dec = truncated_svd(m, K);
        const double err = (centered - dec.components * dec.loadings.transpose()).norm();
        CHECK(err <= prev + 1e-9);
        prev = err;
    }
}

TEST_CASE("explained variance ratios are non-increasing and sum to total") {
    const DeltaMatrix m = matrix_from(random_matrix(25, 12, 13));
    const Decomposition dec = truncated_svd(m, 6);
    for (Eigen::Index k = 1; k < 6; ++k)
        CHECK(dec.explained_variance_ratio(k) <= dec.explained_variance_ratio(k - 1) + 1e-15);
    CHECK(dec.total_explained ==
          doctest::Approx(dec.explained_variance_ratio.sum()).epsilon(1e-14));
}

TEST_CASE("squared singular values of the full decomposition match the Frobenius norm") {
    const DeltaMatrix m = matrix_from(random_matrix(20, 30, 21));
    const auto curve = explained_variance_curve(m, 20);
    const Eigen::MatrixXd centered = m.values.rowwise() - m.values.colwise().mean();
    CHECK(curve.back().second == doctest::Approx(1.0).epsilon(1e-8));

    // Independent oracle: eigenvalues of the Gram matrix.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(centered.transpose() * centered);
    Eigen::VectorXd evals = eig.eigenvalues().reverse();
    const double total = evals.sum();
    CHECK(total == doctest::Approx(centered.squaredNorm()).epsilon(1e-8));
    double cum = 0.0;
    for (std::size_t k = 0; k < curve.size(); ++k) {
        cum += std::max(evals(static_cast<Eigen::Index>(k)), 0.0) / total;
        CHECK(curve[k].second == doctest::Approx(cum).epsilon(1e-10));
    }
}

TEST_CASE("explained_variance_curve: rank-2 hits 1.0 at K=2 and stays") {
    std::mt19937_64 eng(31);
    Eigen::MatrixXd a = random_matrix(12, 2, 32);
    Eigen::MatrixXd b = random_matrix(2, 7, 33);
    const DeltaMatrix m = matrix_from(a * b);
    const auto curve = explained_variance_curve(m, 6, {.center = false});
    CHECK(curve[0].first == 1);
    CHECK(curve[1].second == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(curve[5].second == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t k = 1; k < curve.size(); ++k)
        CHECK(curve[k].second + 1e-14 >= curve[k - 1].second);

    const auto single = explained_variance_curve(m, 1, {.center = false});
    REQUIRE(single.size() == 1);
    CHECK(single[0].second == doctest::Approx(curve[0].second).epsilon(1e-12));
}

TEST_CASE("component orientation: loading column sums are non-negative") {
    const DeltaMatrix m = matrix_from(random_matrix(40, 25, 55));
    const Decomposition dec = truncated_svd(m, 5);
    for (Eigen::Index k = 0; k < 5; ++k) CHECK(dec.loadings.col(k).sum() >= -1e-12);
}

TEST_CASE("flipping a planted archetype leaves |loadings| and variance unchanged") {
    std::mt19937_64 eng(61);
    Eigen::MatrixXd archetype = random_matrix(30, 1, 62);
    Eigen::MatrixXd weights = random_matrix(10, 1, 63);
    const DeltaMatrix plus = matrix_from(archetype * weights.transpose());
    const DeltaMatrix minus = matrix_from((-archetype) * weights.transpose());

    const Decomposition dp = truncated_svd(plus, 1);
    const Decomposition dm = truncated_svd(minus, 1);
    CHECK(dp.total_explained == doctest::Approx(dm.total_explained).epsilon(1e-12));
    for (Eigen::Index i = 0; i < 10; ++i)
        CHECK(std::abs(dp.loadings(i, 0)) == doctest::Approx(std::abs(dm.loadings(i, 0))).epsilon(1e-10));
}

TEST_CASE("remove_outliers drops exactly the planted region") {
    // 40 well-behaved regions mixing three archetypes, one region planted
    // far outside the loading cloud on component 1.
    std::mt19937_64 eng(71);
    const Eigen::MatrixXd archetypes = random_matrix(50, 3, 72);
    Eigen::MatrixXd weights = random_matrix(41, 3, 73);
    weights.row(40) << 10.0 * std::sqrt(41.0), 0.0, 0.0;  // ~10 sigma along archetype 1
    const DeltaMatrix m = matrix_from(archetypes * weights.transpose());

    const OutlierResult result = remove_outliers(m, 4.0);
    REQUIRE(result.removed.size() == 1);
    CHECK(result.removed[0] == "00041");
    CHECK(result.filtered.regions() == 40);

    const OutlierResult lax =
        remove_outliers(m, std::numeric_limits<double>::infinity());
    CHECK(lax.removed.empty());
}

TEST_CASE("remove_outliers refuses to empty the matrix") {
    // Two regions: standardized loadings are +-1 on every component, so a
    // 0.5-deviation threshold would remove everything.
    Eigen::MatrixXd values = random_matrix(10, 2, 61);
    CHECK_THROWS_AS(remove_outliers(matrix_from(values), 0.5), numeric_error);
}

TEST_CASE("explained_variance_curve validates K_max") {
    const DeltaMatrix m = matrix_from(random_matrix(8, 5, 62));
    CHECK_THROWS_AS(explained_variance_curve(m, 0), numeric_error);
    CHECK_THROWS_AS(explained_variance_curve(m, 6), numeric_error);
}

TEST_CASE("remove_outliers keeps identical regions (zero-variance loadings)") {
    Eigen::MatrixXd values(12, 5);
    std::mt19937_64 eng(81);
    Eigen::VectorXd shape(12);
    for (Eigen::Index i = 0; i < 12; ++i) shape(i) = gaussian(eng);
    for (Eigen::Index j = 0; j < 5; ++j) values.col(j) = shape;
    const OutlierResult result = remove_outliers(matrix_from(values), 4.0);
    CHECK(result.removed.empty());
    CHECK(result.filtered.regions() == 5);
}

TEST_CASE("region_r_squared: exact fit, mean-only fit, and oracle") {
    const DeltaMatrix m = matrix_from(random_matrix(15, 6, 91));

    // Full rank: reconstruction is exact, R^2 = 1.
    const Decomposition full = truncated_svd(m, 6);
    for (const auto& [region, r2] : region_r_squared(m, full))
        CHECK(r2 == doctest::Approx(1.0).epsilon(1e-10));

    // Oracle check at K=2 via direct sums of squares.
    const Decomposition dec = truncated_svd(m, 2);
    const Eigen::MatrixXd recon = dec.components * dec.loadings.transpose();
    const auto r2 = region_r_squared(m, dec);
    for (Eigen::Index j = 0; j < 6; ++j) {
        const Eigen::VectorXd y = m.values.col(j);
        const double mean = y.mean();
        double ss_res = 0.0, ss_tot = 0.0;
        for (Eigen::Index i = 0; i < 15; ++i) {
            const double y_hat = recon(i, j) + dec.column_means(j);
            ss_res += (y(i) - y_hat) * (y(i) - y_hat);
            ss_tot += (y(i) - mean) * (y(i) - mean);
        }
        CHECK(r2.at(m.region_index[static_cast<std::size_t>(j)]) ==
              doctest::Approx(1.0 - ss_res / ss_tot).epsilon(1e-12));
    }
}

TEST_CASE("region_r_squared is zero when the reconstruction is the mean") {
    // A region orthogonal to the fitted subspace: its loading is ~0, so the
    // centered reconstruction is ~0 and R^2 collapses to 0.
    Eigen::MatrixXd values(8, 3);
    values.setZero();
    values.col(0) << 1, -1, 1, -1, 1, -1, 1, -1;
    values.col(1) = 2.0 * values.col(0);
    values.col(2) << 1, 1, -1, -1, 1, 1, -1, -1;  // orthogonal pattern
    const DeltaMatrix m = matrix_from(values);
    const Decomposition dec = truncated_svd(m, 1, {.center = false});
    const auto r2 = region_r_squared(m, dec);
    CHECK(r2.at("00003") == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("region_r_squared flags zero-variance series as NaN") {
    Eigen::MatrixXd values = random_matrix(10, 3, 101);
    values.col(2).setConstant(4.0);
    const DeltaMatrix m = matrix_from(values);
    const Decomposition dec = truncated_svd(m, 2);
    const auto r2 = region_r_squared(m, dec);
    CHECK(std::isnan(r2.at("00003")));
    CHECK(!std::isnan(r2.at("00001")));
}

TEST_CASE("normalize_loadings maps to [0,1], preserves order, handles constants") {
    Decomposition dec;
    dec.loadings.resize(2, 1);
    dec.loadings << 2.0, 4.0;
    dec.K = 1;
    const Eigen::MatrixXd pair = normalize_loadings(dec);
    CHECK(pair(0, 0) == 0.0);
    CHECK(pair(1, 0) == 1.0);

    Decomposition constant;
    constant.loadings = Eigen::MatrixXd::Constant(5, 1, 3.3);
    constant.K = 1;
    Warnings warnings;
    const Eigen::MatrixXd mid = normalize_loadings(constant, &warnings);
    for (Eigen::Index i = 0; i < 5; ++i) CHECK(mid(i, 0) == 0.5);
    CHECK(warnings.size() == 1);

    Decomposition many;
    many.loadings = random_matrix(50, 3, 111);
    many.K = 3;
    const Eigen::MatrixXd norm = normalize_loadings(many);
    for (Eigen::Index k = 0; k < 3; ++k) {
        CHECK(norm.col(k).minCoeff() == 0.0);
        CHECK(norm.col(k).maxCoeff() == 1.0);
        for (Eigen::Index a = 0; a < 50; ++a) {
            for (Eigen::Index b = 0; b < 50; ++b) {
                if (many.loadings(a, k) < many.loadings(b, k)) CHECK(norm(a, k) < norm(b, k));
            }
        }
    }
}

TEST_CASE("rgb_encode rounds half-up and validates range") {
    CHECK(rgb_encode({1.0, 0.0, 0.0}) == std::array<std::uint8_t, 3>{255, 0, 0});
    CHECK(rgb_encode({0.0, 0.0, 0.0}) == std::array<std::uint8_t, 3>{0, 0, 0});
    CHECK(rgb_encode({0.5, 0.5, 0.5}) == std::array<std::uint8_t, 3>{128, 128, 128});
    CHECK_THROWS_AS(rgb_encode({1.1, 0.0, 0.0}), numeric_error);
    CHECK_THROWS_AS(rgb_encode({-0.01, 0.0, 0.0}), numeric_error);
    CHECK(rgb_to_hex({200, 50, 20}) == "#C83214");
}

TEST_CASE("rgb_encode is monotone per channel") {
    std::uint8_t prev = 0;
    for (int i = 0; i <= 100; ++i) {
        const double v = static_cast<double>(i) / 100.0;
        const auto rgb = rgb_encode({v, 0.0, 0.0});
        CHECK(rgb[0] >= prev);
        prev = rgb[0];
    }
}
