#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "metaor/report.hpp"
#include "metaor/stats.hpp"

using namespace metaor;

TEST_CASE("l1 distance axioms") {
    const auto n01 = [](double x) { return norm_pdf(x); };
    const auto shifted = [](double x) { return norm_pdf(x - 2.0); };
    CHECK(l1_distance(n01, n01, -8.0, 8.0) == doctest::Approx(0.0).epsilon(1e-8));

    // Symmetry.
    const double ab = l1_distance(n01, shifted, -8.0, 10.0);
    const double ba = l1_distance(shifted, n01, -8.0, 10.0);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-10));
    CHECK(ab > 0.0);
    CHECK(ab < 1.0);

    // Quadrature oracle for two unit normals two apart: the overlap is
    // 2 Phi(-1), so the L1 statistic is 1 - 2 Phi(-1).
    CHECK(ab == doctest::Approx(1.0 - 2.0 * norm_cdf(-1.0)).epsilon(1e-4));

    // Disjoint supports give the maximal value.
    const auto left = [](double x) { return (x >= 0.0 && x <= 1.0) ? 1.0 : 0.0; };
    const auto right = [](double x) { return (x >= 2.0 && x <= 3.0) ? 1.0 : 0.0; };
    CHECK(l1_distance(left, right, -1.0, 4.0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("l1 triangle inequality spot checks") {
    Rng rng(9);
    for (int trial = 0; trial < 5; ++trial) {
        const double m1 = rng.uniform(-1.0, 1.0);
        const double m2 = rng.uniform(-1.0, 1.0);
        const double m3 = rng.uniform(-1.0, 1.0);
        const double s1 = rng.uniform(0.5, 2.0);
        const double s2 = rng.uniform(0.5, 2.0);
        const double s3 = rng.uniform(0.5, 2.0);
        const auto f1 = [&](double x) { return norm_pdf((x - m1) / s1) / s1; };
        const auto f2 = [&](double x) { return norm_pdf((x - m2) / s2) / s2; };
        const auto f3 = [&](double x) { return norm_pdf((x - m3) / s3) / s3; };
        const double d12 = l1_distance(f1, f2, -12.0, 12.0);
        const double d23 = l1_distance(f2, f3, -12.0, 12.0);
        const double d13 = l1_distance(f1, f3, -12.0, 12.0);
        CHECK(d13 <= d12 + d23 + 1e-8);
    }
}

TEST_CASE("grid l1 on tabulated densities") {
    std::vector<double> grid, fa, fb;
    for (int i = 0; i <= 2000; ++i) {
        const double x = -8.0 + 16.0 * double(i) / 2000.0;
        grid.push_back(x);
        fa.push_back(norm_pdf(x));
        fb.push_back(norm_pdf(x));
    }
    CHECK(l1_distance_grid(grid, fa, fb) == doctest::Approx(0.0));
    CHECK_THROWS_AS((void)l1_distance_grid({0.0}, {1.0}, {1.0}), Error);
}

TEST_CASE("effective sample size") {
    CHECK(effective_sample_size(0.04, 0.04, 3773.0) == doctest::Approx(3773.0));
    CHECK(effective_sample_size(0.57, 1.0, 1000.0) == doctest::Approx(570.0));
    // Homogeneous of degree one in the total.
    const double a = effective_sample_size(0.3, 0.5, 100.0);
    const double b = effective_sample_size(0.3, 0.5, 700.0);
    CHECK(b == doctest::Approx(7.0 * a));
    CHECK_THROWS_AS((void)effective_sample_size(0.0, 1.0, 10.0), Error);
}

TEST_CASE("kde integrates to one and tracks its sample") {
    Rng rng(21);
    std::vector<double> draws;
    for (int i = 0; i < 20000; ++i) draws.push_back(rng.normal(1.5, 0.7));
    const Kde kde = kde_density(draws, 801, -2.0, 5.0);
    CHECK(kde.bandwidth > 0.0);
    double mass = 0.0;
    for (std::size_t i = 1; i < kde.grid.size(); ++i)
        mass += 0.5 * (kde.density[i - 1] + kde.density[i]) *
                (kde.grid[i] - kde.grid[i - 1]);
    CHECK(mass == doctest::Approx(1.0).epsilon(0.01));

    // Same-sample KDEs coincide; well-separated samples approach L1 = 1.
    CHECK(l1_between_draws(draws, draws) == doctest::Approx(0.0).epsilon(1e-10));
    std::vector<double> far;
    for (int i = 0; i < 20000; ++i) far.push_back(rng.normal(50.0, 0.7));
    CHECK(l1_between_draws(draws, far) > 0.99);
}

TEST_CASE("forest plot: single study row") {
    StudyOrEffect e{"only", 0.3, 0.1, 0.5};
    const auto doc = forest_plot({}, {e});
    CHECK(doc.svg.find("<svg") == 0);
    CHECK(doc.svg.find("only") != std::string::npos);
    // Marker lands at exp(O1) in the text fallback.
    CHECK(doc.text.find("1.350") != std::string::npos);
}

TEST_CASE("forest plot determinism and method ordering") {
    MetaResult dsl;
    dsl.method = Method::DSL;
    dsl.d_mean = -0.08;
    dsl.d_lo = -0.45;
    dsl.d_hi = 0.29;
    MetaResult ml = dsl;
    ml.method = Method::ML;
    MetaResult nb = dsl;
    nb.method = Method::NaiveBayes;
    nb.d_lo = -0.5;
    nb.d_hi = 0.35;
    MetaResult ur = dsl;
    ur.method = Method::UREE;
    ur.d_lo = -0.65;
    ur.d_hi = 0.5;

    const auto doc1 = forest_plot({dsl, ml, nb, ur}, {});
    const auto doc2 = forest_plot({dsl, ml, nb, ur}, {});
    CHECK(doc1.svg == doc2.svg); // byte determinism
    CHECK(doc1.text == doc2.text);

    const auto p_dsl = doc1.text.find("dsl");
    const auto p_ml = doc1.text.find("ml", p_dsl + 3);
    const auto p_nb = doc1.text.find("naive-bayes");
    const auto p_ur = doc1.text.find("ur-ee");
    CHECK(p_dsl < p_ml);
    CHECK(p_ml < p_nb);
    CHECK(p_nb < p_ur);

    CHECK_THROWS_AS((void)forest_plot({}, {}), Error);
}

TEST_CASE("comparison table shape") {
    MetaResult naive;
    naive.method = Method::NaiveBayes;
    naive.d_mean = -0.09;
    naive.d_sd = 0.22;
    naive.sigma2_mean = 0.25;
    naive.sigma2_sd = 0.29;
    naive.m_mean = -2.65;
    naive.m_sd = 0.18;
    naive.tau2_mean = 0.23;
    naive.tau2_sd = 0.17;
    MetaResult uree = naive;
    uree.method = Method::UREE;
    uree.d_mean = -0.07;
    uree.d_sd = 0.29;
    const std::string csv = comparison_table_csv(naive, uree);
    CHECK(csv.find("parameter,mean_naive,mean_uree,sd_naive,sd_uree\n") == 0);
    CHECK(csv.find("\nd,-0.09,-0.07,0.22,0.29\n") != std::string::npos);
    CHECK(csv.find("sigma2,") != std::string::npos);
    CHECK(csv.find("m,") != std::string::npos);
    CHECK(csv.find("tau2,") != std::string::npos);
}

TEST_CASE("quantile helper") {
    std::vector<double> xs = {4.0, 1.0, 3.0, 2.0};
    CHECK(quantile_of(xs, 0.0) == 1.0);
    CHECK(quantile_of(xs, 1.0) == 4.0);
    CHECK(quantile_of(xs, 0.5) == doctest::Approx(2.5));
}
