#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "qmbs/errors.hpp"
#include "qmbs/randmat.hpp"

using namespace qmbs;

namespace {

// E[X^2] for X ~ Beta(a, b): |q_ij|^2 of a beta-Haar column is Beta(beta/2, beta(m-1)/2).
double beta_second_moment(double a, double b) { return a * (a + 1) / ((a + b) * (a + b + 1)); }

double ks_statistic(std::vector<double> x, std::vector<double> y) {
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    size_t i = 0, j = 0;
    double d = 0;
    while (i < x.size() && j < y.size()) {
        double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] <= v) ++i;
        while (j < y.size() && y[j] <= v) ++j;
        d = std::max(d, std::abs(double(i) / x.size() - double(j) / y.size()));
    }
    return d;
}

}  // namespace

TEST_CASE("haar 1x1 is a random sign") {
    RngStream rng(7, 0);
    int plus = 0;
    for (int i = 0; i < 4000; ++i) {
        CMat q = sample_haar(1, 1, rng);
        CHECK(std::abs(std::abs(q(0, 0)) - 1.0) < 1e-15);
        if (q(0, 0).real() > 0) ++plus;
    }
    CHECK(std::abs(plus - 2000) < 4 * std::sqrt(1000.0));
}

TEST_CASE("haar matrices are orthogonal or unitary") {
    RngStream rng(1, 1);
    for (int beta : {1, 2})
        for (int m : {1, 3, 17, 64}) {
            CMat Q = sample_haar(m, beta, rng);
            CHECK((Q.adjoint() * Q - CMat::Identity(m, m)).cwiseAbs().maxCoeff() < 1e-12);
            if (beta == 1) CHECK(Q.imag().cwiseAbs().maxCoeff() == 0.0);
        }
    CHECK_THROWS_AS(sample_haar(3, 4, rng), ParameterError);
    CHECK_THROWS_AS(sample_haar(0, 1, rng), ParameterError);
}

TEST_CASE("haar fourth moment at m=2 (rotation-angle oracle)") {
    // a 2x2 Haar orthogonal matrix has entries +-cos(theta) with theta uniform
    double oracle = 0;
    const int K = 200000;
    for (int i = 0; i < K; ++i) oracle += std::pow(std::cos(2 * M_PI * (i + 0.5) / K), 4);
    oracle /= K;
    RngStream rng(11, 0);
    double s = 0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) s += std::pow(std::abs(sample_haar(2, 1, rng)(0, 1)), 4);
    CHECK(std::abs(s / draws - oracle) < 0.01);
    CHECK(std::abs(oracle - 0.375) < 1e-9);
}

TEST_CASE("haar fourth moments match beta-distribution oracle") {
    for (int beta : {1, 2})
        for (int m : {2, 4, 8}) {
            RngStream rng(100 + m, beta);
            const int draws = 20000;
            double s = 0, s2 = 0;
            for (int i = 0; i < draws; ++i) {
                CMat Q = sample_haar(m, beta, rng);
                double v = std::pow(std::abs(Q(m - 1, 0)), 4);
                s += v;
                s2 += v * v;
            }
            double mean = s / draws, se = std::sqrt((s2 / draws - mean * mean) / draws);
            double oracle = beta_second_moment(beta / 2.0, beta * (m - 1) / 2.0);
            CHECK(std::abs(mean - oracle) < 3 * se + 1e-12);
        }
}

TEST_CASE("haar entries are centered") {
    RngStream rng(5, 5);
    const int draws = 20000;
    double s = 0, s2 = 0;
    for (int i = 0; i < draws; ++i) {
        double v = sample_haar(4, 1, rng)(1, 2).real();
        s += v;
        s2 += v * v;
    }
    double mean = s / draws, se = std::sqrt((s2 / draws - mean * mean) / draws);
    CHECK(std::abs(mean) < 3 * se);
}

TEST_CASE("haar left invariance: KS on column entries") {
    RngStream rng(9, 0);
    const int m = 4;
    CMat U = sample_haar(m, 1, rng);
    std::vector<double> x, y;
    for (int i = 0; i < 10000; ++i) {
        CMat Q = sample_haar(m, 1, rng);
        CMat Q2 = sample_haar(m, 1, rng);
        x.push_back(Q(0, 0).real());
        y.push_back((U * Q2)(0, 0).real());
    }
    // 1% critical value for two samples of 10^4
    CHECK(ks_statistic(x, y) < 1.63 * std::sqrt(2.0 / 10000));
}

TEST_CASE("streams are deterministic and distinct") {
    RngStream a(42, 3), b(42, 3), c(42, 4);
    CMat qa = sample_haar(5, 2, a), qb = sample_haar(5, 2, b), qc = sample_haar(5, 2, c);
    CHECK((qa - qb).cwiseAbs().maxCoeff() == 0.0);
    CHECK((qa - qc).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("wishart local terms") {
    RngStream rng(3, 0);
    double tr = 0;
    const int draws = 20000;
    for (int i = 0; i < draws; ++i) tr += sample_local_term(LocalKind::wishart(4), 2, rng).trace().real() / 4;
    CHECK(std::abs(tr / draws - 4.0) < 0.05);
    for (int r = 1; r <= 4; ++r) {
        CMat H = sample_local_term(LocalKind::wishart(r), 2, rng);
        CHECK(hermitian_defect(H) < 1e-12);
        Vec ev = eigvals_sym(H);
        double norm = ev.cwiseAbs().maxCoeff();
        int small = 0;
        for (int i = 0; i < 4; ++i) {
            CHECK(ev(i) > -1e-9 * norm);
            if (ev(i) < 1e-9 * norm) ++small;
        }
        CHECK(small == 4 - r);
    }
    CHECK_THROWS_AS(sample_local_term(LocalKind::wishart(5), 2, rng), ParameterError);
    CHECK_THROWS_AS(sample_local_term(LocalKind::wishart(2, 4), 2, rng), ParameterError);
}

TEST_CASE("binary and GOE local terms") {
    RngStream rng(4, 0);
    for (int beta : {1, 2}) {
        CMat H = sample_local_term(LocalKind::binary_pm(beta), 2, rng);
        Vec ev = eigvals_sym(H);
        for (int i = 0; i < 4; ++i) CHECK(std::abs(std::abs(ev(i)) - 1.0) < 1e-12);
    }
    double s = 0, s2 = 0;
    const int draws = 20000;
    for (int i = 0; i < draws; ++i) {
        double t = sample_local_term(LocalKind::goe(), 2, rng).trace().real();
        s += t;
        s2 += t * t;
    }
    double mean = s / draws, se = std::sqrt((s2 / draws - mean * mean) / draws);
    CHECK(std::abs(mean) < 3 * se);
    CMat H = sample_local_term(LocalKind::goe(2), 3, rng);
    CHECK(hermitian_defect(H) < 1e-12);
}

TEST_CASE("explicit and prescribed-spectrum local terms") {
    RngStream rng(6, 0);
    CMat H = sample_local_term(LocalKind::haar_with_eigenvalues({0, 1, 2, 3}), 2, rng);
    Vec ev = eigvals_sym(H);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(ev(i) - i) < 1e-12);
    CMat bad = CMat::Zero(4, 4);
    bad(0, 1) = 1;
    CHECK_THROWS_AS(sample_local_term(LocalKind::explicit_matrix(bad), 2, rng), ValidationError);
    CHECK_THROWS_AS(sample_local_term(LocalKind::haar_with_eigenvalues({1, 2}), 2, rng), ParameterError);
}

TEST_CASE("permutations") {
    RngStream rng(8, 0);
    CHECK(sample_permutation(1, rng) == std::vector<int>{0});
    int id = 0;
    const int draws2 = 10000;
    for (int i = 0; i < draws2; ++i)
        if (sample_permutation(2, rng)[0] == 0) ++id;
    double chi2 = std::pow(id - draws2 / 2.0, 2) / (draws2 / 2.0) * 2;
    CHECK(chi2 < 6.63);  // 1% point of chi^2 with one degree of freedom
    std::map<std::vector<int>, int> freq;
    const int draws3 = 100000;
    for (int i = 0; i < draws3; ++i) ++freq[sample_permutation(3, rng)];
    CHECK(freq.size() == 6);
    for (auto& [p, c] : freq) CHECK(std::abs(double(c) / draws3 - 1.0 / 6) < 0.02);
}

TEST_CASE("symmetric eigenvalues") {
    Vec e = eigvals_sym(Mat(Mat::Identity(3, 3)));
    CHECK((e - Vec::Ones(3)).norm() < 1e-14);
    Mat D = Mat::Zero(2, 2);
    D(0, 0) = 2;
    D(1, 1) = -1;
    e = eigvals_sym(D);
    CHECK(e(0) == doctest::Approx(-1));
    CHECK(e(1) == doctest::Approx(2));
    Mat X(2, 2);
    X << 0, 1, 1, 0;
    e = eigvals_sym(X);
    CHECK(e(0) == doctest::Approx(-1));
    CHECK(e(1) == doctest::Approx(1));
    Mat Y = X;
    Y(0, 1) += 1e-6;
    CHECK_THROWS_AS(eigvals_sym(Y), ValidationError);

    RngStream rng(2, 2);
    CMat H = sample_local_term(LocalKind::goe(2), 3, rng);
    Eigen::SelfAdjointEigenSolver<CMat> es(H);
    Vec ev = eigvals_sym(H);
    for (int i = 0; i < 9; ++i) {
        double res = (H * es.eigenvectors().col(i) - ev(i) * es.eigenvectors().col(i)).norm();
        CHECK(res <= 1e-10 * H.norm());
    }
    CHECK(std::abs(ev.sum() - H.trace().real()) < 1e-10 * std::max(1.0, std::abs(H.trace().real())));
}

TEST_CASE("moment summaries") {
    MomentSummary c = moment_summary({2.5, 2.5, 2.5});
    CHECK(c.variance == doctest::Approx(0));
    CHECK_FALSE(c.shape_defined);
    CHECK(std::isnan(c.excess_kurtosis));

    MomentSummary pm = moment_summary({-1.0, 1.0});
    CHECK(pm.mean == doctest::Approx(0));
    CHECK(pm.variance == doctest::Approx(1));
    CHECK(pm.excess_kurtosis == doctest::Approx(-2));
    CHECK(pm.skewness == doctest::Approx(0));

    // cumulant identities
    MomentSummary s = moment_summary({0.3, 1.7, -2.0, 4.1, 0.0, 2.2});
    CHECK(s.k1 == doctest::Approx(s.m1));
    CHECK(s.k2 == doctest::Approx(s.m2 - s.m1 * s.m1));
    CHECK(s.k3 == doctest::Approx(s.m3 - 3 * s.m2 * s.m1 + 2 * std::pow(s.m1, 3)));
    CHECK(s.excess_kurtosis == doctest::Approx(s.k4 / (s.k2 * s.k2)));

    CHECK_THROWS_AS(moment_summary(std::vector<double>{}), ParameterError);
}
