#include "qmbs/randmat.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>
#include <numeric>

#include "qmbs/errors.hpp"

namespace qmbs {

void check_beta(int beta) {
    if (beta != 1 && beta != 2) throw ParameterError("beta must be 1 or 2");
}

LocalKind LocalKind::wishart(int r, int beta) {
    LocalKind k;
    k.kind = Kind::Wishart;
    k.rank = r;
    k.beta = beta;
    return k;
}

LocalKind LocalKind::goe(int beta) {
    LocalKind k;
    k.kind = Kind::GOE;
    k.beta = beta;
    return k;
}

LocalKind LocalKind::binary_pm(int beta) {
    LocalKind k;
    k.kind = Kind::BinaryPM;
    k.beta = beta;
    return k;
}

LocalKind LocalKind::haar_with_eigenvalues(std::vector<double> ev, int beta) {
    LocalKind k;
    k.kind = Kind::HaarWithEigenvalues;
    k.eigenvalues = std::move(ev);
    k.beta = beta;
    return k;
}

LocalKind LocalKind::explicit_matrix(CMat h) {
    LocalKind k;
    k.kind = Kind::ExplicitMatrix;
    k.beta = h.imag().cwiseAbs().maxCoeff() > 0 ? 2 : 1;
    k.matrix = std::move(h);
    return k;
}

CMat sample_gaussian(int rows, int cols, int beta, RngStream& rng) {
    check_beta(beta);
    CMat G(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) {
            double re = rng.normal();
            double im = beta == 2 ? rng.normal() : 0.0;
            G(i, j) = cplx(re, im);
        }
    return G;
}

Mat sample_haar_real(int m, RngStream& rng) {
    if (m < 1) throw ParameterError("matrix size must be >= 1");
    Mat G(m, m);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) G(i, j) = rng.normal();
    Eigen::HouseholderQR<Mat> qr(G);
    Mat Q = qr.householderQ();
    const Mat& R = qr.matrixQR();
    for (int j = 0; j < m; ++j)
        if (R(j, j) < 0) Q.col(j) = -Q.col(j);
    return Q;
}

CMat sample_haar(int m, int beta, RngStream& rng) {
    check_beta(beta);
    if (m < 1) throw ParameterError("matrix size must be >= 1");
    if (beta == 1) return sample_haar_real(m, rng).cast<cplx>();
    CMat G = sample_gaussian(m, m, 2, rng);
    Eigen::HouseholderQR<CMat> qr(G);
    CMat Q = qr.householderQ();
    const CMat& R = qr.matrixQR();
    for (int j = 0; j < m; ++j) {
        double a = std::abs(R(j, j));
        if (a > 0) Q.col(j) *= R(j, j) / a;
    }
    return Q;
}

CMat sample_local_term(const LocalKind& kind, int d, RngStream& rng) {
    check_beta(kind.beta);
    if (d < 2) throw ParameterError("local dimension must be >= 2");
    const int n = d * d;
    switch (kind.kind) {
        case LocalKind::Kind::Wishart: {
            if (kind.rank < 1 || kind.rank > n) throw ParameterError("Wishart rank must satisfy 1 <= r <= d^2");
            CMat W = sample_gaussian(kind.rank, n, kind.beta, rng);
            CMat H = W.adjoint() * W;
            return (H + H.adjoint()) * 0.5;
        }
        case LocalKind::Kind::GOE: {
            CMat G = sample_gaussian(n, n, kind.beta, rng);
            return (G + G.adjoint()) * 0.5;
        }
        case LocalKind::Kind::BinaryPM: {
            CMat Q = sample_haar(n, kind.beta, rng);
            Vec s(n);
            for (int i = 0; i < n; ++i) s(i) = rng.coin() ? 1.0 : -1.0;
            CMat H = Q * s.cast<cplx>().asDiagonal() * Q.adjoint();
            return (H + H.adjoint()) * 0.5;
        }
        case LocalKind::Kind::HaarWithEigenvalues: {
            if (static_cast<int>(kind.eigenvalues.size()) != n)
                throw ParameterError("HaarWithEigenvalues needs d^2 eigenvalues");
            CMat Q = sample_haar(n, kind.beta, rng);
            Vec s = Eigen::Map<const Vec>(kind.eigenvalues.data(), n);
            CMat H = Q * s.cast<cplx>().asDiagonal() * Q.adjoint();
            return (H + H.adjoint()) * 0.5;
        }
        case LocalKind::Kind::ExplicitMatrix: {
            if (kind.matrix.rows() != n || kind.matrix.cols() != n)
                throw ParameterError("explicit local term must be d^2 x d^2");
            if (hermitian_defect(kind.matrix) > 1e-10 * std::max(1.0, kind.matrix.norm()))
                throw ValidationError("explicit local term is not Hermitian");
            return kind.matrix;
        }
    }
    throw ParameterError("unknown local kind");
}

std::vector<int> sample_permutation(int m, RngStream& rng) {
    if (m < 1) throw ParameterError("permutation size must be >= 1");
    std::vector<int> p(m);
    std::iota(p.begin(), p.end(), 0);
    for (int i = m - 1; i > 0; --i) {
        int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
        std::swap(p[i], p[j]);
    }
    return p;
}

double hermitian_defect(const CMat& M) {
    if (M.rows() != M.cols()) throw ValidationError("matrix is not square");
    if (M.size() == 0) return 0.0;
    return (M - M.adjoint()).cwiseAbs().maxCoeff();
}

Vec eigvals_sym(const CMat& M) {
    double scale = std::max(1.0, M.size() ? M.cwiseAbs().maxCoeff() : 0.0);
    if (hermitian_defect(M) > 1e-10 * scale) throw ValidationError("matrix is not Hermitian");
    if (M.imag().cwiseAbs().maxCoeff() == 0.0) return eigvals_sym(Mat(M.real()));
    CMat S = (M + M.adjoint()) * 0.5;
    Eigen::SelfAdjointEigenSolver<CMat> es(S, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("eigensolver failed");
    return es.eigenvalues();
}

Vec eigvals_sym(const Mat& M) {
    if (M.rows() != M.cols()) throw ValidationError("matrix is not square");
    if (M.size() == 0) return Vec();
    double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw ValidationError("matrix is not symmetric");
    Mat S = (M + M.transpose()) * 0.5;
    Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("eigensolver failed");
    return es.eigenvalues();
}

MomentSummary summary_from_raw(double m1, double m2, double m3, double m4) {
    MomentSummary s;
    s.m1 = m1;
    s.m2 = m2;
    s.m3 = m3;
    s.m4 = m4;
    s.k1 = m1;
    s.k2 = m2 - m1 * m1;
    s.k3 = m3 - 3 * m2 * m1 + 2 * m1 * m1 * m1;
    double c4 = m4 - 4 * m3 * m1 + 6 * m2 * m1 * m1 - 3 * m1 * m1 * m1 * m1;  // central 4th
    s.k4 = c4 - 3 * s.k2 * s.k2;
    s.mean = s.k1;
    s.variance = s.k2;
    double scale = std::max({1.0, std::abs(m1) * std::abs(m1), std::abs(m2)});
    s.shape_defined = s.k2 > 1e-14 * scale;
    if (s.shape_defined) {
        s.skewness = s.k3 / std::pow(s.k2, 1.5);
        s.excess_kurtosis = s.k4 / (s.k2 * s.k2);
    } else {
        s.skewness = std::nan("");
        s.excess_kurtosis = std::nan("");
    }
    return s;
}

MomentSummary moment_summary(const std::vector<double>& samples) {
    return moment_summary(samples, std::vector<double>(samples.size(), 1.0));
}

MomentSummary moment_summary(const std::vector<double>& samples, const std::vector<double>& weights) {
    if (samples.empty()) throw ParameterError("moment_summary needs at least one sample");
    if (weights.size() != samples.size()) throw ParameterError("weights and samples differ in length");
    double W = 0;
    for (double w : weights) W += w;
    if (!(W > 0)) throw ParameterError("total weight must be positive");
    // shift by the mean before forming powers to limit cancellation
    double mu = 0;
    for (size_t i = 0; i < samples.size(); ++i) mu += weights[i] * samples[i];
    mu /= W;
    double c2 = 0, c3 = 0, c4 = 0;
    for (size_t i = 0; i < samples.size(); ++i) {
        double x = samples[i] - mu, w = weights[i] / W;
        c2 += w * x * x;
        c3 += w * x * x * x;
        c4 += w * x * x * x * x;
    }
    MomentSummary s = summary_from_raw(mu, c2 + mu * mu, c3 + 3 * mu * c2 + mu * mu * mu,
                                       c4 + 4 * mu * c3 + 6 * mu * mu * c2 + mu * mu * mu * mu);
    // cumulants from the central moments directly
    s.k2 = c2;
    s.k3 = c3;
    s.k4 = c4 - 3 * c2 * c2;
    s.variance = c2;
    s.shape_defined = c2 > 1e-14 * std::max(1.0, mu * mu);
    if (s.shape_defined) {
        s.skewness = c3 / std::pow(c2, 1.5);
        s.excess_kurtosis = s.k4 / (c2 * c2);
    } else {
        s.skewness = std::nan("");
        s.excess_kurtosis = std::nan("");
    }
    return s;
}

}  // namespace qmbs
