#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "qmbs/rng.hpp"

namespace qmbs {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

void check_beta(int beta);

// Local term distribution. For beta=1 the returned matrices are real
// (zero imaginary part); for beta=2 complex Hermitian.
struct LocalKind {
    enum class Kind { Wishart, GOE, BinaryPM, HaarWithEigenvalues, ExplicitMatrix };
    Kind kind = Kind::Wishart;
    int rank = 1;                     // Wishart
    std::vector<double> eigenvalues;  // HaarWithEigenvalues
    CMat matrix;                      // ExplicitMatrix
    int beta = 1;

    static LocalKind wishart(int r, int beta = 1);
    static LocalKind goe(int beta = 1);
    static LocalKind binary_pm(int beta = 1);
    static LocalKind haar_with_eigenvalues(std::vector<double> ev, int beta = 1);
    static LocalKind explicit_matrix(CMat h);
};

CMat sample_haar(int m, int beta, RngStream& rng);
Mat sample_haar_real(int m, RngStream& rng);

// beta-Gaussian matrix; complex entries have unit-variance real and imaginary parts
CMat sample_gaussian(int rows, int cols, int beta, RngStream& rng);

CMat sample_local_term(const LocalKind& kind, int d, RngStream& rng);

// Uniform permutation of {0..m-1} (Fisher-Yates).
std::vector<int> sample_permutation(int m, RngStream& rng);

// Largest |M - M^dagger| entry.
double hermitian_defect(const CMat& M);

// Ascending eigenvalues. Throws ValidationError if asymmetry exceeds 1e-10 * max(1, |M|).
Vec eigvals_sym(const CMat& M);
Vec eigvals_sym(const Mat& M);

struct MomentSummary {
    double m1 = 0, m2 = 0, m3 = 0, m4 = 0;  // raw moments
    double k1 = 0, k2 = 0, k3 = 0, k4 = 0;  // cumulants
    double mean = 0, variance = 0;
    double skewness = 0, excess_kurtosis = 0;
    bool shape_defined = false;  // false when variance vanishes
};

MomentSummary summary_from_raw(double m1, double m2, double m3, double m4);
MomentSummary moment_summary(const std::vector<double>& samples);
MomentSummary moment_summary(const std::vector<double>& samples, const std::vector<double>& weights);

}  // namespace qmbs
