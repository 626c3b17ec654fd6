#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "qmbs/chain.hpp"
#include "qmbs/density.hpp"
#include "qmbs/randmat.hpp"
#include "qmbs/slider.hpp"

namespace qmbs {

struct SpectralLaw {
    enum class Kind { Semicircle, Arcsine, PointMass };
    Kind kind = Kind::Semicircle;
    double param = 1;  // variance, hopping J, or atom location

    static SpectralLaw semicircle(double variance) { return {Kind::Semicircle, variance}; }
    static SpectralLaw arcsine(double J) { return {Kind::Arcsine, J}; }
    static SpectralLaw point_mass(double c) { return {Kind::PointMass, c}; }

    double pdf(double x) const;
    double mean() const;
    double variance() const;
    std::pair<double, double> support() const;
    // R-transform on the branch continuous with the origin
    cplx r_transform(cplx w) const;
    // m values at the midpoints of equal-probability cells
    std::vector<double> quantiles(int m) const;
};

// Sums a_i + b_pi(i) under a uniform random pairing.
std::vector<double> classical_convolve(const std::vector<double>& a, const std::vector<double>& b, RngStream& rng);

// Pooled eigenvalues of diag(a) + Q^dagger diag(b) Q over Haar Q.
std::vector<double> iso_convolve_mc(const std::vector<double>& a, const std::vector<double>& b, int beta, int trials,
                                    RngStream& rng);

struct FreeConvolution {
    Density density;                 // bin masses, normalized
    double raw_mass = 0;             // integral before normalization
    std::vector<double> xi, rho;     // pointwise density on the sub-grid
    std::vector<bool> converged;     // per sub-grid point
    int failures = 0;
};

struct FreeConvolutionOptions {
    double eta = 1e-6;
    int subpoints = 8;  // evaluation points per bin
};

// Analytic free convolution by inverting the summed R-transform at xi + i*eta.
FreeConvolution free_convolve_analytic(const std::vector<SpectralLaw>& laws, const std::vector<double>& edges,
                                       const FreeConvolutionOptions& opt = {});
FreeConvolution free_convolve_analytic(const SpectralLaw& a, const SpectralLaw& b, const std::vector<double>& edges,
                                       const FreeConvolutionOptions& opt = {});

// g(w) = R(w) + 1/w for the sum of the given laws.
cplx inverse_cauchy(const std::vector<SpectralLaw>& laws, cplx w);

enum class NoiseLaw { Gaussian, Semicircle };
enum class Scheme { I, II };

struct AndersonSpec {
    int N = 500;
    double J = 1;
    double sigma = 1;
    NoiseLaw noise = NoiseLaw::Gaussian;
};

double sample_noise(NoiseLaw law, double sigma, RngStream& rng);

// Tridiagonal Hamiltonian with on-site noise and periodic hopping J.
SparseOperator build_anderson(const AndersonSpec& spec, RngStream& rng);
std::pair<SparseOperator, SparseOperator> scheme_split(const SparseOperator& H, Scheme scheme);

// Density of the 2x2 block [[h, J], [J, 0]] with Gaussian h of width sigma.
double block_law_pdf(double x, double J, double sigma);

struct NecklaceWord {
    std::string pattern;                      // e.g. "AABB", minimal rotation
    std::vector<std::pair<int, int>> blocks;  // (n_s, m_s)
    int degree = 0;
    int rotations = 0;                        // distinct cyclic rotations
};

// Binary necklaces of length k containing both letters.
std::vector<NecklaceWord> necklaces(int k);

using PairSampler = std::function<std::pair<SpMat, SpMat>(RngStream&)>;

PairSampler anderson_sampler(const AndersonSpec& spec, Scheme scheme);
// A = diag(noise), B = Haar-rotated hopping spectrum. Orthogonal rotations
// leave O(1/N) departures in the joint moments, unitary ones O(1/N^2).
PairSampler iso_pair_sampler(const AndersonSpec& spec, int beta = 2);

// Normalized trace of the word with factors A^n - <A^n>, B^m - <B^m>
// (centering per sample), or of the raw word when centered = false.
double word_trace(const NecklaceWord& w, const SpMat& A, const SpMat& B, bool centered = true);

Estimate centered_joint_moment(const NecklaceWord& w, const PairSampler& sampler, int trials, std::uint64_t seed,
                               bool centered = true);

struct NecklaceEstimate {
    NecklaceWord word;
    Estimate value;
    bool nonzero = false;
};

struct DegreeResult {
    int degree = 0;  // kmax + 1 when nothing is significant
    std::vector<NecklaceEstimate> words;
};

struct DegreeOptions {
    int kmax = 8;
    int trials = 200;
    double threshold = 5;    // in standard errors
    double floor = 1e-9;     // absolute floor for exact zeros
    std::uint64_t seed = 0;
};

DegreeResult approximation_degree(const PairSampler& sampler, const DegreeOptions& opt);
DegreeResult approximation_degree(const AndersonSpec& spec, Scheme scheme, const DegreeOptions& opt);

// Sum over the significant words of one degree of rotations * centered value,
// estimating mu_k(H) - mu_k(free) at the leading degree.
double moment_gap(const DegreeResult& r, int k);

double ie_parameter_anderson(double sigma, double J);

struct CorrectedDensity {
    Density density;
    bool noisy = false;
};

// base + (mu_exact - mu_free)/k! (-1)^k base^(k), derivatives by finite
// differences on a Gaussian-smoothed copy of base (bandwidth in bins).
CorrectedDensity moment_corrected_density(const Density& base, double mu_exact, double mu_free, int k,
                                          double bandwidth_bins = 3);

}  // namespace qmbs
