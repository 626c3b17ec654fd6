#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "qmbs/chain.hpp"
#include "qmbs/density.hpp"
#include "qmbs/randmat.hpp"

namespace qmbs {

struct SliderParams {
    int N = 3, d = 2, beta = 1;
    int k = 1;           // terms per layer used in the moment formulas
    long long n = 4;     // d^2
    long long m = 8;     // d^N
    long long t = 2;     // m / n^k

    static SliderParams make(int N, int d, int beta);
};

// E|q_ij|^4 for an m x m beta-Haar matrix.
double haar_q4(long long m, int beta);

struct FrobeniusUV {
    double classical;
    double quantum;
};
FrobeniusUV frobenius_uv(int d, int beta);

// Closed-form 1-p for odd N >= 3.
double one_minus_p_universal(int N, int d, int beta);
double p_universal(int N, int d, int beta);

struct LocalMoments {
    double m1, m2, m3, m4, m11;
};
LocalMoments wishart_local_moments(int r, int d, int beta);

// Exact mean/variance/skewness/kurtosis of the chain with Wishart locals
// (all three ensembles share the first three moments).
MomentSummary chain_moments_classical(int r, int N, int d, int beta = 1);

struct ABMoments {
    double m2, m11;  // E a_i^2 and E a_i a_j (i != j) for one layer diagonal
};
// Layer moments for a layer of `terms` local terms with `copies` = m / n^terms.
ABMoments layer_moments(double m1, double m2, double m11, long long terms, long long copies, long long n);
// Odd-layer (A) moments for the chain described by params.
ABMoments ab_moments(double m1, double m2, double m11, const SliderParams& params);

struct KurtosisTheory {
    double classical, iso, quantum;
};
// Exact kurtoses for Wishart locals, odd N.
KurtosisTheory kurtosis_theory(int r, int N, int d, int beta = 1);

struct Estimate {
    double value = 0;
    double error = 0;  // one standard error
};

// Per-trial accumulators: for each ensemble (0 classical, 1 iso, 2 quantum)
// Tr M^k / m for k = 1..4, Tr(A C A C)/m and Tr(A C)/m.
constexpr int kSliderFields = 18;
inline int slider_field(int ensemble, int slot) { return ensemble * 6 + slot; }

struct SliderMC {
    long long trials = 0;
    std::vector<std::array<double, kSliderFields>> block_sums;
    std::vector<long long> block_counts;

    std::array<double, kSliderFields> means() const;
    // Delete-one-block jackknife of a smooth functional of the means.
    Estimate jackknife(const std::function<double(const std::array<double, kSliderFields>&)>& f) const;

    MomentSummary summary(int ensemble) const;
    Estimate kurtosis(int ensemble) const;
    Estimate raw_moment(int ensemble, int k) const;
    // mean of (Tr M^k)_a - (Tr M^k)_b over paired trials
    Estimate moment_difference(int a, int b, int k) const;
    Estimate kurtosis_difference(int a, int b) const;
    Estimate cross_term(int ensemble) const;
    // (X_c - X_q) / (X_c - X_iso) over departing terms X = Tr(ACAC)/m
    Estimate departing_ratio() const;
};

struct McOptions {
    long long trials = 50000;
    std::uint64_t seed = 0;
    int threads = 1;
    int blocks = 100;
};

// Classical, isotropic and quantum ensembles with shared A, B per trial. Needs d^N <= 4096.
SliderMC mc_kurtoses(const ChainSpec& spec, const LocalKind& locals, const McOptions& opt);

// 1-p from the departing terms. Throws UnstableEstimateError when the
// denominator is within three standard errors of zero.
Estimate p_from_departing(const ChainSpec& spec, const LocalKind& locals, const McOptions& opt);

struct IEDensities {
    Density classical, iso, quantum, ie;
    double p = 0;
};

struct DensityOptions {
    McOptions mc;
    int bins = 0;                       // 0: Freedman-Diaconis on the pooled samples
    std::optional<double> p_override;
};

IEDensities ie_density(const ChainSpec& spec, const LocalKind& locals, const DensityOptions& opt);

}  // namespace qmbs
