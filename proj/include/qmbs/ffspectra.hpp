#pragma once

#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qmbs/chain.hpp"
#include "qmbs/motzkin.hpp"

namespace qmbs {

using CSpMat = Eigen::SparseMatrix<cplx>;

// Rank-r projector on two qudits, stored by its orthonormal excited vectors (d^2 x r).
struct ProjectorTerm {
    int d = 2;
    CMat vectors;
    bool ambiguous = false;  // ground/excited split closer than 1e-10

    int rank() const { return static_cast<int>(vectors.cols()); }
    CMat projector() const;
};

ProjectorTerm to_projector_form(const CMat& h);
ProjectorTerm random_projector(int d, int r, RngStream& rng);

// ---------------------------------------------------------------- Hamiltonians

// Motzkin chain on n sites; boundary terms are folded into the first and last pairs.
std::vector<LocalTerm> motzkin_local_terms(int n);
SparseOperator build_motzkin_H(int n);

// Same Hamiltonian restricted to the strings of one canonical class (p, q).
struct SectorOperator {
    std::vector<std::string> basis;
    SpMat H;
};
SectorOperator motzkin_sector(int n, int p, int q);

// Mirror chain on 2n sites of dimension 4 (letters 0, alpha, beta, gamma).
std::vector<LocalTerm> d4_local_terms(int n);
SparseOperator build_d4_H(int n);
// Uniform superposition of good strings, normalized.
Vec d4_ground_state(int n);

// ---------------------------------------------------------------- eigensolver

struct EigenOptions {
    int krylov = 300;            // basis size per restart
    int max_restarts = 200;
    double rel_tol = 1e-8;       // residual relative to the norm estimate
    long long dense_limit = 1500;
    std::uint64_t seed = 7;
};

template <class Scalar>
struct EigenPairs {
    std::vector<double> values;
    std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> vectors;
    std::vector<double> residuals;
    double norm = 0;  // estimate of the largest eigenvalue
};

// k lowest eigenpairs of a Hermitian sparse matrix by deflated, restarted Lanczos
// (dense solver below dense_limit). Repeated eigenvalues are returned with multiplicity.
template <class Scalar>
EigenPairs<Scalar> lowest_eigenpairs(const Eigen::SparseMatrix<Scalar>& H, int k, const EigenOptions& opt = {});

// Largest eigenvalue estimate from a short Lanczos run.
template <class Scalar>
double spectral_norm_estimate(const Eigen::SparseMatrix<Scalar>& H, std::uint64_t seed = 11);

struct GapResult {
    int n = 0;
    double lambda1 = 0, lambda2 = 0;
    std::string sector;  // where lambda2 was found
    std::vector<double> residuals;
    double norm = 0;
};

GapResult ground_and_gap(const SparseOperator& H, const EigenOptions& opt = {});
// Motzkin gap. With a sector: the two lowest levels inside it. Without: the ground level of the
// balanced sector and the lowest excitation over the balanced and single-unmatched sectors.
GapResult motzkin_gap(int n, std::optional<std::pair<int, int>> sector = std::nullopt,
                      const EigenOptions& opt = {});

struct LogLogFit {
    double slope = 0, intercept = 0, slope_error = 0;
};
// Least squares of ln(y) on ln(x).
LogLogFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

// Numeric kernel: eigenvalues below 1e-8 * norm. Dense below dense_limit, else deflated Lanczos
// up to max_count vectors.
struct KernelResult {
    int dim = 0;
    CMat basis;
    double threshold = 0;
    double next_eigenvalue = 0;  // first level above the threshold
};
KernelResult numeric_kernel(const SparseOperator& H, int max_count = 512, const EigenOptions& opt = {});
int ground_dim_numeric(const SparseOperator& H);

// ---------------------------------------------------------------- generic chains

enum class Regime { Frustrated, FFEntangled, FFProduct };
std::string regime_name(Regime r);

struct RegimeReport {
    int d = 2, r = 1;
    Regime regime = Regime::FFEntangled;
    std::vector<BigInt> D;  // D_0 .. D_N
    std::complex<double> f, g;
    std::vector<double> closed_form;  // D_n from the roots
};
RegimeReport degeneracy_recursion(int N, int d, int r);
// Zero-energy dimension implied by the recursion: D_N, or 0 once any D_n <= 0.
BigInt predicted_ground_dim(const RegimeReport& rep);

std::vector<ProjectorTerm> random_projector_terms(int N, int d, int r, std::uint64_t seed);
// Bond terms (l, w_l P_l), optionally weighted.
std::vector<LocalTerm> ff_local_terms(const std::vector<ProjectorTerm>& terms, const std::vector<double>& weights = {});
// Sum of embedded projectors, optionally weighted per bond.
SparseOperator assemble_ff_chain(const std::vector<ProjectorTerm>& terms, int N, const std::vector<double>& weights = {});
SparseOperator generic_ff_chain(int N, int d, int r, std::uint64_t seed);

// Site tensor of the solution growth: slices[i] is left x right.
struct SolutionTensor {
    int d = 2;
    std::vector<CMat> slices;
    long long left() const { return slices.empty() ? 0 : slices[0].rows(); }
    long long right() const { return slices.empty() ? 0 : slices[0].cols(); }
};
SolutionTensor first_solution_tensor(int d);

// C[(p, a), (i, b)] = sum_j conj(v^p(j, i)) Gamma^{j}_{a b}; shape r*left x d*right.
CMat constraint_matrix(const SolutionTensor& gamma, const ProjectorTerm& term);

struct KernelStep {
    SolutionTensor next;
    long long rank = 0;
    bool rank_deficient = false;
};
KernelStep kernel_step(const CMat& C, int d, long long right_dim);

struct GrowthReport {
    std::vector<long long> kernel_dims;  // D_2 .. D_N
    std::vector<long long> ranks;        // rank of C at each step
    std::vector<bool> rank_deficient;
    std::vector<SolutionTensor> tensors;  // Gamma^[1..N]
};
GrowthReport grow_solutions(const std::vector<ProjectorTerm>& terms);
// Columns are the grown solutions as vectors on d^N (site 1 slowest).
CMat contract_solutions(const std::vector<SolutionTensor>& tensors);

// Basis of next-site vectors c with <v^p| gamma (x) c> = 0 for all p.
CMat product_step(const ProjectorTerm& term, const CVec& gamma);

}  // namespace qmbs
