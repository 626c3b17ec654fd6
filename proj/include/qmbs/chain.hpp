#pragma once

#include <Eigen/Sparse>
#include <cstdint>
#include <utility>
#include <vector>

#include "qmbs/randmat.hpp"

namespace qmbs {

// Open chain of N sites with local dimension d. Site 1 is the leftmost
// (slowest-varying) tensor factor.
struct ChainSpec {
    int N = 3;
    int d = 2;
    int L = 2;
    int beta = 1;
    std::uint64_t seed = 0;

    long long dim() const;
    void validate() const;
};

// Hermitian operator stored as coalesced coordinate triplets.
struct SparseOperator {
    long long dim = 0;
    std::vector<long long> rows;
    std::vector<long long> cols;
    std::vector<cplx> values;

    static SparseOperator from_triplets(long long dim, std::vector<Eigen::Triplet<cplx, long long>> t);
    size_t nnz() const { return values.size(); }
    Eigen::SparseMatrix<cplx> to_sparse() const;
    CMat to_dense() const;
    SparseOperator operator+(const SparseOperator& o) const;
};

using SpMat = Eigen::SparseMatrix<double>;
// Real part of the operator; callers check the imaginary part is zero.
SpMat to_real_sparse(const SparseOperator& op);

using LocalTerm = std::pair<int, CMat>;  // (left site l, 1-based; d^L x d^L matrix)

SparseOperator embed_local(const CMat& h, int l, const ChainSpec& spec);

struct LayerSplit {
    SparseOperator odd;
    SparseOperator even;
    int odd_terms = 0;
    int even_terms = 0;
};

// Nearest-neighbour terms grouped by parity of their left site.
LayerSplit split_odd_even(const std::vector<LocalTerm>& terms, const ChainSpec& spec);

// Number of terms (odd layer, even layer) in a nearest-neighbour chain.
std::pair<int, int> layer_sizes(int N);

// Diagonals of the odd and even layers in their own product eigenbases.
// lambdas[l-1] holds the d^2 eigenvalues of the term on sites (l, l+1).
std::pair<Vec, Vec> assemble_AB(const std::vector<Vec>& lambdas, const ChainSpec& spec);

// Kronecker product of the local eigenvector matrices of one layer
// (parity 1 = odd terms, 0 = even terms), padded with identities.
CMat layer_basis(const std::vector<CMat>& eigvecs, const ChainSpec& spec, int parity);

// Q_q = Q_B^dagger Q_A so that H is unitarily equivalent to A + Q_q^dagger B Q_q.
CMat build_Qq(const std::vector<CMat>& eigvecs, const ChainSpec& spec);

struct LocalEigen {
    Vec values;
    CMat vectors;
};
LocalEigen local_eigen(const CMat& h);

CMat kron(const CMat& a, const CMat& b);

// Full dense chain Hamiltonian from nearest-neighbour terms.
CMat dense_hamiltonian(const std::vector<LocalTerm>& terms, const ChainSpec& spec);

}  // namespace qmbs
