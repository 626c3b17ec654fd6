#include "qmbs/chain.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>

#include "qmbs/errors.hpp"

namespace qmbs {

static long long ipow(long long b, int e) {
    long long r = 1;
    while (e-- > 0) r *= b;
    return r;
}

long long ChainSpec::dim() const { return ipow(d, N); }

void ChainSpec::validate() const {
    if (N < 2) throw ParameterError("chain needs N >= 2");
    if (d < 2) throw ParameterError("local dimension must be >= 2");
    if (L < 1 || L > N) throw ParameterError("interaction range must satisfy 1 <= L <= N");
    check_beta(beta);
    double m = 1;
    for (int i = 0; i < N; ++i) m *= d;
    if (m > 1e9) throw ParameterError("chain dimension too large");
}

SparseOperator SparseOperator::from_triplets(long long dim, std::vector<Eigen::Triplet<cplx, long long>> t) {
    std::sort(t.begin(), t.end(), [](const auto& a, const auto& b) {
        return a.row() != b.row() ? a.row() < b.row() : a.col() < b.col();
    });
    SparseOperator op;
    op.dim = dim;
    for (const auto& x : t) {
        if (!op.rows.empty() && op.rows.back() == x.row() && op.cols.back() == x.col()) {
            op.values.back() += x.value();
        } else {
            op.rows.push_back(x.row());
            op.cols.push_back(x.col());
            op.values.push_back(x.value());
        }
    }
    // drop exact cancellations
    size_t w = 0;
    for (size_t i = 0; i < op.values.size(); ++i) {
        if (op.values[i] == cplx(0, 0)) continue;
        op.rows[w] = op.rows[i];
        op.cols[w] = op.cols[i];
        op.values[w] = op.values[i];
        ++w;
    }
    op.rows.resize(w);
    op.cols.resize(w);
    op.values.resize(w);
    return op;
}

Eigen::SparseMatrix<cplx> SparseOperator::to_sparse() const {
    std::vector<Eigen::Triplet<cplx>> t;
    t.reserve(values.size());
    for (size_t i = 0; i < values.size(); ++i)
        t.emplace_back(static_cast<int>(rows[i]), static_cast<int>(cols[i]), values[i]);
    Eigen::SparseMatrix<cplx> S(dim, dim);
    S.setFromTriplets(t.begin(), t.end());
    return S;
}

CMat SparseOperator::to_dense() const {
    CMat M = CMat::Zero(dim, dim);
    for (size_t i = 0; i < values.size(); ++i) M(rows[i], cols[i]) += values[i];
    return M;
}

SparseOperator SparseOperator::operator+(const SparseOperator& o) const {
    if (dim != o.dim) throw ParameterError("operator dimensions differ");
    std::vector<Eigen::Triplet<cplx, long long>> t;
    t.reserve(nnz() + o.nnz());
    for (size_t i = 0; i < nnz(); ++i) t.emplace_back(rows[i], cols[i], values[i]);
    for (size_t i = 0; i < o.nnz(); ++i) t.emplace_back(o.rows[i], o.cols[i], o.values[i]);
    return from_triplets(dim, std::move(t));
}

SpMat to_real_sparse(const SparseOperator& op) {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(op.nnz());
    for (size_t i = 0; i < op.nnz(); ++i)
        t.emplace_back(static_cast<int>(op.rows[i]), static_cast<int>(op.cols[i]), op.values[i].real());
    SpMat S(op.dim, op.dim);
    S.setFromTriplets(t.begin(), t.end());
    return S;
}

SparseOperator embed_local(const CMat& h, int l, const ChainSpec& spec) {
    spec.validate();
    const long long dl = ipow(spec.d, spec.L);
    if (h.rows() != dl || h.cols() != dl) throw ParameterError("local term must be d^L x d^L");
    if (l < 1 || l > spec.N - spec.L + 1) throw ParameterError("left site out of range");
    const long long left = ipow(spec.d, l - 1);
    const long long right = ipow(spec.d, spec.N - l - spec.L + 1);
    std::vector<Eigen::Triplet<cplx, long long>> t;
    for (long long i = 0; i < dl; ++i)
        for (long long j = 0; j < dl; ++j) {
            cplx v = h(i, j);
            if (v == cplx(0, 0)) continue;
            for (long long a = 0; a < left; ++a)
                for (long long c = 0; c < right; ++c)
                    t.emplace_back((a * dl + i) * right + c, (a * dl + j) * right + c, v);
        }
    return SparseOperator::from_triplets(spec.dim(), std::move(t));
}

std::pair<int, int> layer_sizes(int N) {
    if (N < 2) throw ParameterError("chain needs N >= 2");
    return {N / 2, (N - 1) / 2};
}

LayerSplit split_odd_even(const std::vector<LocalTerm>& terms, const ChainSpec& spec) {
    spec.validate();
    LayerSplit out;
    out.odd.dim = out.even.dim = spec.dim();
    std::vector<Eigen::Triplet<cplx, long long>> to, te;
    for (const auto& [l, h] : terms) {
        SparseOperator e = embed_local(h, l, spec);
        auto& dst = (l % 2 == 1) ? to : te;
        for (size_t i = 0; i < e.nnz(); ++i) dst.emplace_back(e.rows[i], e.cols[i], e.values[i]);
        if (l % 2 == 1)
            ++out.odd_terms;
        else
            ++out.even_terms;
    }
    out.odd = SparseOperator::from_triplets(spec.dim(), std::move(to));
    out.even = SparseOperator::from_triplets(spec.dim(), std::move(te));
    return out;
}

std::pair<Vec, Vec> assemble_AB(const std::vector<Vec>& lambdas, const ChainSpec& spec) {
    spec.validate();
    if (static_cast<int>(lambdas.size()) != spec.N - 1) throw ParameterError("need N-1 local spectra");
    const int d = spec.d;
    for (const auto& v : lambdas)
        if (v.size() != d * d) throw ParameterError("each local spectrum needs d^2 entries");
    const long long m = spec.dim();
    Vec A = Vec::Zero(m), B = Vec::Zero(m);
    std::vector<int> digits(spec.N);
    for (long long idx = 0; idx < m; ++idx) {
        long long x = idx;
        for (int s = spec.N - 1; s >= 0; --s) {
            digits[s] = static_cast<int>(x % d);
            x /= d;
        }
        double a = 0, b = 0;
        for (int l = 1; l <= spec.N - 1; ++l) {
            double v = lambdas[l - 1](digits[l - 1] * d + digits[l]);
            if (l % 2 == 1)
                a += v;
            else
                b += v;
        }
        A(idx) = a;
        B(idx) = b;
    }
    return {A, B};
}

CMat kron(const CMat& a, const CMat& b) {
    CMat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

CMat layer_basis(const std::vector<CMat>& eigvecs, const ChainSpec& spec, int parity) {
    spec.validate();
    if (static_cast<int>(eigvecs.size()) != spec.N - 1) throw ParameterError("need N-1 local eigenvector matrices");
    const int d = spec.d, n = d * d;
    for (const auto& q : eigvecs)
        if (q.rows() != n || q.cols() != n) throw ParameterError("local eigenvector matrix must be d^2 x d^2");
    CMat I = CMat::Identity(d, d);
    CMat Q = CMat::Identity(1, 1);
    int site = 1;
    while (site <= spec.N) {
        bool starts_term = site <= spec.N - 1 && (site % 2 == 1) == (parity == 1);
        if (starts_term) {
            Q = kron(Q, eigvecs[site - 1]);
            site += 2;
        } else {
            Q = kron(Q, I);
            site += 1;
        }
    }
    return Q;
}

CMat build_Qq(const std::vector<CMat>& eigvecs, const ChainSpec& spec) {
    CMat QA = layer_basis(eigvecs, spec, 1);
    CMat QB = layer_basis(eigvecs, spec, 0);
    return QB.adjoint() * QA;
}

LocalEigen local_eigen(const CMat& h) {
    double scale = std::max(1.0, h.size() ? h.cwiseAbs().maxCoeff() : 0.0);
    if (hermitian_defect(h) > 1e-10 * scale) throw ValidationError("local term is not Hermitian");
    Eigen::SelfAdjointEigenSolver<CMat> es((h + h.adjoint()) * 0.5);
    if (es.info() != Eigen::Success) throw NumericError("local eigensolver failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

CMat dense_hamiltonian(const std::vector<LocalTerm>& terms, const ChainSpec& spec) {
    spec.validate();
    CMat H = CMat::Zero(spec.dim(), spec.dim());
    for (const auto& [l, h] : terms) {
        SparseOperator e = embed_local(h, l, spec);
        for (size_t i = 0; i < e.nnz(); ++i) H(e.rows[i], e.cols[i]) += e.values[i];
    }
    return H;
}

}  // namespace qmbs
