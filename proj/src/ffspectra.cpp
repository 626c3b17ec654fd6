#include "qmbs/ffspectra.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "qmbs/errors.hpp"

namespace qmbs {

namespace {

using Triplet = Eigen::Triplet<cplx, long long>;

long long ipow(long long b, int e) {
    long long r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

SparseOperator sum_local_terms(const std::vector<LocalTerm>& terms, const ChainSpec& spec) {
    std::vector<Triplet> t;
    for (const auto& [l, h] : terms) {
        SparseOperator e = embed_local(h, l, spec);
        for (size_t i = 0; i < e.nnz(); ++i) t.emplace_back(e.rows[i], e.cols[i], e.values[i]);
    }
    return SparseOperator::from_triplets(spec.dim(), std::move(t));
}

bool is_real(const SparseOperator& H) {
    return std::all_of(H.values.begin(), H.values.end(), [](const cplx& v) { return v.imag() == 0.0; });
}

template <class S>
Eigen::Matrix<S, Eigen::Dynamic, 1> random_vector(long long n, RngStream& rng) {
    Eigen::Matrix<S, Eigen::Dynamic, 1> v(n);
    for (long long i = 0; i < n; ++i) {
        if constexpr (std::is_same_v<S, double>)
            v(i) = rng.normal();
        else
            v(i) = S(rng.normal(), rng.normal());
    }
    return v;
}

CMat rank1(const CVec& v) { return v * v.adjoint(); }

}  // namespace

// ---------------------------------------------------------------- projector terms

CMat ProjectorTerm::projector() const {
    const int D = d * d;
    if (vectors.cols() == 0) return CMat::Zero(D, D);
    return vectors * vectors.adjoint();
}

ProjectorTerm to_projector_form(const CMat& h) {
    const long long D = h.rows();
    if (h.cols() != D) throw ParameterError("local term must be square");
    const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(D))));
    if (static_cast<long long>(d) * d != D || d < 2) throw ParameterError("local term must be d^2 x d^2");
    if (hermitian_defect(h) > 1e-10 * std::max(1.0, h.cwiseAbs().maxCoeff())) throw ValidationError("local term is not Hermitian");
    Eigen::SelfAdjointEigenSolver<CMat> es(h);
    const Vec& ev = es.eigenvalues();
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    int ground = 1;
    while (ground < D && ev(ground) - ev(0) <= 1e-12 * scale) ++ground;
    ProjectorTerm out;
    out.d = d;
    out.vectors = es.eigenvectors().rightCols(D - ground);
    out.ambiguous = ground < D && ev(ground) - ev(0) < 1e-10 * scale;
    return out;
}

ProjectorTerm random_projector(int d, int r, RngStream& rng) {
    if (d < 2) throw ParameterError("local dimension must be >= 2");
    if (r < 0 || r > d * d) throw ParameterError("projector rank must lie in [0, d^2]");
    ProjectorTerm out;
    out.d = d;
    if (r == 0) {
        out.vectors = CMat(d * d, 0);
        return out;
    }
    CMat G = sample_gaussian(d * d, r, 2, rng);
    Eigen::HouseholderQR<CMat> qr(G);
    out.vectors = qr.householderQ() * CMat::Identity(d * d, r);
    return out;
}

// ---------------------------------------------------------------- Motzkin chain

std::vector<LocalTerm> motzkin_local_terms(int n) {
    if (n < 2) throw ParameterError("Motzkin chain needs n >= 2");
    auto idx = [](int a, int b) { return 3 * a + b; };
    CMat pi = CMat::Zero(9, 9);
    for (auto [a, b] : {std::pair{idx(0, 0), idx(1, 2)}, std::pair{idx(0, 1), idx(1, 0)}, std::pair{idx(0, 2), idx(2, 0)}}) {
        CVec v = CVec::Zero(9);
        v(a) = 1 / std::sqrt(2.0);
        v(b) = -1 / std::sqrt(2.0);
        pi += rank1(v);
    }
    CMat id3 = CMat::Identity(3, 3), r_proj = CMat::Zero(3, 3), l_proj = CMat::Zero(3, 3);
    r_proj(2, 2) = 1;
    l_proj(1, 1) = 1;
    std::vector<LocalTerm> terms;
    for (int j = 1; j <= n - 1; ++j) {
        CMat h = pi;
        if (j == 1) h += kron(r_proj, id3);
        if (j == n - 1) h += kron(id3, l_proj);
        terms.emplace_back(j, h);
    }
    return terms;
}

SparseOperator build_motzkin_H(int n) {
    if (n > 13) throw ParameterError("full Motzkin Hamiltonian limited to n <= 13");
    ChainSpec spec{n, 3, 2, 1, 0};
    return sum_local_terms(motzkin_local_terms(n), spec);
}

SectorOperator motzkin_sector(int n, int p, int q) {
    if (n < 1 || n > 16) throw ParameterError("sector construction limited to 1 <= n <= 16");
    if (p < 0 || q < 0 || p + q > n) throw ParameterError("invalid sector");
    SectorOperator out;
    std::string s(n, '0');
    const char letters[3] = {'0', 'l', 'r'};
    const long long total = ipow(3, n);
    for (long long code = 0; code < total; ++code) {
        long long x = code;
        for (int i = n - 1; i >= 0; --i, x /= 3) s[i] = letters[x % 3];
        if (canonical_class(s) == std::make_pair(p, q)) out.basis.push_back(s);
    }
    std::unordered_map<std::string, int> index;
    for (size_t i = 0; i < out.basis.size(); ++i) index.emplace(out.basis[i], static_cast<int>(i));
    const std::vector<std::pair<std::string, std::string>> moves{{"00", "lr"}, {"0l", "l0"}, {"0r", "r0"}};
    std::vector<Eigen::Triplet<double>> t;
    for (size_t i = 0; i < out.basis.size(); ++i) {
        const std::string& b = out.basis[i];
        double diag = (b.front() == 'r') + (b.back() == 'l');
        for (int j = 0; j + 1 < n; ++j)
            for (const auto& [u, w] : moves) {
                const std::string* partner = nullptr;
                if (b.compare(j, 2, u) == 0) partner = &w;
                if (b.compare(j, 2, w) == 0) partner = &u;
                if (!partner) continue;
                std::string c = b;
                c.replace(j, 2, *partner);
                diag += 0.5;
                t.emplace_back(static_cast<int>(i), index.at(c), -0.5);
            }
        if (diag != 0) t.emplace_back(static_cast<int>(i), static_cast<int>(i), diag);
    }
    const int dim = static_cast<int>(out.basis.size());
    out.H = SpMat(dim, dim);
    out.H.setFromTriplets(t.begin(), t.end());
    return out;
}

// ---------------------------------------------------------------- mirror chain

std::vector<LocalTerm> d4_local_terms(int n) {
    if (n < 1) throw ParameterError("mirror chain needs n >= 1");
    enum { O = 0, A = 1, B = 2, G = 3 };
    auto ket = [](int a, int b) { return 4 * a + b; };
    auto diff = [](int a, int b) {
        CVec v = CVec::Zero(16);
        v(a) += 1 / std::sqrt(2.0);
        v(b) -= 1 / std::sqrt(2.0);
        return rank1(v);
    };
    auto basis = [](int a) {
        CMat m = CMat::Zero(16, 16);
        m(a, a) = 1;
        return m;
    };
    CMat Ma = diff(ket(O, A), ket(A, O)), Mb = diff(ket(O, B), ket(B, O)), Mg = diff(ket(O, G), ket(G, O));
    CMat a_minus = diff(ket(A, O), ket(A, G)), b_minus = diff(ket(B, O), ket(B, G));
    CMat minus_a = diff(ket(O, A), ket(G, A)), minus_b = diff(ket(O, B), ket(G, B));
    CMat Ca = diff(ket(O, O), ket(A, A)), Cb = diff(ket(O, O), ket(B, B));
    CMat prop_A = Ma + Mb + Mg + a_minus + b_minus;
    CMat prop_B = Ma + Mb + Mg + minus_a + minus_b;
    CMat prop_AB = Mg + a_minus + b_minus + minus_a + minus_b + Ca + Cb;
    CMat con_AB = basis(ket(A, B)) + basis(ket(B, A));
    CMat gamma = CMat::Zero(4, 4), id4 = CMat::Identity(4, 4);
    gamma(G, G) = 1;

    std::vector<LocalTerm> terms;
    for (int j = 1; j <= 2 * n - 1; ++j) {
        CMat h = j < n ? prop_A : (j == n ? CMat(prop_AB + con_AB) : prop_B);
        if (j == 1) h += kron(gamma, id4);
        if (j == 2 * n - 1) h += kron(id4, gamma);
        terms.emplace_back(j, h);
    }
    return terms;
}

SparseOperator build_d4_H(int n) {
    if (n < 1 || n > 5) throw ParameterError("mirror Hamiltonian limited to 1 <= n <= 5");
    ChainSpec spec{2 * n, 4, 2, 1, 0};
    return sum_local_terms(d4_local_terms(n), spec);
}

Vec d4_ground_state(int n) {
    if (n < 1 || n > 5) throw ParameterError("mirror ground state limited to 1 <= n <= 5");
    Vec psi = Vec::Zero(ipow(4, 2 * n));
    for (const auto& s : good_mirror_strings(n)) {
        long long code = 0;
        for (int x : s) code = code * 4 + x;
        psi(code) = 1;
    }
    return psi.normalized();
}

// ---------------------------------------------------------------- Lanczos

template <class S>
double spectral_norm_estimate(const Eigen::SparseMatrix<S>& H, std::uint64_t seed) {
    using V = Eigen::Matrix<S, Eigen::Dynamic, 1>;
    const long long n = H.rows();
    if (n == 0) return 0;
    if (n <= 60) {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>> es(
            Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>(H), Eigen::EigenvaluesOnly);
        return es.eigenvalues().cwiseAbs().maxCoeff();
    }
    RngStream rng(seed, 0);
    const int m = 40;
    std::vector<V> basis{random_vector<S>(n, rng).normalized()};
    std::vector<double> a, b;
    for (int j = 0; j < m; ++j) {
        V w = H * basis[j];
        a.push_back(std::real(basis[j].dot(w)));
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& u : basis) w -= u * u.dot(w);
        double beta = w.norm();
        if (j + 1 == m || beta < 1e-300) break;
        b.push_back(beta);
        basis.push_back(w / beta);
    }
    Vec diag = Eigen::Map<Vec>(a.data(), a.size());
    Vec sub = Eigen::Map<Vec>(b.data(), a.size() - 1);
    Eigen::SelfAdjointEigenSolver<Mat> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

template <class S>
EigenPairs<S> lowest_eigenpairs(const Eigen::SparseMatrix<S>& H, int k, const EigenOptions& opt) {
    using V = Eigen::Matrix<S, Eigen::Dynamic, 1>;
    using M = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
    const long long n = H.rows();
    if (H.cols() != n) throw ParameterError("operator must be square");
    if (k < 1 || k > n) throw ParameterError("requested eigenpair count out of range");
    EigenPairs<S> out;
    out.norm = spectral_norm_estimate(H, opt.seed + 1);
    const double tol = opt.rel_tol * out.norm;

    if (n <= opt.dense_limit) {
        Eigen::SelfAdjointEigenSolver<M> es{M(H)};
        for (int i = 0; i < k; ++i) {
            V x = es.eigenvectors().col(i);
            out.values.push_back(es.eigenvalues()(i));
            out.residuals.push_back((H * x - es.eigenvalues()(i) * x).norm());
            out.vectors.push_back(std::move(x));
        }
        return out;
    }

    RngStream rng(opt.seed, 0);
    std::vector<V>& locked = out.vectors;
    auto deflate = [&](V& w) {
        for (const auto& q : locked) w -= q * q.dot(w);
    };
    const long long mem_cap = std::max<long long>(20, 400'000'000LL / (n * static_cast<long long>(sizeof(S))));
    for (int target = 0; target < k; ++target) {
        V x = random_vector<S>(n, rng);
        deflate(x);
        x.normalize();
        bool done = false;
        for (int restart = 0; restart < opt.max_restarts && !done; ++restart) {
            const long long m = std::min<long long>({opt.krylov, n - static_cast<long long>(locked.size()), mem_cap});
            std::vector<V> basis{x};
            std::vector<double> a, b;
            for (long long j = 0; j < m; ++j) {
                V w = H * basis[j];
                deflate(w);
                a.push_back(std::real(basis[j].dot(w)));
                for (int pass = 0; pass < 2; ++pass) {
                    for (const auto& u : basis) w -= u * u.dot(w);
                    deflate(w);
                }
                double beta = w.norm();
                if (j + 1 == m || beta <= 1e-13 * std::max(out.norm, 1e-300)) break;
                b.push_back(beta);
                basis.push_back(w / beta);
            }
            Vec diag = Eigen::Map<Vec>(a.data(), a.size());
            Vec sub = Eigen::Map<Vec>(b.data(), a.size() - 1);
            Eigen::SelfAdjointEigenSolver<Mat> es;
            es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
            x.setZero();
            for (size_t i = 0; i < a.size(); ++i) x += es.eigenvectors()(i, 0) * basis[i];
            deflate(x);
            x.normalize();
            V hx = H * x;
            double theta = std::real(x.dot(hx));
            double res = (hx - theta * x).norm();
            if (res <= tol) {
                out.values.push_back(theta);
                out.residuals.push_back(res);
                locked.push_back(x);
                done = true;
            }
        }
        if (!done) throw NumericError("Lanczos did not reach the residual bound");
    }
    return out;
}

template EigenPairs<double> lowest_eigenpairs(const Eigen::SparseMatrix<double>&, int, const EigenOptions&);
template EigenPairs<cplx> lowest_eigenpairs(const Eigen::SparseMatrix<cplx>&, int, const EigenOptions&);
template double spectral_norm_estimate(const Eigen::SparseMatrix<double>&, std::uint64_t);
template double spectral_norm_estimate(const Eigen::SparseMatrix<cplx>&, std::uint64_t);

// ---------------------------------------------------------------- gaps

GapResult ground_and_gap(const SparseOperator& H, const EigenOptions& opt) {
    if (H.dim < 2) throw ParameterError("gap needs dimension >= 2");
    GapResult g;
    auto fill = [&](const auto& pairs) {
        g.lambda1 = pairs.values[0];
        g.lambda2 = pairs.values[1];
        g.residuals = pairs.residuals;
        g.norm = pairs.norm;
    };
    if (is_real(H))
        fill(lowest_eigenpairs(to_real_sparse(H), 2, opt));
    else
        fill(lowest_eigenpairs(H.to_sparse(), 2, opt));
    g.sector = "full";
    return g;
}

namespace {
std::string sector_label(int p, int q) { return "(" + std::to_string(p) + "," + std::to_string(q) + ")"; }
}  // namespace

GapResult motzkin_gap(int n, std::optional<std::pair<int, int>> sector, const EigenOptions& opt) {
    if (n < 2) throw ParameterError("Motzkin gap needs n >= 2");
    GapResult g;
    g.n = n;
    if (sector) {
        auto [p, q] = *sector;
        auto sec = motzkin_sector(n, p, q);
        if (sec.basis.size() < 2) throw ParameterError("sector has fewer than two states");
        auto pairs = lowest_eigenpairs(sec.H, 2, opt);
        g.lambda1 = pairs.values[0];
        g.lambda2 = pairs.values[1];
        g.residuals = pairs.residuals;
        g.norm = pairs.norm;
        g.sector = sector_label(p, q);
        return g;
    }
    auto balanced = lowest_eigenpairs(motzkin_sector(n, 0, 0).H, 2, opt);
    g.lambda1 = balanced.values[0];
    g.lambda2 = balanced.values[1];
    g.sector = sector_label(0, 0);
    g.residuals = balanced.residuals;
    g.norm = balanced.norm;
    for (auto [p, q] : {std::pair{1, 0}, std::pair{0, 1}}) {
        auto pairs = lowest_eigenpairs(motzkin_sector(n, p, q).H, 1, opt);
        g.residuals.push_back(pairs.residuals[0]);
        if (pairs.values[0] < g.lambda2) {
            g.lambda2 = pairs.values[0];
            g.sector = sector_label(p, q);
        }
    }
    return g;
}

LogLogFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 3) throw ParameterError("fit needs at least three matching points");
    const double m = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= 0 || y[i] <= 0) throw ParameterError("log-log fit needs positive data");
        sx += std::log(x[i]);
        sy += std::log(y[i]);
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        double u = std::log(x[i]) - mx, v = std::log(y[i]) - my;
        sxx += u * u;
        sxy += u * v;
    }
    LogLogFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double rss = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        double r = std::log(y[i]) - f.intercept - f.slope * std::log(x[i]);
        rss += r * r;
    }
    f.slope_error = std::sqrt(rss / (m - 2) / sxx);
    return f;
}

// ---------------------------------------------------------------- kernels

namespace {
template <class S>
KernelResult kernel_from(const Eigen::SparseMatrix<S>& H, int max_count, const EigenOptions& opt) {
    KernelResult out;
    const long long n = H.rows();
    int k = static_cast<int>(n <= opt.dense_limit ? n : std::min<long long>(n, 2));
    while (true) {
        auto pairs = lowest_eigenpairs(H, k, opt);
        out.threshold = 1e-8 * pairs.norm;
        int count = 0;
        while (count < k && pairs.values[count] < out.threshold) ++count;
        if (count < k || k == n) {
            out.dim = count;
            out.next_eigenvalue = count < k ? pairs.values[count] : std::numeric_limits<double>::quiet_NaN();
            out.basis = CMat(n, count);
            for (int i = 0; i < count; ++i) out.basis.col(i) = pairs.vectors[i].template cast<cplx>();
            return out;
        }
        if (k > max_count) throw NumericError("numeric kernel exceeds the requested cap");
        k = static_cast<int>(std::min<long long>(n, 2LL * k));
    }
}
}  // namespace

KernelResult numeric_kernel(const SparseOperator& H, int max_count, const EigenOptions& opt) {
    if (H.dim < 1) throw ParameterError("empty operator");
    if (is_real(H)) return kernel_from(to_real_sparse(H), max_count, opt);
    return kernel_from(H.to_sparse(), max_count, opt);
}

int ground_dim_numeric(const SparseOperator& H) { return numeric_kernel(H).dim; }

// ---------------------------------------------------------------- regimes

std::string regime_name(Regime r) {
    switch (r) {
        case Regime::Frustrated: return "frustrated";
        case Regime::FFEntangled: return "ff_entangled";
        case Regime::FFProduct: return "ff_product";
    }
    return "unknown";
}

RegimeReport degeneracy_recursion(int N, int d, int r) {
    if (d < 2) throw ParameterError("local dimension must be >= 2");
    if (r < 1 || r > d * d) throw ParameterError("projector rank must lie in [1, d^2]");
    if (N < 1) throw ParameterError("chain length must be >= 1");
    RegimeReport rep;
    rep.d = d;
    rep.r = r;
    rep.D = {BigInt(1), BigInt(d)};
    for (int n = 2; n <= N; ++n) rep.D.push_back(BigInt(d) * rep.D[n - 1] - BigInt(r) * rep.D[n - 2]);
    rep.D.resize(N + 1);
    const std::complex<double> disc = std::sqrt(std::complex<double>(static_cast<double>(d) * d - 4.0 * r));
    rep.f = (static_cast<double>(d) + disc) / 2.0;
    rep.g = (static_cast<double>(d) - disc) / 2.0;
    for (int n = 0; n <= N; ++n) {
        if (4 * r == d * d)
            rep.closed_form.push_back(std::pow(d / 2.0, n) * (n + 1));
        else
            rep.closed_form.push_back(std::real((std::pow(rep.f, n + 1) - std::pow(rep.g, n + 1)) / (rep.f - rep.g)));
    }
    bool frustrated = std::any_of(rep.D.begin(), rep.D.end(), [](const BigInt& x) { return x <= 0; });
    rep.regime = frustrated ? Regime::Frustrated : (r < d ? Regime::FFProduct : Regime::FFEntangled);
    return rep;
}

BigInt predicted_ground_dim(const RegimeReport& rep) {
    return rep.regime == Regime::Frustrated ? BigInt(0) : rep.D.back();
}

// ---------------------------------------------------------------- generic chains

std::vector<ProjectorTerm> random_projector_terms(int N, int d, int r, std::uint64_t seed) {
    if (N < 2) throw ParameterError("chain needs N >= 2");
    std::vector<ProjectorTerm> terms;
    for (int l = 1; l <= N - 1; ++l) {
        RngStream rng(seed, static_cast<std::uint64_t>(l));
        terms.push_back(random_projector(d, r, rng));
    }
    return terms;
}

std::vector<LocalTerm> ff_local_terms(const std::vector<ProjectorTerm>& terms, const std::vector<double>& weights) {
    if (terms.empty()) throw ParameterError("need at least one bond");
    if (!weights.empty() && weights.size() != terms.size()) throw ParameterError("need one weight per bond");
    std::vector<LocalTerm> local;
    for (size_t l = 0; l < terms.size(); ++l) {
        if (terms[l].d != terms.front().d) throw ParameterError("mixed local dimensions");
        double w = weights.empty() ? 1.0 : weights[l];
        local.emplace_back(static_cast<int>(l) + 1, w * terms[l].projector());
    }
    return local;
}

SparseOperator assemble_ff_chain(const std::vector<ProjectorTerm>& terms, int N, const std::vector<double>& weights) {
    if (static_cast<int>(terms.size()) != N - 1) throw ParameterError("need one projector per bond");
    const int d = terms.front().d;
    if (std::pow(static_cast<double>(d), N) > 5e5) throw ParameterError("generic chain limited to d^N <= 5e5");
    ChainSpec spec{N, d, 2, 2, 0};
    return sum_local_terms(ff_local_terms(terms, weights), spec);
}

SparseOperator generic_ff_chain(int N, int d, int r, std::uint64_t seed) {
    return assemble_ff_chain(random_projector_terms(N, d, r, seed), N);
}

SolutionTensor first_solution_tensor(int d) {
    SolutionTensor t;
    t.d = d;
    for (int i = 0; i < d; ++i) {
        CMat s = CMat::Zero(1, d);
        s(0, i) = 1;
        t.slices.push_back(s);
    }
    return t;
}

CMat constraint_matrix(const SolutionTensor& gamma, const ProjectorTerm& term) {
    const int d = gamma.d;
    if (term.d != d || static_cast<int>(gamma.slices.size()) != d) throw ParameterError("dimension mismatch");
    const long long left = gamma.left(), right = gamma.right();
    const int r = term.rank();
    CMat C = CMat::Zero(r * left, d * right);
    for (int p = 0; p < r; ++p)
        for (int i = 0; i < d; ++i) {
            CMat block = CMat::Zero(left, right);
            for (int j = 0; j < d; ++j) block += std::conj(term.vectors(j * d + i, p)) * gamma.slices[j];
            C.block(p * left, i * right, left, right) = block;
        }
    return C;
}

KernelStep kernel_step(const CMat& C, int d, long long right_dim) {
    if (C.cols() != d * right_dim) throw ParameterError("constraint matrix has the wrong column count");
    KernelStep out;
    out.next.d = d;
    long long kdim = C.cols();
    CMat V = CMat::Identity(C.cols(), C.cols());
    if (C.rows() > 0 && C.cols() > 0) {
        Eigen::JacobiSVD<CMat> svd(C, Eigen::ComputeFullV);
        const Vec& sv = svd.singularValues();
        const double cut = 1e-10 * (sv.size() ? sv(0) : 0.0);
        out.rank = (sv.array() > cut).count();
        out.rank_deficient = out.rank < std::min(C.rows(), C.cols());
        kdim = C.cols() - out.rank;
        V = svd.matrixV();
    }
    CMat K = V.rightCols(kdim);
    for (int i = 0; i < d; ++i) out.next.slices.push_back(K.middleRows(i * right_dim, right_dim));
    return out;
}

GrowthReport grow_solutions(const std::vector<ProjectorTerm>& terms) {
    if (terms.empty()) throw ParameterError("need at least one bond");
    GrowthReport rep;
    rep.tensors.push_back(first_solution_tensor(terms.front().d));
    for (const auto& term : terms) {
        const auto& cur = rep.tensors.back();
        auto step = kernel_step(constraint_matrix(cur, term), cur.d, cur.right());
        rep.ranks.push_back(step.rank);
        rep.rank_deficient.push_back(step.rank_deficient);
        rep.kernel_dims.push_back(step.next.right());
        rep.tensors.push_back(std::move(step.next));
    }
    return rep;
}

CMat contract_solutions(const std::vector<SolutionTensor>& tensors) {
    if (tensors.empty()) throw ParameterError("no tensors");
    const int d = tensors.front().d;
    CMat psi(d, tensors.front().right());
    for (int i = 0; i < d; ++i) psi.row(i) = tensors.front().slices[i];
    for (size_t k = 1; k < tensors.size(); ++k) {
        const auto& t = tensors[k];
        CMat next(psi.rows() * d, t.right());
        for (long long row = 0; row < psi.rows(); ++row)
            for (int i = 0; i < d; ++i) next.row(row * d + i) = psi.row(row) * t.slices[i];
        psi.swap(next);
    }
    return psi;
}

CMat product_step(const ProjectorTerm& term, const CVec& gamma) {
    const int d = term.d, r = term.rank();
    if (gamma.size() != d) throw ParameterError("site vector has the wrong dimension");
    CMat Bk = CMat::Zero(r, d);
    for (int p = 0; p < r; ++p)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) Bk(p, i) += std::conj(term.vectors(j * d + i, p)) * gamma(j);
    if (r == 0) return CMat::Identity(d, d);
    Eigen::JacobiSVD<CMat> svd(Bk, Eigen::ComputeFullV);
    const Vec& sv = svd.singularValues();
    const long long rank = (sv.array() > 1e-10 * std::max(sv(0), 1e-300)).count();
    return svd.matrixV().rightCols(d - rank);
}

}  // namespace qmbs
