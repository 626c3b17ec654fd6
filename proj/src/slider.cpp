#include "qmbs/slider.hpp"

#include <Eigen/Eigenvalues>
#include <atomic>
#include <cmath>
#include <thread>

#include "qmbs/errors.hpp"

namespace qmbs {

SliderParams SliderParams::make(int N, int d, int beta) {
    check_beta(beta);
    if (N < 3) throw ParameterError("slider needs N >= 3");
    if (d < 2) throw ParameterError("local dimension must be >= 2");
    SliderParams p;
    p.N = N;
    p.d = d;
    p.beta = beta;
    p.k = (N - 1) / 2;
    p.n = static_cast<long long>(d) * d;
    p.m = 1;
    for (int i = 0; i < N; ++i) p.m *= d;
    long long nk = 1;
    for (int i = 0; i < p.k; ++i) nk *= p.n;
    p.t = p.m / nk;
    return p;
}

double haar_q4(long long m, int beta) {
    check_beta(beta);
    if (m < 1) throw ParameterError("matrix size must be >= 1");
    double md = static_cast<double>(m);
    return (beta + 2.0) / (md * (md * beta + 2.0));
}

FrobeniusUV frobenius_uv(int d, int beta) {
    check_beta(beta);
    if (d < 2) throw ParameterError("local dimension must be >= 2");
    double b = beta, dd = d;
    double q = (b * b * (3 * dd * (dd - 1) + 1) + 2 * b * (3 * dd - 1) + 4) / (dd * std::pow(b * dd * dd + 2, 2));
    return {1.0 / dd, q};
}

double one_minus_p_universal(int N, int d, int beta) {
    check_beta(beta);
    if (d < 2) throw ParameterError("local dimension must be >= 2");
    if (N < 3 || N % 2 == 0) throw ParameterError("closed-form p requires odd N >= 3");
    double k = (N - 1) / 2, dd = d, b = beta;
    double f1 = 1 - std::pow(dd, -2 * k - 1);
    double f2 = 1 - std::pow((k - 1) / k, 2);
    double f3 = 1 - (1 - std::pow(dd, -2 * k + 1)) / (1 + b * dd * dd / 2);
    double f4 = std::pow(dd / (dd + 1), 2);
    double f5 = (b * (dd * dd * dd + dd * dd - 2 * dd + 1) + 4 * dd - 2) / ((dd - 1) * (b * dd * dd + 2));
    return f1 * f2 * f3 * f4 * f5;
}

double p_universal(int N, int d, int beta) { return 1.0 - one_minus_p_universal(N, d, beta); }

LocalMoments wishart_local_moments(int r, int d, int beta) {
    check_beta(beta);
    double n = static_cast<double>(d) * d;
    if (r < 1 || r > n) throw ParameterError("Wishart rank must satisfy 1 <= r <= d^2");
    double b = beta, R = r;
    LocalMoments lm;
    lm.m1 = b * R;
    lm.m2 = b * R * (b * (R + n - 1) + 2);
    lm.m3 = b * R * (b * b * (n * n + (R - 1) * (3 * n + R - 2)) + 6 * b * (n + R - 1) + 8);
    lm.m4 = b * R *
            (48 +
             b * b * b * (n * n * n + 6 * n * n * (R - 1) + n * (6 * R - 11) * (R - 1) - 6 * (R * R + 1) + R * R * R + 11 * R) +
             2 * b * b * (6 * (n * n + R * R) + 17 * (n * (R - 1) - R) + 11) + 44 * b * (n + R - 1));
    lm.m11 = b * b * R * (R - 1);
    return lm;
}

MomentSummary chain_moments_classical(int r, int N, int d, int beta) {
    if (N < 2) throw ParameterError("chain needs N >= 2");
    LocalMoments lm = wishart_local_moments(r, d, beta);
    MomentSummary loc = summary_from_raw(lm.m1, lm.m2, lm.m3, lm.m4);
    // cumulants add over the N-1 independent terms
    double c = N - 1;
    MomentSummary s;
    s.k1 = c * loc.k1;
    s.k2 = c * loc.k2;
    s.k3 = c * loc.k3;
    s.k4 = c * loc.k4;
    s.mean = s.k1;
    s.variance = s.k2;
    s.skewness = s.k3 / std::pow(s.k2, 1.5);
    s.excess_kurtosis = s.k4 / (s.k2 * s.k2);
    s.shape_defined = true;
    s.m1 = s.k1;
    s.m2 = s.k2 + s.k1 * s.k1;
    s.m3 = s.k3 + 3 * s.k2 * s.k1 + std::pow(s.k1, 3);
    s.m4 = s.k4 + 4 * s.k3 * s.k1 + 3 * s.k2 * s.k2 + 6 * s.k2 * s.k1 * s.k1 + std::pow(s.k1, 4);
    return s;
}

ABMoments layer_moments(double m1, double m2, double m11, long long terms, long long copies, long long n) {
    if (terms < 1) throw ParameterError("layer needs at least one term");
    double k = static_cast<double>(terms), t = static_cast<double>(copies), nn = static_cast<double>(n);
    double nk1 = std::pow(nn, k - 1);
    double m = t * nk1 * nn;
    ABMoments out;
    out.m2 = k * m2 + k * (k - 1) * m1 * m1;
    out.m11 = k * (k - 1) * m1 * m1 + (k / (m - 1)) * ((t * nk1 - 1) * m2 + t * nk1 * (nn - 1) * m11);
    return out;
}

ABMoments ab_moments(double m1, double m2, double m11, const SliderParams& p) {
    if (p.N % 2 == 1) return layer_moments(m1, m2, m11, p.k, p.t, p.n);
    return layer_moments(m1, m2, m11, p.N / 2, 1, p.n);
}

KurtosisTheory kurtosis_theory(int r, int N, int d, int beta) {
    if (N < 3 || N % 2 == 0) throw ParameterError("closed-form kurtoses require odd N >= 3");
    SliderParams sp = SliderParams::make(N, d, beta);
    LocalMoments lm = wishart_local_moments(r, d, beta);
    MomentSummary chain = chain_moments_classical(r, N, d, beta);
    double sigma4 = chain.variance * chain.variance;
    ABMoments ab = ab_moments(lm.m1, lm.m2, lm.m11, sp);
    double md = static_cast<double>(sp.m);
    double iso_gap = (ab.m2 - ab.m11) * (ab.m2 - ab.m11) * (1 - md * haar_q4(sp.m, beta));
    FrobeniusUV uv = frobenius_uv(d, beta);
    double q_gap = d * (2.0 * sp.k - 1) * std::pow(lm.m2 - lm.m11, 2) * (uv.classical - uv.quantum);
    KurtosisTheory kt;
    kt.classical = chain.excess_kurtosis;
    kt.iso = kt.classical - 2 * iso_gap / sigma4;
    kt.quantum = kt.classical - 2 * q_gap / sigma4;
    return kt;
}

// ---------------------------------------------------------------- Monte Carlo

std::array<double, kSliderFields> SliderMC::means() const {
    std::array<double, kSliderFields> s{};
    long long c = 0;
    for (size_t b = 0; b < block_sums.size(); ++b) {
        for (int i = 0; i < kSliderFields; ++i) s[i] += block_sums[b][i];
        c += block_counts[b];
    }
    for (double& x : s) x /= static_cast<double>(c);
    return s;
}

Estimate SliderMC::jackknife(const std::function<double(const std::array<double, kSliderFields>&)>& f) const {
    std::array<double, kSliderFields> tot{};
    long long c = 0;
    for (size_t b = 0; b < block_sums.size(); ++b) {
        for (int i = 0; i < kSliderFields; ++i) tot[i] += block_sums[b][i];
        c += block_counts[b];
    }
    std::array<double, kSliderFields> mean{};
    for (int i = 0; i < kSliderFields; ++i) mean[i] = tot[i] / c;
    Estimate e;
    e.value = f(mean);
    const size_t nb = block_sums.size();
    if (nb < 2) return e;
    std::vector<double> loo(nb);
    double avg = 0;
    for (size_t b = 0; b < nb; ++b) {
        std::array<double, kSliderFields> x{};
        double cc = static_cast<double>(c - block_counts[b]);
        for (int i = 0; i < kSliderFields; ++i) x[i] = (tot[i] - block_sums[b][i]) / cc;
        loo[b] = f(x);
        avg += loo[b];
    }
    avg /= nb;
    double v = 0;
    for (double y : loo) v += (y - avg) * (y - avg);
    e.error = std::sqrt(v * (nb - 1) / nb);
    return e;
}

static MomentSummary summary_of(const std::array<double, kSliderFields>& x, int e) {
    return summary_from_raw(x[slider_field(e, 0)], x[slider_field(e, 1)], x[slider_field(e, 2)], x[slider_field(e, 3)]);
}

MomentSummary SliderMC::summary(int ensemble) const { return summary_of(means(), ensemble); }

Estimate SliderMC::kurtosis(int ensemble) const {
    return jackknife([ensemble](const auto& x) { return summary_of(x, ensemble).excess_kurtosis; });
}

Estimate SliderMC::raw_moment(int ensemble, int k) const {
    return jackknife([=](const auto& x) { return x[slider_field(ensemble, k - 1)]; });
}

Estimate SliderMC::moment_difference(int a, int b, int k) const {
    return jackknife([=](const auto& x) { return x[slider_field(a, k - 1)] - x[slider_field(b, k - 1)]; });
}

Estimate SliderMC::kurtosis_difference(int a, int b) const {
    return jackknife([=](const auto& x) {
        return summary_of(x, a).excess_kurtosis - summary_of(x, b).excess_kurtosis;
    });
}

Estimate SliderMC::cross_term(int ensemble) const {
    return jackknife([=](const auto& x) { return x[slider_field(ensemble, 5)]; });
}

Estimate SliderMC::departing_ratio() const {
    return jackknife([](const auto& x) {
        double xc = x[slider_field(0, 4)], xi = x[slider_field(1, 4)], xq = x[slider_field(2, 4)];
        return (xc - xq) / (xc - xi);
    });
}

namespace {

template <typename S>
using DMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

template <typename S>
DMat<S> local_as(const CMat& h);
template <>
DMat<double> local_as<double>(const CMat& h) {
    return h.real();
}
template <>
DMat<cplx> local_as<cplx>(const CMat& h) {
    return h;
}

inline double conj_if(double x) { return x; }
inline cplx conj_if(cplx x) { return std::conj(x); }

// X <- (I (x) U (x) I) X for U acting on sites (site, site+1), 1-based.
// With adjoint=true applies U^dagger instead.
template <typename S>
void apply_pair(DMat<S>& X, const DMat<S>& U, int site, int N, int d, bool adjoint) {
    const long long n = static_cast<long long>(d) * d;
    long long left = 1, right = 1;
    for (int i = 1; i < site; ++i) left *= d;
    for (int i = site + 2; i <= N; ++i) right *= d;
    const long long m = X.rows();
    DMat<S> Ut = adjoint ? DMat<S>(U.conjugate()) : DMat<S>(U.transpose());
    DMat<S> tmp(right, n);
    for (long long j = 0; j < X.cols(); ++j) {
        S* col = X.data() + j * m;
        for (long long a = 0; a < left; ++a) {
            Eigen::Map<DMat<S>> blk(col + a * n * right, right, n);
            tmp.noalias() = blk * Ut;
            blk = tmp;
        }
    }
}

// Power-sum traces of (A + C)^k / m together with the two cross terms.
struct TraceInput {
    const Vec* a;
    const Vec* b;       // spectrum of C
    Vec cdiag;          // C_ii
    Vec w2, w3;         // (C^2)_ii, (C^3)_ii
    double cross = 0;   // sum_ij a_i a_j |C_ij|^2
};

void traces(const TraceInput& in, double* out) {
    const Vec& a = *in.a;
    const Vec& b = *in.b;
    const double m = static_cast<double>(a.size());
    Vec a2 = a.array().square(), a3 = a2.array() * a.array();
    Vec b2 = b.array().square();
    double sa1 = a.sum(), sa2 = a2.sum(), sa3 = a3.sum(), sa4 = a2.squaredNorm();
    double sb1 = b.sum(), sb2 = b2.sum(), sb3 = (b2.array() * b.array()).sum(), sb4 = b2.squaredNorm();
    double ac = a.dot(in.cdiag), a2c = a2.dot(in.cdiag), a3c = a3.dot(in.cdiag);
    double aw2 = a.dot(in.w2), a2w2 = a2.dot(in.w2), aw3 = a.dot(in.w3);
    out[0] = (sa1 + sb1) / m;
    out[1] = (sa2 + 2 * ac + sb2) / m;
    out[2] = (sa3 + 3 * a2c + 3 * aw2 + sb3) / m;
    out[3] = (sa4 + 4 * a3c + 4 * a2w2 + 2 * in.cross + 4 * aw3 + sb4) / m;
    out[4] = in.cross / m;
    out[5] = ac / m;
}

// C = R^dagger diag(b) R with R unitary; fills the trace inputs.
template <typename S>
void rotated_inputs(const DMat<S>& R, const Vec& b, TraceInput& in, const Vec& a) {
    DMat<S> BR = b.cast<S>().asDiagonal() * R;
    DMat<S> C = R.adjoint() * BR;
    Mat absR2 = R.cwiseAbs2();
    Vec b2 = b.array().square();
    Vec b3 = b2.array() * b.array();
    in.cdiag = C.diagonal().real();
    in.w2 = absR2.transpose() * b2;
    in.w3 = absR2.transpose() * b3;
    Mat absC2 = C.cwiseAbs2();
    in.cross = a.dot(absC2 * a);
}

template <typename S>
void one_trial(const ChainSpec& spec, const LocalKind& kind, RngStream& rng, double* out) {
    const int N = spec.N, d = spec.d, n = d * d;
    std::vector<DMat<S>> vecs(N - 1);
    std::vector<Vec> vals(N - 1);
    for (int l = 1; l <= N - 1; ++l) {
        CMat h = sample_local_term(kind, d, rng);
        DMat<S> hs = local_as<S>(h);
        Eigen::SelfAdjointEigenSolver<DMat<S>> es(hs);
        vals[l - 1] = es.eigenvalues();
        vecs[l - 1] = es.eigenvectors();
    }
    auto [A, B] = assemble_AB(vals, spec);
    const long long m = A.size();

    // classical: B permuted
    {
        std::vector<int> pi = sample_permutation(static_cast<int>(m), rng);
        Vec bp(m);
        for (long long i = 0; i < m; ++i) bp(i) = B(pi[i]);
        TraceInput in{&A, &B, bp, bp.array().square().matrix(), bp.array().cube().matrix(), 0.0};
        in.cross = (A.array().square() * bp.array().square()).sum();
        traces(in, out);
    }
    // isotropic: Haar rotation of B
    {
        DMat<S> Q;
        if constexpr (std::is_same_v<S, double>)
            Q = sample_haar_real(static_cast<int>(m), rng);
        else
            Q = sample_haar(static_cast<int>(m), 2, rng);
        TraceInput in{&A, &B, {}, {}, {}, 0.0};
        rotated_inputs<S>(Q, B, in, A);
        traces(in, out + 6);
    }
    // quantum: R = Q_B^dagger Q_A built from Kronecker factors
    {
        DMat<S> R = DMat<S>::Identity(m, m);
        // R <- Q_A (columns), then Q_B^dagger from the left
        for (int l = 1; l <= N - 1; l += 2) apply_pair<S>(R, vecs[l - 1], l, N, d, false);
        for (int l = 2; l <= N - 1; l += 2) apply_pair<S>(R, vecs[l - 1], l, N, d, true);
        TraceInput in{&A, &B, {}, {}, {}, 0.0};
        rotated_inputs<S>(R, B, in, A);
        traces(in, out + 12);
    }
    (void)n;
}

template <typename Fn>
void run_blocks(int nblocks, int threads, Fn&& fn) {
    threads = std::max(1, std::min(threads, nblocks));
    if (threads == 1) {
        for (int b = 0; b < nblocks; ++b) fn(b);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int b = next++; b < nblocks; b = next++) fn(b);
        });
    for (auto& th : pool) th.join();
}

void check_dense(const ChainSpec& spec) {
    spec.validate();
    if (spec.L != 2) throw ParameterError("ensemble Monte Carlo supports nearest-neighbour chains only");
    if (spec.N < 3) throw ParameterError("ensemble Monte Carlo needs N >= 3");
    if (spec.dim() > 4096) throw ParameterError("dense ensemble work needs d^N <= 4096");
}

}  // namespace

SliderMC mc_kurtoses(const ChainSpec& spec, const LocalKind& locals, const McOptions& opt) {
    check_dense(spec);
    if (locals.beta != spec.beta) throw ParameterError("local kind and chain disagree on beta");
    if (opt.trials < 2) throw ParameterError("need at least two trials");
    const int nb = static_cast<int>(std::min<long long>(std::max(2, opt.blocks), opt.trials));
    SliderMC res;
    res.trials = opt.trials;
    res.block_sums.assign(nb, {});
    res.block_counts.assign(nb, 0);
    run_blocks(nb, opt.threads, [&](int b) {
        long long lo = opt.trials * b / nb, hi = opt.trials * (b + 1) / nb;
        std::array<double, kSliderFields> acc{};
        double buf[kSliderFields];
        for (long long t = lo; t < hi; ++t) {
            RngStream rng(opt.seed, static_cast<std::uint64_t>(t));
            if (spec.beta == 1)
                one_trial<double>(spec, locals, rng, buf);
            else
                one_trial<cplx>(spec, locals, rng, buf);
            for (int i = 0; i < kSliderFields; ++i) acc[i] += buf[i];
        }
        res.block_sums[b] = acc;
        res.block_counts[b] = hi - lo;
    });
    return res;
}

Estimate p_from_departing(const ChainSpec& spec, const LocalKind& locals, const McOptions& opt) {
    SliderMC mc = mc_kurtoses(spec, locals, opt);
    Estimate den = mc.jackknife([](const auto& x) { return x[slider_field(0, 4)] - x[slider_field(1, 4)]; });
    if (std::abs(den.value) <= 3 * den.error)
        throw UnstableEstimateError("departing-term denominator is within 3 standard errors of zero");
    return mc.departing_ratio();
}

// ---------------------------------------------------------------- densities

namespace {

template <typename S>
void density_trial(const ChainSpec& spec, const LocalKind& kind, RngStream& rng, std::vector<double>& cl,
                   std::vector<double>& iso, std::vector<double>& qu) {
    const int N = spec.N, d = spec.d;
    std::vector<DMat<S>> vecs(N - 1);
    std::vector<Vec> vals(N - 1);
    for (int l = 1; l <= N - 1; ++l) {
        CMat h = sample_local_term(kind, d, rng);
        Eigen::SelfAdjointEigenSolver<DMat<S>> es(local_as<S>(h));
        vals[l - 1] = es.eigenvalues();
        vecs[l - 1] = es.eigenvectors();
    }
    auto [A, B] = assemble_AB(vals, spec);
    const long long m = A.size();
    std::vector<int> pi = sample_permutation(static_cast<int>(m), rng);
    for (long long i = 0; i < m; ++i) cl.push_back(A(i) + B(pi[i]));

    DMat<S> Q;
    if constexpr (std::is_same_v<S, double>)
        Q = sample_haar_real(static_cast<int>(m), rng);
    else
        Q = sample_haar(static_cast<int>(m), 2, rng);
    DMat<S> M = Q.adjoint() * B.cast<S>().asDiagonal() * Q;
    M.diagonal() += A.cast<S>();
    Eigen::SelfAdjointEigenSolver<DMat<S>> e1(M, Eigen::EigenvaluesOnly);
    for (long long i = 0; i < m; ++i) iso.push_back(e1.eigenvalues()(i));

    DMat<S> R = DMat<S>::Identity(m, m);
    for (int l = 1; l <= N - 1; l += 2) apply_pair<S>(R, vecs[l - 1], l, N, d, false);
    for (int l = 2; l <= N - 1; l += 2) apply_pair<S>(R, vecs[l - 1], l, N, d, true);
    DMat<S> H = R.adjoint() * B.cast<S>().asDiagonal() * R;
    H.diagonal() += A.cast<S>();
    Eigen::SelfAdjointEigenSolver<DMat<S>> e2(H, Eigen::EigenvaluesOnly);
    for (long long i = 0; i < m; ++i) qu.push_back(e2.eigenvalues()(i));
}

}  // namespace

IEDensities ie_density(const ChainSpec& spec, const LocalKind& locals, const DensityOptions& opt) {
    check_dense(spec);
    if (locals.beta != spec.beta) throw ParameterError("local kind and chain disagree on beta");
    if (opt.mc.trials < 1) throw ParameterError("need at least one trial");
    if (opt.p_override && (*opt.p_override < 0 || *opt.p_override > 1))
        throw ParameterError("p must lie in [0,1]");
    std::vector<double> cl, iso, qu;
    for (long long t = 0; t < opt.mc.trials; ++t) {
        RngStream rng(opt.mc.seed, static_cast<std::uint64_t>(t));
        if (spec.beta == 1)
            density_trial<double>(spec, locals, rng, cl, iso, qu);
        else
            density_trial<cplx>(spec, locals, rng, cl, iso, qu);
    }
    std::vector<double> pooled;
    pooled.reserve(cl.size() * 3);
    pooled.insert(pooled.end(), cl.begin(), cl.end());
    pooled.insert(pooled.end(), iso.begin(), iso.end());
    pooled.insert(pooled.end(), qu.begin(), qu.end());
    std::vector<double> edges;
    if (opt.bins > 0) {
        auto [lo, hi] = std::minmax_element(pooled.begin(), pooled.end());
        double pad = 1e-9 * std::max(1.0, *hi - *lo);
        edges = *hi - *lo > 0 ? uniform_edges(*lo - pad, *hi + pad, opt.bins)
                              : uniform_edges(*lo - 0.5, *hi + 0.5, opt.bins);
    } else {
        edges = freedman_diaconis_edges(pooled);
    }
    IEDensities out;
    out.classical = histogram(cl, edges);
    out.iso = histogram(iso, edges);
    out.quantum = histogram(qu, edges);
    if (opt.p_override)
        out.p = *opt.p_override;
    else if (spec.N % 2 == 1)
        out.p = p_universal(spec.N, spec.d, spec.beta);
    else
        out.p = 1.0 - p_from_departing(spec, locals, opt.mc).value;
    out.ie = mix(out.classical, out.iso, out.p);
    return out;
}

}  // namespace qmbs
