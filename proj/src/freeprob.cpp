#include "qmbs/freeprob.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "qmbs/errors.hpp"

namespace qmbs {

// ---------------------------------------------------------------- laws

static double semicircle_cdf(double x, double R) {
    if (x <= -R) return 0;
    if (x >= R) return 1;
    return 0.5 + (x * std::sqrt(R * R - x * x)) / (M_PI * R * R) + std::asin(x / R) / M_PI;
}

double SpectralLaw::pdf(double x) const {
    switch (kind) {
        case Kind::Semicircle: {
            double v = param;
            double q = 4 * v - x * x;
            return q > 0 ? std::sqrt(q) / (2 * M_PI * v) : 0.0;
        }
        case Kind::Arcsine: {
            double q = 4 * param * param - x * x;
            return q > 0 ? 1.0 / (M_PI * std::sqrt(q)) : 0.0;
        }
        case Kind::PointMass:
            return 0.0;
    }
    return 0.0;
}

double SpectralLaw::mean() const { return kind == Kind::PointMass ? param : 0.0; }

double SpectralLaw::variance() const {
    switch (kind) {
        case Kind::Semicircle:
            return param;
        case Kind::Arcsine:
            return 2 * param * param;
        case Kind::PointMass:
            return 0;
    }
    return 0;
}

std::pair<double, double> SpectralLaw::support() const {
    switch (kind) {
        case Kind::Semicircle:
            return {-2 * std::sqrt(param), 2 * std::sqrt(param)};
        case Kind::Arcsine:
            return {-2 * std::abs(param), 2 * std::abs(param)};
        case Kind::PointMass:
            return {param, param};
    }
    return {0, 0};
}

cplx SpectralLaw::r_transform(cplx w) const {
    switch (kind) {
        case Kind::Semicircle:
            return param * w;
        case Kind::Arcsine: {
            double J2 = param * param;
            cplx x = 4.0 * J2 * w * w;
            if (std::abs(x) < 1e-6) return 2.0 * J2 * w - 2.0 * J2 * J2 * w * w * w;
            return (std::sqrt(1.0 + x) - 1.0) / w;
        }
        case Kind::PointMass:
            return param;
    }
    return 0;
}

std::vector<double> SpectralLaw::quantiles(int m) const {
    if (m < 1) throw ParameterError("need at least one quantile");
    std::vector<double> q(m);
    for (int i = 0; i < m; ++i) {
        double u = (i + 0.5) / m;
        switch (kind) {
            case Kind::PointMass:
                q[i] = param;
                break;
            case Kind::Arcsine:
                q[i] = 2 * std::abs(param) * std::sin(M_PI * (u - 0.5));
                break;
            case Kind::Semicircle: {
                double R = 2 * std::sqrt(param), lo = -R, hi = R;
                for (int it = 0; it < 200 && hi - lo > 1e-15 * R; ++it) {
                    double mid = 0.5 * (lo + hi);
                    (semicircle_cdf(mid, R) < u ? lo : hi) = mid;
                }
                q[i] = 0.5 * (lo + hi);
                break;
            }
        }
    }
    return q;
}

// ---------------------------------------------------------------- convolutions

std::vector<double> classical_convolve(const std::vector<double>& a, const std::vector<double>& b, RngStream& rng) {
    if (a.size() != b.size()) throw ParameterError("spectra must have equal length");
    if (a.empty()) return {};
    std::vector<int> pi = sample_permutation(static_cast<int>(a.size()), rng);
    std::vector<double> out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[pi[i]];
    return out;
}

std::vector<double> iso_convolve_mc(const std::vector<double>& a, const std::vector<double>& b, int beta, int trials,
                                    RngStream& rng) {
    check_beta(beta);
    if (a.size() != b.size()) throw ParameterError("spectra must have equal length");
    if (trials < 1) throw ParameterError("need at least one trial");
    const int m = static_cast<int>(a.size());
    Vec va = Eigen::Map<const Vec>(a.data(), m), vb = Eigen::Map<const Vec>(b.data(), m);
    std::vector<double> out;
    out.reserve(static_cast<size_t>(m) * trials);
    for (int t = 0; t < trials; ++t) {
        Vec ev;
        if (beta == 1) {
            Mat Q = sample_haar_real(m, rng);
            Mat M = Q.transpose() * vb.asDiagonal() * Q;
            M.diagonal() += va;
            Eigen::SelfAdjointEigenSolver<Mat> es(M, Eigen::EigenvaluesOnly);
            ev = es.eigenvalues();
        } else {
            CMat Q = sample_haar(m, 2, rng);
            CMat M = Q.adjoint() * vb.cast<cplx>().asDiagonal() * Q;
            M.diagonal() += va.cast<cplx>();
            Eigen::SelfAdjointEigenSolver<CMat> es(M, Eigen::EigenvaluesOnly);
            ev = es.eigenvalues();
        }
        out.insert(out.end(), ev.data(), ev.data() + m);
    }
    return out;
}

cplx inverse_cauchy(const std::vector<SpectralLaw>& laws, cplx w) {
    cplx g = 1.0 / w;
    for (const auto& l : laws) g += l.r_transform(w);
    return g;
}

namespace {

// Solves g(w) = z for the Cauchy transform w = G(z). Each arcsine component
// carries an auxiliary root s_j with s_j^2 = 1 + 4 J_j^2 w^2 so the square
// root branch is followed continuously.
struct Inverter {
    double var = 0, shift = 0;
    std::vector<double> J2;

    bool newton(cplx z, cplx& w, std::vector<cplx>& s, int maxit = 60) const {
        const int n = static_cast<int>(J2.size());
        Eigen::MatrixXcd Jac(n + 1, n + 1);
        Eigen::VectorXcd F(n + 1);
        for (int it = 0; it < maxit; ++it) {
            cplx sumS = 0;
            for (int j = 0; j < n; ++j) sumS += s[j] - 1.0;
            F(0) = var * w + shift + sumS / w + 1.0 / w - z;
            for (int j = 0; j < n; ++j) F(j + 1) = s[j] * s[j] - 1.0 - 4.0 * J2[j] * w * w;
            Jac.setZero();
            Jac(0, 0) = var - (sumS + 1.0) / (w * w);
            for (int j = 0; j < n; ++j) {
                Jac(0, j + 1) = 1.0 / w;
                Jac(j + 1, 0) = -8.0 * J2[j] * w;
                Jac(j + 1, j + 1) = 2.0 * s[j];
            }
            Eigen::VectorXcd step = Jac.partialPivLu().solve(F);
            double scale = std::abs(w);
            // damp steps that would move w by more than half its size
            double damp = std::abs(step(0)) > 0.5 * scale ? 0.5 * scale / std::abs(step(0)) : 1.0;
            w -= damp * step(0);
            for (int j = 0; j < n; ++j) s[j] -= damp * step(j + 1);
            if (damp == 1.0 && step.norm() < 1e-15 * (1 + scale)) break;
        }
        cplx sumS = 0;
        for (int j = 0; j < n; ++j) sumS += s[j] - 1.0;
        double res = std::abs(var * w + shift + sumS / w + 1.0 / w - z);
        for (int j = 0; j < n; ++j) res += std::abs(s[j] * s[j] - 1.0 - 4.0 * J2[j] * w * w);
        return std::isfinite(res) && res < 1e-9 * (1 + std::abs(z));
    }

    // Vertical continuation from far above the axis down to eta.
    bool solve(double xi, double eta, cplx& w_out) const {
        const int n = static_cast<int>(J2.size());
        double spread = 1 + std::abs(shift) + std::sqrt(var);
        for (double j2 : J2) spread += 2 * std::sqrt(j2);
        double h = 10 * spread;
        cplx z(xi, h);
        cplx w = 1.0 / (z - shift);
        std::vector<cplx> s(n);
        for (int j = 0; j < n; ++j) s[j] = std::sqrt(1.0 + 4.0 * J2[j] * w * w);
        if (!newton(z, w, s)) return false;
        while (h > eta) {
            double next = std::max(eta, h * 0.8);
            cplx w0 = w;
            std::vector<cplx> s0 = s;
            bool ok = newton(cplx(xi, next), w, s);
            if (!ok || w.imag() > 1e-12) {
                // retry with a smaller step
                w = w0;
                s = s0;
                double mid = std::max(eta, h * 0.97);
                if (!newton(cplx(xi, mid), w, s)) return false;
                h = mid;
                continue;
            }
            h = next;
        }
        w_out = w;
        return w.imag() <= 1e-10;
    }
};

}  // namespace

FreeConvolution free_convolve_analytic(const std::vector<SpectralLaw>& laws, const std::vector<double>& edges,
                                       const FreeConvolutionOptions& opt) {
    if (edges.size() < 2) throw ParameterError("need at least two edges");
    for (size_t i = 1; i < edges.size(); ++i)
        if (!(edges[i] > edges[i - 1])) throw ParameterError("edges must be strictly increasing");
    if (opt.subpoints < 1 || !(opt.eta > 0)) throw ParameterError("bad inversion options");
    Inverter inv;
    for (const auto& l : laws) {
        switch (l.kind) {
            case SpectralLaw::Kind::Semicircle:
                if (!(l.param > 0)) throw ParameterError("semicircle variance must be positive");
                inv.var += l.param;
                break;
            case SpectralLaw::Kind::Arcsine:
                if (l.param == 0) throw ParameterError("arcsine needs J != 0");
                inv.J2.push_back(l.param * l.param);
                break;
            case SpectralLaw::Kind::PointMass:
                inv.shift += l.param;
                break;
        }
    }
    FreeConvolution out;
    const int bins = static_cast<int>(edges.size()) - 1;
    out.density.edges = edges;
    out.density.masses.assign(bins, 0.0);
    for (int b = 0; b < bins; ++b) {
        double w = (edges[b + 1] - edges[b]) / opt.subpoints;
        for (int k = 0; k < opt.subpoints; ++k) {
            double xi = edges[b] + (k + 0.5) * w;
            cplx g;
            bool ok = inv.solve(xi, opt.eta, g);
            double rho = ok ? std::max(0.0, -g.imag() / M_PI) : std::nan("");
            out.xi.push_back(xi);
            out.rho.push_back(rho);
            out.converged.push_back(ok);
            if (ok)
                out.density.masses[b] += rho * w;
            else
                ++out.failures;
        }
    }
    double total = 0;
    for (double m : out.density.masses) total += m;
    out.raw_mass = total;
    if (total <= 0) throw NumericError("free convolution produced no mass on the grid");
    for (double& m : out.density.masses) m /= total;
    return out;
}

FreeConvolution free_convolve_analytic(const SpectralLaw& a, const SpectralLaw& b, const std::vector<double>& edges,
                                       const FreeConvolutionOptions& opt) {
    return free_convolve_analytic(std::vector<SpectralLaw>{a, b}, edges, opt);
}

// ---------------------------------------------------------------- Anderson

double sample_noise(NoiseLaw law, double sigma, RngStream& rng) {
    if (law == NoiseLaw::Gaussian) return sigma * rng.normal();
    // x-coordinate of a uniform point in the disk of radius 2 sigma
    double r = std::sqrt(rng.uniform()), th = 2 * M_PI * rng.uniform();
    return 2 * sigma * r * std::cos(th);
}

SparseOperator build_anderson(const AndersonSpec& spec, RngStream& rng) {
    if (spec.N < 3) throw ParameterError("Anderson chain needs N >= 3");
    if (spec.sigma < 0) throw ParameterError("noise width must be nonnegative");
    std::vector<Eigen::Triplet<cplx, long long>> t;
    const long long N = spec.N;
    for (long long i = 0; i < N; ++i) {
        double h = sample_noise(spec.noise, spec.sigma, rng);
        t.emplace_back(i, i, h);
    }
    for (long long i = 0; i < N; ++i) {
        long long j = (i + 1) % N;
        t.emplace_back(i, j, spec.J);
        t.emplace_back(j, i, spec.J);
    }
    // keep explicit zeros on the diagonal so both schemes see every site
    SparseOperator op;
    op.dim = N;
    std::sort(t.begin(), t.end(), [](const auto& a, const auto& b) {
        return a.row() != b.row() ? a.row() < b.row() : a.col() < b.col();
    });
    for (const auto& x : t) {
        op.rows.push_back(x.row());
        op.cols.push_back(x.col());
        op.values.push_back(x.value());
    }
    return op;
}

std::pair<SparseOperator, SparseOperator> scheme_split(const SparseOperator& H, Scheme scheme) {
    const long long N = H.dim;
    if (scheme == Scheme::II && N % 2 != 0) throw ParameterError("Scheme II needs an even number of sites");
    SparseOperator A, B;
    A.dim = B.dim = N;
    for (size_t k = 0; k < H.nnz(); ++k) {
        long long r = H.rows[k], c = H.cols[k];
        bool to_a;
        if (scheme == Scheme::I) {
            to_a = r == c;
        } else if (r == c) {
            to_a = r % 2 == 0;
        } else {
            long long lo = std::min(r, c), hi = std::max(r, c);
            bool corner = lo == 0 && hi == N - 1 && N > 2;
            to_a = !corner && hi == lo + 1 && lo % 2 == 0;
        }
        SparseOperator& dst = to_a ? A : B;
        dst.rows.push_back(r);
        dst.cols.push_back(c);
        dst.values.push_back(H.values[k]);
    }
    return {A, B};
}

double block_law_pdf(double x, double J, double sigma) {
    if (x == 0) return 0;
    double u = x - J * J / x;
    double ph = std::exp(-u * u / (2 * sigma * sigma)) / (std::sqrt(2 * M_PI) * sigma);
    return (1 + J * J / (x * x)) * ph;
}

// ---------------------------------------------------------------- necklaces

std::vector<NecklaceWord> necklaces(int k) {
    if (k < 2 || k > 20) throw ParameterError("necklace length must be in [2, 20]");
    std::set<std::string> seen;
    std::vector<NecklaceWord> out;
    for (unsigned mask = 1; mask + 1 < (1u << k); ++mask) {
        std::string s(k, 'A');
        for (int i = 0; i < k; ++i)
            if (mask >> i & 1u) s[k - 1 - i] = 'B';
        std::string best = s;
        std::set<std::string> rots;
        for (int r = 0; r < k; ++r) {
            std::string t = s.substr(r) + s.substr(0, r);
            rots.insert(t);
            best = std::min(best, t);
        }
        if (!seen.insert(best).second) continue;
        NecklaceWord w;
        w.pattern = best;
        w.degree = k;
        w.rotations = static_cast<int>(rots.size());
        // minimal rotation starts with A and ends with B
        int i = 0;
        while (i < k) {
            int na = 0, nb = 0;
            while (i < k && best[i] == 'A') ++na, ++i;
            while (i < k && best[i] == 'B') ++nb, ++i;
            w.blocks.emplace_back(na, nb);
        }
        out.push_back(w);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.pattern < b.pattern; });
    return out;
}

// ---------------------------------------------------------------- joint moments

PairSampler anderson_sampler(const AndersonSpec& spec, Scheme scheme) {
    return [spec, scheme](RngStream& rng) {
        SparseOperator H = build_anderson(spec, rng);
        auto [A, B] = scheme_split(H, scheme);
        return std::make_pair(to_real_sparse(A), to_real_sparse(B));
    };
}

PairSampler iso_pair_sampler(const AndersonSpec& spec, int beta) {
    check_beta(beta);
    return [spec, beta](RngStream& rng) {
        const int N = spec.N;
        Vec a(N), b(N);
        for (int i = 0; i < N; ++i) a(i) = sample_noise(spec.noise, spec.sigma, rng);
        for (int k = 0; k < N; ++k) b(k) = 2 * spec.J * std::cos(2 * M_PI * k / N);
        if (beta == 1) {
            Mat Q = sample_haar_real(N, rng);
            Mat Bd = Q.transpose() * b.asDiagonal() * Q;
            return std::make_pair(SpMat(Mat(a.asDiagonal()).sparseView()), SpMat(Bd.sparseView()));
        }
        // complex Hermitian X = Re + i Im acts as [[Re, -Im], [Im, Re]]; normalized traces agree
        CMat Q = sample_haar(N, 2, rng);
        CMat Bc = Q.adjoint() * b.cast<cplx>().asDiagonal() * Q;
        Mat Be(2 * N, 2 * N);
        Be << Bc.real(), -Bc.imag(), Bc.imag(), Bc.real();
        Vec ae(2 * N);
        ae << a, a;
        return std::make_pair(SpMat(Mat(ae.asDiagonal()).sparseView()), SpMat(Be.sparseView()));
    };
}

namespace {

struct PowerCache {
    const SpMat& base;
    bool centered;
    std::map<int, SpMat> cache;

    const SpMat& get(int n) {
        auto it = cache.find(n);
        if (it != cache.end()) return it->second;
        SpMat p = base;
        for (int i = 1; i < n; ++i) p = SpMat(p * base);
        if (centered) {
            double mean = 0;
            for (int i = 0; i < p.rows(); ++i) mean += p.coeff(i, i);
            mean /= p.rows();
            SpMat I(p.rows(), p.cols());
            I.setIdentity();
            p = SpMat(p - mean * I);
        }
        return cache.emplace(n, std::move(p)).first->second;
    }
};

double trace_of_product(std::vector<const SpMat*> f) {
    SpMat X = *f[0];
    for (size_t i = 1; i + 1 < f.size(); ++i) X = SpMat(X * *f[i]);
    const SpMat& Y = *f.back();
    SpMat Yt = Y.transpose();
    double tr = X.cwiseProduct(Yt).sum();
    return tr / X.rows();
}

}  // namespace

static double word_trace_cached(const NecklaceWord& w, PowerCache& pa, PowerCache& pb) {
    std::vector<const SpMat*> f;
    for (auto [n, m] : w.blocks) {
        f.push_back(&pa.get(n));
        f.push_back(&pb.get(m));
    }
    return trace_of_product(f);
}

double word_trace(const NecklaceWord& w, const SpMat& A, const SpMat& B, bool centered) {
    PowerCache pa{A, centered, {}}, pb{B, centered, {}};
    return word_trace_cached(w, pa, pb);
}

Estimate centered_joint_moment(const NecklaceWord& w, const PairSampler& sampler, int trials, std::uint64_t seed,
                               bool centered) {
    if (trials < 2) throw ParameterError("need at least two samples");
    double s = 0, s2 = 0;
    for (int t = 0; t < trials; ++t) {
        RngStream rng(seed, static_cast<std::uint64_t>(t));
        auto [A, B] = sampler(rng);
        double v = word_trace(w, A, B, centered);
        s += v;
        s2 += v * v;
    }
    double mean = s / trials;
    double var = std::max(0.0, (s2 - trials * mean * mean) / (trials - 1));
    return {mean, std::sqrt(var / trials)};
}

DegreeResult approximation_degree(const PairSampler& sampler, const DegreeOptions& opt) {
    if (opt.kmax < 2 || opt.kmax > 12) throw ParameterError("kmax must lie in [2, 12]");
    if (opt.trials < 2) throw ParameterError("need at least two samples");
    std::vector<NecklaceWord> words;
    for (int k = 2; k <= opt.kmax; ++k) {
        auto w = necklaces(k);
        words.insert(words.end(), w.begin(), w.end());
    }
    std::vector<double> s(words.size(), 0.0), s2(words.size(), 0.0);
    for (int t = 0; t < opt.trials; ++t) {
        RngStream rng(opt.seed, static_cast<std::uint64_t>(t));
        auto [A, B] = sampler(rng);
        PowerCache pa{A, true, {}}, pb{B, true, {}};
        for (size_t i = 0; i < words.size(); ++i) {
            double v = word_trace_cached(words[i], pa, pb);
            s[i] += v;
            s2[i] += v * v;
        }
    }
    DegreeResult res;
    res.degree = opt.kmax + 1;
    for (size_t i = 0; i < words.size(); ++i) {
        double mean = s[i] / opt.trials;
        double var = std::max(0.0, (s2[i] - opt.trials * mean * mean) / (opt.trials - 1));
        NecklaceEstimate e{words[i], {mean, std::sqrt(var / opt.trials)}, false};
        e.nonzero = std::abs(mean) > opt.threshold * e.value.error && std::abs(mean) > opt.floor;
        if (e.nonzero) res.degree = std::min(res.degree, words[i].degree);
        res.words.push_back(e);
    }
    return res;
}

DegreeResult approximation_degree(const AndersonSpec& spec, Scheme scheme, const DegreeOptions& opt) {
    return approximation_degree(anderson_sampler(spec, scheme), opt);
}

double moment_gap(const DegreeResult& r, int k) {
    double g = 0;
    for (const auto& w : r.words)
        if (w.word.degree == k && w.nonzero) g += w.word.rotations * w.value.value;
    return g;
}

double ie_parameter_anderson(double sigma, double J) {
    if (J == 0) throw ParameterError("hopping J must be nonzero");
    if (sigma == 0) return 0.0;
    double x = std::pow(sigma / J, -2);
    return -2.0 / ((2 * x + 1) * (2 * x + 1));
}

// ---------------------------------------------------------------- corrections

namespace {

std::vector<double> gaussian_smooth(const std::vector<double>& y, double bw) {
    if (bw <= 0) return y;
    const int n = static_cast<int>(y.size());
    const int half = static_cast<int>(std::ceil(4 * bw));
    std::vector<double> k(2 * half + 1);
    double ks = 0;
    for (int j = -half; j <= half; ++j) ks += k[j + half] = std::exp(-0.5 * j * j / (bw * bw));
    for (double& v : k) v /= ks;
    std::vector<double> out(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = -half; j <= half; ++j) {
            int p = i + j;
            if (p >= 0 && p < n) out[i] += k[j + half] * y[p];
        }
    return out;
}

// k-th derivative by repeated central differences, zero outside the grid
std::vector<double> derivative(std::vector<double> y, int k, double h) {
    const int n = static_cast<int>(y.size());
    auto at = [&](const std::vector<double>& v, int i) { return (i < 0 || i >= n) ? 0.0 : v[i]; };
    int second = k / 2;
    for (int r = 0; r < second; ++r) {
        std::vector<double> z(n);
        for (int i = 0; i < n; ++i) z[i] = (at(y, i + 1) - 2 * at(y, i) + at(y, i - 1)) / (h * h);
        y.swap(z);
    }
    if (k % 2 == 1) {
        std::vector<double> z(n);
        for (int i = 0; i < n; ++i) z[i] = (at(y, i + 1) - at(y, i - 1)) / (2 * h);
        y.swap(z);
    }
    return y;
}

}  // namespace

CorrectedDensity moment_corrected_density(const Density& base, double mu_exact, double mu_free, int k,
                                          double bandwidth_bins) {
    if (k < 1) throw ParameterError("derivative order must be >= 1");
    if (base.bins() < 3) throw ParameterError("need at least three bins");
    const double h = base.width(0);
    for (int i = 1; i < base.bins(); ++i)
        if (std::abs(base.width(i) - h) > 1e-9 * h) throw ParameterError("correction needs a uniform grid");
    CorrectedDensity out;
    out.density = base;
    double coeff = (mu_exact - mu_free) / std::tgamma(k + 1.0);
    if (coeff == 0) return out;
    double sign = k % 2 == 0 ? 1.0 : -1.0;
    std::vector<double> heights(base.bins());
    for (int i = 0; i < base.bins(); ++i) heights[i] = base.height(i);
    auto correction = [&](double bw) {
        std::vector<double> d = derivative(gaussian_smooth(heights, bw), k, h);
        for (double& v : d) v *= coeff * sign;
        return d;
    };
    std::vector<double> c1 = correction(bandwidth_bins), c2 = correction(1.5 * bandwidth_bins);
    double size = 0, spread = 0;
    for (int i = 0; i < base.bins(); ++i) {
        size += std::abs(c1[i]) * h;
        spread += std::abs(c1[i] - c2[i]) * h;
    }
    out.noisy = spread > 0.5 * size;
    double total = 0;
    for (int i = 0; i < base.bins(); ++i) {
        double w = std::max(0.0, heights[i] + c1[i]);
        out.density.masses[i] = w * h;
        total += out.density.masses[i];
    }
    if (total <= 0) throw NumericError("corrected density has no mass");
    for (double& m : out.density.masses) m /= total;
    return out;
}

}  // namespace qmbs
