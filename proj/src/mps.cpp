#include "qmbs/mps.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>

#include "qmbs/errors.hpp"

namespace qmbs {

namespace {

constexpr double kSingularCutoff = 1e-13;  // relative to the largest singular value

void check_state(const MpsState& s) {
    if (s.N < 2) throw ParameterError("MPS needs N >= 2");
    if (static_cast<int>(s.gamma.size()) != s.N || static_cast<int>(s.lambda.size()) != s.N + 1)
        throw ValidationError("malformed MPS");
}

// Site tensors with the right bond weight absorbed: A[p][i] = Gamma[p][i] diag(lambda[p+1]).
std::vector<std::vector<CMat>> absorbed(const MpsState& s) {
    std::vector<std::vector<CMat>> A(s.N);
    for (int p = 0; p < s.N; ++p)
        for (int i = 0; i < s.d; ++i) A[p].push_back(s.gamma[p][i] * s.lambda[p + 1].asDiagonal());
    return A;
}

Vec inverse_weights(const Vec& w) { return w.cwiseInverse(); }

}  // namespace

MpsState product_state(const std::vector<CVec>& sites, int chi) {
    if (sites.size() < 2) throw ParameterError("MPS needs N >= 2");
    if (chi < 1) throw ParameterError("bond cap must be >= 1");
    MpsState s;
    s.N = static_cast<int>(sites.size());
    s.d = static_cast<int>(sites[0].size());
    s.chi = chi;
    for (const auto& v : sites) {
        if (v.size() != s.d) throw ParameterError("site vectors must share a dimension");
        double nv = v.norm();
        if (nv == 0) throw ParameterError("zero site vector");
        std::vector<CMat> g;
        for (int i = 0; i < s.d; ++i) g.push_back(CMat::Constant(1, 1, v(i) / nv));
        s.gamma.push_back(std::move(g));
    }
    s.lambda.assign(s.N + 1, Vec::Ones(1));
    s.discarded.assign(s.N + 1, 0.0);
    return s;
}

MpsState init_product_state(int N, int d, int chi) {
    if (N < 2 || d < 2) throw ParameterError("MPS needs N >= 2 and d >= 2");
    CVec e0 = CVec::Zero(d);
    e0(0) = 1;
    return product_state(std::vector<CVec>(N, e0), chi);
}

MpsState random_product_state(int N, int d, int chi, RngStream& rng) {
    std::vector<CVec> sites;
    for (int p = 0; p < N; ++p) {
        CVec v(d);
        for (int i = 0; i < d; ++i) v(i) = cplx(rng.normal(), rng.normal());
        sites.push_back(v);
    }
    return product_state(sites, chi);
}

CVec mps_to_dense(const MpsState& s) {
    check_state(s);
    auto A = absorbed(s);
    CMat psi(s.d, A[0][0].cols());
    for (int i = 0; i < s.d; ++i) psi.row(i) = A[0][i];
    for (int p = 1; p < s.N; ++p) {
        CMat next(psi.rows() * s.d, A[p][0].cols());
        for (long long r = 0; r < psi.rows(); ++r)
            for (int i = 0; i < s.d; ++i) next.row(r * s.d + i) = psi.row(r) * A[p][i];
        psi.swap(next);
    }
    return psi.col(0);
}

namespace {

std::vector<CMat> left_environments(const std::vector<std::vector<CMat>>& A) {
    std::vector<CMat> L{CMat::Ones(1, 1)};
    for (const auto& site : A) {
        CMat next = CMat::Zero(site[0].cols(), site[0].cols());
        for (const auto& a : site) next += a.adjoint() * L.back() * a;
        L.push_back(next);
    }
    return L;  // L[p]: everything left of site p (0-based)
}

std::vector<CMat> right_environments(const std::vector<std::vector<CMat>>& A) {
    const int N = static_cast<int>(A.size());
    std::vector<CMat> R(N + 1);
    R[N] = CMat::Ones(1, 1);
    for (int p = N - 1; p >= 0; --p) {
        R[p] = CMat::Zero(A[p][0].rows(), A[p][0].rows());
        for (const auto& a : A[p]) R[p] += a.conjugate() * R[p + 1] * a.transpose();
    }
    return R;  // R[p]: site p and everything to its right
}

}  // namespace

double mps_norm(const MpsState& s) {
    check_state(s);
    auto L = left_environments(absorbed(s));
    return std::sqrt(std::max(0.0, L.back()(0, 0).real()));
}

double mps_energy(const MpsState& s, const std::vector<LocalTerm>& terms) {
    check_state(s);
    const int d = s.d;
    auto A = absorbed(s);
    auto L = left_environments(A);
    auto R = right_environments(A);
    const double nn = L.back()(0, 0).real();
    if (nn <= 0) throw NumericError("state has zero norm");
    double e = 0;
    for (const auto& [l, h] : terms) {
        if (l < 1 || l > s.N - 1 || h.rows() != d * d) throw ParameterError("terms must be two-site and inside the chain");
        const int p = l - 1;
        std::vector<CMat> theta(d * d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) theta[i * d + j] = A[p][i] * A[p + 1][j];
        CMat Rt = R[p + 2].transpose();
        for (int a = 0; a < d * d; ++a) {
            CMat phi = CMat::Zero(theta[0].rows(), theta[0].cols());
            for (int b = 0; b < d * d; ++b)
                if (h(a, b) != cplx(0, 0)) phi += h(a, b) * theta[b];
            e += (theta[a].conjugate().cwiseProduct(L[p] * phi * Rt)).sum().real();
        }
    }
    return e / nn;
}

void canonicalize(MpsState& s) {
    check_state(s);
    const int d = s.d, N = s.N;
    auto A = absorbed(s);
    // left-canonical QR sweep
    for (int p = 0; p < N - 1; ++p) {
        const long long rl = A[p][0].rows(), rr = A[p][0].cols();
        CMat M(d * rl, rr);
        for (int i = 0; i < d; ++i) M.middleRows(i * rl, rl) = A[p][i];
        Eigen::HouseholderQR<CMat> qr(M);
        const long long k = std::min(M.rows(), M.cols());
        CMat Q = qr.householderQ() * CMat::Identity(M.rows(), k);
        CMat Rm = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
        for (int i = 0; i < d; ++i) A[p][i] = Q.middleRows(i * rl, rl);
        for (int i = 0; i < d; ++i) A[p + 1][i] = Rm * A[p + 1][i];
    }
    double nrm = 0;
    for (const auto& a : A[N - 1]) nrm += a.squaredNorm();
    nrm = std::sqrt(nrm);
    if (!(nrm > 0) || !std::isfinite(nrm)) throw NumericError("state has zero or invalid norm");
    for (auto& a : A[N - 1]) a /= nrm;
    // right-to-left SVD sweep
    for (int p = N - 1; p >= 1; --p) {
        const long long rl = A[p][0].rows(), rr = A[p][0].cols();
        CMat M(rl, d * rr);
        for (int i = 0; i < d; ++i) M.middleCols(i * rr, rr) = A[p][i];
        Eigen::BDCSVD<CMat> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Vec& sv = svd.singularValues();
        long long k = 0;
        while (k < sv.size() && k < s.chi && sv(k) > kSingularCutoff * sv(0)) ++k;
        Vec lam = sv.head(k);
        double kept = lam.squaredNorm(), total = sv.squaredNorm();
        if (total > 0) s.discarded[p] += 1 - kept / total;
        lam /= std::sqrt(kept);
        CMat Vh = svd.matrixV().leftCols(k).adjoint();
        s.gamma[p].assign(d, CMat());
        for (int i = 0; i < d; ++i) {
            CMat Bi = Vh.middleCols(i * rr, rr);
            s.gamma[p][i] = (p == N - 1) ? Bi : CMat(Bi * inverse_weights(s.lambda[p + 1]).asDiagonal());
        }
        CMat US = svd.matrixU().leftCols(k) * lam.asDiagonal();
        for (int i = 0; i < d; ++i) A[p - 1][i] = A[p - 1][i] * US;
        s.lambda[p] = lam;
    }
    for (int i = 0; i < d; ++i) s.gamma[0][i] = A[0][i] * inverse_weights(s.lambda[1]).asDiagonal();
    s.lambda[0] = s.lambda[N] = Vec::Ones(1);
}

Vec schmidt_at_bond(const MpsState& s, int bond) {
    if (bond < 1 || bond > s.N - 1) throw ParameterError("bond out of range");
    MpsState c = s;
    canonicalize(c);
    return c.lambda[bond];
}

CMat gate_from_term(const CMat& h, double tau) {
    if (hermitian_defect(h) > 1e-10 * std::max(1.0, h.cwiseAbs().maxCoeff())) throw ValidationError("term is not Hermitian");
    Eigen::SelfAdjointEigenSolver<CMat> es(h);
    Vec w = (-tau * es.eigenvalues().array()).exp();
    return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
}

GateResult apply_two_site(MpsState& s, const CMat& gate, int l) {
    check_state(s);
    const int d = s.d;
    if (l < 1 || l > s.N - 1) throw ParameterError("bond out of range");
    if (gate.rows() != d * d || gate.cols() != d * d) throw ParameterError("gate must be d^2 x d^2");
    const int p = l - 1;
    const Vec& lamL = s.lambda[p];
    const Vec& lamM = s.lambda[p + 1];
    const Vec& lamR = s.lambda[p + 2];
    const long long rl = lamL.size(), rr = lamR.size();
    std::vector<CMat> theta(d * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            theta[i * d + j] = lamL.asDiagonal() * s.gamma[p][i] * lamM.asDiagonal() * s.gamma[p + 1][j] * lamR.asDiagonal();
    double theta_norm = 0;
    for (const auto& t : theta) theta_norm += t.squaredNorm();
    theta_norm = std::sqrt(theta_norm);
    CMat M = CMat::Zero(d * rl, d * rr);
    for (int a = 0; a < d * d; ++a)
        for (int b = 0; b < d * d; ++b)
            if (gate(a, b) != cplx(0, 0)) M.block((a / d) * rl, (a % d) * rr, rl, rr) += gate(a, b) * theta[b];
    if (!M.allFinite()) throw NumericError("non-finite two-site block");
    Eigen::BDCSVD<CMat> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& sv = svd.singularValues();
    const double scale = gate.cwiseAbs().maxCoeff() * theta_norm;
    if (sv.size() == 0 || !(sv(0) > 1e-14 * scale)) throw NumericError("two-site block vanished");
    long long k = 0;
    while (k < sv.size() && k < s.chi && sv(k) > kSingularCutoff * sv(0)) ++k;
    GateResult res;
    const double total = sv.squaredNorm(), kept = sv.head(k).squaredNorm();
    res.norm = std::sqrt(total);
    res.discarded = 1 - kept / total;
    res.kept = static_cast<int>(k);
    s.discarded[l] += res.discarded;
    Vec lam = sv.head(k) / std::sqrt(kept);
    CMat U = svd.matrixU().leftCols(k);
    CMat Vh = svd.matrixV().leftCols(k).adjoint();
    Vec invL = inverse_weights(lamL), invR = inverse_weights(lamR);
    for (int i = 0; i < d; ++i) {
        s.gamma[p][i] = invL.asDiagonal() * U.middleRows(i * rl, rl);
        s.gamma[p + 1][i] = Vh.middleCols(i * rr, rr) * invR.asDiagonal();
    }
    s.lambda[p + 1] = lam;
    return res;
}

namespace {

struct LayerGates {
    std::vector<std::pair<int, CMat>> odd_half, odd_full, even_full;
};

LayerGates make_gates(const std::vector<LocalTerm>& terms, double tau, TrotterOrder order) {
    LayerGates g;
    for (const auto& [l, h] : terms) {
        if (l % 2 == 1) {
            if (order == TrotterOrder::Second)
                g.odd_half.emplace_back(l, gate_from_term(h, tau / 2));
            else
                g.odd_full.emplace_back(l, gate_from_term(h, tau));
        } else {
            g.even_full.emplace_back(l, gate_from_term(h, tau));
        }
    }
    return g;
}

void sweep_with(MpsState& s, const LayerGates& g, TrotterOrder order) {
    auto layer = [&](const std::vector<std::pair<int, CMat>>& gates) {
        for (const auto& [l, gate] : gates) apply_two_site(s, gate, l);
    };
    if (order == TrotterOrder::First) {
        layer(g.odd_full);
        layer(g.even_full);
    } else {
        layer(g.odd_half);
        layer(g.even_full);
        layer(g.odd_half);
    }
}

}  // namespace

void trotter_sweep(MpsState& s, const std::vector<LocalTerm>& terms, double tau, TrotterOrder order) {
    sweep_with(s, make_gates(terms, tau, order), order);
}

std::vector<double> tau_schedule(const ImagTimeOptions& opt) {
    if (opt.stages < 1 || !(opt.tau_start > 0) || !(opt.tau_end > 0)) throw ParameterError("invalid time-step schedule");
    std::vector<double> taus;
    for (int k = 0; k < opt.stages; ++k) {
        double t = opt.stages == 1 ? 0.0 : static_cast<double>(k) / (opt.stages - 1);
        taus.push_back(opt.tau_start * std::pow(opt.tau_end / opt.tau_start, t));
    }
    return taus;
}

ImagTimeResult imaginary_time_ground(const MpsState& initial, const std::vector<LocalTerm>& terms,
                                     const ImagTimeOptions& opt) {
    check_state(initial);
    if (opt.window < 1 || opt.max_sweeps_per_stage < 1) throw ParameterError("invalid sweep budget");
    ImagTimeResult out;
    out.state = initial;
    canonicalize(out.state);
    for (double tau : tau_schedule(opt)) {
        const LayerGates gates = make_gates(terms, tau, opt.order);
        const std::size_t stage_start = out.energies.size();
        out.converged = false;
        for (int sweep = 0; sweep < opt.max_sweeps_per_stage; ++sweep) {
            sweep_with(out.state, gates, opt.order);
            canonicalize(out.state);
            out.energies.push_back(mps_energy(out.state, terms));
            out.taus.push_back(tau);
            ++out.sweeps;
            const std::size_t done = out.energies.size() - stage_start;
            if (done > static_cast<std::size_t>(opt.window) &&
                std::abs(out.energies.back() - out.energies[out.energies.size() - 1 - opt.window]) < opt.energy_tol) {
                out.converged = true;
                break;
            }
        }
    }
    for (double w : out.state.discarded)
        if (w > opt.discard_warning) out.quality_warning = true;
    out.final_energy = out.energies.empty() ? mps_energy(out.state, terms) : out.energies.back();
    return out;
}

std::vector<ChiPoint> energy_vs_chi(int N, int d, const std::vector<LocalTerm>& terms, const std::vector<int>& chis,
                                    std::uint64_t seed, const ImagTimeOptions& opt) {
    std::vector<ChiPoint> out;
    for (int chi : chis) {
        RngStream rng(seed, 0);
        MpsState init = random_product_state(N, d, chi, rng);
        auto run = imaginary_time_ground(init, terms, opt);
        out.push_back({chi, run.final_energy, run.sweeps, run.quality_warning});
    }
    return out;
}

}  // namespace qmbs
