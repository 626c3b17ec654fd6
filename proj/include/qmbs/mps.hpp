#pragma once

#include <vector>

#include "qmbs/chain.hpp"

namespace qmbs {

// Open-chain MPS in Vidal form: psi = Gamma[1] Lambda[1] Gamma[2] ... Gamma[N].
// gamma[p][i] is (bond p-1) x (bond p), 0-based p; lambda[b] holds bond b = 0..N with
// lambda[0] = lambda[N] = (1).
struct MpsState {
    int N = 0, d = 2, chi = 1;
    std::vector<std::vector<CMat>> gamma;
    std::vector<Vec> lambda;
    std::vector<double> discarded;  // accumulated truncated weight per bond

    int bond_dim(int b) const { return static_cast<int>(lambda[b].size()); }
};

MpsState init_product_state(int N, int d, int chi);
// Product state with the given site vectors (normalized internally).
MpsState product_state(const std::vector<CVec>& sites, int chi);

// Contracted state on d^N, site 1 slowest. Intended for small chains.
CVec mps_to_dense(const MpsState& s);
double mps_norm(const MpsState& s);
// <psi|sum h|psi> / <psi|psi> by environment contraction; no gauge assumption.
double mps_energy(const MpsState& s, const std::vector<LocalTerm>& terms);

// Restores exact Vidal gauge and unit norm by a QR sweep and an SVD sweep.
void canonicalize(MpsState& s);
// Schmidt values at bond b (1..N-1) after canonicalization of a copy.
Vec schmidt_at_bond(const MpsState& s, int bond);

struct GateResult {
    double norm = 0;       // norm of the updated two-site block before renormalization
    double discarded = 0;  // truncated weight fraction
    int kept = 0;
};

// exp(-tau h) for Hermitian h.
CMat gate_from_term(const CMat& h, double tau);
// Two-site update on sites (l, l+1), l = 1..N-1 (1-based).
GateResult apply_two_site(MpsState& s, const CMat& gate, int l);

enum class TrotterOrder { First, Second };

// One sweep over odd bonds (1,2),(3,4),... and even bonds (2,3),...
// First order applies odd then even layers with step tau. Second order uses tau/2, tau, tau/2.
void trotter_sweep(MpsState& s, const std::vector<LocalTerm>& terms, double tau, TrotterOrder order);

struct ImagTimeOptions {
    double tau_start = 0.1, tau_end = 1e-3;
    int stages = 5;               // geometric schedule between the two
    int max_sweeps_per_stage = 2000;
    int window = 50;              // convergence: |E(k) - E(k-window)| < energy_tol
    double energy_tol = 1e-9;
    double discard_warning = 1e-6;
    TrotterOrder order = TrotterOrder::Second;
};

struct ImagTimeResult {
    MpsState state;
    std::vector<double> energies;  // after each sweep
    std::vector<double> taus;
    int sweeps = 0;
    bool converged = false;
    bool quality_warning = false;  // truncation exceeded discard_warning at some bond
    double final_energy = 0;
};

std::vector<double> tau_schedule(const ImagTimeOptions& opt);
ImagTimeResult imaginary_time_ground(const MpsState& initial, const std::vector<LocalTerm>& terms,
                                     const ImagTimeOptions& opt = {});

struct ChiPoint {
    int chi = 1;
    double energy = 0;
    int sweeps = 0;
    bool quality_warning = false;
};
// One run per bond cap, each from the same random product state drawn from seed.
std::vector<ChiPoint> energy_vs_chi(int N, int d, const std::vector<LocalTerm>& terms, const std::vector<int>& chis,
                                    std::uint64_t seed, const ImagTimeOptions& opt = {});

MpsState random_product_state(int N, int d, int chi, RngStream& rng);

}  // namespace qmbs
