#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qmbs/randmat.hpp"

namespace qmbs {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

BigInt binomial(int n, int k);
BigInt motzkin_number(int n);
BigInt catalan(int k);
// ((a-b)/(a+b)) C(a+b, b); requires 1 <= b <= a
BigInt ballot(int a, int b);

// log2 of a positive big integer, accurate to double precision
double log2_big(const BigInt& x);
double log2_big(const BigRational& x);

// Bracket strings over {0, l, r}. Returns (unmatched r, unmatched l).
std::pair<int, int> canonical_class(const std::string& s);

// Strings of length n with no unmatched r and m unmatched l.
BigInt count_class(int n, int m);

struct SchmidtSpectrum {
    std::vector<double> p;              // one entry per distinct coefficient
    std::vector<BigInt> multiplicity;
    std::vector<BigRational> exact;     // filled on the exact path only
    BigInt rank;
    double entropy_bits = 0;
};

// Half-chain cut of the uniform Motzkin state on n (even) sites.
SchmidtSpectrum schmidt_spectrum_d3(int n);
// Same quantities from log-gamma sums; no exact rationals. Used for large n.
SchmidtSpectrum schmidt_spectrum_d3_logdomain(int n);

// Constant c in S ~ (1/2) log2 L + c with L = n/2: the entropy of a Maxwell
// law with scale sqrt(L/3), in bits.
double motzkin_entropy_offset();
double entropy_asymptotics_d3(int n);

// Strings on n sites of the d=4 half chain that realize one particle word of length m.
BigInt d4_count(int m, int n);
SchmidtSpectrum d4_schmidt(int n);
double d4_entropy_asymptotic(int n);

// Mirror strings: letters 0, a (alpha), b (beta), g (gamma) encoded 0..3.
// Parsing accepts ASCII or the Greek letters and ignores a ':' separator.
std::vector<int> parse_mirror(const std::string& s);
bool is_good_mirror(const std::vector<int>& letters);
bool is_good_mirror(const std::string& s);
std::vector<std::vector<int>> good_mirror_strings(int n);  // chains of 2n sites

std::vector<std::string> motzkin_paths(int n);
std::vector<std::string> dyck_paths(int k);  // semilength k
// Uniform superposition over Motzkin paths as a vector on 3^n; letters 0,l,r -> 0,1,2, site 1 slowest.
Vec motzkin_state(int n);
int motzkin_digit(char c);

// Distinct Dyck paths obtained by deleting one adjacent "lr".
std::vector<std::string> lr_removals(const std::string& b);

using ParentDist = std::vector<std::pair<std::string, BigRational>>;
BigRational supertree_p(int i, int n);
ParentDist supertree_parent_dist(const std::string& b);
// Sum over b in D_n of Pr[f(b) = a], for every a in D_{n-1}.
std::map<std::string, BigRational> supertree_preimage_mass(int n);
// Deterministic map D_k -> D_{k-1}, 1..4 preimages per image, via integral flow.
std::map<std::string, std::string> supertree_integral_matching(int k);

struct DyckWalk {
    int n = 0;
    std::vector<std::string> states;
    Mat P;
    Vec pi;
    Mat H_eff;
};
DyckWalk dyck_walk(int n);

struct XParticleChain {
    int n = 0;
    Vec alpha2, beta2;       // length n-1
    Vec diag, offdiag;       // hopping Hamiltonian without the boundary potential
    Vec ground;              // normalized, nonnegative
    Vec p_right, p_left;     // P(j, j+1), P(j+1, j)
};
XParticleChain x_particle_chain(int n);
// Eigenvalues of the symmetric tridiagonal matrix, ascending.
Vec tridiagonal_eigenvalues(const Vec& diag, const Vec& offdiag);

}  // namespace qmbs
