#include "qmbs/motzkin.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <set>
#include <unordered_map>

#include "qmbs/errors.hpp"

namespace qmbs {

namespace mp = boost::multiprecision;

BigInt binomial(int n, int k) {
    if (k < 0 || n < 0 || k > n) return 0;
    k = std::min(k, n - k);
    BigInt r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

BigInt motzkin_number(int n) {
    if (n < 0) throw ParameterError("motzkin_number needs n >= 0");
    BigInt a = 1, b = 1;  // M_{k-2}, M_{k-1}
    if (n <= 1) return 1;
    for (int k = 2; k <= n; ++k) {
        BigInt c = ((2 * k + 1) * b + 3 * (k - 1) * a) / (k + 2);
        a = b;
        b = c;
    }
    return b;
}

BigInt catalan(int k) {
    if (k < 0) throw ParameterError("catalan needs k >= 0");
    return binomial(2 * k, k) / (k + 1);
}

BigInt ballot(int a, int b) {
    if (b < 1 || b > a) throw ParameterError("ballot requires 1 <= b <= a");
    return (a - b) * binomial(a + b, b) / (a + b);
}

double log2_big(const BigInt& x) {
    if (x <= 0) throw ParameterError("log2 of a nonpositive number");
    int top = static_cast<int>(mp::msb(x));
    int shift = std::max(0, top - 60);
    BigInt head = x >> shift;
    return std::log2(head.convert_to<double>()) + shift;
}

double log2_big(const BigRational& x) { return log2_big(mp::numerator(x)) - log2_big(mp::denominator(x)); }

std::pair<int, int> canonical_class(const std::string& s) {
    int p = 0, depth = 0;
    for (char c : s) {
        if (c == 'l') {
            ++depth;
        } else if (c == 'r') {
            if (depth == 0)
                ++p;
            else
                --depth;
        } else if (c != '0') {
            throw ValidationError(std::string("invalid bracket letter '") + c + "'");
        }
    }
    return {p, depth};
}

BigInt count_class(int n, int m) {
    if (m < 0 || n < 0 || m > n) throw ParameterError("count_class needs 0 <= m <= n");
    std::vector<BigInt> fact(n + 2);
    fact[0] = 1;
    for (int i = 1; i <= n + 1; ++i) fact[i] = fact[i - 1] * i;
    BigInt total = 0;
    for (int i = 0; 2 * i + m <= n; ++i) total += (m + 1) * fact[n] / (fact[i + m + 1] * fact[i] * fact[n - 2 * i - m]);
    return total;
}

namespace {

void finish_spectrum(SchmidtSpectrum& out, const std::vector<double>& log2p) {
    out.p.resize(log2p.size());
    out.entropy_bits = 0;
    for (size_t m = 0; m < log2p.size(); ++m) {
        out.p[m] = std::exp2(log2p[m]);
        double mult = log2p[m] == -std::numeric_limits<double>::infinity() ? 0.0 : out.multiplicity[m].convert_to<double>();
        if (out.p[m] > 0) out.entropy_bits -= mult * out.p[m] * log2p[m];
    }
}

// Row h of the table of strings with no unmatched r, indexed by final height.
std::vector<BigInt> class_row(int h) {
    std::vector<BigInt> row(1, 1), next;
    for (int step = 0; step < h; ++step) {
        next.assign(row.size() + 1, 0);
        for (size_t m = 0; m < row.size(); ++m) {
            next[m] += row[m];
            next[m + 1] += row[m];
            if (m > 0) next[m - 1] += row[m];
        }
        row.swap(next);
    }
    return row;
}

double log_sum_exp(const std::vector<double>& v) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double x : v) mx = std::max(mx, x);
    if (!std::isfinite(mx)) return mx;
    double s = 0;
    for (double x : v) s += std::exp(x - mx);
    return mx + std::log(s);
}

// natural log of count_class(h, m) by summing the dominant terms of its closed form
double log_count_class(int h, int m) {
    auto term = [&](int i) {
        return std::log(m + 1.0) + std::lgamma(h + 1.0) - std::lgamma(i + m + 2.0) - std::lgamma(i + 1.0) -
               std::lgamma(h - 2.0 * i - m + 1.0);
    };
    int imax = (h - m) / 2;
    // terms are log-concave in i; the ratio t_{i+1}/t_i = 1 locates the peak
    double lo = 0, hi = imax;
    for (int it = 0; it < 100 && hi - lo > 0.5; ++it) {
        double mid = 0.5 * (lo + hi);
        double ratio = (h - 2 * mid - m) * (h - 2 * mid - m - 1) / ((mid + m + 2) * (mid + 1));
        (ratio > 1 ? lo : hi) = mid;
    }
    int peak = std::clamp(static_cast<int>(std::lround(lo)), 0, imax);
    double top = term(peak);
    std::vector<double> terms{top};
    for (int i = peak - 1; i >= 0; --i) {
        double t = term(i);
        terms.push_back(t);
        if (t < top - 60) break;
    }
    for (int i = peak + 1; i <= imax; ++i) {
        double t = term(i);
        terms.push_back(t);
        if (t < top - 60) break;
    }
    return log_sum_exp(terms);
}

}  // namespace

SchmidtSpectrum schmidt_spectrum_d3(int n) {
    if (n < 2 || n % 2 != 0) throw ParameterError("schmidt_spectrum_d3 needs an even n >= 2");
    if (n > 4096) return schmidt_spectrum_d3_logdomain(n);
    const int h = n / 2;
    std::vector<BigInt> row = class_row(h);
    BigInt total = 0;
    for (const auto& x : row) total += x * x;
    SchmidtSpectrum out;
    out.multiplicity.assign(row.size(), 1);
    out.rank = 0;
    std::vector<double> log2p(row.size());
    double log2_total = log2_big(total);
    for (size_t m = 0; m < row.size(); ++m) {
        if (row[m] > 0) ++out.rank;
        log2p[m] = 2 * log2_big(row[m]) - log2_total;
        if (n <= 256) out.exact.emplace_back(BigRational(row[m] * row[m], total));
    }
    finish_spectrum(out, log2p);
    return out;
}

SchmidtSpectrum schmidt_spectrum_d3_logdomain(int n) {
    if (n < 2 || n % 2 != 0) throw ParameterError("schmidt_spectrum_d3 needs an even n >= 2");
    const int h = n / 2;
    std::vector<double> logc;
    double best = -std::numeric_limits<double>::infinity();
    for (int m = 0; m <= h; ++m) {
        double l = 2 * log_count_class(h, m);
        logc.push_back(l);
        best = std::max(best, l);
        if (l < best - 80 && m > std::sqrt(static_cast<double>(h))) break;  // negligible tail
    }
    double lz = log_sum_exp(logc);
    SchmidtSpectrum out;
    out.multiplicity.assign(logc.size(), 1);
    out.rank = h + 1;  // every height 0..h is reachable
    std::vector<double> log2p(logc.size());
    for (size_t m = 0; m < logc.size(); ++m) log2p[m] = (logc[m] - lz) / std::log(2.0);
    finish_spectrum(out, log2p);
    return out;
}

double motzkin_entropy_offset() {
    const double euler_gamma = 0.57721566490153286061;
    return 0.5 * std::log2(2 * M_PI / 3) + (euler_gamma - 0.5) / std::log(2.0);
}

double entropy_asymptotics_d3(int n) {
    if (n < 4) throw ParameterError("entropy asymptotics need n >= 4");
    return 0.5 * std::log2(n / 2.0) + motzkin_entropy_offset();
}

BigInt d4_count(int m, int n) {
    if (m < 0 || n < 0 || m > n) throw ParameterError("d4_count needs 0 <= m <= n");
    // multiply the bracketed expression through by 2^(n-m)
    BigInt total = binomial(n, m) << (n - m);
    for (int k = 1; k <= n - m; ++k) total -= binomial(n - k, m) << (n - m - k);
    return total;
}

SchmidtSpectrum d4_schmidt(int n) {
    if (n < 1) throw ParameterError("d4_schmidt needs n >= 1");
    std::vector<BigInt> counts(n + 1);
    BigInt norm = 0;
    SchmidtSpectrum out;
    out.rank = 0;
    for (int m = 0; m <= n; ++m) {
        counts[m] = d4_count(m, n);
        BigInt mult = BigInt(1) << m;
        out.multiplicity.push_back(mult);
        norm += mult * counts[m] * counts[m];
        if (counts[m] > 0) out.rank += mult;
    }
    double log2_norm = log2_big(norm);
    std::vector<double> log2p(n + 1);
    for (int m = 0; m <= n; ++m) {
        log2p[m] = counts[m] > 0 ? 2 * log2_big(counts[m]) - log2_norm : -std::numeric_limits<double>::infinity();
        if (n <= 64) out.exact.emplace_back(BigRational(counts[m] * counts[m], norm));
    }
    finish_spectrum(out, log2p);
    return out;
}

double d4_entropy_asymptotic(int n) {
    if (n < 1) throw ParameterError("d4 asymptotics need n >= 1");
    return (std::sqrt(2.0) - 1) * n + 0.5 * std::log2(n) +
           0.5 * std::log2(std::sqrt(2.0) * M_PI / (3 + 2 * std::sqrt(2.0)));
}

std::vector<int> parse_mirror(const std::string& s) {
    std::vector<int> out;
    for (size_t i = 0; i < s.size();) {
        unsigned char c = s[i];
        if (c == ':' || c == ' ') {
            ++i;
            continue;
        }
        if (c == '0' || c == 'a' || c == 'b' || c == 'g') {
            out.push_back(c == '0' ? 0 : c == 'a' ? 1 : c == 'b' ? 2 : 3);
            ++i;
            continue;
        }
        // UTF-8 Greek: alpha CE B1, beta CE B2, gamma CE B3
        if (c == 0xCE && i + 1 < s.size()) {
            unsigned char d = s[i + 1];
            if (d >= 0xB1 && d <= 0xB3) {
                out.push_back(d - 0xB0);
                i += 2;
                continue;
            }
        }
        throw ValidationError("invalid mirror-string letter in '" + s + "'");
    }
    if (out.size() % 2 != 0) throw ValidationError("mirror string must have even length");
    return out;
}

bool is_good_mirror(const std::vector<int>& s) {
    if (s.size() % 2 != 0) throw ValidationError("mirror string must have even length");
    const size_t n = s.size() / 2;
    std::vector<int> a, b;
    int first_a = 0, last_b = 0;
    for (size_t i = 0; i < n; ++i) {
        if (s[i] < 0 || s[i] > 3 || s[n + i] < 0 || s[n + i] > 3) throw ValidationError("mirror letters are 0..3");
        if (s[i] != 0 && first_a == 0) first_a = s[i];
        if (s[i] == 1 || s[i] == 2) a.push_back(s[i]);
        if (s[n + i] != 0) last_b = s[n + i];
        if (s[n + i] == 1 || s[n + i] == 2) b.push_back(s[n + i]);
    }
    if (first_a == 3 || last_b == 3) return false;
    std::reverse(b.begin(), b.end());
    return a == b;
}

bool is_good_mirror(const std::string& s) { return is_good_mirror(parse_mirror(s)); }

std::vector<std::vector<int>> good_mirror_strings(int n) {
    if (n < 1 || n > 8) throw ParameterError("good_mirror_strings needs 1 <= n <= 8");
    std::vector<std::vector<int>> out;
    const long long total = 1LL << (4 * n);
    std::vector<int> s(2 * n);
    for (long long code = 0; code < total; ++code) {
        long long c = code;
        for (int i = 2 * n - 1; i >= 0; --i, c >>= 2) s[i] = static_cast<int>(c & 3);
        if (is_good_mirror(s)) out.push_back(s);
    }
    return out;
}

std::vector<std::string> motzkin_paths(int n) {
    if (n < 0 || n > 20) throw ParameterError("motzkin_paths needs 0 <= n <= 20");
    std::vector<std::string> out;
    std::string cur;
    std::function<void(int)> rec = [&](int depth) {
        int left = n - static_cast<int>(cur.size());
        if (left == 0) {
            if (depth == 0) out.push_back(cur);
            return;
        }
        if (depth > left) return;
        for (char c : {'0', 'l', 'r'}) {
            if (c == 'r' && depth == 0) continue;
            cur.push_back(c);
            rec(depth + (c == 'l') - (c == 'r'));
            cur.pop_back();
        }
    };
    rec(0);
    return out;
}

std::vector<std::string> dyck_paths(int k) {
    if (k < 0 || k > 12) throw ParameterError("dyck_paths needs 0 <= k <= 12");
    std::vector<std::string> out;
    for (const auto& p : motzkin_paths(2 * k))
        if (p.find('0') == std::string::npos) out.push_back(p);
    return out;
}

int motzkin_digit(char c) {
    switch (c) {
        case '0':
            return 0;
        case 'l':
            return 1;
        case 'r':
            return 2;
    }
    throw ValidationError(std::string("invalid bracket letter '") + c + "'");
}

Vec motzkin_state(int n) {
    if (n < 1 || n > 16) throw ParameterError("motzkin_state needs 1 <= n <= 16");
    long long dim = 1;
    for (int i = 0; i < n; ++i) dim *= 3;
    Vec psi = Vec::Zero(dim);
    auto paths = motzkin_paths(n);
    for (const auto& p : paths) {
        long long idx = 0;
        for (char c : p) idx = idx * 3 + motzkin_digit(c);
        psi(idx) = 1;
    }
    return psi / std::sqrt(static_cast<double>(paths.size()));
}

std::vector<std::string> lr_removals(const std::string& b) {
    std::set<std::string> out;
    for (size_t i = 0; i + 1 < b.size(); ++i)
        if (b[i] == 'l' && b[i + 1] == 'r') out.insert(b.substr(0, i) + b.substr(i + 2));
    return {out.begin(), out.end()};
}

BigRational supertree_p(int i, int n) {
    if (n < 3 || i < 1 || i > n - 2) throw ParameterError("supertree_p needs n >= 3 and 1 <= i <= n-2");
    return BigRational(BigInt(i) * (i + 1) * (3 * n - 2 * i - 1), BigInt(n) * (n + 1) * (n - 1));
}

namespace {

bool is_dyck(const std::string& s) {
    int depth = 0;
    for (char c : s) {
        if (c == 'l')
            ++depth;
        else if (c == 'r') {
            if (--depth < 0) return false;
        } else
            return false;
    }
    return depth == 0;
}

const ParentDist& parent_dist_cached(const std::string& b, std::unordered_map<std::string, ParentDist>& memo) {
    auto it = memo.find(b);
    if (it != memo.end()) return it->second;
    const int n = static_cast<int>(b.size()) / 2;
    std::map<std::string, BigRational> acc;
    if (n == 1) {
        acc[""] = 1;
    } else {
        // b = l s r t with s the part enclosed by the first bracket pair
        int depth = 0;
        size_t close = 0;
        for (size_t k = 0; k < b.size(); ++k) {
            depth += b[k] == 'l' ? 1 : -1;
            if (depth == 0) {
                close = k;
                break;
            }
        }
        std::string s = b.substr(1, close - 1), t = b.substr(close + 1);
        const int i = static_cast<int>(s.size()) / 2;
        if (i == 0) {
            for (const auto& [tp, pr] : parent_dist_cached(t, memo)) acc["lr" + tp] += pr;
        } else if (i == n - 1) {
            for (const auto& [sp, pr] : parent_dist_cached(s, memo)) acc["l" + sp + "r"] += pr;
        } else {
            BigRational pi = supertree_p(i, n);
            for (const auto& [sp, pr] : parent_dist_cached(s, memo)) acc["l" + sp + "r" + t] += pi * pr;
            for (const auto& [tp, pr] : parent_dist_cached(t, memo)) acc["l" + s + "r" + tp] += (1 - pi) * pr;
        }
    }
    ParentDist out;
    for (auto& [a, pr] : acc)
        if (pr != 0) out.emplace_back(a, pr);
    return memo.emplace(b, std::move(out)).first->second;
}

// Dinic max flow on unit and small integer capacities.
struct FlowGraph {
    struct Edge {
        int to, rev;
        int cap;
    };
    std::vector<std::vector<Edge>> g;
    std::vector<int> level, iter;

    explicit FlowGraph(int n) : g(n), level(n), iter(n) {}

    std::pair<int, int> add(int u, int v, int cap) {
        g[u].push_back({v, static_cast<int>(g[v].size()), cap});
        g[v].push_back({u, static_cast<int>(g[u].size()) - 1, 0});
        return {u, static_cast<int>(g[u].size()) - 1};
    }

    bool bfs(int s, int t) {
        std::fill(level.begin(), level.end(), -1);
        std::queue<int> q;
        level[s] = 0;
        q.push(s);
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (const auto& e : g[u])
                if (e.cap > 0 && level[e.to] < 0) {
                    level[e.to] = level[u] + 1;
                    q.push(e.to);
                }
        }
        return level[t] >= 0;
    }

    int dfs(int u, int t, int f) {
        if (u == t) return f;
        for (int& i = iter[u]; i < static_cast<int>(g[u].size()); ++i) {
            Edge& e = g[u][i];
            if (e.cap > 0 && level[e.to] == level[u] + 1) {
                int d = dfs(e.to, t, std::min(f, e.cap));
                if (d > 0) {
                    e.cap -= d;
                    g[e.to][e.rev].cap += d;
                    return d;
                }
            }
        }
        return 0;
    }

    int maxflow(int s, int t) {
        int flow = 0;
        while (bfs(s, t)) {
            std::fill(iter.begin(), iter.end(), 0);
            while (int f = dfs(s, t, std::numeric_limits<int>::max())) flow += f;
        }
        return flow;
    }
};

}  // namespace

ParentDist supertree_parent_dist(const std::string& b) {
    if (b.empty() || !is_dyck(b)) throw ValidationError("supertree needs a nonempty Dyck path over {l, r}");
    std::unordered_map<std::string, ParentDist> memo;
    return parent_dist_cached(b, memo);
}

std::map<std::string, BigRational> supertree_preimage_mass(int n) {
    if (n < 1 || n > 12) throw ParameterError("supertree_preimage_mass needs 1 <= n <= 12");
    std::map<std::string, BigRational> mass;
    for (const auto& a : dyck_paths(n - 1)) mass[a] = 0;
    std::unordered_map<std::string, ParentDist> memo;
    for (const auto& b : dyck_paths(n))
        for (const auto& [a, pr] : parent_dist_cached(b, memo)) mass[a] += pr;
    return mass;
}

std::map<std::string, std::string> supertree_integral_matching(int k) {
    if (k < 1 || k > 10) throw ParameterError("supertree_integral_matching needs 1 <= k <= 10");
    auto bs = dyck_paths(k), as = dyck_paths(k - 1);
    std::map<std::string, int> a_index;
    for (size_t i = 0; i < as.size(); ++i) a_index[as[i]] = static_cast<int>(i);
    const int nb = static_cast<int>(bs.size()), na = static_cast<int>(as.size());
    const int S = nb + na, T = S + 1;
    FlowGraph fg(T + 1);
    std::vector<std::vector<std::pair<int, int>>> b_edges(nb);  // (a index, edge slot)
    for (int i = 0; i < nb; ++i) {
        fg.add(S, i, 1);
        for (const auto& a : lr_removals(bs[i])) {
            int ai = a_index.at(a);
            auto slot = fg.add(i, nb + ai, 1);
            b_edges[i].emplace_back(ai, slot.second);
        }
    }
    std::vector<std::pair<int, int>> sink_edges(na);
    for (int j = 0; j < na; ++j) sink_edges[j] = fg.add(nb + j, T, 1);
    // first give every image one preimage, then let images take up to four
    if (fg.maxflow(S, T) != na) throw NumericError("supertree flow: some path has no preimage");
    for (auto [u, slot] : sink_edges) fg.g[u][slot].cap += 3;
    if (na + fg.maxflow(S, T) != nb) throw NumericError("supertree flow: preimage bound of four is infeasible");
    std::map<std::string, std::string> f;
    for (int i = 0; i < nb; ++i)
        for (auto [ai, slot] : b_edges[i])
            if (fg.g[i][slot].cap == 0) f[bs[i]] = as[ai];
    return f;
}

DyckWalk dyck_walk(int n) {
    if (n < 2 || n > 14) throw ParameterError("dyck_walk needs 2 <= n <= 14");
    DyckWalk w;
    w.n = n;
    std::map<std::string, int> index;
    for (int m = 0; 2 * m <= n; ++m)
        for (const auto& s : dyck_paths(m)) {
            index[s] = static_cast<int>(w.states.size());
            w.states.push_back(s);
        }
    const int D = static_cast<int>(w.states.size());
    auto strip = [](const std::string& u) {
        std::string s;
        for (char c : u)
            if (c != '0') s.push_back(c);
        return s;
    };
    std::vector<double> inv_sqrt_binom(n / 2 + 1);
    for (int m = 0; 2 * m <= n; ++m) inv_sqrt_binom[m] = 1.0 / std::sqrt(binomial(n, 2 * m).convert_to<double>());
    w.H_eff = Mat::Zero(D, D);
    for (const auto& u : motzkin_paths(n)) {
        std::string s = strip(u);
        int si = index.at(s);
        double ws = inv_sqrt_binom[s.size() / 2];
        for (int j = 0; j + 1 < n; ++j) {
            std::string pair = u.substr(j, 2);
            if (pair != "00" && pair != "lr") continue;
            std::string v = u;
            v.replace(j, 2, pair == "00" ? "lr" : "00");
            std::string t = strip(v);
            int ti = index.at(t);
            // projector onto (|00> - |lr>)/sqrt2 has entries +1/2 diagonal, -1/2 across
            w.H_eff(si, si) += 0.5 * ws * ws;
            w.H_eff(si, ti) += -0.5 * ws * inv_sqrt_binom[t.size() / 2];
        }
    }
    double total = motzkin_number(n).convert_to<double>();
    w.pi.resize(D);
    for (int i = 0; i < D; ++i) w.pi(i) = binomial(n, static_cast<int>(w.states[i].size())).convert_to<double>() / total;
    w.P.resize(D, D);
    for (int s = 0; s < D; ++s)
        for (int t = 0; t < D; ++t)
            w.P(s, t) = (s == t ? 1.0 : 0.0) - w.H_eff(s, t) / n * std::sqrt(w.pi(t) / w.pi(s));
    return w;
}

XParticleChain x_particle_chain(int n) {
    if (n < 2 || n > 100000) throw ParameterError("x_particle_chain needs 2 <= n <= 1e5");
    // log Motzkin numbers from the ratio recursion, stable in double precision
    std::vector<double> logm(n + 1, 0.0);
    double ratio = 1;  // M_k / M_{k-1}
    for (int k = 2; k <= n; ++k) {
        ratio = ((2.0 * k + 1) + 3.0 * (k - 1) / ratio) / (k + 2);
        logm[k] = logm[k - 1] + std::log(ratio);
    }
    XParticleChain c;
    c.n = n;
    c.alpha2.resize(n - 1);
    c.beta2.resize(n - 1);
    for (int j = 1; j <= n - 1; ++j) {
        c.alpha2(j - 1) = 0.5 * std::exp(logm[n - j - 1] - logm[n - j]);
        c.beta2(j - 1) = 0.5 * std::exp(logm[j - 1] - logm[j]);
    }
    c.diag = Vec::Zero(n);
    c.offdiag.resize(n - 1);
    for (int j = 0; j < n - 1; ++j) {
        c.diag(j) += c.alpha2(j);
        c.diag(j + 1) += c.beta2(j);
        c.offdiag(j) = -std::sqrt(c.alpha2(j) * c.beta2(j));
    }
    c.ground.resize(n);
    double top = -std::numeric_limits<double>::infinity();
    for (int j = 1; j <= n; ++j) top = std::max(top, 0.5 * (logm[j - 1] + logm[n - j]));
    for (int j = 1; j <= n; ++j) c.ground(j - 1) = std::exp(0.5 * (logm[j - 1] + logm[n - j]) - top);
    c.ground.normalize();
    c.p_right = c.alpha2;
    c.p_left = c.beta2;
    return c;
}

Vec tridiagonal_eigenvalues(const Vec& diag, const Vec& offdiag) {
    if (offdiag.size() + 1 != diag.size()) throw ParameterError("tridiagonal sizes disagree");
    Eigen::SelfAdjointEigenSolver<Mat> es;
    es.computeFromTridiagonal(diag, offdiag, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

}  // namespace qmbs
