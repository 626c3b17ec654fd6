#include "qmbs/density.hpp"

#include <algorithm>
#include <cmath>

#include "qmbs/errors.hpp"

namespace qmbs {

std::vector<double> uniform_edges(double lo, double hi, int bins) {
    if (bins < 1) throw ParameterError("need at least one bin");
    if (!(hi > lo)) throw ParameterError("edge range must be increasing");
    std::vector<double> e(bins + 1);
    for (int i = 0; i <= bins; ++i) e[i] = lo + (hi - lo) * i / bins;
    e[bins] = hi;
    return e;
}

static double quantile_sorted(const std::vector<double>& s, double q) {
    double pos = q * (s.size() - 1);
    size_t i = static_cast<size_t>(std::floor(pos));
    if (i + 1 >= s.size()) return s.back();
    double f = pos - i;
    return s[i] * (1 - f) + s[i + 1] * f;
}

std::vector<double> freedman_diaconis_edges(std::vector<double> samples, int max_bins) {
    if (samples.size() < 2) throw ParameterError("need at least two samples for binning");
    std::sort(samples.begin(), samples.end());
    double lo = samples.front(), hi = samples.back();
    if (hi - lo <= 1e-12 * std::max(1.0, std::abs(lo))) {
        return uniform_edges(lo - 0.5, hi + 0.5, 1);
    }
    double iqr = quantile_sorted(samples, 0.75) - quantile_sorted(samples, 0.25);
    int bins;
    if (iqr > 0) {
        double h = 2.0 * iqr / std::cbrt(static_cast<double>(samples.size()));
        bins = static_cast<int>(std::ceil((hi - lo) / h));
    } else {
        bins = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(samples.size()))));
    }
    bins = std::clamp(bins, 1, max_bins);
    double pad = 1e-9 * (hi - lo);
    return uniform_edges(lo - pad, hi + pad, bins);
}

Density histogram(const std::vector<double>& samples, const std::vector<double>& edges) {
    return histogram(samples, std::vector<double>(samples.size(), 1.0), edges);
}

Density histogram(const std::vector<double>& samples, const std::vector<double>& weights,
                  const std::vector<double>& edges) {
    if (edges.size() < 2) throw ParameterError("need at least two edges");
    for (size_t i = 1; i < edges.size(); ++i)
        if (!(edges[i] > edges[i - 1])) throw ParameterError("edges must be strictly increasing");
    if (weights.size() != samples.size()) throw ParameterError("weights and samples differ in length");
    Density d;
    d.edges = edges;
    d.masses.assign(edges.size() - 1, 0.0);
    double total = 0;
    for (size_t k = 0; k < samples.size(); ++k) {
        double x = samples[k];
        if (x < edges.front() || x > edges.back()) continue;
        auto it = std::upper_bound(edges.begin(), edges.end(), x);
        size_t bin = static_cast<size_t>(it - edges.begin());
        bin = bin == 0 ? 0 : bin - 1;
        if (bin >= d.masses.size()) bin = d.masses.size() - 1;
        d.masses[bin] += weights[k];
        total += weights[k];
    }
    if (total <= 0) throw NumericError("no samples fell inside the histogram range");
    for (double& m : d.masses) m /= total;
    return d;
}

double l1_distance(const Density& a, const Density& b) {
    if (a.edges.size() != b.edges.size()) throw ParameterError("densities are on different grids");
    double s = 0;
    for (size_t i = 0; i < a.masses.size(); ++i) s += std::abs(a.masses[i] - b.masses[i]);
    return s;
}

Density mix(const Density& a, const Density& b, double p) {
    if (a.edges.size() != b.edges.size()) throw ParameterError("densities are on different grids");
    Density out;
    out.edges = a.edges;
    out.masses.resize(a.masses.size());
    for (size_t i = 0; i < a.masses.size(); ++i) out.masses[i] = p * a.masses[i] + (1 - p) * b.masses[i];
    return out;
}

}  // namespace qmbs
