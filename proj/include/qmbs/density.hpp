#pragma once

#include <vector>

namespace qmbs {

// Histogram with ascending edges; masses are nonnegative and sum to one.
struct Density {
    std::vector<double> edges;
    std::vector<double> masses;

    int bins() const { return static_cast<int>(masses.size()); }
    double width(int i) const { return edges[i + 1] - edges[i]; }
    double center(int i) const { return 0.5 * (edges[i] + edges[i + 1]); }
    // mass / width
    double height(int i) const { return masses[i] / width(i); }
};

std::vector<double> uniform_edges(double lo, double hi, int bins);

// Freedman-Diaconis rule; falls back to sqrt(n) bins when the IQR vanishes.
std::vector<double> freedman_diaconis_edges(std::vector<double> samples, int max_bins = 2000);

// Samples outside the edge range are dropped before normalization.
Density histogram(const std::vector<double>& samples, const std::vector<double>& edges);
Density histogram(const std::vector<double>& samples, const std::vector<double>& weights,
                  const std::vector<double>& edges);

// Sum of |mass differences| over a shared grid.
double l1_distance(const Density& a, const Density& b);

// Per-bin convex combination p*a + (1-p)*b on a shared grid.
Density mix(const Density& a, const Density& b, double p);

}  // namespace qmbs
