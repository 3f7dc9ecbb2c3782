#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "splx/complex.hpp"
#include "splx/matrix.hpp"

namespace splx {

/// Contents of a per-order feature file: d real features per k-simplex in
/// canonical simplex order.
struct FeatureFile {
    int order = 0;
    std::size_t d = 1;
    Matrix values;
};

/// Result of hiding a fraction of feature entries. `known_mask` is 1 where
/// the entry stayed visible; hidden entries of `filled` carry the median of
/// the known ones.
struct MaskedFeatures {
    Matrix filled;
    Matrix known_mask;
    double median = 0.0;
    std::size_t hidden_count = 0;
};

/// Hide exactly floor(rate * entries) uniformly chosen entries.
MaskedFeatures mask_features(const Matrix& x, double rate, std::uint64_t seed);

/// Median of the entries of x where mask is nonzero.
double masked_median(const Matrix& x, const Matrix& mask);

/// Edge flows with class labels and a fixed train/test index split.
struct TrajectoryData {
    std::vector<Matrix> flows; // each N_1 x 1
    std::vector<int> labels;
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_idx;
};

// ---- JSON file formats ----

SimplicialComplex load_complex(const std::string& path);
void save_complex(const SimplicialComplex& complex, const std::string& path);

FeatureFile load_features(const std::string& path);
void save_features(const FeatureFile& f, const std::string& path);

TrajectoryData load_trajectories(const std::string& path);
void save_trajectories(const TrajectoryData& t, const std::string& path);

// ---- Synthetic data ----

enum class SynthScale { tiny, small, full };
SynthScale scale_from_name(const std::string& name);
std::string scale_name(SynthScale s);

/// Flag complex of a seeded random graph built as a union of planted
/// cliques: many small groups, a few large ones, mimicking the shape of a
/// collaboration complex. The full scale matches the per-order counts of
/// a real coauthorship complex within 20 percent.
SimplicialComplex synth_citation_complex(SynthScale scale, std::uint64_t seed);

/// Positive integer features over the k-simplices: heavy-tailed
/// (log-normal) per-clique magnitudes with small per-simplex jitter, so
/// values are near-constant inside a planted clique but spread widely
/// across cliques. Scale and seed must match the generated complex.
Matrix synth_citation_features(const SimplicialComplex& complex, int k, SynthScale scale,
                               std::uint64_t seed);

/// Fixed 24-vertex, 38-edge, 2-triangle demo complex.
SimplicialComplex synth_demo_complex();

/// Triangulated rectangle with two punctures and unit-normalized edge
/// flows: class 0 circulates one hole, class 1 the other (orthogonalized
/// in harmonic space), both plus gradient-flow noise.
struct TrajectorySynth {
    SimplicialComplex complex;
    TrajectoryData data;
};
TrajectorySynth synth_trajectories(std::size_t n_train, std::size_t n_test, double noise,
                                   std::uint64_t seed);

} // namespace splx
