#include "splx/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include <json.hpp>

#include "splx/errors.hpp"
#include "splx/kernels.hpp"
#include "splx/rng.hpp"
#include "splx/spectral.hpp"

using nlohmann::json;

namespace splx {
namespace {

json parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void check_schema_version(const json& j, const std::string& path) {
    if (j.contains("version") && (!j["version"].is_number_integer() || j["version"] != 1))
        throw SchemaVersionError(path + ": unsupported schema version");
}

void write_file(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path);
    out << j.dump(2) << "\n";
}

} // namespace

MaskedFeatures mask_features(const Matrix& x, double rate, std::uint64_t seed) {
    if (rate < 0.0 || rate >= 1.0)
        throw RateOutOfRangeError("missing rate must lie in [0, 1)");
    const std::size_t total = x.size();
    if (total == 0) throw EmptyMaskError("mask_features: no entries");
    const std::size_t hidden =
        static_cast<std::size_t>(rate * static_cast<double>(total));
    if (hidden >= total) throw EmptyMaskError("mask_features: nothing would stay known");

    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);

    MaskedFeatures out;
    out.known_mask = Matrix(x.rows(), x.cols(), 1.0);
    out.hidden_count = hidden;
    for (std::size_t i = 0; i < hidden; ++i) out.known_mask.data()[order[i]] = 0.0;
    out.median = masked_median(x, out.known_mask);
    out.filled = x;
    for (std::size_t i = 0; i < hidden; ++i) out.filled.data()[order[i]] = out.median;
    return out;
}

double masked_median(const Matrix& x, const Matrix& mask) {
    if (!x.same_shape(mask)) throw DimensionMismatchError("masked_median: shapes differ");
    std::vector<double> vals;
    vals.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        if (mask.data()[i] != 0.0) vals.push_back(x.data()[i]);
    if (vals.empty()) throw EmptyMaskError("masked_median: mask selects no entries");
    std::sort(vals.begin(), vals.end());
    const std::size_t n = vals.size();
    return n % 2 ? vals[n / 2] : 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
}

SimplicialComplex load_complex(const std::string& path) {
    json j = parse_file(path);
    try {
        check_schema_version(j, path);
        if (!j.contains("order") || !j["order"].is_number_integer() || j["order"].get<int>() < 0)
            throw ParseError(path + ": missing or invalid \"order\"");
        const int order = j["order"].get<int>();
        if (!j.contains("simplices") || !j["simplices"].is_object())
            throw ParseError(path + ": missing \"simplices\" object");

        std::vector<std::vector<Simplex>> by_order(order + 1);
        for (const auto& [key, value] : j["simplices"].items()) {
            int k = 0;
            try {
                std::size_t pos = 0;
                k = std::stoi(key, &pos);
                if (pos != key.size()) throw std::invalid_argument(key);
            } catch (const std::exception&) {
                throw ParseError(path + ": simplex order key \"" + key + "\" is not an integer");
            }
            if (k < 0 || k > order)
                throw ParseError(path + ": simplex order " + key +
                                 " outside declared order " + std::to_string(order));
            if (!value.is_array())
                throw ParseError(path + ": simplices[\"" + key + "\"] is not a list");
            for (const auto& entry : value) {
                if (!entry.is_array())
                    throw ParseError(path + ": simplex at order " + key + " is not a list");
                Simplex s;
                for (const auto& v : entry) {
                    if (!v.is_number_integer())
                        throw ParseError(path + ": vertex id is not an integer");
                    s.push_back(v.get<int>());
                }
                by_order[k].push_back(std::move(s));
            }
        }
        return build_complex(by_order);
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void save_complex(const SimplicialComplex& complex, const std::string& path) {
    json simplices = json::object();
    for (int k = 0; k <= complex.order(); ++k) {
        json list = json::array();
        for (const Simplex& s : complex.simplices(k)) list.push_back(s);
        simplices[std::to_string(k)] = std::move(list);
    }
    write_file(json{{"order", complex.order()}, {"simplices", std::move(simplices)}}, path);
}

FeatureFile load_features(const std::string& path) {
    json j = parse_file(path);
    try {
        check_schema_version(j, path);
        if (!j.contains("order") || !j["order"].is_number_integer() || j["order"].get<int>() < 0)
            throw ParseError(path + ": missing or invalid \"order\"");
        if (!j.contains("d") || !j["d"].is_number_integer() || j["d"].get<int>() < 1)
            throw ParseError(path + ": missing or invalid \"d\"");
        if (!j.contains("values") || !j["values"].is_array())
            throw ParseError(path + ": missing \"values\" list");

        FeatureFile f;
        f.order = j["order"].get<int>();
        f.d = static_cast<std::size_t>(j["d"].get<int>());
        const auto& rows = j["values"];
        f.values = Matrix(rows.size(), f.d);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (!rows[i].is_array() || rows[i].size() != f.d)
                throw ParseError(path + ": values row " + std::to_string(i) +
                                 " does not have d entries");
            for (std::size_t c = 0; c < f.d; ++c) {
                if (!rows[i][c].is_number())
                    throw ParseError(path + ": values entry is not a number");
                f.values(i, c) = rows[i][c].get<double>();
            }
        }
        return f;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void save_features(const FeatureFile& f, const std::string& path) {
    json rows = json::array();
    for (std::size_t i = 0; i < f.values.rows(); ++i) {
        json row = json::array();
        for (std::size_t c = 0; c < f.values.cols(); ++c) row.push_back(f.values(i, c));
        rows.push_back(std::move(row));
    }
    write_file(json{{"order", f.order}, {"d", f.d}, {"values", std::move(rows)}}, path);
}

TrajectoryData load_trajectories(const std::string& path) {
    json j = parse_file(path);
    try {
        check_schema_version(j, path);
        if (!j.contains("flows") || !j["flows"].is_array() || j["flows"].empty())
            throw ParseError(path + ": missing \"flows\" list");
        if (!j.contains("labels") || !j["labels"].is_array())
            throw ParseError(path + ": missing \"labels\" list");
        if (!j.contains("split") || !j["split"].is_object())
            throw ParseError(path + ": missing \"split\" object");

        TrajectoryData t;
        std::size_t n_edges = 0;
        for (const auto& flow : j["flows"]) {
            if (!flow.is_array() || flow.empty())
                throw ParseError(path + ": each flow must be a non-empty list");
            if (n_edges == 0) n_edges = flow.size();
            if (flow.size() != n_edges)
                throw ParseError(path + ": flows have inconsistent lengths");
            Matrix m(flow.size(), 1);
            for (std::size_t i = 0; i < flow.size(); ++i) {
                if (!flow[i].is_number()) throw ParseError(path + ": flow entry is not a number");
                m(i, 0) = flow[i].get<double>();
            }
            t.flows.push_back(std::move(m));
        }
        if (j["labels"].size() != t.flows.size())
            throw ParseError(path + ": one label per flow required");
        for (const auto& l : j["labels"]) {
            if (!l.is_number_integer() || l.get<int>() < 0)
                throw ParseError(path + ": labels must be non-negative integers");
            t.labels.push_back(l.get<int>());
        }
        auto read_split = [&](const char* name, std::vector<std::size_t>& dst) {
            if (!j["split"].contains(name) || !j["split"][name].is_array())
                throw ParseError(path + ": split lacks \"" + std::string(name) + "\"");
            for (const auto& v : j["split"][name]) {
                if (!v.is_number_integer() || v.get<long long>() < 0 ||
                    v.get<unsigned long long>() >= t.flows.size())
                    throw ParseError(path + ": split index out of range");
                dst.push_back(v.get<std::size_t>());
            }
        };
        read_split("train", t.train_idx);
        read_split("test", t.test_idx);
        std::set<std::size_t> seen(t.train_idx.begin(), t.train_idx.end());
        for (std::size_t i : t.test_idx)
            if (seen.count(i)) throw ParseError(path + ": train and test splits overlap");
        return t;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

void save_trajectories(const TrajectoryData& t, const std::string& path) {
    json flows = json::array();
    for (const Matrix& f : t.flows) {
        json row = json::array();
        for (std::size_t i = 0; i < f.rows(); ++i) row.push_back(f(i, 0));
        flows.push_back(std::move(row));
    }
    write_file(json{{"flows", std::move(flows)},
                    {"labels", t.labels},
                    {"split", json{{"train", t.train_idx}, {"test", t.test_idx}}}},
               path);
}

SynthScale scale_from_name(const std::string& name) {
    if (name == "tiny") return SynthScale::tiny;
    if (name == "small") return SynthScale::small;
    if (name == "full") return SynthScale::full;
    throw UsageError("unknown synthetic scale: " + name);
}

std::string scale_name(SynthScale s) {
    switch (s) {
        case SynthScale::tiny: return "tiny";
        case SynthScale::small: return "small";
        case SynthScale::full: return "full";
    }
    return "unknown";
}

namespace {

// Shared between the complex and feature generators so that feature
// clusters line up with the planted cliques for the same scale and seed.
struct Planting {
    std::size_t n_vertices = 0;
    int max_order = 0;
    std::vector<std::vector<int>> cliques;
};

Planting plant_cliques(SynthScale scale, std::uint64_t seed) {
    Planting p;
    // cliques as (size, count) pairs
    std::vector<std::pair<std::size_t, std::size_t>> groups;
    switch (scale) {
        case SynthScale::tiny:
            p.n_vertices = 14;
            p.max_order = 2;
            groups = {{3, 6}, {2, 10}};
            break;
        case SynthScale::small:
            p.n_vertices = 420;
            p.max_order = 3;
            groups = {{5, 2}, {4, 90}, {3, 40}, {2, 40}};
            break;
        case SynthScale::full:
            p.n_vertices = 352;
            p.max_order = 5;
            groups = {{10, 20}, {9, 4}, {4, 100}};
            break;
    }
    // Deal memberships from a shuffled deck so every vertex joins a clique
    // before any vertex joins a second one.
    Rng rng(seed);
    std::vector<int> deck;
    auto refill = [&]() {
        deck.resize(p.n_vertices);
        std::iota(deck.begin(), deck.end(), 0);
        for (std::size_t i = deck.size(); i > 1; --i)
            std::swap(deck[i - 1], deck[rng.below(i)]);
    };
    for (auto [size, count] : groups) {
        for (std::size_t i = 0; i < count; ++i) {
            std::vector<int> members;
            std::set<int> used;
            while (members.size() < size) {
                if (deck.empty()) refill();
                int v = deck.back();
                deck.pop_back();
                if (used.insert(v).second) members.push_back(v);
            }
            p.cliques.push_back(std::move(members));
        }
    }
    return p;
}

class AdjacencyBits {
public:
    explicit AdjacencyBits(std::size_t n) : n_(n), words_((n + 63) / 64), bits_(n * words_, 0) {}

    void connect(int u, int v) {
        set(u, v);
        set(v, u);
    }
    bool test(int u, int v) const {
        return (bits_[static_cast<std::size_t>(u) * words_ + static_cast<std::size_t>(v) / 64] >>
                (static_cast<std::size_t>(v) % 64)) & 1u;
    }

private:
    void set(int u, int v) {
        bits_[static_cast<std::size_t>(u) * words_ + static_cast<std::size_t>(v) / 64] |=
            std::uint64_t(1) << (static_cast<std::size_t>(v) % 64);
    }
    std::size_t n_;
    std::size_t words_;
    std::vector<std::uint64_t> bits_;
};

// Record `cur` and every clique that extends it with vertices from `cand`
// (all adjacent to every vertex of `cur` and larger than its last vertex).
void collect_cliques(const AdjacencyBits& adj, int max_vertices, std::vector<int>& cur,
                     const std::vector<int>& cand, std::vector<std::set<Simplex>>& levels) {
    levels[cur.size() - 1].insert(Simplex(cur.begin(), cur.end()));
    if (static_cast<int>(cur.size()) == max_vertices) return;
    for (std::size_t i = 0; i < cand.size(); ++i) {
        const int u = cand[i];
        std::vector<int> next;
        for (std::size_t j = i + 1; j < cand.size(); ++j)
            if (adj.test(u, cand[j])) next.push_back(cand[j]);
        cur.push_back(u);
        collect_cliques(adj, max_vertices, cur, next, levels);
        cur.pop_back();
    }
}

} // namespace

SimplicialComplex synth_citation_complex(SynthScale scale, std::uint64_t seed) {
    // Seeded random graph: a union of planted cliques. The complex is its
    // flag complex truncated at max_order, so every clique of the union
    // graph up to max_order + 1 vertices becomes a simplex.
    const Planting p = plant_cliques(scale, seed);
    AdjacencyBits adj(p.n_vertices);
    for (const std::vector<int>& members : p.cliques)
        for (std::size_t a = 0; a < members.size(); ++a)
            for (std::size_t b = a + 1; b < members.size(); ++b)
                adj.connect(members[a], members[b]);

    std::vector<std::set<Simplex>> levels(p.max_order + 1);
    std::vector<int> cur;
    for (std::size_t v = 0; v < p.n_vertices; ++v) {
        cur.assign(1, static_cast<int>(v));
        std::vector<int> cand;
        for (std::size_t u = v + 1; u < p.n_vertices; ++u)
            if (adj.test(static_cast<int>(v), static_cast<int>(u))) cand.push_back(static_cast<int>(u));
        collect_cliques(adj, p.max_order + 1, cur, cand, levels);
    }

    std::vector<std::vector<Simplex>> by_order(p.max_order + 1);
    for (int k = 0; k <= p.max_order; ++k)
        by_order[k].assign(levels[k].begin(), levels[k].end());
    return build_complex(by_order);
}

Matrix synth_citation_features(const SimplicialComplex& complex, int k, SynthScale scale,
                               std::uint64_t seed) {
    const std::size_t n = complex.count(k);
    if (n == 0) throw OrderOutOfRangeError("no simplices of order " + std::to_string(k));

    // Every simplex takes the magnitude of the first planted clique that
    // contains it, so the values correlate along shared cofaces and hidden
    // entries stay recoverable from their neighborhoods. Clique magnitudes
    // follow a skewed log mixture: a heavy bulk well below the median, a
    // thin wedge just under it, a sparse skirt just above it where the
    // median itself lands, a second bump further up, and a short extreme
    // tail, which gives the integer values a citation-like long-tailed look.
    const double base = 600.0;
    const double sigma_noise = 0.015;

    const Planting p = plant_cliques(scale, seed);
    std::vector<std::vector<int>> sorted_cliques(p.cliques.size());
    for (std::size_t c = 0; c < p.cliques.size(); ++c) {
        sorted_cliques[c] = p.cliques[c];
        std::sort(sorted_cliques[c].begin(), sorted_cliques[c].end());
    }
    const std::size_t spare = sorted_cliques.size();

    auto cluster_of = [&](const Simplex& s) {
        for (std::size_t c = 0; c < sorted_cliques.size(); ++c)
            if (std::includes(sorted_cliques[c].begin(), sorted_cliques[c].end(),
                              s.begin(), s.end()))
                return c;
        return spare;
    };

    // Sizes split 15:15:2 between bulk, bump, and wedge so that every
    // simplex order mixes the three components in the same proportions.
    Rng crng(seed ^ 0xC0FFEE5EEDull);
    std::vector<double> magnitude(spare + 1, 0.015);
    std::map<std::size_t, std::size_t> class_count;
    std::size_t tail_count = 0;
    for (std::size_t c = 0; c < spare; ++c) {
        if (p.cliques[c].size() >= 5) {
            magnitude[c] = tail_count++ % 2 == 0 ? 1.2 : 1.8;
            continue;
        }
        const std::size_t slot = class_count[p.cliques[c].size()]++ % 32;
        if (slot < 15) {
            magnitude[c] = -0.35 + 0.06 * crng.normal();
        } else if (slot < 30) {
            magnitude[c] = 0.12 + 0.03 * crng.normal();
        } else if (crng.uniform(0.0, 1.0) < 0.8) {
            magnitude[c] = -0.05 * std::max(crng.uniform(0.0, 1.0), crng.uniform(0.0, 1.0));
        } else {
            magnitude[c] = crng.uniform(0.0, 0.03);
        }
    }

    Rng rng(seed ^ (0x5851F42D4C957F2Dull + static_cast<std::uint64_t>(k)));
    Matrix x(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        const Simplex& s = complex.simplices(k)[i];
        const double value =
            base * std::exp(magnitude[cluster_of(s)] + sigma_noise * rng.normal());
        x(i, 0) = std::max(1.0, std::round(value));
    }
    return x;
}

SimplicialComplex synth_demo_complex() {
    std::vector<Simplex> edges;
    for (int i = 0; i < 24; ++i) edges.push_back({std::min(i, (i + 1) % 24),
                                                  std::max(i, (i + 1) % 24)});
    edges.push_back({0, 2});
    edges.push_back({8, 10});
    for (int i = 0; i < 12; ++i) edges.push_back({i, i + 12});
    std::vector<Simplex> vertices;
    for (int v = 0; v < 24; ++v) vertices.push_back({v});
    return build_complex({vertices, edges, {{0, 1, 2}, {8, 9, 10}}});
}

namespace {

// Unit-norm copy of an edge flow.
Matrix normalized(const Matrix& x) {
    double norm = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) norm += x.data()[i] * x.data()[i];
    norm = std::sqrt(norm);
    Matrix out = x;
    if (norm > 0.0)
        for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] /= norm;
    return out;
}

} // namespace

TrajectorySynth synth_trajectories(std::size_t n_train, std::size_t n_test, double noise,
                                   std::uint64_t seed) {
    const int w = 13, h = 10;
    const int hole1_x = 4, hole1_y = 3, hole2_x = 8, hole2_y = 6;
    auto vid = [&](int x, int y) { return y * w + x; };
    auto is_hole = [&](int x, int y) {
        return (x == hole1_x && y == hole1_y) || (x == hole2_x && y == hole2_y);
    };

    std::vector<Simplex> vertices, triangles;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (!is_hole(x, y)) vertices.push_back({vid(x, y)});
    for (int y = 0; y + 1 < h; ++y) {
        for (int x = 0; x + 1 < w; ++x) {
            int v00 = vid(x, y), v10 = vid(x + 1, y);
            int v01 = vid(x, y + 1), v11 = vid(x + 1, y + 1);
            auto ok = [&](int a, int b, int c) {
                auto hole_vertex = [&](int v) { return is_hole(v % w, v / w); };
                return !hole_vertex(a) && !hole_vertex(b) && !hole_vertex(c);
            };
            if (ok(v00, v10, v11)) {
                Simplex t{v00, v10, v11};
                std::sort(t.begin(), t.end());
                triangles.push_back(std::move(t));
            }
            if (ok(v00, v11, v01)) {
                Simplex t{v00, v11, v01};
                std::sort(t.begin(), t.end());
                triangles.push_back(std::move(t));
            }
        }
    }
    SimplicialComplex cplx = build_complex({vertices, {}, triangles});

    // Oriented cycle around a puncture: its hexagonal link.
    auto link_cycle = [&](int cx, int cy) {
        std::vector<std::pair<int, int>> ring = {
            {cx + 1, cy},     {cx + 1, cy + 1}, {cx, cy + 1},
            {cx - 1, cy},     {cx - 1, cy - 1}, {cx, cy - 1},
        };
        Matrix c(cplx.count(1), 1);
        for (std::size_t i = 0; i < ring.size(); ++i) {
            int a = vid(ring[i].first, ring[i].second);
            int b = vid(ring[(i + 1) % ring.size()].first, ring[(i + 1) % ring.size()].second);
            Simplex e{std::min(a, b), std::max(a, b)};
            std::size_t idx = cplx.index_of(1, e);
            if (idx == SimplicialComplex::npos)
                throw OrderOutOfRangeError("puncture link edge missing from mesh");
            c(idx, 0) = a < b ? 1.0 : -1.0;
        }
        return c;
    };

    HodgeParts p1 = hodge_decompose(cplx, 1, link_cycle(hole1_x, hole1_y));
    HodgeParts p2 = hodge_decompose(cplx, 1, link_cycle(hole2_x, hole2_y));
    Matrix h1 = normalized(p1.harmonic);
    Matrix h2 = p2.harmonic;
    double dot = 0.0;
    for (std::size_t i = 0; i < h2.size(); ++i) dot += h2.data()[i] * h1.data()[i];
    for (std::size_t i = 0; i < h2.size(); ++i) h2.data()[i] -= dot * h1.data()[i];
    h2 = normalized(h2);

    const std::size_t total = n_train + n_test;
    Rng rng(seed);
    const IncidenceMatrix& b1t = cplx.incidence_transposed(1);
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    TrajectoryData data;
    data.flows.resize(total);
    data.labels.resize(total);
    for (std::size_t s = 0; s < total; ++s) {
        int label = static_cast<int>(s % 2);
        Matrix potential(cplx.count(0), 1);
        for (std::size_t i = 0; i < potential.size(); ++i)
            potential.data()[i] = rng.normal();
        Matrix grad = kernels::spmm(b1t, potential);
        Matrix flow = label == 0 ? h1 : h2;
        kernels::add_scaled_inplace(flow, grad, noise);
        data.flows[s] = normalized(flow);
        data.labels[s] = label;
    }
    for (std::size_t i = 0; i < total; ++i) {
        if (i < n_train)
            data.train_idx.push_back(order[i]);
        else
            data.test_idx.push_back(order[i]);
    }
    return TrajectorySynth{std::move(cplx), std::move(data)};
}

} // namespace splx
