#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "splx/complex.hpp"
#include "splx/data_io.hpp"
#include "splx/errors.hpp"
#include "splx/experiments.hpp"
#include "splx/spectral.hpp"

using nlohmann::json;
namespace fs = std::filesystem;
using namespace splx;

namespace {

std::string hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::uint64_t h = 0xCBF29CE484222325ull;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount())
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001B3ull;
        }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
}

void write_json(const json& j, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

/// Every command that produces files drops a manifest beside them: the
/// resolved config, the seed, a content hash per input file, and the list
/// of outputs. Runs with equal manifests produce byte-identical summaries.
void write_manifest(const fs::path& dir, const std::string& command, const json& config,
                    std::uint64_t seed, const json& inputs,
                    const std::vector<std::string>& outputs) {
    write_json(json{{"command", command},
                    {"config", config},
                    {"seed", seed},
                    {"inputs", inputs},
                    {"outputs", outputs}},
               dir / "manifest.json");
}

fs::path ensure_dir(const std::string& dir) {
    fs::path p(dir);
    fs::create_directories(p);
    return p;
}

std::string fmt(double v) {
    std::ostringstream out;
    out << std::setprecision(17) << v;
    return out.str();
}

// ---- shared train/bench configuration ----

struct DataSpec {
    std::string complex_path;
    std::vector<std::string> feature_paths;
    std::string trajectories_path;
    SynthScale scale = SynthScale::small;
    std::vector<int> orders; // imputation: restrict to these orders
    std::size_t synth_train = 160;
    std::size_t synth_test = 40;
    double noise = 0.05;
};

void apply_config_file(const std::string& path, TrainConfig& cfg, DataSpec& data) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    try {
        if (j.contains("task")) cfg.task = task_from_name(j["task"].get<std::string>());
        if (j.contains("arch")) cfg.arch = arch_from_name(j["arch"].get<std::string>());
        if (j.contains("layers")) cfg.layers = j["layers"].get<int>();
        if (j.contains("j")) cfg.j = j["j"].get<int>();
        if (j.contains("filters")) cfg.filters = j["filters"].get<std::size_t>();
        if (j.contains("activation"))
            cfg.act = activation_from_name(j["activation"].get<std::string>());
        if (j.contains("missing_rate")) cfg.missing_rate = j["missing_rate"].get<double>();
        if (j.contains("batch")) cfg.batch = j["batch"].get<std::size_t>();
        if (j.contains("iterations")) cfg.iterations = j["iterations"].get<std::size_t>();
        if (j.contains("repeats")) cfg.repeats = j["repeats"].get<std::size_t>();
        if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("identity_taps")) cfg.identity_taps = j["identity_taps"].get<bool>();
        if (j.contains("include_first_norm"))
            cfg.include_first_norm = j["include_first_norm"].get<bool>();
        if (j.contains("lr")) cfg.adam.lr = j["lr"].get<double>();
        if (j.contains("readout_hidden"))
            cfg.readout_hidden = j["readout_hidden"].get<std::size_t>();
        if (j.contains("eval_every")) cfg.eval_every = j["eval_every"].get<std::size_t>();
        if (j.contains("stop_accuracy")) cfg.stop_accuracy = j["stop_accuracy"].get<double>();
        if (j.contains("phase"))
            cfg.phase = j["phase"].get<std::string>() == "infer" ? Phase::infer : Phase::train;
        if (j.contains("scale")) data.scale = scale_from_name(j["scale"].get<std::string>());
        if (j.contains("orders")) data.orders = j["orders"].get<std::vector<int>>();
        if (j.contains("synth_train")) data.synth_train = j["synth_train"].get<std::size_t>();
        if (j.contains("synth_test")) data.synth_test = j["synth_test"].get<std::size_t>();
        if (j.contains("noise")) data.noise = j["noise"].get<double>();
        if (j.contains("data")) {
            const json& d = j["data"];
            if (d.contains("complex")) data.complex_path = d["complex"].get<std::string>();
            if (d.contains("features"))
                data.feature_paths = d["features"].get<std::vector<std::string>>();
            if (d.contains("trajectories"))
                data.trajectories_path = d["trajectories"].get<std::string>();
        }
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

json config_json(const TrainConfig& cfg, const DataSpec& data) {
    return json{{"task", task_name(cfg.task)},
                {"arch", arch_name(cfg.arch)},
                {"layers", cfg.layers},
                {"j", cfg.j},
                {"filters", cfg.filters},
                {"activation", activation_name(cfg.act)},
                {"missing_rate", cfg.missing_rate},
                {"batch", cfg.batch},
                {"iterations", cfg.iterations},
                {"repeats", cfg.repeats},
                {"seed", cfg.seed},
                {"identity_taps", cfg.identity_taps},
                {"include_first_norm", cfg.include_first_norm},
                {"lr", cfg.adam.lr},
                {"readout_hidden", cfg.readout_hidden},
                {"eval_every", cfg.eval_every},
                {"stop_accuracy", cfg.stop_accuracy},
                {"phase", cfg.phase == Phase::infer ? "infer" : "train"},
                {"scale", scale_name(data.scale)},
                {"orders", data.orders},
                {"synth_train", data.synth_train},
                {"synth_test", data.synth_test},
                {"noise", data.noise}};
}

struct LoadedImpute {
    SimplicialComplex complex;
    std::vector<Matrix> features;
    json inputs;
};

LoadedImpute load_impute_data(const DataSpec& data, std::uint64_t seed) {
    json inputs = json::object();
    if (!data.complex_path.empty()) {
        if (data.feature_paths.empty())
            throw UsageError("imputation on a complex file needs feature files");
        auto complex = load_complex(data.complex_path);
        inputs[data.complex_path] = hash_file(data.complex_path);
        std::vector<Matrix> features(static_cast<std::size_t>(complex.order()) + 1);
        for (const std::string& p : data.feature_paths) {
            FeatureFile f = load_features(p);
            if (f.order < 0 || f.order > complex.order())
                throw OrderOutOfRangeError("feature file order " + std::to_string(f.order) +
                                           " exceeds the complex order");
            if (!features[static_cast<std::size_t>(f.order)].empty())
                throw UsageError("two feature files share order " + std::to_string(f.order));
            features[static_cast<std::size_t>(f.order)] = std::move(f.values);
            inputs[p] = hash_file(p);
        }
        return {std::move(complex), std::move(features), std::move(inputs)};
    }
    auto complex = synth_citation_complex(data.scale, seed);
    inputs["synthetic"] = json{{"kind", "citation"}, {"scale", scale_name(data.scale)}};
    std::vector<Matrix> features(static_cast<std::size_t>(complex.order()) + 1);
    for (int k = 0; k <= complex.order(); ++k) {
        if (!data.orders.empty() &&
            std::find(data.orders.begin(), data.orders.end(), k) == data.orders.end())
            continue;
        features[static_cast<std::size_t>(k)] = synth_citation_features(complex, k, data.scale, seed);
    }
    return {std::move(complex), std::move(features), std::move(inputs)};
}

struct LoadedClassify {
    SimplicialComplex complex;
    TrajectoryData data;
    json inputs;
};

LoadedClassify load_classify_data(const DataSpec& data, std::uint64_t seed) {
    json inputs = json::object();
    if (!data.complex_path.empty() || !data.trajectories_path.empty()) {
        if (data.complex_path.empty() || data.trajectories_path.empty())
            throw UsageError("classification files need both a complex and trajectories");
        auto complex = load_complex(data.complex_path);
        TrajectoryData t = load_trajectories(data.trajectories_path);
        inputs[data.complex_path] = hash_file(data.complex_path);
        inputs[data.trajectories_path] = hash_file(data.trajectories_path);
        return {std::move(complex), std::move(t), std::move(inputs)};
    }
    TrajectorySynth ts = synth_trajectories(data.synth_train, data.synth_test, data.noise, seed);
    inputs["synthetic"] = json{{"kind", "trajectories"},
                               {"train", data.synth_train},
                               {"test", data.synth_test},
                               {"noise", data.noise}};
    return {std::move(ts.complex), std::move(ts.data), std::move(inputs)};
}

// ---- commands ----

int cmd_inspect(const std::string& path, const std::string& out_dir) {
    auto complex = load_complex(path);

    std::ostringstream report;
    for (int k = 0; k <= complex.order(); ++k) {
        if (k) report << " ";
        report << "N_" << k << "=" << complex.count(k);
    }
    long long chain = 0;
    for (int k = 1; k < complex.order(); ++k)
        chain = std::max(chain,
                         multiply_incidence(complex.incidence(k), complex.incidence(k + 1)).max_abs);
    report << ", chain max |entry| = " << chain << "\n";
    if (complex.inserted_face_count())
        report << "closure inserted " << complex.inserted_face_count() << " missing faces\n";
    for (int k = 0; k <= complex.order(); ++k) {
        const SparseMatrix& full = complex.laplacians(k).full;
        double denom = static_cast<double>(full.rows) * static_cast<double>(full.cols);
        report << "L_" << k << ": " << full.rows << "x" << full.cols << ", nnz=" << full.nnz()
               << ", density=" << std::setprecision(3) << (denom ? full.nnz() / denom : 0.0)
               << "\n";
    }
    std::cout << report.str();

    if (!out_dir.empty()) {
        fs::path dir = ensure_dir(out_dir);
        std::ofstream txt(dir / "inspect.txt");
        txt << report.str();
        write_manifest(dir, "inspect", json{{"complex", path}}, 0,
                       json{{path, hash_file(path)}}, {"inspect.txt"});
    }
    return 0;
}

int cmd_spectra(const std::string& path, int order, const std::string& out_dir) {
    auto complex = load_complex(path);
    if (order < 0 || order > complex.order())
        throw OrderOutOfRangeError("no Laplacian of order " + std::to_string(order));
    SpectralBasis basis = sft_basis(complex.laplacians(order).full);

    fs::path dir = ensure_dir(out_dir);
    std::ofstream csv(dir / "spectra.csv");
    csv << "index,eigenvalue\n";
    for (std::size_t i = 0; i < basis.eigenvalues.size(); ++i)
        csv << i << "," << fmt(basis.eigenvalues[i]) << "\n";
    csv.close();

    std::cout << "N_" << order << "=" << basis.eigenvalues.size() << " eigenvalues in ["
              << fmt(basis.eigenvalues.front()) << ", " << fmt(basis.eigenvalues.back())
              << "], written to " << (dir / "spectra.csv").string() << "\n";
    write_manifest(dir, "spectra", json{{"complex", path}, {"order", order}}, 0,
                   json{{path, hash_file(path)}}, {"spectra.csv"});
    return 0;
}

int cmd_filter(const std::string& complex_path, const std::string& features_path,
               const std::vector<double>& taps, const std::string& preset, double cutoff,
               const std::string& out_dir) {
    if (taps.empty() == preset.empty())
        throw UsageError("pass exactly one of --taps or --preset");
    auto complex = load_complex(complex_path);
    FeatureFile f = load_features(features_path);
    if (f.order < 0 || f.order > complex.order())
        throw OrderOutOfRangeError("feature order " + std::to_string(f.order) +
                                   " exceeds the complex order");
    const SparseMatrix& lap = complex.laplacians(f.order).full;

    FeatureFile out = f;
    if (!taps.empty()) {
        out.values = spatial_filter(lap, taps, f.values);
    } else if (preset == "low") {
        out.values = spectral_filter(lap, FilterSpec::low_pass(cutoff), f.values);
    } else if (preset == "high") {
        out.values = spectral_filter(lap, FilterSpec::high_pass(cutoff), f.values);
    } else {
        throw UsageError("unknown preset: " + preset);
    }

    fs::path dir = ensure_dir(out_dir);
    save_features(out, (dir / "filtered.json").string());
    std::cout << "filtered " << out.values.rows() << " rows at order " << f.order
              << ", written to " << (dir / "filtered.json").string() << "\n";
    json cfg{{"complex", complex_path}, {"features", features_path}};
    if (!taps.empty())
        cfg["taps"] = taps;
    else {
        cfg["preset"] = preset;
        cfg["cutoff"] = cutoff;
    }
    write_manifest(dir, "filter", cfg, 0,
                   json{{complex_path, hash_file(complex_path)},
                        {features_path, hash_file(features_path)}},
                   {"filtered.json"});
    return 0;
}

int cmd_synth(const std::string& kind, const std::string& scale_name_str, std::uint64_t seed,
              std::size_t n_train, std::size_t n_test, double noise,
              const std::string& out_dir) {
    fs::path dir = ensure_dir(out_dir);
    std::vector<std::string> outputs;
    json cfg{{"kind", kind}, {"seed", seed}};

    if (kind == "citation") {
        SynthScale scale = scale_from_name(scale_name_str);
        cfg["scale"] = scale_name_str;
        auto complex = synth_citation_complex(scale, seed);
        save_complex(complex, (dir / "complex.json").string());
        outputs.push_back("complex.json");
        for (int k = 0; k <= complex.order(); ++k) {
            FeatureFile f;
            f.order = k;
            f.d = 1;
            f.values = synth_citation_features(complex, k, scale, seed);
            std::string name = "features." + std::to_string(k) + ".json";
            save_features(f, (dir / name).string());
            outputs.push_back(name);
        }
    } else if (kind == "trajectories") {
        cfg["train"] = n_train;
        cfg["test"] = n_test;
        cfg["noise"] = noise;
        TrajectorySynth ts = synth_trajectories(n_train, n_test, noise, seed);
        save_complex(ts.complex, (dir / "complex.json").string());
        save_trajectories(ts.data, (dir / "trajectories.json").string());
        outputs = {"complex.json", "trajectories.json"};
    } else if (kind == "demo") {
        save_complex(synth_demo_complex(), (dir / "complex.json").string());
        outputs = {"complex.json"};
    } else {
        throw UsageError("unknown synthetic kind: " + kind);
    }

    std::cout << "wrote";
    for (const std::string& o : outputs) std::cout << " " << (dir / o).string();
    std::cout << "\n";
    write_manifest(dir, "synth", cfg, seed, json::object(), outputs);
    return 0;
}

int cmd_train(const TrainConfig& cfg, const DataSpec& data, const std::string& out_dir) {
    if (cfg.missing_rate <= 0.0 || cfg.missing_rate >= 1.0)
        throw UsageError("--missing-rate must lie strictly between 0 and 1");
    if (cfg.layers < 1) throw UsageError("--layers must be at least 1");
    if (cfg.repeats < 1) throw UsageError("--repeats must be at least 1");

    fs::path dir = ensure_dir(out_dir);
    json summary{{"task", task_name(cfg.task)}, {"config", config_json(cfg, data)}};
    std::ofstream csv(dir / "loss.csv");
    json inputs;
    double train_seconds = 0.0;

    if (cfg.task == Task::impute) {
        LoadedImpute loaded = load_impute_data(data, cfg.seed);
        inputs = std::move(loaded.inputs);
        ImputationSummary s = train_imputation(loaded.complex, loaded.features, cfg);
        train_seconds = s.train_seconds;

        csv << "repeat,order,iteration,loss\n";
        json repeats = json::array();
        for (std::size_t r = 0; r < s.repeats.size(); ++r) {
            const ImputationRepeat& rep = s.repeats[r];
            json orders = json::array();
            for (const ImputationOrderResult& res : rep.orders) {
                for (std::size_t it = 0; it < res.loss_curve.size(); ++it)
                    csv << r << "," << res.order << "," << it + 1 << ","
                        << fmt(res.loss_curve[it]) << "\n";
                orders.push_back(json{{"order", res.order},
                                      {"hidden_accuracy", res.hidden_accuracy},
                                      {"hidden_baseline", res.hidden_baseline},
                                      {"overall_accuracy", res.overall_accuracy},
                                      {"overall_baseline", res.overall_baseline},
                                      {"hidden_count", res.hidden_count},
                                      {"entry_count", res.entry_count},
                                      {"parameters", res.parameters},
                                      {"final_loss", res.loss_curve.back()}});
            }
            repeats.push_back(json{{"orders", std::move(orders)},
                                   {"hidden_accuracy", rep.hidden_accuracy},
                                   {"hidden_baseline", rep.hidden_baseline},
                                   {"overall_accuracy", rep.overall_accuracy},
                                   {"overall_baseline", rep.overall_baseline}});
        }
        summary["repeats"] = std::move(repeats);
        summary["parameters"] = s.parameters;
        summary["mean_hidden_accuracy"] = s.mean_hidden_accuracy;
        summary["std_hidden_accuracy"] = s.std_hidden_accuracy;
        summary["mean_hidden_baseline"] = s.mean_hidden_baseline;
        summary["mean_overall_accuracy"] = s.mean_overall_accuracy;
        summary["std_overall_accuracy"] = s.std_overall_accuracy;
        summary["mean_overall_baseline"] = s.mean_overall_baseline;
        std::cout << "imputation " << arch_name(cfg.arch) << ": hidden accuracy "
                  << s.mean_hidden_accuracy << " +- " << s.std_hidden_accuracy
                  << " (median baseline " << s.mean_hidden_baseline << ") over " << cfg.repeats
                  << " repeats, " << s.parameters << " parameters\n";
    } else {
        LoadedClassify loaded = load_classify_data(data, cfg.seed);
        inputs = std::move(loaded.inputs);
        ClassificationSummary s = train_classification(loaded.complex, loaded.data, cfg);
        train_seconds = s.train_seconds;

        csv << "repeat,iteration,loss\n";
        json repeats = json::array();
        for (std::size_t r = 0; r < s.repeats.size(); ++r) {
            const ClassificationRepeat& rep = s.repeats[r];
            for (std::size_t it = 0; it < rep.loss_curve.size(); ++it)
                csv << r << "," << it + 1 << "," << fmt(rep.loss_curve[it]) << "\n";
            json curve = json::array();
            for (auto [iter, acc] : rep.accuracy_curve)
                curve.push_back(json::array({iter, acc}));
            repeats.push_back(json{{"final_accuracy", rep.final_accuracy},
                                   {"iterations_run", rep.iterations_run},
                                   {"accuracy_curve", std::move(curve)}});
        }
        summary["repeats"] = std::move(repeats);
        summary["parameters"] = s.parameters;
        summary["mean_accuracy"] = s.mean_accuracy;
        summary["std_accuracy"] = s.std_accuracy;
        std::cout << "classification " << arch_name(cfg.arch) << ": test accuracy "
                  << s.mean_accuracy << " +- " << s.std_accuracy << " over " << cfg.repeats
                  << " repeats, " << s.parameters << " parameters\n";
    }
    csv.close();

    write_json(summary, dir / "summary.json");
    write_json(json{{"train_seconds", train_seconds}}, dir / "timing.json");
    write_manifest(dir, "train", config_json(cfg, data), cfg.seed, inputs,
                   {"summary.json", "loss.csv", "timing.json"});
    return 0;
}

int cmd_bench(const TrainConfig& cfg, const DataSpec& data,
              const std::vector<std::string>& arch_names, int order,
              const std::string& out_dir) {
    std::vector<Arch> archs;
    for (const std::string& name : arch_names) archs.push_back(arch_from_name(name));
    if (archs.size() < 2) throw UsageError("--archs needs at least two architectures");

    LoadedImpute loaded = load_impute_data(data, cfg.seed);
    if (order < 0 || order > loaded.complex.order())
        throw OrderOutOfRangeError("no simplices of order " + std::to_string(order));
    const Matrix& feats = loaded.features[static_cast<std::size_t>(order)];
    if (feats.empty()) throw UsageError("no features at order " + std::to_string(order));

    BenchReport rep = run_bench(loaded.complex, feats, order, archs, cfg);

    std::cout << "order " << order << ", " << rep.iterations << " iterations, "
              << (rep.phase == Phase::infer ? "infer" : "train") << " phase\n";
    std::cout << std::left << std::setw(10) << "arch" << std::right << std::setw(12) << "params"
              << std::setw(14) << "seconds" << std::setw(14) << "s/iter" << std::setw(10)
              << "ratio"
              << "  sign fraction per layer\n";
    const double base = rep.entries.front().seconds;
    json entries = json::array();
    for (const BenchEntry& e : rep.entries) {
        std::ostringstream fr;
        for (std::size_t i = 0; i < e.sign_fractions.size(); ++i)
            fr << (i ? " " : "") << std::setprecision(3) << e.sign_fractions[i];
        std::cout << std::left << std::setw(10) << arch_name(e.arch) << std::right
                  << std::setw(12) << e.parameters << std::setw(14) << std::setprecision(6)
                  << e.seconds << std::setw(14) << e.seconds_per_iteration << std::setw(10)
                  << std::setprecision(3) << (base > 0.0 ? e.seconds / base : 0.0) << "  "
                  << fr.str() << "\n";
        entries.push_back(json{{"arch", arch_name(e.arch)},
                               {"parameters", e.parameters},
                               {"seconds", e.seconds},
                               {"seconds_per_iteration", e.seconds_per_iteration},
                               {"final_loss", e.final_loss},
                               {"sign_fractions", e.sign_fractions}});
    }

    fs::path dir = ensure_dir(out_dir);
    json cfg_json = config_json(cfg, data);
    cfg_json["archs"] = arch_names;
    cfg_json["order"] = order;
    write_json(json{{"order", order},
                    {"iterations", rep.iterations},
                    {"phase", rep.phase == Phase::infer ? "infer" : "train"},
                    {"entries", std::move(entries)}},
               dir / "bench.json");
    write_manifest(dir, "bench", cfg_json, cfg.seed, loaded.inputs, {"bench.json"});
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"simplicial signal processing toolkit"};
    app.require_subcommand(1);

    // inspect
    std::string in_complex, in_out_dir;
    CLI::App* inspect = app.add_subcommand("inspect", "print complex counts and chain checks");
    inspect->add_option("complex", in_complex, "complex JSON file")->required();
    inspect->add_option("--out-dir", in_out_dir, "also write inspect.txt and a manifest here");

    // spectra
    std::string sp_complex, sp_out_dir = ".";
    int sp_order = 0;
    CLI::App* spectra = app.add_subcommand("spectra", "write Hodge Laplacian eigenvalues");
    spectra->add_option("complex", sp_complex, "complex JSON file")->required();
    spectra->add_option("--order", sp_order, "simplex order k")->required();
    spectra->add_option("--out-dir", sp_out_dir, "output directory");

    // filter
    std::string fl_complex, fl_features, fl_preset, fl_out_dir = ".";
    std::vector<double> fl_taps;
    double fl_cutoff = 0.0;
    CLI::App* filter = app.add_subcommand("filter", "apply a simplicial filter to features");
    filter->add_option("complex", fl_complex, "complex JSON file")->required();
    filter->add_option("features", fl_features, "feature JSON file")->required();
    filter->add_option("--taps", fl_taps, "polynomial taps w0,w1,... (w0 is the identity)")
        ->delimiter(',');
    filter->add_option("--preset", fl_preset, "low or high");
    filter->add_option("--cutoff", fl_cutoff, "eigenvalue cutoff for presets");
    filter->add_option("--out-dir", fl_out_dir, "output directory");

    // synth
    std::string sy_kind = "citation", sy_scale = "small", sy_out_dir = ".";
    std::uint64_t sy_seed = 7;
    std::size_t sy_train = 160, sy_test = 40;
    double sy_noise = 0.05;
    CLI::App* synth = app.add_subcommand("synth", "generate synthetic datasets");
    synth->add_option("--kind", sy_kind, "citation, trajectories, or demo");
    synth->add_option("--scale", sy_scale, "tiny, small, or full");
    synth->add_option("--seed", sy_seed, "generator seed");
    synth->add_option("--train", sy_train, "trajectory training count");
    synth->add_option("--test", sy_test, "trajectory test count");
    synth->add_option("--noise", sy_noise, "gradient-flow noise level");
    synth->add_option("--out-dir", sy_out_dir, "output directory");

    // train / bench share the config surface
    TrainConfig tc;
    DataSpec td;
    std::string tr_config, tr_out_dir = ".", tr_task, tr_arch, tr_act, tr_scale;
    std::vector<std::string> tr_features;
    std::string tr_complex, tr_trajectories;
    auto add_shared = [&](CLI::App* cmd) {
        cmd->add_option("--config", tr_config, "JSON config file; flags override its values");
        cmd->add_option("--task", tr_task, "impute or classify");
        cmd->add_option("--arch", tr_arch, "snn, scnn, mpnn, or biscnn");
        cmd->add_option("--layers", tc.layers, "stacked simplicial layers P");
        cmd->add_option("--j", tc.j, "filter length (max Laplacian power)");
        cmd->add_option("--filters", tc.filters, "hidden width");
        cmd->add_option("--activation", tr_act, "id, lr, or tanh");
        cmd->add_option("--missing-rate", tc.missing_rate, "fraction of entries hidden");
        cmd->add_option("--batch", tc.batch, "classification batch size");
        cmd->add_option("--iterations", tc.iterations, "training iterations");
        cmd->add_option("--repeats", tc.repeats, "independent repeats");
        cmd->add_option("--seed", tc.seed, "experiment seed");
        cmd->add_option("--lr", tc.adam.lr, "Adam learning rate");
        cmd->add_option("--eval-every", tc.eval_every, "test-accuracy cadence");
        cmd->add_option("--stop-accuracy", tc.stop_accuracy,
                        "stop a repeat at this test accuracy (0 = never)");
        cmd->add_option("--readout-hidden", tc.readout_hidden, "readout hidden width");
        cmd->add_flag("--no-identity-taps", "drop the power-zero taps of snn/scnn layers");
        cmd->add_option("--scale", tr_scale, "synthetic scale: tiny, small, or full");
        cmd->add_option("--orders", td.orders, "restrict imputation to these orders")
            ->delimiter(',');
        cmd->add_option("--complex", tr_complex, "complex JSON file (else synthetic)");
        cmd->add_option("--features", tr_features, "feature JSON files")->delimiter(',');
        cmd->add_option("--trajectories", tr_trajectories, "trajectory JSON file");
        cmd->add_option("--train-size", td.synth_train, "synthetic trajectory training count");
        cmd->add_option("--test-size", td.synth_test, "synthetic trajectory test count");
        cmd->add_option("--noise", td.noise, "synthetic trajectory noise");
        cmd->add_option("--out-dir", tr_out_dir, "output directory");
    };
    CLI::App* train = app.add_subcommand("train", "run an imputation or classification experiment");
    add_shared(train);
    CLI::App* bench = app.add_subcommand("bench", "time forward+backward across architectures");
    add_shared(bench);
    std::vector<std::string> be_archs;
    int be_order = 0;
    std::string be_phase;
    bench->add_option("--archs", be_archs, "two or more of snn,scnn,mpnn,biscnn")
        ->delimiter(',');
    bench->add_option("--order", be_order, "simplex order to benchmark");
    bench->add_option("--phase", be_phase, "train or infer");

    try {
        app.parse(argc, argv);

        if (*inspect) return cmd_inspect(in_complex, in_out_dir);
        if (*spectra) return cmd_spectra(sp_complex, sp_order, sp_out_dir);
        if (*filter)
            return cmd_filter(fl_complex, fl_features, fl_taps, fl_preset, fl_cutoff, fl_out_dir);
        if (*synth)
            return cmd_synth(sy_kind, sy_scale, sy_seed, sy_train, sy_test, sy_noise, sy_out_dir);

        CLI::App* cmd = *train ? train : bench;
        // CLI11 parsed any passed flags straight into tc/td. Apply the
        // config file to a fresh config, then lay the explicitly passed
        // flags back on top.
        TrainConfig flag_cfg = tc;
        DataSpec flag_data = td;
        TrainConfig cfg;
        DataSpec data;
        if (!tr_config.empty()) apply_config_file(tr_config, cfg, data);
        auto pick = [&](const char* name, auto& dst, const auto& flag_val) {
            if (cmd->count(name)) dst = flag_val;
        };
        pick("--layers", cfg.layers, flag_cfg.layers);
        pick("--j", cfg.j, flag_cfg.j);
        pick("--filters", cfg.filters, flag_cfg.filters);
        pick("--missing-rate", cfg.missing_rate, flag_cfg.missing_rate);
        pick("--batch", cfg.batch, flag_cfg.batch);
        pick("--iterations", cfg.iterations, flag_cfg.iterations);
        pick("--repeats", cfg.repeats, flag_cfg.repeats);
        pick("--seed", cfg.seed, flag_cfg.seed);
        pick("--lr", cfg.adam.lr, flag_cfg.adam.lr);
        pick("--eval-every", cfg.eval_every, flag_cfg.eval_every);
        pick("--stop-accuracy", cfg.stop_accuracy, flag_cfg.stop_accuracy);
        pick("--readout-hidden", cfg.readout_hidden, flag_cfg.readout_hidden);
        pick("--orders", data.orders, flag_data.orders);
        pick("--train-size", data.synth_train, flag_data.synth_train);
        pick("--test-size", data.synth_test, flag_data.synth_test);
        pick("--noise", data.noise, flag_data.noise);
        if (cmd->count("--task")) cfg.task = task_from_name(tr_task);
        if (cmd->count("--arch")) cfg.arch = arch_from_name(tr_arch);
        if (cmd->count("--activation")) cfg.act = activation_from_name(tr_act);
        if (cmd->count("--scale")) data.scale = scale_from_name(tr_scale);
        if (cmd->count("--no-identity-taps")) cfg.identity_taps = false;
        if (cmd->count("--complex")) data.complex_path = tr_complex;
        if (cmd->count("--features")) data.feature_paths = tr_features;
        if (cmd->count("--trajectories")) data.trajectories_path = tr_trajectories;

        if (*train) return cmd_train(cfg, data, tr_out_dir);
        if (be_phase == "infer") cfg.phase = Phase::infer;
        return cmd_bench(cfg, data, be_archs, be_order, tr_out_dir);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const SchemaVersionError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const DimensionMismatchError& e) {
        std::cerr << "dimension error: " << e.what() << "\n";
        return 3;
    } catch (const OrderOutOfRangeError& e) {
        std::cerr << "dimension error: " << e.what() << "\n";
        return 3;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const RateOutOfRangeError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 4;
    }
}
