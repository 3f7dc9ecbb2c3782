#include "splx/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "splx/errors.hpp"
#include "splx/kernels.hpp"
#include "splx/rng.hpp"

namespace splx {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
    Rng r(base ^ (salt * 0x9E3779B97F4A7C15ull + 0x2545F4914F6CDD1Dull));
    return r.next_u64();
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v, double mean) {
    if (v.empty()) return 0.0;
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(v.size()));
}

double max_abs(const Matrix& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) s = std::max(s, std::abs(m.data()[i]));
    return s;
}

NetworkConfig network_config(const TrainConfig& cfg, int order, std::size_t d_in,
                             std::size_t d_out, bool final_identity, std::uint64_t seed) {
    NetworkConfig nc;
    nc.arch = cfg.arch;
    nc.order = order;
    nc.layers = cfg.layers;
    nc.j = cfg.j;
    nc.filters = cfg.filters;
    nc.d_in = d_in;
    nc.d_out = d_out;
    nc.act = cfg.act;
    nc.final_identity = final_identity;
    nc.identity_taps = cfg.identity_taps;
    nc.include_first_norm = cfg.include_first_norm;
    nc.seed = seed;
    return nc;
}

} // namespace

Task task_from_name(const std::string& name) {
    if (name == "impute") return Task::impute;
    if (name == "classify") return Task::classify;
    throw UsageError("unknown task: " + name);
}

std::string task_name(Task t) {
    return t == Task::impute ? "impute" : "classify";
}

bool imputation_hit(double pred, double truth) {
    if (truth == 0.0) return std::abs(pred) <= 1e-6;
    return std::abs(pred - truth) <= 0.01 * std::abs(truth);
}

ImputationSummary train_imputation(const SimplicialComplex& complex,
                                   const std::vector<Matrix>& features,
                                   const TrainConfig& cfg) {
    if (cfg.missing_rate <= 0.0 || cfg.missing_rate >= 1.0)
        throw RateOutOfRangeError("missing rate must lie in (0, 1)");
    if (cfg.repeats < 1) throw UsageError("repeats must be at least 1");
    if (features.empty()) throw UsageError("no feature matrices supplied");

    std::vector<int> orders;
    for (std::size_t k = 0; k < features.size(); ++k) {
        if (features[k].empty()) continue;
        if (static_cast<int>(k) > complex.order())
            throw OrderOutOfRangeError("features beyond the complex order");
        if (features[k].rows() != complex.count(static_cast<int>(k)))
            throw DimensionMismatchError("feature rows do not match simplex count at order " +
                                         std::to_string(k));
        orders.push_back(static_cast<int>(k));
    }
    if (orders.empty()) throw UsageError("no feature matrices supplied");

    ImputationSummary summary;
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
        const std::uint64_t repeat_seed = mix_seed(cfg.seed, r + 1);
        ImputationRepeat rep;
        std::size_t hidden_total = 0, hidden_hits = 0, hidden_base_hits = 0;
        std::size_t entry_total = 0, entry_hits = 0, entry_base_hits = 0;

        for (int k : orders) {
            const Matrix& x = features[static_cast<std::size_t>(k)];
            const std::uint64_t order_seed = mix_seed(repeat_seed, static_cast<std::uint64_t>(k));
            MaskedFeatures mf = mask_features(x, cfg.missing_rate, order_seed);

            // Train in a space scaled to max |known entry| = 1 so the
            // binarization surrogate starts in its linear region. Accuracy
            // is scale-invariant, so scores are reported against the raw
            // values.
            double scale = max_abs(mf.filled);
            if (scale == 0.0) scale = 1.0;
            Matrix input = mf.filled;
            kernels::scale_inplace(input, 1.0 / scale);

            Network net(complex, network_config(cfg, k, x.cols(), x.cols(), true,
                                                mix_seed(order_seed, 0xA11ull)));
            ImputationOrderResult res;
            res.order = k;
            res.parameters = net.parameter_count();
            res.hidden_count = mf.hidden_count;
            res.entry_count = x.size();
            res.loss_curve.reserve(cfg.iterations);

            NetTape tape;
            for (std::size_t it = 1; it <= cfg.iterations; ++it) {
                auto t0 = Clock::now();
                Matrix out = net.forward(input, Phase::train, tape);
                LossResult loss = l1_loss(out, input, mf.known_mask);
                net.zero_grads();
                net.backward(loss.grad, tape);
                summary.train_seconds += seconds_since(t0);
                net.adam_update(cfg.adam, static_cast<long>(it));
                res.loss_curve.push_back(loss.value);
            }

            Matrix pred = net.forward(input, Phase::train, tape);
            kernels::scale_inplace(pred, scale);
            std::size_t oh = 0, ob = 0, oh_all = 0, ob_all = 0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double truth = x.data()[i];
                const bool hidden = mf.known_mask.data()[i] == 0.0;
                const bool hit = imputation_hit(pred.data()[i], truth);
                const bool base_hit =
                    hidden ? imputation_hit(mf.median, truth) : true;
                if (hit) ++oh_all;
                if (base_hit) ++ob_all;
                if (hidden) {
                    if (hit) ++oh;
                    if (base_hit) ++ob;
                }
            }
            res.hidden_accuracy = mf.hidden_count
                                      ? 100.0 * static_cast<double>(oh) /
                                            static_cast<double>(mf.hidden_count)
                                      : 0.0;
            res.hidden_baseline = mf.hidden_count
                                      ? 100.0 * static_cast<double>(ob) /
                                            static_cast<double>(mf.hidden_count)
                                      : 0.0;
            res.overall_accuracy =
                100.0 * static_cast<double>(oh_all) / static_cast<double>(x.size());
            res.overall_baseline =
                100.0 * static_cast<double>(ob_all) / static_cast<double>(x.size());
            hidden_total += mf.hidden_count;
            hidden_hits += oh;
            hidden_base_hits += ob;
            entry_total += x.size();
            entry_hits += oh_all;
            entry_base_hits += ob_all;
            if (r == 0) summary.parameters += res.parameters;
            rep.orders.push_back(std::move(res));
        }

        rep.hidden_accuracy =
            hidden_total ? 100.0 * static_cast<double>(hidden_hits) /
                               static_cast<double>(hidden_total)
                         : 0.0;
        rep.hidden_baseline =
            hidden_total ? 100.0 * static_cast<double>(hidden_base_hits) /
                               static_cast<double>(hidden_total)
                         : 0.0;
        rep.overall_accuracy =
            100.0 * static_cast<double>(entry_hits) / static_cast<double>(entry_total);
        rep.overall_baseline =
            100.0 * static_cast<double>(entry_base_hits) / static_cast<double>(entry_total);
        summary.repeats.push_back(std::move(rep));
    }

    std::vector<double> ha, hb, oa, ob;
    for (const ImputationRepeat& rep : summary.repeats) {
        ha.push_back(rep.hidden_accuracy);
        hb.push_back(rep.hidden_baseline);
        oa.push_back(rep.overall_accuracy);
        ob.push_back(rep.overall_baseline);
    }
    summary.mean_hidden_accuracy = mean_of(ha);
    summary.std_hidden_accuracy = std_of(ha, summary.mean_hidden_accuracy);
    summary.mean_hidden_baseline = mean_of(hb);
    summary.mean_overall_accuracy = mean_of(oa);
    summary.std_overall_accuracy = std_of(oa, summary.mean_overall_accuracy);
    summary.mean_overall_baseline = mean_of(ob);
    return summary;
}

ClassificationSummary train_classification(const SimplicialComplex& complex,
                                           const TrajectoryData& data, const TrainConfig& cfg) {
    if (cfg.repeats < 1) throw UsageError("repeats must be at least 1");
    if (cfg.batch < 1) throw UsageError("batch size must be at least 1");
    if (data.train_idx.empty() || data.test_idx.empty())
        throw UsageError("classification needs both train and test indices");
    if (complex.order() < 1) throw OrderOutOfRangeError("trajectory complex has no edges");
    for (const Matrix& f : data.flows)
        if (f.rows() != complex.count(1) || f.cols() != 1)
            throw DimensionMismatchError("flow length does not match edge count");

    int classes = 0;
    for (int l : data.labels) classes = std::max(classes, l + 1);
    classes = std::max(classes, 2);

    ClassificationSummary summary;
    const std::size_t batch = std::min(cfg.batch, data.train_idx.size());

    for (std::size_t r = 0; r < cfg.repeats; ++r) {
        const std::uint64_t repeat_seed = mix_seed(cfg.seed, 0xC1A55ull + r);
        Network net(complex,
                    network_config(cfg, 1, 1, cfg.filters, false, mix_seed(repeat_seed, 1)));
        const std::size_t readout_in = net.widths().back();
        ReadoutHead head(readout_in, cfg.readout_hidden, static_cast<std::size_t>(classes),
                         cfg.act, mix_seed(repeat_seed, 2));
        if (r == 0) summary.parameters = net.parameter_count() + head.parameter_count();

        std::vector<std::size_t> order = data.train_idx;
        Rng shuffler(mix_seed(repeat_seed, 3));
        shuffler.shuffle(order);

        auto evaluate = [&]() {
            std::size_t hits = 0;
            NetTape tape;
            ReadoutHead::Tape rtape;
            for (std::size_t idx : data.test_idx) {
                Matrix z = net.forward(data.flows[idx], Phase::train, tape);
                std::vector<double> logits = head.forward(z, rtape);
                int best = 0;
                for (int c = 1; c < classes; ++c)
                    if (logits[static_cast<std::size_t>(c)] >
                        logits[static_cast<std::size_t>(best)])
                        best = c;
                if (best == data.labels[idx]) ++hits;
            }
            return 100.0 * static_cast<double>(hits) /
                   static_cast<double>(data.test_idx.size());
        };

        ClassificationRepeat rep;
        std::vector<NetTape> tapes(batch);
        std::vector<ReadoutHead::Tape> rtapes(batch);
        std::size_t cursor = 0;
        for (std::size_t it = 1; it <= cfg.iterations; ++it) {
            std::vector<std::size_t> picks(batch);
            std::vector<int> labels(batch);
            for (std::size_t b = 0; b < batch; ++b) {
                picks[b] = order[cursor];
                labels[b] = data.labels[picks[b]];
                cursor = (cursor + 1) % order.size();
            }

            auto t0 = Clock::now();
            Matrix logits(batch, static_cast<std::size_t>(classes));
            for (std::size_t b = 0; b < batch; ++b) {
                Matrix z = net.forward(data.flows[picks[b]], Phase::train, tapes[b]);
                std::vector<double> row = head.forward(z, rtapes[b]);
                for (int c = 0; c < classes; ++c)
                    logits(b, static_cast<std::size_t>(c)) = row[static_cast<std::size_t>(c)];
            }
            Matrix probs = softmax_rows(logits);
            LossResult loss = cross_entropy_loss(probs, labels);
            net.zero_grads();
            head.zero_grads();
            for (std::size_t b = 0; b < batch; ++b) {
                std::vector<double> d_logits(static_cast<std::size_t>(classes));
                for (int c = 0; c < classes; ++c)
                    d_logits[static_cast<std::size_t>(c)] =
                        loss.grad(b, static_cast<std::size_t>(c));
                Matrix d_z = head.backward(d_logits, rtapes[b]);
                net.backward(d_z, tapes[b]);
            }
            summary.train_seconds += seconds_since(t0);
            net.adam_update(cfg.adam, static_cast<long>(it));
            head.adam_update(cfg.adam, static_cast<long>(it));
            rep.loss_curve.push_back(loss.value);
            rep.iterations_run = it;

            const bool last = it == cfg.iterations;
            if (last || (cfg.eval_every && it % cfg.eval_every == 0)) {
                double acc = evaluate();
                rep.accuracy_curve.emplace_back(it, acc);
                rep.final_accuracy = acc;
                if (cfg.stop_accuracy > 0.0 && acc >= cfg.stop_accuracy) break;
            }
        }
        summary.repeats.push_back(std::move(rep));
    }

    std::vector<double> accs;
    for (const ClassificationRepeat& rep : summary.repeats) accs.push_back(rep.final_accuracy);
    summary.mean_accuracy = mean_of(accs);
    summary.std_accuracy = std_of(accs, summary.mean_accuracy);
    return summary;
}

BenchReport run_bench(const SimplicialComplex& complex, const Matrix& features, int k,
                      const std::vector<Arch>& archs, const TrainConfig& cfg) {
    if (archs.size() < 2) throw UsageError("benchmark needs at least two architectures");
    if (features.rows() != complex.count(k))
        throw DimensionMismatchError("feature rows do not match simplex count");

    MaskedFeatures mf = mask_features(features, cfg.missing_rate, mix_seed(cfg.seed, 0xBEC4ull));
    double scale = max_abs(mf.filled);
    if (scale == 0.0) scale = 1.0;
    Matrix input = mf.filled;
    kernels::scale_inplace(input, 1.0 / scale);

    BenchReport report;
    report.iterations = cfg.iterations;
    report.order = k;
    report.phase = cfg.phase;

    for (Arch arch : archs) {
        TrainConfig local = cfg;
        local.arch = arch;
        Network net(complex, network_config(local, k, features.cols(), features.cols(), true,
                                            mix_seed(cfg.seed, 0x5EEDull)));
        BenchEntry entry;
        entry.arch = arch;
        entry.parameters = net.parameter_count();

        NetTape tape;
        // Warm-up iteration, excluded from the timer.
        {
            Matrix out = net.forward(input, cfg.phase, tape);
            LossResult loss = l1_loss(out, input, mf.known_mask);
            net.zero_grads();
            net.backward(loss.grad, tape);
            net.adam_update(cfg.adam, 1);
        }
        for (std::size_t it = 0; it < cfg.iterations; ++it) {
            auto t0 = Clock::now();
            Matrix out = net.forward(input, cfg.phase, tape);
            LossResult loss = l1_loss(out, input, mf.known_mask);
            net.zero_grads();
            net.backward(loss.grad, tape);
            entry.seconds += seconds_since(t0);
            net.adam_update(cfg.adam, static_cast<long>(it + 2));
            entry.final_loss = loss.value;
        }
        entry.seconds_per_iteration =
            cfg.iterations ? entry.seconds / static_cast<double>(cfg.iterations) : 0.0;

        net.forward(input, cfg.phase, tape);
        for (const LayerTape& lt : tape.layers) {
            const Matrix& multiplied = lt.surrogate.empty() ? lt.z_in : lt.surrogate;
            entry.sign_fractions.push_back(kernels::sign_fraction(multiplied));
        }
        report.entries.push_back(std::move(entry));
    }
    return report;
}

} // namespace splx
