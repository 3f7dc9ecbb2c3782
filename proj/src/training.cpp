#include "splx/training.hpp"

#include <cmath>

#include "splx/errors.hpp"
#include "splx/kernels.hpp"
#include "splx/rng.hpp"

namespace splx {
namespace {

inline double l1_sign(double x) {
    if (x > 0.0) return 1.0;
    if (x < 0.0) return -1.0;
    return 0.0;
}

Matrix init_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-a, a);
    return m;
}

} // namespace

void adam_step(ParamTensor& p, const AdamConfig& cfg, long t) {
    if (t < 1) throw RateOutOfRangeError("adam_step: step count must be >= 1");
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    double* v = p.value.data();
    double* g = p.grad.data();
    double* m1 = p.m1.data();
    double* m2 = p.m2.data();
    for (std::size_t i = 0; i < p.value.size(); ++i) {
        m1[i] = cfg.beta1 * m1[i] + (1.0 - cfg.beta1) * g[i];
        m2[i] = cfg.beta2 * m2[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        double mhat = m1[i] / bc1;
        double vhat = m2[i] / bc2;
        v[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
}

LossResult l1_loss(const Matrix& pred, const Matrix& target, const Matrix& mask) {
    if (!pred.same_shape(target) || !pred.same_shape(mask))
        throw DimensionMismatchError("l1_loss: shapes differ");
    std::size_t count = 0;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask.data()[i] != 0.0) ++count;
    if (count == 0) throw EmptyMaskError("l1_loss: mask selects no entries");

    LossResult out;
    out.grad = Matrix(pred.rows(), pred.cols());
    const double inv = 1.0 / static_cast<double>(count);
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (mask.data()[i] == 0.0) continue;
        double diff = pred.data()[i] - target.data()[i];
        sum += std::abs(diff);
        out.grad.data()[i] = l1_sign(diff) * inv;
    }
    out.value = sum * inv;
    return out;
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix probs(logits.rows(), logits.cols());
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        const double* lrow = logits.row(i);
        double* prow = probs.row(i);
        double top = lrow[0];
        for (std::size_t j = 1; j < logits.cols(); ++j) top = std::max(top, lrow[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < logits.cols(); ++j) {
            prow[j] = std::exp(lrow[j] - top);
            sum += prow[j];
        }
        for (std::size_t j = 0; j < logits.cols(); ++j) prow[j] /= sum;
    }
    return probs;
}

LossResult cross_entropy_loss(const Matrix& probs, const std::vector<int>& labels) {
    if (labels.size() != probs.rows())
        throw DimensionMismatchError("cross_entropy_loss: one label per row required");
    const std::size_t b = probs.rows();
    LossResult out;
    out.grad = Matrix(probs.rows(), probs.cols());
    const double inv = 1.0 / static_cast<double>(b);
    double sum = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
        int label = labels[i];
        if (label < 0 || static_cast<std::size_t>(label) >= probs.cols())
            throw LabelOutOfRangeError("label " + std::to_string(label) + " outside class range");
        sum -= std::log(std::max(probs(i, static_cast<std::size_t>(label)), 1e-300));
        for (std::size_t j = 0; j < probs.cols(); ++j) {
            double onehot = static_cast<std::size_t>(label) == j ? 1.0 : 0.0;
            out.grad(i, j) = (probs(i, j) - onehot) * inv;
        }
    }
    out.value = sum * inv;
    return out;
}

Arch arch_from_name(const std::string& name) {
    if (name == "snn") return Arch::snn;
    if (name == "scnn") return Arch::scnn;
    if (name == "mpnn") return Arch::mpnn;
    if (name == "biscnn") return Arch::biscnn;
    throw UsageError("unknown architecture: " + name);
}

std::string arch_name(Arch a) {
    switch (a) {
        case Arch::snn: return "snn";
        case Arch::scnn: return "scnn";
        case Arch::mpnn: return "mpnn";
        case Arch::biscnn: return "biscnn";
    }
    return "unknown";
}

Network::Network(const SimplicialComplex& complex, const NetworkConfig& cfg)
    : complex_(complex), cfg_(cfg) {
    if (cfg_.layers < 1) throw UsageError("network needs at least one layer");
    const int k = cfg_.order;
    if (k < 0 || k > complex.order())
        throw OrderOutOfRangeError("network order " + std::to_string(k) +
                                   " outside complex orders");
    triple_ = &complex.laplacians(k);
    if (cfg_.arch == Arch::mpnn) {
        if (k >= 1) {
            bk_ = &complex.incidence(k);
            bk_t_ = &complex.incidence_transposed(k);
        }
        if (k < complex.order()) {
            bk1_ = &complex.incidence(k + 1);
            bk1_t_ = &complex.incidence_transposed(k + 1);
        }
        cfg_.d_out = cfg_.d_in; // message passing preserves the feature width
    }

    widths_.push_back(cfg_.d_in);
    for (int p = 1; p < cfg_.layers; ++p)
        widths_.push_back(cfg_.arch == Arch::mpnn ? cfg_.d_in : cfg_.filters);
    widths_.push_back(cfg_.d_out);

    const bool has_lower = k >= 1;
    const bool has_upper = k < complex.order();
    Rng rng(cfg_.seed);
    auto add = [&](const std::string& name, std::size_t r, std::size_t c) {
        params_.emplace_back(name, init_uniform(r, c, rng));
        return static_cast<int>(params_.size() - 1);
    };

    const int j_taps = cfg_.j < 1 ? 1 : cfg_.j;
    for (int p = 0; p < cfg_.layers; ++p) {
        LayerSlots slots;
        std::size_t di = widths_[p], dj = widths_[p + 1];
        std::string base = "layer" + std::to_string(p) + ".";
        switch (cfg_.arch) {
            case Arch::snn:
                if (cfg_.identity_taps) slots.gamma0 = add(base + "gamma0", di, dj);
                for (int j = 1; j <= j_taps; ++j)
                    slots.gamma.push_back(add(base + "gamma" + std::to_string(j), di, dj));
                break;
            case Arch::scnn:
                if (has_lower) {
                    if (cfg_.identity_taps) slots.gamma0 = add(base + "gamma0", di, dj);
                    for (int j = 1; j <= j_taps; ++j)
                        slots.gamma.push_back(add(base + "gamma" + std::to_string(j), di, dj));
                }
                if (has_upper) {
                    if (cfg_.identity_taps) slots.theta0 = add(base + "theta0", di, dj);
                    for (int j = 1; j <= j_taps; ++j)
                        slots.theta.push_back(add(base + "theta" + std::to_string(j), di, dj));
                }
                slots.xi = add(base + "xi", di, dj);
                break;
            case Arch::biscnn:
                if (has_lower) slots.gamma.push_back(add(base + "gamma1", di, dj));
                if (has_upper) slots.theta.push_back(add(base + "theta1", di, dj));
                slots.xi = add(base + "xi", di, dj);
                break;
            case Arch::mpnn:
                if (bk_) slots.gamma_vec = add(base + "gamma", 1, bk_->rows);
                if (bk1_) slots.theta_vec = add(base + "theta", 1, bk1_->cols);
                break;
        }
        layers_.push_back(std::move(slots));
    }
}

LayerParams Network::gather(const LayerSlots& s) const {
    LayerParams p;
    for (int idx : s.gamma) p.gamma.push_back(params_[idx].value);
    for (int idx : s.theta) p.theta.push_back(params_[idx].value);
    if (s.xi >= 0) p.xi = params_[s.xi].value;
    if (s.gamma0 >= 0) p.gamma0 = params_[s.gamma0].value;
    if (s.theta0 >= 0) p.theta0 = params_[s.theta0].value;
    return p;
}

MpnnParams Network::gather_mpnn(const LayerSlots& s) const {
    MpnnParams p;
    if (s.gamma_vec >= 0) {
        const Matrix& v = params_[s.gamma_vec].value;
        p.gamma_vec.assign(v.data(), v.data() + v.size());
    }
    if (s.theta_vec >= 0) {
        const Matrix& v = params_[s.theta_vec].value;
        p.theta_vec.assign(v.data(), v.data() + v.size());
    }
    return p;
}

void Network::scatter_grads(const LayerSlots& s, const LayerGrads& g) {
    for (std::size_t j = 0; j < s.gamma.size(); ++j)
        kernels::add_inplace(params_[s.gamma[j]].grad, g.gamma[j]);
    for (std::size_t j = 0; j < s.theta.size(); ++j)
        kernels::add_inplace(params_[s.theta[j]].grad, g.theta[j]);
    if (s.xi >= 0) kernels::add_inplace(params_[s.xi].grad, g.xi);
    if (s.gamma0 >= 0) kernels::add_inplace(params_[s.gamma0].grad, g.gamma0);
    if (s.theta0 >= 0) kernels::add_inplace(params_[s.theta0].grad, g.theta0);
}

void Network::scatter_grads_mpnn(const LayerSlots& s, const MpnnGrads& g) {
    if (s.gamma_vec >= 0) {
        Matrix& dst = params_[s.gamma_vec].grad;
        for (std::size_t i = 0; i < g.gamma_vec.size(); ++i) dst.data()[i] += g.gamma_vec[i];
    }
    if (s.theta_vec >= 0) {
        Matrix& dst = params_[s.theta_vec].grad;
        for (std::size_t i = 0; i < g.theta_vec.size(); ++i) dst.data()[i] += g.theta_vec[i];
    }
}

Matrix Network::forward(const Matrix& x, Phase phase, NetTape& tape) const {
    if (x.rows() != complex_.count(cfg_.order))
        throw DimensionMismatchError("network forward: row count does not match order " +
                                     std::to_string(cfg_.order));
    if (x.cols() != cfg_.d_in)
        throw DimensionMismatchError("network forward: expected " + std::to_string(cfg_.d_in) +
                                     " input features");
    tape.layers.assign(static_cast<std::size_t>(cfg_.layers), LayerTape{});
    tape.ms.clear();
    tape.phase = phase;
    tape.valid = true;

    Matrix z = x;
    if (cfg_.arch == Arch::biscnn) {
        for (int p = 0; p < cfg_.layers; ++p) {
            BiOutputs out = biscnn_layer_forward(*triple_, z, gather(layers_[p]), phase,
                                                 &tape.layers[p]);
            tape.ms.push_back(std::move(out.m));
            z = std::move(out.q);
        }
        tape.q_final = z;
        tape.m_product.assign(z.rows(), 1.0);
        for (int p = cfg_.include_first_norm ? 0 : 1; p < cfg_.layers; ++p)
            for (std::size_t i = 0; i < z.rows(); ++i) tape.m_product[i] *= tape.ms[p][i];
        return kernels::row_scale(z, tape.m_product);
    }

    for (int p = 0; p < cfg_.layers; ++p) {
        Activation act =
            (p == cfg_.layers - 1 && cfg_.final_identity) ? Activation::identity : cfg_.act;
        switch (cfg_.arch) {
            case Arch::snn:
                z = snn_forward(triple_->full, z, gather(layers_[p]), act, &tape.layers[p]);
                break;
            case Arch::scnn:
                z = scnn_forward(*triple_, z, gather(layers_[p]), act, &tape.layers[p]);
                break;
            case Arch::mpnn:
                z = mpnn_forward(bk_, bk_t_, bk1_, bk1_t_, z, gather_mpnn(layers_[p]), act,
                                 &tape.layers[p]);
                break;
            case Arch::biscnn:
                break;
        }
    }
    return z;
}

Matrix Network::backward(const Matrix& d_out, const NetTape& tape) {
    if (!tape.valid || tape.layers.size() != static_cast<std::size_t>(cfg_.layers))
        throw StaleTapeError("network backward: no matching forward recorded");

    if (cfg_.arch == Arch::biscnn) {
        if (tape.q_final.empty() || !d_out.same_shape(tape.q_final))
            throw StaleTapeError("network backward: tape does not match gradient shape");
        Matrix d_q = kernels::row_scale(d_out, tape.m_product);
        std::vector<double> d_c = kernels::rowwise_dot(d_out, tape.q_final);

        // d m_p = d_c * prod of the other included normalizations.
        const int first = cfg_.include_first_norm ? 0 : 1;
        const std::size_t n = tape.q_final.rows();
        std::vector<std::vector<double>> d_ms(tape.ms.size());
        std::vector<double> prefix(n, 1.0);
        std::vector<std::vector<double>> suffixes(tape.ms.size() + 1,
                                                  std::vector<double>(n, 1.0));
        for (int p = cfg_.layers - 1; p >= first; --p)
            for (std::size_t i = 0; i < n; ++i)
                suffixes[p][i] = suffixes[p + 1][i] * tape.ms[p][i];
        for (int p = first; p < cfg_.layers; ++p) {
            d_ms[p].assign(n, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                d_ms[p][i] = d_c[i] * prefix[i] * suffixes[p + 1][i];
            for (std::size_t i = 0; i < n; ++i) prefix[i] *= tape.ms[p][i];
        }

        Matrix d = d_q;
        for (int p = cfg_.layers - 1; p >= 0; --p) {
            LayerGrads grads;
            d = biscnn_layer_backward(*triple_, gather(layers_[p]), tape.layers[p], d, d_ms[p],
                                      grads);
            scatter_grads(layers_[p], grads);
        }
        return d;
    }

    Matrix d = d_out;
    for (int p = cfg_.layers - 1; p >= 0; --p) {
        if (cfg_.arch == Arch::mpnn) {
            MpnnGrads grads;
            d = mpnn_backward(bk_, bk_t_, bk1_, bk1_t_, gather_mpnn(layers_[p]), tape.layers[p],
                              d, grads);
            scatter_grads_mpnn(layers_[p], grads);
        } else {
            LayerGrads grads;
            d = cfg_.arch == Arch::snn
                    ? snn_backward(triple_->full, gather(layers_[p]), tape.layers[p], d, grads)
                    : scnn_backward(*triple_, gather(layers_[p]), tape.layers[p], d, grads);
            scatter_grads(layers_[p], grads);
        }
    }
    return d;
}

void Network::zero_grads() {
    for (ParamTensor& p : params_) p.grad = Matrix(p.value.rows(), p.value.cols());
}

void Network::adam_update(const AdamConfig& cfg, long t) {
    for (ParamTensor& p : params_) adam_step(p, cfg, t);
}

std::size_t Network::parameter_count() const {
    std::size_t n = 0;
    for (const ParamTensor& p : params_) n += p.value.size();
    return n;
}

ReadoutHead::ReadoutHead(std::size_t d_in, std::size_t hidden, std::size_t classes,
                         Activation act, std::uint64_t seed)
    : d_in_(d_in), hidden_(hidden), classes_(classes), act_(act) {
    Rng rng(seed);
    params_.emplace_back("readout.w1", init_uniform(d_in, hidden, rng));
    params_.emplace_back("readout.b1", Matrix(1, hidden));
    params_.emplace_back("readout.w2", init_uniform(hidden, classes, rng));
    params_.emplace_back("readout.b2", Matrix(1, classes));
}

std::vector<double> ReadoutHead::forward(const Matrix& z, Tape& tape) const {
    if (z.cols() != d_in_)
        throw DimensionMismatchError("readout forward: feature width mismatch");
    if (z.rows() == 0) throw DimensionMismatchError("readout forward: empty input");
    const Matrix& w1 = params_[0].value;
    const Matrix& b1 = params_[1].value;
    const Matrix& w2 = params_[2].value;
    const Matrix& b2 = params_[3].value;

    tape.n_rows = z.rows();
    tape.pooled.assign(d_in_, 0.0);
    for (std::size_t i = 0; i < z.rows(); ++i)
        for (std::size_t j = 0; j < d_in_; ++j) tape.pooled[j] += z(i, j);
    for (double& v : tape.pooled) v /= static_cast<double>(z.rows());

    tape.hidden_pre.assign(hidden_, 0.0);
    for (std::size_t h = 0; h < hidden_; ++h) {
        double sum = b1(0, h);
        for (std::size_t j = 0; j < d_in_; ++j) sum += tape.pooled[j] * w1(j, h);
        tape.hidden_pre[h] = sum;
    }
    tape.hidden.resize(hidden_);
    for (std::size_t h = 0; h < hidden_; ++h) tape.hidden[h] = activate(act_, tape.hidden_pre[h]);

    std::vector<double> logits(classes_, 0.0);
    for (std::size_t c = 0; c < classes_; ++c) {
        double sum = b2(0, c);
        for (std::size_t h = 0; h < hidden_; ++h) sum += tape.hidden[h] * w2(h, c);
        logits[c] = sum;
    }
    tape.valid = true;
    return logits;
}

Matrix ReadoutHead::backward(const std::vector<double>& d_logits, const Tape& tape) {
    if (!tape.valid || tape.n_rows == 0)
        throw StaleTapeError("readout backward: no matching forward recorded");
    if (d_logits.size() != classes_)
        throw DimensionMismatchError("readout backward: logit gradient width mismatch");
    Matrix& d_w1 = params_[0].grad;
    Matrix& d_b1 = params_[1].grad;
    Matrix& d_w2 = params_[2].grad;
    Matrix& d_b2 = params_[3].grad;
    const Matrix& w1 = params_[0].value;
    const Matrix& w2 = params_[2].value;

    std::vector<double> d_hidden(hidden_, 0.0);
    for (std::size_t c = 0; c < classes_; ++c) {
        d_b2(0, c) += d_logits[c];
        for (std::size_t h = 0; h < hidden_; ++h) {
            d_w2(h, c) += tape.hidden[h] * d_logits[c];
            d_hidden[h] += w2(h, c) * d_logits[c];
        }
    }
    std::vector<double> d_pre(hidden_);
    for (std::size_t h = 0; h < hidden_; ++h)
        d_pre[h] = d_hidden[h] * activate_grad(act_, tape.hidden_pre[h]);

    std::vector<double> d_pooled(d_in_, 0.0);
    for (std::size_t h = 0; h < hidden_; ++h) {
        d_b1(0, h) += d_pre[h];
        for (std::size_t j = 0; j < d_in_; ++j) {
            d_w1(j, h) += tape.pooled[j] * d_pre[h];
            d_pooled[j] += w1(j, h) * d_pre[h];
        }
    }

    Matrix d_z(tape.n_rows, d_in_);
    const double inv = 1.0 / static_cast<double>(tape.n_rows);
    for (std::size_t i = 0; i < tape.n_rows; ++i)
        for (std::size_t j = 0; j < d_in_; ++j) d_z(i, j) = d_pooled[j] * inv;
    return d_z;
}

void ReadoutHead::zero_grads() {
    for (ParamTensor& p : params_) p.grad = Matrix(p.value.rows(), p.value.cols());
}

void ReadoutHead::adam_update(const AdamConfig& cfg, long t) {
    for (ParamTensor& p : params_) adam_step(p, cfg, t);
}

std::size_t ReadoutHead::parameter_count() const {
    std::size_t n = 0;
    for (const ParamTensor& p : params_) n += p.value.size();
    return n;
}

} // namespace splx
