#include "splx/layers.hpp"

#include <cmath>
#include <string>

#include "splx/errors.hpp"
#include "splx/kernels.hpp"

namespace splx {
namespace {

// Subgradient of |x| used for the normalization path; 0 at the kink.
inline double l1_sign(double x) {
    if (x > 0.0) return 1.0;
    if (x < 0.0) return -1.0;
    return 0.0;
}

std::size_t tap_output_dim(const LayerParams& p) {
    if (!p.xi.empty()) return p.xi.cols();
    if (!p.gamma.empty()) return p.gamma.front().cols();
    if (!p.theta.empty()) return p.theta.front().cols();
    if (!p.gamma0.empty()) return p.gamma0.cols();
    if (!p.theta0.empty()) return p.theta0.cols();
    throw DimensionMismatchError("layer has no weight taps");
}

void check_tap(const Matrix& tap, std::size_t d_in, std::size_t d_out, const char* name) {
    if (tap.rows() != d_in || tap.cols() != d_out)
        throw DimensionMismatchError(std::string(name) + " tap shape does not match layer");
}

// A += sum_j op^j z taps[j-1], caching op^j z.
void accumulate_power_taps(const SparseMatrix& op, const Matrix& z,
                           const std::vector<Matrix>& taps, Matrix& a,
                           std::vector<Matrix>* cache) {
    Matrix power = z;
    for (const Matrix& tap : taps) {
        power = kernels::spmm(op, power);
        kernels::add_inplace(a, kernels::matmul(power, tap));
        if (cache) cache->push_back(power);
    }
}

// dZ += sum_j op^j d taps[j-1]^T; dTaps[j-1] += cache[j-1]^T d.
void backward_power_taps(const SparseMatrix& op, const std::vector<Matrix>& taps,
                         const std::vector<Matrix>& cache, const Matrix& d,
                         std::vector<Matrix>& tap_grads, Matrix& d_z) {
    Matrix w = d;
    for (std::size_t j = 0; j < taps.size(); ++j) {
        w = kernels::spmm(op, w);
        kernels::add_inplace(tap_grads[j], kernels::matmul_at_b(cache[j], d));
        kernels::add_inplace(d_z, kernels::matmul_a_bt(w, taps[j]));
    }
}

Matrix apply_activation(const Matrix& a, Activation act, Matrix* deriv) {
    Matrix out(a.rows(), a.cols());
    if (deriv) *deriv = Matrix(a.rows(), a.cols());
    const double* pa = a.data();
    double* po = out.data();
    for (std::size_t i = 0; i < a.size(); ++i) {
        po[i] = activate(act, pa[i]);
        if (deriv) deriv->data()[i] = activate_grad(act, pa[i]);
    }
    return out;
}

void ensure_grad_slots(LayerGrads& g, const LayerParams& p) {
    auto match = [](std::vector<Matrix>& gs, const std::vector<Matrix>& ps) {
        if (gs.size() != ps.size()) {
            gs.clear();
            for (const Matrix& m : ps) gs.emplace_back(m.rows(), m.cols());
        }
    };
    match(g.gamma, p.gamma);
    match(g.theta, p.theta);
    if (!p.xi.empty() && g.xi.empty()) g.xi = Matrix(p.xi.rows(), p.xi.cols());
    if (!p.gamma0.empty() && g.gamma0.empty()) g.gamma0 = Matrix(p.gamma0.rows(), p.gamma0.cols());
    if (!p.theta0.empty() && g.theta0.empty()) g.theta0 = Matrix(p.theta0.rows(), p.theta0.cols());
}

} // namespace

Activation activation_from_name(const std::string& name) {
    if (name == "identity" || name == "id") return Activation::identity;
    if (name == "leaky_relu" || name == "lrelu" || name == "lr") return Activation::leaky_relu;
    if (name == "tanh") return Activation::tanh;
    if (name == "hard_tanh") return Activation::hard_tanh;
    throw UsageError("unknown activation: " + name);
}

std::string activation_name(Activation a) {
    switch (a) {
        case Activation::identity: return "identity";
        case Activation::leaky_relu: return "leaky_relu";
        case Activation::tanh: return "tanh";
        case Activation::hard_tanh: return "hard_tanh";
    }
    return "unknown";
}

double activate(Activation a, double x) {
    switch (a) {
        case Activation::identity: return x;
        case Activation::leaky_relu: return x >= 0.0 ? x : 0.01 * x;
        case Activation::tanh: return std::tanh(x);
        case Activation::hard_tanh: return x > 1.0 ? 1.0 : (x < -1.0 ? -1.0 : x);
    }
    return x;
}

double activate_grad(Activation a, double x) {
    switch (a) {
        case Activation::identity: return 1.0;
        case Activation::leaky_relu: return x >= 0.0 ? 1.0 : 0.01;
        case Activation::tanh: {
            double t = std::tanh(x);
            return 1.0 - t * t;
        }
        case Activation::hard_tanh: return std::abs(x) <= 1.0 ? 1.0 : 0.0;
    }
    return 1.0;
}

Matrix sign_matrix(const Matrix& x) {
    Matrix s(x.rows(), x.cols());
    const double* px = x.data();
    double* ps = s.data();
    for (std::size_t i = 0; i < x.size(); ++i) ps[i] = px[i] >= 0.0 ? 1.0 : -1.0;
    return s;
}

HardTanh hard_tanh(const Matrix& x) {
    HardTanh out{Matrix(x.rows(), x.cols()), Matrix(x.rows(), x.cols())};
    const double* px = x.data();
    for (std::size_t i = 0; i < x.size(); ++i) {
        double v = px[i];
        out.value.data()[i] = v > 1.0 ? 1.0 : (v < -1.0 ? -1.0 : v);
        out.mask.data()[i] = std::abs(v) <= 1.0 ? 1.0 : 0.0;
    }
    return out;
}

std::vector<double> feature_normalize(const Matrix& x) {
    if (x.cols() == 0) throw DimensionMismatchError("feature_normalize: no feature columns");
    std::vector<double> m(x.rows(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double* row = x.row(i);
        double sum = 0.0;
        for (std::size_t j = 0; j < x.cols(); ++j) sum += std::abs(row[j]);
        m[i] = sum / static_cast<double>(x.cols());
    }
    return m;
}

BiOutputs binarize_features(const Matrix& x, Phase phase) {
    BiOutputs out;
    out.m = feature_normalize(x);
    out.q = phase == Phase::train ? hard_tanh(x).value : sign_matrix(x);
    return out;
}

Matrix snn_forward(const SparseMatrix& laplacian, const Matrix& z, const LayerParams& p,
                   Activation act, LayerTape* tape) {
    if (laplacian.cols != z.rows())
        throw DimensionMismatchError("snn_forward: input rows do not match Laplacian");
    std::size_t d_out = tap_output_dim(p);
    for (const Matrix& g : p.gamma) check_tap(g, z.cols(), d_out, "gamma");
    if (!p.gamma0.empty()) check_tap(p.gamma0, z.cols(), d_out, "gamma0");

    Matrix a(z.rows(), d_out);
    if (!p.gamma0.empty()) kernels::add_inplace(a, kernels::matmul(z, p.gamma0));
    accumulate_power_taps(laplacian, z, p.gamma, a, tape ? &tape->lower_feats : nullptr);
    if (tape) {
        tape->z_in = z;
        tape->pre_act = a;
    }
    return apply_activation(a, act, tape ? &tape->act_deriv : nullptr);
}

Matrix snn_backward(const SparseMatrix& laplacian, const LayerParams& p, const LayerTape& tape,
                    const Matrix& d_out, LayerGrads& grads) {
    if (tape.pre_act.empty() || !d_out.same_shape(tape.pre_act))
        throw StaleTapeError("snn_backward: tape does not match this gradient");
    ensure_grad_slots(grads, p);
    Matrix g = kernels::hadamard(d_out, tape.act_deriv);
    Matrix d_z(tape.z_in.rows(), tape.z_in.cols());
    if (!p.gamma0.empty()) {
        kernels::add_inplace(grads.gamma0, kernels::matmul_at_b(tape.z_in, g));
        kernels::add_inplace(d_z, kernels::matmul_a_bt(g, p.gamma0));
    }
    backward_power_taps(laplacian, p.gamma, tape.lower_feats, g, grads.gamma, d_z);
    return d_z;
}

Matrix scnn_forward(const HodgeTriple& triple, const Matrix& z, const LayerParams& p,
                    Activation act, LayerTape* tape) {
    if (triple.full.cols != z.rows())
        throw DimensionMismatchError("scnn_forward: input rows do not match Laplacian");
    if (!p.gamma.empty() && !triple.lower)
        throw DimensionMismatchError("scnn_forward: lower taps given but no lower Laplacian");
    if (!p.theta.empty() && !triple.upper)
        throw DimensionMismatchError("scnn_forward: upper taps given but no upper Laplacian");
    std::size_t d_out = tap_output_dim(p);
    for (const Matrix& g : p.gamma) check_tap(g, z.cols(), d_out, "gamma");
    for (const Matrix& t : p.theta) check_tap(t, z.cols(), d_out, "theta");
    if (!p.xi.empty()) check_tap(p.xi, z.cols(), d_out, "xi");
    if (!p.gamma0.empty()) check_tap(p.gamma0, z.cols(), d_out, "gamma0");
    if (!p.theta0.empty()) check_tap(p.theta0, z.cols(), d_out, "theta0");

    Matrix a(z.rows(), d_out);
    if (!p.xi.empty()) kernels::add_inplace(a, kernels::matmul(z, p.xi));
    if (!p.gamma0.empty()) kernels::add_inplace(a, kernels::matmul(z, p.gamma0));
    if (!p.theta0.empty()) kernels::add_inplace(a, kernels::matmul(z, p.theta0));
    if (triple.lower)
        accumulate_power_taps(*triple.lower, z, p.gamma, a, tape ? &tape->lower_feats : nullptr);
    if (triple.upper)
        accumulate_power_taps(*triple.upper, z, p.theta, a, tape ? &tape->upper_feats : nullptr);
    if (tape) {
        tape->z_in = z;
        tape->pre_act = a;
    }
    return apply_activation(a, act, tape ? &tape->act_deriv : nullptr);
}

Matrix scnn_backward(const HodgeTriple& triple, const LayerParams& p, const LayerTape& tape,
                     const Matrix& d_out, LayerGrads& grads) {
    if (tape.pre_act.empty() || !d_out.same_shape(tape.pre_act))
        throw StaleTapeError("scnn_backward: tape does not match this gradient");
    ensure_grad_slots(grads, p);
    Matrix g = kernels::hadamard(d_out, tape.act_deriv);
    Matrix d_z(tape.z_in.rows(), tape.z_in.cols());
    if (!p.xi.empty()) {
        kernels::add_inplace(grads.xi, kernels::matmul_at_b(tape.z_in, g));
        kernels::add_inplace(d_z, kernels::matmul_a_bt(g, p.xi));
    }
    if (!p.gamma0.empty()) {
        kernels::add_inplace(grads.gamma0, kernels::matmul_at_b(tape.z_in, g));
        kernels::add_inplace(d_z, kernels::matmul_a_bt(g, p.gamma0));
    }
    if (!p.theta0.empty()) {
        kernels::add_inplace(grads.theta0, kernels::matmul_at_b(tape.z_in, g));
        kernels::add_inplace(d_z, kernels::matmul_a_bt(g, p.theta0));
    }
    if (triple.lower)
        backward_power_taps(*triple.lower, p.gamma, tape.lower_feats, g, grads.gamma, d_z);
    if (triple.upper)
        backward_power_taps(*triple.upper, p.theta, tape.upper_feats, g, grads.theta, d_z);
    return d_z;
}

Matrix mpnn_forward(const IncidenceMatrix* bk, const IncidenceMatrix* bk_t,
                    const IncidenceMatrix* bk1, const IncidenceMatrix* bk1_t, const Matrix& z,
                    const MpnnParams& p, Activation act, LayerTape* tape) {
    if (!bk && !bk1)
        throw DimensionMismatchError("mpnn_forward: both incidence halves are missing");
    if (bk && p.gamma_vec.size() != bk->rows)
        throw DimensionMismatchError("mpnn_forward: gamma length does not match face count");
    if (bk1 && p.theta_vec.size() != bk1->cols)
        throw DimensionMismatchError("mpnn_forward: theta length does not match coface count");

    Matrix a(z.rows(), z.cols());
    Matrix bk_z, bk1t_z;
    if (bk) {
        bk_z = kernels::spmm(*bk, z);
        kernels::add_inplace(a, kernels::spmm(*bk_t, kernels::row_scale(bk_z, p.gamma_vec)));
    }
    if (bk1) {
        bk1t_z = kernels::spmm(*bk1_t, z);
        kernels::add_inplace(a, kernels::spmm(*bk1, kernels::row_scale(bk1t_z, p.theta_vec)));
    }
    if (tape) {
        tape->z_in = z;
        tape->bk_z = std::move(bk_z);
        tape->bk1t_z = std::move(bk1t_z);
        tape->pre_act = a;
    }
    return apply_activation(a, act, tape ? &tape->act_deriv : nullptr);
}

Matrix mpnn_backward(const IncidenceMatrix* bk, const IncidenceMatrix* bk_t,
                     const IncidenceMatrix* bk1, const IncidenceMatrix* bk1_t,
                     const MpnnParams& p, const LayerTape& tape, const Matrix& d_out,
                     MpnnGrads& grads) {
    if (tape.pre_act.empty() || !d_out.same_shape(tape.pre_act))
        throw StaleTapeError("mpnn_backward: tape does not match this gradient");
    if (grads.gamma_vec.size() != p.gamma_vec.size()) grads.gamma_vec.assign(p.gamma_vec.size(), 0.0);
    if (grads.theta_vec.size() != p.theta_vec.size()) grads.theta_vec.assign(p.theta_vec.size(), 0.0);

    Matrix g = kernels::hadamard(d_out, tape.act_deriv);
    Matrix d_z(tape.z_in.rows(), tape.z_in.cols());
    if (bk) {
        Matrix bk_g = kernels::spmm(*bk, g);
        std::vector<double> dg = kernels::rowwise_dot(bk_g, tape.bk_z);
        for (std::size_t i = 0; i < dg.size(); ++i) grads.gamma_vec[i] += dg[i];
        kernels::add_inplace(d_z, kernels::spmm(*bk_t, kernels::row_scale(bk_g, p.gamma_vec)));
    }
    if (bk1) {
        Matrix bk1t_g = kernels::spmm(*bk1_t, g);
        std::vector<double> dt = kernels::rowwise_dot(bk1t_g, tape.bk1t_z);
        for (std::size_t i = 0; i < dt.size(); ++i) grads.theta_vec[i] += dt[i];
        kernels::add_inplace(d_z, kernels::spmm(*bk1, kernels::row_scale(bk1t_g, p.theta_vec)));
    }
    return d_z;
}

BiOutputs biscnn_layer_forward(const HodgeTriple& triple, const Matrix& z, const LayerParams& p,
                               Phase phase, LayerTape* tape) {
    if (triple.full.cols != z.rows())
        throw DimensionMismatchError("biscnn_layer_forward: input rows do not match Laplacian");
    if (p.gamma.size() > 1 || p.theta.size() > 1)
        throw DimensionMismatchError("biscnn layers use single-power taps");
    if (!p.gamma.empty() && !triple.lower)
        throw DimensionMismatchError("biscnn_layer_forward: lower tap given but no lower Laplacian");
    if (!p.theta.empty() && !triple.upper)
        throw DimensionMismatchError("biscnn_layer_forward: upper tap given but no upper Laplacian");
    std::size_t d_out = tap_output_dim(p);
    for (const Matrix& g : p.gamma) check_tap(g, z.cols(), d_out, "gamma");
    for (const Matrix& t : p.theta) check_tap(t, z.cols(), d_out, "theta");
    if (!p.xi.empty()) check_tap(p.xi, z.cols(), d_out, "xi");

    BiOutputs out;
    out.m = feature_normalize(z);

    Matrix s, s_mask;
    if (phase == Phase::train) {
        HardTanh ht = hard_tanh(z);
        s = std::move(ht.value);
        s_mask = std::move(ht.mask);
    } else {
        s = sign_matrix(z);
        s_mask = hard_tanh(z).mask;
    }

    Matrix a(z.rows(), d_out);
    Matrix ls, us;
    if (phase == Phase::infer) {
        // Every entry of s is +1/-1: mix features without multiplications,
        // then diffuse once per tap.
        if (!p.xi.empty()) kernels::add_inplace(a, kernels::sign_matmul(s, p.xi));
        if (!p.gamma.empty())
            kernels::add_inplace(
                a, kernels::spmm(*triple.lower, kernels::sign_matmul(s, p.gamma.front())));
        if (!p.theta.empty())
            kernels::add_inplace(
                a, kernels::spmm(*triple.upper, kernels::sign_matmul(s, p.theta.front())));
        if (tape) {
            if (!p.gamma.empty()) ls = kernels::spmm(*triple.lower, s);
            if (!p.theta.empty()) us = kernels::spmm(*triple.upper, s);
        }
    } else {
        if (!p.xi.empty()) kernels::add_inplace(a, kernels::matmul(s, p.xi));
        if (!p.gamma.empty()) {
            ls = kernels::spmm(*triple.lower, s);
            kernels::add_inplace(a, kernels::matmul(ls, p.gamma.front()));
        }
        if (!p.theta.empty()) {
            us = kernels::spmm(*triple.upper, s);
            kernels::add_inplace(a, kernels::matmul(us, p.theta.front()));
        }
    }

    if (phase == Phase::train) {
        HardTanh q = hard_tanh(a);
        out.q = q.value;
        if (tape) tape->out_mask = std::move(q.mask);
    } else {
        out.q = sign_matrix(a);
        if (tape) tape->out_mask = hard_tanh(a).mask;
    }
    if (tape) {
        tape->z_in = z;
        tape->surrogate = std::move(s);
        tape->surrogate_mask = std::move(s_mask);
        tape->pre_act = a;
        tape->m = out.m;
        tape->lower_feats.clear();
        tape->upper_feats.clear();
        if (!ls.empty()) tape->lower_feats.push_back(std::move(ls));
        if (!us.empty()) tape->upper_feats.push_back(std::move(us));
    }
    return out;
}

Matrix biscnn_layer_backward(const HodgeTriple& triple, const LayerParams& p,
                             const LayerTape& tape, const Matrix& d_q,
                             const std::vector<double>& d_m, LayerGrads& grads) {
    if (tape.pre_act.empty() || !d_q.same_shape(tape.pre_act))
        throw StaleTapeError("biscnn_layer_backward: tape does not match this gradient");
    ensure_grad_slots(grads, p);

    // Straight-through: gradients pass where the output surrogate is linear.
    Matrix g = kernels::hadamard(d_q, tape.out_mask);
    Matrix d_s(tape.surrogate.rows(), tape.surrogate.cols());
    if (!p.xi.empty()) {
        kernels::add_inplace(grads.xi, kernels::matmul_at_b(tape.surrogate, g));
        kernels::add_inplace(d_s, kernels::matmul_a_bt(g, p.xi));
    }
    if (!p.gamma.empty()) {
        kernels::add_inplace(grads.gamma[0], kernels::matmul_at_b(tape.lower_feats[0], g));
        kernels::add_inplace(d_s,
                             kernels::spmm(*triple.lower, kernels::matmul_a_bt(g, p.gamma[0])));
    }
    if (!p.theta.empty()) {
        kernels::add_inplace(grads.theta[0], kernels::matmul_at_b(tape.upper_feats[0], g));
        kernels::add_inplace(d_s,
                             kernels::spmm(*triple.upper, kernels::matmul_a_bt(g, p.theta[0])));
    }

    // Through the input surrogate, plus the normalization path if the m
    // output received a gradient.
    Matrix d_z = kernels::hadamard(d_s, tape.surrogate_mask);
    if (!d_m.empty()) {
        if (d_m.size() != tape.z_in.rows())
            throw DimensionMismatchError("biscnn_layer_backward: d_m length mismatch");
        const double inv_d = 1.0 / static_cast<double>(tape.z_in.cols());
        for (std::size_t i = 0; i < d_z.rows(); ++i) {
            const double* zrow = tape.z_in.row(i);
            double* drow = d_z.row(i);
            double c = d_m[i] * inv_d;
            for (std::size_t j = 0; j < d_z.cols(); ++j) drow[j] += c * l1_sign(zrow[j]);
        }
    }
    return d_z;
}

} // namespace splx
