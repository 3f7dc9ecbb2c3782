#pragma once

#include <vector>

#include "splx/complex.hpp"
#include "splx/matrix.hpp"

namespace splx {

enum class Activation { identity, leaky_relu, tanh, hard_tanh };

Activation activation_from_name(const std::string& name);
std::string activation_name(Activation a);

double activate(Activation a, double x);
/// Derivative of the activation at pre-activation value x. Kinks take the
/// right-hand derivative, except hard_tanh whose pass-through mask includes
/// both clamp boundaries.
double activate_grad(Activation a, double x);

/// Whether training runs the smooth surrogate (train) or the exact
/// binarizer (infer) inside binarization layers.
enum class Phase { train, infer };

/// Elementwise Sign with Sign(0) = +1.
Matrix sign_matrix(const Matrix& x);

/// Identity on [-1, 1], clamped outside. `mask` is 1 where |x| <= 1
/// (boundary inclusive) and 0 elsewhere; it is the straight-through
/// gradient mask.
struct HardTanh {
    Matrix value;
    Matrix mask;
};
HardTanh hard_tanh(const Matrix& x);

/// Per-row feature magnitude: m_i = (sum_c |x_ic|) / d.
std::vector<double> feature_normalize(const Matrix& x);

/// Row magnitudes plus the binarized features. In the train phase q is
/// the hard-tanh surrogate of x, at inference it is Sign(x); the product
/// row_scale(q, m) reconstructs the magnitude-weighted binarization.
struct BiOutputs {
    std::vector<double> m;
    Matrix q;
};
BiOutputs binarize_features(const Matrix& x, Phase phase);

/// Weights of one convolutional simplicial layer. `gamma` holds the taps
/// paired with increasing powers of the lower (or, for architectures on the
/// full Laplacian, the only) operator starting at power 1, `theta` the upper
/// taps, `xi` the identity tap. `gamma0`/`theta0` are optional extra
/// power-zero taps some baselines train; they stay empty otherwise.
struct LayerParams {
    std::vector<Matrix> gamma;
    std::vector<Matrix> theta;
    Matrix xi;
    Matrix gamma0;
    Matrix theta0;
};

/// Weights of one message-passing layer: a scalar per (k-1)-simplex and a
/// scalar per (k+1)-simplex. Either vector may be empty at boundary orders.
struct MpnnParams {
    std::vector<double> gamma_vec;
    std::vector<double> theta_vec;
};

/// Forward intermediates one layer needs for its backward pass.
struct LayerTape {
    Matrix z_in;
    std::vector<Matrix> lower_feats; // operator^j applied to the layer input
    std::vector<Matrix> upper_feats;
    Matrix pre_act;
    Matrix act_deriv;
    // message passing
    Matrix bk_z;
    Matrix bk1t_z;
    // binarization
    Matrix surrogate;
    Matrix surrogate_mask;
    Matrix out_mask;
    std::vector<double> m;
};

/// Gradient slots matching LayerParams.
struct LayerGrads {
    std::vector<Matrix> gamma;
    std::vector<Matrix> theta;
    Matrix xi;
    Matrix gamma0;
    Matrix theta0;
};

struct MpnnGrads {
    std::vector<double> gamma_vec;
    std::vector<double> theta_vec;
};

/// sigma(sum_j L^j Z Gamma_j) on the full Hodge Laplacian. An optional
/// power-zero tap contributes Z Gamma_0.
Matrix snn_forward(const SparseMatrix& laplacian, const Matrix& z, const LayerParams& p,
                   Activation act, LayerTape* tape = nullptr);

/// sigma(sum_j L_l^j Z Gamma_j + sum_j L_u^j Z Theta_j + Z Xi). Taps whose
/// operator does not exist at this order must be absent from `p`.
Matrix scnn_forward(const HodgeTriple& triple, const Matrix& z, const LayerParams& p,
                    Activation act, LayerTape* tape = nullptr);

/// sigma(B_k^T diag(gamma) B_k Z + B_{k+1} diag(theta) B_{k+1}^T Z).
/// Null incidence pointers drop the corresponding half.
Matrix mpnn_forward(const IncidenceMatrix* bk, const IncidenceMatrix* bk_t,
                    const IncidenceMatrix* bk1, const IncidenceMatrix* bk1_t, const Matrix& z,
                    const MpnnParams& p, Activation act, LayerTape* tape = nullptr);

/// One binarized simplicial layer: normalizes its input, binarizes it,
/// applies the three-tap convolution and binarizes the result. Both
/// outputs are returned; only q feeds the next layer.
BiOutputs biscnn_layer_forward(const HodgeTriple& triple, const Matrix& z, const LayerParams& p,
                               Phase phase, LayerTape* tape = nullptr);

// Backward passes. Each consumes the gradient with respect to the layer
// output, accumulates parameter gradients and returns the gradient with
// respect to the layer input.
Matrix snn_backward(const SparseMatrix& laplacian, const LayerParams& p, const LayerTape& tape,
                    const Matrix& d_out, LayerGrads& grads);
Matrix scnn_backward(const HodgeTriple& triple, const LayerParams& p, const LayerTape& tape,
                     const Matrix& d_out, LayerGrads& grads);
Matrix mpnn_backward(const IncidenceMatrix* bk, const IncidenceMatrix* bk_t,
                     const IncidenceMatrix* bk1, const IncidenceMatrix* bk1_t,
                     const MpnnParams& p, const LayerTape& tape, const Matrix& d_out,
                     MpnnGrads& grads);
/// d_m may be empty when the normalization output receives no gradient.
Matrix biscnn_layer_backward(const HodgeTriple& triple, const LayerParams& p,
                             const LayerTape& tape, const Matrix& d_q,
                             const std::vector<double>& d_m, LayerGrads& grads);

} // namespace splx
