#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "splx/complex.hpp"
#include "splx/layers.hpp"
#include "splx/matrix.hpp"

namespace splx {

/// One trainable tensor with its gradient accumulator and Adam moments.
struct ParamTensor {
    std::string name;
    Matrix value;
    Matrix grad;
    Matrix m1;
    Matrix m2;

    explicit ParamTensor(std::string n, Matrix v)
        : name(std::move(n)),
          value(std::move(v)),
          grad(value.rows(), value.cols()),
          m1(value.rows(), value.cols()),
          m2(value.rows(), value.cols()) {}
};

struct AdamConfig {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// One bias-corrected Adam update; t is the 1-based step count.
void adam_step(ParamTensor& p, const AdamConfig& cfg, long t);

struct LossResult {
    double value = 0.0;
    Matrix grad;
};

/// Mean absolute error over the entries where mask is nonzero. The
/// gradient uses the sign subgradient, 0 at exact equality. Throws
/// EmptyMaskError when nothing is selected.
LossResult l1_loss(const Matrix& pred, const Matrix& target, const Matrix& mask);

/// Row-wise softmax with max subtraction.
Matrix softmax_rows(const Matrix& logits);

/// Mean negative log probability of the true labels. The returned gradient
/// is with respect to the logits that produced `probs`: (probs - onehot)/B.
LossResult cross_entropy_loss(const Matrix& probs, const std::vector<int>& labels);

enum class Arch { snn, scnn, mpnn, biscnn };
Arch arch_from_name(const std::string& name);
std::string arch_name(Arch a);

struct NetworkConfig {
    Arch arch = Arch::biscnn;
    int order = 0;                // which simplex order the net lives on
    int layers = 2;               // P
    int j = 1;                    // filter length (max Laplacian power)
    std::size_t filters = 30;     // hidden width
    std::size_t d_in = 1;
    std::size_t d_out = 1;
    Activation act = Activation::leaky_relu;
    /// Regression nets keep the last layer linear; classification stacks
    /// keep the nonlinearity and hand off to the readout.
    bool final_identity = true;
    /// Adds trainable power-zero taps to snn/scnn layers (the convention
    /// the reference baselines report parameter counts under).
    bool identity_taps = false;
    /// Whether the first layer's normalization joins the output product of
    /// a binarized network.
    bool include_first_norm = false;
    std::uint64_t seed = 1;
};

/// Records of one network forward pass, consumed by backward().
struct NetTape {
    std::vector<LayerTape> layers;
    std::vector<std::vector<double>> ms; // binarized nets: m per layer
    Matrix q_final;
    std::vector<double> m_product;
    Phase phase = Phase::train;
    bool valid = false;
};

/// A stack of simplicial layers of one architecture on one order of a
/// complex. Parameters live in ParamTensors; forward() fills a caller-owned
/// tape so batches can keep one tape per sample and replay them through
/// backward() in a fixed order.
class Network {
public:
    Network(const SimplicialComplex& complex, const NetworkConfig& cfg);

    Matrix forward(const Matrix& x, Phase phase, NetTape& tape) const;
    /// Accumulates parameter gradients; returns the gradient w.r.t. the input.
    Matrix backward(const Matrix& d_out, const NetTape& tape);

    void zero_grads();
    void adam_update(const AdamConfig& cfg, long t);

    std::size_t parameter_count() const;
    std::vector<ParamTensor>& params() { return params_; }
    const std::vector<ParamTensor>& params() const { return params_; }
    const NetworkConfig& config() const { return cfg_; }

    /// Widths of each layer boundary, d_in first.
    const std::vector<std::size_t>& widths() const { return widths_; }

private:
    struct LayerSlots {
        // indices into params_ for this layer's tensors; -1 when absent
        std::vector<int> gamma;
        std::vector<int> theta;
        int xi = -1;
        int gamma0 = -1;
        int theta0 = -1;
        // mpnn vectors are stored as 1 x n tensors
        int gamma_vec = -1;
        int theta_vec = -1;
    };

    LayerParams gather(const LayerSlots& s) const;
    MpnnParams gather_mpnn(const LayerSlots& s) const;
    void scatter_grads(const LayerSlots& s, const LayerGrads& g);
    void scatter_grads_mpnn(const LayerSlots& s, const MpnnGrads& g);

    const SimplicialComplex& complex_;
    NetworkConfig cfg_;
    const HodgeTriple* triple_ = nullptr;
    const IncidenceMatrix* bk_ = nullptr;
    const IncidenceMatrix* bk_t_ = nullptr;
    const IncidenceMatrix* bk1_ = nullptr;
    const IncidenceMatrix* bk1_t_ = nullptr;
    std::vector<ParamTensor> params_;
    std::vector<LayerSlots> layers_;
    std::vector<std::size_t> widths_;
};

/// Mean-pool over simplices followed by two affine layers and softmax.
/// The hidden layer uses the experiment's activation; biases are trained.
class ReadoutHead {
public:
    struct Tape {
        std::vector<double> pooled;
        std::vector<double> hidden_pre;
        std::vector<double> hidden;
        std::size_t n_rows = 0;
        bool valid = false;
    };

    ReadoutHead(std::size_t d_in, std::size_t hidden, std::size_t classes, Activation act,
                std::uint64_t seed);

    /// One sample: z is N_k x d_in; returns the logits row (1 x classes).
    std::vector<double> forward(const Matrix& z, Tape& tape) const;
    Matrix backward(const std::vector<double>& d_logits, const Tape& tape);

    void zero_grads();
    void adam_update(const AdamConfig& cfg, long t);
    std::size_t parameter_count() const;
    std::vector<ParamTensor>& params() { return params_; }

private:
    std::size_t d_in_, hidden_, classes_;
    Activation act_;
    std::vector<ParamTensor> params_; // w1, b1, w2, b2
};

} // namespace splx
