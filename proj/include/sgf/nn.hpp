#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgf/rng.hpp"
#include "sgf/tensor.hpp"

namespace sgf {

enum class ParamGroup { Filter, Linear };

/// Trainable tensor with its gradient. Scalars are stored as 1xK rows.
struct Parameter {
    std::string name;
    DenseMatrix value;
    DenseMatrix grad;
    ParamGroup group = ParamGroup::Linear;
    bool decay = true;  // subject to weight decay

    Parameter() = default;
    Parameter(std::string name, DenseMatrix value, ParamGroup group, bool decay)
        : name(std::move(name)),
          value(std::move(value)),
          grad(this->value.rows(), this->value.cols()),
          group(group),
          decay(decay) {}

    void zero_grad() { grad.fill(0.0); }
};

/// Glorot-uniform rows x cols.
DenseMatrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng);

// ---------------------------------------------------------------------------
// Linear: y = x W (+ b)

DenseMatrix linear_forward(const DenseMatrix& x, const DenseMatrix& w,
                           const DenseMatrix* bias = nullptr);

struct LinearGrads {
    DenseMatrix dx;
    DenseMatrix dw;
    DenseMatrix dbias;  // 1 x b; empty when no bias
};

/// dx = g Wᵀ, dW = xᵀ g, dbias = column sums of g.
LinearGrads linear_backward(const DenseMatrix& x, const DenseMatrix& w, const DenseMatrix& g,
                            bool has_bias, bool need_dx = true);

// ---------------------------------------------------------------------------

DenseMatrix relu_forward(const DenseMatrix& x);
/// Passes g where the forward input was > 0 (subgradient 0 at 0).
DenseMatrix relu_backward(const DenseMatrix& x, const DenseMatrix& g);

/// Inverted dropout. `mask` holds 0 or 1/(1-rate) per entry; it is empty
/// when the call was the identity (eval mode or rate 0).
struct DropoutResult {
    DenseMatrix out;
    DenseMatrix mask;
};

DropoutResult dropout_forward(const DenseMatrix& x, double rate, bool training, Rng& rng);
DenseMatrix dropout_backward(const DenseMatrix& mask, const DenseMatrix& g);

DenseMatrix log_softmax(const DenseMatrix& logits);

struct LossResult {
    double loss = 0.0;
    DenseMatrix dlogits;
};

/// Mean negative log-likelihood over rows with mask[u] == true.
LossResult nll_loss(const DenseMatrix& logits, std::span<const int> labels,
                    const std::vector<bool>& mask);

/// Fraction of masked rows whose argmax equals the label (first max wins).
double accuracy(const DenseMatrix& logits, std::span<const int> labels,
                const std::vector<bool>& mask);

// ---------------------------------------------------------------------------
// Finite-difference gradient verification

struct ParamCheck {
    std::string name;
    double max_rel_error = 0.0;
};

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::vector<ParamCheck> per_parameter;
};

/// Central differences over every scalar of every parameter:
///   rel = |analytic - numeric| / max(1, |analytic|, |numeric|).
/// `loss` must be deterministic (freeze dropout by reseeding inside it);
/// `compute_grads` fills Parameter::grad with the analytic gradient.
GradCheckReport finite_difference_check(const std::function<double()>& loss,
                                        const std::function<void()>& compute_grads,
                                        std::span<Parameter* const> params, double h = 1e-5);

}  // namespace sgf
