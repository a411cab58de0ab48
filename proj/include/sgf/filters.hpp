#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "sgf/graph.hpp"
#include "sgf/nn.hpp"
#include "sgf/rng.hpp"
#include "sgf/spectral.hpp"
#include "sgf/tensor.hpp"

namespace sgf {

// Every filter variant shares the layout
//   H_0 = ReLU(dropout(X) W_in + b_in)  ->  filter  ->  logits = dropout(H) W_out.
// Dropout is applied only around the two linear layers.

struct ForwardOptions {
    double dropout = 0.0;
    bool training = false;
};

enum class InitMode { FixedHalf, UniformPm1 };

struct LinearLayers {
    Parameter w_in;   // d x h, decayed
    Parameter b_in;   // 1 x h, not decayed
    Parameter w_out;  // h x C, decayed, no bias

    static LinearLayers glorot(std::size_t d, std::size_t hidden, std::size_t classes, Rng& rng);
};

struct EncoderCache {
    DenseMatrix x_mask;  // dropout mask on X (empty = identity)
    DenseMatrix pre;     // X W_in + b before ReLU
    DenseMatrix h0;
};

struct DecoderCache {
    DenseMatrix h_dropped;
    DenseMatrix mask;
};

struct SgfParams {
    Parameter alphas;  // 1 x K, filter group
    Parameter betas;   // 1 x K, filter group
    LinearLayers linear;
    OperatorKind operator_kind = OperatorKind::AugmentedAdjacency;

    std::size_t layers() const noexcept { return alphas.value.cols(); }
    static SgfParams init(std::size_t d, std::size_t hidden, std::size_t classes, std::size_t layers,
                          OperatorKind kind, InitMode mode, Rng& rng);
};

struct SgfCache {
    EncoderCache enc;
    std::vector<DenseMatrix> propagated;  // P·H_{l-1}, l = 1..K
    DenseMatrix h_last;                   // H_K
    DecoderCache dec;
};

struct ChebyParams {
    Parameter thetas;  // 1 x (K+1), filter group
    double lambda_max = 2.0;
    LinearLayers linear;

    std::size_t order() const noexcept { return thetas.value.cols() - 1; }
    static ChebyParams init(std::size_t d, std::size_t hidden, std::size_t classes,
                            std::size_t order, double lambda_max, InitMode mode, Rng& rng);
};

struct ChebyCache {
    EncoderCache enc;
    std::vector<DenseMatrix> terms;  // T_0 .. T_K applied to H_0
    DenseMatrix filtered;
    DecoderCache dec;
};

struct HorizontalParams {
    Parameter thetas;  // 1 x (K+1), filter group
    LinearLayers linear;
    OperatorKind operator_kind = OperatorKind::AugmentedAdjacency;

    std::size_t order() const noexcept { return thetas.value.cols() - 1; }
    static HorizontalParams init(std::size_t d, std::size_t hidden, std::size_t classes,
                                 std::size_t order, OperatorKind kind, InitMode mode, Rng& rng);
};

struct HorizontalCache {
    EncoderCache enc;
    std::vector<DenseMatrix> powers;  // P^i H_0, i = 0..K
    DenseMatrix filtered;
    DecoderCache dec;
};

struct MlpParams {
    LinearLayers linear;
};

struct MlpCache {
    EncoderCache enc;
    DecoderCache dec;
};

/// Logistic regression on precomputed propagated features Ã^k X.
struct SgcParams {
    Parameter w;  // d x C, decayed
    Parameter b;  // 1 x C
};

struct SgcCache {
    DenseMatrix mask;
    DenseMatrix x_dropped;
};

/// Ã^k X.
DenseMatrix sgc_precompute(const SparseOperator& aug, const DenseMatrix& x, int k);

// Forward passes return logits and fill the cache. Backward passes
// accumulate into each Parameter::grad. Operators must be symmetric.

DenseMatrix sgf_forward(const SgfParams& params, const SparseOperator& p, const DenseMatrix& x,
                        const ForwardOptions& opt, Rng& rng, SgfCache& cache);
void sgf_backward(SgfParams& params, const SgfCache& cache, const SparseOperator& p,
                  const DenseMatrix& x, const DenseMatrix& dlogits);

/// `laplacian` is 𝓛; the rescaled (2/λ_max)𝓛 - I is applied implicitly.
DenseMatrix cheby_forward(const ChebyParams& params, const SparseOperator& laplacian,
                          const DenseMatrix& x, const ForwardOptions& opt, Rng& rng,
                          ChebyCache& cache);
void cheby_backward(ChebyParams& params, const ChebyCache& cache, const SparseOperator& laplacian,
                    const DenseMatrix& x, const DenseMatrix& dlogits);

DenseMatrix horizontal_forward(const HorizontalParams& params, const SparseOperator& p,
                               const DenseMatrix& x, const ForwardOptions& opt, Rng& rng,
                               HorizontalCache& cache);
void horizontal_backward(HorizontalParams& params, const HorizontalCache& cache,
                         const SparseOperator& p, const DenseMatrix& x,
                         const DenseMatrix& dlogits);

DenseMatrix mlp_forward(const MlpParams& params, const DenseMatrix& x, const ForwardOptions& opt,
                        Rng& rng, MlpCache& cache);
void mlp_backward(MlpParams& params, const MlpCache& cache, const DenseMatrix& x,
                  const DenseMatrix& dlogits);

DenseMatrix sgc_forward(const SgcParams& params, const DenseMatrix& propagated,
                        const ForwardOptions& opt, Rng& rng, SgcCache& cache);
void sgc_backward(SgcParams& params, const SgcCache& cache, const DenseMatrix& dlogits);

// ---------------------------------------------------------------------------
// Variant-agnostic model used by the training loop.

enum class Variant { Sgf, Cheby, Horizontal, Mlp, Sgc };

const char* to_string(Variant v);
Variant parse_variant(const std::string& s);

struct ModelSpec {
    Variant variant = Variant::Sgf;
    std::size_t hidden = 64;
    std::size_t layers = 16;  // K for sgf / cheby / horizontal
    OperatorKind operator_kind = OperatorKind::AugmentedAdjacency;
    double lambda_max = 2.0;
    InitMode init = InitMode::FixedHalf;
    int sgc_hops = 2;
};

/// Operators derived from one graph, shared read-only by all runs on it.
class GraphOperators {
public:
    explicit GraphOperators(const Graph& g);

    const SparseOperator& laplacian() const noexcept { return laplacian_; }
    const SparseOperator& augmented() const noexcept { return augmented_; }
    const SparseOperator& by_kind(OperatorKind k) const;

private:
    SparseOperator laplacian_;
    SparseOperator augmented_;
};

class Model {
public:
    /// `features` must outlive the model; for Sgc they are the precomputed Ã^k X.
    Model(const ModelSpec& spec, const GraphOperators& ops, const DenseMatrix& features,
          std::size_t num_classes, Rng& init_rng);

    DenseMatrix forward(const ForwardOptions& opt, Rng& rng);
    /// Uses the cache of the most recent forward call.
    void backward(const DenseMatrix& dlogits);

    std::vector<Parameter*> parameters();
    std::vector<DenseMatrix> snapshot() const;
    void restore(const std::vector<DenseMatrix>& values);
    void zero_grad();

    const ModelSpec& spec() const noexcept { return spec_; }
    /// Coefficients of the filter the model currently applies.
    MonomialFilter learned_filter() const;
    /// (alphas, betas) for Sgf, empty otherwise.
    std::pair<std::vector<double>, std::vector<double>> filter_scalars() const;

private:
    using Params = std::variant<SgfParams, ChebyParams, HorizontalParams, MlpParams, SgcParams>;
    using Cache = std::variant<SgfCache, ChebyCache, HorizontalCache, MlpCache, SgcCache>;

    ModelSpec spec_;
    const GraphOperators* ops_;
    const DenseMatrix* features_;
    Params params_;
    Cache cache_;
};

}  // namespace sgf
