#include "sgf/filters.hpp"

#include <random>

#include "sgf/error.hpp"

namespace sgf {

namespace {

void require_finite(const DenseMatrix& m, const char* where, int index) {
    if (!m.all_finite()) throw NumericalDivergence(where, index);
}

DenseMatrix init_scalars(std::size_t count, InitMode mode, Rng& rng) {
    DenseMatrix s(1, count, 0.5);
    if (mode == InitMode::UniformPm1) {
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        for (double& v : s.data()) v = unif(rng);
    }
    return s;
}

void require_square(const SparseOperator& p, const DenseMatrix& x, const char* who) {
    if (p.n != x.rows())
        throw InvalidInput(std::string(who) + ": operator size " + std::to_string(p.n) +
                           " does not match " + std::to_string(x.rows()) + " feature rows");
}

const DenseMatrix& encode(const LinearLayers& lin, const DenseMatrix& x,
                          const ForwardOptions& opt, Rng& rng, EncoderCache& cache) {
    DropoutResult xd = dropout_forward(x, opt.dropout, opt.training, rng);
    cache.x_mask = std::move(xd.mask);
    cache.pre = linear_forward(xd.out, lin.w_in.value, &lin.b_in.value);
    cache.h0 = relu_forward(cache.pre);
    require_finite(cache.h0, "input layer", 0);
    return cache.h0;
}

void encode_backward(LinearLayers& lin, const EncoderCache& cache, const DenseMatrix& x,
                     const DenseMatrix& dh0) {
    const DenseMatrix dpre = relu_backward(cache.pre, dh0);
    const DenseMatrix x_dropped = cache.x_mask.empty() ? x : dropout_backward(cache.x_mask, x);
    LinearGrads g = linear_backward(x_dropped, lin.w_in.value, dpre, true, false);
    lin.w_in.grad += g.dw;
    lin.b_in.grad += g.dbias;
}

DenseMatrix decode(const LinearLayers& lin, const DenseMatrix& h, const ForwardOptions& opt,
                   Rng& rng, DecoderCache& cache) {
    DropoutResult hd = dropout_forward(h, opt.dropout, opt.training, rng);
    cache.h_dropped = std::move(hd.out);
    cache.mask = std::move(hd.mask);
    DenseMatrix logits = linear_forward(cache.h_dropped, lin.w_out.value);
    require_finite(logits, "output layer", 0);
    return logits;
}

/// Returns ∂loss/∂H (the decoder input).
DenseMatrix decode_backward(LinearLayers& lin, const DecoderCache& cache,
                            const DenseMatrix& dlogits) {
    LinearGrads g = linear_backward(cache.h_dropped, lin.w_out.value, dlogits, false, true);
    lin.w_out.grad += g.dw;
    return dropout_backward(cache.mask, g.dx);
}

// L̂ v = (2/λ_max) 𝓛 v - v
DenseMatrix apply_scaled(const SparseOperator& lap, double scale, const DenseMatrix& v) {
    DenseMatrix out = spmm(lap, v);
    out *= scale;
    out -= v;
    return out;
}

}  // namespace

LinearLayers LinearLayers::glorot(std::size_t d, std::size_t hidden, std::size_t classes, Rng& rng) {
    LinearLayers l;
    l.w_in = Parameter("w_in", glorot_uniform(d, hidden, rng), ParamGroup::Linear, true);
    l.b_in = Parameter("b_in", DenseMatrix(1, hidden), ParamGroup::Linear, false);
    l.w_out = Parameter("w_out", glorot_uniform(hidden, classes, rng), ParamGroup::Linear, true);
    return l;
}

SgfParams SgfParams::init(std::size_t d, std::size_t hidden, std::size_t classes,
                          std::size_t layers, OperatorKind kind, InitMode mode, Rng& rng) {
    if (layers < 1) throw InvalidInput("SgfParams: K must be >= 1");
    SgfParams p;
    p.linear = LinearLayers::glorot(d, hidden, classes, rng);
    p.alphas = Parameter("alpha", init_scalars(layers, mode, rng), ParamGroup::Filter, false);
    p.betas = Parameter("beta", init_scalars(layers, mode, rng), ParamGroup::Filter, false);
    p.operator_kind = kind;
    return p;
}

ChebyParams ChebyParams::init(std::size_t d, std::size_t hidden, std::size_t classes,
                              std::size_t order, double lambda_max, InitMode mode, Rng& rng) {
    if (order < 1) throw InvalidInput("ChebyParams: K must be >= 1");
    if (!(lambda_max > 0.0)) throw InvalidInput("ChebyParams: lambda_max must be > 0");
    ChebyParams p;
    p.linear = LinearLayers::glorot(d, hidden, classes, rng);
    p.thetas = Parameter("theta", init_scalars(order + 1, mode, rng), ParamGroup::Filter, false);
    p.lambda_max = lambda_max;
    return p;
}

HorizontalParams HorizontalParams::init(std::size_t d, std::size_t hidden, std::size_t classes,
                                        std::size_t order, OperatorKind kind, InitMode mode,
                                        Rng& rng) {
    if (order < 1) throw InvalidInput("HorizontalParams: K must be >= 1");
    HorizontalParams p;
    p.linear = LinearLayers::glorot(d, hidden, classes, rng);
    p.thetas = Parameter("theta", init_scalars(order + 1, mode, rng), ParamGroup::Filter, false);
    p.operator_kind = kind;
    return p;
}

DenseMatrix sgc_precompute(const SparseOperator& aug, const DenseMatrix& x, int k) {
    DenseMatrix s = x;
    for (int i = 0; i < k; ++i) s = spmm(aug, s);
    return s;
}

// ---------------------------------------------------------------------------

DenseMatrix sgf_forward(const SgfParams& params, const SparseOperator& p, const DenseMatrix& x,
                        const ForwardOptions& opt, Rng& rng, SgfCache& cache) {
    require_square(p, x, "sgf_forward");
    if (p.kind != params.operator_kind)
        throw InvalidInput(std::string("sgf_forward: expected operator ") +
                           to_string(params.operator_kind) + ", got " + to_string(p.kind));
    const DenseMatrix& h0 = encode(params.linear, x, opt, rng, cache.enc);
    const std::size_t k = params.layers();
    cache.propagated.resize(k);
    DenseMatrix h = h0;
    for (std::size_t l = 0; l < k; ++l) {
        spmm_into(p, h, cache.propagated[l]);
        const double a = params.alphas.value(0, l);
        const double b = params.betas.value(0, l);
        const DenseMatrix& ph = cache.propagated[l];
        for (std::size_t i = 0; i < h.size(); ++i)
            h.data()[i] = a * ph.data()[i] + b * h0.data()[i];
        require_finite(h, "layer", static_cast<int>(l + 1));
    }
    cache.h_last = std::move(h);
    return decode(params.linear, cache.h_last, opt, rng, cache.dec);
}

void sgf_backward(SgfParams& params, const SgfCache& cache, const SparseOperator& p,
                  const DenseMatrix& x, const DenseMatrix& dlogits) {
    DenseMatrix g = decode_backward(params.linear, cache.dec, dlogits);
    const DenseMatrix& h0 = cache.enc.h0;
    DenseMatrix dh0(h0.rows(), h0.cols());
    DenseMatrix next;
    for (std::size_t l = params.layers(); l-- > 0;) {
        params.alphas.grad(0, l) += inner(g, cache.propagated[l]);
        params.betas.grad(0, l) += inner(g, h0);
        dh0.axpy(params.betas.value(0, l), g);
        spmm_into(p, g, next);  // Pᵀ = P
        next *= params.alphas.value(0, l);
        std::swap(g, next);
    }
    dh0 += g;
    encode_backward(params.linear, cache.enc, x, dh0);
}

DenseMatrix cheby_forward(const ChebyParams& params, const SparseOperator& laplacian,
                          const DenseMatrix& x, const ForwardOptions& opt, Rng& rng,
                          ChebyCache& cache) {
    require_square(laplacian, x, "cheby_forward");
    if (laplacian.kind != OperatorKind::NormalizedLaplacian)
        throw InvalidInput("cheby_forward: expects the normalized Laplacian");
    const double scale = 2.0 / params.lambda_max;
    const DenseMatrix& h0 = encode(params.linear, x, opt, rng, cache.enc);
    const std::size_t k = params.order();
    cache.terms.clear();
    cache.terms.reserve(k + 1);
    cache.terms.push_back(h0);
    cache.terms.push_back(apply_scaled(laplacian, scale, h0));
    require_finite(cache.terms.back(), "order", 1);
    for (std::size_t order = 2; order <= k; ++order) {
        DenseMatrix t = apply_scaled(laplacian, scale, cache.terms[order - 1]);
        t *= 2.0;
        t -= cache.terms[order - 2];
        require_finite(t, "order", static_cast<int>(order));
        cache.terms.push_back(std::move(t));
    }
    cache.filtered = DenseMatrix(h0.rows(), h0.cols());
    for (std::size_t order = 0; order <= k; ++order)
        cache.filtered.axpy(params.thetas.value(0, order), cache.terms[order]);
    require_finite(cache.filtered, "order", static_cast<int>(k));
    return decode(params.linear, cache.filtered, opt, rng, cache.dec);
}

void cheby_backward(ChebyParams& params, const ChebyCache& cache, const SparseOperator& laplacian,
                    const DenseMatrix& x, const DenseMatrix& dlogits) {
    const DenseMatrix g = decode_backward(params.linear, cache.dec, dlogits);
    const double scale = 2.0 / params.lambda_max;
    const std::size_t k = params.order();
    for (std::size_t order = 0; order <= k; ++order)
        params.thetas.grad(0, order) += inner(g, cache.terms[order]);

    // Clenshaw-style reverse sweep: b_k = θ_k G + 2 L̂ b_{k+1} - b_{k+2}.
    DenseMatrix b1(g.rows(), g.cols());  // b_{k+1}
    DenseMatrix b2(g.rows(), g.cols());  // b_{k+2}
    for (std::size_t order = k; order >= 1; --order) {
        DenseMatrix b = apply_scaled(laplacian, scale, b1);
        b *= 2.0;
        b -= b2;
        b.axpy(params.thetas.value(0, order), g);
        b2 = std::move(b1);
        b1 = std::move(b);
    }
    DenseMatrix dh0 = apply_scaled(laplacian, scale, b1);
    dh0 -= b2;
    dh0.axpy(params.thetas.value(0, 0), g);
    encode_backward(params.linear, cache.enc, x, dh0);
}

DenseMatrix horizontal_forward(const HorizontalParams& params, const SparseOperator& p,
                               const DenseMatrix& x, const ForwardOptions& opt, Rng& rng,
                               HorizontalCache& cache) {
    require_square(p, x, "horizontal_forward");
    if (p.kind != params.operator_kind)
        throw InvalidInput(std::string("horizontal_forward: expected operator ") +
                           to_string(params.operator_kind) + ", got " + to_string(p.kind));
    const DenseMatrix& h0 = encode(params.linear, x, opt, rng, cache.enc);
    const std::size_t k = params.order();
    cache.powers.resize(k + 1);
    cache.powers[0] = h0;
    cache.filtered = h0;
    cache.filtered *= params.thetas.value(0, 0);
    for (std::size_t i = 1; i <= k; ++i) {
        spmm_into(p, cache.powers[i - 1], cache.powers[i]);
        cache.filtered.axpy(params.thetas.value(0, i), cache.powers[i]);
        require_finite(cache.filtered, "power", static_cast<int>(i));
    }
    return decode(params.linear, cache.filtered, opt, rng, cache.dec);
}

void horizontal_backward(HorizontalParams& params, const HorizontalCache& cache,
                         const SparseOperator& p, const DenseMatrix& x,
                         const DenseMatrix& dlogits) {
    const DenseMatrix g = decode_backward(params.linear, cache.dec, dlogits);
    const std::size_t k = params.order();
    for (std::size_t i = 0; i <= k; ++i) params.thetas.grad(0, i) += inner(g, cache.powers[i]);
    // Horner: Σ θ_i P^i G
    DenseMatrix s = g;
    s *= params.thetas.value(0, k);
    DenseMatrix next;
    for (std::size_t i = k; i-- > 0;) {
        spmm_into(p, s, next);
        next.axpy(params.thetas.value(0, i), g);
        std::swap(s, next);
    }
    encode_backward(params.linear, cache.enc, x, s);
}

DenseMatrix mlp_forward(const MlpParams& params, const DenseMatrix& x, const ForwardOptions& opt,
                        Rng& rng, MlpCache& cache) {
    const DenseMatrix& h0 = encode(params.linear, x, opt, rng, cache.enc);
    return decode(params.linear, h0, opt, rng, cache.dec);
}

void mlp_backward(MlpParams& params, const MlpCache& cache, const DenseMatrix& x,
                  const DenseMatrix& dlogits) {
    const DenseMatrix dh0 = decode_backward(params.linear, cache.dec, dlogits);
    encode_backward(params.linear, cache.enc, x, dh0);
}

DenseMatrix sgc_forward(const SgcParams& params, const DenseMatrix& propagated,
                        const ForwardOptions& opt, Rng& rng, SgcCache& cache) {
    DropoutResult d = dropout_forward(propagated, opt.dropout, opt.training, rng);
    cache.mask = std::move(d.mask);
    cache.x_dropped = std::move(d.out);
    DenseMatrix logits = linear_forward(cache.x_dropped, params.w.value, &params.b.value);
    require_finite(logits, "output layer", 0);
    return logits;
}

void sgc_backward(SgcParams& params, const SgcCache& cache, const DenseMatrix& dlogits) {
    LinearGrads g = linear_backward(cache.x_dropped, params.w.value, dlogits, true, false);
    params.w.grad += g.dw;
    params.b.grad += g.dbias;
}

// ---------------------------------------------------------------------------

const char* to_string(Variant v) {
    switch (v) {
        case Variant::Sgf: return "sgf";
        case Variant::Cheby: return "cheby";
        case Variant::Horizontal: return "horizontal";
        case Variant::Mlp: return "mlp";
        case Variant::Sgc: return "sgc";
    }
    return "unknown";
}

Variant parse_variant(const std::string& s) {
    if (s == "sgf") return Variant::Sgf;
    if (s == "cheby") return Variant::Cheby;
    if (s == "horizontal") return Variant::Horizontal;
    if (s == "mlp") return Variant::Mlp;
    if (s == "sgc") return Variant::Sgc;
    throw InvalidInput("unknown variant '" + s + "'");
}

GraphOperators::GraphOperators(const Graph& g)
    : laplacian_(normalized_laplacian(g)), augmented_(augmented_adjacency(g)) {
    if (!laplacian_.is_symmetric() || !augmented_.is_symmetric())
        throw InvalidInput("GraphOperators: propagation operators must be symmetric");
}

const SparseOperator& GraphOperators::by_kind(OperatorKind k) const {
    switch (k) {
        case OperatorKind::NormalizedLaplacian: return laplacian_;
        case OperatorKind::AugmentedAdjacency: return augmented_;
        case OperatorKind::ScaledChebyshevBase: break;
    }
    throw InvalidInput("GraphOperators: no stored operator of that kind");
}

Model::Model(const ModelSpec& spec, const GraphOperators& ops, const DenseMatrix& features,
             std::size_t num_classes, Rng& init_rng)
    : spec_(spec), ops_(&ops), features_(&features), params_(MlpParams{}) {
    const std::size_t d = features.cols();
    switch (spec.variant) {
        case Variant::Sgf:
            params_ = SgfParams::init(d, spec.hidden, num_classes, spec.layers, spec.operator_kind,
                                      spec.init, init_rng);
            cache_ = SgfCache{};
            break;
        case Variant::Cheby:
            params_ = ChebyParams::init(d, spec.hidden, num_classes, spec.layers, spec.lambda_max,
                                        spec.init, init_rng);
            cache_ = ChebyCache{};
            break;
        case Variant::Horizontal:
            params_ = HorizontalParams::init(d, spec.hidden, num_classes, spec.layers,
                                             spec.operator_kind, spec.init, init_rng);
            cache_ = HorizontalCache{};
            break;
        case Variant::Mlp:
            params_ = MlpParams{LinearLayers::glorot(d, spec.hidden, num_classes, init_rng)};
            cache_ = MlpCache{};
            break;
        case Variant::Sgc:
            params_ = SgcParams{
                Parameter("w", glorot_uniform(d, num_classes, init_rng), ParamGroup::Linear, true),
                Parameter("b", DenseMatrix(1, num_classes), ParamGroup::Linear, false)};
            cache_ = SgcCache{};
            break;
    }
}

DenseMatrix Model::forward(const ForwardOptions& opt, Rng& rng) {
    const DenseMatrix& x = *features_;
    switch (spec_.variant) {
        case Variant::Sgf: {
            auto& p = std::get<SgfParams>(params_);
            return sgf_forward(p, ops_->by_kind(p.operator_kind), x, opt, rng,
                               std::get<SgfCache>(cache_));
        }
        case Variant::Cheby:
            return cheby_forward(std::get<ChebyParams>(params_), ops_->laplacian(), x, opt, rng,
                                 std::get<ChebyCache>(cache_));
        case Variant::Horizontal: {
            auto& p = std::get<HorizontalParams>(params_);
            return horizontal_forward(p, ops_->by_kind(p.operator_kind), x, opt, rng,
                                      std::get<HorizontalCache>(cache_));
        }
        case Variant::Mlp:
            return mlp_forward(std::get<MlpParams>(params_), x, opt, rng, std::get<MlpCache>(cache_));
        case Variant::Sgc:
            return sgc_forward(std::get<SgcParams>(params_), x, opt, rng, std::get<SgcCache>(cache_));
    }
    throw InvalidInput("Model: unknown variant");
}

void Model::backward(const DenseMatrix& dlogits) {
    const DenseMatrix& x = *features_;
    switch (spec_.variant) {
        case Variant::Sgf: {
            auto& p = std::get<SgfParams>(params_);
            sgf_backward(p, std::get<SgfCache>(cache_), ops_->by_kind(p.operator_kind), x, dlogits);
            return;
        }
        case Variant::Cheby:
            cheby_backward(std::get<ChebyParams>(params_), std::get<ChebyCache>(cache_),
                           ops_->laplacian(), x, dlogits);
            return;
        case Variant::Horizontal: {
            auto& p = std::get<HorizontalParams>(params_);
            horizontal_backward(p, std::get<HorizontalCache>(cache_),
                                ops_->by_kind(p.operator_kind), x, dlogits);
            return;
        }
        case Variant::Mlp:
            mlp_backward(std::get<MlpParams>(params_), std::get<MlpCache>(cache_), x, dlogits);
            return;
        case Variant::Sgc:
            sgc_backward(std::get<SgcParams>(params_), std::get<SgcCache>(cache_), dlogits);
            return;
    }
}

std::vector<Parameter*> Model::parameters() {
    return std::visit(
        [](auto& p) -> std::vector<Parameter*> {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, SgfParams>) {
                return {&p.alphas, &p.betas, &p.linear.w_in, &p.linear.b_in, &p.linear.w_out};
            } else if constexpr (std::is_same_v<T, ChebyParams> ||
                                 std::is_same_v<T, HorizontalParams>) {
                return {&p.thetas, &p.linear.w_in, &p.linear.b_in, &p.linear.w_out};
            } else if constexpr (std::is_same_v<T, MlpParams>) {
                return {&p.linear.w_in, &p.linear.b_in, &p.linear.w_out};
            } else {
                return {&p.w, &p.b};
            }
        },
        params_);
}

std::vector<DenseMatrix> Model::snapshot() const {
    std::vector<DenseMatrix> values;
    for (Parameter* p : const_cast<Model*>(this)->parameters()) values.push_back(p->value);
    return values;
}

void Model::restore(const std::vector<DenseMatrix>& values) {
    auto params = parameters();
    if (values.size() != params.size()) throw InvalidInput("Model::restore: snapshot mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i]->value.same_shape(values[i]))
            throw InvalidInput("Model::restore: shape mismatch for " + params[i]->name);
        params[i]->value = values[i];
    }
}

void Model::zero_grad() {
    for (Parameter* p : parameters()) p->zero_grad();
}

MonomialFilter Model::learned_filter() const {
    auto basis_of = [](OperatorKind k) {
        return k == OperatorKind::NormalizedLaplacian ? FilterBasis::Laplacian
                                                      : FilterBasis::AugmentedAdjacency;
    };
    switch (spec_.variant) {
        case Variant::Sgf: {
            const auto& p = std::get<SgfParams>(params_);
            return stacked_to_monomial(p.alphas.value.data(), p.betas.value.data(),
                                       basis_of(p.operator_kind));
        }
        case Variant::Cheby: {
            const auto& p = std::get<ChebyParams>(params_);
            return cheby_to_monomial(p.thetas.value.data(), p.lambda_max);
        }
        case Variant::Horizontal: {
            const auto& p = std::get<HorizontalParams>(params_);
            return {p.thetas.value.data(), basis_of(p.operator_kind)};
        }
        case Variant::Mlp:
            return {{1.0}, FilterBasis::AugmentedAdjacency};
        case Variant::Sgc: {
            MonomialFilter f{std::vector<double>(static_cast<std::size_t>(spec_.sgc_hops) + 1, 0.0),
                             FilterBasis::AugmentedAdjacency};
            f.coeffs.back() = 1.0;
            return f;
        }
    }
    return {};
}

std::pair<std::vector<double>, std::vector<double>> Model::filter_scalars() const {
    if (const auto* p = std::get_if<SgfParams>(&params_))
        return {p->alphas.value.data(), p->betas.value.data()};
    return {};
}

}  // namespace sgf
