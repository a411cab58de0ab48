#include "sgf/nn.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sgf/error.hpp"

namespace sgf {

DenseMatrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> unif(-limit, limit);
    DenseMatrix w(rows, cols);
    for (double& v : w.data()) v = unif(rng);
    return w;
}

DenseMatrix linear_forward(const DenseMatrix& x, const DenseMatrix& w, const DenseMatrix* bias) {
    if (x.cols() != w.rows())
        throw InvalidInput("linear: input " + shape_string(x) + " vs weight " + shape_string(w));
    DenseMatrix y = matmul(x, w);
    if (bias) {
        if (bias->rows() != 1 || bias->cols() != w.cols())
            throw InvalidInput("linear: bias " + shape_string(*bias) + " vs weight " +
                               shape_string(w));
        for (std::size_t i = 0; i < y.rows(); ++i) {
            auto row = y.row(i);
            for (std::size_t j = 0; j < y.cols(); ++j) row[j] += (*bias)(0, j);
        }
    }
    return y;
}

LinearGrads linear_backward(const DenseMatrix& x, const DenseMatrix& w, const DenseMatrix& g,
                            bool has_bias, bool need_dx) {
    if (g.rows() != x.rows() || g.cols() != w.cols() || x.cols() != w.rows())
        throw InvalidInput("linear_backward: shape mismatch");
    LinearGrads out;
    if (need_dx) out.dx = matmul_nt(g, w);
    out.dw = matmul_tn(x, g);
    if (has_bias) {
        out.dbias = DenseMatrix(1, g.cols());
        for (std::size_t i = 0; i < g.rows(); ++i) {
            auto row = g.row(i);
            for (std::size_t j = 0; j < g.cols(); ++j) out.dbias(0, j) += row[j];
        }
    }
    return out;
}

DenseMatrix relu_forward(const DenseMatrix& x) {
    DenseMatrix y = x;
    for (double& v : y.data()) v = v > 0.0 ? v : 0.0;
    return y;
}

DenseMatrix relu_backward(const DenseMatrix& x, const DenseMatrix& g) {
    if (!x.same_shape(g)) throw InvalidInput("relu_backward: shape mismatch");
    DenseMatrix d = g;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (!(x.data()[i] > 0.0)) d.data()[i] = 0.0;
    return d;
}

DropoutResult dropout_forward(const DenseMatrix& x, double rate, bool training, Rng& rng) {
    if (!(rate >= 0.0 && rate < 1.0)) throw InvalidInput("dropout: rate must be in [0, 1)");
    if (!training || rate == 0.0) return {x, DenseMatrix{}};
    DropoutResult r{x, DenseMatrix(x.rows(), x.cols())};
    const double keep_scale = 1.0 / (1.0 - rate);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double m = unif(rng) < rate ? 0.0 : keep_scale;
        r.mask.data()[i] = m;
        r.out.data()[i] *= m;
    }
    return r;
}

DenseMatrix dropout_backward(const DenseMatrix& mask, const DenseMatrix& g) {
    if (mask.empty()) return g;
    if (!mask.same_shape(g)) throw InvalidInput("dropout_backward: shape mismatch");
    DenseMatrix d = g;
    for (std::size_t i = 0; i < d.size(); ++i) d.data()[i] *= mask.data()[i];
    return d;
}

DenseMatrix log_softmax(const DenseMatrix& logits) {
    DenseMatrix out(logits.rows(), logits.cols());
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        auto row = logits.row(i);
        const double mx = *std::max_element(row.begin(), row.end());
        double s = 0.0;
        for (double v : row) s += std::exp(v - mx);
        const double lse = mx + std::log(s);
        for (std::size_t j = 0; j < row.size(); ++j) out(i, j) = row[j] - lse;
    }
    return out;
}

LossResult nll_loss(const DenseMatrix& logits, std::span<const int> labels,
                    const std::vector<bool>& mask) {
    if (labels.size() != logits.rows() || mask.size() != logits.rows())
        throw InvalidInput("nll_loss: labels/mask length does not match logits rows");
    const auto count = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
    if (count == 0) throw InvalidInput("nll_loss: empty mask");

    const DenseMatrix logp = log_softmax(logits);
    LossResult r{0.0, DenseMatrix(logits.rows(), logits.cols())};
    const double inv = 1.0 / static_cast<double>(count);
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        if (!mask[i]) continue;
        const int y = labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= logits.cols())
            throw InvalidInput("nll_loss: label out of range at row " + std::to_string(i));
        r.loss -= logp(i, static_cast<std::size_t>(y));
        for (std::size_t j = 0; j < logits.cols(); ++j) r.dlogits(i, j) = std::exp(logp(i, j)) * inv;
        r.dlogits(i, static_cast<std::size_t>(y)) -= inv;
    }
    r.loss *= inv;
    return r;
}

double accuracy(const DenseMatrix& logits, std::span<const int> labels,
                const std::vector<bool>& mask) {
    std::size_t total = 0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        if (!mask[i]) continue;
        ++total;
        auto row = logits.row(i);
        std::size_t best = 0;
        for (std::size_t j = 1; j < row.size(); ++j)
            if (row[j] > row[best]) best = j;
        if (static_cast<int>(best) == labels[i]) ++correct;
    }
    return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

GradCheckReport finite_difference_check(const std::function<double()>& loss,
                                        const std::function<void()>& compute_grads,
                                        std::span<Parameter* const> params, double h) {
    for (Parameter* p : params) p->zero_grad();
    compute_grads();

    GradCheckReport report;
    for (Parameter* p : params) {
        ParamCheck check{p->name, 0.0};
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            double& x = p->value.data()[i];
            const double saved = x;
            x = saved + h;
            const double plus = loss();
            x = saved - h;
            const double minus = loss();
            x = saved;
            const double numeric = (plus - minus) / (2.0 * h);
            const double analytic = p->grad.data()[i];
            const double denom = std::max({1.0, std::abs(analytic), std::abs(numeric)});
            check.max_rel_error = std::max(check.max_rel_error, std::abs(analytic - numeric) / denom);
        }
        report.max_rel_error = std::max(report.max_rel_error, check.max_rel_error);
        report.per_parameter.push_back(std::move(check));
    }
    return report;
}

}  // namespace sgf
