#include "prunedoc/toyvit.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "prunedoc/errors.hpp"
#include "prunedoc/rng.hpp"

namespace prunedoc {

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

Matrix gaussian_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double stddev) {
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.gaussian(0.0, stddev);
    }
    return m;
}

RowVector gaussian_row(Rng& rng, Eigen::Index n, double mean, double stddev) {
    RowVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.gaussian(mean, stddev);
    return v;
}

struct LayerNorm {
    RowVector gain;
    RowVector bias;

    Matrix apply(const Matrix& x) const {
        Matrix out(x.rows(), x.cols());
        const double n = static_cast<double>(x.cols());
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const double mean = x.row(i).sum() / n;
            const RowVector centered = x.row(i).array() - mean;
            const double var = centered.squaredNorm() / n;
            out.row(i) = (centered / std::sqrt(var + 1e-5)).cwiseProduct(gain) + bias;
        }
        return out;
    }
};

struct Block {
    LayerNorm norm_attn;
    Matrix wq, wk, wv, wo;  // dim x dim, applied as x * W
    LayerNorm norm_mlp;
    Matrix w_up;            // dim x ffn
    RowVector b_up;
    Matrix w_down;          // ffn x dim
    RowVector b_down;
};

double gelu(double x) {
    const double c = std::sqrt(2.0 / std::numbers::pi);
    return 0.5 * x * (1.0 + std::tanh(c * (x + 0.044715 * x * x * x)));
}

}  // namespace

void ToyViTConfig::validate() const {
    if (layers == 0 || dim == 0 || heads == 0 || ffn == 0 || patch_size == 0) {
        throw ConfigError("toy transformer: all counts must be >= 1");
    }
    if (dim % heads != 0) {
        throw ConfigError("toy transformer: dim must be divisible by heads");
    }
}

std::vector<double> masked_softmax(std::span<const double> logits, std::span<const std::uint8_t> keep) {
    if (logits.size() != keep.size()) {
        throw ShapeError("masked_softmax: logits and keep differ in length");
    }
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < logits.size(); ++i) {
        if (keep[i]) peak = std::max(peak, logits[i]);
    }
    if (peak == -std::numeric_limits<double>::infinity()) {
        throw DegenerateDataError("masked_softmax: every key is masked");
    }
    std::vector<double> out(logits.size(), 0.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        if (keep[i]) {
            out[i] = std::exp(logits[i] - peak);
            sum += out[i];
        }
    }
    for (double& v : out) v /= sum;
    return out;
}

struct ToyViT::Impl {
    ToyViTConfig cfg;
    std::size_t rows = 0;
    std::size_t cols = 0;
    Matrix w_embed;  // P^2 x dim
    RowVector b_embed;
    Matrix pos_table;  // rows*cols x dim (learned mode only)
    std::vector<Block> blocks;
    LayerNorm norm_out;

    RowVector position(std::size_t index) const {
        const auto d = static_cast<Eigen::Index>(cfg.dim);
        if (cfg.pos_mode == PositionMode::learned_2d_table) {
            return pos_table.row(static_cast<Eigen::Index>(index));
        }
        const double row = static_cast<double>(index / cols);
        const double col = static_cast<double>(index % cols);
        RowVector pe = RowVector::Zero(d);
        const Eigen::Index half = d / 2;
        auto encode = [&](Eigen::Index offset, Eigen::Index width, double coord) {
            for (Eigen::Index i = 0; i < width; ++i) {
                const double freq = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) /
                                                          static_cast<double>(std::max<Eigen::Index>(width, 1)));
                pe(offset + i) = (i % 2 == 0) ? std::sin(coord * freq) : std::cos(coord * freq);
            }
        };
        encode(0, half, row);
        encode(half, d - half, col);
        return pe;
    }

    RowVector embed(std::span<const std::uint8_t> pixels, std::size_t index) const {
        RowVector x(static_cast<Eigen::Index>(pixels.size()));
        for (std::size_t i = 0; i < pixels.size(); ++i) {
            x(static_cast<Eigen::Index>(i)) = static_cast<double>(pixels[i]) / 255.0;
        }
        return x * w_embed + b_embed + position(index);
    }

    // keep: which key positions may be attended to (length = x.rows()).
    Matrix run(Matrix x, std::span<const std::uint8_t> keep) const {
        const auto n = x.rows();
        const auto head_dim = static_cast<Eigen::Index>(cfg.dim / cfg.heads);
        const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
        std::vector<double> scores(static_cast<std::size_t>(n));
        for (const Block& block : blocks) {
            const Matrix h = block.norm_attn.apply(x);
            const Matrix q = h * block.wq;
            const Matrix k = h * block.wk;
            const Matrix v = h * block.wv;
            Matrix attended = Matrix::Zero(n, static_cast<Eigen::Index>(cfg.dim));
            for (Eigen::Index head = 0; head < static_cast<Eigen::Index>(cfg.heads); ++head) {
                const Eigen::Index off = head * head_dim;
                for (Eigen::Index i = 0; i < n; ++i) {
                    for (Eigen::Index j = 0; j < n; ++j) {
                        scores[static_cast<std::size_t>(j)] =
                            keep[static_cast<std::size_t>(j)]
                                ? scale * q.row(i).segment(off, head_dim).dot(k.row(j).segment(off, head_dim))
                                : -std::numeric_limits<double>::infinity();
                    }
                    const auto weights = masked_softmax(scores, keep);
                    for (Eigen::Index j = 0; j < n; ++j) {
                        const double w = weights[static_cast<std::size_t>(j)];
                        if (w != 0.0) {
                            attended.row(i).segment(off, head_dim) += w * v.row(j).segment(off, head_dim);
                        }
                    }
                }
            }
            x += attended * block.wo;

            const Matrix m = block.norm_mlp.apply(x);
            Matrix up = (m * block.w_up).rowwise() + block.b_up;
            up = up.unaryExpr([](double z) { return gelu(z); });
            x += (up * block.w_down).rowwise() + block.b_down;
        }
        return norm_out.apply(x);
    }
};

ToyViT::ToyViT(const ToyViTConfig& config, std::size_t grid_rows, std::size_t grid_cols)
    : impl_(std::make_unique<Impl>()) {
    config.validate();
    if (grid_rows == 0 || grid_cols == 0) {
        throw ConfigError("toy transformer: grid must be non-empty");
    }
    Impl& m = *impl_;
    m.cfg = config;
    m.rows = grid_rows;
    m.cols = grid_cols;

    Rng rng(mix_seed(config.seed, 0));
    const auto d = static_cast<Eigen::Index>(config.dim);
    const auto f = static_cast<Eigen::Index>(config.ffn);
    const auto in = static_cast<Eigen::Index>(config.patch_size * config.patch_size);
    auto norm = [&] { return LayerNorm{gaussian_row(rng, d, 1.0, 0.1), gaussian_row(rng, d, 0.0, 0.1)}; };

    m.w_embed = gaussian_matrix(rng, in, d, 1.0 / std::sqrt(static_cast<double>(in)));
    m.b_embed = gaussian_row(rng, d, 0.0, 0.1);
    if (config.pos_mode == PositionMode::learned_2d_table) {
        m.pos_table = gaussian_matrix(rng, static_cast<Eigen::Index>(grid_rows * grid_cols), d, 1.0);
    }
    const double proj_std = 1.0 / std::sqrt(static_cast<double>(config.dim));
    const double down_std = 1.0 / std::sqrt(static_cast<double>(config.ffn));
    for (std::size_t l = 0; l < config.layers; ++l) {
        Block b;
        b.norm_attn = norm();
        b.wq = gaussian_matrix(rng, d, d, proj_std);
        b.wk = gaussian_matrix(rng, d, d, proj_std);
        b.wv = gaussian_matrix(rng, d, d, proj_std);
        b.wo = gaussian_matrix(rng, d, d, proj_std);
        b.norm_mlp = norm();
        b.w_up = gaussian_matrix(rng, d, f, proj_std);
        b.b_up = gaussian_row(rng, f, 0.0, 0.1);
        b.w_down = gaussian_matrix(rng, f, d, down_std);
        b.b_down = gaussian_row(rng, d, 0.0, 0.1);
        m.blocks.push_back(std::move(b));
    }
    m.norm_out = norm();
}

ToyViT::~ToyViT() = default;
ToyViT::ToyViT(ToyViT&&) noexcept = default;
ToyViT& ToyViT::operator=(ToyViT&&) noexcept = default;

const ToyViTConfig& ToyViT::config() const noexcept { return impl_->cfg; }
std::size_t ToyViT::grid_rows() const noexcept { return impl_->rows; }
std::size_t ToyViT::grid_cols() const noexcept { return impl_->cols; }

namespace {

TokenOutputs to_outputs(const Matrix& x, std::span<const Eigen::Index> rows) {
    TokenOutputs out;
    out.count = rows.size();
    out.dim = static_cast<std::size_t>(x.cols());
    out.values.reserve(out.count * out.dim);
    for (const Eigen::Index r : rows) {
        for (Eigen::Index c = 0; c < x.cols(); ++c) out.values.push_back(x(r, c));
    }
    return out;
}

}  // namespace

TokenOutputs ToyViT::forward_full_masked(const PatchGrid& grid, const BinaryMask& mask) const {
    const Impl& m = *impl_;
    if (grid.patch_size() != m.cfg.patch_size || grid.rows() != m.rows || grid.cols() != m.cols) {
        throw ConfigError("grid does not match the toy transformer's patch size or grid shape");
    }
    if (mask.rows() != grid.rows() || mask.cols() != grid.cols()) {
        throw ConfigError("mask dimensions differ from the grid");
    }
    if (mask.count_ones() == 0) {
        throw DegenerateDataError("masked forward needs at least one retained token");
    }
    const auto n = static_cast<Eigen::Index>(grid.size());
    Matrix x(n, static_cast<Eigen::Index>(m.cfg.dim));
    std::vector<std::uint8_t> pixels(grid.patch_size() * grid.patch_size());
    for (std::size_t r = 0; r < grid.rows(); ++r) {
        for (std::size_t c = 0; c < grid.cols(); ++c) {
            grid.copy_pixels(r, c, pixels);
            x.row(static_cast<Eigen::Index>(grid.index_of(r, c))) = m.embed(pixels, grid.index_of(r, c));
        }
    }
    const Matrix y = m.run(std::move(x), mask.bits());
    std::vector<Eigen::Index> retained;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask.bits()[i]) retained.push_back(static_cast<Eigen::Index>(i));
    }
    return to_outputs(y, retained);
}

TokenOutputs ToyViT::forward_pruned(const PrunedTokenSet& set) const {
    const Impl& m = *impl_;
    if (set.patch_size != m.cfg.patch_size || set.grid_rows != m.rows || set.grid_cols != m.cols) {
        throw ConfigError("token set does not match the toy transformer's patch size or grid shape");
    }
    if (set.empty()) {
        throw DegenerateDataError("pruned forward needs at least one token");
    }
    const auto n = static_cast<Eigen::Index>(set.size());
    Matrix x(n, static_cast<Eigen::Index>(m.cfg.dim));
    for (Eigen::Index i = 0; i < n; ++i) {
        const Token& t = set.tokens[static_cast<std::size_t>(i)];
        if (t.assigned_index >= set.grid_size()) {
            throw ConfigError("assigned index " + std::to_string(t.assigned_index) + " outside the grid");
        }
        if (t.pixels.size() != m.cfg.patch_size * m.cfg.patch_size) {
            throw ShapeError("token pixel count does not match the patch size");
        }
        x.row(i) = m.embed(t.pixels, t.assigned_index);
    }
    const std::vector<std::uint8_t> keep(static_cast<std::size_t>(n), 1);
    const Matrix y = m.run(std::move(x), keep);
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = i;
    return to_outputs(y, rows);
}

double max_abs_diff(const TokenOutputs& a, const TokenOutputs& b) {
    if (a.count != b.count || a.dim != b.dim) {
        throw ShapeError("token outputs differ in shape");
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
    }
    return worst;
}

bool all_close(const TokenOutputs& a, const TokenOutputs& b, double rel, double abs_floor) {
    if (a.count != b.count || a.dim != b.dim) {
        return false;
    }
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double tol = std::max(rel * std::abs(b.values[i]), abs_floor);
        if (!(std::abs(a.values[i] - b.values[i]) <= tol)) {
            return false;
        }
    }
    return true;
}

}  // namespace prunedoc
