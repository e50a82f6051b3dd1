#include "prunedoc/classifier.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "prunedoc/errors.hpp"
#include "prunedoc/rng.hpp"

namespace prunedoc {

namespace {

using RowMatrixF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> as_vector(const std::vector<T>& v) {
    return {v.data(), static_cast<Eigen::Index>(v.size())};
}

template <typename T>
Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> as_vector(std::vector<T>& v) {
    return {v.data(), static_cast<Eigen::Index>(v.size())};
}

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void check_shape(const ClassifierModel& model) {
    const std::size_t d = model.input_dim();
    if (model.patch_size == 0 || model.hidden_dim == 0 || model.w1.size() != model.hidden_dim * d ||
        model.b1.size() != model.hidden_dim || model.w2.size() != model.hidden_dim) {
        throw ShapeError("classifier parameters do not match declared shape");
    }
}

RowMatrixD batch_inputs(const PatchDataset& data, std::span<const std::size_t> indices) {
    const auto d = static_cast<Eigen::Index>(data.patch_size() * data.patch_size());
    RowMatrixD x(static_cast<Eigen::Index>(indices.size()), d);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const auto px = data.pixels(indices[i]);
        for (Eigen::Index j = 0; j < d; ++j) {
            x(static_cast<Eigen::Index>(i), j) = static_cast<double>(px[static_cast<std::size_t>(j)]) / 255.0;
        }
    }
    return x;
}

// Forward + backward for one batch. Returns mean loss; fills grad when given.
double batch_loss_and_grad(const ClassifierParams& p, const RowMatrixD& x,
                           const Eigen::VectorXd& y, ClassifierParams* grad) {
    const auto h = static_cast<Eigen::Index>(p.hidden_dim);
    const auto d = static_cast<Eigen::Index>(p.patch_size * p.patch_size);
    const Eigen::Map<const RowMatrixD> w1(p.w1.data(), h, d);
    const auto b1 = as_vector(p.b1);
    const auto w2 = as_vector(p.w2);
    const auto n = x.rows();
    const double inv_n = 1.0 / static_cast<double>(n);

    RowMatrixD pre = x * w1.transpose();
    pre.rowwise() += b1.transpose();
    const RowMatrixD act = pre.cwiseMax(0.0);
    const Eigen::VectorXd logits = (act * w2).array() + p.b2;

    double loss = 0.0;
    Eigen::VectorXd dlogit(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        loss += bce_with_logit(logits(i), y(i));
        dlogit(i) = (sigmoid(logits(i)) - y(i)) * inv_n;
    }
    loss *= inv_n;

    if (grad != nullptr) {
        *grad = ClassifierParams::zeros(p.patch_size, p.hidden_dim);
        as_vector(grad->w2) = act.transpose() * dlogit;
        grad->b2 = dlogit.sum();
        RowMatrixD dpre = dlogit * w2.transpose();
        dpre = dpre.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
        Eigen::Map<RowMatrixD>(grad->w1.data(), h, d) = dpre.transpose() * x;
        as_vector(grad->b1) = dpre.colwise().sum().transpose();
    }
    return loss;
}

Eigen::VectorXd batch_labels(const PatchDataset& data, std::span<const std::size_t> indices) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(indices.size()));
    for (std::size_t i = 0; i < indices.size(); ++i) {
        y(static_cast<Eigen::Index>(i)) = data.label(indices[i]);
    }
    return y;
}

struct AdamSlot {
    std::vector<double> m;
    std::vector<double> v;

    explicit AdamSlot(std::size_t n) : m(n, 0.0), v(n, 0.0) {}

    void step(std::span<double> param, std::span<const double> grad, const TrainConfig& cfg,
              double correction1, double correction2) {
        for (std::size_t i = 0; i < param.size(); ++i) {
            m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * grad[i];
            v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * grad[i] * grad[i];
            const double m_hat = m[i] / correction1;
            const double v_hat = v[i] / correction2;
            param[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
        }
    }
};

}  // namespace

ClassifierModel ClassifierModel::zeros(std::size_t patch_size, std::size_t hidden_dim) {
    ClassifierModel model;
    model.patch_size = patch_size;
    model.hidden_dim = hidden_dim;
    model.w1.assign(hidden_dim * patch_size * patch_size, 0.0f);
    model.b1.assign(hidden_dim, 0.0f);
    model.w2.assign(hidden_dim, 0.0f);
    return model;
}

double forward_normalized(const ClassifierModel& model, std::span<const float> inputs) {
    check_shape(model);
    if (inputs.size() != model.input_dim()) {
        throw ShapeError("classifier expects " + std::to_string(model.input_dim()) +
                         " inputs, got " + std::to_string(inputs.size()));
    }
    const auto h = static_cast<Eigen::Index>(model.hidden_dim);
    const auto d = static_cast<Eigen::Index>(model.input_dim());
    const Eigen::Map<const RowMatrixF> w1(model.w1.data(), h, d);
    const Eigen::Map<const Eigen::VectorXf> x(inputs.data(), d);
    const Eigen::VectorXf hidden = (w1 * x + as_vector(model.b1)).cwiseMax(0.0f);
    return static_cast<double>(hidden.dot(as_vector(model.w2)) + model.b2);
}

double forward(const ClassifierModel& model, std::span<const std::uint8_t> pixels) {
    if (pixels.size() != model.input_dim()) {
        throw ShapeError("classifier expects " + std::to_string(model.input_dim()) +
                         " pixels, got " + std::to_string(pixels.size()));
    }
    std::vector<float> x(pixels.size());
    std::transform(pixels.begin(), pixels.end(), x.begin(),
                   [](std::uint8_t v) { return static_cast<float>(v) / 255.0f; });
    return forward_normalized(model, x);
}

LogitMap classify_grid(const ClassifierModel& model, const PatchGrid& grid) {
    if (model.patch_size != grid.patch_size()) {
        throw ConfigError("model patch size " + std::to_string(model.patch_size) +
                          " does not match grid patch size " + std::to_string(grid.patch_size()));
    }
    LogitMap logits(grid.rows(), grid.cols());
    std::vector<std::uint8_t> pixels(grid.patch_size() * grid.patch_size());
    for (std::size_t r = 0; r < grid.rows(); ++r) {
        for (std::size_t c = 0; c < grid.cols(); ++c) {
            grid.copy_pixels(r, c, pixels);
            logits.at(r, c) = forward(model, pixels);
        }
    }
    return logits;
}

// -- PatchDataset -------------------------------------------------------------

PatchDataset::PatchDataset(std::size_t patch_size) : patch_size_(patch_size) {
    if (patch_size == 0) {
        throw ConfigError("patch size must be at least 1");
    }
}

void PatchDataset::add(std::span<const std::uint8_t> pixels, std::uint8_t label) {
    if (pixels.size() != patch_size_ * patch_size_) {
        throw ShapeError("dataset entry has " + std::to_string(pixels.size()) + " pixels, expected " +
                         std::to_string(patch_size_ * patch_size_));
    }
    if (label > 1) {
        throw MalformedInputError("labels must be 0 or 1");
    }
    pixels_.insert(pixels_.end(), pixels.begin(), pixels.end());
    labels_.push_back(label);
}

std::span<const std::uint8_t> PatchDataset::pixels(std::size_t i) const {
    const std::size_t n = patch_size_ * patch_size_;
    return std::span<const std::uint8_t>(pixels_).subspan(i * n, n);
}

std::size_t PatchDataset::count(std::uint8_t label) const {
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

PatchDataset PatchDataset::subset(std::span<const std::size_t> indices) const {
    PatchDataset out(patch_size_);
    out.pixels_.reserve(indices.size() * patch_size_ * patch_size_);
    out.labels_.reserve(indices.size());
    for (const std::size_t i : indices) {
        out.add(pixels(i), labels_[i]);
    }
    return out;
}

// -- ClassifierParams ---------------------------------------------------------

ClassifierParams ClassifierParams::zeros(std::size_t patch_size, std::size_t hidden_dim) {
    ClassifierParams p;
    p.patch_size = patch_size;
    p.hidden_dim = hidden_dim;
    p.w1.assign(hidden_dim * patch_size * patch_size, 0.0);
    p.b1.assign(hidden_dim, 0.0);
    p.w2.assign(hidden_dim, 0.0);
    return p;
}

ClassifierParams ClassifierParams::from_model(const ClassifierModel& model) {
    check_shape(model);
    ClassifierParams p;
    p.patch_size = model.patch_size;
    p.hidden_dim = model.hidden_dim;
    p.w1.assign(model.w1.begin(), model.w1.end());
    p.b1.assign(model.b1.begin(), model.b1.end());
    p.w2.assign(model.w2.begin(), model.w2.end());
    p.b2 = model.b2;
    return p;
}

ClassifierModel ClassifierParams::to_model() const {
    ClassifierModel model;
    model.patch_size = patch_size;
    model.hidden_dim = hidden_dim;
    auto narrow = [](const std::vector<double>& v) {
        std::vector<float> out(v.size());
        std::transform(v.begin(), v.end(), out.begin(), [](double x) { return static_cast<float>(x); });
        return out;
    };
    model.w1 = narrow(w1);
    model.b1 = narrow(b1);
    model.w2 = narrow(w2);
    model.b2 = static_cast<float>(b2);
    return model;
}

double bce_with_logit(double logit, double label) {
    return std::max(logit, 0.0) - logit * label + std::log1p(std::exp(-std::abs(logit)));
}

double mean_bce(const ClassifierParams& params, const PatchDataset& data,
                std::span<const std::size_t> indices) {
    if (indices.empty()) {
        throw DegenerateDataError("mean BCE over an empty selection");
    }
    return batch_loss_and_grad(params, batch_inputs(data, indices), batch_labels(data, indices),
                               nullptr);
}

ClassifierParams mean_bce_gradient(const ClassifierParams& params, const PatchDataset& data,
                                   std::span<const std::size_t> indices) {
    if (indices.empty()) {
        throw DegenerateDataError("gradient over an empty selection");
    }
    ClassifierParams grad;
    batch_loss_and_grad(params, batch_inputs(data, indices), batch_labels(data, indices), &grad);
    return grad;
}

ClassifierParams init_params(std::size_t patch_size, std::size_t hidden_dim, std::uint64_t seed) {
    if (patch_size == 0 || hidden_dim == 0) {
        throw ConfigError("patch size and hidden dimension must be at least 1");
    }
    ClassifierParams p = ClassifierParams::zeros(patch_size, hidden_dim);
    Rng rng(mix_seed(seed, 0));
    const double w1_std = 1.0 / std::sqrt(static_cast<double>(patch_size * patch_size));
    const double w2_std = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
    for (double& w : p.w1) w = rng.gaussian(0.0, w1_std);
    for (double& w : p.w2) w = rng.gaussian(0.0, w2_std);
    return p;
}

ClassifierModel train(const PatchDataset& data, const TrainConfig& cfg, const EpochObserver& observer) {
    if (!(cfg.learning_rate > 0.0) || cfg.batch_size == 0 || cfg.epochs == 0 || cfg.hidden_dim == 0) {
        throw ConfigError("train: learning_rate > 0, batch_size >= 1, epochs >= 1 required");
    }
    if (data.empty()) {
        throw DegenerateDataError("training set is empty");
    }
    if (data.count(0) == 0 || data.count(1) == 0) {
        throw DegenerateDataError("training set contains a single class");
    }

    ClassifierParams params = init_params(data.patch_size(), cfg.hidden_dim, cfg.seed);
    AdamSlot adam_w1(params.w1.size());
    AdamSlot adam_b1(params.b1.size());
    AdamSlot adam_w2(params.w2.size());
    AdamSlot adam_b2(1);

    Rng order_rng(mix_seed(cfg.seed, 1));
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    std::size_t step = 0;
    ClassifierParams grad;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        order_rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(start + cfg.batch_size, order.size());
            const std::span<const std::size_t> batch(order.data() + start, stop - start);
            batch_loss_and_grad(params, batch_inputs(data, batch), batch_labels(data, batch), &grad);

            ++step;
            const double c1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(step));
            adam_w1.step(params.w1, grad.w1, cfg, c1, c2);
            adam_b1.step(params.b1, grad.b1, cfg, c1, c2);
            adam_w2.step(params.w2, grad.w2, cfg, c1, c2);
            adam_b2.step(std::span<double>(&params.b2, 1), std::span<const double>(&grad.b2, 1), cfg,
                         c1, c2);
        }
        if (observer) {
            observer(epoch, params);
        }
    }
    return params.to_model();
}

}  // namespace prunedoc
