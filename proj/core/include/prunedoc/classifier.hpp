#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "prunedoc/grid_map.hpp"
#include "prunedoc/imagegrid.hpp"

namespace prunedoc {

inline constexpr std::size_t kDefaultHiddenDim = 256;

/// P^2 * hidden + hidden (b1) + hidden (w2) + 1 (b2).
[[nodiscard]] constexpr std::size_t param_count(std::size_t patch_size, std::size_t hidden_dim) {
    return patch_size * patch_size * hidden_dim + 2 * hidden_dim + 1;
}

/// Two-layer text/background scorer: logit = w2 . relu(W1 x + b1) + b2, with
/// x the patch pixels divided by 255.
struct ClassifierModel {
    std::size_t patch_size = 0;
    std::size_t hidden_dim = 0;
    std::vector<float> w1;  // hidden_dim x patch_size^2, row-major
    std::vector<float> b1;  // hidden_dim
    std::vector<float> w2;  // hidden_dim
    float b2 = 0.0f;

    /// All-zero model of the given shape.
    static ClassifierModel zeros(std::size_t patch_size, std::size_t hidden_dim = kDefaultHiddenDim);

    [[nodiscard]] std::size_t input_dim() const noexcept { return patch_size * patch_size; }
    [[nodiscard]] std::size_t stored_parameter_count() const noexcept {
        return w1.size() + b1.size() + w2.size() + 1;
    }

    friend bool operator==(const ClassifierModel&, const ClassifierModel&) = default;
};

/// Throws ShapeError unless pixels.size() == P^2.
double forward(const ClassifierModel& model, std::span<const std::uint8_t> pixels);
/// Same network on already-normalized inputs in [0, 1].
double forward_normalized(const ClassifierModel& model, std::span<const float> inputs);

/// Logit per patch, in grid layout. Throws ConfigError on patch-size mismatch.
LogitMap classify_grid(const ClassifierModel& model, const PatchGrid& grid);

// -- training ---------------------------------------------------------------

/// Flat storage of labeled P x P patches (label 1 = text, 0 = background).
class PatchDataset {
public:
    explicit PatchDataset(std::size_t patch_size);

    void add(std::span<const std::uint8_t> pixels, std::uint8_t label);

    [[nodiscard]] std::size_t patch_size() const noexcept { return patch_size_; }
    [[nodiscard]] std::size_t size() const noexcept { return labels_.size(); }
    [[nodiscard]] bool empty() const noexcept { return labels_.empty(); }
    [[nodiscard]] std::span<const std::uint8_t> pixels(std::size_t i) const;
    [[nodiscard]] std::uint8_t label(std::size_t i) const { return labels_[i]; }
    [[nodiscard]] std::span<const std::uint8_t> labels() const noexcept { return labels_; }
    [[nodiscard]] std::size_t count(std::uint8_t label) const;

    /// Entries at `indices`, in that order.
    [[nodiscard]] PatchDataset subset(std::span<const std::size_t> indices) const;

    friend bool operator==(const PatchDataset&, const PatchDataset&) = default;

private:
    std::size_t patch_size_;
    std::vector<std::uint8_t> pixels_;
    std::vector<std::uint8_t> labels_;
};

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t batch_size = 256;
    std::size_t epochs = 10;
    std::uint64_t seed = 0;
    std::size_t hidden_dim = kDefaultHiddenDim;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
};

/// Double-precision parameters used during optimisation; layout mirrors
/// ClassifierModel.
struct ClassifierParams {
    std::size_t patch_size = 0;
    std::size_t hidden_dim = 0;
    std::vector<double> w1;
    std::vector<double> b1;
    std::vector<double> w2;
    double b2 = 0.0;

    static ClassifierParams zeros(std::size_t patch_size, std::size_t hidden_dim);
    static ClassifierParams from_model(const ClassifierModel& model);
    [[nodiscard]] ClassifierModel to_model() const;
};

/// Numerically stable BCE on a logit: max(z,0) - z*y + log(1 + exp(-|z|)).
double bce_with_logit(double logit, double label);

/// Mean BCE over the dataset entries named by `indices`.
double mean_bce(const ClassifierParams& params, const PatchDataset& data,
                std::span<const std::size_t> indices);
/// Gradient of mean_bce with respect to every parameter (same layout).
ClassifierParams mean_bce_gradient(const ClassifierParams& params, const PatchDataset& data,
                                   std::span<const std::size_t> indices);

/// Seeded initialisation: W1, w2 ~ N(0, 1/sqrt(fan_in)), biases zero.
ClassifierParams init_params(std::size_t patch_size, std::size_t hidden_dim, std::uint64_t seed);

using EpochObserver = std::function<void(std::size_t epoch, const ClassifierParams& params)>;

/// Adam on mean BCE over seeded mini-batches. Deterministic in (data, cfg).
/// Throws DegenerateDataError when the data is empty or single-class.
ClassifierModel train(const PatchDataset& data, const TrainConfig& cfg,
                      const EpochObserver& observer = {});

// -- evaluation -------------------------------------------------------------

/// Ranking average precision: mean over positives of precision at their rank,
/// scores sorted descending with ties kept in input order.
double average_precision(std::span<const double> scores, std::span<const std::uint8_t> labels);

// -- persistence ------------------------------------------------------------

/// "PDCLS1" + u32 P + u32 hidden + f32 params (W1, b1, w2, b2), little-endian.
std::vector<std::uint8_t> serialize_model(const ClassifierModel& model);
ClassifierModel deserialize_model(std::span<const std::uint8_t> bytes);
void save_model(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel load_model(const std::filesystem::path& path);

}  // namespace prunedoc
