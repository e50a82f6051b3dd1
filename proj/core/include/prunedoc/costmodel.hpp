#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace prunedoc {

/// Shape of a vision-encoder + connector + language-decoder pipeline, used
/// only for analytic FLOPs ratios.
struct PipelineProfile {
    std::string name;
    std::size_t vis_layers = 1;
    std::size_t vis_dim = 1;
    std::size_t vis_ffn = 1;
    std::size_t vis_heads = 1;
    std::size_t merge_factor = 1;  ///< patches per decoder visual token
    std::size_t llm_layers = 1;
    std::size_t llm_dim = 1;
    std::size_t llm_ffn = 1;
    std::size_t text_tokens = 0;   ///< prompt length in the prefill

    /// Throws ConfigError when a count is zero.
    void validate() const;

    friend bool operator==(const PipelineProfile&, const PipelineProfile&) = default;
};

/// FLOPs of one transformer stack over a sequence of n tokens, with
/// multiply-accumulate counted as 2 FLOPs:
///   layers * (8 n d^2 + 4 n^2 d + 4 n d f).
struct LayerFlops {
    double projections = 0.0;  ///< 8 n d^2 (QKV + output)
    double attention = 0.0;    ///< 4 n^2 d (scores + weighted values)
    double mlp = 0.0;          ///< 4 n d f

    [[nodiscard]] double total() const noexcept { return projections + attention + mlp; }
};

LayerFlops stack_flops(std::size_t layers, std::size_t dim, std::size_t ffn, double n_tokens);

double flops_encoder(const PipelineProfile& profile, std::size_t n_patches);
double flops_decoder_prefill(const PipelineProfile& profile, std::size_t n_visual, std::size_t n_text);

/// ceil(n_patches / merge_factor).
std::size_t decoder_visual_tokens(const PipelineProfile& profile, std::size_t n_patches);

/// Encoder plus decoder prefill for an image contributing n_patches.
double pipeline_flops(const PipelineProfile& profile, std::size_t n_patches);

struct ReductionReport {
    double token_reduction = 0.0;  ///< percent
    double flops_reduction = 0.0;  ///< percent
    double original_flops = 0.0;
    double pruned_flops = 0.0;
};

/// Requires 0 <= retained <= total and total >= 1 (ConfigError otherwise).
ReductionReport reduction_report(const PipelineProfile& profile, std::size_t n_total_patches,
                                 std::size_t n_retained_patches);

/// Placeholder shapes loosely sized like 3B / 7B document VLMs.
PipelineProfile builtin_profile_3b();
PipelineProfile builtin_profile_7b();
std::vector<PipelineProfile> builtin_profiles();

std::string format_profile(const PipelineProfile& profile);
PipelineProfile parse_profile(const std::string& json_text);
/// Accepts a built-in name ("3b-like", "7b-like") or a path to a JSON file.
PipelineProfile resolve_profile(const std::string& name_or_path);

}  // namespace prunedoc
