#include "prunedoc/costmodel.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "prunedoc/errors.hpp"

namespace prunedoc {

void PipelineProfile::validate() const {
    if (vis_layers == 0 || vis_dim == 0 || vis_ffn == 0 || vis_heads == 0 || merge_factor == 0 ||
        llm_layers == 0 || llm_dim == 0 || llm_ffn == 0) {
        throw ConfigError("profile '" + name + "': all layer counts and dimensions must be >= 1");
    }
}

LayerFlops stack_flops(std::size_t layers, std::size_t dim, std::size_t ffn, double n) {
    const double l = static_cast<double>(layers);
    const double d = static_cast<double>(dim);
    const double f = static_cast<double>(ffn);
    return LayerFlops{
        l * 8.0 * n * d * d,
        l * 4.0 * n * n * d,
        l * 4.0 * n * d * f,
    };
}

double flops_encoder(const PipelineProfile& profile, std::size_t n_patches) {
    return stack_flops(profile.vis_layers, profile.vis_dim, profile.vis_ffn,
                       static_cast<double>(n_patches))
        .total();
}

double flops_decoder_prefill(const PipelineProfile& profile, std::size_t n_visual, std::size_t n_text) {
    return stack_flops(profile.llm_layers, profile.llm_dim, profile.llm_ffn,
                       static_cast<double>(n_visual + n_text))
        .total();
}

std::size_t decoder_visual_tokens(const PipelineProfile& profile, std::size_t n_patches) {
    return (n_patches + profile.merge_factor - 1) / profile.merge_factor;
}

double pipeline_flops(const PipelineProfile& profile, std::size_t n_patches) {
    return flops_encoder(profile, n_patches) +
           flops_decoder_prefill(profile, decoder_visual_tokens(profile, n_patches), profile.text_tokens);
}

ReductionReport reduction_report(const PipelineProfile& profile, std::size_t n_total_patches,
                                 std::size_t n_retained_patches) {
    profile.validate();
    if (n_total_patches == 0 || n_retained_patches > n_total_patches) {
        throw ConfigError("reduction report needs 0 <= retained <= total and total >= 1");
    }
    ReductionReport report;
    const double r = static_cast<double>(n_retained_patches) / static_cast<double>(n_total_patches);
    report.token_reduction = 100.0 * (1.0 - r);
    report.original_flops = pipeline_flops(profile, n_total_patches);
    report.pruned_flops = pipeline_flops(profile, n_retained_patches);
    report.flops_reduction = 100.0 * (1.0 - report.pruned_flops / report.original_flops);
    return report;
}

PipelineProfile builtin_profile_3b() {
    PipelineProfile p;
    p.name = "3b-like";
    p.vis_layers = 32;
    p.vis_dim = 1280;
    p.vis_ffn = 3420;
    p.vis_heads = 16;
    p.merge_factor = 4;
    p.llm_layers = 36;
    p.llm_dim = 2048;
    p.llm_ffn = 11008;
    p.text_tokens = 64;
    return p;
}

PipelineProfile builtin_profile_7b() {
    PipelineProfile p = builtin_profile_3b();
    p.name = "7b-like";
    p.llm_layers = 28;
    p.llm_dim = 3584;
    p.llm_ffn = 18944;
    return p;
}

std::vector<PipelineProfile> builtin_profiles() { return {builtin_profile_3b(), builtin_profile_7b()}; }

std::string format_profile(const PipelineProfile& p) {
    nlohmann::ordered_json doc;
    doc["name"] = p.name;
    doc["vis_layers"] = p.vis_layers;
    doc["vis_dim"] = p.vis_dim;
    doc["vis_ffn"] = p.vis_ffn;
    doc["vis_heads"] = p.vis_heads;
    doc["merge_factor"] = p.merge_factor;
    doc["llm_layers"] = p.llm_layers;
    doc["llm_dim"] = p.llm_dim;
    doc["llm_ffn"] = p.llm_ffn;
    doc["text_tokens"] = p.text_tokens;
    return doc.dump(2) + "\n";
}

PipelineProfile parse_profile(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("profile is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ConfigError("profile must be a JSON object");
    }
    PipelineProfile p;
    auto count = [&](const char* key) -> std::size_t {
        if (!doc.contains(key) || !doc[key].is_number_unsigned()) {
            throw ConfigError(std::string("profile field '") + key + "' missing or not a count");
        }
        return doc[key].get<std::size_t>();
    };
    p.name = doc.value("name", std::string("custom"));
    p.vis_layers = count("vis_layers");
    p.vis_dim = count("vis_dim");
    p.vis_ffn = count("vis_ffn");
    p.vis_heads = count("vis_heads");
    p.merge_factor = count("merge_factor");
    p.llm_layers = count("llm_layers");
    p.llm_dim = count("llm_dim");
    p.llm_ffn = count("llm_ffn");
    p.text_tokens = count("text_tokens");
    p.validate();
    return p;
}

PipelineProfile resolve_profile(const std::string& name_or_path) {
    for (const auto& p : builtin_profiles()) {
        if (p.name == name_or_path) {
            return p;
        }
    }
    std::ifstream in(name_or_path, std::ios::binary);
    if (!in) {
        throw ConfigError("unknown profile '" + name_or_path + "' (not a built-in name or readable file)");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_profile(buffer.str());
}

}  // namespace prunedoc
